"""Constrained firefly search over the eight-dimensional gain vector.

Fireflies carry candidate gain vectors; brightness is the reciprocal of a
tracking objective combining mean and peak error. Candidates move toward
brighter ones with exponentially distance-decaying attraction plus a random
perturbation. A feasibility gate guards the plant: candidates that fail it
are never simulated and receive a fixed penalty objective instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BudgetExhaustedError

_BRIGHTNESS_FLOOR = 1e-12


@dataclass(frozen=True)
class FaConfig:
    """Search configuration: population, box bounds and movement constants.

    ``gamma_fa`` defaults to 1/diag^2 of the box so the attraction length
    scale matches the search volume; ``alpha`` anneals geometrically by
    ``alpha_decay`` each generation.
    """

    bounds: tuple[tuple[float, float], ...]
    n: int = 20
    max_generations: int = 100
    beta0: float = 1.0
    gamma_fa: float | None = None
    alpha: float = 1.0
    alpha_decay: float = 0.97
    lambda_tradeoff: float = 1.0
    penalty: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"population must hold at least 2 fireflies, got {self.n}")
        if self.max_generations < 1:
            raise ValueError("need at least one generation")
        if not self.beta0 > 0.0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        if self.gamma_fa is not None and not self.gamma_fa > 0.0:
            raise ValueError(f"gamma_fa must be positive, got {self.gamma_fa}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not 0.0 < self.alpha_decay <= 1.0:
            raise ValueError(f"alpha_decay must be in (0, 1], got {self.alpha_decay}")
        if self.lambda_tradeoff < 0.0:
            raise ValueError("lambda_tradeoff must be non-negative")
        if not self.penalty > 0.0:
            raise ValueError(f"penalty must be positive, got {self.penalty}")
        for low, high in self.bounds:
            if not high > low:
                raise ValueError(f"empty box dimension [{low}, {high}]")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def lows(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    def highs(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    def effective_gamma(self) -> float:
        if self.gamma_fa is not None:
            return self.gamma_fa
        diag_sq = float(np.sum((self.highs() - self.lows()) ** 2))
        return 1.0 / diag_sq if diag_sq > 0.0 else 1.0


@dataclass(frozen=True)
class Firefly:
    """One candidate: position, objective value, brightness, gate outcome."""

    s: np.ndarray
    objective: float
    brightness: float
    feasible: bool


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_h: float
    mean_h: float
    feasible_count: int


def tracking_objective(trace, lambda_tradeoff: float) -> float:
    """Mean absolute tracking error plus a weighted peak error.

        h = mean(|xd - x|) + lambda * max(|xd - x|)

    over every sample of the trace.
    """
    xd = np.asarray(trace.xd, dtype=float)
    x = np.asarray(trace.x, dtype=float)
    if xd.size == 0:
        raise ValueError("cannot score an empty trace")
    err = np.abs(xd - x)
    return float(err.mean() + lambda_tradeoff * err.max())


def distance(si, sj) -> float:
    """Euclidean distance between two candidate vectors."""
    diff = np.asarray(si, dtype=float) - np.asarray(sj, dtype=float)
    return float(math.sqrt(float(np.dot(diff, diff))))


def attractiveness(beta0: float, gamma_fa: float, r: float) -> float:
    """beta0 * exp(-gamma * r^2)."""
    return beta0 * math.exp(-gamma_fa * r * r)


def move(si, sj, *, beta0: float, gamma_fa: float, alpha: float,
         lows: np.ndarray, highs: np.ndarray,
         rng: np.random.Generator) -> np.ndarray:
    """Move candidate ``si`` toward the brighter ``sj``.

    Per component: s_i <- s_i + beta0*exp(-gamma*r^2)*(s_j - s_i)
    + alpha*(delta - 1/2), clamped to the box. ``delta`` is uniform on
    [0, 1) so the randomization is zero-mean; a biased step here stalls the
    constrained search long before the benchmark accuracy is reached.
    """
    si = np.asarray(si, dtype=float)
    sj = np.asarray(sj, dtype=float)
    beta = attractiveness(beta0, gamma_fa, distance(si, sj))
    delta = rng.uniform(0.0, 1.0, si.size)
    moved = si + beta * (sj - si) + alpha * (delta - 0.5)
    return np.minimum(np.maximum(moved, lows), highs)


def run(config: FaConfig,
        evaluate: Callable[[np.ndarray], object],
        gate: Callable[[np.ndarray], object],
        ) -> tuple[Firefly, list[GenerationStats]]:
    """Run the constrained search and return the best feasible firefly.

    ``gate`` maps a candidate vector to a report with a ``feasible`` flag;
    ``evaluate`` maps a feasible candidate to a simulation trace scored by
    :func:`tracking_objective`. Infeasible candidates are never evaluated
    and score the configured penalty. Each firefly consumes its own seeded
    random stream, so results are reproducible regardless of evaluation
    order. Raises :class:`BudgetExhaustedError` when no feasible candidate
    appears within the generation budget.
    """
    dim = config.dim
    lows = config.lows()
    highs = config.highs()
    gamma_fa = config.effective_gamma()
    seeds = np.random.SeedSequence(config.seed).spawn(config.n + 1)
    init_rng = np.random.default_rng(seeds[0])
    move_rngs = [np.random.default_rng(s) for s in seeds[1:]]

    pop = init_rng.uniform(lows, highs, size=(config.n, dim))
    best: Firefly | None = None
    best_infeasible: Firefly | None = None
    history: list[GenerationStats] = []
    alpha = config.alpha

    for gen in range(config.max_generations):
        objectives = np.empty(config.n)
        brightness = np.empty(config.n)
        feasible_flags = np.empty(config.n, dtype=bool)
        for i in range(config.n):
            candidate = pop[i]
            report = gate(candidate)
            if report.feasible:
                trace = evaluate(candidate)
                h = tracking_objective(trace, config.lambda_tradeoff)
            else:
                h = config.penalty
            objectives[i] = h
            brightness[i] = 1.0 / (h + _BRIGHTNESS_FLOOR)
            feasible_flags[i] = report.feasible
            record = Firefly(s=candidate.copy(), objective=h,
                             brightness=brightness[i],
                             feasible=report.feasible)
            if report.feasible:
                if best is None or h < best.objective:
                    best = record
            elif best_infeasible is None:
                best_infeasible = record

        history.append(GenerationStats(
            generation=gen,
            best_h=best.objective if best is not None else float("inf"),
            mean_h=float(objectives.mean()),
            feasible_count=int(feasible_flags.sum()),
        ))

        # Synchronous update: attractors and brightness are this
        # generation's snapshot; each firefly accumulates its own moves.
        snapshot = pop.copy()
        for i in range(config.n):
            position = snapshot[i].copy()
            rng = move_rngs[i]
            for j in range(config.n):
                if brightness[i] < brightness[j]:
                    position = move(position, snapshot[j], beta0=config.beta0,
                                    gamma_fa=gamma_fa, alpha=alpha,
                                    lows=lows, highs=highs, rng=rng)
            pop[i] = position
        alpha *= config.alpha_decay

    if best is None:
        raise BudgetExhaustedError(
            f"no feasible candidate in {config.max_generations} generations "
            f"of {config.n} fireflies",
            best_infeasible=best_infeasible,
        )
    return best, history


def write_history_csv(history: Sequence[GenerationStats], path) -> None:
    """Write the per-generation record as CSV."""
    lines = ["generation,best_h,mean_h,feasible_count"]
    for row in history:
        lines.append(f"{row.generation},{row.best_h:.12g},"
                     f"{row.mean_h:.12g},{row.feasible_count}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
