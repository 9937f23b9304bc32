"""Scenario orchestration: closed-loop runs, metrics and experiment families.

A scenario couples a plant truth (possibly perturbed and loaded), the
controller's nominal model, a disturbance, a reference trajectory and one of
the four control laws. Each run produces a uniformly sampled trace, tracking
metrics over an evaluation window, and the feasibility report for the gains.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from . import control, plant
from .control import (ControlOutput, ProxyState, PsmcGains, Reference,
                      SmcGains, proxy_substeps)
from .errors import (ConfigError, InfeasibleGainsError,
                     SimulationDivergedError, SingularGainError)
from .observer import ObserverState, lambda1_bound, observer_step
from .plant import DisturbanceProfile, PlantState, PmaParams
from .stability import StabilityReport, check_feasibility
from .trajectory import FIXED_SINE, LINEAR_CHIRP, Trajectory, reference_at

IDO_PSMC = "ido-psmc"
PSMC = "psmc"
DO_SMC = "do-smc"
SMC = "smc"
CONTROLLERS = (IDO_PSMC, PSMC, DO_SMC, SMC)

_PROXY_FAMILY = (IDO_PSMC, PSMC)
_OBSERVER_FAMILY = (IDO_PSMC, DO_SMC)

#: Default velocity kick (in S_p units, m/s) one proxy substep may impart
#: through the switching force; sizes the proxy substep count so the
#: sliding band stays resolved. Scenario-overridable.
DEFAULT_PROXY_RESOLUTION = 0.02
_MAX_SWITCH_SUBSTEPS = 160

TRACE_COLUMNS = ("t", "x_d", "x", "x_p", "u", "S_q", "S_p", "tau",
                 "tau_hat", "taudot_hat", "saturated")

MP_SWEEP_VALUES = (0.5, 1.0, 5.0, 10.0, 15.0)
LOAD_SWEEP_VALUES = (0.0, 2.5, 5.0)

FAMILIES = ("mp-sweep", "fixed-freq-compare", "chirp-compare", "load-sweep")


@dataclass(frozen=True)
class Scenario:
    """Everything one closed-loop run needs."""

    trajectory: Trajectory
    duration: float
    dt: float
    plant: PmaParams
    nominal: PmaParams
    disturbance: DisturbanceProfile
    controller: str
    gains: PsmcGains
    smc: SmcGains | None = None
    load_mass: float = 0.0
    window: tuple[float, float] = (2.0, 20.0)
    seed: int = 0
    eps: float | None = None       # override for the gate's disturbance bound
    force: bool = False            # run even when the gate fails
    proxy_resolution: float = DEFAULT_PROXY_RESOLUTION
    proxy_substep_override: int | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if not self.duration > 0.0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.controller not in CONTROLLERS:
            raise ConfigError(
                f"unknown controller {self.controller!r}; expected one of "
                f"{CONTROLLERS}"
            )
        w0, w1 = self.window
        if not (0.0 <= w0 < w1 <= self.duration + 1e-9):
            raise ConfigError(
                f"metrics window {self.window} must lie inside "
                f"[0, {self.duration}]"
            )
        n = self.duration / self.dt
        if abs(n - round(n)) > 1e-6:
            raise ConfigError(
                f"duration {self.duration} must be an integer number of "
                f"steps of dt={self.dt}"
            )
        if self.load_mass < 0.0:
            raise ConfigError(f"load mass must be non-negative, got {self.load_mass}")
        if not self.proxy_resolution > 0.0:
            raise ConfigError(
                f"proxy resolution must be positive, got {self.proxy_resolution}"
            )

    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    def effective_plant(self) -> PmaParams:
        return (self.plant.with_extra_mass(self.load_mass)
                if self.load_mass else self.plant)

    def smc_gains(self) -> SmcGains:
        """Baseline switching-law gains; defaults share the manifold with
        the proxy gain set and use the bench switching authority."""
        if self.smc is not None:
            return self.smc
        return SmcGains(c1=self.gains.c1, c2=self.gains.c2, k_sw=100.0,
                        phi=0.01)


@dataclass
class SimTrace:
    """Uniformly sampled run record.

    The canonical CSV columns are fixed; the extra state arrays (plant and
    proxy velocities, the coupling-error integral) support invariant checks
    and are not part of the file schema.
    """

    t: np.ndarray
    xd: np.ndarray
    x: np.ndarray
    xp: np.ndarray
    u: np.ndarray
    sq: np.ndarray
    sp: np.ndarray
    tau: np.ndarray
    tau_hat: np.ndarray
    taudot_hat: np.ndarray
    saturated: np.ndarray
    xdot: np.ndarray | None = None
    xpdot: np.ndarray | None = None
    ep: np.ndarray | None = None

    def __len__(self) -> int:
        return self.t.size

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for i in range(self.t.size):
                fields = [
                    f"{self.t[i]:.12g}", f"{self.xd[i]:.12g}",
                    f"{self.x[i]:.12g}", f"{self.xp[i]:.12g}",
                    f"{self.u[i]:.12g}", f"{self.sq[i]:.12g}",
                    f"{self.sp[i]:.12g}", f"{self.tau[i]:.12g}",
                    f"{self.tau_hat[i]:.12g}", f"{self.taudot_hat[i]:.12g}",
                    "1" if self.saturated[i] else "0",
                ]
                fh.write(",".join(fields) + "\n")

    def truncated(self, rows: int) -> "SimTrace":
        """Copy holding only the first ``rows`` samples."""

        def cut(arr):
            return None if arr is None else arr[:rows]

        return SimTrace(
            t=self.t[:rows], xd=self.xd[:rows], x=self.x[:rows],
            xp=self.xp[:rows], u=self.u[:rows], sq=self.sq[:rows],
            sp=self.sp[:rows], tau=self.tau[:rows],
            tau_hat=self.tau_hat[:rows], taudot_hat=self.taudot_hat[:rows],
            saturated=self.saturated[:rows], xdot=cut(self.xdot),
            xpdot=cut(self.xpdot), ep=cut(self.ep),
        )


@dataclass(frozen=True)
class MetricsReport:
    """Peak and mean absolute tracking error plus the manifold peak."""

    mae: float
    iae: float
    sup_sq: float
    window: tuple[float, float]

    def to_kv(self) -> dict[str, str]:
        return {
            "metrics.mae": repr(self.mae),
            "metrics.iae": repr(self.iae),
            "metrics.sup_sq": repr(self.sup_sq),
            "metrics.window_start": repr(self.window[0]),
            "metrics.window_end": repr(self.window[1]),
        }


def metrics(trace: SimTrace, window: tuple[float, float]) -> MetricsReport:
    """MAE (peak |xd - x|), IAE (mean |xd - x|) and sup|S_q| over a window."""
    w0, w1 = window
    mask = (trace.t >= w0 - 1e-12) & (trace.t <= w1 + 1e-12)
    if not mask.any():
        raise ValueError(f"metrics window {window} selects no samples")
    err = np.abs(trace.xd[mask] - trace.x[mask])
    return MetricsReport(
        mae=float(err.max()),
        iae=float(err.mean()),
        sup_sq=float(np.abs(trace.sq[mask]).max()),
        window=(w0, w1),
    )


def gate_scenario(scenario: Scenario) -> StabilityReport:
    """Feasibility report for the scenario's gains and disturbance bound."""
    eps = scenario.eps if scenario.eps is not None else scenario.disturbance.eps()
    lam1 = lambda1_bound(scenario.gains.observer_gains(), eps)
    return check_feasibility(scenario.gains, eps, lam1)


def run_scenario(scenario: Scenario, force: bool | None = None
                 ) -> tuple[SimTrace, MetricsReport, StabilityReport]:
    """Run one closed-loop simulation.

    Per control period: read the reference, advance the observer over the
    completed interval (observer-based laws), evaluate the control law,
    advance the proxy (proxy-based laws), then step the plant under the
    zero-order-hold command. The trace records every period including the
    final sample.

    Gains failing the feasibility gate raise unless ``force`` (argument or
    scenario flag) is set; the report is returned either way.
    """
    if force is None:
        force = scenario.force
    report = gate_scenario(scenario)
    kind = scenario.controller
    if kind in _PROXY_FAMILY and not report.feasible and not force:
        raise InfeasibleGainsError(
            "gain set fails the feasibility gate: "
            + "; ".join(report.violations)
        )

    truth = scenario.effective_plant()
    nominal = scenario.nominal
    gains = scenario.gains
    dist = scenario.disturbance
    traj = scenario.trajectory
    dt = scenario.dt
    n_steps = scenario.steps()

    uses_proxy = kind in _PROXY_FAMILY
    uses_observer = kind in _OBSERVER_FAMILY
    smc_gains = scenario.smc_gains() if not uses_proxy else None

    state = PlantState()
    ref0 = reference_at(traj, 0.0)
    proxy = ProxyState.initial(ref0) if uses_proxy else None
    obs = (ObserverState.initial(gains.observer_gains(), state.x, state.xdot)
           if uses_observer else None)
    int_exd = 0.0  # manifold integral for the non-proxy laws

    n_proxy_sub = 1
    if uses_proxy:
        if scenario.proxy_substep_override is not None:
            n_proxy_sub = max(1, scenario.proxy_substep_override)
        else:
            n_proxy_sub = proxy_substeps(gains, dt, scenario.proxy_resolution,
                                         _MAX_SWITCH_SUBSTEPS)

    size = n_steps + 1
    tr = SimTrace(
        t=np.empty(size), xd=np.empty(size), x=np.empty(size),
        xp=np.empty(size), u=np.empty(size), sq=np.empty(size),
        sp=np.empty(size), tau=np.empty(size), tau_hat=np.empty(size),
        taudot_hat=np.empty(size), saturated=np.zeros(size, dtype=bool),
        xdot=np.empty(size), xpdot=np.empty(size), ep=np.empty(size),
    )

    filled = 0
    try:
        for k in range(size):
            t = k * dt
            ref = reference_at(traj, t)
            if uses_observer and k > 0:
                obs = observer_step(gains.observer_gains(), obs, state.x,
                                    state.xdot, state.p_prev, nominal,
                                    state.direction, dt)
            out = _control(kind, gains, smc_gains, nominal, ref, state,
                           proxy, obs, int_exd)

            tr.t[k] = t
            tr.xd[k] = ref.xd
            tr.x[k] = state.x
            tr.xdot[k] = state.xdot
            tr.u[k] = out.u
            tr.sq[k] = out.sq
            tr.sp[k] = out.sp
            tr.tau[k] = dist.eval(t)
            tr.saturated[k] = out.saturated
            if uses_proxy:
                tr.xp[k] = proxy.xp
                tr.xpdot[k] = proxy.xpdot
                tr.ep[k] = proxy.ep
            else:
                tr.xp[k] = math.nan
                tr.xpdot[k] = math.nan
                tr.ep[k] = math.nan
            if uses_observer:
                tr.tau_hat[k] = obs.tau_hat
                tr.taudot_hat[k] = obs.taudot_hat
            else:
                tr.tau_hat[k] = math.nan
                tr.taudot_hat[k] = math.nan
            filled = k + 1

            if k == n_steps:
                break
            if uses_proxy:
                proxy = control.proxy_step(gains, ref, state.x, state.xdot,
                                           proxy, dt, substeps=n_proxy_sub)
            else:
                int_exd += (ref.xd - state.x) * dt
            state = plant.step(truth, state, out.u, dist, dt)
    except (SimulationDivergedError, SingularGainError) as exc:
        exc.partial_trace = tr.truncated(filled)
        raise

    return tr, metrics(tr, scenario.window), report


def _control(kind: str, gains: PsmcGains, smc_gains: SmcGains | None,
             nominal: PmaParams, ref: Reference, state: PlantState,
             proxy: ProxyState | None, obs: ObserverState | None,
             int_exd: float) -> ControlOutput:
    if kind == IDO_PSMC:
        return control.ido_psmc(gains, nominal, ref, state.x, state.xdot,
                                proxy, obs, state.direction, state.p_prev)
    if kind == PSMC:
        return control.psmc(gains, nominal, ref, state.x, state.xdot,
                            proxy, state.direction, state.p_prev)
    if kind == DO_SMC:
        return control.do_smc(smc_gains, nominal, ref, state.x, state.xdot,
                              int_exd, obs, state.direction, state.p_prev)
    return control.smc(smc_gains, nominal, ref, state.x, state.xdot,
                       int_exd, state.direction, state.p_prev)


@dataclass(frozen=True)
class FamilyRow:
    """One member of an experiment family."""

    label: str
    mae: float | None
    iae: float | None
    sup_sq: float | None
    status: str = "ok"   # "ok" or the error description


@dataclass(frozen=True)
class FamilySummary:
    family: str
    rows: tuple[FamilyRow, ...]

    def as_text(self) -> str:
        header = f"{'variant':<18} {'MAE (m)':>12} {'IAE (m)':>12} {'sup|S_q|':>12}  status"
        lines = [f"family: {self.family}", header, "-" * len(header)]
        for r in self.rows:
            mae = f"{r.mae:.6g}" if r.mae is not None else "-"
            iae = f"{r.iae:.6g}" if r.iae is not None else "-"
            sup = f"{r.sup_sq:.6g}" if r.sup_sq is not None else "-"
            lines.append(f"{r.label:<18} {mae:>12} {iae:>12} {sup:>12}  {r.status}")
        return "\n".join(lines) + "\n"

    def to_kv(self) -> dict[str, str]:
        kv: dict[str, str] = {"family.name": self.family}
        for r in self.rows:
            key = r.label.replace(" ", "_")
            kv[f"family.{key}.mae"] = "" if r.mae is None else repr(r.mae)
            kv[f"family.{key}.iae"] = "" if r.iae is None else repr(r.iae)
            kv[f"family.{key}.sup_sq"] = "" if r.sup_sq is None else repr(r.sup_sq)
            kv[f"family.{key}.status"] = r.status
        return kv


def family_members(family: str, base: Scenario) -> list[tuple[str, Scenario]]:
    """Labelled member scenarios of one experiment family.

    The proxy-mass sweep pins every member to the base member's proxy
    substep count so the whole sweep runs at one integration fidelity and
    the recorded differences isolate the proxy-mass effect.
    """
    if family == "mp-sweep":
        n_sub = (base.proxy_substep_override
                 if base.proxy_substep_override is not None
                 else proxy_substeps(base.gains, base.dt,
                                     base.proxy_resolution,
                                     _MAX_SWITCH_SUBSTEPS))
        return [
            (f"m_p={mp:g}",
             replace(base, gains=replace(base.gains, m_p=mp),
                     proxy_substep_override=n_sub))
            for mp in MP_SWEEP_VALUES
        ]
    if family == "fixed-freq-compare":
        traj = Trajectory(kind=FIXED_SINE, amplitude=0.015, offset=0.015,
                          frequency=0.25)
        return [(kind, replace(base, controller=kind, trajectory=traj))
                for kind in CONTROLLERS]
    if family == "chirp-compare":
        traj = Trajectory(kind=LINEAR_CHIRP, amplitude=0.015, offset=0.015,
                          f_start=0.1, f_end=0.5, span=20.0)
        return [(kind, replace(base, controller=kind, trajectory=traj))
                for kind in CONTROLLERS]
    if family == "load-sweep":
        return [
            (f"load={extra:g}kg",
             replace(base, controller=IDO_PSMC, load_mass=extra))
            for extra in LOAD_SWEEP_VALUES
        ]
    raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")


def run_family(family: str, base: Scenario, output_dir: str | None = None
               ) -> FamilySummary:
    """Run every member of a family; failures are recorded, not raised."""
    rows = []
    out = output_dir or base.output_dir
    traces: list[tuple[str, str]] = []
    for label, member in family_members(family, base):
        try:
            trace, member_metrics, _ = run_scenario(member)
        except Exception as exc:  # record per-row, keep the family running
            rows.append(FamilyRow(label=label, mae=None, iae=None,
                                  sup_sq=None, status=f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(FamilyRow(label=label, mae=member_metrics.mae,
                              iae=member_metrics.iae,
                              sup_sq=member_metrics.sup_sq))
        if out:
            os.makedirs(out, exist_ok=True)
            fname = f"{_slug(label)}.csv"
            trace.write_csv(os.path.join(out, fname))
            traces.append((label, fname))
    summary = FamilySummary(family=family, rows=tuple(rows))
    if out:
        with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
            fh.write(summary.as_text())
        write_kv_file(os.path.join(out, "summary.kv"), summary.to_kv())
        _write_plot_script(os.path.join(out, "plot.gp"), family, traces)
    return summary


def _slug(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in label)


def _write_plot_script(path: str, family: str,
                       traces: Iterable[tuple[str, str]]) -> None:
    traces = list(traces)
    lines = [
        "# gnuplot script: tracking and plant-manifold views",
        "set datafile separator ','",
        "set grid",
        "set xlabel 't (s)'",
        f"set title '{family}: tracking'",
        "set ylabel 'position (m)'",
    ]
    if traces:
        first_label, first_file = traces[0]
        parts = [f"'{first_file}' using 1:2 with lines title 'x_d'"]
        parts += [f"'{fname}' using 1:3 with lines title '{label} x'"
                  for label, fname in traces]
        lines.append("plot " + ", \\\n     ".join(parts))
        lines += [
            "pause -1 'tracking view; press enter for the manifold view'",
            f"set title '{family}: plant manifold'",
            "set ylabel 'S_q'",
            "plot " + ", \\\n     ".join(
                f"'{fname}' using 1:6 with lines title '{label}'"
                for label, fname in traces),
        ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_kv_file(path, kv: dict[str, str]) -> None:
    """Write a flat ``key = value`` file."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in kv.items():
            fh.write(f"{key} = {value}\n")
