"""Key-value configuration files for scenarios, gain sets and tuner runs.

Files are plain text, one ``key = value`` pair per line, ``#`` comments.
Dotted keys group related fields (``trajectory.kind``, ``gains.kp``,
``bounds.c1``). Unknown keys are rejected so typos surface immediately.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .control import PsmcGains, SmcGains
from .errors import ConfigError
from .firefly import FaConfig
from .harness import CONTROLLERS, Scenario
from .plant import DisturbanceProfile, PmaParams
from .presets import BENCH_PMA, DEFAULT_GAINS
from .trajectory import FIXED_SINE, LINEAR_CHIRP, Trajectory

_PMA_FIELDS = ("f0", "f1", "k01", "k02", "k11", "k12", "b0i", "b1i",
               "b0d", "b1d", "mass", "p_break", "p_min", "p_max")
_GAIN_FIELDS = ("gamma", "c1", "c2", "kp", "ki", "kd", "l1", "l2", "m_p")

#: Tuner box bounds over [gamma, c1, c2, kp, ki, kd, l1, l2].
DEFAULT_TUNER_BOUNDS = (
    (2000.0, 20000.0),   # gamma
    (50.0, 300.0),       # c1
    (50.0, 300.0),       # c2
    (500.0, 3000.0),     # kp
    (500.0, 2500.0),     # ki
    (50.0, 300.0),       # kd
    (10.0, 100.0),       # l1
    (25.0, 2500.0),      # l2
)


def parse_kv_file(path) -> dict[str, str]:
    """Read a key-value file into an ordered dict of raw strings."""
    pairs: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip()
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if key in pairs:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            pairs[key] = value
    return pairs


def _as_float(key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}") from exc
    if not math.isfinite(out):
        raise ConfigError(f"key {key!r}: value must be finite, got {value!r}")
    return out


def _as_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected an integer, got {value!r}") from exc


def _as_bool(key: str, value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {value!r}")


def _as_floats(key: str, value: str) -> tuple[float, ...]:
    parts = value.replace(",", " ").split()
    if not parts:
        raise ConfigError(f"key {key!r}: expected numbers, got {value!r}")
    return tuple(_as_float(key, p) for p in parts)


def _take(pairs: dict[str, str], prefix: str) -> dict[str, str]:
    taken = {}
    for key in list(pairs):
        if key.startswith(prefix + "."):
            taken[key[len(prefix) + 1:]] = pairs.pop(key)
    return taken


def _pma_from(pairs: dict[str, str], prefix: str) -> PmaParams:
    """Muscle coefficients; defaults are the bench set, any field can be
    overridden (including back to the printed identification values)."""
    sub = _take(pairs, prefix)
    scale = sub.pop("coeff_scale", None)
    params = BENCH_PMA
    overrides = {}
    for key, value in sub.items():
        if key not in _PMA_FIELDS:
            raise ConfigError(f"unknown key {prefix}.{key}")
        overrides[key] = _as_float(f"{prefix}.{key}", value)
    try:
        if overrides:
            params = replace(params, **overrides)
        if scale is not None:
            params = params.scaled(_as_float(f"{prefix}.coeff_scale", scale))
    except ValueError as exc:
        raise ConfigError(f"{prefix}: {exc}") from exc
    return params


def _gains_from(pairs: dict[str, str], prefix: str = "gains") -> PsmcGains:
    sub = _take(pairs, prefix)
    gains = DEFAULT_GAINS
    overrides = {}
    for key, value in sub.items():
        if key not in _GAIN_FIELDS:
            raise ConfigError(f"unknown key {prefix}.{key}")
        overrides[key] = _as_float(f"{prefix}.{key}", value)
    return replace(gains, **overrides) if overrides else gains


def _trajectory_from(pairs: dict[str, str]) -> Trajectory:
    sub = _take(pairs, "trajectory")
    kind = sub.pop("kind", FIXED_SINE)
    if kind not in (FIXED_SINE, LINEAR_CHIRP):
        raise ConfigError(f"trajectory.kind must be '{FIXED_SINE}' or "
                          f"'{LINEAR_CHIRP}', got {kind!r}")
    fields = {"kind": kind}
    allowed = ("amplitude", "offset", "frequency", "f_start", "f_end", "span")
    for key, value in sub.items():
        if key not in allowed:
            raise ConfigError(f"unknown key trajectory.{key}")
        fields[key] = _as_float(f"trajectory.{key}", value)
    try:
        return Trajectory(**fields)
    except ValueError as exc:
        raise ConfigError(f"trajectory: {exc}") from exc


def _disturbance_from(pairs: dict[str, str]) -> DisturbanceProfile:
    sub = _take(pairs, "disturbance")
    kind = sub.pop("kind", "zero")
    try:
        if kind == "zero":
            profile = DisturbanceProfile.zero()
        elif kind == "constant":
            profile = DisturbanceProfile.constant(
                _as_float("disturbance.value", sub.pop("value")))
        elif kind == "sinusoid":
            profile = DisturbanceProfile.sinusoid(
                _as_float("disturbance.amplitude", sub.pop("amplitude")),
                _as_float("disturbance.omega", sub.pop("omega")),
                _as_float("disturbance.phase", sub.pop("phase", "0.0")))
        elif kind == "sum-of-sinusoids":
            amplitudes = _as_floats("disturbance.amplitudes", sub.pop("amplitudes"))
            omegas = _as_floats("disturbance.omegas", sub.pop("omegas"))
            phases = (_as_floats("disturbance.phases", sub.pop("phases"))
                      if "phases" in sub else None)
            profile = DisturbanceProfile.sum_of_sinusoids(amplitudes, omegas, phases)
        else:
            raise ConfigError(f"unknown disturbance.kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"disturbance.{exc.args[0]} is required for kind {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"disturbance: {exc}") from exc
    if sub:
        raise ConfigError(f"unknown key disturbance.{next(iter(sub))}")
    return profile


def _smc_from(pairs: dict[str, str], gains: PsmcGains) -> SmcGains | None:
    sub = _take(pairs, "smc")
    if not sub:
        return None
    fields = {"c1": gains.c1, "c2": gains.c2, "k_sw": 100.0, "phi": 0.01}
    for key, value in sub.items():
        if key not in fields:
            raise ConfigError(f"unknown key smc.{key}")
        fields[key] = _as_float(f"smc.{key}", value)
    try:
        return SmcGains(**fields)
    except ValueError as exc:
        raise ConfigError(f"smc: {exc}") from exc


def scenario_from_file(path) -> Scenario:
    """Load a full scenario description."""
    pairs = parse_kv_file(path)
    trajectory = _trajectory_from(pairs)
    disturbance = _disturbance_from(pairs)
    nominal = _pma_from(pairs, "nominal")
    plant_keys_present = any(k.startswith("plant.") for k in pairs)
    truth = _pma_from(pairs, "plant") if plant_keys_present else nominal
    gains = _gains_from(pairs)
    smc = _smc_from(pairs, gains)

    fields = {
        "trajectory": trajectory,
        "disturbance": disturbance,
        "nominal": nominal,
        "plant": truth,
        "gains": gains,
        "smc": smc,
        "duration": 20.0,
        "dt": 1e-3,
        "controller": "ido-psmc",
        "load_mass": 0.0,
        "window": (2.0, 20.0),
        "seed": 0,
        "eps": None,
        "force": False,
        "proxy_resolution": 0.02,
        "proxy_substep_override": None,
        "output_dir": None,
    }
    for key, value in pairs.items():
        if key == "controller":
            if value not in CONTROLLERS:
                raise ConfigError(f"controller must be one of {CONTROLLERS}, "
                                  f"got {value!r}")
            fields[key] = value
        elif key in ("duration", "dt", "load_mass", "eps", "proxy_resolution"):
            fields[key] = _as_float(key, value)
        elif key == "window":
            w = _as_floats(key, value)
            if len(w) != 2:
                raise ConfigError(f"window needs two numbers, got {value!r}")
            fields[key] = (w[0], w[1])
        elif key in ("seed", "proxy_substep_override"):
            fields[key] = _as_int(key, value)
        elif key == "force":
            fields[key] = _as_bool(key, value)
        elif key == "output_dir":
            fields[key] = value
        else:
            raise ConfigError(f"unknown key {key!r}")
    try:
        return Scenario(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def gains_from_file(path) -> PsmcGains:
    """Load a gain set; keys are the bare gain names."""
    pairs = parse_kv_file(path)
    fields = {}
    for key, value in pairs.items():
        if key not in _GAIN_FIELDS:
            raise ConfigError(f"unknown gain key {key!r}")
        fields[key] = _as_float(key, value)
    missing = [f for f in _GAIN_FIELDS if f not in fields and f != "m_p"]
    if missing:
        raise ConfigError(f"gain file {path} is missing keys: {', '.join(missing)}")
    return PsmcGains(**fields)


def write_gains_file(path, gains: PsmcGains) -> None:
    kv = {name: repr(getattr(gains, name)) for name in _GAIN_FIELDS}
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in kv.items():
            fh.write(f"{key} = {value}\n")


def fa_config_from_file(path) -> tuple[FaConfig, str | None]:
    """Load tuner settings; returns the config and the base-scenario path."""
    pairs = parse_kv_file(path)
    bounds_raw = _take(pairs, "bounds")
    names = ("gamma", "c1", "c2", "kp", "ki", "kd", "l1", "l2")
    bounds = list(DEFAULT_TUNER_BOUNDS)
    for key, value in bounds_raw.items():
        if key not in names:
            raise ConfigError(f"unknown key bounds.{key}")
        pair = _as_floats(f"bounds.{key}", value)
        if len(pair) != 2:
            raise ConfigError(f"bounds.{key} needs 'low high', got {value!r}")
        bounds[names.index(key)] = (pair[0], pair[1])

    fields = {
        "bounds": tuple(bounds),
        "n": 20,
        "max_generations": 100,
        "beta0": 1.0,
        "gamma_fa": None,
        "alpha": 1.0,
        "alpha_decay": 0.97,
        "lambda_tradeoff": 1.0,
        "penalty": 10.0,
        "seed": 0,
    }
    scenario_path = None
    for key, value in pairs.items():
        if key == "scenario":
            scenario_path = value
        elif key in ("n", "max_generations", "seed"):
            fields[key] = _as_int(key, value)
        elif key in ("beta0", "gamma_fa", "alpha", "alpha_decay",
                     "lambda_tradeoff", "penalty"):
            fields[key] = _as_float(key, value)
        else:
            raise ConfigError(f"unknown key {key!r}")
    try:
        return FaConfig(**fields), scenario_path
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
