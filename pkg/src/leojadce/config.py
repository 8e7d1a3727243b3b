"""Scenario configuration: dataclass, flat key=value file parsing, sweeps.

The config file is a flat, human-readable document whose keys are exactly
the :class:`ScenarioConfig` field names; unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .channel import LinkBudget
from .signals import DEFAULT_FACTORIZATIONS, ORDER_FACTORIZATIONS_225

SWEEP_AXES = ("snr", "L", "p_a", "K", "d", "M")
KNOWN_ALGOS = ("vbi", "somp", "amp")


class ConfigError(ValueError):
    """Invalid configuration file or sweep specification."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Every physical and algorithmic knob of one experiment scenario."""

    # link budget
    f_hz: float = 30e9
    d0_m: float = 1000e3
    bandwidth_hz: float = 25e6
    noise_temperature_k: float = 290.0
    boltzmann: float = 1.38e-23
    g_over_t_db: float = 34.0
    dish_diameter_m: float = 0.0      # 0 -> calibrated from the 3 dB angle
    three_db_angle_deg: float = 0.4
    rain_mean_db: float = -2.6
    rain_std_db: float = 1.63
    # population / geometry
    K: int = 500
    M: int = 8
    p_a: float = 0.1
    rician_factor: float = 8.0
    hlos_norm_sq_low: float = 0.6
    hlos_norm_sq_high: float = 0.7
    v_nlos_low: float = 0.2
    v_nlos_high: float = 0.25
    theta_max_deg: float = 0.4
    xi: float = 1.0
    # signal
    snr_db: float = 10.0
    dims: tuple[int, ...] = (20, 20)
    # engine
    eps: float = 1e-6
    max_iters: int = 35
    rel_tol: float = 1e-3
    threshold_ratio: float = 0.3
    # harness
    trials: int = 10
    master_seed: int = 0
    algos: tuple[str, ...] = ("vbi",)

    def __post_init__(self):
        if len(self.dims) < 2 or any(l < 2 for l in self.dims):
            raise ConfigError(f"dims must have d >= 2 entries, all >= 2: {self.dims}")
        for lo, hi, name in ((self.hlos_norm_sq_low, self.hlos_norm_sq_high, "hlos_norm_sq"),
                             (self.v_nlos_low, self.v_nlos_high, "v_nlos")):
            if lo > hi:
                raise ConfigError(f"{name} range has low > high")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.K < 1 or self.M < 1:
            raise ConfigError("K and M must be >= 1")
        if not (0.0 <= self.p_a <= 1.0):
            raise ConfigError("p_a must lie in [0, 1]")
        if self.xi <= 0:
            raise ConfigError("xi must be > 0")
        unknown = set(self.algos) - set(KNOWN_ALGOS)
        if unknown:
            raise ConfigError(f"unknown algorithms: {sorted(unknown)}")

    @property
    def L(self) -> int:
        return int(np.prod(self.dims))

    def link_budget(self) -> LinkBudget:
        return LinkBudget(
            f_hz=self.f_hz, d0_m=self.d0_m, bandwidth_hz=self.bandwidth_hz,
            noise_temperature_k=self.noise_temperature_k, boltzmann=self.boltzmann,
            g_over_t_db=self.g_over_t_db, dish_diameter_m=self.dish_diameter_m,
            three_db_angle_deg=self.three_db_angle_deg,
            rain_mean_db=self.rain_mean_db, rain_std_db=self.rain_std_db,
        )

    def replace(self, **kwargs) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs)


def _parse_dims(text: str) -> tuple[int, ...]:
    parts = text.replace("x", ",").replace("*", ",").split(",")
    try:
        return tuple(int(p.strip()) for p in parts if p.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse dims from {text!r}") from exc


def _parse_value(name: str, text: str, ftype):
    text = text.strip()
    if ftype is int:
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected integer, got {text!r}") from exc
    if ftype is float:
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected number, got {text!r}") from exc
    if name == "dims":
        return _parse_dims(text)
    if name == "algos":
        return tuple(a.strip() for a in text.split(",") if a.strip())
    raise ConfigError(f"unsupported field type for {name}")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}
_TYPE_MAP = {"float": float, "int": int}


def parse_config(text: str) -> ScenarioConfig:
    """Parse a flat key = value document. Fails fast on unknown keys."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        ftype = _TYPE_MAP.get(_FIELD_TYPES[key], _FIELD_TYPES[key])
        values[key] = _parse_value(key, val, ftype)
    try:
        return ScenarioConfig(**values)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


@dataclass(frozen=True)
class SweepSpec:
    """One experiment axis and the list of values to visit.

    Values are kept as canonical strings so that output files and RNG
    derivation are stable regardless of how numbers were spelled.
    """

    axis: str
    values: tuple[str, ...]

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; valid: {SWEEP_AXES}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")


def canonical_value(v) -> str:
    """Stable string form for an axis value (int-like floats lose the dot)."""
    if isinstance(v, str):
        return v
    if isinstance(v, (tuple, list)):
        return "x".join(str(int(d)) for d in v)
    f = float(v)
    return str(int(f)) if f == int(f) else repr(f)


def make_sweep(axis: str, values) -> SweepSpec:
    return SweepSpec(axis=axis, values=tuple(canonical_value(v) for v in values))


def parse_sweep(text: str) -> SweepSpec:
    """Parse 'axis=v1,v2,...' as given on the command line."""
    if "=" not in text:
        raise ConfigError(f"sweep must look like axis=v1,v2,..., got {text!r}")
    axis, _, vals = text.partition("=")
    values = [v.strip() for v in vals.split(",") if v.strip()]
    return SweepSpec(axis=axis.strip(), values=tuple(values))


def factorization_for_length(token: str) -> tuple[int, ...]:
    """Resolve an L-axis value: explicit '20x20' or a known total length."""
    if "x" in token or "*" in token:
        return _parse_dims(token)
    L = int(token)
    if L not in DEFAULT_FACTORIZATIONS:
        raise ConfigError(
            f"no default factorization for L={L}; give it explicitly, e.g. '20x{L // 20}'")
    return DEFAULT_FACTORIZATIONS[L]


def apply_axis(cfg: ScenarioConfig, axis: str, value: str) -> ScenarioConfig:
    """Specialize the base config for one sweep-axis value."""
    if axis == "snr":
        return cfg.replace(snr_db=float(value))
    if axis == "p_a":
        return cfg.replace(p_a=float(value))
    if axis == "K":
        return cfg.replace(K=int(value))
    if axis == "M":
        return cfg.replace(M=int(value))
    if axis == "L":
        return cfg.replace(dims=factorization_for_length(value))
    if axis == "d":
        d = int(value)
        if cfg.L != 225:
            raise ConfigError("the tensor-order axis is defined for L = 225 scenarios")
        if d not in ORDER_FACTORIZATIONS_225:
            raise ConfigError(f"no L=225 factorization for d={d}")
        return cfg.replace(dims=ORDER_FACTORIZATIONS_225[d])
    raise ConfigError(f"unknown axis {axis!r}")
