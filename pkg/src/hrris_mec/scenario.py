"""Experiment configuration: parsing, validation, unit conversion, geometry.

A :class:`Scenario` is an immutable, fully validated description of one
experiment: array sizes, surface mode, power/noise budget, node coordinates,
per-link propagation constants, and the computing parameters.  All dB/dBm
values are stored as given; consumers convert lazily with the helpers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

MODES = ("ris_random", "ris_optimized", "hrris_fixed", "hrris_dynamic")
HRRIS_MODES = ("hrris_fixed", "hrris_dynamic")

#: order of the per-link constants in configs and in LinkValues
LINKS = ("user_en", "user_hrris", "user_eve", "hrris_en")

#: links shorter than this are clamped before the path-loss power law,
#: which is calibrated at 1 m and singular at d = 0
MIN_LINK_DISTANCE_M = 0.5


class ConfigError(ValueError):
    """Malformed or unparseable configuration text."""


class ValidationError(ConfigError):
    """A field value violates a scenario invariant."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


def dbm_to_watts(x_dbm):
    """dBm -> watts, 10^((x - 30)/10)."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(w):
    """watts -> dBm, inverse of dbm_to_watts."""
    return 10.0 * math.log10(w) + 30.0


def db_to_linear(x_db):
    """dB -> linear power ratio, 10^(x/10)."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(ratio):
    """linear power ratio -> dB, inverse of db_to_linear."""
    return 10.0 * math.log10(ratio)


class LinkValues(NamedTuple):
    """One value per radio link, ordered as in LINKS."""

    user_en: float
    user_hrris: float
    user_eve: float
    hrris_en: float


@dataclass(frozen=True)
class ComputeParams:
    """Task size and CPU speeds for the offloading latency model."""

    total_bits: int = 300_000
    cycles_per_bit: int = 750
    local_rate: float = 5e8
    edge_rate: float = 20e9

    def __post_init__(self):
        for name in ("total_bits", "cycles_per_bit", "local_rate", "edge_rate"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(name, f"must be strictly positive, got {value!r}")
        for name in ("total_bits", "cycles_per_bit"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValidationError(name, "must be an integer")


def default_upa_shape(n_elements):
    """Factor pair (rows, cols) with rows*cols = n, closest to square, rows <= cols."""
    if n_elements <= 0:
        return (0, 0)
    rows = 1
    for r in range(1, int(math.isqrt(n_elements)) + 1):
        if n_elements % r == 0:
            rows = r
    return (rows, n_elements // rows)


@dataclass(frozen=True)
class Scenario:
    """One fully resolved experiment description.

    The edge node sits at the origin, the surface at (x_h_m, 0), the user at
    (x_u_m, y_u_m) and the eavesdropper at (x_eve_m, y_eve_m), all in meters.
    ``fixed_active_set`` uses 1-based element indices; an empty value defaults
    to the lowest ``a_active`` indices.
    """

    m_antennas: int = 5
    e_antennas: int = 1
    n_elements: int = 50
    a_active: int = 1
    mode: str = "hrris_dynamic"
    fixed_active_set: tuple = ()
    p_total_dbm: float = 30.0
    p_active_max_dbm: float = 0.0
    noise_power_dbm: float = -80.0
    eve_noise_power_dbm: float = -80.0
    bandwidth_hz: float = 1e6
    csi_error_bound: float = 0.1
    x_u_m: float = 45.0
    y_u_m: float = 2.0
    x_h_m: float = 50.0
    x_eve_m: float = 30.0
    y_eve_m: float = 9.0
    pathloss_ref_db: float = -30.0
    pathloss_exponents: LinkValues = LinkValues(3.5, 2.2, 2.8, 2.2)
    rician_factors: LinkValues = LinkValues(0.0, 1.0, 0.0, 100.0)
    upa_shape: tuple = None
    compute: ComputeParams = field(default_factory=ComputeParams)

    def __post_init__(self):
        if not isinstance(self.pathloss_exponents, LinkValues):
            object.__setattr__(self, "pathloss_exponents", LinkValues(*self.pathloss_exponents))
        if not isinstance(self.rician_factors, LinkValues):
            object.__setattr__(self, "rician_factors", LinkValues(*self.rician_factors))
        if not self.fixed_active_set:
            object.__setattr__(self, "fixed_active_set", tuple(range(1, self.a_active + 1)))
        else:
            object.__setattr__(self, "fixed_active_set", tuple(int(i) for i in self.fixed_active_set))
        if self.upa_shape is None:
            object.__setattr__(self, "upa_shape", default_upa_shape(self.n_elements))
        else:
            object.__setattr__(self, "upa_shape", tuple(int(v) for v in self.upa_shape))
        _validate(self)

    # -- lazily converted linear quantities ------------------------------

    @property
    def p_total_w(self):
        return dbm_to_watts(self.p_total_dbm)

    @property
    def p_active_max_w(self):
        return dbm_to_watts(self.p_active_max_dbm)

    @property
    def noise_power_w(self):
        return dbm_to_watts(self.noise_power_dbm)

    @property
    def eve_noise_power_w(self):
        return dbm_to_watts(self.eve_noise_power_dbm)

    def user_power_w(self, mode=None):
        """User transmit power under the total-power fairness rule.

        Surfaces with active elements spend part of the shared budget on the
        amplifier (P = P_tot - P_a^max); all-passive surfaces give the whole
        budget to the user.
        """
        mode = self.mode if mode is None else mode
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if mode in HRRIS_MODES:
            return self.p_total_w - self.p_active_max_w
        return self.p_total_w


@dataclass(frozen=True)
class DistanceSet:
    """Euclidean link distances in meters; degenerate lists links under the clamp."""

    user_en: float
    user_hrris: float
    user_eve: float
    hrris_en: float
    degenerate: tuple = ()


def link_distances(s: Scenario) -> DistanceSet:
    """Pairwise node distances from the 2-D coordinates (EN at the origin)."""
    user = (s.x_u_m, s.y_u_m)
    surface = (s.x_h_m, 0.0)
    eve = (s.x_eve_m, s.y_eve_m)
    d = {
        "user_en": math.hypot(*user),
        "user_hrris": math.hypot(user[0] - surface[0], user[1] - surface[1]),
        "user_eve": math.hypot(user[0] - eve[0], user[1] - eve[1]),
        "hrris_en": math.hypot(*surface),
    }
    degenerate = tuple(name for name in LINKS if d[name] < MIN_LINK_DISTANCE_M)
    return DistanceSet(degenerate=degenerate, **d)


def _validate(s: Scenario):
    def require(cond, name, msg):
        if not cond:
            raise ValidationError(name, msg)

    require(isinstance(s.m_antennas, int) and s.m_antennas >= 1, "m_antennas", "must be a positive integer")
    require(isinstance(s.e_antennas, int) and s.e_antennas >= 1, "e_antennas", "must be a positive integer")
    require(isinstance(s.n_elements, int) and s.n_elements >= 0, "n_elements", "must be a non-negative integer")
    require(isinstance(s.a_active, int) and s.a_active >= 0, "a_active", "must be a non-negative integer")
    require(s.a_active <= s.n_elements, "a_active",
            f"active budget {s.a_active} exceeds n_elements={s.n_elements}")
    require(s.mode in MODES, "mode", f"must be one of {MODES}, got {s.mode!r}")
    if s.mode in HRRIS_MODES:
        require(s.a_active >= 1, "a_active", f"mode {s.mode} needs at least one active element")

    fas = s.fixed_active_set
    require(len(fas) == s.a_active, "fixed_active_set",
            f"needs exactly a_active={s.a_active} indices, got {len(fas)}")
    require(all(1 <= i <= s.n_elements for i in fas), "fixed_active_set",
            f"indices must lie in [1..{s.n_elements}]")
    require(all(a < b for a, b in zip(fas, fas[1:])), "fixed_active_set",
            "indices must be strictly increasing")

    rows, cols = s.upa_shape
    require(rows * cols == s.n_elements, "upa_shape",
            f"{rows}x{cols} != n_elements={s.n_elements}")
    require(rows >= 0 and cols >= 0, "upa_shape", "must be non-negative")

    for name in ("p_total_dbm", "p_active_max_dbm", "noise_power_dbm", "eve_noise_power_dbm",
                 "x_u_m", "y_u_m", "x_h_m", "x_eve_m", "y_eve_m", "pathloss_ref_db"):
        require(math.isfinite(getattr(s, name)), name, "must be finite")
    require(math.isfinite(s.bandwidth_hz) and s.bandwidth_hz > 0, "bandwidth_hz", "must be strictly positive")
    require(math.isfinite(s.csi_error_bound) and s.csi_error_bound >= 0, "csi_error_bound", "must be >= 0")
    for link, eta in zip(LINKS, s.pathloss_exponents):
        require(math.isfinite(eta) and eta >= 0, f"pathloss_exponents.{link}", "must be >= 0")
    for link, kappa in zip(LINKS, s.rician_factors):
        require(math.isfinite(kappa) and kappa >= 0, f"rician_factors.{link}", "must be >= 0")
    if s.mode in HRRIS_MODES:
        require(s.p_total_w > s.p_active_max_w, "p_active_max_dbm",
                "amplifier budget consumes the entire total power, user power would be <= 0")


# ---------------------------------------------------------------------------
# config text (key=value lines, '#' comments, unknown keys rejected)
# ---------------------------------------------------------------------------

def _parse_int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _parse_float(text):
    return float(text)


def _parse_mode(text):
    if text not in MODES:
        raise ValueError(f"expected one of {MODES}, got {text!r}")
    return text


def _parse_int_tuple(text):
    if not text.strip():
        return ()
    return tuple(_parse_int(part) for part in text.split(","))


def _parse_link_values(text):
    parts = [p for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected 4 comma-separated values ({','.join(LINKS)})")
    return LinkValues(*(float(p) for p in parts))


def _parse_pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("expected rows,cols")
    return tuple(_parse_int(p) for p in parts)


_SCENARIO_PARSERS = {
    "m_antennas": _parse_int,
    "e_antennas": _parse_int,
    "n_elements": _parse_int,
    "a_active": _parse_int,
    "mode": _parse_mode,
    "fixed_active_set": _parse_int_tuple,
    "p_total_dbm": _parse_float,
    "p_active_max_dbm": _parse_float,
    "noise_power_dbm": _parse_float,
    "eve_noise_power_dbm": _parse_float,
    "bandwidth_hz": _parse_float,
    "csi_error_bound": _parse_float,
    "x_u_m": _parse_float,
    "y_u_m": _parse_float,
    "x_h_m": _parse_float,
    "x_eve_m": _parse_float,
    "y_eve_m": _parse_float,
    "pathloss_ref_db": _parse_float,
    "pathloss_exponents": _parse_link_values,
    "rician_factors": _parse_link_values,
    "upa_shape": _parse_pair,
}

_COMPUTE_PARSERS = {
    "total_bits": _parse_int,
    "cycles_per_bit": _parse_int,
    "local_rate": _parse_float,
    "edge_rate": _parse_float,
}

CONFIG_KEYS = tuple(_SCENARIO_PARSERS) + tuple(_COMPUTE_PARSERS)


def load_scenario(config_text: str) -> Scenario:
    """Parse key=value config text into a validated Scenario.

    Keys not listed in CONFIG_KEYS are rejected rather than ignored so that a
    typo cannot silently fall back to a default.  Omitted keys take the
    defaults above.
    """
    scenario_kwargs = {}
    compute_kwargs = {}
    seen = set()
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key in _SCENARIO_PARSERS:
            parser, target = _SCENARIO_PARSERS[key], scenario_kwargs
        elif key in _COMPUTE_PARSERS:
            parser, target = _COMPUTE_PARSERS[key], compute_kwargs
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            target[key] = parser(value)
        except ValueError as err:
            raise ConfigError(f"line {lineno}: {key}: {err}") from err
    if compute_kwargs:
        scenario_kwargs["compute"] = ComputeParams(**compute_kwargs)
    return Scenario(**scenario_kwargs)


def scenario_to_config(s: Scenario) -> str:
    """Render a Scenario back to config text that load_scenario reproduces exactly."""
    lines = []
    for key in _SCENARIO_PARSERS:
        value = getattr(s, key)
        if key in ("fixed_active_set", "upa_shape", "pathloss_exponents", "rician_factors"):
            value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    for key in _COMPUTE_PARSERS:
        value = getattr(s.compute, key)
        lines.append(f"{key} = {repr(value) if isinstance(value, float) else value}")
    return "\n".join(lines) + "\n"
