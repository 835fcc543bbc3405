"""Seeded Monte Carlo sweeps: run modes on shared realizations, emit CSV.

Every (axis value, trial) pair gets its own 64-bit seed derived from the base
seed, so records are reproducible independently of worker scheduling and of
which other values or trials run.  All requested modes within a trial share
one channel realization (paired comparison).
"""

from __future__ import annotations

import csv
import datetime
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .channel import phase_init_rng, synthesize_channels
from .optimizer import run_alternating
from .rates import Solution, latency
from .scenario import (MODES, ConfigError, Scenario, ValidationError,
                       default_upa_shape, scenario_to_config)

AXES = ("x_u", "n_elements", "a_active", "f_edge", "f_local", "e_antennas", "pa_max_dbm")
#: axes whose values must be integers
_INT_AXES = ("n_elements", "a_active", "e_antennas")

#: canonical mode order for records; local computing is the latency reference
ALL_MODES = ("local_only",) + MODES

RECORD_FIELDS = ("axis", "value", "mode", "trial", "seed", "latency_s",
                 "secrecy_rate_bps", "rate_en_bps", "leakage_bps", "ell_bits",
                 "iterations", "converged", "active_power_w", "budget_exceeded")


@dataclass(frozen=True)
class Record:
    axis: str
    value: float
    mode: str
    trial: int
    seed: int
    latency_s: float
    secrecy_rate_bps: float
    rate_en_bps: float
    leakage_bps: float
    ell_bits: int
    iterations: int
    converged: bool
    active_power_w: float
    budget_exceeded: bool


@dataclass(frozen=True)
class SweepSpec:
    """One axis swept over ordered values, a trial count, and the mode list."""

    axis: str
    values: tuple
    trials: int
    base_seed: int
    modes: tuple = ALL_MODES

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}, expected one of {AXES}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if not all(a < b for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        unknown = [m for m in self.modes if m not in ALL_MODES]
        if unknown or not self.modes:
            raise ConfigError(f"unknown modes {unknown}, expected a subset of {ALL_MODES}")
        if not 0 <= self.base_seed < 2 ** 64:
            raise ConfigError("base_seed must fit in 64 bits")


@dataclass
class ResultTable:
    """Raw sweep records plus the resolved inputs for provenance."""

    records: list
    scenario: Scenario
    sweep: SweepSpec | None = None
    paired_values: bool = False


_MASK64 = (1 << 64) - 1


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed, value_index, trial):
    """base_seed XOR hash(value_index, trial); stable across platforms."""
    packed = ((value_index & 0xFFFFFFFF) << 32) | (trial & 0xFFFFFFFF)
    return (base_seed ^ _splitmix64(packed)) & _MASK64


def _local_only_solution(cp) -> Solution:
    d_local, d_edge, d = latency(0, 0.0, cp)
    return Solution(combiner=None, surface=None, offload_bits=0, sinr=0.0,
                    rate_en=0.0, leakage_bound=0.0, secrecy_rate=0.0,
                    latency_local=d_local, latency_edge=d_edge, latency=d,
                    iterations=0, converged=True)


def run_trial(scenario: Scenario, seed, modes=None) -> dict:
    """Solve every requested mode on one shared channel realization.

    The user-power fairness split is applied per mode; each solver mode draws
    its initialization from its own substream, so the result for a mode does
    not depend on which other modes were requested.
    """
    if modes is None:
        modes = (scenario.mode,)
    cs = synthesize_channels(scenario, seed)
    out = {}
    for mode in (m for m in ALL_MODES if m in modes):
        if mode == "local_only":
            out[mode] = _local_only_solution(scenario.compute)
        else:
            s_mode = scenario if scenario.mode == mode else replace(scenario, mode=mode)
            out[mode] = run_alternating(s_mode, cs, phase_init_rng(seed, mode), mode)
    return out


def apply_axis(base: Scenario, axis, value) -> Scenario:
    """Derive the scenario for one sweep point; errors name the offending value."""
    try:
        if axis in _INT_AXES and int(value) != value:
            raise ValidationError(axis, f"must be an integer, got {value!r}")
        if axis == "x_u":
            return replace(base, x_u_m=float(value))
        if axis == "n_elements":
            return replace(base, n_elements=int(value), upa_shape=default_upa_shape(int(value)))
        if axis == "a_active":
            return replace(base, a_active=int(value), fixed_active_set=tuple(range(1, int(value) + 1)))
        if axis == "f_edge":
            return replace(base, compute=replace(base.compute, edge_rate=float(value)))
        if axis == "f_local":
            return replace(base, compute=replace(base.compute, local_rate=float(value)))
        if axis == "e_antennas":
            return replace(base, e_antennas=int(value))
        if axis == "pa_max_dbm":
            return replace(base, p_active_max_dbm=float(value))
    except ValidationError as err:
        raise ValidationError(err.field_name, f"sweep {axis}={value}: {err}") from err
    raise ConfigError(f"unknown sweep axis {axis!r}")


def _solution_record(spec, value, mode, trial, seed, sol) -> Record:
    return Record(axis=spec.axis, value=value, mode=mode, trial=trial, seed=seed,
                  latency_s=sol.latency, secrecy_rate_bps=sol.secrecy_rate,
                  rate_en_bps=sol.rate_en, leakage_bps=sol.leakage_bound,
                  ell_bits=sol.offload_bits, iterations=sol.iterations,
                  converged=sol.converged, active_power_w=sol.active_power_w,
                  budget_exceeded=sol.budget_exceeded)


def _trial_records(args):
    scenario, spec, value_index, trial, paired = args
    value = spec.values[value_index]
    seed = trial_seed(spec.base_seed, 0 if paired else value_index, trial)
    solutions = run_trial(scenario, seed, spec.modes)
    return value_index, trial, [
        _solution_record(spec, value, mode, trial, seed, solutions[mode])
        for mode in ALL_MODES if mode in spec.modes
    ]


def run_sweep(spec: SweepSpec, base: Scenario, workers=1, paired_values=False) -> ResultTable:
    """Run the full sweep; rows are ordered by (value, mode, trial).

    By default every (value, trial) cell gets an independent seed.  With
    ``paired_values`` trial t reuses one seed across all axis values, so
    adjacent cells share their channel randomness and cross-value trends are
    measured with far less Monte Carlo noise (common random numbers).

    Trials are independent work items; with workers > 1 they are distributed
    over a process pool and reassembled deterministically by key.
    """
    derived = [apply_axis(base, spec.axis, v) for v in spec.values]
    items = [(derived[i], spec, i, t, paired_values)
             for i in range(len(spec.values)) for t in range(spec.trials)]
    by_key = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(items) // (workers * 8))
            for value_index, trial, rows in pool.map(_trial_records, items, chunksize=chunk):
                by_key[(value_index, trial)] = rows
    else:
        for item in items:
            value_index, trial, rows = _trial_records(item)
            by_key[(value_index, trial)] = rows
    records = []
    n_modes = sum(1 for m in ALL_MODES if m in spec.modes)
    for i in range(len(spec.values)):
        for rank in range(n_modes):
            for t in range(spec.trials):
                records.append(by_key[(i, t)][rank])
    return ResultTable(records=records, scenario=base, sweep=spec, paired_values=paired_values)


def aggregate(table: ResultTable):
    """Per (value, mode) summary: mean and median latency, mean secrecy rate."""
    groups = {}
    for rec in table.records:
        groups.setdefault((rec.value, rec.mode), []).append(rec)
    out = []
    for (value, mode), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], ALL_MODES.index(kv[0][1]))):
        latencies = [r.latency_s for r in recs]
        out.append({
            "axis": recs[0].axis,
            "value": value,
            "mode": mode,
            "trials": len(recs),
            "mean_latency_s": statistics.fmean(latencies),
            "median_latency_s": statistics.median(latencies),
            "mean_secrecy_rate_bps": statistics.fmean(r.secrecy_rate_bps for r in recs),
        })
    return out


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)  # shortest round-trip decimal
    return str(value)


def write_csv(table: ResultTable, path, deterministic=False):
    """Write records with a '#' provenance header echoing the resolved inputs.

    The header block carries the full scenario in config syntax plus the
    sweep definition; a timestamp line is appended unless ``deterministic``
    is set, in which case re-running the same spec is byte-identical.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in scenario_to_config(table.scenario).splitlines():
            fh.write(f"# {line}\n")
        if table.sweep is not None:
            sp = table.sweep
            fh.write(f"# sweep: axis={sp.axis} values={','.join(_format_cell(v) for v in sp.values)}"
                     f" trials={sp.trials} base_seed={sp.base_seed} modes={','.join(sp.modes)}"
                     f" paired_values={table.paired_values}\n")
        if not deterministic:
            fh.write(f"# generated: {datetime.datetime.now().isoformat()}\n")
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for rec in table.records:
            writer.writerow([_format_cell(getattr(rec, name)) for name in RECORD_FIELDS])
