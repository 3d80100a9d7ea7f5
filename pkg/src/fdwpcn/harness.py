"""Experiment driver: scheme registry, Monte-Carlo sweeps, CSV/JSON output.

A sweep regenerates topology and channels for every (axis value, seed) cell
from a seed derived by hashing (seed0, value index, seed index), so adding
values or seeds never perturbs existing cells, and every scheme inside a
cell sees bit-identical channels.  Cell failures are recorded and the run
continues.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .algorithms import (ao_fully_dynamic_perfect, penalty_fully_dynamic,
                         INCREASING_SNR, DECREASING_SNR, OptimizationResult)
from .baselines import fixed_time, hd_harvest_then_transmit, no_irs, random_phase
from .config import ConfigError, SystemConfig, config_from_mapping, parse_config_text
from .dc_beamforming import partial_beamforming_optimize, static_beamforming_optimize
from .scenario import channel_checksum, channels_csv, make_rng, realize

CSV_HEADER = "scheme,axis,value,seed,objective,iterations,xi_final,wallclock_ms"
AGG_HEADER = "scheme,axis,value,mean,stderr,n"

SWEEP_AXES = ("Pmax_dBm", "M", "K", "gamma_dB")

EXPERIMENT_KEYS = ("sweep_axis", "sweep_values", "schemes", "n_seeds", "seed0",
                   "output_path", "order", "measure_wallclock")


def derive_seed(seed0: int, value_index: int, seed_index: int,
                tag: str = "") -> int:
    """Stable 64-bit cell seed from (seed0, value index, seed index)."""
    payload = f"{seed0}:{value_index}:{seed_index}:{tag}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


# ---------------------------------------------------------------------------
# Scheme registry.  Each entry maps (comp, config, order, rng) to a result;
# schemes that presume perfect cancellation force gamma to zero themselves so
# a gamma sweep can still include them.

def _as_perfect(config: SystemConfig) -> SystemConfig:
    return config if config.perfect_sic else config.replace(si_gamma_dB=None)


def _run_fd_perfect(comp, config, order, rng):
    return ao_fully_dynamic_perfect(comp, _as_perfect(config), order, rng=rng)


def _run_fd_penalty(comp, config, order, rng):
    if config.perfect_sic:
        raise ConfigError("scheme fd_penalty needs si_gamma_dB set")
    return penalty_fully_dynamic(comp, config, order, rng=rng)


def _run_fd_partial(comp, config, order, rng):
    return partial_beamforming_optimize(comp, config, order, rng=rng)


def _run_fd_static(comp, config, order, rng):
    return static_beamforming_optimize(comp, config, order, rng=rng)


SCHEMES = {
    "fd_perfect": _run_fd_perfect,
    "fd_penalty": _run_fd_penalty,
    "fd_partial": _run_fd_partial,
    "fd_static": _run_fd_static,
    "no_irs": lambda comp, config, order, rng: no_irs(comp, config, order),
    "random_phase": lambda comp, config, order, rng: random_phase(comp, config, order, rng),
    "fixed_time": lambda comp, config, order, rng: fixed_time(comp, config, order),
    "hd_fully": lambda comp, config, order, rng: hd_harvest_then_transmit(
        comp, config, order, plan_kind="fully"),
    "hd_partial": lambda comp, config, order, rng: hd_harvest_then_transmit(
        comp, config, order, plan_kind="partial"),
    "hd_static": lambda comp, config, order, rng: hd_harvest_then_transmit(
        comp, config, order, plan_kind="static"),
}


def apply_sweep_value(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    if axis == "Pmax_dBm":
        return config.replace(Pmax_dBm=float(value))
    if axis == "M":
        m = int(value)
        if m % config.Mx != 0:
            raise ConfigError(f"M={m} is not a multiple of Mx={config.Mx}")
        return config.replace(Mz=m // config.Mx)
    if axis == "K":
        return config.replace(K=int(value))
    if axis == "gamma_dB":
        return config.replace(si_gamma_dB=float(value))
    raise ConfigError(f"unknown sweep axis {axis!r}")


@dataclass
class ExperimentSpec:
    base: SystemConfig
    sweep_axis: str
    sweep_values: list
    schemes: list
    n_seeds: int = 1
    seed0: int = 0
    output_path: str = "results"
    order: str = INCREASING_SNR
    measure_wallclock: bool = False

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}")
        if not self.sweep_values:
            raise ConfigError("sweep_values must be nonempty")
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(f"unknown schemes: {unknown}")
        if self.order not in (INCREASING_SNR, DECREASING_SNR):
            raise ConfigError(f"unknown scheduling order {self.order!r}")


def experiment_from_text(text: str) -> ExperimentSpec:
    """Parse a spec file: flat config keys plus the experiment keys."""
    mapping = parse_config_text(text)
    extra = {k: mapping.pop(k) for k in list(mapping) if k in EXPERIMENT_KEYS}
    base = config_from_mapping(mapping)
    if "sweep_axis" not in extra or "sweep_values" not in extra or "schemes" not in extra:
        raise ConfigError("spec needs sweep_axis, sweep_values and schemes")
    return ExperimentSpec(
        base=base,
        sweep_axis=extra["sweep_axis"],
        sweep_values=[float(v) for v in extra["sweep_values"].split(",")],
        schemes=[s.strip() for s in extra["schemes"].split(",")],
        n_seeds=int(extra.get("n_seeds", 1)),
        seed0=int(extra.get("seed0", 0)),
        output_path=extra.get("output_path", "results"),
        order=extra.get("order", INCREASING_SNR),
        measure_wallclock=extra.get("measure_wallclock", "false").lower()
        in ("true", "1", "yes", "on"),
    )


@dataclass
class CellRow:
    scheme: str
    axis: str
    value: float
    seed: int
    objective: float
    iterations: int
    xi_final: float
    wallclock_ms: int
    checksum: str = ""
    error: str = ""


@dataclass
class ResultsTable:
    axis: str
    rows: list = field(default_factory=list)

    @property
    def n_errors(self) -> int:
        return sum(1 for r in self.rows if r.error)

    def aggregates(self):
        """Mean and standard error per (scheme, value) over clean rows."""
        groups = {}
        for r in self.rows:
            if r.error:
                continue
            groups.setdefault((r.scheme, r.value), []).append(r.objective)
        out = []
        for (scheme, value), objs in sorted(groups.items()):
            arr = np.asarray(objs)
            stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
            out.append((scheme, self.axis, value, float(arr.mean()), stderr, arr.size))
        return out

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in sorted(self.rows, key=lambda r: (r.scheme, r.value, r.seed)):
            obj = "nan" if r.error else repr(r.objective)
            lines.append(f"{r.scheme},{r.axis},{r.value!r},{r.seed},{obj},"
                         f"{r.iterations},{r.xi_final!r},{r.wallclock_ms}")
        return "\n".join(lines) + "\n"

    def agg_csv(self) -> str:
        lines = [AGG_HEADER]
        for scheme, axis, value, mean, stderr, n in self.aggregates():
            lines.append(f"{scheme},{axis},{value!r},{mean!r},{stderr!r},{n}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "axis": self.axis,
            "n_errors": self.n_errors,
            "rows": [
                {
                    "scheme": r.scheme, "value": r.value, "seed": r.seed,
                    "objective": None if r.error else r.objective,
                    "iterations": r.iterations, "xi_final": r.xi_final,
                    "wallclock_ms": r.wallclock_ms,
                    "channel_checksum": r.checksum, "error": r.error or None,
                }
                for r in sorted(self.rows, key=lambda r: (r.scheme, r.value, r.seed))
            ],
            "aggregates": [
                {"scheme": s, "axis": a, "value": v, "mean": m, "stderr": e, "n": n}
                for s, a, v, m, e, n in self.aggregates()
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def run_experiment(spec: ExperimentSpec) -> ResultsTable:
    """Run every (value, seed, scheme) cell; failures become error rows."""
    table = ResultsTable(axis=spec.sweep_axis)
    for vi, value in enumerate(spec.sweep_values):
        config_v = apply_sweep_value(spec.base, spec.sweep_axis, value)
        for si in range(spec.n_seeds):
            seed = derive_seed(spec.seed0, vi, si)
            config_cell = config_v.replace(rng_seed=seed)
            _, ch, comp = realize(config_cell)
            checksum = channel_checksum(ch)
            for scheme in spec.schemes:
                rng = make_rng(derive_seed(spec.seed0, vi, si, tag=scheme))
                started = time.perf_counter()
                try:
                    result = SCHEMES[scheme](comp, config_cell, spec.order, rng)
                    elapsed = int(1000 * (time.perf_counter() - started))
                    table.rows.append(CellRow(
                        scheme=scheme, axis=spec.sweep_axis, value=value,
                        seed=seed, objective=float(result.objective),
                        iterations=result.iterations, xi_final=float(result.xi_final),
                        wallclock_ms=elapsed if spec.measure_wallclock else 0,
                        checksum=checksum))
                except Exception as exc:  # cell-level isolation
                    elapsed = int(1000 * (time.perf_counter() - started))
                    table.rows.append(CellRow(
                        scheme=scheme, axis=spec.sweep_axis, value=value,
                        seed=seed, objective=float("nan"), iterations=0,
                        xi_final=0.0,
                        wallclock_ms=elapsed if spec.measure_wallclock else 0,
                        checksum=checksum, error=f"{type(exc).__name__}: {exc}"))
    return table


def write_outputs(table: ResultsTable, output_path: str) -> dict:
    """Write <path>.csv, <path>_agg.csv and <path>.json; returns the paths."""
    paths = {
        "csv": f"{output_path}.csv",
        "agg_csv": f"{output_path}_agg.csv",
        "json": f"{output_path}.json",
    }
    with open(paths["csv"], "w") as f:
        f.write(table.to_csv())
    with open(paths["agg_csv"], "w") as f:
        f.write(table.agg_csv())
    with open(paths["json"], "w") as f:
        f.write(table.to_json())
    return paths


# ---------------------------------------------------------------------------
# Convergence traces and channel dumps.

def convergence_trace(config: SystemConfig, scheme: str, seed: int,
                      order: str = INCREASING_SNR) -> str:
    """Per-iteration objective trace of one scheme run as CSV.

    Penalty-based runs carry the violation indicator as a third column;
    perfect-cancellation runs omit it.
    """
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    config_cell = config.replace(rng_seed=seed)
    _, _, comp = realize(config_cell)
    rng = make_rng(derive_seed(seed, 0, 0, tag=scheme))
    result: OptimizationResult = SCHEMES[scheme](comp, config_cell, order, rng)
    if result.trace_xi:
        lines = ["iter,objective,xi"]
        for i, (obj, xi) in enumerate(zip(result.objective_trace, result.trace_xi)):
            lines.append(f"{i},{obj!r},{xi!r}")
    else:
        lines = ["iter,objective"]
        for i, obj in enumerate(result.objective_trace):
            lines.append(f"{i},{obj!r}")
    return "\n".join(lines) + "\n"


def dump_channels(config: SystemConfig) -> str:
    """CSV of the channel realization for the config's own seed."""
    _, ch, _ = realize(config)
    return channels_csv(ch)
