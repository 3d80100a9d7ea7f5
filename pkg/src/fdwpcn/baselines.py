"""Benchmark schemes: no reflecting surface, random phases, equal time
slots, and the half-duplex harvest-then-transmit protocol.

Each baseline reuses the joint optimizers with the relevant block frozen, so
its output is directly comparable to the full optimization on the same
channels.  The half-duplex protocol is expressed inside the full-duplex
model by fixing the power vector to (Pmax, 0, ..., 0): the access point
radiates only in the dedicated slot, so devices harvest nothing during
uplink slots and no self-interference arises.
"""
from __future__ import annotations

import numpy as np

from .algorithms import (INCREASING_SNR, OptimizationResult, _ao_perfect_driver,
                         _penalty_driver)
from .config import PenaltyParams, SolverParams, SystemConfig
from .dc_beamforming import _dc_driver
from .model import PhasePlan, SicModel
from .scenario import CompositeChannels


def no_irs(comp: CompositeChannels, config: SystemConfig,
           order: str = INCREASING_SNR,
           params: SolverParams | None = None,
           pparams: PenaltyParams | None = None) -> OptimizationResult:
    """Direct links only: the reflection plan is pinned to zero (relaxed) and
    only the resources are optimized."""
    plan = PhasePlan.without_irs(comp.M)
    if config.gamma_lin > 0.0:
        return _penalty_driver(comp, config, order, pparams, params,
                               scheme="no_irs", plan0=plan, update_phase=False)
    sic = SicModel.perfect(config.capacity_gap_lin)
    return _ao_perfect_driver(comp, config, order, params, scheme="no_irs",
                              sic=sic, plan0=plan, update_phase=False)


def random_phase(comp: CompositeChannels, config: SystemConfig,
                 order: str = INCREASING_SNR,
                 rng: np.random.Generator | None = None,
                 params: SolverParams | None = None,
                 pparams: PenaltyParams | None = None) -> OptimizationResult:
    """Per-slot, per-element phases drawn uniformly on [0, 2 pi); only the
    resources are optimized."""
    if rng is None:
        raise ValueError("random_phase needs a seeded generator")
    vectors = np.exp(2j * np.pi * rng.random((comp.K + 1, comp.M)))
    plan = PhasePlan.fully(vectors)
    if config.gamma_lin > 0.0:
        return _penalty_driver(comp, config, order, pparams, params,
                               scheme="random_phase", plan0=plan, update_phase=False)
    sic = SicModel.perfect(config.capacity_gap_lin)
    return _ao_perfect_driver(comp, config, order, params, scheme="random_phase",
                              sic=sic, plan0=plan, update_phase=False)


def fixed_time(comp: CompositeChannels, config: SystemConfig,
               order: str = INCREASING_SNR,
               params: SolverParams | None = None,
               pparams: PenaltyParams | None = None) -> OptimizationResult:
    """Equal slot durations T/(K+1); only phases (and, with residual
    self-interference, powers) are optimized."""
    if config.gamma_lin > 0.0:
        return _penalty_driver(comp, config, order, pparams, params,
                               scheme="fixed_time", update_tau=False)
    sic = SicModel.perfect(config.capacity_gap_lin)
    return _ao_perfect_driver(comp, config, order, params, scheme="fixed_time",
                              sic=sic, update_tau=False)


def hd_harvest_then_transmit(comp: CompositeChannels, config: SystemConfig,
                             order: str = INCREASING_SNR,
                             params: SolverParams | None = None,
                             pparams: PenaltyParams | None = None,
                             plan_kind: str = "fully") -> OptimizationResult:
    """Half-duplex benchmark: a dedicated harvesting slot at full power, then
    sequential uplink-only slots.

    ``plan_kind`` selects per-slot ('fully'), split ('partial') or shared
    ('static') reflection vectors, optimized with the same machinery as the
    full-duplex schemes.
    """
    P_fixed = np.zeros(comp.K + 1)
    P_fixed[0] = config.pmax_w
    scheme = f"hd_{plan_kind}"
    if plan_kind == "fully":
        sic = SicModel.from_config(config)
        return _ao_perfect_driver(comp, config, order, params, scheme=scheme,
                                  sic=sic, P_fixed=P_fixed)
    if plan_kind in ("partial", "static"):
        return _dc_driver(comp, config, order, pparams, params,
                          split_dl=(plan_kind == "partial"), scheme=scheme,
                          P_fixed=P_fixed)
    raise ValueError(f"unknown plan kind {plan_kind!r}")
