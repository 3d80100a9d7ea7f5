"""Simulation and optimization of an IRS-aided full-duplex wireless-powered
communication network."""

__version__ = "0.1.0"

from .config import PenaltyParams, SolverParams, SystemConfig
from .model import PhasePlan, ResourceAllocation, SicModel, sum_throughput
from .scenario import (ChannelSet, CompositeChannels, Topology,
                       composite_channels, make_rng, realize)
from .algorithms import (OptimizationResult, ao_fully_dynamic_perfect,
                         penalty_fully_dynamic, schedule_devices)
from .dc_beamforming import (partial_beamforming_optimize,
                             static_beamforming_optimize)
from .baselines import (fixed_time, hd_harvest_then_transmit, no_irs,
                        random_phase)
from .harness import ExperimentSpec, ResultsTable, run_experiment

__all__ = [
    "PenaltyParams", "SolverParams", "SystemConfig",
    "PhasePlan", "ResourceAllocation", "SicModel", "sum_throughput",
    "ChannelSet", "CompositeChannels", "Topology", "composite_channels",
    "make_rng", "realize",
    "OptimizationResult", "ao_fully_dynamic_perfect", "penalty_fully_dynamic",
    "schedule_devices",
    "partial_beamforming_optimize", "static_beamforming_optimize",
    "fixed_time", "hd_harvest_then_transmit", "no_irs", "random_phase",
    "ExperimentSpec", "ResultsTable", "run_experiment",
]
