"""Exact throughput model: harvested energy, device power, per-device rate.

Every optimizer and every test oracle evaluates candidate solutions through
this module, so it stays deliberately direct: plain sums over time slots with
no algebraic shortcuts.

Conventions: a frame of duration T holds K+1 slots. Slot 0 is dedicated
downlink energy transfer; in slot k >= 1 device k transmits uplink while the
access point keeps radiating downlink energy to everyone else.  A reflection
vector v enters gains as ``h_d + v^H q`` where ``v^H q`` is the conjugated
inner product (``np.vdot``).  Residual self-interference after cancellation
adds ``beta * gamma * P_k`` to the noise in slot k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .scenario import CompositeChannels

LOG2E = math.log2(math.e)


class DegenerateSlotError(ValueError):
    """A device holds energy but was assigned a zero-length transmit slot."""


@dataclass
class SicModel:
    """Self-interference model: linear SI power gain ``gamma``, quantization
    factor ``beta`` and capacity gap ``capacity_gap``; gamma == 0 means
    perfect cancellation."""

    gamma: float
    beta: float
    capacity_gap: float

    def __post_init__(self):
        if self.gamma < 0 or self.beta < 0:
            raise ValueError("gamma and beta must be nonnegative")
        if self.capacity_gap < 1.0:
            raise ValueError("capacity_gap must be >= 1")

    @property
    def is_perfect(self) -> bool:
        return self.gamma == 0.0

    @classmethod
    def perfect(cls, capacity_gap: float = 1.0) -> "SicModel":
        return cls(gamma=0.0, beta=0.0, capacity_gap=capacity_gap)

    @classmethod
    def from_config(cls, config: SystemConfig) -> "SicModel":
        return cls(gamma=config.gamma_lin, beta=config.beta_lin,
                   capacity_gap=config.capacity_gap_lin)

    def noise_factor(self, p_k: float, sigma2: float) -> float:
        """Effective noise power capacity_gap * (beta * gamma * P_k + sigma2)."""
        return self.capacity_gap * (self.beta * self.gamma * p_k + sigma2)


@dataclass
class ResourceAllocation:
    """Slot durations tau (seconds) and HAP transmit powers P (watts), both
    indexed 0..K."""

    tau: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.P = np.asarray(self.P, dtype=float)
        if self.tau.shape != self.P.shape or self.tau.ndim != 1:
            raise ValueError("tau and P must be 1-D arrays of equal length")

    def validate(self, T: float, pmax: float, tol: float = 1e-9) -> None:
        if np.any(self.tau < -tol):
            raise ValueError("negative slot duration")
        if self.tau.sum() > T + tol:
            raise ValueError("slot durations exceed the frame duration")
        if np.any(self.P < -tol) or np.any(self.P > pmax + tol):
            raise ValueError("transmit power outside [0, Pmax]")


@dataclass
class PhasePlan:
    """Reflection coefficients in one of three sharing configurations.

    kind 'fully': one vector per slot (rows 0..K).
    kind 'partial': row 0 serves slot 0, row 1 serves every uplink slot.
    kind 'static': the single row serves every slot.
    ``relaxed`` phases may sit anywhere inside the unit disk; otherwise every
    entry must have unit modulus.
    """

    kind: str
    vectors: np.ndarray
    relaxed: bool = False

    def __post_init__(self):
        if self.kind not in ("fully", "partial", "static"):
            raise ValueError(f"unknown plan kind {self.kind!r}")
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if self.kind == "partial" and self.vectors.shape[0] != 2:
            raise ValueError("partial plan needs exactly two vectors")
        if self.kind == "static" and self.vectors.shape[0] != 1:
            raise ValueError("static plan needs exactly one vector")

    @classmethod
    def fully(cls, vectors, relaxed: bool = False) -> "PhasePlan":
        return cls("fully", vectors, relaxed)

    @classmethod
    def partial(cls, v_dl, v_ul, relaxed: bool = False) -> "PhasePlan":
        return cls("partial", np.stack([np.asarray(v_dl), np.asarray(v_ul)]), relaxed)

    @classmethod
    def static(cls, v, relaxed: bool = False) -> "PhasePlan":
        return cls("static", np.atleast_2d(np.asarray(v)), relaxed)

    @classmethod
    def without_irs(cls, M: int) -> "PhasePlan":
        """Relaxed all-zero plan: reflections contribute nothing."""
        return cls("static", np.zeros((1, M), dtype=complex), relaxed=True)

    @property
    def M(self) -> int:
        return self.vectors.shape[1]

    def slot_vector(self, i: int) -> np.ndarray:
        if self.kind == "fully":
            return self.vectors[i]
        if self.kind == "partial":
            return self.vectors[0] if i == 0 else self.vectors[1]
        return self.vectors[0]

    def as_fully(self, K: int) -> "PhasePlan":
        rows = np.stack([self.slot_vector(i) for i in range(K + 1)])
        return PhasePlan("fully", rows, self.relaxed)

    def validate_modulus(self, tol: float = 1e-9) -> None:
        mags = np.abs(self.vectors)
        if self.relaxed:
            if np.any(mags > 1.0 + tol):
                raise ValueError("relaxed plan entry outside the unit disk")
        elif np.any(np.abs(mags - 1.0) > tol):
            raise ValueError("plan entry is not unit modulus")


# ---------------------------------------------------------------------------
# Gains.

def dl_amplitudes(comp: CompositeChannels, v: np.ndarray) -> np.ndarray:
    """Downlink effective amplitudes h_d[k] + v^H q_k for all devices."""
    return comp.h_d + comp.q @ np.conj(v)


def ul_amplitudes(comp: CompositeChannels, v: np.ndarray) -> np.ndarray:
    return comp.h_d_bar + comp.q_bar @ np.conj(v)


def dl_gains(comp: CompositeChannels, v: np.ndarray) -> np.ndarray:
    return np.abs(dl_amplitudes(comp, v)) ** 2


def ul_gains(comp: CompositeChannels, v: np.ndarray) -> np.ndarray:
    return np.abs(ul_amplitudes(comp, v)) ** 2


def dl_gain(comp: CompositeChannels, k: int, v: np.ndarray) -> float:
    """|h_d[k] + v^H q_k|^2 for one device."""
    return float(np.abs(comp.h_d[k] + np.vdot(v, comp.q[k])) ** 2)


def ul_gain(comp: CompositeChannels, k: int, v: np.ndarray) -> float:
    return float(np.abs(comp.h_d_bar[k] + np.vdot(v, comp.q_bar[k])) ** 2)


def dl_gain_table(comp: CompositeChannels, plan: PhasePlan, K: int) -> np.ndarray:
    """y[k, i] = downlink gain of device k under slot i's reflection vector."""
    table = np.empty((K, K + 1))
    if plan.kind == "fully":
        for i in range(K + 1):
            table[:, i] = dl_gains(comp, plan.slot_vector(i))
    elif plan.kind == "partial":
        table[:, 0] = dl_gains(comp, plan.vectors[0])
        table[:, 1:] = dl_gains(comp, plan.vectors[1])[:, None]
    else:
        table[:] = dl_gains(comp, plan.vectors[0])[:, None]
    return table


def ul_slot_gains(comp: CompositeChannels, plan: PhasePlan, K: int) -> np.ndarray:
    """Uplink gain of device k under its own slot's vector, k = 1..K."""
    if plan.kind == "fully":
        return np.array([ul_gain(comp, k, plan.vectors[k + 1]) for k in range(K)])
    v = plan.vectors[0] if plan.kind == "static" else plan.vectors[1]
    return ul_gains(comp, v)


# ---------------------------------------------------------------------------
# Energy, power and throughput.

def harvested_energy(comp: CompositeChannels, k: int, alloc: ResourceAllocation,
                     plan: PhasePlan, eta_k: float) -> float:
    """Energy collected by device k over the frame, excluding its own slot."""
    total = 0.0
    for i in range(alloc.tau.shape[0]):
        if i == k + 1:
            continue
        total += alloc.P[i] * alloc.tau[i] * dl_gain(comp, k, plan.slot_vector(i))
    return float(eta_k * total)


def device_power(comp: CompositeChannels, k: int, alloc: ResourceAllocation,
                 plan: PhasePlan, eta_k: float) -> float:
    """Average transmit power E_k / tau_k; zero for an empty idle slot."""
    energy = harvested_energy(comp, k, alloc, plan, eta_k)
    tau_k = alloc.tau[k + 1]
    if tau_k <= 0.0:
        if energy > 0.0:
            raise DegenerateSlotError(
                f"device {k} harvested {energy} J but has a zero-length slot")
        return 0.0
    return float(energy / tau_k)


def throughput(comp: CompositeChannels, k: int, alloc: ResourceAllocation,
               plan: PhasePlan, eta_k: float, sic: SicModel,
               sigma2: float) -> float:
    """Bits/Hz delivered by device k; continuous-limit 0 when its slot is empty."""
    tau_k = alloc.tau[k + 1]
    if tau_k <= 0.0:
        return 0.0
    energy = harvested_energy(comp, k, alloc, plan, eta_k)
    gain = ul_gain(comp, k, plan.slot_vector(k + 1))
    noise = sic.noise_factor(alloc.P[k + 1], sigma2)
    return float(tau_k * math.log2(1.0 + energy * gain / (noise * tau_k)))


def sum_throughput(comp: CompositeChannels, alloc: ResourceAllocation,
                   plan: PhasePlan, eta: np.ndarray, sic: SicModel,
                   sigma2: float) -> float:
    return float(sum(
        throughput(comp, k, alloc, plan, eta[k], sic, sigma2)
        for k in range(comp.K)
    ))


def evaluation_rows(comp: CompositeChannels, alloc: ResourceAllocation,
                    plan: PhasePlan, eta: np.ndarray, sic: SicModel,
                    sigma2: float) -> list:
    """(k, E_k, p_k, R_k) per device; p_k is NaN for a degenerate slot."""
    rows = []
    for k in range(comp.K):
        energy = harvested_energy(comp, k, alloc, plan, eta[k])
        tau_k = alloc.tau[k + 1]
        if tau_k > 0.0:
            power = energy / tau_k
        else:
            power = 0.0 if energy == 0.0 else math.nan
        rows.append((k + 1, energy, power,
                     throughput(comp, k, alloc, plan, eta[k], sic, sigma2)))
    return rows


def evaluation_csv(comp: CompositeChannels, alloc: ResourceAllocation,
                   plan: PhasePlan, eta: np.ndarray, sic: SicModel,
                   sigma2: float) -> str:
    lines = ["k,energy_J,power_W,rate_bits_per_Hz"]
    for k, energy, power, rate in evaluation_rows(comp, alloc, plan, eta, sic, sigma2):
        lines.append(f"{k},{float(energy)!r},{float(power)!r},{float(rate)!r}")
    return "\n".join(lines) + "\n"
