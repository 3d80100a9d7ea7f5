"""Topology sampling, Rician channel realizations and composite IRS channels.

Randomness contract: all draws come from a counter-based Philox4x64-10
generator keyed with the 64-bit scenario seed (:func:`make_rng`).  Draws are
consumed in a fixed, documented order so that a realization is reproducible
bit-for-bit from ``(config, seed)`` alone:

1. ``sample_topology``: device radii (K uniforms), then device angles
   (K uniforms).
2. ``sample_channels``: link fading in the order ``g``, ``g_bar``, ``h_d``,
   ``h_d_bar``, then ``h_r`` row by row for k = 1..K; each link draws the
   real parts of its Gaussian block first, then the imaginary parts.

Uplink IRS-device channels are never stored: reciprocity gives them as the
elementwise conjugate of the downlink rows.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT, SystemConfig


def make_rng(seed: int) -> np.random.Generator:
    """Philox-backed generator for one scenario realization."""
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass
class Topology:
    """Node geometry in meters; IRS elements on an x-z rectangular grid."""

    hap_tx: np.ndarray
    hap_rx: np.ndarray
    irs_center: np.ndarray
    device_pos: np.ndarray       # (K, 3)
    irs_element_pos: np.ndarray  # (M, 3)


@dataclass
class ChannelSet:
    """One fading realization of every link.

    g      (M,)   HAP -> IRS, downlink
    g_bar  (M,)   IRS -> HAP, uplink (independent of g: separate HAP antennas)
    h_d    (K,)   HAP -> device, downlink
    h_d_bar (K,)  device -> HAP, uplink (independent of h_d)
    h_r    (K, M) IRS -> device, downlink; uplink rows are conj(h_r) by
                  reciprocity and are not stored
    """

    g: np.ndarray
    g_bar: np.ndarray
    h_d: np.ndarray
    h_d_bar: np.ndarray
    h_r: np.ndarray


@dataclass
class CompositeChannels:
    """Per-device composite IRS channels q_k[m] = conj(h_r[k, m]) * g[m] and
    q_bar_k[m] = conj(g_bar[m]) * conj(h_r[k, m]), plus the direct scalars."""

    q: np.ndarray        # (K, M)
    q_bar: np.ndarray    # (K, M)
    h_d: np.ndarray      # (K,)
    h_d_bar: np.ndarray  # (K,)

    @property
    def K(self) -> int:
        return self.h_d.shape[0]

    @property
    def M(self) -> int:
        return self.q.shape[1]


def path_loss(distance_m: float, exponent: float, carrier_Hz: float) -> float:
    """Distance power gain c0 * d^(-exponent) with c0 = (wavelength / 4 pi)^2
    referenced to 1 m."""
    if distance_m <= 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    wavelength = SPEED_OF_LIGHT / carrier_Hz
    c0 = (wavelength / (4.0 * np.pi)) ** 2
    return c0 * distance_m ** (-exponent)


def irs_element_grid(center: np.ndarray, Mx: int, Mz: int, spacing: float) -> np.ndarray:
    """Mx x Mz element positions on the x-z plane centered on ``center``.

    Element m = ix * Mz + iz sits at offset ((ix - (Mx-1)/2) * spacing, 0,
    (iz - (Mz-1)/2) * spacing).
    """
    ix = np.repeat(np.arange(Mx), Mz)
    iz = np.tile(np.arange(Mz), Mx)
    offsets = np.zeros((Mx * Mz, 3))
    offsets[:, 0] = (ix - (Mx - 1) / 2.0) * spacing
    offsets[:, 2] = (iz - (Mz - 1) / 2.0) * spacing
    return np.asarray(center, dtype=float) + offsets


def sample_topology(config: SystemConfig, rng: np.random.Generator) -> Topology:
    """Drop devices uniformly on the configured disk (sqrt-uniform radius,
    uniform angle); HAP antennas and IRS sit at their configured positions."""
    center = np.asarray(config.device_center, dtype=float)
    radii = config.device_radius * np.sqrt(rng.random(config.K))
    angles = 2.0 * np.pi * rng.random(config.K)
    device_pos = np.column_stack([
        center[0] + radii * np.cos(angles),
        center[1] + radii * np.sin(angles),
        np.full(config.K, center[2]),
    ])
    hap = np.asarray(config.hap_pos, dtype=float)
    irs = np.asarray(config.irs_pos, dtype=float)
    elements = irs_element_grid(irs, config.Mx, config.Mz, config.element_spacing_m)
    return Topology(hap_tx=hap, hap_rx=hap.copy(), irs_center=irs,
                    device_pos=device_pos, irs_element_pos=elements)


def array_response(element_pos: np.ndarray, point: np.ndarray,
                   wavelength: float) -> np.ndarray:
    """Unit-modulus geometric response of the element grid toward ``point``,
    with phases referenced to the element centroid."""
    dists = np.linalg.norm(element_pos - np.asarray(point, dtype=float), axis=1)
    centroid = element_pos.mean(axis=0)
    ref = np.linalg.norm(centroid - np.asarray(point, dtype=float))
    return np.exp(-2j * np.pi * (dists - ref) / wavelength)


def rician_fade(rng: np.random.Generator, los: np.ndarray, kappa: float) -> np.ndarray:
    """Rician-distributed fading around a deterministic LoS component.

    ``kappa`` is the linear Rician factor; the scattered part is i.i.d.
    circularly-symmetric complex Gaussian with unit variance.  Real parts of
    the Gaussian block are drawn before imaginary parts.
    """
    los = np.asarray(los)
    re = rng.standard_normal(los.shape)
    im = rng.standard_normal(los.shape)
    nlos = (re + 1j * im) / np.sqrt(2.0)
    return np.sqrt(kappa / (1.0 + kappa)) * los + np.sqrt(1.0 / (1.0 + kappa)) * nlos


def sample_channels(config: SystemConfig, topo: Topology,
                    rng: np.random.Generator) -> ChannelSet:
    """Draw one fading realization for every link.

    Each link is sqrt(L(d)) * Rician(los, kappa); IRS links use the geometric
    array response as LoS and the distance to the IRS center for path loss
    (element spans are negligible against link distances), direct links use
    the unit scalar.
    """
    kappa = config.rician_k_lin
    lam = config.wavelength_m
    elements = topo.irs_element_pos

    d_hap_irs = np.linalg.norm(topo.irs_center - topo.hap_tx)
    L_hap_irs = path_loss(d_hap_irs, config.pathloss_exp_hap_irs, config.carrier_Hz)
    los_hap = array_response(elements, topo.hap_tx, lam)
    g = np.sqrt(L_hap_irs) * rician_fade(rng, los_hap, kappa)
    g_bar = np.sqrt(L_hap_irs) * rician_fade(rng, los_hap, kappa)

    d_dev = np.linalg.norm(topo.device_pos - topo.hap_tx, axis=1)
    L_dev = np.array([
        path_loss(d, config.pathloss_exp_hap_device, config.carrier_Hz) for d in d_dev
    ])
    ones = np.ones(config.K, dtype=complex)
    h_d = np.sqrt(L_dev) * rician_fade(rng, ones, kappa)
    h_d_bar = np.sqrt(L_dev) * rician_fade(rng, ones, kappa)

    h_r = np.empty((config.K, config.M), dtype=complex)
    for k in range(config.K):
        d_ik = np.linalg.norm(topo.device_pos[k] - topo.irs_center)
        L_ik = path_loss(d_ik, config.pathloss_exp_irs_device, config.carrier_Hz)
        los_k = array_response(elements, topo.device_pos[k], lam)
        h_r[k] = np.sqrt(L_ik) * rician_fade(rng, los_k, kappa)

    return ChannelSet(g=g, g_bar=g_bar, h_d=h_d, h_d_bar=h_d_bar, h_r=h_r)


def composite_channels(ch: ChannelSet) -> CompositeChannels:
    """Fold the reflecting surface out of the cascaded links."""
    q = np.conj(ch.h_r) * ch.g[None, :]
    q_bar = np.conj(ch.g_bar)[None, :] * np.conj(ch.h_r)
    return CompositeChannels(q=q, q_bar=q_bar,
                             h_d=ch.h_d.copy(), h_d_bar=ch.h_d_bar.copy())


def realize(config: SystemConfig, seed: int | None = None):
    """Topology, channels and composites for (config, seed) in one call."""
    rng = make_rng(config.rng_seed if seed is None else seed)
    topo = sample_topology(config, rng)
    ch = sample_channels(config, topo, rng)
    return topo, ch, composite_channels(ch)


def permute_devices(comp: CompositeChannels, order) -> CompositeChannels:
    """Composite channels with device rows reordered; ``order[j]`` is the
    original index of the device occupying position j."""
    idx = np.asarray(order, dtype=int)
    return CompositeChannels(q=comp.q[idx], q_bar=comp.q_bar[idx],
                             h_d=comp.h_d[idx], h_d_bar=comp.h_d_bar[idx])


def channels_csv(ch: ChannelSet) -> str:
    """Debug dump with columns link,k,m,re,im.

    Device index k is 1-based (0 for the HAP-IRS links); element index m is
    1-based (0 for scalar links).
    """
    lines = ["link,k,m,re,im"]

    def emit(link, k, m, value):
        lines.append(f"{link},{k},{m},{float(value.real)!r},{float(value.imag)!r}")

    for m, v in enumerate(ch.g, start=1):
        emit("g", 0, m, v)
    for m, v in enumerate(ch.g_bar, start=1):
        emit("g_bar", 0, m, v)
    for k, v in enumerate(ch.h_d, start=1):
        emit("h_d", k, 0, v)
    for k, v in enumerate(ch.h_d_bar, start=1):
        emit("h_d_bar", k, 0, v)
    for k in range(ch.h_r.shape[0]):
        for m, v in enumerate(ch.h_r[k], start=1):
            emit("h_r", k + 1, m, v)
    return "\n".join(lines) + "\n"


def channel_checksum(ch: ChannelSet) -> str:
    """Stable 16-hex-digit digest of a realization, for cross-run checks."""
    h = hashlib.blake2b(digest_size=8)
    for arr in (ch.g, ch.g_bar, ch.h_d, ch.h_d_bar, ch.h_r):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()
