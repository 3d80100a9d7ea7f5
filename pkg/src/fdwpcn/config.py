"""System configuration for the IRS-aided full-duplex wireless-powered network.

All decibel quantities are converted to linear scale exactly once, when the
config object is constructed; everything downstream works in watts and linear
power gains.  Configs round-trip through a flat ``key = value`` text format
(see :func:`config_from_text` / :func:`config_to_text`).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

# Wireless convention: 3e8 m/s so that 750 MHz gives a 0.4 m wavelength and
# half-wavelength element spacing of 0.2 m.
SPEED_OF_LIGHT = 3.0e8


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


class ConfigError(ValueError):
    """Invalid configuration value or config-file syntax."""


@dataclass
class SolverParams:
    """Knobs for the projected-gradient concave maximizer.

    max_iters        iteration cap per solve
    grad_tol         sup-norm tolerance on x - project(x + step * grad)
    step_init        initial step size (adapted up/down by the line search)
    armijo_c         sufficient-increase fraction, in (0, 1)
    backtrack_factor step-shrink factor, in (0, 1)
    dykstra_iters    round cap for the PSD/unit-diagonal Dykstra projection
    """

    max_iters: int = 500
    grad_tol: float = 1e-7
    step_init: float = 1.0
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    dykstra_iters: int = 500

    def __post_init__(self):
        if self.max_iters <= 0 or self.dykstra_iters <= 0:
            raise ConfigError("iteration caps must be positive")
        if self.grad_tol <= 0 or self.step_init <= 0:
            raise ConfigError("grad_tol and step_init must be positive")
        if not 0.0 < self.armijo_c < 1.0:
            raise ConfigError("armijo_c must lie strictly inside (0, 1)")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ConfigError("backtrack_factor must lie strictly inside (0, 1)")


@dataclass
class PenaltyParams:
    """Two-layer penalty loop parameters.

    rho0      initial penalty coefficient
    shrink    geometric shrink factor applied to rho each outer round, in (0, 1)
    eps_inner relative-increase threshold terminating the inner loop
    eps_outer violation threshold terminating the outer loop
    """

    rho0: float = 100.0
    shrink: float = 0.85
    eps_inner: float = 1e-2
    eps_outer: float = 1e-5
    max_outer: int = 200
    max_inner: int = 30

    def __post_init__(self):
        if self.rho0 <= 0:
            raise ConfigError("rho0 must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ConfigError("shrink must lie strictly inside (0, 1)")
        if self.eps_inner <= 0 or self.eps_outer <= 0:
            raise ConfigError("tolerances must be positive")
        if self.max_outer <= 0 or self.max_inner <= 0:
            raise ConfigError("iteration caps must be positive")


@dataclass
class SystemConfig:
    """Physical and algorithmic parameters of one network instance.

    Defaults follow the simulation setup used throughout the package: a
    750 MHz carrier, 1 MHz bandwidth, -150 dBm/Hz noise density, an access
    point at the origin, a 5 x Mz reflecting surface at (10, 0, 2.5) m and
    devices dropped uniformly in a 1.5 m circle around (10, 0, 0) m.
    """

    K: int = 10
    Mx: int = 5
    Mz: int = 4
    T: float = 1.0
    Pmax_dBm: float = 30.0
    noise_density_dBm_per_Hz: float = -150.0
    bandwidth_Hz: float = 1e6
    capacity_gap_dB: float = 9.8
    quantization_beta_dB: float = -60.0
    # None means perfect self-interference cancellation (gamma = 0).
    si_gamma_dB: float | None = None
    eta: float | tuple = 0.8
    rician_K_dB: float = 3.0
    pathloss_exp_hap_irs: float = 2.2
    pathloss_exp_irs_device: float = 2.2
    pathloss_exp_hap_device: float = 2.6
    carrier_Hz: float = 750e6
    element_spacing_m: float = 0.2
    device_center: tuple = (10.0, 0.0, 0.0)
    device_radius: float = 1.5
    hap_pos: tuple = (0.0, 0.0, 0.0)
    irs_pos: tuple = (10.0, 0.0, 2.5)
    rng_seed: int = 0
    random_phase_init: bool = False
    ao_eps: float = 1e-2
    ao_max_passes: int = 60
    solver: SolverParams = field(default_factory=SolverParams)
    penalty: PenaltyParams = field(default_factory=PenaltyParams)

    # Derived, filled by __post_init__; linear-scale values cached once.
    M: int = field(init=False)
    wavelength_m: float = field(init=False)
    pmax_w: float = field(init=False)
    sigma2_w: float = field(init=False)
    capacity_gap_lin: float = field(init=False)
    beta_lin: float = field(init=False)
    gamma_lin: float = field(init=False)
    rician_k_lin: float = field(init=False)
    eta_vec: np.ndarray = field(init=False, compare=False)

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.Mx < 1 or self.Mz < 1:
            raise ConfigError("Mx and Mz must be >= 1")
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if self.bandwidth_Hz <= 0 or self.carrier_Hz <= 0:
            raise ConfigError("bandwidth_Hz and carrier_Hz must be positive")
        if self.element_spacing_m <= 0:
            raise ConfigError("element_spacing_m must be positive")
        if self.device_radius < 0:
            raise ConfigError("device_radius must be >= 0")

        self.M = self.Mx * self.Mz
        self.wavelength_m = SPEED_OF_LIGHT / self.carrier_Hz
        self.pmax_w = dbm_to_watts(self.Pmax_dBm)
        self.sigma2_w = dbm_to_watts(self.noise_density_dBm_per_Hz) * self.bandwidth_Hz
        self.capacity_gap_lin = db_to_linear(self.capacity_gap_dB)
        self.beta_lin = db_to_linear(self.quantization_beta_dB)
        self.gamma_lin = 0.0 if self.si_gamma_dB is None else db_to_linear(self.si_gamma_dB)
        self.rician_k_lin = db_to_linear(self.rician_K_dB)

        eta = np.atleast_1d(np.asarray(self.eta, dtype=float))
        if eta.size == 1:
            eta = np.full(self.K, float(eta[0]))
        if eta.shape != (self.K,):
            raise ConfigError(f"eta must be a scalar or a length-{self.K} sequence")
        if np.any(eta < 0.0) or np.any(eta > 1.0):
            raise ConfigError("every eta must lie in [0, 1]")
        self.eta_vec = eta

    @property
    def perfect_sic(self) -> bool:
        return self.si_gamma_dB is None

    def replace(self, **changes) -> "SystemConfig":
        """New config with the given fields changed; derived values recomputed."""
        base = {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if f.init
        }
        base.update(changes)
        return SystemConfig(**base)


# ---------------------------------------------------------------------------
# Flat key = value config text.

_SCALAR_FLOAT_KEYS = (
    "T", "Pmax_dBm", "noise_density_dBm_per_Hz", "bandwidth_Hz",
    "capacity_gap_dB", "quantization_beta_dB", "rician_K_dB",
    "pathloss_exp_hap_irs", "pathloss_exp_irs_device", "pathloss_exp_hap_device",
    "carrier_Hz", "element_spacing_m", "device_radius", "ao_eps",
)
_SCALAR_INT_KEYS = ("K", "Mx", "Mz", "rng_seed", "ao_max_passes")
_VEC3_KEYS = ("device_center", "hap_pos", "irs_pos")
_SOLVER_FLOAT = ("grad_tol", "step_init", "armijo_c", "backtrack_factor")
_SOLVER_INT = ("max_iters", "dykstra_iters")
_PENALTY_FLOAT = ("rho0", "shrink", "eps_inner", "eps_outer")
_PENALTY_INT = ("max_outer", "max_inner")


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines into a string mapping.

    Blank lines and ``#`` comments are ignored; later keys override earlier
    ones.  Values keep their raw string form.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_bool(value: str) -> bool:
    v = value.lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def config_from_mapping(mapping: dict, allow_extra: bool = False) -> SystemConfig:
    """Build a :class:`SystemConfig` from parsed key/value strings."""
    kwargs = {}
    solver_kwargs = {}
    penalty_kwargs = {}
    for key, value in mapping.items():
        if key in _SCALAR_FLOAT_KEYS:
            kwargs[key] = float(value)
        elif key in _SCALAR_INT_KEYS:
            kwargs[key] = int(value)
        elif key in _VEC3_KEYS:
            parts = [float(p) for p in value.split(",")]
            if len(parts) != 3:
                raise ConfigError(f"{key} must have three comma-separated coordinates")
            kwargs[key] = tuple(parts)
        elif key == "si_gamma_dB":
            kwargs[key] = None if value.lower() in ("perfect", "none") else float(value)
        elif key == "eta":
            parts = [float(p) for p in value.split(",")]
            kwargs[key] = parts[0] if len(parts) == 1 else tuple(parts)
        elif key == "random_phase_init":
            kwargs[key] = _parse_bool(value)
        elif key.startswith("solver_"):
            name = key[len("solver_"):]
            if name in _SOLVER_FLOAT:
                solver_kwargs[name] = float(value)
            elif name in _SOLVER_INT:
                solver_kwargs[name] = int(value)
            else:
                raise ConfigError(f"unknown solver key {key!r}")
        elif key.startswith("penalty_"):
            name = key[len("penalty_"):]
            if name in _PENALTY_FLOAT:
                penalty_kwargs[name] = float(value)
            elif name in _PENALTY_INT:
                penalty_kwargs[name] = int(value)
            else:
                raise ConfigError(f"unknown penalty key {key!r}")
        elif not allow_extra:
            raise ConfigError(f"unknown config key {key!r}")
    if solver_kwargs:
        kwargs["solver"] = SolverParams(**solver_kwargs)
    if penalty_kwargs:
        kwargs["penalty"] = PenaltyParams(**penalty_kwargs)
    return SystemConfig(**kwargs)


def config_from_text(text: str, allow_extra: bool = False) -> SystemConfig:
    return config_from_mapping(parse_config_text(text), allow_extra=allow_extra)


def config_to_text(config: SystemConfig, extra: dict | None = None) -> str:
    """Serialize a config (plus optional extra keys) to the flat text format."""
    lines = []
    for key in _SCALAR_INT_KEYS:
        lines.append(f"{key} = {getattr(config, key)}")
    for key in _SCALAR_FLOAT_KEYS:
        lines.append(f"{key} = {getattr(config, key)!r}")
    gamma = "perfect" if config.si_gamma_dB is None else repr(config.si_gamma_dB)
    lines.append(f"si_gamma_dB = {gamma}")
    eta = np.atleast_1d(np.asarray(config.eta, dtype=float))
    lines.append("eta = " + ",".join(repr(float(e)) for e in eta))
    for key in _VEC3_KEYS:
        lines.append(f"{key} = " + ",".join(repr(float(c)) for c in getattr(config, key)))
    lines.append(f"random_phase_init = {str(config.random_phase_init).lower()}")
    for name in _SOLVER_INT + _SOLVER_FLOAT:
        lines.append(f"solver_{name} = {getattr(config.solver, name)!r}")
    for name in _PENALTY_INT + _PENALTY_FLOAT:
        lines.append(f"penalty_{name} = {getattr(config.penalty, name)!r}")
    if extra:
        for key, value in extra.items():
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
