"""Sum-throughput optimizers for the fully dynamic reflection configuration.

Two drivers live here.  With perfect self-interference cancellation the
transmit power provably sits at its budget, so an alternating loop over the
slot durations and the per-slot reflection vectors suffices; each reflection
subproblem replaces the convex squared-magnitude gains by their tangent
lower bounds at the current point and maximizes the resulting concave
surrogate over the relaxed unit disk.  With residual self-interference the
power enters the noise, so the noise factor is pulled out into an auxiliary
variable tied to the power by an equality constraint that is moved into the
objective as a quadratic penalty; an outer loop shrinks the penalty
coefficient geometrically until the violation indicator drops below
tolerance.

Slot conventions follow :mod:`fdwpcn.model`; devices are permuted into their
transmission order before optimization and the permutation is reported in
the result.  The resource subproblems (slot durations, powers, auxiliary
variables) are expressed through a generic per-slot product-gain table so
the split-vector and single-vector optimizers in
:mod:`fdwpcn.dc_beamforming` can reuse them on lifted-matrix gains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import PenaltyParams, SolverParams, SystemConfig
from .convex_core import (ConcaveProblem, maximize_concave, project_box,
                          project_simplex, project_unit_disk)
from .model import (LOG2E, PhasePlan, ResourceAllocation, SicModel,
                    dl_amplitudes, dl_gain_table, sum_throughput,
                    ul_slot_gains)
from .scenario import CompositeChannels, permute_devices

INCREASING_SNR = "increasing_snr"
DECREASING_SNR = "decreasing_snr"

TAU_FLOOR = 1e-9   # slot-duration floor used inside solvers only
AUX_FLOOR = 1e-12  # positivity floor for the auxiliary noise variable
LN2 = math.log(2.0)


class PenaltyDivergenceError(RuntimeError):
    """Penalized objective became non-finite."""

    def __init__(self, outer_iteration: int):
        super().__init__(f"penalty loop diverged at outer iteration {outer_iteration}")
        self.outer_iteration = outer_iteration


@dataclass
class OptimizationResult:
    """Outcome of one optimizer run, in slot order.

    ``device_order[j]`` is the original index of the device transmitting in
    slot j+1.  ``objective_trace`` holds the per-block values the optimizer
    ascended (true objective for the perfect-SIC loop, penalized objective
    otherwise) and ``trace_segments`` gives the lengths of its monotone runs
    (the penalty coefficient is constant within a run).  ``violation_trace``
    records the equality-violation indicator once per outer round and stays
    empty for perfect-SIC runs.  ``objective`` is always the true sum
    throughput of (alloc, plan) after unit-modulus reconstruction.
    """

    scheme: str
    alloc: ResourceAllocation
    plan: PhasePlan
    objective: float
    objective_trace: list = field(default_factory=list)
    trace_segments: list = field(default_factory=list)
    violation_trace: list = field(default_factory=list)
    trace_xi: list = field(default_factory=list)
    xi_final: float = 0.0
    iterations: int = 0
    device_order: np.ndarray | None = None
    rank_one_gap: float | None = None

    def csv(self) -> str:
        """Summary rows (scheme, objective, iterations, final violation)
        followed by per-slot durations, powers and reflection entries."""
        lines = ["field,slot,m,value_re,value_im"]
        lines.append(f"scheme,0,0,{self.scheme},")
        lines.append(f"objective,0,0,{float(self.objective)!r},0.0")
        lines.append(f"iterations,0,0,{self.iterations},0")
        lines.append(f"xi_final,0,0,{float(self.xi_final)!r},0.0")
        K = self.alloc.tau.shape[0] - 1
        for i, (t, p) in enumerate(zip(self.alloc.tau, self.alloc.P)):
            lines.append(f"tau,{i},0,{float(t)!r},0.0")
            lines.append(f"power,{i},0,{float(p)!r},0.0")
        for i in range(K + 1):
            for m, entry in enumerate(self.plan.slot_vector(i), start=1):
                lines.append(f"phase,{i},{m},{float(entry.real)!r},{float(entry.imag)!r}")
        return "\n".join(lines) + "\n"


def schedule_devices(comp: CompositeChannels, order: str = INCREASING_SNR) -> np.ndarray:
    """Transmission order by direct-link power gain.

    ``increasing_snr`` schedules the strongest direct link first,
    ``decreasing_snr`` the weakest first; ties break by device index.
    """
    gains = np.abs(comp.h_d) ** 2
    idx = np.arange(comp.K)
    if order == INCREASING_SNR:
        return np.lexsort((idx, -gains))
    if order == DECREASING_SNR:
        return np.lexsort((idx, gains))
    raise ValueError(f"unknown scheduling order {order!r}")


# ---------------------------------------------------------------------------
# Resource subproblems, parameterized by a product-gain table.
#
# prod[k, i] is the combined downlink-times-uplink power gain device k earns
# per joule radiated in slot i, with the own-slot column zeroed.  For
# per-slot reflection vectors prod[k, i] = y[k, i] * ubar[k]; the lifted
# optimizers substitute trace-form gains.

def product_gain_table(comp: CompositeChannels, plan: PhasePlan, K: int) -> np.ndarray:
    y = dl_gain_table(comp, plan, K)
    ubar = ul_slot_gains(comp, plan, K)
    prod = y * ubar[:, None]
    prod[np.arange(K), np.arange(K) + 1] = 0.0
    return prod


def time_objective(tau: np.ndarray, W: np.ndarray) -> float:
    """Sum of tau_k * log2(1 + (W @ tau)_k / tau_k) over the uplink slots.

    W[k, i] is the rate weight device k earns from slot i (own-slot column
    already zero).
    """
    s = W @ tau
    t = tau[1:]
    ratio = np.where(t > 0, s / np.where(t > 0, t, 1.0), 0.0)
    return float(np.sum(t * np.log2(1.0 + ratio)))


def time_gradient(tau: np.ndarray, W: np.ndarray) -> np.ndarray:
    s = W @ tau
    t = tau[1:]
    x = s / t
    own = np.log2(1.0 + x) - x / ((1.0 + x) * LN2)
    grad = W.T @ (1.0 / ((1.0 + x) * LN2))
    grad[1:] += own
    return grad


def solve_time_allocation(W: np.ndarray, T: float, params: SolverParams,
                          tau_start: np.ndarray | None = None):
    """Maximize :func:`time_objective` over {tau >= 0, sum(tau) <= T}.

    A floor of ``TAU_FLOOR`` keeps every slot strictly positive during the
    solve so the perspective terms stay differentiable; callers snap
    floor-level slots to zero at final evaluation.  Returns
    (tau, objective, trace).
    """
    n = W.shape[1]
    inner_budget = T - n * TAU_FLOOR
    if inner_budget <= 0:
        raise ValueError("frame too short for the slot-duration floor")

    def project(x):
        return project_simplex(x - TAU_FLOOR, inner_budget) + TAU_FLOOR

    start = np.full(n, T / n) if tau_start is None else np.asarray(tau_start, float)
    problem = ConcaveProblem(
        value=lambda tau: time_objective(tau, W),
        grad=lambda tau: time_gradient(tau, W),
        project=project,
        start=start,
    )
    return maximize_concave(problem, params)


def rate_weight_matrix(prod: np.ndarray, eta: np.ndarray, P: np.ndarray,
                       den: np.ndarray) -> np.ndarray:
    """W[k, i] = eta_k * P_i * prod[k, i] / den_k; den_k is the effective
    noise power (watts) seen by device k."""
    return eta[:, None] * P[None, :] * prod / den[:, None]


def harvest_numerators(prod: np.ndarray, tau: np.ndarray, P: np.ndarray,
                       eta: np.ndarray) -> np.ndarray:
    """eta_k * sum_i P_i tau_i prod[k, i] (own slot already zero in prod)."""
    return eta * (prod @ (P * tau))


def solve_power(prod: np.ndarray, eta: np.ndarray, tau: np.ndarray,
                z: np.ndarray, sic: SicModel, sigma2: float, pmax: float,
                rho: float, params: SolverParams, P_start: np.ndarray):
    """Maximize the penalized rate over the power box [0, Pmax]^(K+1).

    The rate part is concave (logs of affine functions of the powers) and the
    penalty couples each uplink power to its auxiliary noise variable.
    Returns (P, objective, trace).
    """
    t = tau[1:]
    active = t > 0
    tsafe = np.where(active, t, 1.0)
    L = eta[:, None] * tau[None, :] * prod / (sigma2 * z * tsafe)[:, None]
    L[~active] = 0.0
    gb = sic.capacity_gap * sic.beta * sic.gamma / sigma2

    def value(P):
        snr = L @ P
        pen = float(np.sum((z - (gb * P[1:] + sic.capacity_gap)) ** 2)) / (2.0 * rho)
        return float(np.sum(t * np.log2(1.0 + snr))) - pen

    def grad(P):
        snr = L @ P
        g = L.T @ (t / ((1.0 + snr) * LN2))
        g[1:] += gb * (z - (gb * P[1:] + sic.capacity_gap)) / rho
        return g

    problem = ConcaveProblem(value=value, grad=grad,
                             project=lambda P: project_box(P, 0.0, pmax),
                             start=np.asarray(P_start, dtype=float))
    return maximize_concave(problem, params)


# ---------------------------------------------------------------------------
# Auxiliary noise variable (imperfect cancellation).

def aux_target(P: np.ndarray, sic: SicModel, sigma2: float) -> np.ndarray:
    """Equality target capacity_gap * (beta * gamma * P_k / sigma2 + 1) for
    the uplink slots."""
    return sic.capacity_gap * (sic.beta * sic.gamma * np.asarray(P)[1:] / sigma2 + 1.0)


def log_inv_tangent(z, z_ref, a):
    """Tangent of the convex map z -> log2(1 + a/z) at z_ref: a global lower
    bound (z, z_ref > 0)."""
    return np.log2(1.0 + a / z_ref) - a * LOG2E / (z_ref * (z_ref + a)) * (z - z_ref)


def aux_surrogate(z, z_ref, a, tau_k, rho, target):
    """Penalized per-device surrogate maximized by :func:`closed_form_aux`."""
    return tau_k * log_inv_tangent(z, z_ref, a) - (z - target) ** 2 / (2.0 * rho)


def closed_form_aux(z_ref, a, tau_k, P_k, rho, sic: SicModel, sigma2: float):
    """Exact maximizer of the penalized tangent surrogate in z.

    Works elementwise on arrays; ``P_k`` is the power in the device's own
    slot.  Raises for a nonpositive reference.
    """
    z_ref = np.asarray(z_ref, dtype=float)
    if np.any(z_ref <= 0.0):
        raise ValueError("auxiliary reference must be positive")
    target = sic.capacity_gap * (sic.beta * sic.gamma * np.asarray(P_k) / sigma2 + 1.0)
    return target - rho * np.asarray(a) * np.asarray(tau_k) * LOG2E / (
        z_ref * (z_ref + np.asarray(a)))


def penalty_violation(z: np.ndarray, P: np.ndarray, sic: SicModel,
                      sigma2: float) -> float:
    """Worst-device gap between the auxiliary variable and its target."""
    return float(np.max(np.abs(np.asarray(z) - aux_target(P, sic, sigma2))))


def update_aux(prod, eta, tau, P, z, rho, sic, sigma2):
    """One closed-form sweep of the auxiliary variables.

    The unconstrained maximizer can dive below zero while the penalty is
    still loose; it is floored at half the capacity gap (the equality target
    never sits below the gap itself), where the tangent slope stays bounded
    and the iterate recovers as the penalty tightens.
    """
    a = harvest_numerators(prod, tau, P, eta) / (np.maximum(tau[1:], TAU_FLOOR) * sigma2)
    floor = max(AUX_FLOOR, 0.5 * sic.capacity_gap)
    return np.maximum(closed_form_aux(z, a, tau[1:], P[1:], rho, sic, sigma2), floor)


# ---------------------------------------------------------------------------
# Tangent lower bounds for the squared-magnitude gains.

def dl_gain_lower_bound(comp: CompositeChannels, k: int, v: np.ndarray,
                        v_ref: np.ndarray) -> float:
    """Tangent lower bound of |h_d[k] + v^H q_k|^2 at v_ref; exact at v_ref
    and below the true gain everywhere."""
    s = comp.h_d[k] + np.vdot(v, comp.q[k])
    s_ref = comp.h_d[k] + np.vdot(v_ref, comp.q[k])
    return float(-abs(s_ref) ** 2 + 2.0 * np.real(np.conj(s) * s_ref))


def ul_gain_lower_bound(comp: CompositeChannels, k: int, v: np.ndarray,
                        v_ref: np.ndarray) -> float:
    s = comp.h_d_bar[k] + np.vdot(v, comp.q_bar[k])
    s_ref = comp.h_d_bar[k] + np.vdot(v_ref, comp.q_bar[k])
    return float(-abs(s_ref) ** 2 + 2.0 * np.real(np.conj(s) * s_ref))


# ---------------------------------------------------------------------------
# Per-slot reflection subproblems.

@dataclass
class PhaseContext:
    """Frozen quantities a reflection subproblem needs: channels in slot
    order, per-device conversion efficiencies, current slot durations and
    powers, the per-device effective noise ``den`` (watts) and the current
    relaxed plan."""

    comp: CompositeChannels
    eta: np.ndarray
    tau: np.ndarray
    P: np.ndarray
    den: np.ndarray
    plan: PhasePlan


def _harvest_excluding(y: np.ndarray, tau: np.ndarray, P: np.ndarray,
                       skip_slots=()) -> np.ndarray:
    """sum_i P_i tau_i y[k, i] excluding each device's own slot and any slot
    listed in ``skip_slots``."""
    K = y.shape[0]
    pt = P * tau
    total = y @ pt
    total = total - y[np.arange(K), np.arange(K) + 1] * pt[np.arange(K) + 1]
    for s in skip_slots:
        keep = np.arange(K) + 1 != s
        total = total - np.where(keep, y[:, s] * pt[s], 0.0)
    return total


def linearized_dl_problem(comp: CompositeChannels, tau: np.ndarray,
                          coef0: np.ndarray, frozen: np.ndarray,
                          v_ref: np.ndarray) -> ConcaveProblem:
    """Concave surrogate in one downlink reflection vector.

    Device k's rate term becomes tau_k * log2(1 + coef0_k * f_k(v) +
    frozen_k) where f_k is the tangent bound of its downlink gain at
    ``v_ref`` and ``frozen_k`` collects every contribution that does not
    depend on v.
    """
    t = tau[1:]
    s_ref = dl_amplitudes(comp, v_ref)

    def f_values(v):
        s = dl_amplitudes(comp, v)
        return -np.abs(s_ref) ** 2 + 2.0 * np.real(np.conj(s) * s_ref)

    def value(v):
        arg = 1.0 + coef0 * f_values(v) + frozen
        if np.any(arg <= 0.0):
            return -np.inf
        return float(np.sum(t * np.log2(arg)))

    def grad(v):
        arg = 1.0 + coef0 * f_values(v) + frozen
        w = t * coef0 / (arg * LN2)
        return comp.q.T @ (w * np.conj(s_ref))

    return ConcaveProblem(value=value, grad=grad, project=project_unit_disk,
                          start=np.asarray(v_ref, dtype=complex))


def _fully_dl_coeffs(ctx: PhaseContext):
    K = ctx.comp.K
    y = dl_gain_table(ctx.comp, ctx.plan, K)
    ubar = ul_slot_gains(ctx.comp, ctx.plan, K)
    t = ctx.tau[1:]
    active = t > 0
    coef = np.where(active, ctx.eta * ubar / (ctx.den * np.where(active, t, 1.0)), 0.0)
    other = _harvest_excluding(y, ctx.tau, ctx.P, skip_slots=(0,))
    return coef * ctx.P[0] * ctx.tau[0], coef * other


def optimize_phase_dl(ctx: PhaseContext, v_ref: np.ndarray, params: SolverParams,
                      rounds: int = 1):
    """Tangent linearization plus inner solve for the dedicated downlink
    slot's vector; every other slot's gains stay frozen.

    One round per block visit is the default; more rounds iterate the
    linearization to its fixed point.
    """
    coef0, frozen = _fully_dl_coeffs(ctx)
    v = np.asarray(v_ref, dtype=complex)
    for _ in range(rounds):
        problem = linearized_dl_problem(ctx.comp, ctx.tau, coef0, frozen, v)
        v, val, trace = maximize_concave(problem, params)
    return v, val, trace


def phase_ul_problem(ctx: PhaseContext, k: int, v_ref: np.ndarray) -> ConcaveProblem:
    """Concave surrogate for uplink slot k+1's vector.

    The vector appears in device k's uplink gain and in every other device's
    harvesting gain during that slot; both get tangent bounds at ``v_ref``,
    all remaining gains are frozen at the current plan.
    """
    comp, tau, P = ctx.comp, ctx.tau, ctx.P
    K = comp.K
    slot = k + 1
    y = dl_gain_table(comp, ctx.plan, K)
    ubar = ul_slot_gains(comp, ctx.plan, K)
    t = tau[1:]
    active = t > 0
    tsafe = np.where(active, t, 1.0)

    # Device k's own rate: harvested energy frozen, uplink gain linearized.
    own_energy = _harvest_excluding(y, tau, P)[k]
    a_own = ctx.eta[k] * own_energy / (ctx.den[k] * tsafe[k]) if active[k] else 0.0
    sbar_ref = comp.h_d_bar[k] + np.vdot(v_ref, comp.q_bar[k])

    # Other devices: slot-(k+1) harvesting linearized, everything else frozen.
    others = np.arange(K) != k
    other_energy = _harvest_excluding(y, tau, P, skip_slots=(slot,))
    coef = np.where(active, ctx.eta * ubar / (ctx.den * tsafe), 0.0)
    pktk = P[slot] * tau[slot]
    s_ref = dl_amplitudes(comp, v_ref)

    def pieces(v):
        fbar = -abs(sbar_ref) ** 2 + 2.0 * np.real(
            np.conj(comp.h_d_bar[k] + np.vdot(v, comp.q_bar[k])) * sbar_ref)
        s = dl_amplitudes(comp, v)
        f = -np.abs(s_ref) ** 2 + 2.0 * np.real(np.conj(s) * s_ref)
        return 1.0 + a_own * fbar, 1.0 + coef * (pktk * f + other_energy)

    def value(v):
        arg_own, arg = pieces(v)
        if arg_own <= 0.0 or np.any(arg[others] <= 0.0):
            return -np.inf
        return float(t[k] * np.log2(arg_own) + np.sum(t[others] * np.log2(arg[others])))

    def grad(v):
        arg_own, arg = pieces(v)
        g = (t[k] * a_own / (arg_own * LN2)) * np.conj(sbar_ref) * comp.q_bar[k]
        w = np.where(others, t * coef * pktk / (arg * LN2), 0.0)
        return g + comp.q.T @ (w * np.conj(s_ref))

    return ConcaveProblem(value=value, grad=grad, project=project_unit_disk,
                          start=np.asarray(v_ref, dtype=complex))


def optimize_phase_ul_slot(ctx: PhaseContext, k: int, v_ref: np.ndarray,
                           params: SolverParams, rounds: int = 1):
    v = np.asarray(v_ref, dtype=complex)
    for _ in range(rounds):
        v, val, trace = maximize_concave(phase_ul_problem(ctx, k, v), params)
    return v, val, trace


def reconstruct_unit_modulus(plan: PhasePlan) -> PhasePlan:
    """Snap every relaxed entry to the unit circle, keeping its argument;
    (near-)zero entries map to 1+0j by convention."""
    mags = np.abs(plan.vectors)
    vectors = np.where(mags < 1e-12, 1.0 + 0.0j,
                       plan.vectors / np.where(mags < 1e-12, 1.0, mags))
    return PhasePlan(plan.kind, vectors, relaxed=False)


# ---------------------------------------------------------------------------
# Reflection starting points.

def cophase_dl_vector(comp: CompositeChannels, k: int) -> np.ndarray:
    """Unit-modulus vector aligning the cascaded downlink path of device k
    with its direct link."""
    return np.exp(1j * (np.angle(comp.q[k]) - np.angle(comp.h_d[k])))


def cophase_ul_vector(comp: CompositeChannels, k: int) -> np.ndarray:
    return np.exp(1j * (np.angle(comp.q_bar[k]) - np.angle(comp.h_d_bar[k])))


def initial_fully_vectors(comp: CompositeChannels,
                          rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-slot starting vectors: the downlink slot co-phases the strongest
    device, each uplink slot co-phases its own device.  With ``rng`` given,
    phases are drawn uniformly at random instead."""
    K, M = comp.K, comp.M
    if rng is not None:
        return np.exp(2j * np.pi * rng.random((K + 1, M)))
    strongest = int(np.argmax(np.abs(comp.h_d) ** 2))
    vectors = np.empty((K + 1, M), dtype=complex)
    vectors[0] = cophase_dl_vector(comp, strongest)
    for k in range(K):
        vectors[k + 1] = cophase_ul_vector(comp, k)
    return vectors


# ---------------------------------------------------------------------------
# Drivers.

def _snap_floor(tau: np.ndarray) -> np.ndarray:
    out = np.asarray(tau, dtype=float).copy()
    out[out <= 2.0 * TAU_FLOOR] = 0.0
    return out


def _prepare(comp, config, order):
    idx = schedule_devices(comp, order)
    return permute_devices(comp, idx), config.eta_vec[idx], idx


def _final_result(scheme, comp, eta, tau, P, plan, sic, sigma2, trace, segments,
                  violation_trace, trace_xi, xi_final, iterations, order_idx,
                  rank_one_gap=None):
    alloc = ResourceAllocation(tau=_snap_floor(tau), P=np.asarray(P, float).copy())
    objective = sum_throughput(comp, alloc, plan, eta, sic, sigma2)
    return OptimizationResult(
        scheme=scheme, alloc=alloc, plan=plan, objective=objective,
        objective_trace=trace, trace_segments=segments,
        violation_trace=violation_trace, trace_xi=trace_xi, xi_final=xi_final,
        iterations=iterations, device_order=order_idx, rank_one_gap=rank_one_gap)


def _ao_perfect_driver(comp, config, order, params, *, scheme,
                       sic: SicModel, P_fixed=None, plan0: PhasePlan | None = None,
                       update_tau=True, update_phase=True,
                       rng: np.random.Generator | None = None):
    """Alternating loop for a fixed power vector: slot durations, then the
    downlink vector, then each uplink vector, until the true objective's
    fractional increase drops below ``config.ao_eps``; finishes with
    unit-modulus reconstruction and one final slot-duration solve."""
    pcomp, eta, order_idx = _prepare(comp, config, order)
    K = pcomp.K
    sigma2 = config.sigma2_w
    params = params or config.solver

    P = np.full(K + 1, config.pmax_w) if P_fixed is None else np.asarray(P_fixed, float)
    den = np.array([sic.noise_factor(P[k + 1], sigma2) for k in range(K)])
    if plan0 is not None:
        plan = plan0
        vectors = plan0.as_fully(K).vectors.copy() if update_phase else None
        if update_phase:
            plan = PhasePlan.fully(vectors, relaxed=True)
    else:
        init_rng = rng if config.random_phase_init else None
        vectors = initial_fully_vectors(pcomp, init_rng)
        plan = PhasePlan.fully(vectors, relaxed=True)
    tau = np.full(K + 1, config.T / (K + 1))

    def evaluate():
        alloc = ResourceAllocation(tau=tau, P=P)
        return sum_throughput(pcomp, alloc, plan, eta, sic, sigma2)

    obj = evaluate()
    trace = [obj]
    passes = 0
    for _ in range(config.ao_max_passes):
        passes += 1
        prev = obj
        if update_tau:
            prod = product_gain_table(pcomp, plan, K)
            W = rate_weight_matrix(prod, eta, P, den)
            tau, _, _ = solve_time_allocation(W, config.T, params, tau_start=tau)
            obj = evaluate()
            trace.append(obj)
        if update_phase:
            ctx = PhaseContext(pcomp, eta, tau, P, den, plan)
            vectors[0], _, _ = optimize_phase_dl(ctx, vectors[0], params)
            plan = PhasePlan.fully(vectors, relaxed=True)
            obj = evaluate()
            trace.append(obj)
            for k in range(K):
                ctx = PhaseContext(pcomp, eta, tau, P, den, plan)
                vectors[k + 1], _, _ = optimize_phase_ul_slot(ctx, k, vectors[k + 1], params)
                plan = PhasePlan.fully(vectors, relaxed=True)
                obj = evaluate()
                trace.append(obj)
        if obj - prev < config.ao_eps * max(abs(prev), 1e-12):
            break

    if update_phase:
        plan = reconstruct_unit_modulus(plan)
    if update_tau:
        prod = product_gain_table(pcomp, plan, K)
        W = rate_weight_matrix(prod, eta, P, den)
        tau, _, _ = solve_time_allocation(W, config.T, params, tau_start=tau)

    return _final_result(scheme, pcomp, eta, tau, P, plan, sic, sigma2,
                         trace, [len(trace)], [], [], 0.0, passes, order_idx)


def ao_fully_dynamic_perfect(comp: CompositeChannels, config: SystemConfig,
                             order: str = INCREASING_SNR,
                             params: SolverParams | None = None,
                             rng: np.random.Generator | None = None) -> OptimizationResult:
    """Joint slot-duration and per-slot reflection optimization under perfect
    self-interference cancellation; the power budget is provably exhausted,
    so every slot transmits at Pmax."""
    if config.gamma_lin > 0.0:
        raise ValueError("perfect-cancellation optimizer called with gamma > 0")
    sic = SicModel.perfect(config.capacity_gap_lin)
    return _ao_perfect_driver(comp, config, order, params, scheme="fd_perfect",
                              sic=sic, rng=rng)


def _penalty_driver(comp, config, order, pparams, params, *, scheme,
                    plan0: PhasePlan | None = None, update_tau=True,
                    update_phase=True, update_power=True,
                    rng: np.random.Generator | None = None):
    """Two-layer loop: the inner layer block-ascends the penalized objective
    (slot durations, powers, auxiliary variables, reflections); the outer
    layer shrinks the penalty coefficient until the violation indicator
    falls below tolerance, then the phases are reconstructed and the
    resources re-solved once."""
    pcomp, eta, order_idx = _prepare(comp, config, order)
    K = pcomp.K
    sigma2 = config.sigma2_w
    params = params or config.solver
    pparams = pparams or config.penalty
    sic = SicModel.from_config(config)
    if sic.gamma <= 0.0:
        raise ValueError("penalty optimizer requires gamma > 0")

    P = np.full(K + 1, config.pmax_w)
    z = aux_target(P, sic, sigma2)
    tau = np.full(K + 1, config.T / (K + 1))
    if plan0 is not None:
        plan = plan0
        vectors = plan0.as_fully(K).vectors.copy() if update_phase else None
        if update_phase:
            plan = PhasePlan.fully(vectors, relaxed=True)
    else:
        init_rng = rng if config.random_phase_init else None
        vectors = initial_fully_vectors(pcomp, init_rng)
        plan = PhasePlan.fully(vectors, relaxed=True)

    def penalized(rho):
        prod = product_gain_table(pcomp, plan, K)
        rate = time_objective(tau, rate_weight_matrix(prod, eta, P, sigma2 * z))
        pen = float(np.sum((z - aux_target(P, sic, sigma2)) ** 2)) / (2.0 * rho)
        return rate - pen

    rho = pparams.rho0
    trace, segments, trace_xi, violations = [], [], [], []
    sweeps = 0
    for outer in range(pparams.max_outer):
        phi = penalized(rho)
        if not np.isfinite(phi):
            raise PenaltyDivergenceError(outer)
        seg_start = len(trace)
        trace.append(phi)
        trace_xi.append(penalty_violation(z, P, sic, sigma2))
        for _ in range(pparams.max_inner):
            prev_phi = phi
            sweeps += 1
            prod = product_gain_table(pcomp, plan, K)
            if update_tau:
                W = rate_weight_matrix(prod, eta, P, sigma2 * z)
                tau, _, _ = solve_time_allocation(W, config.T, params, tau_start=tau)
            if update_power:
                P, _, _ = solve_power(prod, eta, tau, z, sic, sigma2,
                                      config.pmax_w, rho, params, P)
            z = update_aux(prod, eta, tau, P, z, rho, sic, sigma2)
            if update_phase:
                ctx = PhaseContext(pcomp, eta, tau, P, sigma2 * z, plan)
                vectors[0], _, _ = optimize_phase_dl(ctx, vectors[0], params)
                plan = PhasePlan.fully(vectors, relaxed=True)
                for k in range(K):
                    ctx = PhaseContext(pcomp, eta, tau, P, sigma2 * z, plan)
                    vectors[k + 1], _, _ = optimize_phase_ul_slot(ctx, k, vectors[k + 1], params)
                    plan = PhasePlan.fully(vectors, relaxed=True)
            phi = penalized(rho)
            if not np.isfinite(phi):
                raise PenaltyDivergenceError(outer)
            trace.append(phi)
            trace_xi.append(penalty_violation(z, P, sic, sigma2))
            if phi - prev_phi < pparams.eps_inner * max(abs(prev_phi), 1e-12):
                break
        segments.append(len(trace) - seg_start)
        xi = penalty_violation(z, P, sic, sigma2)
        violations.append(xi)
        if xi < pparams.eps_outer:
            break
        rho *= pparams.shrink

    if update_phase:
        plan = reconstruct_unit_modulus(plan)
    # One resource re-solve on the reconstructed plan.
    prod = product_gain_table(pcomp, plan, K)
    if update_tau:
        W = rate_weight_matrix(prod, eta, P, sigma2 * z)
        tau, _, _ = solve_time_allocation(W, config.T, params, tau_start=tau)
    if update_power:
        P, _, _ = solve_power(prod, eta, tau, z, sic, sigma2, config.pmax_w,
                              rho, params, P)
    z = update_aux(prod, eta, tau, P, z, rho, sic, sigma2)
    xi_final = penalty_violation(z, P, sic, sigma2)

    return _final_result(scheme, pcomp, eta, tau, P, plan, sic, sigma2,
                         trace, segments, violations, trace_xi, xi_final,
                         sweeps, order_idx)


def penalty_fully_dynamic(comp: CompositeChannels, config: SystemConfig,
                          order: str = INCREASING_SNR,
                          pparams: PenaltyParams | None = None,
                          params: SolverParams | None = None,
                          rng: np.random.Generator | None = None) -> OptimizationResult:
    """Fully dynamic reflection optimization with residual self-interference,
    via the two-layer penalty loop."""
    return _penalty_driver(comp, config, order, pparams, params,
                           scheme="fd_penalty", rng=rng)
