"""Static and split (downlink/uplink) reflection optimization.

When a single vector serves both link directions its squared gains multiply,
so the tangent trick used slot-by-slot no longer yields a concave surrogate.
The vector is lifted to a rank-one positive-semidefinite matrix with unit
diagonal: the gain product becomes a trace form that is convex in the lifted
matrix (so it gets its own tangent bound), and the rank-one requirement is
expressed exactly as trace(V) - ||V||_2 = 0, a difference of convex
functions whose spectral-norm half is linearized through the principal
eigenvector.  The resulting penalty shrinks on the same geometric schedule
as the self-interference penalty until the iterate is numerically rank one,
and the vector is read off the principal eigenvector.

The partially dynamic optimizer warm-starts from the fully tied solution
(identical to the static path) and then alternates a tangent step in the
dedicated downlink vector with lifted steps in the shared uplink vector.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import PenaltyParams, SolverParams, SystemConfig
from .convex_core import (ConcaveProblem, hermitian_eig, maximize_concave,
                          project_psd_unit_diag)
from .model import PhasePlan, SicModel, dl_gains
from .algorithms import (LN2, INCREASING_SNR, OptimizationResult,
                         _final_result, _prepare, aux_target,
                         cophase_dl_vector, initial_fully_vectors,
                         linearized_dl_problem, penalty_violation,
                         product_gain_table, rate_weight_matrix,
                         reconstruct_unit_modulus, solve_power,
                         solve_time_allocation, time_objective, update_aux)

RANK_ONE_TOL = 1e-4


def lift_channel_vectors(comp):
    """Stacked direct-plus-cascaded channel vectors [h_d; q] and
    [h_d_bar; q_bar], one row per device, length M+1."""
    h = np.column_stack([comp.h_d, comp.q])
    hbar = np.column_stack([comp.h_d_bar, comp.q_bar])
    return h, hbar


def lift_channels(comp, k: int):
    """Rank-one outer products (H_k, Hbar_k) of device k's lifted vectors."""
    h, hbar = lift_channel_vectors(comp)
    return np.outer(h[k], np.conj(h[k])), np.outer(hbar[k], np.conj(hbar[k]))


def trace_product_gains(V: np.ndarray, h: np.ndarray, hbar: np.ndarray) -> np.ndarray:
    """|hbar_k^H V h_k|^2 per device: the downlink-times-uplink gain product
    in lifted form (equals the plain product for rank-one V)."""
    t = np.einsum("km,mn,kn->k", np.conj(hbar), V, h)
    return np.abs(t) ** 2


def lifted_ul_gains(V: np.ndarray, hbar: np.ndarray) -> np.ndarray:
    """Re(hbar_k^H V hbar_k): the uplink gain in lifted form."""
    return np.real(np.einsum("km,mn,kn->k", np.conj(hbar), V, hbar))


def lifted_sca_bound(V: np.ndarray, V_ref: np.ndarray, h: np.ndarray,
                     hbar: np.ndarray) -> np.ndarray:
    """Tangent lower bound of the trace-form gain product at V_ref; exact at
    V_ref and below the true value everywhere."""
    t = np.einsum("km,mn,kn->k", np.conj(hbar), V, h)
    t_ref = np.einsum("km,mn,kn->k", np.conj(hbar), V_ref, h)
    return -np.abs(t_ref) ** 2 + 2.0 * np.real(np.conj(t) * t_ref)


def rank_one_gap(V: np.ndarray) -> float:
    """trace(V) minus the spectral norm; zero exactly for rank-one PSD V."""
    vals, _ = hermitian_eig(V)
    return float(np.real(np.trace(V)) - vals[0])


def _psd_rank_one_gap(V: np.ndarray) -> float:
    """Rank-one gap of the PSD part of V; robust to the small negative
    eigenvalues a truncated projection can leave behind."""
    vals, _ = hermitian_eig(V)
    clipped = np.maximum(vals, 0.0)
    return float(clipped.sum() - clipped[0])


def principal_unit_vector(V: np.ndarray) -> np.ndarray:
    """Reflection vector read off the principal eigenvector: rotate so the
    leading entry is real positive, then snap the tail to unit modulus."""
    _, vecs = hermitian_eig(V)
    u = vecs[:, 0]
    lead = u[0]
    if abs(lead) > 1e-12:
        u = u * (np.conj(lead) / abs(lead))
    tail = u[1:]
    mags = np.abs(tail)
    return np.where(mags < 1e-12, 1.0 + 0.0j, tail / np.where(mags < 1e-12, 1.0, mags))


@dataclass
class LiftedContext:
    """Per-device coefficients of one lifted reflection subproblem.

    Device k's rate term is tau_{k+1} * log2(1 + quad_w_k * <gain product> +
    lin_w_k * <uplink gain>), both gains in lifted form.
    """

    h: np.ndarray
    hbar: np.ndarray
    tau: np.ndarray
    quad_w: np.ndarray
    lin_w: np.ndarray


def dc_phase_step(V_ref: np.ndarray, ctx: LiftedContext, rho: float,
                  params: SolverParams):
    """One tangent round of the lifted subproblem.

    The gain products are replaced by their tangent bounds at ``V_ref`` and
    the rank-one penalty by its eigenvector linearization, then the concave
    surrogate is maximized over the PSD cone with unit diagonal.  Returns
    (V, surrogate value, trace).
    """
    h, hbar, tau = ctx.h, ctx.hbar, ctx.tau
    t = tau[1:]
    t_ref = np.einsum("km,mn,kn->k", np.conj(hbar), V_ref, h)
    base = np.abs(t_ref) ** 2
    vals, vecs = hermitian_eig(V_ref)
    lam = vecs[:, 0]
    D = np.eye(V_ref.shape[0], dtype=complex) - np.outer(lam, np.conj(lam))

    def value(V):
        tv = np.einsum("km,mn,kn->k", np.conj(hbar), V, h)
        tilde = -base + 2.0 * np.real(np.conj(tv) * t_ref)
        ul = np.real(np.einsum("km,mn,kn->k", np.conj(hbar), V, hbar))
        arg = 1.0 + ctx.quad_w * tilde + ctx.lin_w * ul
        if np.any(arg <= 0.0):
            return -np.inf
        pen = float(np.real(np.trace(D @ V))) / (2.0 * rho)
        return float(np.sum(t * np.log2(arg))) - pen

    def grad(V):
        tv = np.einsum("km,mn,kn->k", np.conj(hbar), V, h)
        tilde = -base + 2.0 * np.real(np.conj(tv) * t_ref)
        ul = np.real(np.einsum("km,mn,kn->k", np.conj(hbar), V, hbar))
        arg = 1.0 + ctx.quad_w * tilde + ctx.lin_w * ul
        c = t / (arg * LN2)
        alpha = c * ctx.quad_w * t_ref
        beta = c * ctx.lin_w / 2.0
        g = (hbar * alpha[:, None]).T @ np.conj(h)
        g += (hbar * beta[:, None]).T @ np.conj(hbar)
        return g - D / (4.0 * rho)

    problem = ConcaveProblem(value=value, grad=grad,
                             project=lambda V: project_psd_unit_diag(V, params),
                             start=V_ref)
    return maximize_concave(problem, params)


# ---------------------------------------------------------------------------
# Driver.

def _lifted_prod(comp, h, hbar, V, v_d, split_dl):
    """Product-gain table in lifted form; with a split downlink vector the
    dedicated slot contributes its own (vector) downlink gain times the
    lifted uplink gain."""
    K = comp.K
    J = trace_product_gains(V, h, hbar)
    prod = np.repeat(J[:, None], K + 1, axis=1)
    if split_dl:
        prod[:, 0] = dl_gains(comp, v_d) * lifted_ul_gains(V, hbar)
    prod[np.arange(K), np.arange(K) + 1] = 0.0
    return prod


def _dc_loop(pcomp, eta, config, pparams, params, state, *, split_dl, use_z,
             update_power, sic, trace, segments, trace_xi, violations):
    """Outer penalty loop over one configuration (tied or split); mutates
    ``state`` in place and extends the trace lists."""
    K = pcomp.K
    sigma2 = config.sigma2_w
    h, hbar = lift_channel_vectors(pcomp)
    rho = pparams.rho0
    sweeps = 0
    # The lifted step re-linearizes every sweep, so its inner solve can run
    # on a reduced iteration/projection budget without hurting the ascent.
    matrix_params = dataclasses.replace(
        params, max_iters=min(params.max_iters, 60),
        dykstra_iters=min(params.dykstra_iters, 30))

    def den_vector(P):
        if use_z:
            return sigma2 * state["z"]
        return np.array([sic.noise_factor(P[k + 1], sigma2) for k in range(K)])

    def penalized_parts(rho):
        prod = _lifted_prod(pcomp, h, hbar, state["V"], state["v_d"], split_dl)
        W = rate_weight_matrix(prod, eta, state["P"], den_vector(state["P"]))
        rate = time_objective(state["tau"], W)
        pen = rank_one_gap(state["V"]) / (2.0 * rho)
        if use_z:
            pen += float(np.sum((state["z"] - aux_target(state["P"], sic, sigma2)) ** 2)) / (2.0 * rho)
        return rate - pen, rate

    def penalized(rho):
        return penalized_parts(rho)[0]

    def snap_rank_one():
        lifted = np.concatenate([[1.0 + 0.0j], principal_unit_vector(state["V"])])
        state["V"] = np.outer(lifted, np.conj(lifted))

    prev_outer = None
    rate_hist, gap_hist = [], []
    frozen_v = False
    for _ in range(pparams.max_outer):
        phi = penalized(rho)
        seg_start = len(trace)
        trace.append(phi)
        if use_z:
            trace_xi.append(penalty_violation(state["z"], state["P"], sic, sigma2))
        for _ in range(pparams.max_inner):
            prev_phi = phi
            sweeps += 1
            tau, P = state["tau"], state["P"]
            prod = _lifted_prod(pcomp, h, hbar, state["V"], state["v_d"], split_dl)
            den = den_vector(P)
            W = rate_weight_matrix(prod, eta, P, den)
            tau, _, _ = solve_time_allocation(W, config.T, params, tau_start=tau)
            if update_power:
                P, _, _ = solve_power(prod, eta, tau, state["z"], sic, sigma2,
                                      config.pmax_w, rho, params, P)
            if use_z:
                state["z"] = update_aux(prod, eta, tau, P, state["z"], rho, sic, sigma2)
                den = den_vector(P)
            state["tau"], state["P"] = tau, P
            t = tau[1:]
            tsafe = np.where(t > 0, t, 1.0)
            pt = P * tau
            if split_dl:
                rest = pt[1:].sum() - pt[1:]
                J = trace_product_gains(state["V"], h, hbar)
                ul = lifted_ul_gains(state["V"], hbar)
                coef0 = eta * pt[0] * ul / (den * tsafe)
                frozen = eta * rest * J / (den * tsafe)
                problem = linearized_dl_problem(pcomp, tau, coef0, frozen, state["v_d"])
                state["v_d"], _, _ = maximize_concave(problem, params)
                quad_w = eta * rest / (den * tsafe)
                lin_w = eta * pt[0] * dl_gains(pcomp, state["v_d"]) / (den * tsafe)
            else:
                own = pt[1:]
                quad_w = eta * (pt.sum() - own) / (den * tsafe)
                lin_w = np.zeros(K)
            if not frozen_v:
                ctx = LiftedContext(h=h, hbar=hbar, tau=tau, quad_w=quad_w, lin_w=lin_w)
                # Safeguarded update: the trimmed projection budget can drift
                # the iterate slightly off the feasible set, so a step that
                # fails to improve the penalized objective is discarded.
                phi_before = penalized(rho)
                V_prev = state["V"]
                state["V"], _, _ = dc_phase_step(state["V"], ctx, rho, matrix_params)
                if penalized(rho) < phi_before:
                    state["V"] = V_prev
            phi = penalized(rho)
            trace.append(phi)
            if use_z:
                trace_xi.append(penalty_violation(state["z"], state["P"], sic, sigma2))
            if phi - prev_phi < pparams.eps_inner * max(abs(prev_phi), 1e-12):
                break
        segments.append(len(trace) - seg_start)
        phi, rate = penalized_parts(rho)
        gap = 0.0 if frozen_v else _psd_rank_one_gap(state["V"])
        rate_hist.append(rate)
        gap_hist.append(gap)
        xi = penalty_violation(state["z"], state["P"], sic, sigma2) if use_z else 0.0
        if use_z:
            violations.append(xi)
        stable = (prev_outer is not None
                  and abs(phi - prev_outer) < pparams.eps_inner * max(abs(prev_outer), 1e-12))
        prev_outer = phi
        if not frozen_v and gap >= RANK_ONE_TOL and len(rate_hist) >= 3:
            rate_flat = (abs(rate_hist[-1] - rate_hist[-3])
                         < 1e-3 * max(abs(rate_hist[-1]), 1e-12))
            gap_flat = gap_hist[-1] > 0.5 * gap_hist[-3]
            if rate_flat and gap_flat:
                # The schedule has stopped improving the rate while the
                # iterate is still materially rank deficient: snap to the
                # principal direction (exactly feasible and rank one) and let
                # the remaining blocks re-stabilize around it.
                snap_rank_one()
                frozen_v = True
        if gap < RANK_ONE_TOL and stable and (not use_z or xi < pparams.eps_outer):
            break
        rho *= pparams.shrink
    return sweeps


def _dc_driver(comp, config, order, pparams, params, *, split_dl, scheme,
               P_fixed=None, rng=None):
    pcomp, eta, order_idx = _prepare(comp, config, order)
    K = pcomp.K
    sigma2 = config.sigma2_w
    params = params or config.solver
    pparams = pparams or config.penalty
    sic = SicModel.from_config(config)
    use_z = sic.gamma > 0.0 and P_fixed is None
    update_power = use_z

    P = np.full(K + 1, config.pmax_w) if P_fixed is None else np.asarray(P_fixed, float)
    if config.random_phase_init and rng is not None:
        v0 = initial_fully_vectors(pcomp, rng)[0]
    else:
        v0 = cophase_dl_vector(pcomp, int(np.argmax(np.abs(pcomp.h_d) ** 2)))
    lifted = np.concatenate([[1.0 + 0.0j], v0])
    state = {
        "tau": np.full(K + 1, config.T / (K + 1)),
        "P": P,
        "z": aux_target(P, sic, sigma2) if use_z else None,
        "V": np.outer(lifted, np.conj(lifted)),
        "v_d": None,
    }

    trace, segments, trace_xi, violations = [], [], [], []
    sweeps = _dc_loop(pcomp, eta, config, pparams, params, state,
                      split_dl=False, use_z=use_z, update_power=update_power,
                      sic=sic, trace=trace, segments=segments,
                      trace_xi=trace_xi, violations=violations)
    if split_dl:
        # Warm-start the split stage from the tied solution.
        state["v_d"] = principal_unit_vector(state["V"]).astype(complex)
        sweeps += _dc_loop(pcomp, eta, config, pparams, params, state,
                           split_dl=True, use_z=use_z, update_power=update_power,
                           sic=sic, trace=trace, segments=segments,
                           trace_xi=trace_xi, violations=violations)

    # Inner solves run on a trimmed projection budget; restore full
    # feasibility once before reading off the solution.
    state["V"] = project_psd_unit_diag(state["V"], params)
    gap = rank_one_gap(state["V"])
    v_main = principal_unit_vector(state["V"])
    if split_dl:
        v_d = reconstruct_unit_modulus(PhasePlan.static(state["v_d"], relaxed=True)).vectors[0]
        plan = PhasePlan.partial(v_d, v_main)
    else:
        plan = PhasePlan.static(v_main)

    # Final resource re-solve on the reconstructed plan.
    tau, P, z = state["tau"], state["P"], state["z"]
    prod = product_gain_table(pcomp, plan, K)
    den = sigma2 * z if use_z else np.array(
        [sic.noise_factor(P[k + 1], sigma2) for k in range(K)])
    W = rate_weight_matrix(prod, eta, P, den)
    tau, _, _ = solve_time_allocation(W, config.T, params, tau_start=tau)
    xi_final = 0.0
    if use_z:
        rho_final = pparams.rho0 * pparams.shrink ** max(len(segments) - 1, 0)
        P, _, _ = solve_power(prod, eta, tau, z, sic, sigma2, config.pmax_w,
                              rho_final, params, P)
        z = update_aux(prod, eta, tau, P, z, rho_final, sic, sigma2)
        xi_final = penalty_violation(z, P, sic, sigma2)

    return _final_result(scheme, pcomp, eta, tau, P, plan, sic, sigma2,
                         trace, segments, violations, trace_xi, xi_final,
                         sweeps, order_idx, rank_one_gap=gap)


def static_beamforming_optimize(comp, config: SystemConfig,
                                order: str = INCREASING_SNR,
                                pparams: PenaltyParams | None = None,
                                params: SolverParams | None = None,
                                rng=None) -> OptimizationResult:
    """One reflection vector shared by every slot, jointly optimized with the
    resource allocation through the lifted rank-one penalty loop."""
    return _dc_driver(comp, config, order, pparams, params,
                      split_dl=False, scheme="fd_static", rng=rng)


def partial_beamforming_optimize(comp, config: SystemConfig,
                                 order: str = INCREASING_SNR,
                                 pparams: PenaltyParams | None = None,
                                 params: SolverParams | None = None,
                                 rng=None, tie_dl_ul: bool = False) -> OptimizationResult:
    """One downlink vector plus one uplink vector.

    With ``tie_dl_ul`` the two vectors are forced equal throughout, which
    reduces the run to the static path exactly.
    """
    if tie_dl_ul:
        result = _dc_driver(comp, config, order, pparams, params,
                            split_dl=False, scheme="fd_partial", rng=rng)
        v = result.plan.vectors[0]
        result.plan = PhasePlan.partial(v, v)
        return result
    return _dc_driver(comp, config, order, pparams, params,
                      split_dl=True, scheme="fd_partial", rng=rng)
