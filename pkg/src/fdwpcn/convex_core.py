"""First-order convex primitives: projections and a projected-gradient
concave maximizer with Armijo backtracking.

Gradient convention: oracles return the plain gradient for real variables.
For complex variables (vectors or matrices) they return the Wirtinger
conjugate gradient scaled so that f(x + d) ~ f(x) + 2 Re<grad, d>; the solver
accounts for the factor of two when measuring directional derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import SolverParams


class NonFiniteObjectiveError(RuntimeError):
    """Objective or gradient became non-finite at an accepted iterate."""

    def __init__(self, message: str, iterate=None):
        super().__init__(message)
        self.iterate = iterate


@dataclass
class ConcaveProblem:
    """A concave maximization problem over a convex set.

    value    x -> f(x), may return -inf outside the domain of definition
    grad     x -> gradient of f (see module docstring for the convention)
    project  Euclidean projection onto the feasible set
    start    feasible starting point
    """

    value: Callable
    grad: Callable
    project: Callable
    start: np.ndarray


# ---------------------------------------------------------------------------
# Projections.

def project_simplex(x: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) <= budget}.

    If clipping negatives already lands inside the budget that clip is the
    projection; otherwise project onto the face sum(x) = budget with the
    sorted-threshold rule.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    x = np.asarray(x, dtype=float)
    clipped = np.maximum(x, 0.0)
    if clipped.sum() <= budget:
        return clipped
    # Threshold t with sum(max(x - t, 0)) = budget.
    u = np.sort(x)[::-1]
    cumsum = np.cumsum(u)
    js = np.arange(1, x.size + 1)
    thresholds = (cumsum - budget) / js
    j = np.max(np.nonzero(u - thresholds > 0)[0])
    return np.maximum(x - thresholds[j], 0.0)


def project_unit_disk(v: np.ndarray) -> np.ndarray:
    """Rescale entries with |v| > 1 to unit modulus, preserving arguments."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    scale = np.where(mags > 1.0, np.where(mags > 0, mags, 1.0), 1.0)
    return v / scale


def project_box(x: np.ndarray, lo, hi) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=float), lo, hi)


def hermitian_eig(H: np.ndarray):
    """Eigenvalues (descending) and matching orthonormal eigenvector columns
    of a Hermitian matrix; the input is symmetrized on entry."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    Hs = 0.5 * (H + H.conj().T)
    vals, vecs = np.linalg.eigh(Hs)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def project_psd(H: np.ndarray) -> np.ndarray:
    """Nearest positive-semidefinite matrix: clamp negative eigenvalues."""
    vals, vecs = hermitian_eig(H)
    clamped = np.maximum(vals, 0.0)
    out = (vecs * clamped) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)


def _set_unit_diag(H: np.ndarray) -> np.ndarray:
    out = np.array(H, copy=True)
    np.fill_diagonal(out, 1.0)
    return out


def project_psd_unit_diag(H: np.ndarray, params: SolverParams) -> np.ndarray:
    """Dykstra alternating projections onto the PSD cone intersected with the
    unit-diagonal affine set.

    Runs until successive iterates move by less than 1e-9 (sup norm) or
    ``params.dykstra_iters`` rounds; the result has an exact unit diagonal
    and minimum eigenvalue above -1e-8 for any converged run.
    """
    x = 0.5 * (np.asarray(H, dtype=complex) + np.asarray(H, dtype=complex).conj().T)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(params.dykstra_iters):
        prev = x
        y = project_psd(x + p)
        p = x + p - y
        x = _set_unit_diag(y + q)
        q = y + q - x
        if np.max(np.abs(x - prev)) < 1e-9:
            break
    return x


# ---------------------------------------------------------------------------
# Projected-gradient ascent.

def _dirdot(g: np.ndarray, d: np.ndarray) -> float:
    """Directional derivative <grad, d> under the module's convention."""
    inner = float(np.real(np.vdot(g, d)))
    return 2.0 * inner if np.iscomplexobj(g) or np.iscomplexobj(d) else inner


def maximize_concave(problem: ConcaveProblem, params: SolverParams):
    """Projected-gradient ascent with Armijo backtracking.

    Returns (x, f(x), trace) where trace is the nondecreasing list of
    accepted objective values.  Terminates when the projected step
    x - project(x + step * grad) falls below ``grad_tol`` in sup norm, when
    no further progress is possible, or at ``max_iters``.
    """
    x = problem.project(np.asarray(problem.start))
    if x.size == 0:
        return x, float(problem.value(x)), [float(problem.value(x))]
    f = float(problem.value(x))
    if not np.isfinite(f):
        raise NonFiniteObjectiveError("objective not finite at the start", x)
    trace = [f]
    step = params.step_init
    stall = 0
    for _ in range(params.max_iters):
        g = problem.grad(x)
        if not np.all(np.isfinite(g)):
            raise NonFiniteObjectiveError("gradient not finite at iterate", x)
        # Cap the raw displacement relative to the iterate scale so
        # approximate projections (Dykstra) are never fed points absurdly
        # far from the feasible set.
        gmax = np.max(np.abs(g))
        if gmax > 0:
            step = min(step, 200.0 * (1.0 + np.max(np.abs(x))) / gmax)
        cand = problem.project(x + step * g)
        if np.max(np.abs(cand - x)) < params.grad_tol:
            break
        # Backtrack from the current step until the Armijo test passes.
        s = step
        backtracked = False
        accepted = False
        while True:
            d = cand - x
            pred = _dirdot(g, d)
            f_cand = float(problem.value(cand))
            if np.isfinite(f_cand) and f_cand >= f + params.armijo_c * pred:
                accepted = True
                break
            if pred <= 1e-15 * max(1.0, abs(f)) or s < 1e-18:
                break
            s *= params.backtrack_factor
            backtracked = True
            cand = problem.project(x + s * g)
        if not accepted:
            break
        gain = f_cand - f
        x, f = cand, f_cand
        trace.append(f)
        # Grow the step after a clean acceptance so badly scaled problems
        # still move; shrink persistence is kept across iterations.
        step = s if backtracked else min(s / params.backtrack_factor, 1e12)
        if gain <= 1e-14 * max(1.0, abs(f)):
            stall += 1
            if stall >= 2:
                break
        else:
            stall = 0
    return x, f, trace
