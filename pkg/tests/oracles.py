"""Independent reference implementations used to validate the package.

Everything here is written from the problem statement alone: plain loops,
exhaustive grids and textbook searches.  Nothing imports optimizer code, so
a bug cannot cancel between an oracle and the implementation it checks.
"""
import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def finite_diff_gradient(f, x, h=1e-6):
    """Central-difference gradient of a real-valued function.

    For complex inputs the result packs df/dRe + 1j * df/dIm per entry.
    """
    x = np.asarray(x)
    cplx = np.iscomplexobj(x)
    out = np.zeros(x.shape, dtype=complex if cplx else float)
    for idx in np.ndindex(*x.shape):
        e = np.zeros_like(x)
        e[idx] = h
        d_re = (f(x + e) - f(x - e)) / (2.0 * h)
        if cplx:
            e[idx] = 1j * h
            d_im = (f(x + e) - f(x - e)) / (2.0 * h)
            out[idx] = d_re + 1j * d_im
        else:
            out[idx] = d_re
    return out


def assert_gradient_matches(f, g, x, rel=1e-4, h=1e-6):
    """Check an analytic gradient oracle against central differences.

    Complex oracles follow the package convention f(x+d) ~ f(x) + 2 Re<g, d>,
    so the numeric [df/dRe + 1j df/dIm] must equal 2 g.
    """
    numeric = np.asarray(finite_diff_gradient(f, x, h))
    analytic = np.asarray(g(x))
    if np.iscomplexobj(np.asarray(x)):
        analytic = 2.0 * analytic
    scale = max(np.max(np.abs(numeric)), np.max(np.abs(analytic)), 1e-12)
    err = np.max(np.abs(numeric - analytic)) / scale
    assert err <= rel, f"gradient mismatch: rel err {err:.3e}"


def golden_section_max(f, lo, hi, tol=1e-10, iters=200):
    """Golden-section search for the maximizer of a unimodal function."""
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def pareto_front(points):
    """Rows of ``points`` not dominated by any other row (maximization)."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if not keep[i]:
            continue
        dominated = np.all(pts >= pts[i], axis=1) & np.any(pts > pts[i], axis=1)
        if np.any(dominated):
            keep[i] = False
    return pts[keep]


def phase_grid_vectors(M, n_phase=16):
    """All unit-modulus vectors with entries on an n-point phase grid."""
    angles = 2.0 * np.pi * np.arange(n_phase) / n_phase
    grids = np.meshgrid(*([angles] * M), indexing="ij")
    phases = np.stack([g.ravel() for g in grids], axis=1) if M else np.zeros((1, 0))
    return np.exp(1j * phases)


def simplex_grid_2d(T, step):
    """(t0, t1, t2 = T - t0 - t1) triples on a step grid with t2 >= 0."""
    n = int(round(T / step))
    t0, t1 = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    mask = (t0 + t1) <= n
    t0 = t0[mask] * step
    t1 = t1[mask] * step
    return t0, t1, T - t0 - t1


def _gain(h, q, v):
    return abs(h + np.vdot(v, q)) ** 2


def fd_brute_force(comp, eta, pmax, T, gap, sigma2, n_phase=16, tau_step=0.01):
    """Grid optimum of the K=2 fully dynamic problem at full power.

    Per-slot reflection candidates are reduced to the nondominated gain
    tuples (the objective is increasing in every gain), then crossed with a
    slot-duration grid on the sum(tau) = T face (scaling all durations up
    never hurts, so an optimum lies there).
    """
    assert comp.K == 2
    vs = phase_grid_vectors(comp.M, n_phase)
    slot0 = np.array([[_gain(comp.h_d[0], comp.q[0], v),
                       _gain(comp.h_d[1], comp.q[1], v)] for v in vs])
    slot1 = np.array([[_gain(comp.h_d_bar[0], comp.q_bar[0], v),
                       _gain(comp.h_d[1], comp.q[1], v)] for v in vs])
    slot2 = np.array([[_gain(comp.h_d_bar[1], comp.q_bar[1], v),
                       _gain(comp.h_d[0], comp.q[0], v)] for v in vs])
    f0 = pareto_front(slot0)
    f1 = pareto_front(slot1)
    f2 = pareto_front(slot2)
    t0, t1, t2 = simplex_grid_2d(T, tau_step)
    c0 = eta[0] * pmax / (gap * sigma2)
    c1 = eta[1] * pmax / (gap * sigma2)
    best = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for d00, d10 in f0:
            for u0, d11 in f1:
                for u1, d01 in f2:
                    snr0 = c0 * (t0 * d00 + t2 * d01) * u0 / np.where(t1 > 0, t1, 1.0)
                    snr1 = c1 * (t0 * d10 + t1 * d11) * u1 / np.where(t2 > 0, t2, 1.0)
                    r = (np.where(t1 > 0, t1 * np.log2(1.0 + snr0), 0.0)
                         + np.where(t2 > 0, t2 * np.log2(1.0 + snr1), 0.0))
                    best = max(best, float(r.max()))
    return best


def static_brute_force(comp, eta, pmax, T, gap, sigma2, n_phase=16, tau_step=0.01):
    """Grid optimum of the K=2 shared-vector problem at full power."""
    assert comp.K == 2
    vs = phase_grid_vectors(comp.M, n_phase)
    t0, t1, t2 = simplex_grid_2d(T, tau_step)
    c0 = eta[0] * pmax / (gap * sigma2)
    c1 = eta[1] * pmax / (gap * sigma2)
    best = 0.0
    for v in vs:
        y0 = _gain(comp.h_d[0], comp.q[0], v)
        y1 = _gain(comp.h_d[1], comp.q[1], v)
        u0 = _gain(comp.h_d_bar[0], comp.q_bar[0], v)
        u1 = _gain(comp.h_d_bar[1], comp.q_bar[1], v)
        snr0 = c0 * (t0 + t2) * y0 * u0 / np.where(t1 > 0, t1, 1.0)
        snr1 = c1 * (t0 + t1) * y1 * u1 / np.where(t2 > 0, t2, 1.0)
        r = (np.where(t1 > 0, t1 * np.log2(1.0 + snr0), 0.0)
             + np.where(t2 > 0, t2 * np.log2(1.0 + snr1), 0.0))
        best = max(best, float(r.max()))
    return best


def partial_brute_force(comp, eta, pmax, T, gap, sigma2, n_phase=16, tau_step=0.01):
    """Grid optimum of the K=2 split downlink/uplink-vector problem."""
    assert comp.K == 2
    vs = phase_grid_vectors(comp.M, n_phase)
    dl = np.array([[_gain(comp.h_d[0], comp.q[0], v),
                    _gain(comp.h_d[1], comp.q[1], v)] for v in vs])
    ul = np.array([[_gain(comp.h_d[0], comp.q[0], v),
                    _gain(comp.h_d[1], comp.q[1], v),
                    _gain(comp.h_d_bar[0], comp.q_bar[0], v),
                    _gain(comp.h_d_bar[1], comp.q_bar[1], v)] for v in vs])
    fd = pareto_front(dl)
    fu = pareto_front(ul)
    t0, t1, t2 = simplex_grid_2d(T, tau_step)
    c0 = eta[0] * pmax / (gap * sigma2)
    c1 = eta[1] * pmax / (gap * sigma2)
    best = 0.0
    for yd0, yd1 in fd:
        for yu0, yu1, u0, u1 in fu:
            snr0 = c0 * (t0 * yd0 + t2 * yu0) * u0 / np.where(t1 > 0, t1, 1.0)
            snr1 = c1 * (t0 * yd1 + t1 * yu1) * u1 / np.where(t2 > 0, t2, 1.0)
            r = (np.where(t1 > 0, t1 * np.log2(1.0 + snr0), 0.0)
                 + np.where(t2 > 0, t2 * np.log2(1.0 + snr1), 0.0))
            best = max(best, float(r.max()))
    return best
