"""Periods of smooth Weierstrass fibers and modular consistency checks.

For y^2 = x^3 + a x + b the periods of dx/y are obtained from Carlson R_F
values at the three root gaps; the resulting basis is validated against the
algebraic j-invariant (theta-series evaluation of j(tau) after reduction to
the fundamental domain). When that validation fails, periods fall back to
direct path integration of dx/y between branch points with continuous
branch tracking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import carlson_rf

J_CONSISTENCY_RTOL = 1e-6


class EllipticError(ValueError):
    pass


@dataclass(frozen=True)
class FiberPeriods:
    omega1: complex
    omega2: complex
    tau: complex
    fallback: bool = False  # True when path integration replaced Carlson R_F


def cubic_roots_batch(a, b):
    """Roots of x^3 + a x + b for parallel coefficient arrays, shape (n, 3)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    n = a.shape[0]
    comp = np.zeros((n, 3, 3), dtype=np.complex128)
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 0, 2] = -b
    comp[:, 1, 2] = -a
    roots = np.linalg.eigvals(comp)
    # one Newton step tightens the eigenvalue roots
    for _ in range(2):
        f = roots**3 + a[:, None] * roots + b[:, None]
        fp = 3 * roots**2 + a[:, None]
        step = np.where(np.abs(fp) > 1e-300, f / fp, 0.0)
        roots = roots - step
    # deterministic order: lexicographic by rounded (re, im)
    key_re = np.round(roots.real, 12)
    key_im = np.round(roots.imag, 12)
    order = np.lexsort((key_im, key_re), axis=-1)
    return np.take_along_axis(roots, order, axis=-1)


def j_algebraic(a, b):
    """j = 1728 * 4a^3 / (4a^3 + 27b^2), vectorized."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    disc = 4.0 * a**3 + 27.0 * b**2
    return 1728.0 * 4.0 * a**3 / disc


def reduce_to_fundamental_domain(tau, max_steps=256):
    """SL(2,Z)-reduce upper-half-plane points to |Re| <= 1/2, |tau| >= 1."""
    tau = np.array(tau, dtype=np.complex128, copy=True)
    scalar = tau.ndim == 0
    tau = np.atleast_1d(tau)
    for _ in range(max_steps):
        tau -= np.round(tau.real)
        small = np.abs(tau) < 1.0 - 1e-15
        if not np.any(small):
            break
        tau[small] = -1.0 / tau[small]
    return tau[0] if scalar else tau


def j_from_tau(tau, terms=10):
    """Klein j-function via theta q-series after fundamental-domain reduction."""
    tau = reduce_to_fundamental_domain(tau)
    tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
    if np.any(tau.imag <= 0):
        raise EllipticError("tau must lie in the upper half-plane")
    q = np.exp(1j * np.pi * tau)
    n = np.arange(1, terms)
    qn2 = q[..., None] ** (n * n)
    th3 = 1.0 + 2.0 * np.sum(qn2, axis=-1)
    th4 = 1.0 + 2.0 * np.sum((-1.0) ** n * qn2, axis=-1)
    m = np.arange(0, terms)
    th2s = np.sum(q[..., None] ** (m * (m + 1)), axis=-1)
    t2_8 = 256.0 * q**2 * th2s**8
    t3_8 = th3**8
    t4_8 = th4**8
    j = 32.0 * (t2_8 + t3_8 + t4_8) ** 3 / (t2_8 * t3_8 * t4_8)
    return j if j.shape != (1,) else j[0]


def _rf_periods(roots):
    """The three candidate periods 4*R_F(0, r_i - r_j, r_i - r_k)."""
    r0, r1, r2 = roots[..., 0], roots[..., 1], roots[..., 2]
    w0 = 4.0 * carlson_rf(np.zeros_like(r0), r0 - r1, r0 - r2)
    w1 = 4.0 * carlson_rf(np.zeros_like(r0), r1 - r0, r1 - r2)
    w2 = 4.0 * carlson_rf(np.zeros_like(r0), r2 - r0, r2 - r1)
    return w0, w1, w2


_PAIR_ORDER = ((0, 1), (0, 2), (1, 2))


def periods_batch(a, b):
    """Period bases for arrays of smooth fibers.

    Returns (omega1, omega2, tau, fallback_mask). The basis is normalized so
    Im(tau) > 0; each fiber is validated by comparing j(tau) against the
    algebraic j, trying the three R_F pair choices in a fixed order and
    falling back to path integration for fibers where all three fail.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    disc = 4.0 * a**3 + 27.0 * b**2
    if np.any(np.abs(disc) == 0.0):
        raise EllipticError("singular fiber: 4a^3 + 27b^2 = 0")
    roots = cubic_roots_batch(a, b)
    ws = _rf_periods(roots)
    jalg = j_algebraic(a, b)
    n = a.shape[0]
    omega1 = np.zeros(n, dtype=np.complex128)
    omega2 = np.zeros(n, dtype=np.complex128)
    done = np.zeros(n, dtype=bool)
    for i, j_idx in _PAIR_ORDER:
        cand1, cand2 = ws[i], ws[j_idx]
        tau = cand2 / cand1
        flip = tau.imag < 0
        cand2 = np.where(flip, -cand2, cand2)
        tau = np.where(flip, -tau, tau)
        valid = tau.imag > 1e-12
        jtau = np.full(n, np.inf, dtype=np.complex128)
        if np.any(valid):
            jtau[valid] = np.atleast_1d(j_from_tau(tau[valid]))
        ok = valid & (
            np.abs(jtau - jalg) <= J_CONSISTENCY_RTOL * (1.0 + np.abs(jalg))
        )
        take = ok & ~done
        omega1[take] = cand1[take]
        omega2[take] = cand2[take]
        done |= ok
        if np.all(done):
            break
    fallback = ~done
    for idx in np.nonzero(fallback)[0]:
        w1, w2 = periods_by_path_integration(complex(a[idx]), complex(b[idx]))
        omega1[idx] = w1
        omega2[idx] = w2
    tau = omega2 / omega1
    return omega1, omega2, tau, fallback


def fiber_periods(a, b) -> FiberPeriods:
    """Periods (omega1, omega2, tau) of dx/y on y^2 = x^3 + a x + b.

    Normalized so Im(tau) > 0, equivalently Im(omega2 * conj(omega1)) > 0.
    """
    o1, o2, tau, fb = periods_batch(np.array([a]), np.array([b]))
    return FiberPeriods(complex(o1[0]), complex(o2[0]), complex(tau[0]), bool(fb[0]))


def density_from_periods(omega1, omega2):
    """Metric density Im(omega2 * conj(omega1)); positive for valid bases."""
    return (omega2 * np.conj(omega1)).imag


def _segment_period(ri, rj, rk, panels=24, order=16):
    """2 * integral of dx/y along the straight segment from root ri to rj.

    Substitutes x = ri + (rj - ri) sin^2(theta), which removes the inverse
    square-root endpoint singularities; the remaining factor sqrt(x - rk)
    is tracked continuously in theta.
    """
    d = rj - ri
    nodes, weights = np.polynomial.legendre.leggauss(order)
    thetas = []
    wts = []
    edges = np.linspace(0.0, np.pi / 2.0, panels + 1)
    for p in range(panels):
        mid = 0.5 * (edges[p] + edges[p + 1])
        half = 0.5 * (edges[p + 1] - edges[p])
        thetas.append(mid + half * nodes)
        wts.append(half * weights)
    theta = np.concatenate(thetas)
    wts = np.concatenate(wts)
    x = ri + d * np.sin(theta) ** 2
    g = x - rk
    if np.any(np.abs(g) < 1e-14 * (1.0 + np.abs(rk))):
        raise EllipticError("third root lies on the integration segment")
    sq = np.sqrt(g)
    # enforce continuity of the branch along the (sorted) theta grid
    for t in range(1, sq.shape[0]):
        if abs(sq[t] - sq[t - 1]) > abs(sq[t] + sq[t - 1]):
            sq[t] = -sq[t]
    root_neg_d2 = 1j * d  # fixed branch of sqrt(-d^2); sign only flips omega
    integrand = 2.0 * d / (root_neg_d2 * sq)
    return 2.0 * np.sum(wts * integrand)


def _point_segment_gap(p, a, b):
    """Distance from p to segment [a, b], relative to the segment length."""
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0:
        return 0.0
    t = ((p - a) * np.conj(ab)).real / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab)) / max(abs(ab), 1e-300)


def periods_by_path_integration(a, b, rtol=1e-9):
    """Period basis by direct integration between branch points.

    Chooses the two root pairs whose segments stay farthest from the third
    root, integrates with doubling panel counts until converged, and
    normalizes the basis so Im(omega2/omega1) > 0.
    """
    roots = cubic_roots_batch(np.array([a]), np.array([b]))[0]
    pairs = []
    for (i, j) in ((0, 1), (1, 2), (0, 2)):
        k = 3 - i - j
        gap = _point_segment_gap(roots[k], roots[i], roots[j])
        pairs.append((gap, i, j, k))
    pairs.sort(reverse=True)
    chosen = []
    for gap, i, j, k in pairs:
        if gap < 1e-9:
            continue
        if chosen and {i, j} == {chosen[0][1], chosen[0][2]}:
            continue
        chosen.append((gap, i, j, k))
        if len(chosen) == 2:
            break
    if len(chosen) < 2:
        raise EllipticError("branch points too degenerate for path integration")

    def converged_period(i, j, k):
        prev = None
        for panels in (16, 32, 64, 128):
            val = _segment_period(roots[i], roots[j], roots[k], panels=panels)
            if prev is not None and abs(val - prev) <= rtol * (1.0 + abs(val)):
                return val
            prev = val
        return prev

    w1 = converged_period(chosen[0][1], chosen[0][2], chosen[0][3])
    w2 = converged_period(chosen[1][1], chosen[1][2], chosen[1][3])
    if (w2 * np.conj(w1)).imag < 0:
        w2 = -w2
    tau = w2 / w1
    if abs(tau.imag) < 1e-12:
        raise EllipticError("degenerate period ratio from path integration")
    jalg = complex(j_algebraic(np.array([a]), np.array([b]))[0])
    jtau = complex(j_from_tau(tau))
    if abs(jtau - jalg) > 1e-4 * (1.0 + abs(jalg)):
        raise EllipticError(
            "path-integrated periods fail the j-invariant consistency check"
        )
    return complex(w1), complex(w2)
