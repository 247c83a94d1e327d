"""Period-domain membership and monodromy degeneration types.

A one-parameter degeneration is ingested as its monodromy matrix T. The
smallest power making T unipotent is found exactly (via cyclotomic factors
of the characteristic polynomial), the nilpotent logarithm N is computed
over Q, and the type I/II/III trichotomy together with the limit boundary
stratum (an isotropic line or plane with integral primitive generators)
is read off from N and N^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import sympy

from . import intlinalg as il
from .lattice import (
    BoundaryStratumDescriptor,
    Lattice,
    LatticeError,
    RationalSubspace,
    classify_boundary,
    pairing,
)

DEFAULT_M_MAX = 2 * 3 * 5 * 7 * 11


class PeriodDomainError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodPoint:
    """Point of the period domain, given by w = x + i*y in basis coordinates.

    Exact points use Fractions and tolerance 0; numerically supplied points
    carry an explicit nonnegative tolerance.
    """

    real: tuple
    imag: tuple
    tolerance: float = 0.0

    def __post_init__(self):
        if self.tolerance < 0:
            raise PeriodDomainError("tolerance must be nonnegative")
        object.__setattr__(self, "real", tuple(self.real))
        object.__setattr__(self, "imag", tuple(self.imag))


@dataclass(frozen=True)
class BoundaryPoint:
    """Point [e, v] of a line stratum: primitive isotropic e plus a positive
    vector v in (e-perp)/<e> coordinates."""

    e: tuple
    v: tuple
    orientation: int = 1


@dataclass(frozen=True)
class MonodromyData:
    T: tuple  # integral matrix
    m: int  # smallest power with T^m unipotent
    N: tuple  # rational nilpotent log of T^m
    gram: Optional[tuple] = None


def is_in_domain(L: Lattice, p: PeriodPoint):
    """Membership test (w,w) = 0, (w, conj w) > 0.

    Returns (ok, residuals) where residuals = ((w,w) as (re, im), (w, conj w)).
    """
    x, y = list(p.real), list(p.imag)
    if len(x) != L.rank or len(y) != L.rank:
        raise PeriodDomainError("vector length does not match lattice rank")
    xx = pairing(L, x, x)
    yy = pairing(L, y, y)
    xy = pairing(L, x, y)
    ww_re = xx - yy
    ww_im = 2 * xy
    wwbar = xx + yy
    tol = p.tolerance
    ok = abs(ww_re) <= tol and abs(ww_im) <= tol and wwbar > 0
    return ok, ((ww_re, ww_im), wwbar)


def _mat_int(t):
    return [[int(x) for x in row] for row in t]


def _is_form_preserving(t, gram):
    tt = il.transpose(t)
    return il.mat_eq(il.mat_mul(il.mat_mul(tt, gram), t), gram)


def _unipotency_order(t, m_max):
    """Smallest m with T^m unipotent, via cyclotomic factors of charpoly.

    Returns (m, None) on success or (None, evidence) where evidence is the
    list of non-cyclotomic irreducible factors.
    """
    n = len(t)
    x = sympy.Symbol("x")
    charpoly = sympy.Matrix(t).charpoly(x).as_expr()
    _, factors = sympy.factor_list(charpoly)
    m = 1
    bad = []
    for poly, _mult in factors:
        poly = sympy.Poly(poly, x)
        deg = poly.degree()
        k_found = None
        for k in range(1, m_max + 1):
            if sympy.totient(k) != deg:
                continue
            if poly == sympy.Poly(sympy.cyclotomic_poly(k, x), x):
                k_found = k
                break
        if k_found is None:
            bad.append(str(poly.as_expr()))
        else:
            m = sympy.ilcm(m, k_found)
    if bad:
        return None, bad
    if m > m_max:
        return None, [f"unipotency order {m} exceeds m_max={m_max}"]
    return int(m), None


def _mat_pow(t, m):
    n = len(t)
    result = il.identity(n)
    base = [list(r) for r in t]
    while m:
        if m & 1:
            result = il.mat_mul(result, base)
        base = il.mat_mul(base, base)
        m >>= 1
    return result


def nilpotent_log(u):
    """log(U) for unipotent U, exact over Q. Terminates because U - I is
    nilpotent."""
    n = len(u)
    m = [[Fraction(u[i][j]) - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    term = [row[:] for row in m]
    log = [[Fraction(0)] * n for _ in range(n)]
    k = 1
    while not il.is_zero_matrix(term):
        if k > n:
            raise PeriodDomainError("matrix power did not nilpotate; U not unipotent")
        sign = Fraction((-1) ** (k + 1), k)
        log = il.mat_add(log, il.mat_scale(term, sign))
        term = il.mat_mul(term, m)
        k += 1
    return log


def monodromy_log(T, gram=None, m_max: int = DEFAULT_M_MAX) -> MonodromyData:
    """Quasi-unipotent reduction of an integral monodromy matrix.

    Finds the smallest m <= m_max with T^m unipotent and returns the exact
    rational logarithm N of T^m. When a Gram matrix is supplied, T must
    preserve it and N then satisfies N^t G + G N = 0 (asserted exactly).
    """
    t = _mat_int(T)
    n = len(t)
    if any(len(row) != n for row in t):
        raise PeriodDomainError("monodromy matrix must be square")
    if abs(il.bareiss_det(t)) != 1:
        raise PeriodDomainError("monodromy matrix must be invertible over Z")
    g = None
    if gram is not None:
        g = _mat_int(gram if not isinstance(gram, Lattice) else gram.gram_rows())
        if not _is_form_preserving(t, g):
            raise PeriodDomainError("matrix does not preserve the bilinear form")
    m, evidence = _unipotency_order(t, m_max)
    if m is None:
        raise PeriodDomainError(
            "no unipotent power within m_max; offending factors: "
            + "; ".join(evidence)
        )
    u = _mat_pow(t, m)
    nlog = nilpotent_log(u)
    if g is not None:
        nt_g = il.mat_mul(il.transpose(nlog), [[Fraction(x) for x in r] for r in g])
        g_n = il.mat_mul([[Fraction(x) for x in r] for r in g], nlog)
        assert il.is_zero_matrix(il.mat_add(nt_g, g_n))
    return MonodromyData(
        T=tuple(tuple(r) for r in t),
        m=m,
        N=tuple(tuple(r) for r in nlog),
        gram=tuple(tuple(r) for r in g) if g is not None else None,
    )


def _n_matrix(M: MonodromyData):
    return [[Fraction(x) for x in row] for row in M.N]


def classify_degeneration(M: MonodromyData) -> str:
    """Type I/II/III from the nilpotency order of N (weight-two constraint:
    N^3 must vanish)."""
    n1 = _n_matrix(M)
    if il.is_zero_matrix(n1):
        return "TypeI"
    n2 = il.mat_mul(n1, n1)
    if il.is_zero_matrix(n2):
        return "TypeII"
    n3 = il.mat_mul(n2, n1)
    if il.is_zero_matrix(n3):
        return "TypeIII"
    raise PeriodDomainError("N^3 != 0: not a weight-two degeneration")


def _image_basis(mat):
    """Saturated integral basis of the column space of a rational matrix."""
    cols = il.transpose(mat)
    int_cols = [il.clear_denominators(c) for c in cols if any(x != 0 for x in c)]
    if not int_cols:
        return []
    sat = il.saturate(int_cols, n=len(mat))
    return sat


def limit_boundary_stratum(M: MonodromyData, L: Lattice) -> BoundaryStratumDescriptor:
    """Boundary stratum hit by the degeneration: the saturation of im(N^2)
    for type III (a line) or of im(N) for type II (a plane).

    All generators come out integral and primitive; isotropy is asserted.
    """
    kind = classify_degeneration(M)
    if kind == "TypeI":
        raise PeriodDomainError("type I degenerations do not reach the boundary")
    n1 = _n_matrix(M)
    if kind == "TypeIII":
        target = il.mat_mul(n1, n1)
    else:
        target = n1
    basis = _image_basis(target)
    expected_dim = 1 if kind == "TypeIII" else 2
    if len(basis) != expected_dim:
        raise PeriodDomainError(
            f"unexpected image dimension {len(basis)} for {kind}"
        )
    subspace = RationalSubspace(tuple(tuple(v) for v in basis))
    desc = classify_boundary(L, subspace)
    expected_kind = "line" if kind == "TypeIII" else "plane"
    assert desc.kind == expected_kind
    return desc
