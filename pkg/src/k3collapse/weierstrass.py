"""Elliptic K3 fibrations in Weierstrass form y^2 = x^3 + A(z)x + B(z).

Singular fibers are located from the discriminant 4A^3 + 27B^2 (exactly via
factorization when the coefficients are rational, numerically otherwise),
classified by vanishing orders against the standard fiber table, and the
base sphere is meshed with the fiber-period metric density
rho = Im(omega2 * conj(omega1)), glued across two stereographic charts.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.sparse as sp
import sympy
from scipy.sparse.csgraph import connected_components, shortest_path

from . import elliptic
from .elliptic import EllipticError
from .metric_geometry import FiniteMetricSpace, MetricError, TropicalK3Mesh

MAX_DEG_A = 8
MAX_DEG_B = 12
TOTAL_DISC_DEGREE = 24
CLUSTER_TOL = 1e-8


class WeierstrassError(ValueError):
    pass


def _trim(coeffs):
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return out


def poly_degree(coeffs):
    t = _trim(coeffs)
    return len(t) - 1 if t else None  # None = zero polynomial


def poly_mul(p, q):
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def poly_add(p, q, cp=1, cq=1):
    n = max(len(p), len(q))
    return [
        cp * (p[i] if i < len(p) else 0) + cq * (q[i] if i < len(q) else 0)
        for i in range(n)
    ]


def poly_eval(coeffs, z):
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros(z.shape, dtype=np.complex128)
    for c in reversed(list(coeffs)):
        acc = acc * z + complex(c)
    return acc


@dataclass(frozen=True)
class WeierstrassFamily:
    """Coefficient polynomials (ascending) of an elliptic K3 fibration.

    Exact rational coefficients (ints / Fractions) unlock exact fiber-order
    computation; complex coefficients use the numeric path.
    """

    A: tuple
    B: tuple

    def __post_init__(self):
        a = tuple(self.A)
        b = tuple(self.B)
        if poly_degree(a) is not None and poly_degree(a) > MAX_DEG_A:
            raise WeierstrassError(f"deg A must be <= {MAX_DEG_A}")
        if poly_degree(b) is not None and poly_degree(b) > MAX_DEG_B:
            raise WeierstrassError(f"deg B must be <= {MAX_DEG_B}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        disc = discriminant(self)
        if not _trim(disc):
            raise WeierstrassError("discriminant is identically zero")

    @property
    def exact(self) -> bool:
        return all(
            isinstance(c, (int, Fraction)) for c in self.A + self.B
        )


@dataclass(frozen=True)
class SingularFiber:
    """One singular fiber: location (None means the point at infinity),
    vanishing orders of (A, B, discriminant) with None for an identically
    vanishing polynomial, and the fiber type with its Euler number."""

    location: Optional[complex]
    chart: str  # "affine" | "infinity"
    orders: tuple
    kodaira_type: str
    euler_number: int


def discriminant(F) -> list:
    """Coefficients of 4A^3 + 27B^2 (ascending); exact when input is."""
    a, b = list(F.A), list(F.B)
    return poly_add(
        poly_mul(poly_mul(a, a), a), poly_mul(b, b), cp=4, cq=27
    )


def infinity_chart(F: WeierstrassFamily) -> WeierstrassFamily:
    """Re-expansion at w = 1/z with weights (8, 12): A~(w) = w^8 A(1/w)."""
    a = list(F.A) + [0] * (MAX_DEG_A + 1 - len(F.A))
    b = list(F.B) + [0] * (MAX_DEG_B + 1 - len(F.B))
    return WeierstrassFamily(tuple(reversed(a)), tuple(reversed(b)))


def classify_orders(ord_a, ord_b, ord_d):
    """Kodaira type and Euler number from vanishing orders at one point.

    ord_a / ord_b may be None for an identically zero polynomial. Raises
    WeierstrassError when the orders are non-minimal (ord A >= 4 and
    ord B >= 6).
    """
    va = float("inf") if ord_a is None else ord_a
    vb = float("inf") if ord_b is None else ord_b
    vd = ord_d
    if vd == 0:
        return "I0", 0
    if va == 0:
        return f"I{vd}", vd
    if vb == 1:
        return "II", 2
    if va == 1:
        return "III", 3
    if vb == 2:
        return "IV", 4
    if (va == 2 and vb >= 3) or (va >= 3 and vb == 3):
        n = vd - 6
        if n < 0:
            raise WeierstrassError(f"inconsistent orders ({ord_a},{ord_b},{vd})")
        return (f"I{n}*", vd)
    if vb == 4:
        return "IV*", 8
    if va == 3:
        return "III*", 9
    if vb == 5:
        return "II*", 10
    raise WeierstrassError(
        f"non-minimal Weierstrass data: orders ({ord_a}, {ord_b}, {vd})"
    )


def _order_at_zero(coeffs):
    """Vanishing order of a polynomial at 0, by exact-zero leading entries."""
    t = _trim(coeffs)
    if not t:
        return None
    k = 0
    while t[k] == 0:
        k += 1
    return k


def _sympy_poly(coeffs):
    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(c) * x**i for i, c in enumerate(coeffs))
    return sympy.Poly(expr, x, domain="QQ")


def _factor_multiplicity(poly, factor):
    if poly.is_zero:
        return None
    k = 0
    while True:
        q, r = divmod(poly, factor)
        if not r.is_zero:
            return k
        poly = q
        k += 1


def _roots_of_coeffs(coeffs):
    t = _trim([complex(c) for c in coeffs])
    if len(t) <= 1:
        return np.array([], dtype=np.complex128)
    return np.roots(list(reversed(t)))


def vanishing_orders(F: WeierstrassFamily, z0):
    """(ord A, ord B, ord Delta) at an affine point z0 of the base.

    Exact (via polynomial division) when the family and z0 are rational;
    otherwise estimated by root counting within the cluster tolerance.
    """
    disc = discriminant(F)
    if F.exact and isinstance(z0, (int, Fraction)):
        x = sympy.Symbol("x")
        lin = sympy.Poly(x - sympy.Rational(z0), x, domain="QQ")
        return (
            _factor_multiplicity(_sympy_poly(F.A), lin),
            _factor_multiplicity(_sympy_poly(F.B), lin),
            _factor_multiplicity(_sympy_poly(disc), lin) or 0,
        )
    z0 = complex(z0)
    tol = 10 * CLUSTER_TOL

    def count(coeffs):
        if not _trim(list(coeffs)):
            return None
        r = _roots_of_coeffs(coeffs)
        return int(np.sum(np.abs(r - z0) < tol)) if r.size else 0

    return (count(F.A), count(F.B), count(disc) or 0)


def _cluster_roots(roots, tol):
    """Greedy clustering of a 1-D complex root list; returns (center, size)."""
    roots = sorted(roots, key=lambda z: (z.real, z.imag))
    clusters = []
    for r in roots:
        for c in clusters:
            if abs(r - c[0] / c[1]) <= tol:
                c[0] += r
                c[1] += 1
                break
        else:
            clusters.append([r, 1])
    return [(c[0] / c[1], c[1]) for c in clusters]


def _newton_polish(coeffs, roots, iters=3):
    dcoeffs = [i * c for i, c in enumerate(coeffs)][1:]
    for _ in range(iters):
        f = poly_eval(coeffs, roots)
        fp = poly_eval(dcoeffs, roots)
        step = np.where(np.abs(fp) > 1e-300, f / fp, 0.0)
        roots = roots - step
    return roots


def _affine_singular_points(F: WeierstrassFamily, cluster_tol):
    """(location, ordA, ordB, ordDelta) for each affine discriminant root."""
    disc = discriminant(F)
    if F.exact:
        out = []
        pd = _sympy_poly(disc)
        pa = _sympy_poly(F.A)
        pb = _sympy_poly(F.B)
        for factor, mult in pd.factor_list()[1]:
            if factor.degree() == 0:
                continue
            ma = _factor_multiplicity(pa, factor)
            mb = _factor_multiplicity(pb, factor)
            roots = _roots_of_coeffs(list(reversed(factor.all_coeffs())))
            for r in roots:
                out.append((complex(r), ma, mb, mult))
        return out
    roots = _roots_of_coeffs(disc)
    if roots.size == 0:
        return []
    roots = _newton_polish([complex(c) for c in disc], roots)
    scale = max(abs(complex(c)) for c in disc)
    resid = np.abs(poly_eval(disc, roots))
    blowup = np.abs(roots) ** max(poly_degree(disc), 1)
    if np.any(resid > 1e-5 * scale * np.maximum(1.0, blowup)):
        raise WeierstrassError("root polishing failed; clustering ambiguous")
    clusters = _cluster_roots([complex(r) for r in roots], cluster_tol)
    a_roots = _roots_of_coeffs(F.A)
    b_roots = _roots_of_coeffs(F.B)
    a_zero = not _trim(list(F.A))
    b_zero = not _trim(list(F.B))
    out = []
    for center, size in clusters:
        near = 10 * cluster_tol
        ma = None if a_zero else int(np.sum(np.abs(a_roots - center) < near))
        mb = None if b_zero else int(np.sum(np.abs(b_roots - center) < near))
        out.append((center, ma, mb, size))
    return out


def singular_fibers(F: WeierstrassFamily, cluster_tol: float = CLUSTER_TOL):
    """Locate and classify every singular fiber on both charts.

    Affine discriminant roots are found in the z chart; the point at
    infinity is analyzed on the re-expanded w chart. Locations with
    |z| > 1 are reported in the infinity chart at w = 1/z.
    """
    fibers = []
    for z0, ma, mb, md in _affine_singular_points(F, cluster_tol):
        ktype, euler = classify_orders(ma, mb, md)
        if ktype == "I0":
            continue
        chart = "affine" if abs(z0) <= 1.0 else "infinity"
        fibers.append(SingularFiber(z0, chart, (ma, mb, md), ktype, euler))
    finf = infinity_chart(F)
    disc_inf = discriminant(finf)
    ma = _order_at_zero(finf.A)
    mb = _order_at_zero(finf.B)
    md = _order_at_zero(disc_inf)
    md = 0 if md is None else md
    if md > 0:
        ktype, euler = classify_orders(ma, mb, md)
        if ktype != "I0":
            fibers.append(SingularFiber(None, "infinity", (ma, mb, md), ktype, euler))
    return fibers


def euler_sum(fibers) -> int:
    return sum(f.euler_number for f in fibers)


def _chart_family(F: WeierstrassFamily, chart: int) -> WeierstrassFamily:
    return F if chart == 0 else infinity_chart(F)


def _density_batch(F: WeierstrassFamily, chart: int, pts):
    """rho at an array of chart points; raises near singular fibers."""
    fam = _chart_family(F, chart)
    a = poly_eval(fam.A, pts)
    b = poly_eval(fam.B, pts)
    o1, o2, _tau, fb = elliptic.periods_batch(a, b)
    return elliptic.density_from_periods(o1, o2), fb


def metric_density(F: WeierstrassFamily, z, fibers=None, min_distance=1e-9):
    """Base-metric density rho(z) = Im(omega2 conj(omega1)) at an affine z.

    SL(2,Z) changes of the period basis leave rho invariant, so the value is
    single-valued on the punctured sphere.
    """
    z = complex(z)
    if fibers is None:
        fibers = singular_fibers(F)
    for f in fibers:
        if f.location is not None and abs(z - f.location) < min_distance:
            raise WeierstrassError(f"point {z} is too close to a singular fiber")
    rho, _ = _density_batch(F, 0, np.array([z]))
    return float(rho[0])


# --- mesh construction -----------------------------------------------------


def _grid_shape(resolution: int):
    rings = max(4, int(round(np.sqrt(resolution / (2 * np.pi)))))
    angles = int(np.ceil(np.pi * rings))
    return rings, angles


def _singular_chart_coords(fibers):
    """Chart-local coordinates of all singular fibers, per chart."""
    per_chart = {0: [], 1: []}
    for f in fibers:
        if f.chart == "affine":
            per_chart[0].append(complex(f.location))
            if abs(f.location) >= 0.5:
                per_chart[1].append(1.0 / complex(f.location))
        else:
            w = 0.0 if f.location is None else complex(f.location)
            per_chart[1].append(w)
            if abs(w) >= 0.5:
                per_chart[0].append(1.0 / w)
    return per_chart


def mesh_metric(
    F: WeierstrassFamily,
    resolution: int = 200,
    puncture_radius: float = 1e-3,
    cluster_tol: float = CLUSTER_TOL,
) -> TropicalK3Mesh:
    """Sample the base sphere minus puncture disks and build the shortest
    path metric of sqrt(rho)|dz|, rescaled to diameter one.

    Two polar-grid charts (|z| <= 2 and |w| <= 2, w = 1/z) are glued by
    cross-chart edges on the overlap annulus. Edge weights are Simpson
    quadrature of sqrt(rho) along chart segments.
    """
    if resolution < 12:
        raise WeierstrassError("resolution too small to mesh the sphere")
    if resolution > 40000:
        raise WeierstrassError("resolution too large; distance matrix would not fit")
    fibers = singular_fibers(F, cluster_tol)
    sing = _singular_chart_coords(fibers)
    rings, angles = _grid_shape(resolution)

    # node catalogue: (chart, coordinate)
    nodes = []
    index = {}
    for chart in (0, 1):
        keep_center = all(
            abs(s) >= puncture_radius for s in sing[chart]
        )
        if keep_center:
            index[(chart, 0, 0)] = len(nodes)
            nodes.append((chart, 0.0 + 0.0j))
        for j in range(1, rings + 1):
            r = 2.0 * j / rings
            for m in range(angles):
                zeta = r * np.exp(2j * np.pi * m / angles)
                if any(abs(zeta - s) < puncture_radius for s in sing[chart]):
                    continue
                index[(chart, j, m)] = len(nodes)
                nodes.append((chart, complex(zeta)))

    if len(nodes) < 4:
        raise WeierstrassError("punctures removed almost the whole mesh")

    edges = []  # (i, k, chart, za, zb)
    for chart in (0, 1):
        for j in range(1, rings + 1):
            for m in range(angles):
                key = (chart, j, m)
                if key not in index:
                    continue
                i = index[key]
                za = nodes[i][1]
                neighbors = [(j, (m + 1) % angles)]
                if j < rings:
                    neighbors += [
                        (j + 1, m),
                        (j + 1, (m + 1) % angles),
                        (j + 1, (m - 1) % angles),
                    ]
                for (j2, m2) in neighbors:
                    key2 = (chart, j2, m2)
                    if key2 in index:
                        k = index[key2]
                        edges.append((i, k, chart, za, nodes[k][1]))
                if j == 1 and (chart, 0, 0) in index:
                    k = index[(chart, 0, 0)]
                    edges.append((i, k, chart, za, 0.0 + 0.0j))

    # cross-chart gluing on the overlap annulus 1 <= |zeta| <= 2
    ring_step = 2.0 / rings
    ang_step = 2.0 * np.pi / angles
    for chart in (0, 1):
        other = 1 - chart
        for (c, j, m), i in list(index.items()):
            if c != chart or j == 0:
                continue
            zeta = nodes[i][1]
            if abs(zeta) < 1.0:
                continue
            w = 1.0 / zeta
            jf = abs(w) / ring_step
            mf = (cmath.phase(w) % (2 * np.pi)) / ang_step
            for j2 in (int(np.floor(jf)), int(np.ceil(jf))):
                for m2 in (int(np.floor(mf)) % angles, int(np.ceil(mf)) % angles):
                    key2 = (other, j2, m2) if j2 > 0 else (other, 0, 0)
                    if key2 in index:
                        k = index[key2]
                        edges.append((i, k, other, w, nodes[k][1]))

    # batched density evaluation: endpoints and midpoints per chart
    eval_pts = {0: {}, 1: {}}

    def want(chart, z):
        z = complex(z)
        eval_pts[chart].setdefault(z, None)
        return z

    for (i, k, chart, za, zb) in edges:
        want(chart, za)
        want(chart, zb)
        want(chart, (za + zb) / 2.0)
    node_rho = np.zeros(len(nodes))
    for chart in (0, 1):
        pts = np.array(list(eval_pts[chart].keys()), dtype=np.complex128)
        if pts.size == 0:
            continue
        rho, _fb = _density_batch(F, chart, pts)
        if np.any(rho <= 0):
            raise WeierstrassError("nonpositive density; mesh aborted")
        for z, val in zip(pts, rho):
            eval_pts[chart][complex(z)] = float(val)
    for i, (chart, zeta) in enumerate(nodes):
        val = eval_pts[chart].get(complex(zeta))
        if val is None:
            # node only referenced through the other chart; evaluate directly
            rho, _ = _density_batch(F, chart, np.array([zeta]))
            val = float(rho[0])
        node_rho[i] = val

    rows, cols, weights = [], [], []
    for (i, k, chart, za, zb) in edges:
        length = abs(zb - za)
        if length == 0.0:
            w = 0.0
        else:
            sa = np.sqrt(eval_pts[chart][complex(za)])
            sb = np.sqrt(eval_pts[chart][complex(zb)])
            sm = np.sqrt(eval_pts[chart][complex((za + zb) / 2.0)])
            w = length * (sa + 4.0 * sm + sb) / 6.0
        rows.append(i)
        cols.append(k)
        weights.append(w)
    n = len(nodes)
    graph = sp.csr_matrix(
        (np.array(weights), (np.array(rows), np.array(cols))), shape=(n, n)
    )
    graph = graph.minimum(graph.T) + sp.tril(graph.T - graph, -1).maximum(0) * 0
    graph = graph.maximum(graph.T)
    ncomp, _ = connected_components(graph, directed=False)
    if ncomp != 1:
        raise MetricError(
            f"mesh is disconnected ({ncomp} components); punctures too large"
        )
    dist = shortest_path(graph, method="D", directed=False)
    diam = float(dist.max())
    if not np.isfinite(diam) or diam <= 0:
        raise MetricError("degenerate mesh diameter")
    space = FiniteMetricSpace(dist / diam, coords=np.array(
        [[c, zeta.real, zeta.imag] for c, zeta in nodes]
    ))
    return TropicalK3Mesh(
        space=space,
        chart_points=tuple(nodes),
        punctures=tuple(
            (f.chart, f.location) for f in fibers
        ),
        density=node_rho,
        normalized=True,
        pre_rescale_diameter=diam,
    )


# --- monodromy around a singular fiber --------------------------------------


def _basis_coords(basis, vec):
    m = np.array(
        [[basis[0].real, basis[1].real], [basis[0].imag, basis[1].imag]]
    )
    return np.linalg.solve(m, [vec.real, vec.imag])


def monodromy_loop(
    F: WeierstrassFamily,
    center,
    radius: float,
    steps: int = 96,
    max_refine: int = 4,
):
    """Integer monodromy of the period basis around a loop on the base.

    Continues the fiber-period basis around the circle |z - center| = radius
    (z chart), re-expressing the continued basis in the local deterministic
    basis at each step; the recombination coefficients must be near-integer
    and the maximum rounding deviation is returned along with the matrix.
    """
    center = complex(center)
    for attempt in range(max_refine + 1):
        n = steps * 2**attempt
        zs = center + radius * np.exp(2j * np.pi * np.arange(n + 1) / n)
        a = poly_eval(F.A, zs)
        b = poly_eval(F.B, zs)
        o1, o2, _tau, _fb = elliptic.periods_batch(a, b)
        cont = np.array([o1[0], o2[0]], dtype=np.complex128)
        coeff = np.eye(2, dtype=np.int64)
        worst = 0.0
        ok = True
        for k in range(1, n + 1):
            basis = (complex(o1[k]), complex(o2[k]))
            rows = []
            for v in cont:
                c = _basis_coords(basis, complex(v))
                rows.append(c)
            rows = np.array(rows)
            ints = np.round(rows)
            dev = float(np.abs(rows - ints).max())
            worst = max(worst, dev)
            if dev > 0.2:
                ok = False
                break
            coeff = ints.astype(np.int64)
            cont = coeff @ np.array(basis)
        if ok:
            t = coeff
            det = int(round(np.linalg.det(t)))
            if abs(det) != 1:
                raise WeierstrassError(
                    f"monodromy continuation produced det {det}; refine the loop"
                )
            return t, worst
    raise WeierstrassError("branch tracking failed around the loop")
