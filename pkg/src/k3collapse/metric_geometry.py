"""Finite metric spaces, model limit spaces, and Gromov-Hausdorff bounds.

Spaces are stored as dense symmetric distance matrices. Model constructors
(segments, flat tori, involution quotients) are exact up to float rounding;
mesh-built spaces inherit the graph shortest-path metric. GH distances are
estimated as a certified-style lower bound plus a correspondence-search
upper bound; the two never cross.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._accel import best_reassignment, min_torus_distance, pair_distortion

METRIC_TOL = 1e-9


class MetricError(ValueError):
    pass


@dataclass
class FiniteMetricSpace:
    """Sampled compact metric space: an n x n distance matrix plus carrier
    data (labels and/or coordinates) used for same-carrier comparisons."""

    dist: np.ndarray
    labels: Optional[tuple] = None
    coords: Optional[np.ndarray] = None

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise MetricError("distance matrix must be square")
        self.dist = d

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def check(self, tol: float = METRIC_TOL, max_triples: int = 200000):
        """Validate metric axioms; triangle inequality is sampled when the
        full triple scan would be too large."""
        d = self.dist
        n = self.n
        if np.abs(np.diag(d)).max(initial=0.0) > tol:
            raise MetricError("nonzero diagonal")
        if np.abs(d - d.T).max(initial=0.0) > tol:
            raise MetricError("asymmetric distance matrix")
        if d.min(initial=0.0) < -tol:
            raise MetricError("negative distance")
        if n**3 <= max_triples:
            viol = (d[:, :, None] + d[None, :, :] - d[:, None, :]).min()
            if viol < -tol:
                raise MetricError(f"triangle inequality violated by {-viol:.3g}")
        else:
            rng = np.random.default_rng(0)
            i, j, k = (rng.integers(0, n, max_triples) for _ in range(3))
            viol = (d[i, j] + d[j, k] - d[i, k]).min()
            if viol < -tol:
                raise MetricError(f"triangle inequality violated by {-viol:.3g}")
        return self


@dataclass
class TropicalK3Mesh:
    """Sphere mesh with the fibration base metric.

    chart_points[i] = (chart, zeta) gives the sampling coordinate of node i
    in its home chart (0 = affine chart, 1 = chart at infinity).
    """

    space: FiniteMetricSpace
    chart_points: tuple
    punctures: tuple
    density: np.ndarray
    normalized: bool
    pre_rescale_diameter: float


@dataclass(frozen=True)
class FlatTorus:
    """R^i / Z^i with inner products given by a positive-definite Gram
    matrix; rank at most 4."""

    gram: tuple

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise MetricError("gram must be square")
        if not (1 <= g.shape[0] <= 4):
            raise MetricError("torus rank must be between 1 and 4")
        if np.abs(g - g.T).max() > 1e-12 * (1 + np.abs(g).max()):
            raise MetricError("gram must be symmetric")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise MetricError("gram must be positive definite")
        object.__setattr__(self, "gram", tuple(tuple(float(x) for x in r) for r in g))

    @property
    def rank(self) -> int:
        return len(self.gram)

    def gram_array(self):
        return np.asarray(self.gram, dtype=np.float64)


def diameter(M: FiniteMetricSpace) -> float:
    if M.n < 1:
        raise MetricError("empty space has no diameter")
    return float(M.dist.max(initial=0.0))


def rescale_to_diameter_one(M: FiniteMetricSpace) -> FiniteMetricSpace:
    d = diameter(M)
    if M.n < 2 or d <= 0:
        raise MetricError("cannot rescale a space of zero diameter")
    return FiniteMetricSpace(M.dist / d, labels=M.labels, coords=M.coords)


def segment_space(samples: int) -> FiniteMetricSpace:
    """Uniform samples of the unit segment [0, 1]."""
    if samples < 2:
        raise MetricError("segment needs at least 2 samples")
    x = np.linspace(0.0, 1.0, samples)
    return FiniteMetricSpace(
        np.abs(x[:, None] - x[None, :]), coords=x[:, None]
    )


def _shift_box(gram: np.ndarray, radius: int):
    k = gram.shape[0]
    rng = range(-radius, radius + 1)
    return np.array(list(itertools.product(rng, repeat=k)), dtype=np.float64)


def certified_shift_radius(gram: np.ndarray) -> int:
    """Translate-search radius guaranteed to contain the minimizing shift
    for displacement vectors reduced to [-1/2, 1/2]^k.

    Any optimal shift s satisfies |s|_2 <= |s + delta|_2 + |delta|_2
    <= u / sqrt(lambda_min) + sqrt(k)/2 where u bounds |delta|_gram.
    """
    k = gram.shape[0]
    corners = np.array(list(itertools.product((-0.5, 0.5), repeat=k)))
    u = np.sqrt(np.einsum("ci,ij,cj->c", corners, gram, corners).max())
    lam_min = np.linalg.eigvalsh(gram).min()
    return int(np.ceil(u / np.sqrt(lam_min) + np.sqrt(k) / 2.0)) + 1


def torus_displacement_norms(T: FlatTorus, deltas) -> np.ndarray:
    """Quotient norms min over integer translates for displacement rows."""
    gram = T.gram_array()
    deltas = np.asarray(deltas, dtype=np.float64)
    deltas = deltas - np.round(deltas)
    shifts = _shift_box(gram, certified_shift_radius(gram))
    return min_torus_distance(deltas, gram, shifts)


def torus_distance(T: FlatTorus, x, y) -> float:
    """Distance between two points of the torus (coordinates mod 1)."""
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return float(torus_displacement_norms(T, d[None, :])[0])


def kummer_pair_distance(T: FlatTorus, x, y) -> float:
    """Distance in the quotient of the torus by the -1 involution."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    norms = torus_displacement_norms(T, np.stack([x - y, x + y]))
    return float(norms.min())


def flat_torus_space(T: FlatTorus, samples_per_axis: int) -> FiniteMetricSpace:
    """Grid sampling of the torus with the exact quotient metric.

    Distances depend only on the coordinate difference, which again lies on
    the grid, so an s^k table of displacement norms fills the full matrix.
    """
    s = int(samples_per_axis)
    if s < 1:
        raise MetricError("samples_per_axis must be positive")
    k = T.rank
    n = s**k
    if n > 20000:
        raise MetricError(f"grid of {n} points is too large")
    idx = np.array(list(itertools.product(range(s), repeat=k)), dtype=np.int64)
    table = torus_displacement_norms(T, idx / s)  # norm of each grid difference
    strides = np.array([s ** (k - 1 - a) for a in range(k)], dtype=np.int64)
    diff = (idx[:, None, :] - idx[None, :, :]) % s
    flat = (diff * strides).sum(axis=2)
    dist = table[flat]
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSpace(dist, coords=idx / s)


def torus_negation_permutation(samples_per_axis: int, rank: int) -> np.ndarray:
    """Permutation of grid indices implementing x -> -x mod 1."""
    s = samples_per_axis
    idx = np.array(list(itertools.product(range(s), repeat=rank)), dtype=np.int64)
    neg = (-idx) % s
    strides = np.array([s ** (rank - 1 - a) for a in range(rank)], dtype=np.int64)
    return (neg * strides).sum(axis=1)


def quotient_by_involution(M: FiniteMetricSpace, sigma) -> FiniteMetricSpace:
    """Metric quotient by an isometric involution sigma (a permutation).

    Points are sigma-orbits; d([x],[y]) = min(d(x,y), d(x, sigma y)). The
    result is a metric because sigma is an isometry of order two.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    n = M.n
    if sigma.shape != (n,):
        raise MetricError("sigma must be a permutation of the points")
    if not np.array_equal(np.sort(sigma), np.arange(n)):
        raise MetricError("sigma is not a permutation")
    if not np.array_equal(sigma[sigma], np.arange(n)):
        raise MetricError("sigma is not an involution")
    d = M.dist
    if np.abs(d[np.ix_(sigma, sigma)] - d).max() > METRIC_TOL:
        raise MetricError("sigma is not an isometry")
    reps = np.nonzero(np.arange(n) <= sigma)[0]
    folded = np.minimum(d[np.ix_(reps, reps)], d[np.ix_(reps, sigma[reps])])
    coords = M.coords[reps] if M.coords is not None else None
    labels = tuple(M.labels[r] for r in reps) if M.labels is not None else None
    return FiniteMetricSpace(folded, labels=labels, coords=coords)


def _proper_pair_distances(M: FiniteMetricSpace) -> np.ndarray:
    iu = np.triu_indices(M.n, k=1)
    return np.sort(M.dist[iu])


def _injective_bottleneck(small: np.ndarray, big: np.ndarray) -> float:
    """Min over injections of the smaller sorted multiset into the larger of
    the max matched gap, by bisection plus a greedy feasibility sweep."""
    if small.size == 0:
        return 0.0

    def feasible(eps):
        j = 0
        m = big.size
        for a in small:
            while j < m and big[j] < a - eps:
                j += 1
            if j == m or big[j] > a + eps:
                return False
            j += 1
        return True

    lo, hi = 0.0, float(max(small.max(), big.max(), 1e-300))
    if feasible(lo):
        return 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def gh_lower(M1: FiniteMetricSpace, M2: FiniteMetricSpace) -> float:
    """Lower estimate: half the diameter gap or half the bottleneck cost of
    embedding the smaller pairwise-distance multiset into the larger."""
    t_diam = 0.5 * abs(diameter(M1) - diameter(M2))
    a = _proper_pair_distances(M1)
    b = _proper_pair_distances(M2)
    if a.size > b.size:
        a, b = b, a
    t_multiset = 0.5 * _injective_bottleneck(a, b)
    return max(t_diam, t_multiset)


def _eccentricity_seed(d1, d2):
    n1, n2 = d1.shape[0], d2.shape[0]
    o1 = np.argsort(d1.max(axis=1), kind="stable")
    o2 = np.argsort(d2.max(axis=1), kind="stable")
    f = np.empty(n1, dtype=np.int64)
    pos = np.round(np.linspace(0, n2 - 1, n1)).astype(np.int64)
    f[o1] = o2[pos]
    g = np.empty(n2, dtype=np.int64)
    pos = np.round(np.linspace(0, n1 - 1, n2)).astype(np.int64)
    g[o2] = o1[pos]
    return f, g


def _correspondence_arrays(f, g, n1, n2):
    xs = np.concatenate([np.arange(n1, dtype=np.int64), g])
    ys = np.concatenate([f, np.arange(n2, dtype=np.int64)])
    return xs, ys


def gh_upper(
    M1: FiniteMetricSpace,
    M2: FiniteMetricSpace,
    iterations: int = 200,
    seed: int = 0,
    sweeps: int = 4,
) -> float:
    """Upper bound: half the distortion of the best correspondence found.

    Correspondences are pairs of maps (X1 -> X2, X2 -> X1), so coverage is
    guaranteed and the returned value is a true upper bound; `iterations`
    controls the number of search restarts.
    """
    d1 = np.ascontiguousarray(M1.dist)
    d2 = np.ascontiguousarray(M2.dist)
    n1, n2 = M1.n, M2.n
    if n1 == 0 or n2 == 0:
        raise MetricError("empty space")
    rng = np.random.default_rng(seed)
    cand1 = np.arange(n1, dtype=np.int64)
    cand2 = np.arange(n2, dtype=np.int64)
    best = np.inf

    def run(f, g):
        nonlocal best
        f = f.copy()
        g = g.copy()
        for _ in range(sweeps):
            improved = False
            for i in rng.permutation(n1):
                xs, ys = _correspondence_arrays(f, g, n1, n2)
                new, _ = best_reassignment(d1, d2, xs, ys, int(i), cand2)
                if new != f[i]:
                    f[i] = new
                    improved = True
            for j in rng.permutation(n2):
                xs, ys = _correspondence_arrays(f, g, n1, n2)
                new, _ = best_reassignment(d2, d1, ys, xs, n1 + int(j), cand1)
                if new != g[j]:
                    g[j] = new
                    improved = True
            if not improved:
                break
        xs, ys = _correspondence_arrays(f, g, n1, n2)
        dis = pair_distortion(d1, d2, xs, ys)
        best = min(best, dis)

    if n1 == n2:
        ident = np.arange(n1, dtype=np.int64)
        xs, ys = _correspondence_arrays(ident, ident, n1, n2)
        best = min(best, pair_distortion(d1, d2, xs, ys))
    f0, g0 = _eccentricity_seed(d1, d2)
    run(f0, g0)
    for _ in range(max(0, iterations - 1)):
        f = rng.integers(0, n2, n1).astype(np.int64)
        g = rng.integers(0, n1, n2).astype(np.int64)
        run(f, g)
    return 0.5 * float(best)


def same_carrier_distance(M1: FiniteMetricSpace, M2: FiniteMetricSpace) -> float:
    """Half the sup-norm gap between distance matrices on a shared carrier;
    an upper bound for the GH distance used in continuity probes."""
    if M1.n != M2.n:
        raise MetricError("spaces do not share a carrier (size mismatch)")
    if M1.labels is not None and M2.labels is not None and M1.labels != M2.labels:
        raise MetricError("spaces do not share a carrier (label mismatch)")
    return 0.5 * float(np.abs(M1.dist - M2.dist).max(initial=0.0))
