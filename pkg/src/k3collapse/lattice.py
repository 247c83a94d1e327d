"""Integer lattices with symmetric bilinear forms.

Builds the rank-22 even unimodular lattice of signature (3,19) used for K3
surfaces, degree-2d polarized sublattices, and the data attached to isotropic
lines and planes (quotient forms, divisibility, discriminant classes).

All arithmetic is exact; no floats enter this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional

from . import intlinalg as il

U_GRAM = [[0, 1], [1, 0]]

# Bourbaki numbering; nodes 1-3-4-5-6-7-8 in a chain, node 2 attached to 4.
E8_GRAM = [
    [2, 0, -1, 0, 0, 0, 0, 0],
    [0, 2, 0, -1, 0, 0, 0, 0],
    [-1, 0, 2, -1, 0, 0, 0, 0],
    [0, -1, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, 0],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, -1],
    [0, 0, 0, 0, 0, 0, -1, 2],
]


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Free Z-module with an integer Gram matrix."""

    gram: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise LatticeError("gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise LatticeError("gram matrix must be symmetric")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def det(self) -> int:
        return il.bareiss_det([list(r) for r in self.gram])

    def gram_rows(self):
        return [list(r) for r in self.gram]


@dataclass(frozen=True)
class RationalSubspace:
    """Subspace of L (x) Q given by a list of linearly independent vectors."""

    basis: tuple

    def __post_init__(self):
        b = tuple(tuple(Fraction(x) for x in row) for row in self.basis)
        object.__setattr__(self, "basis", b)
        if b:
            ints = [il.clear_denominators(list(v)) for v in b]
            if il.rank_int(ints) != len(b):
                raise LatticeError("subspace basis is linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class BoundaryStratumDescriptor:
    kind: str  # "line" | "plane"
    generator_data: tuple  # saturated integral basis of the subspace
    quotient_lattice: Optional[Lattice]
    invariants_tuple: tuple  # (divisibility, disc class representative)
    projection: Optional[tuple] = None  # see quotient_by_isotropic


def direct_sum(*grams):
    n = sum(len(g) for g in grams)
    out = [[0] * n for _ in range(n)]
    off = 0
    for g in grams:
        k = len(g)
        for i in range(k):
            for j in range(k):
                out[off + i][off + j] = g[i][j]
        off += k
    return out


def build_k3_lattice() -> Lattice:
    """Rank-22 even unimodular lattice: two E8(-1) blocks and three U blocks."""
    e8m = [[-x for x in row] for row in E8_GRAM]
    gram = direct_sum(e8m, e8m, U_GRAM, U_GRAM, U_GRAM)
    labels = (
        [f"a{i}" for i in range(1, 9)]
        + [f"b{i}" for i in range(1, 9)]
        + ["e1", "f1", "e2", "f2", "e3", "f3"]
    )
    return Lattice(gram, tuple(labels))


def pairing(L: Lattice, v, w):
    """Evaluate the bilinear form on two vectors in basis coordinates."""
    if len(v) != L.rank or len(w) != L.rank:
        raise LatticeError("vector length does not match lattice rank")
    total = 0
    for i, vi in enumerate(v):
        if vi == 0:
            continue
        row = L.gram[i]
        total += vi * sum(row[j] * w[j] for j in range(L.rank) if w[j] != 0)
    return total


def signature(L: Lattice):
    """Exact inertia (n_plus, n_minus); raises on a degenerate form."""
    try:
        return il.inertia(L.gram_rows())
    except ValueError as exc:
        raise LatticeError(str(exc)) from None


def is_primitive(L: Lattice, v) -> bool:
    if all(x == 0 for x in v):
        raise LatticeError("zero vector")
    return il.vector_gcd(list(v)) == 1


def divisibility(L: Lattice, v) -> int:
    """gcd of the pairings of v with the lattice, i.e. gcd of gram @ v."""
    if all(x == 0 for x in v):
        raise LatticeError("zero vector")
    gv = il.mat_vec(L.gram_rows(), list(v))
    return il.vector_gcd(gv)


def build_polarized_lattice(d: int):
    """Orthogonal complement of a primitive square-2d vector in the K3 lattice.

    The polarizing vector is e1 + d*f1 in the first hyperbolic block. Returns
    (lattice, embedding, lam) where `embedding` lists the basis vectors of the
    complement in K3-lattice coordinates.
    """
    if d < 1:
        raise LatticeError("degree must be a positive integer")
    k3 = build_k3_lattice()
    lam = [0] * 22
    lam[16] = 1  # e1
    lam[17] = d  # f1
    assert pairing(k3, lam, lam) == 2 * d
    basis = orthogonal_complement(k3, RationalSubspace((tuple(lam),)))
    gram = _restricted_gram(k3, basis)
    return Lattice(gram), tuple(tuple(v) for v in basis), tuple(lam)


def _restricted_gram(L: Lattice, basis):
    g = L.gram_rows()
    gb = [il.mat_vec(g, list(v)) for v in basis]
    return [[sum(x * y for x, y in zip(v, gv)) for gv in gb] for v in basis]


def orthogonal_complement(L: Lattice, S: RationalSubspace):
    """Saturated integral basis of {x in L : (x, s) = 0 for all s in S}."""
    if S.dim == 0:
        return il.identity(L.rank)
    rows = []
    for v in S.basis:
        vi = il.clear_denominators(list(v))
        rows.append(il.mat_vec(L.gram_rows(), vi))
    return il.kernel_int(rows)


def quotient_by_isotropic(L: Lattice, e):
    """Induced form on (e-perp)/<e> for a primitive isotropic vector e.

    Returns (quotient lattice, projection) where projection is a pair
    (perp_basis, quotient_index_map): perp_basis is an adapted basis of
    e-perp whose first vector is e, and a vector x of e-perp maps to the
    coordinates of x in that basis with the leading (e) coordinate dropped.
    """
    e = [int(x) for x in e]
    if pairing(L, e, e) != 0:
        raise LatticeError("vector is not isotropic")
    if not is_primitive(L, e):
        raise LatticeError("vector is not primitive")
    perp = orthogonal_complement(L, RationalSubspace((tuple(e),)))
    # express e in the perp basis; integral because the perp is saturated
    coords = il.rat_solve(il.transpose(perp), e)
    assert coords is not None
    c = [int(x) for x in coords]
    u = il.complete_primitive(c)
    # rows of (u^T @ perp) form a new basis of e-perp whose first row is e
    adapted = il.mat_mul(il.transpose(u), perp)
    assert adapted[0] == e
    gram_full = _restricted_gram(L, adapted)
    if any(gram_full[0][j] != 0 for j in range(len(adapted))):
        raise LatticeError("internal error: adapted basis not isotropic-first")
    quot_gram = [row[1:] for row in gram_full[1:]]
    return Lattice(quot_gram), (tuple(tuple(v) for v in adapted), 1)


def project_to_quotient(projection, x):
    """Coordinates of an e-perp vector in the quotient (e-perp)/<e>."""
    adapted, drop = projection
    coords = il.rat_solve(il.transpose([list(v) for v in adapted]), list(x))
    if coords is None:
        raise LatticeError("vector is not in the orthogonal complement")
    return tuple(coords[drop:])


def discriminant_class(L: Lattice, v, div: int):
    """Fractional-coordinate representative of [v/div] in L-dual / L."""
    return tuple(Fraction(x, div) % 1 for x in v)


def classify_boundary(L: Lattice, S: RationalSubspace) -> BoundaryStratumDescriptor:
    """Classify an isotropic subspace of dimension 1 or 2.

    Dimension 1 gives a "line" stratum carrying the quotient form on
    (e-perp)/<e>; dimension 2 gives a "plane" stratum (a single point).
    """
    if S.dim not in (1, 2):
        raise LatticeError(
            "isotropic subspaces of signature (2,19) forms have dimension 1 or 2"
        )
    ints = [il.clear_denominators(list(v)) for v in S.basis]
    sat = il.saturate(ints, n=L.rank)
    for a in sat:
        for b in sat:
            if pairing(L, a, b) != 0:
                raise LatticeError("subspace is not isotropic")
    gen = sat[0]
    div = divisibility(L, gen)
    inv = (div, discriminant_class(L, gen, div))
    if S.dim == 1:
        quot, projection = quotient_by_isotropic(L, gen)
        return BoundaryStratumDescriptor(
            kind="line",
            generator_data=tuple(tuple(v) for v in sat),
            quotient_lattice=quot,
            invariants_tuple=inv,
            projection=projection,
        )
    return BoundaryStratumDescriptor(
        kind="plane",
        generator_data=tuple(tuple(v) for v in sat),
        quotient_lattice=None,
        invariants_tuple=inv,
        projection=None,
    )


def random_isotropic_primitive(L: Lattice, rng, bound: int = 5):
    """Random primitive isotropic vector, built from a hyperbolic pair.

    Searches the Gram matrix for indices i, j with q(i)=q(j)=0 and (i,j)=1
    (a hyperbolic pair), then completes a random vector supported elsewhere
    into an isotropic one. Raises if no hyperbolic pair exists in the basis.
    """
    g = L.gram
    n = L.rank
    pair = None
    for i in range(n):
        if g[i][i] != 0:
            continue
        for j in range(n):
            if j != i and g[j][j] == 0 and g[i][j] == 1:
                pair = (i, j)
                break
        if pair:
            break
    if pair is None:
        raise LatticeError("no hyperbolic basis pair available")
    i, j = pair
    for _ in range(10000):
        v = [rng.randrange(-bound, bound + 1) for _ in range(n)]
        v[i] = 0
        v[j] = 0
        # decouple the rest from the chosen pair: subtract projections
        # (only needed if other basis vectors pair with i or j)
        q = pairing(L, v, v)
        ri = sum(g[i][k] * v[k] for k in range(n))
        rj = sum(g[j][k] * v[k] for k in range(n))
        if q % 2 != 0:
            continue
        # v + a*b_i + b*b_j with a = 1 keeps things primitive:
        # (v + b_i + b*b_j)^2 = q + 2*ri + 2*b*(rj + 1*1)  [since (b_i,b_j)=1]
        denom = rj + 1
        num = -(q // 2) - ri
        if denom == 0:
            continue
        if num % denom != 0:
            # swap roles: coefficient 1 on b_j instead
            denom2 = ri + 1
            num2 = -(q // 2) - rj
            if denom2 == 0 or num2 % denom2 != 0:
                continue
            v[j] = 1
            v[i] = num2 // denom2
        else:
            v[i] = 1
            v[j] = num // denom
        if all(x == 0 for x in v):
            continue
        if pairing(L, v, v) != 0:
            continue
        g0 = il.vector_gcd(v)
        if g0 > 1:
            v = [x // g0 for x in v]
        return v
    raise LatticeError("failed to sample an isotropic vector")
