"""Exact integer and rational matrix arithmetic.

Everything here runs on Python ints / fractions.Fraction; no floating point.
Matrices are lists of row lists. Results (kernels, normal forms, inertia)
are therefore certificates, not estimates.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)]


def mat_mul(a, b):
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, c):
    return [[c * x for x in row] for row in a]


def mat_eq(a, b):
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_zero_matrix(a):
    return all(x == 0 for row in a for x in row)


def copy_matrix(a):
    return [list(row) for row in a]


def bareiss_det(a):
    """Determinant of a square integer matrix by fraction-free elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = copy_matrix(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _swap_rows(m, i, j):
    m[i], m[j] = m[j], m[i]


def _addmul_row(m, dst, src, c):
    if c == 0:
        return
    row_d, row_s = m[dst], m[src]
    for k in range(len(row_d)):
        row_d[k] += c * row_s[k]


def hermite_row(a):
    """Row-style Hermite normal form.

    Returns (H, U) with U unimodular, H = U @ a, H in row echelon form with
    nonnegative pivots and entries above each pivot reduced mod the pivot.
    """
    m = copy_matrix(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    u = identity(rows)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # gcd-reduce column c below row r onto row r
        piv = None
        for i in range(r, rows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        _swap_rows(m, r, piv)
        _swap_rows(u, r, piv)
        for i in range(r + 1, rows):
            while m[i][c] != 0:
                q = m[r][c] // m[i][c]
                _addmul_row(m, r, i, -q)
                _addmul_row(u, r, i, -q)
                _swap_rows(m, r, i)
                _swap_rows(u, r, i)
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = m[i][c] // m[r][c]
            _addmul_row(m, i, r, -q)
            _addmul_row(u, i, r, -q)
        r += 1
    return m, u


def kernel_int(a):
    """Basis of the integer kernel {x in Z^n : a @ x = 0}.

    Returns a list of integer vectors spanning the (saturated) kernel lattice.
    """
    at = transpose(a)  # rows of at are column relations
    h, u = hermite_row(at)
    basis = []
    for i, row in enumerate(h):
        if all(x == 0 for x in row):
            basis.append(u[i])
    return basis


def rank_int(a):
    h, _ = hermite_row(a)
    return sum(1 for row in h if any(x != 0 for x in row))


def smith_normal_form(a):
    """Smith normal form. Returns (d, s, t) with d = s @ a @ t diagonal,
    s and t unimodular, and each diagonal entry dividing the next."""
    m = copy_matrix(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    s = identity(rows)
    t = identity(cols)

    def swap_cols(mat, i, j):
        for row in mat:
            row[i], row[j] = row[j], row[i]

    def addmul_col(mat, dst, src, c):
        if c == 0:
            return
        for row in mat:
            row[dst] += c * row[src]

    k = 0
    while k < min(rows, cols):
        # find smallest nonzero pivot in the trailing block
        piv = None
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                v = abs(m[i][j])
                if v != 0 and (best is None or v < best):
                    best = v
                    piv = (i, j)
        if piv is None:
            break
        pi, pj = piv
        _swap_rows(m, k, pi)
        _swap_rows(s, k, pi)
        swap_cols(m, k, pj)
        swap_cols(t, k, pj)
        dirty = False
        for i in range(k + 1, rows):
            q = m[i][k] // m[k][k]
            _addmul_row(m, i, k, -q)
            _addmul_row(s, i, k, -q)
            if m[i][k] != 0:
                dirty = True
        for j in range(k + 1, cols):
            q = m[k][j] // m[k][k]
            addmul_col(m, j, k, -q)
            addmul_col(t, j, k, -q)
            if m[k][j] != 0:
                dirty = True
        if dirty:
            continue
        # pivot must divide every entry of the trailing block
        entry = None
        for i in range(k + 1, rows):
            for j in range(k + 1, cols):
                if m[i][j] % m[k][k] != 0:
                    entry = (i, j)
                    break
            if entry:
                break
        if entry:
            _addmul_row(m, k, entry[0], 1)
            _addmul_row(s, k, entry[0], 1)
            continue
        if m[k][k] < 0:
            m[k] = [-x for x in m[k]]
            s[k] = [-x for x in s[k]]
        k += 1
    return m, s, t


def elementary_divisors(a):
    d, _, _ = smith_normal_form(a)
    out = []
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i] != 0:
            out.append(d[i][i])
    return out


def unimodular_inverse(u):
    """Exact inverse of a unimodular integer matrix."""
    n = len(u)
    aug = [list(row) + ident for row, ident in zip(u, identity(n))]
    # rational elimination, result is integral because det = +-1
    frac = [[Fraction(x) for x in row] for row in aug]
    for k in range(n):
        piv = next(i for i in range(k, n) if frac[i][k] != 0)
        frac[k], frac[piv] = frac[piv], frac[k]
        inv = 1 / frac[k][k]
        frac[k] = [x * inv for x in frac[k]]
        for i in range(n):
            if i != k and frac[i][k] != 0:
                c = frac[i][k]
                frac[i] = [x - c * y for x, y in zip(frac[i], frac[k])]
    out = []
    for row in frac:
        vals = row[n:]
        if any(v.denominator != 1 for v in vals):
            raise ValueError("matrix is not unimodular")
        out.append([int(v) for v in vals])
    return out


def complete_primitive(c):
    """Extend a primitive integer vector c to a basis of Z^n.

    Returns a unimodular matrix whose first column is c.
    """
    n = len(c)
    if vector_gcd(c) != 1:
        raise ValueError("vector is not primitive")
    # row-reduce c to e_1 by unimodular R, then invert: first col of R^-1 is c
    h, u = hermite_row([[x] for x in c])
    if h[0][0] != 1:
        raise ValueError("vector is not primitive")
    return unimodular_inverse(u)


def vector_gcd(v):
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    return g


def saturate(columns, n=None):
    """Saturation in Z^n of the lattice spanned by integer column vectors.

    `columns` is a list of integer vectors. Returns a basis (list of
    vectors) of the saturated sublattice Q-span(columns) intersect Z^n.
    """
    if not columns:
        return []
    n = n or len(columns[0])
    mat = transpose(columns)  # n x k, columns are the generators
    ann = kernel_int(transpose(mat))  # vectors y with y . col = 0 for all cols
    if not ann:
        return identity(n)
    return kernel_int(ann)


def rat_solve(a, b):
    """Solve a @ x = b exactly over Q. Returns None if inconsistent.

    a : m x n matrix, b : length-m vector (ints or Fractions).
    If the system is underdetermined, returns one particular solution.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    aug = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = aug[i][n]
    return x


def clear_denominators(vec):
    """Scale a rational vector to a primitive integer vector."""
    fracs = [Fraction(x) for x in vec]
    lcm = 1
    for f in fracs:
        d = f.denominator
        lcm = lcm * d // gcd(lcm, d)
    ints = [int(f * lcm) for f in fracs]
    g = vector_gcd(ints)
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def inertia(gram):
    """Exact signature (n_plus, n_minus) of a symmetric rational matrix.

    Uses symmetric congruence elimination over Q. Raises ValueError if the
    form is degenerate.
    """
    n = len(gram)
    m = [[Fraction(x) for x in row] for row in gram]
    pos = neg = 0
    idx = list(range(n))

    def swap(i, j):
        m[i], m[j] = m[j], m[i]
        for row in m:
            row[i], row[j] = row[j], row[i]

    k = 0
    while k < n:
        piv = next((i for i in range(k, n) if m[i][i] != 0), None)
        if piv is None:
            # all diagonal zero: find off-diagonal entry and symmetrize
            pair = None
            for i in range(k, n):
                for j in range(i + 1, n):
                    if m[i][j] != 0:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                raise ValueError("degenerate symmetric form")
            i, j = pair
            # row/col i += row/col j makes m[i][i] = 2 m[i][j] != 0
            for t in range(n):
                m[i][t] += m[j][t]
            for t in range(n):
                m[t][i] += m[t][j]
            piv = i
        if piv != k:
            swap(piv, k)
        d = m[k][k]
        if d > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, n):
            if m[i][k] != 0:
                f = m[i][k] / d
                for t in range(k, n):
                    m[i][t] -= f * m[k][t]
                for t in range(k, n):
                    m[t][i] = m[i][t]
        k += 1
    return pos, neg
