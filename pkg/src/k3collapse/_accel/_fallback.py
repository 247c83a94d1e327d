"""Pure NumPy implementations of the hot kernels.

Same contracts as the compiled extension in _core.pyx; used when the
extension is unavailable or K3C_FORCE_FALLBACK is set.
"""

import numpy as np

_RF_C1 = 9240.0


def carlson_rf(x, y, z, max_iter=80):
    """Elementwise Carlson symmetric integral R_F over complex arrays.

    Uses the duplication algorithm with principal square roots. Inputs
    broadcast to a common shape; at most one argument may be zero per
    element.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    x, y, z = np.broadcast_arrays(x, y, z)
    x, y, z = x.copy(), y.copy(), z.copy()
    a0 = (x + y + z) / 3.0
    q = 404.0 * np.maximum(
        np.abs(a0 - x), np.maximum(np.abs(a0 - y), np.abs(a0 - z))
    )  # (3*eps)**(-1/6) ~ 404 for double precision
    a = a0.copy()
    pow4 = np.ones(a.shape, dtype=np.float64)
    active = np.ones(a.shape, dtype=bool)
    for _ in range(max_iter):
        active = pow4 * q >= np.abs(a)
        if not np.any(active):
            break
        sx = np.sqrt(x)
        sy = np.sqrt(y)
        sz = np.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = np.where(active, (x + lam) * 0.25, x)
        y = np.where(active, (y + lam) * 0.25, y)
        z = np.where(active, (z + lam) * 0.25, z)
        a = np.where(active, (a + lam) * 0.25, a)
        pow4 = np.where(active, pow4 * 0.25, pow4)
    return _rf_series(a, x, y, z)


def _rf_series(a, x, y, z):
    # After m duplications (a0 - x_orig)/4^m = a_m - x_m, so the series
    # variable X = (a0 - x_orig) * 4^-m / a_m equals (a_m - x_m)/a_m.
    X = (a - x) / a
    Y = (a - y) / a
    Z = -X - Y
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    s = 9240.0 - 924.0 * e2 + 385.0 * e2 * e2 + 660.0 * e3 - 630.0 * e2 * e3
    return s / (9240.0 * np.sqrt(a))


def pair_distortion(d1, d2, xs, ys):
    """Max |d1[xs_i, xs_j] - d2[ys_i, ys_j]| over all index pairs.

    xs, ys: parallel integer index arrays defining a correspondence.
    """
    a = d1[np.ix_(xs, xs)]
    b = d2[np.ix_(ys, ys)]
    return float(np.abs(a - b).max())


def best_reassignment(d1, d2, xs, ys, r, candidates):
    """Best replacement of ys[r] among candidates, judged by the row
    distortion max_s |d1[xs_r, xs_s] - d2[cand, ys_s]|.

    Returns (best_candidate, best_row_distortion).
    """
    row1 = d1[xs[r], xs]  # (k,)
    rows2 = d2[np.ix_(candidates, ys)]  # (c, k)
    dev = np.abs(rows2 - row1[None, :])
    # ignore the self column: replacing ys[r] changes that entry to 0 vs 0
    dev[:, r] = 0.0
    rowmax = dev.max(axis=1)
    i = int(np.argmin(rowmax))
    return int(candidates[i]), float(rowmax[i])


def min_torus_distance(delta, gram, shifts):
    """Min over integer shifts of sqrt((delta+s)^T gram (delta+s)).

    delta: (n, k) displacement rows; shifts: (m, k) translate candidates.
    Returns an array of n distances.
    """
    delta = np.asarray(delta, dtype=np.float64)
    v = delta[:, None, :] + shifts[None, :, :]
    q = np.einsum("nmi,ij,nmj->nm", v, gram, v)
    return np.sqrt(np.maximum(q.min(axis=1), 0.0))
