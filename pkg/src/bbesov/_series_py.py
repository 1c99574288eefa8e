"""Pure-numpy implementation of the batched zonal-series recurrence.

This is the import-time fallback for the compiled extension; both expose
the same ``zonal_series`` entry point.
"""

import numpy as np

BACKEND = "python"


def zonal_series(coeffs, nu, w, a2, out=None):
    """Evaluate sum_k coeffs[k] * S_k at many point pairs.

    S_k is the extended zonal harmonic Z_k(x, y) written in the scaled
    variables w = x . y and a2 = |x|^2 |y|^2, computed by the three-term
    recurrence

        S_0 = 1
        S_1 = (2 nu + 2) w
        S_k = ((k + nu)/k) * (2 w S_{k-1} - c_k a2 S_{k-2})

    with c_2 = 2 and c_k = (k + 2 nu - 2)/(k + nu - 2) for k >= 3,
    where nu = (n - 2)/2.

    Parameters
    ----------
    coeffs : (K+1,) float array
        Series coefficients (degree 0 .. K).
    nu : float
        (n - 2)/2 for ambient dimension n.
    w, a2 : (N,) float arrays
        Per-pair dot products and squared norm products.
    out : (N,) float array, optional
        Accumulator; allocated if omitted.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    a2 = np.ascontiguousarray(a2, dtype=np.float64)
    if out is None:
        out = np.zeros_like(w)
    K = coeffs.shape[0] - 1
    s_prev = np.ones_like(w)          # S_0
    out += coeffs[0] * s_prev
    if K == 0:
        return out
    s_cur = (2.0 * nu + 2.0) * w      # S_1
    out += coeffs[1] * s_cur
    for k in range(2, K + 1):
        ck = 2.0 if k == 2 else (k + 2.0 * nu - 2.0) / (k + nu - 2.0)
        s_next = ((k + nu) / k) * (2.0 * w * s_cur - ck * a2 * s_prev)
        out += coeffs[k] * s_next
        s_prev, s_cur = s_cur, s_next
    return out
