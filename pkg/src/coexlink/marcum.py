"""First-order Marcum Q-function.

Q1(a, b) = P[R > b] for R Rician with noncentrality a and unit per-dimension
variance. Evaluated by fixed high-order Gauss-Legendre quadrature of the
overflow-safe integrand z * i0e(a z) * exp(-(z-a)^2 / 2), with closed forms
and tail guards where they are exact to double precision. Absolute error is
below 1e-10 over the full nonnegative domain.
"""

from __future__ import annotations

import numpy as np
from scipy.special import i0e

from .errors import InputError

# beyond ~12 Gaussian widths the Rician tail mass is < 1e-31
_TAIL = 14.0
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(128)


def marcum_q1(a, b):
    """Q1(a, b), vectorized over numpy-broadcastable nonnegative arguments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise InputError("marcum_q1 arguments must be nonnegative")
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape, dtype=float)

    zero_b = b == 0
    zero_a = (a == 0) & ~zero_b
    hi = (a - b >= _TAIL) & ~zero_b          # whole distribution above b
    lo = (b - a >= _TAIL) & ~zero_b          # b beyond the upper tail
    mid = ~(zero_b | zero_a | hi | lo)

    out[zero_b] = 1.0
    out[zero_a] = np.exp(-0.5 * b[zero_a] ** 2)
    out[hi] = 1.0
    out[lo] = 0.0

    if np.any(mid):
        am = a[mid]
        bm = b[mid]
        upper = np.maximum(am, bm) + _TAIL
        half = 0.5 * (upper - bm)
        midpt = 0.5 * (upper + bm)
        z = midpt[..., None] + half[..., None] * _NODES      # (..., 128)
        # z * i0e(a z) * exp(-(z-a)^2/2) == Rician pdf; the shifted-square form
        # avoids the catastrophic cancellation of exp(az - (z^2+a^2)/2)
        integrand = z * i0e(am[..., None] * z) * np.exp(-0.5 * (z - am[..., None]) ** 2)
        out[mid] = np.clip(half * (integrand @ _WEIGHTS), 0.0, 1.0)

    if out.ndim == 0:
        return float(out)
    return out
