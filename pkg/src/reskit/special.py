"""Digamma function for complex arguments in the right half-plane.

Evaluation strategy: apply the upward recurrence psi(z) = psi(z+1) - 1/z
until the argument's magnitude exceeds 10, then sum the asymptotic series

    psi(w) ~ ln w - 1/(2w) - sum_n B_{2n} / (2n w^{2n}).

With the series truncated after the w^{-14} term the neglected remainder is
below ~5e-17 at |w| = 10.5, comfortably inside the 1e-12 target this module
is held to on the line 1/2 + i x.
"""

from __future__ import annotations

import numpy as np

from .errors import InvariantViolation

__all__ = ["complex_digamma"]

# B_{2n}/(2n) for n = 1..7: coefficients of w^{-2n} in the asymptotic tail.
_ASYMPTOTIC_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

_RECURRENCE_RADIUS = 10.0


def complex_digamma(z):
    """Digamma psi(z) for scalar or array z with Re(z) > 0.

    Returns a complex scalar for scalar input, otherwise a complex array of
    the input shape.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    w = np.atleast_1d(arr).copy()
    if np.any(w.real <= 0.0):
        raise InvariantViolation("complex_digamma requires Re(z) > 0")

    acc = np.zeros_like(w)
    # |z| grows by at most 1 per step, so ceil(radius) steps always suffice
    # for Re(z) > 0.
    for _ in range(int(_RECURRENCE_RADIUS) + 1):
        mask = np.abs(w) <= _RECURRENCE_RADIUS
        if not mask.any():
            break
        acc[mask] -= 1.0 / w[mask]
        w[mask] += 1.0
    inv2 = 1.0 / (w * w)
    tail = np.zeros_like(w)
    for c in reversed(_ASYMPTOTIC_COEFFS):
        tail = (tail + c) * inv2
    out = acc + np.log(w) - 0.5 / w - tail
    if scalar:
        return complex(out[0])
    return out
