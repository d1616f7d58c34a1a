"""Associated Laguerre polynomials and Bessel functions of complex argument."""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .errors import EnvelopeError

BESSEL_ORDER_MAX = 200
BESSEL_ARG_MAX = 200.0
SERIES_RADIUS = 12.0


def laguerre(n, a, x):
    """Associated Laguerre polynomial ``L_n^(a)(x)`` by upward three-term recurrence.

    ``x`` may be any array; ``n`` and ``a`` are non-negative integers (or ``a``
    real > -1).
    """
    x = np.asarray(x)
    if n < 0:
        raise ValueError("n must be non-negative")
    prev = np.ones_like(x, dtype=np.result_type(x, float))
    if n == 0:
        return prev
    cur = 1.0 + a - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur


def _check_envelope(order, z):
    if abs(order) > BESSEL_ORDER_MAX:
        raise EnvelopeError(f"|l| = {abs(order)} exceeds the envelope {BESSEL_ORDER_MAX}")
    if z.size and np.abs(z).max() > BESSEL_ARG_MAX:
        raise EnvelopeError(f"|z| = {np.abs(z).max():.1f} exceeds the envelope {BESSEL_ARG_MAX}")


def _series(n, z):
    """Ascending series ``(z/2)^n sum_k (-z^2/4)^k / (k! (n+k)!)`` for n >= 0."""
    half = z / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = np.exp(n * np.log(half) - gammaln(n + 1))
    lead = np.where(z == 0, 1.0 if n == 0 else 0.0, lead)
    q = -half * half
    term = np.ones_like(z)
    total = np.ones_like(z)
    k = 0
    while True:
        k += 1
        term = term * q / (k * (n + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)) or k > 400:
            break
    return lead * total


def _miller(n, z):
    """Downward recurrence from a high start order, normalized by a generating-function sum.

    The normalization uses ``exp(-i s z) = J_0 + 2 sum_k (-i s)^k J_k`` with
    ``s = sign(Im z)`` (``s = 1`` on the real axis), the branch on which the
    left side is the large one, so no cancellation occurs.
    """
    absz = np.abs(z).max()
    start = int(max(n, absz) + 30 + 4 * np.sqrt(max(n, absz))) + 10
    start += start % 2
    s = np.where(z.imag >= 0, 1.0, -1.0)
    unit = -1j * s
    j_next = np.zeros_like(z)
    j_cur = np.full_like(z, 1e-300)
    want = np.zeros_like(z)
    norm = np.zeros_like(z)
    power = unit ** start
    for k in range(start, 0, -1):
        # j_cur holds J_k (unnormalized)
        if k == n:
            want = j_cur.copy()
        norm = norm + 2 * power * j_cur
        j_prev = (2 * k / z) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        power = power / unit
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            j_cur, j_next, norm, want = j_cur * scale, j_next * scale, norm * scale, want * scale
    if n == 0:
        want = j_cur
    norm = norm + j_cur
    return want * np.exp(-1j * s * z) / norm


def bessel_j_complex(l, z):
    """Bessel function of the first kind ``J_l(z)`` for integer ``l`` and complex ``z``.

    Ascending power series for ``|z| <= 12``, Miller downward recurrence
    beyond. Negative orders use ``J_{-l} = (-1)^l J_l``. Envelope:
    ``|l| <= 200``, ``|z| <= 200``.
    """
    l = int(l)
    z = np.asarray(z, dtype=complex)
    _check_envelope(l, z)
    n = abs(l)
    flat = z.ravel()
    out = np.empty_like(flat)
    small = np.abs(flat) <= SERIES_RADIUS
    if np.any(small):
        out[small] = _series(n, flat[small])
    if np.any(~small):
        out[~small] = _miller(n, flat[~small])
    if l < 0 and n % 2:
        out = -out
    out = out.reshape(z.shape)
    return out if out.ndim else complex(out[()])
