"""Classical special functions: Legendre and Gegenbauer polynomials, Bessel
J0/J1, Pochhammer symbols and the 3F2 series at unit argument.

Polynomials are evaluated by forward three-term recurrences, which are stable
on [-1, 1]. All polynomial routines accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import special as sp

from .errors import DivergentSeries, InvalidParameter, SlowConvergence

# Arguments this close outside [-1, 1] are treated as round-off and clamped.
_CLAMP_SLACK = 1e-12

MAX_SERIES_TERMS = 10**7


def _prepare(x):
    x = np.asarray(x, dtype=float)
    over = np.abs(x) > 1.0
    if np.any(over):
        x = np.where(over & (np.abs(x) <= 1.0 + _CLAMP_SLACK), np.sign(x), x)
    return x


def _check_degree(n):
    if int(n) != n or n < 0:
        raise InvalidParameter(f"polynomial degree must be a nonnegative integer, got {n!r}")
    return int(n)


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def legendre(n, x):
    """Legendre polynomial P_n(x) via Bonnet's recurrence."""
    n = _check_degree(n)
    x = _prepare(x)
    p_prev = np.ones_like(x)
    if n == 0:
        return _scalar_or_array(p_prev, x)
    p = x.copy()
    for m in range(1, n):
        p_prev, p = p, ((2 * m + 1) * x * p - m * p_prev) / (m + 1)
    return _scalar_or_array(p, x)


def legendre_table(n, x):
    """Array ``out[m] = P_m(x)`` for m = 0..n."""
    n = _check_degree(n)
    x = _prepare(x)
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = x
    for m in range(1, n):
        out[m + 1] = ((2 * m + 1) * x * out[m] - m * out[m - 1]) / (m + 1)
    return out


def gegenbauer(lam, n, x):
    """Gegenbauer polynomial C_n^lam(x) for lam > 0.

    Uses ``(m+1) C_{m+1} = 2(m+lam) x C_m - (m+2lam-1) C_{m-1}``, which for
    lam = 3/2 is ``(m+1) C_{m+1} = (2m+3) x C_m - (m+2) C_{m-1}``.
    """
    if not lam > 0:
        raise InvalidParameter(f"Gegenbauer parameter must be positive, got {lam!r}")
    n = _check_degree(n)
    x = _prepare(x)
    c_prev = np.ones_like(x)
    if n == 0:
        return _scalar_or_array(c_prev, x)
    c = 2.0 * lam * x
    for m in range(1, n):
        c_prev, c = c, (2.0 * (m + lam) * x * c - (m + 2.0 * lam - 1.0) * c_prev) / (m + 1)
    return _scalar_or_array(c, x)


def gegenbauer_table(lam, n, x):
    """Array ``out[m] = C_m^lam(x)`` for m = 0..n."""
    if not lam > 0:
        raise InvalidParameter(f"Gegenbauer parameter must be positive, got {lam!r}")
    n = _check_degree(n)
    x = _prepare(x)
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = 2.0 * lam * x
    for m in range(1, n):
        out[m + 1] = (2.0 * (m + lam) * x * out[m] - (m + 2.0 * lam - 1.0) * out[m - 1]) / (m + 1)
    return out


def gegenbauer_at_one(lam, n):
    """C_n^lam(1) = Gamma(2 lam + n) / (Gamma(2 lam) Gamma(n + 1))."""
    n = _check_degree(n)
    return math.exp(math.lgamma(2 * lam + n) - math.lgamma(2 * lam) - math.lgamma(n + 1))


def gegenbauer_defect(lam, n, u):
    """Return ``1 - C_n^lam(1 - u) / C_n^lam(1)`` without cancellation for small u.

    Expands around x = 1 through the terminating 2F1 representation
    ``C_n^lam(1-u) = C_n^lam(1) 2F1(-n, n+2lam; lam+1/2; u/2)``. Coefficients
    grow combinatorially with n, so callers should use it only near u = 0.
    """
    n = _check_degree(n)
    u = np.asarray(u, dtype=float)
    coeffs = []
    c = 1.0
    for j in range(n):
        c *= (-n + j) * (n + 2 * lam + j) / ((lam + 0.5 + j) * (j + 1) * 2.0)
        coeffs.append(c)
    # Horner on sum_{j>=1} coeffs[j-1] u^j
    acc = np.zeros_like(u)
    for c in reversed(coeffs):
        acc = (acc + c) * u
    return _scalar_or_array(-acc, u)


def bessel_j(order, x):
    """Bessel function of the first kind J_0 or J_1 for x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidParameter("bessel_j is defined here for x >= 0 only")
    if order == 0:
        val = sp.j0(x)
    elif order == 1:
        val = sp.j1(x)
    else:
        raise InvalidParameter(f"only orders 0 and 1 are supported, got {order!r}")
    return _scalar_or_array(val, x)


def pochhammer(a, k):
    """Rising factorial (a)_k = a (a+1) ... (a+k-1)."""
    if int(k) != k or k < 0:
        raise InvalidParameter(f"k must be a nonnegative integer, got {k!r}")
    out = 1.0
    for j in range(int(k)):
        out *= a + j
    return out


class SeriesResult(NamedTuple):
    value: float
    error: float
    terms: int


def _is_nonpositive_integer(a):
    return a <= 0 and float(a).is_integer()


def hypergeom_3f2_unit(a1, a2, a3, b1, b2, rel_tol=1e-14, max_terms=MAX_SERIES_TERMS):
    """Sum 3F2(a1, a2, a3; b1, b2; 1).

    The series converges absolutely when gamma = b1 + b2 - a1 - a2 - a3 > 0,
    with terms decaying like k^(-1-gamma). The partial sum S_K is completed by
    the asymptotic tail ``C [zeta(1+gamma, K) + c1 zeta(2+gamma, K)]``, with C
    and c1 taken from the Gamma-ratio expansion of the terms; the error is
    estimated from the change of the completed sum between K/2 and K.
    """
    a = (float(a1), float(a2), float(a3))
    b = (float(b1), float(b2))
    if any(_is_nonpositive_integer(bj) for bj in b):
        raise InvalidParameter("denominator parameters must not be nonpositive integers")

    terminating = [int(-ai) for ai in a if _is_nonpositive_integer(ai)]
    if terminating:
        last = min(terminating)
        terms = [1.0]
        t = 1.0
        for k in range(last):
            t *= (a[0] + k) * (a[1] + k) * (a[2] + k) / ((b[0] + k) * (b[1] + k) * (k + 1))
            terms.append(t)
        return SeriesResult(math.fsum(terms), 0.0, last + 1)

    gamma = b[0] + b[1] - sum(a)
    if gamma <= 0:
        raise DivergentSeries(f"3F2 at z=1 diverges for gamma = {gamma:g} <= 0")

    # t_k ~ C k^(-1-gamma) (1 + c1/k + c2/k^2) from the Stirling expansion of
    # log Gamma(k + a) - log Gamma(k)
    e1 = 0.5 * (sum(ai * (ai - 1) for ai in a) - sum(bj * (bj - 1) for bj in b))
    e2 = -(sum(ai * (ai - 1) * (2 * ai - 1) for ai in a)
           - sum(bj * (bj - 1) * (2 * bj - 1) for bj in b)) / 12.0
    c1, c2 = e1, e2 + 0.5 * e1 * e1

    log_front = sum(math.lgamma(bj) for bj in b) - sum(math.lgamma(ai) for ai in a)
    sign_front = 1.0
    for ai in a:
        sign_front *= math.copysign(1.0, math.gamma(ai)) if ai < 0 else 1.0

    def terms_in(lo, hi):
        # direct Gamma ratios per index, so no round-off drift accumulates
        k1 = np.arange(lo, hi, dtype=float) + 1.0
        log_t = np.full(k1.shape, log_front)
        sign = np.full(k1.shape, sign_front)
        for ai in a:
            r = sp.poch(k1, ai - 1.0)
            sign *= np.sign(r)
            log_t += np.log(np.abs(r))
        for bj in b:
            log_t -= np.log(sp.poch(k1, bj - 1.0))
        return sign * np.exp(log_t)

    def completed(partial, t_K, K):
        amp = t_K * K ** (1.0 + gamma) / (1.0 + c1 / K + c2 / K**2)
        tail = sp.zeta(1.0 + gamma, K) + c1 * sp.zeta(2.0 + gamma, K) + c2 * sp.zeta(3.0 + gamma, K)
        return partial + amp * tail

    K = 64
    block = terms_in(0, K + 1)
    # fsum keeps the partial sum exact to round-off regardless of length
    partial = math.fsum(block[:K])
    prev = completed(partial, block[K], K)
    while True:
        K_new = 2 * K
        block = terms_in(K, K_new + 1)
        partial = math.fsum((partial, math.fsum(block[:-1])))
        K = K_new
        est = completed(partial, block[-1], K)
        err = abs(est - prev)
        if err <= rel_tol * abs(est):
            return SeriesResult(float(est), float(err), K)
        if K >= max_terms:
            raise SlowConvergence(
                f"3F2 series did not reach rel_tol={rel_tol:g} within {max_terms} terms "
                f"(gamma={gamma:g}, error estimate {err:.3g})",
                partial=float(est),
                error=float(err),
            )
        prev = est


def buhring_limit(a1, a2, a3, b1, b2):
    """Coefficient of (1 - z)^gamma in 3F2(a; b; z) as z -> 1, for gamma < 0."""
    gamma = b1 + b2 - a1 - a2 - a3
    if gamma >= 0:
        raise InvalidParameter(f"Buhring limit needs gamma < 0, got {gamma:g}")
    args = (-gamma, b1, b2, a1, a2, a3)
    if any(_is_nonpositive_integer(x) for x in args):
        raise InvalidParameter("a Gamma argument is a nonpositive integer")
    return math.gamma(-gamma) * math.gamma(b1) * math.gamma(b2) / (
        math.gamma(a1) * math.gamma(a2) * math.gamma(a3)
    )
