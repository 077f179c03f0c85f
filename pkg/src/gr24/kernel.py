"""Zonal polynomials of Gr(2,4) and the reproducing kernel of the harmonic
ensemble.

Eigenspaces of the Laplace-Beltrami operator are indexed by partitions
tau = (tau1, tau2) with tau1 >= tau2 >= 0. The zonal polynomial of tau, as a
function of (xi_plus, xi_minus), is a symmetrized product of Legendre
polynomials. All inner products use Lebesgue measure on the full square
[-1, 1]^2, under which a zonal polynomial has squared norm 4 / d_tau.
"""

from __future__ import annotations

from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import InvalidParameter
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_2d
from .special import gegenbauer_defect, gegenbauer_table, legendre_table


class Partition(NamedTuple):
    tau1: int
    tau2: int

    @property
    def degree(self) -> int:
        return self.tau1 + self.tau2


def as_partition(tau) -> Partition:
    t1, t2 = tau
    if int(t1) != t1 or int(t2) != t2 or not (t1 >= t2 >= 0):
        raise InvalidParameter(f"invalid partition {tau!r}: need integers tau1 >= tau2 >= 0")
    return Partition(int(t1), int(t2))


def partition_dim(tau) -> int:
    """Dimension d_tau of the eigenspace indexed by ``tau``."""
    t1, t2 = as_partition(tau)
    return (2 - (t2 == 0)) * (2 * (t1 + t2) + 1) * (2 * (t1 - t2) + 1)


def partitions_up_to(k: int) -> list[Partition]:
    """All partitions of degree at most k: by degree, then by decreasing tau1."""
    if int(k) != k or k < 0:
        raise InvalidParameter(f"k must be a nonnegative integer, got {k!r}")
    out = []
    for deg in range(int(k) + 1):
        for t2 in range(0, deg // 2 + 1):
            t1 = deg - t2
            out.append(Partition(t1, t2))
    return out


def nontrivial_partitions_up_to(k: int) -> list[Partition]:
    return [t for t in partitions_up_to(k) if t != (0, 0)]


def _check_k(k):
    if int(k) != k or k < 1:
        raise InvalidParameter(f"kernel degree must be a positive integer, got {k!r}")
    return int(k)


def kernel_dim(k: int) -> int:
    """d_k = (k+1)^2 (k^2 + 2k + 2) / 2, the number of points of the ensemble."""
    k = _check_k(k)
    return (k + 1) ** 2 * (k * k + 2 * k + 2) // 2


def _split_xi(xi):
    if isinstance(xi, tuple) and len(xi) == 2:
        x, y = xi
    else:
        arr = np.asarray(xi, dtype=float)
        x, y = arr[..., 0], arr[..., 1]
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _out(val, x):
    return float(val) if np.ndim(val) == 0 else val


def jacobi_grass(tau, xi):
    """Zonal polynomial ``(P_a(x) P_b(y) + P_a(y) P_b(x)) / 2`` with
    a = tau1 + tau2, b = tau1 - tau2 and ``xi = (x, y)``."""
    t1, t2 = as_partition(tau)
    x, y = _split_xi(xi)
    a, b = t1 + t2, t1 - t2
    Lx = legendre_table(a, x)
    Ly = legendre_table(a, y)
    val = 0.5 * (Lx[a] * Ly[b] + Ly[a] * Lx[b])
    return _out(val, x)


def jacobi_grass_table(taus: Iterable, xi) -> np.ndarray:
    """Stack of zonal polynomials for several partitions sharing Legendre tables."""
    taus = [as_partition(t) for t in taus]
    x, y = _split_xi(xi)
    top = max((t.degree for t in taus), default=0)
    Lx = legendre_table(top, x)
    Ly = legendre_table(top, y)
    out = np.empty((len(taus),) + np.broadcast(x, y).shape)
    for i, t in enumerate(taus):
        a, b = t.degree, t.tau1 - t.tau2
        out[i] = 0.5 * (Lx[a] * Ly[b] + Ly[a] * Lx[b])
    return out


def jacobi_norm_sq(tau) -> float:
    """Squared norm of the zonal polynomial over the full square [-1, 1]^2.

    With a = tau1 + tau2 and b = tau1 - tau2 and Legendre norms 2/(2n+1),
    the symmetrized product has norm ``(1 + delta_ab)/2 * 4/((2a+1)(2b+1))``,
    which equals ``4 / d_tau``.
    """
    t1, t2 = as_partition(tau)
    a, b = t1 + t2, t1 - t2
    cross = 1.0 if a == b else 0.0
    return 0.5 * (1.0 + cross) * 4.0 / ((2 * a + 1) * (2 * b + 1))


def kernel_eval(k: int, xi):
    """Reproducing kernel of the degree-k harmonic space at ``xi = (x, y)``:
    ``C_k(x) C_k(y) + C_{k-1}(x) C_{k-1}(y)`` with C = C^{3/2}."""
    k = _check_k(k)
    x, y = _split_xi(xi)
    Cx = gegenbauer_table(1.5, k, x)
    Cy = gegenbauer_table(1.5, k, y)
    val = Cx[k] * Cy[k] + Cx[k - 1] * Cy[k - 1]
    return _out(val, x)


def kernel_eval_brute(k: int, xi):
    """Partition-sum oracle ``sum_{|tau| <= k} d_tau P_tau(xi)``."""
    k = _check_k(k)
    taus = partitions_up_to(k)
    dims = np.array([partition_dim(t) for t in taus], dtype=float)
    table = jacobi_grass_table(taus, xi)
    val = np.tensordot(dims, table, axes=1)
    return _out(val, _split_xi(xi)[0])


# Offsets below this use the expansion at 1 for the deficit
_DEFICIT_SWITCH = 0.5


def kernel_deficit(k: int, u, v):
    """``K_k(1, 1) - K_k(1 - u, 1 - v)`` evaluated without cancellation.

    Near the diagonal the kernel is close to d_k and the difference loses
    digits; there the Gegenbauer values are expanded around 1. Offsets are
    in ``u = 1 - x``, ``v = 1 - y``.
    """
    k = _check_k(k)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    N = kernel_dim(k)
    out = np.empty(u.shape)
    near = (u + v) < _DEFICIT_SWITCH
    if np.any(near):
        un, vn = u[near], v[near]
        total = np.zeros(un.shape)
        for n in (k, k - 1):
            c1 = (n + 1) * (n + 2) / 2.0
            du = gegenbauer_defect(1.5, n, un)
            dv = gegenbauer_defect(1.5, n, vn)
            # c1^2 (1 - (1 - du)(1 - dv)) = c1^2 (du + dv - du dv)
            total += c1 * c1 * (du + dv - du * dv)
        out[near] = total
    far = ~near
    if np.any(far):
        out[far] = N - kernel_eval(k, (1.0 - u[far], 1.0 - v[far]))
    return _out(out, u)


def fourier_jacobi_coefficient(g: Callable, tau, quad: QuadratureSpec = DEFAULT_SPEC,
                               singular_corner=None) -> float:
    """Generalized Fourier-Jacobi coefficient ``<g, P_tau> / |P_tau|^2``.

    The inner product is over the full square [-1, 1]^2; for tau = (0, 0)
    this is the mean value ``(1/4) integral g``.
    """
    return fourier_jacobi_coefficient_result(g, tau, quad, singular_corner)[0]


def fourier_jacobi_coefficient_result(g, tau, quad=DEFAULT_SPEC, singular_corner=None):
    """As :func:`fourier_jacobi_coefficient`, also returning the error estimate."""
    tau = as_partition(tau)
    norm = jacobi_norm_sq(tau)
    if tau == (0, 0):
        integrand = g
    else:
        def integrand(X, Y):
            return g(X, Y) * jacobi_grass(tau, (X, Y))
    res = integrate_2d(integrand, (-1.0, 1.0, -1.0, 1.0), quad, singular_corner=singular_corner)
    return res.value / norm, res.err_estimate / norm


def kernel_coefficients(k: int) -> dict:
    """Fourier-Jacobi coefficients of ``K_k / d_k``: ``d_tau / d_k`` for |tau| <= k."""
    N = kernel_dim(k)
    return {t: partition_dim(t) / N for t in partitions_up_to(k)}


def integer_kernel_at_one(k: int) -> int:
    """K_k(1,1) in exact integer arithmetic from C_n^{3/2}(1) = (n+1)(n+2)/2."""
    k = _check_k(k)
    a = (k + 1) * (k + 2) // 2
    b = k * (k + 1) // 2
    return a * a + b * b


__all__ = [
    "Partition", "as_partition", "partition_dim", "partitions_up_to",
    "nontrivial_partitions_up_to", "kernel_dim", "jacobi_grass", "jacobi_grass_table",
    "jacobi_norm_sq", "kernel_eval", "kernel_eval_brute", "kernel_deficit",
    "fourier_jacobi_coefficient", "fourier_jacobi_coefficient_result",
    "kernel_coefficients", "integer_kernel_at_one",
]
