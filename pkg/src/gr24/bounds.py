"""Linear-programming lower bounds for discrete energies on Gr(2,4).

A function g on the square whose Fourier-Jacobi coefficients are nonnegative
away from tau = (0, 0), and which lies below the pair kernel, gives
``E(omega_N) >= g00 N^2 - g(1, 1) N`` for every N-point configuration. The
test functions used here are truncated Taylor expansions of the kernel
around a shifted argument, ``F(u) = sum_{k<=n} delta^k / k! c_{s,k} f_{s+2k}(u + delta)``
with ``u = 1 - xy`` the squared chordal distance.

Throughout this module ``s = 0`` encodes the logarithmic kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .energy import W_LOG, EnergyKind, continuous_energy
from .errors import InvalidParameter, OutOfRange
from .grassmann import pairwise_xi
from .kernel import (Partition, as_partition, fourier_jacobi_coefficient_result,
                     jacobi_grass_table, partitions_up_to)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_2d
from .special import pochhammer

OFFSET_RECT = (0.0, 2.0, 0.0, 1.0)


def csk(s: float, k: int) -> float:
    """Coefficient in ``f^{(k)}(u) = (-1)^k c_{s,k} u^{-s/2-k}``.

    1 for k = 0; ``(s/2)_k`` for s > 0; ``(k - 1)! / 2`` for the logarithmic
    kernel ``-log(u) / 2``.
    """
    if s < 0:
        raise InvalidParameter(f"s must be nonnegative, got {s!r}")
    if int(k) != k or k < 0:
        raise InvalidParameter(f"k must be a nonnegative integer, got {k!r}")
    if k == 0:
        return 1.0
    if s > 0:
        return pochhammer(s / 2.0, int(k))
    return math.factorial(int(k) - 1) / 2.0


def asn(s: float, n: int) -> float:
    """A_{s,n} = 2 / ((n + s/2)(n + s/2 - 1)), defined for n > 1 - s/2."""
    if not n > 1 - s / 2.0:
        raise InvalidParameter(f"A_(s,n) needs n > 1 - s/2 (s={s:g}, n={n})")
    m = n + s / 2.0
    return 2.0 / (m * (m - 1.0))


def default_order(s: float) -> int:
    """Smallest Taylor order allowed: 1 for s > 0, 2 for the log kernel."""
    return 1 if s > 0 else 2


def lower_bound_constant(s: float) -> float:
    """Next-order constant of the asymptotic LP lower bound.

    For 0 < s < 4 with n = 1 it multiplies ``N^{1+s/4}``; for the log kernel
    (s = 0, n = 2) it multiplies N.
    """
    if not 0 <= s < 4:
        raise OutOfRange(f"lower-bound constant is defined for 0 <= s < 4, got {s!r}")
    if s > 0:
        return -(asn(s, 1) * csk(s, 2) / (4.0 * (2.0 - s / 2.0)) + 1.0 + csk(s, 1))
    return -(asn(0.0, 2) * csk(0.0, 3) / (8.0 * 2.0) + csk(0.0, 1) + csk(0.0, 2) / 2.0)


def riesz_lower_bound_asymptote(N: float, s: float) -> float:
    """Asymptotic LP lower bound: ``W N^2 + C N^{1+s/4}``, or for s = 0
    ``W N^2 - N log N / 4 + C N``."""
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    C = lower_bound_constant(s)
    if s == 0:
        return W_LOG * N * N - 0.25 * N * math.log(N) + C * N
    W = continuous_energy(EnergyKind.riesz(s))
    return W * N * N + C * N ** (1.0 + s / 4.0)


@dataclass(frozen=True)
class LPBoundParams:
    """Parameters of the LP test function: exponent s (0 for log), Taylor order n, shift delta."""

    s: float
    n: int | None = None
    delta: float = 1.0

    def __post_init__(self):
        if self.s < 0:
            raise InvalidParameter("s must be nonnegative")
        if self.s >= 4:
            raise OutOfRange("the LP test function needs s < 4 (use the hypersingular bound)")
        if self.n is None:
            object.__setattr__(self, "n", default_order(self.s))
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter("n must be a positive integer")
        if not self.n > 1 - self.s / 2.0:
            raise InvalidParameter(f"n = {self.n} violates n > 1 - s/2 for s = {self.s:g}")
        if not self.delta > 0:
            raise InvalidParameter("delta must be positive")


def taylor_minorant(params: LPBoundParams, u):
    """``F_{s,n,delta}(u)``, the truncated shifted Taylor expansion of the kernel."""
    s, n, d = params.s, params.n, params.delta
    w = np.asarray(u, dtype=float) + d
    if s == 0:
        total = -0.5 * np.log(w)
    else:
        total = w ** (-s / 2.0)
    for k in range(1, n + 1):
        total = total + d**k / math.factorial(k) * csk(s, k) * w ** (-s / 2.0 - k)
    return total


def g_at_one(params: LPBoundParams) -> float:
    """Value of the test function on the diagonal, ``F(0)``."""
    s, n, d = params.s, params.n, params.delta
    head = -0.5 * math.log(d) if s == 0 else d ** (-s / 2.0)
    return head + d ** (-s / 2.0) * sum(csk(s, k) / math.factorial(k) for k in range(1, n + 1))


def g00_result(params: LPBoundParams, quad: QuadratureSpec = DEFAULT_SPEC):
    """``(1/4) int_{[-1,1]^2} F(1 - xy)`` and its error estimate."""
    res = integrate_2d(lambda U, V: taylor_minorant(params, U + V - U * V),
                       OFFSET_RECT, quad, singular_corner=(0.0, 0.0))
    # the half square xi_minus >= 0 carries half of the integral
    return 0.5 * res.value, 0.5 * res.err_estimate


@dataclass(frozen=True)
class LPBound:
    N: float
    s: float
    delta: float
    g00: float
    g11: float
    bound: float
    err_estimate: float = 0.0


def lp_bound_details(N: float, params: LPBoundParams, quad: QuadratureSpec = DEFAULT_SPEC) -> LPBound:
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    g00, err = g00_result(params, quad)
    g11 = g_at_one(params)
    return LPBound(float(N), params.s, params.delta, g00, g11, g00 * N * N - g11 * N, err * N * N)


def exact_lp_lower_bound(N: float, params: LPBoundParams, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Rigorous lower bound ``g00 N^2 - g(1,1) N`` on the N-point energy."""
    return lp_bound_details(N, params, quad).bound


def delta_grid(N: float, points: int = 20, span: float = 30.0) -> np.ndarray:
    """Logarithmic grid of shifts centred on N^{-1/2}."""
    c = N ** -0.5
    return np.geomspace(c / span, c * span, points)


def best_lp_lower_bound(N: float, s: float, n: int | None = None, grid=None,
                        quad: QuadratureSpec = DEFAULT_SPEC) -> tuple[LPBound, list[LPBound]]:
    """Best bound over a delta grid; returns the best row and all rows."""
    grid = delta_grid(N) if grid is None else np.asarray(grid, dtype=float)
    rows = [lp_bound_details(N, LPBoundParams(s, n, float(d)), quad) for d in grid]
    best = max(rows, key=lambda r: r.bound)
    return best, rows


def psi_hat_00(delta: float) -> float:
    """Mean of the hypersingular test function: ``log(1 + 2/delta) / (2 (1 + delta))``."""
    if not delta > 0:
        raise InvalidParameter("delta must be positive")
    return math.log1p(2.0 / delta) / (2.0 * (1.0 + delta))


def hypersingular_lower_bound(N: float, delta: float | None = None) -> float:
    """Lower bound ``psi00 N^2 - delta^{-2} N`` on the s = 4 energy; delta defaults to N^{-1/2}."""
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    if delta is None:
        delta = N ** -0.5
    return psi_hat_00(delta) * N * N - N / (delta * delta)


# ---------------------------------------------------------------------------
# moments and the energy-Fourier identity


def moments(points, taus) -> np.ndarray:
    """Moments ``sum_{i,j} P_tau(xi(P_i, P_j))`` over all ordered pairs, diagonal included."""
    P = np.asarray(points, dtype=float)
    xp, xm = pairwise_xi(P)
    table = jacobi_grass_table(list(taus), (xp, xm))
    return np.array([math.fsum(t.ravel()) for t in table])


def moment(points, tau) -> float:
    return float(moments(points, [as_partition(tau)])[0])


def _g_from_coefficients(coeffs):
    taus = list(coeffs)
    c = np.array([coeffs[t] for t in taus], dtype=float)

    def g(X, Y):
        return np.tensordot(c, jacobi_grass_table(taus, (X, Y)), axes=1)

    return g


def energy_fourier_identity_check(points, coeffs: dict, g: Callable | None = None) -> float:
    """Relative residual of ``E^g = g00 N^2 - g(1,1) N + sum_tau g_tau M_tau``.

    Parameters
    ----------
    coeffs : dict
        Fourier-Jacobi coefficients ``{tau: g_tau}`` of a polynomial g.
    g : callable, optional
        ``g(xi_plus, xi_minus)`` evaluated directly for the left side; by
        default g is rebuilt from ``coeffs``.
    """
    coeffs = {as_partition(t): float(v) for t, v in coeffs.items()}
    P = np.asarray(points, dtype=float)
    N = len(P)
    g_fn = g if g is not None else _g_from_coefficients(coeffs)
    xp, xm = pairwise_xi(P)
    vals = np.asarray(g_fn(xp, xm), dtype=float)
    off = ~np.eye(N, dtype=bool)
    lhs = math.fsum(vals[off])
    g00 = coeffs.get(Partition(0, 0), 0.0)
    g11 = math.fsum(coeffs.values())
    rest = [t for t in coeffs if t != (0, 0)]
    M = moments(P, rest) if rest else np.empty(0)
    rhs = math.fsum([g00 * N * N, -g11 * N] + [coeffs[t] * m for t, m in zip(rest, M)])
    return abs(lhs - rhs) / max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# coefficient sign report


class CoefficientRow(NamedTuple):
    tau: Partition
    coefficient: float
    err_estimate: float
    ok: bool


@dataclass
class CoefficientReport:
    s: float
    delta: float
    k_max: int
    threshold: float
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def min_nontrivial(self) -> float:
        vals = [r.coefficient for r in self.rows if r.tau != (0, 0)]
        return min(vals) if vals else math.nan


def shifted_kernel(s: float, delta: float) -> Callable:
    """``(1 - xy + delta)^{-s}``, or ``-log(1 - xy + delta)`` for s = 0."""
    if s == 0:
        return lambda X, Y: -np.log(1.0 - X * Y + delta)
    return lambda X, Y: (1.0 - X * Y + delta) ** (-s)


def coefficient_nonnegativity_report(s: float, delta: float, k_max: int,
                                     quad: QuadratureSpec = DEFAULT_SPEC) -> CoefficientReport:
    """Fourier-Jacobi coefficients of the shifted kernel for |tau| <= k_max.

    Every coefficient with tau != (0, 0) must be at least
    ``-10 * quad.abs_tol``; the mean coefficient has no sign constraint.
    """
    if not delta > 0:
        raise InvalidParameter("delta must be positive")
    if int(k_max) != k_max or not 0 <= k_max <= 12:
        raise InvalidParameter("k_max must be an integer in [0, 12]")
    f = shifted_kernel(s, delta)
    threshold = -10.0 * quad.abs_tol
    report = CoefficientReport(s, delta, int(k_max), threshold)
    for tau in partitions_up_to(int(k_max)):
        c, err = fourier_jacobi_coefficient_result(f, tau, quad, singular_corner=[(1.0, 1.0), (-1.0, -1.0)])
        ok = True if tau == (0, 0) else c >= threshold
        report.rows.append(CoefficientRow(tau, c, err, ok))
    return report
