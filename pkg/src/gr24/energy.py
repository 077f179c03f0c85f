"""Discrete, continuous and expected pair energies for planes in R^4.

Pair kernels are ``d_c^{-s}`` (Riesz) and ``-log d_c`` (logarithmic), with
``d_c^2 = 1 - xi_plus xi_minus``. Discrete energies sum over ordered pairs.

Integrals over the relative position of two planes are written in offsets
from the diagonal, ``u = 1 - xi_plus`` in [0, 2] and ``v = 1 - xi_minus`` in
[0, 1], so that ``1 - xi_plus xi_minus = u + v - u v`` is computed without
cancellation and the kernel singularity sits at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter, OutOfRange, SlowConvergence
from .grassmann import pairwise_chordal_sq
from .kernel import kernel_deficit, kernel_dim, kernel_eval
from .quadrature import (DEFAULT_SPEC, IntegralResult, QuadratureSpec, integrate_2d,
                         integrate_semi_infinite_2d)
from .special import bessel_j, hypergeom_3f2_unit

# Catalan's constant G = sum (-1)^n / (2n+1)^2 (OEIS A006752)
CATALAN = 0.915965594177219015
# Euler-Mascheroni constant (OEIS A001620)
EULER_GAMMA = 0.5772156649015329

COINCIDENCE_TOL = 1e-12

# region of (u, v) covering xi_minus in [0, 1] and xi_plus in [-1, 1]
OFFSET_RECT = (0.0, 2.0, 0.0, 1.0)


@dataclass(frozen=True)
class EnergyKind:
    """Pair interaction: Riesz with exponent ``s > 0``, or logarithmic (``s is None``)."""

    s: float | None = None

    def __post_init__(self):
        if self.s is not None:
            if not (self.s > 0 and math.isfinite(self.s)):
                raise InvalidParameter(f"Riesz exponent must be positive, got {self.s!r}")
            object.__setattr__(self, "s", float(self.s))

    @classmethod
    def riesz(cls, s: float) -> "EnergyKind":
        return cls(float(s))

    @classmethod
    def log(cls) -> "EnergyKind":
        return cls(None)

    @classmethod
    def from_s(cls, s) -> "EnergyKind":
        """``s = 0`` (or None) selects the logarithmic kernel."""
        return cls.log() if s is None or s == 0 else cls.riesz(s)

    @property
    def is_log(self) -> bool:
        return self.s is None

    @property
    def s_code(self) -> float:
        """The exponent, with 0 standing for the logarithmic kernel."""
        return 0.0 if self.s is None else self.s

    def pair_kernel_sq(self, d2):
        """Kernel as a function of the squared chordal distance."""
        d2 = np.asarray(d2, dtype=float)
        if self.is_log:
            return -0.5 * np.log(d2)
        return d2 ** (-0.5 * self.s)

    def __str__(self):
        return "log" if self.is_log else f"riesz(s={self.s:g})"


RIESZ2 = EnergyKind.riesz(2.0)
LOG = EnergyKind.log()


def discrete_energy(points, kind: EnergyKind) -> float:
    """Sum of the pair kernel over ordered pairs i != j.

    Returns ``inf`` if two points are closer than 1e-12 in chordal distance.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 3 or P.shape[1:] != (4, 2):
        raise InvalidParameter(f"points must have shape (N, 4, 2), got {P.shape}")
    n = len(P)
    if n < 2:
        return 0.0
    d2 = pairwise_chordal_sq(P)
    iu = np.triu_indices(n, 1)
    pair = d2[iu]
    if np.any(pair < COINCIDENCE_TOL**2):
        return math.inf
    vals = kind.pair_kernel_sq(pair)
    # fsum is exact to round-off and independent of pair ordering
    return 2.0 * math.fsum(vals)


def _check_continuous(kind):
    if not kind.is_log and kind.s >= 4:
        raise OutOfRange(f"the continuous energy diverges for s = {kind.s:g} >= 4")


def _offset_gap(U, V):
    return U + V - U * V


def continuous_energy_quadrature(kind: EnergyKind, quad: QuadratureSpec = DEFAULT_SPEC) -> IntegralResult:
    """Continuous energy of the uniform measure as a 2D integral.

    Riesz: ``(1/4) int_{[-1,1]^2} (1 - xy)^{-s/2}``; log:
    ``-(1/8) int_{[-1,1]^2} log(1 - xy)``. Computed on the half square
    xi_minus >= 0, which carries half of the integral by the symmetry
    (x, y) -> (-x, -y).
    """
    _check_continuous(kind)
    if kind.is_log:
        res = integrate_2d(lambda U, V: np.log(_offset_gap(U, V)), OFFSET_RECT, quad, (0.0, 0.0))
        scale = -0.25
    else:
        s = kind.s
        res = integrate_2d(lambda U, V: _offset_gap(U, V) ** (-0.5 * s), OFFSET_RECT, quad, (0.0, 0.0))
        scale = 0.5
    return IntegralResult(scale * res.value, abs(scale) * res.err_estimate, res.cells_used)


W_LOG = 1.0 - math.pi**2 / 16.0 - math.log(2.0) / 2.0


def continuous_energy(kind: EnergyKind, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Minimal continuous energy W, attained by the uniform measure.

    Riesz: ``3F2(1/2, s/4 + 1/2, s/4; 3/2, 3/2; 1)``. Log: the closed form
    ``1 - pi^2/16 - log(2)/2``. When the series converges too slowly
    (s close to 4) the 2D integral is used instead.

    Raises
    ------
    OutOfRange
        For Riesz exponents s >= 4.
    """
    return _continuous_energy_cached(kind, quad)


@lru_cache(maxsize=256)
def _continuous_energy_cached(kind, quad):
    _check_continuous(kind)
    if kind.is_log:
        return W_LOG
    s = kind.s
    try:
        return hypergeom_3f2_unit(0.5, s / 4 + 0.5, s / 4, 1.5, 1.5).value
    except SlowConvergence:
        return continuous_energy_quadrature(kind, quad).value


def _check_expected_kind(kind):
    if not kind.is_log and kind.s > 4:
        raise OutOfRange(
            f"expected energies are only provided for s <= 4, got s = {kind.s:g}"
        )


def expected_dpp_energy_result(k: int, kind: EnergyKind, quad: QuadratureSpec = DEFAULT_SPEC,
                               route: str = "subtract") -> IntegralResult:
    """Expected energy of the harmonic ensemble with d_k points, with error.

    ``route="subtract"`` uses ``W N^2 - (1/2) int K^2 (1 - xy)^{-s/2}`` (and
    ``W N^2 + (1/4) int K^2 log(1 - xy)`` for the log kernel). ``route="deficit"``
    integrates ``(N^2 - K^2)`` against the kernel directly, which is the only
    form available at s = 4 and serves as an independent check otherwise.
    The integrals run over xi_minus in [0, 1], xi_plus in [-1, 1].
    """
    _check_expected_kind(kind)
    N = float(kernel_dim(k))
    if route not in ("subtract", "deficit"):
        raise InvalidParameter(f"unknown route {route!r}")
    if not kind.is_log and kind.s == 4:
        route = "deficit"

    def weight(U, V):
        g = _offset_gap(U, V)
        if kind.is_log:
            return np.log(g)
        return g ** (-0.5 * kind.s)

    if route == "subtract":
        W = continuous_energy(kind, quad)

        def f(U, V):
            K = kernel_eval(k, (1.0 - U, 1.0 - V))
            return K * K * weight(U, V)

        res = integrate_2d(f, OFFSET_RECT, quad, (0.0, 0.0))
        coef = 0.25 if kind.is_log else -0.5
        value = W * N * N + coef * res.value
        return IntegralResult(value, abs(coef) * res.err_estimate, res.cells_used)

    def f(U, V):
        D = kernel_deficit(k, U, V)
        return D * (2.0 * N - D) * weight(U, V)

    res = integrate_2d(f, OFFSET_RECT, quad, (0.0, 0.0))
    coef = -0.25 if kind.is_log else 0.5
    return IntegralResult(coef * res.value, abs(coef) * res.err_estimate, res.cells_used)


@lru_cache(maxsize=256)
def _expected_cached(k, kind, quad, route):
    return expected_dpp_energy_result(k, kind, quad, route)


def expected_dpp_energy_exact(k: int, kind: EnergyKind, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Expected discrete energy of the degree-k harmonic ensemble (N = d_k points).

    Raises
    ------
    OutOfRange
        For Riesz exponents s > 4.
    """
    return _expected_cached(int(k), kind, quad, "subtract").value


# ---------------------------------------------------------------------------
# asymptotic constants


def _j1_sq_over_x(x):
    # J1(x)^2 / x with the removable singularity at 0
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 0.0, bessel_j(1, safe) ** 2 / safe)


def _bessel_separable(t):
    def w(X, Y):
        return (X * X + Y * Y) ** (-t)
    return _j1_sq_over_x, w


def _one_minus_a_sq(x):
    """``1 - (2 J1(x) / x)^2`` with a power series on [0, 1]."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    small = x <= 1.0
    if np.any(small):
        z = (x[small] / 2.0) ** 2
        # 1 - a = sum_{m>=1} (-1)^(m+1) z^m / (m! (m+1)!)
        term = np.ones_like(z)
        one_minus_a = np.zeros_like(z)
        for m in range(1, 16):
            term = term * (-z) / (m * (m + 1))
            one_minus_a -= term
        a = 1.0 - one_minus_a
        out[small] = one_minus_a * (1.0 + a)
    big = ~small
    if np.any(big):
        a = 2.0 * bessel_j(1, x[big]) / x[big]
        out[big] = 1.0 - a * a
    return out


def _c4_inner_integrand(X, Y):
    # (x^2 y^2 - 16 J1(x)^2 J1(y)^2) / (x y (x^2 + y^2)^2), written as
    # x y (1 - A(x) A(y)) / (x^2 + y^2)^2 with A = (2 J1 / x)^2
    bx = _one_minus_a_sq(X)
    by = _one_minus_a_sq(Y)
    return X * Y * (bx + by - bx * by) / (X * X + Y * Y) ** 2


@dataclass(frozen=True)
class C4Parts:
    inner: float
    far: float
    strip: float
    value: float
    err_estimate: float


def c4_parts(quad: QuadratureSpec = DEFAULT_SPEC) -> C4Parts:
    """The three integrals in the hypersingular next-order constant.

    ``inner`` is over [0,1]^2, ``far`` over [1, inf)^2 and ``strip`` over
    [1, inf) x [0, 1].
    """
    return _c4_parts_cached(quad)


@lru_cache(maxsize=16)
def _c4_parts_cached(quad):
    inner = integrate_2d(_c4_inner_integrand, (0.0, 1.0, 0.0, 1.0), quad, (0.0, 0.0))

    sep = _bessel_separable(2.0)
    far = integrate_semi_infinite_2d(None, quad, tail_exponent=2.0, parts=("far",), separable=sep)
    strips = integrate_semi_infinite_2d(None, quad, tail_exponent=2.0, parts=("strip",), separable=sep)
    strip = 0.5 * strips.value
    value = 7.0 * math.log(2.0) / 4.0 + 2.0 * inner.value - 32.0 * far.value - 64.0 * strip
    err = 2.0 * inner.err_estimate + 32.0 * far.err_estimate + 32.0 * strips.err_estimate
    return C4Parts(inner.value, far.value, strip, value, err)


def c2_closed_form() -> float:
    """Closed form of the s = 2 constant in terms of Catalan's constant."""
    return -(2.0**3.5) * (4.0 - 24.0 * CATALAN + 3.0 * math.pi) / (48.0 * math.pi)


def c_log_closed_form() -> float:
    return (1.0 + 2.0 * CATALAN) / math.pi + 0.25 - EULER_GAMMA + math.log(2.0) / 4.0


def dpp_asymptotic_constant_result(kind: EnergyKind, quad: QuadratureSpec = DEFAULT_SPEC) -> IntegralResult:
    """Next-order constant of the expected ensemble energy, with error estimate.

    Riesz s < 4: ``2^{2+3s/4} int_0^inf int_0^inf J1(x)^2 J1(y)^2 / (x y (x^2+y^2)^{s/2})``.
    Log: closed form in Catalan's and Euler's constants. s = 4: the combination
    assembled in :func:`c4_parts`.
    """
    return _constant_cached(kind, quad)


@lru_cache(maxsize=64)
def _constant_cached(kind, quad):
    if kind.is_log:
        return IntegralResult(c_log_closed_form(), 0.0, 0)
    s = kind.s
    if s > 4:
        raise OutOfRange(f"no asymptotic constant for s = {s:g} > 4")
    if s == 4:
        p = c4_parts(quad)
        return IntegralResult(p.value, p.err_estimate, 0)
    t = s / 2.0
    res = integrate_semi_infinite_2d(None, quad, tail_exponent=t, singular_origin=True,
                                     separable=_bessel_separable(t))
    scale = 2.0 ** (2.0 + 0.75 * s)
    return IntegralResult(scale * res.value, scale * res.err_estimate, res.cells_used)


def dpp_asymptotic_constant(kind: EnergyKind, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    return dpp_asymptotic_constant_result(kind, quad).value


def hypersingular_leading_coefficient() -> float:
    """Volume of the unit ball in R^4 over the volume of Gr(2,4): (pi^2/2) / (2 pi^2)."""
    return (math.pi**2 / 2.0) / (2.0 * math.pi**2)


def dpp_energy_asymptote(N: float, kind: EnergyKind, quad: QuadratureSpec = DEFAULT_SPEC,
                         constant: float | None = None) -> float:
    """Two-term asymptote of the expected ensemble energy at N points.

    Riesz s < 4: ``W N^2 - C N^{1+s/4}``; log: ``W N^2 - N log N / 4 + C N``;
    s = 4: ``N^2 log N / 4 + C N^2``.
    """
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    C = dpp_asymptotic_constant(kind, quad) if constant is None else constant
    if kind.is_log:
        return W_LOG * N * N - 0.25 * N * math.log(N) + C * N
    s = kind.s
    if s == 4:
        return hypersingular_leading_coefficient() * N * N * math.log(N) + C * N * N
    if s > 4:
        raise OutOfRange(f"no asymptote for s = {s:g} > 4")
    return continuous_energy(kind, quad) * N * N - C * N ** (1.0 + s / 4.0)
