"""Adaptive Gauss-Legendre quadrature on rectangles and quarter planes.

The 2D engine subdivides a rectangle into cells kept in a priority queue by
error estimate. Each cell is integrated with a tensor Gauss-Legendre rule of
order ``base_rule_order`` and with the rule of half that order; the difference
is the cell error. Flagged singular corners are handled by geometric
refinement: the quadrant touching the corner is cut into L-shaped shells
whose sizes halve toward the corner, and the contribution of the innermost
remaining square is extrapolated from the geometric decay of the shells.

Integrands take two numpy arrays of equal shape and return an array of that
shape; they are always called with batches of points.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidParameter, QuadratureFailure

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]

# shells whose decay ratio is above this are treated as not geometric
_MAX_SHELL_RATIO = 0.999


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy policy for the integrators.

    Attributes
    ----------
    base_rule_order : int
        Gauss-Legendre points per axis per cell.
    max_depth : int
        Number of geometric refinement levels toward a singular corner, and
        the maximum bisection depth of an ordinary cell.
    abs_tol, rel_tol : float
        The target is ``max(abs_tol, rel_tol * |value|)``.
    max_cells : int
        Budget of cell evaluations in the adaptive loop.
    """

    base_rule_order: int = 24
    max_depth: int = 40
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_cells: int = 20000

    def __post_init__(self):
        if self.base_rule_order < 4:
            raise InvalidParameter("base_rule_order must be at least 4")
        if self.base_rule_order > 256:
            raise InvalidParameter("base_rule_order must be at most 256")
        if self.max_depth < 1:
            raise InvalidParameter("max_depth must be at least 1")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidParameter("tolerances must be positive")
        if self.max_cells < 1:
            raise InvalidParameter("max_cells must be positive")

    def tolerance(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    def with_tol(self, abs_tol=None, rel_tol=None) -> "QuadratureSpec":
        return replace(
            self,
            abs_tol=self.abs_tol if abs_tol is None else abs_tol,
            rel_tol=self.rel_tol if rel_tol is None else rel_tol,
        )


DEFAULT_SPEC = QuadratureSpec()


class IntegralResult(NamedTuple):
    value: float
    err_estimate: float
    cells_used: int


# ---------------------------------------------------------------------------
# Gauss-Legendre rules


def _legendre_and_derivative(n, x):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for m in range(1, n):
        p0, p1 = p1, ((2 * m + 1) * x * p1 - m * p0) / (m + 1)
    # derivative from P_n and P_{n-1}
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def _gauss_legendre_cached(n):
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    i = np.arange(1, n + 1)
    # Tricomi's initial approximation, refined by Newton's method
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5)) * (1 - (n - 1) / (8.0 * n**3))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    p, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # symmetrize to remove round-off asymmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_nodes(n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Nodes are the roots of P_n found by Newton iteration from Tricomi's
    initial guesses; the returned arrays are read-only and sorted ascending.
    """
    if int(n) != n or not 1 <= n <= 256:
        raise InvalidParameter(f"rule order must be an integer in [1, 256], got {n!r}")
    return _gauss_legendre_cached(int(n))


def _rule_on(n, a, b):
    x, w = gauss_legendre_nodes(n)
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), h * w


# ---------------------------------------------------------------------------
# 1D adaptive integration


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                 spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralResult:
    """Adaptive bisection with a Gauss-Legendre pair on [a, b]."""
    n_hi = spec.base_rule_order
    n_lo = max(2, n_hi // 2)

    def rule(lo, hi):
        xh, wh = _rule_on(n_hi, lo, hi)
        xl, wl = _rule_on(n_lo, lo, hi)
        vals = np.asarray(f(np.concatenate([xh, xl])), dtype=float)
        v_hi = float(np.dot(wh, vals[:n_hi]))
        v_lo = float(np.dot(wl, vals[n_hi:]))
        return v_hi, abs(v_hi - v_lo)

    v, e = rule(a, b)
    heap = [(-e, a, b, v, 0)]
    done = []
    evals = 1
    while True:
        total = math.fsum([c[3] for c in heap] + [c[3] for c in done])
        err = math.fsum([-c[0] for c in heap] + [-c[0] for c in done])
        if err <= spec.tolerance(total) or not heap or evals >= spec.max_cells:
            break
        ne, lo, hi, _, depth = heapq.heappop(heap)
        if depth >= 60:
            done.append((ne, lo, hi, _, depth))
            continue
        mid = 0.5 * (lo + hi)
        for l2, h2 in ((lo, mid), (mid, hi)):
            v2, e2 = rule(l2, h2)
            heapq.heappush(heap, (-e2, l2, h2, v2, depth + 1))
        evals += 2
    if err > 10 * spec.tolerance(total):
        raise QuadratureFailure(
            f"1D quadrature on [{a}, {b}] reached error {err:.3g}",
            result=IntegralResult(total, err, evals),
        )
    return IntegralResult(total, err, evals)


# ---------------------------------------------------------------------------
# 2D adaptive integration


class _Cell:
    __slots__ = ("x0", "x1", "y0", "y1", "depth", "level", "value", "error")

    def __init__(self, x0, x1, y0, y1, depth, level):
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1
        self.depth = depth
        # shell index toward a singular corner, or None for ordinary cells
        self.level = level
        self.value = 0.0
        self.error = 0.0


class _TensorRule:
    def __init__(self, n_hi):
        self.n_hi = n_hi
        self.n_lo = max(2, n_hi // 2)
        xh, wh = gauss_legendre_nodes(self.n_hi)
        xl, wl = gauss_legendre_nodes(self.n_lo)
        # nodes mapped to [0, 1]
        self.th, self.wh = 0.5 * (xh + 1.0), 0.5 * np.asarray(wh)
        self.tl, self.wl = 0.5 * (xl + 1.0), 0.5 * np.asarray(wl)
        self.Wh = np.outer(self.wh, self.wh).ravel()
        self.Wl = np.outer(self.wl, self.wl).ravel()

    def evaluate(self, f, cells):
        """Set value and error on each cell, with one batched integrand call."""
        if not cells:
            return
        x0 = np.array([c.x0 for c in cells])[:, None]
        dx = np.array([c.x1 - c.x0 for c in cells])[:, None]
        y0 = np.array([c.y0 for c in cells])[:, None]
        dy = np.array([c.y1 - c.y0 for c in cells])[:, None]
        nh, nl = self.n_hi, self.n_lo
        xh = x0 + dx * self.th
        yh = y0 + dy * self.th
        xl = x0 + dx * self.tl
        yl = y0 + dy * self.tl
        Xh = np.repeat(xh, nh, axis=1)
        Yh = np.tile(yh, (1, nh))
        Xl = np.repeat(xl, nl, axis=1)
        Yl = np.tile(yl, (1, nl))
        X = np.concatenate([Xh, Xl], axis=1)
        Y = np.concatenate([Yh, Yl], axis=1)
        vals = np.asarray(f(X, Y), dtype=float)
        if vals.shape != X.shape:
            vals = np.broadcast_to(vals, X.shape)
        area = (dx * dy).ravel()
        v_hi = area * (vals[:, : nh * nh] @ self.Wh)
        v_lo = area * (vals[:, nh * nh:] @ self.Wl)
        if not np.all(np.isfinite(v_hi)):
            raise QuadratureFailure("integrand returned non-finite values inside a cell")
        for c, vh, vl in zip(cells, v_hi, v_lo):
            c.value = float(vh)
            c.error = float(abs(vh - vl))


def _normalize_corners(rect, singular_corner):
    x0, x1, y0, y1 = rect
    if singular_corner is None:
        return []
    if isinstance(singular_corner, (tuple, list)) and len(singular_corner) == 2 and all(
        isinstance(c, (int, float, np.floating, np.integer)) for c in singular_corner
    ):
        corners = [tuple(singular_corner)]
    else:
        corners = [tuple(c) for c in singular_corner]
    out = []
    for cx, cy in corners:
        if cx not in (x0, x1) or cy not in (y0, y1):
            raise InvalidParameter(f"singular corner {(cx, cy)} is not a corner of {rect}")
        out.append((float(cx), float(cy)))
    return out


def _shell_cells(qx0, qx1, qy0, qy1, cx, cy, levels):
    """L-shaped shells of the quadrant toward corner (cx, cy)."""
    cells = []
    # work in offsets from the corner: a = |x - cx| in [0, wx], b likewise
    wx, wy = qx1 - qx0, qy1 - qy0
    sx = 1.0 if cx == qx0 else -1.0
    sy = 1.0 if cy == qy0 else -1.0

    def box(a0, a1, b0, b1, level):
        xa, xb = sorted((cx + sx * a0, cx + sx * a1))
        ya, yb = sorted((cy + sy * b0, cy + sy * b1))
        return _Cell(xa, xb, ya, yb, 0, level)

    for lev in range(levels):
        f_out = 0.5**lev
        f_in = 0.5 ** (lev + 1)
        ao, ai = wx * f_out, wx * f_in
        bo, bi = wy * f_out, wy * f_in
        cells.append(box(ai, ao, 0.0, bi, lev))
        cells.append(box(0.0, ai, bi, bo, lev))
        cells.append(box(ai, ao, bi, bo, lev))
    inner = box(0.0, wx * 0.5**levels, 0.0, wy * 0.5**levels, levels)
    return cells, inner


def integrate_2d(f: Integrand, rect: Sequence[float] = (-1.0, 1.0, -1.0, 1.0),
                 spec: QuadratureSpec = DEFAULT_SPEC, singular_corner=None) -> IntegralResult:
    """Integrate ``f`` over ``rect = (x0, x1, y0, y1)``.

    Parameters
    ----------
    f : callable
        Vectorized integrand ``f(X, Y)``.
    rect : tuple
        Integration rectangle.
    spec : QuadratureSpec
        Accuracy policy.
    singular_corner : (x, y) or list of (x, y), optional
        Corners of ``rect`` where ``f`` may be unbounded but integrable.

    Returns
    -------
    IntegralResult
        ``err_estimate`` sums the cell rule differences and the corner
        extrapolation uncertainty.

    Raises
    ------
    QuadratureFailure
        If the cell budget is exhausted with an error above ten times the
        requested tolerance.
    """
    x0, x1, y0, y1 = (float(v) for v in rect)
    if not (x1 > x0 and y1 > y0):
        raise InvalidParameter(f"degenerate rectangle {rect}")
    corners = _normalize_corners((x0, x1, y0, y1), singular_corner)
    rule = _TensorRule(spec.base_rule_order)

    cells = []
    corner_groups = []  # (shell cells by level, innermost square)
    if not corners:
        cells.append(_Cell(x0, x1, y0, y1, 0, None))
    else:
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        for qx0, qx1 in ((x0, xm), (xm, x1)):
            for qy0, qy1 in ((y0, ym), (ym, y1)):
                hit = [c for c in corners if c[0] in (qx0, qx1) and c[1] in (qy0, qy1)]
                if hit:
                    shells, inner = _shell_cells(qx0, qx1, qy0, qy1, hit[0][0], hit[0][1], spec.max_depth)
                    group = len(corner_groups)
                    for c in shells:
                        c.level = (group, c.level)
                    cells.extend(shells)
                    corner_groups.append(inner)
                else:
                    cells.append(_Cell(qx0, qx1, qy0, qy1, 0, None))

    rule.evaluate(f, cells)
    rule.evaluate(f, corner_groups)
    n_evaluated = len(cells) + len(corner_groups)

    def corner_tails():
        # geometric extrapolation of the part of each corner square left out
        vals, errs = [], []
        for g, inner in enumerate(corner_groups):
            levels = [0.0] * spec.max_depth
            for c in active_and_done():
                if c.level is not None and c.level[0] == g:
                    levels[c.level[1]] += c.value
            tail, terr = _extrapolate_shells(levels, inner)
            vals.append(tail)
            errs.append(terr)
        return vals, errs

    heap = []
    done = []

    def active_and_done():
        for _, _, c in heap:
            yield c
        yield from done

    counter = 0
    for c in cells:
        heapq.heappush(heap, (-c.error, counter, c))
        counter += 1

    while True:
        tails, tail_errs = corner_tails()
        total = math.fsum([c.value for c in active_and_done()] + tails)
        err = math.fsum([c.error for c in active_and_done()] + tail_errs)
        tol = spec.tolerance(total)
        if err <= tol or not heap or n_evaluated >= spec.max_cells:
            break
        # refine a batch of the worst cells per pass
        batch = []
        budget = max(1, min(64, (spec.max_cells - n_evaluated) // 4))
        while heap and len(batch) < budget:
            _, _, c = heapq.heappop(heap)
            if c.depth >= spec.max_depth:
                done.append(c)
                continue
            batch.append(c)
            if heap and -heap[0][0] < 0.25 * c.error:
                break
        children = []
        for c in batch:
            xm, ym = 0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1)
            for a, b in ((c.x0, xm), (xm, c.x1)):
                for cc, d in ((c.y0, ym), (ym, c.y1)):
                    children.append(_Cell(a, b, cc, d, c.depth + 1, c.level))
        rule.evaluate(f, children)
        n_evaluated += len(children)
        for c in children:
            heapq.heappush(heap, (-c.error, counter, c))
            counter += 1

    result = IntegralResult(float(total), float(err), n_evaluated)
    if err > 10 * tol:
        raise QuadratureFailure(
            f"2D quadrature did not converge: error {err:.3g} against tolerance {tol:.3g}",
            result=result,
        )
    return result


def _extrapolate_shells(levels, inner):
    """Estimate the integral over the innermost corner square.

    Shell integrals toward an integrable corner singularity decay roughly
    geometrically; the remainder after the last shell is ``S_L q / (1 - q)``
    with ``q = S_L / S_{L-1}``. The error is the change of the extrapolated
    total between the last two levels. When the decay is not geometric the
    direct rule value of the square is kept, with its own size as the error.
    """
    fallback = (inner.value, abs(inner.value) + inner.error)
    if len(levels) < 3:
        return fallback
    s2, s1, s0 = levels[-3], levels[-2], levels[-1]
    if s0 == 0.0 and s1 == 0.0:
        return 0.0, abs(inner.value) + inner.error
    if s1 == 0.0 or s2 == 0.0:
        return fallback
    q = s0 / s1
    q_prev = s1 / s2
    if not (0.0 < q < _MAX_SHELL_RATIO and 0.0 < q_prev < _MAX_SHELL_RATIO):
        return fallback
    tail = s0 * q / (1.0 - q)
    tail_prev = s1 * q_prev / (1.0 - q_prev)
    err = abs(s0 + tail - tail_prev)
    return tail, err


# ---------------------------------------------------------------------------
# semi-infinite integrals with Bessel-type decay


def _block_nodes(lo, hi, n, width=math.pi):
    """Gauss-Legendre nodes on [lo, hi] split into blocks of ``width``."""
    if hi <= lo:
        return np.empty(0), np.empty(0)
    nblk = max(1, int(math.ceil((hi - lo) / width - 1e-12)))
    edges = np.linspace(lo, hi, nblk + 1)
    x, w = gauss_legendre_nodes(n)
    h = 0.5 * np.diff(edges)[:, None]
    nodes = edges[:-1, None] + h * (x + 1.0)
    weights = h * w
    return nodes.ravel(), weights.ravel()


def integrate_semi_infinite_1d(f: Callable[[np.ndarray], np.ndarray],
                               spec: QuadratureSpec = DEFAULT_SPEC,
                               tail_bound: Callable[[float], float] | None = None,
                               tail_estimate: Callable[[float], float] | None = None,
                               split: float = 1.0, max_radius: float = 1e6) -> IntegralResult:
    """Integrate ``f`` over [0, inf).

    [0, split] is integrated adaptively; beyond it, blocks of width pi are
    added over doubling ranges until ``tail_bound(R)`` is below tolerance.
    ``tail_estimate(R)``, if given, is the asymptotic value of the
    integral beyond R and is added to the result; ``tail_bound`` must then
    bound the remainder of that estimate.
    """
    if tail_bound is None:
        raise InvalidParameter("a tail bound is required for semi-infinite integrals")
    inner = integrate_1d(f, 0.0, split, spec)
    n_hi = spec.base_rule_order // 2
    n_lo = max(2, n_hi // 2)
    parts, part_err = [inner.value], [inner.err_estimate]
    lo, width = split, math.pi
    evals = inner.cells_used
    while True:
        hi = lo + width
        xh, wh = _block_nodes(lo, hi, n_hi)
        xl, wl = _block_nodes(lo, hi, n_lo)
        vh = math.fsum(wh * f(xh))
        vl = math.fsum(wl * f(xl))
        parts.append(vh)
        part_err.append(abs(vh - vl))
        evals += len(xh) // n_hi
        lo = hi
        width *= 2.0
        total = math.fsum(parts)
        tol = spec.tolerance(total)
        bound = tail_bound(lo)
        if bound <= 0.5 * tol or lo >= max_radius:
            break
    tail = tail_estimate(lo) if tail_estimate is not None else 0.0
    total = math.fsum(parts + [tail])
    err = math.fsum(part_err) + bound
    result = IntegralResult(total, err, evals)
    if err > 10 * spec.tolerance(total):
        raise QuadratureFailure(f"semi-infinite integral tail bound {bound:.3g} too large", result=result)
    return result


def bessel_tail_bound(R: float, tail_exponent: float, prefactor: float = 1.0) -> float:
    """Bound on the integral over max(x, y) >= R of
    ``prefactor * J1(x)^2 J1(y)^2 / (x y (x^2 + y^2)^t)``.

    Uses ``x J1(x)^2 <= 2/pi`` on the large coordinate and
    ``integral_0^inf J1(y)^2 / y dy = 1/2`` on the other, for both halves.
    """
    t = tail_exponent
    return prefactor * (2.0 / math.pi) * R ** (-1.0 - 2.0 * t) / (1.0 + 2.0 * t)


SEMI_INFINITE_PARTS = ("inner", "strip", "far")


def integrate_semi_infinite_2d(f: Integrand | None, spec: QuadratureSpec = DEFAULT_SPEC,
                               tail_exponent: float = 1.0, prefactor: float = 1.0,
                               parts: Sequence[str] = SEMI_INFINITE_PARTS,
                               singular_origin: bool = True, block_order: int = 16,
                               max_radius: float = 4000.0, chunk: int = 2048,
                               separable=None) -> IntegralResult:
    """Integrate over [0, inf)^2 an integrand dominated by
    ``prefactor * J1(x)^2 J1(y)^2 / (x y (x^2 + y^2)^tail_exponent)``.

    The quarter plane is split at 1 into the inner box ``[0,1]^2`` (adaptive,
    origin flagged singular), the two strips where exactly one coordinate
    exceeds 1, and the far field where both do. ``parts`` selects which of
    these are included. Strips and far field are covered by max-norm shells
    of doubling radius built from Gauss-Legendre blocks of width pi, and
    evaluated as tensor products over 1D node arrays. Shells are added until
    :func:`bessel_tail_bound` falls below tolerance. If ``max_radius`` is
    reached first, the remaining tail is extrapolated from the geometric
    decay of the last shells, and the change of that extrapolation is used
    as its error.

    ``separable = (a, w)`` declares ``f(x, y) = a(x) a(y) w(x, y)``; the
    one-dimensional factor is then evaluated once per node and only ``w`` is
    evaluated on the tensor grid.
    """
    if separable is not None:
        a_fn, w_fn = separable
        if f is None:
            def f(X, Y):
                return a_fn(X) * a_fn(Y) * w_fn(X, Y)
    elif f is None:
        raise InvalidParameter("either f or separable must be given")
    parts = tuple(parts)
    bad = set(parts) - set(SEMI_INFINITE_PARTS)
    if bad:
        raise InvalidParameter(f"unknown parts {sorted(bad)}")
    values, errors = [], []
    cells = 0
    if "inner" in parts:
        inner = integrate_2d(f, (0.0, 1.0, 0.0, 1.0), spec,
                             singular_corner=(0.0, 0.0) if singular_origin else None)
        values.append(inner.value)
        errors.append(inner.err_estimate)
        cells += inner.cells_used
    want_strip = "strip" in parts
    want_far = "far" in parts
    if not (want_strip or want_far):
        return IntegralResult(math.fsum(values), math.fsum(errors), cells)

    n_hi = block_order
    # a half-order rule is too coarse on the first blocks to give a useful
    # error estimate, so the comparison rule keeps three quarters of the nodes
    n_lo = max(2, (3 * n_hi) // 4)
    # nodes on [0, 1] for the short side of the strips
    m_hi = spec.base_rule_order
    m_lo = max(2, m_hi // 2)

    def unit_nodes(m):
        xa, wa = _rule_on(m, 0.0, 0.5)
        xb, wb = _rule_on(m, 0.5, 1.0)
        return np.concatenate([xa, xb]), np.concatenate([wa, wb])

    u_hi, uw_hi = unit_nodes(m_hi)
    u_lo, uw_lo = unit_nodes(m_lo)

    def quad_form(xs, wx, ys, wy):
        # sum_ij wx_i wy_j f(x_i, y_j), chunked over x
        if len(xs) == 0 or len(ys) == 0:
            return 0.0
        acc = []
        step = max(1, chunk * chunk // max(1, len(ys)))
        if separable is not None:
            wx = wx * a_fn(xs)
            wy = wy * a_fn(ys)
            g = w_fn
        else:
            g = f
        for s in range(0, len(xs), step):
            X, Y = np.meshgrid(xs[s:s + step], ys, indexing="ij")
            acc.append(float(wx[s:s + step] @ (g(X, Y) @ wy)))
        return math.fsum(acc)

    def shell(r0, r1, order_nodes):
        """Strip and far contributions from max(x, y) in [r0, r1]."""
        (ux, uw), n = order_nodes
        new_x, new_w = _block_nodes(r0, r1, n)
        old_x, old_w = _block_nodes(1.0, r0, n)
        strip = far = 0.0
        if want_strip:
            # x in [r0, r1], y in [0, 1], doubled by symmetry of the region
            strip = quad_form(new_x, new_w, ux, uw) + quad_form(ux, uw, new_x, new_w)
        if want_far:
            far = (quad_form(new_x, new_w, np.concatenate([old_x, new_x]), np.concatenate([old_w, new_w]))
                   + quad_form(old_x, old_w, new_x, new_w))
        return strip + far, len(new_x)

    shell_vals, shell_errs = [], []
    r0, width = 1.0, math.pi
    extrap_prev = None
    tail_val, tail_err = 0.0, 0.0
    while True:
        r1 = r0 + width
        v_hi, nn = shell(r0, r1, ((u_hi, uw_hi), n_hi))
        v_lo, _ = shell(r0, r1, ((u_lo, uw_lo), n_lo))
        shell_vals.append(v_hi)
        shell_errs.append(abs(v_hi - v_lo))
        cells += nn // n_hi
        r0 = r1
        width = r0 - 1.0  # doubling radii measured from 1
        partial = math.fsum(values + shell_vals)
        tol = spec.tolerance(partial)
        bound = bessel_tail_bound(r0, tail_exponent, prefactor)
        if bound <= 0.5 * tol:
            tail_val, tail_err = 0.0, bound
            break
        if len(shell_vals) >= 3:
            q = shell_vals[-1] / shell_vals[-2] if shell_vals[-2] != 0 else 0.0
            extrap = shell_vals[-1] * q / (1.0 - q) if 0.0 < q < _MAX_SHELL_RATIO else None
            if extrap is not None and extrap_prev is not None:
                tail_val = extrap
                tail_err = min(bound, abs(shell_vals[-1] + extrap - extrap_prev))
            else:
                tail_val, tail_err = 0.0, bound
            extrap_prev = extrap
        else:
            tail_val, tail_err = 0.0, bound
        if r0 >= max_radius:
            break
    values.extend(shell_vals)
    errors.extend(shell_errs)
    total = math.fsum(values + [tail_val])
    err = math.fsum(errors + [tail_err])
    result = IntegralResult(total, err, cells)
    if err > 10 * spec.tolerance(total):
        raise QuadratureFailure(
            f"semi-infinite 2D integral error {err:.3g} exceeds tolerance", result=result
        )
    return result
