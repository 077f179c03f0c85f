"""Random points on Gr(2,4): uniform samples, the harmonic ensemble, and
Monte Carlo estimators.

All randomness comes from :class:`RandomStream`, a counter-based Philox
generator keyed by a 64-bit seed. Substreams are derived from the seed and an
index, so replication m always sees the same numbers regardless of how
replications are scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import linalg, stats

from .energy import EnergyKind, discrete_energy
from .errors import (DegenerateStep, InvalidParameter, RankDeficient,
                     RejectionBudgetExceeded)
from .grassmann import _xi_from_overlap, orthonormalize, orthonormalize_many, pairwise_xi
from .kernel import kernel_dim, kernel_eval


class RandomStream:
    """Seeded Philox stream with reproducible substreams."""

    def __init__(self, seed: int, path: tuple = ()):
        if int(seed) != seed or not 0 <= seed < 2**64:
            raise InvalidParameter("seed must be an integer in [0, 2^64)")
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def substream(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + (int(index),))

    def spawn(self, n: int) -> list["RandomStream"]:
        return [self.substream(i) for i in range(n)]

    def normal(self, size):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, path={self.path})"


def _as_stream(rng) -> RandomStream:
    if isinstance(rng, RandomStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RandomStream(int(rng))
    raise InvalidParameter("rng must be a RandomStream or an integer seed")


def sample_uniform(rng, size: int | None = None) -> np.ndarray:
    """Uniform random plane(s): orthonormalized 4x2 Gaussian matrices.

    Returns one frame, or an array of shape (size, 4, 2).
    """
    rng = _as_stream(rng)
    if size is None:
        while True:
            try:
                return orthonormalize(rng.normal((4, 2)))
            except RankDeficient:
                continue
    while True:
        try:
            return orthonormalize_many(rng.normal((int(size), 4, 2)))
        except RankDeficient:
            continue


def sample_anisotropic(rng, size: int, scale: float = 5.0) -> np.ndarray:
    """Deliberately biased sampler: Gaussian frames with one stretched row.

    The span of such a matrix is not invariant under rotations, so its
    pair statistics deviate from the uniform law. Used as a negative control.
    """
    rng = _as_stream(rng)
    G = rng.normal((int(size), 4, 2))
    G[:, 0, :] *= scale
    return orthonormalize_many(G)


@dataclass(frozen=True)
class DppOptions:
    max_rejections_per_point: int = 10**6
    degeneracy_floor: float = 1e-10
    max_restarts: int = 10

    def __post_init__(self):
        if self.max_rejections_per_point < 1 or not self.degeneracy_floor > 0 or self.max_restarts < 0:
            raise InvalidParameter("DPP options must be positive")


class DppDraw(NamedTuple):
    points: np.ndarray
    proposals: np.ndarray  # number of proposals used for each point
    restarts: int


def _kernel_against(k, cand, accepted):
    """K(x, y) for candidate frames (B, 4, 2) against accepted frames (i, 4, 2)."""
    M = np.einsum("bak,jal->bjkl", cand, accepted)
    xp, xm = _xi_from_overlap(M)
    return kernel_eval(k, (xp, xm))


def _draw_once(k, rng, opts):
    N = kernel_dim(k)
    pts = np.empty((N, 4, 2))
    L = np.zeros((N, N))
    proposals = np.zeros(N, dtype=np.int64)
    floor = opts.degeneracy_floor * N
    for i in range(N):
        used = 0
        # conditional density K_i(x, x) / (N - i); the envelope is K(x, x) = N,
        # so the expected number of proposals is N / (N - i)
        batch = min(4096, int(2 * N / (N - i)) + 8)
        while True:
            if used >= opts.max_rejections_per_point:
                raise RejectionBudgetExceeded(
                    f"point {i} rejected {used} proposals (budget {opts.max_rejections_per_point})"
                )
            b = min(batch, opts.max_rejections_per_point - used)
            cand = sample_uniform(rng, b)
            coin = rng.uniform(b)
            if i == 0:
                cond = np.full(b, float(N))
                lvec = None
            else:
                kx = _kernel_against(k, cand, pts[:i])
                lvec = linalg.solve_triangular(L[:i, :i], kx.T, lower=True, check_finite=False)
                cond = N - np.sum(lvec * lvec, axis=0)
            hits = np.nonzero(coin * N < cond)[0]
            if hits.size:
                j = int(hits[0])
                used += j + 1
                kii = float(cond[j])
                if kii < floor:
                    raise DegenerateStep(f"conditional kernel {kii:.3g} below floor at point {i}")
                pts[i] = cand[j]
                if i > 0:
                    L[i, :i] = lvec[:, j]
                L[i, i] = math.sqrt(kii)
                proposals[i] = used
                break
            used += b
    return pts, proposals


def sample_harmonic_dpp_draw(k: int, rng, opts: DppOptions = DppOptions()) -> DppDraw:
    """One draw of the degree-k harmonic ensemble, with proposal counts.

    Points are added one at a time. Given accepted points x_1..x_i, the next
    point has density proportional to the conditional kernel
    ``K_i(x, x) = N - |L^{-1} k_x|^2``, where ``k_x = (K(x, x_j))_j`` and L
    is the Cholesky factor of the kernel matrix of the accepted points.
    Uniform proposals are accepted with probability ``K_i(x, x) / N``.
    A degenerate step restarts the whole draw.
    """
    rng = _as_stream(rng)
    restarts = 0
    while True:
        try:
            pts, proposals = _draw_once(k, rng, opts)
            return DppDraw(pts, proposals, restarts)
        except DegenerateStep:
            restarts += 1
            if restarts > opts.max_restarts:
                raise


def sample_harmonic_dpp(k: int, rng, opts: DppOptions = DppOptions()) -> np.ndarray:
    """Configuration of d_k points from the degree-k harmonic ensemble."""
    return sample_harmonic_dpp_draw(k, rng, opts).points


@dataclass(frozen=True)
class SamplerSpec:
    """Which configurations to sample: ``kind`` is "uniform" (``size`` = N) or "dpp" (``size`` = k)."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in ("uniform", "dpp"):
            raise InvalidParameter(f"unknown sampler {self.kind!r}")
        if self.size < 1:
            raise InvalidParameter("sampler size must be positive")

    @property
    def n_points(self) -> int:
        return self.size if self.kind == "uniform" else kernel_dim(self.size)

    def draw(self, rng, opts: DppOptions = DppOptions()) -> np.ndarray:
        if self.kind == "uniform":
            return sample_uniform(rng, self.size)
        return sample_harmonic_dpp(self.size, rng, opts)


class MCResult(NamedTuple):
    mean: float
    stderr: float
    M: int
    n_infinite: int


def worker_count() -> int:
    """Worker threads from GR24_THREADS; 1 when unset."""
    raw = os.environ.get("GR24_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidParameter(f"GR24_THREADS must be an integer, got {raw!r}") from None


def map_ordered(fn: Callable, items, workers: int | None = None) -> list:
    """Map preserving input order, optionally across threads."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def mc_expected_energy(sampler: SamplerSpec, kind: EnergyKind, M: int, rng,
                       opts: DppOptions = DppOptions(), workers: int | None = None) -> MCResult:
    """Mean and standard error of the discrete energy over M independent draws.

    Replication m uses substream m of ``rng``. Draws with infinite energy
    are excluded from the mean and counted in ``n_infinite``.
    """
    if M < 2:
        raise InvalidParameter("M must be at least 2")
    stream = _as_stream(rng)

    def one(m):
        return discrete_energy(sampler.draw(stream.substream(m), opts), kind)

    energies = np.array(map_ordered(one, range(M), workers))
    finite = np.isfinite(energies)
    vals = energies[finite]
    n_inf = int(M - finite.sum())
    if len(vals) < 2:
        return MCResult(float(vals.mean()) if len(vals) else math.nan, math.inf, M, n_inf)
    mean = math.fsum(vals) / len(vals)
    var = math.fsum((vals - mean) ** 2) / (len(vals) - 1)
    return MCResult(mean, math.sqrt(var / len(vals)), M, n_inf)


class ChiSquareResult(NamedTuple):
    statistic: float
    p_value: float
    dof: int
    counts: np.ndarray


def triangle_to_square(xi_plus, xi_minus):
    """Map the triangle ``|xi_plus| <= xi_minus <= 1`` onto the unit square.

    Under the uniform law on the triangle the images ``xi_minus^2`` and
    ``(xi_plus + xi_minus) / (2 xi_minus)`` are independent and uniform, so
    the cells of a regular grid are equiprobable.
    """
    xp = np.asarray(xi_plus, dtype=float)
    xm = np.asarray(xi_minus, dtype=float)
    a = xm * xm
    safe = np.where(xm > 0, xm, 1.0)
    b = np.where(xm > 0, (xp + xm) / (2.0 * safe), 0.5)
    return np.clip(a, 0.0, 1.0), np.clip(b, 0.0, 1.0)


def triangle_chi_square(xi_plus, xi_minus, bins: int = 20) -> ChiSquareResult:
    """Chi-square test of (xi_plus, xi_minus) samples against the uniform triangle law."""
    a, b = triangle_to_square(xi_plus, xi_minus)
    ia = np.minimum((a * bins).astype(int), bins - 1)
    ib = np.minimum((b * bins).astype(int), bins - 1)
    counts = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    n = counts.sum()
    expected = n / (bins * bins)
    stat = float(np.sum((counts - expected) ** 2) / expected)
    dof = bins * bins - 1
    return ChiSquareResult(stat, float(stats.chi2.sf(stat, dof)), dof, counts)


def pair_xi_samples(M: int, rng, sampler: Callable | None = None):
    """(xi_plus, xi_minus) of M independent pairs from ``sampler(rng, size)``."""
    rng = _as_stream(rng)
    sampler = sample_uniform if sampler is None else sampler
    A = sampler(rng, M)
    B = sampler(rng, M)
    Mx = np.einsum("nak,nal->nkl", A, B)
    return _xi_from_overlap(Mx)


def pair_angle_histogram(M: int, rng, sampler: Callable | None = None, bins: int = 20) -> ChiSquareResult:
    """Goodness of fit of uniform pair positions on a 20 x 20 grid of the triangle."""
    if M < 10**4:
        raise InvalidParameter("M must be at least 10^4 for the chi-square test")
    xp, xm = pair_xi_samples(M, rng, sampler)
    return triangle_chi_square(xp, xm, bins)


def close_pair_count(points, radius: float = 0.2) -> int:
    """Ordered pairs i != j at chordal distance below ``radius``."""
    xp, xm = pairwise_xi(points)
    d2 = 1.0 - xp * xm
    n = len(points)
    off = ~np.eye(n, dtype=bool)
    return int(np.sum((d2 < radius * radius) & off))
