"""Local minimization of discrete energies over configurations on Gr(2,4).

The energy is written in terms of ``u_ij = 2 - |X_i^T X_j|_F^2`` (the squared
chordal distance), so it is a smooth function of the frame entries. Descent
steps move along the horizontal part of the Euclidean gradient and are
mapped back to frames with a QR retraction; step lengths follow Armijo
backtracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyKind, discrete_energy
from .errors import InvalidParameter, Singular
from .grassmann import orthonormalize_many
from .sampling import RandomStream, _as_stream, map_ordered, sample_uniform

SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 5000
    initial_step: float = 1e-2
    armijo_c: float = 1e-4
    shrink: float = 0.5
    grad_tol: float = 1e-8
    restarts: int = 4
    min_step: float = 1e-18

    def __post_init__(self):
        if self.max_iters < 1 or self.restarts < 1:
            raise InvalidParameter("max_iters and restarts must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.shrink < 1):
            raise InvalidParameter("armijo_c and shrink must lie in (0, 1)")
        if not (self.initial_step > 0 and self.grad_tol > 0):
            raise InvalidParameter("initial_step and grad_tol must be positive")


@dataclass
class OptimizeResult:
    config: np.ndarray
    energy: float
    grad_norm: float
    iters: int
    history: list = field(default_factory=list)
    converged: bool = False
    restart: int = 0


def _pair_terms(P, kind):
    M = np.einsum("iak,jal->ijkl", P, P)
    u = 2.0 - np.sum(M * M, axis=(-2, -1))
    n = len(P)
    np.fill_diagonal(u, np.inf)
    if np.min(u) < SINGULAR_TOL:
        raise Singular(f"two points are too close (u = {np.min(u):.3g})")
    if kind.is_log:
        fprime = -0.5 / u
    else:
        fprime = -0.5 * kind.s * u ** (-0.5 * kind.s - 1.0)
    fprime[np.arange(n), np.arange(n)] = 0.0
    return M, fprime


def energy_gradient(points, kind: EnergyKind) -> np.ndarray:
    """Euclidean gradient of the ordered-pair energy with respect to the frames.

    ``grad_i = sum_{j != i} 2 f'(u_ij) (-2 X_j X_j^T X_i)``, with
    ``f(u) = u^{-s/2}`` or ``f(u) = -log(u) / 2``.

    Raises
    ------
    Singular
        If some ``u_ij`` is below 1e-14.
    """
    P = np.asarray(points, dtype=float)
    M, fprime = _pair_terms(P, kind)
    # X_j X_j^T X_i = X_j M_ji
    coef = -4.0 * fprime
    return np.einsum("ij,jak,jikl->ial", coef, P, M)


def horizontal(points, G):
    """Project each gradient block onto the horizontal space: ``G - X X^T G``."""
    P = np.asarray(points, dtype=float)
    return G - P @ (np.swapaxes(P, -1, -2) @ G)


def gradient_check(points, kind: EnergyKind, h: float = 1e-6) -> float:
    """Max-norm relative difference between the analytic gradient and central differences."""
    P = np.array(points, dtype=float)
    G = energy_gradient(P, kind)
    fd = np.empty_like(P)
    for idx in np.ndindex(P.shape):
        orig = P[idx]
        P[idx] = orig + h
        ep = discrete_energy(P, kind)
        P[idx] = orig - h
        em = discrete_energy(P, kind)
        P[idx] = orig
        fd[idx] = (ep - em) / (2.0 * h)
    scale = np.max(np.abs(G))
    diff = np.max(np.abs(fd - G))
    if scale < 1e-12:
        return float(diff)
    return float(diff / scale)


def _safe_energy(P, kind):
    e = discrete_energy(P, kind)
    return e if math.isfinite(e) else math.inf


def _descend(P, kind, opt, restart):
    E = _safe_energy(P, kind)
    history = [(0, E)]
    step = opt.initial_step
    gnorm = math.inf
    converged = False
    it = 0
    for it in range(1, opt.max_iters + 1):
        H = horizontal(P, energy_gradient(P, kind))
        gnorm = float(np.sqrt(np.sum(H * H)))
        if gnorm <= opt.grad_tol:
            converged = True
            it -= 1
            break
        accepted = False
        while step >= opt.min_step:
            trial = orthonormalize_many(P - step * H)
            try:
                E_trial = _safe_energy(trial, kind)
            except Singular:
                E_trial = math.inf
            # Armijo sufficient decrease along the projected direction
            if E_trial <= E - opt.armijo_c * step * gnorm * gnorm:
                accepted = True
                break
            step *= opt.shrink
        if not accepted:
            break
        P, E = trial, E_trial
        history.append((it, E))
        step = min(2.0 * step, 1e3 * opt.initial_step)
    else:
        H = horizontal(P, energy_gradient(P, kind))
        gnorm = float(np.sqrt(np.sum(H * H)))
        converged = gnorm <= opt.grad_tol
    return OptimizeResult(P, E, gnorm, it, history, converged, restart)


def minimize_energy(N: int, kind: EnergyKind, opt: OptimizerConfig = OptimizerConfig(),
                    rng=0, initial=None) -> OptimizeResult:
    """Best local minimum over ``opt.restarts`` random starts.

    Restart r starts from N uniform points drawn from substream r of ``rng``
    (or from ``initial`` for restart 0 when given). The energy history of
    each descent is non-increasing.
    """
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    stream = _as_stream(rng)

    def run(r):
        if r == 0 and initial is not None:
            P0 = orthonormalize_many(np.asarray(initial, dtype=float))
            if len(P0) != N:
                raise InvalidParameter("initial configuration has the wrong size")
        else:
            P0 = sample_uniform(stream.substream(r), N)
        return _descend(P0, kind, opt, r)

    results = map_ordered(run, range(opt.restarts))
    return min(results, key=lambda r: (r.energy, r.restart))


__all__ = [
    "OptimizerConfig", "OptimizeResult", "energy_gradient", "horizontal",
    "gradient_check", "minimize_energy", "RandomStream",
]
