"""Points of the Grassmannian Gr(2,4) and their pairwise invariants.

A point is stored as a 4x2 frame, a matrix with orthonormal columns spanning
the plane. A configuration of N points is an array of shape (N, 4, 2).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidParameter, RankDeficient

RANK_TOL = 1e-10
SAME_POINT_TOL = 1e-10


class PrincipalAngles(NamedTuple):
    """Principal angles 0 <= theta1 <= theta2 <= pi/2 between two planes."""

    theta1: float
    theta2: float


class XiPair(NamedTuple):
    """``xi_plus = cos(theta1 + theta2)``, ``xi_minus = cos(theta1 - theta2)``."""

    xi_plus: float
    xi_minus: float


def _check_frame_shape(a, name="frame"):
    a = np.asarray(a, dtype=float)
    if a.shape[-2:] != (4, 2):
        raise InvalidParameter(f"{name} must have shape (..., 4, 2), got {a.shape}")
    return a


def orthonormalize(raw) -> np.ndarray:
    """Return the canonical orthonormal frame spanning the columns of ``raw``.

    Uses QR with the diagonal of R forced positive, so that the result is a
    deterministic function of the input matrix.

    Raises
    ------
    RankDeficient
        If the smallest singular value of ``raw`` is at most 1e-10.
    """
    raw = _check_frame_shape(raw, "raw")
    if raw.ndim != 2:
        raise InvalidParameter("orthonormalize takes a single 4x2 matrix")
    if not np.all(np.isfinite(raw)):
        raise RankDeficient("matrix has non-finite entries")
    smin = np.linalg.svd(raw, compute_uv=False)[-1]
    if smin <= RANK_TOL:
        raise RankDeficient(f"columns are rank deficient (smallest singular value {smin:.3g})")
    q, r = np.linalg.qr(raw)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def orthonormalize_many(raw) -> np.ndarray:
    """Vectorized :func:`orthonormalize` over an array of shape (N, 4, 2)."""
    raw = _check_frame_shape(raw, "raw")
    if raw.ndim == 2:
        return orthonormalize(raw)
    if not np.all(np.isfinite(raw)):
        raise RankDeficient("matrix has non-finite entries")
    smin = np.linalg.svd(raw, compute_uv=False)[..., -1]
    if np.any(smin <= RANK_TOL):
        bad = int(np.argmin(smin))
        raise RankDeficient(f"frame {bad} is rank deficient (smallest singular value {smin[bad]:.3g})")
    q, r = np.linalg.qr(raw)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


def gram_deviation(X) -> float:
    """Max-norm distance of X^T X from the identity."""
    X = _check_frame_shape(X)
    g = np.swapaxes(X, -1, -2) @ X
    return float(np.max(np.abs(g - np.eye(2))))


def principal_angles(X, Y) -> PrincipalAngles:
    """Principal angles between span(X) and span(Y), sorted ascending."""
    X = _check_frame_shape(X, "X")
    Y = _check_frame_shape(Y, "Y")
    s = np.linalg.svd(X.T @ Y, compute_uv=False)
    # round-off can push singular values slightly above 1
    s = np.clip(s, 0.0, 1.0)
    t1, t2 = np.arccos(s)
    return PrincipalAngles(float(t1), float(t2))


def xi_pair(angles: PrincipalAngles) -> XiPair:
    t1, t2 = angles
    return XiPair(float(np.cos(t1 + t2)), float(np.cos(t1 - t2)))


def _xi_from_overlap(M):
    # singular values s1 >= s2 of the 2x2 overlap satisfy s1 s2 = |det M| and
    # s1^2 + s2^2 = |M|_F^2; then xi_minus = s1 s2 + sqrt((1-s1^2)(1-s2^2)),
    # xi_plus = s1 s2 - sqrt((1-s1^2)(1-s2^2))
    det = np.abs(M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0])
    fro2 = np.sum(M * M, axis=(-2, -1))
    root = np.sqrt(np.maximum(0.0, 1.0 - fro2 + det * det))
    xm = np.clip(det + root, 0.0, 1.0)
    xp = np.clip(det - root, -xm, xm)
    return xp, xm


def xi_from_frames(X, Y) -> XiPair:
    """(xi_plus, xi_minus) for two frames, computed from the SVD of X^T Y."""
    return xi_pair(principal_angles(X, Y))


def pairwise_xi(points):
    """Arrays ``(xi_plus, xi_minus)`` of shape (N, N) for a configuration.

    Uses the closed form in terms of the determinant and Frobenius norm of the
    2x2 overlaps, which avoids N^2 separate SVDs.
    """
    P = _check_frame_shape(points, "points")
    M = np.einsum("iak,jal->ijkl", P, P)
    return _xi_from_overlap(M)


def chordal_distance(X, Y) -> float:
    """sqrt(sin^2 theta1 + sin^2 theta2) = sqrt(2 - |X^T Y|_F^2)."""
    X = _check_frame_shape(X, "X")
    Y = _check_frame_shape(Y, "Y")
    M = X.T @ Y
    return float(np.sqrt(max(0.0, 2.0 - float(np.sum(M * M)))))


def chordal_distance_angles(angles: PrincipalAngles) -> float:
    t1, t2 = angles
    return float(np.sqrt(np.sin(t1) ** 2 + np.sin(t2) ** 2))


def chordal_distance_xi(xi: XiPair) -> float:
    return float(np.sqrt(max(0.0, 1.0 - xi.xi_plus * xi.xi_minus)))


def pairwise_chordal_sq(points):
    """Matrix of squared chordal distances ``2 - |X_i^T X_j|_F^2``."""
    P = _check_frame_shape(points, "points")
    M = np.einsum("iak,jal->ijkl", P, P)
    return np.maximum(0.0, 2.0 - np.sum(M * M, axis=(-2, -1)))


def projector_embedding(X) -> np.ndarray:
    """Orthogonal projector X X^T onto the plane, a symmetric 4x4 matrix."""
    X = _check_frame_shape(X)
    return X @ np.swapaxes(X, -1, -2)


def same_point(X, Y, tol=SAME_POINT_TOL) -> bool:
    """True if the frames span the same plane up to ``tol`` in chordal distance."""
    return chordal_distance(X, Y) <= tol


def plane_from_vectors(*vectors) -> np.ndarray:
    """Frame for the span of two vectors in R^4 (a small convenience)."""
    if len(vectors) != 2:
        raise InvalidParameter("need exactly two vectors")
    return orthonormalize(np.column_stack([np.asarray(v, dtype=float) for v in vectors]))
