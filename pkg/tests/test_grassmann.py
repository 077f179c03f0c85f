import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gr24.errors import MalformedPointSet, RankDeficient
from gr24.grassmann import (chordal_distance, chordal_distance_angles, chordal_distance_xi,
                            gram_deviation, orthonormalize, pairwise_chordal_sq, pairwise_xi,
                            plane_from_vectors, principal_angles, projector_embedding,
                            same_point, xi_from_frames, xi_pair, PrincipalAngles)
from gr24.pointset import (FORMAT_TAG, dumps_csv, dumps_json, loads_csv, loads_json,
                           read_points, write_points)

E = np.eye(4)


def span(*cols):
    return np.column_stack(cols)


def random_frame(rng):
    return orthonormalize(rng.standard_normal((4, 2)))


def random_orthogonal(rng, n=4):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def test_orthonormalize_examples(rng):
    base = span(E[0], E[1])
    assert np.array_equal(orthonormalize(base), base)
    assert np.allclose(orthonormalize([[2, 0], [0, 3], [0, 0], [0, 0]]), base, atol=1e-15)
    X = orthonormalize(rng.standard_normal((4, 2)))
    assert np.max(np.abs(X.T @ X - np.eye(2))) <= 1e-12
    assert np.all(np.diag(np.linalg.qr(X)[1]) != 0)


def test_orthonormalize_rejects_rank_deficient():
    with pytest.raises(RankDeficient):
        orthonormalize(span(E[0], 2 * E[0]))
    with pytest.raises(RankDeficient):
        orthonormalize(np.zeros((4, 2)))


def test_principal_angle_examples():
    X = span(E[0], E[1])
    assert np.allclose(principal_angles(X, X), (0, 0), atol=1e-7)
    assert np.allclose(principal_angles(X, span(E[2], E[3])), (math.pi / 2, math.pi / 2))
    for alpha in (0.1, 0.7, 1.3):
        Y = span(E[0], math.cos(alpha) * E[1] + math.sin(alpha) * E[2])
        assert np.allclose(principal_angles(X, Y), (0.0, alpha), atol=1e-12)


def test_xi_pair_examples():
    assert xi_pair(PrincipalAngles(0, 0)) == (1.0, 1.0)
    assert np.allclose(xi_pair(PrincipalAngles(0, math.pi / 2)), (0, 0), atol=1e-15)
    assert np.allclose(xi_pair(PrincipalAngles(math.pi / 4, math.pi / 4)), (0, 1), atol=1e-15)


def test_chordal_distance_examples():
    X = span(E[0], E[1])
    assert chordal_distance(X, X) == pytest.approx(0, abs=1e-7)
    assert chordal_distance(X, span(E[2], E[3])) == pytest.approx(math.sqrt(2))
    assert chordal_distance(X, span(E[0], E[2])) == pytest.approx(1.0)


def test_projector_examples(rng):
    assert np.allclose(projector_embedding(span(E[0], E[1])), np.diag([1, 1, 0, 0]))
    for _ in range(10):
        X, Y = random_frame(rng), random_frame(rng)
        PX, PY = projector_embedding(X), projector_embedding(Y)
        assert np.trace(PX) == pytest.approx(2.0)
        assert np.allclose(PX, PX.T)
        t1, t2 = principal_angles(X, Y)
        lhs = np.sum((PX - PY) ** 2)
        assert lhs == pytest.approx(2 * (math.sin(t1) ** 2 + math.sin(t2) ** 2), abs=1e-12)


def test_isometry_and_basis_invariance(rng):
    for _ in range(50):
        X, Y = random_frame(rng), random_frame(rng)
        Q = random_orthogonal(rng)
        R = random_orthogonal(rng, 2)
        ref = np.array(principal_angles(X, Y))
        assert np.allclose(principal_angles(Q @ X, Q @ Y), ref, atol=1e-9)
        assert np.allclose(principal_angles(X @ R, Y), ref, atol=1e-9)


def test_xi_relations(rng):
    for _ in range(100):
        X, Y = random_frame(rng), random_frame(rng)
        t1, t2 = principal_angles(X, Y)
        xp, xm = xi_from_frames(X, Y)
        assert 0 <= t1 <= t2 <= math.pi / 2
        assert 0 <= xm <= 1 and -xm <= xp <= xm
        assert xp * xm == pytest.approx(math.cos(t1) ** 2 + math.cos(t2) ** 2 - 1, abs=1e-12)
        d = chordal_distance(X, Y)
        assert chordal_distance_angles(PrincipalAngles(t1, t2)) == pytest.approx(d, abs=1e-12)
        assert chordal_distance_xi(xi_from_frames(X, Y)) == pytest.approx(d, abs=1e-9)


def test_pairwise_closed_form_matches_svd(rng):
    P = np.array([random_frame(rng) for _ in range(12)])
    xp, xm = pairwise_xi(P)
    D2 = pairwise_chordal_sq(P)
    for i in range(12):
        for j in range(12):
            a, b = xi_from_frames(P[i], P[j])
            assert xp[i, j] == pytest.approx(a, abs=1e-7)
            assert xm[i, j] == pytest.approx(b, abs=1e-7)
            assert D2[i, j] == pytest.approx(chordal_distance(P[i], P[j]) ** 2, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_frame(rng) for _ in range(3))
    assert chordal_distance(X, Z) <= chordal_distance(X, Y) + chordal_distance(Y, Z) + 1e-12


def test_same_point_uses_distance(rng):
    X = random_frame(rng)
    R = random_orthogonal(rng, 2)
    assert same_point(X, X @ R)
    assert not same_point(X, random_frame(rng))
    assert np.isclose(gram_deviation(plane_from_vectors(E[0], E[0] + E[1])), 0.0, atol=1e-15)


# ---------------------------------------------------------------------------
# point-set files


def test_json_and_csv_round_trip(tmp_path, rng):
    P = np.array([random_frame(rng) for _ in range(7)])
    meta = {"seed": 3, "sampler": "uniform"}
    for fmt in ("json", "csv"):
        path = tmp_path / f"pts.{fmt}"
        write_points(path, P, meta)
        Q, m = read_points(path)
        # readers re-orthonormalize, so agreement is to round-off only
        assert np.max(np.abs(P - Q)) <= 1e-15
        assert m["seed"] == 3 and m["sampler"] == "uniform"


def test_json_layout(rng):
    P = np.array([random_frame(rng)])
    doc = json.loads(dumps_json(P))
    assert doc["format"] == FORMAT_TAG
    assert np.array(doc["points"]).shape == (1, 4, 2)
    assert loads_csv(dumps_csv(P))[0].shape == (1, 4, 2)
    # 17 significant digits: the written text parses back to the exact doubles
    assert np.array_equal(np.array(doc["points"]), P)


@pytest.mark.parametrize("text", [
    "not json",
    '{"format": "other", "points": []}',
    '{"format": "gr24-frames-v1", "points": [[[1, 0], [0, 1], [0, 0]]]}',
    '{"format": "gr24-frames-v1", "points": [[[1, 0], [0, 1.01], [0, 0], [0, 0]]]}',
    '{"format": "gr24-frames-v1", "points": [[[1, 0], [0, NaN], [0, 0], [0, 0]]]}',
])
def test_malformed_json_rejected(text):
    with pytest.raises(MalformedPointSet):
        loads_json(text)


def test_malformed_csv_rejected():
    with pytest.raises(MalformedPointSet):
        loads_csv("x00,x10\n1,0\n")
    with pytest.raises(MalformedPointSet):
        loads_csv("x00,x10,x20,x30,x01,x11,x21,x31\n1,0,0,0,0,2,0,0\n")


def test_reader_reorthonormalizes_small_deviation(rng):
    X = random_frame(rng)
    doc = json.loads(dumps_json(X[None]))
    doc["points"][0][0][0] += 1e-8
    Q, _ = loads_json(json.dumps(doc))
    assert gram_deviation(Q[0]) <= 1e-14
