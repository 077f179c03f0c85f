import math

import numpy as np
import pytest

from gr24.errors import InvalidParameter
from gr24.grassmann import xi_from_frames
from gr24.kernel import (fourier_jacobi_coefficient, integer_kernel_at_one,
                         jacobi_grass, jacobi_grass_table, jacobi_norm_sq, kernel_coefficients,
                         kernel_deficit, kernel_dim, kernel_eval, kernel_eval_brute,
                         nontrivial_partitions_up_to, partition_dim, partitions_up_to)
from gr24.quadrature import gauss_legendre_nodes
from gr24.sampling import RandomStream, pair_xi_samples


def tensor_integral(f, n=40):
    """Integral over [-1, 1]^2 with an n x n Gauss-Legendre product rule."""
    x, w = gauss_legendre_nodes(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return float(np.sum(np.outer(w, w) * f(X, Y)))


def test_partition_examples():
    assert partition_dim((0, 0)) == 1
    assert partition_dim((1, 0)) == 9
    assert partition_dim((1, 1)) == 10
    assert partitions_up_to(0) == [(0, 0)]
    assert partitions_up_to(1) == [(0, 0), (1, 0)]
    assert partitions_up_to(2) == [(0, 0), (1, 0), (2, 0), (1, 1)]
    assert (0, 0) not in nontrivial_partitions_up_to(3)
    with pytest.raises(InvalidParameter):
        partition_dim((0, 1))


def test_kernel_dim():
    assert kernel_dim(1) == 10
    assert kernel_dim(2) == 45
    assert kernel_dim(6) == 1225
    for k in range(1, 31):
        assert kernel_dim(k) == sum(partition_dim(t) for t in partitions_up_to(k))
        assert kernel_dim(k) == (k + 1) ** 2 * (k * k + 2 * k + 2) // 2
        assert integer_kernel_at_one(k) == kernel_dim(k)
        assert kernel_eval(k, (1.0, 1.0)) == pytest.approx(kernel_dim(k), rel=1e-13)


def test_jacobi_examples(rng):
    x, y = rng.uniform(-1, 1, (2, 30))
    assert np.all(jacobi_grass((0, 0), (x, y)) == 1.0)
    assert np.allclose(jacobi_grass((1, 0), (x, y)), x * y)
    assert np.allclose(jacobi_grass((1, 1), (x, y)), (3 * x**2 + 3 * y**2 - 2) / 4)
    table = jacobi_grass_table(partitions_up_to(4), (x, y))
    for i, t in enumerate(partitions_up_to(4)):
        assert np.allclose(table[i], jacobi_grass(t, (x, y)))
    # array input with a trailing axis of size 2
    pts = np.stack([x, y], axis=-1)
    assert np.allclose(jacobi_grass((2, 1), pts), jacobi_grass((2, 1), (x, y)))


def test_norms_and_orthogonality():
    taus = partitions_up_to(5)
    assert jacobi_norm_sq((0, 0)) == 4.0
    assert jacobi_norm_sq((1, 0)) == pytest.approx(4 / 9)
    assert jacobi_norm_sq((1, 1)) == pytest.approx(2 / 5)
    for i, a in enumerate(taus):
        assert jacobi_norm_sq(a) == pytest.approx(4 / partition_dim(a))
        for b in taus[i:]:
            val = tensor_integral(lambda X, Y: jacobi_grass(a, (X, Y)) * jacobi_grass(b, (X, Y)))
            expected = jacobi_norm_sq(a) if a == b else 0.0
            assert val == pytest.approx(expected, abs=1e-9)


def test_kernel_examples(rng):
    x, y = rng.uniform(-1, 1, (2, 30))
    assert np.allclose(kernel_eval(1, (x, y)), 9 * x * y + 1)
    k2 = (225 * x**2 * y**2 - 45 * x**2 - 45 * y**2 + 9) / 4 + 9 * x * y
    assert np.allclose(kernel_eval(2, (x, y)), k2)
    assert np.allclose(kernel_eval_brute(1, (x, y)), 1 + 9 * x * y)
    assert kernel_eval_brute(2, (1.0, 1.0)) == pytest.approx(45)


def test_closed_form_equals_partition_sum(rng):
    x, y = rng.uniform(-1, 1, (2, 1000))
    for k in range(1, 9):
        diff = np.max(np.abs(kernel_eval(k, (x, y)) - kernel_eval_brute(k, (x, y))))
        assert diff <= 1e-9 * kernel_dim(k)


def test_reproducing_normalization_and_symmetry(rng):
    x, y = rng.uniform(-1, 1, (2, 200))
    for k in range(1, 9):
        assert tensor_integral(lambda X, Y: kernel_eval(k, (X, Y))) == pytest.approx(4.0, abs=1e-9)
        K = kernel_eval(k, (x, y))
        assert np.allclose(K, kernel_eval(k, (y, x)), atol=1e-12 * kernel_dim(k))
        assert np.allclose(K, kernel_eval(k, (-x, -y)), atol=1e-12 * kernel_dim(k))


def test_addition_formula_monte_carlo():
    xp, xm = pair_xi_samples(20000, RandomStream(11))
    for k in (1, 2, 3):
        vals = kernel_eval(k, (xp, xm))
        mean = vals.mean()
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(mean - 1.0) <= 4 * se


def test_kernel_deficit_matches_subtraction(rng):
    u = rng.uniform(0, 2, 300)
    v = rng.uniform(0, 1, 300)
    for k in (1, 2, 4, 6):
        direct = kernel_dim(k) - kernel_eval(k, (1 - u, 1 - v))
        assert np.allclose(kernel_deficit(k, u, v), direct, atol=1e-10 * kernel_dim(k))
    # near the diagonal the deficit is linear in the offsets: dK = 9 (u + v) for k = 1
    assert kernel_deficit(1, 1e-12, 2e-12) == pytest.approx(9 * 3e-12, rel=1e-9)


def test_fourier_jacobi_examples():
    one = lambda X, Y: np.ones_like(X)
    assert fourier_jacobi_coefficient(one, (0, 0)) == pytest.approx(1.0, abs=1e-12)
    assert fourier_jacobi_coefficient(one, (1, 0)) == pytest.approx(0.0, abs=1e-12)
    p11 = lambda X, Y: jacobi_grass((1, 1), (X, Y))
    assert fourier_jacobi_coefficient(p11, (1, 1)) == pytest.approx(1.0, abs=1e-12)
    K3 = lambda X, Y: kernel_eval(3, (X, Y)) / kernel_dim(3)
    for tau, c in kernel_coefficients(3).items():
        assert fourier_jacobi_coefficient(K3, tau) == pytest.approx(c, abs=1e-12)
    assert fourier_jacobi_coefficient(K3, (2, 2)) == pytest.approx(0.0, abs=1e-12)


def test_xi_from_frames_feeds_kernel(rng):
    from gr24.sampling import sample_uniform
    X = sample_uniform(RandomStream(1))
    assert kernel_eval(3, xi_from_frames(X, X)) == pytest.approx(kernel_dim(3), rel=1e-12)
