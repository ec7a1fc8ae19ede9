import math

import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from attrikernel.graph import build_graph, laplacian, markov
from attrikernel.kernels import (
    Kernel,
    cct_kernel,
    communicability,
    compute_kernel,
    distance_to_kernel,
    fe_kernel,
    free_energy,
    free_energy_details,
    heat,
    pagerank_kernel,
    pagerank_raw,
    scct,
)
from attrikernel.numerics import NumericalError

from conftest import random_graph_adjacency, taylor_expm

EDGE = np.array([[0.0, 1.0], [1.0, 0.0]])


def path(n):
    return build_graph([(i, i + 1) for i in range(n - 1)]).adjacency


class TestCommunicability:
    def test_small_alpha_near_identity(self):
        np.testing.assert_allclose(communicability(EDGE, 1e-9), np.eye(2), atol=1e-8)

    def test_edge_against_series(self):
        K = communicability(EDGE, 1.0)
        np.testing.assert_allclose(K, taylor_expm(EDGE), atol=1e-12)
        np.testing.assert_allclose(K[0, 1], math.sinh(1), rtol=1e-14)

    def test_positive_definite(self, rng):
        for n in (5, 20, 50):
            A = random_graph_adjacency(rng, n, p=0.2)
            assert np.linalg.eigvalsh(communicability(A, 0.1)).min() > 0

    @pytest.mark.parametrize("alpha", [0.0, -1.0])
    def test_alpha_positive(self, alpha):
        with pytest.raises(ValueError):
            communicability(EDGE, alpha)

    def test_overflow_guard(self):
        with pytest.raises(NumericalError):
            communicability(EDGE, 701.0)


class TestHeat:
    @pytest.mark.parametrize("alpha", [0.1, 1.0, 3.0])
    def test_two_node_closed_form(self, alpha):
        e = math.exp(-2 * alpha)
        expected = np.array([[(1 + e) / 2, (1 - e) / 2], [(1 - e) / 2, (1 + e) / 2]])
        np.testing.assert_allclose(heat(EDGE, alpha), expected, atol=1e-14)

    def test_small_alpha_near_identity(self):
        np.testing.assert_allclose(heat(EDGE, 1e-9), np.eye(2), atol=1e-8)

    def test_row_sums(self, rng):
        for _ in range(10):
            A = random_graph_adjacency(rng, int(rng.integers(3, 30)))
            np.testing.assert_allclose(heat(A, rng.uniform(0.01, 2)).sum(axis=1), 1.0, atol=1e-9)

    def test_semigroup(self, rng):
        A = random_graph_adjacency(rng, 15)
        np.testing.assert_allclose(heat(A, 0.3) @ heat(A, 0.5), heat(A, 0.8), atol=1e-8)

    def test_positive_definite(self, rng):
        A = random_graph_adjacency(rng, 40, p=0.1)
        assert np.linalg.eigvalsh(heat(A, 0.2)).min() > 0


class TestPageRank:
    def test_edge_half(self):
        np.testing.assert_allclose(pagerank_raw(EDGE, 0.5), [[4 / 3, 2 / 3], [2 / 3, 4 / 3]], rtol=1e-14)

    def test_small_alpha_near_identity(self):
        np.testing.assert_allclose(pagerank_kernel(EDGE, 1e-9), np.eye(2), atol=1e-8)

    def test_row_sums_raw(self, rng):
        A = random_graph_adjacency(rng, 12)
        np.testing.assert_allclose(pagerank_raw(A, 0.7).sum(axis=1), 1 / 0.3, rtol=1e-12)

    def test_neumann_series(self, rng):
        for n in (3, 10, 20):
            A = random_graph_adjacency(rng, n)
            P = markov(A)
            series = np.zeros((n, n))
            term = np.eye(n)
            for _ in range(61):
                series += term
                term = 0.3 * term @ P
            np.testing.assert_allclose(pagerank_raw(A, 0.3), series, atol=1e-6)
            np.testing.assert_allclose(pagerank_kernel(A, 0.3), (series + series.T) / 2, atol=1e-6)

    def test_raw_nonnegative(self, rng):
        assert pagerank_raw(random_graph_adjacency(rng, 15), 0.9).min() >= 0

    def test_isolated_node_uses_uniform_row(self):
        A = np.zeros((3, 3))
        A[0, 1] = A[1, 0] = 1
        K = pagerank_kernel(A, 0.5)
        assert np.all(np.isfinite(K))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            pagerank_kernel(EDGE, alpha)


class TestFreeEnergy:
    def test_two_node_closed_form(self):
        q = math.exp(-1.0)  # W = e^-1 P for unit costs
        z_diag, z_off = 1 / (1 - q * q), q / (1 - q * q)
        expected_distance = -math.log(z_off / z_diag)  # = 1
        D, K = free_energy(EDGE, 1.0)
        np.testing.assert_allclose(D, [[0, expected_distance], [expected_distance, 0]], atol=1e-14)
        h = expected_distance / 4
        np.testing.assert_allclose(K, [[h, -h], [-h, h]], atol=1e-14)

    def test_two_node_verbatim_potentials(self):
        q = math.exp(-2.0)
        z_diag, z_off = 1 / (1 - q * q), q / (1 - q * q)
        D, _ = free_energy(EDGE, 2.0, diagonal_correction=False)
        np.testing.assert_allclose(D, np.log([[z_diag, z_off], [z_off, z_diag]]) / 2.0, atol=1e-14)

    def test_distance_properties(self, rng):
        for _ in range(5):
            A = random_graph_adjacency(rng, int(rng.integers(3, 25)))
            D, K = free_energy(A, rng.uniform(0.05, 5))
            np.testing.assert_array_equal(D, D.T)
            np.testing.assert_array_equal(np.diag(D), 0.0)
            assert D.min() >= 0
            np.testing.assert_allclose(K.sum(axis=1), 0.0, atol=1e-9)

    def test_approaches_shortest_path(self):
        A = path(5)
        D, _ = free_energy(A, 20.0)
        sp = shortest_path(A, unweighted=True)
        off = ~np.eye(5, dtype=bool)
        assert np.max(np.abs(D[off] - sp[off]) / sp[off]) <= 0.05

    def test_unreachable_pair_named(self):
        A = build_graph([(0, 1), (2, 3)]).adjacency
        with pytest.raises(NumericalError, match="unreachable"):
            free_energy(A, 1.0)

    def test_expected_cost_matrix_exposed(self, rng):
        fe = free_energy_details(random_graph_adjacency(rng, 8), 1.0)
        assert fe.S.shape == (8, 8)
        assert np.all(np.isfinite(fe.S))
        assert np.all(fe.S >= 0)

    def test_alpha_positive(self):
        with pytest.raises(ValueError):
            free_energy(EDGE, 0.0)


class TestSCCT:
    def test_matches_explicit_formula(self, rng):
        A = random_graph_adjacency(rng, 10)
        n = 10
        d = A.sum(axis=1)
        Dm = np.diag(d ** -0.5)
        M = Dm @ (A - np.outer(d, d) / A.sum()) @ Dm
        H = np.eye(n) - np.ones((n, n)) / n
        expected = H @ Dm @ M @ np.linalg.inv(np.eye(n) - M) @ M @ Dm @ H
        np.testing.assert_allclose(cct_kernel(A), expected, atol=1e-12)

    def test_cct_centered(self, rng):
        K = cct_kernel(random_graph_adjacency(rng, 20))
        np.testing.assert_allclose(K.sum(axis=1), 0.0, atol=1e-9)

    def test_range_and_order(self, rng):
        A = random_graph_adjacency(rng, 20)
        K = cct_kernel(A)
        S = scct(A, 3.0)
        assert S.min() > 0 and S.max() < 1
        order = np.argsort(K, axis=None, kind="stable")
        assert np.all(np.diff(S.ravel()[order]) >= 0)

    def test_saturation_stays_open(self, rng):
        S = scct(random_graph_adjacency(rng, 15), 1e4)
        assert S.min() > 0 and S.max() < 1

    def test_sigmoid_of_zero(self):
        A = build_graph([(i, (i + 1) % 5) for i in range(5)]).adjacency
        K = cct_kernel(A)
        zero = np.abs(K) < 1e-15
        assert zero.any()
        np.testing.assert_allclose(scct(A, 2.0)[zero], 0.5, atol=1e-12)

    def test_isolated_node_rejected(self):
        A = np.zeros((3, 3))
        A[0, 1] = A[1, 0] = 1
        with pytest.raises(NumericalError):
            scct(A, 1.0)


class TestDistanceToKernel:
    def test_zero(self):
        np.testing.assert_array_equal(distance_to_kernel(np.zeros((3, 3))), np.zeros((3, 3)))

    def test_two_points(self):
        np.testing.assert_allclose(distance_to_kernel(EDGE), [[0.25, -0.25], [-0.25, 0.25]], atol=1e-15)

    def test_classical_mds_psd(self, rng):
        X = rng.normal(size=(30, 4))
        D = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
        K = distance_to_kernel(D)
        assert np.linalg.eigvalsh(K).min() >= -1e-9
        np.testing.assert_allclose(K.sum(axis=1), 0.0, atol=1e-9)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            distance_to_kernel(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(ValueError):
            distance_to_kernel(np.array([[1.0, 1.0], [1.0, 0.0]]))


@pytest.mark.parametrize(
    "kernel, alpha",
    [("communicability", 0.2), ("heat", 0.5), ("pagerank", 0.6), ("fe", 1.0), ("scct", 2.0)],
)
def test_every_kernel_symmetric(kernel, alpha, rng):
    A = random_graph_adjacency(rng, 25, p=0.15)
    K = compute_kernel(kernel, A, alpha)
    assert np.max(np.abs(K - K.T)) <= 1e-9
    assert np.all(np.isfinite(K))
    small = (np.abs(K) < 1e-14) & (K != 0)
    assert not small.any()


def test_kernel_names():
    assert Kernel.parse("PR") is Kernel.PAGERANK
    assert Kernel.parse("Free Energy") is Kernel.FREE_ENERGY
    assert Kernel.FREE_ENERGY.label == "FE"
    with pytest.raises(ValueError):
        Kernel.parse("walk")


def test_fe_kernel_on_fused_dense_graph(rng):
    A = rng.random((12, 12))
    A = (A + A.T) / 2
    np.fill_diagonal(A, 0)
    K = fe_kernel(A, 2.0)
    np.testing.assert_allclose(K.sum(axis=0), 0.0, atol=1e-9)
