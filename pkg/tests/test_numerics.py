"""Kernel contracts: SVD/eig conventions, least-squares solve."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaydmd.errors import DegenerateModesError, InvalidParameterError
from delaydmd.numerics import eig_dense, pseudoinverse_apply, thin_svd


class TestThinSvd:
    def test_identity(self):
        res = thin_svd(np.eye(3))
        np.testing.assert_array_equal(res.u, np.eye(3))
        np.testing.assert_array_equal(res.singular_values, np.ones(3))
        np.testing.assert_array_equal(res.v, np.eye(3))

    def test_diagonal(self):
        res = thin_svd(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(res.singular_values, [3.0, 1.0])

    def test_reconstruction_residual_random(self):
        rng = np.random.default_rng(42)
        a = rng.standard_normal((20, 7))
        res = thin_svd(a)
        recon = res.u @ np.diag(res.singular_values) @ res.v.T
        assert np.linalg.norm(a - recon) / np.linalg.norm(a) < 1e-12

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((15, 9))
        res = thin_svd(a)
        assert np.max(np.abs(res.u.T @ res.u - np.eye(9))) <= 1e-10
        assert np.max(np.abs(res.v.T @ res.v - np.eye(9))) <= 1e-10

    def test_descending_singular_values(self):
        rng = np.random.default_rng(5)
        s = thin_svd(rng.standard_normal((12, 12))).singular_values
        assert np.all(np.diff(s) <= 0)
        assert np.all(s >= 0)

    def test_sign_convention(self):
        rng = np.random.default_rng(7)
        res = thin_svd(rng.standard_normal((10, 4)))
        lead = np.argmax(np.abs(res.u), axis=0)
        assert np.all(res.u[lead, np.arange(4)] > 0)

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((8, 5))
        r1, r2 = thin_svd(a), thin_svd(a)
        np.testing.assert_array_equal(r1.u, r2.u)
        np.testing.assert_array_equal(r1.v, r2.v)

    def test_rejects_nonfinite(self):
        a = np.ones((2, 2))
        a[0, 0] = np.nan
        with pytest.raises(InvalidParameterError):
            thin_svd(a)

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 2**32 - 1),
           m=st.integers(1, 12), n=st.integers(1, 12))
    def test_round_trip_property(self, seed, m, n):
        a = np.random.default_rng(seed).standard_normal((m, n))
        res = thin_svd(a)
        recon = res.u @ np.diag(res.singular_values) @ res.v.T
        assert np.linalg.norm(a - recon) <= 1e-8 * max(1.0, np.linalg.norm(a))


class TestEigDense:
    def test_diagonal(self):
        res = eig_dense(np.diag([2.0, -1.0]))
        np.testing.assert_allclose(res.eigenvalues, [2.0, -1.0])

    def test_rotation_spectrum(self):
        theta = np.pi / 4
        c, s = np.cos(theta), np.sin(theta)
        res = eig_dense(np.array([[c, -s], [s, c]]))
        expected = np.array([np.exp(1j * theta), np.exp(-1j * theta)])
        np.testing.assert_allclose(res.eigenvalues, expected, atol=1e-14)

    def test_companion_of_quadratic(self):
        # z^2 - 3z + 2 = (z - 1)(z - 2), roots {2, 1} by hand factorization
        companion = np.array([[0.0, -2.0], [1.0, 3.0]])
        res = eig_dense(companion)
        np.testing.assert_allclose(res.eigenvalues, [2.0, 1.0], atol=1e-12)

    def test_ordering_descending_modulus_then_imag(self):
        rng = np.random.default_rng(13)
        w = eig_dense(rng.standard_normal((9, 9))).eigenvalues
        mods = np.abs(w)
        assert np.all(np.diff(mods) <= 1e-14)
        for i in range(len(w) - 1):
            if mods[i] == mods[i + 1]:
                assert w[i].imag >= w[i + 1].imag

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10))
    def test_eigen_residual_property(self, seed, n):
        a = np.random.default_rng(seed).standard_normal((n, n))
        res = eig_dense(a)
        a_norm = np.linalg.norm(a)
        for mu, w in zip(res.eigenvalues, res.eigenvectors.T):
            resid = np.linalg.norm(a @ w - mu * w)
            assert resid <= 1e-8 * a_norm * np.linalg.norm(w)

    def test_rejects_nonsquare(self):
        with pytest.raises(InvalidParameterError):
            eig_dense(np.ones((2, 3)))


class TestPseudoinverseApply:
    def test_identity(self):
        b = pseudoinverse_apply(np.eye(3), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(b, [1.0, 2.0, 3.0])

    def test_single_unit_column(self):
        u = np.array([[0.6], [0.8]])
        b = pseudoinverse_apply(u, 2.0 * u[:, 0])
        np.testing.assert_allclose(b, [2.0])

    def test_column_span_recovery(self):
        rng = np.random.default_rng(17)
        phi = rng.standard_normal((10, 3)) + 1j * rng.standard_normal((10, 3))
        c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        x = phi @ c
        b = pseudoinverse_apply(phi, x)
        assert np.linalg.norm(phi @ b - x) < 1e-10
        np.testing.assert_allclose(b, c, atol=1e-10)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateModesError):
            pseudoinverse_apply(np.zeros((4, 2)), np.ones(4))

    def test_least_squares_residual_orthogonal(self):
        rng = np.random.default_rng(19)
        phi = rng.standard_normal((8, 3))
        x = rng.standard_normal(8)
        b = pseudoinverse_apply(phi, x)
        # Residual of the least-squares solution is orthogonal to the columns.
        np.testing.assert_allclose(phi.T @ (phi @ b - x), np.zeros(3), atol=1e-12)
