"""Matrix layer: spectral decompositions, tensor products, inner product, text I/O."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tomolab import hermitian
from tomolab.bases import SIGMA
from tomolab.errors import (
    DimensionMismatch,
    DimensionOverflow,
    NonHermitianInput,
)


def random_hermitian(rng, d, scale=1.0):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (z + z.conj().T) / 2


def eig2x2(mat):
    """Closed-form eigenvalues of a 2x2 Hermitian matrix, descending."""
    a, c = mat[0, 0].real, mat[1, 1].real
    b = mat[0, 1]
    mid = (a + c) / 2
    off = np.sqrt(((a - c) / 2) ** 2 + abs(b) ** 2)
    return np.array([mid + off, mid - off])


class TestSpectralDecompose:
    def test_sigma3(self):
        dec = hermitian.spectral_decompose(SIGMA[3])
        np.testing.assert_allclose(dec.eigenvalues, [1, -1])
        np.testing.assert_allclose(dec.projections[0], np.diag([1, 0]), atol=1e-12)
        np.testing.assert_allclose(dec.projections[1], np.diag([0, 1]), atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 8])
    def test_identity(self, d):
        dec = hermitian.spectral_decompose(np.eye(d))
        assert dec.r == 1
        np.testing.assert_allclose(dec.eigenvalues, [1.0])
        np.testing.assert_allclose(dec.projections[0], np.eye(d), atol=1e-12)
        assert dec.multiplicities[0] == d

    def test_sigma1_against_closed_form(self):
        dec = hermitian.spectral_decompose(SIGMA[1])
        np.testing.assert_allclose(dec.eigenvalues, eig2x2(SIGMA[1]), atol=1e-12)
        np.testing.assert_allclose(dec.projections[0], (np.eye(2) + SIGMA[1]) / 2, atol=1e-12)
        np.testing.assert_allclose(dec.projections[1], (np.eye(2) - SIGMA[1]) / 2, atol=1e-12)

    def test_non_hermitian_rejected(self):
        with pytest.raises(NonHermitianInput):
            hermitian.spectral_decompose(np.array([[0, 1], [0, 0]], dtype=complex))

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("d", [2, 5, 16])
    def test_projection_algebra_random(self, d, seed):
        rng = np.random.default_rng(seed)
        mat = random_hermitian(rng, d, scale=10.0 / d)
        dec = hermitian.spectral_decompose(mat)
        total = np.zeros((d, d), dtype=complex)
        for i, q in enumerate(dec.projections):
            total += q
            np.testing.assert_allclose(q @ q, q, atol=1e-9)
            np.testing.assert_allclose(q, q.conj().T, atol=1e-9)
            for q2 in dec.projections[i + 1:]:
                np.testing.assert_allclose(q @ q2, np.zeros((d, d)), atol=1e-9)
        np.testing.assert_allclose(total, np.eye(d), atol=1e-9)
        err = np.linalg.norm(dec.reconstruct() - mat)
        assert err <= 1e-9 * max(np.linalg.norm(mat), 1e-30)

    def test_degenerate_eigenvalues_merge(self):
        # sigma3 x sigma3 has eigenvalues +-1 with multiplicity 2 each
        mat = np.kron(SIGMA[3], SIGMA[3])
        dec = hermitian.spectral_decompose(mat)
        assert dec.r == 2
        np.testing.assert_array_equal(dec.multiplicities, [2, 2])

    def test_cluster_tol_merges_close_pairs(self):
        mat = np.diag([1.0, 1.0 + 1e-12, 0.0])
        dec = hermitian.spectral_decompose(mat, cluster_tol=1e-9)
        assert dec.r == 2
        wide = hermitian.spectral_decompose(mat, cluster_tol=1e-14)
        assert wide.r == 3


class TestTensorProduct:
    def test_identity_pair(self):
        np.testing.assert_array_equal(hermitian.tensor_product(SIGMA[0], SIGMA[0]), np.eye(4))

    def test_sigma3_pair(self):
        got = hermitian.tensor_product(SIGMA[3], SIGMA[3])
        np.testing.assert_array_equal(got, np.diag([1, -1, -1, 1]).astype(complex))

    def test_dimension_arithmetic(self):
        a = np.eye(2)
        b = np.eye(4)
        assert hermitian.tensor_product(a, b).shape == (8, 8)

    def test_overflow(self):
        big = np.eye(64)
        with pytest.raises(DimensionOverflow):
            hermitian.tensor_product(big, np.eye(32))

    def test_hermitian_preserved(self):
        rng = np.random.default_rng(3)
        a = random_hermitian(rng, 2)
        b = random_hermitian(rng, 3)
        assert hermitian.is_hermitian(hermitian.tensor_product(a, b), tol=1e-12)


class TestHSInner:
    def test_identity(self):
        assert hermitian.hs_inner(np.eye(5), np.eye(5)) == pytest.approx(5)

    def test_sigma1_sigma2_orthogonal(self):
        assert hermitian.hs_inner(SIGMA[1], SIGMA[2]) == pytest.approx(0)

    def test_sigma1_norm(self):
        assert hermitian.hs_inner(SIGMA[1], SIGMA[1]) == pytest.approx(2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hermitian.hs_inner(np.eye(2), np.eye(3))

    @given(st.integers(0, 2 ** 31), st.integers(2, 6))
    @settings(max_examples=25, deadline=None)
    def test_conjugate_symmetry_and_positivity(self, seed, d):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        lhs = hermitian.hs_inner(a, b)
        rhs = hermitian.hs_inner(b, a)
        assert lhs == pytest.approx(np.conj(rhs))
        assert hermitian.hs_inner(a, a).real > 0
        assert abs(hermitian.hs_inner(a, a).imag) < 1e-9

    def test_trace_product_matches_full_product(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert hermitian.trace_product(a, b) == pytest.approx(np.trace(a @ b))


class TestTextFormat:
    @pytest.mark.parametrize("seed", range(4))
    def test_round_trip_exact(self, seed, tmp_path):
        rng = np.random.default_rng(seed)
        mat = rng.normal(size=(3, 3)) * 10.0 ** int(rng.integers(-8, 8)) \
            + 1j * rng.normal(size=(3, 3))
        path = tmp_path / "mat.txt"
        hermitian.write_matrix(mat, path)
        back = hermitian.read_matrix(path)
        np.testing.assert_array_equal(back, mat)

    def test_format_shape(self):
        text = hermitian.format_matrix(np.eye(2, dtype=complex))
        lines = text.strip().splitlines()
        assert lines[0] == "2"
        assert lines[1].split() == ["1+0i", "0+0i"]

    def test_parse_negative_imag(self):
        mat = hermitian.parse_matrix("1\n2.5-0.5i\n")
        assert mat[0, 0] == 2.5 - 0.5j

    def test_bad_entry(self):
        with pytest.raises(ValueError):
            hermitian.parse_matrix("1\nnot-a-number\n")
