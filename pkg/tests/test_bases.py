"""Observable families: constructions, orthogonality, Pauli projection traces."""

import numpy as np
import pytest

from tomolab import bases, hermitian
from tomolab.bases import SIGMA
from tomolab.errors import BadDimension, NonOrthonormalVectors, WrongBasisKind


class TestBuildBasis:
    def test_pauli_d2_members(self):
        b = bases.build_basis("pauli", 2)
        assert b.size == 4
        for mat, sigma in zip(b.matrices, SIGMA):
            np.testing.assert_array_equal(mat, sigma)

    def test_pauli_d4_size(self):
        b = bases.build_basis("pauli", 4)
        assert b.size == 16 == b.dim ** 2
        assert b.labels[0] == (0, 0)
        assert b.identity_index == 0

    def test_pauli_bad_dimension(self):
        with pytest.raises(BadDimension):
            bases.build_basis("pauli", 6)

    def test_gvector_with_canonical_axes_matches_hermitian(self):
        bh = bases.build_basis("hermitian", 3)
        bg = bases.build_basis("gvector", 3, g_vectors=np.eye(3))
        for a, b in zip(bh.matrices, bg.matrices):
            np.testing.assert_allclose(a, b, atol=1e-15)

    def test_gvector_rejects_non_orthonormal(self):
        g = np.eye(3)
        g[0, 1] = 0.5
        with pytest.raises(NonOrthonormalVectors):
            bases.build_basis("gvector", 3, g_vectors=g)

    def test_sizes_are_d_squared(self):
        for kind, d in [("canonical", 3), ("hermitian", 4), ("pauli", 4)]:
            assert bases.build_basis(kind, d).size == d * d

    def test_canonical_off_diagonal_not_measurable(self):
        b = bases.build_basis("canonical", 3)
        for j, (l1, l2) in enumerate(b.labels):
            assert b.measurable(j) == (l1 == l2)

    def test_kappa_recorded(self):
        assert bases.build_basis("pauli", 4).kappa == 2
        assert bases.build_basis("hermitian", 3).kappa == 3
        assert bases.build_basis("canonical", 3).kappa == 2

    @pytest.mark.parametrize("kind", ["hermitian", "gvector"])
    def test_eigenvalue_sets(self, kind):
        # diagonal members: {1, 0}; off-diagonal members: {+-1/sqrt(2), 0}
        d = 4
        g = np.eye(d) if kind == "gvector" else None
        b = bases.build_basis(kind, d, g_vectors=g)
        inv_sqrt2 = 1 / np.sqrt(2)
        for dec, (l1, l2) in zip(b.decompositions, b.labels):
            expected = {0.0, 1.0} if l1 == l2 else {inv_sqrt2, -inv_sqrt2, 0.0}
            assert set(np.round(dec.eigenvalues, 9)) <= {round(e, 9) for e in expected}

    def test_pauli_squares_to_identity(self):
        b = bases.build_basis("pauli", 8)
        for j in range(1, b.size):
            dec = b.decompositions[j]
            assert dec.r == 2
            np.testing.assert_allclose(dec.eigenvalues, [1, -1], atol=1e-9)
            np.testing.assert_allclose(
                b.matrices[j] @ b.matrices[j], np.eye(8), atol=1e-9)


class TestVerifyOrthogonal:
    def test_hermitian_d3_passes(self):
        report = bases.verify_orthogonal(bases.build_basis("hermitian", 3))
        assert report["passed"]

    def test_pauli_d4_passes_with_norm_d(self):
        b = bases.build_basis("pauli", 4)
        report = bases.verify_orthogonal(b)
        assert report["passed"]
        np.testing.assert_allclose(report["diagonal_norms"], 4.0)

    def test_duplicated_member_fails(self):
        b = bases.custom_basis([SIGMA[1], SIGMA[1]])
        report = bases.verify_orthogonal(b)
        assert not report["passed"]
        assert report["max_off_diagonal"] == pytest.approx(2.0)


class TestPauliProjectionTraces:
    def test_d2_sigma3(self):
        rep = bases.pauli_projection_traces(bases.build_basis("pauli", 2))
        row = next(r for r in rep["rows"] if r["j"] == 3)
        assert row["tr_Q_plus"] == pytest.approx(1.0)
        assert row["tr_Q_minus"] == pytest.approx(1.0)

    @pytest.mark.parametrize("d", [2, 4, 8])
    def test_projection_traces_half_d(self, d):
        rep = bases.pauli_projection_traces(bases.build_basis("pauli", d))
        assert rep["passed"]
        for row in rep["rows"]:
            assert row["tr_Q_plus"] == pytest.approx(d / 2, abs=1e-9)
            assert row["tr_BQ_plus"] == pytest.approx(d / 2, abs=1e-9)
            assert row["tr_BQ_minus"] == pytest.approx(-d / 2, abs=1e-9)
            assert row["max_cross_trace"] <= 1e-9

    def test_wrong_kind(self):
        with pytest.raises(WrongBasisKind):
            bases.pauli_projection_traces(bases.build_basis("hermitian", 2))


class TestHaarWavelets:
    @pytest.mark.parametrize("d", [2, 4, 8, 16])
    def test_orthonormal(self, d):
        g = bases.haar_wavelet_vectors(d)
        np.testing.assert_allclose(g.T @ g, np.eye(d), atol=1e-12)

    def test_first_vector_constant(self):
        g = bases.haar_wavelet_vectors(8)
        np.testing.assert_allclose(g[:, 0], np.full(8, 1 / np.sqrt(8)))

    def test_second_vector_step(self):
        g = bases.haar_wavelet_vectors(4)
        np.testing.assert_allclose(g[:, 1], [0.5, 0.5, -0.5, -0.5])


class TestDesign:
    def test_uniform(self):
        d = bases.SamplingDesign.uniform(4)
        np.testing.assert_allclose(d.weights_regression, 0.25)
        np.testing.assert_allclose(d.weights_tomography, 0.25)

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            bases.SamplingDesign.random([0.5, 0.4])


class TestBasisFiles:
    @pytest.mark.parametrize("kind,d", [("pauli", 4), ("hermitian", 3)])
    def test_round_trip(self, kind, d, tmp_path):
        b = bases.build_basis(kind, d)
        path = tmp_path / "basis.txt"
        bases.write_basis(b, path)
        back = bases.read_basis(path)
        assert back.kind == kind and back.dim == d and back.size == b.size
        for m1, m2 in zip(b.matrices, back.matrices):
            np.testing.assert_array_equal(m1, m2)
        assert back.kappa == b.kappa
