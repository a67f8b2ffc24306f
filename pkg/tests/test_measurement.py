"""Tomography simulator: cell probabilities, counts, summaries, datasets."""

import numpy as np
import pytest
from scipy import stats as sps

from tomolab import bases, measurement, states
from tomolab.errors import DesignMismatch, NonMeasurableObservable

PAULI2 = bases.build_basis("pauli", 2)
PAULI4 = bases.build_basis("pauli", 4)


def pure_z() -> states.DensityMatrix:
    return states.validate_density(np.diag([1.0, 0.0]).astype(complex))


class TestCellProbabilities:
    def test_eigenstate(self):
        theta = measurement.cell_probabilities(pure_z(), PAULI2, 3)
        np.testing.assert_allclose(theta, [1.0, 0.0], atol=1e-12)

    def test_mixed_on_sigma1(self):
        st = states.validate_density(np.eye(2) / 2)
        theta = measurement.cell_probabilities(st, PAULI2, 1)
        np.testing.assert_allclose(theta, [0.5, 0.5], atol=1e-12)

    def test_line_state(self):
        beta, j_star = 0.7, 5
        st = states.pauli_line_state(4, j_star, beta)
        theta = measurement.cell_probabilities(st, PAULI4, j_star)
        np.testing.assert_allclose(theta, [(1 + beta) / 2, (1 - beta) / 2], atol=1e-9)

    @pytest.mark.parametrize("d", [2, 4, 8, 16])
    def test_maximally_mixed_half_half(self, d):
        basis = bases.build_basis("pauli", d)
        st = states.validate_density(np.eye(d) / d)
        for j in range(1, basis.size, max(1, basis.size // 7)):
            theta = measurement.cell_probabilities(st, basis, j)
            np.testing.assert_allclose(theta, [0.5, 0.5], atol=1e-9)

    def test_expected_outcome_matches_trace(self):
        rng = np.random.default_rng(0)
        st = states.sample_class(states.StateClassSpec("low_rank", r=3), 4, seed=9)
        for j in range(PAULI4.size):
            theta = measurement.cell_probabilities(st, PAULI4, j)
            lam = PAULI4.decompositions[j].eigenvalues
            want = np.trace(st.matrix @ PAULI4.matrices[j]).real
            assert np.dot(lam, theta) == pytest.approx(want, abs=1e-9)

    def test_masking_member_rejected(self):
        canonical = bases.build_basis("canonical", 2)
        off_diag = next(j for j, (l1, l2) in enumerate(canonical.labels) if l1 != l2)
        with pytest.raises(NonMeasurableObservable):
            measurement.cell_probabilities(pure_z(), canonical, off_diag)

    def test_probabilities_beyond_clamp_rejected(self):
        # traces below -1e-12 signal a genuinely indefinite input
        bad = states.DensityMatrix(matrix=np.diag([1.0 + 1e-9, -1e-9]).astype(complex))
        with pytest.raises(ValueError):
            measurement.cell_probabilities(bad, PAULI2, 3)

    def test_tiny_negative_trace_clamped(self):
        eps = 5e-13  # inside the clamp window
        st = states.DensityMatrix(matrix=np.diag([1.0 + eps, -eps]).astype(complex))
        theta = measurement.cell_probabilities(st, PAULI2, 3)
        assert theta[1] == 0.0
        assert theta.sum() == pytest.approx(1.0, abs=1e-12)


class TestMeasureCounts:
    def test_degenerate_always_full_count(self):
        for seed in range(20):
            rec = measurement.measure_counts(pure_z(), PAULI2, 3, 17, seed)
            np.testing.assert_array_equal(rec.counts, [17, 0])

    def test_counts_sum_to_m(self):
        st = states.validate_density(np.eye(2) / 2)
        for seed in range(10):
            rec = measurement.measure_counts(st, PAULI2, 1, 33, seed)
            assert rec.counts.sum() == 33

    def test_single_shot_frequencies_chi2(self):
        # m = 1: the hit cell is distributed like the cell probabilities
        st = states.pauli_line_state(2, 1, 0.4)
        theta = measurement.cell_probabilities(st, PAULI2, 1)
        counts = np.array([measurement.measure_counts(st, PAULI2, 1, 1, s).counts
                           for s in range(2000)])
        assert np.all(counts.sum(axis=1) == 1)
        hits = counts.sum(axis=0)
        chi2 = np.sum((hits - 2000 * theta) ** 2 / (2000 * theta))
        assert chi2 < sps.chi2.ppf(0.99, df=1)
        # independent oracle draws agree with theta at the same significance
        rng = np.random.default_rng(123)
        ohits = rng.multinomial(1, theta, size=100_000).sum(axis=0)
        ochi2 = np.sum((ohits - 100_000 * theta) ** 2 / (100_000 * theta))
        assert ochi2 < sps.chi2.ppf(0.99, df=1)

    def test_empirical_mean_clt(self):
        st = states.pauli_line_state(2, 1, 0.2)
        theta = measurement.cell_probabilities(st, PAULI2, 1)
        m, reps = 8, 10_000
        rng = np.random.default_rng(7)
        freq = rng.multinomial(m, theta, size=reps) / m
        for a in range(2):
            tol = 3 * np.sqrt(theta[a] * (1 - theta[a]) / (m * reps))
            assert abs(freq[:, a].mean() - theta[a]) <= tol


class TestSummarize:
    def test_degenerate(self):
        rec = measurement.CountRecord(0, np.array([5, 0]), np.array([1.0, -1.0]), 5)
        assert measurement.summarize(rec) == 1.0

    def test_arithmetic(self):
        rec = measurement.CountRecord(0, np.array([3, 1]), np.array([1.0, -1.0]), 4)
        assert measurement.summarize(rec) == pytest.approx(0.5)

    def test_monte_carlo_mean_matches_trace(self):
        st = states.pauli_line_state(4, 3, 0.6)
        j, m, reps = 3, 16, 10_000
        rng = np.random.default_rng(11)
        theta = measurement.cell_probabilities(st, PAULI4, j)
        lam = PAULI4.decompositions[j].eigenvalues
        ns = rng.multinomial(m, theta, size=reps) @ lam / m
        want = np.trace(st.matrix @ PAULI4.matrices[j]).real
        var = (np.trace(st.matrix @ PAULI4.matrices[j] @ PAULI4.matrices[j]).real
               - want ** 2) / m
        assert abs(ns.mean() - want) <= 4 * np.sqrt(var / reps)


class TestRunTomography:
    def test_fixed_covers_all_members_in_order(self):
        st = states.validate_density(np.eye(2) / 2)
        ds = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                        4, 5, seed=1)
        assert [r.observable_index for r in ds.records] == [0, 1, 2, 3]

    def test_fixed_design_size_mismatch(self):
        st = states.validate_density(np.eye(2) / 2)
        with pytest.raises(DesignMismatch):
            measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(), 3, 5, 1)

    def test_point_mass_design(self):
        st = states.validate_density(np.eye(2) / 2)
        xi = np.array([0.0, 0.0, 1.0, 0.0])
        design = bases.SamplingDesign.random(xi, xi)
        ds = measurement.run_tomography(st, PAULI2, design, 9, 3, seed=2)
        assert all(r.observable_index == 2 for r in ds.records)

    def test_random_frequencies_chi2(self):
        st = states.validate_density(np.eye(2) / 2)
        xi = np.array([0.1, 0.2, 0.3, 0.4])
        design = bases.SamplingDesign.random(xi, xi)
        n = 100_000
        idx = measurement.draw_design_indices(design, PAULI2, n, seed=5)
        hits = np.bincount(idx, minlength=4)
        chi2 = np.sum((hits - n * xi) ** 2 / (n * xi))
        assert chi2 < sps.chi2.ppf(0.99, df=3)

    def test_individual_outcomes_tally_to_counts(self):
        st = states.pauli_line_state(2, 1, 0.3)
        ds = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                        4, 12, seed=3, detail="individual")
        for rec, outcomes, n_k in zip(ds.records, ds.individuals, ds.summaries):
            for lam, count in zip(rec.eigenvalues, rec.counts):
                assert np.sum(np.isclose(outcomes, lam)) == count
            assert outcomes.mean() == pytest.approx(n_k)

    def test_summary_matches_counts(self):
        st = states.pauli_line_state(2, 1, 0.3)
        ds = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                        4, 50, seed=4, detail="summary")
        for rec, n_k in zip(ds.records, ds.summaries):
            assert n_k == pytest.approx(measurement.summarize(rec))

    def test_variance_of_summary_monte_carlo(self):
        st = states.pauli_line_state(2, 1, 0.5)
        j, m, reps = 1, 4, 20_000
        rng = np.random.default_rng(21)
        theta = measurement.cell_probabilities(st, PAULI2, j)
        lam = PAULI2.decompositions[j].eigenvalues
        ns = rng.multinomial(m, theta, size=reps) @ lam / m
        b = PAULI2.matrices[j]
        want = (np.trace(st.matrix @ b @ b).real
                - np.trace(st.matrix @ b).real ** 2) / m
        assert ns.var() == pytest.approx(want, rel=0.1)

    def test_deterministic_per_seed(self):
        st = states.pauli_line_state(2, 1, 0.3)
        a = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                       4, 9, seed=8, detail="individual")
        b = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                       4, 9, seed=8, detail="individual")
        for r1, r2 in zip(a.records, b.records):
            np.testing.assert_array_equal(r1.counts, r2.counts)
        for o1, o2 in zip(a.individuals, b.individuals):
            np.testing.assert_array_equal(o1, o2)


class TestDatasetCSV:
    def test_round_trip(self, tmp_path):
        st = states.pauli_line_state(2, 1, 0.3)
        ds = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                        4, 7, seed=5, detail="summary")
        path = tmp_path / "ds.csv"
        measurement.write_dataset_csv(ds, path)
        back = measurement.read_dataset_csv(path, PAULI2)
        for r1, r2 in zip(ds.records, back.records):
            np.testing.assert_array_equal(r1.counts, r2.counts)
            assert r1.observable_index == r2.observable_index
        np.testing.assert_allclose(back.summaries, ds.summaries)

    def test_counts_only_has_empty_summary_column(self, tmp_path):
        st = states.pauli_line_state(2, 1, 0.3)
        ds = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                        4, 7, seed=5, detail="counts")
        path = tmp_path / "ds.csv"
        measurement.write_dataset_csv(ds, path)
        rows = path.read_text().strip().splitlines()
        assert rows[1].endswith(",")

    def test_individuals_file(self, tmp_path):
        st = states.pauli_line_state(2, 1, 0.3)
        ds = measurement.run_tomography(st, PAULI2, bases.SamplingDesign.fixed(),
                                        4, 6, seed=5, detail="individual")
        path = tmp_path / "outcomes.csv"
        measurement.write_individuals_csv(ds, path)
        rows = path.read_text().strip().splitlines()
        assert len(rows) == 4
        assert all(len(row.split(",")) == 6 for row in rows)
