"""Readout assignment model: forward confusion, linear inversion and the
constrained least-squares repair that returns physical counts."""

import math

import numpy as np
import pytest

from qutritlab.qutrit_core import BasisLabel, ProbDist
from qutritlab.noise_sim import measure_probs, sample_counts, simulate_pure
from qutritlab.algorithms import GroverSpec, grover_circuit
from qutritlab.readout_mitigation import (
    ConfusionMatrix,
    IllConditionedError,
    InfeasibleError,
    MitigationError,
    SignedCounts,
    apply_confusion,
    invert_confusion,
    load_confusion,
    mitigate_counts,
    mle_correct,
    save_confusion,
    synthetic_confusion,
)


def uniform_leak_values(dim=9, diagonal=0.85):
    off = (1.0 - diagonal) / (dim - 1)
    return diagonal, off


class TestConfusionMatrix:
    def test_synthetic_entries(self):
        m = synthetic_confusion().m
        diag, off = uniform_leak_values()
        assert m.shape == (9, 9)
        assert np.allclose(np.diag(m), diag)
        off_mask = ~np.eye(9, dtype=bool)
        assert np.allclose(m[off_mask], off)
        assert np.allclose(m.sum(axis=0), 1.0)

    def test_synthetic_diagonal_range(self):
        with pytest.raises(MitigationError):
            synthetic_confusion(diagonal=0.0)
        with pytest.raises(MitigationError):
            synthetic_confusion(diagonal=1.2)
        perfect = synthetic_confusion(diagonal=1.0)
        assert np.allclose(perfect.m, np.eye(9))

    def test_rejects_nonsquare(self):
        with pytest.raises(MitigationError):
            ConfusionMatrix(np.ones((2, 3)) / 2.0)

    def test_rejects_bad_columns(self):
        m = np.eye(3)
        m[0, 0] = 0.9
        with pytest.raises(MitigationError):
            ConfusionMatrix(m)

    def test_rejects_out_of_range_entries(self):
        m = np.eye(3)
        m[0, 0] = 1.5
        m[1, 0] = -0.5
        with pytest.raises(MitigationError):
            ConfusionMatrix(m)

    def test_condition_number_of_uniform_leak(self):
        # eigenvalues of dI + off(J - I): 1 once, (d - off*dim) elsewhere
        diag, off = uniform_leak_values()
        expected = 1.0 / (diag - off)
        assert synthetic_confusion().condition_number() == pytest.approx(expected, rel=1e-9)


class TestForwardModel:
    def test_identity_matrix_is_transparent(self):
        p = ProbDist(np.full(9, 1.0 / 9.0))
        out = apply_confusion(p, synthetic_confusion(diagonal=1.0))
        assert np.allclose(out.probs, p.probs)

    def test_delta_input_reads_matrix_column(self):
        matrix = synthetic_confusion()
        p = ProbDist(np.eye(9)[4])
        out = apply_confusion(p, matrix)
        assert np.allclose(out.probs, matrix.m[:, 4])

    def test_uniform_input_is_fixed_point(self):
        # column-stochastic uniform leakage keeps the flat distribution flat
        p = ProbDist(np.full(9, 1.0 / 9.0))
        out = apply_confusion(p, synthetic_confusion())
        assert np.allclose(out.probs, p.probs)

    def test_size_mismatch(self):
        with pytest.raises(MitigationError):
            apply_confusion(ProbDist(np.array([0.5, 0.3, 0.2])), synthetic_confusion())


class TestInversion:
    def test_exact_roundtrip_on_noiseless_counts(self):
        matrix = synthetic_confusion()
        true_counts = np.array([8000.0, 1000.0, 3000.0, 500.0, 2500.0, 1500.0, 900.0, 1600.0, 1000.0])
        observed = matrix.m @ true_counts
        recovered = invert_confusion(observed, matrix)
        assert np.allclose(recovered.q, true_counts, atol=1e-8)
        assert recovered.shots == pytest.approx(true_counts.sum())

    def test_singular_matrix_rejected(self):
        # all columns identical: nothing to invert
        flat = ConfusionMatrix(np.full((9, 9), 1.0 / 9.0))
        with pytest.raises(IllConditionedError):
            invert_confusion(np.full(9, 100.0), flat)

    def test_barely_distinguishable_columns_rejected(self):
        eps = 1e-9
        diag = 1.0 / 9.0 + eps
        off = (1.0 - diag) / 8.0
        m = np.full((9, 9), off)
        np.fill_diagonal(m, diag)
        with pytest.raises(IllConditionedError):
            invert_confusion(np.full(9, 100.0), ConfusionMatrix(m))

    def test_inverted_counts_can_go_negative(self):
        matrix = synthetic_confusion()
        observed = np.zeros(9)
        observed[0] = 10000.0
        signed = invert_confusion(observed, matrix)
        assert signed.q[0] > 10000.0
        assert np.all(signed.q[1:] < 0.0)
        assert signed.q.sum() == pytest.approx(10000.0)

    def test_sampled_counts_recovered_within_noise(self):
        matrix = synthetic_confusion()
        shots = 20000
        true = measure_probs(simulate_pure(grover_circuit(GroverSpec(BasisLabel.parse("22"), 1))))
        observed = sample_counts(apply_confusion(true, matrix), shots, seed=23)
        corrected = mitigate_counts(observed, matrix)
        # multinomial per-bin scatter, inflated by the inverse matrix norm
        amplification = np.linalg.norm(np.linalg.inv(matrix.m), np.inf)
        sigma = math.sqrt(shots * (1.0 / 9.0) * (8.0 / 9.0)) * amplification
        assert np.all(np.abs(corrected - shots * true.probs) < 5.0 * sigma)


class TestSignedCounts:
    def test_sum_must_match_shots(self):
        with pytest.raises(MitigationError):
            SignedCounts(np.array([10.0, 20.0]), 50.0)

    def test_negative_entries_allowed(self):
        signed = SignedCounts(np.array([-5.0, 105.0]), 100.0)
        assert signed.q[0] == -5.0


class TestRepair:
    def test_interior_vector_untouched(self):
        q = np.array([3000.0, 2000.0, 2500.0, 1500.0, 2200.0, 1800.0, 2600.0, 2400.0, 2000.0])
        out = mle_correct(SignedCounts(q, q.sum()))
        assert np.allclose(out, q, atol=1e-9)

    def test_two_entry_floor_pinning(self):
        n = 20000.0
        q = np.zeros(9)
        q[0] = -50.0
        q[1] = 20050.0
        out = mle_correct(SignedCounts(q, n))
        floor = math.sqrt(n)
        assert out[0] == pytest.approx(floor, abs=1e-9)
        assert np.allclose(out[2:], floor, atol=1e-9)
        assert out[1] == pytest.approx(n - 8.0 * floor, abs=1e-6)
        assert out.sum() == pytest.approx(n, abs=1e-6)

    def test_three_entry_frozen_solution(self):
        out = mle_correct(SignedCounts(np.array([-10.0, 60.0, 50.0]), 100.0))
        assert out == pytest.approx([10.0, 48.197, 41.803], abs=0.01)

    def test_three_entry_against_grid_search(self):
        q = np.array([-10.0, 60.0, 50.0])
        n = 100.0
        floor = 10.0
        weights = np.where(np.abs(q) < math.sqrt(n), math.sqrt(n), np.abs(q))
        step = 0.05
        axis = np.arange(floor, n - 2 * floor + step, step)
        p0, p1 = np.meshgrid(axis, axis, indexing="ij")
        p2 = n - p0 - p1
        ok = p2 >= floor
        obj = ((p0 - q[0]) / weights[0]) ** 2 + ((p1 - q[1]) / weights[1]) ** 2 + ((p2 - q[2]) / weights[2]) ** 2
        obj[~ok] = np.inf
        best = np.unravel_index(np.argmin(obj), obj.shape)
        grid_best = np.array([p0[best], p1[best], n - p0[best] - p1[best]])
        out = mle_correct(SignedCounts(q, n))
        assert np.allclose(out, grid_best, atol=0.5)

    def test_custom_floor(self):
        out = mle_correct(SignedCounts(np.array([-10.0, 60.0, 50.0]), 100.0), floor=0.0)
        assert out[0] == pytest.approx(0.0, abs=1e-9)
        assert out.sum() == pytest.approx(100.0, abs=1e-9)

    def test_infeasible_totals(self):
        q = np.full(9, 80.0 / 9.0)
        with pytest.raises(InfeasibleError):
            mle_correct(SignedCounts(q, 80.0))
        out = mle_correct(SignedCounts(np.full(9, 9.0), 81.0))
        assert np.allclose(out, 9.0)

    def test_random_vectors_keep_constraints(self):
        rng = np.random.default_rng(41)
        n = 10000.0
        floor = math.sqrt(n)
        for _ in range(300):
            raw = rng.normal(loc=n / 9.0, scale=n / 6.0, size=9)
            q = raw + (n - raw.sum()) / 9.0
            out = mle_correct(SignedCounts(q, n))
            assert out.sum() == pytest.approx(n, abs=1e-6)
            assert np.min(out) >= floor - 1e-9

    def test_random_vectors_locally_optimal(self):
        # moving mass between two interior coordinates must not lower the cost
        rng = np.random.default_rng(43)
        n = 10000.0
        floor = math.sqrt(n)
        checked = 0
        for _ in range(200):
            raw = rng.normal(loc=n / 9.0, scale=n / 5.0, size=9)
            q = raw + (n - raw.sum()) / 9.0
            out = mle_correct(SignedCounts(q, n))
            weights = np.where(np.abs(q) < floor, floor, np.abs(q))

            def cost(p):
                return float(np.sum(((p - q) / weights) ** 2))

            base = cost(out)
            interior = np.where(out > floor + 1e-6)[0]
            if len(interior) < 2:
                continue
            checked += 1
            for delta in (0.01, -0.01):
                trial = out.copy()
                trial[interior[0]] += delta
                trial[interior[1]] -= delta
                assert cost(trial) >= base - 1e-9
        assert checked > 100

    def test_idempotent_on_feasible_vectors(self):
        rng = np.random.default_rng(47)
        n = 10000.0
        for _ in range(50):
            q = rng.normal(loc=n / 9.0, scale=n / 6.0, size=9)
            q += (n - q.sum()) / 9.0
            out = mle_correct(SignedCounts(q, n))
            again = mle_correct(SignedCounts(out, n))
            assert np.allclose(again, out, atol=1e-6)


class TestPipeline:
    def test_search_peak_survives_readout(self):
        matrix = synthetic_confusion()
        shots = 20000
        true = measure_probs(simulate_pure(grover_circuit(GroverSpec(BasisLabel.parse("22"), 1))))
        observed = sample_counts(apply_confusion(true, matrix), shots, seed=29)
        corrected = mitigate_counts(observed, matrix)
        assert int(np.argmax(corrected)) == 8
        raw_err = np.abs(observed / shots - true.probs).sum()
        fixed_err = np.abs(corrected / shots - true.probs).sum()
        assert fixed_err < raw_err

    def test_every_basis_state_recovered(self):
        matrix = synthetic_confusion()
        for idx in range(9):
            observed = sample_counts(apply_confusion(ProbDist(np.eye(9)[idx]), matrix), 20000, seed=100 + idx)
            corrected = mitigate_counts(observed, matrix)
            assert int(np.argmax(corrected)) == idx


class TestPersistence:
    def test_round_trip(self, tmp_path):
        matrix = synthetic_confusion(diagonal=0.9)
        path = tmp_path / "confusion.txt"
        save_confusion(matrix, path)
        loaded = load_confusion(path)
        assert np.array_equal(loaded.m, matrix.m)

    def test_hand_written_file_with_comments(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# tiny model\n0.9 0.2\n0.1 0.8\n\n")
        loaded = load_confusion(path)
        assert loaded.m[0, 1] == 0.2

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# nothing here\n")
        with pytest.raises(MitigationError):
            load_confusion(path)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "ragged.txt"
        path.write_text("0.9 0.2\n0.1\n")
        with pytest.raises(MitigationError):
            load_confusion(path)
