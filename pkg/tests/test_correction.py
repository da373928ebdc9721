import numpy as np
import pytest

from sd2e.correction import LocalEmConfig, Method, global_unit, local_unit, run_method
from sd2e.data import SynthConfig, generate_synthetic
from sd2e.errors import InputError
from sd2e.feedback import make_labels
from sd2e.geometry import AxisBounds, encode_path


class TestGlobalUnit:
    def test_single_reflection(self):
        corrected, flips, degen = global_unit(
            np.array([3.0]), np.array([1]), AxisBounds(0, 10)
        )
        assert corrected == pytest.approx([7.0])
        assert flips == 1
        assert len(degen) == 0

    def test_identity_when_agreeing(self):
        preds = np.array([7.0, 8.0, 6.0])
        corrected, flips, _ = global_unit(preds, np.array([1, 1, 1]), AxisBounds(0, 10))
        assert np.array_equal(corrected, preds)
        assert flips == 0

    def test_wrong_quadrant_moves_to_true_side(self):
        # prediction in the wrong half lands on the true-label side
        corrected, _, _ = global_unit(np.array([2.0]), np.array([1]), AxisBounds(0, 10))
        assert corrected[0] >= 5.0

    def test_midline_tie_recorded(self):
        corrected, flips, degen = global_unit(
            np.array([5.0]), np.array([0]), AxisBounds(0, 10)
        )
        assert corrected == pytest.approx([5.0])
        assert flips == 0
        assert list(degen) == [0]

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            global_unit(np.zeros(3), np.zeros(2), AxisBounds(0, 1))


class TestLocalUnit:
    def test_empty_group(self):
        cfg = LocalEmConfig(min_samples=20)
        assert local_unit(np.zeros((0, 3)), np.zeros(0), AxisBounds(0, 1), cfg) is None

    def test_threshold_boundary(self):
        cfg = LocalEmConfig(min_samples=20)
        rng = np.random.default_rng(0)
        assert (
            local_unit(rng.normal(size=(19, 3)), np.zeros(19), AxisBounds(0, 1), cfg)
            is None
        )

    def test_restricted_synthetic_accuracy(self):
        # within a half-space, fresh exploration + one correction puts >= 95%
        # of samples inside the true half of the bounds
        ds, truth = generate_synthetic(SynthConfig(sample_count=800, seed=4))
        labels = make_labels(ds.positions, 1)
        bounds = labels.root_x
        bits = labels.bits_x[:, 0]
        cfg = LocalEmConfig(min_samples=20)
        result = local_unit(ds.features, bits, bounds, cfg)
        assert result is not None
        corrected, _, degen, _ = result
        keep = np.setdiff1d(np.arange(800), degen)
        side_ok = (corrected[keep] >= bounds.mid) == (bits[keep] == 1)
        assert side_ok.mean() >= 0.95


class TestRunMethod:
    def test_depth_zero_passthrough(self):
        preds = np.array([1.0, 2.0, 3.0])
        targets = np.array([[1.0, 1.0], [5.0, 2.0], [3.0, 0.5]])
        labels = make_labels(targets, 0)
        corrected, trace = run_method(preds, None, labels, 0, Method.GLOBAL, 0)
        assert np.array_equal(corrected, preds)
        assert trace.level_values == []

    def test_hand_recursion(self):
        # root [0,8], true x = 6.5, prediction 1.0, global, N=2
        targets = np.array([[6.5, 1.0], [0.0, 0.0], [8.0, 2.0]])
        labels = make_labels(targets, 2)
        preds = np.array([1.0, 0.0, 8.0])
        corrected, trace = run_method(preds, None, labels, 0, Method.GLOBAL, 2)
        assert trace.level_values[0][0] == pytest.approx(7.0)
        assert trace.level_values[1][0] == pytest.approx(7.0)
        assert abs(corrected[0] - 6.5) <= 8 / 2**2

    def test_region_agreement_and_error_bound(self):
        ds, _ = generate_synthetic(SynthConfig(sample_count=500, seed=9))
        n = 4
        labels = make_labels(ds.positions, n)
        rng = np.random.default_rng(1)
        for axis in (0, 1):
            root = labels.root_for_axis(axis)
            preds = rng.uniform(root.min, root.max, size=500)
            corrected, trace = run_method(preds, None, labels, axis, Method.GLOBAL, n)
            degen = {s for _, s in trace.degenerate}
            truth = ds.positions[:, axis]
            for k in range(500):
                if k in degen:
                    continue
                assert abs(corrected[k] - truth[k]) <= root.extent / 2**n + 1e-12
                assert (
                    encode_path(corrected[k], root, n).bits
                    == tuple(labels.bits_for_axis(axis)[k])
                )

    def test_monotone_refinement(self):
        ds, _ = generate_synthetic(SynthConfig(sample_count=400, seed=12))
        labels = make_labels(ds.positions, 6)
        rng = np.random.default_rng(2)
        root = labels.root_x
        preds = rng.uniform(root.min, root.max, size=400)
        _, trace = run_method(preds, None, labels, 0, Method.GLOBAL, 6)
        truth = ds.positions[:, 0]
        rmses = [np.sqrt(np.mean((v - truth) ** 2)) for v in trace.level_values]
        for a, b in zip(rmses, rmses[1:]):
            assert b <= a + 1e-9

    def test_global_never_runs_em(self):
        ds, _ = generate_synthetic(SynthConfig(sample_count=200, seed=5))
        labels = make_labels(ds.positions, 3)
        preds = np.zeros(200) + labels.root_x.mid + 0.1
        _, trace = run_method(preds, ds.features, labels, 0, Method.GLOBAL, 3)
        assert trace.em_calls == 0

    def test_local_em_call_budget(self):
        ds, _ = generate_synthetic(SynthConfig(sample_count=400, seed=6))
        n = 3
        labels = make_labels(ds.positions, n)
        preds = np.full(400, labels.root_x.mid + 0.1)
        _, trace = run_method(
            preds, ds.features, labels, 0, Method.LOCAL, n, LocalEmConfig(iterations=2)
        )
        assert trace.em_calls <= sum(2**level for level in range(1, n + 1))
        assert trace.em_calls > 0

    def test_local_thin_group_fallback(self):
        # tiny dataset: every level-2 group is thinner than min_samples
        ds, _ = generate_synthetic(SynthConfig(sample_count=30, seed=7))
        labels = make_labels(ds.positions, 2)
        preds = np.full(30, labels.root_x.mid - 0.5)
        corrected, trace = run_method(
            preds, ds.features, labels, 0, Method.LOCAL, 2, LocalEmConfig(min_samples=40)
        )
        assert len(trace.empty_regions) > 0
        assert trace.em_calls == 0
        # fallback still enforces the level-2 bound
        degen = {s for _, s in trace.degenerate}
        for k in range(30):
            if k not in degen:
                assert (
                    abs(corrected[k] - ds.positions[k, 0])
                    <= labels.root_x.extent / 4 + 1e-12
                )

    def test_merge_is_permutation_safe(self):
        ds, _ = generate_synthetic(SynthConfig(sample_count=300, seed=8))
        labels = make_labels(ds.positions, 4)
        rng = np.random.default_rng(3)
        preds = rng.uniform(0, 25, size=300)
        _, trace = run_method(preds, None, labels, 0, Method.GLOBAL, 4)
        for values in trace.level_values:
            assert values.shape == (300,)
            assert np.isfinite(values).all()

    def test_depth_exceeds_labels(self):
        labels = make_labels(np.array([[0.0, 0.0], [1.0, 1.0]]), 2)
        with pytest.raises(InputError):
            run_method(np.zeros(2), None, labels, 0, Method.GLOBAL, 3)
