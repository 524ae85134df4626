"""Two-phase sparse logistic regression over id lookups."""

import numpy as np
import pytest

from dnn2lr.crosslr import (
    LrConfig,
    SparseLrModel,
    materialize,
    train_phase1,
    train_phase2,
    tune_phase1,
)
from dnn2lr.errors import ConfigError, TrainingError
from dnn2lr.metrics import auc
from dnn2lr.network import stable_sigmoid


def make_xor_data(seed, k=1200, noise=0.05):
    """Two binary-ish fields whose XOR drives the label; a third is noise."""
    rng = np.random.default_rng(seed)
    ids = np.stack(
        [rng.integers(2, 4, size=k), rng.integers(2, 4, size=k), rng.integers(2, 6, size=k)],
        axis=1,
    ).astype(np.int32)
    y = ((ids[:, 0] == 2) ^ (ids[:, 1] == 2)).astype(np.int8)
    flip = rng.random(k) < noise
    y[flip] = 1 - y[flip]
    cut = int(0.75 * k)
    return ids[:cut], y[:cut], ids[cut:], y[cut:]


class TestMaterialize:
    def test_sorted_key(self):
        row = np.array([7, 8, 9, 10])
        assert materialize(row, (2, 0)) == "0:7|2:9"
        assert materialize(row, (0, 2)) == "0:7|2:9"
        assert materialize(row, (3, 1, 2)) == "1:8|2:9|3:10"


class TestModelAlgebra:
    def test_logits_are_lookup_sums(self):
        model = SparseLrModel([4, 5])
        model.field_weights[0][:] = [0.0, 0.1, 0.2, 0.3]
        model.field_weights[1][:] = [0.0, -0.1, -0.2, -0.3, -0.4]
        model.bias = 1.5
        ids = np.array([[3, 4], [0, 0]], dtype=np.int32)
        got = model.logits(ids)
        assert np.allclose(got, [1.5 + 0.3 - 0.4, 1.5], atol=1e-15)

    def test_cross_column_unseen_combo_is_zero(self):
        model = SparseLrModel([4, 4, 4])
        model.attach_cross((0, 2), {(2, 3): 0.7})
        ids = np.array([[2, 0, 3], [2, 0, 2]], dtype=np.int32)
        col = model.cross_column(ids, 0)
        assert col.tolist() == [0.7, 0.0]

    def test_active_subset_controls_score(self):
        model = SparseLrModel([4, 4])
        model.attach_cross((0, 1), {(2, 2): 1.0})
        ids = np.array([[2, 2]], dtype=np.int32)
        assert model.logits(ids, active=[]).tolist() == [0.0]
        assert model.logits(ids, active=[(0, 1)]).tolist() == [1.0]

    def test_duplicate_attach_rejected(self):
        model = SparseLrModel([4, 4])
        model.attach_cross((0, 1), {})
        with pytest.raises(ConfigError):
            model.attach_cross((1, 0), {})

    def test_unknown_cross_lookup_rejected(self):
        model = SparseLrModel([4, 4])
        with pytest.raises(ConfigError):
            model.cross_index((0, 1))

    def test_predict_is_sigmoid_of_logits(self):
        model = SparseLrModel([3, 3])
        model.bias = 0.4
        ids = np.array([[0, 0], [1, 2]], dtype=np.int32)
        assert np.allclose(model.predict(ids), stable_sigmoid(model.logits(ids)), atol=0)

    def test_column_count_checked(self):
        model = SparseLrModel([3, 3])
        with pytest.raises(ConfigError):
            model.original_logits(np.zeros((2, 3), dtype=np.int32))


class TestPhase1:
    def test_learns_marginal_signal(self):
        rng = np.random.default_rng(0)
        ids = rng.integers(2, 6, size=(1000, 2)).astype(np.int32)
        y = (ids[:, 0] >= 4).astype(np.int8)
        model = SparseLrModel([6, 6])
        history = train_phase1(
            model, ids[:750], y[:750], ids[750:], y[750:], LrConfig(seed=0, epochs=20)
        )
        assert history[-1]["valid_auc"] > 0.99
        assert auc(y[750:], model.predict(ids[750:])) > 0.99

    def test_xor_is_invisible_to_phase1(self):
        tr_ids, tr_y, va_ids, va_y = make_xor_data(seed=1)
        model = SparseLrModel([6, 6, 6])
        train_phase1(model, tr_ids, tr_y, va_ids, va_y, LrConfig(seed=1, epochs=15))
        assert auc(va_y, model.predict(va_ids)) < 0.6

    def test_single_class_valid_rejected(self):
        ids = np.zeros((20, 2), dtype=np.int32)
        model = SparseLrModel([3, 3])
        with pytest.raises(TrainingError):
            train_phase1(model, ids, np.ones(20), ids[:4], np.ones(4), LrConfig(epochs=1))

    def test_restores_best_epoch(self):
        rng = np.random.default_rng(3)
        ids = rng.integers(0, 4, size=(400, 2)).astype(np.int32)
        y = rng.integers(0, 2, size=400).astype(np.int8)
        model = SparseLrModel([4, 4])
        history = train_phase1(
            model, ids[:300], y[:300], ids[300:], y[300:],
            LrConfig(seed=3, epochs=10, patience=10),
        )
        best = max(h["valid_auc"] for h in history)
        assert auc(y[300:], model.predict(ids[300:])) == pytest.approx(best, abs=1e-12)


class TestPhase2:
    def test_cross_feature_solves_xor(self):
        tr_ids, tr_y, va_ids, va_y = make_xor_data(seed=5)
        model = SparseLrModel([6, 6, 6])
        train_phase1(model, tr_ids, tr_y, va_ids, va_y, LrConfig(seed=5, epochs=15))
        before = auc(va_y, model.predict(va_ids))
        train_phase2(
            model, tr_ids, tr_y, va_ids, va_y, [(0, 1)], LrConfig(seed=5, epochs=25)
        )
        after = auc(va_y, model.predict(va_ids))
        # 5% label noise caps the reachable AUC; 0.9 is far above chance
        assert after > 0.9
        assert after > before + 0.3

    def test_phase1_weights_frozen_bit_for_bit(self):
        tr_ids, tr_y, va_ids, va_y = make_xor_data(seed=7)
        model = SparseLrModel([6, 6, 6])
        train_phase1(model, tr_ids, tr_y, va_ids, va_y, LrConfig(seed=7, epochs=10))
        saved_weights = [w.copy() for w in model.field_weights]
        saved_bias = model.bias
        train_phase2(
            model, tr_ids, tr_y, va_ids, va_y, [(0, 1), (1, 2)], LrConfig(seed=7, epochs=10)
        )
        assert model.bias == saved_bias
        for w, s in zip(model.field_weights, saved_weights):
            assert np.array_equal(w, s)

    def test_unseen_validation_combo_contributes_zero(self):
        # train rows only ever show (2,2); a valid row (3,3) must score base-only
        ids_tr = np.tile([[2, 2]], (64, 1)).astype(np.int32)
        ids_tr[::2, 1] = 2
        y_tr = np.array([0, 1] * 32, dtype=np.int8)
        ids_va = np.array([[3, 3], [2, 2], [2, 3]], dtype=np.int32)
        y_va = np.array([0, 1, 0], dtype=np.int8)
        model = SparseLrModel([4, 4])
        train_phase2(model, ids_tr, y_tr, ids_va, y_va, [(0, 1)], LrConfig(epochs=3))
        logits = model.logits(ids_va)
        assert logits[0] == model.bias  # untouched base
        assert logits[2] == model.bias

    def test_duplicate_candidates_rejected(self):
        ids = np.zeros((10, 2), dtype=np.int32)
        y = np.array([0, 1] * 5)
        model = SparseLrModel([3, 3])
        with pytest.raises(ConfigError):
            train_phase2(model, ids, y, ids, y, [(0, 1), (1, 0)], LrConfig(epochs=1))

    def test_candidate_objects_accepted(self):
        from dnn2lr.candidates import CrossFieldCandidate

        tr_ids, tr_y, va_ids, va_y = make_xor_data(seed=9, k=400)
        model = SparseLrModel([6, 6, 6])
        cand = CrossFieldCandidate(fields=(1, 0), count=3)
        train_phase2(model, tr_ids, tr_y, va_ids, va_y, [cand], LrConfig(seed=9, epochs=5))
        assert model.cross_fields == [(0, 1)]


class TestTune:
    def test_returns_grid_member_and_real_auc(self):
        rng = np.random.default_rng(11)
        ids = rng.integers(2, 5, size=(300, 2)).astype(np.int32)
        y = (ids[:, 1] == 3).astype(np.int8)
        lr, l2, score = tune_phase1(
            ids[:200], y[:200], ids[200:], y[200:], [5, 5],
            LrConfig(epochs=5), lr_grid=(0.01, 0.1), l2_grid=(0.001,)
        )
        assert lr in (0.01, 0.1)
        assert l2 == 0.001
        assert 0.5 <= score <= 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(12)
        ids = rng.integers(2, 5, size=(240, 2)).astype(np.int32)
        y = rng.integers(0, 2, size=240).astype(np.int8)
        args = (ids[:160], y[:160], ids[160:], y[160:], [5, 5])
        kwargs = dict(config=LrConfig(epochs=3), lr_grid=(0.01, 0.1), l2_grid=(0.01, 0.1))
        assert tune_phase1(*args, **kwargs) == tune_phase1(*args, **kwargs)
