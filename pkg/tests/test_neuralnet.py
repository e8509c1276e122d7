import math
import time

import numpy as np
import pytest

from speechscreen.corpus import Label
from speechscreen.neuralnet import (AdamWState, Checkpoint,
                                    MlpParams, SplitData, TrainConfig,
                                    TrainingDiverged, adamw_step, backward,
                                    fuse_backward, fuse_forward, hard_labels,
                                    init_fusion, init_mlp,
                                    mlp_forward, onehot, predict_proba,
                                    softmax, train, xent_loss_and_dlogits)


def _zero_mlp(d=2, h=3, dropout=0.0):
    return MlpParams(W1=np.zeros((h, d)), b1=np.zeros(h),
                     W2=np.zeros((2, h)), b2=np.zeros(2),
                     dropout_rate=dropout)


def _finite_diff(loss_fn, params_flat, eps=1e-5):
    grads = {}
    for k, arr in params_flat.items():
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            orig = arr[i]
            arr[i] = orig + eps
            lp = loss_fn()
            arr[i] = orig - eps
            lm = loss_fn()
            arr[i] = orig
            g[i] = (lp - lm) / (2 * eps)
        grads[k] = g
    return grads


def _max_rel_err(a, b):
    worst = 0.0
    for k in a:
        diff = np.abs(a[k] - b[k])
        scale = np.maximum(1e-8, np.maximum(np.abs(a[k]), np.abs(b[k])))
        worst = max(worst, float((diff / scale).max()))
    return worst


class TestForward:
    def test_zero_params_zero_logits(self):
        logits, _ = mlp_forward(_zero_mlp(), np.array([[1.0, -2.0]]))
        assert logits.tolist() == [[0.0, 0.0]]

    def test_hand_case_d1_h1(self):
        p = MlpParams(W1=np.array([[2.0]]), b1=np.zeros(1),
                      W2=np.array([[1.0], [-1.0]]), b2=np.zeros(2))
        logits, _ = mlp_forward(p, np.array([[3.0]]))
        assert logits.tolist() == [[6.0, -6.0]]

    def test_dropout_zero_train_equals_eval(self):
        rng = np.random.default_rng(0)
        p = init_mlp(4, 3, 0.0, rng)
        x = rng.normal(size=(5, 4))
        lt, _ = mlp_forward(p, x, "train", np.random.default_rng(1))
        le, _ = mlp_forward(p, x, "eval")
        assert np.array_equal(lt, le)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mlp_forward(_zero_mlp(d=2), np.ones((1, 3)))

    def test_softmax_sums_to_one(self):
        rng = np.random.default_rng(2)
        probs = softmax(rng.normal(scale=30, size=(50, 2)))
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        assert (probs >= 0).all() and (probs <= 1).all()

    def test_dropout_inverted_scaling_expectation(self):
        # mean over many masked draws matches the eval activation within 1%
        rng = np.random.default_rng(3)
        p = init_mlp(6, 8, 0.4, rng)
        x = np.abs(rng.normal(size=(1, 6))) + 0.5
        eval_logits, _ = mlp_forward(p, x, "eval")
        draw_rng = np.random.default_rng(4)
        total = np.zeros_like(eval_logits)
        n = 20000
        for _ in range(n):
            lt, _ = mlp_forward(p, x, "train", draw_rng)
            total += lt
        mean = total / n
        scale = np.abs(eval_logits).max()
        assert np.abs(mean - eval_logits).max() <= 0.01 * max(scale, 1.0)


class TestBackward:
    def test_symmetric_softmax_hand_case(self):
        p = _zero_mlp()
        logits, cache = mlp_forward(p, np.array([[1.0, 1.0]]))
        loss, dlogits = xent_loss_and_dlogits(logits, onehot([Label.CASE]))
        assert dlogits.tolist() == [[-0.5, 0.5]]
        assert loss == pytest.approx(math.log(2))

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(42)
        p = init_mlp(5, 4, 0.0, rng)
        X = rng.normal(size=(3, 5))
        labels = [Label.CASE, Label.CONTROL, Label.CASE]

        def loss_fn():
            logits, _ = mlp_forward(p, X)
            return xent_loss_and_dlogits(logits, onehot(labels))[0]

        logits, cache = mlp_forward(p, X)
        _, grads = backward(p, cache, logits, labels)
        numeric = _finite_diff(loss_fn, p.flat())
        assert _max_rel_err(grads, numeric) < 1e-6

    def test_stationary_point_w2_rows(self):
        p = _zero_mlp(d=3, h=2)
        X = np.array([[1.0, 0.0, 2.0], [0.5, 1.0, -1.0]])
        labels = [Label.CASE, Label.CONTROL]
        logits, cache = mlp_forward(p, X)
        _, grads = backward(p, cache, logits, labels)
        assert np.array_equal(grads["W2"], np.zeros((2, 2)))
        assert np.array_equal(grads["b2"], np.zeros(2))


class TestAdamW:
    def test_first_step_closed_form(self):
        params = {"w": np.array(1.0)}
        state = AdamWState.init(params, lr=0.1, weight_decay=0.0)
        adamw_step(state, params, {"w": np.array(2.0)})
        # first step is ~ lr * sign(g): m_hat/sqrt(v_hat) = 1 up to eps
        assert params["w"] == pytest.approx(0.9, abs=1e-8)
        assert state.t == 1

    def test_zero_grads_no_decay_params_unchanged(self):
        params = {"w": np.array([1.0, -2.0])}
        state = AdamWState.init(params, lr=0.1, weight_decay=0.0)
        for _ in range(3):
            adamw_step(state, params, {"w": np.zeros(2)})
        assert params["w"].tolist() == [1.0, -2.0]

    def test_zero_lr_params_unchanged(self):
        params = {"w": np.array([1.0, -2.0])}
        state = AdamWState.init(params, lr=0.0, weight_decay=0.5)
        adamw_step(state, params, {"w": np.array([3.0, -4.0])})
        assert params["w"].tolist() == [1.0, -2.0]

    def test_decoupled_decay_differs_from_l2_in_loss(self):
        # quadratic loss f(w) = w^2/2 (grad = w), lambda = 0.1
        lam = 0.1
        wa = {"w": np.array(1.0)}
        wb = {"w": np.array(1.0)}
        sa = AdamWState.init(wa, lr=0.1, weight_decay=lam)
        sb = AdamWState.init(wb, lr=0.1, weight_decay=0.0)
        for _ in range(20):
            adamw_step(sa, wa, {"w": wa["w"].copy()})
            adamw_step(sb, wb, {"w": wb["w"] + lam * wb["w"]})
        assert abs(float(wa["w"]) - float(wb["w"])) > 1e-3


class TestFusion:
    def test_gate_zero_is_mean_of_branches(self):
        rng = np.random.default_rng(0)
        fp = init_fusion(3, 2, 4, 3, 0.0, 0.0, rng)
        fp.gate[...] = 0.0
        xe, xl = rng.normal(size=(1, 3)), rng.normal(size=(1, 2))
        logits, cache = fuse_forward(fp, xe, xl)
        expect = (cache["z_emb"] + cache["z_ling"]) / 2.0
        assert np.allclose(logits, expect, atol=1e-15)

    def test_gate_saturation(self):
        rng = np.random.default_rng(1)
        fp = init_fusion(3, 2, 4, 3, 0.0, 0.0, rng)
        fp.gate[...] = 30.0
        xe, xl = rng.normal(size=(1, 3)), rng.normal(size=(1, 2))
        logits, cache = fuse_forward(fp, xe, xl)
        assert np.abs(logits - cache["z_emb"]).max() < 1e-9

    def test_hand_combination(self):
        # alpha = 0.5: 0.5*(2,0) + 0.5*(0,2) = (1,1)
        z_emb = np.array([[2.0, 0.0]])
        z_ling = np.array([[0.0, 2.0]])
        alpha = 0.5
        assert (alpha * z_emb + (1 - alpha) * z_ling).tolist() == [[1.0, 1.0]]

    def test_fusion_gradients_match_finite_differences(self):
        rng = np.random.default_rng(7)
        fp = init_fusion(4, 3, 5, 4, 0.0, 0.0, rng)
        fp.gate[...] = 0.3
        Xe = rng.normal(size=(3, 4))
        Xl = rng.normal(size=(3, 3))
        labels = [Label.CASE, Label.CONTROL, Label.CASE]

        def loss_fn():
            logits, _ = fuse_forward(fp, Xe, Xl)
            return xent_loss_and_dlogits(logits, onehot(labels))[0]

        logits, cache = fuse_forward(fp, Xe, Xl)
        _, dlogits = xent_loss_and_dlogits(logits, onehot(labels))
        grads = fuse_backward(fp, cache, dlogits)
        numeric = _finite_diff(loss_fn, fp.flat())
        assert _max_rel_err(grads, numeric) < 1e-6


class TestPredict:
    def test_logits_zero_gives_half(self):
        p = _zero_mlp()
        assert predict_proba(p, np.array([[1.0, 2.0]]))[0] == 0.5

    def test_hand_softmax(self):
        # identity network: logits = x; x = (1,2) -> p_case = 0.2689
        p = MlpParams(W1=np.eye(2), b1=np.zeros(2), W2=np.eye(2),
                      b2=np.zeros(2))
        probs = predict_proba(p, np.array([[1.0, 2.0]]))
        assert probs[0] == pytest.approx(0.26894142, abs=1e-7)

    def test_saturation_convention(self):
        p = MlpParams(W1=np.eye(2), b1=np.zeros(2), W2=np.eye(2),
                      b2=np.zeros(2))
        probs = predict_proba(p, np.array([[50.0, 0.0]]))
        assert probs[0] > 1 - 1e-12  # index 0 carries the case logit

    def test_tie_logits_predict_control(self):
        assert hard_labels(np.array([[0.3, 0.3]])) == [Label.CONTROL]


def _separable_data(n=20, d=2, margin=1.0, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    pos = rng.normal(size=(half, d)) * 0.2 + margin
    neg = rng.normal(size=(half, d)) * 0.2 - margin
    X = np.vstack([pos, neg])
    labels = tuple([Label.CASE] * half + [Label.CONTROL] * half)
    ids = tuple(f"s{i}" for i in range(n))
    return SplitData(ids=ids, labels=labels, X=X)


class TestTrain:
    CFG = TrainConfig(lr=5e-3, weight_decay=1e-3, epochs=50, batch_size=8,
                      seeds=(0, 1, 2, 3, 4), hidden=8, dropout=0.0)

    def test_separable_toy_reaches_perfect_validation_f1(self):
        data = _separable_data()
        val = _separable_data(seed=1)
        checkpoints, _ = train("linguistic", data, val, None, self.CFG)
        assert all(c.val_f1 == 1.0 for c in checkpoints)

    def test_same_seed_bit_identical(self):
        data = _separable_data()
        val = _separable_data(seed=1)
        cfg = TrainConfig(lr=5e-3, weight_decay=1e-3, epochs=5, seeds=(3,),
                          hidden=8)
        c1, _ = train("linguistic", data, val, None, cfg)
        c2, _ = train("linguistic", data, val, None, cfg)
        for k in c1[0].payload:
            assert np.array_equal(c1[0].payload[k], c2[0].payload[k])
        assert c1[0].best_epoch == c2[0].best_epoch

    def test_checkpoint_reload_invariance(self, tmp_path):
        data = _separable_data()
        val = _separable_data(seed=1)
        cfg = TrainConfig(lr=5e-3, weight_decay=1e-3, epochs=3, seeds=(0,),
                          hidden=8)
        (ckpt,), _ = train("linguistic", data, val, None, cfg)
        x = np.array([[0.4, -1.1]])
        before = predict_proba(ckpt, x)
        path = tmp_path / "model.ckpt.json"
        ckpt.save(path)
        loaded = Checkpoint.load(path)
        after = predict_proba(loaded, x)
        assert np.array_equal(before, after)

    def test_empty_split_rejected(self):
        data = _separable_data()
        empty = SplitData(ids=(), labels=())
        with pytest.raises(ValueError):
            train("linguistic", data, empty, None, self.CFG)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nan_loss_aborts_seed(self):
        data = _separable_data()
        val = _separable_data(seed=1)
        cfg = TrainConfig(lr=1e200, weight_decay=0.0, epochs=3, seeds=(0,),
                          hidden=4)
        with pytest.raises(TrainingDiverged, match="seed 0"):
            train("linguistic", data, val, None, cfg)

    def test_tie_selection_earliest_epoch(self):
        data = _separable_data()
        val = _separable_data(seed=1)
        cfg = TrainConfig(lr=5e-3, weight_decay=1e-3, epochs=30, seeds=(0,),
                          hidden=8)
        (ckpt,), _ = train("linguistic", data, val, None, cfg)
        # F1 hits 1.0 early and stays; the kept epoch is the first maximum
        assert ckpt.val_f1 == 1.0
        assert ckpt.best_epoch < 29


class TestGradcheckBudget:
    def test_twenty_random_instances_under_ten_seconds(self):
        start = time.time()
        rng = np.random.default_rng(123)
        for trial in range(20):
            d = int(rng.integers(2, 6))
            h = int(rng.integers(2, 5))
            B = int(rng.integers(1, 4))
            labels = [Label.CASE if rng.random() < 0.5 else Label.CONTROL
                      for _ in range(B)]
            if trial % 2 == 0:
                p = init_mlp(d, h, 0.0, rng)
                X = rng.normal(size=(B, d))

                def loss_fn():
                    logits, _ = mlp_forward(p, X)
                    return xent_loss_and_dlogits(logits, onehot(labels))[0]

                logits, cache = mlp_forward(p, X)
                _, grads = backward(p, cache, logits, labels)
                numeric = _finite_diff(loss_fn, p.flat())
            else:
                fp = init_fusion(d, d + 1, h, h + 1, 0.0, 0.0, rng)
                fp.gate[...] = rng.normal()
                Xe = rng.normal(size=(B, d))
                Xl = rng.normal(size=(B, d + 1))

                def loss_fn():
                    logits, _ = fuse_forward(fp, Xe, Xl)
                    return xent_loss_and_dlogits(logits, onehot(labels))[0]

                logits, cache = fuse_forward(fp, Xe, Xl)
                _, dlogits = xent_loss_and_dlogits(logits, onehot(labels))
                grads = fuse_backward(fp, cache, dlogits)
                numeric = _finite_diff(loss_fn, fp.flat())
            assert _max_rel_err(grads, numeric) < 1e-6
        assert time.time() - start < 10.0
