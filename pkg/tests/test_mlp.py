from __future__ import annotations

import numpy as np
import pytest

from fieldpad.mlp import (
    DROPOUT_DEFAULT,
    HIDDEN_FUSED,
    HIDDEN_SINGLE,
    MlpHead,
    backward,
    count_trainable,
    forward,
    init_head,
    load_head,
    mac_count,
    param_count,
    save_head,
)


def zero_dropout_head(input_dim, hidden, seed=0) -> "MlpHead":
    return init_head(input_dim, hidden, (0.0,) * len(hidden), seed=seed)


def loss_of(head, x, g):
    """Scalar probe: fixed linear functional of the logits."""
    logits, _ = forward(head, x, train_mode=False)
    return float(logits @ g)


class TestCounts:
    def test_single_field_budget(self):
        # Independent oracle: accumulate the affine-layer count by hand.
        dims = (576, *HIDDEN_SINGLE, 1)
        expected = 0
        for fi, fo in zip(dims[:-1], dims[1:]):
            expected += fi * fo + fo
        assert expected == 190_977
        assert param_count(576, HIDDEN_SINGLE) == expected
        assert count_trainable(init_head(576, HIDDEN_SINGLE, DROPOUT_DEFAULT, 0)) == expected

    def test_fused_budget(self):
        dims = (1152, *HIDDEN_FUSED, 1)
        expected = sum(fi * fo + fo for fi, fo in zip(dims[:-1], dims[1:]))
        assert expected == 762_881
        assert param_count(1152, HIDDEN_FUSED) == expected

    def test_degenerate_affine_head(self):
        assert param_count(576, ()) == 577
        head = init_head(576, (), (), seed=0)
        assert count_trainable(head) == 577

    def test_mac_count(self):
        dims = (576, *HIDDEN_SINGLE, 1)
        assert mac_count(576, HIDDEN_SINGLE) == sum(
            fi * fo for fi, fo in zip(dims[:-1], dims[1:])
        )


class TestInit:
    def test_deterministic_per_seed(self):
        h1 = init_head(20, (8, 8, 8, 8), DROPOUT_DEFAULT, seed=5)
        h2 = init_head(20, (8, 8, 8, 8), DROPOUT_DEFAULT, seed=5)
        h3 = init_head(20, (8, 8, 8, 8), DROPOUT_DEFAULT, seed=6)
        for a, b in zip(h1.weights, h2.weights):
            assert np.array_equal(a, b)
        assert not np.array_equal(h1.weights[0], h3.weights[0])

    def test_biases_zero_and_scale(self):
        head = init_head(400, (300, 200, 100, 50), DROPOUT_DEFAULT, seed=1)
        assert all(np.all(b == 0.0) for b in head.biases)
        # std of layer 0 weights should approach sqrt(2/400)
        std = head.weights[0].std()
        assert std == pytest.approx(np.sqrt(2 / 400), rel=0.05)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            init_head(0, (4,), (0.0,), 0)
        with pytest.raises(ValueError):
            init_head(4, (4, 0), (0.0, 0.0), 0)
        with pytest.raises(ValueError):
            init_head(4, (4, 4), (0.5,), 0)
        with pytest.raises(ValueError):
            init_head(4, (4,), (1.0,), 0)


class TestForward:
    def test_zero_weights_zero_logits(self):
        head = zero_dropout_head(3, (4, 4, 4, 4))
        for w in head.weights:
            w[:] = 0.0
        logits, _ = forward(head, np.ones((5, 3)))
        assert np.array_equal(logits, np.zeros(5))

    def test_hand_computed_affine(self):
        # Identity-like hidden weights on positive inputs act as a relay;
        # the output layer then sums the coordinates and adds its bias.
        head = zero_dropout_head(2, (2, 2, 2, 2))
        for w in head.weights[:-1]:
            w[:] = np.eye(2)
        for b in head.biases:
            b[:] = 0.0
        head.weights[-1][:] = np.asarray([[1.0], [2.0]])
        head.biases[-1][:] = 0.25
        x = np.asarray([[3.0, 4.0], [0.5, 1.5]])
        logits, _ = forward(head, x)
        assert logits == pytest.approx([3 + 8 + 0.25, 0.5 + 3 + 0.25], abs=1e-15)

    def test_relu_blocks_negative_paths(self):
        head = zero_dropout_head(1, (1, 1, 1, 1))
        for w in head.weights:
            w[:] = 1.0
        for b in head.biases:
            b[:] = 0.0
        logits, _ = forward(head, np.asarray([[-2.0], [2.0]]))
        assert logits[0] == 0.0
        assert logits[1] == 2.0

    def test_dropout_zero_train_equals_eval(self):
        head = zero_dropout_head(6, (5, 5, 5, 5), seed=3)
        x = np.random.default_rng(0).normal(size=(4, 6))
        eval_logits, _ = forward(head, x, train_mode=False)
        train_logits, _ = forward(head, x, train_mode=True, rng=np.random.default_rng(1))
        assert np.array_equal(eval_logits, train_logits)

    def test_eval_is_pure(self):
        head = init_head(8, (6, 6, 6, 6), DROPOUT_DEFAULT, seed=2)
        x = np.random.default_rng(5).normal(size=(3, 8))
        a, _ = forward(head, x)
        b, _ = forward(head, x)
        assert np.array_equal(a, b)

    def test_train_mode_requires_rng(self):
        head = init_head(4, (4, 4, 4, 4), DROPOUT_DEFAULT, seed=0)
        with pytest.raises(ValueError, match="rng"):
            forward(head, np.ones((1, 4)), train_mode=True)

    def test_masks_are_scaled_binary(self):
        head = init_head(10, (50, 50, 50, 50), (0.5, 0.25, 0.25, 0.25), seed=0)
        x = np.abs(np.random.default_rng(2).normal(size=(8, 10)))
        _, trace = forward(head, x, train_mode=True, rng=np.random.default_rng(3))
        for mask, p in zip(trace.masks, head.dropout_rates):
            values = np.unique(mask)
            assert set(values).issubset({0.0, 1.0 / (1.0 - p)})
            assert 0.0 in values  # with these sizes a dead unit is certain

    def test_shape_mismatch(self):
        head = zero_dropout_head(4, (3, 3, 3, 3))
        with pytest.raises(ValueError):
            forward(head, np.ones((2, 5)))
        with pytest.raises(ValueError):
            forward(head, np.ones(4))

    def test_dropout_expectation_matches_eval(self):
        # Dropout only on the last hidden layer keeps everything after
        # the mask affine, so the train-mode expectation equals the
        # eval output exactly; the sample mean must land within noise.
        n = 20_000
        head = init_head(5, (6, 6, 6, 4), (0.0, 0.0, 0.0, 0.4), seed=9)
        row = np.random.default_rng(11).normal(size=5)
        eval_logit = forward(head, row[None, :])[0][0]
        batch = np.tile(row, (n, 1))
        train_logits, _ = forward(head, batch, train_mode=True, rng=np.random.default_rng(12))
        se = train_logits.std(ddof=1) / np.sqrt(n)
        assert abs(train_logits.mean() - eval_logit) <= 3.0 * se + 1e-12


class TestBackward:
    def test_zero_upstream_zero_grads(self):
        head = zero_dropout_head(4, (3, 3, 3, 3), seed=1)
        x = np.random.default_rng(0).normal(size=(2, 4))
        _, trace = forward(head, x)
        grads = backward(head, trace, np.zeros(2))
        assert all(np.all(g == 0.0) for g in grads)

    def test_linear_in_upstream(self):
        head = zero_dropout_head(4, (3, 3, 3, 3), seed=1)
        x = np.random.default_rng(0).normal(size=(2, 4))
        _, trace = forward(head, x)
        g1 = backward(head, trace, np.asarray([0.3, -0.7]))
        g2 = backward(head, trace, np.asarray([0.6, -1.4]))
        for a, b in zip(g1, g2):
            assert np.allclose(2.0 * a, b, atol=1e-14)

    def test_stale_trace_rejected(self):
        head = zero_dropout_head(4, (3, 3, 3, 3))
        other = zero_dropout_head(4, (5, 5, 5, 5))
        x = np.ones((1, 4))
        _, trace = forward(other, x)
        with pytest.raises(ValueError, match="trace"):
            backward(head, trace, np.zeros(1))

    def test_matches_central_differences(self):
        from synthdata import draw_gradient_case

        rng = np.random.default_rng(77)
        step = 1e-5
        for _ in range(10):
            head, x, g = draw_gradient_case(rng)
            _, trace = forward(head, x)
            grads = backward(head, trace, g)
            params = head.parameters()
            worst = 0.0
            for p, analytic in zip(params, grads):
                flat_p = p.ravel()
                flat_a = analytic.ravel()
                for idx in range(flat_p.size):
                    orig = flat_p[idx]
                    flat_p[idx] = orig + step
                    up = loss_of(head, x, g)
                    flat_p[idx] = orig - step
                    down = loss_of(head, x, g)
                    flat_p[idx] = orig
                    numeric = (up - down) / (2 * step)
                    denom = max(abs(numeric) + abs(flat_a[idx]), 1e-8)
                    worst = max(worst, abs(numeric - flat_a[idx]) / denom)
            assert worst < 1e-4

    def test_dropout_masks_reused(self):
        # A unit dropped in the forward pass must contribute no gradient.
        head = init_head(3, (8, 8, 8, 8), (0.5, 0.5, 0.5, 0.5), seed=4)
        x = np.abs(np.random.default_rng(6).normal(size=(2, 3)))
        _, trace = forward(head, x, train_mode=True, rng=np.random.default_rng(7))
        grads = backward(head, trace, np.ones(2))
        # gradient w.r.t. final-layer weights is masked-activation sums
        final_w_grad = grads[4]
        dropped_units = np.all(trace.masks[-1] == 0.0, axis=0)
        assert np.all(final_w_grad.ravel()[dropped_units] == 0.0)


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        head = init_head(7, (6, 5, 4, 3), DROPOUT_DEFAULT, seed=21)
        path = tmp_path / "head.json"
        save_head(head, path)
        back = load_head(path)
        assert back.input_dim == head.input_dim
        assert back.hidden_dims == head.hidden_dims
        assert back.dropout_rates == head.dropout_rates
        assert back.seed == head.seed
        for a, b in zip(head.parameters(), back.parameters()):
            assert np.array_equal(a, b)
        x = np.random.default_rng(1).normal(size=(4, 7))
        assert np.array_equal(forward(head, x)[0], forward(back, x)[0])

    def test_corrupt_shapes_rejected(self, tmp_path):
        head = init_head(4, (3, 3, 3, 3), DROPOUT_DEFAULT, seed=0)
        path = tmp_path / "head.json"
        save_head(head, path)
        import json

        obj = json.loads(path.read_text())
        obj["weights"][0] = [[1.0, 2.0]]
        path.write_text(json.dumps(obj))
        with pytest.raises(ValueError):
            load_head(path)
