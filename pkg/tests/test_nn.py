import numpy as np
import pytest

from armteleop.nn import (
    Adam,
    Dense,
    GRUCell,
    GRUStack,
    check_gradients,
    dropout,
    load_checkpoint,
    mae,
    mae_grad,
    save_checkpoint,
    selu,
    selu_grad,
)
from armteleop.gradcheck_targets import (
    DenseMaeTarget,
    GruStackTarget,
    MapperLossTarget,
    VaeLossTarget,
)


from helpers import scalar_gru_step


def zero_cell(in_size, hidden):
    cell = GRUCell(in_size, hidden, np.random.default_rng(0))
    for g in cell.GATES:
        cell.w[g][...] = 0.0
        cell.u[g][...] = 0.0
    return cell


class TestGruStep:
    def test_zero_weights_zero_state(self):
        cell = zero_cell(3, 4)
        h, _ = cell.step(np.zeros((1, 3)), np.zeros((1, 4)))
        assert np.allclose(h, 0.0)

    def test_zero_weights_ones_state_gives_half(self):
        # r = z = 0.5, n = 0, so h' = 0.5 * h
        cell = zero_cell(3, 4)
        h, _ = cell.step(np.zeros((1, 3)), np.ones((1, 4)))
        assert np.allclose(h, 0.5)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(8)
        cell = GRUCell(5, 3, rng)
        for g in cell.GATES:  # nonzero biases exercise every term
            cell.bi[g][...] = rng.standard_normal(3) * 0.3
            cell.bh[g][...] = rng.standard_normal(3) * 0.3
        x = rng.standard_normal(5)
        h = rng.standard_normal(3)
        fast, _ = cell.step(x[None, :], h[None, :])
        slow = scalar_gru_step(cell, x, h)
        assert np.max(np.abs(fast[0] - slow)) < 1e-12

    def test_output_bounded_between_n_and_h(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            cell = GRUCell(4, 6, rng)
            x = rng.standard_normal((3, 4))
            h = rng.standard_normal((3, 6))
            h_next, (x_c, h_c, r, z, n, hn) = cell.step(x, h)
            lo = np.minimum(n, h)
            hi = np.maximum(n, h)
            assert np.all(h_next >= lo - 1e-12)
            assert np.all(h_next <= hi + 1e-12)

    def test_shape_mismatch_raises(self):
        cell = GRUCell(3, 4, np.random.default_rng(0))
        with pytest.raises(ValueError):
            cell.step(np.zeros((1, 5)), np.zeros((1, 4)))


class TestActivations:
    def test_selu_at_zero(self):
        assert selu(np.array([0.0]))[0] == 0.0

    def test_selu_at_one(self):
        assert selu(np.array([1.0]))[0] == pytest.approx(1.0507, abs=1e-4)

    def test_selu_saturates_at_minus_lambda_alpha(self):
        assert selu(np.array([-20.0]))[0] == pytest.approx(-1.75809, abs=1e-4)

    def test_selu_grad_matches_finite_difference(self):
        x = np.array([-2.0, -0.5, 0.3, 1.7])
        h = 1e-7
        numeric = (selu(x + h) - selu(x - h)) / (2 * h)
        assert np.allclose(selu_grad(x), numeric, atol=1e-6)


class TestDropout:
    def test_inference_is_identity(self):
        x = np.arange(10.0)
        out, mask = dropout(x, 0.5, training=False)
        assert np.array_equal(out, x)
        assert mask is None

    def test_rate_zero_is_identity(self):
        rng = np.random.default_rng(0)
        x = np.arange(10.0)
        out, mask = dropout(x, 0.0, training=True, rng=rng)
        assert np.array_equal(out, x)

    def test_survivor_fraction_and_scale(self):
        rng = np.random.default_rng(1)
        x = np.ones(100_000)
        out, _ = dropout(x, 0.5, training=True, rng=rng)
        survivors = out[out != 0.0]
        assert abs(survivors.size / x.size - 0.5) < 0.01
        assert np.all(survivors == 2.0)

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            dropout(np.zeros(3), 1.0, training=True, rng=np.random.default_rng(0))


class TestMae:
    def test_equal_arrays(self):
        a = np.arange(6.0).reshape(2, 3)
        assert mae(a, a) == 0.0

    def test_unit_offset(self):
        a = np.zeros((2, 3))
        assert mae(a + 1.0, a) == 1.0

    def test_hand_arithmetic(self):
        assert mae(np.array([1.0, 2.0]), np.array([0.0, 4.0])) == pytest.approx(1.5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mae(np.zeros(3), np.zeros(4))

    def test_subgradient_at_zero_is_zero(self):
        g = mae_grad(np.array([1.0, 2.0]), np.array([1.0, 5.0]))
        assert g[0] == 0.0
        assert g[1] == pytest.approx(-0.5)


class TestAdam:
    def test_zero_gradient_leaves_parameters_unchanged(self):
        value = np.array([1.0, -2.0])
        grad = np.zeros(2)
        opt = Adam(lr=0.1)
        opt.step([("w", value, grad)])
        assert np.array_equal(value, [1.0, -2.0])

    def test_first_step_is_signed_learning_rate(self):
        value = np.zeros(3)
        grad = np.array([0.3, -4.0, 1e-3])
        opt = Adam(lr=0.01)
        opt.step([("w", value, grad)])
        # bias-corrected moments cancel at step 1: update ~ -lr * sign(g)
        assert np.allclose(value, [-0.01, 0.01, -0.01], atol=1e-5)

    def test_quadratic_bowl_converges(self):
        w = np.array([1.0])
        grad = np.zeros(1)
        opt = Adam(lr=1e-2)
        for _ in range(500):
            grad[0] = 2.0 * w[0]  # d/dw of w^2
            opt.step([("w", w, grad)])
        assert abs(w[0]) < 1e-3

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            Adam().step([("w", np.zeros(2), np.zeros(3))])


class TestDenseLayer:
    def test_forward_is_affine(self):
        rng = np.random.default_rng(0)
        layer = Dense(3, 2, rng)
        x = rng.standard_normal((4, 3))
        y, _ = layer.forward(x)
        assert np.allclose(y, x @ layer.w.T + layer.b)

    def test_init_bounds(self):
        rng = np.random.default_rng(0)
        layer = Dense(16, 8, rng)
        bound = 1.0 / 4.0
        assert np.all(np.abs(layer.w) <= bound)
        assert np.all(layer.b == 0.0)


class TestGradientChecks:
    def test_dense_mae(self):
        report = check_gradients(DenseMaeTarget())
        assert report.max_rel_err < 1e-4

    def test_gru_two_layers_two_steps(self):
        report = check_gradients(GruStackTarget())
        assert report.max_rel_err < 1e-4

    def test_vae_loss_sampled(self):
        report = check_gradients(VaeLossTarget(), max_per_tensor=40)
        assert report.max_rel_err < 1e-4

    def test_mapper_frozen_dropout(self):
        report = check_gradients(MapperLossTarget())
        assert report.max_rel_err < 1e-4

    def test_detects_broken_backward(self):
        target = GruStackTarget()
        cell = target.stack.cells[0]
        original = cell.backward_step

        def broken(dh_next, cache):
            dx, dh_prev = original(dh_next, cache)
            return dx, dh_prev * 0.99

        cell.backward_step = broken
        report = check_gradients(target)
        assert report.max_rel_err > 1e-4


class TestCheckpoints:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        stack = GRUStack(4, 5, 2, rng)
        path = tmp_path / "model.json"
        digest = save_checkpoint(
            path, architecture={"hidden": 5}, parameters=stack.parameters(), config_hash="abc"
        )
        doc = load_checkpoint(path)
        assert doc["architecture"] == {"hidden": 5}
        assert doc["config_hash"] == "abc"
        assert doc["params_hash"] == digest
        for name, value, _ in stack.parameters():
            assert np.array_equal(doc["tensors"][name], value)

    def test_corruption_detected(self, tmp_path):
        rng = np.random.default_rng(0)
        layer = Dense(2, 2, rng)
        path = tmp_path / "model.json"
        save_checkpoint(path, architecture={}, parameters=layer.parameters())
        text = path.read_text()
        # flip one digit inside the parameter payload
        idx = text.index('"values": [') + len('"values": [') + 3
        path.write_text(text[:idx] + ("1" if text[idx] != "1" else "2") + text[idx + 1 :])
        with pytest.raises(ValueError, match="params_hash"):
            load_checkpoint(path)

    def test_version_gate(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format_version": 99, "params": []}')
        with pytest.raises(ValueError, match="format"):
            load_checkpoint(path)


class TestStackedBptt:
    def test_two_layer_forward_matches_manual_composition(self):
        rng = np.random.default_rng(2)
        stack = GRUStack(3, 4, 2, rng)
        x = rng.standard_normal((2, 2, 3))
        top, _ = stack.forward(x)

        h0 = np.zeros((2, 4))
        l0_t0, _ = stack.cells[0].step(x[:, 0], h0)
        l0_t1, _ = stack.cells[0].step(x[:, 1], l0_t0)
        l1_t0, _ = stack.cells[1].step(l0_t0, h0)
        l1_t1, _ = stack.cells[1].step(l0_t1, l1_t0)
        assert np.allclose(top[:, 0], l1_t0, atol=1e-15)
        assert np.allclose(top[:, 1], l1_t1, atol=1e-15)
