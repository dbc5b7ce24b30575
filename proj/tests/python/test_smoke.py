"""Smoke tests of the Python bindings against numpy oracles."""

import numpy as np
import pytest

import gitnet


def test_pca_matches_numpy_svd():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((40, 6)) @ rng.standard_normal((6, 30))
    basis = gitnet.fit_pca(x, energy_threshold=1.0, p_cap=6)
    _, s, _ = np.linalg.svd(x - x.mean(axis=0), full_matrices=False)
    np.testing.assert_allclose(basis.singular_values, s[:6], rtol=1e-10)
    np.testing.assert_allclose(basis.components @ basis.components.T, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(basis.decode(basis.encode(x)), x, atol=1e-10)


def test_advection_is_half_rotation():
    f, g = gitnet.advection_dataset(64, 5, seed=3)
    assert f.shape == (5, 1, 64)
    assert set(np.unique(f)) <= {-1.0, 1.0}
    np.testing.assert_array_equal(np.roll(f, 32, axis=2), g)


def test_linear_dataset_matches_operator():
    f, g, a = gitnet.linear_operator_dataset(12, 10, 3, 7, 0.0, 1)
    np.testing.assert_allclose(g[:, 0, :], f[:, 0, :] @ a.T, atol=1e-12)
    assert np.linalg.matrix_rank(a) == 3


def test_forward_shapes_and_linearity():
    f, g, _ = gitnet.linear_operator_dataset(16, 16, 2, 30, 0.0, 2)
    bu = gitnet.fit_pca(f[:, 0, :])
    bv = gitnet.fit_pca(g[:, 0, :])
    net = gitnet.init_gitnet(1, 1, bu.size, bv.size, 3, 5, layers=2, activation="identity", seed=4)
    assert net.parameter_count == 3 + bu.size * 5 + 2 * (2 * 25 + 5 * 9 + 9) + 3 + 5 * bv.size
    alpha = np.random.default_rng(1).standard_normal((4, 1, bu.size))
    beta = np.random.default_rng(2).standard_normal((4, 1, bu.size))
    lhs = net.coefficients((alpha + 2 * beta)[0])
    rhs = net.coefficients(alpha[0]) + 2 * net.coefficients(beta[0])
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    assert net.forward(bu, bv, f[:4]).shape == (4, 1, 16)
    assert net.finite_diff_check(bu, bv, f[:3], g[:3], h=1e-4) < 1e-5


def test_metrics_and_errors():
    t = np.random.default_rng(5).standard_normal((6, 1, 9))
    assert gitnet.relative_test_error(1.1 * t, t) == pytest.approx(0.1, abs=1e-12)
    assert gitnet.empirical_loss(np.array([[3.0, 4.0]]), np.zeros((1, 2))) == 25.0
    with pytest.raises(ValueError):
        gitnet.relative_test_error(np.zeros((2, 3)), np.zeros((2, 4)))
    with pytest.raises(ArithmeticError):
        gitnet.empirical_loss(np.ones((1, 2)), np.zeros((1, 2)), kind="relative")


def test_flops():
    assert gitnet.flops_gitnet_exact(1, 1, 1, 1, 1, 1, 1, 0)["flops"] == 12
    assert gitnet.flops_fno_scaling(1, 4, 3, 12) == 96.0
    x = np.random.default_rng(6).standard_normal((20, 32))
    bu = gitnet.fit_pca(x, energy_threshold=1.0, p_cap=8)
    net = gitnet.init_gitnet(1, 1, 8, 8, 2, 4, layers=2, seed=1)
    assert gitnet.instrumented_flops(net, bu, bu) == gitnet.flops_gitnet_exact(32, 1, 1, 8, 8, 2, 4, 2)["flops"]


def test_command_round_trip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "problem = linear\nseed = 8\nn_train = 40\nn_test = 10\nmesh = 12\nrank = 2\n"
        "C = 2\nK = 4\nL = 1\nactivation = identity\nepochs = 5\nbatch_size = 8\n"
        "train_data = train.opds\ntest_data = test.opds\n"
    )
    gitnet.generate(cfg)
    history = gitnet.train(cfg)
    assert [row[0] for row in history] == [1, 2, 3, 4, 5]
    ckpt = gitnet.load_checkpoint(tmp_path / "model.gitn")
    f, g = gitnet.read_dataset(tmp_path / "test.opds")
    report = ckpt.evaluate(f, g)
    assert len(report["errors"]) == 10
    assert report["mean"] == pytest.approx(history[-1][2], rel=1e-12)
    gitnet.write_dataset(tmp_path / "copy.opds", f, g, seed=8)
    f2, g2 = gitnet.read_dataset(tmp_path / "copy.opds")
    np.testing.assert_array_equal(f, f2)
    assert "instrumented" in gitnet.flops(cfg, instrument=True).splitlines()[0]
    with pytest.raises(OSError):
        gitnet.load_checkpoint(tmp_path / "missing.gitn")
    bad = tmp_path / "bad.cfg"
    bad.write_text("problem = linear\nn_train = 4\ntrain_data = x.opds\n")
    with pytest.raises(ValueError, match="seed"):
        gitnet.generate(bad)
