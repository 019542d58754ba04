import math

import numpy as np
import pytest

from botopt.gp import (
    KernelParams,
    default_kernel_grid,
    gp_fit,
    gp_predict,
    kernel_eval,
    log_marginal_likelihood,
    tune_kernel,
)

from reference import (
    ref_gp_predict,
    ref_kernel_matrix,
    ref_log_marginal_likelihood,
)


def test_kernel_eval_zero_distance():
    p = KernelParams(signal_variance=2.0, lengthscale=1.0)
    assert kernel_eval(p, [1.0, 2.0], [1.0, 2.0]) == 2.0


def test_kernel_eval_one_lengthscale_apart():
    p = KernelParams(signal_variance=1.0, lengthscale=0.7)
    assert kernel_eval(p, [0.0], [0.7]) == pytest.approx(math.exp(-0.5), abs=1e-12)


def test_kernel_eval_matches_reference_on_random_pair():
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    p = KernelParams(signal_variance=1.7, lengthscale=0.9)
    expected = ref_kernel_matrix(a.reshape(1, -1), b.reshape(1, -1), 1.7, 0.9)[0, 0]
    assert kernel_eval(p, a, b) == pytest.approx(expected, abs=1e-14)
    assert kernel_eval(p, b, a) == kernel_eval(p, a, b)


def test_kernel_eval_dimension_mismatch():
    p = KernelParams(1.0, 1.0)
    with pytest.raises(ValueError, match="dimensions differ"):
        kernel_eval(p, [0.0], [0.0, 1.0])


def test_kernel_params_must_be_positive():
    with pytest.raises(ValueError):
        KernelParams(0.0, 1.0)
    with pytest.raises(ValueError):
        KernelParams(1.0, -2.0)


def test_gp_fit_single_point_unit_kernel():
    m = gp_fit(np.array([[0.0]]), np.array([1.0]), KernelParams(1.0, 1.0), noise=0.0)
    assert m.chol[0, 0] == pytest.approx(1.0)
    assert m.alpha[0] == pytest.approx(1.0)
    assert m.jitter == 0.0


def test_gp_fit_duplicate_rows_takes_jitter_path():
    X = np.array([[0.5], [0.5]])
    m = gp_fit(X, np.array([1.0, 1.0]), KernelParams(1.0, 1.0), noise=0.0)
    assert m.jitter > 0.0  # plain factorization of a singular kernel must fail


def test_gp_fit_reconstructs_kernel_matrix():
    rng = np.random.default_rng(11)
    X = rng.random((5, 2))
    y = rng.standard_normal(5)
    p = KernelParams(1.3, 0.6)
    m = gp_fit(X, y, p, noise=1e-4)
    K = ref_kernel_matrix(X, X, 1.3, 0.6) + (m.noise + m.jitter) * np.eye(5)
    assert np.max(np.abs(m.chol @ m.chol.T - K)) < 1e-8


def test_gp_predict_interpolates_training_points():
    rng = np.random.default_rng(2)
    X = rng.random((4, 2))
    y = rng.standard_normal(4)
    m = gp_fit(X, y, KernelParams(1.0, 0.8), noise=0.0)
    for xi, yi in zip(X, y):
        mean, var = gp_predict(m, xi)
        assert mean == pytest.approx(yi, abs=1e-8)
        assert var < 1e-8


def test_gp_predict_reverts_to_prior_far_away():
    X = np.array([[0.0], [0.1], [0.2]])
    m = gp_fit(X, np.array([1.0, 2.0, 1.5]), KernelParams(1.5, 0.1), noise=1e-6)
    mean, var = gp_predict(m, [5.0])  # 48 lengthscales from the data
    assert abs(mean) < 1e-6
    assert var == pytest.approx(1.5, abs=1e-6)


def test_gp_predict_matches_dense_oracle():
    rng = np.random.default_rng(7)
    X = rng.random((3, 2))
    y = rng.standard_normal(3)
    m = gp_fit(X, y, KernelParams(1.0, 0.5), noise=1e-6)
    q = rng.random(2)
    mean, var = gp_predict(m, q)
    ref_mean, ref_var = ref_gp_predict(X, y, 1.0, 0.5, 1e-6, q)
    assert mean == pytest.approx(ref_mean, abs=1e-8)
    assert var == pytest.approx(ref_var, abs=1e-8)


def test_posterior_variance_nonnegative_everywhere():
    rng = np.random.default_rng(13)
    X = rng.random((8, 3))
    m = gp_fit(X, rng.standard_normal(8), KernelParams(2.0, 0.3), noise=1e-6)
    for q in rng.random((200, 3)):
        _, var = gp_predict(m, q)
        assert var >= 0.0


def test_adding_observation_never_increases_variance():
    rng = np.random.default_rng(17)
    for _ in range(10):
        t = rng.integers(2, 8)
        X = rng.random((t, 2))
        y = rng.standard_normal(t)
        p = KernelParams(1.0, 0.5)
        small = gp_fit(X[:-1], y[:-1], p, noise=1e-3)
        full = gp_fit(X, y, p, noise=1e-3)
        for q in rng.random((20, 2)):
            _, v_small = gp_predict(small, q)
            _, v_full = gp_predict(full, q)
            assert v_full <= v_small + 1e-10
            # and both agree with the dense-inverse oracle on the way
            _, ref_small = ref_gp_predict(X[:-1], y[:-1], 1.0, 0.5, 1e-3, q)
            _, ref_full = ref_gp_predict(X, y, 1.0, 0.5, 1e-3, q)
            assert v_small == pytest.approx(max(ref_small, 0.0), abs=1e-8)
            assert v_full == pytest.approx(max(ref_full, 0.0), abs=1e-8)


def test_lml_single_zero_observation():
    m = gp_fit(np.array([[0.0]]), np.array([0.0]), KernelParams(1.0, 1.0), noise=0.0)
    assert log_marginal_likelihood(m) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)


def test_lml_zero_targets_drop_data_fit_term():
    rng = np.random.default_rng(23)
    X = rng.random((4, 2))
    p = KernelParams(1.2, 0.7)
    m = gp_fit(X, np.zeros(4), p, noise=1e-3)
    expected = -float(np.sum(np.log(np.diag(m.chol)))) - 2.0 * math.log(2 * math.pi)
    assert log_marginal_likelihood(m) == pytest.approx(expected, abs=1e-12)


def test_lml_matches_dense_oracle():
    rng = np.random.default_rng(29)
    X = rng.random((4, 3))
    y = rng.standard_normal(4)
    m = gp_fit(X, y, KernelParams(0.8, 0.4), noise=1e-4)
    expected = ref_log_marginal_likelihood(X, y, 0.8, 0.4, 1e-4)
    assert log_marginal_likelihood(m) == pytest.approx(expected, abs=1e-8)


def test_tune_kernel_singleton_grid():
    rng = np.random.default_rng(31)
    X, y = rng.random((5, 1)), rng.standard_normal(5)
    only = KernelParams(1.0, 0.5)
    assert tune_kernel(X, y, [only], 1e-6) is only


# Sample pinned from a seeded draw of a GP with lengthscale 0.5 and unit
# signal variance on 25 inputs in [0, 3]; the dense-evidence oracle confirms
# lengthscale 0.5 dominates 0.1 and 2.5 on this sample.
PINNED_X = np.array(
    [0.19145177, 0.28253204, 0.3843409, 0.68171617, 1.0635779,
     1.11239407, 1.31663532, 1.3302426, 1.35115781, 1.66375436,
     1.8949932, 1.93159536, 2.09210409, 2.27426322, 2.28341911,
     2.32186815, 2.33515049, 2.35819292, 2.46828484, 2.48289352,
     2.57579376, 2.67936336, 2.78029497, 2.91209407, 2.92686705]
).reshape(-1, 1)
PINNED_Y = np.array(
    [-0.35213355, -0.25017254, -0.11131064, 0.341871, 0.73483678,
     0.79678382, 1.13692056, 1.16171879, 1.19936414, 1.45733371,
     1.12059097, 1.04797696, 0.76689842, 0.59186557, 0.58630859,
     0.56442203, 0.55716238, 0.54453583, 0.47306953, 0.46104325,
     0.36559887, 0.22427275, 0.07357109, -0.08189844, -0.09322392]
)


def test_tune_kernel_recovers_generating_lengthscale():
    grid = [KernelParams(1.0, ls) for ls in (0.1, 0.5, 2.5)]
    evidences = [
        ref_log_marginal_likelihood(PINNED_X, PINNED_Y, 1.0, ls, 1e-6) for ls in (0.1, 0.5, 2.5)
    ]
    assert int(np.argmax(evidences)) == 1  # oracle agrees 0.5 wins
    chosen = tune_kernel(PINNED_X, PINNED_Y, grid, 1e-6)
    assert chosen.lengthscale == 0.5


def test_tune_kernel_tie_keeps_first():
    rng = np.random.default_rng(37)
    X, y = rng.random((4, 1)), rng.standard_normal(4)
    first = KernelParams(1.0, 0.5)
    duplicate = KernelParams(1.0, 0.5)
    assert tune_kernel(X, y, [first, duplicate], 1e-6) is first


def test_tune_kernel_empty_grid():
    with pytest.raises(ValueError, match="empty"):
        tune_kernel(np.zeros((1, 1)), np.zeros(1), [], 1e-6)


def test_default_kernel_grid_span():
    grid = default_kernel_grid()
    assert len(grid) == 45
    lengthscales = {p.lengthscale for p in grid}
    variances = {p.signal_variance for p in grid}
    assert min(lengthscales) == 2.0**-4 and max(lengthscales) == 2.0**4
    assert min(variances) == 2.0**-2 and max(variances) == 2.0**2


def test_gp_fit_rejects_bad_shapes():
    with pytest.raises(ValueError, match="targets"):
        gp_fit(np.zeros((2, 1)), np.zeros(3), KernelParams(1.0, 1.0), 1e-6)
    with pytest.raises(ValueError, match="noise"):
        gp_fit(np.zeros((2, 1)), np.zeros(2), KernelParams(1.0, 1.0), -1.0)
