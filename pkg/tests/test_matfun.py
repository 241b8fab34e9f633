"""Closed-form propagators and covariances against quadrature and known values."""

import numpy as np
import pytest
import scipy.linalg

from hypobound.core.errors import NotPositiveDefinite, NotSymmetric
from hypobound.core.matfun import (
    chain_seminorm,
    covariance_paper,
    covariance_quadrature,
    covariance_sde,
    factor_spd,
    inverse_spd,
    lyapunov_integral,
    min_eigenvalue,
    propagator,
    sign_conjugation,
    weighted_form,
    weighted_form_matrix,
)
from hypobound.core.model import assemble_drift


def test_kolmogorov_covariance_at_one(kolmogorov):
    c1 = covariance_paper(kolmogorov)(1.0)
    np.testing.assert_allclose(c1, [[1.0, -0.5], [-0.5, 1.0 / 3.0]], rtol=0, atol=1e-15)
    factor = factor_spd(c1)
    np.testing.assert_allclose(inverse_spd(factor), [[4.0, 6.0], [6.0, 12.0]], rtol=1e-12)
    assert factor.logdet == pytest.approx(np.log(1.0 / 12.0), rel=1e-12)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_kolmogorov_closed_forms(kolmogorov, t):
    np.testing.assert_allclose(propagator(kolmogorov, -1)(t), [[1.0, 0.0], [-t, 1.0]])
    np.testing.assert_allclose(propagator(kolmogorov, +1)(t), [[1.0, 0.0], [t, 1.0]])
    np.testing.assert_allclose(covariance_sde(kolmogorov)(t), [[t, t**2 / 2], [t**2 / 2, t**3 / 3]], rtol=1e-14)


def test_propagator_matches_expm(random_models):
    for model in random_models(6):
        drift = assemble_drift(model)
        for t in (0.2, 1.7):
            np.testing.assert_allclose(propagator(model, +1)(t), scipy.linalg.expm(t * drift), atol=1e-10)
            np.testing.assert_allclose(propagator(model, -1)(t), scipy.linalg.expm(-t * drift), atol=1e-10)


def test_propagator_rejects_bad_sign(kolmogorov):
    with pytest.raises(ValueError):
        propagator(kolmogorov, 0)


def test_closed_form_matches_quadrature(random_models):
    for model in random_models(50, seed=23):
        for t in (0.1, 1.0, 5.0):
            closed = covariance_paper(model)(t)
            scale = max(1.0, np.max(np.abs(closed)))
            np.testing.assert_allclose(covariance_quadrature(model, t), closed, rtol=0, atol=1e-10 * scale)


def test_chapman_kolmogorov(random_models, rng):
    for model in random_models(10):
        for sign in (-1, +1):
            flow = propagator(model, sign)
            s, t = rng.uniform(0.1, 3.0, size=2)
            expected = flow(s + t)
            scale = max(1.0, np.max(np.abs(expected)))
            np.testing.assert_allclose(flow(s) @ flow(t), expected, rtol=0, atol=1e-10 * scale)


def test_propagator_inverse(random_models):
    for model in random_models(10):
        e, f = propagator(model, -1), propagator(model, +1)
        for t in (0.1, 1.0, 5.0):
            scale = max(1.0, np.max(np.abs(f(t))) ** 2)
            np.testing.assert_allclose(e(-t) @ e(t), np.eye(model.N), rtol=0, atol=1e-10 * scale)
            np.testing.assert_allclose(f(t) @ e(t), np.eye(model.N), rtol=0, atol=1e-10 * scale)


def test_covariance_semigroup(random_models, rng):
    for model in random_models(10):
        flow, cov = propagator(model, +1), covariance_sde(model)
        s, t = rng.uniform(0.1, 3.0, size=2)
        expected = cov(s + t)
        scale = max(1.0, np.max(np.abs(expected)))
        np.testing.assert_allclose(flow(s) @ cov(t) @ flow(s).T + cov(s), expected, rtol=0, atol=1e-10 * scale)


def test_closed_form_matches_lyapunov_integral(random_models):
    for model in random_models(6):
        for sign, closed in ((-1, covariance_paper(model)), (+1, covariance_sde(model))):
            exact = lyapunov_integral(model, sign)
            for t in (0.4, 2.0):
                expected = closed(t)
                np.testing.assert_allclose(exact(t), expected, rtol=0, atol=1e-11 * np.max(np.abs(expected)))


def test_covariances_are_sign_conjugate(random_models):
    for model in random_models(5):
        s = sign_conjugation(model)
        c = covariance_paper(model)(1.3)
        np.testing.assert_allclose(s @ c @ s, covariance_sde(model)(1.3), atol=1e-12 * np.max(np.abs(c)))


def test_mean_flow_transports_covariance(random_models):
    for model in random_models(5):
        t = 0.9
        flow = propagator(model, +1)(t)
        transported = flow @ covariance_paper(model)(t) @ flow.T
        expected = covariance_sde(model)(t)
        np.testing.assert_allclose(transported, expected, atol=1e-11 * np.max(np.abs(expected)))


def test_covariances_positive_definite(random_models):
    for model in random_models(8):
        for t in (0.1, 1.0, 4.0):
            assert min_eigenvalue(covariance_paper(model)(t)) > 0
            factor_spd(covariance_sde(model)(t))


def test_weighted_form_equals_chain_seminorm(random_models, rng):
    triples = 0
    for model in random_models(20, seed=31):
        for _ in range(5):
            t = float(rng.uniform(0.1, 5.0))
            g = rng.normal(size=model.N)
            # rounding scales with the norm of the form, not its value
            scale = np.linalg.norm(weighted_form_matrix(model, t, -1), 2) * (g @ g)
            assert abs(weighted_form(model, t, -1, g) - chain_seminorm(model, t, g)) <= 1e-12 * scale
            triples += 1
    assert triples == 100


def test_factor_rejects_non_symmetric():
    with pytest.raises(NotSymmetric):
        factor_spd(np.array([[1.0, 0.5], [0.0, 1.0]]))


@pytest.mark.parametrize("matrix", [[[1.0, 1.0], [1.0, 1.0]], [[0.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, -1.0]]])
def test_factor_rejects_singular(matrix):
    with pytest.raises(NotPositiveDefinite):
        factor_spd(np.array(matrix))


def test_covariance_vanishes_at_zero(iterated):
    np.testing.assert_array_equal(covariance_paper(iterated)(0.0), 0.0)
    np.testing.assert_array_equal(propagator(iterated, +1)(0.0), np.eye(iterated.N))
