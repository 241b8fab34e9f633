"""Model validation, drift assembly and dilations."""

import numpy as np
import pytest

from hypobound.core.errors import (
    DimensionMismatch,
    InconsistentSigma,
    NonPositiveLambda,
    NotMonotone,
    NotPositive,
    NotSymmetric,
    RankDeficient,
)
from hypobound.core.model import assemble_drift, dilation, validate_structure


def _raw(**overrides):
    raw = {"r": 1, "dims": [2, 1], "A0": [[2.0, 0.5], [0.5, 1.0]], "blocks": [[[1.0], [0.5]]]}
    raw.update(overrides)
    return raw


def test_kolmogorov_structure(kolmogorov):
    assert kolmogorov.N == 2
    assert kolmogorov.dims == (1, 1)
    np.testing.assert_array_equal(assemble_drift(kolmogorov), [[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_array_equal(kolmogorov.diffusion_matrix, [[1.0, 0.0], [0.0, 0.0]])


def test_flat_and_nested_matrices_agree():
    nested = validate_structure(_raw())
    flat = validate_structure(_raw(A0=[2.0, 0.5, 0.5, 1.0], blocks=[[1.0, 0.5]]))
    assert nested == flat


def test_sigma_only_sets_a0():
    sigma = [[1.0, 0.0], [0.3, 2.0]]
    model = validate_structure(_raw(A0=None, sigma=sigma))
    s = np.asarray(sigma)
    np.testing.assert_allclose(model.A0, s @ s.T)
    np.testing.assert_array_equal(model.sigma, s)


def test_a0_only_sets_symmetric_root():
    model = validate_structure(_raw())
    np.testing.assert_allclose(model.sigma @ model.sigma.T, model.A0, atol=1e-12)
    np.testing.assert_allclose(model.sigma, model.sigma.T)


def test_round_trip_through_raw(random_models):
    for model in random_models(5):
        assert validate_structure(model.to_raw()) == model
        assert validate_structure(model) == model


@pytest.mark.parametrize(
    ("overrides", "error"),
    [
        ({"dims": [1, 2], "blocks": [[[1.0, 0.0]]], "A0": [1.0]}, NotMonotone),
        ({"dims": [2, 1, 1]}, DimensionMismatch),
        ({"r": 0, "dims": [2], "blocks": []}, DimensionMismatch),
        ({"A0": [[1.0, 0.2], [0.0, 1.0]]}, NotSymmetric),
        ({"A0": [[1.0, 0.0], [0.0, 0.0]]}, NotPositive),
        ({"A0": [[0.0, 0.0], [0.0, 0.0]]}, NotPositive),
        ({"A0": None}, DimensionMismatch),
        ({"A0": [1.0, 0.0, 0.0]}, DimensionMismatch),
        ({"blocks": [[[0.0], [0.0]]]}, RankDeficient),
        ({"blocks": []}, DimensionMismatch),
        ({"sigma": [[1.0, 0.0], [0.0, 1.0]]}, InconsistentSigma),
    ],
)
def test_invalid_structures(overrides, error):
    with pytest.raises(error):
        validate_structure(_raw(**overrides))


def test_rank_deficient_square_block():
    raw = {"r": 1, "dims": [2, 2], "A0": [1.0, 0.0, 0.0, 1.0], "blocks": [[[1.0, 2.0], [2.0, 4.0]]]}
    with pytest.raises(RankDeficient):
        validate_structure(raw)


def test_drift_is_nilpotent(random_models):
    for model in random_models(6):
        drift = assemble_drift(model)
        np.testing.assert_array_equal(np.linalg.matrix_power(drift, model.r + 1), 0.0)
        assert np.any(np.linalg.matrix_power(drift, model.r))


def test_chain_products(iterated):
    chains = iterated.chain_products()
    assert len(chains) == iterated.r + 1
    for chain in chains:
        np.testing.assert_array_equal(chain, np.eye(2))


def test_dilation_exponents(iterated):
    d = dilation(iterated, 2.0)
    np.testing.assert_array_equal(d.diag, [2.0, 2.0, 8.0, 8.0, 32.0, 32.0])
    np.testing.assert_array_equal(d.matrix, np.diag(d.diag))


def test_dilation_composes(kolmogorov):
    composed = dilation(kolmogorov, 1.5).compose(dilation(kolmogorov, 0.4))
    np.testing.assert_allclose(composed.diag, dilation(kolmogorov, 0.6).diag)


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_dilation_rejects_nonpositive(kolmogorov, lam):
    with pytest.raises(NonPositiveLambda):
        dilation(kolmogorov, lam)
