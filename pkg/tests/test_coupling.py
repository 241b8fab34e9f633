"""Synchronous couplings: start offsets, transported offsets, sampled pairs and Euler paths."""

from math import factorial

import numpy as np
import pytest

from hypobound.core.coupling import (
    CouplingSpec,
    alpha_operator,
    bound_samples,
    coupled_start,
    difference_quotient,
    directional_bound,
    quotient_samples,
    reverse_alpha,
    sample_coupled_pair,
    trajectory_simulate,
    transported_alpha_operator,
)
from hypobound.core.errors import BadAlpha, BadParams, DimensionMismatch
from hypobound.core.matfun import propagator
from hypobound.core.model import assemble_drift
from hypobound.core.testfns import make_testfn


def test_spec_requires_unit_leading_alpha():
    with pytest.raises(BadAlpha):
        CouplingSpec(alpha=(2.0, 0.0), v=[1.0])
    with pytest.raises(BadParams):
        CouplingSpec(alpha=(1.0, 0.0), v=[0.0])
    with pytest.raises(BadParams):
        CouplingSpec(alpha=(1.0, 0.0), v=[1.0], eps=0.0)


def test_alpha_operator_checks_length(kolmogorov):
    with pytest.raises(BadAlpha):
        alpha_operator(kolmogorov, (1.0, 0.0, 0.0))
    with pytest.raises(BadAlpha):
        alpha_operator(kolmogorov, (0.5, 0.0))


def test_reverse_alpha_values(iterated):
    assert reverse_alpha(iterated, 2.0) == pytest.approx((1.0, -2.0, 2.0))


def test_right_coupling_offsets(random_models, rng):
    for model in random_models(5):
        v = rng.normal(size=model.dims[0])
        pair = coupled_start(rng.normal(size=model.N), CouplingSpec.right(model, v, eps=1e-3), model)
        t = 1.7
        for k, (chain, block) in enumerate(zip(model.chain_products(), pair.block_offsets(model, t))):
            np.testing.assert_allclose(block, 1e-3 * t**k / factorial(k) * (chain.T @ v), atol=1e-13)


def test_reverse_coupling_closes_upper_blocks(random_models, rng):
    for model in random_models(6):
        v = rng.normal(size=model.dims[0])
        t0 = 1.3
        pair = coupled_start(rng.normal(size=model.N), CouplingSpec.reverse(model, t0, v, eps=0.01), model)
        blocks = pair.block_offsets(model, t0)
        np.testing.assert_allclose(blocks[0], 0.01 * v, atol=1e-14)
        for block in blocks[1:]:
            np.testing.assert_allclose(block, 0.0, atol=1e-12)


def test_offset_is_transported_start_difference(iterated, rng):
    cs = CouplingSpec(alpha=(1.0, 0.5, -0.25), v=np.array([1.0, -1.0]), eps=0.1)
    x = rng.normal(size=iterated.N)
    pair = coupled_start(x, cs, iterated)
    for t in (0.0, 0.6, 2.0):
        np.testing.assert_allclose(
            pair.offset(t), propagator(iterated, +1)(t) @ (pair.primary_start - pair.shadow_start), atol=1e-14
        )


def test_direction_must_live_in_first_block(iterated):
    with pytest.raises(DimensionMismatch):
        coupled_start(np.zeros(iterated.N), CouplingSpec(alpha=(1.0, 0.0, 0.0), v=[1.0, 0.0, 0.0]), iterated)


def test_sampled_pair_differs_by_offset(iterated, rng):
    cs = CouplingSpec.right(iterated, np.array([0.0, 1.0]), eps=0.5)
    pair = coupled_start(rng.normal(size=iterated.N), cs, iterated)
    sample = sample_coupled_pair(iterated, pair, 1.1, 1_000, seed=4)
    np.testing.assert_allclose(sample.primary.points - sample.shadow, np.tile(pair.offset(1.1), (1_000, 1)))


def test_transported_alpha_operator_of_reverse_alpha(kolmogorov):
    # reverse alpha at t cancels the transport on the second block
    np.testing.assert_allclose(transported_alpha_operator(kolmogorov, reverse_alpha(kolmogorov, 2.0), 2.0), [[1.0, 0.0]])
    np.testing.assert_allclose(transported_alpha_operator(kolmogorov, (1.0, 0.0), 2.0), [[1.0, 2.0]])


def test_quotient_exact_for_linear_functions(iterated, small_mc, rng):
    f = make_testfn("linear", {"a": rng.normal(size=iterated.N).tolist()})
    cs = CouplingSpec(alpha=(1.0, -0.3, 0.7), v=np.array([0.6, 0.8]), eps=1e-3)
    x = rng.normal(size=iterated.N)
    quotient = difference_quotient(iterated, f, cs, 0.9, x, small_mc)
    bound = directional_bound(iterated, f, cs, 0.9, x, small_mc)
    assert abs(quotient.value) == pytest.approx(bound.value, rel=1e-8)


def test_quotient_samples_approach_bound_samples(iterated, rng):
    f = make_testfn("exp-neg-quadratic", {"Q": (0.3 * np.eye(iterated.N)).tolist(), "s": 1.0, "delta": 0.1})
    cs = CouplingSpec.reverse(iterated, 1.0, np.array([1.0, 0.0]), eps=1e-4)
    points = rng.normal(size=(50, iterated.N))
    np.testing.assert_allclose(
        np.abs(quotient_samples(iterated, f, cs, 1.0, points)), bound_samples(iterated, f, cs, 1.0, points), atol=1e-7
    )


# =============================================================================
# Euler paths
# =============================================================================


def test_euler_deterministic_flow_converges_at_first_order(iterated, rng):
    x = rng.normal(size=iterated.N)
    exact = propagator(iterated, +1)(2.0) @ x
    errors = [
        np.linalg.norm(trajectory_simulate(iterated, x, dt, 2.0, seed=1, sigma=0.0).endpoint - exact)
        for dt in (0.1, 0.05, 0.025)
    ]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 0.9)


def test_euler_paths_with_common_noise_are_coupled(iterated, rng):
    x = rng.normal(size=iterated.N)
    delta = rng.normal(size=iterated.N)
    primary = trajectory_simulate(iterated, x, 0.01, 1.0, seed=21)
    shadow = trajectory_simulate(iterated, x - delta, 0.01, 1.0, seed=21)
    drift_only = trajectory_simulate(iterated, delta, 0.01, 1.0, seed=21, sigma=0.0)
    np.testing.assert_allclose(primary.states - shadow.states, drift_only.states, atol=1e-12)


def test_single_euler_step(kolmogorov):
    x = np.array([0.5, -0.2])
    path = trajectory_simulate(kolmogorov, x, 0.3, 0.3, seed=9)
    noise = np.random.default_rng(np.random.SeedSequence(9)).standard_normal((1, 1))[0, 0] * np.sqrt(0.3)
    expected = (np.eye(2) + 0.3 * assemble_drift(kolmogorov)) @ x + np.array([noise, 0.0])
    np.testing.assert_allclose(path.endpoint, expected)
    np.testing.assert_allclose(path.times, [0.0, 0.3])


def test_euler_rejects_bad_step(kolmogorov):
    with pytest.raises(ValueError):
        trajectory_simulate(kolmogorov, np.zeros(2), 0.0, 1.0, seed=1)
    with pytest.raises(ValueError):
        trajectory_simulate(kolmogorov, np.zeros(2), 2.0, 1.0, seed=1)
