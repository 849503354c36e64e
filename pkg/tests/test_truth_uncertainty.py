import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moesonar import moe_core as mc, truth_uncertainty as tu


def scalar(d, s, l):
    return math.sqrt(s * s / (s * s + l * l)) * math.exp(-d * d / (2 * (s * s + l * l)))


@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(0.1, 5))
def test_scalar_reduction(d, s, l):
    pair = tu.PairedObservation([d], [0.0])
    assert tu.moe_uncertain_truth_gaussian(pair, [[s * s]], [[l * l]]).value == pytest.approx(scalar(d, s, l), rel=1e-12)


def test_examples():
    assert tu.moe_uncertain_truth_gaussian(tu.PairedObservation([0.0], [0.0]), 1.0, 1.0).value == pytest.approx(
        0.70711, abs=1e-5)
    cs = np.array([[2.0, 0.4], [0.4, 1.0]])
    pair = tu.PairedObservation([1.0, -0.5], [0.2, 0.1])
    limit = tu.moe_uncertain_truth_gaussian(pair, cs, 1e-12 * np.eye(2)).value
    assert limit == pytest.approx(mc.GaussianCov(cs)(pair.difference), abs=1e-6)


def random_pd(rng, n):
    a = rng.normal(size=(n, n))
    return a @ a.T + 0.3 * np.eye(n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_stable_matches_literal(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        pair = tu.PairedObservation(rng.normal(size=n), rng.normal(size=n))
        cs, cl = random_pd(rng, n), random_pd(rng, n)
        assert tu.moe_uncertain_truth_gaussian(pair, cs, cl).value == pytest.approx(
            tu.moe_uncertain_truth_literal(pair, cs, cl), rel=1e-9)


def test_monotone_in_reference_noise():
    pair = tu.PairedObservation([0.3, 0.1], [0.0, 0.0])
    cs = np.eye(2)
    vals = [tu.moe_uncertain_truth_gaussian(pair, cs, s * np.eye(2)).value for s in (0.01, 0.1, 1.0, 10.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_sampled_degenerate_and_trivial():
    pair = tu.PairedObservation([0.4], [0.1])
    g = mc.GaussianExp(0.7)
    v = tu.moe_uncertain_truth_sampled(g, tu.SampledReference(np.zeros((5, 1))), pair)
    assert v.value == g(pair.difference[0])
    one = mc.UniformWindow(-1e9, 1e9)
    assert tu.moe_uncertain_truth_sampled(one, tu.GaussianReference([[4.0]]), pair, k=1000).value == 1.0


def test_sampled_matches_closed_form():
    pair = tu.PairedObservation([0.5, 0.0], [0.0, 0.2])
    cs, cl = np.array([[1.0, 0.2], [0.2, 0.5]]), np.diag([0.3, 0.8])
    s = tu.moe_uncertain_truth_sampled(mc.GaussianCov(cs), tu.GaussianReference(cl), pair, k=200_000, seed=1)
    a = tu.moe_uncertain_truth_gaussian(pair, cs, cl).value
    assert abs(s.value - a) < 3 * s.stderr


def test_shape_errors():
    with pytest.raises(mc.MoeError):
        tu.PairedObservation([1.0, 2.0], [1.0])
    with pytest.raises(mc.MoeError):
        tu.moe_uncertain_truth_gaussian(tu.PairedObservation([1.0], [0.0]), np.eye(2), np.eye(2))
    with pytest.raises(mc.MoeError):
        tu.GaussianReference([[1.0, 2.0], [2.0, 1.0]])
