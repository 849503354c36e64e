import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moesonar import moe_core as mc, multiuser as mu

unit = st.floats(0.0, 1.0)


def brute(values, k, weights=None):
    subsets = list(itertools.combinations(range(len(values)), k))
    if weights is None:
        weights = [1.0 / len(subsets)] * len(subsets)
    return sum(w * math.prod(values[i] for i in s) for w, s in zip(weights, subsets)) ** (1.0 / k)


def test_examples():
    for k in range(1, 5):
        assert mu.symmetric_mean([0.5] * 4, k) == 0.5
    assert mu.symmetric_mean([1.0, 0.0], 1) == 0.5
    assert mu.symmetric_mean([1.0, 0.0], 2) == 0.0
    assert mu.symmetric_mean([0.9, 0.8, 0.6], 2) == pytest.approx(0.7615773105863909, abs=1e-15)


@given(st.lists(unit, min_size=1, max_size=7), st.data())
def test_matches_brute_force(values, data):
    k = data.draw(st.integers(1, len(values)))
    assert mu.symmetric_mean(values, k) == pytest.approx(brute(values, k), abs=1e-12)


@given(st.lists(unit, min_size=2, max_size=5), st.data())
def test_weighted_matches_brute_force(values, data):
    k = data.draw(st.integers(1, len(values)))
    n_sub = math.comb(len(values), k)
    raw = data.draw(st.lists(st.floats(0.01, 1.0), min_size=n_sub, max_size=n_sub))
    w = [x / sum(raw) for x in raw]
    w[-1] = 1.0 - sum(w[:-1])
    assert mu.symmetric_mean(values, k, w) == pytest.approx(brute(values, k, w), abs=1e-12)


def test_weights_by_subset_dict():
    w = {(0, 1): 0.5, (0, 2): 0.25, (1, 2): 0.25}
    assert mu.symmetric_mean([0.9, 0.8, 0.6], 2, w) == pytest.approx(math.sqrt(0.36 + 0.135 + 0.12))
    with pytest.raises(mc.MoeError):
        mu.symmetric_mean([0.9, 0.8, 0.6], 2, [0.5, 0.5, 0.5])


@given(unit, st.integers(1, 8), st.data())
def test_identical_inputs_fixed_point(v, n, data):
    k = data.draw(st.integers(1, n))
    assert mu.symmetric_mean([v] * n, k) == v


@given(st.lists(unit, min_size=2, max_size=8))
def test_monotone_in_k(values):
    f = [mu.symmetric_mean(values, k) for k in range(1, len(values) + 1)]
    assert all(a >= b - 1e-12 for a, b in zip(f, f[1:]))
    assert f[0] == pytest.approx(float(np.mean(values)))
    assert f[-1] == pytest.approx(math.prod(values) ** (1 / len(values)), abs=1e-12)


def test_combined_user_function_at_point():
    members = [mc.GaussianExp(1.0), mc.RationalHalf(0.5), mc.GaussianExp(3.0)]
    x = 0.8
    vals = [m(x) for m in members]
    am = mu.combine_user_functions(members, 1)
    gm = mu.combine_user_functions(members, 3)
    assert mu.moe_multiuser(am, mc.PointSample(x)).value == pytest.approx(np.mean(vals))
    assert mu.moe_multiuser(gm, mc.PointSample(x)).value == pytest.approx(math.prod(vals) ** (1 / 3))
    same = mu.combine_user_functions([mc.GaussianExp(2.0)] * 3, 2)
    assert mu.moe_multiuser(same, mc.PointSample(x)).value == pytest.approx(mc.GaussianExp(2.0)(x))


def test_combine_pdfs():
    g = mu.combine_observation_pdfs([mc.Gaussian1D(1.5, 2.0), mc.Gaussian1D(1.5, 2.0)])
    assert g.mean == pytest.approx(1.5) and g.sigma_o == pytest.approx(2.0 / math.sqrt(2))
    lab = ("a", "b")
    d = mu.combine_observation_pdfs([mc.DiscreteProb(lab, (0.6, 0.4)), mc.DiscreteProb(lab, (0.5, 0.5))])
    assert d.probs == pytest.approx((0.6, 0.4))
    assert "independent" in d.provenance
    with pytest.raises(mc.MoeError):
        mu.combine_observation_pdfs([mc.DiscreteProb(lab, (1.0, 0.0)), mc.DiscreteProb(lab, (0.0, 1.0))])


def test_multiuser_gaussian_integral():
    comp = mu.combine_user_functions([mc.GaussianExp(1.0), mc.GaussianExp(2.0)], 1)
    dist = mu.combine_observation_pdfs([mc.Gaussian1D(0.0, 1.0), mc.Gaussian1D(0.0, 1.0)])
    ref = 0.5 * (mc.moe_gaussian_closed(dist.sigma_o, 1.0).value + mc.moe_gaussian_closed(dist.sigma_o, 2.0).value)
    assert mu.moe_multiuser(comp, dist).value == pytest.approx(ref, abs=1e-6)
