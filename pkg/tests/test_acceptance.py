"""End-to-end acceptance checks; each test reports one PASS/FAIL line."""
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from moesonar import assess, moe_core as mc, multiuser as mu, sonar_sim as s, truth_uncertainty as tu
from moesonar.cli import main

LAB = ("E", "N", "F")


def test_01_discrete_identity_exact(acceptance_report):
    v = mc.moe_discrete(mc.DiscreteVector(LAB, (1.0, 0.0, 0.0)), mc.DiscreteProb(LAB, (0.60, 0.25, 0.15))).value
    ok = abs(v - 0.60) <= 2.3e-16
    acceptance_report(1, ok, f"strict identity MOE = {v!r}")
    assert ok


def test_02_quadrature_vs_closed_form(acceptance_report):
    rng = random.Random(20260101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        so, ss = rng.uniform(0.1, 10), rng.uniform(0.1, 10)
        q = mc.moe_integrate(mc.GaussianExp(ss), mc.Gaussian1D(0.0, so)).value
        worst = max(worst, abs(q - ss / math.sqrt(ss * ss + so * so)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 10.0
    acceptance_report(2, ok, f"200 pairs, max error {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_03_window_confidence(acceptance_report):
    errs = [abs(mc.moe_window_gaussian(1.959964 * so, so).value - 0.95) for so in (0.01, 1.0, 37.0)]
    ok = max(errs) <= 1e-6
    acceptance_report(3, ok, f"window at 1.959964 sigma, max |M - 0.95| = {max(errs):.2e}")
    assert ok


def test_04_ten_variables(acceptance_report):
    p = mc.combine_product([0.8] * 10).value
    g = mc.combine_geometric([0.8] * 10).value
    ok = 0.105 <= p <= 0.110 and g == 0.8
    acceptance_report(4, ok, f"product {p:.5f}, geometric mean {g!r}")
    assert ok


def test_05_symmetric_combination(acceptance_report):
    rng = random.Random(5)
    fixed_bad = 0
    for _ in range(200):
        v, n = rng.random(), rng.randint(1, 8)
        fixed_bad += sum(mu.symmetric_mean([v] * n, k) != v for k in range(1, n + 1))
    violations = 0
    for _ in range(1000):
        vals = [rng.random() for _ in range(rng.randint(2, 8))]
        f = [mu.symmetric_mean(vals, k) for k in range(1, len(vals) + 1)]
        # allow only floating-point rounding at equality
        violations += sum(b > a * (1 + 1e-12) for a, b in zip(f, f[1:]))
    ok = fixed_bad == 0 and violations == 0
    acceptance_report(5, ok, f"fixed-point mismatches {fixed_bad}, monotonicity violations {violations}/1000 tuples")
    assert ok


def _random_pd(rng, n):
    a = rng.normal(size=(n, n))
    return a @ a.T + 0.3 * np.eye(n)


def test_06_uncertain_truth_oracle(acceptance_report):
    rng = np.random.default_rng(2024)
    worst_z = 0.0
    for i in range(50):
        n = 1 + i % 3
        cs, cl = _random_pd(rng, n), _random_pd(rng, n) * rng.uniform(0.1, 2.0)
        pair = tu.PairedObservation(rng.normal(size=n), rng.normal(size=n))
        closed = tu.moe_uncertain_truth_gaussian(pair, cs, cl).value
        mcs = tu.moe_uncertain_truth_sampled(mc.GaussianCov(cs), tu.GaussianReference(cl), pair, k=10**6, seed=i)
        worst_z = max(worst_z, abs(closed - mcs.value) / mcs.stderr)
    worst_lim = 0.0
    for n in (1, 2, 3):
        cs = _random_pd(rng, n)
        pair = tu.PairedObservation(rng.normal(size=n), rng.normal(size=n))
        lim = tu.moe_uncertain_truth_gaussian(pair, cs, 1e-12 * np.eye(n)).value
        worst_lim = max(worst_lim, abs(lim - mc.GaussianCov(cs)(pair.difference)))
    ok = worst_z < 3.0 and worst_lim < 1e-6
    acceptance_report(6, ok, f"50 configs, max |closed - MC| = {worst_z:.2f} SE; delta limit error {worst_lim:.1e}")
    assert ok


def test_07_triangulation(acceptance_report):
    s1, s2 = s.SensorSpec(1, (0.0, 0.0), 0.5), s.SensorSpec(2, (10000.0, 0.0), 0.5)

    def bearings(x, y):
        return float(s.compass_bearing(x, y)), float(s.compass_bearing(x - 10000.0, y))

    ident = (1 / 3, 1 / 3, 1 / 3)
    b1, b2 = bearings(5000.0, 5000.0)
    p = s.triangulate(s.SensorReport(0.0, 1, 1, b1, ident), s.SensorReport(0.0, 2, 1, b2, ident), s1, s2)
    round_trip = math.hypot(p.pos_est[0] - 5000.0, p.pos_est[1] - 5000.0)
    rng = np.random.default_rng(7)
    worst = 0.0
    crossings = []
    for x, y in [(5000, 2000), (5000, 8000), (5000, 20000), (1000, 6000), (12000, 9000), (-3000, 7000)]:
        b1, b2 = bearings(x, y)
        crossings.append(abs(float(s.wrap_degrees(b1 - b2))))
        J = s.intersection_jacobian(s1.pos, s2.pos, b1, b2)
        lin = J @ np.diag([math.radians(0.5) ** 2] * 2) @ J.T
        xs, ys, *_ = s.intersect_bearings(s1.pos, s2.pos, b1 + rng.normal(0, 0.5, 10**5), b2 + rng.normal(0, 0.5, 10**5))
        emp = np.cov(np.vstack([xs, ys]))
        worst = max(worst, np.linalg.norm(emp - lin) / np.linalg.norm(emp))
    ok = round_trip < 1e-6 and worst < 0.15 and min(crossings) > 20
    acceptance_report(7, ok, f"round trip {round_trip:.1e} m; covariance Frobenius gap {worst:.1%} "
                             f"(crossings {min(crossings):.0f}-{max(crossings):.0f} deg)")
    assert ok


def _overall(trackers, n_runs, base_seed):
    runs = assess.monte_carlo(s.default_scenario(), s.default_sensors(), trackers, assess.default_users(),
                              n_runs, base_seed)
    return assess.overall_records([r for run in runs for r in run.records])


@pytest.mark.slow
def test_08_significance_calibration(acceptance_report):
    t = assess.t_quantile(0.95, 38)
    same = (s.default_trackers()[0],)
    n_sig = n_tot = 0
    for c in range(10):
        a = assess.samples_by_instant(_overall(same, 20, 100000 + 2000 * c), "tracker1")
        b = assess.samples_by_instant(_overall(same, 20, 101000 + 2000 * c), "tracker1")
        rows, _ = assess.significance_test(a, b)
        n_sig += sum(r.significant for r in rows)
        n_tot += len(rows)
    rate = n_sig / n_tot
    ok = abs(t - 2.0244) <= 1e-3 and n_tot >= 500 and abs(rate - 0.05) <= 0.03
    acceptance_report(8, ok, f"t(38) = {t:.4f}; null rate {n_sig}/{n_tot} = {rate:.1%}")
    assert ok


@pytest.mark.slow
def test_09_tracker_direction(acceptance_report):
    t1, t2 = s.default_trackers()
    assert math.isclose(t2.q, 100 * t1.q)
    overall = _overall((t1, t2), 20, 0)
    m1 = float(np.mean([r.moe for r in overall if r.tracker_id == t1.name]))
    m2 = float(np.mean([r.moe for r in overall if r.tracker_id == t2.name]))
    rows, _ = assess.significance_test(assess.samples_by_instant(overall, t1.name),
                                       assess.samples_by_instant(overall, t2.name))
    ok = m1 > m2
    acceptance_report(9, ok, f"mean overall MOE {m1:.3f} vs {m2:.3f}; "
                             f"{sum(r.significant for r in rows)} of {len(rows)} instants significant")
    assert ok


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.slow
def test_10_determinism(tmp_path, acceptance_report):
    trees = []
    for name in ("a", "b"):
        assert main(["pipeline", "--out-dir", str(tmp_path / name), "--seed", "123", "--runs", "20"]) == 0
        trees.append(_tree(tmp_path / name))
    ok = trees[0] == trees[1] and len(trees[0]) > 0
    acceptance_report(10, ok, f"{len(trees[0])} files byte-identical across two invocations")
    assert ok
