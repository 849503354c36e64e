import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moesonar import sonar_sim as s


def one_leg(speed=5.0, heading=90.0, duration=100.0):
    return s.ScenarioConfig((s.TargetConfig(1, "F", (0.0, 0.0), (s.Leg(duration, speed, heading),)),), dt=10.0)


def test_scenario_kinematics():
    truth = s.generate_scenario(one_leg())
    assert len(truth) == 11
    assert all(r.heading == 90.0 for r in truth)
    xs = [r.pos[0] for r in truth]
    assert np.allclose(np.diff(xs), 50.0)
    assert np.allclose([r.pos[1] for r in truth], 0.0, atol=1e-9)


def test_default_scenario_allegiances():
    truth = s.generate_scenario(s.default_scenario())
    assert {r.target_id: r.allegiance for r in truth} == {1: "F", 2: "E"}


def test_scenario_errors():
    with pytest.raises(s.SimulationError):
        s.generate_scenario(s.ScenarioConfig(()))
    with pytest.raises(s.SimulationError):
        s.generate_scenario(one_leg(duration=0.0))


def test_scenario_determinism_and_jitter():
    cfg = s.ScenarioConfig(one_leg().targets, dt=10.0, start_jitter=50.0)
    assert s.generate_scenario(cfg, 3) == s.generate_scenario(cfg, 3)
    assert s.generate_scenario(cfg, 3) != s.generate_scenario(cfg, 4)


def test_sensor_exact_and_silent():
    truth = s.generate_scenario(one_leg())
    spec = s.SensorSpec(1, (0.0, -5000.0), bearing_sigma=1e-12, detection_prob=1.0)
    reps = s.simulate_sensor(truth, spec, 0)
    assert len(reps) == len(truth)
    for r, t in zip(reps, truth):
        exact = float(s.compass_bearing(t.pos[0], t.pos[1] + 5000.0))
        assert abs(s.wrap_degrees(r.bearing - exact)) < 1e-9
        assert sum(r.identity) == pytest.approx(1.0)
    assert s.simulate_sensor(truth, s.SensorSpec(1, (0.0, -5000.0), 0.1, detection_prob=0.0), 0) == []


def report(sensor, bearing, t=0.0, ident=(1 / 3, 1 / 3, 1 / 3)):
    return s.SensorReport(t, sensor, 1, bearing, ident)


S1 = s.SensorSpec(1, (0.0, 0.0), 0.5)
S2 = s.SensorSpec(2, (10000.0, 0.0), 0.5)


def bearings_to(x, y):
    return float(s.compass_bearing(x - S1.pos[0], y - S1.pos[1])), float(s.compass_bearing(x - S2.pos[0], y - S2.pos[1]))


def test_triangulation_round_trip():
    b1, b2 = bearings_to(5000.0, 5000.0)
    p = s.triangulate(report(1, b1), report(2, b2), S1, S2)
    assert math.hypot(p.pos_est[0] - 5000.0, p.pos_est[1] - 5000.0) < 1e-6


def test_unusable_geometry():
    assert s.triangulate(report(1, 30.0), report(2, 30.0), S1, S2) is None
    # both rays point south, intersection behind the sensors
    b1, b2 = bearings_to(5000.0, 5000.0)
    assert s.triangulate(report(1, (b1 + 180) % 360), report(2, (b2 + 180) % 360), S1, S2) is None


@given(st.floats(-20000, 30000), st.floats(1000, 40000))
def test_jacobian_finite_difference(x, y):
    b1, b2 = bearings_to(x, y)
    c = abs(math.sin(math.radians(b1 - b2)))
    if c < 0.05:
        return
    J = s.intersection_jacobian(S1.pos, S2.pos, b1, b2)
    h = 1e-6
    for k in range(2):
        db = [0.0, 0.0]
        db[k] = math.degrees(h)
        xp, yp, *_ = s.intersect_bearings(S1.pos, S2.pos, b1 + db[0], b2 + db[1])
        xm, ym, *_ = s.intersect_bearings(S1.pos, S2.pos, b1 - db[0], b2 - db[1])
        fd = np.array([xp - xm, yp - ym]) / (2 * h)
        assert np.allclose(J[:, k], fd, rtol=1e-4, atol=1e-3 * max(1.0, np.abs(J).max()))


def test_fuse_identity():
    assert s.fuse_identity((0.2, 0.3, 0.5), (0.2, 0.3, 0.5)) == pytest.approx((0.2, 0.3, 0.5))
    assert s.fuse_identity((1, 0, 0), (0, 1, 0)) == pytest.approx((0.5, 0.5, 0.0))
    assert s.fuse_identity((0.6, 0.2, 0.2), (0.8, 0.1, 0.1)) == pytest.approx((0.7, 0.15, 0.15))
    with pytest.raises(s.SimulationError):
        s.fuse_identity((0.6, 0.6, 0.2), (1, 0, 0))


@given(st.floats(0, 1), st.floats(0, 1))
def test_fuse_identity_stays_on_simplex(a, b):
    v1 = (a, 1 - a, 0.0)
    v2 = (0.0, b, 1 - b)
    f = s.fuse_identity(v1, v2)
    assert all(x >= 0 for x in f) and sum(f) == pytest.approx(1.0)


def test_plot_rejects_non_psd():
    with pytest.raises(s.SimulationError):
        s.Plot(0.0, 1, (0.0, 0.0), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_tracker_noiseless_convergence():
    truth = s.generate_scenario(one_leg(duration=200.0))
    plots = [s.Plot(r.t, 1, r.pos, np.eye(2) * 1e-6) for r in truth]
    track = s.run_tracker(plots, s.TrackerConfig("t", 1e-4))
    for st_, r in list(zip(track.states, truth))[5:]:
        assert math.hypot(st_.state[0] - r.pos[0], st_.state[1] - r.pos[1]) < 1.0


def test_tracker_single_plot_and_errors():
    p = s.Plot(0.0, 1, (10.0, 20.0), np.eye(2))
    tr = s.run_tracker([p], s.TrackerConfig("t", 1e-3))
    assert len(tr.states) == 1 and tuple(tr.states[0].state[:2]) == (10.0, 20.0)
    with pytest.raises(s.SimulationError):
        s.run_tracker([], s.TrackerConfig("t", 1e-3))
    with pytest.raises(s.SimulationError):
        s.run_tracker([p, p], s.TrackerConfig("t", 1e-3))


def test_tracker_covariance_stays_psd():
    sim = s.simulate_run(s.default_scenario(), s.default_sensors(), s.default_trackers(), seed=5)
    for tracks in sim.tracks.values():
        for tr in tracks:
            for st_ in tr.states:
                assert np.allclose(st_.cov, st_.cov.T)
                assert np.linalg.eigvalsh(st_.cov).min() > -1e-9


def test_nis_is_chi_square_like():
    # NIS of a consistent filter averages the measurement dimension (2)
    sim = s.simulate_run(s.default_scenario(), s.default_sensors(), (s.TrackerConfig("t", 1e-3),), seed=11)
    nis = np.concatenate([[x.nis for x in tr.states[1:]] for tr in sim.tracks["t"]])
    assert 1.0 < float(np.mean(nis)) < 3.5


def test_kinematics_convention():
    k = s.kinematics((0, 0, 0, 5))
    assert k.heading == pytest.approx(0.0) and k.speed == pytest.approx(5.0)
    assert s.kinematics((0, 0, 5, 0)).heading == pytest.approx(90.0)
    assert not s.kinematics((0, 0, 0, 0)).heading_defined


@given(st.floats(-1e4, 1e4))
def test_wrap_degrees_range(a):
    w = float(s.wrap_degrees(a))
    assert -180.0 <= w < 180.0
    assert math.isclose(math.cos(math.radians(w)), math.cos(math.radians(a)), abs_tol=1e-9)
