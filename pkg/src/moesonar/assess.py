"""MOE time series, aggregation, multi-user combination and significance tests.

Per time instant, each track state is scored against the truth for every
user: position error (Euclidean), speed error, heading error (wrapped to
[-180, 180)) and identity (dot product of the user's acceptance vector for
the true allegiance with the track's identity vector). The overall MOE used
for tracker comparison combines users by the geometric mean, then takes the
geometric mean over variables per target and the arithmetic mean over
targets.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from moesonar.moe_core import DiscreteVector, GaussianExp, RationalHalf, UserFunction
from moesonar.multiuser import symmetric_mean
from moesonar.sonar_sim import (
    ALLEGIANCES,
    ScenarioConfig,
    SensorSpec,
    SimulationError,
    Track,
    TrackerConfig,
    TruthRecord,
    kinematics,
    simulate_run,
    wrap_degrees,
)

VARIABLES = ("position", "speed", "heading", "identity")
COMBINED = "combined"
ALL_TARGETS = None

SCHEMES = (
    "over_targets_arithmetic",
    "over_variables_geometric",
    "synthesis_targets_of_variables",
    "reversed_variables_of_targets",
)

USERS_AM = "users_am"
USERS_GM = "users_gm"


class AssessmentError(ValueError):
    pass


@dataclass(frozen=True)
class UserSpec:
    user_id: str
    position: UserFunction
    speed: UserFunction
    heading: UserFunction
    identity: Mapping[str, DiscreteVector]

    def __post_init__(self) -> None:
        for lab, vec in self.identity.items():
            if lab not in ALLEGIANCES:
                raise AssessmentError(f"user {self.user_id}: unknown allegiance {lab!r}")
            if tuple(vec.labels) != ALLEGIANCES:
                raise AssessmentError(f"user {self.user_id}: identity vector must be over {ALLEGIANCES}")


def default_users() -> tuple[UserSpec, UserSpec]:
    """The two naval users: Gaussian-exponential and rational user functions."""
    return (
        UserSpec(
            "user1", GaussianExp(0.5), GaussianExp(2.0), GaussianExp(5.0),
            {"F": DiscreteVector(ALLEGIANCES, (0.2, 0.2, 0.6)),
             "E": DiscreteVector(ALLEGIANCES, (0.6, 0.2, 0.2))},
        ),
        UserSpec(
            "user2", RationalHalf(0.2), RationalHalf(1.0), RationalHalf(2.0),
            {"F": DiscreteVector(ALLEGIANCES, (0.0, 0.0, 1.0)),
             "E": DiscreteVector(ALLEGIANCES, (1.0, 0.0, 0.0))},
        ),
    )


@dataclass(frozen=True)
class MoeRecord:
    t: float
    tracker_id: str
    target_id: int | None
    user_id: str
    variable: str
    moe: float
    run_index: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.moe <= 1.0):
            raise AssessmentError(f"MOE {self.moe} outside [0, 1]")


@dataclass(frozen=True)
class SignificanceRow:
    t: float
    n1: int
    n2: int
    mean1: float
    mean2: float
    delta_mean: float
    delta_limit: float
    significant: bool


def _tkey(t: float) -> float:
    return round(float(t), 6)


# ---------------------------------------------------------------------------
# MOE series
# ---------------------------------------------------------------------------


def compute_moe_series(tracks: Mapping[str, Sequence[Track]], truth: Sequence[TruthRecord],
                       users: Sequence[UserSpec], run_index: int = 0) -> list[MoeRecord]:
    """Single-sample MOEs for every track state, user and variable.

    Heading is skipped where the track speed is too small to define one.
    """
    truth_at = {(r.target_id, _tkey(r.t)): r for r in truth}
    out: list[MoeRecord] = []
    for tracker_id in tracks:
        for track in tracks[tracker_id]:
            for st in track.states:
                ref = truth_at.get((track.target_label, _tkey(st.t)))
                if ref is None:
                    continue
                kin = kinematics(st.state)
                pos_err = math.hypot(kin.pos[0] - ref.pos[0], kin.pos[1] - ref.pos[1])
                spd_err = kin.speed - ref.speed
                hdg_err = float(wrap_degrees(kin.heading - ref.heading)) if kin.heading_defined else None
                for user in users:
                    vec = user.identity.get(ref.allegiance)
                    if vec is None:
                        raise AssessmentError(
                            f"user {user.user_id} has no identity vector for allegiance {ref.allegiance!r}")
                    values = {
                        "position": user.position(pos_err),
                        "speed": user.speed(spd_err),
                        "identity": math.fsum(f * p for f, p in zip(vec.values, st.identity)),
                    }
                    if hdg_err is not None:
                        values["heading"] = user.heading(hdg_err)
                    for var in VARIABLES:
                        if var in values:
                            out.append(MoeRecord(st.t, tracker_id, track.target_label, user.user_id,
                                                 var, min(1.0, max(0.0, values[var])), run_index))
    return out


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def _geo(vals: Sequence[float]) -> float:
    return math.prod(vals) ** (1.0 / len(vals))


def _arith(vals: Sequence[float]) -> float:
    return math.fsum(vals) / len(vals)


def _group(records: Iterable[MoeRecord], key) -> dict:
    groups: dict = defaultdict(list)
    for r in records:
        groups[key(r)].append(r)
    return groups


def _over_targets(records: Iterable[MoeRecord]) -> list[MoeRecord]:
    out = []
    for (run, t, trk, user, var), grp in sorted(
            _group(records, lambda r: (r.run_index, _tkey(r.t), r.tracker_id, r.user_id, r.variable)).items(),
            key=lambda kv: kv[0]):
        out.append(MoeRecord(grp[0].t, trk, ALL_TARGETS, user, var, _arith([g.moe for g in grp]), run))
    return out


def _over_variables(records: Iterable[MoeRecord]) -> list[MoeRecord]:
    out = []
    for (run, t, trk, tgt, user), grp in sorted(
            _group(records, lambda r: (r.run_index, _tkey(r.t), r.tracker_id,
                                       -1 if r.target_id is None else r.target_id, r.user_id)).items(),
            key=lambda kv: kv[0]):
        out.append(MoeRecord(grp[0].t, trk, grp[0].target_id, user, COMBINED, _geo([g.moe for g in grp]), run))
    return out


def aggregate(records: Sequence[MoeRecord], scheme: str) -> list[MoeRecord]:
    """Combine MOE records over targets and/or variables at each instant.

    ``synthesis_targets_of_variables`` is the mean over targets of per-target
    geometric means over variables. ``reversed_variables_of_targets`` does it
    the other way round and is generally a different number.
    """
    if scheme == "over_targets_arithmetic":
        return _over_targets(records)
    if scheme == "over_variables_geometric":
        return _over_variables(records)
    if scheme == "synthesis_targets_of_variables":
        return _over_targets(_over_variables(records))
    if scheme == "reversed_variables_of_targets":
        return _over_variables(_over_targets(records))
    raise AssessmentError(f"unknown aggregation scheme {scheme!r}; choose from {SCHEMES}")


def combine_users(records: Sequence[MoeRecord], mode: str = "geometric",
                  weights: Mapping[str, float] | None = None,
                  user_ids: Sequence[str] | None = None) -> list[MoeRecord]:
    """Combine per-user MOE values at each (run, instant, tracker, target, variable).

    For single-sample observations, combining the users' MOE values this way
    is identical to evaluating the combined user function (order 1 for
    ``arithmetic``, order ``I`` for ``geometric``), since both go through
    :func:`moesonar.multiuser.symmetric_mean`. Weights apply to the
    arithmetic mode only; the geometric combination has a single subset.
    """
    if mode not in ("arithmetic", "geometric"):
        raise AssessmentError(f"unknown user-combination mode {mode!r}")
    if user_ids is None:
        user_ids = sorted({r.user_id for r in records})
    user_ids = list(user_ids)
    if not user_ids:
        return []
    w = None
    if weights is not None:
        if mode == "geometric":
            raise AssessmentError("weights are not used by the geometric user combination")
        if set(weights) != set(user_ids):
            raise AssessmentError("weights must name every combined user")
        w = [float(weights[u]) for u in user_ids]
    k = 1 if mode == "arithmetic" else len(user_ids)
    new_id = USERS_AM if mode == "arithmetic" else USERS_GM
    out = []
    groups = _group((r for r in records if r.user_id in user_ids),
                    lambda r: (r.run_index, _tkey(r.t), r.tracker_id,
                               -1 if r.target_id is None else r.target_id, r.variable))
    for key, grp in sorted(groups.items(), key=lambda kv: kv[0]):
        by_user = {g.user_id: g.moe for g in grp}
        if set(by_user) != set(user_ids) or len(grp) != len(user_ids):
            raise AssessmentError(f"mismatched users at {key}: have {sorted(by_user)}, expected {user_ids}")
        val = symmetric_mean([by_user[u] for u in user_ids], k, w)
        out.append(replace(grp[0], user_id=new_id, moe=min(1.0, max(0.0, val))))
    return out


def overall_records(records: Sequence[MoeRecord], user_mode: str = "geometric") -> list[MoeRecord]:
    """Overall MOE over users, variables and targets per instant."""
    per_var = [r for r in records if r.variable in VARIABLES and r.target_id is not None]
    return aggregate(combine_users(per_var, user_mode), "synthesis_targets_of_variables")


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    run_index: int
    seed: int
    sim: object
    records: list[MoeRecord]


def run_pipeline(scenario: ScenarioConfig, sensors: Sequence[SensorSpec],
                 trackers: Sequence[TrackerConfig], users: Sequence[UserSpec],
                 seed: int, run_index: int = 0) -> RunResult:
    sim = simulate_run(scenario, sensors, trackers, seed)
    records = compute_moe_series(sim.tracks, sim.truth, users, run_index)
    return RunResult(run_index, seed, sim, records)


def monte_carlo(scenario: ScenarioConfig, sensors: Sequence[SensorSpec],
                trackers: Sequence[TrackerConfig], users: Sequence[UserSpec],
                n_runs: int, base_seed: int = 0) -> list[RunResult]:
    """Independent pipeline runs with seed ``base_seed + run_index``."""
    if n_runs < 1:
        raise AssessmentError("n_runs must be >= 1")
    out = []
    for i in range(n_runs):
        try:
            out.append(run_pipeline(scenario, sensors, trackers, users, base_seed + i, i))
        except (SimulationError, AssessmentError) as exc:
            raise type(exc)(f"run {i}: {exc}") from exc
    return out


def samples_by_instant(records: Iterable[MoeRecord], tracker_id: str) -> dict[float, list[float]]:
    """Per-instant MOE samples across runs for one tracker."""
    out: dict[float, list[float]] = defaultdict(list)
    for r in sorted(records, key=lambda r: (r.run_index, _tkey(r.t))):
        if r.tracker_id == tracker_id:
            out[_tkey(r.t)].append(r.moe)
    return dict(out)


# ---------------------------------------------------------------------------
# Significance testing
# ---------------------------------------------------------------------------


def t_quantile(confidence: float, dof: float) -> float:
    """Two-sided Student-t critical value, e.g. 0.975-point for 95%."""
    if not 0.0 < confidence < 1.0:
        raise AssessmentError("confidence must lie in (0, 1)")
    if dof <= 0:
        raise AssessmentError("degrees of freedom must be positive")
    return float(stats.t.ppf(0.5 + 0.5 * confidence, dof))


def delta_limit(n1: int, n2: int, v1: float, v2: float, confidence: float = 0.95) -> float:
    """Confidence limit on a difference of means; ``v`` are divide-by-n variances."""
    dof = n1 + n2 - 2
    t = t_quantile(confidence, dof)
    return t * math.sqrt((1.0 / n1 + 1.0 / n2) * (n1 * v1 + n2 * v2) / dof)


def significance_test(samples1: Mapping[float, Sequence[float]], samples2: Mapping[float, Sequence[float]],
                      confidence: float = 0.95) -> tuple[list[SignificanceRow], int]:
    """Per-instant test of the difference in mean MOE between two arms.

    Instants where either arm has fewer than two samples are skipped; the
    second return value counts them.
    """
    rows = []
    skipped = 0
    for t in sorted(set(samples1) | set(samples2)):
        a = np.asarray(samples1.get(t, ()), dtype=float)
        b = np.asarray(samples2.get(t, ()), dtype=float)
        if a.size < 2 or b.size < 2:
            skipped += 1
            continue
        m1, m2 = float(a.mean()), float(b.mean())
        lim = delta_limit(a.size, b.size, float(a.var()), float(b.var()), confidence)
        diff = m1 - m2
        rows.append(SignificanceRow(float(t), int(a.size), int(b.size), m1, m2, diff, lim, abs(diff) > lim))
    return rows, skipped
