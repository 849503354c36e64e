"""Line-oriented ASCII files passed between pipeline stages.

Each file starts with a ``#``-prefixed header naming the comma-separated
columns, then one record per line. Reals are written with 17 significant
digits so a write/read cycle reproduces every double exactly.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from moesonar.assess import MoeRecord, SignificanceRow
from moesonar.sonar_sim import ALLEGIANCES, Plot, SimulationError, Track, TrackState, TruthRecord

TRUTH_COLUMNS = ("t", "target_id", "x", "y", "speed", "heading", "allegiance")
PLOT_COLUMNS = ("t", "target_label", "x", "y", "cxx", "cxy", "cyy", "pE", "pN", "pF")
_UPPER = [(i, j) for i in range(4) for j in range(i, 4)]
TRACK_COLUMNS = ("t", "track_id", "target_label", "x", "y", "vx", "vy",
                 *(f"p{i + 1}{j + 1}" for i, j in _UPPER), "pE", "pN", "pF")
MOE_COLUMNS = ("t", "run_index", "tracker_id", "target_id", "user_id", "variable", "moe")
SIGNIFICANCE_COLUMNS = ("t", "n1", "n2", "mean1", "mean2", "delta_mean", "delta_limit", "significant")
ALL_TARGETS_TOKEN = "all"


class StageFileError(ValueError):
    """Malformed stage file; the message carries the file and line number."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path: Path, columns: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    lines = ["# " + ",".join(columns)]
    lines.extend(",".join(r) for r in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _read(path: Path, columns: Sequence[str], parse: Callable[[list[str]], object]) -> list:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StageFileError(f"{path}: cannot read: {exc}") from None
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise StageFileError(f"{path}:1: missing '#' header")
    header = [c.strip() for c in lines[0][1:].split(",")]
    if tuple(header) != tuple(columns):
        raise StageFileError(f"{path}:1: header {header} does not match expected {list(columns)}")
    out = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != len(columns):
            raise StageFileError(f"{path}:{n}: expected {len(columns)} columns, got {len(fields)}")
        try:
            out.append(parse(fields))
        except (ValueError, SimulationError) as exc:
            raise StageFileError(f"{path}:{n}: {exc}") from None
    return out


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {s!r}")
    return v


# truth ---------------------------------------------------------------------


def write_truth(path, records: Sequence[TruthRecord]) -> None:
    _write(path, TRUTH_COLUMNS, (
        (fmt(r.t), str(r.target_id), fmt(r.pos[0]), fmt(r.pos[1]), fmt(r.speed), fmt(r.heading), r.allegiance)
        for r in records))


def _parse_truth(f: list[str]) -> TruthRecord:
    if f[6] not in ALLEGIANCES:
        raise ValueError(f"unknown allegiance {f[6]!r}")
    return TruthRecord(_float(f[0]), int(f[1]), (_float(f[2]), _float(f[3])), _float(f[4]), _float(f[5]), f[6])


def read_truth(path) -> list[TruthRecord]:
    return _read(path, TRUTH_COLUMNS, _parse_truth)


# plots ---------------------------------------------------------------------


def write_plots(path, plots: Sequence[Plot]) -> None:
    _write(path, PLOT_COLUMNS, (
        (fmt(p.t), str(p.target_label), fmt(p.pos_est[0]), fmt(p.pos_est[1]),
         fmt(p.cov[0, 0]), fmt(p.cov[0, 1]), fmt(p.cov[1, 1]), *(fmt(v) for v in p.identity))
        for p in plots))


def _parse_plot(f: list[str]) -> Plot:
    cxx, cxy, cyy = _float(f[4]), _float(f[5]), _float(f[6])
    if cxx < 0 or cyy < 0 or cxy * cxy > cxx * cyy:
        raise ValueError("plot covariance is not positive semi-definite")
    return Plot(_float(f[0]), int(f[1]), (_float(f[2]), _float(f[3])),
                np.array([[cxx, cxy], [cxy, cyy]]), (_float(f[7]), _float(f[8]), _float(f[9])))


def read_plots(path) -> list[Plot]:
    return _read(path, PLOT_COLUMNS, _parse_plot)


# tracks --------------------------------------------------------------------


def write_tracks(path, tracks: Sequence[Track]) -> None:
    rows = []
    for tr in tracks:
        for st in tr.states:
            rows.append((fmt(st.t), str(tr.track_id), str(tr.target_label), *(fmt(v) for v in st.state),
                         *(fmt(st.cov[i, j]) for i, j in _UPPER), *(fmt(v) for v in st.identity)))
    _write(path, TRACK_COLUMNS, rows)


def _parse_track_row(f: list[str]):
    state = np.array([_float(v) for v in f[3:7]])
    cov = np.empty((4, 4))
    for (i, j), v in zip(_UPPER, f[7:17]):
        cov[i, j] = cov[j, i] = _float(v)
    if np.min(np.linalg.eigvalsh(cov)) < -1e-9 * max(1.0, float(np.max(np.abs(cov)))):
        raise ValueError("track covariance is not positive semi-definite")
    ident = tuple(_float(v) for v in f[17:20])
    return int(f[1]), int(f[2]), TrackState(_float(f[0]), state, cov, ident)


def read_tracks(path) -> list[Track]:
    rows = _read(path, TRACK_COLUMNS, _parse_track_row)
    grouped: dict[tuple[int, int], list[TrackState]] = {}
    for track_id, label, st in rows:
        grouped.setdefault((track_id, label), []).append(st)
    out = []
    for (track_id, label), states in grouped.items():
        if any(b.t <= a.t for a, b in zip(states, states[1:])):
            raise StageFileError(f"{path}: track {track_id} times are not increasing")
        out.append(Track(track_id, label, tuple(states)))
    return out


# results -------------------------------------------------------------------


def write_moe(path, records: Sequence[MoeRecord]) -> None:
    _write(path, MOE_COLUMNS, (
        (fmt(r.t), str(r.run_index), r.tracker_id,
         ALL_TARGETS_TOKEN if r.target_id is None else str(r.target_id), r.user_id, r.variable, fmt(r.moe))
        for r in records))


def _parse_moe(f: list[str]) -> MoeRecord:
    target = None if f[3] == ALL_TARGETS_TOKEN else int(f[3])
    return MoeRecord(_float(f[0]), f[2], target, f[4], f[5], _float(f[6]), int(f[1]))


def read_moe(path) -> list[MoeRecord]:
    return _read(path, MOE_COLUMNS, _parse_moe)


def write_significance(path, rows: Sequence[SignificanceRow]) -> None:
    _write(path, SIGNIFICANCE_COLUMNS, (
        (fmt(r.t), str(r.n1), str(r.n2), fmt(r.mean1), fmt(r.mean2), fmt(r.delta_mean),
         fmt(r.delta_limit), "1" if r.significant else "0")
        for r in rows))


def _parse_sig(f: list[str]) -> SignificanceRow:
    if f[7] not in ("0", "1"):
        raise ValueError(f"significant flag must be 0 or 1, got {f[7]!r}")
    return SignificanceRow(_float(f[0]), int(f[1]), int(f[2]), _float(f[3]), _float(f[4]),
                           _float(f[5]), _float(f[6]), f[7] == "1")


def read_significance(path) -> list[SignificanceRow]:
    return _read(path, SIGNIFICANCE_COLUMNS, _parse_sig)
