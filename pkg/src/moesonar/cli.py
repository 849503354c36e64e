"""Command-line driver for the test-bed stages.

Every stage reads its inputs from files under ``--out-dir`` and writes its
outputs there, so any stage can be re-run on its own::

    out/run_000/truth.csv           scenario
    out/run_000/plots.csv           sense
    out/run_000/tracks_<name>.csv   track
    out/moe.csv                     assess
    out/significance.csv            compare

Exit status: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import math
import random
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from moesonar import assess, moe_core, multiuser, sonar_sim, stage_io, truth_uncertainty
from moesonar.config import ConfigError, PipelineConfig, load_config

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
RUN_DIR = re.compile(r"^run_(\d{3,})$")
DATA_ERRORS = (ConfigError, stage_io.StageFileError, sonar_sim.SimulationError, assess.AssessmentError,
               moe_core.MoeError, FileNotFoundError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def _run_dir(out: Path, index: int) -> Path:
    return out / f"run_{index:03d}"


def _existing_runs(out: Path, stage: str) -> list[tuple[int, Path]]:
    runs = sorted((int(m.group(1)), p) for p in out.glob("run_*")
                  if p.is_dir() and (m := RUN_DIR.match(p.name)))
    if not runs:
        raise StageError(stage, f"no run_* directories in {out}; run the earlier stages first")
    return runs


def _settings(args) -> tuple[PipelineConfig, int, int]:
    cfg = load_config(args.config)
    n_runs = args.runs if args.runs is not None else cfg.monte_carlo.n_runs
    seed = args.seed if args.seed is not None else cfg.monte_carlo.base_seed
    if n_runs < 1:
        raise UsageError("--runs must be >= 1")
    return cfg, n_runs, seed


# stages ----------------------------------------------------------------------


def cmd_scenario(args) -> int:
    cfg, n_runs, seed = _settings(args)
    scenario = cfg.scenario.to_domain()
    out = Path(args.out_dir)
    for i in range(n_runs):
        d = _run_dir(out, i)
        d.mkdir(parents=True, exist_ok=True)
        stage_io.write_truth(d / "truth.csv", sonar_sim.generate_scenario(scenario, seed + i))
    print(f"scenario: wrote truth for {n_runs} run(s) to {out}")
    return EXIT_OK


def cmd_sense(args) -> int:
    cfg, _, seed = _settings(args)
    s1, s2 = (s.to_domain() for s in cfg.sensors)
    out = Path(args.out_dir)
    for i, d in _existing_runs(out, "sense"):
        truth = stage_io.read_truth(d / "truth.csv")
        r1 = sonar_sim.simulate_sensor(truth, s1, seed + i)
        r2 = sonar_sim.simulate_sensor(truth, s2, seed + i)
        stage_io.write_plots(d / "plots.csv", sonar_sim.make_plots(r1, r2, s1, s2))
    print(f"sense: wrote plots in {out}")
    return EXIT_OK


def cmd_track(args) -> int:
    cfg, _, _ = _settings(args)
    trackers = [t.to_domain() for t in cfg.trackers]
    out = Path(args.out_dir)
    for _, d in _existing_runs(out, "track"):
        plots = stage_io.read_plots(d / "plots.csv")
        for trk in trackers:
            stage_io.write_tracks(d / f"tracks_{trk.name}.csv", sonar_sim.track_all(plots, trk))
    print(f"track: wrote tracks for {', '.join(t.name for t in trackers)} in {out}")
    return EXIT_OK


def cmd_assess(args) -> int:
    cfg, _, _ = _settings(args)
    users = [u.to_domain() for u in cfg.users]
    out = Path(args.out_dir)
    records: list[assess.MoeRecord] = []
    for i, d in _existing_runs(out, "assess"):
        truth = stage_io.read_truth(d / "truth.csv")
        tracks = {t.name: stage_io.read_tracks(d / f"tracks_{t.name}.csv") for t in cfg.trackers}
        records.extend(assess.compute_moe_series(tracks, truth, users, i))
    overall = assess.overall_records(records, cfg.significance.user_mode)
    stage_io.write_moe(out / "moe.csv", records + overall)
    print(f"assess: {len(records)} per-variable and {len(overall)} overall MOE records -> {out / 'moe.csv'}")
    if args.emit_svg:
        _svg_assess(out, cfg, overall)
    return EXIT_OK


def _overall_from(records: Sequence[assess.MoeRecord], cfg: PipelineConfig) -> list[assess.MoeRecord]:
    user = assess.USERS_GM if cfg.significance.user_mode == "geometric" else assess.USERS_AM
    overall = [r for r in records
               if r.variable == assess.COMBINED and r.target_id is None and r.user_id == user]
    return overall or assess.overall_records(records, cfg.significance.user_mode)


def cmd_compare(args) -> int:
    cfg, _, _ = _settings(args)
    out = Path(args.out_dir)
    overall = _overall_from(stage_io.read_moe(out / "moe.csv"), cfg)
    a, b = cfg.compared_trackers()
    rows, skipped = assess.significance_test(assess.samples_by_instant(overall, a),
                                             assess.samples_by_instant(overall, b),
                                             cfg.significance.confidence)
    stage_io.write_significance(out / "significance.csv", rows)
    n_sig = sum(r.significant for r in rows)
    print(f"compare: {a} vs {b}: {n_sig} of {len(rows)} instants significant at "
          f"{cfg.significance.confidence:.0%} ({skipped} untestable) -> {out / 'significance.csv'}")
    if args.emit_svg:
        _svg_compare(out, rows, a, b)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    for step in (cmd_scenario, cmd_sense, cmd_track, cmd_assess, cmd_compare):
        step(args)
    return EXIT_OK


def _svg_assess(out: Path, cfg: PipelineConfig, overall: Sequence[assess.MoeRecord]) -> None:
    from moesonar import svg

    series = {}
    for t in cfg.trackers:
        per = assess.samples_by_instant(overall, t.name)
        ts = sorted(per)
        series[f"{t.name} (mean over runs)"] = (ts, [float(np.mean(per[x])) for x in ts])
    svg.line_chart(out / "overall_moe.svg", series, "Overall MOE (users, variables, targets)")


def _svg_compare(out: Path, rows, a: str, b: str) -> None:
    from moesonar import svg

    ts = [r.t for r in rows]
    svg.line_chart(out / "significance.svg", {
        f"mean({a}) - mean({b})": (ts, [r.delta_mean for r in rows]),
        "+limit": (ts, [r.delta_limit for r in rows]),
        "-limit": (ts, [-r.delta_limit for r in rows]),
    }, "Difference of mean overall MOE", ylabel="difference", ylim=None)


# demo & selftest -------------------------------------------------------------


def demo_lines() -> list[str]:
    lines = []

    def show(label, got, expected):
        lines.append(f"{label}: M = {got:.5f} (expected {expected})")

    show("Gaussian user function vs Gaussian error, sigma_o = sigma_s",
         moe_core.moe_gaussian_closed(1.0, 1.0).value, "0.70711")
    show("Gaussian user function vs Gaussian error, sigma_o = 1, sigma_s = 2",
         moe_core.moe_gaussian_closed(1.0, 2.0).value, "0.89443")
    show("Same by adaptive quadrature",
         moe_core.moe_integrate(moe_core.GaussianExp(2.0), moe_core.Gaussian1D(0.0, 1.0)).value, "0.89443")
    fs = moe_core.DiscreteVector(("E", "N", "F"), (1.0, 0.0, 0.0))
    po = moe_core.DiscreteProb(("E", "N", "F"), (0.60, 0.25, 0.15))
    lines.append(f"Identity vector (0.60, 0.25, 0.15) on a true enemy, strict user: "
                 f"M = {moe_core.moe_discrete(fs, po).value:.2f} (expected 0.60)")
    show("Acceptance window +-1.959964 sigma_o", moe_core.moe_window_gaussian(1.959964, 1.0).value, "0.95000")
    show("Acceptance window +-2.575829 sigma_o", moe_core.moe_window_gaussian(2.575829, 1.0).value, "0.99000")
    show("Ten variables at 0.80, product", moe_core.combine_product([0.8] * 10).value, "about 0.11")
    show("Ten variables at 0.80, geometric mean", moe_core.combine_geometric([0.8] * 10).value, "0.80000")
    return lines


def cmd_demo(args) -> int:
    print("\n".join(demo_lines()))
    return EXIT_OK


def selftest_checks() -> list[tuple[str, bool, str]]:
    rng = random.Random(12345)
    checks = []

    worst = 0.0
    for _ in range(20):
        so, ss = rng.uniform(0.1, 10), rng.uniform(0.1, 10)
        q = moe_core.moe_integrate(moe_core.GaussianExp(ss), moe_core.Gaussian1D(0.0, so)).value
        worst = max(worst, abs(q - ss / math.hypot(ss, so)))
    checks.append(("quadrature matches Gaussian closed form", worst < 1e-6, f"max error {worst:.2e}"))

    d = 1.7
    w = moe_core.moe_integrate(moe_core.UniformWindow(-d, d), moe_core.Gaussian1D(0.0, 1.0)).value
    err = abs(w - moe_core.moe_window_gaussian(d, 1.0).value)
    checks.append(("quadrature matches erf window", err < 1e-6, f"error {err:.2e}"))

    t = assess.t_quantile(0.95, 38)
    checks.append(("t quantile, 38 dof", abs(t - 2.024394) < 1e-3, f"{t:.6f}"))

    s1 = sonar_sim.SensorSpec(1, (0.0, 0.0), 0.1)
    s2 = sonar_sim.SensorSpec(2, (10000.0, 0.0), 0.1)
    b1 = float(sonar_sim.compass_bearing(5000.0, 5000.0))
    b2 = float(sonar_sim.compass_bearing(-5000.0, 5000.0))
    ident = (1 / 3, 1 / 3, 1 / 3)
    p = sonar_sim.triangulate(sonar_sim.SensorReport(0.0, 1, 1, b1, ident),
                              sonar_sim.SensorReport(0.0, 2, 1, b2, ident), s1, s2)
    err = math.hypot(p.pos_est[0] - 5000.0, p.pos_est[1] - 5000.0)
    checks.append(("triangulation round trip", err < 1e-6, f"error {err:.2e} m"))

    vals = [rng.random() for _ in range(4)]
    fk = [multiuser.symmetric_mean(vals, k) for k in range(1, 5)]
    checks.append(("user combinations non-increasing in k", all(a >= b for a, b in zip(fk, fk[1:])),
                   " >= ".join(f"{v:.4f}" for v in fk)))

    pair = truth_uncertainty.PairedObservation([0.3, -0.2], [0.0, 0.1])
    cs, cl = np.diag([1.0, 2.0]), np.array([[0.5, 0.1], [0.1, 0.4]])
    a = truth_uncertainty.moe_uncertain_truth_gaussian(pair, cs, cl).value
    b = truth_uncertainty.moe_uncertain_truth_literal(pair, cs, cl)
    checks.append(("uncertain-truth closed form, stable vs literal", abs(a - b) < 1e-12, f"{a:.12f}"))
    return checks


def cmd_selftest(args) -> int:
    ok = True
    for name, passed, detail in selftest_checks():
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if ok else EXIT_DATA


# entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML configuration file (defaults apply if omitted)")
    common.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    common.add_argument("--runs", type=int, help="number of Monte Carlo runs")
    common.add_argument("--out-dir", default="out", help="directory holding the stage files")
    common.add_argument("--emit-svg", action="store_true", help="also write SVG charts")
    parser = _Parser(prog="moesonar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, help_ in [
        ("scenario", cmd_scenario, "generate ground truth"),
        ("sense", cmd_sense, "simulate sensors and triangulate plots"),
        ("track", cmd_track, "run every configured tracker"),
        ("assess", cmd_assess, "compute MOE time series"),
        ("compare", cmd_compare, "test tracker differences for significance"),
        ("pipeline", cmd_pipeline, "run scenario, sense, track, assess and compare"),
        ("demo", cmd_demo, "print worked closed-form examples"),
        ("selftest", cmd_selftest, "run oracle checks"),
    ]:
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=fn, stage=name)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error [{args.stage}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"error [{exc}]", file=sys.stderr)
        return EXIT_DATA
    except DATA_ERRORS as exc:
        print(f"error [{args.stage}]: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
