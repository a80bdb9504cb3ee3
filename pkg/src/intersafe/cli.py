"""Command-line entry point.

Subcommands compose through artifacts: ``conflicts`` writes per-day event
CSVs that ``aggregate``, ``spatial`` and ``report`` consume; ``volumes``
and ``correlate`` work from the raw trajectory days; ``synth`` fabricates
scenario inputs.  Every run writes its artifacts into a staging directory
that is renamed into place only on success, plus a manifest of config and
input hashes so identical runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import json
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, analytics, classify, games, ingest, pet, svg, synth, ttc
from ._kernels import BACKEND
from .errors import ComputationError, ConfigError, DataError, IntersafeError
from .ingest import SignalLog
from .model import IntersectionConfig, movement_phase_table
from .params import AnalysisParams

EXIT_CODES = {ConfigError: 2, DataError: 3, ComputationError: 4}


@dataclass(frozen=True)
class DayInput:
    date: dt.date
    label: str
    trajectories: Path
    signal_log: Path | None


@dataclass
class RunConfig:
    cfg: IntersectionConfig
    params: AnalysisParams
    days: list[DayInput]
    game_source: str
    fixture_path: Path | None
    cache_dir: Path | None
    resolved: dict              # canonical dict used for the config hash


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read run config {path}: {exc}") from exc
    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    if raw.get("intersection"):
        cfg_path = resolve(raw["intersection"])
        if not cfg_path.exists():
            raise ConfigError(f"intersection config not found: {cfg_path}")
        cfg = IntersectionConfig.from_json(cfg_path)
    else:
        cfg = synth.default_intersection()
    params = AnalysisParams.from_dict(raw.get("parameters", {}))
    days = []
    seen_dates = set()
    for entry in raw.get("days", []):
        try:
            date = dt.date.fromisoformat(entry["date"])
            label = str(entry["label"])
            traj_path = resolve(entry["trajectories"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid day entry {entry}: {exc}") from exc
        if date in seen_dates:
            raise ConfigError(f"duplicate day {date}")
        seen_dates.add(date)
        if not traj_path.exists():
            raise ConfigError(f"trajectory file not found: {traj_path}")
        sig = entry.get("signal_log")
        sig_path = resolve(sig) if sig else None
        if sig_path and not sig_path.exists():
            raise ConfigError(f"signal log not found: {sig_path}")
        days.append(DayInput(date, label, traj_path, sig_path))
    game_source = raw.get("game_source", "fixture")
    fixture = resolve(raw["fixture_path"]) if raw.get("fixture_path") else None
    cache = resolve(raw["cache_dir"]) if raw.get("cache_dir") else None
    resolved = {
        "intersection": str(raw.get("intersection") or "builtin"),
        "parameters": params.to_dict(),
        "days": [{"date": d.date.isoformat(), "label": d.label,
                  "trajectories": str(d.trajectories),
                  "signal_log": str(d.signal_log) if d.signal_log else None}
                 for d in days],
        "game_source": game_source,
    }
    return RunConfig(cfg, params, days, game_source, fixture, cache, resolved)


# ---------------------------------------------------------------------------
# staging and manifests
# ---------------------------------------------------------------------------

class OutputStage:
    """Write into <out>.partial, rename to <out> on success."""

    def __init__(self, out: Path):
        self.final = Path(out)
        if self.final.exists() and any(self.final.iterdir()):
            raise ConfigError(f"output directory {self.final} already exists")
        self.dir = self.final.with_name(self.final.name + ".partial")
        if self.dir.exists():
            shutil.rmtree(self.dir)
        self.dir.mkdir(parents=True)

    def commit(self) -> None:
        if self.final.exists():
            self.final.rmdir()
        self.dir.rename(self.final)

    def abort(self) -> None:
        shutil.rmtree(self.dir, ignore_errors=True)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_manifest(stage: OutputStage, subcommand: str, run: RunConfig | None,
                   inputs: list[Path], extra: dict | None = None) -> None:
    config_hash = "-"
    params = {}
    if run is not None:
        blob = json.dumps(run.resolved, sort_keys=True).encode()
        config_hash = hashlib.sha256(blob).hexdigest()
        params = run.params.to_dict()
    manifest = {
        "tool": "intersafe",
        "version": __version__,
        "kernel_backend": BACKEND,
        "subcommand": subcommand,
        "config_hash": config_hash,
        "parameters": params,
        "inputs": {str(p): _sha256(p) for p in sorted(set(inputs))},
        "outputs": sorted(p.relative_to(stage.dir).as_posix()
                          for p in stage.dir.rglob("*") if p.is_file()),
    }
    if extra:
        manifest.update(extra)
    _write_json(stage.dir / "run_manifest.json", manifest)


def write_config_report(stage: OutputStage, run: RunConfig) -> None:
    report = {
        "major_axis": run.cfg.major_axis,
        "right_hand_traffic": run.cfg.right_hand_traffic,
        "through_phases": dict(sorted(run.cfg.through_phases.items())),
        "movement_phase_table": dict(sorted(movement_phase_table(run.cfg).items())),
        "leg_pedestrian_phase": dict(sorted(run.cfg.ped_phase_of_leg.items())),
        "parameters": run.params.to_dict(),
    }
    _write_json(stage.dir / "config_report.json", report)


def _load_day(day: DayInput, params: AnalysisParams,
              recompute: bool = False) -> tuple[list, SignalLog | None, list]:
    result = ingest.parse_trajectories(day.trajectories)
    trajs = [ingest.estimate_velocities(t, force=recompute,
                                        smooth_window=params.smooth_window)
             for t in result.trajectories if len(t) >= 2]
    log = ingest.parse_signal_log(day.signal_log) if day.signal_log else None
    return trajs, log, result.rejected


def _selected_days(run: RunConfig, days_arg: str | None) -> list[DayInput]:
    if not days_arg:
        if not run.days:
            raise ConfigError("run config lists no days")
        return run.days
    wanted = {d.strip() for d in days_arg.split(",") if d.strip()}
    chosen = [d for d in run.days if d.date.isoformat() in wanted]
    missing = wanted - {d.date.isoformat() for d in chosen}
    if missing:
        raise ConfigError(f"days not in run config: {sorted(missing)}")
    return chosen


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> None:
    run = load_run_config(args.config)
    days = _selected_days(run, args.days)
    stage = OutputStage(Path(args.out))
    try:
        (stage.dir / "normalized").mkdir()
        reject_rows = []
        for day in days:
            trajs, _, rejected = _load_day(day, run.params, args.recompute_velocities)
            ingest.serialize_trajectories(
                trajs, stage.dir / "normalized" / f"{day.date.isoformat()}.csv")
            reject_rows += [(day.date.isoformat(), r.line, r.reason) for r in rejected]
        with open(stage.dir / "rejected_rows.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date", "line", "reason"])
            writer.writerows(reject_rows)
        write_config_report(stage, run)
        write_manifest(stage, "ingest", run,
                       [d.trajectories for d in days])
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    print(f"ingest: {len(days)} day(s) -> {args.out}")


def _detect_day(trajs, log, run: RunConfig, metric: str) -> list:
    events = []
    if metric in ("ttc", "both"):
        events += ttc.detect_ttc_conflicts(trajs, run.params)
    if metric in ("pet", "both"):
        events += pet.detect_pet_from_trajectories(trajs, run.cfg, run.params)
    index = classify.TrajectoryIndex(trajs, run.cfg, log, run.params)
    events = classify.classify_events(events, index)
    events.sort(key=lambda e: (e.t, e.id_a, e.id_b, e.metric))
    return events


def cmd_conflicts(args) -> None:
    run = load_run_config(args.config)
    days = _selected_days(run, args.days)
    stage = OutputStage(Path(args.out))
    try:
        (stage.dir / "events").mkdir()
        day_rows = []
        inputs = []
        for day in days:
            trajs, log, _ = _load_day(day, run.params)
            events = _detect_day(trajs, log, run, args.metric)
            rel = f"events/{day.date.isoformat()}.csv"
            classify.write_events_csv(events, stage.dir / rel)
            day_rows.append([day.date.isoformat(), day.label, rel, len(events),
                             "signal-aware" if log else "signal-unaware"])
            inputs.append(day.trajectories)
            if day.signal_log:
                inputs.append(day.signal_log)
        with open(stage.dir / "days.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date", "label", "events", "n_events", "signal"])
            writer.writerows(day_rows)
        write_config_report(stage, run)
        write_manifest(stage, "conflicts", run, inputs,
                       extra={"metric": args.metric,
                              "episode_rule": f"pair events within "
                              f"{run.params.episode_gap:.1f}s merge"})
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    total = sum(r[3] for r in day_rows)
    print(f"conflicts: {total} event(s) over {len(days)} day(s) -> {args.out}")


def _read_events_days(events_dir: Path,
                      days_arg: str | None = None) -> list[tuple[str, str, list]]:
    """(date, label, events) rows from a conflicts output directory."""
    days_csv = events_dir / "days.csv"
    if not days_csv.exists():
        raise ConfigError(f"{events_dir} has no days.csv (run `conflicts` first)")
    wanted = {d.strip() for d in days_arg.split(",")} if days_arg else None
    out = []
    with open(days_csv, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if row and (wanted is None or row[0] in wanted):
                out.append((row[0], row[1],
                            classify.read_events_csv(events_dir / row[2])))
    return out


def _events_inputs(events_dir: Path) -> list[Path]:
    return [events_dir / "days.csv"] + sorted((events_dir / "events").glob("*.csv"))


def _volume_csv(stage_path: Path, matrix: analytics.VolumeMatrix) -> None:
    with open(stage_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["phase"] + [f"{h:02d}" for h in range(24)])
        for i, phase in enumerate(matrix.phases):
            writer.writerow([phase] + matrix.counts[i].tolist())


def cmd_volumes(args) -> None:
    run = load_run_config(args.config)
    days = _selected_days(run, args.days)
    stage = OutputStage(Path(args.out))
    try:
        (stage.dir / "volumes").mkdir()
        source = games.GameSource(run.game_source, run.fixture_path, run.cache_dir)
        for day in days:
            trajs, _, _ = _load_day(day, run.params)
            matrix = analytics.volume_matrix(trajs, run.cfg, args.mode, run.params)
            name = f"volumes/{args.mode}_{day.date.isoformat()}.csv"
            _volume_csv(stage.dir / name, matrix)
            if args.svg:
                markers = {}
                game = source.fetch_game(day.date)
                if game is not None:
                    data_end = max((float(t.t[-1]) for t in trajs), default=0.0)
                    start_s = game.start_seconds
                    markers[start_s / 86400.0] = "start"
                    end_s = games.estimated_end_seconds(start_s)
                    if end_s <= data_end:
                        markers[end_s / 86400.0] = "end"
                rendered = svg.heatmap_svg(
                    [str(p) for p in matrix.phases],
                    [f"{h:02d}" for h in range(24)],
                    matrix.counts.astype(float),
                    f"{args.mode} volume {day.date.isoformat()} ({day.label})",
                    markers)
                (stage.dir / name.replace(".csv", ".svg")).write_text(rendered)
        write_config_report(stage, run)
        write_manifest(stage, "volumes", run, [d.trajectories for d in days],
                       extra={"mode": args.mode})
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    print(f"volumes: {len(days)} day(s) -> {args.out}")


def cmd_aggregate(args) -> None:
    run = load_run_config(args.config)
    day_events = _read_events_days(Path(args.events_dir), args.days)
    stage = OutputStage(Path(args.out))
    try:
        series = analytics.aggregate_conflicts(day_events)
        with open(stage.dir / "aggregate.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["group", "hour", "mean", "low", "high", "n_days"])
            for label in sorted(series):
                s = series[label]
                for i, hour in enumerate(s.hours):
                    writer.writerow([label, hour, f"{s.mean[i]:.3f}",
                                     f"{s.low[i]:.3f}", f"{s.high[i]:.3f}", s.n_days])
        if args.svg:
            plot = [{"label": label,
                     "mean": series[label].mean.tolist(),
                     "low": series[label].low.tolist(),
                     "high": series[label].high.tolist(),
                     "color": svg.PALETTE[k % len(svg.PALETTE)]}
                    for k, label in enumerate(sorted(series))]
            if plot:
                hours = series[sorted(series)[0]].hours
                (stage.dir / "aggregate.svg").write_text(svg.lineplot_svg(
                    plot, "conflicts per hour", [f"{h:02d}" for h in hours]))
        write_manifest(stage, "aggregate", run,
                       _events_inputs(Path(args.events_dir)))
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    print(f"aggregate: {len(day_events)} day(s) -> {args.out}")


def cmd_spatial(args) -> None:
    run = load_run_config(args.config)
    day_events = _read_events_days(Path(args.events_dir), args.days)
    events = [ev for _, _, evs in day_events for ev in evs]
    stage = OutputStage(Path(args.out))
    try:
        mesh = pet.build_mesh(run.cfg)
        counts, overflow = analytics.spatial_histogram(events, mesh)
        with open(stage.dir / "spatial_histogram.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row"] + [f"c{c}" for c in range(mesh.n_cols)])
            for r in range(mesh.n_rows):
                writer.writerow([r] + counts[r].tolist())
        meta = {"overflow_events": overflow, "n_events": len(events),
                "cell_size": mesh.cell_size}
        if events:
            density = analytics.spatial_kde(events, mesh)
            with open(stage.dir / "spatial_kde.csv", "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["row"] + [f"c{c}" for c in range(mesh.n_cols)])
                for r in range(mesh.n_rows):
                    writer.writerow([r] + [f"{v:.6e}" for v in density[r]])
        write_manifest(stage, "spatial", run,
                       _events_inputs(Path(args.events_dir)), extra=meta)
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    print(f"spatial: {len(events)} event(s), {overflow} outside region -> {args.out}")


def cmd_correlate(args) -> None:
    run = load_run_config(args.config)
    days = _selected_days(run, args.days)
    stage = OutputStage(Path(args.out))
    try:
        source = games.GameSource(run.game_source, run.fixture_path, run.cache_dir)
        labels, volumes, probs = [], [], []
        for day in days:
            game = source.fetch_game(day.date)
            if game is None:
                continue
            trajs, _, _ = _load_day(day, run.params)
            vol = analytics.pregame_volume(
                trajs, run.cfg, game.start_seconds, args.mode,
                window_hours=args.window, params=run.params)
            labels.append(day.date.isoformat())
            volumes.append(vol)
            probs.append(game.away_win_prob)
        result = analytics.correlate_volume_win_prob(
            labels, volumes, probs, method=args.method)
        _write_json(stage.dir / "correlation.json", {
            "mode": args.mode, "method": result.method, "n_games": result.n,
            "r": round(result.r, 6), "p_value": round(result.p, 6),
            "window_hours": args.window,
        })
        with open(stage.dir / "correlation_points.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date", "away_win_prob_norm", "volume_norm"])
            for label, p, v in result.points:
                writer.writerow([label, f"{p:.6f}", f"{v:.6f}"])
        write_manifest(stage, "correlate", run,
                       [d.trajectories for d in days],
                       extra={"mode": args.mode, "method": args.method})
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    print(f"correlate: r = {result.r:.3f}, p = {result.p:.4f} "
          f"({result.method}, n = {result.n}) -> {args.out}")


def cmd_synth(args) -> None:
    if args.spec:
        spec = synth.ScenarioSpec.from_json(args.spec)
    elif args.scenario == "gameday":
        spec = synth.gameday_scenario()
    else:
        raise ConfigError("synth needs --spec or --scenario gameday")
    if args.seed is not None:
        spec = synth.ScenarioSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    stage = OutputStage(Path(args.out))
    try:
        result = synth.generate(spec)
        ingest.serialize_trajectories(result.trajectories,
                                      stage.dir / "trajectories.csv")
        synth.write_manifest(result.manifest, stage.dir / "ground_truth.csv")
        if result.signal_log is not None:
            ingest.write_signal_log(result.signal_log, stage.dir / "signal_log.csv")
        _write_json(stage.dir / "scenario.json", spec.to_dict())
        write_manifest(stage, "synth", None,
                       [Path(args.spec)] if args.spec else [],
                       extra={"seed": spec.seed,
                              "n_objects": len(result.trajectories),
                              "n_scripted": len(result.manifest)})
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    print(f"synth: {len(result.trajectories)} object(s), "
          f"{len(result.manifest)} scripted conflict(s) -> {args.out}")


def cmd_report(args) -> None:
    run = load_run_config(args.config)
    day_events = _read_events_days(Path(args.events_dir), args.days)
    stage = OutputStage(Path(args.out))
    try:
        lines = _build_report(day_events)
        (stage.dir / "report.txt").write_text("\n".join(lines) + "\n")
        write_manifest(stage, "report", run,
                       _events_inputs(Path(args.events_dir)))
        stage.commit()
    except BaseException:
        stage.abort()
        raise
    print("\n".join(lines))


def _build_report(day_events: list[tuple[str, str, list]]) -> list[str]:
    lines = ["conflict summary", "================", ""]
    by_label: dict[str, list[int]] = {}
    for date, label, events in day_events:
        by_label.setdefault(label, []).append(len(events))
    lines.append("daily conflict averages:")
    for label in sorted(by_label):
        counts = by_label[label]
        mean = sum(counts) / len(counts)
        lines.append(f"  {label}: {mean:.2f} conflicts/day over {len(counts)} day(s)")
    all_events = [ev for _, _, evs in day_events for ev in evs]
    severe = sum(1 for ev in all_events if ev.severe)
    lines += ["", f"total events: {len(all_events)} ({severe} severe)"]
    buckets: dict[str, int] = {}
    for ev in all_events:
        name = analytics.bucket_of(ev.t)
        if name:
            buckets[name] = buckets.get(name, 0) + 1
    lines.append("")
    lines.append("events by time of day:")
    for name, _, _ in analytics.TIME_BUCKETS:
        lines.append(f"  {name}: {buckets.get(name, 0)}")
    types = classify.type_histogram(all_events)
    untyped = sum(1 for ev in all_events
                  if ev.kind == "P2V" and ev.p2v_type is None)
    lines.append("")
    lines.append("P2V conflict types:")
    for t, n in types.items():
        lines.append(f"  type {t}: {n}")
    lines.append(f"  untyped: {untyped}")
    jaywalk_events = classify.jaywalk_p2v(all_events)
    lines.append("")
    lines.append(f"jaywalk P2V conflicts: {len(jaywalk_events)}")
    lines.append("top movements in jaywalk conflicts:")
    for code, n in classify.movement_histogram(jaywalk_events)[:5]:
        lines.append(f"  {code}: {n}")
    return lines


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intersafe",
        description="Trajectory analytics for signalized-intersection safety")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, events_dir=False, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="run config JSON")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--days", help="comma-separated subset of day dates")
        if events_dir:
            p.add_argument("--events-dir", required=True,
                           help="output directory of a previous `conflicts` run")

    p = sub.add_parser("ingest", help="validate inputs and fill velocities")
    common(p)
    p.add_argument("--recompute-velocities", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("conflicts", help="detect and classify TTC/PET conflicts")
    common(p)
    p.add_argument("--metric", choices=["ttc", "pet", "both"], default="both")
    p.set_defaults(func=cmd_conflicts)

    p = sub.add_parser("volumes", help="phase x hour volume matrices")
    common(p)
    p.add_argument("--mode", choices=["pedestrian", "vehicle"], default="pedestrian")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_volumes)

    p = sub.add_parser("aggregate", help="hourly conflict series per day group")
    common(p, events_dir=True)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("spatial", help="spatial histogram and KDE of conflicts")
    common(p, events_dir=True)
    p.set_defaults(func=cmd_spatial)

    p = sub.add_parser("correlate", help="volume vs away-team win probability")
    common(p)
    p.add_argument("--mode", choices=["pedestrian", "vehicle"], default="pedestrian")
    p.add_argument("--method", choices=["t_dist", "permutation"], default="t_dist")
    p.add_argument("--window", type=float, default=6.0,
                   help="pregame window in hours")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("synth", help="generate a synthetic scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--spec", help="scenario spec JSON")
    p.add_argument("--scenario", choices=["gameday"],
                   help="named built-in scenario")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="summary report over detected conflicts")
    common(p, events_dir=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except IntersafeError as exc:
        category = {2: "config", 3: "data", 4: "computation"}
        code = next((c for t, c in EXIT_CODES.items() if isinstance(exc, t)), 4)
        print(f"error ({category[code]}): {exc}", file=sys.stderr)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
