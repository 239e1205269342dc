"""Command-line entry points.

Subcommands: ``run`` (single simulation), ``sweep`` (parallel parameter
sweep ranked by KL distance to the recorded fixture), ``compare``
(synthetic log vs incident file), ``serve`` (run with the live steering
server), ``gen-fixtures`` (write the bundled fixtures to a directory).
Every command accepts ``--json`` for machine-readable output and is
deterministic given its flags and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import stats as _stats
from .config import (
    TUNABLE_RANGES,
    SimulationConfig,
    config_from_text,
    set_param,
)
from .fixtures import (
    bundled_config_path,
    bundled_incidents_path,
    bundled_region_path,
    write_fixtures,
)
from .kernel import active_lane
from .logio import JsonlSink, read_log
from .regions import compare as compare_datasets
from .regions import load_incidents, load_region
from .rng import mix64
from .roles import ValidationError
from .scheduler import SimulationLog, checkpoint_reports, run
from .steering import serve_run


def _load_config(path: str | None) -> SimulationConfig:
    source = Path(path) if path else bundled_config_path()
    if not source.exists():
        raise ValidationError(f"config file not found: {source}")
    return config_from_text(source.read_text(), source=str(source))


def _load_region_arg(path: str | None):
    source = Path(path) if path else bundled_region_path()
    return load_region(source)


def _apply_overrides(cfg: SimulationConfig, args, n_ticks: int | None) -> SimulationConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if n_ticks is not None:
        updates["n_ticks"] = n_ticks
    if getattr(args, "snapshot_every", None) is not None:
        updates["snapshot_every"] = args.snapshot_every
    if getattr(args, "sampling", None) is not None:
        updates["sampling_mode"] = args.sampling
    return cfg.replace(**updates) if updates else cfg


def _parse_ticks(raw: str | None) -> tuple[int | None, list]:
    if raw is None:
        return None, []
    checkpoints = sorted({int(part) for part in raw.split(",") if part.strip() != ""})
    if not checkpoints:
        raise ValidationError("--ticks needs at least one tick count")
    return checkpoints[-1], checkpoints


def _toll_summary(log: SimulationLog) -> dict:
    deaths = log.attack_deaths()
    out = {"attacks": len(deaths)}
    if deaths:
        out["toll"] = dataclasses.asdict(_stats.summarize(deaths))
    return out


class _FrameRecorder:
    """Sink that writes LiveFrame records, for dashboard fixtures/replay."""

    def __init__(self, path, every: int):
        self.path = Path(path)
        self.every = every
        self._fh = None
        self._window = []
        self._sim = None

    def attach_sim(self, sim):
        self._sim = sim

    def on_start(self, config_flat, region, meta):
        self._fh = self.path.open("w", encoding="utf-8")

    def on_tick(self, report):
        from .steering import build_frame

        self._window.append(report)
        if report.tick % self.every != 0 or self._sim is None:
            return
        frame = build_frame(self._sim, self._window)
        self._window = []
        self._fh.write(json.dumps(frame, separators=(",", ":")) + "\n")

    def on_snapshot(self, snapshot):
        pass

    def on_param_change(self, event):
        pass

    def on_finish(self, digest, completed_ticks):
        if self._fh is not None:
            self._fh.close()


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    region = _load_region_arg(args.region)
    max_ticks, checkpoints = _parse_ticks(args.ticks)
    cfg = _apply_overrides(cfg, args, max_ticks)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "log.jsonl"
    sinks: list = [JsonlSink(log_path)]

    recorder = None
    if args.frames_out:
        recorder = _FrameRecorder(args.frames_out, every=args.frames_every)
        sinks.append(recorder)

    if recorder is None:
        log = run(cfg, region, sinks=tuple(sinks), lane=args.lane)
    else:
        # The recorder needs the live Simulation to build frames.
        from .scheduler import Simulation as _Sim

        class _AttachControl:
            def at_boundary(self, sim):
                recorder.attach_sim(sim)
                return True

        log = run(cfg, region, sinks=tuple(sinks), control=_AttachControl(), lane=args.lane)

    summary = {
        "digest": log.final_digest,
        "completed_ticks": log.completed_ticks,
        "lane": log.lane,
        "log": str(log_path),
        **_toll_summary(log),
        "final_aggregates": log.snapshots[-1].aggregates,
    }
    if checkpoints:
        summary["checkpoints"] = checkpoint_reports(log, [t for t in checkpoints if t <= log.completed_ticks])

    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(summary, indent=2, default=float))
    summary["report"] = str(report_path)

    if args.plot_data:
        final = log.snapshots[-1]
        from .stats import predisposition_histogram

        hist = predisposition_histogram(final, 21)
        centers = [(a + b) / 2 for a, b in zip(hist.edges, hist.edges[1:])]
        series = {
            "polarization_trend": (
                [r.tick for r in log.reports],
                [r.aggregates["polarization"] for r in log.reports],
            ),
            "predisposition_histogram": (centers, [float(c) for c in hist.counts]),
        }
        deaths = log.attack_deaths()
        if deaths:
            toll_hist = _stats.histogram(deaths, _stats.uniform_edges(0, max(max(deaths), 1), 30))
            toll_centers = [(a + b) / 2 for a, b in zip(toll_hist.edges, toll_hist.edges[1:])]
            series["toll_histogram"] = (toll_centers, [float(c) for c in toll_hist.counts])
        _stats.write_plot_series(series, args.plot_data)

    if args.json:
        print(json.dumps(summary, default=float))
    else:
        print(f"lane: {log.lane}")
        print(f"completed ticks: {log.completed_ticks}")
        print(f"attacks: {summary['attacks']}")
        if "toll" in summary:
            toll = summary["toll"]
            print(
                f"toll mean {toll['mean']:.3f}  variance {toll['variance']:.1f}  "
                f"median {toll['median']:.0f}  zero_fraction {toll['zero_fraction']:.3f}"
            )
        for tick, entry in summary.get("checkpoints", {}).items():
            print(f"checkpoint {tick}: polarization {entry['polarization']:.4f}, attacks so far {entry['attacks_so_far']}")
        print(f"log: {log_path}")
        print(f"report: {report_path}")
        print(f"final digest: {log.final_digest}")
    return 0


def cmd_compare(args) -> int:
    data = read_log(args.log)
    synthetic = data.attack_deaths()
    incidents = load_incidents(args.incidents or bundled_incidents_path())
    if not synthetic:
        raise ValidationError(f"log {args.log} contains no attack events to compare")
    report = compare_datasets(synthetic, incidents.deaths, bins=args.bins)
    if args.plot_data:
        series = _stats.comparison_plot_series(synthetic, incidents.deaths, bins=args.bins)
        written = _stats.write_plot_series(series, args.plot_data)
        if not args.json:
            for name, path in written.items():
                print(f"plot data: {name} -> {path}")
    if args.json:
        print(json.dumps(report.to_dict(), default=float))
    else:
        print(report.to_text(), end="")
    return 0


def _sweep_point(payload: dict) -> dict:
    """Worker: run one sweep point and summarise it (module-level for pickling)."""
    from .config import parse_flat_config

    cfg = parse_flat_config(payload["config_flat"])
    for key, value in payload["assignment"].items():
        cfg = set_param(cfg, key, value)
    cfg = cfg.replace(seed=payload["seed"])
    region = load_region(payload["region_path"])

    out_dir = Path(payload["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    log = run(cfg, region, sinks=(JsonlSink(out_dir / "log.jsonl"),))
    deaths = log.attack_deaths()

    recorded = load_incidents(payload["incidents_path"]).deaths
    if deaths:
        report = compare_datasets(deaths, recorded)
        kl = report.kl_synthetic_vs_recorded
        toll = dataclasses.asdict(report.synthetic)
    else:
        kl = None
        toll = None
    result = {
        "point": payload["index"],
        "seed": payload["seed"],
        "assignment": payload["assignment"],
        "attacks": len(deaths),
        "kl_to_recorded": kl,
        "toll": toll,
        "digest": log.final_digest,
    }
    (out_dir / "report.json").write_text(json.dumps(result, indent=2, default=float))
    return result


def _sweep_design(spec: dict, master_seed: int) -> list:
    """LHS (or uniform random) design over the declared parameter ranges."""
    samples = int(spec.get("samples", 0))
    if samples < 1:
        raise ValidationError("sweep spec needs samples >= 1")
    parameters = spec.get("parameters", {})
    if not parameters:
        raise ValidationError("sweep spec declares no parameters")
    for key in parameters:
        if key not in TUNABLE_RANGES:
            raise ValidationError(f"sweep parameter {key!r} is not tunable")
    mode = spec.get("mode", "lhs")
    if mode not in ("lhs", "random"):
        raise ValidationError(f"sweep mode must be 'lhs' or 'random', got {mode!r}")

    gen = np.random.default_rng(mix64(master_seed ^ 0x5EEDDE51))
    design: list[dict] = [dict() for _ in range(samples)]
    for key, bounds in sorted(parameters.items()):
        lo, hi = float(bounds[0]), float(bounds[1])
        if not hi > lo:
            raise ValidationError(f"sweep range for {key!r} needs hi > lo")
        if mode == "lhs":
            strata = gen.permutation(samples)
            u = (strata + gen.random(samples)) / samples
        else:
            u = gen.random(samples)
        for i in range(samples):
            design[i][key] = lo + (hi - lo) * float(u[i])
    return design


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    region_path = Path(args.region) if args.region else bundled_region_path()
    incidents_path = Path(args.incidents) if args.incidents else bundled_incidents_path()

    spec = json.loads(Path(args.spec).read_text())
    design = _sweep_design(spec, cfg.seed)

    out_dir = Path(args.out)
    if out_dir.exists() and any(out_dir.iterdir()) and not args.force:
        raise ValidationError(f"output directory {out_dir} is not empty (use --force)")
    out_dir.mkdir(parents=True, exist_ok=True)

    from .config import config_to_flat

    payloads = [
        {
            "index": i,
            "assignment": assignment,
            "seed": mix64(cfg.seed ^ (i + 1)) % (2**63),
            "config_flat": config_to_flat(cfg),
            "region_path": str(region_path),
            "incidents_path": str(incidents_path),
            "out_dir": str(out_dir / f"point_{i:03d}"),
        }
        for i, assignment in enumerate(design)
    ]
    (out_dir / "design.json").write_text(json.dumps(design, indent=2))

    if args.workers == 1 or len(payloads) == 1:
        results = [_sweep_point(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_point, payloads))

    ranked = sorted(results, key=lambda r: (r["kl_to_recorded"] is None, r["kl_to_recorded"]))
    (out_dir / "rank_table.json").write_text(json.dumps(ranked, indent=2, default=float))
    csv_lines = ["rank,point,seed,kl_to_recorded,attacks," + ",".join(sorted(spec["parameters"]))]
    for rank, row in enumerate(ranked):
        params = ",".join(repr(row["assignment"][k]) for k in sorted(spec["parameters"]))
        kl = "" if row["kl_to_recorded"] is None else repr(row["kl_to_recorded"])
        csv_lines.append(f"{rank},{row['point']},{row['seed']},{kl},{row['attacks']},{params}")
    (out_dir / "rank_table.csv").write_text("\n".join(csv_lines) + "\n")

    if args.json:
        print(json.dumps(ranked, default=float))
    else:
        print(f"{len(results)} points -> {out_dir}")
        for row in ranked[:10]:
            kl = "n/a" if row["kl_to_recorded"] is None else f"{row['kl_to_recorded']:.4f}"
            print(f"  point {row['point']:3d}  kl={kl}  attacks={row['attacks']}")
    return 0


def cmd_serve(args) -> int:
    cfg = _load_config(args.config)
    region = _load_region_arg(args.region)
    max_ticks, _ = _parse_ticks(args.ticks)
    cfg = _apply_overrides(cfg, args, max_ticks)

    sinks = []
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        sinks.append(JsonlSink(out_dir / "log.jsonl"))

    def on_ready(server):
        payload = {"url": server.url, "port": server.port, "state": "serving"}
        print(json.dumps(payload) if args.json else f"steering server at {server.url}")
        sys.stdout.flush()

    log = serve_run(
        cfg,
        region,
        port=args.port,
        extra_sinks=tuple(sinks),
        dashboard_dir=args.dashboard_dir,
        linger=not args.exit_when_done,
        on_ready=on_ready,
    )
    closing = {"digest": log.final_digest, "completed_ticks": log.completed_ticks}
    print(json.dumps(closing) if args.json else f"final digest: {log.final_digest}")
    return 0


def cmd_gen_fixtures(args) -> int:
    written = write_fixtures(args.out)
    payload = {name: str(path) for name, path in written.items()}
    if args.json:
        print(json.dumps(payload))
    else:
        for name, path in payload.items():
            print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socsynth",
        description="Agent-based synthetic rare-event data generator with live steering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", help="config file (default: bundled default.config)")
        p.add_argument("--region", help="region file (default: bundled Meridia fixture)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p_run = sub.add_parser("run", help="execute one simulation run")
    common(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--ticks", help="tick count, or comma list of checkpoint ticks (runs to the max)")
    p_run.add_argument("--snapshot-every", type=int, dest="snapshot_every")
    p_run.add_argument("--sampling", choices=("random", "lhs"))
    p_run.add_argument("--lane", choices=("compiled", "python"), help="kernel lane override")
    p_run.add_argument("--frames-out", help="also record LiveFrames to this JSONL file")
    p_run.add_argument("--frames-every", type=int, default=10, help="frame cadence for --frames-out")
    p_run.add_argument("--plot-data", dest="plot_data", help="write x/y plot series CSVs to this directory")

    p_sweep = sub.add_parser("sweep", help="parameter sweep ranked by KL to the recorded fixture")
    common(p_sweep)
    p_sweep.add_argument("--spec", required=True, help="sweep spec JSON file")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--incidents", help="recorded incident file (default: bundled fixture)")
    p_sweep.add_argument("--workers", type=int, default=None, help="parallel workers (default: cores)")
    p_sweep.add_argument("--force", action="store_true", help="allow a non-empty output directory")

    p_cmp = sub.add_parser("compare", help="compare a run log's tolls against recorded incidents")
    p_cmp.add_argument("--log", required=True, help="run log (log.jsonl)")
    p_cmp.add_argument("--incidents", help="incident CSV (default: bundled fixture)")
    p_cmp.add_argument("--bins", type=int, default=30)
    p_cmp.add_argument("--plot-data", dest="plot_data", help="write x/y plot series CSVs to this directory")
    p_cmp.add_argument("--json", action="store_true")

    p_serve = sub.add_parser("serve", help="run with the live steering server")
    common(p_serve)
    p_serve.add_argument("--out", help="also write a run log into this directory")
    p_serve.add_argument("--ticks", help="tick count override")
    p_serve.add_argument("--snapshot-every", type=int, dest="snapshot_every")
    p_serve.add_argument("--sampling", choices=("random", "lhs"))
    p_serve.add_argument("--port", type=int, default=8642)
    p_serve.add_argument("--dashboard-dir", help="serve a built dashboard from this directory")
    p_serve.add_argument("--exit-when-done", action="store_true", help="shut down when the run ends")

    p_fix = sub.add_parser("gen-fixtures", help="regenerate the bundled fixtures into a directory")
    p_fix.add_argument("--out", required=True)
    p_fix.add_argument("--json", action="store_true")

    return parser


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "serve": cmd_serve,
    "gen-fixtures": cmd_gen_fixtures,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
