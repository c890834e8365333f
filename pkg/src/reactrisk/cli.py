"""Command-line entry point: ``reactrisk scenario|replay|bench|calibrate``.

Exit codes: 0 success, 1 input error, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

from .baselines import baseline_series, nearest_lead, write_baselines_csv
from .config import EngineConfig, load_config
from .errors import ConfigurationError, InputError
from .harness import assess_trace, latency_bench, random_scene, run_scenario
from .riskmap import calibrate_reference_energy, write_matrix_csv
from .scenarios import DriverMode, ScenarioKind
from .traceio import TraceSchema, load_trace, write_assessments, write_trace_csv

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="reactrisk", description="Runtime risk assessment engine")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("scenario", help="run a scripted scenario end to end")
    s.add_argument("kind", help="CF, CI, RV or IC")
    s.add_argument("--config")
    s.add_argument("--out", default="out")
    s.add_argument("--mode", choices=[m.value for m in DriverMode], default=DriverMode.WITH_WARNING.value)
    s.add_argument("--nominal", action="store_true", help="disable the conflict maneuver")

    r = sub.add_parser("replay", help="replay a recorded trajectory CSV")
    r.add_argument("--trace", required=True)
    r.add_argument("--ego-id", required=True, type=int)
    r.add_argument("--config")
    r.add_argument("--out", default="out")

    b = sub.add_parser("bench", help="time assess_frame per participant count")
    b.add_argument("--sizes", type=int, nargs="+", default=[0, 1, 5, 10, 20])
    b.add_argument("--repetitions", type=int, default=1000)
    b.add_argument("--config")

    c = sub.add_parser("calibrate", help="print the reference energy")
    c.add_argument("--config")
    return p


def _config(path) -> EngineConfig:
    return load_config(path) if path else EngineConfig()


class _AtomicDir:
    """Stage outputs in a sibling temp dir and move them into place on success."""

    def __init__(self, out):
        self.out = Path(out)

    def __enter__(self) -> Path:
        parent = self.out.resolve().parent
        try:
            parent.mkdir(parents=True, exist_ok=True)
            self.tmp = Path(tempfile.mkdtemp(prefix=".reactrisk-", dir=parent))
        except OSError as exc:
            raise InputError(f"cannot create output directory under {parent}: {exc}") from None
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            try:
                self.out.mkdir(parents=True, exist_ok=True)
                for f in self.tmp.iterdir():
                    os.replace(f, self.out / f.name)
            except OSError as err:
                shutil.rmtree(self.tmp, ignore_errors=True)
                raise InputError(f"cannot write outputs to {self.out}: {err}") from None
        shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def snapshot_times(t_f: float, t_w: float | None) -> list[float]:
    times = [t_f - 1.0, t_f]
    if t_w is not None:
        times += [t_w, t_w + 1.0]
    return times


def _nearest_frame(assessments, t: float) -> int:
    return min(range(len(assessments)), key=lambda k: abs(assessments[k].t - t))


def _cmd_scenario(args) -> int:
    cfg = _config(args.config)
    kind = ScenarioKind.parse(args.kind)
    res = run_scenario(kind, cfg, DriverMode(args.mode), nominal=args.nominal)
    with _AtomicDir(args.out) as tmp:
        write_trace_csv(tmp / "trace.csv", res.trace)
        write_assessments(tmp / "assessments.jsonl", res.assessments)
        written = set()
        for t in snapshot_times(res.script.t_f, res.warning_time):
            k = _nearest_frame(res.assessments, t)
            if k in written:
                continue
            written.add(k)
            a = res.assessments[k]
            write_matrix_csv(tmp / f"matrix_{a.t:.2f}.csv", a.risk_map.matrix, a.grid, t=a.t)
        doc = res.metrics.to_dict()
        doc.update(scenario=kind.name, mode=DriverMode(args.mode).value, nominal=args.nominal,
                   t_f=res.script.t_f, t_w=res.warning_time,
                   brake_onset=res.trace.meta.get("brake_onset"))
        (tmp / "metrics.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"{kind.name}: miss_rate={res.metrics.miss_rate} false_alarm_rate={res.metrics.false_alarm_rate} "
          f"t_w={res.warning_time} -> {args.out}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    cfg = _config(args.config)
    try:
        schema = TraceSchema(frame_rate=cfg.io.frame_rate)
    except ValueError as exc:
        raise ConfigurationError(f"io: {exc}") from None
    trace = load_trace(args.trace, schema, ego_id=args.ego_id, mass_defaults=cfg.io.mass_defaults)
    assessments = assess_trace(trace, cfg, cfg.io.lane)
    records = baseline_series(
        trace, lambda e, o: nearest_lead(e, o, cfg.io.lane_tolerance, cfg.io.vehicle_length))
    with _AtomicDir(args.out) as tmp:
        write_assessments(tmp / "assessments.jsonl", assessments)
        write_baselines_csv(tmp / "baselines.csv", records,
                            react_levels=[int(a.advisory.level) for a in assessments],
                            react_risk=[a.risk_map.global_risk for a in assessments])
    warned = next((a.t for a in assessments if a.advisory.level >= 1), None)
    print(f"replayed {len(trace)} frames, first warning t={warned} -> {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _config(args.config)
    if args.repetitions < 1 or any(n < 0 for n in args.sizes):
        raise ConfigurationError("bench: repetitions must be >= 1 and sizes >= 0")
    rows = latency_bench(random_scene, args.sizes, args.repetitions, cfg.grid, cfg)
    print(f"{'participants':>12} {'cells':>6} {'mean_ms':>9} {'p95_ms':>9} {'max_ms':>9}")
    for r in rows:
        print(f"{r.participants:>12d} {r.cells:>6d} {r.mean_ms:>9.3f} {r.p95_ms:>9.3f} {r.max_ms:>9.3f}")
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    cfg = _config(args.config)
    print(repr(calibrate_reference_energy(cfg.model, cfg.grid)))
    return EXIT_OK


COMMANDS = {"scenario": _cmd_scenario, "replay": _cmd_replay, "bench": _cmd_bench, "calibrate": _cmd_calibrate}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
