"""Headless entry points for every pipeline stage.

Subcommands mirror the pipeline: ``scan`` (data quality), ``train``
(metrics), ``explain`` (bundle JSON), ``serve`` (HTTP service) and
``replay`` (usage analytics from a session journal).

Exit codes: 0 success, 2 I/O or data errors, 64 usage errors, 70 internal
errors. JSON output is sorted by key so equal inputs produce equal bytes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .analytics import InteractionEvent, build_usage_summary, render_summary_table
from .dataset import SplitSpec, load_csv, load_meta, split_train_test
from .errors import SteerkitError
from .explain import (
    VARIANTS,
    build_bundle,
    density_distribution,
    feature_importance,
    key_insights,
    top_decision_rules,
)
from .forest import ForestParams, train_forest
from .quality import run_detectors
from .steering import AttemptRecord, read_journal

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70

FORMAT_JSON = "json"
FORMAT_TEXT = "text"


class UsageExit(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageExit(message)


def build_parser() -> CliParser:
    parser = CliParser(prog="steerkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p):
        p.add_argument("--data", default=os.environ.get("EXMOS_DATA"), help="training CSV path")
        p.add_argument("--meta", default=os.environ.get("EXMOS_META"), help="feature sidecar JSON path")
        p.add_argument("--seed", type=int, default=int(os.environ.get("EXMOS_SEED", "42")))
        p.add_argument("--format", choices=[FORMAT_JSON, FORMAT_TEXT], default=FORMAT_JSON)

    scan = sub.add_parser("scan", help="profile data quality")
    add_data_flags(scan)

    train = sub.add_parser("train", help="train the classifier and report metrics")
    add_data_flags(train)

    explain = sub.add_parser("explain", help="emit the explanation bundle for a variant")
    add_data_flags(explain)
    explain.add_argument("--variant", choices=list(VARIANTS), required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    add_data_flags(serve)
    serve.add_argument("--port", type=int, default=int(os.environ.get("EXMOS_PORT", "8000")))
    serve.add_argument("--journal-dir", default=os.environ.get("EXMOS_JOURNAL_DIR"))
    serve.add_argument("--ui-dir", default=os.environ.get("EXMOS_UI_DIR"),
                       help="serve a built dashboard from this directory at /ui")

    replay = sub.add_parser("replay", help="compute usage analytics from a session journal")
    replay.add_argument("journal", help="JSON-lines session journal path")
    replay.add_argument("--format", choices=[FORMAT_JSON, FORMAT_TEXT], default=FORMAT_JSON)

    return parser


def _require_paths(args) -> None:
    if not args.data or not args.meta:
        raise UsageExit("--data and --meta are required (or EXMOS_DATA / EXMOS_META)")


def _load_table(args):
    return load_csv(args.data, load_meta(args.meta))


def _emit(doc: dict, text: str, fmt: str) -> None:
    if fmt == FORMAT_JSON:
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(text)


def cmd_scan(args) -> int:
    _require_paths(args)
    table = _load_table(args)
    report = run_detectors(table, table)
    lines = [f"{'issue':<22}{'subscore':>10}{'impact':>10}"]
    for issue in report.issues:
        lines.append(f"{issue.kind.value:<22}{issue.subscore:>10.1f}{issue.impact:>10.1f}")
    lines.append(f"\nscore: {report.score:.1f}  level: {report.level}")
    _emit(report.to_dict(), "\n".join(lines), args.format)
    return EXIT_OK


def cmd_train(args) -> int:
    _require_paths(args)
    table = _load_table(args)
    train, test = split_train_test(table, SplitSpec(seed=args.seed))
    model = train_forest(train, test, ForestParams(seed=args.seed))
    m = model.metrics
    text = (
        f"train accuracy: {m.train_accuracy:.4f}\n"
        f"test accuracy:  {m.test_accuracy:.4f}\n"
        f"train samples:  {m.n_train_samples}\n"
        f"features:       {m.n_features}"
    )
    _emit(m.to_dict(), text, args.format)
    return EXIT_OK


def cmd_explain(args) -> int:
    _require_paths(args)
    table = _load_table(args)
    train, test = split_train_test(table, SplitSpec(seed=args.seed))
    model = train_forest(train, test, ForestParams(seed=args.seed))
    quality = run_detectors(table, table)
    bundle = build_bundle(
        args.variant,
        model.metrics,
        key_insights=key_insights(table, quality),
        density=[density_distribution(table, n) for n in table.predictor_names],
        quality=quality,
        importances=feature_importance(model, test, seed=args.seed),
        rules=top_decision_rules(train),
    )
    doc = bundle.to_dict()
    text = f"variant {bundle.variant}: tiles {', '.join(bundle.tiles)}"
    _emit(doc, text, args.format)
    return EXIT_OK


def cmd_serve(args) -> int:
    _require_paths(args)
    import uvicorn

    from .service import create_app

    app = create_app(
        data_path=args.data,
        meta_path=args.meta,
        seed=args.seed,
        journal_dir=args.journal_dir,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")
    return EXIT_OK


def cmd_replay(args) -> int:
    records = read_journal(args.journal)
    events = [InteractionEvent.from_dict(r) for r in records if r.get("type") == "event"]
    attempts = [
        AttemptRecord(
            attempt_id=r["attempt_id"],
            session_id=r.get("session_id", ""),
            mechanism=r.get("mechanism"),
            resulting_test_accuracy=r["resulting_test_accuracy"],
            success=r["success"],
        )
        for r in records
        if r.get("type") == "attempt"
    ]
    users = sorted(
        {r["session_id"] for r in records if r.get("type") == "session"}
        | {e.session_id for e in events}
        | {a.session_id for a in attempts}
    )
    summary = build_usage_summary(events, attempts, users or None)
    _emit(summary.to_dict(), render_summary_table(summary), args.format)
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "train": cmd_train,
    "explain": cmd_explain,
    "serve": cmd_serve,
    "replay": cmd_replay,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageExit:
        return EXIT_USAGE
    except (OSError, SteerkitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit 70
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
