"""Command line entry point: ``hde <subcommand>``.

Exit codes: 0 on success, 1 when a run fails at runtime, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from hde.backend import BackendError
from hde.config import ConfigError, load_config, resolve_path
from hde.harness import (
    ablation_rows,
    ablation_summary,
    acs_rows,
    execute_plan,
    load_plan,
    load_run_docs,
    resilience_rows,
    rows_for,
    run_and_score,
    write_table,
)
from hde.identity import IdentityError
from hde.metrics import MetricError, acs_aggregate, load_lexicon, read_acs_csv
from hde.orchestrator import DebateAborted
from hde.retrieval import IngestError, RetrievalError, build_index, load_manifest
from hde.tom import WeaknessMapError

log = logging.getLogger("hde")

USAGE_ERRORS = (ConfigError, IdentityError, WeaknessMapError, FileNotFoundError)
RUNTIME_ERRORS = (BackendError, DebateAborted, MetricError, IngestError, RetrievalError, OSError, ValueError)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="run config YAML")
    p.add_argument("--backend", choices=("scripted", "remote"), help="override the config's backend kind")
    p.add_argument("--jobs", type=int, default=1, help="runs executed concurrently")
    p.add_argument("--seed-order", help="comma separated team ids fixing who speaks first")
    p.add_argument("--keywords-dir", default="pkg:keywords", help="directory of keyword lists")
    p.add_argument("--out", default="runs", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="hde", description="Multi-agent ethical debate engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="chunk and index a corpus manifest")
    p.add_argument("--manifest", help="corpus manifest (defaults to the config's)")
    p.add_argument("--cache", help="index cache file")

    p = sub.add_parser("debate", parents=[common], help="run one three-phase debate")
    p.add_argument("--script", help="scripted backend responses")
    p.add_argument("--no-perturbation", action="store_true", help="drop the perturbation schedule")
    p.add_argument("--da-cr-window", choices=("all", "post"), default="all")

    for name, default in (("factorial", "pkg:plans/factorial.yaml"), ("ablation", "pkg:plans/ablation.yaml")):
        p = sub.add_parser(name, parents=[common], help=f"run the {name} experiment plan")
        p.add_argument("--plan", default=default)

    p = sub.add_parser("acs", parents=[common], help="aggregate learner score records")
    p.add_argument("--csv", default="pkg:acs/scores.csv", help="per-learner score table")

    p = sub.add_parser("report", parents=[common], help="re-aggregate a finished plan directory")
    p.add_argument("plan_dir")
    return parser


def _path(value: str) -> Path:
    return resolve_path(value, Path.cwd())


def _cmd_ingest(args) -> int:
    manifest_path = args.manifest
    if manifest_path is None:
        if not args.config:
            raise ConfigError("ingest needs --manifest or --config")
        cfg = load_config(args.config)
        if cfg.corpus_manifest is None:
            raise ConfigError("config has no corpus_manifest")
        manifest_path = cfg.corpus_manifest
    manifest = load_manifest(_path(str(manifest_path)))
    cache = Path(args.cache) if args.cache else Path(args.out) / "index.json"
    _, summary = build_index(manifest, cache)
    for cid, status in summary["status"].items():
        print(f"{cid}\t{status}")
    print(f"corpora={summary['corpora']} chunks={summary['chunks']} cache_hit={summary['cache_hit']}")
    return 0


def _cmd_debate(args) -> int:
    if not args.config:
        raise ConfigError("debate needs --config")
    cfg = load_config(args.config)
    overrides: dict = {}
    backend = dict(cfg.backend)
    if args.backend:
        backend["kind"] = args.backend
    if args.script:
        backend["script_path"] = str(Path(args.script).resolve())
    overrides["backend"] = backend
    if args.no_perturbation:
        overrides["perturbations"] = []
    if args.seed_order:
        overrides["seed_order"] = tuple(args.seed_order.split(","))
    cfg = cfg.with_overrides(**overrides)
    lexicon = load_lexicon(_path(args.keywords_dir))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report, _ = run_and_score(cfg, lexicon, out, da_cr_window=args.da_cr_window)
    for key, value in report.to_json()["rounded"].items():
        print(f"{key}\t{'' if value is None else value}")
    print(f"transcript\t{out / 'transcript.jsonl'}")
    return 0


def _render(kind: str, docs: list[dict], plan_dir: Path) -> None:
    from hde import plotting

    write_table(rows_for(kind, docs), plan_dir / "table.csv")
    if kind == "ablation":
        plotting.ablation_figure(ablation_summary(docs), plan_dir / "figure.png")
    else:
        plotting.resilience_figure(docs, plan_dir / "figure.png")


def _cmd_plan(args) -> int:
    plan = load_plan(_path(args.plan), backend_kind=args.backend)
    plan.kind = args.command
    lexicon = load_lexicon(_path(args.keywords_dir))
    plan_dir, docs = execute_plan(plan, lexicon, args.out, jobs=max(1, args.jobs))
    _render(plan.kind, docs, plan_dir)
    rows = ablation_rows(docs) if plan.kind == "ablation" else resilience_rows(docs)
    for row in rows:
        print("\t".join(row))
    return 0


def _cmd_acs(args) -> int:
    from hde import plotting

    records = read_acs_csv(_path(args.csv))
    summary = acs_aggregate(records)
    out = Path(args.out)
    write_table(acs_rows(summary), out / "acs_table.csv")
    plotting.acs_figure(summary, out / "acs_figure.png")
    for row in acs_rows(summary):
        print("\t".join(row))
    return 0


def _cmd_report(args) -> int:
    plan_dir = Path(args.plan_dir)
    meta, docs = load_run_docs(plan_dir)
    _render(meta.get("kind", "factorial"), docs, plan_dir)
    for row in rows_for(meta.get("kind", "factorial"), docs):
        print("\t".join(row))
    return 0


COMMANDS = {
    "ingest": _cmd_ingest,
    "debate": _cmd_debate,
    "factorial": _cmd_plan,
    "ablation": _cmd_plan,
    "acs": _cmd_acs,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as exc:
        print(f"hde: error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"hde: run failed: {exc}", file=sys.stderr)
        if isinstance(exc, DebateAborted):
            print(f"hde: partial transcript kept ({len(exc.state.transcript)} turns)", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
