"""Command-line entry point: run experiments, ablations, reports, refinement
sweeps, and the chat service."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .agent import AgentConfig
from .catalog import load_catalog
from .gateway import LlmGateway, make_backend
from .runner import ExperimentConfig, ablation, refinement_sweep, run, write_report

logger = logging.getLogger(__name__)


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config)
    if getattr(args, "backend", None):
        config.backend_spec = args.backend
    if getattr(args, "judge_backend", None):
        config.judge_backend_spec = args.judge_backend
    if getattr(args, "out", None):
        config.out_dir = args.out
    return config


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    manifest = run(config)
    failed = [k for k, s in manifest.statuses.items() if s == "failed"]
    print(f"run complete: {len(manifest.statuses)} dialogue(s), {len(failed)} failed")
    print(f"outputs in {config.out_dir}")
    return 1 if failed else 0


def cmd_ablate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    payload = ablation(config)
    for arm, metrics in payload["arms"].items():
        print(f"{arm}: success_rate={metrics['success_rate']} credibility={metrics['credibility_mean']}")
    print(f"outputs in {config.out_dir}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.in_dir)
    catalog = None
    config_path = run_dir / "config.json"
    if config_path.exists():
        config_data = json.loads(config_path.read_text(encoding="utf-8"))
        catalog_path = config_data.get("catalog_path")
        if catalog_path and Path(catalog_path).exists():
            catalog = load_catalog(catalog_path)
    report = write_report(run_dir, catalog)
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    run_dir = Path(args.in_dir)
    config_data = json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
    backend_spec = args.backend or config_data["backend"]
    judge_spec = args.judge_backend or config_data["judge_backend"]
    gateway = LlmGateway(make_backend(backend_spec))
    judge_gateway = LlmGateway(make_backend(judge_spec))
    catalog = load_catalog(config_data["catalog_path"])
    iterations = [int(x) for x in args.iters.split(",") if x.strip() != ""]
    payload = refinement_sweep(run_dir, iterations, gateway, judge_gateway, catalog)
    out_path = run_dir / "refinement_sweep.json"
    out_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for point in payload["iterations"]:
        print(
            f"max_iterations={point['max_iterations']}: "
            f"credibility={point['credibility_mean']:.3f} "
            f"persuasiveness={point['persuasiveness_mean']}"
        )
    print(f"wrote {out_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    catalog = load_catalog(args.catalog)
    live_options = {}
    if args.endpoint:
        live_options["endpoint"] = args.endpoint
    if args.model:
        live_options["model"] = args.model
    gateway = LlmGateway(make_backend(args.backend, live_options))
    judge_gateway = None
    if args.judge_backend:
        judge_gateway = LlmGateway(make_backend(args.judge_backend, live_options))
    app = create_app(
        catalog,
        gateway,
        judge_gateway=judge_gateway,
        agent_config=AgentConfig(),
        transcript_path=args.transcripts,
        static_dir=args.static if args.static and Path(args.static).is_dir() else None,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pccrs", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the planned dialogues and compute metrics")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--backend", help="override: scripted:<path> or live")
    p_run.add_argument("--judge-backend", dest="judge_backend")
    p_run.add_argument("--out")
    p_run.set_defaults(func=cmd_run)

    p_ablate = sub.add_parser("ablate", help="run the four ablation arms")
    p_ablate.add_argument("--config", required=True)
    p_ablate.add_argument("--backend")
    p_ablate.add_argument("--judge-backend", dest="judge_backend")
    p_ablate.add_argument("--out")
    p_ablate.set_defaults(func=cmd_ablate)

    p_report = sub.add_parser("report", help="recompute metrics from persisted transcripts")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.set_defaults(func=cmd_report)

    p_sweep = sub.add_parser("sweep", help="refinement-iteration sweep over credibility-3 explanations")
    p_sweep.add_argument("--in", dest="in_dir", required=True)
    p_sweep.add_argument("--iters", required=True, help="comma-separated iteration caps, e.g. 0,1,2,3")
    p_sweep.add_argument("--backend")
    p_sweep.add_argument("--judge-backend", dest="judge_backend")
    p_sweep.set_defaults(func=cmd_sweep)

    p_serve = sub.add_parser("serve", help="start the chat service")
    p_serve.add_argument("--catalog", required=True)
    p_serve.add_argument("--backend", required=True, help="scripted:<path> or live")
    p_serve.add_argument("--judge-backend", dest="judge_backend")
    p_serve.add_argument("--endpoint", help="live mode chat-completion URL")
    p_serve.add_argument("--model", help="live mode model name")
    p_serve.add_argument("--host", default=os.environ.get("PCCRS_HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int, default=int(os.environ.get("PCCRS_PORT", "8000")))
    p_serve.add_argument("--static", help="directory with the web UI bundle")
    p_serve.add_argument("--transcripts", help="JSONL path for session persistence")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
