"""Batch and operations entry point.

Subcommands: ``convert`` (table file to tree JSON), ``ask`` (one-shot
question over a tree file), ``bench`` (accuracy over a JSONL case file),
``serve`` (launch the HTTP service).  Only the answer payload goes to
stdout; logs and timings go to stderr.  Exit codes: 0 success, 1 parse/IO
failure, 2 model failure, 3 unanswerable question.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .agent import Session  # noqa: F401  (re-exported for scripting)
from .build import build_hotree, merge_sheets
from .config import BuildParams, PipelineConfig
from .errors import GatewayError, BuildError, HotreeError, IngestError, TreeError
from .gateway import HttpGateway, load_model_config
from .ingest import parse_table
from .qa import LLMDecomposer, TemplateDecomposer, answer, answers_agree
from .tree import deserialize, serialize

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_MODEL = 2
EXIT_UNANSWERABLE = 3


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _tau(raw: str) -> float:
    value = float(raw)
    if not (0.0 <= value <= 1.0):
        raise argparse.ArgumentTypeError("tau must lie in [0, 1]")
    return value


def _gateway_from(config_path: str | None):
    if not config_path:
        return None
    return HttpGateway(load_model_config(config_path))


def _decomposer_from(kind: str, gateway):
    if kind == "llm":
        if gateway is None:
            raise GatewayError("llm decomposer requires --config with providers")
        return LLMDecomposer(gateway)
    return TemplateDecomposer()


def _build_tree_from_file(path: Path, gateway, params: BuildParams):
    sheets = parse_table(path.name, path.read_bytes()).sheets
    built = [
        build_hotree(grid, gateway=gateway, tau=params.tau, mode=params.mode)
        for _, grid in sheets
    ]
    if len(built) == 1:
        return built[0]
    tree = merge_sheets([t for t, _ in built])
    report = built[0][1]
    report.meta_count = sum(r.meta_count for _, r in built)
    report.body_count = sum(r.body_count for _, r in built)
    report.warnings = [w for _, r in built for w in r.warnings]
    return tree, report


def cmd_convert(args: argparse.Namespace) -> int:
    path = Path(args.input)
    try:
        gateway = _gateway_from(args.config)
        params = BuildParams(tau=args.tau, mode=args.mode)
        tree, report = _build_tree_from_file(path, gateway, params)
    except (GatewayError, BuildError) as exc:
        _log(f"model failure: {exc.message}")
        return EXIT_MODEL
    except (HotreeError, OSError, ValueError) as exc:
        _log(f"cannot convert {path}: {exc}")
        return EXIT_PARSE

    out = Path(args.output) if args.output else \
        path.with_name(path.stem + ".hotree.json")
    out.write_bytes(serialize(tree))
    report_path = out.with_name(out.name.replace(".json", "") + ".report.json")
    report_path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    for warning in report.warnings:
        _log(f"warning: {warning}")
    _log(f"report written to {report_path}")
    print(out)
    return EXIT_OK


def cmd_ask(args: argparse.Namespace) -> int:
    try:
        tree = deserialize(Path(args.tree).read_bytes())
    except (TreeError, OSError) as exc:
        _log(f"cannot load tree: {exc}")
        return EXIT_PARSE
    try:
        gateway = _gateway_from(args.config)
        decomposer = _decomposer_from(args.decomposer, gateway)
    except (GatewayError, HotreeError, OSError, ValueError) as exc:
        _log(f"model failure: {exc}")
        return EXIT_MODEL

    result = answer(args.question, tree, decomposer,
                    PipelineConfig(verify_backward=not args.no_backward))
    payload: dict = {"answer": result.text, "confidence": result.confidence}
    if args.show_trace:
        payload["sub_questions"] = [r.note for r in result.trace.records]
        payload["retrieval_path"] = result.trace.retrieval_path
        payload["forward_checks"] = [
            c.to_dict() for c in result.verification.forward_checks
        ]
        payload["rephrased_question"] = result.verification.rephrased_question
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    _log(f"elapsed_ms={result.elapsed_ms:.1f}")
    return EXIT_OK if result.confidence > 0.0 else EXIT_UNANSWERABLE


def _run_case(case: dict, base_dir: Path, tree_cache: dict, gateway,
              decomposer, params: BuildParams) -> dict:
    table_path = case.get("table_path", "")
    question = case.get("question", "")
    gold = case.get("gold_answer", "")
    record = {"table_path": table_path, "question": question, "gold": gold,
              "got": None, "correct": False}
    try:
        resolved = (base_dir / table_path).resolve()
        if resolved not in tree_cache:
            tree_cache[resolved], _ = _build_tree_from_file(
                resolved, gateway, params
            )
        tree = tree_cache[resolved]
        result = answer(question, tree, decomposer)
        record["got"] = result.text
        record["confidence"] = result.confidence
        record["correct"] = result.confidence > 0.0 and \
            answers_agree(result.text, gold)
    except (HotreeError, OSError, ValueError) as exc:
        record["error"] = str(exc)
    return record


def cmd_bench(args: argparse.Namespace) -> int:
    base_dir = Path(args.dir) if args.dir else Path.cwd()
    try:
        lines = Path(args.cases).read_text(encoding="utf-8").splitlines()
        cases = [json.loads(line) for line in lines if line.strip()]
        gateway = _gateway_from(args.config)
        decomposer = _decomposer_from(args.decomposer, gateway)
    except (HotreeError, OSError, ValueError) as exc:
        _log(f"cannot load benchmark cases: {exc}")
        return EXIT_PARSE

    params = BuildParams(tau=args.tau, mode=args.mode)
    tree_cache: dict = {}
    if args.jobs > 1:
        # build sequentially (shared cache), answer in parallel
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            per_case = list(pool.map(
                lambda c: _run_case(c, base_dir, tree_cache, gateway,
                                    decomposer, params),
                cases,
            ))
    else:
        per_case = [
            _run_case(c, base_dir, tree_cache, gateway, decomposer, params)
            for c in cases
        ]

    correct = sum(1 for r in per_case if r["correct"])
    report = {
        "total": len(per_case),
        "correct": correct,
        "accuracy": correct / len(per_case) if per_case else 0.0,
        "per_case": per_case,
    }
    if args.report:
        Path(args.report).write_text(
            json.dumps(report, indent=2, ensure_ascii=False, sort_keys=True)
            + "\n",
            encoding="utf-8",
        )
        _log(f"report written to {args.report}")
    print(json.dumps(
        {"total": report["total"], "correct": report["correct"],
         "accuracy": report["accuracy"]},
        sort_keys=True,
    ))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    gateway = _gateway_from(args.config)
    app = create_app(
        Path(args.data_dir),
        gateway=gateway,
        decomposer=args.decomposer,
        build_params=BuildParams(tau=args.tau, mode=args.mode),
        static_dir=args.static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotree",
        description="Semi-structured table QA over hierarchical trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    convert = sub.add_parser("convert", help="table file -> tree JSON")
    convert.add_argument("input")
    convert.add_argument("--mode", choices=["heuristic", "model", "auto"],
                         default="heuristic")
    convert.add_argument("--tau", type=_tau, default=BuildParams().tau)
    convert.add_argument("--config", help="model providers JSON")
    convert.add_argument("-o", "--output")
    convert.set_defaults(fn=cmd_convert)

    ask = sub.add_parser("ask", help="answer one question over a tree file")
    ask.add_argument("--tree", required=True)
    ask.add_argument("--question", required=True)
    ask.add_argument("--show-trace", action="store_true")
    ask.add_argument("--decomposer", choices=["template", "llm"],
                     default="template")
    ask.add_argument("--no-backward", action="store_true",
                     help="skip backward verification")
    ask.add_argument("--config", help="model providers JSON")
    ask.set_defaults(fn=cmd_ask)

    bench = sub.add_parser("bench", help="run a JSONL benchmark file")
    bench.add_argument("--cases", required=True)
    bench.add_argument("--dir", help="base directory for table paths")
    bench.add_argument("--report", help="write the full report JSON here")
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--decomposer", choices=["template", "llm"],
                       default="template")
    bench.add_argument("--mode", choices=["heuristic", "model", "auto"],
                       default="heuristic")
    bench.add_argument("--tau", type=_tau, default=BuildParams().tau)
    bench.add_argument("--config", help="model providers JSON")
    bench.set_defaults(fn=cmd_bench)

    serve = sub.add_parser("serve", help="launch the HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data-dir", default="./data")
    serve.add_argument("--decomposer", choices=["template", "llm"],
                       default="template")
    serve.add_argument("--mode", choices=["heuristic", "model", "auto"],
                       default="auto")
    serve.add_argument("--tau", type=_tau, default=BuildParams().tau)
    serve.add_argument("--config", help="model providers JSON")
    serve.add_argument("--static-dir", help="serve a built UI from here")
    serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
