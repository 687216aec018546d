"""Command-line entry point: ``policysynth <command> ...``.

Exit codes: 0 success, 1 validation or comparison failure, 2 configuration
or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .analyzer import Relation, classify_requests, compare, permissiveness
from .errors import ConfigurationError, PolicySynthError, ValidationFailure
from .fgdsl import ACCOUNT_PLACEHOLDER, compile_fgspec, parse_fgspec
from .harness import emit_report, run_rq1, run_rq2, run_rq3, summarize
from .policy import parse_policy, serialize_policy
from .specgen import (
    CorpusEntry,
    RequestSpec,
    SpecParams,
    generate_request_spec,
    load_corpus,
    load_entry,
    validate_corpus,
)
from .synth import JsonlSink, Prompt, PromptKind, backend_from_spec, build_prompt, synthesize

log = logging.getLogger("policysynth")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def parse_seeds(text: str) -> list[int]:
    """``"1-100"``, ``"3,5,8"`` or a mix such as ``"1-3,10"``."""
    seeds: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            lo, sep, hi = part.partition("-")
            if sep:
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise ConfigurationError(f"bad seed list {text!r}") from None
    if not seeds:
        raise ConfigurationError("seed list is empty")
    return seeds


# -- commands ----------------------------------------------------------------


def cmd_gen_spec(args: argparse.Namespace) -> int:
    params = SpecParams(depth_range=(args.depth_min, args.depth_max))
    spec = generate_request_spec(args.seed, params)
    _write(args.out, spec.to_json() + "\n")
    return EXIT_OK


def cmd_compile_dsl(args: argparse.Namespace) -> int:
    spec = parse_fgspec(_read(args.input), args.account_id)
    _write(args.out, serialize_policy(compile_fgspec(spec), indent=2) + "\n")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    policy = parse_policy(_read(args.policy))
    spec = RequestSpec.from_json(_read(args.spec))
    cl = classify_requests(policy, spec.allowed, spec.denied)
    out = cl.to_dict()
    if not args.verbose:
        out["rows"] = [r.to_dict() for r in cl.failures()]
    print(json.dumps(out, indent=2))
    return EXIT_OK if cl.misclassified == 0 else EXIT_FAILURE


def cmd_compare(args: argparse.Namespace) -> int:
    p1 = parse_policy(_read(args.p1))
    p2 = parse_policy(_read(args.p2))
    v = compare(p1, p2, bound=args.bound)
    out = v.to_dict()
    out["witness_only_in_first"] = v.witness_first
    out["witness_only_in_second"] = v.witness_second
    print(json.dumps(out, indent=2))
    return EXIT_OK if v.relation is Relation.EQUIVALENT else EXIT_FAILURE


def cmd_count(args: argparse.Namespace) -> int:
    c = permissiveness(parse_policy(_read(args.policy)), bound=args.bound)
    print(json.dumps({"count": str(c.count), "bound": c.length_bound}, indent=2))
    return EXIT_OK


def _prompt_source(kind: PromptKind, path: str):
    p = Path(path)
    if p.is_dir():
        return load_entry(p)
    text = _read(path)
    if kind is PromptKind.CONCRETE_REQUEST:
        return RequestSpec.from_json(text)
    if kind is PromptKind.FINE_GRAINED_SYNTAX:
        return parse_fgspec(text)
    return text


def cmd_prompt(args: argparse.Namespace) -> int:
    kind = PromptKind(args.kind)
    prompt = build_prompt(kind, _prompt_source(kind, args.source))
    if args.raw:
        _write(args.out, prompt.text)
    else:
        _write(args.out, json.dumps(prompt.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _corpus(path: str | None) -> list[CorpusEntry]:
    return load_corpus(path)


def cmd_synthesize(args: argparse.Namespace) -> int:
    try:
        prompt = Prompt.from_dict(json.loads(_read(args.prompt)))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigurationError(f"{args.prompt} is not a prompt file written by the prompt command") from exc
    backend = backend_from_spec(args.backend, _corpus(args.corpus))
    sink = JsonlSink(args.transcript) if args.transcript else None
    record = synthesize(prompt, backend, sink)
    if not record.ok:
        print(json.dumps(record.extracted.to_dict(), indent=2))  # type: ignore[union-attr]
        return EXIT_FAILURE
    _write(args.out, serialize_policy(record.extracted, indent=2) + "\n")  # type: ignore[arg-type]
    return EXIT_OK


def _run_experiment(args: argparse.Namespace, result) -> int:
    if args.report_dir:
        for path in emit_report(result, args.report_dir):
            log.info("wrote %s", path)
    print(summarize(result))
    return EXIT_OK


def cmd_rq1(args: argparse.Namespace) -> int:
    backend = backend_from_spec(args.backend, _corpus(args.corpus))
    sink = JsonlSink(args.transcript) if args.transcript else None
    result = run_rq1(parse_seeds(args.seeds), backend, max_in_flight=args.jobs, sink=sink)
    return _run_experiment(args, result)


def _cmd_rq_compare(args: argparse.Namespace, runner) -> int:
    corpus = _corpus(args.corpus)
    backend = backend_from_spec(args.backend, corpus)
    sink = JsonlSink(args.transcript) if args.transcript else None
    return _run_experiment(args, runner(corpus, backend, max_in_flight=args.jobs, sink=sink))


def cmd_validate_corpus(args: argparse.Namespace) -> int:
    entries = _corpus(args.corpus)
    try:
        report = validate_corpus(entries)
    except ValidationFailure as exc:
        print(json.dumps(exc.report.to_dict(), indent=2))
        print(f"invalid entries: {', '.join(exc.entry_ids)}", file=sys.stderr)
        return EXIT_FAILURE
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="policysynth", description="Synthesize and verify access control policies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose-log", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-spec", help="generate a concrete-request specification")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--depth-min", type=int, default=1)
    p.add_argument("--depth-max", type=int, default=4)
    p.set_defaults(func=cmd_gen_spec)

    p = sub.add_parser("compile-dsl", help="compile a fine-grained specification to a policy")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--account-id", default=ACCOUNT_PLACEHOLDER)
    p.set_defaults(func=cmd_compile_dsl)

    p = sub.add_parser("eval", help="classify a specification's requests under a policy")
    p.add_argument("--policy", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--verbose", action="store_true", help="list every request, not only failures")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="relative permissiveness of two policies")
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--bound", type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("count", help="number of allowed requests within a field-length bound")
    p.add_argument("--policy", required=True)
    p.add_argument("--bound", type=int)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("prompt", help="build a synthesis prompt")
    p.add_argument("--kind", required=True, choices=[k.value for k in PromptKind])
    p.add_argument("--source", required=True, help="spec JSON, corpus entry directory, description or .fgs file")
    p.add_argument("--out")
    p.add_argument("--raw", action="store_true", help="write the prompt text instead of the prompt JSON")
    p.set_defaults(func=cmd_prompt)

    def backend_args(q: argparse.ArgumentParser) -> None:
        q.add_argument("--backend", default="oracle", help="oracle | replay:<dir> | http")
        q.add_argument("--corpus", help="corpus directory (default: bundled)")
        q.add_argument("--transcript", help="append synthesis records to this JSON-lines file")

    p = sub.add_parser("synthesize", help="run one prompt through a backend")
    p.add_argument("--prompt", required=True)
    p.add_argument("--out")
    backend_args(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("rq1", help="concrete-request experiment")
    p.add_argument("--seeds", default="1-100")
    p.add_argument("--report-dir")
    p.add_argument("--jobs", type=int, default=1, help="backend calls in flight")
    backend_args(p)
    p.set_defaults(func=cmd_rq1)

    for name, runner, text in (
        ("rq2", run_rq2, "coarse-grained description experiment"),
        ("rq3", run_rq3, "fine-grained specification experiment"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--report-dir")
        p.add_argument("--jobs", type=int, default=1, help="backend calls in flight")
        backend_args(p)
        p.set_defaults(func=lambda a, r=runner: _cmd_rq_compare(a, r))

    p = sub.add_parser("validate-corpus", help="check every corpus entry compiles to its ground truth")
    p.add_argument("--corpus")
    p.set_defaults(func=cmd_validate_corpus)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose_log else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PolicySynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
