"""Batch experiments over synthesis backends and their reports.

rq1 classifies concrete-request specifications, rq2 and rq3 compare the
policies synthesized from coarse and fine-grained corpus prompts against the
ground truth. Reports carry no timestamps so replayed runs are byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from .analyzer import Relation, classify_requests, compare, format_rate
from .errors import IoFailure, PolicySynthError
from .policy import Policy
from .specgen import CorpusEntry, SpecParams, generate_request_spec
from .synth.backends import Backend
from .synth.prompts import PromptKind, build_prompt
from .synth.records import JsonlSink, SynthesisRecord, synthesize_many

log = logging.getLogger(__name__)

RELATIONS = tuple(r.value for r in Relation)


def _status(outcome: SynthesisRecord | Exception) -> str:
    if isinstance(outcome, Exception):
        return f"error:{type(outcome).__name__}"
    return outcome.status


# -- RQ1 ---------------------------------------------------------------------


@dataclass(frozen=True)
class Rq1Row:
    spec_id: str
    seed: int
    allowed: int
    denied: int
    status: str
    misclassified: int | None = None
    misclassified_denied: int | None = None
    rate: Fraction | None = None

    @property
    def total(self) -> int:
        return self.allowed + self.denied

    @property
    def valid(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec_id": self.spec_id,
            "seed": self.seed,
            "total": self.total,
            "allowed": self.allowed,
            "denied": self.denied,
            "status": self.status,
            "syntactically_valid": self.valid,
            "misclassified": self.misclassified,
            "misclassified_denied": self.misclassified_denied,
            "rate": None if self.rate is None else format_rate(self.rate),
        }


@dataclass(frozen=True)
class Rq1Result:
    backend_id: str
    rows: tuple[Rq1Row, ...]

    name = "rq1"

    @property
    def scored(self) -> list[Rq1Row]:
        return [r for r in self.rows if r.rate is not None]

    @property
    def mean_rate(self) -> Fraction | None:
        """Unweighted mean over specs whose policy could be extracted."""
        rows = self.scored
        if not rows:
            return None
        return sum((r.rate for r in rows), Fraction(0)) / len(rows)  # type: ignore[misc]

    @property
    def weighted_rate(self) -> Fraction | None:
        rows = self.scored
        total = sum(r.total for r in rows)
        if not total:
            return None
        return Fraction(sum(r.total - r.misclassified for r in rows), total)  # type: ignore[operator]

    def to_dict(self) -> dict[str, Any]:
        def fmt(x: Fraction | None) -> str | None:
            return None if x is None else format_rate(x)

        return {
            "experiment": self.name,
            "backend_id": self.backend_id,
            "attempted": len(self.rows),
            "scored": len(self.scored),
            "syntactically_invalid": sum(not r.valid for r in self.rows),
            "mean_rate_unweighted": fmt(self.mean_rate),
            "mean_rate_request_weighted": fmt(self.weighted_rate),
            "rows": [r.to_dict() for r in self.rows],
        }

    def csv_rows(self) -> list[dict[str, Any]]:
        return [r.to_dict() for r in self.rows]


def run_rq1(
    seeds: Iterable[int],
    backend: Backend,
    params: SpecParams | None = None,
    max_in_flight: int = 1,
    sink: JsonlSink | None = None,
) -> Rq1Result:
    """Generate, prompt, synthesize and classify one specification per seed."""
    specs = [generate_request_spec(s, params) for s in sorted(set(seeds))]
    prompts = [build_prompt(PromptKind.CONCRETE_REQUEST, s) for s in specs]
    outcomes = synthesize_many(prompts, backend, max_in_flight, sink)
    rows = []
    for spec, outcome in zip(specs, outcomes):
        base = dict(spec_id=spec.spec_id, seed=spec.seed, allowed=len(spec.allowed), denied=len(spec.denied))
        status = _status(outcome)
        if status != "ok":
            log.warning("%s: %s", spec.spec_id, outcome if isinstance(outcome, Exception) else status)
            rows.append(Rq1Row(status=status, **base))
            continue
        cl = classify_requests(outcome.extracted, spec.allowed, spec.denied)  # type: ignore[union-attr, arg-type]
        rows.append(
            Rq1Row(
                status=status,
                misclassified=cl.misclassified,
                misclassified_denied=sum(not f.expected_allowed for f in cl.failures()),
                rate=cl.rate,
                **base,
            )
        )
    return Rq1Result(backend.backend_id, tuple(rows))


# -- RQ2 / RQ3 ---------------------------------------------------------------


@dataclass(frozen=True)
class RqCompareRow:
    entry_id: str
    status: str
    relation: str | None = None
    only_in_synth: int | None = None
    only_in_truth: int | None = None
    bound: int | None = None
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "entry_id": self.entry_id,
            "status": self.status,
            "relation": self.relation,
            "only_in_synth": None if self.only_in_synth is None else str(self.only_in_synth),
            "only_in_truth": None if self.only_in_truth is None else str(self.only_in_truth),
            "bound": self.bound,
            "error": self.error,
        }


@dataclass(frozen=True)
class RqCompareResult:
    name: str
    backend_id: str
    rows: tuple[RqCompareRow, ...]

    @property
    def distribution(self) -> dict[str, int]:
        dist = dict.fromkeys(RELATIONS, 0)
        for r in self.rows:
            if r.relation is not None:
                dist[r.relation] += 1
        return dist

    @property
    def failures(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.rows:
            if r.relation is None:
                out[r.status] = out.get(r.status, 0) + 1
        return dict(sorted(out.items()))

    @property
    def equivalent_fraction(self) -> Fraction | None:
        if not self.rows:
            return None
        return Fraction(self.distribution[Relation.EQUIVALENT.value], len(self.rows))

    def to_dict(self) -> dict[str, Any]:
        eq = self.equivalent_fraction
        return {
            "experiment": self.name,
            "backend_id": self.backend_id,
            "attempted": len(self.rows),
            "compared": sum(self.distribution.values()),
            "distribution": self.distribution,
            "failures": self.failures,
            "equivalent_fraction": None if eq is None else format_rate(eq),
            "rows": [r.to_dict() for r in self.rows],
        }

    def csv_rows(self) -> list[dict[str, Any]]:
        return [r.to_dict() for r in self.rows]

    def distribution_rows(self) -> list[dict[str, Any]]:
        rows = [{"category": k, "count": v} for k, v in self.distribution.items()]
        rows += [{"category": k, "count": v} for k, v in self.failures.items()]
        return rows


def _run_compare(
    name: str,
    kind: PromptKind,
    corpus: Sequence[CorpusEntry],
    backend: Backend,
    max_in_flight: int,
    sink: JsonlSink | None,
) -> RqCompareResult:
    entries = sorted(corpus, key=lambda e: e.id)
    prompts = [build_prompt(kind, e) for e in entries]
    outcomes = synthesize_many(prompts, backend, max_in_flight, sink)
    rows = []
    for entry, outcome in zip(entries, outcomes):
        status = _status(outcome)
        if status != "ok":
            detail = str(outcome) if isinstance(outcome, Exception) else outcome.extracted.message  # type: ignore[union-attr]
            rows.append(RqCompareRow(entry.id, status, error=detail))
            continue
        synth = outcome.extracted  # type: ignore[union-attr]
        assert isinstance(synth, Policy)
        try:
            v = compare(synth, entry.ground_truth)
        except PolicySynthError as exc:
            rows.append(RqCompareRow(entry.id, f"error:{type(exc).__name__}", error=str(exc)))
            continue
        rows.append(
            RqCompareRow(
                entry.id,
                status,
                relation=v.relation.value,
                only_in_synth=v.only_in_first.count,
                only_in_truth=v.only_in_second.count,
                bound=v.bound,
            )
        )
    return RqCompareResult(name, backend.backend_id, tuple(rows))


def run_rq2(
    corpus: Sequence[CorpusEntry], backend: Backend, max_in_flight: int = 1, sink: JsonlSink | None = None
) -> RqCompareResult:
    """Coarse-grained description prompts, compared against ground truth."""
    return _run_compare("rq2", PromptKind.COARSE_GRAINED, corpus, backend, max_in_flight, sink)


def run_rq3(
    corpus: Sequence[CorpusEntry], backend: Backend, max_in_flight: int = 1, sink: JsonlSink | None = None
) -> RqCompareResult:
    """Fine-grained DSL prompts, compared against ground truth."""
    return _run_compare("rq3", PromptKind.FINE_GRAINED_SYNTAX, corpus, backend, max_in_flight, sink)


# -- reports -----------------------------------------------------------------


def report_json(result: Rq1Result | RqCompareResult) -> str:
    return json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n"


def _csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else v for k, v in row.items()})
    return buf.getvalue()


def emit_report(result: Rq1Result | RqCompareResult, out_dir: str | Path, formats: Sequence[str] = ("json", "csv")) -> list[Path]:
    """Write ``<name>.json`` and per-row ``<name>.csv``; compare results also get ``<name>_distribution.csv``."""
    out = Path(out_dir)
    written = []
    files: dict[str, str] = {}
    if "json" in formats:
        files[f"{result.name}.json"] = report_json(result)
    if "csv" in formats:
        files[f"{result.name}.csv"] = _csv(result.csv_rows())
        if isinstance(result, RqCompareResult):
            files[f"{result.name}_distribution.csv"] = _csv(result.distribution_rows())
    try:
        out.mkdir(parents=True, exist_ok=True)
        for fname, text in files.items():
            path = out / fname
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write report to {out}: {exc}") from exc
    return written


def summarize(result: Rq1Result | RqCompareResult) -> str:
    d = result.to_dict()
    if isinstance(result, Rq1Result):
        return (
            f"rq1 [{d['backend_id']}]: {d['scored']}/{d['attempted']} scored, "
            f"mean rate {d['mean_rate_unweighted']} (request-weighted {d['mean_rate_request_weighted']})"
        )
    dist = ", ".join(f"{k}={v}" for k, v in d["distribution"].items())
    fails = ", ".join(f"{k}={v}" for k, v in d["failures"].items()) or "none"
    return f"{d['experiment']} [{d['backend_id']}]: {dist}; failures: {fails}"
