"""Synthetic concrete-request specifications and the ground-truth corpus.

Request generation uses :class:`random.Random` (MT19937) seeded with the
given integer, so a seed reproduces the same specification on any machine.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from .analyzer import ComparisonVerdict, Relation, compare
from .errors import MissingFile, ParamOutOfRange, ValidationFailure
from .fgdsl import FgSpec, compile_fgspec, parse_fgspec
from .policy import Policy, Request, parse_policy

S3_ACTIONS = (
    "s3:GetObject",
    "s3:PutObject",
    "s3:DeleteObject",
    "s3:ListBucket",
    "s3:GetObjectAcl",
    "s3:PutObjectAcl",
    "s3:GetObjectVersion",
)
PRINCIPALS = ("alice", "bob", "carol", "dave", "erin")
BUCKETS = ("mybucket", "public-bucket", "team-data", "app-logs")
DIRECTORIES = ("backups", "data", "images", "reports", "logs", "tmp", "archive", "shared", "2023", "2024")
FILE_STEMS = ("file", "report", "image", "log", "backup", "notes")
FILE_EXTS = (".txt", ".csv", ".json", ".png", ".gz")


@dataclass(frozen=True)
class SpecParams:
    allowed_range: tuple[int, int] = (30, 150)
    denied_range: tuple[int, int] = (5, 20)
    depth_range: tuple[int, int] = (1, 4)
    principals: tuple[str, ...] = PRINCIPALS
    buckets: tuple[str, ...] = BUCKETS

    def validate(self) -> None:
        for name in ("allowed_range", "denied_range", "depth_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ParamOutOfRange(f"{name} must satisfy 0 <= low <= high, got ({lo}, {hi})")
        if self.depth_range[0] < 1:
            raise ParamOutOfRange("resources need at least one directory segment")
        if not self.principals or not self.buckets:
            raise ParamOutOfRange("principal and bucket pools must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {k: list(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SpecParams:
        return cls(**{k: tuple(v) for k, v in data.items()})


@dataclass(frozen=True)
class RequestSpec:
    allowed: tuple[Request, ...]
    denied: tuple[Request, ...]
    seed: int
    params: SpecParams = field(default_factory=SpecParams)

    @property
    def spec_id(self) -> str:
        return f"seed-{self.seed}"

    @property
    def total(self) -> int:
        return len(self.allowed) + len(self.denied)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "params": self.params.to_dict(),
            "allowed": [r.to_dict() for r in self.allowed],
            "denied": [r.to_dict() for r in self.denied],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RequestSpec:
        return cls(
            allowed=tuple(Request.from_dict(r) for r in data["allowed"]),
            denied=tuple(Request.from_dict(r) for r in data["denied"]),
            seed=int(data.get("seed", 0)),
            params=SpecParams.from_dict(data["params"]) if "params" in data else SpecParams(),
        )

    @classmethod
    def from_json(cls, text: str) -> RequestSpec:
        return cls.from_dict(json.loads(text))


def _resource(rng: random.Random, params: SpecParams) -> str:
    depth = rng.randint(*params.depth_range)
    dirs = [rng.choice(DIRECTORIES) for _ in range(depth)]
    name = f"{rng.choice(FILE_STEMS)}{rng.randint(0, 20)}{rng.choice(FILE_EXTS)}"
    return "/".join([rng.choice(params.buckets), *dirs, name])


def _request(rng: random.Random, params: SpecParams) -> Request:
    return Request(rng.choice(params.principals), rng.choice(S3_ACTIONS), _resource(rng, params))


def generate_request_spec(seed: int, params: SpecParams | None = None) -> RequestSpec:
    """Random allowed/denied S3 requests; collisions are redrawn so the lists stay disjoint."""
    params = params or SpecParams()
    params.validate()
    rng = random.Random(seed)
    n_allowed = rng.randint(*params.allowed_range)
    n_denied = rng.randint(*params.denied_range)
    seen: set[Request] = set()

    def draw(n: int) -> list[Request]:
        out = []
        attempts = 0
        while len(out) < n:
            attempts += 1
            if attempts > 1000 * (n + 1):
                raise ParamOutOfRange("request pools too small to draw that many distinct requests")
            r = _request(rng, params)
            if r not in seen:
                seen.add(r)
                out.append(r)
        return out

    allowed = draw(n_allowed)
    denied = draw(n_denied)
    return RequestSpec(tuple(allowed), tuple(denied), seed, params)


# -- corpus -------------------------------------------------------------------

CORPUS_FILES = ("policy.json", "coarse.txt", "spec.fgs", "meta.json")


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    ground_truth: Policy
    coarse_description: str
    fg_spec: FgSpec
    fg_text: str
    tags: tuple[str, ...] = ()


def bundled_corpus_path() -> Path:
    return Path(str(resources.files("policysynth") / "corpus"))


def load_entry(path: Path) -> CorpusEntry:
    for name in CORPUS_FILES:
        if not (path / name).is_file():
            raise MissingFile(f"{path / name} is missing")
    meta = json.loads((path / "meta.json").read_text(encoding="utf-8"))
    fg_text = (path / "spec.fgs").read_text(encoding="utf-8")
    return CorpusEntry(
        id=meta.get("id", path.name),
        ground_truth=parse_policy((path / "policy.json").read_text(encoding="utf-8")),
        coarse_description=(path / "coarse.txt").read_text(encoding="utf-8").strip(),
        fg_spec=parse_fgspec(fg_text),
        fg_text=fg_text,
        tags=tuple(meta.get("tags", ())),
    )


def load_corpus(path: str | Path | None = None) -> list[CorpusEntry]:
    """Load every ``<id>/`` subdirectory of *path* (the bundled corpus by default), sorted by name."""
    root = Path(path) if path is not None else bundled_corpus_path()
    if not root.is_dir():
        raise MissingFile(f"corpus directory {root} does not exist")
    return [load_entry(d) for d in sorted(root.iterdir()) if d.is_dir()]


@dataclass(frozen=True)
class CorpusReport:
    verdicts: tuple[tuple[str, ComparisonVerdict], ...]

    @property
    def failures(self) -> list[str]:
        return [eid for eid, v in self.verdicts if v.relation is not Relation.EQUIVALENT]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        return {
            "entries": [{"id": eid, **v.to_dict()} for eid, v in self.verdicts],
            "failures": self.failures,
        }


def validate_corpus(entries: Iterable[CorpusEntry]) -> CorpusReport:
    """Check that every entry's fine-grained spec compiles to its ground truth (up to equivalence)."""
    verdicts = tuple((e.id, compare(compile_fgspec(e.fg_spec), e.ground_truth)) for e in entries)
    report = CorpusReport(verdicts)
    if not report.ok:
        raise ValidationFailure(report.failures, report)
    return report
