from __future__ import annotations

import base64
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from ..errors import BackendRefusal
from ..policy import Policy, policy_to_obj
from .backends import Backend
from .extract import ExtractionFailure, extract_policy
from .prompts import Prompt


@dataclass(frozen=True)
class SynthesisRecord:
    prompt: Prompt
    raw_response: str
    extracted: Policy | ExtractionFailure
    backend_id: str
    timestamp: str
    latency: float
    settings: dict[str, Any] = field(default_factory=dict)
    refused: bool = False

    @property
    def ok(self) -> bool:
        return isinstance(self.extracted, Policy)

    @property
    def status(self) -> str:
        return "ok" if self.ok else self.extracted.kind.value  # type: ignore[union-attr]

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt": self.prompt.to_dict(),
            "prompt_sha256": self.prompt.sha256,
            "backend_id": self.backend_id,
            "settings": self.settings,
            "timestamp": self.timestamp,
            "latency_s": round(self.latency, 6),
            "refused": self.refused,
            "raw_response_b64": base64.b64encode(self.raw_response.encode("utf-8")).decode("ascii"),
            "extracted": policy_to_obj(self.extracted) if self.ok else self.extracted.to_dict(),  # type: ignore[union-attr, arg-type]
        }


class JsonlSink:
    """Append-only JSON-lines transcript, safe to share between threads."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def write(self, record: SynthesisRecord) -> None:
        line = json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False)
        with self._lock, self.path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")


def read_transcript(path: str | Path) -> list[dict[str, Any]]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            rec["raw_response"] = base64.b64decode(rec["raw_response_b64"]).decode("utf-8")
            out.append(rec)
    return out


def synthesize(prompt: Prompt, backend: Backend, sink: JsonlSink | None = None) -> SynthesisRecord:
    """One zero-shot call to *backend*; the response is extracted and recorded.

    A refusal is recorded as the response text rather than raised.
    BackendUnreachable propagates.
    """
    started = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    refused = False
    try:
        raw = backend.complete(prompt)
    except BackendRefusal as exc:
        raw = str(exc)
        refused = True
    latency = time.perf_counter() - started
    record = SynthesisRecord(
        prompt=prompt,
        raw_response=raw,
        extracted=extract_policy(raw),
        backend_id=backend.backend_id,
        timestamp=stamp,
        latency=latency,
        settings=dict(getattr(backend, "settings", {})),
        refused=refused,
    )
    if sink is not None:
        sink.write(record)
    return record


def synthesize_many(
    prompts: Sequence[Prompt],
    backend: Backend,
    max_in_flight: int = 1,
    sink: JsonlSink | None = None,
) -> list[SynthesisRecord | Exception]:
    """Synthesize every prompt, at most *max_in_flight* at a time; results keep input order.

    Errors are returned in place of the record so one failure never stops a batch.
    """

    def one(p: Prompt) -> SynthesisRecord | Exception:
        try:
            return synthesize(p, backend, sink)
        except Exception as exc:  # noqa: BLE001
            return exc

    if max_in_flight <= 1:
        return [one(p) for p in prompts]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(one, prompts))
