"""Policy-synthesis backends.

A backend is anything with a ``backend_id`` string, a ``settings`` dict and a
``complete(prompt) -> str`` method. Shipped implementations:

* :class:`HttpBackend` - OpenAI-style chat-completions endpoint, configured
  from the environment;
* :class:`ReplayBackend` - recorded responses keyed by the prompt's SHA-256;
* :class:`OracleBackend` - deterministic "perfect synthesizer" built on the
  DSL compiler, used as a control;
* wrappers for recording, mutating and rate limiting another backend.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import urllib.error
import urllib.request
from pathlib import Path
from typing import Any, Iterable, Protocol

from ..errors import BackendRefusal, BackendUnreachable, ConfigurationError
from ..fgdsl import compile_fgspec
from ..policy import Effect, Matcher, Policy, Statement, serialize_policy
from .extract import extract_policy
from .prompts import Prompt, PromptKind, parse_concrete_prompt, parse_fine_prompt

log = logging.getLogger(__name__)

ENV_ENDPOINT = "POLICYSYNTH_ENDPOINT"
ENV_MODEL = "POLICYSYNTH_MODEL"
ENV_API_KEY = "POLICYSYNTH_API_KEY"


class Backend(Protocol):
    backend_id: str
    settings: dict[str, Any]

    def complete(self, prompt: Prompt) -> str: ...


class HttpBackend:
    """Chat-completions client. Temperature defaults to 0 (most deterministic)."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        temperature: float = 0.0,
        timeout: float = 120.0,
        retries: int = 2,
        retry_delay: float = 1.0,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.retries = retries
        self.retry_delay = retry_delay
        self.backend_id = f"http:{model}"
        self.settings = {"temperature": temperature, "model": model}

    @classmethod
    def from_env(cls, **kwargs: Any) -> HttpBackend:
        endpoint = os.environ.get(ENV_ENDPOINT)
        model = os.environ.get(ENV_MODEL)
        if not endpoint or not model:
            raise ConfigurationError(f"set {ENV_ENDPOINT} and {ENV_MODEL} to use the http backend")
        return cls(endpoint, model, os.environ.get(ENV_API_KEY), **kwargs)

    def _post(self, payload: bytes) -> dict[str, Any]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=payload, headers=headers, method="POST")
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            return json.loads(resp.read().decode("utf-8"))

    def complete(self, prompt: Prompt) -> str:
        payload = json.dumps(
            {
                "model": self.model,
                "messages": [{"role": "user", "content": prompt.text}],
                "temperature": self.settings["temperature"],
            }
        ).encode("utf-8")
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                data = self._post(payload)
                break
            except urllib.error.HTTPError as exc:
                if exc.code < 500:
                    raise BackendUnreachable(f"{self.endpoint} answered HTTP {exc.code}") from exc
                last = exc
            except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
                last = exc
            log.warning("transport error from %s (attempt %d): %s", self.endpoint, attempt + 1, last)
            if attempt < self.retries:
                time.sleep(self.retry_delay * (attempt + 1))
        else:
            raise BackendUnreachable(f"{self.endpoint} unreachable: {last}")
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise BackendRefusal(f"response has no message content: {str(data)[:200]}") from None
        if not isinstance(content, str):
            raise BackendRefusal("message content is not text")
        return content


class ReplayBackend:
    """Serve recorded responses from ``<directory>/<sha256 of prompt text>.txt``."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise ConfigurationError(f"replay directory {self.directory} does not exist")
        self.backend_id = f"replay:{self.directory.name}"
        self.settings: dict[str, Any] = {}

    def path_for(self, prompt: Prompt) -> Path:
        return self.directory / f"{prompt.sha256}.txt"

    def complete(self, prompt: Prompt) -> str:
        path = self.path_for(prompt)
        if not path.is_file():
            raise BackendUnreachable(f"no recording for prompt {prompt.source_id} ({prompt.sha256[:12]})")
        return path.read_bytes().decode("utf-8")


class RecordingBackend:
    """Pass through to *inner* and store every response for later replay."""

    def __init__(self, inner: Backend, directory: str | Path) -> None:
        self.inner = inner
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.backend_id = inner.backend_id
        self.settings = inner.settings

    def complete(self, prompt: Prompt) -> str:
        text = self.inner.complete(prompt)
        (self.directory / f"{prompt.sha256}.txt").write_bytes(text.encode("utf-8"))
        return text


def _bucket_prefix(resource: str) -> str:
    bucket = resource.split("/", 1)[0]
    return f"{bucket}/*"


def concrete_oracle_policy(allowed, denied, widen: bool = True) -> Policy:
    """One Allow per allowed request and one literal Deny per denied request.

    With *widen*, each Allow covers the whole bucket of its request, so the
    Deny statements are what keeps the denied requests out.
    """
    statements = []
    for r in allowed:
        resource = _bucket_prefix(r.resource) if widen else r.resource
        statements.append(Statement(Effect.ALLOW, Matcher((r.principal,)), Matcher((r.action,)), Matcher((resource,))))
    for r in denied:
        statements.append(Statement(Effect.DENY, Matcher((r.principal,)), Matcher((r.action,)), Matcher((r.resource,))))
    return Policy(tuple(statements))


class OracleBackend:
    """Deterministic control synthesizer.

    Concrete prompts are answered from the requests in the prompt,
    fine-grained prompts by compiling the specification in the prompt, and
    coarse prompts by compiling the specification of the corpus entry the
    prompt was built from (the description itself is not machine-readable).
    """

    def __init__(self, corpus: Iterable[Any] = (), widen: bool = True) -> None:
        self.corpus = {e.id: e for e in corpus}
        self.widen = widen
        self.backend_id = "oracle"
        self.settings = {"widen": widen}

    def policy_for(self, prompt: Prompt) -> Policy:
        if prompt.kind is PromptKind.CONCRETE_REQUEST:
            allowed, denied = parse_concrete_prompt(prompt)
            return concrete_oracle_policy(allowed, denied, self.widen)
        if prompt.kind is PromptKind.FINE_GRAINED_SYNTAX:
            return compile_fgspec(parse_fine_prompt(prompt))
        entry = self.corpus.get(prompt.source_id)
        if entry is None:
            raise BackendRefusal(f"oracle has no corpus entry {prompt.source_id!r} for a coarse prompt")
        return compile_fgspec(entry.fg_spec)

    def complete(self, prompt: Prompt) -> str:
        return serialize_policy(self.policy_for(prompt), indent=2)


class DenyDroppingBackend:
    """Mutant control: the inner backend's policy with every Deny statement removed."""

    def __init__(self, inner: Backend) -> None:
        self.inner = inner
        self.backend_id = f"deny-dropped:{inner.backend_id}"
        self.settings = inner.settings

    def complete(self, prompt: Prompt) -> str:
        raw = self.inner.complete(prompt)
        policy = extract_policy(raw)
        if not isinstance(policy, Policy):
            return raw
        kept = tuple(s for s in policy.statements if s.effect is not Effect.DENY)
        return serialize_policy(Policy(kept, policy.version), indent=2)


class ConstantBackend:
    """Always answers with the same text."""

    def __init__(self, text: str, backend_id: str = "constant") -> None:
        self.text = text
        self.backend_id = backend_id
        self.settings: dict[str, Any] = {}

    def complete(self, prompt: Prompt) -> str:
        return self.text


ALLOW_ALL_POLICY = serialize_policy(Policy((Statement(Effect.ALLOW),)), indent=2)


def allow_all_backend() -> ConstantBackend:
    return ConstantBackend(ALLOW_ALL_POLICY, "allow-all")


class RateLimited:
    """Space calls to *inner* at least *min_interval* seconds apart (thread-safe)."""

    def __init__(self, inner: Backend, min_interval: float) -> None:
        self.inner = inner
        self.min_interval = min_interval
        self.backend_id = inner.backend_id
        self.settings = inner.settings
        self._lock = threading.Lock()
        self._next = 0.0

    def complete(self, prompt: Prompt) -> str:
        with self._lock:
            now = time.monotonic()
            wait = self._next - now
            self._next = max(now, self._next) + self.min_interval
        if wait > 0:
            time.sleep(wait)
        return self.inner.complete(prompt)


def backend_from_spec(spec: str, corpus: Iterable[Any] = ()) -> Backend:
    """``oracle`` | ``replay:<dir>`` | ``http``."""
    if spec == "oracle":
        return OracleBackend(corpus)
    if spec.startswith("replay:"):
        return ReplayBackend(spec[len("replay:"):])
    if spec == "http":
        return HttpBackend.from_env()
    raise ConfigurationError(f"unknown backend {spec!r}; expected oracle, replay:<dir> or http")
