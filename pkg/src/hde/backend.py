"""Generation backends and prompt assembly.

Two backends speak the same request/result contract: a remote chat-completion
client (OpenAI-style JSON over HTTP) and a scripted backend that replays
recorded responses, which is what every offline test runs on.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import yaml

from hde.identity import IdentityGraph, MemorySource, WorkingMemory
from hde.tom import WeaknessEntry
from hde.transcript import Turn

# the C loader is an order of magnitude faster when libyaml is present
_YAML_LOADER = getattr(yaml, "CSafeLoader", yaml.SafeLoader)

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.2
DEFAULT_MAX_TOKENS = 400
WILDCARD = "*"
TURN_REF = re.compile(r"^turn-ref: (\S+)$", re.MULTILINE)


class BackendError(RuntimeError):
    def __init__(self, message: str, status: int | str | None = None):
        super().__init__(message)
        self.status = status


class ScriptUnderrunError(BackendError):
    """The scripted backend ran out of responses; the script is too short for the run."""


@dataclass(frozen=True)
class GenerationRequest:
    system_prompt: str
    context_window: tuple[tuple[str, str], ...]
    instruction: str
    max_output_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self) -> None:
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def turn_ref(self) -> str | None:
        m = TURN_REF.search(self.instruction)
        return m.group(1) if m else None

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["context_window"] = [list(pair) for pair in self.context_window]
        return doc


@dataclass(frozen=True)
class GenerationResult:
    text: str
    backend_id: str
    latency_ms: int = 0
    truncated: bool = False


class Backend(Protocol):
    backend_id: str

    def generate(self, request: GenerationRequest) -> GenerationResult: ...


def generate(backend: Backend, request: GenerationRequest) -> GenerationResult:
    result = backend.generate(request)
    if not result.text.strip():
        raise BackendError(f"{result.backend_id}: empty completion")
    return result


class ScriptedBackend:
    """Replays ``(match key, text)`` pairs.

    Each call consumes the first unused entry whose key is a wildcard or a
    substring of the request instruction; when nothing matches, the next
    unused entry in script order is returned instead.
    """

    backend_id = "scripted"

    def __init__(self, script: Sequence[tuple[str, str]]):
        self.script = [(str(k), str(v)) for k, v in script]
        self._used = [False] * len(self.script)
        self._lock = threading.Lock()

    def generate(self, request: GenerationRequest) -> GenerationResult:
        with self._lock:
            pending = [i for i, used in enumerate(self._used) if not used]
            if not pending:
                raise ScriptUnderrunError(
                    f"script exhausted after {len(self.script)} responses "
                    f"(request {request.turn_ref or '<no turn-ref>'})",
                    status="underrun",
                )
            chosen = next(
                (i for i in pending if self.script[i][0] in (WILDCARD, "") or self.script[i][0] in request.instruction),
                pending[0],
            )
            self._used[chosen] = True
            return GenerationResult(self.script[chosen][1], self.backend_id, 0, False)

    @property
    def remaining(self) -> int:
        return self._used.count(False)


def load_script(path: str | Path) -> list[tuple[str, str]]:
    doc = yaml.load(Path(path).read_text(encoding="utf-8"), Loader=_YAML_LOADER)
    entries = doc.get("responses", []) if isinstance(doc, dict) else doc
    return [(str(e.get("match", WILDCARD)), str(e["text"])) for e in entries]


def dump_script(pairs: Sequence[tuple[str, str]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"responses": [{"match": k, "text": v} for k, v in pairs]}
    path.write_text(yaml.safe_dump(doc, sort_keys=False, allow_unicode=True, width=100), encoding="utf-8")
    return path


class RecordingBackend:
    """Wraps another backend and records each response under its turn-ref for later replay."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.backend_id = f"recording:{inner.backend_id}"
        self.recorded: list[tuple[str, str]] = []

    def generate(self, request: GenerationRequest) -> GenerationResult:
        result = self.inner.generate(request)
        self.recorded.append((request.turn_ref or WILDCARD, result.text))
        return result


class RateLimiter:
    def __init__(self, rpm: float | None, clock: Callable[[], float] = time.monotonic, sleep=time.sleep):
        self.interval = 60.0 / rpm if rpm else 0.0
        self._next = 0.0
        self._lock = threading.Lock()
        self._clock = clock
        self._sleep = sleep

    def wait(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = self._clock()
            delay = self._next - now
            self._next = max(now, self._next) + self.interval
        if delay > 0:
            self._sleep(delay)


_TRANSIENT = {408, 425, 429, 500, 502, 503, 504}


class RemoteBackend:
    """Chat-completion client with idempotent retries and exponential backoff."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str | None = "HDE_API_KEY",
        timeout_s: float = 60.0,
        rpm_cap: float | None = None,
        max_attempts: int = 3,
        backoff_base: float = 1.0,
        auth_header: str = "Authorization",
        auth_scheme: str = "Bearer",
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.auth_header = auth_header
        self.auth_scheme = auth_scheme
        self._sleep = sleep
        self._limiter = RateLimiter(rpm_cap, sleep=sleep)
        self.backend_id = f"remote:{model}"
        self.attempts = 0

    def payload(self, request: GenerationRequest) -> dict:
        messages = [{"role": "system", "content": request.system_prompt}]
        for speaker, text in request.context_window:
            messages.append({"role": "user", "content": f"{speaker}: {text}"})
        messages.append({"role": "user", "content": request.instruction})
        return {
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env) if self.api_key_env else None
        if key:
            headers[self.auth_header] = f"{self.auth_scheme} {key}".strip()
        return headers

    def generate(self, request: GenerationRequest) -> GenerationResult:
        body = json.dumps(self.payload(request)).encode("utf-8")
        last_status: int | str | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleep(self.backoff_base * 2 ** (attempt - 1))
            self._limiter.wait()
            self.attempts += 1
            req = urllib.request.Request(self.endpoint, data=body, headers=self._headers(), method="POST")
            started = time.monotonic()
            try:
                with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                    doc = json.loads(resp.read().decode("utf-8"))
            except urllib.error.HTTPError as exc:
                last_status = exc.code
                if exc.code not in _TRANSIENT:
                    raise BackendError(f"{self.endpoint}: HTTP {exc.code}", status=exc.code) from None
                log.warning("attempt %d: HTTP %s from %s", attempt + 1, exc.code, self.endpoint)
                continue
            except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
                last_status = getattr(exc, "reason", None) and str(exc.reason) or type(exc).__name__
                log.warning("attempt %d: %s", attempt + 1, last_status)
                continue
            try:
                choice = doc["choices"][0]
                text = choice["message"]["content"]
            except (KeyError, IndexError, TypeError):
                raise BackendError(f"{self.endpoint}: malformed completion payload", status="malformed") from None
            latency = int(round((time.monotonic() - started) * 1000))
            return GenerationResult(text, self.backend_id, latency, choice.get("finish_reason") == "length")
        raise BackendError(
            f"{self.endpoint}: gave up after {self.max_attempts} attempts (last status {last_status})",
            status=last_status,
        )


def make_backend(block: dict | None, base_dir: str | Path = ".", script_path: str | Path | None = None) -> Backend:
    """Build a backend from a config block (``kind``, ``endpoint``, ``model``, ...)."""
    block = dict(block or {})
    kind = block.get("kind", "scripted")
    if kind == "scripted":
        path = script_path or block.get("script_path")
        if not path:
            raise ValueError("scripted backend needs script_path")
        path = Path(path)
        if not path.is_absolute():
            path = Path(base_dir) / path
        return ScriptedBackend(load_script(path))
    if kind == "remote":
        return RemoteBackend(
            endpoint=block["endpoint"],
            model=block["model"],
            api_key_env=block.get("api_key_env", "HDE_API_KEY"),
            timeout_s=float(block.get("timeout_s", 60)),
            rpm_cap=block.get("rpm_cap"),
            auth_header=block.get("auth_header", "Authorization"),
            auth_scheme=block.get("auth_scheme", "Bearer"),
        )
    raise ValueError(f"unknown backend kind {kind!r}")


# -- prompt assembly ----------------------------------------------------------


def _quote(text: str, limit: int = 600) -> str:
    text = " ".join(text.split())
    return text if len(text) <= limit else text[: limit - 3] + "..."


def assemble_prompt(
    identity: IdentityGraph,
    wm: WorkingMemory,
    hints: Sequence[WeaknessEntry],
    dilemma: str,
    last_turns: Sequence[Turn],
    window: int = 6,
    instruction: str | None = None,
    temperature: float = DEFAULT_TEMPERATURE,
    max_output_tokens: int = DEFAULT_MAX_TOKENS,
) -> GenerationRequest:
    """Fuse persona, core beliefs, boundaries, grounded facts and strategy notes.

    Section order is fixed; the context window holds the last ``window`` turns.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    parts = [identity.persona_summary]
    core = identity.core_nodes
    if core:
        parts.append("Core commitments (immutable):\n" + "\n".join(f"- {n.statement}" for n in core))
    if identity.constraints:
        parts.append(
            "Doctrinal boundaries, never argue for:\n"
            + "\n".join(f"- {c.label}" for c in identity.constraints)
        )
    facts, seen = [], set()
    for e in wm.of_source(MemorySource.RETRIEVED_FACT):
        if e.text not in seen:
            seen.add(e.text)
            ref = f" [{e.origin_ref}]" if e.origin_ref else ""
            facts.append(f'> "{_quote(e.text)}"{ref}')
    if facts:
        parts.append("Grounding passages from your own writings:\n" + "\n".join(facts))
    notes = wm.of_source(MemorySource.TRANSCRIPT)
    if notes:
        parts.append("Team memory log:\n" + "\n".join(f"- {_quote(e.text, 300)}" for e in notes))
    if hints:
        parts.append(
            "Strategy notes on your opponent:\n"
            + "\n".join(f"- Weakness: {h.weakness_text} Counter: {h.counter_hint}" for h in hints)
        )
    context = tuple((t.speaker, t.text) for t in list(last_turns)[-window:])
    if instruction is None:
        instruction = f"Argue your position on the dilemma: {dilemma}"
    return GenerationRequest(
        system_prompt="\n\n".join(parts),
        context_window=context,
        instruction=instruction,
        max_output_tokens=max_output_tokens,
        temperature=temperature,
    )


# -- audit log ----------------------------------------------------------------


@dataclass
class AuditLog:
    """In-memory event log, written out as JSONL when a run finishes or aborts."""

    record_generations: bool = True
    events: list[dict] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def stage(self, turn_index: int, speaker: str, stage: str, **detail) -> None:
        with self._lock:
            self.events.append({"event": "stage", "turn_index": turn_index, "speaker": speaker, "stage": stage, **detail})

    def generation(self, turn_index: int, speaker: str, request: GenerationRequest, result: GenerationResult) -> None:
        if not self.record_generations:
            return
        with self._lock:
            self.events.append(
                {
                    "event": "generation",
                    "turn_index": turn_index,
                    "speaker": speaker,
                    "request": request.to_json(),
                    "response": asdict(result),
                }
            )

    def stages_for(self, speaker: str | None = None) -> list[str]:
        return [e["stage"] for e in self.events if e["event"] == "stage" and (speaker is None or e["speaker"] == speaker)]

    def dumps(self) -> str:
        return "".join(json.dumps(e, ensure_ascii=False, sort_keys=True) + "\n" for e in self.events)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path
