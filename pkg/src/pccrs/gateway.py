"""Provider-agnostic chat-completion access.

Every other module talks to a language model only through :class:`LlmGateway`.
Two backends exist: a live HTTP chat-completion client and a deterministic
scripted backend that replays pre-recorded responses keyed by call site, which
is what the whole offline test suite runs on.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence

import requests
import yaml

from .errors import (
    AuthError,
    ContractViolationError,
    EmptyGenerationError,
    InvalidBooleanError,
    JsonParseError,
    NoJsonObjectError,
    ScriptExhaustedError,
    TransportError,
)

logger = logging.getLogger(__name__)

VALID_ROLES = ("system", "user", "assistant")

DEFAULT_MAX_REPAIR_ATTEMPTS = 2


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in VALID_ROLES:
            raise ValueError(f"invalid role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass
class LlmRequest:
    """One completion request.

    ``call_site`` labels which pipeline component is asking (for example
    "strategy_selector" or "critic"); the scripted backend keys its response
    queues on it.
    """

    messages: list[ChatMessage]
    call_site: str
    temperature: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def with_extra_user_message(self, content: str) -> "LlmRequest":
        return LlmRequest(
            messages=[*self.messages, ChatMessage("user", content)],
            call_site=self.call_site,
            temperature=self.temperature,
            seed=self.seed,
        )


@dataclass
class LlmResponse:
    text: str
    usage: dict[str, int] | None = None
    latency_ms: float | None = None


class Backend(Protocol):
    def complete(self, request: LlmRequest) -> LlmResponse: ...


def user_request(prompt: str, call_site: str, *, temperature: float = 0.0, seed: int = 0) -> LlmRequest:
    """Single user-message request, the shape every pipeline prompt uses."""
    return LlmRequest(
        messages=[ChatMessage("user", prompt)],
        call_site=call_site,
        temperature=temperature,
        seed=seed,
    )


class ScriptedBackend:
    """Replays responses from a script mapping call_site -> ordered list.

    Pops are FIFO per call site and serialized under a lock, so concurrent
    dialogue workers see a deterministic global ordering as long as their own
    call order is deterministic. No network access ever happens here.
    """

    def __init__(self, script: Mapping[str, Sequence[str]]):
        self._queues: dict[str, deque[str]] = {
            site: deque(str(r) for r in responses) for site, responses in script.items()
        }
        self._lock = threading.Lock()
        self.invocations: dict[str, int] = {}

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        raw = Path(path).read_text(encoding="utf-8")
        script = yaml.safe_load(raw) or {}
        if not isinstance(script, Mapping):
            raise ValueError(f"script file {path} must map call sites to response lists")
        return cls(script)

    def complete(self, request: LlmRequest) -> LlmResponse:
        with self._lock:
            queue = self._queues.get(request.call_site)
            if not queue:
                raise ScriptExhaustedError(
                    f"no scripted response left for call site {request.call_site!r}"
                )
            self.invocations[request.call_site] = self.invocations.get(request.call_site, 0) + 1
            return LlmResponse(text=queue.popleft())

    def remaining(self, call_site: str) -> int:
        with self._lock:
            return len(self._queues.get(call_site, ()))


class LiveBackend:
    """HTTP chat-completion client with bounded retry on transient failures.

    Request body: ``{model, messages[{role,content}], temperature, seed}``;
    the completion is read from ``choices[0].message.content``. The API key is
    resolved from an environment variable at call time.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        api_key_env: str = "OPENAI_API_KEY",
        max_retries: int = 3,
        backoff_seconds: float = 1.0,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self.timeout = timeout

    def complete(self, request: LlmRequest) -> LlmResponse:
        api_key = os.environ.get(self.api_key_env, "").strip()
        if not api_key:
            raise AuthError(f"environment variable {self.api_key_env} is not set")
        body = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "seed": request.seed,
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        last_error: Exception | None = None
        started = time.perf_counter()
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_seconds * (2 ** (attempt - 1)))
            try:
                resp = requests.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                logger.warning("transport failure on %s (attempt %d): %s", request.call_site, attempt + 1, exc)
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"provider rejected credentials (HTTP {resp.status_code})")
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = TransportError(f"HTTP {resp.status_code} from provider")
                logger.warning("transient HTTP %d on %s (attempt %d)", resp.status_code, request.call_site, attempt + 1)
                continue
            if resp.status_code != 200:
                raise TransportError(f"unexpected HTTP {resp.status_code}: {resp.text[:500]}")
            try:
                data = resp.json()
                text = data["choices"][0]["message"]["content"] or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed provider response: {exc}") from exc
            usage = data.get("usage") if isinstance(data.get("usage"), dict) else None
            latency = (time.perf_counter() - started) * 1000.0
            return LlmResponse(text=text, usage=usage, latency_ms=latency)
        raise TransportError(f"request failed after {self.max_retries} retries: {last_error}")


def extract_json(text: str) -> Any:
    """Parse the first balanced brace-delimited object found in ``text``.

    Tolerates surrounding prose and code fences. Scans every opening brace in
    order and returns the first span that parses; raises NoJsonObjectError when
    no opening brace exists at all, JsonParseError when braces exist but no
    balanced span parses.
    """
    found_open = False
    for start, ch in enumerate(text):
        if ch != "{":
            continue
        found_open = True
        end = _balanced_end(text, start)
        if end is None:
            continue
        try:
            return json.loads(text[start : end + 1])
        except json.JSONDecodeError:
            continue
    if not found_open:
        raise NoJsonObjectError("no brace-delimited object in completion text")
    raise JsonParseError("brace-delimited text found but none parsed as JSON")


def _balanced_end(text: str, start: int) -> int | None:
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i
    return None


def parse_bool(value: Any) -> bool:
    """Coerce a JSON boolean or a "True"/"False" string (any casing)."""
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
    raise InvalidBooleanError(f"expected True/False, got {value!r}")


def _match_required_keys(value: dict[str, Any], required_keys: Sequence[str]) -> dict[str, Any] | None:
    """Return ``value`` with required keys canonicalized, or None if any is absent.

    Keys are matched exactly first, then case-insensitively, so re-cased model
    output like {"thinking": ...} still satisfies a required "Thinking".
    """
    normalized = dict(value)
    lowered = {k.lower(): k for k in value}
    for key in required_keys:
        if key in normalized:
            continue
        actual = lowered.get(key.lower())
        if actual is None:
            return None
        normalized[key] = normalized.pop(actual)
    return normalized


_REPAIR_INSTRUCTION = (
    'Your previous reply could not be used. Respond with a single JSON object '
    'containing the keys: {keys}. Response with the JSON only!'
)

_EMPTY_RETRY_INSTRUCTION = "Your previous reply was empty. Reply with the requested response text."


class LlmGateway:
    """Completion boundary with structured-output hardening.

    ``complete_structured`` retries malformed or key-missing JSON replies with
    an appended corrective instruction, never issuing more than
    ``1 + max_repair_attempts`` completions per invocation.
    """

    def __init__(self, backend: Backend, *, max_repair_attempts: int = DEFAULT_MAX_REPAIR_ATTEMPTS):
        self.backend = backend
        self.max_repair_attempts = max_repair_attempts

    def complete(self, request: LlmRequest) -> LlmResponse:
        return self.backend.complete(request)

    def complete_structured(
        self,
        request: LlmRequest,
        required_keys: Sequence[str],
        max_repair_attempts: int | None = None,
    ) -> dict[str, Any]:
        repairs = self.max_repair_attempts if max_repair_attempts is None else max_repair_attempts
        if repairs < 0:
            raise ValueError("max_repair_attempts must be >= 0")
        responses: list[str] = []
        current = request
        for attempt in range(1 + repairs):
            text = self.complete(current).text
            responses.append(text)
            value: Any = None
            try:
                value = extract_json(text)
            except (NoJsonObjectError, JsonParseError):
                value = None
            if isinstance(value, dict):
                matched = _match_required_keys(value, required_keys)
                if matched is not None:
                    return matched
            if attempt < repairs:
                keys = ", ".join(f'"{k}"' for k in required_keys)
                current = request.with_extra_user_message(_REPAIR_INSTRUCTION.format(keys=keys))
        raise ContractViolationError(
            f"no valid JSON with keys {list(required_keys)} from {request.call_site!r} "
            f"after {1 + repairs} attempt(s)",
            responses,
        )

    def complete_text(self, request: LlmRequest, max_repair_attempts: int | None = None) -> str:
        """Complete and retry while the reply is blank."""
        repairs = self.max_repair_attempts if max_repair_attempts is None else max_repair_attempts
        current = request
        for attempt in range(1 + repairs):
            text = self.complete(current).text
            if text.strip():
                return text
            if attempt < repairs:
                current = request.with_extra_user_message(_EMPTY_RETRY_INSTRUCTION)
        raise EmptyGenerationError(
            f"blank completion from {request.call_site!r} after {1 + repairs} attempt(s)"
        )


def make_backend(spec: str, live_options: Mapping[str, Any] | None = None) -> Backend:
    """Build a backend from a CLI-style spec string.

    ``scripted:<path>`` loads a script file; ``live`` builds an HTTP client
    from ``live_options`` (endpoint, model, api_key_env, retry settings).
    """
    if spec.startswith("scripted:"):
        return ScriptedBackend.from_file(spec.split(":", 1)[1])
    if spec == "live":
        options = dict(live_options or {})
        if "endpoint" not in options or "model" not in options:
            raise ValueError("live backend needs 'endpoint' and 'model' options")
        return LiveBackend(
            options["endpoint"],
            options["model"],
            api_key_env=options.get("api_key_env", "OPENAI_API_KEY"),
            max_retries=int(options.get("max_retries", 3)),
            backoff_seconds=float(options.get("backoff_seconds", 1.0)),
            timeout=float(options.get("timeout", 60.0)),
        )
    raise ValueError(f"unrecognized backend spec {spec!r}")
