"""Model adapters: one structured (thought, code) step per call.

Two implementations share the contract.  The wire adapter talks to an
OpenAI-compatible chat completions endpoint; the replay adapter serves a
recorded step sequence for offline runs and tests.  Both return StepOutput
or raise a typed adapter error after the retry budget is spent.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import requests

log = logging.getLogger("histoagent.adapters")

CORRECTIVE_MESSAGE = "reply must be a single object with fields thought and code"

ROLES = ("system", "user", "assistant", "observation")


class AdapterError(Exception):
    pass


class TransportError(AdapterError):
    """Endpoint unreachable, kept failing, or replay exhausted."""


class MalformedOutput(AdapterError):
    """Model kept producing replies without the required structure."""


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown chat role '{self.role}'")


@dataclass(frozen=True)
class StepOutput:
    thought: str
    code: str
    raw: str


@dataclass(frozen=True)
class ModelConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    max_retries: int = 20
    api_key_env: str = "HISTOAGENT_API_KEY"
    timeout_seconds: float = 120.0
    backoff_seconds: float = 0.5

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


def parse_step_output(text: str) -> StepOutput:
    """Parse a model reply into a step; ValueError when the shape is wrong."""
    candidate = text.strip()
    try:
        obj = json.loads(candidate)
    except json.JSONDecodeError:
        # tolerate fenced or prefixed replies by trying the outermost braces
        start, end = candidate.find("{"), candidate.rfind("}")
        if start < 0 or end <= start:
            raise ValueError("reply is not a JSON object") from None
        try:
            obj = json.loads(candidate[start : end + 1])
        except json.JSONDecodeError:
            raise ValueError("reply is not a JSON object") from None
    if not isinstance(obj, dict):
        raise ValueError("reply must be a single JSON object")
    if "thought" not in obj or "code" not in obj:
        raise ValueError("reply object must have fields thought and code")
    thought, code = obj["thought"], obj["code"]
    if not isinstance(thought, str) or not isinstance(code, str):
        raise ValueError("thought and code must be strings")
    return StepOutput(thought=thought, code=code, raw=text)


class WireAdapter:
    """OpenAI-compatible chat endpoint; structured output by instruction
    plus corrective parse-retry."""

    def __init__(self, config: ModelConfig, session: requests.Session | None = None):
        self.config = config
        self._session = session or requests.Session()

    def _request_body(self, transcript: Sequence[ChatMessage]) -> dict:
        messages = []
        for message in transcript:
            # the wire protocol has no observation role; observations are
            # environment turns, which the chat shape calls "user"
            role = "user" if message.role == "observation" else message.role
            messages.append({"role": role, "content": message.content})
        return {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": messages,
            "response_format": {"type": "json_object"},
        }

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete_step(self, transcript: Sequence[ChatMessage]) -> StepOutput:
        if not transcript:
            raise ValueError("transcript must not be empty")
        if transcript[0].role != "system":
            raise ValueError("transcript must start with a system message")
        working = list(transcript)  # never mutate the caller's list
        attempts_allowed = self.config.max_retries + 1
        last_failure = "no attempt made"
        transport_failures = 0
        for attempt in range(1, attempts_allowed + 1):
            try:
                reply = self._post_once(working)
            except TransportError as exc:
                last_failure = str(exc)
                transport_failures += 1
                if attempt == attempts_allowed:
                    break
                log.info(
                    "transport failure on attempt %d: %s; retrying", attempt, exc
                )
                if self.config.backoff_seconds:
                    time.sleep(self.config.backoff_seconds)
                continue
            try:
                step = parse_step_output(reply)
            except ValueError as exc:
                last_failure = str(exc)
                if attempt == attempts_allowed:
                    log.info("malformed reply on final attempt %d: %s", attempt, exc)
                    raise MalformedOutput(
                        f"model reply stayed malformed after "
                        f"{self.config.max_retries} retries: {exc}"
                    ) from None
                log.info(
                    "malformed reply on attempt %d: %s; sending corrective turn",
                    attempt,
                    exc,
                )
                working = working + [
                    ChatMessage("assistant", reply),
                    ChatMessage("observation", CORRECTIVE_MESSAGE),
                ]
                continue
            log.info("chat completion ok: attempts=%d retries=%d", attempt, attempt - 1)
            return step
        raise TransportError(
            f"endpoint failed after {self.config.max_retries} retries: {last_failure}"
        )

    def _post_once(self, transcript: Sequence[ChatMessage]) -> str:
        try:
            response = self._session.post(
                self.config.endpoint,
                json=self._request_body(transcript),
                headers=self._headers(),
                timeout=self.config.timeout_seconds,
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc.__class__.__name__}") from None
        if response.status_code != 200:
            raise TransportError(f"endpoint returned HTTP {response.status_code}")
        try:
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError):
            raise TransportError("endpoint returned an unreadable body") from None


class ReplayAdapter:
    """Serve a recorded step sequence in order; ordinal-keyed by design
    since observation text varies by machine."""

    def __init__(self, steps: Sequence[dict], source: str = "<memory>"):
        parsed = []
        for index, entry in enumerate(steps):
            if (
                not isinstance(entry, dict)
                or not isinstance(entry.get("thought"), str)
                or not isinstance(entry.get("code"), str)
            ):
                raise ValueError(
                    f"replay entry {index} in {source} must have string "
                    "fields thought and code"
                )
            parsed.append(
                StepOutput(
                    thought=entry["thought"],
                    code=entry["code"],
                    raw=json.dumps(
                        {"thought": entry["thought"], "code": entry["code"]}
                    ),
                )
            )
        self._steps = parsed
        self._source = source
        self._cursor = 0

    @classmethod
    def from_file(cls, path: Path | str) -> "ReplayAdapter":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValueError(f"replay fixture {path} must be a JSON array")
        return cls(data, source=str(path))

    def __len__(self) -> int:
        return len(self._steps)

    def reset(self) -> None:
        self._cursor = 0

    def complete_step(self, transcript: Sequence[ChatMessage]) -> StepOutput:
        if self._cursor >= len(self._steps):
            raise TransportError("replay exhausted")
        step = self._steps[self._cursor]
        self._cursor += 1
        return step


@dataclass
class AdapterSpec:
    """Parsed form of the CLI's --adapter argument."""

    kind: str
    replay_path: Path | None = None
    config: ModelConfig | None = None


def parse_adapter_spec(text: str) -> AdapterSpec:
    if text == "wire":
        endpoint = os.environ.get("HISTOAGENT_ENDPOINT", "")
        model = os.environ.get("HISTOAGENT_MODEL", "")
        if not endpoint or not model:
            raise ValueError(
                "adapter 'wire' needs HISTOAGENT_ENDPOINT and HISTOAGENT_MODEL set"
            )
        return AdapterSpec(kind="wire", config=ModelConfig(endpoint=endpoint, model=model))
    if text.startswith("replay:"):
        # a file replays one fixed conversation; a directory holds one
        # fixture per question, resolved by the benchmark runner
        path = Path(text[len("replay:"):])
        if not path.exists():
            raise ValueError(f"replay fixture not found: {path}")
        return AdapterSpec(kind="replay", replay_path=path)
    raise ValueError(f"unknown adapter '{text}' (expected 'wire' or 'replay:PATH')")


def build_adapter(spec: AdapterSpec):
    """Fresh adapter instance; call once per run so replay cursors start at 0."""
    if spec.kind == "wire":
        return WireAdapter(spec.config)
    return ReplayAdapter.from_file(spec.replay_path)
