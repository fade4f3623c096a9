"""Chat-completions client backend."""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable, TypeVar

import httpx

from ..exceptions import (
    BackendError,
    BackendHTTPError,
    BackendNetworkError,
    BackendParseError,
)
from .base import OpinionDraft, clip_tweet, format_messages, keep_head, render_template

logger = logging.getLogger(__name__)

API_KEY_ENV = "FPS_API_KEY"
RETRYABLE_STATUS = frozenset({408, 409, 429, 500, 502, 503, 504})

T = TypeVar("T")


def load_prompt(name: str) -> str:
    return resources.files("fpsim.backends.prompts").joinpath(f"{name}.txt").read_text("utf-8")


@dataclass(frozen=True)
class LlmBackendConfig:
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-3.5-turbo-1106"
    api_key: str | None = None
    temperature: float = 1.0
    max_retries: int = 3
    timeout: float = 60.0
    max_concurrent_requests: int = 8
    backoff: float = 0.5

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_concurrent_requests < 1:
            raise ValueError("max_concurrent_requests must be >= 1")

    def resolved_api_key(self) -> str | None:
        return self.api_key if self.api_key is not None else os.environ.get(API_KEY_ENV)


_BELIEF_LINE = re.compile(r"^[\s*#>-]*belief[\s*]*[:=][\s*]*([01])(?!\w|\.\d)", re.I | re.M)
_BARE_DIGIT = re.compile(r"(?<![\w.])([01])(?!\w|\.\d)")
_TWEET = re.compile(
    r"^[\s*#>-]*tweet[\s*]*[:=][\s*]*(.*?)(?=^[\s*#>-]*reasoning[\s*]*[:=]|\Z)", re.I | re.M | re.S
)
_REASONING = re.compile(r"^[\s*#>-]*reasoning[\s*]*[:=][\s*]*(.*)\Z", re.I | re.M | re.S)
_LABEL_LINE = re.compile(r"^[\s*#>-]*(belief|reasoning)[\s*]*[:=].*$", re.I | re.M)


def parse_opinion_reply(text: str) -> OpinionDraft:
    """Extract belief, tweet and reasoning from a model reply.

    The belief comes from a ``Belief:`` line if present, otherwise from the
    first standalone 0 or 1. Raises ValueError when no belief or no tweet
    text can be found.
    """
    m = _BELIEF_LINE.search(text)
    if m is None:
        m = _BARE_DIGIT.search(text)
    if m is None:
        raise ValueError("no belief token in reply")
    belief = int(m.group(1))

    t = _TWEET.search(text)
    if t is not None:
        tweet = t.group(1).strip()
    else:
        without_reasoning = _REASONING.sub("", text)
        tweet = _LABEL_LINE.sub("", without_reasoning).strip()
    tweet = tweet.strip('"').strip()
    if not tweet:
        raise ValueError("no tweet text in reply")
    r = _REASONING.search(text)
    reasoning = r.group(1).strip() if r else ""
    return OpinionDraft(belief, clip_tweet(tweet), reasoning)


def _plain_text(text: str) -> str:
    text = text.strip()
    if not text:
        raise ValueError("empty reply")
    return text


class LlmBackend:
    """Backend that renders the prompt templates and calls a chat endpoint.

    Every reply is parsed before it is returned; malformed replies are
    re-asked with a stricter suffix up to ``max_retries`` times.
    """

    name = "llm"

    def __init__(self, config: LlmBackendConfig | None = None, client: httpx.Client | None = None):
        self.config = config or LlmBackendConfig()
        self._client = client or httpx.Client(timeout=self.config.timeout)
        self._lock = threading.Lock()
        self.calls = 0
        self.retries = 0
        self.failures = 0
        self.templates = {
            name: load_prompt(name)
            for name in ("system", "short_term", "long_term", "opinion", "opinion_no_reasoning", "reask")
        }

    @property
    def max_concurrency(self) -> int:
        return self.config.max_concurrent_requests

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _system_prompt(self, persona, topic: str) -> str:
        return render_template(
            self.templates["system"],
            name=persona.name,
            age=str(persona.age),
            education=persona.education.value,
            trait=persona.traits.describe(),
            topic=topic,
        )

    def _post(self, messages: list[dict]) -> str:
        headers = {"Content-Type": "application/json"}
        key = self.config.resolved_api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.config.model_name,
            "messages": messages,
            "temperature": self.config.temperature,
        }
        try:
            resp = self._client.post(
                self.config.endpoint_url, json=payload, headers=headers, timeout=self.config.timeout
            )
        except httpx.TransportError as exc:
            raise BackendNetworkError(f"request to {self.config.endpoint_url} failed: {exc}") from exc
        if not resp.is_success:
            raise BackendHTTPError(
                f"endpoint returned HTTP {resp.status_code}", status_code=resp.status_code
            )
        try:
            return resp.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError):
            return ""

    def chat(self, system: str, user: str, parse: Callable[[str], T]) -> T:
        """Send one prompt, retrying transport errors and unparseable replies."""
        reask = self.templates["reask"]
        last: BackendError | None = None
        parse_failed = False
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                with self._lock:
                    self.retries += 1
                if self.config.backoff > 0 and not parse_failed:
                    time.sleep(self.config.backoff * 2 ** (attempt - 1))
            content = f"{user}\n\n{reask}" if parse_failed else user
            with self._lock:
                self.calls += 1
            try:
                text = self._post(
                    [{"role": "system", "content": system}, {"role": "user", "content": content}]
                )
            except BackendHTTPError as exc:
                last = exc
                parse_failed = False
                if exc.status_code not in RETRYABLE_STATUS:
                    break
                continue
            except BackendNetworkError as exc:
                last = exc
                parse_failed = False
                continue
            try:
                return parse(text)
            except ValueError as exc:
                logger.debug("unparseable reply (attempt %d): %s", attempt + 1, exc)
                last = BackendParseError(f"could not parse reply: {exc}")
                parse_failed = True
        with self._lock:
            self.failures += 1
        assert last is not None
        last.attempts = attempt + 1
        if isinstance(last, BackendParseError):
            last = BackendParseError(
                f"reply still unparseable after {attempt + 1} attempts", attempts=attempt + 1
            )
        raise last

    def summarize(self, messages, *, persona, topic):
        user = render_template(
            self.templates["short_term"], topic=topic, messages=format_messages(messages)
        )
        return self.chat(self._system_prompt(persona, topic), user, _plain_text)

    def integrate(self, long_term, short_term, *, cap, persona, topic):
        user = render_template(
            self.templates["long_term"],
            long_memory=long_term or "(empty)",
            short_memory=short_term,
        )
        return keep_head(self.chat(self._system_prompt(persona, topic), user, _plain_text), cap)

    def form_opinion(
        self, persona, memory, previous, *, topic, rng=None, with_reasoning=True
    ) -> OpinionDraft:
        return llm_form_opinion(self, persona, memory, previous, topic=topic, with_reasoning=with_reasoning)


def render_opinion_prompt(
    template: str, persona, memory: str, previous, topic: str
) -> str:
    stance = "I believe it" if previous.belief else "I do not believe it"
    return render_template(
        template,
        trait=persona.traits.describe(),
        education=persona.education.value,
        previous_opinion=f"{previous.tweet} ({stance}, belief={previous.belief})",
        long_memory=memory or "(nothing yet)",
        topic=topic,
    )


def llm_form_opinion(
    backend: LlmBackend, persona, memory: str, previous, *, topic: str, with_reasoning: bool = True
) -> OpinionDraft:
    key = "opinion" if with_reasoning else "opinion_no_reasoning"
    user = render_opinion_prompt(backend.templates[key], persona, memory, previous, topic)
    draft = backend.chat(backend._system_prompt(persona, topic), user, parse_opinion_reply)
    if not with_reasoning:
        draft = draft._replace(reasoning="")
    return draft
