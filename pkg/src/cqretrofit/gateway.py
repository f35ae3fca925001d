"""Chat-completion dispatch, caching, and question extraction.

Providers are either real HTTP chat-completion endpoints (one user-role
message per request, common JSON schema) or the built-in deterministic
mock used for offline runs and tests. Responses are cached on disk,
keyed by a digest of (model name, rendered prompt), so a warm-cache run
performs zero network calls.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import requests

from .ontology import Statement, StatementSet
from .prompts import PromptInstance, PromptTemplate, render_prompt

logger = logging.getLogger(__name__)

MOCK_PROVIDER_ID = "mock"

# Requested-token ceilings per model family.
MODEL_TOKEN_PRESETS = {
    "gpt-3.5": 4096,
    "gpt-4": 8192,
}
DEFAULT_MAX_TOKENS = 4096

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}
_BACKOFF_CAP_S = 30.0


class GatewayError(Exception):
    """Base class for provider dispatch errors."""


class AuthError(GatewayError):
    pass


class RateLimitError(GatewayError):
    pass


class RequestTimeoutError(GatewayError):
    pass


class MalformedResponseError(GatewayError):
    pass


def preset_max_tokens(model_name: str) -> int:
    """Token ceiling for a model name, by family prefix match."""
    lowered = model_name.lower()
    for family, ceiling in MODEL_TOKEN_PRESETS.items():
        if family in lowered:
            return ceiling
    return DEFAULT_MAX_TOKENS


@dataclass(frozen=True)
class ProviderConfig:
    """One chat-completion provider. ``endpoint_url=None`` selects the
    built-in mock."""

    provider_id: str
    model_name: str
    endpoint_url: Optional[str] = None
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: Optional[float] = None
    request_timeout_s: float = 60.0
    max_retries: int = 3
    retry_backoff_s: float = 0.5

    def __post_init__(self) -> None:
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @property
    def is_mock(self) -> bool:
        return self.endpoint_url is None or self.provider_id == MOCK_PROVIDER_ID

    def api_key_env_var(self) -> str:
        suffix = re.sub(r"[^A-Za-z0-9]", "_", self.provider_id).upper()
        return f"RETROFIT_API_KEY_{suffix}"


def mock_provider(model_name: str = "mock-small") -> ProviderConfig:
    return ProviderConfig(provider_id=MOCK_PROVIDER_ID, model_name=model_name)


@dataclass(frozen=True)
class RawResponse:
    prompt_digest: str
    provider_id: str
    model_name: str
    text: str
    from_cache: bool = False
    latency_ms: Optional[int] = None
    truncated: bool = False


def prompt_digest(model_name: str, rendered_prompt: str, salt: str = "") -> str:
    """Cache key: SHA-256 over the model name and the exact prompt text.

    ``salt`` folds run parameters that change the response for the same
    prompt (the mock's seed) into the key.
    """
    h = hashlib.sha256()
    for part in (model_name, rendered_prompt, salt):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


class ResponseCache:
    """Content-addressed response store, one JSON file per digest.

    Reads are lock-free; writes are serialized and atomic (temp file +
    rename), so concurrent workers never observe a torn entry.
    """

    def __init__(self, directory: Union[str, Path, None]) -> None:
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._memory: dict[str, dict] = {}
        self._write_lock = threading.Lock()

    def _path(self, digest: str) -> Path:
        assert self.directory is not None
        return self.directory / f"{digest}.json"

    def get(self, digest: str) -> Optional[dict]:
        if self.directory is None:
            return self._memory.get(digest)
        path = self._path(digest)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            logger.warning("discarding unreadable cache entry %s", path)
            return None

    def put(self, digest: str, payload: dict) -> None:
        if self.directory is None:
            self._memory[digest] = payload
            return
        path = self._path(digest)
        tmp = path.with_suffix(".json.tmp")
        with self._write_lock:
            tmp.write_text(
                json.dumps(payload, sort_keys=True, ensure_ascii=False),
                encoding="utf-8",
            )
            os.replace(tmp, path)


# Question frames for the mock provider. Two are intentionally shaped so
# the default filtration rules remove them (modelling-primitive and
# subjective), keeping end-to-end runs representative.
_MOCK_FRAMES = (
    "What is a {s} {o}?",
    "Is {s} a kind of {o}?",
    "How does {s} relate to {o}?",
    "Does every {s} have a {o}?",
    "Which {o} is associated with a {s}?",
    "What types of {o} can a {s} have?",
    "What is the subclass of {s}?",
    "In your opinion, what makes a {s} important?",
)


def _mock_text(
    subject_label: str,
    predicate_label: str,
    object_label: str,
    ordinal: int,
    template_id: str,
    seed: int,
) -> str:
    rng = random.Random(f"{seed}:{ordinal}:{template_id}")
    count = rng.randint(2, 5)
    frames = rng.sample(_MOCK_FRAMES, count)
    lines = []
    for i, frame in enumerate(frames, start=1):
        question = frame.format(s=subject_label, p=predicate_label, o=object_label)
        lines.append(f"{i}. {question}")
    return "\n".join(lines)


def mock_generate(statement: Statement, template_id: str, seed: int) -> str:
    """Deterministic offline stand-in for a provider response: a
    numbered list of 2-5 questions over the statement labels, chosen by
    a PRNG seeded from (seed, statement ordinal, template id)."""
    subject = statement.subject.readable() or statement.subject.lexical
    predicate = statement.predicate.readable() or statement.predicate.lexical
    obj = statement.object.readable() or statement.object.lexical
    return _mock_text(subject, predicate, obj, statement.ordinal, template_id, seed)


_BRACKETED_STATEMENT_RE = re.compile(r"\['(.*?)', '(.*?)', '(.*?)'\]")


def _mock_complete(prompt: PromptInstance, seed: int) -> str:
    match = _BRACKETED_STATEMENT_RE.search(prompt.rendered)
    if not match:
        raise MalformedResponseError(
            "mock provider could not find a bracketed statement in the prompt"
        )
    s, p, o = match.groups()
    return _mock_text(s, p, o, prompt.statement_ordinal, prompt.template_id, seed)


def complete(
    prompt: PromptInstance,
    cfg: ProviderConfig,
    cache: Optional[ResponseCache] = None,
    *,
    mock_seed: int = 0,
    api_key: Optional[str] = None,
) -> RawResponse:
    """Resolve one prompt against a provider, cache-first.

    A cache hit returns immediately with ``from_cache=True`` and no
    network call. Transient failures (429, 5xx, timeouts, connection
    resets) are retried up to ``cfg.max_retries`` times with exponential
    backoff.

    Raises:
        AuthError: The endpoint rejected the credential (401/403).
        RateLimitError: 429 persisted past the retry budget.
        RequestTimeoutError: Timeouts persisted past the retry budget.
        MalformedResponseError: The response body was not the expected
            chat-completion JSON.
        GatewayError: Any other non-retryable HTTP failure.
    """
    salt = f"seed={mock_seed}" if cfg.is_mock else ""
    digest = prompt_digest(cfg.model_name, prompt.rendered, salt)
    if cache is not None:
        hit = cache.get(digest)
        if hit is not None:
            return RawResponse(
                prompt_digest=digest,
                provider_id=cfg.provider_id,
                model_name=cfg.model_name,
                text=hit.get("text", ""),
                from_cache=True,
                truncated=bool(hit.get("truncated", False)),
            )
    if cfg.is_mock:
        text = _mock_complete(prompt, mock_seed)
        truncated = False
        latency_ms = None
    else:
        text, truncated, latency_ms = _http_complete(prompt, cfg, api_key)
    if cache is not None:
        cache.put(digest, {"model": cfg.model_name, "text": text, "truncated": truncated})
    return RawResponse(
        prompt_digest=digest,
        provider_id=cfg.provider_id,
        model_name=cfg.model_name,
        text=text,
        from_cache=False,
        latency_ms=latency_ms,
        truncated=truncated,
    )


def _http_complete(
    prompt: PromptInstance, cfg: ProviderConfig, api_key: Optional[str]
) -> tuple[str, bool, int]:
    headers = {"Content-Type": "application/json"}
    key = api_key if api_key is not None else os.environ.get(cfg.api_key_env_var())
    if key:
        headers["Authorization"] = f"Bearer {key}"
    payload: dict = {
        "model": cfg.model_name,
        "messages": [{"role": "user", "content": prompt.rendered}],
        "max_tokens": cfg.max_tokens,
    }
    if cfg.temperature is not None:
        payload["temperature"] = cfg.temperature

    started = time.monotonic()
    last_status: Optional[int] = None
    for attempt in range(cfg.max_retries + 1):
        if attempt > 0:
            delay = min(cfg.retry_backoff_s * (2 ** (attempt - 1)), _BACKOFF_CAP_S)
            logger.info(
                "retrying %s (attempt %d/%d) after %.2fs",
                cfg.provider_id,
                attempt,
                cfg.max_retries,
                delay,
            )
            time.sleep(delay)
        try:
            resp = requests.post(
                cfg.endpoint_url,
                json=payload,
                headers=headers,
                timeout=cfg.request_timeout_s,
            )
        except requests.Timeout:
            last_status = None
            if attempt == cfg.max_retries:
                raise RequestTimeoutError(
                    f"{cfg.provider_id}: request timed out after "
                    f"{cfg.max_retries + 1} attempts"
                )
            continue
        except requests.ConnectionError as exc:
            last_status = None
            if attempt == cfg.max_retries:
                raise GatewayError(f"{cfg.provider_id}: connection failed: {exc}")
            continue

        last_status = resp.status_code
        if resp.status_code == 200:
            return _parse_completion(resp, cfg, started)
        if resp.status_code in (401, 403):
            raise AuthError(
                f"{cfg.provider_id}: HTTP {resp.status_code}; check the "
                f"{cfg.api_key_env_var()} environment variable"
            )
        if resp.status_code not in _RETRYABLE_STATUS:
            raise GatewayError(
                f"{cfg.provider_id}: HTTP {resp.status_code}: {resp.text[:200]}"
            )
    if last_status == 429:
        raise RateLimitError(
            f"{cfg.provider_id}: rate limited after {cfg.max_retries + 1} attempts"
        )
    raise GatewayError(
        f"{cfg.provider_id}: HTTP {last_status} persisted after "
        f"{cfg.max_retries + 1} attempts"
    )


def _parse_completion(
    resp: requests.Response, cfg: ProviderConfig, started: float
) -> tuple[str, bool, int]:
    try:
        data = resp.json()
        choice = data["choices"][0]
        text = choice["message"]["content"]
        finish_reason = choice.get("finish_reason")
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponseError(
            f"{cfg.provider_id}: unexpected response shape: {exc}"
        )
    if not isinstance(text, str):
        raise MalformedResponseError(f"{cfg.provider_id}: message content is not text")
    latency_ms = int((time.monotonic() - started) * 1000)
    return text, finish_reason == "length", latency_ms


_ENUM_MARKER_RE = re.compile(r"^(?:\d+[.)]|[-*•])\s*")
_QUOTE_PAIRS = (('"', '"'), ("'", "'"), ("“", "”"))


def _clean_line(line: str) -> Optional[str]:
    text = line.strip()
    while True:
        stripped = _ENUM_MARKER_RE.sub("", text, count=1)
        if stripped == text:
            break
        text = stripped.strip()
    for opener, closer in _QUOTE_PAIRS:
        if len(text) >= 2 and text.startswith(opener) and text.endswith(closer):
            text = text[1:-1].strip()
    text = " ".join(text.split())
    idx = text.find("?")
    if idx <= 0:
        # no interrogative, or a bare "?": drop the line
        return None
    return text[: idx + 1]


def extract_questions(response: Union[RawResponse, str]) -> list[str]:
    """Pull the cleaned question list out of a provider response.

    Each line is stripped of enumeration markers and surrounding quotes,
    whitespace runs collapse to single spaces, and anything after the
    first '?' is discarded (downstream matching works on single
    interrogatives). Lines with no '?' at all (preambles, sign-offs) are
    dropped. Idempotent on its own output.
    """
    text = response.text if isinstance(response, RawResponse) else response
    questions = []
    for line in text.splitlines():
        cleaned = _clean_line(line)
        if cleaned is not None:
            questions.append(cleaned)
    return questions


@dataclass(frozen=True)
class GenerationRecord:
    """Questions extracted for one (statement, template, provider)."""

    statement_ordinal: int
    template_id: str
    provider_id: str
    questions: tuple[str, ...]


def generate_records(
    statements: Union[StatementSet, Sequence[Statement]],
    templates: Iterable[Union[str, PromptTemplate]],
    providers: Iterable[ProviderConfig],
    *,
    cache: Optional[ResponseCache] = None,
    seed: int = 0,
    parallelism: int = 4,
) -> list[GenerationRecord]:
    """Run the full (statement x template x provider) product.

    Requests within one (template, provider) cell run on up to
    ``parallelism`` threads; results are re-assembled in input order, so
    the returned records are always sorted by (statement ordinal,
    template id, provider id) no matter how requests complete.
    """
    stmts = list(statements.statements if isinstance(statements, StatementSet) else statements)
    records: list[GenerationRecord] = []
    for provider in providers:
        for template in templates:
            prompts = [render_prompt(template, st) for st in stmts]

            def task(p: PromptInstance, _provider=provider) -> GenerationRecord:
                response = complete(p, _provider, cache, mock_seed=seed)
                return GenerationRecord(
                    statement_ordinal=p.statement_ordinal,
                    template_id=p.template_id,
                    provider_id=_provider.provider_id,
                    questions=tuple(extract_questions(response)),
                )

            if parallelism > 1 and not provider.is_mock:
                with ThreadPoolExecutor(max_workers=parallelism) as pool:
                    records.extend(pool.map(task, prompts))
            else:
                records.extend(task(p) for p in prompts)
    records.sort(key=lambda r: (r.statement_ordinal, r.template_id, r.provider_id))
    return records
