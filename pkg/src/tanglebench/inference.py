"""Chat-completions client with deterministic decoding and latency capture.

One request per classification: the full response is consumed (non-streaming)
and wall-clock latency is stamped around the whole exchange. Transport
failures and server errors are retried a bounded number of times; an
exhausted request still yields an outcome (scored as an empty prediction)
so accuracy bookkeeping never loses a sample, but its latency is excluded
from timing statistics.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import requests

from .diffmodel import WhitespaceTokenCounter
from .promptkit import STATUS_EMPTY, ParsedPrediction, parse_prediction
from .taxonomy import LabelSet


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model_name: str
    api_key: str | None = None
    timeout: float = 120.0
    max_in_flight: int = 1
    max_retries: int = 3

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


@dataclass(frozen=True)
class DecodingConfig:
    temperature: float = 0.0
    seed: int = 0
    max_output_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass
class PredictionOutcome:
    parsed: ParsedPrediction
    latency_seconds: float | None
    request_tokens: int
    attempt: int
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


_thread_state = threading.local()
_request_counter = WhitespaceTokenCounter()


def _session() -> requests.Session:
    session = getattr(_thread_state, "session", None)
    if session is None:
        session = requests.Session()
        _thread_state.session = session
    return session


def _failed_outcome(prompt: str, attempt: int, error: str) -> PredictionOutcome:
    return PredictionOutcome(
        parsed=ParsedPrediction(LabelSet(), STATUS_EMPTY, ""),
        latency_seconds=None,
        request_tokens=_request_counter.count(prompt),
        attempt=attempt,
        error=error,
    )


def classify(
    endpoint: EndpointConfig,
    decoding: DecodingConfig,
    prompt: str,
    extra_headers: dict[str, str] | None = None,
) -> PredictionOutcome:
    """Send one classification request and parse the reply.

    Latency is wall-clock from submitting the request to having the full
    response body; it is only recorded on success.
    """
    url = endpoint.base_url.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    if endpoint.api_key:
        headers["Authorization"] = f"Bearer {endpoint.api_key}"
    if extra_headers:
        headers.update(extra_headers)
    payload = {
        "model": endpoint.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": decoding.temperature,
        "seed": decoding.seed,
        "max_tokens": decoding.max_output_tokens,
    }

    last_error = "no attempts made"
    attempt = 0
    for attempt in range(1, endpoint.max_retries + 1):
        started = time.perf_counter()
        try:
            response = _session().post(
                url, json=payload, headers=headers, timeout=endpoint.timeout
            )
        except requests.Timeout:
            last_error = f"timeout after {endpoint.timeout}s"
            continue
        except requests.RequestException as exc:
            last_error = f"transport failure: {exc}"
            continue
        elapsed = time.perf_counter() - started
        if response.status_code >= 500:
            last_error = f"server error: HTTP {response.status_code}"
            continue
        if response.status_code != 200:
            # Client-side errors will not improve on retry.
            return _failed_outcome(prompt, attempt, f"HTTP {response.status_code}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            last_error = f"malformed response body: {exc}"
            continue
        return PredictionOutcome(
            parsed=parse_prediction(content),
            latency_seconds=elapsed,
            request_tokens=_request_counter.count(prompt),
            attempt=attempt,
        )
    return _failed_outcome(prompt, attempt, last_error)


def run_repeated(
    endpoint: EndpointConfig,
    decoding: DecodingConfig,
    plan: Sequence[tuple[str, str]],
    runs: int = 3,
    headers_for: Callable[[str], dict[str, str] | None] | None = None,
) -> list[list[PredictionOutcome]]:
    """Execute every (sample_id, prompt) pair `runs` times.

    Returns one outcome list per run, each in plan order: exactly
    runs x len(plan) outcomes, failures included. Requests within a run are
    issued with at most max_in_flight in parallel.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")

    def one(item: tuple[str, str]) -> PredictionOutcome:
        sample_id, prompt = item
        extra = headers_for(sample_id) if headers_for else None
        return classify(endpoint, decoding, prompt, extra_headers=extra)

    per_run: list[list[PredictionOutcome]] = []
    for _ in range(runs):
        if endpoint.max_in_flight == 1:
            per_run.append([one(item) for item in plan])
        else:
            with ThreadPoolExecutor(max_workers=endpoint.max_in_flight) as pool:
                per_run.append(list(pool.map(one, plan)))
    return per_run
