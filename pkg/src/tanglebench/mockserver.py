"""Loopback mock backend speaking the chat-completions wire protocol.

The mock reads the ground truth from a hint header the runner attaches in
mock mode, which keeps the protocol identical to a real endpoint while
letting tests plant analytically known answers:

  echo-truth      answer exactly the true label set
  drop-one-label  omit the canonically first true label (Hamming loss 1/7)
  fixed-label     always answer a fixed label set
  inject-delay    echo truth after a fixed delay, with optional spikes
  inject-noise    echo truth with one deterministic pseudo-random label flip
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .promptkit import render_answer
from .taxonomy import CANONICAL_ORDER, LabelSet

GROUND_TRUTH_HEADER = "x-ground-truth"

MOCK_MODES = ("echo-truth", "drop-one-label", "fixed-label", "inject-delay", "inject-noise")


@dataclass(frozen=True)
class MockConfig:
    mode: str = "echo-truth"
    delay_ms: float = 0.0
    spike_ms: float = 0.0
    spike_every: int = 0
    fixed_labels: tuple[str, ...] = ("feat",)
    noise_seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MOCK_MODES:
            raise ValueError(f"unknown mock mode {self.mode!r}; choose from {MOCK_MODES}")


def parse_mock_spec(spec: str) -> MockConfig:
    """Parse a CLI mock spec like ``inject-delay:delay_ms=50,spike_ms=3000``."""
    mode, _, params_text = spec.partition(":")
    kwargs: dict = {}
    if params_text:
        for part in params_text.split(","):
            key, _, value = part.partition("=")
            key = key.strip()
            value = value.strip()
            if key in ("delay_ms", "spike_ms"):
                kwargs[key] = float(value)
            elif key in ("spike_every", "noise_seed"):
                kwargs[key] = int(value)
            elif key == "fixed_labels":
                kwargs[key] = tuple(value.split("+"))
            else:
                raise ValueError(f"unknown mock parameter {key!r}")
    return MockConfig(mode=mode, **kwargs)


def _answer_labels(config: MockConfig, truth: list[str], prompt: str) -> list[str]:
    if config.mode == "fixed-label":
        return list(config.fixed_labels)
    if config.mode == "drop-one-label":
        ordered = [l.value for l in CANONICAL_ORDER if l.value in truth]
        return ordered[1:]
    if config.mode == "inject-noise":
        digest = hashlib.blake2b(prompt.encode("utf-8"), digest_size=8).digest()
        rng = random.Random(int.from_bytes(digest, "big") ^ config.noise_seed)
        flipped = rng.choice([l.value for l in CANONICAL_ORDER])
        labels = set(truth)
        labels.symmetric_difference_update({flipped})
        return sorted(labels)
    # echo-truth and inject-delay answer the truth verbatim
    return list(truth)


class _MockHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "TangleBenchMock/0.1"

    def log_message(self, fmt: str, *args) -> None:  # keep test output quiet
        pass

    def do_POST(self) -> None:
        server: MockServer = self.server  # type: ignore[assignment]
        if not self.path.endswith("/chat/completions"):
            self._respond(404, {"error": "unknown path"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            request = json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            self._respond(400, {"error": "invalid JSON"})
            return

        config = server.config
        request_index = server.next_request_index()
        delay_s = config.delay_ms / 1000.0
        if config.spike_every and request_index % config.spike_every == 0:
            delay_s = config.spike_ms / 1000.0
        if config.mode == "inject-delay" and delay_s > 0:
            time.sleep(delay_s)

        truth_raw = self.headers.get(GROUND_TRUTH_HEADER, "")
        truth = [part.strip() for part in truth_raw.split(",") if part.strip()]
        messages = request.get("messages") or [{}]
        prompt = str(messages[-1].get("content", ""))
        answer = _answer_labels(config, truth, prompt)
        try:
            answer_line = render_answer(LabelSet.from_strings(answer))
        except ValueError:
            answer_line = "Labels: none"
        content = "Looking at each diff segment and the commit message in turn.\n" + answer_line

        self._respond(
            200,
            {
                "id": f"mock-{request_index}",
                "object": "chat.completion",
                "model": request.get("model", "mock"),
                "choices": [
                    {
                        "index": 0,
                        "message": {"role": "assistant", "content": content},
                        "finish_reason": "stop",
                    }
                ],
                "usage": {"prompt_tokens": 0, "completion_tokens": 0},
            },
        )

    def _respond(self, status: int, body: dict) -> None:
        payload = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


class MockServer(ThreadingHTTPServer):
    """In-process loopback server; use as a context manager."""

    daemon_threads = True

    def __init__(self, config: MockConfig, port: int = 0):
        super().__init__(("127.0.0.1", port), _MockHandler)
        self.config = config
        self._lock = threading.Lock()
        self._request_count = 0
        self._thread: threading.Thread | None = None

    def next_request_index(self) -> int:
        with self._lock:
            self._request_count += 1
            return self._request_count

    @property
    def base_url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}/v1"

    def __enter__(self) -> "MockServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
