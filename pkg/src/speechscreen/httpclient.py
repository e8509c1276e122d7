"""Shared HTTP plumbing: JSON POST with retry/backoff, a token-bucket rate
limiter, and the process-wide network guard.

Every outbound request in the package goes through `post_json`, so flipping
the guard to "forbidden" makes any network attempt raise — that is what the
CLI's --network flag and the no-network test assertions rely on.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field

import requests

log = logging.getLogger(__name__)

_NETWORK_MODE = "allowed"


class NetworkForbidden(Exception):
    pass


class TransportError(Exception):
    """Request kept failing after the retry budget was spent."""


class SchemaError(Exception):
    """Response arrived but does not match the expected shape."""


def set_network_mode(mode: str) -> None:
    global _NETWORK_MODE
    if mode not in ("allowed", "forbidden"):
        raise ValueError(f"network mode must be allowed|forbidden, got {mode!r}")
    _NETWORK_MODE = mode


def network_mode() -> str:
    return _NETWORK_MODE


@dataclass
class RetryPolicy:
    attempts: int = 3
    backoff_base: float = 0.5   # seconds; doubles per retry
    backoff_cap: float = 30.0
    jitter: float = 0.0         # uniform [0, jitter) added; 0 in tests

    def delay(self, retry_index: int, rng=None) -> float:
        d = min(self.backoff_base * (2 ** retry_index), self.backoff_cap)
        if self.jitter and rng is not None:
            d += rng.random() * self.jitter
        return d


@dataclass
class TokenBucket:
    """Simple rate limiter: `rate` tokens/second up to `capacity`."""
    rate: float
    capacity: float
    _tokens: float = field(default=0.0, init=False)
    _last: float = field(default_factory=time.monotonic, init=False)

    def __post_init__(self):
        self._tokens = self.capacity

    def acquire(self) -> None:
        while True:
            now = time.monotonic()
            self._tokens = min(self.capacity,
                               self._tokens + (now - self._last) * self.rate)
            self._last = now
            if self._tokens >= 1.0:
                self._tokens -= 1.0
                return
            time.sleep((1.0 - self._tokens) / self.rate)


def bearer_headers(api_key_env: str | None) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    if api_key_env:
        token = os.environ.get(api_key_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
    return headers


def post_json(url: str, payload: dict, headers: dict | None = None,
              timeout: float = 60.0, retry: RetryPolicy | None = None,
              session: requests.Session | None = None,
              limiter: TokenBucket | None = None,
              sleep=time.sleep) -> dict:
    """POST JSON and return the decoded JSON response.

    Retries connection errors and 5xx responses with exponential backoff;
    4xx responses and budget exhaustion raise TransportError.
    """
    if _NETWORK_MODE == "forbidden":
        raise NetworkForbidden(f"network access is forbidden (POST {url})")
    retry = retry or RetryPolicy()
    sess = session or requests
    last_err: Exception | None = None
    for attempt in range(retry.attempts + 1):
        if attempt:
            delay = retry.delay(attempt - 1)
            log.warning("retrying %s in %.2fs (attempt %d/%d): %s",
                        url, delay, attempt, retry.attempts, last_err)
            sleep(delay)
        if limiter is not None:
            limiter.acquire()
        try:
            resp = sess.post(url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            last_err = exc
            continue
        if resp.status_code >= 500:
            last_err = TransportError(f"{url}: HTTP {resp.status_code}")
            continue
        if resp.status_code >= 400:
            raise TransportError(f"{url}: HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise SchemaError(f"{url}: response is not JSON: {exc}")
    raise TransportError(f"{url}: failed after {retry.attempts} retries: {last_err}")
