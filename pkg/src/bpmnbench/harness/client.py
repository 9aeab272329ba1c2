"""Chat endpoints: Ollama-style ``/api/chat`` and OpenAI-style ``/v1/chat/completions``."""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import httpx

PROFILES = ("ollama-chat", "openai-chat")
_PATHS = {"ollama-chat": "/api/chat", "openai-chat": "/v1/chat/completions"}


class TransportError(RuntimeError):
    pass


class RequestTimeout(TransportError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    endpoint_url: str
    model_name: str
    api_profile: str = "ollama-chat"
    temperature: float = 0.1
    context_length: int = 40960
    timeout: float = 360.0
    runs: int = 5
    max_refinements: int = 1
    api_key: Optional[str] = None
    concurrency: int = 1

    def __post_init__(self):
        if self.api_profile not in PROFILES:
            raise ValueError(f"api_profile must be one of {PROFILES}, got {self.api_profile!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")


Message = dict


class ChatClient(Protocol):
    def chat(self, messages: Sequence[Message]) -> str: ...


def request_body(config: GenerationConfig, messages: Sequence[Message]) -> dict:
    if config.api_profile == "ollama-chat":
        return {
            "model": config.model_name,
            "messages": list(messages),
            "stream": False,
            "options": {"temperature": config.temperature, "num_ctx": config.context_length},
        }
    return {"model": config.model_name, "messages": list(messages), "temperature": config.temperature}


def response_text(profile: str, payload: dict) -> str:
    try:
        if profile == "ollama-chat":
            return payload["message"]["content"]
        return payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"unexpected response shape: {exc!r}") from exc


class HttpChatClient:
    """Blocking client; at most ``config.concurrency`` requests in flight."""

    def __init__(self, config: GenerationConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        headers = {"Authorization": f"Bearer {config.api_key}"} if config.api_key else {}
        self._http = httpx.Client(
            base_url=config.endpoint_url.rstrip("/"), transport=transport,
            timeout=httpx.Timeout(config.timeout), headers=headers,
        )
        self._slots = threading.BoundedSemaphore(config.concurrency)

    def chat(self, messages: Sequence[Message]) -> str:
        body = request_body(self.config, messages)
        with self._slots:
            try:
                resp = self._http.post(_PATHS[self.config.api_profile], json=body)
            except httpx.TimeoutException as exc:
                raise RequestTimeout(str(exc) or "request timed out") from exc
            except httpx.HTTPError as exc:
                raise TransportError(f"{type(exc).__name__}: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise TransportError(f"response is not JSON: {exc}") from exc
        return response_text(self.config.api_profile, payload)

    def close(self) -> None:
        self._http.close()


def chat_with_deadline(client: ChatClient, messages: Sequence[Message], timeout: float) -> str:
    """Run ``client.chat`` but give up after ``timeout`` seconds.

    The call runs on a daemon thread so that any client, not only the HTTP
    one, is cut off at the deadline.
    """
    box: dict = {}

    def work():
        try:
            box["text"] = client.chat(messages)
        except BaseException as exc:  # noqa: BLE001 - re-raised on the caller's thread
            box["error"] = exc

    t = threading.Thread(target=work, daemon=True)
    t.start()
    t.join(timeout)
    if t.is_alive():
        raise RequestTimeout(f"no response within {timeout:g} s")
    if "error" in box:
        err = box["error"]
        if isinstance(err, TransportError):
            raise err
        raise TransportError(f"{type(err).__name__}: {err}") from err
    return box["text"]
