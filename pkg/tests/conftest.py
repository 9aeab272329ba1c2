from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class ScriptedEndpoint:
    """Chat server whose answers are chosen by a callback on the request body.

    ``reply(body, n)`` returns ``(delay_seconds, content)``; ``n`` counts
    requests so far. Every request body is kept in ``log``.
    """

    def __init__(self, reply, profile: str = "ollama-chat"):
        self.reply = reply
        self.profile = profile
        self.log: list[dict] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        endpoint = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length))
                with endpoint._lock:
                    endpoint.log.append({"path": self.path, "body": body,
                                         "auth": self.headers.get("Authorization")})
                    n = len(endpoint.log)
                delay, content = endpoint.reply(body, n)
                if delay and endpoint._stop.wait(delay):
                    return
                if endpoint.profile == "ollama-chat":
                    payload = {"message": {"role": "assistant", "content": content}, "done": True}
                else:
                    payload = {"choices": [{"message": {"role": "assistant", "content": content}}]}
                data = json.dumps(payload).encode()
                try:
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                except (BrokenPipeError, ConnectionResetError):
                    pass

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.server.daemon_threads = True
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}"
        self._thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._stop.set()
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def scripted_endpoint():
    servers = []

    def make(reply, profile="ollama-chat"):
        s = ScriptedEndpoint(reply, profile).__enter__()
        servers.append(s)
        return s

    yield make
    for s in servers:
        s.__exit__(None, None, None)
