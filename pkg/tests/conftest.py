import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from speechscreen.lingfeat import load_lexicon, load_tagger
from speechscreen import httpclient


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="session")
def tagger():
    return load_tagger()


@pytest.fixture(autouse=True)
def _network_allowed():
    # tests default to allowed; the guard tests flip it themselves
    httpclient.set_network_mode("allowed")
    yield
    httpclient.set_network_mode("allowed")


@contextmanager
def json_server(behavior):
    """Serve POSTed JSON through `behavior(payload) -> (status, doc)` on an
    ephemeral port; yields the base URL."""

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length) or b"{}")
            status, doc = behavior(payload)
            body = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        thread.join(timeout=5)


@pytest.fixture
def fast_retry():
    return httpclient.RetryPolicy(attempts=3, backoff_base=0.001)
