import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from fpsim.persona import Education, Persona, Polarity, TraitVector

TOPIC = "the city water supply has been poisoned"


def make_persona(pid=0, agree="high", neuro="high", education="bachelor", age=30):
    traits = TraitVector(
        openness=Polarity.HIGH,
        conscientiousness=Polarity.LOW,
        extraversion=Polarity.HIGH,
        agreeableness=Polarity(agree),
        neuroticism=Polarity(neuro),
    )
    return Persona(id=pid, name=f"P{pid}", age=age, education=Education(education), traits=traits)


@pytest.fixture
def persona():
    return make_persona()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def envelope(content):
    return {"choices": [{"message": {"role": "assistant", "content": content}}]}


class StubEndpoint:
    """Chat-completions stand-in; serves queued replies, then ``default``."""

    def __init__(self):
        self.replies = []
        self.default = (200, envelope("Belief: 0\nTweet: default reply\nReasoning: none"))
        self.requests = []
        self.lock = threading.Lock()

    def queue(self, *contents, status=200):
        for c in contents:
            self.replies.append((status, envelope(c) if isinstance(c, str) else c))

    def next_reply(self, body):
        with self.lock:
            self.requests.append(body)
            return self.replies.pop(0) if self.replies else self.default


@pytest.fixture
def stub_endpoint():
    stub = StubEndpoint()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length) or b"{}")
            body["_auth"] = self.headers.get("Authorization")
            status, payload = stub.next_reply(body)
            data = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)
    thread.start()
    stub.url = f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
    yield stub
    server.shutdown()
    server.server_close()


# acceptance reporting: one PASS/FAIL line per criterion at the end of the run

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    passed = report.passed and _CRITERIA.get(number, (True,))[0]
    _CRITERIA[number] = (passed, title, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, title, duration = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title} ({duration:.2f}s)")
