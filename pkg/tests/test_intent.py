import json
import threading
import time
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from saatt_nav.core import Pose, Vec2
from saatt_nav.env import Observation, PedestrianScript, PedestrianState, WheelchairState
from saatt_nav.intent import (
    GeneratorConfig,
    Hypothesis,
    HypothesisParseError,
    Intent,
    RemoteGenerator,
    TriggerState,
    build_prompt,
    generate_heuristic,
    parse_response,
    should_invoke,
)

CV, Y, R = Intent.CONSTANT_VELOCITY, Intent.YIELD, Intent.RUSH


def obs(peds=()):
    wc = WheelchairState(Pose(Vec2(1.0, 5.0), 0.0), 0.0)
    return Observation(0, wc, tuple(peds), Vec2(9.0, 5.0))


def moving(pid, x, y, vx, vy):
    return PedestrianState(pid, Vec2(x, y), Vec2(vx, vy), script=PedestrianScript("crossing", 0.5))


@pytest.mark.parametrize(
    "t, dist, expected", [(130, 10.0, True), (110, 2.5, False), (116, 2.9, True), (129, 10.0, False)]
)
def test_trigger_examples(t, dist, expected):
    assert should_invoke(TriggerState(t_last=100), t, dist) is expected


def test_trigger_first_call_and_validation():
    assert should_invoke(TriggerState(), 0)
    with pytest.raises(ValueError):
        should_invoke(TriggerState(), -1)
    with pytest.raises(ValueError):
        TriggerState(t_period=10, dt_min=15)


def test_heuristic_enumeration():
    one = generate_heuristic(obs([moving(0, 5, 5, 0.5, 0)]), 8)
    assert [h.label_of(0) for h in one] == [CV, Y, R]
    two = generate_heuristic(obs([moving(0, 5, 5, 0.5, 0), moving(1, 5, 7, 0, 0.5)]), 8)
    assert len(two) == 8
    assert [(h.label_of(0), h.label_of(1)) for h in two] == [
        (CV, CV), (CV, Y), (CV, R), (Y, CV), (Y, Y), (Y, R), (R, CV), (R, Y)
    ]
    empty = generate_heuristic(obs(), 8)
    assert len(empty) == 1 and dict(empty[0].intents) == {}


def test_heuristic_rationale_names_pedestrian_and_label():
    h = generate_heuristic(obs([moving(3, 5, 5, 0.5, 0)]), 3)[2]
    assert "pedestrian 3" in h.rationale and "rush" in h.rationale


def test_prompt_contents():
    assert "pedestrians: []" in build_prompt(obs(), 8)
    text = build_prompt(obs([moving(0, 5, 5, 0.5, 0)]), 8)
    assert '"id": 0' in text and "[5.0, 5.0]" in text and "[0.5, 0.0]" in text
    for label in ("yield", "rush", "constant velocity"):
        assert f'"{label}"' in text


def reply(*entries):
    return json.dumps({"hypotheses": [{"intents": e, "rationale": "r"} for e in entries]})


def test_parse_response_cases():
    assert len(parse_response(reply({"0": "yield"}, {"0": "rush"}), [0])) == 2
    hyps = parse_response(reply({"0": "sprint"}, {"0": "rush"}), [0])
    assert [h.label_of(0) for h in hyps] == [R]
    with pytest.raises(HypothesisParseError):
        parse_response("I think they will yield.", [0])
    # fenced and list-form replies
    fenced = "Sure:\n```json\n" + reply({"0": "Constant_Velocity"}) + "\n```"
    assert parse_response(fenced, [0])[0].label_of(0) is CV
    listed = json.dumps([{"intents": [{"id": 0, "intent": "yield"}], "rationale": "x"}])
    assert parse_response(listed, [0])[0].label_of(0) is Y


def test_parse_response_drops_incomplete_and_duplicates():
    text = reply({"0": "yield"}, {"0": "yield"}, {"0": "rush", "1": "yield"}, {"1": "rush"})
    hyps = parse_response(text, [0, 1])
    assert len(hyps) == 1 and hyps[0].label_of(1) is Y


def test_hypothesis_roundtrip():
    h = Hypothesis({0: Y, 2: R}, "why")
    assert Hypothesis.from_dict(h.to_dict()) == h
    with pytest.raises(ValueError):
        Hypothesis({}, "")


class _Handler(BaseHTTPRequestHandler):
    mode = "ok"

    def do_POST(self):  # noqa: N802
        self.rfile.read(int(self.headers["Content-Length"]))
        if self.server.mode == "slow":
            time.sleep(0.5)
        content = reply({"0": "yield"}, {"0": "rush"}) if self.server.mode == "ok" else "no idea"
        body = json.dumps({"choices": [{"message": {"content": content}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        try:
            self.wfile.write(body)
        except (BrokenPipeError, ConnectionResetError):
            pass

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    srv = HTTPServer(("127.0.0.1", 0), _Handler)
    srv.mode = "ok"
    th = threading.Thread(target=srv.serve_forever, daemon=True)
    th.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def client(srv, timeout=2.0):
    url = f"http://127.0.0.1:{srv.server_address[1]}/v1/chat/completions"
    return RemoteGenerator(GeneratorConfig(backend="remote", endpoint=url, timeout_s=timeout))


def test_remote_happy_path(server):
    gen = client(server)
    res = gen.generate(obs([moving(0, 5, 5, 0.5, 0)]))
    assert not res.fallback and [h.label_of(0) for h in res.hypotheses] == [Y, R]
    assert gen.fallback_count == 0


def test_remote_timeout_falls_back(server):
    server.mode = "slow"
    gen = client(server, timeout=0.1)
    res = gen.generate(obs([moving(0, 5, 5, 0.5, 0)]))
    assert res.fallback and gen.fallback_count == 1
    assert [h.label_of(0) for h in res.hypotheses] == [CV, Y, R]


def test_remote_garbage_falls_back(server):
    server.mode = "garbage"
    gen = client(server)
    res = gen.generate(obs([moving(0, 5, 5, 0.5, 0)]))
    assert res.fallback and gen.fallback_count == 1 and res.raw_response == "no idea"


def test_remote_unreachable_falls_back():
    gen = RemoteGenerator(GeneratorConfig(backend="remote", endpoint="http://127.0.0.1:9/x", timeout_s=0.5))
    assert gen.generate(obs([moving(0, 5, 5, 0.5, 0)])).fallback


def test_generator_config_from_env(monkeypatch):
    monkeypatch.delenv("SAATT_LLM_ENDPOINT", raising=False)
    assert GeneratorConfig.from_env().backend == "heuristic"
    monkeypatch.setenv("SAATT_LLM_ENDPOINT", "http://example.invalid")
    assert GeneratorConfig.from_env().backend == "remote"
