"""Pedestrian intent hypotheses: trigger scheduling, heuristic and LLM-backed generation."""

from __future__ import annotations

import enum
import itertools
import json
import logging
import math
import os
import re
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .env import Observation

log = logging.getLogger(__name__)


class Intent(enum.Enum):
    # Declaration order is the heuristic enumeration order.
    CONSTANT_VELOCITY = "constant velocity"
    YIELD = "yield"
    RUSH = "rush"

    @classmethod
    def parse(cls, label: str) -> Intent:
        key = re.sub(r"[\s_\-]+", " ", str(label).strip().lower())
        for intent in cls:
            if intent.value == key:
                return intent
        raise ValueError(f"unknown intent label {label!r}")


_LABEL_BLURB = {
    Intent.CONSTANT_VELOCITY: "keeps walking at the observed velocity",
    Intent.YIELD: "is expected to slow down and let the wheelchair pass",
    Intent.RUSH: "is expected to speed up and pass first",
}


@dataclass(frozen=True)
class Hypothesis:
    intents: Mapping[int, Intent]
    rationale: str

    def __post_init__(self) -> None:
        if not self.rationale:
            raise ValueError("hypothesis rationale must be non-empty")

    def label_of(self, ped_id: int) -> Intent:
        return self.intents.get(ped_id, Intent.CONSTANT_VELOCITY)

    def key(self) -> tuple[tuple[int, str], ...]:
        return tuple(sorted((pid, it.value) for pid, it in self.intents.items()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "intents": {str(pid): it.value for pid, it in sorted(self.intents.items())},
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Hypothesis:
        return cls({int(k): Intent(v) for k, v in d["intents"].items()}, d["rationale"])


@dataclass
class TriggerState:
    t_last: int | None = None  # None: the generator has never been called
    t_period: int = 30
    d_risk: float = 3.0
    dt_min: int = 15

    def __post_init__(self) -> None:
        if self.t_period <= 0 or self.dt_min <= 0 or self.d_risk <= 0:
            raise ValueError("trigger parameters must be positive")
        if self.dt_min > self.t_period:
            raise ValueError("dt_min must not exceed t_period")


def should_invoke(trigger: TriggerState, t: int, min_ped_dist: float = math.inf) -> bool:
    """Periodic-or-risk trigger, gated by the minimum gap between generator calls."""
    if t < 0:
        raise ValueError("step index must be non-negative")
    if trigger.t_last is None:
        return True
    periodic = t >= trigger.t_last + trigger.t_period
    risky = min_ped_dist < trigger.d_risk
    return (periodic or risky) and (t - trigger.t_last >= trigger.dt_min)


def _template_rationale(assignment: Mapping[int, Intent]) -> str:
    if not assignment:
        return "no pedestrians visible"
    parts = [
        f"pedestrian {pid} labelled {intent.value}: {_LABEL_BLURB[intent]}"
        for pid, intent in sorted(assignment.items())
    ]
    return "; ".join(parts) + "."


def generate_heuristic(observation: Observation, k: int, seed: int = 0) -> list[Hypothesis]:
    """Enumerate label assignments in a fixed order and keep the first ``k``.

    ``seed`` is accepted for interface parity with sampling backends; the
    enumeration is a pure function of the visible pedestrian ids and ``k``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    ids = sorted(ped.id for ped in observation.pedestrians)
    if not ids:
        return [Hypothesis({}, "no pedestrians visible")]
    combos = itertools.islice(itertools.product(list(Intent), repeat=len(ids)), k)
    out = []
    for labels in combos:
        assignment = dict(zip(ids, labels))
        out.append(Hypothesis(assignment, _template_rationale(assignment)))
    return out


_SCHEMA_HINT = (
    '{"hypotheses": [{"intents": {"<pedestrian id>": "<label>"}, '
    '"rationale": "<one or two sentences>"}]}'
)


def build_prompt(observation: Observation, k: int) -> str:
    wc = observation.wheelchair
    peds = [
        {
            "id": p.id,
            "position": [round(float(p.position.x), 3), round(float(p.position.y), 3)],
            "velocity": [round(float(p.velocity.x), 3), round(float(p.velocity.y), 3)],
        }
        for p in sorted(observation.pedestrians, key=lambda p: p.id)
    ]
    width, height = observation.arena
    labels = ", ".join(f'"{it.value}"' for it in Intent)
    lines = [
        "You are the social reasoning module of an autonomous wheelchair.",
        "Predict how each pedestrian will behave over the next few seconds.",
        "",
        f"wheelchair: position=[{wc.position.x:.3f}, {wc.position.y:.3f}] "
        f"heading={wc.heading:.3f} rad speed={wc.linear_velocity:.3f} m/s",
        f"goal: [{observation.goal.x:.3f}, {observation.goal.y:.3f}]",
        f"arena: {width:g} m x {height:g} m rectangle bounded by four walls",
        f"pedestrians: {json.dumps(peds)}",
        "",
        f"Allowed labels for each pedestrian: {labels}.",
        f"Produce up to {k} distinct hypotheses. Each hypothesis assigns exactly one",
        "label to every pedestrian listed above and gives a short rationale.",
        "Answer with JSON only, using this schema:",
        _SCHEMA_HINT,
    ]
    return "\n".join(lines)


class HypothesisParseError(ValueError):
    """No valid hypothesis could be recovered from a generator reply."""


def _extract_json(text: str) -> Any:
    try:
        return json.loads(text)
    except (TypeError, json.JSONDecodeError):
        pass
    fence = re.search(r"```(?:json)?\s*(.*?)```", text or "", re.DOTALL)
    if fence:
        try:
            return json.loads(fence.group(1))
        except json.JSONDecodeError:
            pass
    for open_ch, close_ch in (("{", "}"), ("[", "]")):
        i, j = (text or "").find(open_ch), (text or "").rfind(close_ch)
        if 0 <= i < j:
            try:
                return json.loads(text[i : j + 1])
            except json.JSONDecodeError:
                continue
    raise HypothesisParseError("reply contains no parseable JSON")


def _coerce_intents(raw: Any) -> dict[int, Intent]:
    if isinstance(raw, Mapping):
        return {int(k): Intent.parse(v) for k, v in raw.items()}
    if isinstance(raw, list):
        out = {}
        for item in raw:
            pid = int(item["id"])
            if pid in out:
                raise ValueError("duplicate pedestrian id")
            out[pid] = Intent.parse(item.get("intent", item.get("label")))
        return out
    raise ValueError("intents must be an object or a list")


def parse_response(text: str, visible_ids: Iterable[int], k: int | None = None) -> list[Hypothesis]:
    payload = _extract_json(text)
    if isinstance(payload, Mapping):
        entries = payload.get("hypotheses")
    else:
        entries = payload
    if not isinstance(entries, list):
        raise HypothesisParseError("reply has no hypothesis list")

    wanted = set(visible_ids)
    seen: set = set()
    out: list[Hypothesis] = []
    for entry in entries:
        if not isinstance(entry, Mapping):
            continue
        try:
            intents = _coerce_intents(entry.get("intents", {}))
        except (ValueError, KeyError, TypeError):
            continue
        if set(intents) != wanted:
            continue
        rationale = str(entry.get("rationale") or "").strip() or _template_rationale(intents)
        hyp = Hypothesis(intents, rationale)
        if hyp.key() in seen:
            continue
        seen.add(hyp.key())
        out.append(hyp)
    if k is not None:
        out = out[:k]
    if not out:
        raise HypothesisParseError("no valid hypothesis survived filtering")
    return out


@dataclass(frozen=True)
class GeneratorConfig:
    k: int = 8
    temperature: float = 0.7
    backend: str = "heuristic"
    endpoint: str | None = None
    api_key: str | None = None
    model: str = "gpt-4o-mini"
    timeout_s: float = 20.0
    max_concurrent: int = 4

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.backend not in ("heuristic", "remote"):
            raise ValueError(f"unknown generator backend {self.backend!r}")

    @classmethod
    def from_env(cls, **overrides: Any) -> GeneratorConfig:
        endpoint = os.environ.get("SAATT_LLM_ENDPOINT") or None
        kwargs: dict[str, Any] = {
            "endpoint": endpoint,
            "api_key": os.environ.get("SAATT_LLM_API_KEY") or None,
            "backend": "remote" if endpoint else "heuristic",
        }
        if os.environ.get("SAATT_LLM_MODEL"):
            kwargs["model"] = os.environ["SAATT_LLM_MODEL"]
        kwargs.update(overrides)
        return cls(**kwargs)


@dataclass
class GenerationResult:
    hypotheses: list[Hypothesis]
    backend: str
    fallback: bool = False
    raw_response: str | None = None
    error: str | None = None


class HeuristicGenerator:
    backend = "heuristic"

    def __init__(self, config: GeneratorConfig) -> None:
        self.config = config

    def generate(self, observation: Observation) -> GenerationResult:
        return GenerationResult(generate_heuristic(observation, self.config.k), self.backend)


class RemoteGenerator:
    """OpenAI-style chat-completion client; falls back to the heuristic on any failure.

    One instance may be shared by threads; ``max_concurrent`` caps in-flight requests.
    """

    backend = "remote"

    def __init__(self, config: GeneratorConfig) -> None:
        if not config.endpoint:
            raise ValueError("remote backend requires an endpoint")
        self.config = config
        self._slots = threading.BoundedSemaphore(max(1, config.max_concurrent))
        self._lock = threading.Lock()
        self.fallback_count = 0

    def _post(self, prompt: str) -> str:
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": "Respond with JSON only."},
                {"role": "user", "content": prompt},
            ],
        }
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        req = urllib.request.Request(
            self.config.endpoint,
            data=json.dumps(body).encode("utf-8"),
            headers=headers,
            method="POST",
        )
        with self._slots:
            with urllib.request.urlopen(req, timeout=self.config.timeout_s) as resp:
                reply = json.loads(resp.read().decode("utf-8"))
        return reply["choices"][0]["message"]["content"]

    def generate(self, observation: Observation) -> GenerationResult:
        prompt = build_prompt(observation, self.config.k)
        visible = [p.id for p in observation.pedestrians]
        raw = None
        try:
            raw = self._post(prompt)
            if not visible:
                # Nothing to label; any reply collapses to the vacuous hypothesis.
                return GenerationResult(generate_heuristic(observation, 1), self.backend, raw_response=raw)
            hyps = parse_response(raw, visible, self.config.k)
            return GenerationResult(hyps, self.backend, raw_response=raw)
        except (OSError, urllib.error.URLError, TimeoutError, ValueError, KeyError, IndexError, TypeError) as exc:
            with self._lock:
                self.fallback_count += 1
            log.warning("remote generator failed at step %d (%s); using heuristic", observation.step, exc)
            return GenerationResult(
                generate_heuristic(observation, self.config.k),
                self.backend,
                fallback=True,
                raw_response=raw,
                error=f"{type(exc).__name__}: {exc}",
            )


def generate_remote(
    observation: Observation, config: GeneratorConfig, client: RemoteGenerator | None = None
) -> GenerationResult:
    return (client or RemoteGenerator(config)).generate(observation)


def make_generator(config: GeneratorConfig):
    if config.backend == "remote":
        return RemoteGenerator(config)
    return HeuristicGenerator(config)
