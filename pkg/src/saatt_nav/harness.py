"""Trial execution loop, records, replay verification, batch runner and transparency log."""

from __future__ import annotations

import concurrent.futures as cf
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .baselines import MethodKind, NoPathError, ablation_policy, astar_follow, astar_plan, sfm_subgoal
from .config import RunConfig
from .core import Pose, Vec2
from .env import ControlCommand, Observation, WheelchairState, World
from .intent import Hypothesis, TriggerState, make_generator, should_invoke
from .metrics import compute as compute_metrics
from .planner import detect_group, plan, pure_pursuit
from .scenarios import Layout, TrialSpec, generate
from .scorer import score_hypotheses, select_best

log = logging.getLogger(__name__)

METHOD_ORDER = tuple(m.value for m in MethodKind)


@dataclass(frozen=True)
class Decision:
    waypoint: Vec2
    v_ref: float
    selected: int | None = None


# ------------------------------------------------------------------ policies


class SaattPolicy:
    """Triggered hypothesis generation, rollout scoring every step, bubble-aware planning."""

    def __init__(self, config: RunConfig, generator=None) -> None:
        self.config = config
        self.generator = generator or make_generator(config.generator)
        tc = config.trigger
        self.trigger = TriggerState(None, tc.t_period, tc.d_risk, tc.dt_min)
        self.hypotheses: list[Hypothesis] = []
        self.events: list[dict[str, Any]] = []
        self.failed = False
        w = config.world
        self.bounds = (w.arena_width, w.arena_height, w.wheelchair_radius)

    def decide(self, obs: Observation) -> Decision:
        cfg = self.config
        _, d_near = obs.nearest_pedestrian()
        event = None
        if should_invoke(self.trigger, obs.step, d_near):
            result = self.generator.generate(obs)
            self.hypotheses = result.hypotheses
            self.trigger.t_last = obs.step
            event = {
                "step": obs.step,
                "backend": result.backend,
                "fallback": result.fallback,
                "error": result.error,
                "raw_response": result.raw_response,
                "hypotheses": [h.to_dict() for h in result.hypotheses],
            }
            self.events.append(event)

        bubble = detect_group(obs.pedestrians, cfg.planner)
        scored = score_hypotheses(
            obs, self.hypotheses, cfg.rollout, bubble,
            world=cfg.world, gains=cfg.controller, v_nom=cfg.planner.v_nom,
        )
        best = select_best(scored)
        waypoint, v_ref = plan(obs, best.hypothesis, bubble, cfg.planner, self.bounds)
        if event is not None:
            p = obs.wheelchair.position
            event.update(
                selected_index=best.index,
                rationale=best.hypothesis.rationale,
                intents=best.hypothesis.to_dict()["intents"],
                position=[p.x, p.y],
                waypoint=[waypoint.x, waypoint.y],
                v_ref=v_ref,
            )
        return Decision(waypoint, v_ref, best.index)


class AblationPolicy:
    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.failed = False
        self.events: list[dict[str, Any]] = []

    def decide(self, obs: Observation) -> Decision:
        wp, v = ablation_policy(obs, self.config.planner)
        return Decision(wp, v)


class AStarPolicy:
    """Plan once at the first step over pedestrians frozen in place, then track the path."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.path: list[Vec2] | None = None
        self.failed = False
        self.events: list[dict[str, Any]] = []

    def decide(self, obs: Observation) -> Decision | None:
        cfg = self.config
        if self.path is None:
            try:
                self.path = astar_plan(obs.wheelchair.position, obs.goal, obs.pedestrians, cfg.world, cfg.grid).path
            except NoPathError as exc:
                log.info("A* found no path: %s", exc)
                self.failed = True
                return None
        wp, v = astar_follow(obs.wheelchair.position, self.path, cfg.grid.lookahead, cfg.planner.v_nom)
        return Decision(wp, v)


class SfmPolicy:
    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.failed = False
        self.events: list[dict[str, Any]] = []

    def decide(self, obs: Observation) -> Decision:
        wp, v = sfm_subgoal(obs, self.config.sfm, self.config.world, self.config.planner.v_nom)
        return Decision(wp, v)


def make_policy(method: MethodKind | str, config: RunConfig, generator=None):
    method = MethodKind.parse(method) if isinstance(method, str) else method
    if method is MethodKind.SAATT:
        return SaattPolicy(config, generator)
    if method is MethodKind.ABLATION:
        return AblationPolicy(config)
    if method is MethodKind.ASTAR:
        return AStarPolicy(config)
    return SfmPolicy(config)


# -------------------------------------------------------------------- records


@dataclass
class TrialRecord:
    config_hash: str
    method: str
    layout: dict[str, Any]
    states: list[list[float]]  # [x, y, theta, v] for t = 0..steps
    pedestrian_positions: list[list[list[float]]]
    commands: list[list[float]]  # [a, omega] for t = 0..steps-1
    waypoints: list[list[float]]
    v_refs: list[float]
    selected: list[int | None]
    events: list[dict[str, Any]]
    success: bool
    steps: int
    planning_failed: bool = False
    fallback_count: int = 0
    metrics: dict[str, Any] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.layout["kind"]

    @property
    def seed(self) -> int:
        return self.layout["seed"]

    def sort_key(self) -> tuple:
        return (self.kind, METHOD_ORDER.index(self.method), self.seed)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TrialRecord:
        return cls(**d)


def _initial_world(config: RunConfig, layout: Layout) -> World:
    wc = WheelchairState(Pose(layout.start, layout.initial_heading), 0.0, config.world.wheelchair_radius)
    return World(config.world, wc, layout.pedestrians, layout.goal)


def _ped_positions(world: World) -> list[list[float]]:
    return [[p.position.x, p.position.y] for p in world.pedestrians]


def run_trial(config: RunConfig, layout: Layout, method: MethodKind | str, generator=None) -> TrialRecord:
    """Run one trial until the goal, the step horizon, or (if enabled) the first collision."""
    method = MethodKind.parse(method) if isinstance(method, str) else method
    policy = make_policy(method, config, generator)
    world = _initial_world(config, layout)
    states = [list(world.state_tuple())]
    peds = [_ped_positions(world)]
    commands, waypoints, v_refs, selected = [], [], [], []
    success = False
    while True:
        if world.at_goal():
            success = True
            break
        if world.t >= config.world.max_steps:
            break
        obs = world.observe()
        decision = policy.decide(obs)
        if decision is None:
            break
        cmd = pure_pursuit(obs.wheelchair, decision.waypoint, decision.v_ref, config.controller)
        world.step(cmd)
        commands.append([cmd.a, cmd.omega])
        waypoints.append([decision.waypoint.x, decision.waypoint.y])
        v_refs.append(decision.v_ref)
        selected.append(decision.selected)
        states.append(list(world.state_tuple()))
        peds.append(_ped_positions(world))
        if config.world.stop_on_collision and world.collisions() > 0:
            break
    world.terminated = True

    record = TrialRecord(
        config_hash=config.config_hash(),
        method=method.value,
        layout=layout.to_dict(),
        states=states,
        pedestrian_positions=peds,
        commands=commands,
        waypoints=waypoints,
        v_refs=v_refs,
        selected=selected,
        events=policy.events,
        success=success,
        steps=world.t,
        planning_failed=policy.failed,
        fallback_count=sum(1 for e in policy.events if e.get("fallback")),
    )
    record.metrics = compute_metrics(record, layout, config.world, config.planner).to_dict()
    return record


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    first_mismatch: int | None = None
    detail: str = ""


def replay(record: TrialRecord, config: RunConfig) -> ReplayReport:
    """Re-step the recorded commands from the recorded layout and compare every state exactly."""
    layout = Layout.from_dict(record.layout)
    if layout.to_dict() != record.layout:
        return ReplayReport(False, 0, "layout does not round-trip")
    world = _initial_world(config, layout)
    if list(world.state_tuple()) != record.states[0] or _ped_positions(world) != record.pedestrian_positions[0]:
        return ReplayReport(False, 0, "initial state differs")
    if len(record.states) != len(record.commands) + 1:
        return ReplayReport(False, None, "state/command length mismatch")
    for t, (a, omega) in enumerate(record.commands):
        world.step(ControlCommand(a, omega))
        if list(world.state_tuple()) != record.states[t + 1]:
            return ReplayReport(False, t + 1, f"wheelchair state differs at step {t + 1}")
        if _ped_positions(world) != record.pedestrian_positions[t + 1]:
            return ReplayReport(False, t + 1, f"pedestrian state differs at step {t + 1}")
    metrics = compute_metrics(record, layout, config.world, config.planner).to_dict()
    if metrics != record.metrics:
        return ReplayReport(False, None, "stored metrics differ from recomputed metrics")
    return ReplayReport(True)


# ---------------------------------------------------------------------- batch


def run_spec(config: RunConfig, spec: TrialSpec, generator=None) -> TrialRecord:
    layout = generate(spec.kind, spec.seed, config.scenario, config.world, config.planner)
    return run_trial(config, layout, spec.method, generator)


def _worker(args: tuple[RunConfig, TrialSpec]) -> str:
    config, spec = args
    return run_spec(config, spec).to_json()


def plan_trials(config: RunConfig) -> list[TrialSpec]:
    methods = [MethodKind.parse(m).value for m in config.methods]
    methods.sort(key=METHOD_ORDER.index)
    return [TrialSpec(k, m, s) for k in sorted(config.scenarios) for m in methods for s in config.seeds]


def run_batch_records(config: RunConfig) -> list[str]:
    """JSON lines for every planned trial, sorted by (scenario, method, seed)."""
    specs = plan_trials(config)
    lines: list[str] = []
    if config.parallel <= 1:
        gen = make_generator(config.generator) if config.generator.backend == "remote" else None
        lines = [run_spec(config, s, gen).to_json() for s in specs]
    elif config.generator.backend == "remote":
        # Threads share one client so its concurrent-request cap holds batch-wide.
        gen = make_generator(config.generator)
        with cf.ThreadPoolExecutor(max_workers=config.parallel) as pool:
            lines = list(pool.map(lambda s: run_spec(config, s, gen).to_json(), specs))
    else:
        with cf.ProcessPoolExecutor(max_workers=config.parallel) as pool:
            lines = list(pool.map(_worker, [(config, s) for s in specs], chunksize=4))
    order = {(s.kind, s.method, s.seed): i for i, s in enumerate(specs)}
    keyed = []
    for line in lines:
        d = json.loads(line)
        keyed.append((order[(d["layout"]["kind"], d["method"], d["layout"]["seed"])], line))
    keyed.sort()
    return [line for _, line in keyed]


def write_records(lines: Iterable[str], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    return path


def read_records(path: str | Path) -> list[TrialRecord]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(TrialRecord.from_dict(json.loads(line)))
    return out


def run_batch(config: RunConfig, out_dir: str | Path | None = None) -> dict[str, Any]:
    """Run the paired plan, write ``records.jsonl`` and the analysis report to ``out_dir``."""
    from .report import analyze, write_report

    out = Path(out_dir or config.output_dir)
    lines = run_batch_records(config)
    records_path = write_records(lines, out / "records.jsonl")
    records = [TrialRecord.from_dict(json.loads(x)) for x in lines]
    report = analyze(records, config.alpha)
    write_report(report, out)
    return {"records": str(records_path), "n_records": len(records), "report": report}


# ---------------------------------------------------------------- transparency


def _fmt_intents(intents: dict[str, str]) -> str:
    if not intents:
        return "none visible"
    return ", ".join(f"ped {pid}={label}" for pid, label in sorted(intents.items(), key=lambda kv: int(kv[0])))


def transparency_log(record: TrialRecord, dt: float = 0.1) -> list[str]:
    """One human-readable line per generator event, in step order."""
    lines = []
    for e in sorted(record.events, key=lambda e: e["step"]):
        x, y = e["position"]
        wx, wy = e["waypoint"]
        line = (
            f"[t={e['step']:4d} | {e['step'] * dt:6.1f} s] pos=({x:.2f}, {y:.2f}) "
            f"intents: {_fmt_intents(e['intents'])} | waypoint=({wx:.2f}, {wy:.2f}) v_ref={e['v_ref']:.2f} "
            f"| rationale: {e['rationale']}"
        )
        if e.get("fallback"):
            line += " [fallback: heuristic]"
        lines.append(line)
    return lines


__all__: Sequence[str] = (
    "AStarPolicy", "AblationPolicy", "Decision", "ReplayReport", "SaattPolicy", "SfmPolicy",
    "TrialRecord", "make_policy", "plan_trials", "read_records", "replay", "run_batch",
    "run_batch_records", "run_spec", "run_trial", "transparency_log", "write_records",
)
