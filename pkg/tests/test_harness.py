import copy
import json
import logging

import pytest

from saatt_nav.cli import main, parse_seeds
from saatt_nav.config import ConfigError, RunConfig, dump_config, load_config
from saatt_nav.harness import (
    TrialRecord,
    read_records,
    replay,
    run_batch_records,
    run_trial,
    transparency_log,
    write_records,
)
from saatt_nav.plots import emit_plots
from saatt_nav.scenarios import generate

CFG = RunConfig()


@pytest.fixture(scope="module")
def b_records():
    lay = generate("B", 2)
    return {m: run_trial(CFG, lay, m) for m in ("saatt", "ablation", "astar", "sfm")}


def test_run_trial_scenario_a_succeeds():
    for m in ("saatt", "ablation", "astar", "sfm"):
        rec = run_trial(CFG, generate("A", 0), m)
        assert rec.success and rec.metrics["collision_count"] == 0
        assert len(rec.states) == rec.steps + 1 == len(rec.commands) + 1


def test_saatt_respects_bubble_in_b(b_records):
    assert b_records["saatt"].metrics["bubble_intrusion_steps"] == 0
    assert b_records["saatt"].success


def test_replay_exact_and_detects_tampering(b_records):
    for rec in b_records.values():
        assert replay(rec, CFG).ok
    bad = copy.deepcopy(b_records["saatt"])
    bad.commands[5][1] += 1e-12
    rep = replay(bad, CFG)
    assert not rep.ok and rep.first_mismatch == 6
    bad = copy.deepcopy(b_records["sfm"])
    bad.metrics["path_length"] += 1.0
    assert not replay(bad, CFG).ok


def test_records_roundtrip_jsonl(tmp_path, b_records):
    lines = [r.to_json() for r in b_records.values()]
    path = write_records(lines, tmp_path / "r.jsonl")
    back = read_records(path)
    assert [r.to_json() for r in back] == lines


def test_generator_call_gaps_in_trial_logs():
    for seed in range(5):
        rec = run_trial(CFG, generate("C", seed), "saatt")
        steps = [e["step"] for e in rec.events]
        assert steps[0] == 0
        assert all(b - a >= CFG.trigger.dt_min for a, b in zip(steps, steps[1:]))


def test_transparency_log_order_and_fallback_flag(b_records):
    rec = copy.deepcopy(b_records["saatt"])
    events = rec.events[:3]
    assert len(events) == 3
    events[1]["fallback"] = True
    rec.events = [events[2], events[0], events[1]]
    lines = transparency_log(rec)
    assert len(lines) == 3
    assert [int(line.split("|")[0].split("=")[1]) for line in lines] == sorted(e["step"] for e in events)
    assert [line.endswith("[fallback: heuristic]") for line in lines] == [False, True, False]
    assert "pedestrian 0 labelled" in lines[0]


def test_batch_plan_filtered():
    cfg = CFG.with_overrides(methods=("saatt", "astar"), scenarios=("B",), seeds=tuple(range(30)))
    lines = run_batch_records(cfg.with_overrides(seeds=(0, 1)))
    assert len(lines) == 4
    from saatt_nav.harness import plan_trials
    assert len(plan_trials(cfg)) == 60
    assert len(plan_trials(CFG)) == 360


def test_config_yaml_roundtrip_and_errors(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text(dump_config(CFG))
    assert load_config(p).config_hash() == CFG.config_hash()
    p.write_text("motion_planner:\n  m_bubble: 0.4\n")
    cfg = load_config(p)
    assert cfg.planner.m_personal == cfg.planner.m_group == 0.2
    for bad in ("motion_planner:\n  d_stop: 2.0\n", "motion_planner:\n  nope: 1\n",
                "galaxy: {}\n", "environment: [\n", "run:\n  seeds: 3\n  wat: 1\n"):
        p.write_text(bad)
        with pytest.raises(ConfigError):
            load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_config_hash_excludes_credentials():
    from saatt_nav.intent import GeneratorConfig
    a = CFG.with_overrides(generator=GeneratorConfig(api_key="secret"))
    assert a.config_hash() == CFG.config_hash()
    assert "secret" not in json.dumps(a.parameters())


def test_parse_seeds():
    assert parse_seeds("0-3,7") == (0, 1, 2, 3, 7)
    with pytest.raises(ConfigError):
        parse_seeds("x")


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "B", "--method", "saatt", "--seed", "1", "--out", str(out)]) == 0
    rec = out / "trial_B_saatt_seed001.jsonl"
    assert rec.exists()
    assert main(["replay", str(rec)]) == 0
    assert main(["log", str(rec)]) == 0
    assert "rationale:" in capsys.readouterr().out

    bad = tmp_path / "bad.yaml"
    bad.write_text("motion_planner:\n  v_slow: 9.0\n")
    assert main(["run", "--scenario", "A", "--method", "sfm", "--config", str(bad)]) == 1
    assert main(["analyze", str(tmp_path / "nope.jsonl")]) == 2

    # methods run on different seeds cannot be paired
    r1 = run_trial(CFG, generate("B", 0), "saatt").to_json()
    r2 = run_trial(CFG, generate("B", 1), "sfm").to_json()
    mixed = write_records([r1, r2], tmp_path / "mixed.jsonl")
    assert main(["analyze", str(mixed)]) == 3


def test_cli_batch_small(tmp_path):
    out = tmp_path / "b"
    code = main(["batch", "--methods", "saatt,astar", "--scenarios", "A", "--seeds", "0-2", "--out", str(out)])
    assert code == 0
    assert len(read_records(out / "records.jsonl")) == 6
    assert (out / "analysis.md").exists() and (out / "analysis.json").exists()


def test_plots_empty_and_markers(tmp_path, b_records, caplog):
    with caplog.at_level(logging.WARNING):
        assert emit_plots([], tmp_path / "none") == []
    assert not (tmp_path / "none").exists()
    assert "nothing to plot" in caplog.text

    paths = emit_plots(list(b_records.values()), tmp_path / "p")
    assert [p.name for p in paths] == ["overlay_B_seed002.svg"]
    svg = paths[0].read_text()
    n = len(b_records["saatt"].events)
    assert svg.count('id="saatt-event-') == n
    again = emit_plots(list(b_records.values()), tmp_path / "q")[0].read_text()
    assert again == svg


def test_record_from_dict_roundtrip(b_records):
    rec = b_records["astar"]
    assert TrialRecord.from_dict(json.loads(rec.to_json())).to_json() == rec.to_json()
