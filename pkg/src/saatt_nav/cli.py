"""Command-line interface: run, batch, analyze, plot, replay, log."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .harness import TrialRecord, read_records, replay, run_batch, run_trial, transparency_log, write_records
from .intent import GeneratorConfig
from .report import AnalysisError, analyze, write_report
from .scenarios import KINDS, generate

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_ANALYSIS = 0, 1, 2, 3


def parse_seeds(text: str) -> tuple[int, ...]:
    """'0-29', '3', '1,4,7' or a mix such as '0-4,9'."""
    seeds: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = part.split("-", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
    except ValueError as exc:
        raise ConfigError(f"bad seed list {text!r}") from exc
    if not seeds or min(seeds) < 0:
        raise ConfigError(f"bad seed list {text!r}")
    return tuple(dict.fromkeys(seeds))


def _split(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _config(args) -> RunConfig:
    overrides = {}
    cfg = load_config(args.config)
    if getattr(args, "backend", None):
        gen = GeneratorConfig.from_env(backend=args.backend, k=cfg.generator.k,
                                       temperature=cfg.generator.temperature)
        if args.backend == "remote" and not gen.endpoint:
            raise ConfigError("remote backend needs SAATT_LLM_ENDPOINT")
        overrides["generator"] = gen
    if getattr(args, "methods", None):
        overrides["methods"] = _split(args.methods)
    if getattr(args, "scenarios", None):
        overrides["scenarios"] = _split(args.scenarios)
    if getattr(args, "seeds", None):
        overrides["seeds"] = parse_seeds(args.seeds)
    if getattr(args, "parallel", None):
        overrides["parallel"] = args.parallel
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    return cfg.with_overrides(**overrides) if overrides else cfg


def cmd_run(args) -> int:
    cfg = _config(args)
    cfg = cfg.with_overrides(scenarios=(args.scenario,), methods=(args.method,))
    layout = generate(args.scenario, args.seed, cfg.scenario, cfg.world, cfg.planner)
    record = run_trial(cfg, layout, args.method)
    path = Path(cfg.output_dir) / f"trial_{args.scenario}_{record.method}_seed{args.seed:03d}.jsonl"
    write_records([record.to_json()], path)
    print(json.dumps({"record": str(path), "success": record.success, "steps": record.steps,
                      "metrics": record.metrics}, indent=1))
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = _config(args)
    result = run_batch(cfg)
    print(f"{result['n_records']} records -> {result['records']}")
    print((Path(cfg.output_dir) / "analysis.md").read_text(encoding="utf-8"))
    return EXIT_OK


def _load(path: str) -> list[TrialRecord]:
    return read_records(path)


def cmd_analyze(args) -> int:
    records = _load(args.records)
    report = analyze(records, args.alpha)
    out = Path(args.out or Path(args.records).parent)
    write_report(report, out)
    print((out / "analysis.md").read_text(encoding="utf-8"))
    return EXIT_OK


def _filter(records, args):
    if getattr(args, "scenario", None):
        records = [r for r in records if r.kind == args.scenario]
    if getattr(args, "seeds", None):
        keep = set(parse_seeds(args.seeds))
        records = [r for r in records if r.seed in keep]
    return records


def cmd_plot(args) -> int:
    from .plots import emit_plots

    cfg = load_config(args.config)
    records = _filter(_load(args.records), args)
    paths = emit_plots(records, args.out or Path(args.records).parent / "plots", cfg.planner,
                       (cfg.world.arena_width, cfg.world.arena_height))
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_replay(args) -> int:
    cfg = load_config(args.config)
    bad = 0
    records = _load(args.records)
    for r in records:
        if r.config_hash != cfg.config_hash():
            print(f"{r.kind}/{r.method}/seed {r.seed}: config hash {r.config_hash} != {cfg.config_hash()}")
            bad += 1
            continue
        rep = replay(r, cfg)
        if not rep.ok:
            print(f"{r.kind}/{r.method}/seed {r.seed}: FAIL {rep.detail}")
            bad += 1
    print(f"{len(records) - bad}/{len(records)} records replay exactly")
    return EXIT_OK if bad == 0 else EXIT_ANALYSIS


def cmd_log(args) -> int:
    cfg = load_config(args.config)
    records = [r for r in _filter(_load(args.records), args) if r.method == "saatt"]
    for r in records:
        print(f"# scenario {r.kind}, seed {r.seed}")
        for line in transparency_log(r, cfg.world.dt):
            print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="saatt-nav", description="Social wheelchair navigation benchmark")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, backend=True):
        sp.add_argument("--config", help="YAML config file")
        sp.add_argument("--out", help="output directory")
        if backend:
            sp.add_argument("--backend", choices=("heuristic", "remote"))

    sp = sub.add_parser("run", help="run a single trial")
    common(sp)
    sp.add_argument("--scenario", choices=KINDS, required=True)
    sp.add_argument("--method", choices=("saatt", "ablation", "astar", "sfm"), required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("batch", help="run the paired scenario x method x seed plan")
    common(sp)
    sp.add_argument("--methods", help="comma list, default all four")
    sp.add_argument("--scenarios", help="comma list, default A,B,C")
    sp.add_argument("--seeds", help="e.g. 0-29")
    sp.add_argument("--parallel", type=int)
    sp.set_defaults(func=cmd_batch)

    sp = sub.add_parser("analyze", help="statistics tables from stored records")
    sp.add_argument("records")
    sp.add_argument("--out")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.set_defaults(func=cmd_analyze)

    for name, func, helptext in (("plot", cmd_plot, "SVG overlays and radar summary"),
                                 ("log", cmd_log, "transparency log of SAATT records")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("records")
        common(sp, backend=False)
        sp.add_argument("--scenario", choices=KINDS)
        sp.add_argument("--seeds")
        sp.set_defaults(func=func)

    sp = sub.add_parser("replay", help="verify that records re-simulate exactly")
    sp.add_argument("records")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AnalysisError, ValueError, KeyError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
