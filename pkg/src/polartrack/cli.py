"""Command line entry point.

Subcommands::

    polartrack episode run   one seeded episode, optionally logged
    polartrack bench run     scenarios x arms suite, prints the report
    polartrack dataset gen   annotated expert episodes as JSONL files
    polartrack eval losses   offline loss kernels over logged episodes
    polartrack replay dump   flatten an episode log into a CSV table
    polartrack schema        print the JSONL episode schema

Exit codes: 0 ok, 1 configuration error, 2 runtime error. The
environment variables POLARTRACK_SEED and POLARTRACK_JOBS override the
seed and worker count when the flags are absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bench import run_bench
from .config import ConfigError, RunConfig, load_config, save_config
from .episodes import generate_dataset, read_episode, schema_description, write_episode
from .metrics import frame_tracked, reason_loss, total_loss, traj_loss
from .policy import PursuitState, advance_hold, execute_first, plan
from .runner import ARMS, run_episode
from .scenarios import SCENARIO_NAMES, ScenarioSpec, make_scenario
from .world import MotionLimits

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _env_int(name: str):
    v = os.environ.get(name)
    if v is None:
        return None
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"environment variable {name}={v!r} is not an integer")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = _env_int("POLARTRACK_SEED")
    return env if env is not None else 0


def _resolve_jobs(args, cfg_jobs: int = 1) -> int:
    if getattr(args, "jobs", None) is not None:
        return args.jobs
    env = _env_int("POLARTRACK_JOBS")
    return env if env is not None else cfg_jobs


def _load_or_default_config(args) -> RunConfig:
    if getattr(args, "config", None) is not None:
        return load_config(args.config)
    return RunConfig()


def cmd_episode_run(args) -> int:
    cfg = _load_or_default_config(args)
    seed = _resolve_seed(args)
    spec = ScenarioSpec(name=args.scenario)
    runtime = cfg.runtime_for_arm(args.arm)
    runtime.log_topk = args.log_topk
    world = make_scenario(spec, seed)
    log = run_episode(world, runtime, scenario=spec, seed=seed)
    o = log.outcome
    print(
        f"scenario={spec.name} arm={args.arm} seed={seed} "
        f"success={o.success} tr={o.tracking_rate:.3f} "
        f"collided={o.collided} el={o.episode_length} reason={o.reason}"
    )
    if args.out is not None:
        write_episode(log, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench_run(args) -> int:
    cfg = _load_or_default_config(args)
    if getattr(args, "seed", None) is not None:
        cfg.master_seed = args.seed
    else:
        env = _env_int("POLARTRACK_SEED")
        if env is not None:
            cfg.master_seed = env
    jobs = _resolve_jobs(args, cfg.jobs)
    arms = [args.arm] if args.arm is not None else None
    report, results = run_bench(cfg, jobs=jobs, out_dir=args.out, arms=arms)
    print(report.to_table())
    if args.out is not None:
        out = Path(args.out)
        (out / "report.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        (out / "report.txt").write_text(report.to_table() + "\n", encoding="utf-8")
        print(f"wrote episode logs and report under {out}")
    if any(r.error is not None for r in results):
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_dataset_gen(args) -> int:
    cfg = _load_or_default_config(args)
    seed = _resolve_seed(args)
    specs = [ScenarioSpec(name=n) for n in args.scenario]
    written = generate_dataset(
        specs,
        n_episodes=args.episodes,
        seed=seed,
        out_dir=args.out,
        randomize_rig=args.randomize_rig,
        rig=cfg.rig,
        grid=cfg.grid,
    )
    print(f"wrote {len(written)} episodes to {args.out}")
    return EXIT_OK


def _replay_acted_trajectories(log):
    """Rebuild the trajectories the policy produced by replaying the
    logged token sequence through the planner, including the dead
    reckoning applied after each executed command. Exact for episodes
    run with token reasoning; the token-less arm plans from raw readings
    the log does not carry, so its replay is an approximation."""
    header = log.header
    limits = MotionLimits(header.max_speed, header.max_turn)
    state = PursuitState(standoff=header.standoff)
    for f in log.frames:
        traj, state = plan(f.token, header.grid, state, limits, header.invalid_mode)
        state = advance_hold(state, execute_first(traj, limits))
        yield f, traj


def cmd_eval_losses(args) -> int:
    paths = []
    for p in args.episodes:
        p = Path(p)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.jsonl")))
        else:
            paths.append(p)
    if not paths:
        raise ConfigError("eval losses: no episode files found")

    grand_traj, grand_reason, n_frames = 0.0, 0.0, 0
    for path in paths:
        log = read_episode(path)
        k = log.header.grid.vocab_size
        ep_traj, ep_reason, n = 0.0, 0.0, 0
        for f, acted in _replay_acted_trajectories(log):
            ep_traj += traj_loss(acted, np.asarray(f.expert_traj))
            if f.logits_topk is None:
                raise ConfigError(
                    f"{path}: frames carry no logits; generate the dataset "
                    "with top-k logit logging to evaluate the reasoning loss"
                )
            logits = np.zeros(k)
            for i, v in f.logits_topk:
                logits[int(i)] = v
            ep_reason += reason_loss(logits, f.gt_token)
            n += 1
        print(
            f"{path.name}: frames={n} traj={ep_traj / n:.4f} "
            f"reason={ep_reason / n:.4f} "
            f"total={total_loss(ep_traj / n, ep_reason / n, args.text_loss):.4f}"
        )
        grand_traj += ep_traj
        grand_reason += ep_reason
        n_frames += n
    mt, mr = grand_traj / n_frames, grand_reason / n_frames
    print(
        f"overall: frames={n_frames} traj={mt:.4f} reason={mr:.4f} "
        f"total={total_loss(mt, mr, args.text_loss):.4f}"
    )
    return EXIT_OK


def cmd_replay_dump(args) -> int:
    log = read_episode(args.episode)
    rules = log.header.rules
    lines = [
        "step,agent_x,agent_y,agent_heading,target_x,target_y,"
        "token,confidence,mem0_a,mem0_b,mem0_c,tracked"
    ]
    for f in log.frames:
        mem_cols = (
            [repr(float(v)) for v in f.mem_slot0]
            if f.mem_slot0 is not None
            else ["", "", ""]
        )
        tracked = int(frame_tracked(f.target_dist, f.target_theta, rules))
        cols = [
            str(f.step),
            repr(f.agent_x),
            repr(f.agent_y),
            repr(f.agent_heading),
            repr(f.target_x),
            repr(f.target_y),
            str(f.token),
            repr(f.confidence),
            *mem_cols,
            str(tracked),
        ]
        lines.append(",".join(cols))
    text = "\n".join(lines) + "\n"
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {len(log.frames)} rows to {args.out}")
    return EXIT_OK


def cmd_schema(args) -> int:
    print(schema_description())
    return EXIT_OK


def cmd_config_dump(args) -> int:
    save_config(RunConfig(), args.out)
    print(f"wrote default config to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polartrack",
        description="Polar-token pursuit simulator and benchmark harness.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ep = sub.add_parser("episode", help="single-episode operations")
    eps = ep.add_subparsers(dest="sub", required=True)
    ep_run = eps.add_parser("run", help="run one seeded episode")
    ep_run.add_argument("--scenario", choices=SCENARIO_NAMES, default="stt")
    ep_run.add_argument("--arm", choices=ARMS, default="full")
    ep_run.add_argument("--seed", type=int, default=None, help="episode seed (default 0)")
    ep_run.add_argument("--config", default=None, help="run-config JSON file")
    ep_run.add_argument("--out", default=None, help="write the episode log here")
    ep_run.add_argument("--log-topk", type=int, default=0, dest="log_topk")
    ep_run.set_defaults(func=cmd_episode_run)

    be = sub.add_parser("bench", help="benchmark suite operations")
    bes = be.add_subparsers(dest="sub", required=True)
    be_run = bes.add_parser("run", help="run scenarios x arms and print the report")
    be_run.add_argument("--config", default=None, help="run-config JSON file")
    be_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    be_run.add_argument("--jobs", type=int, default=None, help="parallel episode workers")
    be_run.add_argument("--arm", choices=ARMS, default=None, help="run only this arm")
    be_run.add_argument("--out", default=None, help="directory for logs and reports")
    be_run.set_defaults(func=cmd_bench_run)

    ds = sub.add_parser("dataset", help="dataset operations")
    dss = ds.add_subparsers(dest="sub", required=True)
    ds_gen = dss.add_parser("gen", help="generate annotated expert episodes")
    ds_gen.add_argument(
        "--scenario", action="append", choices=SCENARIO_NAMES, required=True,
        help="may be given multiple times",
    )
    ds_gen.add_argument("--episodes", type=int, required=True)
    ds_gen.add_argument("--seed", type=int, default=None)
    ds_gen.add_argument("--config", default=None)
    ds_gen.add_argument("--out", required=True)
    ds_gen.add_argument("--randomize-rig", action="store_true", dest="randomize_rig")
    ds_gen.set_defaults(func=cmd_dataset_gen)

    ev = sub.add_parser("eval", help="offline evaluation")
    evs = ev.add_subparsers(dest="sub", required=True)
    ev_losses = evs.add_parser("losses", help="loss kernels over logged episodes")
    ev_losses.add_argument("episodes", nargs="+", help="episode files or directories")
    ev_losses.add_argument("--text-loss", type=float, default=0.0, dest="text_loss")
    ev_losses.set_defaults(func=cmd_eval_losses)

    rp = sub.add_parser("replay", help="replay operations")
    rps = rp.add_subparsers(dest="sub", required=True)
    rp_dump = rps.add_parser("dump", help="flatten an episode log to CSV")
    rp_dump.add_argument("--episode", required=True)
    rp_dump.add_argument("--out", required=True)
    rp_dump.set_defaults(func=cmd_replay_dump)

    sc = sub.add_parser("schema", help="print the JSONL episode schema")
    sc.set_defaults(func=cmd_schema)

    cf = sub.add_parser("config", help="configuration helpers")
    cfs = cf.add_subparsers(dest="sub", required=True)
    cf_dump = cfs.add_parser("dump", help="write the default run config")
    cf_dump.add_argument("--out", required=True)
    cf_dump.set_defaults(func=cmd_config_dump)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
