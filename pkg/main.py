import argparse
import os
import sys
from pathlib import Path

import logfire
from dotenv import load_dotenv

# --- Load Environment Variables ---
dotenv_file = Path(__file__).parent / ".env"
load_dotenv(dotenv_file)

from harness.checkpoint import CheckpointError
from harness.config import ConfigValidationError, config_hash, load_config, override
from harness.runner import CHECKPOINT_FILE, repeat, resume_experiment, run_experiment, sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECKPOINT = 3


def _out_dir(args) -> Path:
    return Path(args.out or os.getenv("SSMDP_OUT_DIR", "runs"))


def _load(args):
    config = load_config(args.config)
    if os.getenv("SSMDP_LOG_EVERY"):
        config = override(config, "run.log_every", os.getenv("SSMDP_LOG_EVERY"))
    return config


# ==========================================================
# --- Commands ---
# ==========================================================

def cmd_run(args) -> int:
    config = _load(args)
    if args.sessions is not None:
        config = override(config, "run.sessions", args.sessions)
    if args.seed_sessions is not None:
        config = override(config, "seeds.sessions", args.seed_sessions)
    out = _out_dir(args)
    print(f"[RUN] agent={config.agent.kind} sessions={config.run.sessions} out={out}")
    result = run_experiment(config, out)
    last = result.rows[-1]
    print(f"[RUN]   - Finished: session {last.session}, moving average {last.moving_avg:.4f}")
    print(f"[RUN]   - Checkpoint saved to {out / CHECKPOINT_FILE}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args)
    values = [value.strip() for value in args.values.split(",") if value.strip()]
    out = _out_dir(args)
    print(f"[SWEEP] {args.param} over {values} with {args.workers} worker(s)")
    streams = sweep(config, args.param, values, workers=args.workers, out_dir=out)
    for label, rows in streams.items():
        print(f"[SWEEP]   - {args.param}={label}: final moving average {rows[-1].moving_avg:.4f}")
    print(f"[SWEEP]   - Comparison written to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_repeat(args) -> int:
    config = _load(args)
    out = _out_dir(args)
    print(f"[REPEAT] agent={config.agent.kind} runs={args.runs}")
    summary = repeat(config, args.runs, workers=args.workers, out_dir=out)
    print(f"[REPEAT]   - Mean transaction amount {summary.mean.mean():.4f} over {args.runs} runs")
    return EXIT_OK


def cmd_resume(args) -> int:
    config = _load(args) if args.config else None
    checkpoint_path = Path(args.checkpoint)
    out = Path(args.out) if args.out else checkpoint_path.parent
    print(f"[RESUME] {checkpoint_path} for {args.sessions} more sessions")
    result = resume_experiment(checkpoint_path, args.sessions, out_dir=out, config=config)
    last = result.rows[-1]
    print(f"[RESUME]   - Finished: session {last.session}, moving average {last.moving_avg:.4f}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load(args)
    print(f"[VALIDATE] {args.config} is valid (agent={config.agent.kind}, hash={config_hash(config).hex()[:16]})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssmdp", description="Reinforcement learning to rank in search sessions.")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Warm up, then learn for the configured number of sessions.")
    run.add_argument("--config", required=True)
    run.add_argument("--sessions", type=int)
    run.add_argument("--seed-sessions", type=int)
    run.add_argument("--out")
    run.set_defaults(handler=cmd_run)

    sweep_parser = commands.add_parser("sweep", help="One run per value of a config parameter.")
    sweep_parser.add_argument("--config", required=True)
    sweep_parser.add_argument("--param", required=True, help="section.field, e.g. agent.gamma")
    sweep_parser.add_argument("--values", required=True, help="Comma-separated values.")
    sweep_parser.add_argument("--workers", type=int, default=1)
    sweep_parser.add_argument("--out")
    sweep_parser.set_defaults(handler=cmd_sweep)

    repeat_parser = commands.add_parser("repeat", help="Rerun with distinct session seeds and average.")
    repeat_parser.add_argument("--config", required=True)
    repeat_parser.add_argument("--runs", type=int, default=50)
    repeat_parser.add_argument("--workers", type=int, default=1)
    repeat_parser.add_argument("--out")
    repeat_parser.set_defaults(handler=cmd_repeat)

    resume = commands.add_parser("resume", help="Continue a checkpointed run.")
    resume.add_argument("--checkpoint", required=True)
    resume.add_argument("--sessions", type=int, required=True)
    resume.add_argument("--config", help="Optional; must match the checkpoint's config.")
    resume.add_argument("--out")
    resume.set_defaults(handler=cmd_resume)

    validate = commands.add_parser("validate", help="Check a config file without running anything.")
    validate.add_argument("--config", required=True)
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    logfire.configure(
        environment=os.getenv("LOGFIRE_ENVIRONMENT", "local"),
        send_to_logfire="if-token-present",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigValidationError as e:
        print(f"[ERROR] Invalid config: {e}")
        return EXIT_CONFIG
    except CheckpointError as e:
        print(f"[ERROR] Unusable checkpoint: {e}")
        return EXIT_CHECKPOINT
    finally:
        logfire.force_flush()


if __name__ == "__main__":
    sys.exit(main())
