"""Run every config in scripts/configs and summarise the exit codes.

    python scripts/run_examples.py --out runs/
"""
import argparse
import json
import sys
import time
from pathlib import Path

from crowgates.experiments import run_experiment

HERE = Path(__file__).resolve().parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs", help="parent directory for per-config outputs")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("configs", nargs="*", help="config files (default: all in scripts/configs)")
    args = parser.parse_args()
    configs = [Path(c) for c in args.configs] or sorted((HERE / "configs").glob("*.json"))
    worst = 0
    for cfg in configs:
        out = Path(args.out) / cfg.stem
        start = time.perf_counter()
        code = run_experiment(cfg, out, threads=args.threads, stderr=sys.stderr)
        elapsed = time.perf_counter() - start
        status = ""
        if (out / "report.json").exists():
            report = json.loads((out / "report.json").read_text(encoding="utf-8"))
            status = ", ".join(f"{c['name']}={c['value']:.3g}" for c in report["tolerance"]["checks"])
        print(f"{cfg.stem:28s} exit={code} {elapsed:6.2f}s {status}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
