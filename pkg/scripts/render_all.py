"""Render portraits, traces and focal meshes for every config into an output directory."""

import argparse
from pathlib import Path

from linecong.cli import run

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", type=Path, default=ROOT / "configs")
    ap.add_argument("--out", type=Path, default=ROOT / "out")
    ap.add_argument("--seeds", type=int, default=6)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for cfg in sorted(args.configs.glob("*.cfg")):
        stem = str(args.out / cfg.stem)
        codes = [run(["portrait", str(cfg), "--out", stem + ".svg", "--seeds", str(args.seeds)]),
                 run(["trace", str(cfg), "--out", stem]),
                 run(["analyze", str(cfg), "--report", stem + ".report"])]
        print(f"{cfg.stem}: exit codes {codes}")


if __name__ == "__main__":
    main()
