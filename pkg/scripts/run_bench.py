"""Threshold success-rate benchmark over a grid of (T, N) and profiles.

    python scripts/run_bench.py --trials 500 --out results/bench.csv
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from threshold_mldsa.stats import THRESHOLD_TABLE, render_csv, render_markdown, run_bench


@dataclass
class BenchConfig:
    configs: list[tuple[int, int]] = field(default_factory=lambda: [(3, 5), (5, 9), (8, 15)])
    profiles: tuple[str, ...] = ("p1",)
    trials: int = 500
    seed: int = 0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", action="append", help='"T,N", repeatable')
    ap.add_argument("--profile", action="append", choices=["p1", "p2", "p3"])
    ap.add_argument("--trials", type=int, default=BenchConfig.trials)
    ap.add_argument("--seed", type=int, default=BenchConfig.seed)
    ap.add_argument("--out", type=Path)
    a = ap.parse_args()
    cfg = BenchConfig(trials=a.trials, seed=a.seed)
    if a.config:
        cfg.configs = [tuple(int(x) for x in c.split(",")) for c in a.config]
    if a.profile:
        cfg.profiles = tuple(a.profile)

    reports = [r for p in cfg.profiles for r in run_bench(cfg.configs, cfg.trials, cfg.seed, p)]
    print(render_markdown(reports))
    print()
    print("reference (T, N): attempts / success / speedup")
    for T, n in cfg.configs:
        if (T, n) in THRESHOLD_TABLE:
            att, rate, sp = THRESHOLD_TABLE[(T, n)]
            print(f"  ({T},{n}): {att} / {rate} / {sp:.0e}")
    if a.out:
        a.out.parent.mkdir(parents=True, exist_ok=True)
        a.out.write_text(render_csv(reports))
        print(f"wrote {a.out}")


if __name__ == "__main__":
    main()
