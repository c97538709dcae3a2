"""Exact posteriors of the geometric-threshold scheme against Monte Carlo.

For each observation the exact posterior over secrets 1..cap is printed
next to Monte Carlo frequencies and their z-scores.  The ratio of posterior
to prior over all share values of a fixed finite set of participants is
reported as well, which shows how far a finite coalition can tilt the
secret's distribution.

    python scripts/tail_posterior.py --samples 1000000 --cap 8
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass, field

from probshare.tail_threshold import (conditional_secret_distribution, monte_carlo_posterior,
                                      posterior_ratio_range)


@dataclass
class Config:
    samples: int = 1_000_000
    cap: int = 8
    seed: int = 0
    observations: list[dict[int, int]] = field(default_factory=lambda: [
        {3: 3}, {2: 2, 3: 1}, {4: 1, 5: 1}, {2: 1, 3: 3, 4: 4},
    ])
    coalitions: list[list[int]] = field(default_factory=lambda: [[2], [2, 3], [3, 4, 5]])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--cap", type=int, default=Config.cap)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args(argv)
    cfg = Config(a.samples, a.cap, a.seed)

    worst = 0.0
    for obs in cfg.observations:
        post = conditional_secret_distribution(obs, cfg.cap)
        counts, matched = monte_carlo_posterior(obs, cfg.samples, cfg.seed, cfg.cap)
        print(f"observation {obs}: {matched} matching samples")
        for s in range(1, cfg.cap + 2):
            p = post.probabilities[s] if s <= cfg.cap else post.tail_mass
            freq = counts[s - 1] / matched if matched else float("nan")
            se = math.sqrt(float(p) * (1 - float(p)) / matched) if matched else float("nan")
            z = abs(freq - float(p)) / se if se else 0.0
            worst = max(worst, z)
            name = str(s) if s <= cfg.cap else f">{cfg.cap}"
            print(f"  s={name:<4} exact {str(p):<14} ({float(p):.6f})  mc {freq:.6f}  z {z:.2f}")
    print(f"worst z {worst:.2f}\n")

    print("posterior / prior range over every share vector of a coalition")
    for coalition in cfg.coalitions:
        lo, hi = posterior_ratio_range(coalition, cfg.cap)
        print(f"  {coalition}: [{float(lo):.4f}, {float(hi):.4f}]")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
