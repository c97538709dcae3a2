"""Run the perfect-scheme pipeline over every generator family on up to n participants.

Families are all antichains of 2..max_size subsets of {1..n} with at most
max_generators members.  Prints one row per (family, p) with the verdict
and the size of the enumerated randomness space.

    python scripts/perfect_catalogue.py --participants 4 --primes 2 3
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from itertools import combinations

from probshare.access_structure import minimize_generators
from probshare.bridge import run_perfect_pipeline
from probshare.span_program import from_generators


@dataclass
class Config:
    participants: int = 4
    max_size: int = 3
    max_generators: int = 3
    primes: list[int] = field(default_factory=lambda: [2, 3])
    enumeration_limit: int = 10**6
    workers: int = 1


def antichains(cfg: Config):
    pool = [frozenset(c) for k in range(2, cfg.max_size + 1)
            for c in combinations(range(1, cfg.participants + 1), k)]
    seen = set()
    for r in range(1, cfg.max_generators + 1):
        for fam in combinations(pool, r):
            m = minimize_generators(fam)
            if len(m) == r and m not in seen:
                seen.add(m)
                yield m


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--participants", type=int, default=Config.participants)
    ap.add_argument("--max-size", type=int, default=Config.max_size)
    ap.add_argument("--max-generators", type=int, default=Config.max_generators)
    ap.add_argument("--primes", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args(argv)
    cfg = Config(a.participants, a.max_size, a.max_generators, a.primes, workers=a.workers)

    start = time.perf_counter()
    rows = failures = skipped = 0
    for fam in antichains(cfg):
        label = " | ".join(" ".join(map(str, sorted(B))) for B in fam)
        for p in cfg.primes:
            size = p ** from_generators(fam, p).dim
            if size > cfg.enumeration_limit:
                skipped += 1
                continue
            report = run_perfect_pipeline(fam, p, workers=cfg.workers)
            rows += 1
            failures += not report.passed
            verdict = "pass" if report.passed else f"FAIL at {report.failed_stage}"
            print(f"p={p}  |R|={size:>8}  {verdict:<8}  {label}")
    print(f"\n{rows} runs, {failures} failures, {skipped} skipped over the enumeration limit, "
          f"{time.perf_counter() - start:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
