"""Time homogenize on random 2-colourings and confirm every answer with the exhaustive checker."""

from __future__ import annotations

import argparse
import random
import statistics
import time
from dataclasses import dataclass

from ellentuck import canonize as cz
from ellentuck import certcheck
from ellentuck.barrier import desc_from_alias, enumerate_barrier


@dataclass
class BenchConfig:
    barrier: str = "rank2"
    target: int = 4
    bound: int = 17
    trials: int = 100
    colors: int = 2
    seed: int = 3
    exhaustive: bool = True


def main(cfg: BenchConfig) -> None:
    desc = desc_from_alias(cfg.barrier)
    rng = random.Random(cfg.seed)
    elems = enumerate_barrier(desc, cfg.bound)
    times, explored_found, misses = [], 0, 0
    for _ in range(cfg.trials):
        table = {b: rng.randrange(cfg.colors) for b in elems}
        t0 = time.perf_counter()
        res = cz.homogenize(desc, table, cfg.target, cfg.bound)
        times.append(time.perf_counter() - t0)
        if isinstance(res, cz.NotFoundAtBound):
            misses += 1
            if cfg.exhaustive:
                found = certcheck.homogeneous_exists(range(cfg.bound + 1), table.__getitem__, elems, cfg.target)
                assert found is None, f"search missed {found}"
            continue
        explored_found += 1
        assert certcheck.check_homogeneous(res.selection, table.__getitem__, elems).ok
    print(f"{cfg.trials} trials on {len(elems)} elements, target {cfg.target}, bound {cfg.bound}")
    print(f"found {explored_found}, not found {misses}")
    print(f"time per trial: median {statistics.median(times) * 1e3:.2f} ms, max {max(times) * 1e3:.2f} ms")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--barrier", default=BenchConfig.barrier)
    p.add_argument("--target", type=int, default=BenchConfig.target)
    p.add_argument("--bound", type=int, default=BenchConfig.bound)
    p.add_argument("--trials", type=int, default=BenchConfig.trials)
    p.add_argument("--colors", type=int, default=BenchConfig.colors)
    p.add_argument("--seed", type=int, default=BenchConfig.seed)
    p.add_argument("--no-exhaustive", action="store_true", help="skip re-checking misses exhaustively")
    a = p.parse_args()
    main(BenchConfig(a.barrier, a.target, a.bound, a.trials, a.colors, a.seed, not a.no_exhaustive))
