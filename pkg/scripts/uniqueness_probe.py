"""Probe uniqueness of irreducible maps on small truncated fronts.

For every assignment of Collapse / one level / identity to the proper
restrictions of a small front, build phi; keep the maps that pass the
inner, Nash-Williams and (*) checks; group them by the partition they
induce.  Uniqueness predicts one map per partition.
"""

from __future__ import annotations

import argparse
import itertools
import time
from dataclasses import dataclass

from ellentuck import canonize as cz
from ellentuck import espace as es
from ellentuck.barrier import desc_from_alias


@dataclass
class ProbeConfig:
    barrier: str = "rank2"
    length: int = 2
    bound: int = 8
    max_front: int = 6


@dataclass
class ProbeResult:
    front_size: int
    restrictions: int
    families: int
    irreducible: int
    partitions: int
    conflicts: int
    seconds: float


def probe(cfg: ProbeConfig) -> ProbeResult:
    start = time.perf_counter()
    desc = desc_from_alias(cfg.barrier)
    front = cz.approximations_of_length(desc, cfg.length, cfg.bound)[: cfg.max_front]
    restr = sorted({u[:n] for u in front for n in range(len(u))})
    stems = {u: es.stem_of(desc, u).w_u for u in restr}
    makers = (cz.Collapse, cz.first_level, cz.Full)
    groups: dict = {}
    families = irreducible = 0
    for choice in itertools.product(range(len(makers)), repeat=len(restr)):
        families += 1
        phi, _, _ = cz.build_phi(front, {u: makers[c](stems[u]) for u, c in zip(restr, choice)})
        if not cz.verify_inner_nw_star(phi, front).all_true:
            continue
        irreducible += 1
        partition = tuple(tuple(phi[a] == phi[b] for b in front) for a in front)
        groups.setdefault(partition, set()).add(tuple(phi[v] for v in front))
    conflicts = sum(1 for maps in groups.values() if len(maps) > 1)
    return ProbeResult(len(front), len(restr), families, irreducible, len(groups), conflicts,
                       time.perf_counter() - start)


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--barrier", action="append", help="repeatable; default: rank2 and schreier")
    p.add_argument("--length", type=int, action="append", help="repeatable; default: 2 and 3")
    p.add_argument("--bound", type=int, default=None, help="default: 8, or 12 for Schreier length 3")
    p.add_argument("--max-front", type=int, default=ProbeConfig.max_front)
    a = p.parse_args()
    print(f"{'barrier':10} {'k':>2} {'front':>5} {'restr':>5} {'families':>8} {'irred':>6} {'parts':>5} {'conflicts':>9}")
    for name in a.barrier or ["rank2", "schreier"]:
        for k in a.length or [2, 3]:
            bound = a.bound or (12 if name == "schreier" and k == 3 else 8)
            r = probe(ProbeConfig(name, k, bound, a.max_front))
            print(f"{name:10} {k:>2} {r.front_size:>5} {r.restrictions:>5} {r.families:>8} {r.irreducible:>6} "
                  f"{r.partitions:>5} {r.conflicts:>9}   ({r.seconds:.2f}s)")
