"""Front canonization on AE_2 over [w]^2 for the three canonical relations, across truncation bounds.

Shows how many front elements survive and the bound the certificate settles
on; small bounds lose elements whose mixing evidence was cut off.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field

from ellentuck import canonize as cz
from ellentuck.barrier import desc_from_alias

FAMILIES = {"empty": cz.depth_family(0), "first": cz.depth_family(1), "identity": cz.Full}


@dataclass
class TruncationConfig:
    barrier: str = "rank2"
    length: int = 2
    bounds: list[int] = field(default_factory=lambda: [16, 20, 24, 30, 36])


def main(cfg: TruncationConfig) -> None:
    desc = desc_from_alias(cfg.barrier)
    print(f"{'relation':9} {'bound':>5} {'front':>5} {'kept':>5} {'cert bound':>10} {'matches':>7} {'irreducible':>11}")
    for name, make in FAMILIES.items():
        for bound in cfg.bounds:
            front = cz.approximations_of_length(desc, cfg.length, bound)
            inducing, _, _ = cz.build_phi(front, cz.family_for(front, desc, make))
            rel = cz.EquivRel.from_key(front, lambda u: inducing[u])
            cert = cz.canonize_front(desc, front, rel)
            if isinstance(cert, cz.Inconclusive):
                print(f"{name:9} {bound:>5} {len(front):>5}   inconclusive: {cert.reason}")
                continue
            match = all(cert.phi[u] == inducing[u] for u in cert.surviving)
            print(f"{name:9} {bound:>5} {len(front):>5} {len(cert.surviving):>5} {cert.bound:>10} "
                  f"{str(match):>7} {str(cert.report.all_true):>11}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--barrier", default=TruncationConfig.barrier)
    p.add_argument("--length", type=int, default=TruncationConfig.length)
    p.add_argument("--bounds", type=int, nargs="+", default=None)
    a = p.parse_args()
    cfg = TruncationConfig(a.barrier, a.length)
    if a.bounds:
        cfg.bounds = a.bounds
    main(cfg)
