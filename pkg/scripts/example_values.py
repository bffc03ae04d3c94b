"""Print the worked-example values over the Schreier barrier: nu, rho, restrictions, full approximations, stems."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from ellentuck import espace as es
from ellentuck.barrier import desc_from_alias
from ellentuck.finite import format_set


@dataclass
class ExampleConfig:
    barrier: str = "schreier"
    max_k: int = 8
    max_approx: int = 4
    ext_bound: int = 16


def _fmt(u) -> str:
    return "{" + ", ".join(format_set(w) for w in u) + "}"


def main(cfg: ExampleConfig) -> None:
    desc = desc_from_alias(cfg.barrier)
    W = es.top_member(desc)
    idx = W.index
    print("first nodes (nu -> sequence -> node):")
    for i in range(12):
        s = idx.nu_inv(i)
        print(f"  {i:3d}  {s}  {format_set(idx.w_node(s))}")
    print("\nrestrictions r_k:")
    for k in range(1, cfg.max_k + 1):
        print(f"  r_{k} = {_fmt(W.restrict(k))}")
    print("\nfull approximations:")
    for k in range(1, cfg.max_approx + 1):
        u = W.full_approx(k)
        print(f"  a_{k} = {_fmt(u)}  (= r_{len(u)})")
    print("\nstems and one-extensions:")
    for k in range(0, 5):
        u = W.restrict(k)
        stem = es.stem_of(desc, u).w_u
        ext = es.one_extensions(u, W, cfg.ext_bound)
        print(f"  u = {_fmt(u)}: stem {format_set(stem)}, one-extensions up to {cfg.ext_bound}: {_fmt(ext)}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--barrier", default=ExampleConfig.barrier)
    p.add_argument("--max-k", type=int, default=ExampleConfig.max_k)
    p.add_argument("--max-approx", type=int, default=ExampleConfig.max_approx)
    p.add_argument("--ext-bound", type=int, default=ExampleConfig.ext_bound)
    a = p.parse_args()
    main(ExampleConfig(a.barrier, a.max_k, a.max_approx, a.ext_bound))
