"""Render the sequence tree and the W tree of the Schreier barrier (ASCII and DOT)."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from ellentuck.barrier import desc_from_alias
from ellentuck.render import render_tree
from ellentuck.seqspace import space_index


@dataclass
class FigureConfig:
    barrier: str = "schreier"
    nodes: int = 26
    out_dir: Path | None = None


def main(cfg: FigureConfig) -> None:
    idx = space_index(desc_from_alias(cfg.barrier))
    seqs = [idx.nu_inv(i) for i in range(cfg.nodes)]
    sets = [idx.w_node(s) for s in seqs]
    outputs = {
        "sequence_tree.txt": render_tree(seqs, "ascii", side="seq"),
        "sequence_tree.dot": render_tree(seqs, "dot", side="seq"),
        "w_tree.txt": render_tree(sets, "ascii"),
        "w_tree.dot": render_tree(sets, "dot"),
    }
    if cfg.out_dir is None:
        print(outputs["sequence_tree.txt"])
        print(outputs["w_tree.txt"])
        return
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (cfg.out_dir / name).write_text(text)
        print(f"wrote {cfg.out_dir / name}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--barrier", default=FigureConfig.barrier)
    p.add_argument("--nodes", type=int, default=FigureConfig.nodes, help="tree nodes below the root")
    p.add_argument("--out-dir", type=Path, default=None, help="write files here instead of printing")
    a = p.parse_args()
    main(FigureConfig(a.barrier, a.nodes, a.out_dir))
