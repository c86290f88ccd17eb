"""Sweep every 2-coloring of the r_{k+1}-extensions on small rational instances."""
import time

from bigramsey.antichain import build_good_dca
from bigramsey.coding_tree import CodingTree
from bigramsey.fraisse import template_by_name
from bigramsey.ramsey_space import (curated_q_instance, find_instance, pigeonhole_search, pigeonhole_sweep,
                                   rightmost_coloring)


def report(label, inst):
    t0 = time.perf_counter()
    fails = pigeonhole_sweep(inst)
    secs = time.perf_counter() - t0
    print(f"{label}: case {'.'.join(inst.cases)}, k={inst.k}, {inst.n_extensions} extensions, "
          f"{len(inst.candidates)} candidates")
    print(f"  {1 << inst.n_extensions} colorings, {len(fails)} without a witness, {secs:.1f}s")
    res = pigeonhole_search(inst, rightmost_coloring(inst))
    print(f"  rightmost coloring: witness with {res.witness.n_coding} coding nodes, color {res.color}, "
          f"extensions {list(res.covered)}")


def main():
    report("a.i, 7 coding nodes", curated_q_instance(7))
    M = build_good_dca(CodingTree(template_by_name("q"), "S"), 8)
    report("a.ii, 8 coding nodes", find_instance(M, "a.ii"))


if __name__ == "__main__":
    main()
