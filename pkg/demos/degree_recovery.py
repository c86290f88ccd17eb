"""Color copies of a 2-chain and find a sub-antichain where each type is monochromatic."""
from bigramsey.antichain import build_good_dca
from bigramsey.coding_tree import CodingTree
from bigramsey.degrees import degree_recovery_demo
from bigramsey.fraisse import FiniteStructure, template_by_name


def main():
    q = template_by_name("q")
    M = build_good_dca(CodingTree(q, "S"), 6)
    pair = FiniteStructure.build(q.signature, (0, 0), [("<", 0, 1)])
    index = {c: i for i, c in enumerate(M.coding)}
    print("coloring by similarity type")
    print(degree_recovery_demo(pair, M).text())
    print()
    print("coloring by the parity of the lower vertex")
    print(degree_recovery_demo(pair, M, coloring=lambda cp: index[cp[0]] % 2).text())


if __name__ == "__main__":
    main()
