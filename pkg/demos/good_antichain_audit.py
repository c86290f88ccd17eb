"""Build good diagonal coding antichains and show the checker catching defects."""
from bigramsey.antichain import build_good_dca, check_good
from bigramsey.coding_tree import CodingTree
from bigramsey.fraisse import template_by_name

TEMPLATES = [("rado", "S"), ("q", "S"), ("q_2", "U"), ("kpartite_2", "S")]


def main():
    for name, mode in TEMPLATES:
        tmpl = template_by_name(name)
        M = build_good_dca(CodingTree(tmpl, mode), 6)
        rep = check_good(M)
        print(f"{M!r}: {'good' if rep.ok else 'not good'}, k = {rep.k}")
        cut = check_good(M.without_top(0))
        flipped = check_good(build_good_dca(CodingTree(tmpl, mode), 6, flip_at=(2,)))
        print(f"  branch deleted: {'caught' if not cut.ok else 'missed'}")
        print(f"  orientation flipped at c_2: {'caught' if not flipped.ok else 'missed'}")
    print()
    print(check_good(build_good_dca(CodingTree(template_by_name("q"), "S"), 4, flip_at=(2,))).text())


if __name__ == "__main__":
    main()
