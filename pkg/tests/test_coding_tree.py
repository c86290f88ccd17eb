import itertools
import random

import pytest
from conftest import host
from hypothesis import given
from hypothesis import strategies as st

from bigramsey.coding_tree import (
    SCHEDULES,
    CodingTree,
    FiniteTree,
    InsufficientDepth,
    Node,
    build_tree,
    lex_compare,
    meet,
    passing_similar,
    passing_type,
    structure_from_coding,
    tree_closure,
)
from bigramsey.fraisse import TemplateError, realize, restrict_structure, template_by_name


def rado_node(bits: str) -> Node:
    return Node.from_frags(0, [int(b) for b in bits], 1)


def all_nodes(T, depth):
    return [t for n in range(min(depth, T.depth) + 1) for t in T.level(n)]


@pytest.mark.parametrize("name,mode,sizes", [
    ("rado", "S", [1, 2, 4, 8]),
    ("q", "S", [1, 2, 3, 4]),
    ("q_2", "U", [1, 2, 3, 4]),
    ("kpartite_2", "S", [2, 3]),
])
def test_level_sizes(name, mode, sizes):
    T = build_tree(template_by_name(name), mode, len(sizes) - 1)
    assert [len(lv) for lv in T.levels] == sizes


def test_q2_colors_and_cuts_realized():
    tmpl = template_by_name("q_2")
    T = build_tree(tmpl, "U", 3)
    assert set(T.colors[:4]) | set(build_tree(tmpl, "U", 4).colors) == {0, 1}
    deep = build_tree(tmpl, "U", 40)
    # every cut of every level-3 node, in each color, is met by a later coding node
    for u in deep.level(3):
        for col in (0, 1):
            assert any(u.is_prefix_of(c) and deep.colors[i] == col for i, c in enumerate(deep.coding))


@pytest.mark.parametrize("name,mode", [("rado", "S"), ("q", "S"), ("q_2", "U"), ("kpartite_2", "S"),
                                       ("kpartite_2", "U"), ("free:R,S", "S")])
@pytest.mark.parametrize("schedule", SCHEDULES)
def test_tree_invariants(name, mode, schedule):
    tmpl = template_by_name(name)
    T = build_tree(tmpl, mode, 6, schedule)
    for n in range(T.depth):
        lv = set(T.level(n))
        assert {t.restrict(n) for t in T.level(n + 1)} == lv
        assert T.coding[n] in lv
        assert sum(1 for t in lv if T.is_coding(t)) == 1
        stage = structure_from_coding(tmpl.signature, T.coding[:n + 1], T.colors[:n + 1])
        prev = structure_from_coding(tmpl.signature, T.coding[:n], T.colors[:n])
        assert stage == realize(prev, T.coding[n].descriptor(T.reduct), T.colors[n])
        assert restrict_structure(stage, range(n)) == prev
    for t in all_nodes(T, 6):
        assert len(t) == t.level + 1 and len(t.frags) == t.level
        assert T.contains(t)


def test_genericity_every_demand_met():
    # every (node, color) pair of the first levels is extended by a later coding node
    for name, mode in (("rado", "S"), ("q", "S"), ("kpartite_2", "S")):
        tmpl = template_by_name(name)
        T = build_tree(tmpl, mode, 12)
        for n in range(3):
            for u in T.level(n):
                assert any(u.is_prefix_of(c) for c in T.coding[n:]), (name, u)


def test_mode_errors():
    with pytest.raises(TemplateError):
        CodingTree(template_by_name("q_2"), "S")
    with pytest.raises(TemplateError):
        CodingTree(template_by_name("q"), "X")
    with pytest.raises(TemplateError, match="known"):
        build_tree(template_by_name("q"), "S", 3, "bogus")


def test_level_beyond_depth():
    with pytest.raises(InsufficientDepth):
        host("q", 3).level(5)


def test_passing_type_examples():
    t = rado_node("0110")
    assert passing_type(t, 1) == 1
    assert passing_type(t, 0) == 0
    T = host("q", 4)
    lowest = T.leftmost_extension(T.roots()[0], 2)
    assert passing_type(lowest, 0) == 1  # x < v_0
    with pytest.raises(IndexError):
        passing_type(t, 4)


def test_passing_types_reconstruct_literals():
    for name in ("rado", "q", "kpartite_2"):
        T = host(name, 4)
        for t in all_nodes(T, 4):
            assert tuple(passing_type(t, m) for m in range(t.level)) == t.descriptor().literals


def test_passing_similar_examples():
    s, t = rado_node("1"), rado_node("001")
    assert passing_similar(s, 0, s, 0)
    assert passing_similar(s, 0, t, 2)
    assert not passing_similar(s, 0, rado_node("000"), 2)


def test_passing_similar_is_an_equivalence():
    T = host("rado", 3)
    pts = [(t, m) for t in all_nodes(T, 3) for m in range(t.level)]
    for a, b in itertools.product(pts, repeat=2):
        assert passing_similar(*a, *b) == passing_similar(*b, *a)
    for a, b, c in itertools.product(pts[:12], repeat=3):
        if passing_similar(*a, *b) and passing_similar(*b, *c):
            assert passing_similar(*a, *c)


def test_lex_compare_examples():
    assert lex_compare(rado_node("01"), rado_node("10")) == -1
    s = rado_node("01")
    for ext in ("010", "011", "0101"):
        assert lex_compare(s, rado_node(ext)) == -1


def test_lex_order_is_total_and_antisymmetric():
    for name in ("rado", "q", "kpartite_2"):
        nodes = all_nodes(host(name, 4), 4)
        for s, t in itertools.product(nodes, repeat=2):
            a, b = lex_compare(s, t), lex_compare(t, s)
            assert a == -b
            assert (a == 0) == (s == t)


def test_meet_examples():
    assert meet(rado_node("011"), rado_node("010")) == rado_node("01")
    s = rado_node("0110")
    assert meet(s, s) == s


def test_meet_associative_commutative():
    nodes = all_nodes(host("rado", 3), 3)
    for a, b in itertools.product(nodes, repeat=2):
        assert meet(a, b) == meet(b, a)
    for a, b, c in itertools.product(nodes, repeat=3):
        assert meet(meet(a, b), c) == meet(a, meet(b, c))


def test_tree_closure_examples():
    a, b = rado_node("011"), rado_node("000")
    T = tree_closure([a, b])
    assert T.nodes == {rado_node("0"), a, b}
    single = tree_closure([a])
    assert single.nodes == {a}


@given(st.integers(0, 10**6))
def test_tree_closure_idempotent(seed):
    rng = random.Random(seed)
    nodes = all_nodes(host("rado", 6), 6)
    U = rng.sample(nodes, rng.randrange(1, 6))
    T = tree_closure(U)
    assert tree_closure(T.nodes).nodes == T.nodes
    assert T.is_meet_closed()


def test_node_label_round_trip():
    for t in all_nodes(host("kpartite_2", 4), 4):
        assert Node.from_label(t.label(), t.w) == t
    with pytest.raises(ValueError):
        Node.from_label("3:0|1.1", 1)


def test_exports_are_deterministic():
    T1, T2 = build_tree(template_by_name("q"), "S", 4), build_tree(template_by_name("q"), "S", 4)
    assert T1.to_dot() == T2.to_dot()
    assert T1.to_json() == T2.to_json()
    assert T1.to_dot().count("doublecircle") == 4
    assert '"format_version": 1' in T1.to_json()


def test_finite_tree_rejects_foreign_coding_node():
    with pytest.raises(ValueError):
        FiniteTree([rado_node("0")], {rado_node("1"): 0})
