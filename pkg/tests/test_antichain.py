import itertools
import random

import pytest
from conftest import antichains, dca, host
from hypothesis import given
from hypothesis import strategies as st

from bigramsey.antichain import (
    GoodDCA,
    build_good_dca,
    canonical_envelope,
    check_good,
    envelope_violations,
    is_diagonal,
    represented_structure,
    splitting_predecessor,
)
from bigramsey.coding_tree import CodingTree, FiniteTree, InsufficientDepth, Node, tree_closure
from bigramsey.fraisse import template_by_name
from bigramsey.fraisse import ordered_isomorphic, one_types_over, restrict_structure
from bigramsey.similarity import canonical_code, find_similarity

GOOD_TEMPLATES = [("rado", "S"), ("q", "S"), ("q_2", "U"), ("kpartite_2", "S")]


def rnode(bits):
    return Node.from_frags(0, [int(b) for b in bits], 1)


def sub_antichain_tree(M, idx):
    cmap = {M.coding[i]: M.colors[i] for i in idx}
    return tree_closure(cmap, cmap)


# -- diagonal trees -------------------------------------------------------------


def test_single_coding_node_is_diagonal():
    c = rnode("0110")
    assert is_diagonal(FiniteTree([c], {c: 0}))


def test_two_splitting_nodes_on_a_level():
    nodes = [rnode(b) for b in ("", "0", "1", "00", "01", "10", "11")]
    assert not is_diagonal(FiniteTree(nodes, {}))


@pytest.mark.parametrize("name,mode", GOOD_TEMPLATES)
def test_builder_sub_antichains_are_diagonal(name, mode):
    M = dca(name, 8, mode)
    rng = random.Random(11)
    for _ in range(125):
        idx = sorted(rng.sample(range(M.n_coding), rng.randrange(1, M.n_coding + 1)))
        assert is_diagonal(sub_antichain_tree(M, idx))
    assert is_diagonal(M.tree())


def test_represented_structure_examples():
    T = host("rado", 6)
    one = tree_closure({T.coding[3]: 0}, {T.coding[3]: 0})
    s = represented_structure(one, T.template.signature)
    assert s.size == 1 and s.unary == (0,)
    for i, j in itertools.combinations(range(6), 2):
        if T.coding[j].frag(i) == 1 and not T.coding[i].is_prefix_of(T.coding[j]):
            S = tree_closure({T.coding[i]: 0, T.coding[j]: 0}, {T.coding[i]: 0, T.coding[j]: 0})
            assert represented_structure(S, T.template.signature).holds("E", 0, 1)
            break
    with pytest.raises(ValueError):
        represented_structure(FiniteTree([rnode("0")], {}), T.template.signature)


@pytest.mark.parametrize("name", ["rado", "q", "kpartite_2"])
def test_similar_trees_represent_isomorphic_structures(name):
    T = host(name, 8)
    trees = antichains(T, 3, 8, 2)
    rng = random.Random(2)
    pairs = list(itertools.combinations(trees, 2))
    checked = 0
    for S, U in rng.sample(pairs, min(len(pairs), 4000)):
        if find_similarity(S, U) is not None:
            assert ordered_isomorphic(represented_structure(S, T.template.signature),
                                      represented_structure(U, T.template.signature))
            checked += 1
    assert checked >= 20


# -- good DCAs ---------------------------------------------------------------------


def test_splitting_predecessor_smallest_case():
    M = dca("q", 1)
    s = splitting_predecessor(M, 0)
    assert s.is_prefix_of(M.coding[0])
    assert s == M.splitting_nodes()[-1]


@pytest.mark.parametrize("name,mode", GOOD_TEMPLATES)
def test_splitting_predecessor_right_successor_leads_to_coding_node(name, mode):
    M = dca(name, 10, mode)
    for n, c in enumerate(M.coding):
        s = splitting_predecessor(M, n)
        assert s.is_prefix_of(c)
        left, right = M.successors_of(s)
        assert right.is_prefix_of(c) and not left.is_prefix_of(c)


def test_splitting_predecessor_errors():
    M = dca("q", 3)
    with pytest.raises(IndexError):
        M.splitting_predecessor(3)


def test_q_three_is_good_with_k_zero():
    rep = check_good(dca("q", 3))
    assert rep.ok and rep.k == 0


def test_rado_widths_match_type_counts():
    M = dca("rado", 3)
    rep = check_good(M)
    assert rep.ok
    for n in range(rep.k, M.n_coding):
        assert len(M.restriction(M.coding[n].level + 1)) == 2 ** (n + 1)


@pytest.mark.parametrize("name,mode", GOOD_TEMPLATES)
def test_widths_match_admissible_types(name, mode):
    M = dca(name, 6, mode)
    rep = check_good(M)
    for n in range(rep.k, M.n_coding):
        want = one_types_over(M.template, restrict_structure(M.structure, range(n + 1)), M.reduct)
        assert len(M.restriction(M.coding[n].level + 1)) == len(want)


@pytest.mark.parametrize("name,mode", GOOD_TEMPLATES)
def test_deleting_any_branch_is_caught(name, mode):
    M = dca(name, 5, mode)
    for i in range(len(M.tops)):
        rep = check_good(M.without_top(i))
        assert not rep.passed(3)


@pytest.mark.parametrize("name,mode", GOOD_TEMPLATES)
def test_flipping_orientation_is_caught(name, mode):
    tmpl = template_by_name(name)
    for at in range(5):
        M = build_good_dca(CodingTree(tmpl, mode), 5, flip_at=(at,))
        assert not check_good(M).passed(1)


def test_left_reached_coding_node_reports_witness():
    M = build_good_dca(CodingTree(template_by_name("q"), "S"), 4, flip_at=(2,))
    rep = check_good(M)
    assert any("c_2" in p for p in rep.cond1)
    assert "FAIL" in rep.text()


def test_good_dca_value_semantics():
    M = dca("q", 4)
    assert M.prefix(4) == M
    assert M.is_below(M)
    assert hash(M.prefix(3)) == hash(dca("q", 4).prefix(3))
    with pytest.raises(InsufficientDepth):
        M.restriction(M.top_level + 1)
    with pytest.raises(ValueError):
        GoodDCA(M.host, M.coding, M.colors, [])


def test_builder_respects_max_depth():
    with pytest.raises(InsufficientDepth):
        build_good_dca(CodingTree(template_by_name("rado"), "S"), 6, max_depth=5)


# -- envelopes ------------------------------------------------------------------------


def test_envelope_single_rado_node():
    M = dca("rado", 6)
    for j in range(4):
        E = canonical_envelope([M.coding[j]], M)
        assert len(E.max_nodes()) == 2
        assert envelope_violations(E, M) == []


def test_envelope_rado_edge_has_width_four():
    M = dca("rado", 6)
    s = M.structure
    i, j = next((i, j) for i, j in itertools.combinations(range(6), 2) if s.holds("E", i, j))
    E = canonical_envelope([M.coding[i], M.coding[j]], M)
    assert len(E.max_nodes()) == 4
    assert sorted(k for k, _ in E.type_table()) == sorted(
        (None if M.reduct else 0, t.literals) for t in one_types_over(M.template, restrict_structure(s, [i, j])))


def test_envelope_rejects_foreign_nodes():
    M = dca("q", 4)
    with pytest.raises(ValueError):
        canonical_envelope([M.tops[0]], M)
    with pytest.raises(ValueError):
        canonical_envelope([], M)


@pytest.mark.parametrize("name", ["rado", "q"])
@given(data=st.data())
def test_envelope_laws(name, data):
    M = dca(name, 10)
    idx = data.draw(st.lists(st.integers(0, M.n_coding - 1), min_size=1, max_size=4, unique=True))
    A = [M.coding[i] for i in sorted(idx)]
    E = canonical_envelope(A, M)
    assert set(A) <= E.tree().nodes
    assert envelope_violations(E, M) == []


def test_envelope_reports_and_exports():
    M = dca("q", 5)
    E = canonical_envelope([M.coding[1], M.coding[3]], M)
    assert "splitting predecessor of c_0" in E.report()
    assert "fillcolor=lightgrey" in E.to_dot()


@pytest.mark.parametrize("name", ["rado", "q"])
def test_similar_antichains_get_similar_envelopes(name):
    # antichains none of whose splitting nodes is a splitting predecessor of M
    M = dca(name, 8)
    sps = {M.splitting_predecessor(i) for i in range(M.n_coding)}
    groups = {}
    for r in (1, 2, 3):
        for idx in itertools.combinations(range(M.n_coding), r):
            S = sub_antichain_tree(M, idx)
            if any(s in sps for s in S.splitting_nodes()):
                continue
            E = canonical_envelope([M.coding[i] for i in idx], M)
            groups.setdefault(canonical_code(S), set()).add(canonical_code(E.tree()))
    assert len(groups) >= 3
    assert all(len(codes) == 1 for codes in groups.values())


@pytest.mark.parametrize("name", ["rado", "q"])
def test_deleting_a_top_level_envelope_node_is_caught(name):
    import dataclasses

    M = dca(name, 6)
    checked = 0
    for r in (1, 2, 3):
        for idx in itertools.combinations(range(M.n_coding), r):
            E = canonical_envelope([M.coding[i] for i in idx], M)
            for t in E.added:
                if t.level != E.top:
                    continue
                cut = dataclasses.replace(E, extensions=[x for x in E.extensions if x != t],
                                          witnesses=[[x for x in w if x != t] for w in E.witnesses])
                assert envelope_violations(cut, M), (idx, t)
                checked += 1
    assert checked >= 100


@pytest.mark.parametrize("name,mode", [("q", "S"), ("rado", "S")])
def test_sub_antichains_in_the_census_are_good(name, mode):
    from bigramsey.ramsey_space import sub_dca_census

    M = dca(name, 5, mode)
    census = sub_dca_census(M, 3 if name == "q" else 2, limit=60)
    for N in census:
        rep = check_good(N)
        assert rep.ok, rep.text()
