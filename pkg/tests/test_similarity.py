import itertools
import random

import pytest
from conftest import antichains, host
from oracles import forced_similarity, six_conditions

from bigramsey.coding_tree import FiniteTree, Node, tree_closure
from bigramsey.similarity import (
    canonical_code,
    find_similarity,
    is_plus_similar,
    is_similarity_map,
    similarity_violations,
)


def test_identity_is_a_similarity_map():
    for S in antichains(host("rado", 6), 2, 6)[:20]:
        assert is_similarity_map({t: t for t in S.nodes}, S, S)


def test_swapping_successors_is_not_a_similarity_map():
    root = Node.from_frags(0, [], 1)
    a, b = root.child(0), root.child(1)
    S = FiniteTree([root, a, b], {root: 0})
    f = {root: root, a: b, b: a}
    bad = similarity_violations(f, S, S)
    assert not is_similarity_map(f, S, S)
    assert "order" in bad and "passing types" in bad


def test_map_checker_agrees_with_condition_oracle():
    T = host("rado", 6)
    trees = antichains(T, 2, 6, 2)
    for S, U in itertools.product(trees, repeat=2):
        if [len(x) for x in (S.nodes, U.nodes)][0] != len(U.nodes):
            continue
        ls = sorted(S.nodes, key=lambda t: (t.level, t))
        lu = sorted(U.nodes, key=lambda t: (t.level, t))
        f = dict(zip(ls, lu))
        assert is_similarity_map(f, S, U) == six_conditions(f, S, U)


def test_find_similarity_identity_and_coding_count():
    trees = antichains(host("q", 6), 3, 6)
    S = trees[0]
    f = find_similarity(S, S)
    assert f == {t: t for t in S.nodes}
    one = next(t for t in trees if len(t.coding) == 1)
    two = next(t for t in trees if len(t.coding) == 2)
    assert find_similarity(one, two) is None


@pytest.mark.parametrize("name,size,depth", [("rado", 3, 8), ("q", 3, 8), ("kpartite_2", 2, 8)])
def test_code_equality_matches_search_and_forced_map(name, size, depth):
    trees = antichains(host(name, depth), size, depth)
    codes = [canonical_code(S) for S in trees]
    rng = random.Random(5)
    pairs = list(itertools.combinations(range(len(trees)), 2))
    if len(pairs) > 20000:
        pairs = rng.sample(pairs, 20000)
    for i, j in pairs:
        found = find_similarity(trees[i], trees[j]) is not None
        assert (codes[i] == codes[j]) == found
        assert found == forced_similarity(trees[i], trees[j])


def test_single_coding_node_code():
    T = host("rado", 4)
    S = tree_closure({T.coding[2]: 0}, {T.coding[2]: 0})
    code = canonical_code(S)
    assert code.n_coding == 1
    assert len(code.events) == 1 and code.events[0][1] == ((None, 0, ()),)


def test_codes_are_length_shift_invariant():
    T = host("rado", 6)
    a = tree_closure({T.coding[1]: 0}, {T.coding[1]: 0})
    b = tree_closure({T.coding[5]: 0}, {T.coding[5]: 0})
    assert canonical_code(a) == canonical_code(b)


def test_sixteen_codes_for_three_rationals():
    from bigramsey.degrees import enumerate_antichains, enumerations
    from conftest import chain
    T = host("q", 16)
    trees = [S for B in enumerations(chain(3)) for S in enumerate_antichains(B, T, 16)]
    codes = {canonical_code(S) for S in trees}
    assert len(codes) == 16
    reps = []
    for S in trees:
        if not any(find_similarity(R, S) for R in reps):
            reps.append(S)
    assert len(reps) == 16


def test_code_text_is_stable():
    T = host("q", 6)
    S = antichains(T, 2, 6, 2)[0]
    assert canonical_code(S).text == str(canonical_code(S))
    assert "C" in canonical_code(S).text


def test_canonical_code_needs_meet_closed_tree():
    a = Node.from_frags(0, [0, 1], 1)
    b = Node.from_frags(0, [1, 0], 1)
    with pytest.raises(ValueError):
        canonical_code(FiniteTree([a, b], {}))


def _coded_cuts(M):
    # a coding node of M with one live branch cut at its level
    out = []
    for c, col in zip(M.coding, M.colors):
        for t in M.tops:
            u = t.restrict(c.level)
            if u != c:
                out.append(tree_closure([c, u], {c: col}))
    return out


def test_plus_similarity_self_and_implies_similarity():
    from conftest import dca
    M = dca("rado", 4)
    trees = _coded_cuts(M)
    for S in trees:
        assert is_plus_similar(S, S, M)
    for S, U in itertools.combinations(trees, 2):
        if is_plus_similar(S, U, M):
            assert find_similarity(S, U) is not None


def test_plus_similarity_detects_successor_mismatch():
    from conftest import dca
    M = dca("rado", 4)
    trees = _coded_cuts(M)
    assert any(find_similarity(S, U) is not None and not is_plus_similar(S, U, M)
               for S, U in itertools.combinations(trees, 2))


def test_extension_property_predicate():
    from bigramsey.fraisse import ClassTemplate, template_by_name
    from bigramsey.similarity import extension_property

    for name in ("rado", "q", "q_2", "kpartite_3", "unrestricted:R,S", "free:R"):
        v = extension_property(template_by_name(name))
        assert v.holds is True and v.reason
    odd = ClassTemplate("other", template_by_name("q").signature, "other")
    assert extension_property(odd).holds is None
