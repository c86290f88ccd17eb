import random

import pytest
from conftest import chain, graph
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_isomorphic, brute_types

from bigramsey.fraisse import (
    FiniteStructure,
    OneTypeDescriptor,
    Signature,
    StructureError,
    TemplateError,
    dump_structure,
    one_types_over,
    ordered_isomorphic,
    parse_structure,
    realize,
    restrict_structure,
    template_by_name,
    validate_structure,
)

TEMPLATES = ["rado", "q", "q_2", "kpartite_2", "kpartite_3", "unrestricted:R", "free:R,S"]


def random_member(tmpl, n, rng):
    s = FiniteStructure.build(tmpl.signature, ())
    for _ in range(n):
        types = one_types_over(tmpl, s)
        s = realize(s, types[rng.randrange(len(types))])
    return s


def test_signature_needs_unary():
    with pytest.raises(StructureError):
        Signature(())


def test_symbol_order_negations_first():
    sig = template_by_name("kpartite_2").signature
    order = sig.symbol_order
    neg = [i for i, s in enumerate(order) if s.startswith("~")]
    pos = [i for i, s in enumerate(order) if not s.startswith("~")]
    assert max(neg) < min(pos)
    assert len(neg) == len(pos) == 3


def test_valid_minimal_structure(rado):
    assert validate_structure(rado.signature, graph(1)) == []


def test_two_unary_colors_is_a_violation(rado):
    s = FiniteStructure(rado.signature, ((0, 0),), {})
    assert any("exactly one unary" in p for p in validate_structure(rado.signature, s))


def test_out_of_range_vertex(rado):
    s = FiniteStructure(rado.signature, (0, 0, 0), {"E": frozenset({(0, 5), (5, 0)})})
    assert any("out of range" in p for p in validate_structure(rado.signature, s))


def test_rado_two_vertex_base_has_four_types(rado):
    assert len(one_types_over(rado, graph(2, [(0, 1)]))) == 4


def test_order_three_chain_has_four_cuts(q):
    assert len(one_types_over(q, chain(3))) == 4


def test_kpartite_excludes_intra_part_edge():
    kp = template_by_name("kpartite_2")
    base = FiniteStructure.build(kp.signature, (0,))
    got = {(t.unary, t.literals) for t in one_types_over(kp, base)}
    assert (0, (1,)) not in got
    assert got == brute_types(kp, base, realize)


@pytest.mark.parametrize("name", TEMPLATES)
def test_types_match_brute_force(name):
    tmpl = template_by_name(name)
    rng = random.Random(7)
    for n in range(4 if tmpl.signature.width <= 2 else 3):
        for _ in range(3):
            base = random_member(tmpl, n, rng)
            got = {(t.unary, t.literals) for t in one_types_over(tmpl, base)}
            assert got == brute_types(tmpl, base, realize)


@pytest.mark.parametrize("name", TEMPLATES)
def test_admits_is_hereditary(name):
    tmpl = template_by_name(name)
    rng = random.Random(3)
    for _ in range(10):
        s = random_member(tmpl, 3, rng)
        for t in one_types_over(tmpl, s):
            for m in range(s.size):
                assert tmpl.admits(restrict_structure(s, range(m)), t.restrict(m))


def test_unrestricted_admits_everything():
    tmpl = template_by_name("unrestricted:R,S")
    s = random_member(tmpl, 2, random.Random(1))
    assert len(one_types_over(tmpl, s)) == 16 ** 2


def test_reduct_types_drop_unary():
    tmpl = template_by_name("q_2")
    types = one_types_over(tmpl, FiniteStructure.build(tmpl.signature, (1,)), reduct=True)
    assert all(t.unary is None for t in types)
    assert len(types) == 2


def test_realize_examples(rado):
    empty = graph(0)
    one = realize(empty, OneTypeDescriptor(0, ()))
    assert one.size == 1
    edge = realize(graph(1), OneTypeDescriptor(0, (1,)))
    assert ordered_isomorphic(edge, graph(2, [(0, 1)]))


@given(st.integers(0, 10**6))
def test_realize_then_restrict_is_base(seed):
    rng = random.Random(seed)
    tmpl = template_by_name(TEMPLATES[seed % len(TEMPLATES)])
    base = random_member(tmpl, rng.randrange(4), rng)
    types = one_types_over(tmpl, base)
    t = types[rng.randrange(len(types))]
    s = realize(base, t)
    assert restrict_structure(s, range(base.size)) == base
    assert s.type_of(base.size) == t


def test_ordered_isomorphic_examples(rado):
    e, ne = graph(2, [(0, 1)]), graph(2)
    assert ordered_isomorphic(e, e)
    assert not ordered_isomorphic(e, ne)
    middle_first = graph(3, [(0, 1), (0, 2)])
    middle_last = graph(3, [(0, 2), (1, 2)])
    assert not ordered_isomorphic(middle_first, middle_last)
    assert not brute_isomorphic(middle_first, middle_last)


@given(st.integers(0, 10**6))
def test_ordered_isomorphic_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    tmpl = template_by_name(TEMPLATES[seed % len(TEMPLATES)])
    a = random_member(tmpl, 3, rng)
    b = random_member(tmpl, 3, rng)
    assert ordered_isomorphic(a, b) == brute_isomorphic(a, b)


def test_parse_and_dump_round_trip():
    text = "unary V\nbinary E\nsymmetric E\nvertices V V V\nrel E 0 2\n"
    s = parse_structure(text)
    assert parse_structure(dump_structure(s)) == s
    assert s.holds("E", 2, 0)


def test_parse_json():
    s = parse_structure('{"unary": ["V"], "binary": ["<"], "vertices": ["V", "V"], "relations": [["<", 0, 1]]}')
    assert s.holds("<", 0, 1) and s.size == 2


@pytest.mark.parametrize("text,msg", [
    ("vertices V\n", "needs 'unary'"),
    ("unary V\nvertices W\n", "unknown unary"),
    ("unary V\nbinary E\nvertices V V\nrel F 0 1\n", "unknown binary"),
    ("unary V\nbinary E\nvertices V V\nrel E 0 x\n", "integers"),
    ("unary V\nbinary E\nvertices V V\nrel E 0 4\n", "out of range"),
    ("unary V\nbogus\nvertices V\n", "unknown keyword"),
])
def test_parse_errors(text, msg):
    with pytest.raises(StructureError, match=msg):
        parse_structure(text)


def test_unknown_template_lists_names():
    with pytest.raises(TemplateError, match="known: rado, q"):
        template_by_name("nope")
