"""Similarity of finite subtrees: map checking, map search and a canonical code.

Because a similarity map preserves the lexicographic order and relative
lengths, it must send the r-th node of the k-th level to the r-th node of the
k-th level.  The canonical code records, level by level, everything the six
conditions look at in terms of those ranks, so equal codes and the existence
of a map coincide.  ``find_similarity`` does not rely on that observation; it
searches level by level and is used to validate the code.
"""
from __future__ import annotations

from dataclasses import dataclass

from .coding_tree import FiniteTree, InsufficientDepth, Node, tree_closure

__all__ = [
    "FiniteTree",
    "SimilarityCode",
    "tree_closure",
    "similarity_violations",
    "is_similarity_map",
    "find_similarity",
    "canonical_code",
    "is_plus_similar",
    "EPVerdict",
    "extension_property",
]


@dataclass(frozen=True)
class SimilarityCode:
    """Level-by-level event sequence.

    Each event is ``(kind, entries)``; ``kind`` is a string of flags
    (``C`` coding node on the level, ``S`` splitting node on the level, ``P``
    neither) and each entry describes one node in lexicographic order as
    ``(parent_rank, color_or_None, passing_types)``.
    """

    events: tuple

    @property
    def n_coding(self) -> int:
        return sum(1 for _, entries in self.events for e in entries if e[1] is not None)

    @property
    def text(self) -> str:
        out = []
        for kind, entries in self.events:
            cells = []
            for parent, color, passing in entries:
                cell = "-" if parent is None else str(parent)
                if color is not None:
                    cell += f"c{color}"
                if passing:
                    cell += "p" + ",".join(str(p) for p in passing)
                cells.append(cell)
            out.append(kind + ":" + " ".join(cells))
        return "/".join(out)

    def __str__(self):
        return self.text


def canonical_code(S: FiniteTree) -> SimilarityCode:
    if not S.nodes:
        raise ValueError("empty tree")
    if not S.is_meet_closed():
        raise ValueError("canonical_code needs a meet-closed tree")
    events = []
    prev_rank: dict[Node, int] = {}
    prev_level = None
    for lv in S.level_list:
        level_nodes = S.by_level[lv]
        entries = []
        split = False
        for t in level_nodes:
            if len(S.successors(t)) >= 2:
                split = True
            parent = t.restrict(prev_level) if prev_level is not None else None
            if parent is not None and parent in prev_rank:
                prank = prev_rank[parent]
                passing = tuple(t.frag(c.level) for c in S.coding_seq if prev_level <= c.level < lv)
            else:
                prank = None
                passing = tuple(t.frag(c.level) for c in S.coding_seq if c.level < lv)
            entries.append((prank, S.coding.get(t), passing))
        kind = ("C" if any(t in S.coding for t in level_nodes) else "") + ("S" if split else "")
        events.append((kind or "P", tuple(entries)))
        prev_rank = {t: i for i, t in enumerate(level_nodes)}
        prev_level = lv
    return SimilarityCode(tuple(events))


def similarity_violations(f: dict, S: FiniteTree, T: FiniteTree) -> list[str]:
    """Names of the violated similarity-map conditions (empty for a similarity map)."""
    if set(f) != set(S.nodes):
        raise ValueError("map must be total on S")
    if len(set(f.values())) != len(f) or set(f.values()) != set(T.nodes):
        raise ValueError("map is not a bijection onto T")
    bad = set()
    nodes = list(S.nodes)
    for i, s in enumerate(nodes):
        fs = f[s]
        for t in nodes[i:]:
            ft = f[t]
            if (s < t) != (fs < ft) or (t < s) != (ft < fs):
                bad.add("order")
            m = s.meet_level(t)
            fm = fs.meet_level(ft)
            if m is None or fm is None:
                if (m is None) != (fm is None):
                    bad.add("meets")
            else:
                ms = s.restrict(m)
                if ms not in f or f[ms] != fs.restrict(fm):
                    bad.add("meets")
            if (s.level < t.level) != (fs.level < ft.level) or (t.level < s.level) != (ft.level < fs.level):
                bad.add("lengths")
            if s.is_prefix_of(t) != fs.is_prefix_of(ft) or t.is_prefix_of(s) != ft.is_prefix_of(fs):
                bad.add("initial segments")
    cs, ct = S.coding_seq, T.coding_seq
    if len(cs) != len(ct):
        bad.add("coding nodes")
    else:
        for a, b in zip(cs, ct):
            if f[a] != b or S.coding[a] != T.coding[b]:
                bad.add("coding nodes")
        for s in S.nodes:
            for a, b in zip(cs, ct):
                if a.level < s.level and f[s].level > b.level and s.frag(a.level) != f[s].frag(b.level):
                    bad.add("passing types")
    return sorted(bad)


def is_similarity_map(f: dict, S: FiniteTree, T: FiniteTree) -> bool:
    return not similarity_violations(f, S, T)


def find_similarity(S: FiniteTree, T: FiniteTree) -> dict | None:
    """Search for a similarity map from S onto T by level-wise backtracking."""
    if len(S.nodes) != len(T.nodes) or len(S.coding) != len(T.coding):
        return None
    if len(S.level_list) != len(T.level_list):
        return None
    if [len(S.by_level[a]) for a in S.level_list] != [len(T.by_level[b]) for b in T.level_list]:
        return None
    coding_pairs = list(zip(S.coding_seq, T.coding_seq))
    code_image = dict(coding_pairs)
    f: dict[Node, Node] = {}

    def fits(s, t, k):
        if (s in S.coding) != (t in T.coding):
            return False
        if s in S.coding and (code_image[s] != t or S.coding[s] != T.coding[t]):
            return False
        if k:
            ps = s.restrict(S.level_list[k - 1])
            pt = t.restrict(T.level_list[k - 1])
            if (ps in f) != (pt in T.nodes):
                return False
            if ps in f and f[ps] != pt:
                return False
        for a, b in coding_pairs:
            if a.level >= s.level:
                break
            if b.level >= t.level or s.frag(a.level) != t.frag(b.level):
                return False
        for s2, t2 in f.items():
            if s2.level == s.level and (s2 < s) != (t2 < t):
                return False
        return True

    def assign(k, remaining, used):
        if k == len(S.level_list):
            return True
        if not remaining:
            return assign(k + 1, list(S.by_level[S.level_list[k + 1]]) if k + 1 < len(S.level_list) else [],
                          set())
        s = remaining[0]
        for t in T.by_level[T.level_list[k]]:
            if t in used or not fits(s, t, k):
                continue
            f[s] = t
            used.add(t)
            if assign(k, remaining[1:], used):
                return True
            used.discard(t)
            del f[s]
        return False

    if not assign(0, list(S.by_level[S.level_list[0]]), set()):
        return None
    return f if is_similarity_map(f, S, T) else None


def _plus_successor(ambient, s):
    succ = ambient.successors_of(s)
    if len(succ) != 1:
        raise InsufficientDepth(f"node {s.label()} has {len(succ)} immediate successors; A+ unavailable",
                                s.level + 1)
    return succ[0]


def is_plus_similar(A: FiniteTree, B: FiniteTree, ambient, ambient_b=None) -> bool:
    """+-similarity relative to the ambient diagonal tree(s).

    ``ambient`` (and ``ambient_b`` for B, defaulting to ``ambient``) must
    provide ``successors_of(node)``: the immediate successors of a node inside
    the ambient tree.
    """
    ambient_b = ambient if ambient_b is None else ambient_b
    f = find_similarity(A, B)
    if f is None:
        return False
    max_a, max_b = A.max_nodes(), B.max_nodes()
    for s in max_a + max_b:
        if s not in A.coding and s not in B.coding:
            amb = ambient if s in A.nodes else ambient_b
            if s.level >= getattr(amb, "top_level", float("inf")):
                raise InsufficientDepth(f"max level {s.level} is at the truncation boundary", s.level + 2)
    split_a = [s for s in max_a if len(ambient.successors_of(s)) >= 2]
    split_b = [s for s in max_b if len(ambient_b.successors_of(s)) >= 2]
    if split_a or split_b:
        return len(split_a) == len(split_b) == 1 and f[split_a[0]] == split_b[0]
    coded = [c for c in max_a if c in A.coding]
    if coded:
        c = coded[0]
        fc = f[c]
        for s in max_a:
            if s in A.coding:
                continue
            sp = _plus_successor(ambient, s)
            tp = _plus_successor(ambient_b, f[s])
            if sp.frag(c.level) != tp.frag(fc.level):
                return False
    return True


@dataclass(frozen=True)
class EPVerdict:
    holds: bool | None
    reason: str


_EP_KINDS = {
    "unrestricted": "free amalgamation class",
    "free_superposition": "free amalgamation class",
    "kpartite": "generic k-partite graphs",
    "linear_order": "free amalgamation class with a dense linear order",
    "dense_classes": "free amalgamation class with a dense linear order",
}


def extension_property(tmpl) -> EPVerdict:
    """Whether the template's class has the Extension Property.

    The property quantifies over every subtree of every member of the space
    and every +-similar copy of its restrictions, so it is not decided by
    search.  The answer comes from the class's amalgamation kind.  One form of
    the property also asks splitting nodes to agree under an auxiliary
    function on nodes that is never pinned down, so for any other kind the
    verdict is None (undecided) rather than a guess.
    """
    reason = _EP_KINDS.get(tmpl.kind)
    if reason is None:
        return EPVerdict(None, f"kind {tmpl.kind!r}: the property depends on an unspecified node function")
    return EPVerdict(True, reason)
