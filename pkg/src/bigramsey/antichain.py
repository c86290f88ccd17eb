"""Diagonal trees, good diagonal coding antichains and canonical envelopes."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .coding_tree import (
    CodingTree,
    FiniteTree,
    InsufficientDepth,
    Node,
    structure_from_coding,
    tree_closure,
)
from .fraisse import FiniteStructure, OneTypeDescriptor, one_types_over, realize, restrict_structure

__all__ = [
    "is_diagonal",
    "diagonal_violations",
    "represented_structure",
    "GoodDCA",
    "GoodnessReport",
    "build_good_dca",
    "check_good",
    "splitting_predecessor",
    "Envelope",
    "canonical_envelope",
    "envelope_violations",
]


def diagonal_violations(T: FiniteTree) -> list[str]:
    problems = []
    coding_levels = {c.level for c in T.coding}
    for lv in T.level_list:
        splits = [t for t in T.by_level[lv] if len(T.successors(t)) >= 2]
        if len(splits) > 1:
            problems.append(f"level {lv}: {len(splits)} splitting nodes")
        for s in splits:
            if len(T.successors(s)) != 2:
                problems.append(f"level {lv}: splitting node of degree {len(T.successors(s))}")
        if splits and lv in coding_levels:
            problems.append(f"level {lv}: splitting node on a coding level")
    return problems


def is_diagonal(T: FiniteTree) -> bool:
    return not diagonal_violations(T)


def represented_structure(T: FiniteTree, signature) -> FiniteStructure:
    """The substructure coded by T's coding nodes, in their enumeration order."""
    if not T.coding:
        raise ValueError("tree has no coding nodes")
    seq = T.coding_seq
    return structure_from_coding(signature, seq, [T.coding[c] for c in seq])


# ---------------------------------------------------------------------------
# good diagonal coding antichains


def _short(node: Node) -> str:
    if node.level <= 12:
        return node.label()
    tail = ".".join(str(f) for f in node.frags[-4:])
    return f"{node.level}:{node.head}|...{tail}"


def _type_key(node: Node, levels, reduct: bool):
    return (None if reduct else node.head, tuple(node.frag(lv) for lv in levels))


def _admissible_keys(tmpl, struct: FiniteStructure, reduct: bool) -> list:
    return sorted(((t.unary, t.literals) for t in one_types_over(tmpl, struct, reduct=reduct)),
                  key=lambda k: (-1 if k[0] is None else k[0], k[1]))


class GoodDCA:
    """A finite truncation of a diagonal coding antichain.

    The antichain is stored through its maximal nodes: the designated coding
    nodes (leaves) and the ``tops``, the live branches at ``top_level`` through
    which the rest of the infinite antichain passes.  ``host`` is the coding
    tree the nodes live in.
    """

    def __init__(self, host: CodingTree, coding, colors, tops):
        self.host = host
        self.coding = list(coding)
        self.colors = list(colors)
        self.tops = sorted(tops)
        if not self.tops:
            raise ValueError("a truncation needs at least one live branch")
        self.top_level = self.tops[0].level
        if any(t.level != self.top_level for t in self.tops):
            raise ValueError("live branches must share one level")
        self._splits = None
        self._restr: dict[int, list[Node]] = {}

    @property
    def template(self):
        return self.host.template

    @property
    def mode(self) -> str:
        return self.host.mode

    @property
    def reduct(self) -> bool:
        return self.host.mode == "U"

    @property
    def n_coding(self) -> int:
        return len(self.coding)

    @property
    def coding_levels(self) -> list[int]:
        return [c.level for c in self.coding]

    @property
    def members(self) -> list[Node]:
        return sorted(self.coding + self.tops)

    @property
    def structure(self) -> FiniteStructure:
        return structure_from_coding(self.template.signature, self.coding, self.colors)

    def coding_map(self) -> dict:
        return dict(zip(self.coding, self.colors))

    def restriction(self, level: int) -> list[Node]:
        """M restricted to ``level``: the length-``level`` initial segments of members."""
        if level > self.top_level:
            raise InsufficientDepth(f"level {level} is above the truncation at {self.top_level}",
                                    level)
        if level not in self._restr:
            self._restr[level] = sorted({t.restrict(level) for t in self.coding + self.tops
                                         if t.level >= level})
        return self._restr[level]

    def successors_of(self, node: Node) -> list[Node]:
        return [t for t in self.restriction(node.level + 1) if node.is_prefix_of(t)]

    def splitting_nodes(self) -> list[Node]:
        if self._splits is None:
            ms = self.members
            found = set()
            for a, b in zip(ms, ms[1:]):
                m = a.meet_level(b)
                if m is not None:
                    found.add(a.restrict(m))
            self._splits = sorted(found, key=lambda s: (s.level, s))
        return self._splits

    def splitting_predecessor(self, n: int) -> Node | None:
        if not 0 <= n < self.n_coding:
            raise IndexError(f"coding node index {n} out of range 0..{self.n_coding - 1}")
        below = [s for s in self.splitting_nodes() if s.level < self.coding[n].level]
        return below[-1] if below else None

    def type_over(self, node: Node, n: int):
        """Type of ``node`` over the structure coded by the first ``n`` coding nodes."""
        return _type_key(node, self.coding_levels[:n], self.reduct)

    def tree(self) -> FiniteTree:
        return tree_closure(self.coding + self.tops, self.coding_map())

    def prefix(self, n: int) -> "GoodDCA":
        """The truncation just above the ``n``-th coding node."""
        if not 1 <= n <= self.n_coding:
            raise IndexError(f"prefix size {n} out of range 1..{self.n_coding}")
        lv = self.coding[n - 1].level + 1
        return GoodDCA(self.host, self.coding[:n], self.colors[:n], self.restriction(lv))

    def without_top(self, i: int) -> "GoodDCA":
        """Copy with the ``i``-th live branch removed (a mutation for checker tests)."""
        tops = list(self.tops)
        del tops[i]
        return GoodDCA(self.host, self.coding, self.colors, tops)

    def to_dot(self) -> str:
        return self.tree().to_dot()

    def key(self) -> tuple:
        return (tuple(self.coding), tuple(self.colors), tuple(self.tops))

    def __eq__(self, other):
        return isinstance(other, GoodDCA) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def is_below(self, other: "GoodDCA") -> bool:
        """N <= M for truncations: coding nodes and live branches of N belong to M."""
        return set(self.coding) <= set(other.coding) and set(self.tops) <= set(other.tops)

    def critical_levels(self) -> list[int]:
        return sorted(set(self.coding_levels) | {s.level for s in self.splitting_nodes()})

    def __repr__(self):
        return f"GoodDCA({self.template.name}, {self.n_coding} coding nodes, {len(self.tops)} branches)"


def splitting_predecessor(M: GoodDCA, n: int) -> Node:
    s = M.splitting_predecessor(n)
    if s is None:
        raise ValueError(f"coding node {n} has no splitting node below it")
    return s


@dataclass
class GoodnessReport:
    diagonal: list = field(default_factory=list)
    cond1: list = field(default_factory=list)
    cond2: list = field(default_factory=list)
    cond3: list = field(default_factory=list)
    k: int | None = None

    @property
    def ok(self) -> bool:
        return not (self.diagonal or self.cond1 or self.cond2 or self.cond3)

    def passed(self, cond: int) -> bool:
        return not getattr(self, f"cond{cond}")

    def text(self) -> str:
        lines = []
        for name in ("diagonal", "cond1", "cond2", "cond3"):
            problems = getattr(self, name)
            lines.append(f"{name}: {'pass' if not problems else 'FAIL'}")
            lines.extend(f"  {p}" for p in problems)
        lines.append(f"k: {self.k}")
        return "\n".join(lines)


def _dca_diagonal(M: GoodDCA) -> list[str]:
    problems = []
    ms = M.members
    for a, b in zip(ms, ms[1:]):
        if a.is_prefix_of(b):
            problems.append(f"members {_short(a)} and {_short(b)} are comparable")
    coding_levels = set(M.coding_levels)
    seen = {}
    for s in M.splitting_nodes():
        if s.level in seen:
            problems.append(f"level {s.level}: two splitting nodes")
        seen[s.level] = s
        if s.level in coding_levels:
            problems.append(f"level {s.level}: splitting node on a coding level")
        deg = len(M.successors_of(s))
        if deg != 2:
            problems.append(f"splitting node {_short(s)} has degree {deg}")
    return problems


def check_good(M: GoodDCA) -> GoodnessReport:
    """Check the three goodness conditions, reporting a witness for each failure."""
    rep = GoodnessReport(diagonal=_dca_diagonal(M))
    baseline = None
    for n, c in enumerate(M.coding):
        s = M.splitting_predecessor(n)
        if s is None:
            rep.cond1.append(f"c_{n}: no splitting node below level {c.level}")
            rep.cond2.append(f"c_{n}: no splitting predecessor")
            continue
        succ = M.successors_of(s)
        if not s.is_prefix_of(c):
            rep.cond1.append(f"c_{n}: splitting predecessor {_short(s)} is not below it")
        elif not succ or not succ[-1].is_prefix_of(c):
            rep.cond1.append(f"c_{n}: reached from the left of {_short(s)}")
        if not succ:
            continue
        left = succ[0]
        over = [t for t in M.restriction(c.level + 1) if left.is_prefix_of(t)]
        if len(over) != 1:
            rep.cond2.append(f"c_{n}: left extension of {_short(s)} has {len(over)} nodes above c_{n}")
            continue
        code = over[0].frag(c.level)
        if baseline is None:
            baseline = (n, code)
        elif code != baseline[1]:
            rep.cond2.append(f"c_{n}: left passing type {code} differs from {baseline[1]} at c_{baseline[0]}")
    good_from = M.n_coding
    failures = []
    for n in reversed(range(M.n_coding)):
        lv = M.coding[n].level + 1
        keys = [M.type_over(t, n + 1) for t in M.restriction(lv)]
        want = set(_admissible_keys(M.template, restrict_structure(M.structure, range(n + 1)), M.reduct))
        dup = len(keys) != len(set(keys))
        missing = want - set(keys)
        extra = set(keys) - want
        if dup or missing or extra:
            what = []
            if dup:
                what.append("a type has several nodes")
            if missing:
                what.append(f"{len(missing)} types unrepresented, e.g. {sorted(missing)[0][1]}")
            if extra:
                what.append(f"inadmissible type {sorted(extra)[0][1]}")
            failures.append(f"level {lv} (after c_{n}): " + "; ".join(what))
            break
        good_from = n
    rep.k = good_from if good_from < M.n_coding else None
    if rep.k is None:
        rep.cond3.extend(failures)
    return rep



def _steer_split(tree: CodingTree, y: Node, dummies) -> list[int]:
    """Choose the host coding node at y's level so that y splits; return y's options."""
    for cand in [y] + dummies:
        for col in tree.color_options(cand):
            tree._grow(cand, col)
            opts = tree.options(y)
            if len(opts) >= 2:
                return opts
            tree._undo()
    raise RuntimeError(f"no host vertex makes {y.label()} split")


def build_good_dca(host: CodingTree, n_coding: int, max_depth: int | None = None,
                   flip_at=()) -> GoodDCA:
    """Build a good diagonal coding antichain with ``n_coding`` coding nodes.

    The host's existing coding nodes are kept as a prefix; every later host
    coding node is chosen by the builder.  Before the n-th coding node each
    live branch splits once per extra 1-type it must carry over the new
    vertex, then the splitting predecessor splits off the coding node to its
    right.  Every live branch then holds exactly one 1-type, so the result
    is good with k = 0.  The level just above each coding node is left
    without splitting nodes.  Coding nodes serve the pending type demands in
    first-in first-out order.  ``flip_at`` lists coding indices whose coding
    node is put on the left of its splitting predecessor (a deliberate defect
    for checker tests).
    """
    if n_coding < 1:
        raise ValueError("n_coding must be positive")
    tmpl, mode = host.template, host.mode
    reduct = mode == "U"
    sig = tmpl.signature
    colors_all = range(len(sig.unary))
    tree = host.copy()
    branches = sorted(tree.leftmost_extension(r, tree.depth) for r in tree.roots())
    dummies = list(branches)
    coding: list[Node] = []
    colors: list[int] = []
    demands = deque()
    for b in branches:
        for col in (colors_all if reduct else [b.head]):
            demands.append(((None if reduct else b.head, ()), 0, col))
    flip_at = set(flip_at)

    for n in range(n_coding):
        levels = [c.level for c in coding]
        key, m, col = demands.popleft()
        b_tau = next((b for b in branches if _type_key(b, levels[:m], reduct) == key), None)
        if b_tau is None:
            if not flip_at:
                raise RuntimeError(f"demanded type {key[1]} has no live branch")
            b_tau = branches[0]
        here = structure_from_coding(sig, coding, colors)
        tau = OneTypeDescriptor(None if reduct else b_tau.head, _type_key(b_tau, levels, reduct)[1])
        adm = _admissible_keys(tmpl, realize(here, tau, unary=col), reduct)

        # groups[i]: the descendants of branches[i], left to right, as [node, code]
        groups = []
        events = []
        for i, b in enumerate(branches):
            bkey = _type_key(b, levels, reduct)
            codes = sorted({lits[-1] for h, lits in adm if (h, lits[:-1]) == bkey})
            if not codes and flip_at:
                codes = [adm[0][1][-1]]
            if not codes:
                raise RuntimeError(f"branch {_short(b)} has no admissible extension")
            groups.append([[b, codes[0]]])
            events.extend(("split", i, code) for code in codes[1:])
        tau_i = branches.index(b_tau)
        events.append(("sp", tau_i, None))
        need = tree.depth + len(events) + 1
        if max_depth is not None and need > max_depth:
            raise InsufficientDepth(
                f"good DCA with {n + 1} coding nodes does not fit below level {max_depth}", need)

        leaf = None
        for kind, i, code in events:
            target = groups[i][-1] if kind == "split" else groups[i][0]
            opts = _steer_split(tree, target[0], dummies)
            left, right = target[0].child(opts[0]), target[0].child(opts[-1])
            for g in groups:
                for slot in g:
                    if slot is not target:
                        slot[0] = slot[0].child(tree.options(slot[0])[0])
            if kind == "split":
                target[0] = left
                groups[i].append([right, code])
            elif n in flip_at:
                target[0], leaf = right, left
            else:
                target[0], leaf = left, right
            dummies[:] = [d.child(tree.options(d)[0]) for d in dummies]

        # the coding level: the leaf becomes c_n, every branch fixes its passing type
        if col not in tree.color_options(leaf):
            raise RuntimeError(f"color {col} not available at {leaf.label()}")
        tree._grow(leaf, col)
        coding.append(leaf)
        colors.append(col)
        new_branches = []
        for g in groups:
            for slot in g:
                opts = tree.options(slot[0])
                if slot[1] in opts:
                    new_branches.append(slot[0].child(slot[1]))
                elif flip_at:
                    new_branches.append(slot[0].child(opts[0]))
                else:
                    raise RuntimeError(f"passing type {slot[1]} unavailable at {slot[0].label()}")
        dummies[:] = [d.child(tree.options(d)[0]) for d in dummies]
        branches = sorted(new_branches)
        if n + 1 < n_coding:
            # a quiet level: no splitting node sits just above a coding level
            d0 = dummies[0]
            tree._grow(d0, tree.color_options(d0)[0])
            branches = sorted(b.child(tree.options(b)[0]) for b in branches)
            dummies[:] = [d.child(tree.options(d)[0]) for d in dummies]
        for h, lits in adm:
            for c2 in (colors_all if reduct else [h]):
                demands.append(((h, lits), n + 1, c2))
    return GoodDCA(tree, coding, colors, branches)


# ---------------------------------------------------------------------------
# envelopes


@dataclass
class Envelope:
    """Canonical envelope of a finite antichain A of coding nodes inside a good DCA.

    ``extensions`` are the leftmost extensions of the splitting predecessors
    (A' is ``base`` plus these); ``witnesses[j]`` is the set E_j added for the
    1-types over the first j+1 vertices of A.
    """

    base: list
    colors: list
    predecessors: list
    extensions: list
    witnesses: list
    reduct: bool

    @property
    def added(self) -> list[Node]:
        return sorted(set(self.extensions) | {t for ws in self.witnesses for t in ws})

    @property
    def nodes(self) -> frozenset:
        return frozenset(self.base) | frozenset(self.added)

    @property
    def top(self) -> int:
        return self.base[-1].level + 1

    def tree(self) -> FiniteTree:
        return tree_closure(self.nodes, dict(zip(self.base, self.colors)))

    def max_nodes(self) -> list[Node]:
        return sorted(t for t in self.nodes if t.level == self.top)

    def type_table(self) -> list[tuple]:
        levels = [c.level for c in self.base]
        return [(_type_key(t, levels, self.reduct), t) for t in self.max_nodes()]

    def report(self) -> str:
        lines = [f"envelope of {len(self.base)} coding nodes, {len(self.added)} added nodes"]
        for j, s in enumerate(self.predecessors):
            lines.append(f"splitting predecessor of c_{j}: {_short(s)}")
        for key, t in self.type_table():
            head = "" if key[0] is None else f"{key[0]}|"
            lines.append(f"type {head}{'.'.join(map(str, key[1]))} -> {_short(t)}")
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        return self.tree().to_dot(highlight=self.added)


def _leftmost_in(M: GoodDCA, s: Node, level: int, want=None, levels=()):
    for t in M.restriction(level):
        if s.is_prefix_of(t) and (want is None or _type_key(t, levels, M.reduct) == want):
            return t
    return None


def _closeness(t: Node, anchors) -> int:
    # length of the longest initial segment t shares with an anchor node
    best = -1
    for a in anchors:
        m = t.meet_level(a)
        if m is not None and m > best:
            best = m
    return best


def canonical_envelope(A, M: GoodDCA) -> Envelope:
    """The canonical envelope of the antichain A (coding nodes of M, or a tree of them) in M."""
    cods = sorted(A.coding if isinstance(A, FiniteTree) else A, key=lambda c: c.level)
    if not cods:
        raise ValueError("empty antichain")
    index = {c: i for i, c in enumerate(M.coding)}
    if any(c not in index for c in cods):
        raise ValueError("antichain nodes must be coding nodes of M")
    n = len(cods)
    ells = [c.level for c in cods]
    top = ells[-1] + 1
    if top > M.top_level:
        raise InsufficientDepth(f"envelope needs M through level {top}, truncation ends at {M.top_level}",
                                top)
    colors = [M.colors[index[c]] for c in cods]
    preds = [M.splitting_predecessor(index[c]) for c in cods]
    if any(p is None for p in preds):
        raise ValueError("a coding node of A has no splitting predecessor in M")
    exts = [_leftmost_in(M, p, lv + 1) for p, lv in zip(preds, ells)]
    if any(e is None for e in exts):
        raise InsufficientDepth("a splitting predecessor has no extension to the envelope top", top + 1)
    a_prime = set(cods) | set(exts)
    anchors = sorted(a_prime)
    struct = structure_from_coding(M.template.signature, cods, colors)
    witnesses: list[list[Node]] = []
    for j in range(n):
        lv = ells[j] + 1
        want_types = _admissible_keys(M.template, restrict_structure(struct, range(j + 1)), M.reduct)
        have = {_type_key(t.restrict(lv), ells[:j + 1], M.reduct) for t in a_prime if t.level >= lv}
        pool = []
        if j:
            prev = ells[j - 1] + 1
            pool = sorted(set(witnesses[-1]) | {t.restrict(prev) for t in a_prime if t.level >= prev})
        ej = []
        for tau in want_types:
            if tau in have:
                continue
            cands = [x for x in M.restriction(lv) if _type_key(x, ells[:j + 1], M.reduct) == tau]
            if j:
                sub = (tau[0], tau[1][:-1])
                starts = [x for x in pool if _type_key(x, ells[:j], M.reduct) == sub]
                cands = [x for x in cands if any(y.is_prefix_of(x) for y in starts)]
            if not cands:
                raise InsufficientDepth(f"no node of M realizes type {tau[1]} at level {lv}", lv)
            ej.append(min(cands, key=lambda x: (-_closeness(x, anchors), x)))
        witnesses.append(sorted(ej))
    return Envelope(cods, colors, preds, sorted(set(exts)), witnesses, M.reduct)


def envelope_violations(E: Envelope, M: GoodDCA) -> list[str]:
    problems = []
    tree = E.tree()
    if not set(E.base) <= tree.nodes:
        problems.append("envelope misses a node of A")
    index = {c: i for i, c in enumerate(M.coding)}
    for c in E.base:
        sp = M.splitting_predecessor(index[c])
        if sp not in tree.nodes:
            problems.append(f"splitting predecessor of the level-{c.level} coding node is missing")
    struct = structure_from_coding(M.template.signature, E.base, E.colors)
    want = _admissible_keys(M.template, struct, M.reduct)
    keys = [k for k, _ in E.type_table()]
    if len(keys) != len(set(keys)):
        problems.append("a 1-type is represented by more than one maximal node")
    missing = set(want) - set(keys)
    if missing:
        problems.append(f"{len(missing)} 1-types unrepresented")
    if set(keys) - set(want):
        problems.append("a maximal node has an inadmissible type")
    return problems
