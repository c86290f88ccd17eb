"""Finite truncations of coding trees of 1-types.

A node at level ``n`` is a complete type over the first ``n`` host vertices.
It is stored as ``(head, bits, level)``: ``head`` is the parameter-free part
(unary index, or 0 in the unary-colored tree) and ``bits`` packs the fragment
codes at v_0 .. v_{n-1}, v_0 most significant.  With that layout the
lexicographic order on nodes is integer comparison on aligned prefixes, the
meet is a longest common prefix, and restriction is a shift.
"""
from __future__ import annotations

import json
import random
from collections import deque
from functools import total_ordering

from .fraisse import (
    ClassTemplate,
    FiniteStructure,
    OneTypeDescriptor,
    TemplateError,
)

__all__ = [
    "Node",
    "CodingTree",
    "FiniteTree",
    "InsufficientDepth",
    "build_tree",
    "passing_type",
    "passing_similar",
    "lex_compare",
    "meet",
    "tree_closure",
    "antichain_tree",
    "SCHEDULES",
]


class InsufficientDepth(ValueError):
    """A finite truncation is too shallow for the requested operation."""

    def __init__(self, message, required=None):
        super().__init__(message if required is None else f"{message} (requires depth >= {required})")
        self.required = required


@total_ordering
class Node:
    __slots__ = ("head", "bits", "level", "w")

    def __init__(self, head: int, bits: int, level: int, w: int):
        self.head = head
        self.bits = bits
        self.level = level
        self.w = w

    def __len__(self):
        return self.level + 1

    def __hash__(self):
        return hash((self.head, self.bits, self.level))

    def __eq__(self, other):
        return (isinstance(other, Node) and self.level == other.level
                and self.bits == other.bits and self.head == other.head)

    def __lt__(self, other):
        # the lexicographic order: proper initial segments come first
        if self.head != other.head:
            return self.head < other.head
        m = min(self.level, other.level)
        a = self.bits >> ((self.level - m) * self.w)
        b = other.bits >> ((other.level - m) * other.w)
        if a != b:
            return a < b
        return self.level < other.level

    def __repr__(self):
        return f"Node({self.label()})"

    def frag(self, i: int) -> int:
        """Fragment code at parameter v_i."""
        if not 0 <= i < self.level:
            raise IndexError(f"no parameter v_{i} in a level-{self.level} node")
        return (self.bits >> ((self.level - 1 - i) * self.w)) & ((1 << self.w) - 1)

    @property
    def frags(self) -> tuple[int, ...]:
        return tuple(self.frag(i) for i in range(self.level))

    def restrict(self, level: int) -> "Node":
        if level > self.level or level < 0:
            raise IndexError("restriction level out of range")
        return Node(self.head, self.bits >> ((self.level - level) * self.w), level, self.w)

    def child(self, code: int) -> "Node":
        return Node(self.head, (self.bits << self.w) | code, self.level + 1, self.w)

    def is_prefix_of(self, other: "Node") -> bool:
        return (self.level <= other.level and self.head == other.head
                and other.bits >> ((other.level - self.level) * self.w) == self.bits)

    def comparable(self, other: "Node") -> bool:
        return self.is_prefix_of(other) or other.is_prefix_of(self)

    def meet_level(self, other: "Node") -> int | None:
        if self.head != other.head:
            return None
        m = min(self.level, other.level)
        x = (self.bits >> ((self.level - m) * self.w)) ^ (other.bits >> ((other.level - m) * self.w))
        if x == 0:
            return m
        top = (x.bit_length() - 1) // self.w
        return m - 1 - top

    def descriptor(self, reduct: bool = False) -> OneTypeDescriptor:
        return OneTypeDescriptor(None if reduct else self.head, self.frags)

    def label(self) -> str:
        return f"{self.level}:{self.head}|" + ".".join(str(f) for f in self.frags)

    @classmethod
    def from_label(cls, text: str, w: int) -> "Node":
        """Inverse of ``label``: ``level:head|f.f.f``."""
        try:
            lv, rest = text.split(":", 1)
            head, body = rest.split("|", 1)
            frags = [int(f) for f in body.split(".")] if body else []
        except ValueError:
            raise ValueError(f"bad node label {text!r}; expected level:head|f.f.f") from None
        if int(lv) != len(frags) or any(not 0 <= f < (1 << w) for f in frags):
            raise ValueError(f"bad node label {text!r}")
        return cls.from_frags(int(head), frags, w)

    @classmethod
    def from_frags(cls, head, frags, w):
        bits = 0
        for f in frags:
            bits = (bits << w) | f
        return cls(head, bits, len(frags), w)


def lex_compare(s: Node, t: Node) -> int:
    """-1, 0 or 1 as ``s`` is before, equal to or after ``t``."""
    if s.w != t.w:
        raise ValueError("nodes from different trees")
    if s == t:
        return 0
    return -1 if s < t else 1


def meet(s: Node, t: Node) -> Node | None:
    """Longest common initial segment; None for nodes under different roots."""
    m = s.meet_level(t)
    return None if m is None else s.restrict(m)


def passing_type(t: Node, m: int) -> int:
    """Fragment code of ``t`` at the coding node c_m, i.e. at parameter v_m."""
    if not 0 <= m < t.level:
        raise IndexError(f"passing type at c_{m} needs a node above level {m}, got level {t.level}")
    return t.frag(m)


def passing_similar(s: Node, m: int, t: Node, n: int) -> bool:
    """Fragments agree after substituting v_n for v_m."""
    return passing_type(s, m) == passing_type(t, n)


# ---------------------------------------------------------------------------
# coding trees

SCHEDULES = ("fifo", "fifo-right", "fifo-random", "dovetail")


class CodingTree:
    """A coding tree truncated at ``depth``: levels 0..depth, coding nodes c_0..c_{depth-1}.

    Levels are enumerated lazily and cached; membership and successor queries
    work incrementally so that deep, sparse uses (diagonal antichain building)
    never enumerate a level.
    """

    def __init__(self, template: ClassTemplate, mode: str = "S", schedule: str = "fifo-random"):
        if mode not in ("S", "U"):
            raise TemplateError(f"mode must be 'S' or 'U', got {mode!r}")
        if mode == "S" and template.nontrivial_unary and template.has_order:
            raise TemplateError(
                f"template {template.name} has several unary symbols and a linear order; use mode 'U'")
        if schedule not in SCHEDULES:
            raise TemplateError(f"unknown schedule {schedule!r}; known: {', '.join(SCHEDULES)}")
        self.template = template
        self.mode = mode
        self.schedule = schedule
        self.w = template.signature.width
        self.coding: list[Node] = []
        self.colors: list[int] = []
        self._masks: list[list[int]] = [[0] for _ in range(template.k)] if template.kind == "kpartite" else []
        self._levels: dict[int, list[Node]] = {}
        self._structure: FiniteStructure | None = None

    # -- growth (only during construction) ---------------------------------
    def copy(self) -> "CodingTree":
        t = CodingTree(self.template, self.mode, self.schedule)
        t.coding = list(self.coding)
        t.colors = list(self.colors)
        t._masks = [list(m) for m in self._masks]
        return t

    def _grow(self, c: Node, color: int):
        n = len(self.coding)
        if c.level != n:
            raise ValueError(f"coding node for v_{n} must live on level {n}")
        if self.mode == "S" and c.head != color:
            raise ValueError("in the S tree the color of a coding node is its head")
        self.coding.append(c)
        self.colors.append(color)
        for p, masks in enumerate(self._masks):
            masks.append((masks[-1] << self.w) | (1 if color == p else 0))
        self._structure = None

    def _undo(self):
        self.coding.pop()
        self.colors.pop()
        for masks in self._masks:
            masks.pop()
        self._levels.pop(len(self.coding) + 1, None)
        self._structure = None

    def part_mask(self, p: int, n: int) -> int:
        return self._masks[p][n]

    # -- queries -------------------------------------------------------------
    @property
    def depth(self) -> int:
        return len(self.coding)

    @property
    def reduct(self) -> bool:
        return self.mode == "U"

    def roots(self) -> list[Node]:
        if self.mode == "U":
            return [Node(0, 0, 0, self.w)]
        return [Node(u, 0, 0, self.w) for u in range(len(self.template.signature.unary))]

    def options(self, node: Node) -> list[int]:
        if node.level >= self.depth:
            raise InsufficientDepth(f"no host vertex v_{node.level} yet", node.level + 1)
        return self.template.fragment_options(self, node)

    def children(self, node: Node) -> list[Node]:
        return [node.child(f) for f in self.options(node)]

    def is_splitting(self, node: Node) -> bool:
        return node.level < self.depth and len(self.options(node)) > 1

    def contains(self, node: Node) -> bool:
        if node.level > self.depth or node.w != self.w:
            return False
        if self.mode == "U" and node.head != 0:
            return False
        if self.mode == "S" and not 0 <= node.head < len(self.template.signature.unary):
            return False
        for i in range(node.level):
            if node.frag(i) not in self.template.fragment_options(self, node.restrict(i)):
                return False
        return True

    def leftmost_extension(self, node: Node, level: int) -> Node:
        while node.level < level:
            node = node.child(self.options(node)[0])
        return node

    def color_options(self, node: Node) -> list[int]:
        """Unary colors a vertex realizing ``node`` may carry."""
        if self.mode == "S":
            return [node.head]
        sig_u = range(len(self.template.signature.unary))
        if self.template.kind != "kpartite":
            return list(sig_u)
        return [p for p in sig_u if node.bits & self.part_mask(p, node.level) == 0]

    def level(self, n: int) -> list[Node]:
        if n > self.depth:
            raise InsufficientDepth(f"level {n} is beyond the truncation", n)
        if n not in self._levels:
            if n == 0:
                self._levels[0] = self.roots()
            else:
                self._levels[n] = [c for s in self.level(n - 1) for c in self.children(s)]
        return self._levels[n]

    @property
    def levels(self) -> list[list[Node]]:
        return [self.level(n) for n in range(self.depth + 1)]

    def is_coding(self, node: Node) -> bool:
        return node.level < self.depth and self.coding[node.level] == node

    def coding_index(self, node: Node) -> int | None:
        return node.level if self.is_coding(node) else None

    @property
    def built_structure(self) -> FiniteStructure:
        if self._structure is None:
            self._structure = structure_from_coding(self.template.signature, self.coding, self.colors)
        return self._structure

    # -- export --------------------------------------------------------------
    def to_json(self) -> str:
        data = {
            "format_version": 1,
            "template": self.template.name,
            "mode": self.mode,
            "schedule": self.schedule,
            "depth": self.depth,
            "levels": [[n.label() for n in lvl] for lvl in self.levels],
            "coding": [{"index": i, "node": c.label(), "color": self.colors[i]}
                       for i, c in enumerate(self.coding)],
        }
        return json.dumps(data, indent=1, sort_keys=True)

    def to_dot(self) -> str:
        lines = ["digraph coding_tree {", "  rankdir=TB;"]
        ids = {}
        for lvl in self.levels:
            for node in lvl:
                ids[node] = f"n{len(ids)}"
                shape = "doublecircle" if self.is_coding(node) else "circle"
                lines.append(f'  {ids[node]} [label="{node.label()}", shape={shape}];')
        for node, nid in ids.items():
            if node.level:
                lines.append(f"  {ids[node.restrict(node.level - 1)]} -> {nid};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def structure_from_coding(sig, coding, colors) -> FiniteStructure:
    """The structure on the vertices coded by ``coding`` (nodes in level order)."""
    rel: dict[str, set] = {r: set() for r in sig.binary}
    for j, c in enumerate(coding):
        for i, prev in enumerate(coding[:j]):
            code = c.frag(prev.level)
            for (r, vfirst), val in sig.decode_fragment(code).items():
                if val:
                    pair = (i, j) if vfirst else (j, i)
                    rel[r].add(pair)
                    if r in sig.symmetric:
                        rel[r].add((pair[1], pair[0]))
    return FiniteStructure(sig, tuple(colors), {r: frozenset(v) for r, v in rel.items()})


def build_tree(tmpl: ClassTemplate, mode: str = "S", depth: int = 1, schedule: str = "fifo-random") -> CodingTree:
    """Build the coding tree through level ``depth`` with a fair coding-node schedule.

    Under ``fifo`` every (node, color) pair of every level is queued as a
    demand when its level appears.  The coding node c_n satisfies the oldest demand: it is the
    leftmost extension of the demanded node to level n (rightmost under the
    ``fifo-right`` schedule, a seeded pseudo-random extension under
    ``fifo-random``), and the demand goes back to the end of the queue
    so every type keeps being realized.  ``dovetail`` serves demands in
    Cantor-pairing order over (level, position) instead.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    tree = CodingTree(tmpl, mode, schedule)
    if schedule == "dovetail":
        return _build_dovetail(tree, depth)
    demands: deque = deque()

    def enqueue(level_nodes):
        order = list(reversed(level_nodes)) if schedule == "fifo-right" else level_nodes
        for u in order:
            colors = [u.head] if mode == "S" else range(len(tmpl.signature.unary))
            for col in colors:
                demands.append((u, col))

    enqueue(tree.roots())
    for n in range(depth):
        tried = 0
        rng = random.Random(n)
        while True:
            u, col = demands.popleft()
            node = u
            while node.level < n:
                opts = tree.options(node)
                if schedule == "fifo-random":
                    pick = opts[rng.randrange(len(opts))]
                else:
                    pick = opts[0] if schedule == "fifo" else opts[-1]
                node = node.child(pick)
            tried += 1
            if col in tree.color_options(node):
                demands.append((u, col))
                break
            demands.append((u, col))
            if tried > len(demands):
                raise RuntimeError("no satisfiable demand")
        tree._grow(node, col)
        tree._levels.pop(n + 1, None)
        enqueue(tree.level(n + 1))
    return tree


def _unpair(n: int) -> tuple[int, int]:
    d = 0
    while (d + 1) * (d + 2) // 2 <= n:
        d += 1
    j = n - d * (d + 1) // 2
    return d - j, j


def _build_dovetail(tree: CodingTree, depth: int) -> CodingTree:
    # stage n serves the Cantor-unpaired demand (m, j): the j-th (node, color)
    # pair of level m, cyclically; every pair recurs infinitely often
    n = 0
    stage = 0
    while n < depth:
        m, j = _unpair(stage)
        stage += 1
        if m > n:
            continue
        pairs = [(u, col) for u in tree.level(m) for col in
                 ([u.head] if tree.mode == "S" else range(len(tree.template.signature.unary)))]
        u, col = pairs[j % len(pairs)]
        node = tree.leftmost_extension(u, n)
        if col not in tree.color_options(node):
            continue
        tree._grow(node, col)
        n += 1
    return tree


# ---------------------------------------------------------------------------
# finite subtrees


class FiniteTree:
    """A finite set of nodes with designated coding nodes.

    ``coding`` maps each designated coding node to its parameter-free data
    (unary index).  Levels are the distinct node lengths.
    """

    def __init__(self, nodes, coding: dict, w: int | None = None):
        self.nodes = frozenset(nodes)
        self.coding = dict(coding)
        if not set(self.coding) <= self.nodes:
            raise ValueError("coding nodes must belong to the tree")
        if w is None:
            w = next(iter(self.nodes)).w if self.nodes else 1
        self.w = w
        by_len: dict[int, list[Node]] = {}
        for t in self.nodes:
            by_len.setdefault(t.level, []).append(t)
        self.level_list = sorted(by_len)
        self.by_level = {lv: sorted(v) for lv, v in by_len.items()}
        self.coding_seq = sorted(self.coding, key=lambda c: c.level)

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        return isinstance(other, FiniteTree) and self.nodes == other.nodes and self.coding == other.coding

    def __hash__(self):
        return hash((self.nodes, frozenset(self.coding.items())))

    def __repr__(self):
        return f"FiniteTree({len(self.nodes)} nodes, {len(self.coding)} coding)"

    @property
    def max_level(self) -> int:
        return self.level_list[-1]

    def max_nodes(self) -> list[Node]:
        return self.by_level[self.max_level]

    def parent(self, t: Node) -> Node | None:
        """Restriction of ``t`` to the previous level of the tree, if present."""
        i = self.level_list.index(t.level)
        if i == 0:
            return None
        p = t.restrict(self.level_list[i - 1])
        return p if p in self.nodes else None

    def successors(self, t: Node) -> list[Node]:
        i = self.level_list.index(t.level)
        if i + 1 == len(self.level_list):
            return []
        return [s for s in self.by_level[self.level_list[i + 1]] if t.is_prefix_of(s)]

    def splitting_nodes(self) -> list[Node]:
        return sorted((t for t in self.nodes if len(self.successors(t)) >= 2), key=lambda t: (t.level, t))

    def is_meet_closed(self) -> bool:
        ordered = sorted(self.nodes)
        for a, b in zip(ordered, ordered[1:]):
            m = a.meet_level(b)
            if m is not None and a.restrict(m) not in self.nodes:
                return False
        return True

    def critical_levels(self) -> list[int]:
        return sorted({c.level for c in self.coding} | {s.level for s in self.splitting_nodes()})

    def color(self, c: Node) -> int:
        return self.coding[c]

    def to_dot(self, highlight=()) -> str:
        highlight = set(highlight)
        lines = ["digraph finite_tree {", "  rankdir=TB;"]
        ids = {t: f"n{i}" for i, t in enumerate(sorted(self.nodes, key=lambda t: (t.level, t)))}
        for t, nid in ids.items():
            shape = "doublecircle" if t in self.coding else "circle"
            style = ", style=filled, fillcolor=lightgrey" if t in highlight else ""
            lines.append(f'  {nid} [label="{t.label()}", shape={shape}{style}];')
        for t, nid in ids.items():
            p = self.parent(t)
            if p is not None:
                lines.append(f"  {ids[p]} -> {nid};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _meet_levels(nodes) -> set[int]:
    ordered = sorted(nodes)
    out = set()
    for a, b in zip(ordered, ordered[1:]):
        m = a.meet_level(b)
        if m is not None:
            out.add(m)
    return out


def tree_closure(U, coding: dict | None = None) -> FiniteTree:
    """Initial segments of members of ``U`` at the lengths of the meet-closure of ``U``."""
    U = list(U)
    if not U:
        raise ValueError("tree_closure of an empty set")
    w = U[0].w
    lengths = {t.level for t in U} | _meet_levels(U)
    nodes = {t.restrict(lv) for t in U for lv in lengths if lv <= t.level}
    coding = {c: v for c, v in (coding or {}).items() if c in nodes}
    return FiniteTree(nodes, coding, w)


def antichain_tree(host: CodingTree, indices) -> FiniteTree:
    """tree_closure of the host coding nodes with the given indices."""
    cods = {host.coding[i]: host.colors[i] for i in indices}
    return tree_closure(cods, cods)
