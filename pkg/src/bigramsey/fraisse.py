"""Relational signatures, finite ordered structures and Fraisse class templates.

Types over a finite structure are stored compactly.  For every binary symbol
the fragment of a type at one parameter ``v`` is a small bit vector, symbols in
signature order, most significant first.  A symmetric symbol contributes one
bit ``R(v, x)``; an asymmetric one contributes two bits ``R(v, x), R(x, v)``.
A cleared bit is the negated literal, so integer order on fragment codes is the
lexicographic order with negations first.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = [
    "Signature",
    "FiniteStructure",
    "OneTypeDescriptor",
    "ClassTemplate",
    "StructureError",
    "TemplateError",
    "validate_structure",
    "one_types_over",
    "realize",
    "restrict_structure",
    "ordered_isomorphic",
    "parse_structure",
    "dump_structure",
    "TEMPLATE_NAMES",
    "template_by_name",
]


class StructureError(ValueError):
    """Malformed structure, type or structure file."""


class TemplateError(ValueError):
    """Unknown template or a template/mode combination that cannot work."""


@dataclass(frozen=True)
class Signature:
    unary: tuple[str, ...]
    binary: tuple[str, ...] = ()
    symmetric: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.unary:
            raise StructureError("a signature needs at least one unary symbol")
        names = list(self.unary) + list(self.binary)
        if len(set(names)) != len(names):
            raise StructureError("duplicate relation symbol")
        if not set(self.symmetric) <= set(self.binary):
            raise StructureError("symmetric flag on a non-binary symbol")

    @property
    def width(self) -> int:
        """Number of bits in one fragment code."""
        return sum(1 if r in self.symmetric else 2 for r in self.binary)

    @property
    def n_fragments(self) -> int:
        return 1 << self.width

    @property
    def symbol_order(self) -> list[str]:
        """Negated literals first, then positive ones."""
        syms = list(self.unary) + list(self.binary)
        return ["~" + s for s in syms] + syms

    def literal_slots(self) -> list[tuple[str, bool]]:
        """(symbol, parameter_first) for each bit, most significant first."""
        slots = []
        for r in self.binary:
            slots.append((r, True))
            if r not in self.symmetric:
                slots.append((r, False))
        return slots

    def encode_fragment(self, truth: dict[tuple[str, bool], bool]) -> int:
        code = 0
        for slot in self.literal_slots():
            code = (code << 1) | int(bool(truth.get(slot, False)))
        return code

    def decode_fragment(self, code: int) -> dict[tuple[str, bool], bool]:
        slots = self.literal_slots()
        w = len(slots)
        return {slot: bool((code >> (w - 1 - i)) & 1) for i, slot in enumerate(slots)}

    def fragment_str(self, code: int) -> str:
        parts = []
        for (r, vfirst), val in self.decode_fragment(code).items():
            lit = f"{r}(v,x)" if vfirst else f"{r}(x,v)"
            parts.append(lit if val else "~" + lit)
        return "{" + ",".join(parts) + "}"


@dataclass(frozen=True)
class FiniteStructure:
    """Finite structure on vertices 0..size-1 (the enumeration order).

    ``unary[i]`` is the index of the unary symbol of vertex i.  ``relations``
    maps each binary symbol to the set of ordered pairs where it holds; for a
    symmetric symbol both orientations are stored.
    """

    signature: Signature
    unary: tuple[int, ...]
    relations: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.unary)

    def holds(self, symbol: str, i: int, j: int) -> bool:
        return (i, j) in self.relations.get(symbol, ())

    def fragment(self, i: int, j: int) -> int:
        """Fragment code of vertex j at parameter v_i (i < j)."""
        truth = {}
        for r, vfirst in self.signature.literal_slots():
            truth[(r, vfirst)] = self.holds(r, i, j) if vfirst else self.holds(r, j, i)
        return self.signature.encode_fragment(truth)

    def type_of(self, j: int) -> "OneTypeDescriptor":
        """Type of vertex j over the first j vertices."""
        return OneTypeDescriptor(self.unary[j], tuple(self.fragment(i, j) for i in range(j)))

    def __hash__(self):
        rel = tuple(sorted((k, tuple(sorted(v))) for k, v in self.relations.items()))
        return hash((self.signature, self.unary, rel))

    def __eq__(self, other):
        if not isinstance(other, FiniteStructure):
            return NotImplemented
        keys = set(self.relations) | set(other.relations)
        return (self.signature == other.signature and self.unary == other.unary
                and all(set(self.relations.get(k, ())) == set(other.relations.get(k, ()))
                        for k in keys))

    @classmethod
    def build(cls, signature, unary, edges=()):
        """Convenience constructor; ``edges`` are (symbol, i, j) triples."""
        rel: dict[str, set] = {r: set() for r in signature.binary}
        for r, i, j in edges:
            rel.setdefault(r, set()).add((i, j))
            if r in signature.symmetric:
                rel[r].add((j, i))
        return cls(signature, tuple(unary), {r: frozenset(v) for r, v in rel.items()})


@dataclass(frozen=True)
class OneTypeDescriptor:
    """Complete type over an n-vertex structure.

    ``unary`` is the parameter-free part (None for the binary-only reduct used
    by unary-colored trees); ``literals[i]`` is the fragment code at v_i.
    """

    unary: int | None
    literals: tuple[int, ...]

    def restrict(self, n: int) -> "OneTypeDescriptor":
        return OneTypeDescriptor(self.unary, self.literals[:n])


def validate_structure(sig: Signature, s: FiniteStructure) -> list[str]:
    """Return a list of violations; empty when the structure is valid."""
    problems = []
    if s.signature != sig:
        problems.append("signature mismatch")
    n = s.size
    for v, u in enumerate(s.unary):
        if isinstance(u, (tuple, list, set, frozenset)):
            if len(u) != 1:
                problems.append(f"vertex {v}: needs exactly one unary relation, has {len(u)}")
        elif u is None:
            problems.append(f"vertex {v}: needs exactly one unary relation, has 0")
        elif not 0 <= u < len(sig.unary):
            problems.append(f"vertex {v}: unary index {u} out of range")
    for r, pairs in s.relations.items():
        if r not in sig.binary:
            problems.append(f"unknown binary symbol {r!r}")
            continue
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                problems.append(f"{r}({i},{j}): vertex out of range for size {n}")
            elif i == j:
                problems.append(f"{r}({i},{j}): reflexive instance")
            elif r in sig.symmetric and (j, i) not in pairs:
                problems.append(f"{r}({i},{j}): symmetric relation missing ({j},{i})")
    return problems


def _check_valid(sig, s):
    problems = validate_structure(sig, s)
    if problems:
        raise StructureError("; ".join(problems))


def realize(base: FiniteStructure, t: OneTypeDescriptor, unary: int | None = None) -> FiniteStructure:
    """Extend ``base`` by one last vertex whose type over ``base`` is ``t``."""
    if len(t.literals) != base.size:
        raise StructureError(f"type has {len(t.literals)} fragments, base has {base.size} vertices")
    u = t.unary if unary is None else unary
    if u is None:
        raise StructureError("realizing a reduct type needs an explicit unary color")
    sig = base.signature
    n = base.size
    rel = {r: set(base.relations.get(r, ())) for r in sig.binary}
    for i, code in enumerate(t.literals):
        for (r, vfirst), val in sig.decode_fragment(code).items():
            if not val:
                continue
            pair = (i, n) if vfirst else (n, i)
            rel[r].add(pair)
            if r in sig.symmetric:
                rel[r].add((pair[1], pair[0]))
    return FiniteStructure(sig, base.unary + (u,), {r: frozenset(v) for r, v in rel.items()})


def restrict_structure(s: FiniteStructure, vertices) -> FiniteStructure:
    """Induced substructure on ``vertices``, renumbered in increasing order."""
    vs = sorted(vertices)
    pos = {v: i for i, v in enumerate(vs)}
    rel = {}
    for r, pairs in s.relations.items():
        rel[r] = frozenset((pos[i], pos[j]) for i, j in pairs if i in pos and j in pos)
    return FiniteStructure(s.signature, tuple(s.unary[v] for v in vs), rel)


def ordered_isomorphic(a: FiniteStructure, b: FiniteStructure) -> bool:
    if a.signature != b.signature:
        raise StructureError("signature mismatch")
    if a.unary != b.unary:
        return False
    for r in a.signature.binary:
        if set(a.relations.get(r, ())) != set(b.relations.get(r, ())):
            return False
    return True


# ---------------------------------------------------------------------------
# templates

KINDS = ("unrestricted", "linear_order", "dense_classes", "kpartite", "free_superposition")


@dataclass(frozen=True)
class ClassTemplate:
    """A Fraisse class given by which 1-types are admissible over a structure.

    ``admits`` is the reference predicate; ``fragment_options`` is the fast
    incremental form used when growing coding trees.  Both are kept in step by
    the test-suite.
    """

    kind: str
    signature: Signature
    name: str
    k: int = 1

    @property
    def has_order(self) -> bool:
        return self.kind in ("linear_order", "dense_classes")

    @property
    def nontrivial_unary(self) -> bool:
        return len(self.signature.unary) > 1

    # -- reference predicate ------------------------------------------------
    def admits(self, base: FiniteStructure, t: OneTypeDescriptor) -> bool:
        """Is ``t`` realizable over ``base`` inside the class?

        A reduct type (``t.unary is None``) is admissible when some unary
        color makes it admissible.
        """
        if len(t.literals) != base.size:
            return False
        if t.unary is None:
            return any(self.admits(base, OneTypeDescriptor(u, t.literals))
                       for u in range(len(self.signature.unary)))
        if not 0 <= t.unary < len(self.signature.unary):
            return False
        if any(not 0 <= c < self.signature.n_fragments for c in t.literals):
            return False
        if self.kind in ("unrestricted", "free_superposition"):
            return True
        if self.kind == "kpartite":
            return all(c == 0 or base.unary[i] != t.unary for i, c in enumerate(t.literals))
        # linear orders: each fragment is exactly one of v<x (2) or x<v (1) and
        # the set of vertices below x is closed downward in the order
        if any(c not in (1, 2) for c in t.literals):
            return False
        below = {i for i, c in enumerate(t.literals) if c == 2}
        for i in below:
            for j in range(base.size):
                if j not in below and base.holds("<", j, i):
                    return False
        return True

    # -- fast incremental form ---------------------------------------------
    def fragment_options(self, ctx, node) -> list[int]:
        """Admissible fragment codes for ``node`` at the next host vertex.

        ``ctx`` is a coding tree (or builder) exposing the host's coding node
        ``ctx.coding[n]``, its color ``ctx.colors[n]`` and per-part masks.
        """
        n = node.level
        if self.kind in ("unrestricted", "free_superposition"):
            return list(range(self.signature.n_fragments))
        if self.kind == "kpartite":
            part = ctx.colors[n]
            if ctx.mode == "S":
                return [0] if node.head == part else [0, 1]
            # reduct node: an edge to v_n is fine when some other part is still avoided
            for p in range(self.k):
                if p != part and node.bits & ctx.part_mask(p, n) == 0:
                    return [0, 1]
            return [0]
        c = ctx.coding[n]
        if node == c:
            return [1, 2]
        return [1] if node < c else [2]


_RADO_SIG = Signature(("V",), ("E",), frozenset({"E"}))
_ORDER_SIG = Signature(("V",), ("<",))


def _rado():
    return ClassTemplate("unrestricted", _RADO_SIG, "rado")


def _q():
    return ClassTemplate("linear_order", _ORDER_SIG, "q")


def _q_n(k):
    sig = Signature(tuple(f"P{i}" for i in range(k)), ("<",))
    return ClassTemplate("dense_classes", sig, f"q_{k}", k)


def _kpartite(k):
    sig = Signature(tuple(f"P{i}" for i in range(k)), ("E",), frozenset({"E"}))
    return ClassTemplate("kpartite", sig, f"kpartite_{k}", k)


def _unrestricted(symbols, symmetric=False):
    sig = Signature(("V",), tuple(symbols), frozenset(symbols) if symmetric else frozenset())
    kind = "free_superposition" if symmetric else "unrestricted"
    return ClassTemplate(kind, sig, ("free:" if symmetric else "unrestricted:") + ",".join(symbols))


TEMPLATE_NAMES = ("rado", "q", "q_<k>", "kpartite_<k>", "unrestricted:<R,S,...>", "free:<R,S,...>")


def template_by_name(name: str) -> ClassTemplate:
    if name == "rado":
        return _rado()
    if name == "q":
        return _q()
    for prefix, maker in (("q_", _q_n), ("kpartite_", _kpartite)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            k = int(name[len(prefix):])
            if k < 1:
                break
            return maker(k)
    for prefix, sym in (("unrestricted:", False), ("free:", True)):
        if name.startswith(prefix):
            symbols = [s for s in name[len(prefix):].split(",") if s]
            if symbols:
                return _unrestricted(symbols, sym)
    raise TemplateError(f"unknown template {name!r}; known: {', '.join(TEMPLATE_NAMES)}")


def one_types_over(tmpl: ClassTemplate, base: FiniteStructure, reduct: bool = False) -> list[OneTypeDescriptor]:
    """All admissible complete types over ``base`` in lexicographic order.

    With ``reduct`` the unary part is dropped (types of the unary-colored tree).
    """
    _check_valid(tmpl.signature, base)
    heads = [None] if reduct else range(len(tmpl.signature.unary))
    # the classes are hereditary, so a type is grown literal by literal and a
    # prefix that is inadmissible over the matching initial segment is dropped
    prefixes = [restrict_structure(base, range(i)) for i in range(base.size + 1)]
    out = []

    def grow(u, lits):
        i = len(lits)
        if not tmpl.admits(prefixes[i], OneTypeDescriptor(u, lits)):
            return
        if i == base.size:
            out.append(OneTypeDescriptor(u, lits))
            return
        for code in range(tmpl.signature.n_fragments):
            grow(u, lits + (code,))

    for u in heads:
        grow(u, ())
    return out


# ---------------------------------------------------------------------------
# structure files

FORMAT_VERSION = 1


def parse_structure(text: str, signature: Signature | None = None) -> FiniteStructure:
    """Parse the line-oriented structure format.

    ::

        # comment
        unary P0 P1
        binary E
        symmetric E
        vertices P0 P1 P0
        rel E 0 1

    ``vertices`` lists the unary symbol of each vertex in enumeration order.
    A JSON object with keys ``unary``, ``binary``, ``symmetric``, ``vertices``
    and ``relations`` (list of [symbol, i, j]) is accepted as well.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
            unary = tuple(data["unary"])
            binary = tuple(data.get("binary", ()))
            symmetric = frozenset(data.get("symmetric", ()))
            vertices = list(data["vertices"])
            rels = [tuple(x) for x in data.get("relations", ())]
        except json.JSONDecodeError as e:
            raise StructureError(f"invalid JSON: {e}") from None
        except KeyError as e:
            raise StructureError(f"structure JSON needs the key {e}") from None
        except (TypeError, AttributeError):
            raise StructureError("structure JSON has a malformed field") from None
    else:
        unary = binary = None
        symmetric = frozenset()
        vertices, rels = None, []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            key, args = line[0], line[1:]
            if key == "unary":
                unary = tuple(args)
            elif key == "binary":
                binary = tuple(args)
            elif key == "symmetric":
                symmetric = frozenset(args)
            elif key == "vertices":
                vertices = args
            elif key == "rel":
                if len(args) != 3:
                    raise StructureError(f"line {lineno}: expected 'rel SYMBOL I J'")
                try:
                    rels.append((args[0], int(args[1]), int(args[2])))
                except ValueError:
                    raise StructureError(f"line {lineno}: vertex indices must be integers") from None
            else:
                raise StructureError(f"line {lineno}: unknown keyword {key!r}")
        if unary is None or vertices is None:
            raise StructureError("structure file needs 'unary' and 'vertices' lines")
        binary = binary or ()
    sig = Signature(unary, binary, symmetric)
    if signature is not None and sig != signature:
        raise StructureError(f"structure signature {sig} does not match template signature {signature}")
    pos = {u: i for i, u in enumerate(unary)}
    bad = [v for v in vertices if v not in pos]
    if bad:
        raise StructureError(f"unknown unary symbol(s): {', '.join(sorted(set(bad)))}")
    for r, i, j in rels:
        if r not in binary:
            raise StructureError(f"unknown binary symbol {r!r}")
    s = FiniteStructure.build(sig, [pos[v] for v in vertices], rels)
    _check_valid(sig, s)
    return s


def dump_structure(s: FiniteStructure) -> str:
    sig = s.signature
    lines = [f"unary {' '.join(sig.unary)}"]
    if sig.binary:
        lines.append(f"binary {' '.join(sig.binary)}")
    if sig.symmetric:
        lines.append(f"symmetric {' '.join(r for r in sig.binary if r in sig.symmetric)}")
    lines.append("vertices " + " ".join(sig.unary[u] for u in s.unary))
    for r in sig.binary:
        for i, j in sorted(s.relations.get(r, ())):
            if r in sig.symmetric and i > j:
                continue
            lines.append(f"rel {r} {i} {j}")
    return "\n".join(lines) + "\n"
