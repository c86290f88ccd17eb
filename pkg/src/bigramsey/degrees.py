"""Big Ramsey degrees as counts of similarity types of diagonal antichains."""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

from .antichain import is_diagonal
from .coding_tree import (
    CodingTree,
    InsufficientDepth,
    build_tree,
    structure_from_coding,
    tree_closure,
)
from .fraisse import (
    ClassTemplate,
    FiniteStructure,
    StructureError,
    validate_structure,
)
from .similarity import SimilarityCode, canonical_code

__all__ = [
    "DegreeResult",
    "enumerate_antichains",
    "enumerations",
    "big_ramsey_degree",
    "default_mode",
    "DEFAULT_DEPTHS",
    "DEFAULT_SCHEDULE",
    "RecoveryReport",
    "copies_in",
    "degree_recovery_demo",
]

DEFAULT_DEPTHS = (8, 12, 16, 20, 24)
DEFAULT_SCHEDULE = "fifo-random"


def default_mode(tmpl: ClassTemplate) -> str:
    return "U" if tmpl.nontrivial_unary and tmpl.has_order else "S"


def enumerate_antichains(A: FiniteStructure, host: CodingTree, depth: int | None = None):
    """Yield every diagonal antichain of host coding nodes below ``depth`` representing A.

    Coding nodes are chosen in increasing level; a partial choice is dropped
    as soon as the coded structure stops matching A or two nodes become
    comparable.
    """
    depth = host.depth if depth is None else depth
    if depth > host.depth:
        raise InsufficientDepth(f"enumeration depth {depth} exceeds host depth {host.depth}", depth)
    n = A.size
    coding, colors = host.coding, host.colors
    frag = {(i, j): A.fragment(i, j) for j in range(n) for i in range(j)}

    def extend(chosen):
        k = len(chosen)
        if k == n:
            cods = {coding[i]: colors[i] for i in chosen}
            T = tree_closure(cods, cods)
            if is_diagonal(T):
                yield T
            return
        start = chosen[-1] + 1 if chosen else 0
        for idx in range(start, depth - (n - k - 1)):
            if colors[idx] != A.unary[k]:
                continue
            c = coding[idx]
            if any(c.frag(chosen[j]) != frag[(j, k)] for j in range(k)):
                continue
            if any(coding[j].is_prefix_of(c) for j in chosen):
                continue
            yield from extend(chosen + [idx])

    yield from extend([])


def enumerations(A: FiniteStructure) -> list[FiniteStructure]:
    """Distinct ordered structures obtained by re-enumerating A's vertices."""
    seen = []
    for perm in itertools.permutations(range(A.size)):
        pos = {v: i for i, v in enumerate(perm)}
        rel = {r: frozenset((pos[i], pos[j]) for i, j in pairs) for r, pairs in A.relations.items()}
        B = FiniteStructure(A.signature, tuple(A.unary[v] for v in perm), rel)
        if B not in seen:
            seen.append(B)
    return seen


@dataclass
class DegreeResult:
    target: FiniteStructure
    census_size: int
    codes: set
    degree: int
    stabilization: list = field(default_factory=list)
    stabilized: bool = False
    schedule_fingerprint: str = ""

    def trace_text(self) -> str:
        lines = [f"depth {d}: {k}" for d, k in self.stabilization]
        lines.append(f"degree {self.degree} ({'stabilized' if self.stabilized else 'not stabilized'})")
        return "\n".join(lines)


def big_ramsey_degree(A: FiniteStructure, tmpl: ClassTemplate, depths=DEFAULT_DEPTHS, mode: str | None = None,
                      schedule: str = DEFAULT_SCHEDULE, ordered: bool = False) -> DegreeResult:
    """Count similarity types of diagonal antichains representing a copy of A.

    By default every enumeration of A counts (copies of A as an unordered
    structure); with ``ordered`` only antichains whose coded structure is
    A in its given enumeration are counted.
    """
    depths = list(depths)
    if not depths:
        raise ValueError("empty depth schedule")
    if depths != sorted(set(depths)):
        raise ValueError("depth schedule must be strictly increasing")
    problems = validate_structure(tmpl.signature, A)
    if problems:
        raise StructureError("; ".join(problems))
    mode = default_mode(tmpl) if mode is None else mode
    host = build_tree(tmpl, mode, depths[-1], schedule)
    targets = [A] if ordered else enumerations(A)
    codes: set[SimilarityCode] = set()
    census = 0
    trace = []
    for d in depths:
        found = set()
        count = 0
        for B in targets:
            for T in enumerate_antichains(B, host, d):
                found.add(canonical_code(T))
                count += 1
        codes, census = found, count
        trace.append((d, len(found)))
    stabilized = len(trace) >= 2 and trace[-1][1] == trace[-2][1]
    fp = hashlib.sha256(f"{tmpl.name}|{mode}|{schedule}|{depths[-1]}".encode()).hexdigest()[:16]
    return DegreeResult(A, census, codes, len(codes), trace, stabilized, fp)


def copies_in(A: FiniteStructure, M) -> dict:
    """Diagonal antichains of M's coding nodes that code a copy of A, grouped by similarity type."""
    targets = enumerations(A)
    sig = M.template.signature
    groups: dict = {}
    for idx in itertools.combinations(range(M.n_coding), A.size):
        cods = [M.coding[i] for i in idx]
        cols = [M.colors[i] for i in idx]
        if structure_from_coding(sig, cods, cols) not in targets:
            continue
        T = tree_closure(dict(zip(cods, cols)), dict(zip(cods, cols)))
        if is_diagonal(T):
            groups.setdefault(canonical_code(T), []).append(tuple(cods))
    return groups


@dataclass
class RecoveryReport:
    degree: int
    witness: object
    persistent: int
    per_type: dict
    types_everywhere: bool

    def text(self) -> str:
        lines = [f"similarity types of copies: {self.degree}",
                 f"witness: {self.witness!r}",
                 f"colors persisting in the witness: {self.persistent}"]
        for i, (code, cols) in enumerate(self.per_type.items()):
            lines.append(f"type {i}: colors {sorted(cols)}")
        lines.append(f"every sub-antichain holds every type: {'yes' if self.types_everywhere else 'no'}")
        return "\n".join(lines)


def degree_recovery_demo(A: FiniteStructure, M, coloring=None, min_copies: int = 2) -> RecoveryReport:
    """Show the degree of A as the number of colors that cannot be removed.

    ``coloring`` maps a copy (a tuple of coding nodes) to a color; the default
    colors a copy by its similarity type.  The search looks for a
    sub-antichain of M with at least ``min_copies`` copies of A on which the
    coloring is constant on each similarity type.  The audit checks that
    every sub-antichain similar to M keeps copies of every type, so the type
    coloring keeps all its colors (checked from the least size at which a
    prefix of M holds every type).
    """
    from .ramsey_space import sub_dca_census

    groups = copies_in(A, M)
    if not groups:
        raise InsufficientDepth(f"M has no copy of the structure with {A.size} vertices", A.size)
    order = sorted(groups, key=lambda c: c.text)
    type_of = {cp: i for i, code in enumerate(order) for cp in groups[code]}
    color = (lambda cp: type_of[cp]) if coloring is None else coloring

    def per_type(cods) -> dict:
        out: dict = {}
        for code in order:
            cols = {color(cp) for cp in groups[code] if set(cp) <= cods}
            if cols:
                out[code] = cols
        return out

    full = [j for j in range(A.size, M.n_coding + 1) if len(per_type(set(M.coding[:j]))) == len(order)]
    everywhere = True
    witness = None
    for j in range(M.n_coding, A.size - 1, -1):
        for N in sub_dca_census(M, j):
            cods = set(N.coding)
            pt = per_type(cods)
            if j >= full[0] and len(pt) != len(order):
                everywhere = False
            if witness is None and all(len(c) == 1 for c in pt.values()) \
                    and sum(1 for cp in type_of if set(cp) <= cods) >= min_copies:
                witness = (N, pt)
    if witness is None:
        raise InsufficientDepth("no sub-antichain within the truncation is monochromatic on each type",
                                M.n_coding + 1)
    N, pt = witness
    persistent = len(set().union(*pt.values()))
    return RecoveryReport(len(order), N, persistent, pt, everywhere)
