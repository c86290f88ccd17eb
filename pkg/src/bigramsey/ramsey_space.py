"""Finite shadows of the topological Ramsey space of good diagonal antichains.

Everything here works inside a truncation M (a ``GoodDCA``).  The members of
the space below M are represented by the sub-antichains of M that are
similar to a prefix of M: a choice of coding nodes of M together with one
live branch of M for each 1-type over them (the ``census``).  Finite
approximations are the level sets of such a sub-antichain at its first k
critical levels.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .antichain import GoodDCA, _admissible_keys, _type_key, build_good_dca, check_good
from .coding_tree import CodingTree, FiniteTree, InsufficientDepth, Node
from .fraisse import template_by_name
from .similarity import canonical_code

__all__ = [
    "Approximation",
    "restrict",
    "plus",
    "level_end_extends",
    "Census",
    "sub_dca_census",
    "census_size_for",
    "approximations",
    "star_set",
    "basic_set",
    "is_nash_williams",
    "FrontVerdict",
    "is_front",
    "partition_problems",
    "uniform_front",
    "random_front",
    "theta_map",
    "theta_inverse",
    "basic_set_correspondence",
    "PigeonholeInstance",
    "PigeonholeResult",
    "detect_cases",
    "pigeonhole_instance",
    "pigeonhole_search",
    "pigeonhole_sweep",
    "side_coloring",
    "rightmost_coloring",
    "find_instance",
    "curated_q_instance",
]


# ---------------------------------------------------------------------------
# approximations


@dataclass(frozen=True)
class Approximation:
    """A finite set of nodes closed under the critical levels it occupies.

    ``k`` is the number of critical levels when the set is r_k of some
    member; sets built otherwise (such as A+) carry ``k=None``.
    """

    nodes: frozenset
    coding: frozenset = frozenset()
    k: int | None = None

    @property
    def levels(self) -> list[int]:
        return sorted({t.level for t in self.nodes})

    @property
    def max_level(self) -> int:
        return max(t.level for t in self.nodes)

    def max_nodes(self) -> list[Node]:
        top = self.max_level
        return sorted(t for t in self.nodes if t.level == top)

    def coding_map(self) -> dict:
        return dict(self.coding)

    def tree(self) -> FiniteTree:
        return FiniteTree(self.nodes, self.coding_map())

    def restrict(self, j: int) -> "Approximation":
        """r_j of this approximation: its first j levels."""
        levels = self.levels
        if j > len(levels):
            raise ValueError(f"approximation has only {len(levels)} levels")
        keep = set(levels[:j])
        return Approximation(frozenset(t for t in self.nodes if t.level in keep),
                             frozenset((c, col) for c, col in self.coding if c.level in keep), j)

    def is_initial_segment_of(self, other: "Approximation", proper: bool = True) -> bool:
        n = len(self.levels)
        if n > len(other.levels) or (proper and n == len(other.levels)):
            return False
        return other.restrict(n).nodes == self.nodes and other.restrict(n).coding == self.coding

    def sort_key(self):
        return (self.k if self.k is not None else -1, tuple(sorted(self.nodes)), tuple(sorted(self.coding)))

    def __len__(self):
        return len(self.levels)

    def text(self) -> str:
        cod = self.coding_map()
        rows = []
        for lv in self.levels:
            cells = [t.label() + ("*" if t in cod else "") for t in sorted(self.nodes) if t.level == lv]
            rows.append(f"{lv}: " + " ".join(cells))
        return "\n".join(rows)


def restrict(N: GoodDCA, k: int) -> Approximation:
    """r_k(N): the nodes of N's tree on its first k critical levels."""
    levels = N.critical_levels()
    if k > len(levels):
        raise InsufficientDepth(f"truncation has {len(levels)} critical levels, r_{k} needs {k}", k)
    keep = levels[:k]
    nodes = frozenset(t for lv in keep for t in N.restriction(lv))
    cod = frozenset((c, col) for c, col in zip(N.coding, N.colors) if c.level in set(keep))
    return Approximation(nodes, cod, k)


def plus(A: Approximation, M: GoodDCA) -> Approximation:
    """A+: A together with the immediate successors in M of its maximal nodes."""
    top = A.max_level
    heads = set(A.max_nodes())
    succ = [t for t in M.restriction(top + 1) if t.restrict(top) in heads]
    return Approximation(A.nodes | frozenset(succ), A.coding, None)


def level_end_extends(X, Y) -> bool:
    """X ⊑ Y for level sets: same size and Y restricted to X's level is X."""
    X, Y = list(X), list(Y)
    if len(X) != len(Y) or not X:
        return False
    lx = X[0].level
    if Y[0].level < lx:
        return False
    return {y.restrict(lx) for y in Y} == set(X)


# ---------------------------------------------------------------------------
# the census of sub-antichains


@dataclass
class Census:
    ambient: GoodDCA
    size: int
    members: list
    complete: bool = True

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def sub_dca_census(M: GoodDCA, j: int, limit: int | None = None) -> Census:
    """Sub-antichains of M with j coding nodes that are similar to M's j-prefix.

    Each member is j coding nodes of M together with one live branch of M
    per admissible 1-type over them.
    """
    if not 1 <= j <= M.n_coding:
        raise ValueError(f"census size {j} out of range 1..{M.n_coding}")
    ref = canonical_code(M.prefix(j).tree())
    members = []
    complete = True
    for idx in itertools.combinations(range(M.n_coding), j):
        coding = [M.coding[i] for i in idx]
        colors = [M.colors[i] for i in idx]
        if any(a.is_prefix_of(b) for a, b in itertools.combinations(coding, 2)):
            continue
        levels = [c.level for c in coding]
        groups: dict = {}
        for t in M.tops:
            groups.setdefault(_type_key(t, levels, M.reduct), []).append(t)
        sub = GoodDCA(M.host, coding, colors, M.tops)
        want = _admissible_keys(M.template, sub.structure, M.reduct)
        if any(w not in groups for w in want):
            continue
        for tops in itertools.product(*(groups[w] for w in want)):
            N = GoodDCA(M.host, coding, colors, tops)
            if canonical_code(N.tree()) != ref:
                continue
            members.append(N)
            if limit is not None and len(members) >= limit:
                return Census(M, j, members, False)
    return Census(M, j, members, complete)


def census_size_for(M: GoodDCA, k: int) -> int:
    """Least j such that the j-prefix of M has at least k critical levels."""
    for j in range(1, M.n_coding + 1):
        if len(M.prefix(j).critical_levels()) >= k:
            return j
    raise InsufficientDepth(f"M has fewer than {k} critical levels below its last coding node", k)


def approximations(M: GoodDCA, k: int, census: Census | None = None) -> list[Approximation]:
    """AD_k(M) as seen through the census: the distinct r_k of its members."""
    if k == 0:
        return [Approximation(frozenset(), frozenset(), 0)]
    census = sub_dca_census(M, census_size_for(M, k)) if census is None else census
    found = {restrict(N, k) for N in census}
    return sorted(found, key=Approximation.sort_key)


def star_set(B: Approximation | None, census: Census) -> list[GoodDCA]:
    """[B, M]* within the census: members whose r_m end-extends max(B)."""
    if B is None or not B.nodes:
        return list(census)
    top = B.max_nodes()
    crit = len(census.members[0].critical_levels()) if census.members else 0
    for m in range(1, crit + 1):
        hits = [N for N in census if level_end_extends(top, restrict(N, m).max_nodes())]
        if hits:
            return hits
    return []


def basic_set(C: Approximation, census) -> list[GoodDCA]:
    """[C, M] within the census: the members N with r_|C|(N) = C."""
    k = len(C)
    out = []
    for N in census:
        if len(N.critical_levels()) >= k and restrict(N, k) == Approximation(C.nodes, C.coding, k):
            out.append(N)
    return out


# ---------------------------------------------------------------------------
# fronts


def is_nash_williams(F) -> bool:
    F = list(F)
    return not any(a is not b and a.is_initial_segment_of(b) for a in F for b in F)


@dataclass
class FrontVerdict:
    verdict: str
    witness: object = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == "front"


def is_front(F, B: Approximation | None, census: Census) -> FrontVerdict:
    """Decide within the census whether F is a front on [B, M]*.

    A member of the census with no initial segment in F is a counterexample
    when it is deep enough to show every member of F; otherwise the answer
    is inconclusive.
    """
    F = list(F)
    if not F:
        return FrontVerdict("not-front", None, "empty family")
    for a in F:
        for b in F:
            if a is not b and a.is_initial_segment_of(b):
                return FrontVerdict("not-front", (a, b), "not Nash-Williams")
    star = star_set(B, census)
    star_keys = set(star)
    deepest = max(len(C) for C in F)
    for C in F:
        if not any(N in star_keys for N in basic_set(C, census)):
            return FrontVerdict("not-front", C, "member outside [B, M]*")
    for N in star:
        crit = len(N.critical_levels())
        if any(len(C) <= crit and restrict(N, len(C)) == Approximation(C.nodes, C.coding, len(C)) for C in F):
            continue
        if deepest > crit:
            return FrontVerdict("inconclusive", N, "census too shallow to decide")
        return FrontVerdict("not-front", N, "a member of [B, M]* has no initial segment in F")
    return FrontVerdict("front")


def partition_problems(F, B: Approximation | None, census: Census) -> list[str]:
    """Check that the basic sets of F partition [B, M]* within the census."""
    star = star_set(B, census)
    star_keys = set(star)
    count = {N: 0 for N in star}
    problems = []
    for C in F:
        for N in basic_set(C, census):
            if N not in star_keys:
                problems.append(f"[C, M] for a {len(C)}-approximation leaves [B, M]*")
                continue
            count[N] += 1
    for N, c in count.items():
        if c != 1:
            problems.append(f"{N!r} lies in {c} basic sets")
    return problems


def _least_m(B: Approximation | None, census: Census) -> int:
    if B is None or not B.nodes:
        return 0
    top = B.max_nodes()
    crit = len(census.members[0].critical_levels())
    for m in range(1, crit + 1):
        if any(level_end_extends(top, restrict(N, m).max_nodes()) for N in census):
            return m
    raise ValueError("B has no end-extension in the census")


def uniform_front(census: Census, k: int, B: Approximation | None = None) -> list[Approximation]:
    """AD_k[B, M]*: every k-approximation of a member of [B, M]* (k at least the m of B)."""
    if k < _least_m(B, census):
        raise ValueError("k is below the level at which B is decided")
    return sorted({restrict(N, k) for N in star_set(B, census)}, key=Approximation.sort_key)


def random_front(census: Census, k: int, seed: int, refinements: int,
                 B: Approximation | None = None) -> list[Approximation]:
    """A front obtained from AD_k[B, M]* by refining random members one level at a time."""
    rng = random.Random(seed)
    F = uniform_front(census, k, B)
    crit = len(census.members[0].critical_levels())
    for _ in range(refinements):
        open_members = [C for C in F if len(C) < crit]
        if not open_members:
            break
        C = open_members[rng.randrange(len(open_members))]
        ext = {restrict(N, len(C) + 1) for N in basic_set(C, census)}
        F.remove(C)
        F.extend(sorted(ext, key=Approximation.sort_key))
    return sorted(F, key=Approximation.sort_key)


# ---------------------------------------------------------------------------
# vertices versus sub-antichains


def theta_map(vertices, M: GoodDCA) -> GoodDCA:
    """The sub-antichain coding the given vertices (indices of M's coding nodes).

    Live branches are the first choice, in the lexicographic order of the
    per-type lists of M's branches, that makes the result similar to a
    prefix of M.  Raises ValueError when the result is not similar to a prefix
    of M.
    """
    vertices = sorted(vertices)
    if not vertices or vertices[0] < 0 or vertices[-1] >= M.n_coding:
        raise ValueError("vertices must be indices of coding nodes of M")
    coding = [M.coding[i] for i in vertices]
    colors = [M.colors[i] for i in vertices]
    levels = [c.level for c in coding]
    sub = GoodDCA(M.host, coding, colors, M.tops)
    groups = []
    for w in _admissible_keys(M.template, sub.structure, M.reduct):
        match = [t for t in M.tops if _type_key(t, levels, M.reduct) == w]
        if not match:
            raise ValueError(f"no live branch of M has type {w[1]} over the vertices")
        groups.append(match)
    ref = canonical_code(M.prefix(len(vertices)).tree())
    for tops in itertools.product(*groups):
        N = GoodDCA(M.host, coding, colors, tops)
        if canonical_code(N.tree()) == ref:
            return N
    raise ValueError("the vertices do not code a copy of M's prefix")


def theta_inverse(N: GoodDCA, M: GoodDCA) -> tuple[int, ...]:
    index = {c: i for i, c in enumerate(M.coding)}
    if any(c not in index for c in N.coding):
        raise ValueError("N is not below M")
    return tuple(index[c] for c in N.coding)


def basic_set_correspondence(M: GoodDCA, censuses=None, n_from: int | None = None) -> list[str]:
    """Compare structure-side and tree-side basic sets over all census members.

    For each member P and each n from ``n_from`` (default k+1 for the k of
    the goodness check) up to P's size, the members below P whose first n
    vertices are P's must be exactly those sharing r_{k_n} with P, where
    k_n counts the critical levels up to P's n-th coding node.
    """
    if n_from is None:
        rep = check_good(M)
        if rep.k is None:
            raise ValueError("M is not good")
        n_from = rep.k + 1
    if censuses is None:
        censuses = [sub_dca_census(M, j) for j in range(1, M.n_coding + 1)]
    pool = [N for c in censuses for N in c]
    problems = []
    for P in pool:
        below = [N for N in pool if N is not P and N.is_below(P)] + [P]
        crit = P.critical_levels()
        for n in range(max(n_from, 1), P.n_coding + 1):
            kn = crit.index(P.coding[n - 1].level) + 1
            rk = restrict(P, kn)
            by_vertices = {N for N in below if N.n_coding >= n and N.coding[:n] == P.coding[:n]}
            by_tree = {N for N in below if len(N.critical_levels()) >= kn and restrict(N, kn) == rk}
            if by_vertices != by_tree:
                problems.append(f"{P!r} at n={n}: {len(by_vertices)} by vertices, {len(by_tree)} by r_{kn}")
    return problems


# ---------------------------------------------------------------------------
# the extended pigeonhole principle


def _splitting_nodes_of(X: Approximation) -> set:
    nodes = sorted(X.nodes)
    levels = X.levels
    out = set()
    for i, lv in enumerate(levels[:-1]):
        nxt = levels[i + 1]
        for t in nodes:
            if t.level == lv and sum(1 for u in nodes if u.level == nxt and t.is_prefix_of(u)) >= 2:
                out.add(t)
    return out


def _cut(C: Approximation, level: int) -> Approximation:
    # C restricted to ``level``: its lower levels plus the level-``level`` traces
    above = min(lv for lv in C.levels if lv >= level)
    nodes = {t for t in C.nodes if t.level < level}
    nodes |= {t.restrict(level) for t in C.nodes if t.level == above}
    cod = frozenset((c, col) for c, col in C.coding if c.level <= level and c in nodes)
    return Approximation(frozenset(nodes), cod, None)


def detect_cases(M: GoodDCA, A: Approximation, B: Approximation, k: int,
                 census: Census | None = None) -> list[str]:
    """Which of the cases (a)/(b) and (i)/(ii) the triple (A, B, k) is in."""
    crit = M.critical_levels()
    if k >= len(crit):
        raise InsufficientDepth(f"M has {len(crit)} critical levels, case detection needs {k + 1}", k + 1)
    cases = ["b" if crit[k] in set(M.coding_levels) else "a"]
    A0 = Approximation(A.nodes, A.coding, len(A))
    if k >= 1 and len(A) == k and B == plus(A, M):
        adk = approximations(M, k)
        if A0 in adk:
            cases.append("i")
    # case (ii) is checked even when (i) holds: A may or may not lie in AD_k,
    # so both readings are reported when they differ
    if A.nodes and B.nodes and B.max_level > A.max_level:
        la, lb = A.max_level, B.max_level
        one_each = all(sum(1 for t in B.max_nodes() if s.is_prefix_of(t)) == 1 for s in A.max_nodes())
        if one_each and len(B.max_nodes()) == len(A.max_nodes()):
            for C in approximations(M, k + 1, census):
                if la < C.max_level and lb <= C.max_level and _cut(C, la).nodes == A.nodes \
                        and _cut(C, lb).nodes == B.nodes and C.restrict(k).nodes <= A.nodes:
                    cases.append("ii")
                    break
    return cases


@dataclass
class PigeonholeInstance:
    ambient: GoodDCA
    A: Approximation
    B: Approximation
    D: Approximation
    k: int
    cases: list
    convention: bool
    extensions: list
    candidates: list = field(default_factory=list)
    representatives: list = field(default_factory=list)

    @property
    def n_extensions(self) -> int:
        return len(self.extensions)


@dataclass
class PigeonholeResult:
    verdict: str
    witness: GoodDCA | None = None
    color: int | None = None
    covered: tuple = ()

    @property
    def found(self) -> bool:
        return self.verdict == "witness"


def pigeonhole_instance(M: GoodDCA, A: Approximation, B: Approximation, k: int,
                        D: Approximation | None = None) -> PigeonholeInstance:
    """Precompute r_{k+1}[B, M]* and, for each candidate N in [D, M]*, which
    of those extensions lie in r_{k+1}[B, N]*."""
    cases = detect_cases(M, A, B, k)
    if len(cases) < 2:
        raise ValueError("the triple is in neither case (i) nor case (ii)")
    D = A if D is None else D
    sp = {M.splitting_predecessor(n) for n in range(M.n_coding)} - {None}
    convention = not any(_splitting_nodes_of(X) & sp for X in (A, B, D))
    jk = census_size_for(M, k + 1)
    base = sub_dca_census(M, jk)
    top = B.max_nodes()
    ext = sorted({restrict(N, k + 1) for N in base if level_end_extends(top, restrict(N, k + 1).max_nodes())},
                 key=Approximation.sort_key)
    pos = {e: i for i, e in enumerate(ext)}
    base_hits = []
    reps: list = [None] * len(ext)
    for N in base:
        i = pos.get(restrict(N, k + 1))
        if i is not None:
            base_hits.append((N, i))
            if reps[i] is None:
                reps[i] = N
    cands = []
    for j in range(jk, M.n_coding + 1):
        census = base if j == jk else sub_dca_census(M, j)
        for N in star_set(D, census):
            mask = 0
            for P, i in base_hits:
                if P.is_below(N):
                    mask |= 1 << i
            if mask:
                cands.append((N, mask))
    return PigeonholeInstance(M, A, B, D, k, cases, convention, ext, cands, reps)


def _as_mask(inst: PigeonholeInstance, coloring) -> int:
    if isinstance(coloring, int):
        return coloring
    colors = [coloring(e) for e in inst.extensions] if callable(coloring) else list(coloring)
    if len(colors) != inst.n_extensions:
        raise ValueError(f"coloring has {len(colors)} values for {inst.n_extensions} extensions")
    if any(c not in (0, 1) for c in colors):
        raise ValueError("colorings take the values 0 and 1")
    return sum(1 << i for i, c in enumerate(colors) if c)


def pigeonhole_search(inst: PigeonholeInstance, coloring, min_size: int = 2) -> PigeonholeResult:
    """Find N in [D, M]* on whose r_{k+1}[B, N]* the coloring is constant.

    ``coloring`` is a 0/1 sequence indexed like ``inst.extensions``, a
    function on extensions, or a bit mask of the extensions colored 1.  Only
    witnesses with at least ``min_size`` extensions count; the search over
    the census is exhaustive, smallest truncations first, so "exhausted"
    means no witness within the truncation.
    """
    h = _as_mask(inst, coloring)
    for N, mask in inst.candidates:
        if bin(mask).count("1") < min_size:
            continue
        hit = h & mask
        if hit == 0 or hit == mask:
            covered = tuple(i for i in range(inst.n_extensions) if mask >> i & 1)
            return PigeonholeResult("witness", N, 1 if hit else 0, covered)
    return PigeonholeResult("exhausted")


def side_coloring(inst: PigeonholeInstance) -> list[int]:
    """Color an extension 0 when its new critical node is the leftmost node of
    its top level, 1 otherwise.

    Every extension is similar to the same r_{k+1}, so this coloring is
    constant; it is kept as the simplest example that steering must handle.
    """
    out = []
    for e, N in zip(inst.extensions, inst.representatives):
        lv = e.max_level
        crit = [s for s in N.splitting_nodes() if s.level == lv] + [c for c in N.coding if c.level == lv]
        out.append(0 if crit and crit[0] == e.max_nodes()[0] else 1)
    return out


def rightmost_coloring(inst: PigeonholeInstance) -> list[int]:
    """Color an extension 0 when its top level reaches the rightmost node of M
    at that level, 1 otherwise."""
    M = inst.ambient
    return [0 if e.max_nodes()[-1] == M.restriction(e.max_level)[-1] else 1 for e in inst.extensions]


def pigeonhole_sweep(inst: PigeonholeInstance, min_size: int = 2) -> list[int]:
    """Every 2-coloring of the extensions; returns the masks with no witness."""
    masks = sorted({m for _, m in inst.candidates if bin(m).count("1") >= min_size})
    full = (1 << inst.n_extensions) - 1
    failures = []
    for h in range(full + 1):
        if not any((h & m) == 0 or (h & m) == m for m in masks):
            failures.append(h)
    return failures


def find_instance(M: GoodDCA, case: str, k: int | None = None) -> PigeonholeInstance:
    """The first triple (A, B, k) in M detected to be in ``case`` (such as "a.i")
    whose splitting nodes avoid M's splitting predecessors."""
    try:
        ab, which = case.split(".")
    except ValueError:
        raise ValueError(f"bad case {case!r}; expected one of a.i, a.ii, b.i, b.ii") from None
    if ab not in ("a", "b") or which not in ("i", "ii"):
        raise ValueError(f"bad case {case!r}; expected one of a.i, a.ii, b.i, b.ii")
    crit = len(M.critical_levels())
    for kk in ([k] if k is not None else range(1, crit - 1)):
        if kk + 1 >= crit:
            break
        triples = []
        if which == "i":
            triples = [(A, plus(A, M), A) for A in approximations(M, kk)]
        else:
            for C in approximations(M, kk + 1):
                lv = C.levels
                for la in range(lv[kk - 1] + 1 if kk else 0, lv[kk]):
                    for lb in range(la + 1, lv[kk] + 1):
                        triples.append((_cut(C, la), _cut(C, lb) if lb < lv[kk] else C, C.restrict(kk)))
        for A, B, D in triples:
            try:
                inst = pigeonhole_instance(M, A, B, kk, D)
            except ValueError:
                continue
            if ab in inst.cases and which in inst.cases and inst.convention:
                return inst
    raise ValueError(f"no triple in case {case} within the truncation; try a larger depth")


def curated_q_instance(n_coding: int = 7, k: int = 1) -> PigeonholeInstance:
    """Case (i) on a good antichain for the rationals: A = r_k(M), B = A+."""
    M = build_good_dca(CodingTree(template_by_name("q"), "S"), n_coding)
    A = restrict(M, k)
    return pigeonhole_instance(M, A, plus(A, M), k)
