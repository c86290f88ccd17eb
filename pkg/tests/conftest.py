import functools
import itertools
import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=100)
settings.load_profile("repo")

from bigramsey.antichain import build_good_dca  # noqa: E402
from bigramsey.coding_tree import CodingTree, build_tree  # noqa: E402
from bigramsey.fraisse import FiniteStructure, template_by_name  # noqa: E402


@functools.lru_cache(maxsize=None)
def host(name: str, depth: int, mode: str = "S"):
    return build_tree(template_by_name(name), mode, depth)


@functools.lru_cache(maxsize=None)
def dca(name: str, n: int, mode: str = "S"):
    return build_good_dca(CodingTree(template_by_name(name), mode), n)


def chain(n: int) -> FiniteStructure:
    q = template_by_name("q")
    return FiniteStructure.build(q.signature, (0,) * n, [("<", i, j) for i in range(n) for j in range(i + 1, n)])


def graph(n: int, edges=()) -> FiniteStructure:
    r = template_by_name("rado")
    return FiniteStructure.build(r.signature, (0,) * n, [("E", i, j) for i, j in edges])


@pytest.fixture
def q():
    return template_by_name("q")


@pytest.fixture
def rado():
    return template_by_name("rado")


def antichains(T, max_size: int, depth: int, min_size: int = 1):
    """Closure trees of all diagonal antichains of T's coding nodes below ``depth``."""
    from bigramsey.antichain import is_diagonal
    from bigramsey.coding_tree import tree_closure

    out = []
    for r in range(min_size, max_size + 1):
        for idx in itertools.combinations(range(depth), r):
            cods = [T.coding[i] for i in idx]
            if any(a.is_prefix_of(b) for a, b in itertools.combinations(cods, 2)):
                continue
            cmap = {T.coding[i]: T.colors[i] for i in idx}
            S = tree_closure(cmap, cmap)
            if is_diagonal(S):
                out.append(S)
    return out
