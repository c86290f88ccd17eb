"""Big Ramsey degrees of homogeneous structures through coding trees of 1-types."""
from .antichain import (
    Envelope,
    GoodDCA,
    build_good_dca,
    canonical_envelope,
    check_good,
    envelope_violations,
    is_diagonal,
)
from .coding_tree import CodingTree, FiniteTree, InsufficientDepth, Node, build_tree, tree_closure
from .degrees import big_ramsey_degree, degree_recovery_demo, enumerate_antichains
from .fraisse import FiniteStructure, Signature, parse_structure, template_by_name
from .similarity import SimilarityCode, canonical_code, extension_property, find_similarity, is_plus_similar

__all__ = [
    "CodingTree",
    "Envelope",
    "FiniteStructure",
    "FiniteTree",
    "GoodDCA",
    "InsufficientDepth",
    "Node",
    "Signature",
    "SimilarityCode",
    "big_ramsey_degree",
    "build_good_dca",
    "build_tree",
    "canonical_code",
    "canonical_envelope",
    "check_good",
    "degree_recovery_demo",
    "enumerate_antichains",
    "extension_property",
    "envelope_violations",
    "find_similarity",
    "is_diagonal",
    "is_plus_similar",
    "parse_structure",
    "template_by_name",
    "tree_closure",
]
