"""
Quadfree - quadratic equations over free groups.

Normal forms, certificates of solvability with their verifier, a certificate
search decision procedure, and the reduction from bin packing.
"""

__version__ = "0.1.0"
__author__ = "Quadfree Developers"

from .core.equations import RawQuadraticEquation, StandardFormEquation, normalize, parse_equation
from .core.validators import Certificate, Verdict, verify
from .core.words import CyclicWord, Word, cyclic_canon, free_reduce
from .generators.binpack import BinPackingInstance, Partition, solve_exact, to_equation, to_exact
from .generators.search import Decision, SearchBudget, direct_search, search

__all__ = [
    "Word",
    "CyclicWord",
    "free_reduce",
    "cyclic_canon",
    "RawQuadraticEquation",
    "StandardFormEquation",
    "parse_equation",
    "normalize",
    "Certificate",
    "Verdict",
    "verify",
    "Decision",
    "SearchBudget",
    "search",
    "direct_search",
    "BinPackingInstance",
    "Partition",
    "to_exact",
    "solve_exact",
    "to_equation",
]
