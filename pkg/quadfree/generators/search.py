"""
Decision procedures for standard-form quadratic equations.

``search`` looks for a certificate. Every certificate subdivides into one whose
images are single letters, so the search enumerates pairings of coefficient
letters (a with A, and a with a when the equation is non-orientable), prunes
with an Euler characteristic bound on the vertex classes that can still close,
and turns a complete pairing into a certificate by consolidation.

``direct_search`` is an independent oracle: it enumerates short values for
all variables but one and solves for the last one by a conjugacy check.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from enum import Enum
from itertools import product
from multiprocessing import Manager
from threading import Event
from typing import Dict, List, Optional, Sequence, Tuple

from ..core.equations import (
    Equation,
    StandardFormEquation,
    as_raw,
    check_solution,
    reduced_euler_characteristic,
)
from ..core.surfaces import build_complex, consolidate_with_images
from ..core.validators import Certificate, Condition, verify
from ..core.words import Letter, Word, find_conjugator, free_reduce, invert, reduced_words, substitute

logger = logging.getLogger(__name__)


class Decision(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class SearchBudget:
    """Limits for one call to ``search`` or ``direct_search``."""
    max_n: Optional[int] = None
    timeout: Optional[float] = 60.0
    max_candidates: Optional[int] = None
    workers: int = 1
    minimize: bool = True

    def deadline(self) -> Optional[float]:
        return None if self.timeout is None else time.monotonic() + self.timeout


@dataclass(frozen=True)
class SearchResult:
    decision: Decision
    certificate: Optional[Certificate] = None
    assignment: Optional[Dict[str, Word]] = None
    nodes: int = 0
    candidates: int = 0
    elapsed: float = 0.0
    detail: str = ""


class _BudgetExhausted(Exception):
    pass


@dataclass
class _BranchOutcome:
    certificate: Optional[Certificate] = None
    exhausted: bool = False
    truncated: bool = False
    nodes: int = 0
    candidates: int = 0
    reason: str = ""


def _heavy(weight: int) -> int:
    return weight if weight >= 3 else 0


class _PairingSearch:
    """
    Depth-first search over perfect matchings of coefficient letters.

    With a cap, only certificates with at most ``cap`` edges are accepted and
    branches that cannot meet the cap are cut. A corner class of three or more
    corners stays a vertex after consolidation, and a vertex of degree k takes
    k edge-ends, so half the corners in such classes bound n from below.
    """

    def __init__(
        self,
        sf: StandardFormEquation,
        budget: SearchBudget,
        deadline: Optional[float],
        stop: Optional[Event] = None,
        cap: Optional[int] = None,
    ):
        assert sf.d is not None
        self.sf = sf
        self.budget = budget
        self.deadline = deadline
        self.stop = stop
        self.cap = cap

        words = [w.representative.letters for w in sf.coefficients] + [sf.d.representative.letters]
        self.letters: List[Letter] = []
        self.place: List[Tuple[int, int]] = []
        starts = []
        for disc, word in enumerate(words):
            starts.append(len(self.letters))
            for offset, letter in enumerate(word):
                self.letters.append(letter)
                self.place.append((disc, offset))
        size = len(self.letters)

        # corner c(i, k) sits before position k of disc i and shares its global index
        self.tail: List[int] = []
        self.head: List[int] = []
        for position, (disc, offset) in enumerate(self.place):
            start = position
            end = starts[disc] + (offset + 1) % len(words[disc])
            sign = self.letters[position][1]
            self.tail.append(start if sign > 0 else end)
            self.head.append(end if sign > 0 else start)

        self.partners: List[List[int]] = [
            [q for q in range(size) if q != p and self._compatible(p, q)] for p in range(size)
        ]
        self.mate = [-1] * size
        self.parent = list(range(size))
        self.weight = [1] * size
        self.history: List[Optional[int]] = []
        self.classes = size
        self.heavy = 0
        self.m = len(words)
        # V - E + F - 2l >= chi_bar needs at least this many vertices
        self.target = reduced_euler_characteristic(sf) + size // 2 - self.m

        self.nodes = 0
        self.candidates = 0
        self.truncated = False

    def _compatible(self, p: int, q: int) -> bool:
        (s1, e1), (s2, e2) = self.letters[p], self.letters[q]
        if s1 != s2:
            return False
        return e1 == -e2 or not self.sf.orientable

    def _find(self, corner: int) -> int:
        while self.parent[corner] != corner:
            corner = self.parent[corner]
        return corner

    def _union(self, a: int, b: int) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            self.history.append(None)
            return
        if self.weight[ra] < self.weight[rb]:
            ra, rb = rb, ra
        wa, wb = self.weight[ra], self.weight[rb]
        self.heavy += _heavy(wa + wb) - _heavy(wa) - _heavy(wb)
        self.parent[rb] = ra
        self.weight[ra] += wb
        self.classes -= 1
        self.history.append(rb)

    def _undo(self) -> None:
        rb = self.history.pop()
        if rb is not None:
            ra = self.parent[rb]
            total, wb = self.weight[ra], self.weight[rb]
            self.heavy -= _heavy(total) - _heavy(total - wb) - _heavy(wb)
            self.weight[ra] = total - wb
            self.parent[rb] = rb
            self.classes += 1

    def pair(self, p: int, q: int) -> None:
        self.mate[p], self.mate[q] = q, p
        self._union(self.tail[p], self.tail[q])
        self._union(self.head[p], self.head[q])

    def unpair(self, p: int, q: int) -> None:
        self._undo()
        self._undo()
        self.mate[p] = self.mate[q] = -1

    def _unpaired(self) -> List[int]:
        return [p for p, q in enumerate(self.mate) if q < 0]

    def _feasible(self, unpaired: Sequence[int]) -> bool:
        """
        Every open vertex class is a path with two loose edge-ends. A path that
        cannot close on itself in one gluing ends up in a cycle with another
        path, costing at least half a vertex.
        """
        ends: Dict[int, List[Tuple[int, int]]] = {}
        for p in unpaired:
            ends.setdefault(self._find(self.tail[p]), []).append((p, 0))
            ends.setdefault(self._find(self.head[p]), []).append((p, 1))
        stuck = 0
        for loose in ends.values():
            if len(loose) != 2:
                stuck += 1
                continue
            (p, e), (q, f) = loose
            if p == q or e != f or q not in self.partners[p]:
                stuck += 1
        return self.classes - (stuck + 1) // 2 >= self.target

    def _choose(self, unpaired: Sequence[int]) -> int:
        """The unpaired position with the fewest free partners."""
        best, best_count = unpaired[0], None
        for p in unpaired:
            count = sum(1 for q in self.partners[p] if self.mate[q] < 0)
            if best_count is None or count < best_count:
                best, best_count = p, count
                if count <= 1:
                    break
        return best

    def _ordered_partners(self, p: int) -> List[int]:
        """Free partners of p, those that close a vertex class first."""
        free = [q for q in self.partners[p] if self.mate[q] < 0]

        def closes(q: int) -> int:
            same_tail = self._find(self.tail[p]) == self._find(self.tail[q])
            same_head = self._find(self.head[p]) == self._find(self.head[q])
            return -(int(same_tail) + int(same_head))

        return sorted(free, key=closes)

    def _tick(self) -> None:
        self.nodes += 1
        # poll on the first node and every 512 after it
        if self.nodes % 512 != 1:
            return
        if self.stop is not None and self.stop.is_set():
            raise _BudgetExhausted("cancelled")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _BudgetExhausted("timeout")

    def extend(self) -> Optional[Certificate]:
        self._tick()
        unpaired = self._unpaired()
        if not unpaired:
            return self._complete()
        if self.cap is not None and self.heavy > 2 * self.cap:
            return None
        if not self._feasible(unpaired):
            return None
        p = self._choose(unpaired)
        for q in self._ordered_partners(p):
            self.pair(p, q)
            found = self.extend()
            self.unpair(p, q)
            if found is not None:
                return found
        return None

    def _complete(self) -> Optional[Certificate]:
        if self.classes < self.target:
            return None
        self.candidates += 1
        if self.budget.max_candidates is not None and self.candidates > self.budget.max_candidates:
            raise _BudgetExhausted("candidate limit")

        labels: Dict[int, str] = {}
        images: Dict[str, Word] = {}
        for p, q in enumerate(self.mate):
            if p < q:
                name = f"p{len(labels) + 1}"
                labels[p] = labels[q] = name
                images[name] = Word((self.letters[p],), True)
        boundaries: List[List[Letter]] = [[] for _ in range(self.m)]
        for p, (disc, _) in enumerate(self.place):
            first = min(p, self.mate[p])
            sign = 1 if self.letters[p] == self.letters[first] else -1
            boundaries[disc].append((labels[p], sign))

        cx, merged = consolidate_with_images(build_complex(boundaries), images)
        cert = Certificate.renumbered(cx.boundaries(), merged)
        if self.cap is not None and cert.n > self.cap:
            return None
        if self.budget.max_n is not None and cert.n > self.budget.max_n:
            self.truncated = True
            return None
        verdict = verify(self.sf, cert)
        if verdict.accepted:
            return cert
        if verdict.failed_condition == Condition.BOUND_N:
            logger.warning("consolidated certificate exceeds the edge bound: %s", verdict.detail)
            self.truncated = True
        return None


def _run_branch(
    sf: StandardFormEquation,
    budget: SearchBudget,
    deadline: Optional[float],
    first: Optional[Tuple[int, int]] = None,
    stop: Optional[Event] = None,
) -> _BranchOutcome:
    engine = _PairingSearch(sf, budget, deadline, stop)
    outcome = _BranchOutcome()
    try:
        if first is not None:
            engine.pair(*first)
        outcome.certificate = engine.extend()
        outcome.exhausted = outcome.certificate is None
    except _BudgetExhausted as exc:
        outcome.reason = str(exc)
    outcome.truncated = engine.truncated
    outcome.nodes = engine.nodes
    outcome.candidates = engine.candidates
    return outcome


def _root_branches(sf: StandardFormEquation, budget: SearchBudget) -> List[Tuple[int, int]]:
    engine = _PairingSearch(sf, budget, None)
    unpaired = engine._unpaired()
    p = engine._choose(unpaired)
    return [(p, q) for q in engine._ordered_partners(p)]


def _smallest(
    sf: StandardFormEquation,
    budget: SearchBudget,
    deadline: Optional[float],
    found: Certificate,
) -> Tuple[Certificate, int]:
    """
    Binary search on the edge cap for a certificate with the fewest edges.

    Stops early, keeping the best certificate so far, when the budget runs out.
    Returns the certificate and the nodes spent.
    """
    best, lo, nodes = found, 1, 0
    while lo < best.n:
        cap = (lo + best.n - 1) // 2
        engine = _PairingSearch(sf, budget, deadline, cap=cap)
        try:
            smaller = engine.extend()
        except _BudgetExhausted as exc:
            logger.debug("search: stopped shrinking at n = %d (%s)", best.n, exc)
            nodes += engine.nodes
            break
        nodes += engine.nodes
        if smaller is None:
            lo = cap + 1
        else:
            best = smaller
    return best, nodes


def search(sf: StandardFormEquation, budget: Optional[SearchBudget] = None) -> SearchResult:
    """
    Decide solvability of a standard-form equation by certificate search.

    SAT carries a certificate that ``verify`` accepts, with the fewest edges
    when ``budget.minimize`` is set and the budget allows. UNSAT is returned
    only when every pairing was examined; any limit that cut the search short
    gives UNKNOWN.
    """
    budget = budget or SearchBudget()
    started = time.monotonic()
    if sf.m == 0:
        trivial = {name: Word((), True) for name in sf.variable_names()}
        return SearchResult(Decision.SAT, assignment=trivial, detail="coefficient-free equation")

    deadline = budget.deadline()
    logger.debug("search: %s (workers=%d)", sf, budget.workers)
    if budget.workers <= 1:
        outcomes = [_run_branch(sf, budget, deadline)]
    else:
        outcomes = _run_parallel(sf, budget, deadline)

    nodes = sum(o.nodes for o in outcomes)
    candidates = sum(o.candidates for o in outcomes)
    found = next((o.certificate for o in outcomes if o.certificate is not None), None)
    if found is not None and budget.minimize:
        found, spent = _smallest(sf, budget, deadline, found)
        nodes += spent
    elapsed = time.monotonic() - started
    if found is not None:
        logger.info("search: SAT with n = %d after %d nodes", found.n, nodes)
        return SearchResult(Decision.SAT, certificate=found, nodes=nodes, candidates=candidates,
                            elapsed=elapsed, detail=f"certificate with n = {found.n}")
    if all(o.exhausted and not o.truncated for o in outcomes):
        logger.info("search: UNSAT after %d nodes", nodes)
        return SearchResult(Decision.UNSAT, nodes=nodes, candidates=candidates, elapsed=elapsed,
                            detail="all letter pairings exhausted")
    reasons = sorted({o.reason for o in outcomes if o.reason} | ({"max-n"} if any(o.truncated for o in outcomes) else set()))
    logger.info("search: UNKNOWN (%s)", ", ".join(reasons))
    return SearchResult(Decision.UNKNOWN, nodes=nodes, candidates=candidates, elapsed=elapsed,
                        detail="budget exhausted: " + ", ".join(reasons))


def _run_parallel(sf: StandardFormEquation, budget: SearchBudget, deadline: Optional[float]) -> List[_BranchOutcome]:
    """One task per partner of the first chosen letter; the first SAT stops the rest."""
    branches = _root_branches(sf, budget)
    if not branches:
        return [_BranchOutcome(exhausted=True)]
    outcomes: List[_BranchOutcome] = []
    with Manager() as manager, ProcessPoolExecutor(max_workers=budget.workers) as pool:
        stop = manager.Event()
        futures = [pool.submit(_run_branch, sf, budget, deadline, first, stop) for first in branches]
        for future in as_completed(futures):
            outcome = future.result()
            outcomes.append(outcome)
            if outcome.certificate is not None:
                stop.set()
                pool.shutdown(wait=True, cancel_futures=True)
                break
    if len(outcomes) < len(branches) and all(o.certificate is None for o in outcomes):
        outcomes.append(_BranchOutcome(reason="cancelled"))
    return outcomes


def _eliminable(body: Sequence[Letter], variables: Sequence[str]) -> Optional[str]:
    """The last variable occurring once with each sign, if any."""
    for name in reversed(variables):
        signs = [sign for symbol, sign in body if symbol == name]
        if sorted(signs) == [-1, 1]:
            return name
    return None


def _split_around(body: Sequence[Letter], name: str) -> Tuple[List[Letter], List[Letter]]:
    """
    Rotate the cyclic body to name^-1 X name Y and return (X, Y).

    If name first occurs with exponent +1 the roles of X and Y swap, since
    name X name^-1 Y = 1 iff name^-1 Y name X = 1.
    """
    i, j = [k for k, (symbol, _) in enumerate(body) if symbol == name]
    inner = list(body[i + 1:j])
    outer = list(body[j + 1:]) + list(body[:i])
    if body[i][1] < 0:
        return inner, outer
    return outer, inner


def direct_search(eq: Equation, max_len: int, budget: Optional[SearchBudget] = None) -> SearchResult:
    """
    Try every assignment of reduced words of length <= max_len.

    One variable occurring with both signs is solved for instead of
    enumerated, so the solution may give it a longer value. Never answers UNSAT.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    budget = budget or SearchBudget()
    deadline = budget.deadline()
    started = time.monotonic()
    raw = as_raw(eq)
    constants = {g: Word(((g, 1),), True) for g in raw.alphabet.generators}
    solved = _eliminable(raw.body, raw.variables)
    enumerated = [name for name in raw.variables if name != solved]
    if solved is not None:
        x_tokens, y_tokens = _split_around(raw.body, solved)

    words = list(reduced_words(raw.alphabet, max_len))
    tried = 0
    for values in product(words, repeat=len(enumerated)):
        tried += 1
        if deadline is not None and tried % 1024 == 0 and time.monotonic() > deadline:
            return SearchResult(Decision.UNKNOWN, nodes=tried, elapsed=time.monotonic() - started,
                                detail="timeout")
        assignment = dict(zip(enumerated, values))
        if solved is not None:
            images = {**constants, **assignment}
            x = free_reduce(substitute(images, x_tokens)[0])
            y = free_reduce(substitute(images, y_tokens)[0])
            # name^-1 X name = Y^-1
            conjugator = find_conjugator(x, invert(y))
            if conjugator is None:
                continue
            assignment[solved] = conjugator
        if check_solution(raw, assignment):
            logger.debug("direct_search: solution after %d assignments", tried)
            return SearchResult(Decision.SAT, assignment=assignment, nodes=tried,
                                elapsed=time.monotonic() - started, detail=f"max_len = {max_len}")
    return SearchResult(Decision.UNKNOWN, nodes=tried, elapsed=time.monotonic() - started,
                        detail=f"no solution with values of length <= {max_len}")
