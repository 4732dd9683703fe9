"""
Bin packing instances and their quadratic equations.

An exact instance (items n_1..n_k, capacity B, N bins, every bin filled to
exactly B) is packable iff the genus zero equation

    prod_j z_j^-1 [a, b^n_j] z_j . [a^N, b^B]^-1 = 1

has a solution. ``to_equation`` builds that equation.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from ..core.equations import StandardFormEquation
from ..core.errors import QuadfreeError
from ..core.words import Alphabet, Word, commutator, cyclic_canon, invert, power

logger = logging.getLogger(__name__)


class InstanceError(QuadfreeError):
    """Raised for malformed bin packing instances."""
    pass


class InvalidPartitionError(QuadfreeError):
    """Raised when a partition does not solve the instance it is used with."""
    pass


class Feasibility(Enum):
    INFEASIBLE = "INFEASIBLE"


INFEASIBLE = Feasibility.INFEASIBLE


@dataclass(frozen=True)
class BinPackingInstance:
    """Items r_1..r_k, bin capacity B and bin count N."""
    items: Tuple[int, ...]
    capacity: int
    bins: int
    exact: bool = False

    def __post_init__(self) -> None:
        if not self.items:
            raise InstanceError("an instance needs at least one item")
        if any(size < 1 for size in self.items):
            raise InstanceError(f"item sizes must be positive, got {list(self.items)}")
        if self.capacity < 1 or self.bins < 1:
            raise InstanceError(f"B and N must be positive, got B={self.capacity}, N={self.bins}")

    @property
    def k(self) -> int:
        return len(self.items)

    @property
    def total(self) -> int:
        return sum(self.items)

    @property
    def slack(self) -> int:
        """t = N B - sum of the items."""
        return self.bins * self.capacity - self.total


@dataclass(frozen=True)
class Partition:
    """Blocks S_1..S_N of 1-based item indices."""
    blocks: Tuple[Tuple[int, ...], ...]

    @classmethod
    def canonical(cls, blocks: Sequence[Sequence[int]]) -> "Partition":
        """Sort each block, then order blocks by smallest index (empty blocks last)."""
        ordered = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: (not b, b[:1]))
        return cls(tuple(ordered))

    def loads(self, inst: BinPackingInstance) -> List[int]:
        return [sum(inst.items[j - 1] for j in block) for block in self.blocks]


def to_exact(inst: BinPackingInstance) -> Union[BinPackingInstance, Feasibility]:
    """Pad with t unit items so that every bin must be filled exactly."""
    t = inst.slack
    if t < 0:
        logger.debug("to_exact: items exceed N B by %d", -t)
        return INFEASIBLE
    return BinPackingInstance(inst.items + (1,) * t, inst.capacity, inst.bins, exact=True)


def validate_partition(inst: BinPackingInstance, part: Partition) -> Tuple[bool, List[str]]:
    """
    Check that ``part`` solves ``inst``.

    Returns (is_valid, list_of_errors).
    """
    errors = []
    if len(part.blocks) != inst.bins:
        errors.append(f"partition has {len(part.blocks)} blocks, instance has N = {inst.bins}")

    seen: Set[int] = set()
    for block in part.blocks:
        for j in block:
            if not 1 <= j <= inst.k:
                errors.append(f"item index {j} outside 1..{inst.k}")
            elif j in seen:
                errors.append(f"item {j} appears in more than one block")
            seen.add(j)
    missing = sorted(set(range(1, inst.k + 1)) - seen)
    if missing:
        errors.append(f"items {missing} are not packed")

    if not errors:
        for number, load in enumerate(part.loads(inst), start=1):
            if inst.exact and load != inst.capacity:
                errors.append(f"block S{number} sums to {load}, expected exactly {inst.capacity}")
            elif not inst.exact and load > inst.capacity:
                errors.append(f"block S{number} sums to {load}, over capacity {inst.capacity}")

    return len(errors) == 0, errors


def solve_exact(inst: BinPackingInstance) -> Optional[Partition]:
    """
    Exact packing by backtracking over bin loads.

    Items are placed largest first; bins with equal load are interchangeable
    so only the first of them is tried, and failed (item, loads) states are
    memoized.
    """
    if not inst.exact:
        raise InstanceError("solve_exact needs an exact instance; use to_exact first")
    if inst.slack != 0 or max(inst.items) > inst.capacity:
        return None

    order = sorted(range(inst.k), key=lambda j: (-inst.items[j], j))
    loads = [0] * inst.bins
    chosen = [0] * inst.k
    failed: Set[Tuple[int, Tuple[int, ...]]] = set()

    def place(step: int) -> bool:
        if step == len(order):
            return True
        state = (step, tuple(sorted(loads)))
        if state in failed:
            return False
        item = order[step]
        size = inst.items[item]
        tried: Set[int] = set()
        for b in range(inst.bins):
            if loads[b] in tried or loads[b] + size > inst.capacity:
                continue
            tried.add(loads[b])
            loads[b] += size
            chosen[item] = b
            if place(step + 1):
                return True
            loads[b] -= size
        failed.add(state)
        return False

    if not place(0):
        return None
    blocks: Dict[int, List[int]] = {b: [] for b in range(inst.bins)}
    for item, b in enumerate(chosen):
        blocks[b].append(item + 1)
    return Partition.canonical(list(blocks.values()))


def brute_force_packing(inst: BinPackingInstance) -> Optional[Partition]:
    """Try all N^k assignments; for non-exact instances bins may be under-filled."""
    for assignment in product(range(inst.bins), repeat=inst.k):
        loads = [0] * inst.bins
        for item, b in enumerate(assignment):
            loads[b] += inst.items[item]
        if inst.exact and any(load != inst.capacity for load in loads):
            continue
        if any(load > inst.capacity for load in loads):
            continue
        blocks: List[List[int]] = [[] for _ in range(inst.bins)]
        for item, b in enumerate(assignment):
            blocks[b].append(item + 1)
        return Partition.canonical(blocks)
    return None


def _commutator_ab(n_a: int, n_b: int) -> Word:
    a, b = Word((("a", 1),), True), Word((("b", 1),), True)
    return commutator(power(a, n_a), power(b, n_b))


def to_equation(inst: BinPackingInstance) -> StandardFormEquation:
    """w_j = [a, b^n_j] and d = [a^N, b^B]^-1, all in canonical rotation."""
    if not inst.exact:
        raise InstanceError("to_equation needs an exact instance; use to_exact first")
    coefficients = tuple(cyclic_canon(_commutator_ab(1, n)) for n in inst.items)
    d = cyclic_canon(invert(_commutator_ab(inst.bins, inst.capacity)))
    return StandardFormEquation(Alphabet.from_string("ab"), True, 0, coefficients, d)


def random_instance(
    rng,
    max_items: int = 5,
    max_size: int = 4,
    max_bins: int = 3,
    exact: bool = True,
) -> BinPackingInstance:
    """Random items and N; B is drawn so that the items fit in total."""
    items = tuple(rng.randint(1, max_size) for _ in range(rng.randint(1, max_items)))
    bins = rng.randint(1, max_bins)
    least = max(max(items), -(-sum(items) // bins))
    capacity = rng.randint(least, least + 1)
    inst = BinPackingInstance(items, capacity, bins)
    if not exact:
        return inst
    padded = to_exact(inst)
    assert isinstance(padded, BinPackingInstance)
    return padded
