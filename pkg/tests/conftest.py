"""Shared fixtures: the small sphere and projective plane certificates."""

import random
from typing import List, Tuple

import pytest

from quadfree.core.equations import StandardFormEquation
from quadfree.core.validators import Certificate
from quadfree.core.words import Alphabet, cyclic_canon, parse_word

AB = Alphabet.from_string("ab")


def random_boundaries(rng: random.Random, max_labels: int = 8, max_discs: int = 6) -> List[List[Tuple[str, int]]]:
    """Each label p1..pk twice with random exponents, cut into 1..max_discs nonempty discs."""
    k = rng.randint(1, max_labels)
    letters = [(f"p{i}", rng.choice((1, -1))) for i in range(1, k + 1) for _ in range(2)]
    rng.shuffle(letters)
    discs = rng.randint(1, min(max_discs, len(letters)))
    cuts = sorted(rng.sample(range(1, len(letters)), discs - 1))
    bounds = [0] + cuts + [len(letters)]
    return [letters[a:b] for a, b in zip(bounds, bounds[1:])]


@pytest.fixture
def sphere_equation():
    """z1^-1 ab z1 . BA = 1 (d is stored in canonical rotation AB)."""
    return StandardFormEquation(AB, True, 0, (cyclic_canon("ab"),), cyclic_canon("BA"))


@pytest.fixture
def sphere_certificate():
    return Certificate(
        {"p1": parse_word("a"), "p2": parse_word("b")},
        ((("p1", 1), ("p2", 1)), (("p2", -1), ("p1", -1))),
    )


@pytest.fixture
def rp2_equation():
    """x1^2 a^-2 = 1."""
    return StandardFormEquation(AB, False, 1, (), cyclic_canon("AA"))


@pytest.fixture
def rp2_certificate():
    return Certificate({"p1": parse_word("A")}, ((("p1", 1), ("p1", 1)),))
