"""
Words in a free group.

A word is a sequence of signed letters (symbol, +1 | -1). Constants are written
in the compact text encoding: a lowercase letter is a generator, the same letter
uppercase is its inverse and the empty string is the identity. Edge labels and
variables (multi-character names such as ``p1`` or ``x2``) use the token
encoding ``NAME`` / ``NAME^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import QuadfreeError

Letter = Tuple[str, int]


class WordError(QuadfreeError):
    """Raised for unknown generators, bad alphabets and missing images."""
    pass


def letter_key(letter: Letter) -> Tuple[str, int]:
    """Total order on signed letters: a < A < b < B < ..."""
    symbol, sign = letter
    return (symbol, 0 if sign > 0 else 1)


def _is_freely_reduced(letters: Sequence[Letter]) -> bool:
    for (s1, e1), (s2, e2) in zip(letters, letters[1:]):
        if s1 == s2 and e1 == -e2:
            return False
    return True


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of generator symbols; each symbol is one lowercase letter."""
    generators: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.generators:
            raise WordError("alphabet must contain at least one generator")
        if len(set(self.generators)) != len(self.generators):
            raise WordError(f"duplicate generator in alphabet {''.join(self.generators)!r}")
        for symbol in self.generators:
            # an uppercase symbol would collide with the inverse of its lowercase
            if len(symbol) != 1 or not symbol.isalpha() or not symbol.islower():
                raise WordError(f"generator {symbol!r} is not a single lowercase letter")

    @classmethod
    def from_string(cls, text: str) -> Alphabet:
        return cls(tuple(text))

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.generators

    def __len__(self) -> int:
        return len(self.generators)

    def __str__(self) -> str:
        return "".join(self.generators)

    def signed_letters(self) -> List[Letter]:
        """All letters in the order a, A, b, B, ..."""
        return [(g, sign) for g in self.generators for sign in (1, -1)]


@dataclass(frozen=True)
class Word:
    """A sequence of signed letters. ``reduced`` records that no x x^-1 pair occurs."""
    letters: Tuple[Letter, ...] = ()
    reduced: bool = False

    def __post_init__(self) -> None:
        for symbol, sign in self.letters:
            if sign not in (1, -1):
                raise WordError(f"letter {symbol!r} has exponent {sign}, expected +1 or -1")
        if self.reduced and not _is_freely_reduced(self.letters):
            raise WordError(f"word {self} is flagged reduced but is not")

    @classmethod
    def of(cls, letters: Iterable[Letter]) -> Word:
        """Build a word, setting the reduced flag from the letters themselves."""
        letters = tuple(letters)
        return cls(letters, _is_freely_reduced(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: Word) -> Word:
        """Group product (freely reduced)."""
        return free_reduce(self.letters + other.letters)

    def __str__(self) -> str:
        if all(len(symbol) == 1 for symbol, _ in self.letters):
            return format_word(self)
        return " ".join(format_token(letter) for letter in self.letters)

    def symbols(self) -> List[str]:
        return [symbol for symbol, _ in self.letters]


@dataclass(frozen=True)
class CyclicWord:
    """Conjugacy-class representative: freely and cyclically reduced, minimal rotation."""
    representative: Word

    def __post_init__(self) -> None:
        letters = self.representative.letters
        if not _is_freely_reduced(letters):
            raise WordError(f"cyclic word {self.representative} is not freely reduced")
        if len(letters) > 1 and letters[0][0] == letters[-1][0] and letters[0][1] == -letters[-1][1]:
            raise WordError(f"cyclic word {self.representative} is not cyclically reduced")
        if letters and _minimal_rotation(letters) != letters:
            raise WordError(f"cyclic word {self.representative} is not in canonical rotation")

    @property
    def length(self) -> int:
        return len(self.representative)

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        return str(self.representative)


WordLike = Union[str, Word, Sequence[Letter]]


def parse_word(text: str, alphabet: Optional[Alphabet] = None) -> Word:
    """Read the compact text encoding ("abA" = a b a^-1). No reduction is applied."""
    letters: List[Letter] = []
    for position, char in enumerate(text):
        if not char.isalpha():
            raise WordError(f"invalid character {char!r} at position {position} in word {text!r}")
        symbol = char.lower()
        if alphabet is not None and symbol not in alphabet:
            raise WordError(f"unknown generator {symbol!r} in word {text!r} (alphabet {alphabet})")
        letters.append((symbol, 1 if char.islower() else -1))
    return Word.of(letters)


def format_word(word: Union[Word, Sequence[Letter]]) -> str:
    """Render single-letter symbols in the compact text encoding."""
    out = []
    for symbol, sign in word:
        if len(symbol) != 1:
            raise WordError(f"symbol {symbol!r} has no compact encoding")
        out.append(symbol if sign > 0 else symbol.upper())
    return "".join(out)


def parse_token(token: str) -> Letter:
    """Read ``NAME`` or ``NAME^-1``."""
    name, sign = token, 1
    if token.endswith("^-1"):
        name, sign = token[:-3], -1
    elif token.endswith("^1"):
        name = token[:-2]
    if not name or not name.replace("_", "").isalnum() or not name[0].isalpha():
        raise WordError(f"invalid token {token!r}")
    return (name, sign)


def format_token(letter: Letter) -> str:
    symbol, sign = letter
    return symbol if sign > 0 else f"{symbol}^-1"


def _as_letters(w: WordLike, alphabet: Optional[Alphabet] = None) -> Tuple[Letter, ...]:
    if isinstance(w, str):
        return parse_word(w, alphabet).letters
    if isinstance(w, Word):
        letters = w.letters
    else:
        letters = tuple(w)
    if alphabet is not None:
        for symbol, _ in letters:
            if symbol not in alphabet:
                raise WordError(f"unknown generator {symbol!r} (alphabet {alphabet})")
    return letters


def free_reduce(w: WordLike, alphabet: Optional[Alphabet] = None) -> Word:
    """Cancel adjacent inverse pairs until none remain."""
    stack: List[Letter] = []
    for letter in _as_letters(w, alphabet):
        if stack and stack[-1][0] == letter[0] and stack[-1][1] == -letter[1]:
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack), True)


def cyclic_reduce(w: Word) -> Tuple[Word, Word]:
    """
    Split a freely reduced word as conjugator . core . conjugator^-1.

    The core's first and last letters are not mutually inverse.
    """
    letters = free_reduce(w).letters
    i, j = 0, len(letters) - 1
    while i < j and letters[i][0] == letters[j][0] and letters[i][1] == -letters[j][1]:
        i += 1
        j -= 1
    return Word(letters[i:j + 1], True), Word(letters[:i], True)


def invert(w: Word) -> Word:
    return Word(tuple((symbol, -sign) for symbol, sign in reversed(w.letters)), w.reduced)


def rotate(w: Word, k: int) -> Word:
    """Rotate left by k letters."""
    if not w.letters:
        return w
    k %= len(w.letters)
    return Word.of(w.letters[k:] + w.letters[:k])


def power(w: Word, n: int) -> Word:
    base = w if n >= 0 else invert(w)
    return free_reduce(base.letters * abs(n))


def commutator(x: Word, y: Word) -> Word:
    """[x, y] = x^-1 y^-1 x y."""
    return free_reduce(invert(x).letters + invert(y).letters + x.letters + y.letters)


def _minimal_rotation(letters: Tuple[Letter, ...]) -> Tuple[Letter, ...]:
    keyed = [letter_key(letter) for letter in letters]
    best = min(range(len(letters)), key=lambda k: keyed[k:] + keyed[:k])
    return letters[best:] + letters[:best]


def cyclic_canon(w: WordLike, alphabet: Optional[Alphabet] = None) -> CyclicWord:
    """Freely and cyclically reduce, then pick the minimal rotation."""
    core, _ = cyclic_reduce(free_reduce(w, alphabet))
    if not core.letters:
        return CyclicWord(core)
    return CyclicWord(Word(_minimal_rotation(core.letters), True))


def substitute(images: Mapping[str, Word], w: WordLike) -> Tuple[Word, bool]:
    """
    Concatenate the images of the letters of w, without reduction.

    The flag is true iff the concatenation is already freely reduced, i.e. the
    substitution is graphical.
    """
    out: List[Letter] = []
    for symbol, sign in _as_letters(w):
        if symbol not in images:
            raise WordError(f"no image for symbol {symbol!r}")
        image = images[symbol]
        out.extend(image.letters if sign > 0 else invert(image).letters)
    word = Word.of(out)
    return word, word.reduced


def cyclic_match(u: Word, v: CyclicWord) -> Optional[int]:
    """Offset k such that u rotated left by k equals v's representative, if any."""
    target = v.representative.letters
    if len(u.letters) != len(target):
        return None
    if not target:
        return 0
    for k in range(len(u.letters)):
        if u.letters[k:] + u.letters[:k] == target:
            return k
    return None


def reduced_words(alphabet: Alphabet, max_len: int) -> Iterator[Word]:
    """All freely reduced words of length <= max_len, shortest first."""
    letters = alphabet.signed_letters()
    yield Word((), True)
    frontier: List[Tuple[Letter, ...]] = [()]
    for _ in range(max_len):
        grown: List[Tuple[Letter, ...]] = []
        for prefix, letter in product(frontier, letters):
            if prefix and prefix[-1][0] == letter[0] and prefix[-1][1] == -letter[1]:
                continue
            word = prefix + (letter,)
            grown.append(word)
            yield Word(word, True)
        frontier = grown


def random_word(rng, alphabet: Alphabet, max_length: int, min_length: int = 0) -> Word:
    """Uniform length in [min_length, max_length], then a random reduced word of that length."""
    length = rng.randint(min_length, max_length)
    letters: List[Letter] = []
    choices = alphabet.signed_letters()
    while len(letters) < length:
        letter = rng.choice(choices)
        if letters and letters[-1][0] == letter[0] and letters[-1][1] == -letter[1]:
            continue
        letters.append(letter)
    return Word(tuple(letters), True)


def find_conjugator(u: Word, v: Word) -> Optional[Word]:
    """A word c with c^-1 u c = v in the free group, or None if u and v are not conjugate."""
    u_core, a = cyclic_reduce(u)
    v_core, b = cyclic_reduce(v)
    if len(u_core) != len(v_core):
        return None
    if not u_core:
        return Word((), True)
    letters = u_core.letters
    for k in range(len(letters)):
        if letters[k:] + letters[:k] == v_core.letters:
            # u = a U a^-1, U = c R, v = b (R c) b^-1
            c = Word(letters[:k], True)
            return free_reduce(a.letters + c.letters + invert(b).letters)
    return None
