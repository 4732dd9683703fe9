"""
Quadratic equations over a free group.

Holds the raw and standard-form data models, the text parser, normalization
to standard form (with a back-map that transports solutions), the reduced
Euler characteristic and the substitution check every solver is tested against.

Standard forms are

    orientable:      [x1,y1]...[xg,yg] z1^-1 w1 z1 ... z(m-1)^-1 w(m-1) z(m-1) d = 1
    non-orientable:  x1^2 ... xg^2      z1^-1 w1 z1 ... z(m-1)^-1 w(m-1) z(m-1) d = 1

with [x,y] = x^-1 y^-1 x y.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import QuadfreeError
from .words import (
    Alphabet, CyclicWord, Letter, Word,
    cyclic_canon, cyclic_match, cyclic_reduce, free_reduce, invert, random_word,
)

logger = logging.getLogger(__name__)

DEFAULT_ALPHABET = "ab"


class EquationError(QuadfreeError):
    """Raised when an equation is malformed."""
    pass


class EquationParseError(EquationError):
    """Raised on a syntax error in the equation grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class QuadraticityError(EquationError):
    """Raised when a variable does not occur exactly twice."""
    pass


class SymbolClashError(EquationError):
    """Raised when a variable name coincides with a constant letter."""
    pass


class MissingAssignmentError(EquationError):
    """Raised when an assignment does not cover every variable."""
    pass


Assignment = Dict[str, Word]


@dataclass(frozen=True)
class RawQuadraticEquation:
    """An equation ``body = 1`` where each variable occurs exactly twice."""
    variables: Tuple[str, ...]
    alphabet: Alphabet
    body: Tuple[Letter, ...]

    def __post_init__(self) -> None:
        for name in self.variables:
            if name in self.alphabet:
                raise SymbolClashError(f"variable {name!r} is also a constant of alphabet {self.alphabet}")
        if len(set(self.variables)) != len(self.variables):
            raise EquationError("duplicate variable name")
        counts = {name: 0 for name in self.variables}
        for symbol, sign in self.body:
            if sign not in (1, -1):
                raise EquationError(f"token {symbol!r} has exponent {sign}")
            if symbol in counts:
                counts[symbol] += 1
            elif symbol not in self.alphabet:
                raise SymbolClashError(f"symbol {symbol!r} is neither a declared variable nor a constant")
        wrong = {name: count for name, count in counts.items() if count != 2}
        if wrong:
            details = ", ".join(f"{name} occurs {count} time(s)" for name, count in wrong.items())
            raise QuadraticityError(f"equation is not quadratic: {details}")

    @classmethod
    def from_body(cls, alphabet: Alphabet, body: Sequence[Letter]) -> RawQuadraticEquation:
        """Variables are the non-constant symbols, in order of first occurrence."""
        variables: List[str] = []
        for symbol, _ in body:
            if symbol not in alphabet and symbol not in variables:
                variables.append(symbol)
        return cls(tuple(variables), alphabet, tuple(body))

    def is_variable(self, symbol: str) -> bool:
        return symbol not in self.alphabet

    def __str__(self) -> str:
        return format_equation(self)


@dataclass(frozen=True)
class StandardFormEquation:
    """Eq. shapes above; the variable symbols are implicit and never stored."""
    alphabet: Alphabet
    orientable: bool
    genus: int
    coefficients: Tuple[CyclicWord, ...] = ()
    d: Optional[CyclicWord] = None

    def __post_init__(self) -> None:
        if self.genus < 0:
            raise EquationError(f"genus must be non-negative, got {self.genus}")
        if self.genus == 0 and not self.orientable:
            raise EquationError("a genus 0 standard form is orientable")
        if self.coefficients and self.d is None:
            raise EquationError("coefficients w1..w(m-1) require a last coefficient d")
        for coefficient in self.coefficients + ((self.d,) if self.d is not None else ()):
            if coefficient.length == 0:
                raise EquationError("standard-form coefficients must be nonempty")
            for symbol, _ in coefficient.representative:
                if symbol not in self.alphabet:
                    raise EquationError(f"coefficient {coefficient} uses {symbol!r} outside alphabet {self.alphabet}")

    @property
    def m(self) -> int:
        return len(self.coefficients) + (1 if self.d is not None else 0)

    def variable_names(self) -> List[str]:
        names = [f"x{i}" for i in range(1, self.genus + 1)]
        if self.orientable:
            names += [f"y{i}" for i in range(1, self.genus + 1)]
        names += [f"z{j}" for j in range(1, len(self.coefficients) + 1)]
        return names

    def body(self) -> RawQuadraticEquation:
        return standard_form_body(self)

    def __str__(self) -> str:
        return format_equation(standard_form_body(self))


def reduced_euler_characteristic(sf: StandardFormEquation) -> int:
    """2 - 2g for orientable forms, 2 - g otherwise."""
    return 2 - 2 * sf.genus if sf.orientable else 2 - sf.genus


def standard_form_body(sf: StandardFormEquation) -> RawQuadraticEquation:
    """Write a standard form out as a raw equation over x1.., y1.., z1.."""
    body: List[Letter] = []
    for i in range(1, sf.genus + 1):
        if sf.orientable:
            body += [(f"x{i}", -1), (f"y{i}", -1), (f"x{i}", 1), (f"y{i}", 1)]
        else:
            body += [(f"x{i}", 1), (f"x{i}", 1)]
    for j, w in enumerate(sf.coefficients, start=1):
        body.append((f"z{j}", -1))
        body.extend(w.representative.letters)
        body.append((f"z{j}", 1))
    if sf.d is not None:
        body.extend(sf.d.representative.letters)
    return RawQuadraticEquation(tuple(sf.variable_names()), sf.alphabet, tuple(body))


def format_equation(raw: RawQuadraticEquation) -> str:
    if not raw.body:
        return "1 = 1"
    tokens = [symbol if sign > 0 else f"{symbol}^-1" for symbol, sign in raw.body]
    return " ".join(tokens) + " = 1"


_NAME = re.compile(r"([A-Za-z][A-Za-z0-9_]*)(\^-1)?$")


def parse_equation(text: str, alphabet: Union[Alphabet, str] = DEFAULT_ALPHABET) -> RawQuadraticEquation:
    """
    Parse ``TOKEN TOKEN ... = 1``.

    A token is NAME or NAME^-1. Single lowercase letters of the alphabet are
    constants, every other name is a variable. The left side may be the
    literal ``1`` for the empty product.
    """
    if isinstance(alphabet, str):
        alphabet = Alphabet.from_string(alphabet)

    eq_pos = text.find("=")
    if eq_pos < 0:
        raise EquationParseError("missing '= 1'", len(text))
    if text.find("=", eq_pos + 1) >= 0:
        raise EquationParseError("more than one '='", text.find("=", eq_pos + 1))
    rhs = text[eq_pos + 1:]
    if rhs.strip() != "1":
        raise EquationParseError("right-hand side must be 1", eq_pos + 1)

    body: List[Letter] = []
    tokens = list(re.finditer(r"\S+", text[:eq_pos]))
    if len(tokens) == 1 and tokens[0].group() == "1":
        tokens = []
    elif not tokens:
        raise EquationParseError("empty left-hand side", 0)
    for match in tokens:
        parsed = _NAME.match(match.group())
        if parsed is None:
            raise EquationParseError(f"invalid token {match.group()!r}", match.start())
        name, inverse = parsed.group(1), parsed.group(2)
        body.append((name, -1 if inverse else 1))

    return RawQuadraticEquation.from_body(alphabet, body)


@dataclass(frozen=True)
class SubstitutionStep:
    """
    One elementary change of variables.

    ``backward`` writes each old variable whose meaning changes as a word in the
    new variables; ``forward`` writes each new variable as a word in the old ones.
    """
    backward: Mapping[str, Tuple[Letter, ...]]
    forward: Mapping[str, Tuple[Letter, ...]]
    note: str = ""


def _evaluate(tokens: Sequence[Letter], assignment: Mapping[str, Word], alphabet: Alphabet) -> Word:
    out: List[Letter] = []
    for symbol, sign in tokens:
        if symbol in alphabet:
            out.append((symbol, sign))
            continue
        value = assignment.get(symbol, Word((), True))
        out.extend(value.letters if sign > 0 else invert(value).letters)
    return free_reduce(out)


@dataclass(frozen=True)
class BackMap:
    """Transports solutions between a standard form and the raw equation it came from."""
    alphabet: Alphabet
    raw_variables: Tuple[str, ...]
    standard_variables: Tuple[str, ...]
    steps: Tuple[SubstitutionStep, ...] = ()

    def transport(self, assignment: Mapping[str, Word]) -> Assignment:
        """Standard-form assignment -> raw assignment."""
        current: Assignment = dict(assignment)
        for step in reversed(self.steps):
            previous = {name: value for name, value in current.items() if name not in step.forward}
            for name, tokens in step.backward.items():
                previous[name] = _evaluate(tokens, current, self.alphabet)
            current = previous
        return {name: current.get(name, Word((), True)) for name in self.raw_variables}

    def forward(self, assignment: Mapping[str, Word]) -> Assignment:
        """Raw assignment -> standard-form assignment."""
        current: Assignment = dict(assignment)
        for step in self.steps:
            following = {name: value for name, value in current.items() if name not in step.backward}
            for name, tokens in step.forward.items():
                following[name] = _evaluate(tokens, current, self.alphabet)
            current = following
        return {name: current.get(name, Word((), True)) for name in self.standard_variables}

    def __call__(self, assignment: Mapping[str, Word]) -> Assignment:
        return self.transport(assignment)


def _inv(tokens: Sequence[Letter]) -> List[Letter]:
    return [(symbol, -sign) for symbol, sign in reversed(tokens)]


def _reduce(tokens: Sequence[Letter]) -> List[Letter]:
    return list(free_reduce(tokens).letters)


@dataclass
class _Factor:
    kind: str  # "handle", "square" or "conjugate"
    variables: Tuple[str, ...]
    coefficient: Optional[CyclicWord] = None

    def tokens(self) -> List[Letter]:
        if self.kind == "handle":
            x, y = self.variables
            return [(x, -1), (y, -1), (x, 1), (y, 1)]
        if self.kind == "square":
            return [(self.variables[0], 1), (self.variables[0], 1)]
        assert self.coefficient is not None
        z = self.variables[0]
        return [(z, -1)] + list(self.coefficient.representative.letters) + [(z, 1)]


class _Normalizer:
    """Elementary-substitution normalization; each move is recorded for the back-map."""

    def __init__(self, raw: RawQuadraticEquation):
        self.raw = raw
        self.alphabet = raw.alphabet
        self.steps: List[SubstitutionStep] = []
        self.factors: List[_Factor] = []
        self.rest: List[Letter] = _reduce(raw.body)
        self._counter = 0

    def _fresh(self) -> str:
        self._counter += 1
        return f"_{self._counter}"

    def _record(self, backward: Dict[str, List[Letter]], forward: Dict[str, List[Letter]], note: str) -> None:
        self.steps.append(SubstitutionStep(
            {k: tuple(v) for k, v in backward.items()},
            {k: tuple(v) for k, v in forward.items()},
            note,
        ))
        logger.debug("normalize: %s", note)

    def _occurrences(self) -> Dict[str, List[int]]:
        occ: Dict[str, List[int]] = {}
        for position, (symbol, _) in enumerate(self.rest):
            if symbol not in self.alphabet:
                occ.setdefault(symbol, []).append(position)
        return occ

    def _rename_inverse(self, name: str) -> str:
        """Substitute name := fresh^-1 in the remainder."""
        fresh = self._fresh()
        self.rest = [(fresh, -sign) if symbol == name else (symbol, sign) for symbol, sign in self.rest]
        self._record({name: [(fresh, -1)]}, {fresh: [(name, -1)]}, f"{name} := {fresh}^-1")
        return fresh

    def _extract_square(self) -> bool:
        for x, (i, j) in self._occurrences().items():
            if self.rest[i][1] != self.rest[j][1]:
                continue
            if self.rest[i][1] < 0:
                x = self._rename_inverse(x)
            a, u, v = self.rest[:i], self.rest[i + 1:j], self.rest[j + 1:]
            s = self._fresh()
            # A x U x V  with  x = A^-1 s A U^-1  reads  s s A U^-1 V
            self._record(
                {x: _inv(a) + [(s, 1)] + a + _inv(u)},
                {s: a + [(x, 1)] + u + _inv(a)},
                f"square {x} -> {s}",
            )
            self.rest = _reduce(a + _inv(u) + v)
            self.factors.append(_Factor("square", (s,)))
            return True
        return False

    def _extract_handle(self) -> bool:
        occ = self._occurrences()
        for x, (i, j) in occ.items():
            for y, (k, l) in occ.items():
                if not i < k < j < l:
                    continue
                if self.rest[i][1] < 0:
                    x = self._rename_inverse(x)
                if self.rest[k][1] < 0:
                    y = self._rename_inverse(y)
                a, b, c = self.rest[:i], self.rest[i + 1:k], self.rest[k + 1:j]
                d, e = self.rest[j + 1:l], self.rest[l + 1:]
                g = a + d + c
                sx, sy = self._fresh(), self._fresh()
                # A x B y C x^-1 D y^-1 E  reads  [sx, sy] A D C B E
                self._record(
                    {
                        x: d + c + _inv(g) + [(sx, -1)] + g,
                        y: _inv(b) + _inv(g) + [(sy, -1)] + g + _inv(c),
                    },
                    {
                        sx: g + [(x, -1)] + d + c + _inv(g),
                        sy: g + _inv(c) + [(y, -1)] + _inv(b) + _inv(g),
                    },
                    f"handle {x},{y} -> {sx},{sy}",
                )
                self.rest = _reduce(a + d + c + b + e)
                self.factors.append(_Factor("handle", (sx, sy)))
                return True
        return False

    def _extract_conjugate(self) -> bool:
        for x, (i, j) in self._occurrences().items():
            if any(symbol not in self.alphabet for symbol, _ in self.rest[i + 1:j]):
                continue
            if self.rest[i][1] > 0:
                x = self._rename_inverse(x)
            a, c, e = self.rest[:i], self.rest[i + 1:j], self.rest[j + 1:]
            canon, u = _canonical_split(c)
            s = self._fresh()
            # A z^-1 c z E  with  c = u r u^-1, z = u s A  reads  s^-1 r s A E
            self._record({x: u + [(s, 1)] + a}, {s: _inv(u) + [(x, 1)] + _inv(a)}, f"conjugate {x} -> {s}")
            self.rest = _reduce(a + e)
            self.factors.append(_Factor("conjugate", (s,), canon))
            return True
        return False

    def _close_last_conjugate(self) -> None:
        """Empty d: the last conjugated coefficient becomes d and its conjugator is dropped."""
        last = self.factors.pop()
        z = last.variables[0]
        backward: Dict[str, List[Letter]] = {z: []}
        forward: Dict[str, List[Letter]] = {}
        for factor in self.factors:
            for v in factor.variables:
                backward[v] = [(v, 1)]
                if factor.kind == "conjugate":
                    forward[v] = [(v, 1), (z, -1)]
                else:
                    forward[v] = [(z, 1), (v, 1), (z, -1)]
        self._record(backward, forward, f"drop conjugator {z}")
        assert last.coefficient is not None
        self.rest = list(last.coefficient.representative.letters)

    def _conjugate_all(self, u: List[Letter], note: str) -> None:
        """Replace every factor product P by u^-1 P u."""
        backward: Dict[str, List[Letter]] = {}
        forward: Dict[str, List[Letter]] = {}
        for factor in self.factors:
            for v in factor.variables:
                if factor.kind == "conjugate":
                    backward[v] = [(v, 1)] + _inv(u)
                    forward[v] = [(v, 1)] + u
                else:
                    backward[v] = u + [(v, 1)] + _inv(u)
                    forward[v] = _inv(u) + [(v, 1)] + u
        self._record(backward, forward, note)

    def _swap(self, index: int) -> None:
        """F G -> G F' by conjugating F's variables with G."""
        first, second = self.factors[index], self.factors[index + 1]
        g = second.tokens()
        backward = {v: g + [(v, 1)] + _inv(g) for v in first.variables}
        forward = {v: _inv(g) + [(v, 1)] + g for v in first.variables}
        self._record(backward, forward, f"swap {first.kind} past {second.kind}")
        self.factors[index], self.factors[index + 1] = second, first

    def _handle_to_squares(self, index: int) -> None:
        """x^2 [y, z] = a^2 b^2 c^2 via x = abc, y = c^-2 b^-1 abc, z = c^-1 b c^2."""
        (x,) = self.factors[index].variables
        y, z = self.factors[index + 1].variables
        a, b, c = self._fresh(), self._fresh(), self._fresh()
        self._record(
            {
                x: [(a, 1), (b, 1), (c, 1)],
                y: [(c, -1), (c, -1), (b, -1), (a, 1), (b, 1), (c, 1)],
                z: [(c, -1), (b, 1), (c, 1), (c, 1)],
            },
            {
                a: [(x, 1), (x, 1), (y, -1), (z, -1), (y, 1), (x, -1)],
                b: [(x, 1), (y, -1), (z, 1), (y, 1), (x, -1), (z, 1), (y, 1), (x, -1)],
                c: [(x, 1), (y, -1), (z, -1)],
            },
            f"crosscap {x} absorbs handle {y},{z}",
        )
        self.factors[index:index + 2] = [_Factor("square", (a,)), _Factor("square", (b,)), _Factor("square", (c,))]

    def run(self) -> Tuple[StandardFormEquation, BackMap]:
        while self._extract_square() or self._extract_handle() or self._extract_conjugate():
            pass

        if not self.rest and self.factors and self.factors[-1].kind == "conjugate":
            self._close_last_conjugate()
        if self.rest:
            canon, u = _canonical_split(self.rest)
            if u:
                self._conjugate_all(u, "canonical rotation of d")
            self.rest = list(canon.representative.letters)

        surface = [f for f in self.factors if f.kind != "conjugate"]
        conjugates = [f for f in self.factors if f.kind == "conjugate"]
        orientable = not any(f.kind == "square" for f in surface)
        if not orientable:
            # squares first, then every handle turns into two more squares
            changed = True
            while changed:
                changed = False
                for index in range(len(surface) - 1):
                    if self.factors[index].kind == "handle" and self.factors[index + 1].kind == "square":
                        self._swap(index)
                        changed = True
            while any(f.kind == "handle" for f in self.factors):
                first_handle = next(i for i, f in enumerate(self.factors) if f.kind == "handle")
                self._handle_to_squares(first_handle - 1)
            surface = [f for f in self.factors if f.kind != "conjugate"]

        genus = len(surface)
        rename: Dict[str, str] = {}
        for i, factor in enumerate(surface, start=1):
            rename[factor.variables[0]] = f"x{i}"
            if factor.kind == "handle":
                rename[factor.variables[1]] = f"y{i}"
        for j, factor in enumerate(conjugates, start=1):
            rename[factor.variables[0]] = f"z{j}"
        self._record(
            {old: [(new, 1)] for old, new in rename.items()},
            {new: [(old, 1)] for old, new in rename.items()},
            "standard names",
        )

        coefficients = tuple(f.coefficient for f in conjugates if f.coefficient is not None)
        d = CyclicWord(Word(tuple(self.rest), True)) if self.rest else None
        sf = StandardFormEquation(self.alphabet, orientable or genus == 0, genus, coefficients, d)
        back = BackMap(self.alphabet, self.raw.variables, tuple(sf.variable_names()), tuple(self.steps))
        logger.debug("normalized %s to %s (%d steps)", self.raw, sf, len(self.steps))
        return sf, back


def _canonical_split(tokens: Sequence[Letter]) -> Tuple[CyclicWord, List[Letter]]:
    """Write a constant word as u r u^-1 with r in canonical rotation."""
    core, conjugator = cyclic_reduce(free_reduce(tokens))
    canon = cyclic_canon(core)
    k = cyclic_match(core, canon)
    assert k is not None
    return canon, list(conjugator.letters) + list(core.letters[:k])


def normalize(raw: RawQuadraticEquation) -> Tuple[StandardFormEquation, BackMap]:
    """
    Bring a quadratic equation to standard form.

    Solvability is preserved both ways. The returned BackMap sends solutions of
    the standard form to solutions of ``raw`` (and ``BackMap.forward`` the
    other way).
    """
    return _Normalizer(raw).run()


Equation = Union[RawQuadraticEquation, StandardFormEquation]


def as_raw(eq: Equation) -> RawQuadraticEquation:
    return eq if isinstance(eq, RawQuadraticEquation) else standard_form_body(eq)


def evaluate(eq: Equation, assignment: Mapping[str, Word]) -> Word:
    """Freely reduced value of the left-hand side under ``assignment``."""
    raw = as_raw(eq)
    missing = [name for name in raw.variables if name not in assignment]
    if missing:
        raise MissingAssignmentError(f"no value for variable(s) {', '.join(missing)}")
    return _evaluate(raw.body, assignment, raw.alphabet)


def check_solution(eq: Equation, assignment: Mapping[str, Word]) -> bool:
    return len(evaluate(eq, assignment)) == 0


def random_raw_equation(
    rng,
    alphabet: Alphabet,
    max_variables: int = 3,
    max_constant_length: int = 6,
) -> RawQuadraticEquation:
    """Random quadratic body: each variable twice with random signs, random constant letters."""
    n_vars = rng.randint(1, max_variables)
    body: List[Letter] = []
    for i in range(1, n_vars + 1):
        body += [(f"v{i}", rng.choice((1, -1))), (f"v{i}", rng.choice((1, -1)))]
    letters = alphabet.signed_letters()
    body += [rng.choice(letters) for _ in range(rng.randint(0, max_constant_length))]
    rng.shuffle(body)
    return RawQuadraticEquation.from_body(alphabet, body)


def planted_raw_equation(
    rng,
    alphabet: Alphabet,
    max_variables: int = 3,
    max_constant_length: int = 6,
    max_solution_length: int = 2,
) -> Tuple[RawQuadraticEquation, Assignment]:
    """
    Random quadratic equation with a known solution.

    Half the constant budget is placed at random, the closing constant block is
    whatever makes the planted assignment a solution.
    """
    raw = random_raw_equation(rng, alphabet, max_variables, max_constant_length // 2)
    solution = {name: random_word(rng, alphabet, max_solution_length) for name in raw.variables}
    value = _evaluate(raw.body, solution, alphabet)
    body = raw.body + tuple(invert(value).letters)
    return RawQuadraticEquation(raw.variables, alphabet, body), solution


def random_standard_solution(
    sf: StandardFormEquation,
    rng,
    max_length: int = 2,
    attempts: int = 200,
) -> Optional[Assignment]:
    """
    Look for a solution by random choice of every variable but the last conjugator.

    The last conjugator is then solved for exactly when the remaining product is
    conjugate to its coefficient. Returns None when no attempt succeeds.
    """
    names = sf.variable_names()
    if sf.m == 0:
        return {name: Word((), True) for name in names}
    for _ in range(attempts):
        assignment = {name: random_word(rng, sf.alphabet, max_length) for name in names}
        if sf.coefficients:
            last = f"z{len(sf.coefficients)}"
            w = sf.coefficients[-1]
            assignment[last] = Word((), True)
            # prefix . last^-1 w last . d = 1  <=>  last^-1 w last = prefix^-1 d^-1
            full = evaluate(sf, assignment)
            d = sf.d
            assert d is not None
            prefix = free_reduce(full.letters + invert(d.representative).letters + invert(w.representative).letters)
            target = free_reduce(invert(prefix).letters + invert(d.representative).letters)
            if cyclic_canon(target) == w:
                _, u = _canonical_split(target.letters)
                assignment[last] = Word(tuple(_inv(u)), True)
        if check_solution(sf, assignment):
            return assignment
    return None
