"""Tests for quadratic equations and their standard forms."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadfree.core.equations import (
    EquationError,
    EquationParseError,
    MissingAssignmentError,
    QuadraticityError,
    StandardFormEquation,
    SymbolClashError,
    check_solution,
    format_equation,
    normalize,
    parse_equation,
    planted_raw_equation,
    random_raw_equation,
    random_standard_solution,
    reduced_euler_characteristic,
    standard_form_body,
)
from quadfree.core.words import Alphabet, Word, cyclic_canon, find_conjugator, invert, parse_word
from quadfree.generators.binpack import BinPackingInstance, to_equation

AB = Alphabet.from_string("ab")
EMPTY = Word((), True)


class TestParse:
    def test_conjugate_body(self):
        raw = parse_equation("x a x^-1 b = 1")
        assert raw.variables == ("x",)
        assert raw.body == (("x", 1), ("a", 1), ("x", -1), ("b", 1))

    def test_commutator_body(self):
        raw = parse_equation("x y x^-1 y^-1 = 1")
        assert raw.variables == ("x", "y")

    def test_single_occurrence(self):
        with pytest.raises(QuadraticityError):
            parse_equation("x a = 1")

    def test_missing_right_side(self):
        with pytest.raises(EquationParseError):
            parse_equation("x x")

    def test_bad_token_position(self):
        with pytest.raises(EquationParseError) as info:
            parse_equation("x x ?? = 1")
        assert info.value.position == 4

    def test_uppercase_variable_is_not_a_constant(self):
        raw = parse_equation("X a X^-1 = 1")
        assert raw.variables == ("X",)

    def test_constant_outside_alphabet_is_a_variable(self):
        raw = parse_equation("c a c = 1", "ab")
        assert raw.variables == ("c",)

    def test_empty_product(self):
        assert parse_equation("1 = 1").body == ()

    def test_symbol_clash(self):
        from quadfree.core.equations import RawQuadraticEquation
        with pytest.raises(SymbolClashError):
            RawQuadraticEquation(("a",), AB, (("a", 1), ("a", 1)))


class TestStandardForm:
    def test_genus_zero_is_orientable(self):
        with pytest.raises(EquationError):
            StandardFormEquation(AB, False, 0)

    def test_coefficients_need_d(self):
        with pytest.raises(EquationError):
            StandardFormEquation(AB, True, 0, (cyclic_canon("a"),))

    def test_body_and_names(self):
        sf = StandardFormEquation(AB, True, 1, (cyclic_canon("a"),), cyclic_canon("b"))
        assert sf.m == 2
        assert sf.variable_names() == ["x1", "y1", "z1"]
        assert str(sf) == "x1^-1 y1^-1 x1 y1 z1^-1 a z1 b = 1"

    def test_non_orientable_body_parses_back(self):
        raw = standard_form_body(StandardFormEquation(AB, False, 2))
        assert raw.variables == ("x1", "x2")
        text = format_equation(raw)
        assert text == "x1 x1 x2 x2 = 1"
        assert parse_equation(text).body == raw.body

    def test_empty_product_text(self):
        assert format_equation(parse_equation("1 = 1")) == "1 = 1"

    @pytest.mark.parametrize("orientable,genus,chi", [(True, 1, 0), (False, 3, -1), (True, 0, 2)])
    def test_reduced_euler_characteristic(self, orientable, genus, chi):
        assert reduced_euler_characteristic(StandardFormEquation(AB, orientable, genus)) == chi


class TestNormalize:
    def test_conjugate(self):
        sf, back = normalize(parse_equation("x a x^-1 b = 1"))
        assert (sf.orientable, sf.genus, sf.m) == (True, 0, 2)
        assert [str(w) for w in sf.coefficients] == ["a"]
        assert str(sf.d) == "b"

    def test_commutator(self):
        sf, _ = normalize(parse_equation("x y x^-1 y^-1 = 1"))
        assert (sf.orientable, sf.genus, sf.m) == (True, 1, 0)

    def test_projective_plane(self):
        # (xy)^2: y is absorbed into the crosscap
        sf, _ = normalize(parse_equation("x y x y = 1"))
        assert (sf.orientable, sf.genus, sf.m) == (False, 1, 0)

    def test_two_squares(self):
        sf, _ = normalize(parse_equation("x x y y = 1"))
        assert (sf.orientable, sf.genus, sf.m) == (False, 2, 0)

    def test_square_with_handle_becomes_three_squares(self):
        sf, back = normalize(parse_equation("u u x y x^-1 y^-1 a = 1"))
        assert (sf.orientable, sf.genus, sf.m) == (False, 3, 1)
        assert str(sf.d) == "a"

    def test_constant_only_rotation(self):
        sf, back = normalize(parse_equation("x a x^-1 b a^-1 = 1"))
        assert sf.m == 2
        assert str(sf.d) == "Ab"

    def test_back_map_transports_solution(self):
        sf, back = normalize(parse_equation("x a x^-1 a^-1 = 1"))
        solution = random_standard_solution(sf, random.Random(3))
        assert solution is not None
        assert check_solution(parse_equation("x a x^-1 a^-1 = 1"), back(solution))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_planted_round_trip(self, seed):
        rng = random.Random(seed)
        raw, planted = planted_raw_equation(rng, AB, max_variables=3, max_constant_length=6)
        sf, back = normalize(raw)
        forward = back.forward(planted)
        assert check_solution(sf, forward)
        assert check_solution(raw, back(forward))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_coefficients_are_cyclically_reduced(self, seed):
        raw = random_raw_equation(random.Random(seed), AB)
        sf, _ = normalize(raw)
        for coefficient in sf.coefficients + ((sf.d,) if sf.d is not None else ()):
            assert coefficient.length > 0
            assert cyclic_canon(coefficient.representative) == coefficient
        assert reduced_euler_characteristic(sf) <= 2
        assert (reduced_euler_characteristic(sf) == 2) == (sf.genus == 0)


class TestCheckSolution:
    def test_trivial_conjugator(self):
        assert check_solution(parse_equation("x a x^-1 a^-1 = 1"), {"x": EMPTY})

    def test_not_a_solution(self):
        assert not check_solution(parse_equation("x a x^-1 b = 1"), {"x": EMPTY})

    def test_missing_variable(self):
        with pytest.raises(MissingAssignmentError):
            check_solution(parse_equation("x a x^-1 b = 1"), {})

    def test_packing_equation_single_item(self):
        sf = to_equation(BinPackingInstance((3,), 3, 1, exact=True))
        w1, d = sf.coefficients[0].representative, sf.d.representative
        z1 = find_conjugator(w1, invert(d))
        assert z1 is not None
        assert check_solution(sf, {"z1": z1})

    def test_x_squared_solution(self):
        assert check_solution(parse_equation("x x a a = 1"), {"x": parse_word("A")})
