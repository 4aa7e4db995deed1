import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genfil import (
    FinProbSpace,
    NullPreservationError,
    ProbMorphism,
    RandomVariable,
    conditional_expectation,
    expectation,
    is_null_preserving,
    pushforward,
)

from oracles import defining_identity_max_error

TOL = 1e-12


def two_point(pa=0.3, pb=0.7):
    return FinProbSpace(("a", "b"), {"a": pa, "b": pb})


def one_point():
    return FinProbSpace(("x",), {"x": 1.0})


class TestFinProbSpace:
    def test_valid(self):
        s = two_point()
        assert s.weight("a") == 0.3
        assert s.mass(("a", "b")) == pytest.approx(1.0)

    def test_bad_mass(self):
        with pytest.raises(ValueError):
            FinProbSpace(("a", "b"), {"a": 0.3, "b": 0.3})

    def test_negative_weight(self):
        with pytest.raises(ValueError):
            FinProbSpace(("a", "b"), {"a": -0.1, "b": 1.1})

    def test_duplicate_outcomes(self):
        with pytest.raises(ValueError):
            FinProbSpace(("a", "a"), {"a": 1.0})

    def test_support(self):
        s = FinProbSpace(("a", "b", "c"), {"a": 0.5, "b": 0.5, "c": 0.0})
        assert s.support() == ("a", "b")


class TestPushforward:
    def test_total_collapse(self):
        m = ProbMorphism(two_point(), one_point(), {"a": "x", "b": "x"})
        assert pushforward(m) == {"x": pytest.approx(1.0)}

    def test_identity(self):
        s = two_point()
        m = ProbMorphism(s, s, {"a": "a", "b": "b"})
        pushed = pushforward(m)
        assert pushed["a"] == pytest.approx(0.3)
        assert pushed["b"] == pytest.approx(0.7)

    def test_four_paths_onto_one_branch(self):
        # four equal outcomes all mapped onto the same point of a two-point target
        source = FinProbSpace(tuple("pqrs"), {o: 0.25 for o in "pqrs"})
        target = FinProbSpace(("w0", "w1"), {"w0": 0.5, "w1": 0.5})
        m = ProbMorphism(source, target, {o: "w0" for o in "pqrs"})
        pushed = pushforward(m)
        assert pushed["w0"] == pytest.approx(1.0)
        assert pushed["w1"] == 0.0

    def test_preserves_total_mass(self):
        source = FinProbSpace(tuple("pqrs"), {"p": 0.1, "q": 0.2, "r": 0.3, "s": 0.4})
        target = two_point()
        m = ProbMorphism(source, target, {"p": "a", "q": "a", "r": "b", "s": "b"})
        assert sum(pushforward(m).values()) == pytest.approx(1.0, abs=TOL)


class TestNullPreservation:
    def test_positive_target_always_fine(self):
        m = ProbMorphism(two_point(), two_point(), {"a": "b", "b": "b"})
        assert is_null_preserving(m).ok

    def test_mass_onto_null_point(self):
        target = FinProbSpace(("a", "b"), {"a": 1.0, "b": 0.0})
        m = ProbMorphism(two_point(), target, {"a": "a", "b": "b"})
        check = is_null_preserving(m)
        assert not check.ok
        assert check.witness == "b"

    def test_error_names_witness(self):
        target = FinProbSpace(("a", "b"), {"a": 1.0, "b": 0.0})
        m = ProbMorphism(two_point(), target, {"a": "a", "b": "b"})
        X = RandomVariable.constant(m.source, 1.0)
        with pytest.raises(NullPreservationError) as err:
            conditional_expectation(X, m)
        assert err.value.witness == "b"


class TestConditionalExpectation:
    def test_symmetric_coin(self):
        # one-step collapse of a fair up/down move onto the root
        source = FinProbSpace((0, 1), {0: 0.5, 1: 0.5})
        m = ProbMorphism(source, one_point(), {0: "x", 1: "x"})
        X = RandomVariable(source, {0: 0.0, 1: 1.0})
        assert conditional_expectation(X, m)("x") == pytest.approx(0.5, abs=TOL)

    def test_constants_preserved(self):
        source = FinProbSpace(tuple("pqrs"), {"p": 0.1, "q": 0.2, "r": 0.3, "s": 0.4})
        m = ProbMorphism(source, two_point(), {"p": "a", "q": "a", "r": "b", "s": "b"})
        Y = conditional_expectation(RandomVariable.constant(source, 4.25), m)
        for o in m.target.support():
            assert Y(o) == pytest.approx(4.25, abs=TOL)

    def test_zero_mass_convention(self):
        target = FinProbSpace(("a", "b"), {"a": 1.0, "b": 0.0})
        source = FinProbSpace(("p", "q"), {"p": 1.0, "q": 0.0})
        m = ProbMorphism(source, target, {"p": "a", "q": "b"})
        Y = conditional_expectation(RandomVariable(source, {"p": 2.0, "q": 9.0}), m)
        assert Y("b") == 0.0

    def test_defining_identity_all_subsets(self):
        source = FinProbSpace(tuple(range(8)), {i: (i + 1) / 36 for i in range(8)})
        target = FinProbSpace(("a", "b", "c"), {"a": 3 / 36, "b": 11 / 36, "c": 22 / 36})
        mapping = {0: "a", 1: "a", 2: "b", 3: "b", 4: "c", 5: "c", 6: "c", 7: "c"}
        m = ProbMorphism(source, target, mapping)
        X = RandomVariable(source, {i: math.sin(i) * 3 + i for i in range(8)})
        Y = conditional_expectation(X, m)
        assert defining_identity_max_error(X, m, Y) <= 1e-12

    def test_wrong_space_rejected(self):
        m = ProbMorphism(two_point(), one_point(), {"a": "x", "b": "x"})
        X = RandomVariable.constant(one_point(), 1.0)
        with pytest.raises(ValueError):
            conditional_expectation(X, m)

    @given(st.floats(-5, 5), st.floats(-5, 5))
    def test_linearity(self, a, b):
        source = FinProbSpace(tuple("pqrs"), {"p": 0.1, "q": 0.2, "r": 0.3, "s": 0.4})
        m = ProbMorphism(source, two_point(), {"p": "a", "q": "a", "r": "b", "s": "b"})
        X = RandomVariable(source, {"p": 1.0, "q": -2.0, "r": 0.5, "s": 3.0})
        Z = RandomVariable(source, {"p": -1.5, "q": 2.5, "r": 7.0, "s": 0.0})
        combo = RandomVariable(source, {o: a * X(o) + b * Z(o) for o in source.outcomes})
        lhs = conditional_expectation(combo, m)
        ex, ez = conditional_expectation(X, m), conditional_expectation(Z, m)
        for o in m.target.support():
            assert lhs(o) == pytest.approx(a * ex(o) + b * ez(o), abs=1e-9)

    def test_tower_property(self):
        # u -> t -> s chain; compare iterated against direct conditioning
        bottom = FinProbSpace(tuple(range(8)), {i: (i + 1) / 36 for i in range(8)})
        middle = FinProbSpace(tuple("abcd"), {"a": 3 / 36, "b": 7 / 36, "c": 11 / 36, "d": 15 / 36})
        top = FinProbSpace(("L", "R"), {"L": 10 / 36, "R": 26 / 36})
        m2 = ProbMorphism(bottom, middle, {0: "a", 1: "a", 2: "b", 3: "b", 4: "c", 5: "c", 6: "d", 7: "d"})
        m1 = ProbMorphism(middle, top, {"a": "L", "b": "L", "c": "R", "d": "R"})
        X = RandomVariable(bottom, {i: i * i - 3.0 for i in range(8)})
        iterated = conditional_expectation(conditional_expectation(X, m2), m1)
        direct = conditional_expectation(X, m2.then(m1))
        for o in top.support():
            assert iterated(o) == pytest.approx(direct(o), abs=1e-12)


class TestExpectation:
    def test_constant(self):
        assert expectation(RandomVariable.constant(two_point(), 1.0)) == pytest.approx(1.0)

    def test_bernoulli_mean(self):
        s = FinProbSpace((0, 1), {0: 0.7, 1: 0.3})
        assert expectation(RandomVariable(s, {0: 0.0, 1: 1.0})) == pytest.approx(0.3)

    def test_centered_coin(self):
        s = FinProbSpace((0, 1), {0: 0.5, 1: 0.5})
        assert expectation(RandomVariable(s, {0: -1.0, 1: 1.0})) == pytest.approx(0.0)
