"""q-arithmetic: frozen values, mutual oracles, exact invariants."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from djtwist.qnum import (
    format_rational,
    parse_rational,
    q_binomial,
    q_factorial,
    q_int,
)

QS = [Fraction(1, 2), Fraction(2, 3), Fraction(3)]


def q_int_recurrence(n, q):
    """Independent oracle: [0]=0, [1]=1, [n+1] = [2][n] - [n-1]."""
    two = q + 1 / q
    lo, hi = Fraction(0), Fraction(1)
    if n == 0:
        return lo
    for _ in range(n - 1):
        lo, hi = hi, two * hi - lo
    return hi


def q_binomial_pascal(n, k, q):
    """Independent oracle: the q-Pascal recurrence."""
    if k == 0 or k == n:
        return Fraction(1)
    return q**-k * q_binomial_pascal(n - 1, k, q) + q ** (n - k) * q_binomial_pascal(
        n - 1, k - 1, q
    )


class TestQInt:
    @pytest.mark.parametrize("q", QS)
    def test_one(self, q):
        assert q_int(1, q) == 1

    def test_two_at_q2(self):
        # algebraic identity [2] = q + 1/q
        assert q_int(2, Fraction(2)) == Fraction(5, 2)

    def test_three_at_half(self):
        assert q_int(3, Fraction(1, 2)) == Fraction(21, 4)
        assert q_int(3, Fraction(1, 2)) == q_int_recurrence(3, Fraction(1, 2))

    @pytest.mark.parametrize("q", QS)
    @pytest.mark.parametrize("n", range(0, 13))
    def test_recurrence_oracle(self, n, q):
        assert q_int(n, q) == q_int_recurrence(n, q)

    @pytest.mark.parametrize("q", QS)
    @pytest.mark.parametrize("n", range(1, 10))
    def test_symmetries(self, n, q):
        assert q_int(n, q) == q_int(n, 1 / q)
        assert q_int(-n, q) == -q_int(n, q)
        assert q_int(n, q) > 0

    def test_rejects_bad_q(self):
        with pytest.raises(ValueError):
            q_int(2, Fraction(1))
        with pytest.raises(ValueError):
            q_int(2, Fraction(0))
        with pytest.raises(ValueError):
            q_int(2, Fraction(-2))


class TestQBinomial:
    @pytest.mark.parametrize("q", QS)
    @pytest.mark.parametrize("n", range(0, 8))
    def test_k_zero(self, n, q):
        assert q_binomial(n, 0, q) == 1

    @pytest.mark.parametrize("q", QS)
    def test_two_one(self, q):
        assert q_binomial(2, 1, q) == q_int(2, q)

    def test_four_two_both_formulas(self):
        q = Fraction(1, 2)
        assert q_binomial(4, 2, q) == q_binomial_pascal(4, 2, q)

    @pytest.mark.parametrize("q", QS)
    def test_symmetry_and_pascal(self, q):
        for n in range(13):
            for k in range(n + 1):
                val = q_binomial(n, k, q)
                assert val == q_binomial(n, n - k, q)
                assert val == q_binomial_pascal(n, k, q)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            q_binomial(3, -1, Fraction(1, 2))
        with pytest.raises(ValueError):
            q_binomial(3, 4, Fraction(1, 2))

    def test_factorial_positive(self):
        assert q_factorial(0, Fraction(1, 2)) == 1
        assert q_factorial(4, Fraction(3)) > 0
        with pytest.raises(ValueError):
            q_factorial(-1, Fraction(1, 2))


class TestSerialization:
    @pytest.mark.parametrize("text", ["5/2", "-3/1", "7/3", "0/1"])
    def test_round_trip(self, text):
        assert format_rational(parse_rational(text)) == text

    def test_plain_integer(self):
        assert parse_rational("-3") == Fraction(-3)
        assert format_rational(Fraction(-3)) == "-3/1"


rationals = st.fractions(
    min_value=Fraction(-50), max_value=Fraction(50), max_denominator=40
)


class TestFieldAxioms:
    @given(rationals, rationals, rationals)
    def test_ring_axioms(self, a, b, c):
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)
        assert a + b == b + a and a * b == b * a

    @given(rationals)
    def test_normal_form(self, a):
        from math import gcd

        assert a.denominator > 0
        assert gcd(a.numerator, a.denominator) == 1
        if a != 0:
            assert a * (1 / a) == 1

    @given(st.integers(min_value=-15, max_value=15))
    def test_q_int_matches_recurrence(self, n):
        q = Fraction(2, 3)
        if n >= 0:
            assert q_int(n, q) == q_int_recurrence(n, q)
        else:
            assert q_int(n, q) == -q_int_recurrence(-n, q)
