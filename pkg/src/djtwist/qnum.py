"""Exact q-arithmetic over arbitrary-precision rationals.

The deformation parameter q is a positive rational throughout, which keeps
every algebraic identity checkable with exact arithmetic.  q-integers use the
symmetric convention

    [n]_q = (q^n - q^-n) / (q - q^-1),

so [n]_q = [n]_{1/q} and [-n]_q = -[n]_q.  Gaussian binomials are built from
q-factorials.  None of these are defined at q = 1; callers that want the
classical limit substitute the plain integer themselves.
"""

from __future__ import annotations

from fractions import Fraction

Rational = Fraction


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or "p" into an exact rational."""
    s = text.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def format_rational(x: Fraction) -> str:
    """Serialize a rational as "p/q" (denominator always present)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _check_q(q: Fraction, allow_one: bool = False) -> Fraction:
    q = Fraction(q)
    if q <= 0:
        raise ValueError(f"q must be a positive rational, got {q}")
    if not allow_one and q == 1:
        raise ValueError("q = 1 is not supported here; use the classical limit directly")
    return q


def q_int(n: int, q: Fraction) -> Fraction:
    """The q-integer [n]_q = (q^n - q^-n)/(q - q^-1), exact."""
    q = _check_q(q)
    return (q**n - q**-n) / (q - 1 / q)


def q_factorial(n: int, q: Fraction) -> Fraction:
    """[n]_q! = prod_{m=1}^{n} [m]_q (empty product for n = 0)."""
    if n < 0:
        raise ValueError(f"q-factorial needs n >= 0, got {n}")
    q = _check_q(q)
    out = Fraction(1)
    for m in range(1, n + 1):
        out *= q_int(m, q)
    return out


def q_binomial(n: int, k: int, q: Fraction) -> Fraction:
    """Gaussian binomial [n choose k]_q via q-factorials, exact."""
    if k < 0 or k > n:
        raise ValueError(f"q-binomial needs 0 <= k <= n, got n={n}, k={k}")
    q = _check_q(q)
    return q_factorial(n, q) / (q_factorial(k, q) * q_factorial(n - k, q))
