"""High-precision approximate scalars for the steps that need square roots.

Exact rational arithmetic carries every construction as far as it can go; the
pieces that genuinely need radicals (orthonormalization, positive square
roots, spectral splits) run on MPFR floats via gmpy2.  An approximate scalar
is a high-precision float together with the ambient tolerances; equality is
only ever tested through those tolerances.

The context defaults to a 128-bit significand with an internal tolerance of
1e-20 for structural decisions (rank cuts, degeneracy detection) and a
reporting tolerance of 1e-8 for surfaced residuals.

gmpy2 contexts are thread-local: a worker thread that wants non-default
precision must call set_precision itself before touching mpfr values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2


@dataclass
class ApproxContext:
    precision: int = 128
    internal_tol: float = 1e-20
    report_tol: float = 1e-8


_CTX = ApproxContext()
gmpy2.get_context().precision = _CTX.precision


def get_context() -> ApproxContext:
    return _CTX


def set_precision(bits: int) -> None:
    if bits < 64:
        raise ValueError(f"precision must be at least 64 bits, got {bits}")
    _CTX.precision = bits
    gmpy2.get_context().precision = bits


def mpf(x) -> gmpy2.mpfr:
    """Convert ints, rationals, floats or decimal strings to mpfr."""
    if isinstance(x, Fraction):
        return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))
    return gmpy2.mpfr(x)


def sqrt(x) -> gmpy2.mpfr:
    return gmpy2.sqrt(mpf(x))


def compare(x, y):
    """Signed difference; |compare(x, y)| <= tol is the only equality notion."""
    return mpf(x) - mpf(y)


def is_close(x, y, tol=None) -> bool:
    if tol is None:
        tol = _CTX.report_tol
    return abs(compare(x, y)) <= mpf(tol)


def fmt(x) -> str:
    """Deterministic decimal rendering that round-trips exactly at the working precision."""
    return str(gmpy2.mpfr(x))
