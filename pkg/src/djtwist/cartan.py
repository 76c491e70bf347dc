"""Cartan matrices, symmetrizers and weight bookkeeping.

Conventions frozen here once and for all: rows of the Cartan matrix a are
indexed by simple roots, a_ij = <alpha_j, alpha_i^vee>.  For B2 that means
a = [[2, -1], [-2, 2]] with symmetrizers d = (2, 1), i.e. the first node is
the long root.  Only the types needed at desk scale are tabulated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd


@dataclass(frozen=True)
class CartanDatum:
    """A Cartan matrix with its minimal positive symmetrizers."""

    rank: int
    a: tuple  # rank x rank tuple of tuples of ints
    d: tuple  # rank positive ints, gcd 1, (d_i a_ij) symmetric
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(tuple(int(x) for x in row) for row in self.a))
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        problems = validate_cartan(self.rank, self.a, self.d)
        if problems:
            raise ValueError("invalid Cartan datum: " + "; ".join(problems))

    def to_json(self) -> dict:
        return {"label": self.label, "a": [list(r) for r in self.a], "d": list(self.d)}

    @classmethod
    def from_json(cls, data: dict) -> "CartanDatum":
        return cls(rank=len(data["d"]), a=data["a"], d=data["d"], label=data.get("label", ""))


def validate_cartan(rank: int, a, d) -> list:
    """All violated invariants, empty when the datum is a valid Cartan datum."""
    problems = []
    if rank < 1:
        problems.append(f"rank must be positive, got {rank}")
        return problems
    if len(a) != rank or any(len(row) != rank for row in a):
        problems.append("a must be rank x rank")
        return problems
    if len(d) != rank:
        problems.append("d must have length rank")
        return problems
    for i in range(rank):
        if a[i][i] != 2:
            problems.append(f"a[{i}][{i}] != 2")
        for j in range(rank):
            if i != j and a[i][j] > 0:
                problems.append(f"a[{i}][{j}] > 0 off the diagonal")
            if i != j and (a[i][j] == 0) != (a[j][i] == 0):
                problems.append(f"a[{i}][{j}] = 0 but a[{j}][{i}] != 0")
    if any(di < 1 for di in d):
        problems.append("symmetrizers must be positive")
    else:
        for i in range(rank):
            for j in range(rank):
                if d[i] * a[i][j] != d[j] * a[j][i]:
                    problems.append(f"(d_i a_ij) not symmetric at ({i},{j})")
        g = 0
        for di in d:
            g = gcd(g, di)
        if g != 1:
            problems.append(f"gcd of symmetrizers is {g}, not 1")
    return problems


def _type_a(n: int) -> CartanDatum:
    a = [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(n)] for i in range(n)]
    return CartanDatum(rank=n, a=a, d=[1] * n, label=f"A{n}")


_BUILTINS = {
    "A1": lambda: _type_a(1),
    "A2": lambda: _type_a(2),
    "A3": lambda: _type_a(3),
    "A4": lambda: _type_a(4),
    "B2": lambda: CartanDatum(rank=2, a=[[2, -1], [-2, 2]], d=[2, 1], label="B2"),
    "G2": lambda: CartanDatum(rank=2, a=[[2, -1], [-3, 2]], d=[3, 1], label="G2"),
}

SUPPORTED_LABELS = tuple(sorted(_BUILTINS))


def builtin_cartan(label: str) -> CartanDatum:
    """Standard Cartan datum for a type tag (A1..A4, B2, G2)."""
    try:
        return _BUILTINS[label]()
    except KeyError:
        raise ValueError(
            f"unknown Cartan type {label!r}; supported: {', '.join(SUPPORTED_LABELS)}"
        ) from None


def q_i(cartan: CartanDatum, q: Fraction, i: int) -> Fraction:
    """q_i = q**d_i for the 1-based node index i, exact."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if not 1 <= i <= cartan.rank:
        raise ValueError(f"node index {i} out of range 1..{cartan.rank}")
    return q ** cartan.d[i - 1]


@dataclass(frozen=True)
class WeightLabel:
    """An integral weight in coroot coordinates."""

    coordinates: tuple

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(int(c) for c in self.coordinates))

    @property
    def dominant(self) -> bool:
        return all(c >= 0 for c in self.coordinates)


def save_cartan(cartan: CartanDatum, path) -> None:
    with open(path, "w") as fh:
        json.dump(cartan.to_json(), fh, indent=2, sort_keys=True)


def load_cartan(path) -> CartanDatum:
    with open(path) as fh:
        return CartanDatum.from_json(json.load(fh))
