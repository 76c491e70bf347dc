"""Finite-dimensional representations of quantized enveloping algebras.

Generators E_i, F_i, K_i act by dense matrices over exact rationals at a
fixed rational q > 0, q != 1.  A representation carries the positive-definite
gram matrix of its inner product; the dagger below always means the
gram-adjoint X -> gram^-1 X^T gram.

One Hopf convention is used everywhere (see HOPF); mixing conventions is the
classic source of silent sign bugs in this corner of algebra, so tensor
products, the adjoint action and the star checks all read their formulas from
the same record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .cartan import CartanDatum, builtin_cartan
from .qnum import format_rational, parse_rational, q_binomial, q_int


@dataclass(frozen=True)
class HopfConvention:
    """The fixed comultiplication / counit / antipode formulas.

    Delta(K) = K (x) K
    Delta(E) = E (x) K + 1 (x) E
    Delta(F) = F (x) 1 + K^-1 (x) F
    eps(E) = eps(F) = 0, eps(K) = 1
    S(K) = K^-1, S(E) = -E K^-1, S(F) = -K F
    """

    def tensor_e(self, E1, K2, E2):
        return linalg.kron(E1, K2) + linalg.kron(_identity_like(E1, E1.shape[0]), E2)

    def tensor_f(self, F1, K1inv, F2):
        return linalg.kron(F1, _identity_like(F2, F2.shape[0])) + linalg.kron(K1inv, F2)

    def tensor_k(self, K1, K2):
        return linalg.kron(K1, K2)

    def antipode_e(self, E, Kinv):
        return -linalg.matmul(E, Kinv)

    def antipode_f(self, F, K):
        return -linalg.matmul(K, F)

    def antipode_k(self, Kinv):
        return Kinv


HOPF = HopfConvention()


def _identity_like(M, n):
    zero = M[0, 0] * 0
    out = np.empty((n, n), dtype=object)
    out[:, :] = zero
    for i in range(n):
        out[i, i] = zero + 1
    return out


# ---------------------------------------------------------------------------
# ladder modules (internal; q = 1 allowed and gives the classical module)
# ---------------------------------------------------------------------------


def _qn(m: int, q: Fraction) -> Fraction:
    return Fraction(m) if q == 1 else q_int(m, q)


def su2_ladder(n: int, q: Fraction):
    """Weight-basis data for the (n+1)-dimensional ladder module.

    Returns (E, F, exps, gram_diag) with F v_m = [m+1] v_{m+1},
    E v_m = [n-m+1] v_{m-1}, K v_m = q^(n-2m) v_m, and the diagonal gram
    (normalized g_0 = 1) that the dagger relations require.
    """
    if n < 0:
        raise ValueError(f"spin label must be >= 0, got {n}")
    q = Fraction(q)
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    dim = n + 1
    E = linalg.qzeros(dim, dim)
    F = linalg.qzeros(dim, dim)
    for m in range(n):
        F[m + 1, m] = _qn(m + 1, q)
        E[m, m + 1] = _qn(n - m, q)
    exps = [n - 2 * m for m in range(dim)]
    gram = [Fraction(1)]
    for m in range(n):
        gram.append(gram[-1] * _qn(n - m, q) / (_qn(m + 1, q) * q ** (n - 2 * m - 2)))
    return E, F, exps, gram


# ---------------------------------------------------------------------------
# the representation record
# ---------------------------------------------------------------------------


@dataclass
class Rep:
    """Generator images of E_i, F_i, K_i together with the inner product."""

    cartan: CartanDatum
    q: Fraction
    dim: int
    E: list  # per node, dim x dim object arrays
    F: list
    K: list
    gram: np.ndarray

    def qi(self, i: int) -> Fraction:
        """q**d_i for the 0-based node index i."""
        return self.q ** self.cartan.d[i]

    @property
    def rank(self) -> int:
        return self.cartan.rank

    def gram_adjoint(self, M) -> np.ndarray:
        ginv = linalg.inverse(self.gram)
        return linalg.matmul(ginv, linalg.matmul(M.T.copy(), self.gram))

    def is_exact(self) -> bool:
        return isinstance(self.E[0][0, 0], Fraction)

    def to_json(self) -> dict:
        def mat(M):
            return [[format_rational(x) for x in row] for row in M]

        return {
            "cartan": self.cartan.to_json(),
            "q": format_rational(self.q),
            "dim": self.dim,
            "E": [mat(M) for M in self.E],
            "F": [mat(M) for M in self.F],
            "K": [mat(M) for M in self.K],
            "gram": mat(self.gram),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Rep":
        def mat(rows):
            return np.array(
                [[parse_rational(x) for x in row] for row in rows], dtype=object
            )

        cartan = CartanDatum.from_json(data["cartan"])
        return cls(
            cartan=cartan,
            q=parse_rational(data["q"]),
            dim=int(data["dim"]),
            E=[mat(M) for M in data["E"]],
            F=[mat(M) for M in data["F"]],
            K=[mat(M) for M in data["K"]],
            gram=mat(data["gram"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "Rep":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _check_q_param(q: Fraction) -> Fraction:
    q = Fraction(q)
    if q <= 0:
        raise ValueError(f"q must be a positive rational, got {q}")
    if q == 1:
        raise ValueError("q = 1 is not supported; the construction degenerates there")
    return q


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def irrep_su2(n: int, q: Fraction) -> Rep:
    """The (n+1)-dimensional simple module of the rank-one algebra."""
    q = _check_q_param(q)
    E, F, exps, gram = su2_ladder(n, q)
    K = linalg.qdiag([q**e for e in exps])
    return Rep(
        cartan=builtin_cartan("A1"),
        q=q,
        dim=n + 1,
        E=[E],
        F=[F],
        K=[K],
        gram=linalg.qdiag(gram),
    )


def vector_rep_sln(n: int, q: Fraction) -> Rep:
    """The defining n-dimensional module of the rank n-1 type-A algebra."""
    if n < 2:
        raise ValueError(f"sl_n vector module needs n >= 2, got {n}")
    q = _check_q_param(q)
    rank = n - 1
    E, F, K = [], [], []
    for i in range(rank):
        Ei = linalg.qzeros(n, n)
        Fi = linalg.qzeros(n, n)
        Ei[i, i + 1] = Fraction(1)
        Fi[i + 1, i] = Fraction(1)
        kdiag = [Fraction(1)] * n
        kdiag[i] = q
        kdiag[i + 1] = 1 / q
        E.append(Ei)
        F.append(Fi)
        K.append(linalg.qdiag(kdiag))
    gram = linalg.qdiag([q**m for m in range(n)])
    return Rep(
        cartan=builtin_cartan(f"A{rank}"),
        q=q,
        dim=n,
        E=E,
        F=F,
        K=K,
        gram=gram,
    )


def trivial_rep(cartan: CartanDatum, q: Fraction) -> Rep:
    """The one-dimensional counit module: E = F = 0, K = 1."""
    q = _check_q_param(q)
    zero = linalg.qzeros(1, 1)
    one = linalg.qidentity(1)
    return Rep(
        cartan=cartan,
        q=q,
        dim=1,
        E=[zero.copy() for _ in range(cartan.rank)],
        F=[zero.copy() for _ in range(cartan.rank)],
        K=[one.copy() for _ in range(cartan.rank)],
        gram=one.copy(),
    )


def direct_sum(*reps: Rep) -> Rep:
    """Block-diagonal sum of representations of the same algebra at the same q."""
    if not reps:
        raise ValueError("direct_sum needs at least one summand")
    r0 = reps[0]
    for r in reps[1:]:
        if r.cartan != r0.cartan or r.q != r0.q:
            raise ValueError("direct_sum needs matching Cartan data and q")
    return Rep(
        cartan=r0.cartan,
        q=r0.q,
        dim=sum(r.dim for r in reps),
        E=[linalg.block_diag([r.E[i] for r in reps]) for i in range(r0.rank)],
        F=[linalg.block_diag([r.F[i] for r in reps]) for i in range(r0.rank)],
        K=[linalg.block_diag([r.K[i] for r in reps]) for i in range(r0.rank)],
        gram=linalg.block_diag([r.gram for r in reps]),
    )


def tensor(r1: Rep, r2: Rep) -> Rep:
    """Tensor product along the comultiplication of HOPF."""
    if r1.cartan != r2.cartan:
        raise ValueError("tensor factors must share the Cartan datum")
    if r1.q != r2.q:
        raise ValueError("tensor factors must share q")
    E, F, K = [], [], []
    for i in range(r1.rank):
        k1inv = linalg.inverse(r1.K[i])
        E.append(HOPF.tensor_e(r1.E[i], r2.K[i], r2.E[i]))
        F.append(HOPF.tensor_f(r1.F[i], k1inv, r2.F[i]))
        K.append(HOPF.tensor_k(r1.K[i], r2.K[i]))
    return Rep(
        cartan=r1.cartan,
        q=r1.q,
        dim=r1.dim * r2.dim,
        E=E,
        F=F,
        K=K,
        gram=linalg.kron(r1.gram, r2.gram),
    )


def invert_q(r: Rep, verify: bool = True) -> Rep:
    """The same module seen as a representation at parameter 1/q.

    Realizes the star-compatible isomorphism that keeps every K_i fixed:
    E_i -> q_i * dagger(E_i), F_i -> (1/q_i) * dagger(F_i).  The scalar
    factors are what make the dagger relations hold with the unchanged gram;
    applying the map twice returns the original generator matrices.  The
    result is re-verified before it is returned (a failure means the input
    was not a valid representation to begin with).
    """
    E, F = [], []
    for i in range(r.rank):
        qi = r.qi(i)
        E.append(r.gram_adjoint(r.E[i]) * qi)
        F.append(r.gram_adjoint(r.F[i]) * (1 / qi))
    out = Rep(
        cartan=r.cartan,
        q=1 / r.q,
        dim=r.dim,
        E=E,
        F=F,
        K=[M.copy() for M in r.K],
        gram=r.gram.copy(),
    )
    if verify:
        report = verify_relations(out)
        if not report.passed:
            names = ", ".join(e.relation for e in report.failing[:4])
            raise ValueError(f"parameter inversion produced an invalid module ({names})")
    return out


# ---------------------------------------------------------------------------
# relation verification
# ---------------------------------------------------------------------------


@dataclass
class RelationEntry:
    relation: str
    i: int | None
    j: int | None
    residual: object
    ok: bool

    def to_json(self) -> dict:
        res = (
            format_rational(self.residual)
            if isinstance(self.residual, Fraction)
            else f"{float(self.residual):.3e}"
        )
        return {"relation": self.relation, "i": self.i, "j": self.j, "residual": res}


@dataclass
class RelationReport:
    exact: bool
    tol: float
    entries: list = field(default_factory=list)

    def add(self, relation, i, j, residual):
        ok = residual == 0 if self.exact else float(abs(residual)) <= self.tol
        self.entries.append(RelationEntry(relation, i, j, residual, ok))

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def failing(self) -> list:
        return [e for e in self.entries if not e.ok]

    @property
    def max_residual(self) -> float:
        return max((float(abs(e.residual)) for e in self.entries), default=0.0)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "mode": "exact" if self.exact else "approx",
            "entries": [e.to_json() for e in self.entries],
        }


def _residual(report: RelationReport, M):
    return linalg.max_abs(M) if report.exact else linalg.frobenius(M)


def _weight_residual(K, qi: Fraction, dim: int, exact: bool):
    """Distance of spec(K) from the group of q_i powers.

    Diagonal K (every construction in this module) is read off entrywise;
    a non-diagonal exact K falls back to annihilating the matched spectral
    factors.  Exponents are searched in |m| <= 2*dim + 2, enough for tensor
    products and sums of the modules built here.
    """
    bound = 2 * dim + 2
    n = K.shape[0]
    powers = {m: qi**m for m in range(-bound, bound + 1)}
    off = [K[r, c] for r in range(n) for c in range(n) if r != c]
    diag_is_dominant = all(x == 0 for x in off) if exact else True
    if diag_is_dominant:
        worst = Fraction(0) if exact else linalg.frobenius(np.array([off], dtype=object))
        for r in range(n):
            val = K[r, r]
            if exact:
                if not any(val == p for p in powers.values()):
                    worst = max(worst, Fraction(1))
            else:
                best = min(abs(val - p) for p in powers.values())
                worst = max(worst, best)
        return worst
    prod = linalg.qidentity(n)
    matched = [m for m, p in powers.items() if _det(K - p * linalg.qidentity(n)) == 0]
    for m in matched:
        prod = linalg.matmul(prod, K - powers[m] * linalg.qidentity(n))
    return linalg.max_abs(prod)


def _det(M) -> Fraction:
    n = M.shape[0]
    A = M.copy()
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if A[r, col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            det = -det
        det *= A[col, col]
        for r in range(col + 1, n):
            f = A[r, col] / A[col, col]
            A[r, col:] = A[r, col:] - f * A[col, col:]
    return det


def verify_relations(rep: Rep, tol: float = 1e-8) -> RelationReport:
    """Exhaustive residual report for the defining relations.

    Covers the K/E/F commutation relations, the quantum Serre relations, the
    dagger identities against the gram, the weight-spectrum property, and the
    antipode axiom on generators.  Exact inputs give exact residuals; a
    report entry passes iff its residual is zero (exact) or <= tol.
    """
    if Fraction(rep.q) == 1:
        raise ValueError("q = 1 representations are not supported")
    dims = {M.shape for Ms in (rep.E, rep.F, rep.K) for M in Ms}
    dims.add(rep.gram.shape)
    if dims != {(rep.dim, rep.dim)}:
        raise ValueError(f"matrix dimensions {dims} do not all match dim={rep.dim}")

    exact = rep.is_exact()
    report = RelationReport(exact=exact, tol=tol)
    rank = rep.rank
    I = linalg.qidentity(rep.dim) if exact else linalg.mpf_identity(rep.dim)
    try:
        Kinv = [linalg.inverse(K) for K in rep.K]
        graminv = linalg.inverse(rep.gram)
    except ZeroDivisionError:
        raise ValueError("K or gram is singular; not a representation") from None

    def dagger(M):
        return linalg.matmul(graminv, linalg.matmul(M.T.copy(), rep.gram))

    for i in range(rank):
        report.add("K_invertible", i + 1, None, _residual(report, linalg.matmul(rep.K[i], Kinv[i]) - I))
    for i in range(rank):
        for j in range(i + 1, rank):
            KK = linalg.matmul(rep.K[i], rep.K[j]) - linalg.matmul(rep.K[j], rep.K[i])
            report.add("KK_commute", i + 1, j + 1, _residual(report, KK))
    for i in range(rank):
        qi = rep.qi(i)
        for j in range(rank):
            aij = rep.cartan.a[i][j]
            lhs = linalg.matmul(rep.K[i], linalg.matmul(rep.E[j], Kinv[i]))
            report.add("KEK", i + 1, j + 1, _residual(report, lhs - qi**aij * rep.E[j]))
            lhs = linalg.matmul(rep.K[i], linalg.matmul(rep.F[j], Kinv[i]))
            report.add("KFK", i + 1, j + 1, _residual(report, lhs - qi ** (-aij) * rep.F[j]))
    for i in range(rank):
        qi = rep.qi(i)
        for j in range(rank):
            comm = linalg.matmul(rep.E[i], rep.F[j]) - linalg.matmul(rep.F[j], rep.E[i])
            if i == j:
                comm = comm - (rep.K[i] - Kinv[i]) / (qi - 1 / qi)
            report.add("EF", i + 1, j + 1, _residual(report, comm))
    for i in range(rank):
        for j in range(rank):
            if i == j:
                continue
            nij = 1 - rep.cartan.a[i][j]
            report.add(
                "serre_E", i + 1, j + 1, _residual(report, _serre_sum(rep.E, i, j, nij, rep.qi(i)))
            )
            report.add(
                "serre_F", i + 1, j + 1, _residual(report, _serre_sum(rep.F, i, j, nij, rep.qi(i)))
            )
    for i in range(rank):
        report.add("star_E", i + 1, None, _residual(report, dagger(rep.E[i]) - linalg.matmul(rep.K[i], rep.F[i])))
        report.add("star_F", i + 1, None, _residual(report, dagger(rep.F[i]) - linalg.matmul(rep.E[i], Kinv[i])))
        report.add("star_K", i + 1, None, _residual(report, dagger(rep.K[i]) - rep.K[i]))
    gram_sym = _residual(report, rep.gram - rep.gram.T)
    report.add("gram_symmetric", None, None, gram_sym)
    if exact:
        pd = linalg.is_positive_definite(rep.gram) if gram_sym == 0 else False
        report.add("gram_positive", None, None, Fraction(0) if pd else Fraction(1))
    for i in range(rank):
        report.add("weight_spectrum", i + 1, None, _weight_residual(rep.K[i], rep.qi(i), rep.dim, exact))
    for i in range(rank):
        ae = linalg.matmul(HOPF.antipode_e(rep.E[i], Kinv[i]), rep.K[i]) + rep.E[i]
        report.add("antipode_E", i + 1, None, _residual(report, ae))
        af = HOPF.antipode_f(rep.F[i], rep.K[i]) + linalg.matmul(rep.K[i], rep.F[i])
        report.add("antipode_F", i + 1, None, _residual(report, af))
        report.add("antipode_K", i + 1, None, _residual(report, linalg.matmul(HOPF.antipode_k(Kinv[i]), rep.K[i]) - I))
    return report


def _serre_sum(mats, i, j, nij, qi):
    exact = isinstance(mats[i][0, 0], Fraction)
    powers = [None] * (nij + 1)
    dim = mats[i].shape[0]
    powers[0] = linalg.qidentity(dim) if exact else linalg.mpf_identity(dim)
    for k in range(nij):
        powers[k + 1] = linalg.matmul(powers[k], mats[i])
    total = None
    for k in range(nij + 1):
        coeff = q_binomial(nij, k, qi) * (-1) ** k
        if not exact:
            from . import approx

            coeff = approx.mpf(coeff)
        term = linalg.matmul(powers[nij - k], linalg.matmul(mats[j], powers[k])) * coeff
        total = term if total is None else total + term
    return total


def weight_exponents(rep: Rep, i: int = 0) -> list:
    """Sorted K_i-eigenvalue exponents of a diagonal-K representation."""
    K = rep.K[i]
    qi = rep.qi(i)
    bound = 2 * rep.dim + 2
    out = []
    for r in range(rep.dim):
        val = K[r, r]
        for m in range(-bound, bound + 1):
            if qi**m == val:
                out.append(m)
                break
        else:
            raise ValueError(f"K diagonal entry {val} is not a power of q_i = {qi}")
    return sorted(out)
