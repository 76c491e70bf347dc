"""Clebsch-Gordan decomposition and block-wise twist construction.

Tensor products of the rank-one ladder modules decompose multiplicity-free;
highest-weight vectors are found as exact kernels of the raising operator on
each weight space and completed downward with the lowering operator, so the
whole decomposition is rational.  Orthonormalization needs one square root
per component, which is where the approximate scalars come in.

The twist block on V_a (x) V_b is assembled as

    F = sum_c  (quantum isometry of V_c) (classical isometry of V_c)^T

in orthonormalized coordinates.  Any unitary with the block intertwining
property differs from this one by a gauge that acts per component, so only
gauge-invariant properties (unitarity, intertwining, the commutation form of
the cocycle condition) are asserted.  The gauge here: every highest-weight
vector is normalized with its leading coordinate positive, which pins the
overlap of corresponding quantum and classical highest-weight vectors to be
positive (their sign patterns agree for every q > 0).

Blocks are independent pure computations; the module-level caches that speed
up repeated lookups are plain dicts, so callers that parallelize should give
each worker its own process (or pass an explicit twist provider).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import approx, linalg
from .qnum import format_rational
from .repcore import _qn, su2_ladder


class TwistConstructionError(RuntimeError):
    """Internal failure: the assembled block does not intertwine."""


# ---------------------------------------------------------------------------
# sparse tensor-space operators (dict vectors keyed by (m1, m2))
# ---------------------------------------------------------------------------


def _acc(vec, key, val):
    if val == 0:
        return
    cur = vec.get(key)
    new = val if cur is None else cur + val
    if new == 0:
        vec.pop(key, None)
    else:
        vec[key] = new


def _apply_e(vec, a, b, q):
    """Delta(E) = E (x) K + 1 (x) E on a sparse tensor vector."""
    out = {}
    for (m1, m2), coeff in vec.items():
        if m1 > 0:
            _acc(out, (m1 - 1, m2), coeff * _qn(a - m1 + 1, q) * q ** (b - 2 * m2))
        if m2 > 0:
            _acc(out, (m1, m2 - 1), coeff * _qn(b - m2 + 1, q))
    return out


def _apply_f(vec, a, b, q):
    """Delta(F) = F (x) 1 + K^-1 (x) F on a sparse tensor vector."""
    out = {}
    for (m1, m2), coeff in vec.items():
        if m1 < a:
            _acc(out, (m1 + 1, m2), coeff * _qn(m1 + 1, q))
        if m2 < b:
            _acc(out, (m1, m2 + 1), coeff * q ** (-(a - 2 * m1)) * _qn(m2 + 1, q))
    return out


def _vec_eq(u, v):
    keys = set(u) | set(v)
    return all(u.get(k, 0) == v.get(k, 0) for k in keys)


def _vec_scale(u, s):
    return {k: s * x for k, x in u.items()}


# ---------------------------------------------------------------------------
# decomposition records
# ---------------------------------------------------------------------------


@dataclass
class CGComponent:
    """One spin component of V_a (x) V_b.

    chain holds the exact unnormalized embedding columns u_0..u_c (u_0 the
    gauged highest-weight vector, u_{m+1} = F u_m / [m+1]); all columns share
    the proportionality <u_m, u_m> = norm_sq * g_c[m], so a single square
    root of norm_sq orthonormalizes the whole component.
    """

    c: int
    chain: list  # sparse dict vectors, length c + 1
    norm_sq: Fraction

    def dense_chain(self, a: int, b: int) -> np.ndarray:
        out = linalg.qzeros((a + 1) * (b + 1), self.c + 1)
        for m, vec in enumerate(self.chain):
            for (m1, m2), coeff in vec.items():
                out[m1 * (b + 1) + m2, m] = coeff
        return out


@dataclass
class CGDecomposition:
    a: int
    b: int
    q: Fraction
    components: list  # CGComponent, ascending spin label
    completeness_residual: Fraction

    @property
    def labels(self) -> list:
        return [comp.c for comp in self.components]

    def component(self, c: int) -> CGComponent:
        for comp in self.components:
            if comp.c == c:
                return comp
        raise KeyError(f"no component with label {c}")


def cg_labels(a: int, b: int) -> list:
    return list(range(abs(a - b), a + b + 1, 2))


def cg_decompose(a: int, b: int, q: Fraction) -> CGDecomposition:
    """Exact multiplicity-free decomposition of V_a (x) V_b at q > 0 (q = 1 classical)."""
    if a < 0 or b < 0:
        raise ValueError(f"spin labels must be >= 0, got ({a}, {b})")
    q = Fraction(q)
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    _, _, _, gram_a = su2_ladder(a, q)
    _, _, _, gram_b = su2_ladder(b, q)

    components = []
    for s in range(min(a, b) + 1):
        c = a + b - 2 * s
        hw = _highest_weight_vector(a, b, q, s)
        _, _, _, gram_c = su2_ladder(c, q)
        chain = [hw]
        for m in range(c):
            nxt = _apply_f(chain[-1], a, b, q)
            chain.append(_vec_scale(nxt, 1 / _qn(m + 1, q)))
        # ladder must close and the raising direction must come back scaled
        if _apply_f(chain[-1], a, b, q):
            raise RuntimeError(f"component {c}: chain does not terminate")
        for m in range(1, c + 1):
            up = _apply_e(chain[m], a, b, q)
            want = _vec_scale(chain[m - 1], _qn(c - m + 1, q))
            if not _vec_eq(up, want):
                raise RuntimeError(f"component {c}: raising operator mismatch at step {m}")
        norms = [
            sum(coeff * coeff * gram_a[m1] * gram_b[m2] for (m1, m2), coeff in vec.items())
            for vec in chain
        ]
        for m, nu in enumerate(norms):
            if nu != norms[0] * gram_c[m]:
                raise RuntimeError(f"component {c}: norm drift at step {m}")
        components.append(CGComponent(c=c, chain=chain, norm_sq=norms[0]))

    components.sort(key=lambda comp: comp.c)
    if [comp.c for comp in components] != cg_labels(a, b):
        raise RuntimeError("component labels disagree with the admissible range")
    if sum(comp.c + 1 for comp in components) != (a + 1) * (b + 1):
        raise RuntimeError("component dimensions do not fill the tensor product")

    residual = _completeness_residual(a, b, q, components, gram_a, gram_b)
    return CGDecomposition(a=a, b=b, q=q, components=components, completeness_residual=residual)


def _highest_weight_vector(a, b, q, s):
    """Kernel of the raising operator on the weight space m1 + m2 = s, gauged."""
    level = [(m1, s - m1) for m1 in range(max(0, s - b), min(a, s) + 1)]
    upper = [(m1, s - 1 - m1) for m1 in range(max(0, s - 1 - b), min(a, s - 1) + 1)]
    pos = {key: t for t, key in enumerate(level)}
    rows = len(upper)
    M = linalg.qzeros(max(rows, 1), len(level))
    for t, key in enumerate(level):
        img = _apply_e({key: Fraction(1)}, a, b, q)
        for u, ukey in enumerate(upper):
            M[u, t] = img.get(ukey, Fraction(0))
    kernel = linalg.exact_kernel(M[:rows] if rows else linalg.qzeros(1, len(level)))
    if len(kernel) != 1:
        raise RuntimeError(
            f"weight space s={s} of ({a},{b}) has kernel dimension {len(kernel)}, expected 1"
        )
    v = kernel[0]
    lead = next(x for x in v if x != 0)
    v = v / lead  # leading coordinate +1: the positive-overlap gauge
    return {key: v[pos[key]] for key in level if v[pos[key]] != 0}


def _completeness_residual(a, b, q, components, gram_a, gram_b):
    """Exact max-abs entry of sum_c iota_c iota_c^dagger - identity."""
    dim = (a + 1) * (b + 1)
    acc = {}
    for comp in components:
        _, _, _, gram_c = su2_ladder(comp.c, q)
        for m, vec in enumerate(comp.chain):
            scale = 1 / (comp.norm_sq * gram_c[m])
            items = list(vec.items())
            for (r1, r2), xr in items:
                for (c1, c2), xc in items:
                    key = (r1 * (b + 1) + r2, c1 * (b + 1) + c2)
                    g = gram_a[c1] * gram_b[c2]
                    _acc(acc, key, xr * xc * g * scale)
    worst = Fraction(0)
    for t in range(dim):
        _acc(acc, (t, t), Fraction(-1))
    for val in acc.values():
        worst = max(worst, abs(val))
    return worst


# ---------------------------------------------------------------------------
# orthonormal embeddings and unitarized generator matrices
# ---------------------------------------------------------------------------


def orthonormal_embedding(decomp: CGDecomposition, c: int) -> np.ndarray:
    """mpfr isometry V_c -> V_a (x) V_b in orthonormalized coordinates."""
    comp = decomp.component(c)
    a, b, q = decomp.a, decomp.b, decomp.q
    _, _, _, gram_a = su2_ladder(a, q)
    _, _, _, gram_b = su2_ladder(b, q)
    _, _, _, gram_c = su2_ladder(c, q)
    root = approx.sqrt(comp.norm_sq)
    out = linalg.mpf_zeros((a + 1) * (b + 1), c + 1)
    for m, vec in enumerate(comp.chain):
        col_scale = 1 / (root * approx.sqrt(gram_c[m]))
        for (m1, m2), coeff in vec.items():
            t = m1 * (b + 1) + m2
            out[t, m] = approx.mpf(coeff) * approx.sqrt(gram_a[m1] * gram_b[m2]) * col_scale
    return out


def _unitarize_diag(M, gram_diag):
    """S M S^-1 for S = diag(sqrt(gram_diag)), entrywise."""
    n = M.shape[0]
    roots = [approx.sqrt(g) for g in gram_diag]
    out = linalg.mpf_zeros(n, n)
    for r in range(n):
        for c in range(n):
            if M[r, c] != 0:
                out[r, c] = approx.mpf(M[r, c]) * roots[r] / roots[c]
    return out


def _irrep_unitary(n: int, q: Fraction) -> dict:
    """Orthonormal-basis generator matrices of the ladder module at q."""
    E, F, exps, gram = su2_ladder(n, q)
    K = linalg.qdiag([Fraction(q) ** e for e in exps])
    return {
        "E": _unitarize_diag(E, gram),
        "F": _unitarize_diag(F, gram),
        "K": linalg.mpf_matrix(K),
    }


def _tensor_generators_unitary(a: int, b: int, q: Fraction) -> dict:
    """Orthonormal-basis images of E, F, K on V_a (x) V_b at q."""
    Ea, Fa, expsa, gram_a = su2_ladder(a, q)
    Eb, Fb, expsb, gram_b = su2_ladder(b, q)
    Ka = linalg.qdiag([Fraction(q) ** e for e in expsa])
    Kb = linalg.qdiag([Fraction(q) ** e for e in expsb])
    Kainv = linalg.qdiag([Fraction(q) ** -e for e in expsa])
    Ia, Ib = linalg.qidentity(a + 1), linalg.qidentity(b + 1)
    gram_ab = [ga * gb for ga in gram_a for gb in gram_b]
    return {
        "E": _unitarize_diag(linalg.kron(Ea, Kb) + linalg.kron(Ia, Eb), gram_ab),
        "F": _unitarize_diag(linalg.kron(Fa, Ib) + linalg.kron(Kainv, Fb), gram_ab),
        "K": linalg.mpf_matrix(linalg.kron(Ka, Kb)),
    }


# ---------------------------------------------------------------------------
# twist blocks
# ---------------------------------------------------------------------------

GAUGE_RULE = "highest-weight leading coordinate positive (positive hw overlap)"

_CG_CACHE: dict = {}
_TWIST_CACHE: dict = {}


def _cg_cached(a, b, q) -> CGDecomposition:
    key = (a, b, format_rational(Fraction(q)))
    if key not in _CG_CACHE:
        _CG_CACHE[key] = cg_decompose(a, b, q)
    return _CG_CACHE[key]


@dataclass
class TwistBlock:
    a: int
    b: int
    q: Fraction
    F: np.ndarray  # mpfr unitary, dim (a+1)(b+1)
    unitarity_residual: float
    intertwine_residual: float
    gauge: str = GAUGE_RULE

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "q": format_rational(self.q),
            "gauge": self.gauge,
            "unitarity_residual": f"{self.unitarity_residual:.3e}",
            "intertwine_residual": f"{self.intertwine_residual:.3e}",
            "F": [[approx.fmt(x) for x in row] for row in self.F],
        }


def solve_twist_block(a: int, b: int, q: Fraction, tol: float | None = None) -> TwistBlock:
    """The unitary conjugating the classical block coproduct into the quantum one.

    Built from quantum and classical isometries component by component; raises
    TwistConstructionError if the result fails to intertwine (which would
    signal a decomposition bug, not bad input).
    """
    q = Fraction(q)
    if q <= 0 or q == 1:
        raise ValueError(f"twist blocks need q > 0, q != 1, got {q}")
    if tol is None:
        tol = approx.get_context().report_tol
    key = (a, b, format_rational(q), approx.get_context().precision)
    if key in _TWIST_CACHE:
        return _TWIST_CACHE[key]

    cg_q = _cg_cached(a, b, q)
    cg_1 = _cg_cached(a, b, Fraction(1))
    dim = (a + 1) * (b + 1)
    iso_q = {c: orthonormal_embedding(cg_q, c) for c in cg_q.labels}
    iso_1 = {c: orthonormal_embedding(cg_1, c) for c in cg_1.labels}

    F = linalg.mpf_zeros(dim, dim)
    for c in cg_q.labels:
        F = F + iso_q[c].dot(iso_1[c].T)

    I = linalg.mpf_identity(dim)
    unit_res = float(linalg.frobenius(F.dot(F.T.copy()) - I))

    quantum = _tensor_generators_unitary(a, b, q)
    inter_res = 0.0
    for name in ("E", "F", "K"):
        target = linalg.mpf_zeros(dim, dim)
        for c in cg_q.labels:
            gen = _irrep_unitary(c, q)[name]
            target = target + iso_1[c].dot(gen.dot(iso_1[c].T))
        resid = quantum[name] - F.dot(target.dot(F.T.copy()))
        inter_res = max(inter_res, float(linalg.frobenius(resid)))

    if inter_res > tol or unit_res > tol:
        raise TwistConstructionError(
            f"block ({a},{b}) at q={q}: residuals {inter_res:.3e}/{unit_res:.3e} exceed {tol:.1e}"
        )
    block = TwistBlock(
        a=a,
        b=b,
        q=q,
        F=F,
        unitarity_residual=unit_res,
        intertwine_residual=inter_res,
    )
    _TWIST_CACHE[key] = block
    return block


# ---------------------------------------------------------------------------
# associator blocks
# ---------------------------------------------------------------------------


@dataclass
class AssociatorBlock:
    a: int
    b: int
    c: int
    q: Fraction
    Phi: np.ndarray
    commutation_residual: float
    unitarity_residual: float

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "q": format_rational(self.q),
            "commutation_residual": f"{self.commutation_residual:.3e}",
            "unitarity_residual": f"{self.unitarity_residual:.3e}",
            "Phi": [[approx.fmt(x) for x in row] for row in self.Phi],
        }


def associator_block(a: int, b: int, c: int, q: Fraction, twist=None) -> AssociatorBlock:
    """Associator Phi = (id (x) Delta)(F*) F*_23 F_12 (Delta (x) id)(F) on a triple.

    The legs of Delta are classical (the twist lives over the classical
    algebra), so the mixing isometries are the q = 1 embeddings.  The
    commutation residual is the worst commutator norm against the classical
    multiplier images of the three generators; a custom `twist(x, y)` (mpfr
    block matrix) can be injected for negative controls.
    """
    q = Fraction(q)
    if twist is None:
        twist = lambda x, y: solve_twist_block(x, y, q).F  # noqa: E731
    if min(a, b, c) < 0:
        raise ValueError("spin labels must be >= 0")

    da, db, dc = a + 1, b + 1, c + 1
    dim = da * db * dc
    Ia = linalg.mpf_identity(da)
    Ic = linalg.mpf_identity(dc)

    cg1_ab = _cg_cached(a, b, Fraction(1))
    cg1_bc = _cg_cached(b, c, Fraction(1))
    emb_ab = {u: linalg.kron(orthonormal_embedding(cg1_ab, u), Ic) for u in cg1_ab.labels}
    emb_bc = {w: linalg.kron(Ia, orthonormal_embedding(cg1_bc, w)) for w in cg1_bc.labels}

    P_right = linalg.mpf_zeros(dim, dim)  # (Delta (x) id)(F)
    for u in cg1_ab.labels:
        ku = emb_ab[u]
        P_right = P_right + ku.dot(twist(u, c).dot(ku.T.copy()))
    P_left = linalg.mpf_zeros(dim, dim)  # (id (x) Delta)(F*)
    for w in cg1_bc.labels:
        kw = emb_bc[w]
        P_left = P_left + kw.dot(twist(a, w).T.copy().dot(kw.T.copy()))
    F23_star = linalg.kron(Ia, twist(b, c).T.copy())
    F12 = linalg.kron(twist(a, b), Ic)

    Phi = P_left.dot(F23_star.dot(F12.dot(P_right)))

    I = linalg.mpf_identity(dim)
    unit_res = float(linalg.frobenius(Phi.dot(Phi.T.copy()) - I))

    comm_res = 0.0
    for name in ("E", "F", "K"):
        target = linalg.mpf_zeros(dim, dim)
        for u in cg1_ab.labels:
            cg1_uc = _cg_cached(u, c, Fraction(1))
            for w in cg1_uc.labels:
                J = emb_ab[u].dot(orthonormal_embedding(cg1_uc, w))
                gen = _irrep_unitary(w, q)[name]
                target = target + J.dot(gen.dot(J.T.copy()))
        comm = Phi.dot(target) - target.dot(Phi)
        comm_res = max(comm_res, float(linalg.frobenius(comm)))

    return AssociatorBlock(
        a=a,
        b=b,
        c=c,
        q=q,
        Phi=Phi,
        commutation_residual=comm_res,
        unitarity_residual=unit_res,
    )


def clear_caches() -> None:
    _CG_CACHE.clear()
    _TWIST_CACHE.clear()


def save_block(block, path) -> None:
    with open(path, "w") as fh:
        json.dump(block.to_json(), fh, indent=2, sort_keys=True)
