"""Lifting star-actions on finite-dimensional C*-algebras to representations.

Input: node-wise linear maps E, F, K acting on A = (+)_j M_{n_j}, forming a
star-compatible module-algebra action at a rational q > 0, q != 1.  Output:
matrices e, f, k on H = (+)_j C^{n_j} implementing the action by

    K(a) = k a k^-1,   E(a) = e a k^-1 - a e k^-1,   F(a) = f a - k^-1 a k f,

with k positive, e* = k f, and all defining relations satisfied.  The
pipeline per node: recover k from the K-automorphism (one-dimensional
intertwiner space per block, positive square root, determinant-1 gauge),
solve the two coboundary systems by minimum-norm least squares, correct both
by their central defects, then rescale (e, k) by the central square root that
normalizes the commutator.  The scalar freedom left by the determinant gauge
is exactly what the final rescaling absorbs.

Everything runs on high-precision approximate scalars; exact inputs are
orthonormalized first (the algebra involution becomes plain transpose).  For
q > 1 the action is pulled through the parameter inversion q -> 1/q (the
star-compatible isomorphism fixing K; see repcore.invert_q) and the lifted
matrices are pushed back, so the normalization step only ever runs at q < 1.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import approx, linalg
from .cartan import CartanDatum
from .qnum import format_rational, parse_rational
from .repcore import Rep, RelationReport, _serre_sum


class LiftError(RuntimeError):
    """Base class for stage failures; carries the stage tag."""

    stage = "lift"


class UnsupportedParameterError(LiftError):
    stage = "parameter"


class DegenerateInputError(LiftError):
    stage = "implement_k"


class NotModuleActionError(LiftError):
    stage = "coboundary"


class InconsistentActionError(LiftError):
    stage = "centrality"


class PositivityViolationError(LiftError):
    stage = "normalize_commutator"


# ---------------------------------------------------------------------------
# block bookkeeping
# ---------------------------------------------------------------------------


class _Blocks:
    """Index arithmetic for A = (+)_j M_{n_j} inside B(H)."""

    def __init__(self, sizes):
        self.sizes = list(int(n) for n in sizes)
        if any(n < 1 for n in self.sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        self.N = sum(self.sizes)
        self.D = sum(n * n for n in self.sizes)
        self.h_off = []
        self.a_off = []
        h = a = 0
        for n in self.sizes:
            self.h_off.append(h)
            self.a_off.append(a)
            h += n
            a += n * n

    def units(self):
        """(vec index, block, global row, global col) for every matrix unit."""
        for j, n in enumerate(self.sizes):
            for s in range(n):
                for t in range(n):
                    yield self.a_off[j] + s * n + t, j, self.h_off[j] + s, self.h_off[j] + t

    def vec(self, M):
        """Project an N x N matrix onto A; returns (vector, leakage matrix)."""
        v = np.empty(self.D, dtype=object)
        leak = M.copy()
        for idx, j, r, c in self.units():
            v[idx] = M[r, c]
            leak[r, c] = M[r, c] * 0
        return v, leak

    def unvec(self, v):
        zero = v[0] * 0
        M = np.empty((self.N, self.N), dtype=object)
        M[:, :] = zero
        for idx, j, r, c in self.units():
            M[r, c] = v[idx]
        return M

    def block_of(self, M, j):
        o, n = self.h_off[j], self.sizes[j]
        return M[o : o + n, o : o + n]

    def in_block(self, j, r, c):
        o, n = self.h_off[j], self.sizes[j]
        return o <= r < o + n and o <= c < o + n


# ---------------------------------------------------------------------------
# the action record
# ---------------------------------------------------------------------------


@dataclass
class ModuleAlgebraAction:
    """Node-wise operators on the vectorized algebra, plus the inner product.

    emaps/fmaps/kmaps are D x D matrices acting on vec(A) in the matrix-unit
    basis (blocks in order, row-major inside each block).  gram is the inner
    product of H when the involution of A is the gram-adjoint; None means the
    standard orthonormal structure (involution = transpose).
    """

    cartan: CartanDatum
    q: Fraction
    blocks: list
    emaps: list
    fmaps: list
    kmaps: list
    gram: np.ndarray | None = None

    def __post_init__(self):
        self.q = Fraction(self.q)
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")
        self._bl = _Blocks(self.blocks)

    @property
    def layout(self) -> _Blocks:
        return self._bl

    @property
    def rank(self) -> int:
        return self.cartan.rank

    def qi(self, i: int) -> Fraction:
        return self.q ** self.cartan.d[i]

    def is_exact(self) -> bool:
        return isinstance(self.emaps[0][0, 0], Fraction)

    def apply(self, which: str, node: int, a_mat):
        """Apply one generator map to an N x N element of A (exactly shaped)."""
        m = {"E": self.emaps, "F": self.fmaps, "K": self.kmaps}[which][node]
        v, leak = self._bl.vec(a_mat)
        if not linalg.is_zero(leak):
            raise ValueError("element does not lie in the block algebra")
        return self._bl.unvec(m.dot(v))

    def to_json(self) -> dict:
        act = self if self.gram is None else orthonormalize_action(self)

        def mat(M):
            return [[approx.fmt(approx.mpf(x)) for x in row] for row in M]

        return {
            "cartan": act.cartan.to_json(),
            "q": format_rational(act.q),
            "blocks": list(act.blocks),
            "E": [mat(M) for M in act.emaps],
            "F": [mat(M) for M in act.fmaps],
            "K": [mat(M) for M in act.kmaps],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModuleAlgebraAction":
        def mat(rows):
            return np.array([[approx.mpf(x) for x in row] for row in rows], dtype=object)

        return cls(
            cartan=CartanDatum.from_json(data["cartan"]),
            q=parse_rational(data["q"]),
            blocks=[int(n) for n in data["blocks"]],
            emaps=[mat(M) for M in data["E"]],
            fmaps=[mat(M) for M in data["F"]],
            kmaps=[mat(M) for M in data["K"]],
            gram=None,
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "ModuleAlgebraAction":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# inducing an action from a representation
# ---------------------------------------------------------------------------


def induce_action(rep: Rep, blocks=None) -> ModuleAlgebraAction:
    """Adjoint-type action of the algebra generators on A = (+) M_{n_j}.

    K.a = K a K^-1, E.a = E a K^-1 - a E K^-1, F.a = F a - K^-1 a K F.  The
    block partition must be invariant under the representation (the default
    single block always is); exact inputs give an exactly consistent action.
    """
    if blocks is None:
        blocks = [rep.dim]
    bl = _Blocks(blocks)
    if bl.N != rep.dim:
        raise ValueError(f"blocks {blocks} do not partition dimension {rep.dim}")
    for j in range(len(bl.sizes)):
        for jj in range(len(bl.sizes)):
            if j != jj:
                o, n = bl.h_off[j], bl.sizes[j]
                oo, nn = bl.h_off[jj], bl.sizes[jj]
                if not linalg.is_zero(rep.gram[o : o + n, oo : oo + nn]):
                    raise ValueError("gram matrix does not respect the block partition")

    emaps, fmaps, kmaps = [], [], []
    for i in range(rep.rank):
        E, F, K = rep.E[i], rep.F[i], rep.K[i]
        Kinv = linalg.inverse(K)
        KF = linalg.matmul(K, F)
        Em = np.empty((bl.D, bl.D), dtype=object)
        Fm = np.empty((bl.D, bl.D), dtype=object)
        Km = np.empty((bl.D, bl.D), dtype=object)
        for idx, j, gs, gt in bl.units():
            # images of the matrix unit e_{gs,gt}; all products are rank one
            img_k = np.outer(K[:, gs], Kinv[gt, :])
            img_e = np.outer(E[:, gs], Kinv[gt, :])
            unit_part = np.empty((rep.dim, rep.dim), dtype=object)
            unit_part[:, :] = Fraction(0) if rep.is_exact() else approx.mpf(0)
            unit_part[gs, :] = linalg.matmul(E, Kinv)[gt, :]
            img_e = img_e - unit_part
            img_f = np.empty((rep.dim, rep.dim), dtype=object)
            img_f[:, :] = Fraction(0) if rep.is_exact() else approx.mpf(0)
            img_f[:, gt] = F[:, gs]
            img_f = img_f - np.outer(Kinv[:, gs], KF[gt, :])
            for name, img, target in (("K", img_k, Km), ("E", img_e, Em), ("F", img_f, Fm)):
                v, leak = bl.vec(img)
                if not linalg.is_zero(leak):
                    raise ValueError(
                        f"blocks {blocks} are not invariant under the {name}-action"
                    )
                target[:, idx] = v
        emaps.append(Em)
        fmaps.append(Fm)
        kmaps.append(Km)
    return ModuleAlgebraAction(
        cartan=rep.cartan,
        q=rep.q,
        blocks=list(blocks),
        emaps=emaps,
        fmaps=fmaps,
        kmaps=kmaps,
        gram=rep.gram.copy(),
    )


# ---------------------------------------------------------------------------
# action verification
# ---------------------------------------------------------------------------


def verify_action(action: ModuleAlgebraAction, tol: float = 1e-8) -> RelationReport:
    """Residuals of the module-algebra axioms and the operator relations.

    Quadratic in the number of matrix units (the Leibniz checks range over
    same-block unit pairs), so intended for desk-size inputs.
    """
    bl = action.layout
    exact = action.is_exact()
    report = RelationReport(exact=exact, tol=tol)
    rank = action.rank

    def res(M):
        return linalg.max_abs(M) if exact else linalg.frobenius(M)

    gram = action.gram
    if gram is None:
        gram = linalg.qidentity(bl.N) if exact else linalg.mpf_identity(bl.N)
    graminv = linalg.inverse(gram)

    def star(M):
        return linalg.matmul(graminv, linalg.matmul(M.T.copy(), gram))

    units = list(bl.units())
    unit_mats = {}
    for idx, j, gs, gt in units:
        M = linalg.qzeros(bl.N, bl.N) if exact else linalg.mpf_zeros(bl.N, bl.N)
        M[gs, gt] = Fraction(1) if exact else approx.mpf(1)
        unit_mats[idx] = M

    for i in range(rank):
        k_of = {idx: action.apply("K", i, unit_mats[idx]) for idx, *_ in units}
        e_of = {idx: action.apply("E", i, unit_mats[idx]) for idx, *_ in units}
        f_of = {idx: action.apply("F", i, unit_mats[idx]) for idx, *_ in units}
        kinv_map = linalg.inverse(action.kmaps[i])
        zero_img = unit_mats[units[0][0]] * 0
        worst_auto = worst_le = worst_lf = worst_star = None
        for idx_a, j_a, gsa, gta in units:
            # antipode-star rule: (x.a)* = (S(x))*.(a*) gives
            # (E(a))* = -F(a*), (F(a))* = -E(a*), (K(a))* = K^-1(a*)
            star_a = star(unit_mats[idx_a])
            worst_star = _max_res(
                worst_star, res(star(e_of[idx_a]) + action.apply("F", i, star_a))
            )
            worst_star = _max_res(
                worst_star, res(star(f_of[idx_a]) + action.apply("E", i, star_a))
            )
            kinv_star = bl.unvec(kinv_map.dot(bl.vec(star_a)[0]))
            worst_star = _max_res(worst_star, res(star(k_of[idx_a]) - kinv_star))
            for idx_b, j_b, gsb, gtb in units:
                if j_a != j_b:
                    continue
                # e_{sa,ta} e_{sb,tb} = delta_{ta,sb} e_{sa,tb}
                if gta == gsb:
                    n = bl.sizes[j_a]
                    idx_ab = bl.a_off[j_a] + (gsa - bl.h_off[j_a]) * n + (gtb - bl.h_off[j_a])
                    kab, eab, fab = k_of[idx_ab], e_of[idx_ab], f_of[idx_ab]
                else:
                    kab = eab = fab = zero_img
                worst_auto = _max_res(worst_auto, res(kab - linalg.matmul(k_of[idx_a], k_of[idx_b])))
                rhs = linalg.matmul(e_of[idx_a], k_of[idx_b]) + linalg.matmul(unit_mats[idx_a], e_of[idx_b])
                worst_le = _max_res(worst_le, res(eab - rhs))
                kinv_a = bl.unvec(kinv_map[:, idx_a])
                rhs = linalg.matmul(f_of[idx_a], unit_mats[idx_b]) + linalg.matmul(kinv_a, f_of[idx_b])
                worst_lf = _max_res(worst_lf, res(fab - rhs))
        report.add("kmap_automorphism", i + 1, None, worst_auto)
        report.add("leibniz_E", i + 1, None, worst_le)
        report.add("leibniz_F", i + 1, None, worst_lf)
        report.add("star_compat", i + 1, None, worst_star)

    kinv_maps = [linalg.inverse(action.kmaps[i]) for i in range(rank)]
    for i in range(rank):
        qi = action.qi(i)
        for j in range(rank):
            aij = action.cartan.a[i][j]
            lhs = action.kmaps[i].dot(action.emaps[j].dot(kinv_maps[i]))
            report.add("op_KEK", i + 1, j + 1, res(lhs - qi**aij * action.emaps[j]))
            lhs = action.kmaps[i].dot(action.fmaps[j].dot(kinv_maps[i]))
            report.add("op_KFK", i + 1, j + 1, res(lhs - qi ** (-aij) * action.fmaps[j]))
            comm = action.emaps[i].dot(action.fmaps[j]) - action.fmaps[j].dot(action.emaps[i])
            if i == j:
                if action.q == 1:
                    raise ValueError("operator relations need q != 1")
                comm = comm - (action.kmaps[i] - kinv_maps[i]) / (qi - 1 / qi)
            report.add("op_EF", i + 1, j + 1, res(comm))
            if i != j:
                nij = 1 - aij
                report.add("op_serre_E", i + 1, j + 1, res(_serre_sum(action.emaps, i, j, nij, qi)))
                report.add("op_serre_F", i + 1, j + 1, res(_serre_sum(action.fmaps, i, j, nij, qi)))
    return report


def _max_res(cur, new):
    return new if cur is None or new > cur else cur


# ---------------------------------------------------------------------------
# coordinate changes
# ---------------------------------------------------------------------------


def _conjugate_maps(action: ModuleAlgebraAction, S, Sinv, gram=None) -> ModuleAlgebraAction:
    """Transport the action along a -> S a S^-1 (S must be block-diagonal)."""
    bl = action.layout
    tol = approx.mpf(approx.get_context().internal_tol)
    new_maps = {"E": [], "F": [], "K": []}
    for which, maps in (("E", action.emaps), ("F", action.fmaps), ("K", action.kmaps)):
        for m in maps:
            out = np.empty((bl.D, bl.D), dtype=object)
            for idx, j, gs, gt in bl.units():
                pre = np.outer(Sinv[:, gs], S[gt, :])  # S^-1 e_{gs,gt} S
                v, leak = bl.vec(pre)
                if linalg.frobenius(leak) > tol:
                    raise ValueError("conjugation does not preserve the block algebra")
                img = bl.unvec(m.dot(v))
                post = linalg.matmul(S, linalg.matmul(img, Sinv))
                out[:, idx] = bl.vec(post)[0]
            new_maps[which].append(out)
    return ModuleAlgebraAction(
        cartan=action.cartan,
        q=action.q,
        blocks=list(action.blocks),
        emaps=new_maps["E"],
        fmaps=new_maps["F"],
        kmaps=new_maps["K"],
        gram=gram,
    )


def orthonormalize_action(action: ModuleAlgebraAction) -> ModuleAlgebraAction:
    """Move to coordinates where the involution is plain transpose (mpfr)."""
    bl = action.layout
    base = ModuleAlgebraAction(
        cartan=action.cartan,
        q=action.q,
        blocks=list(action.blocks),
        emaps=[linalg.mpf_matrix(m) for m in action.emaps],
        fmaps=[linalg.mpf_matrix(m) for m in action.fmaps],
        kmaps=[linalg.mpf_matrix(m) for m in action.kmaps],
        gram=None,
    )
    if action.gram is None:
        return base
    gram = linalg.mpf_matrix(action.gram)
    diagonal = all(
        gram[r, c] == 0 for r in range(bl.N) for c in range(bl.N) if r != c
    )
    if diagonal:
        roots = [approx.sqrt(gram[r, r]) for r in range(bl.N)]
        S = linalg.mpf_zeros(bl.N, bl.N)
        Sinv = linalg.mpf_zeros(bl.N, bl.N)
        for r in range(bl.N):
            S[r, r] = roots[r]
            Sinv[r, r] = 1 / roots[r]
    else:
        S = linalg.sqrtm_spd(gram)
        Sinv = linalg.inverse(S)
    return _conjugate_maps(base, S, Sinv, gram=None)


def conjugate_action(action: ModuleAlgebraAction, u) -> ModuleAlgebraAction:
    """Gauge move a -> u a u^T by a block-diagonal orthogonal u (gram must be None)."""
    if action.gram is not None:
        raise ValueError("conjugate_action expects orthonormal coordinates")
    return _conjugate_maps(action, u, u.T.copy(), gram=None)


def random_blockwise_orthogonal(blocks, rng: random.Random):
    """Seeded orthogonal element of A via the Cayley transform."""
    mats = []
    for n in blocks:
        S = linalg.mpf_zeros(n, n)
        for r in range(n):
            for c in range(r + 1, n):
                x = approx.mpf(rng.uniform(-1.0, 1.0))
                S[r, c] = x
                S[c, r] = -x
        mats.append(linalg.cayley_orthogonal(S))
    return linalg.block_diag(mats)


# ---------------------------------------------------------------------------
# pipeline stages (orthonormal coordinates, mpfr entries)
# ---------------------------------------------------------------------------


def _require_orthonormal(action):
    if action.gram is not None or action.is_exact():
        return orthonormalize_action(action)
    return action


def _column_image(action, which, node, idx):
    m = {"E": action.emaps, "F": action.fmaps, "K": action.kmaps}[which][node]
    return action.layout.unvec(m[:, idx])


def implement_k(action: ModuleAlgebraAction, node: int):
    """Positive block-diagonal k with K(a) = k a k^-1, det 1 per block."""
    action = _require_orthonormal(action)
    k, _kinv, _res = _implement_k(action, node)
    return k


def _implement_k(action, node):
    bl = action.layout
    ctx = approx.get_context()
    k_blocks, kinv_blocks = [], []
    for j, n in enumerate(bl.sizes):
        rows = []
        for s0 in range(n):
            for t0 in range(n):
                idx = bl.a_off[j] + s0 * n + t0
                Ka = _column_image(action, "K", node, idx)
                for r in range(bl.N):
                    for c_loc in range(n):
                        row = {}
                        for p_loc in range(n):
                            coeff = Ka[r, bl.h_off[j] + p_loc]
                            if coeff != 0:
                                row[p_loc * n + c_loc] = coeff
                        if bl.h_off[j] <= r < bl.h_off[j] + n and c_loc == t0:
                            r_loc = r - bl.h_off[j]
                            key = r_loc * n + s0
                            row[key] = row.get(key, approx.mpf(0)) - 1
                        if row:
                            rows.append(row)
        ata = linalg.mpf_zeros(n * n, n * n)
        for row in rows:
            items = list(row.items())
            for a, ca in items:
                for b, cb in items:
                    ata[a, b] += ca * cb
        w, V = linalg.jacobi_eigh(ata)
        # null vector of the normal matrix = the intertwiner; demand nullity 1
        top = max(abs(x) for x in w) + approx.mpf(1e-30)
        null = [x for x in w if abs(x) <= top * approx.mpf(ctx.internal_tol)]
        if len(null) != 1:
            raise DegenerateInputError(
                f"node {node + 1}, block {j}: intertwiner space has dimension "
                f"{len(null)}, expected 1 (K-map is not an inner automorphism)"
            )
        s_vec = V[:, 0]
        s_mat = np.array(
            [[s_vec[r * n + c] for c in range(n)] for r in range(n)], dtype=object
        )
        sst = s_mat.dot(s_mat.T.copy())
        w, V = linalg.jacobi_eigh(sst)
        if w[0] <= 0:
            raise DegenerateInputError(f"node {node + 1}, block {j}: implementer is singular")
        roots = [approx.sqrt(x) for x in w]
        det = approx.mpf(1)
        for rt in roots:
            det *= rt
        scale = det ** (approx.mpf(1) / n)
        kj = linalg.mpf_zeros(n, n)
        kjinv = linalg.mpf_zeros(n, n)
        for r in range(n):
            for c in range(n):
                kj[r, c] = sum((V[r, t] * roots[t] * V[c, t] for t in range(n)), approx.mpf(0)) / scale
                kjinv[r, c] = sum((V[r, t] / roots[t] * V[c, t] for t in range(n)), approx.mpf(0)) * scale
        k_blocks.append(kj)
        kinv_blocks.append(kjinv)
    k = linalg.block_diag(k_blocks)
    kinv = linalg.block_diag(kinv_blocks)
    resid = approx.mpf(0)
    for idx, j, gs, gt in bl.units():
        Ka = _column_image(action, "K", node, idx)
        conj = np.outer(k[:, gs], kinv[gt, :])
        resid = max(resid, linalg.frobenius(Ka - conj))
    return k, kinv, resid


def _commutator_system(bl, rhs_mats, block_j):
    """Rows of [x, e_{s0,t0}] = rhs over one block, plus off-block leakage."""
    n = bl.sizes[block_j]
    off = bl.h_off[block_j]
    rows, rhs = [], []
    leak_sq = approx.mpf(0)
    for s0 in range(n):
        for t0 in range(n):
            R = rhs_mats[s0 * n + t0]
            for r in range(bl.N):
                for c in range(bl.N):
                    inside = off <= r < off + n and off <= c < off + n
                    if not inside:
                        if R[r, c] != 0:
                            leak_sq += R[r, c] * R[r, c]
                        continue
                    r_loc, c_loc = r - off, c - off
                    row = {}
                    if c_loc == t0:
                        row[r_loc * n + s0] = approx.mpf(1)
                    if r_loc == s0:
                        key = t0 * n + c_loc
                        row[key] = row.get(key, approx.mpf(0)) - 1
                    if row or R[r, c] != 0:
                        rows.append(row)
                        rhs.append(R[r, c])
    return rows, rhs, leak_sq


def _solve_commutator(action, rhs_of_unit):
    """Minimum-norm x in A with [x, a] = rhs(a) for every matrix unit a.

    Returns (x, fit residual, rhs scale); kernel per block is the scalars, so
    the spectral cutoff inside the least squares picks the traceless
    representative.
    """
    bl = action.layout
    x_blocks = []
    fit_sq = approx.mpf(0)
    scale_sq = approx.mpf(0)
    for j, n in enumerate(bl.sizes):
        rhs_mats = [rhs_of_unit(bl.a_off[j] + u) for u in range(n * n)]
        rows, rhs, leak_sq = _commutator_system(bl, rhs_mats, j)
        fit_sq += leak_sq
        for R in rhs_mats:
            scale_sq += sum(R[idx] * R[idx] for idx in np.ndindex(*R.shape))
        sol, _ = linalg.lstsq_min_norm(rows, rhs, n * n)
        xj = np.array([[sol[r * n + c] for c in range(n)] for r in range(n)], dtype=object)
        for row, b in zip(rows, rhs):
            err = -b
            for key, coeff in row.items():
                err += coeff * sol[key]
            fit_sq += err * err
        x_blocks.append(xj)
    return linalg.block_diag(x_blocks), approx.sqrt(fit_sq), approx.sqrt(scale_sq)


def _central_part(bl, M):
    """Block traces/n and the worst off-central residual."""
    gammas = []
    worst = approx.mpf(0)
    for j, n in enumerate(bl.sizes):
        blk = bl.block_of(M, j)
        gamma = sum((blk[t, t] for t in range(n)), approx.mpf(0)) / n
        gammas.append(gamma)
        dev = blk.copy()
        for t in range(n):
            dev[t, t] -= gamma
        worst = max(worst, linalg.frobenius(dev))
    return gammas, worst


def _block_scalar(bl, gammas):
    out = linalg.mpf_zeros(bl.N, bl.N)
    for j, n in enumerate(bl.sizes):
        for t in range(n):
            out[bl.h_off[j] + t, bl.h_off[j] + t] = gammas[j]
    return out


def solve_coboundary_e(action: ModuleAlgebraAction, node: int, k, kinv=None, tol=None):
    """Solve E(a) = e a k^-1 - a e k^-1 and correct e to k e k^-1 = q_i^2 e."""
    action = _require_orthonormal(action)
    if kinv is None:
        kinv = linalg.inverse(k)
    if tol is None:
        tol = approx.get_context().report_tol
    bl = action.layout
    qi = approx.mpf(action.qi(node))

    def rhs_of_unit(idx):
        return _column_image(action, "E", node, idx).dot(k)

    e, fit, scale = _solve_commutator(action, rhs_of_unit)
    if float(fit) > tol * (1 + float(scale)):
        raise NotModuleActionError(
            f"node {node + 1}: E-coboundary system residual {float(fit):.3e} "
            "(the map is not an inner coboundary for this k)"
        )
    c_mat = k.dot(e.dot(kinv)) - qi * qi * e
    gammas, off = _central_part(bl, c_mat)
    if float(off) > tol * (1 + float(linalg.frobenius(e))):
        raise InconsistentActionError(
            f"node {node + 1}: scaling defect of e is not central ({float(off):.3e})"
        )
    e = e - _block_scalar(bl, [g / (1 - qi * qi) for g in gammas])
    return e


def solve_coboundary_f(action: ModuleAlgebraAction, node: int, k, kinv=None, tol=None):
    """Solve F(a) = f a - k^-1 a k f and correct f to k f k^-1 = q_i^-2 f.

    Solved through the substitution g = k f, which turns the shape into the
    same commutator system as the E side: [g, a] = k F(a).
    """
    action = _require_orthonormal(action)
    if kinv is None:
        kinv = linalg.inverse(k)
    if tol is None:
        tol = approx.get_context().report_tol
    bl = action.layout
    qi = approx.mpf(action.qi(node))

    def rhs_of_unit(idx):
        return k.dot(_column_image(action, "F", node, idx))

    g, fit, scale = _solve_commutator(action, rhs_of_unit)
    if float(fit) > tol * (1 + float(scale)):
        raise NotModuleActionError(
            f"node {node + 1}: F-coboundary system residual {float(fit):.3e} "
            "(the map is not an inner coboundary for this k)"
        )
    f = kinv.dot(g)
    c_mat = k.dot(f.dot(kinv)) - f / (qi * qi)
    gammas, off = _central_part(bl, c_mat)
    if float(off) > tol * (1 + float(linalg.frobenius(f))):
        raise InconsistentActionError(
            f"node {node + 1}: scaling defect of f is not central ({float(off):.3e})"
        )
    f = f - _block_scalar(bl, [g_ / (1 - 1 / (qi * qi)) for g_ in gammas])
    return f


def normalize_commutator(e, f, k, qi, blocks, tol=None):
    """Rescale (e, k) by the central square root fixing the commutator relation.

    c' := (e f - f e - k/(q - q^-1)) k is central with block scalars gamma_j;
    consistency of a genuine star-action forces gamma_j (q^-1 - q) > 0, and
    lambda_j = (gamma_j (q^-1 - q))^(-1/2) rescales e and k so that
    e f - f e = (k - k^-1)/(q - q^-1).  Requires q in (0, 1); reduce q > 1
    through the parameter inversion first.
    """
    qi = approx.mpf(qi)
    if not 0 < qi < 1:
        raise ValueError("normalize_commutator runs at q in (0, 1) only")
    if tol is None:
        tol = approx.get_context().report_tol
    bl = _Blocks(blocks)
    denom = qi - 1 / qi
    cprime = (e.dot(f) - f.dot(e) - k / denom).dot(k)
    gammas, off = _central_part(bl, cprime)
    scale = 1 + float(linalg.frobenius(e)) * float(linalg.frobenius(f))
    if float(off) > tol * scale:
        raise InconsistentActionError(
            f"commutator defect is not central (off-residual {float(off):.3e})"
        )
    lambdas = []
    for j, gamma in enumerate(gammas):
        t = gamma * (1 / qi - qi)
        if t <= 0:
            raise PositivityViolationError(
                f"block {j}: central commutator defect has the wrong sign "
                f"({float(gamma):.3e}); the input is not a star-action"
            )
        lambdas.append(1 / approx.sqrt(t))
    lam = _block_scalar(bl, lambdas)
    return lam.dot(e), lam.dot(k), lambdas


# ---------------------------------------------------------------------------
# the full lift
# ---------------------------------------------------------------------------


@dataclass
class LiftResult:
    """Implementing matrices plus the named residual map (orthonormal basis)."""

    blocks: list
    q: Fraction
    e: list
    f: list
    k: list
    residuals: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def k_spectrum(self, node: int = 0) -> list:
        bl = _Blocks(self.blocks)
        out = []
        for j in range(len(bl.sizes)):
            w, _ = linalg.jacobi_eigh(bl.block_of(self.k[node], j))
            out.append([float(x) for x in w])
        return out

    def to_json(self) -> dict:
        def mat(M):
            return [[approx.fmt(x) for x in row] for row in M]

        return {
            "blocks": list(self.blocks),
            "q": format_rational(self.q),
            "e": [mat(M) for M in self.e],
            "f": [mat(M) for M in self.f],
            "k": [mat(M) for M in self.k],
            "residuals": {name: f"{val:.3e}" for name, val in sorted(self.residuals.items())},
            "passed": self.passed,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)


def _invert_parameter(action: ModuleAlgebraAction) -> ModuleAlgebraAction:
    """Pull the action through the q -> 1/q isomorphism that fixes K.

    Node-wise E' = q_i^-1 F K, F' = q_i^-1 E K^-1 as elements acting on A,
    matching the representation-level map of repcore.invert_q.
    """
    emaps, fmaps, kmaps = [], [], []
    for i in range(action.rank):
        qi = approx.mpf(action.qi(i))
        kinv_map = linalg.inverse(action.kmaps[i])
        emaps.append(action.fmaps[i].dot(action.kmaps[i]) / qi)
        fmaps.append(action.emaps[i].dot(kinv_map) / qi)
        kmaps.append(action.kmaps[i].copy())
    return ModuleAlgebraAction(
        cartan=action.cartan,
        q=1 / action.q,
        blocks=list(action.blocks),
        emaps=emaps,
        fmaps=fmaps,
        kmaps=kmaps,
        gram=None,
    )


def _run_stages(action: ModuleAlgebraAction, tol):
    e_list, f_list, k_list, kinv_list = [], [], [], []
    for i in range(action.rank):
        k, kinv, _res = _implement_k(action, i)
        e = solve_coboundary_e(action, i, k, kinv, tol=tol)
        f = solve_coboundary_f(action, i, k, kinv, tol=tol)
        e, k, _lams = normalize_commutator(e, f, k, action.qi(i), action.blocks, tol=tol)
        e_list.append(e)
        f_list.append(f)
        k_list.append(k)
        kinv_list.append(linalg.inverse(k))
    return e_list, f_list, k_list, kinv_list


def lift_action(action: ModuleAlgebraAction, tol: float | None = None) -> LiftResult:
    """Run the whole pipeline and report every residual at the original q."""
    if tol is None:
        tol = approx.get_context().report_tol
    if Fraction(action.q) == 1:
        raise UnsupportedParameterError("q = 1 actions are outside this algorithm")
    work = _require_orthonormal(action)
    if work.q > 1:
        reduced = _invert_parameter(work)
        e_r, f_r, k_r, kinv_r = _run_stages(reduced, tol)
        e_list, f_list, k_list, kinv_list = [], [], [], []
        for i in range(work.rank):
            qi = approx.mpf(work.qi(i))
            e_list.append(f_r[i].dot(k_r[i]) * qi)
            f_list.append(e_r[i].dot(kinv_r[i]) * qi)
            k_list.append(k_r[i])
            kinv_list.append(kinv_r[i])
    else:
        e_list, f_list, k_list, kinv_list = _run_stages(work, tol)
    residuals = _residual_map(work, e_list, f_list, k_list, kinv_list)
    return LiftResult(
        blocks=list(work.blocks),
        q=work.q,
        e=e_list,
        f=f_list,
        k=k_list,
        residuals=residuals,
        tol=tol,
    )


def _residual_map(action, e_list, f_list, k_list, kinv_list) -> dict:
    bl = action.layout
    rank = action.rank
    r = {
        "k_implements": 0.0,
        "e_coboundary": 0.0,
        "f_coboundary": 0.0,
        "kek_scaling": 0.0,
        "kfk_scaling": 0.0,
        "ef_commutator": 0.0,
        "star_identity": 0.0,
        "serre_x": 0.0,
        "serre_y": 0.0,
        "module_compat": 0.0,
    }

    def bump(key, M):
        r[key] = max(r[key], float(linalg.frobenius(M)))

    units = list(bl.units())
    for i in range(rank):
        e, f, k, kinv = e_list[i], f_list[i], k_list[i], kinv_list[i]
        ekinv = e.dot(kinv)
        kf = k.dot(f)
        kinvmap = linalg.inverse(action.kmaps[i])
        for idx, j, gs, gt in units:
            Ka = _column_image(action, "K", i, idx)
            Ea = _column_image(action, "E", i, idx)
            Fa = _column_image(action, "F", i, idx)
            bump("k_implements", Ka - np.outer(k[:, gs], kinv[gt, :]))
            # E(a) = e a k^-1 - a e k^-1 with a = e_{gs,gt}, both terms rank one
            term = np.outer(e[:, gs], kinv[gt, :])
            term2 = linalg.mpf_zeros(bl.N, bl.N)
            term2[gs, :] = ekinv[gt, :]
            bump("e_coboundary", Ea - term + term2)
            term = linalg.mpf_zeros(bl.N, bl.N)
            term[:, gt] = f[:, gs]
            term2 = np.outer(kinv[:, gs], kf[gt, :])
            bump("f_coboundary", Fa - term + term2)
            # module compatibility: pi(x) a = sum (x_(1).a) pi(x_(2))
            ea = linalg.mpf_zeros(bl.N, bl.N)
            ea[:, gt] = e[:, gs]  # e * a
            ae = linalg.mpf_zeros(bl.N, bl.N)
            ae[gs, :] = e[gt, :]  # a * e
            bump("module_compat", ea - Ea.dot(k) - ae)
            fa = linalg.mpf_zeros(bl.N, bl.N)
            fa[:, gt] = f[:, gs]
            kinv_a = bl.unvec(kinvmap[:, idx])  # (K^-1 . a), the input action
            bump("module_compat", fa - Fa - kinv_a.dot(f))
            ka = linalg.mpf_zeros(bl.N, bl.N)
            ka[:, gt] = k[:, gs]
            bump("module_compat", ka - Ka.dot(k))

    for i in range(rank):
        qi = approx.mpf(action.qi(i))
        for j in range(rank):
            aij = action.cartan.a[i][j]
            bump("kek_scaling", k_list[i].dot(e_list[j].dot(kinv_list[i])) - qi**aij * e_list[j])
            bump("kfk_scaling", k_list[i].dot(f_list[j].dot(kinv_list[i])) - qi ** (-aij) * f_list[j])
            comm = e_list[i].dot(f_list[j]) - f_list[j].dot(e_list[i])
            if i == j:
                comm = comm - (k_list[i] - kinv_list[i]) / (qi - 1 / qi)
            bump("ef_commutator", comm)
        for j in range(i + 1, rank):
            bump("k_implements", k_list[i].dot(k_list[j]) - k_list[j].dot(k_list[i]))
    for i in range(rank):
        bump("star_identity", e_list[i].T.copy() - k_list[i].dot(f_list[i]))
    for i in range(rank):
        for j in range(rank):
            if i == j:
                continue
            nij = 1 - action.cartan.a[i][j]
            qi = action.qi(i)
            bump("serre_x", _serre_sum(e_list, i, j, nij, qi))
            bump("serre_y", _serre_sum(f_list, i, j, nij, qi))
    return r


# ---------------------------------------------------------------------------
# round-trip instances and perturbations
# ---------------------------------------------------------------------------


def roundtrip_action(ns, q, seed=None) -> ModuleAlgebraAction:
    """Induced action of a direct sum of ladder irreps, optionally conjugated.

    ns are the spin labels; blocks follow the irrep dimensions.  With a seed,
    the orthonormalized action is conjugated by a seeded random orthogonal
    element of A (a gauge move, so the lift must succeed identically).
    """
    from .repcore import direct_sum, irrep_su2

    reps = [irrep_su2(n, q) for n in ns]
    rep = reps[0] if len(reps) == 1 else direct_sum(*reps)
    action = induce_action(rep, blocks=[n + 1 for n in ns])
    work = orthonormalize_action(action)
    if seed is not None:
        u = random_blockwise_orthogonal(work.blocks, random.Random(seed))
        work = conjugate_action(work, u)
    return work


def expected_k_spectra(ns, q) -> list:
    """Per-block sorted spectra that a lifted k must reproduce."""
    out = []
    for n in ns:
        out.append(sorted(float(approx.mpf(Fraction(q) ** (n - 2 * m))) for m in range(n + 1)))
    return out


def perturb_action(action: ModuleAlgebraAction, which: str, node: int, seed: int, magnitude: float = 1e-2) -> ModuleAlgebraAction:
    """Add a seeded perturbation of Frobenius norm `magnitude` to one map."""
    if which not in ("E", "F", "K"):
        raise ValueError(f"which must be E, F or K, got {which!r}")
    work = _require_orthonormal(action)
    rng = random.Random(seed)
    bl = work.layout
    noise = linalg.mpf_zeros(bl.D, bl.D)
    for rr in range(bl.D):
        for cc in range(bl.D):
            noise[rr, cc] = approx.mpf(rng.uniform(-1.0, 1.0))
    noise = noise * (approx.mpf(magnitude) / linalg.frobenius(noise))
    maps = {"E": [m.copy() for m in work.emaps], "F": [m.copy() for m in work.fmaps], "K": [m.copy() for m in work.kmaps]}
    maps[which][node] = maps[which][node] + noise
    return ModuleAlgebraAction(
        cartan=work.cartan,
        q=work.q,
        blocks=list(work.blocks),
        emaps=maps["E"],
        fmaps=maps["F"],
        kmaps=maps["K"],
        gram=None,
    )
