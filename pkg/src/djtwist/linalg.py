"""Dense matrix helpers over exact rationals and MPFR floats.

Matrices are numpy object arrays so the same code paths serve Fraction
entries (exact mode) and gmpy2.mpfr entries (approximate mode).  Everything
here is desk scale: dimensions stay well below a hundred, so plain O(n^3)
algorithms with partial pivoting and cyclic Jacobi sweeps are the right
tools.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import approx

# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def qmat(rows) -> np.ndarray:
    """Object array with Fraction entries from nested lists."""
    return np.array([[Fraction(x) for x in row] for row in rows], dtype=object)


def qzeros(r: int, c: int) -> np.ndarray:
    m = np.empty((r, c), dtype=object)
    m[:, :] = Fraction(0)
    return m


def qidentity(n: int) -> np.ndarray:
    m = qzeros(n, n)
    for i in range(n):
        m[i, i] = Fraction(1)
    return m


def qdiag(entries) -> np.ndarray:
    n = len(entries)
    m = qzeros(n, n)
    for i, x in enumerate(entries):
        m[i, i] = Fraction(x)
    return m


def mpf_matrix(M) -> np.ndarray:
    """Elementwise conversion to mpfr."""
    M = np.asarray(M, dtype=object)
    out = np.empty(M.shape, dtype=object)
    for idx in np.ndindex(*M.shape):
        out[idx] = approx.mpf(M[idx])
    return out


def mpf_zeros(r: int, c: int) -> np.ndarray:
    m = np.empty((r, c), dtype=object)
    m[:, :] = approx.mpf(0)
    return m


def mpf_identity(n: int) -> np.ndarray:
    m = mpf_zeros(n, n)
    for i in range(n):
        m[i, i] = approx.mpf(1)
    return m


def kron(A, B) -> np.ndarray:
    """Kronecker product; index (i, j) of the result is i_A*dim_B + i_B."""
    ra, ca = A.shape
    rb, cb = B.shape
    out = np.empty((ra * rb, ca * cb), dtype=object)
    for i in range(ra):
        for j in range(ca):
            out[i * rb : (i + 1) * rb, j * cb : (j + 1) * cb] = A[i, j] * B
    return out


def block_diag(blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    zero = Fraction(0) if blocks and isinstance(blocks[0][0, 0], Fraction) else approx.mpf(0)
    out = np.empty((n, n), dtype=object)
    out[:, :] = zero
    at = 0
    for b in blocks:
        d = b.shape[0]
        out[at : at + d, at : at + d] = b
        at += d
    return out


# ---------------------------------------------------------------------------
# generic dense routines (Fraction or mpfr entries)
# ---------------------------------------------------------------------------


def matmul(A, B) -> np.ndarray:
    return A.dot(B)


def transpose(A) -> np.ndarray:
    return A.T.copy()


def inverse(M) -> np.ndarray:
    """Gauss-Jordan with partial pivoting; raises on singular input."""
    n = M.shape[0]
    A = M.copy()
    zero = A[0, 0] * 0
    B = np.empty((n, n), dtype=object)
    B[:, :] = zero
    for i in range(n):
        B[i, i] = zero + 1
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r, col]))
        if A[piv, col] == 0:
            raise ZeroDivisionError("matrix is singular")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            B[[col, piv]] = B[[piv, col]]
        d = A[col, col]
        A[col] = A[col] / d
        B[col] = B[col] / d
        for r in range(n):
            if r != col and A[r, col] != 0:
                f = A[r, col]
                A[r] = A[r] - f * A[col]
                B[r] = B[r] - f * B[col]
    return B


def solve(A, b) -> np.ndarray:
    """Solve A x = b for square well-conditioned A (same pivoting as inverse)."""
    return inverse(A).dot(b)


def max_abs(M) -> object:
    out = None
    for idx in np.ndindex(*M.shape):
        v = abs(M[idx])
        if out is None or v > out:
            out = v
    return out if out is not None else 0


def is_zero(M) -> bool:
    return all(M[idx] == 0 for idx in np.ndindex(*M.shape))


def frobenius(M):
    s = None
    for idx in np.ndindex(*M.shape):
        v = M[idx] * M[idx]
        s = v if s is None else s + v
    return approx.sqrt(s) if s is not None else approx.mpf(0)


# ---------------------------------------------------------------------------
# exact-only routines
# ---------------------------------------------------------------------------


def exact_kernel(M) -> list:
    """Basis of the nullspace of a Fraction matrix, via row reduction."""
    rows, cols = M.shape
    A = M.copy()
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for rr in range(r, rows):
            if A[rr, c] != 0:
                piv = rr
                break
        if piv is None:
            continue
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] / A[r, c]
        for rr in range(rows):
            if rr != r and A[rr, c] != 0:
                A[rr] = A[rr] - A[rr, c] * A[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = np.empty(cols, dtype=object)
        v[:] = Fraction(0)
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -A[i, fc]
        basis.append(v)
    return basis


def is_positive_definite(G) -> bool:
    """Exact LDL^T test for a symmetric Fraction matrix."""
    n = G.shape[0]
    A = G.copy()
    for k in range(n):
        if A[k, k] <= 0:
            return False
        for i in range(k + 1, n):
            f = A[i, k] / A[k, k]
            A[i, k:] = A[i, k:] - f * A[k, k:]
    return True


# ---------------------------------------------------------------------------
# mpfr-only routines
# ---------------------------------------------------------------------------


def jacobi_eigh(S, max_sweeps: int = 64):
    """Eigen-decomposition of a symmetric mpfr matrix by cyclic Jacobi.

    Returns (eigenvalues ascending, V) with S ~= V diag(w) V^T, columns of V
    orthonormal.  Convergence is driven down to the working precision.
    """
    n = S.shape[0]
    A = mpf_matrix(S)
    V = mpf_identity(n)
    if n == 1:
        return [A[0, 0]], V
    eps = approx.mpf(2) ** (-(approx.get_context().precision - 6))
    for _ in range(max_sweeps):
        off = approx.mpf(0)
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += A[i, j] * A[i, j]
        scale = max(abs(A[i, i]) for i in range(n)) + approx.mpf(1)
        if approx.sqrt(off) <= eps * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= eps * scale * approx.mpf(1e-6):
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = 1 / (abs(theta) + approx.sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / approx.sqrt(t * t + 1)
                s = t * c
                for k in range(n):
                    akp, akq = A[k, p], A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = A[p, k], A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp, vkq = V[k, p], V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    order = sorted(range(n), key=lambda i: A[i, i])
    evals = [A[i, i] for i in order]
    Vout = np.empty((n, n), dtype=object)
    for new, old in enumerate(order):
        Vout[:, new] = V[:, old]
    return evals, Vout


def sqrtm_spd(S):
    """Positive square root of a symmetric positive-definite mpfr matrix."""
    evals, V = jacobi_eigh(S)
    if evals[0] <= 0:
        raise ValueError("matrix is not positive definite")
    n = S.shape[0]
    out = mpf_zeros(n, n)
    roots = [approx.sqrt(w) for w in evals]
    for i in range(n):
        for j in range(n):
            out[i, j] = sum((V[i, k] * roots[k] * V[j, k] for k in range(n)), approx.mpf(0))
    return out


def lstsq_min_norm(rows, rhs, dim: int, rel_cutoff=None):
    """Minimum-norm least squares for a sparse overdetermined system.

    rows: list of dicts {unknown index: coefficient}; rhs: matching values.
    Assembles the normal equations and inverts through the spectral
    pseudo-inverse, dropping eigenvalues below rel_cutoff * max eigenvalue
    (that is how the minimum-norm representative is selected when the system
    has an exact kernel).  Returns (solution vector, normal matrix spectrum).
    """
    if rel_cutoff is None:
        rel_cutoff = approx.get_context().internal_tol
    ata = mpf_zeros(dim, dim)
    atb = np.empty(dim, dtype=object)
    atb[:] = approx.mpf(0)
    for row, b in zip(rows, rhs):
        items = list(row.items())
        for i, ci in items:
            if b:
                atb[i] += ci * b
            for j, cj in items:
                ata[i, j] += ci * cj
    evals, V = jacobi_eigh(ata)
    top = max(abs(w) for w in evals)
    cutoff = top * approx.mpf(rel_cutoff) if top > 0 else approx.mpf(0)
    x = np.empty(dim, dtype=object)
    x[:] = approx.mpf(0)
    for k in range(dim):
        if abs(evals[k]) <= cutoff:
            continue
        coef = sum((V[i, k] * atb[i] for i in range(dim)), approx.mpf(0)) / evals[k]
        for i in range(dim):
            x[i] += coef * V[i, k]
    return x, evals


def cayley_orthogonal(S):
    """(I - S)(I + S)^{-1} for antisymmetric S: exactly orthogonal."""
    n = S.shape[0]
    I = mpf_identity(n)
    return matmul(I - S, inverse(I + S))
