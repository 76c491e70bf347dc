"""Direct checks for the dense helpers shared by every module."""

import random
from fractions import Fraction

import pytest

from djtwist import approx, linalg


class TestExact:
    def test_inverse_round_trip(self):
        M = linalg.qmat([[2, 1, 0], [1, 3, 1], [0, 1, 4]])
        assert linalg.is_zero(M.dot(linalg.inverse(M)) - linalg.qidentity(3))

    def test_inverse_singular_raises(self):
        M = linalg.qmat([[1, 2], [2, 4]])
        with pytest.raises(ZeroDivisionError):
            linalg.inverse(M)

    def test_kernel_dimensions(self):
        M = linalg.qmat([[1, 2, 3], [2, 4, 6]])
        basis = linalg.exact_kernel(M)
        assert len(basis) == 2
        for v in basis:
            assert all(sum(M[r, c] * v[c] for c in range(3)) == 0 for r in range(2))

    def test_positive_definite(self):
        assert linalg.is_positive_definite(linalg.qmat([[2, 1], [1, 2]]))
        assert not linalg.is_positive_definite(linalg.qmat([[1, 2], [2, 1]]))

    def test_kron_index_convention(self):
        A = linalg.qmat([[0, 1], [0, 0]])
        B = linalg.qidentity(3)
        K = linalg.kron(A, B)
        # (i_A * dim_B + i_B, j_A * dim_B + j_B)
        assert K[0, 3] == 1 and K[1, 4] == 1 and K[2, 5] == 1
        assert linalg.max_abs(K) == 1


class TestMpfr:
    def test_jacobi_reconstructs(self):
        S = linalg.mpf_matrix(linalg.qmat([[4, 1, 0], [1, 3, 1], [0, 1, 2]]))
        w, V = linalg.jacobi_eigh(S)
        n = 3
        recon = linalg.mpf_zeros(n, n)
        for i in range(n):
            for j in range(n):
                recon[i, j] = sum((V[i, k] * w[k] * V[j, k] for k in range(n)), approx.mpf(0))
        assert float(linalg.frobenius(recon - S)) < 1e-30
        assert w[0] <= w[1] <= w[2]
        orth = V.T.copy().dot(V)
        assert float(linalg.frobenius(orth - linalg.mpf_identity(n))) < 1e-30

    def test_sqrtm(self):
        S = linalg.mpf_matrix(linalg.qmat([[5, 2], [2, 3]]))
        R = linalg.sqrtm_spd(S)
        assert float(linalg.frobenius(R.dot(R) - S)) < 1e-30
        with pytest.raises(ValueError):
            linalg.sqrtm_spd(linalg.mpf_matrix(linalg.qmat([[1, 2], [2, 1]])))

    def test_cayley_orthogonal(self):
        rng = random.Random(7)
        n = 4
        S = linalg.mpf_zeros(n, n)
        for r in range(n):
            for c in range(r + 1, n):
                x = approx.mpf(rng.uniform(-1, 1))
                S[r, c] = x
                S[c, r] = -x
        U = linalg.cayley_orthogonal(S)
        assert float(linalg.frobenius(U.dot(U.T.copy()) - linalg.mpf_identity(n))) < 1e-30

    def test_lstsq_minimum_norm_picks_traceless(self):
        # system [x, a] = rhs on M_2 determines x up to the scalars; the
        # spectral cutoff must return the traceless representative
        target = linalg.mpf_matrix(linalg.qmat([[1, 2], [3, -1]]))
        rows, rhs = [], []
        for s0 in range(2):
            for t0 in range(2):
                for r in range(2):
                    for c in range(2):
                        row = {}
                        if c == t0:
                            row[r * 2 + s0] = approx.mpf(1)
                        if r == s0:
                            row[t0 * 2 + c] = row.get(t0 * 2 + c, approx.mpf(0)) - 1
                        # [target, e_{s0,t0}]_{r,c}
                        val = (target[r, s0] if c == t0 else approx.mpf(0)) - (
                            target[t0, c] if r == s0 else approx.mpf(0)
                        )
                        rows.append(row)
                        rhs.append(val)
        sol, _ = linalg.lstsq_min_norm(rows, rhs, 4)
        assert abs(float(sol[0] + sol[3])) < 1e-30  # traceless
        assert abs(float(sol[1] - 2)) < 1e-30
        assert abs(float(sol[2] - 3)) < 1e-30
        assert abs(float(sol[0] - 1)) < 1e-30  # trace of target is 0 already

    def test_precision_floor(self):
        with pytest.raises(ValueError):
            approx.set_precision(32)
