"""Representation constructions against independent matrix oracles."""

from fractions import Fraction

import pytest

from djtwist import linalg
from djtwist.cartan import SUPPORTED_LABELS, builtin_cartan
from djtwist.repcore import (
    Rep,
    direct_sum,
    invert_q,
    irrep_su2,
    tensor,
    trivial_rep,
    vector_rep_sln,
    verify_relations,
    weight_exponents,
)

QS = [Fraction(1, 2), Fraction(2, 3), Fraction(3)]


class TestIrrep:
    def test_n0_trivial(self):
        r = irrep_su2(0, Fraction(3))
        assert r.dim == 1
        assert r.E[0][0, 0] == 0 and r.F[0][0, 0] == 0 and r.K[0][0, 0] == 1

    @pytest.mark.parametrize("q", QS)
    def test_n1_matrices(self, q):
        r = irrep_su2(1, q)
        assert r.E[0].tolist() == [[0, 1], [0, 0]]
        assert r.F[0].tolist() == [[0, 0], [1, 0]]
        assert r.K[0].tolist() == [[q, 0], [0, 1 / q]]
        assert all(r.gram[i, j] == 0 for i in range(2) for j in range(2) if i != j)

    @pytest.mark.parametrize("q", QS)
    def test_n1_hand_expanded_commutator(self, q):
        # independent 2x2 oracle: expand EF - FE entrywise by hand and compare
        # with (K - K^-1)/(q - q^-1) for the diagonal K
        r = irrep_su2(1, q)
        E, F, K = r.E[0], r.F[0], r.K[0]
        comm = [
            [sum(E[i, k] * F[k, j] - F[i, k] * E[k, j] for k in range(2)) for j in range(2)]
            for i in range(2)
        ]
        denom = q - 1 / q
        assert comm[0][0] == (K[0, 0] - 1 / K[0, 0]) / denom == 1
        assert comm[1][1] == (K[1, 1] - 1 / K[1, 1]) / denom == -1
        assert comm[0][1] == 0 and comm[1][0] == 0

    def test_n2_k_diagonal(self):
        r = irrep_su2(2, Fraction(1, 2))
        assert [r.K[0][i, i] for i in range(3)] == [Fraction(1, 4), Fraction(1), Fraction(4)]

    @pytest.mark.parametrize("q", QS)
    @pytest.mark.parametrize("n", range(0, 6))
    def test_relations_exact_zero(self, n, q):
        report = verify_relations(irrep_su2(n, q))
        assert report.exact and report.passed
        assert all(e.residual == 0 for e in report.entries)

    @pytest.mark.parametrize("n", range(0, 7))
    def test_weight_multiplicities_q_independent(self, n):
        expected = list(range(-n, n + 1, 2))
        for q in QS:
            assert weight_exponents(irrep_su2(n, q)) == expected

    def test_rejects_bad_q(self):
        with pytest.raises(ValueError):
            irrep_su2(1, Fraction(1))
        with pytest.raises(ValueError):
            irrep_su2(1, Fraction(-1, 2))


class TestVectorRep:
    def test_n2_coincides_with_spin1(self):
        q = Fraction(2, 3)
        v = vector_rep_sln(2, q)
        r = irrep_su2(1, q)
        for a, b in ((v.E[0], r.E[0]), (v.F[0], r.F[0]), (v.K[0], r.K[0])):
            assert linalg.is_zero(a - b)

    @pytest.mark.parametrize("n", [3, 4])
    @pytest.mark.parametrize("q", [Fraction(2, 3), Fraction(2)])
    def test_relations_exact(self, n, q):
        report = verify_relations(vector_rep_sln(n, q))
        assert report.passed
        serre = [e for e in report.entries if e.relation.startswith("serre")]
        assert serre and all(e.residual == 0 for e in serre)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            vector_rep_sln(1, Fraction(1, 2))

    def test_corrupted_k_reported(self):
        r = vector_rep_sln(3, Fraction(1, 2))
        r.K[0] = linalg.qidentity(3)
        report = verify_relations(r)
        assert not report.passed
        assert any(e.relation == "KEK" for e in report.failing)


class TestCounitRep:
    @pytest.mark.parametrize("label", SUPPORTED_LABELS)
    def test_passes_for_every_type(self, label):
        report = verify_relations(trivial_rep(builtin_cartan(label), Fraction(1, 2)))
        assert report.passed


class TestTensor:
    def test_unit_object(self):
        q = Fraction(1, 2)
        r = irrep_su2(3, q)
        t = tensor(r, irrep_su2(0, q))
        for i in range(1):
            assert linalg.is_zero(t.E[i] - r.E[i])
            assert linalg.is_zero(t.K[i] - r.K[i])
        assert linalg.is_zero(t.gram - r.gram)

    def test_dim_functorial(self):
        q = Fraction(2, 3)
        a, b = irrep_su2(2, q), irrep_su2(3, q)
        assert tensor(a, b).dim == a.dim * b.dim

    def test_v1_v1_spectrum(self):
        q = Fraction(1, 2)
        t = tensor(irrep_su2(1, q), irrep_su2(1, q))
        diag = sorted(t.K[0][i, i] for i in range(4))
        assert diag == sorted([q**2, Fraction(1), Fraction(1), q**-2])
        assert verify_relations(t).passed

    def test_strict_coassociativity(self):
        q = Fraction(1, 2)
        v = irrep_su2(1, q)
        left = tensor(tensor(v, v), v)
        right = tensor(v, tensor(v, v))
        for x, y in ((left.E[0], right.E[0]), (left.F[0], right.F[0]), (left.K[0], right.K[0])):
            assert linalg.is_zero(x - y)

    def test_relations_preserved_rank2(self):
        # comultiplication is an algebra map: tensor modules satisfy the relations
        q = Fraction(2)
        v = vector_rep_sln(3, q)
        assert verify_relations(tensor(v, v)).passed

    def test_mismatched_inputs_rejected(self):
        with pytest.raises(ValueError):
            tensor(irrep_su2(1, Fraction(1, 2)), irrep_su2(1, Fraction(1, 3)))
        with pytest.raises(ValueError):
            tensor(irrep_su2(1, Fraction(1, 2)), vector_rep_sln(3, Fraction(1, 2)))


class TestInvertQ:
    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_valid_at_inverse_parameter(self, n):
        r = irrep_su2(n, Fraction(2))
        r2 = invert_q(r)
        assert r2.q == Fraction(1, 2)
        report = verify_relations(r2)
        assert report.passed and all(e.residual == 0 for e in report.entries)

    def test_involutive(self):
        r = irrep_su2(2, Fraction(2))
        back = invert_q(invert_q(r))
        for a, b in ((back.E[0], r.E[0]), (back.F[0], r.F[0]), (back.K[0], r.K[0])):
            assert linalg.is_zero(a - b)

    def test_k_unchanged(self):
        r = vector_rep_sln(3, Fraction(3))
        r2 = invert_q(r)
        for i in range(r.rank):
            assert linalg.is_zero(r2.K[i] - r.K[i])
        assert verify_relations(r2).passed


class TestDirectSum:
    def test_relations_and_gram(self):
        q = Fraction(1, 2)
        s = direct_sum(irrep_su2(2, q), irrep_su2(0, q))
        assert s.dim == 4
        assert verify_relations(s).passed

    def test_mismatch_rejected(self):
        with pytest.raises(ValueError):
            direct_sum(irrep_su2(1, Fraction(1, 2)), irrep_su2(1, Fraction(2)))


class TestSerialization:
    def test_rep_round_trip(self, tmp_path):
        r = irrep_su2(2, Fraction(2, 3))
        path = tmp_path / "rep.json"
        r.save(path)
        r2 = Rep.load(path)
        assert r2.q == r.q and r2.dim == r.dim
        for a, b in ((r2.E[0], r.E[0]), (r2.gram, r.gram)):
            assert linalg.is_zero(a - b)
        assert verify_relations(r2).passed

    def test_report_json_lists_relations(self):
        report = verify_relations(irrep_su2(1, Fraction(1, 2)))
        data = report.to_json()
        assert data["passed"] is True and data["mode"] == "exact"
        names = {e["relation"] for e in data["entries"]}
        assert {"EF", "KEK", "star_E", "weight_spectrum"} <= names
