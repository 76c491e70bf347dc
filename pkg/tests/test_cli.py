"""Command-line surface: files, exit codes, determinism, config precedence."""

import json

import pytest

from djtwist.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


class TestIrrep:
    def test_writes_rep_with_expected_k(self, tmp_path, capsys):
        out_path = tmp_path / "v2.json"
        code, out = run(["irrep", "--n", "2", "--q", "1/2", "--out", str(out_path)], capsys)
        assert code == 0
        data = json.loads(out_path.read_text())
        diag = [data["K"][0][i][i] for i in range(3)]
        assert diag == ["1/4", "1/1", "4/1"]
        assert "0 failing" in out

    def test_trivial(self, tmp_path, capsys):
        out_path = tmp_path / "v0.json"
        code, _ = run(["irrep", "--n", "0", "--q", "3", "--out", str(out_path)], capsys)
        assert code == 0
        assert json.loads(out_path.read_text())["dim"] == 1

    def test_q_one_rejected(self, capsys):
        assert main(["irrep", "--n", "1", "--q", "1"]) == 2


class TestVerify:
    def test_valid_file(self, tmp_path, capsys):
        rep = tmp_path / "rep.json"
        run(["irrep", "--n", "2", "--q", "1/2", "--out", str(rep)], capsys)
        code, out = run(["verify", str(rep)], capsys)
        assert code == 0

    def test_corrupted_file_names_relation(self, tmp_path, capsys):
        rep = tmp_path / "rep.json"
        run(["vector-rep", "--n", "3", "--q", "1/2", "--out", str(rep)], capsys)
        data = json.loads(rep.read_text())
        data["K"][0] = [["1/1", "0/1", "0/1"], ["0/1", "1/1", "0/1"], ["0/1", "0/1", "1/1"]]
        rep.write_text(json.dumps(data))
        code, out = run(["verify", str(rep)], capsys)
        assert code == 1
        assert "KEK" in out

    def test_vector_rep_serre_rows(self, tmp_path, capsys):
        rep = tmp_path / "v3.json"
        run(["vector-rep", "--n", "3", "--q", "2/3", "--out", str(rep)], capsys)
        code, out = run(["verify", str(rep), "--out", str(tmp_path / "r.json")], capsys)
        assert code == 0
        report = json.loads((tmp_path / "r.json").read_text())
        assert any(e["relation"] == "serre_E" for e in report["entries"])


class TestTensorCmd:
    def test_tensor_files(self, tmp_path, capsys):
        r1 = tmp_path / "r1.json"
        run(["irrep", "--n", "1", "--q", "1/2", "--out", str(r1)], capsys)
        out_path = tmp_path / "t.json"
        code, _ = run(["tensor", str(r1), str(r1), "--out", str(out_path)], capsys)
        assert code == 0
        assert json.loads(out_path.read_text())["dim"] == 4


class TestTwistCmd:
    def test_pair_block(self, capsys):
        code, out = run(["twist", "--a", "1", "--b", "1", "--q", "1/2"], capsys)
        assert code == 0
        assert "PASS block (1,1)" in out

    def test_unit_block_identity(self, capsys):
        code, out = run(["twist", "--a", "1", "--b", "0", "--q", "1/2"], capsys)
        assert code == 0

    def test_triple(self, capsys):
        code, out = run(["twist", "--a", "1", "--b", "1", "--c", "1", "--q", "1/2"], capsys)
        assert code == 0
        assert "PASS block (1,1,1)" in out

    def test_needs_labels(self):
        with pytest.raises(SystemExit):
            main(["twist", "--q", "1/2"])

    def test_save_block_writes_matrix(self, tmp_path, capsys):
        out_path = tmp_path / "block.json"
        code, _ = run(
            ["twist", "--a", "1", "--b", "1", "--q", "1/2", "--save-block", str(out_path)],
            capsys,
        )
        assert code == 0
        data = json.loads(out_path.read_text())
        assert len(data["F"]) == 4 and "intertwine_residual" in data

    def test_sweep_table(self, tmp_path, capsys):
        out_path = tmp_path / "sweep.json"
        code, out = run(
            ["twist", "--sweep", "--associators", "--q", "1/2",
             "--max-spin", "1", "--max-triple", "1", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        data = json.loads(out_path.read_text())
        assert len(data["blocks"]) == 4 + 8  # pairs <= 1 plus triples <= 1
        assert out.count("PASS") == 12


class TestCgCmd:
    def test_labels(self, tmp_path, capsys):
        out_path = tmp_path / "cg.json"
        code, _ = run(["cg", "--a", "2", "--b", "1", "--q", "2/3", "--out", str(out_path)], capsys)
        assert code == 0
        data = json.loads(out_path.read_text())
        assert data["labels"] == [1, 3]
        assert data["completeness_residual"] == "0/1"

    def test_classical_point(self, tmp_path, capsys):
        out_path = tmp_path / "cg1.json"
        code, _ = run(["cg", "--a", "3", "--b", "2", "--q", "1", "--out", str(out_path)], capsys)
        assert code == 0
        assert json.loads(out_path.read_text())["labels"] == [1, 3, 5]


class TestLiftCmd:
    def test_roundtrip_pass(self, capsys):
        code, out = run(["lift", "--roundtrip", "1,1", "--q", "1/2", "--seed", "7"], capsys)
        assert code == 0
        assert "PASS ef_commutator" in out

    def test_action_file(self, tmp_path, capsys):
        from djtwist.liftalg import roundtrip_action

        path = tmp_path / "action.json"
        roundtrip_action([1], "1/2").save(path)
        code, out = run(["lift", str(path)], capsys)
        assert code == 0

    def test_trivial_action_file_zero_lift(self, tmp_path, capsys):
        from djtwist.liftalg import roundtrip_action

        path = tmp_path / "trivial.json"
        roundtrip_action([0], "1/2").save(path)
        lift_path = tmp_path / "lift.json"
        code, _ = run(["lift", str(path), "--save-lift", str(lift_path)], capsys)
        assert code == 0
        data = json.loads(lift_path.read_text())
        assert float(data["e"][0][0][0]) == 0.0 and float(data["f"][0][0][0]) == 0.0

    def test_q_one_rejected(self, capsys):
        code = main(["lift", "--roundtrip", "1", "--q", "1"])
        assert code != 0

    def test_needs_input(self):
        with pytest.raises(SystemExit):
            main(["lift", "--q", "1/2"])


class TestHarnessCmd:
    def test_small_suite(self, capsys):
        code, out = run(
            ["harness", "--count", "3", "--q", "1/2", "--seed", "3", "--max-n", "2"], capsys
        )
        assert code == 0
        assert out.count("PASS case") == 3


class TestReports:
    def test_determinism_byte_identical(self, tmp_path, capsys):
        a1, a2 = tmp_path / "r1.json", tmp_path / "r2.json"
        args = ["lift", "--roundtrip", "2,1", "--q", "2/3", "--seed", "11"]
        run(args + ["--out", str(a1)], capsys)
        run(args + ["--out", str(a2)], capsys)
        assert a1.read_bytes() == a2.read_bytes()

    def test_csv_format(self, tmp_path, capsys):
        out_path = tmp_path / "report.csv"
        code, _ = run(
            ["lift", "--roundtrip", "1", "--q", "1/2", "--format", "csv", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        text = out_path.read_text()
        assert text.startswith("key,value")
        assert "residuals.ef_commutator" in text

    def test_precision_flag(self, capsys):
        from djtwist.approx import get_context, set_precision

        try:
            code, _ = run(
                ["lift", "--roundtrip", "1", "--q", "1/2", "--precision", "96"], capsys
            )
            assert code == 0
            assert get_context().precision == 96
        finally:
            set_precision(128)

    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"q": "1/3", "tol": 1e-6}))
        out_path = tmp_path / "out.json"
        code, _ = run(
            ["lift", "--roundtrip", "1", "--config", str(cfg), "--out", str(out_path)], capsys
        )
        assert code == 0
        assert json.loads(out_path.read_text())["q"] == "1/3"
        code, _ = run(
            ["lift", "--roundtrip", "1", "--config", str(cfg), "--q", "1/2", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        assert json.loads(out_path.read_text())["q"] == "1/2"
