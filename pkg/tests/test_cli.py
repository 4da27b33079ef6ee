import json

import numpy as np
import pytest

from quditreduce import PureState, product_state, random_state
from quditreduce import cli
from quditreduce.cli import main
from quditreduce.errors import OracleFailureError
from quditreduce.fileio import load_state, save_state, save_trace
from quditreduce.reduction import DecompositionTrace

RT2 = np.sqrt(2.0)


def bell_file(path):
    # sqrt(0.5) is the correctly rounded 1/sqrt(2), so the cross-check
    # prints the familiar 0.7071067811865476 on both lines.
    r = np.sqrt(0.5)
    save_state(path, PureState(2, 2, np.array([r, 0, 0, r])))
    return path


def random_file(path, n, l, seed):
    assert main(["random", "--n", str(n), "--l", str(l), "--seed", str(seed),
                 "--output", str(path)]) == 0
    return path


class TestRandom:
    def test_writes_normalized_state(self, tmp_path):
        path = random_file(tmp_path / "s.json", 2, 3, 42)
        doc = json.loads(path.read_text())
        assert len(doc["amplitudes"]) == 8
        assert doc["seed"] == 42
        state, renormalized, _ = load_state(path)
        assert abs(state.norm - 1.0) < 1e-12
        assert not renormalized

    def test_repeat_invocation_is_byte_identical(self, tmp_path):
        p1 = random_file(tmp_path / "a.json", 2, 3, 42)
        p2 = random_file(tmp_path / "b.json", 2, 3, 42)
        assert p1.read_bytes() == p2.read_bytes()

    def test_capacity_exceeded(self, tmp_path, capsys):
        code = main(["random", "--n", "2", "--l", "40", "--seed", "1",
                     "--output", str(tmp_path / "big.json")])
        assert code == 1
        assert "cap" in capsys.readouterr().err

    def test_bad_arguments_exit_1(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["random", "--n", "two", "--l", "3", "--seed", "1",
                  "--output", str(tmp_path / "s.json")])
        assert info.value.code == 1


class TestReduce:
    def test_bell_state(self, tmp_path):
        path = bell_file(tmp_path / "bell.json")
        assert main(["reduce", "--input", str(path)]) == 0
        report = json.loads((tmp_path / "bell.report.json").read_text())
        assert report["converged"] is True
        assert report["support_after"] == 2
        assert report["bound"] == 2
        assert all(s["iterations"] == 0 for s in report["stages"])
        trace = json.loads((tmp_path / "bell.trace.json").read_text())
        assert trace["rotations"] == []

    def test_qubit_triple_within_bound(self, tmp_path):
        path = random_file(tmp_path / "s.json", 2, 3, 11)
        assert main(["reduce", "--input", str(path)]) == 0
        report = json.loads((tmp_path / "s.report.json").read_text())
        assert report["support_after"] <= 5

    def test_three_level_triple_within_bound(self, tmp_path):
        path = random_file(tmp_path / "s.json", 3, 3, 11)
        assert main(["reduce", "--input", str(path)]) == 0
        report = json.loads((tmp_path / "s.report.json").read_text())
        assert report["support_after"] <= 18
        assert all(s["residual"] < 1e-12 for s in report["stages"])
        assert report["seed"] == 11
        assert report["input_digest"].startswith("sha256:")

    def test_explicit_output_paths(self, tmp_path):
        path = random_file(tmp_path / "s.json", 2, 2, 0)
        out = tmp_path / "out.json"
        tr = tmp_path / "tr.json"
        rep = tmp_path / "rep.json"
        assert main(["reduce", "--input", str(path), "--output", str(out),
                     "--trace", str(tr), "--report", str(rep)]) == 0
        assert out.exists() and tr.exists() and rep.exists()

    def test_round_robin_strategy(self, tmp_path):
        f = np.array([1, 1]) / RT2
        path = tmp_path / "p.json"
        save_state(path, product_state([f, f, f]))
        assert main(["reduce", "--input", str(path), "--strategy",
                     "round-robin"]) == 0
        report = json.loads((tmp_path / "p.report.json").read_text())
        assert report["strategy"] == "round-robin"
        assert report["support_after"] == 1

    def test_nonconvergence_writes_partials_and_exits_2(self, tmp_path):
        path = random_file(tmp_path / "s.json", 2, 3, 3)
        code = main(["reduce", "--input", str(path), "--max-iters", "1"])
        assert code == 2
        report = json.loads((tmp_path / "s.report.json").read_text())
        assert report["converged"] is False
        assert (tmp_path / "s.reduced.json").exists()
        assert (tmp_path / "s.trace.json").exists()

    def test_slightly_denormalized_input_is_flagged(self, tmp_path):
        path = random_file(tmp_path / "s.json", 2, 2, 8)
        doc = json.loads(path.read_text())
        doc["amplitudes"] = [[re * (1 + 3e-9), im * (1 + 3e-9)]
                             for re, im in doc["amplitudes"]]
        path.write_text(json.dumps(doc))
        assert main(["reduce", "--input", str(path)]) == 0
        report = json.loads((tmp_path / "s.report.json").read_text())
        assert report["input_renormalized"] is True

    def test_missing_input_exits_1(self, tmp_path, capsys):
        assert main(["reduce", "--input", str(tmp_path / "nope.json")]) == 1
        assert "error" in capsys.readouterr().err

    def test_malformed_input_exits_1(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{}")
        assert main(["reduce", "--input", str(path)]) == 1

    def test_no_input_no_batch_exits_1(self):
        assert main(["reduce"]) == 1

    def test_batch_directory(self, tmp_path):
        random_file(tmp_path / "a.json", 2, 2, 1)
        random_file(tmp_path / "b.json", 3, 2, 2)
        assert main(["reduce", "--batch", str(tmp_path)]) == 0
        for stem in ("a", "b"):
            assert (tmp_path / f"{stem}.reduced.json").exists()
            assert (tmp_path / f"{stem}.report.json").exists()
        # Second pass must not treat generated outputs as inputs.
        assert main(["reduce", "--batch", str(tmp_path)]) == 0
        assert not (tmp_path / "a.reduced.reduced.json").exists()

    def test_batch_missing_directory(self, tmp_path):
        assert main(["reduce", "--batch", str(tmp_path / "none")]) == 1

    def test_batch_empty_directory(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["reduce", "--batch", str(empty)]) == 1


class TestVerify:
    def _reduce(self, tmp_path, n=3, l=2, seed=5):
        path = random_file(tmp_path / "s.json", n, l, seed)
        assert main(["reduce", "--input", str(path)]) == 0
        return (path, tmp_path / "s.trace.json", tmp_path / "s.reduced.json")

    def test_reduce_outputs_verify(self, tmp_path, capsys):
        original, trace, reduced = self._reduce(tmp_path)
        code = main(["verify", "--original", str(original), "--trace",
                     str(trace), "--reduced", str(reduced)])
        assert code == 0
        assert "passed" in capsys.readouterr().out

    def test_perturbed_amplitude_fails(self, tmp_path):
        original, trace, reduced = self._reduce(tmp_path)
        doc = json.loads(reduced.read_text())
        doc["amplitudes"][0][0] += 1e-3
        reduced.write_text(json.dumps(doc))
        code = main(["verify", "--original", str(original), "--trace",
                     str(trace), "--reduced", str(reduced)])
        assert code == 3

    def test_empty_trace_identity(self, tmp_path, capsys):
        state = random_state(2, 2, seed=9)
        original = tmp_path / "o.json"
        save_state(original, state)
        trace_path = tmp_path / "t.json"
        save_trace(trace_path, DecompositionTrace(1.0, [], state))
        code = main(["verify", "--original", str(original), "--trace",
                     str(trace_path), "--reduced", str(original)])
        assert code == 0
        assert "0.000000e+00" in capsys.readouterr().out

    def test_shape_mismatch_exits_1(self, tmp_path):
        original, trace, _ = self._reduce(tmp_path)
        other = random_file(tmp_path / "other.json", 2, 2, 0)
        code = main(["verify", "--original", str(original), "--trace",
                     str(trace), "--reduced", str(other)])
        assert code == 1

    def test_unreadable_file_exits_1(self, tmp_path):
        original, trace, reduced = self._reduce(tmp_path)
        code = main(["verify", "--original", str(tmp_path / "gone.json"),
                     "--trace", str(trace), "--reduced", str(reduced)])
        assert code == 1


class TestSchmidt:
    def test_bell(self, tmp_path, capsys):
        path = bell_file(tmp_path / "bell.json")
        assert main(["schmidt", "--input", str(path)]) == 0
        out = capsys.readouterr().out
        assert out.count("0.7071067811865476") >= 2
        diff = float(out.splitlines()[-1].split()[-1])
        assert diff < 1e-12

    def test_product_state(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        save_state(path, product_state([[1, 0, 0], [0, 1, 0]]))
        assert main(["schmidt", "--input", str(path)]) == 0
        diff = float(capsys.readouterr().out.splitlines()[-1].split()[-1])
        assert diff < 1e-10

    def test_random_five_level(self, tmp_path, capsys):
        path = random_file(tmp_path / "s.json", 5, 2, 40)
        assert main(["schmidt", "--input", str(path)]) == 0
        diff = float(capsys.readouterr().out.splitlines()[-1].split()[-1])
        assert diff < 1e-8

    def test_rejects_non_bipartite(self, tmp_path):
        path = random_file(tmp_path / "s.json", 2, 3, 1)
        assert main(["schmidt", "--input", str(path)]) == 1

    def test_oracle_failure_exits_2(self, tmp_path, monkeypatch):
        def boom(state):
            raise OracleFailureError("stalled", residual=1.0)

        monkeypatch.setattr(cli, "schmidt_coefficients", boom)
        path = bell_file(tmp_path / "bell.json")
        assert main(["schmidt", "--input", str(path)]) == 2


class TestParser:
    def test_unknown_command_exits_1(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 1

    def test_unknown_flag_exits_1(self):
        with pytest.raises(SystemExit) as info:
            main(["reduce", "--nope"])
        assert info.value.code == 1

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert "quditreduce" in capsys.readouterr().out
