"""
Tests for the command line entry point.
"""

import json

import pytest

from app.cli import EXIT_INPUT, EXIT_OK, main


@pytest.fixture
def squares_file(tmp_path):
    path = tmp_path / "squares.txt"
    path.write_text("3\n10 10\n6 6\n6 6\n6 6\n")
    return path


@pytest.fixture
def halves_file(tmp_path):
    path = tmp_path / "halves.txt"
    path.write_text("2\n10 10\n5 10\n5 10\n")
    return path


class TestCli:

    def test_solve_prints_summary(self, squares_file, capsys):
        assert main(["solve", str(squares_file), "--time-limit", "30"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "status:   Optimal" in out
        assert "L=3  U=3" in out

    def test_solve_json(self, halves_file, capsys):
        assert main(["solve", str(halves_file), "--json", "--alpha", "5", "--beta", "5"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "Optimal"
        assert payload["U"] == 1
        assert len(payload["bins"]) == 1
        assert payload["bins"][0]["items"] == [0, 1]

    def test_missing_file(self, tmp_path, capsys):
        assert main(["solve", str(tmp_path / "nope.txt")]) == EXIT_INPUT
        assert "error" in capsys.readouterr().err

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n10 10\n4 x\n4 4\n")
        assert main(["bound", str(path)]) == EXIT_INPUT

    def test_bound(self, squares_file, capsys):
        assert main(["bound", str(squares_file), "--eta", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "l0: 3" in out

    def test_opp(self, halves_file, capsys):
        assert main(["opp", str(halves_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "verdict: Feasible" in out

    def test_opp_infeasible(self, squares_file, capsys):
        assert main(["opp", str(squares_file)]) == EXIT_OK
        assert "verdict: Infeasible" in capsys.readouterr().out

    def test_preprocess(self, squares_file, capsys):
        assert main(["preprocess", str(squares_file)]) == EXIT_OK
        assert "fixed bins: 3" in capsys.readouterr().out

    def test_bench(self, squares_file, halves_file, tmp_path, capsys):
        csv_path = tmp_path / "out.csv"
        assert main(["bench", str(tmp_path), "--csv", str(csv_path), "--time-limit", "30"]) == EXIT_OK
        assert csv_path.exists()
        assert capsys.readouterr().out.splitlines()[0].split()[0] == "class"

    def test_bench_requires_directory(self, tmp_path):
        assert main(["bench", str(tmp_path / "missing")]) == EXIT_INPUT

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["pack"])
