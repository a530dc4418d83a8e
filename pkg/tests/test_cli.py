import json
import math

import pytest

from feketedyn.cli import (EXIT_NUMERIC, EXIT_OK, EXIT_THEORY, EXIT_USAGE,
                           main)


@pytest.fixture
def map_file(tmp_path):
    def write(name, num, den):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps({"degree": 2, "num": num, "den": den}))
        return str(path)
    return write


@pytest.fixture
def square_spec(map_file):
    # coefficients descending in X: num = X^2, den = Y^2
    return map_file("z2", ["1", "0", "0"], ["0", "0", "1"])


@pytest.fixture
def z2p1_spec(map_file):
    return map_file("z2p1", ["1", "0", "1"], ["0", "0", "1"])


@pytest.fixture
def parabolic_spec(map_file):
    return map_file("z2p14", ["1", "0", "1/4"], ["0", "0", "1"])


@pytest.fixture
def float_spec(map_file):
    return map_file("f", [[1, 0], [0, 0], [0, 0.25]], [[0, 0], [0, 0], [1, 0]])


class TestPerpts:
    def test_json_contents(self, square_spec, tmp_path):
        out = tmp_path / "out.json"
        code = main(["perpts", "--map", square_spec, "--n", "2",
                     "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["config"]["n"] == 2
        assert "version" in doc["config"]
        result = doc["result"]
        assert len(result["points"]) == 2
        assert result["multiplicities"] == [1, 1]
        assert max(result["residuals"]) <= 1e-10

    def test_stdout_default(self, square_spec, capsys):
        assert main(["perpts", "--map", square_spec, "--n", "1"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["result"]["points"]) == 3


class TestEnergy:
    def test_period_two_energy(self, square_spec, tmp_path):
        out = tmp_path / "e.json"
        code = main(["energy", "--map", square_spec, "--n", "2",
                     "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert abs(doc["result"]["pair_energy_sum"] - math.log(3)) <= 1e-9
        assert doc["result"]["config_size"] == 2
        assert "baker" in doc["result"]


class TestRate:
    def test_csv_with_embedded_config(self, square_spec, tmp_path):
        out = tmp_path / "rate.csv"
        code = main(["rate", "--map", square_spec, "--nmax", "2",
                     "--obs", "re_chordal", "--samples", "1000",
                     "--seed", "5", "--out", str(out)])
        assert code == EXIT_OK
        text = out.read_text()
        lines = text.split("\n")
        assert any(line.startswith("# seed=5") for line in lines)
        assert any(line.startswith("# fitted_C[re_chordal]=") for line in lines)
        header_idx = next(i for i, line in enumerate(lines)
                          if not line.startswith("#"))
        assert lines[header_idx].startswith("n,d_n,observable,discrepancy")
        assert len([line for line in lines[header_idx + 1:] if line]) == 2

    def test_unknown_observable_is_usage_error(self, square_spec):
        code = main(["rate", "--map", square_spec, "--nmax", "2",
                     "--obs", "entropy", "--samples", "500"])
        assert code == EXIT_USAGE


class TestArith:
    def test_discriminant_as_decimal_string(self, z2p1_spec, tmp_path):
        out = tmp_path / "a.json"
        code = main(["arith", "--map", z2p1_spec, "--n", "2",
                     "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["result"]["disc_numerator"] == "7"
        assert doc["result"]["valuations"] == {"7": 1}

    def test_float_map_rejected(self, float_spec):
        assert main(["arith", "--map", float_spec, "--n", "1"]) == EXIT_USAGE

    def test_parabolic_gives_numeric_code(self, parabolic_spec, capsys):
        code = main(["arith", "--map", parabolic_spec, "--n", "1"])
        assert code == EXIT_NUMERIC
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ZeroDiscriminant"


class TestErrorsAndExitCodes:
    def test_missing_map_file(self, tmp_path):
        code = main(["perpts", "--map", str(tmp_path / "nope.json"), "--n", "1"])
        assert code == EXIT_USAGE

    def test_malformed_spec(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"degree": 2, "num": ["1"], "den": ["1"]}))
        assert main(["perpts", "--map", str(bad), "--n", "1"]) == EXIT_USAGE

    def test_bad_flag_returns_usage(self, square_spec, capsys):
        assert main(["perpts", "--map", square_spec]) == EXIT_USAGE
        capsys.readouterr()

    def test_error_json_written_to_out(self, parabolic_spec, tmp_path, capsys):
        out = tmp_path / "err.json"
        main(["arith", "--map", parabolic_spec, "--n", "1", "--out", str(out)])
        capsys.readouterr()
        doc = json.loads(out.read_text())
        assert doc["exit_code"] == EXIT_NUMERIC

    def test_theory_code_exposed_constant(self):
        # the four-way code contract is part of the CLI surface
        assert (EXIT_OK, EXIT_USAGE, EXIT_THEORY, EXIT_NUMERIC) == (0, 2, 3, 4)


class TestDeterminism:
    def test_byte_identical_reruns(self, square_spec, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["rate", "--map", square_spec, "--nmax", "3",
                "--obs", "re_chordal,im_chordal", "--samples", "1500",
                "--seed", "7"]
        assert main(argv + ["--out", str(a)]) == EXIT_OK
        assert main(argv + ["--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_perpts_byte_identical(self, z2p1_spec, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["perpts", "--map", z2p1_spec, "--n", "4"]
        assert main(argv + ["--out", str(a)]) == EXIT_OK
        assert main(argv + ["--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
