import os
import re

import pytest

from nttforge.cli import EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, main, read_config


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("NTTFORGE_OUT", str(tmp_path))
    return tmp_path


def test_params_dilithium(out, capsys):
    assert main(["params", "--scheme", "dilithium"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "Q = 8380417" in text and "n = 23" in text and "stages = 8" in text
    assert (out / "dilithium_params.txt").exists()


def test_params_toy(out, capsys):
    assert main(["params", "--q", "17", "--n", "8"]) == EXIT_OK
    assert "psi = 3" in capsys.readouterr().out


def test_params_not_prime(out, capsys):
    assert main(["params", "--q", "15", "--n", "8"]) == EXIT_INPUT
    assert "not prime" in capsys.readouterr().err


def test_params_needs_ring(out):
    assert main(["params"]) == EXIT_INPUT
    assert main(["params", "--scheme", "kyber", "--q", "17"]) == EXIT_INPUT


@pytest.mark.parametrize("c,cost", [(13, 2), (1, 0)])
def test_mcm_const(out, capsys, c, cost):
    assert main(["mcm", "--const", str(c)]) == EXIT_OK
    assert f"cost = {cost}\n" in capsys.readouterr().out
    assert (out / f"mcm_{c}.txt").exists()


def test_mcm_scheme_kyber(out, capsys):
    assert main(["mcm", "--scheme", "kyber"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "positions = 896" in text
    summary = dict(line.split(" = ") for line in (out / "kyber_mcm.txt").read_text().splitlines() if " = " in line)
    assert int(summary["opt_adders"]) < int(summary["csd_adders"])


def test_generate_toy_fast(out, capsys):
    import time
    t = time.perf_counter()
    assert main(["generate", "--q", "17", "--n", "8"]) == EXIT_OK
    assert time.perf_counter() - t < 1.0
    text = (out / "q17_ntt8.v").read_text()
    assert "*" not in "".join(line.split("//")[0] for line in text.splitlines())
    assert "butterflies = 12" in capsys.readouterr().out


def test_generate_kyber(out, capsys):
    assert main(["generate", "--scheme", "kyber"]) == EXIT_OK
    assert (out / "kyber_ntt256.v").exists()
    assert "butterflies = 896" in (out / "kyber_ntt256.metrics.txt").read_text()


def test_verify_deterministic(out, capsys):
    assert main(["verify", "--q", "17", "--n", "8", "--seed", "42", "--trials", "200"]) == EXIT_OK
    first = (out / "q17_ntt8.verify.txt").read_bytes()
    assert main(["verify", "--q", "17", "--n", "8", "--seed", "42", "--trials", "200"]) == EXIT_OK
    assert (out / "q17_ntt8.verify.txt").read_bytes() == first
    assert b"seed = 42" in first and b"ii_back_to_back = 1" in first


def test_verify_corrupted_file(out, capsys):
    assert main(["generate", "--q", "17", "--n", "8"]) == EXIT_OK
    path = out / "q17_ntt8.v"
    lines = path.read_text().splitlines()
    mux = re.compile(r"^wire \[\d+:0\] n\d+ = n\d+ \? n\d+ : n\d+;$")
    k = [i for i, line in enumerate(lines) if mux.match(line)][10]
    a, b = lines[k].split(" ? ")[1].rstrip(";").split(" : ")
    lines[k] = lines[k].split(" ? ")[0] + f" ? {b} : {a};"
    path.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--ir", str(path), "--trials", "20"]) == EXIT_MISMATCH
    assert "result = FAIL" in capsys.readouterr().out


def test_verify_unparsable_file(out, tmp_path):
    bad = tmp_path / "bad.v"
    bad.write_text("module x; endmodule\n")
    assert main(["verify", "--ir", str(bad)]) == EXIT_INPUT


def test_verify_vectors(out):
    assert main(["verify", "--q", "17", "--n", "8", "--trials", "5", "--vectors"]) == EXIT_OK
    assert (out / "q17_ntt8.fwd_in.hex").exists() and (out / "q17_ntt8.fwd_out.hex").exists()


def test_report_from_file(out, capsys):
    main(["generate", "--q", "17", "--n", "8"])
    capsys.readouterr()
    assert main(["report", "--ir", str(out / "q17_ntt8.v")]) == EXIT_OK
    assert "butterflies = 12" in capsys.readouterr().out


def test_config_file_and_override(out, tmp_path, capsys):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("# toy job\nq = 17\nn = 8\nmax_adder_depth = 1\n")
    assert main(["report", "--config", str(cfg)]) == EXIT_OK
    assert "max_adder_depth = 1" in capsys.readouterr().out
    assert main(["report", "--config", str(cfg), "--max-adder-depth", "3"]) == EXIT_OK
    assert "max_adder_depth = 3" in capsys.readouterr().out


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["params", "--config", str(bad)]) == EXIT_INPUT
    bad.write_text("q = seventeen\n")
    assert main(["params", "--config", str(bad)]) == EXIT_INPUT
    assert main(["params", "--config", str(tmp_path / "missing.cfg")]) == EXIT_INPUT


def test_out_flag_beats_env(out, tmp_path):
    other = tmp_path / "elsewhere"
    assert main(["params", "--q", "17", "--n", "8", "--out", str(other)]) == EXIT_OK
    assert (other / "q17_params.txt").exists()
    assert not (out / "q17_params.txt").exists()


def test_no_temp_files_left(out):
    main(["generate", "--q", "17", "--n", "8"])
    assert not [f for f in os.listdir(out) if ".tmp" in f]


def test_bad_trials(out):
    assert main(["verify", "--q", "17", "--n", "8", "--trials", "0"]) == EXIT_INPUT
