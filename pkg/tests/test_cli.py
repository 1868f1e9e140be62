import csv

import pytest

from lossqfi.cli import main
from lossqfi.output import read_manifest


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_qfi_coherent(capsys):
    assert main(["qfi", "--nbar", "2", "--x", "0", "--z", "1"]) == 0
    out = kv(capsys.readouterr().out)
    assert float(out["H"]) == pytest.approx(4.0, rel=1e-14)
    assert float(out["dilation_bound"]) == 8.0


def test_qfi_with_oracle(capsys):
    assert main(["qfi", "--nbar", "1", "--x", "0.5", "--z", "0.1", "--oracle"]) == 0
    out = kv(capsys.readouterr().out)
    assert float(out["rel_dev"]) <= 1e-6


def test_qfi_domain_error(capsys):
    assert main(["qfi", "--nbar", "1", "--x", "2", "--z", "1"]) == 2
    assert "error" in capsys.readouterr().err


def test_channel_flags_exclusive():
    with pytest.raises(SystemExit) as err:
        main(["qfi", "--nbar", "1", "--x", "0.5", "--z", "1", "--phi", "0.3"])
    assert err.value.code == 2


def test_gamma_t_parametrisation(capsys):
    assert main(["qfi", "--nbar", "1", "--x", "0", "--gamma-t", "0.6931471805599453"]) == 0
    assert float(kv(capsys.readouterr().out)["H"]) == pytest.approx(2.0, rel=1e-12)


def test_optimize(capsys):
    assert main(["optimize", "--nbar", "0.5", "--z", "0.1"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["boundary"] == "at_one"
    assert float(out["x_opt"]) == 1.0


def test_sweep_fig1_rows_and_manifest(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    assert main(["sweep", "fig1", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["nbar", "x", "H", "H_over_nbar"]
    assert len(rows) == 607
    man = read_manifest(str(out) + ".manifest")
    assert man["command"] == "sweep" and man["figure"] == "fig1"
    assert man["z"] == "0.1" and man["version"]


def test_sweep_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "fig2r", "--nbar", "1", "--z-grid", "0.01,10,7"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_outdir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("LOSSQFI_OUTDIR", str(tmp_path))
    assert main(["sweep", "fig2l", "--z", "1", "--nbar-grid", "1,10,3"]) == 0
    assert (tmp_path / "sweep_fig2l.csv").exists()


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "x.csv"
    assert main(["sweep", "fig1", "--out", str(target)]) == 3


def test_sld_report(tmp_path, capsys):
    out = tmp_path / "sld.csv"
    assert main(["sld", "--nbar", "1", "--x", "1", "--z", "1", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "oracle" in text and "discrepancy" in text
    assert out.read_text().startswith("nbar,x,z,path")


def test_sld_pure_output(capsys):
    assert main(["sld", "--nbar", "1", "--x", "0", "--z", "1"]) == 0
    assert "degenerate (pure)" in capsys.readouterr().out


def test_simulate_delta_rejected():
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--nbar", "1", "--x", "1", "--z", "1", "--delta", "0.4"])
    assert err.value.code == 2


def test_simulate_outputs(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    args = ["simulate", "--nbar", "1", "--x", "1", "--z", "1", "--N", "2000",
            "--trials", "4", "--dim", "80", "--out", str(out)]
    assert main(args + ["--seed", "5"]) == 0
    first = out.read_bytes()
    assert kv(capsys.readouterr().out)["seed"] == "5"
    assert (tmp_path / "sim_summary.csv").read_text().startswith("N,M,empirical_var,crb,z_score")
    assert read_manifest(str(out) + ".manifest")["seed"] == "5"
    assert main(args + ["--seed", "5"]) == 0
    assert out.read_bytes() == first


def test_simulate_records_drawn_seed(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    args = ["simulate", "--nbar", "1", "--x", "1", "--z", "1", "--N", "2000",
            "--trials", "2", "--dim", "80", "--out", str(out)]
    assert main(args) == 0
    seed = kv(capsys.readouterr().out)["seed"]
    assert seed.isdigit()
    assert read_manifest(str(out) + ".manifest")["seed"] == seed
