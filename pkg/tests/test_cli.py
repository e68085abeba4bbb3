import json
import math

import numpy as np
import pytest
from oracles import GAUSSIAN_SHANNON, gaussian_radial_density, madelung_xi

from ueglab.cell import density_to_rs
from ueglab.cli import main

TINY_SCAN = [
    "--set", "n_particles=10",
    "--set", "scan_warmup_steps=300",
    "--set", "scan_sample_steps=3000",
    "--set", "production_warmup_steps=500",
    "--set", "production_sample_steps=4000",
    "--set", "gamma_grid_size=5",
    "--set", "gamma_replicas=2",
    "--set", "block_length=10",
    "--set", "gamma_bracket_scale=2.0",
    "--set", "master_seed=11",
]


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        lines = [l.rstrip("\n") for l in fh if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [l.split(",") for l in lines[1:]]


def test_scan_outputs_and_manifest_rerun(tmp_path, capsys):
    out1 = tmp_path / "a"
    code = main(["scan", "--densities", "0.05,0.1,0.2", "--output-dir", str(out1), *TINY_SCAN])
    assert code in (0, 2)
    header, rows = read_rows(out1 / "scan.csv")
    assert header == ["rho", "rs", "gamma_star", "t_c", "t_c_err", "v_c", "v_c_err",
                      "e_c", "e_c_err", "N", "flags"]
    assert len(rows) == 3
    assert float(rows[0][0]) == 0.05
    assert float(rows[1][1]) == pytest.approx(density_to_rs(0.1), rel=1e-12)
    fit_header, fit_rows = read_rows(out1 / "fit_report.csv")
    assert fit_header[0] == "quantity"
    assert [r[0] for r in fit_rows] == ["t_c", "v_c", "e_c"]
    manifest = json.loads((out1 / "scan_manifest.json").read_text())
    assert manifest["master_seed"] == 11
    assert "scan.csv" in manifest["outputs"]

    out2 = tmp_path / "b"
    code2 = main(["scan", "--from-manifest", str(out1 / "scan_manifest.json"),
                  "--output-dir", str(out2)])
    assert code2 == code
    for name in ("scan.csv", "gamma_scan_0.csv", "gamma_scan_1.csv",
                 "gamma_scan_2.csv", "fit_report.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_scan_default_densities_shape(tmp_path):
    # default density set: five rows and three fit-report rows
    out = tmp_path / "defaults"
    code = main(["scan", "--output-dir", str(out), *TINY_SCAN])
    assert code in (0, 2)
    _, rows = read_rows(out / "scan.csv")
    assert [float(r[0]) for r in rows] == [0.002, 0.01, 0.05, 0.1, 0.25]
    _, fit_rows = read_rows(out / "fit_report.csv")
    assert [r[0] for r in fit_rows] == ["t_c", "v_c", "e_c"]
    for name in (f"gamma_scan_{i}.csv" for i in range(5)):
        assert (out / name).exists()


def test_scan_single_density_row(tmp_path):
    out = tmp_path / "single"
    code = main(["scan", "--densities", "0.1", "--output-dir", str(out), *TINY_SCAN])
    assert code == 2  # fits skipped on a single point -> flagged-but-complete
    _, rows = read_rows(out / "scan.csv")
    assert len(rows) == 1
    manifest = json.loads((out / "scan_manifest.json").read_text())
    assert any(f.startswith("fit_skipped") for f in manifest["flags"])


def test_scan_gamma_scan_csv_columns(tmp_path):
    out = tmp_path / "gs"
    main(["scan", "--densities", "0.1", "--output-dir", str(out), *TINY_SCAN])
    header, rows = read_rows(out / "gamma_scan_0.csv")
    assert header == ["gamma", "w_mean", "w_err", "t_nloc", "v_ee", "flags"]
    assert len(rows) == 5
    gammas = [float(r[0]) for r in rows]
    assert gammas[0] == 0.0 and gammas == sorted(gammas)


def test_scan_invalid_config_exits_1(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n_particles = twelve\n")
    code = main(["scan", "--config", str(cfg), "--output-dir", str(tmp_path / "o")])
    assert code == 1
    cfg2 = tmp_path / "bad2.cfg"
    cfg2.write_text("no_such_key = 3\n")
    assert main(["scan", "--config", str(cfg2), "--output-dir", str(tmp_path / "o2")]) == 1


def test_scan_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# tiny run\n"
        "densities = 0.1\n"
        "n_particles = 10\n"
        "scan_warmup_steps = 300\n"
        "scan_sample_steps = 3000\n"
        "production_warmup_steps = 500\n"
        "production_sample_steps = 4000\n"
        "gamma_grid_size = 5\n"
        "block_length = 10\n"
        "gamma_bracket_scale = 2.0\n"
        "master_seed = 11\n"
    )
    out_cfg = tmp_path / "fromcfg"
    out_cli = tmp_path / "fromcli"
    assert main(["scan", "--config", str(cfg), "--output-dir", str(out_cfg)]) == 2
    assert main(["scan", "--densities", "0.1", "--output-dir", str(out_cli), *TINY_SCAN]) == 2
    assert (out_cfg / "scan.csv").read_bytes() == (out_cli / "scan.csv").read_bytes()


def test_entropy_uniform(tmp_path):
    out = tmp_path / "u.csv"
    code = main(["entropy", "--uniform-rho", "1.0", "--volume", "1.0", "--output", str(out)])
    assert code == 0
    header, rows = read_rows(out)
    table = {r[0]: r[1] for r in rows}
    assert float(table["shannon_S"]) == 0.0
    assert float(table["fisher_weizsacker"]) == 0.0
    assert float(table["local_wavevector"]) == 0.0
    assert table["mutual_information"] == ""


def test_entropy_gaussian_table(tmp_path):
    r, rho = gaussian_radial_density()
    table = tmp_path / "gauss.csv"
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("r,rho\n")
        for ri, pi in zip(r[::2], rho[::2]):
            fh.write(f"{float(ri)!r},{float(pi)!r}\n")
    out = tmp_path / "desc.csv"
    assert main(["entropy", "--table", str(table), "--output", str(out)]) == 0
    _, rows = read_rows(out)
    vals = {r[0]: r[1] for r in rows}
    assert float(vals["shannon_S"]) == pytest.approx(GAUSSIAN_SHANNON, abs=1e-5)
    assert float(vals["shannon_S"]) == pytest.approx(4.256816, abs=1e-5)
    assert float(vals["fisher_weizsacker"]) == pytest.approx(0.375, abs=1e-5)
    assert float(vals["dehesa_J"]) == pytest.approx(math.e, abs=1e-5)


def test_entropy_malformed_table(tmp_path, capsys):
    table = tmp_path / "bad.csv"
    table.write_text("r,rho\n0.1,0.5\nnot_a_number,0.4\n")
    assert main(["entropy", "--table", str(table), "--output", str(tmp_path / "o.csv")]) == 1
    assert "line 3" in capsys.readouterr().err


def test_entropy_argument_validation(tmp_path):
    assert main(["entropy", "--output", str(tmp_path / "x.csv")]) == 1
    assert main(["entropy", "--uniform-rho", "1.0", "--output", str(tmp_path / "y.csv")]) == 1


def test_madelung_with_oracle(tmp_path):
    L = 4.0
    oracle = tmp_path / "oracle.csv"
    oracle.write_text(f"quantity,value\nn1_energy,{madelung_xi(L) / 2.0!r}\n")
    out = tmp_path / "mad.csv"
    code = main(["madelung", "--edge-length", str(L), "--oracle-file", str(oracle),
                 "--output", str(out)])
    assert code == 0
    text = out.read_text()
    assert "alpha_invariance_pass = True" in text
    assert "oracle_pass = True" in text
    header, rows = read_rows(out)
    assert header == ["alpha_scale", "alpha", "energy", "xi"]
    assert len(rows) == 9
    energies = np.array([float(r[2]) for r in rows])
    assert energies.max() - energies.min() < 1e-8


def test_madelung_without_oracle_warns(tmp_path):
    out = tmp_path / "mad2.csv"
    with pytest.warns(UserWarning, match="oracle"):
        code = main(["madelung", "--edge-length", "3.0", "--alpha-points", "3",
                     "--output", str(out)])
    assert code == 0
    assert "oracle comparison skipped" in out.read_text()


def test_fit_command_exact_recovery(tmp_path):
    A, B = 0.04, -0.018
    rhos = np.array([0.004, 0.02, 0.08, 0.2])
    table = tmp_path / "ref.csv"
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("r_s,e_c\n")
        for rho in rhos:
            fh.write(f"{float(density_to_rs(rho))!r},{A + B * math.log(rho)!r}\n")
    out = tmp_path / "fit.csv"
    assert main(["fit", "--table", str(table), "--window-lo", "0.001",
                 "--window-hi", "0.5", "--output", str(out)]) == 0
    _, rows = read_rows(out)
    assert rows[0][0] == "e_c_reference"
    assert float(rows[0][1]) == pytest.approx(A, abs=1e-9)
    assert float(rows[0][3]) == pytest.approx(B, abs=1e-9)
    assert float(rows[0][6]) == pytest.approx(1.0, abs=1e-9)


def test_fit_window_too_small_exits_1(tmp_path, capsys):
    table = tmp_path / "ref.csv"
    table.write_text("r_s,e_c\n1.0,-0.05\n2.0,-0.04\n3.0,-0.03\n")
    code = main(["fit", "--table", str(table), "--window-lo", "0.2",
                 "--window-hi", "0.25", "--output", str(tmp_path / "f.csv")])
    assert code == 1
    assert ">= 3" in capsys.readouterr().err
