import json

import pandas as pd
import pytest

import main as cli
from nonlocal_lab import report as report_module
from nonlocal_lab import solve as solve_module
from nonlocal_lab.errors import HypothesisViolation

SMALL_CONF = """\
dimension = 1
rho = 1.0
ell.variant = constant
tail.variant = power_decay
tail.alpha2 = 0.5
domain.shape = interval
domain.h = 0.125
verify.checks = poincare, absolute_value
verify.seeds = 3
"""


@pytest.fixture
def conf(tmp_path):
    path = tmp_path / "small.conf"
    path.write_text(SMALL_CONF, encoding="utf-8")
    return path


def run(capsys, *argv):
    code = cli.main([str(arg) for arg in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_kernel_table(tmp_path, conf, capsys):
    code, out, _ = run(capsys, "kernel", "table", "--config", conf, "--out", tmp_path / "run")
    assert code == 0
    table = pd.read_csv(tmp_path / "run" / "kernel_table.csv")
    assert list(table.columns) == ["r", "M", "ell", "m_at_1_over_r"]
    assert table["M"][0] == pytest.approx(2.302585, rel=1e-6)
    assert "table" in json.loads(out)


def test_kernel_sigma_needs_a_tail(tmp_path, capsys):
    path = tmp_path / "zero.conf"
    path.write_text("tail.variant = zero\n", encoding="utf-8")
    code, _, err = run(capsys, "kernel", "sigma", "--config", path, "--out", tmp_path / "run")
    assert code == 2
    assert "error: " in err
    assert "gamma infinite" in err


def test_assemble_then_info(tmp_path, conf, capsys):
    form_path = tmp_path / "forms" / "form.bin"
    code, out, _ = run(capsys, "assemble", "--config", conf, "--out", form_path)
    assert code == 0
    assembled = json.loads(out)
    code, out, _ = run(capsys, "form", "info", form_path)
    assert code == 0
    info = json.loads(out)
    assert info["n_interior"] == 16
    assert info["lambda_min"] == pytest.approx(assembled["lambda_min"])


def test_eigen_with_vectors(tmp_path, conf, capsys):
    out_dir = tmp_path / "run"
    code, out, _ = run(capsys, "eigen", "--config", conf, "--out", out_dir, "--k", 3, "--vectors")
    assert code == 0
    table = pd.read_csv(out_dir / "eigen.csv")
    assert list(table["j"]) == [1, 2, 3]
    assert (out_dir / "eigenfunction_3.csv").exists()
    assert json.loads(out)["lambda_1"] == pytest.approx(table["lambda_j"][0])


def test_eigen_berezin(tmp_path, conf, capsys):
    code, out, _ = run(capsys, "eigen", "berezin", "--config", conf)
    assert code == 0
    result = json.loads(out)
    assert result["slack"] >= 0
    assert result["bound"] > 0


def test_verify_writes_tables(tmp_path, conf, capsys):
    out_dir = tmp_path / "run"
    code, _, _ = run(capsys, "verify", "--config", conf, "--out", out_dir)
    assert code == 0
    table = pd.read_csv(out_dir / "verify_poincare.csv")
    assert list(table.columns) == ["seed", "lhs", "rhs", "ratio", "pass"]
    assert len(table) == 3
    summary = json.loads((out_dir / "verify_summary.json").read_text(encoding="utf-8"))
    assert [item["check"] for item in summary["checks"]] == ["poincare", "absolute_value"]
    assert all(item["pass_rate"] == 1.0 for item in summary["checks"])
    assert [item["tol"] for item in summary["checks"]] == [1e-8, 1e-8]


def test_verify_reads_tolerances_from_the_config(tmp_path, capsys):
    path = tmp_path / "tol.conf"
    path.write_text(
        SMALL_CONF.replace("poincare, absolute_value", "poincare, hardy_origin, stroock_varopoulos")
        + "verify.tol_exact = 1e-6\nverify.tol_cross = 0.125\n",
        encoding="utf-8",
    )
    out_dir = tmp_path / "run"
    code, _, _ = run(capsys, "verify", "--config", path, "--out", out_dir)
    assert code == 0
    summary = json.loads((out_dir / "verify_summary.json").read_text(encoding="utf-8"))
    assert {item["check"]: item["tol"] for item in summary["checks"]} == {
        "poincare": 1e-6,
        "hardy_origin": 0.125,
        "stroock_varopoulos": 1e-6,
    }
    # One row per seed, whatever the number of orders tried.
    assert list(pd.read_csv(out_dir / "verify_stroock_varopoulos.csv")["seed"]) == [0, 1, 2]


def test_verify_unknown_check(tmp_path, conf, capsys):
    code, _, err = run(capsys, "verify", "--config", conf, "--out", tmp_path / "run", "--check", "sobolev")
    assert code == 2
    assert "valid checks" in err
    assert not (tmp_path / "run").exists()


def test_solve_dirichlet_and_neumann(tmp_path, conf, capsys):
    out_dir = tmp_path / "run"
    assert run(capsys, "solve", "dirichlet", "--config", conf, "--out", out_dir)[0] == 0
    solution = pd.read_csv(out_dir / "solution_dirichlet.csv")
    interior = solution[solution["region"] == "interior"]
    assert (interior["value"] > 0).all()
    report = json.loads((out_dir / "solve_dirichlet.json").read_text(encoding="utf-8"))
    assert report["converged"] is True
    assert run(capsys, "solve", "neumann", "--config", conf, "--out", out_dir)[0] == 0
    assert (out_dir / "solution_neumann.csv").exists()


def test_solve_neumann_incompatible(tmp_path, conf, capsys):
    data = tmp_path / "f.csv"
    pd.DataFrame({"value": [1.0] * 16}).to_csv(data, index=False)
    code, _, err = run(capsys, "solve", "neumann", "--config", conf, "--out", tmp_path / "run", "--f", data)
    assert code == 2
    assert "incompatible data" in err


def test_solve_pohozaev(tmp_path, conf, capsys):
    code, out, _ = run(capsys, "solve", "pohozaev", "--config", conf, "--out", tmp_path / "run")
    assert code == 0
    result = json.loads(out)
    assert set(result) == {"lhs", "rhs", "sigma", "p_star", "pass"}
    assert result["pass"] is True


def test_solve_h_sweep(tmp_path, conf, capsys):
    out_dir = tmp_path / "run"
    code, _, _ = run(capsys, "solve", "dirichlet", "--config", conf, "--out", out_dir, "--h-sweep", "0.25,0.125")
    assert code == 0
    table = pd.read_csv(out_dir / "refinement.csv")
    assert list(table["h"]) == [0.25, 0.125]
    code, _, err = run(capsys, "solve", "dirichlet", "--config", conf, "--h-sweep", "0.25,abc")
    assert code == 2
    assert "--h-sweep" in err


def test_perimeter_default_radius(tmp_path, capsys):
    path = tmp_path / "zero.conf"
    path.write_text("tail.variant = zero\ndomain.h = 0.0625\n", encoding="utf-8")
    code, out, _ = run(capsys, "perimeter", "--config", path)
    assert code == 0
    result = json.loads(out)
    assert result["radius"] == pytest.approx(0.5)
    # l = 1, rho = 1 on (-1, 1): the centered interval of radius 1/2 has perimeter 2.
    assert result["perimeter"] == pytest.approx(2.0, rel=1e-7)
    # w0(s) = s against l = 1: the integral of w0(s) / s over (0, 1) is 1.
    assert result["modulus_integral"]["finite"] is True
    assert result["modulus_integral"]["value"] == pytest.approx(1.0, rel=1e-6)
    code, _, err = run(capsys, "perimeter", "--config", path, "--boundary-nu", 0)
    assert code == 2
    assert "--boundary-nu" in err


def test_rearrange(tmp_path, conf, capsys):
    code, out, _ = run(capsys, "rearrange", "--config", conf, "--out", tmp_path / "run")
    assert code == 0
    result = json.loads(out)
    assert result["l2"] == pytest.approx(result["l2_rearranged"])
    assert (tmp_path / "run" / "rearranged.csv").exists()


def test_bad_config_line(tmp_path, capsys):
    path = tmp_path / "bad.conf"
    path.write_text("rho = 1\nell.gamma = 2\n", encoding="utf-8")
    code, out, err = run(capsys, "kernel", "table", "--config", path, "--out", tmp_path / "run")
    assert code == 2
    assert out == ""
    assert "error: line 2: unknown key 'ell.gamma'" in err


def test_report_is_deterministic(tmp_path, conf, capsys):
    payloads = []
    for name in ("a", "b"):
        code, _, _ = run(capsys, "report", "--config", conf, "--out", tmp_path / name, "--seeds", 2)
        assert code == 0
        payload = json.loads((tmp_path / name / "report.json").read_text(encoding="utf-8"))
        assert "generated_at" in payload
        payload.pop("generated_at")
        payloads.append(payload)
    assert payloads[0] == payloads[1]
    assert payloads[0]["total"] == len(payloads[0]["items"])
    assert payloads[0]["seeds"] == 2
    sublinear = next(item for item in payloads[0]["items"] if item["name"] == "sublinear")
    assert sublinear["pohozaev_skipped"] == {}


def test_sublinear_item_records_skipped_identities(monkeypatch):
    def no_exponent(dimension, sigma):
        raise HypothesisViolation(f"supercritical scaling exceeds dimension: sigma={sigma:g} >= N={dimension}")

    monkeypatch.setattr(solve_module, "critical_exponent", no_exponent)
    item = report_module.sublinear()
    assert sorted(item["pohozaev_skipped"]) == ["config_0", "config_1", "config_2"]
    assert all("exceeds dimension" in reason for reason in item["pohozaev_skipped"].values())
