import json
import subprocess
import sys

import pytest

from kklab.cli import main

SHOCK = "scenario = shock\nn_cells = 100\nt_end = 0.2\nsnapshot_every = 20\n"


@pytest.fixture
def shock_cfg(tmp_path):
    path = tmp_path / "shock.cfg"
    path.write_text(SHOCK)
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_riemann_summary(capsys, tmp_path):
    csv_path = tmp_path / "fan.csv"
    code, out, _ = run_cli(capsys, "riemann", "--left", "2,2", "--right", "1,1", "--flux-law", "thin_film",
                           "--t", "1", "--samples", "21", "--csv", str(csv_path))
    assert code == 0
    rep = json.loads(out)
    assert rep["wave2"] == {"type": "shock", "speed": 3.5}
    assert rep["schema"].startswith("kklab.report/")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "x,u,v,r,xi" and len(lines) == 22


def test_unknown_subcommand(capsys):
    code, _, err = run_cli(capsys, "frobnicate")
    assert code == 1
    assert "usage:" in err


@pytest.mark.parametrize("sub", ["simulate", "riemann", "converge", "check", "demo-identity-diffusion",
                                 "validate-flux"])
def test_help(capsys, sub):
    code, out, _ = run_cli(capsys, sub, "--help")
    assert code == 0 and "usage:" in out


def test_check(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "check", "--k", "1", "--p", "0.5", "--m", "0.5", "--M", "4",
                           "--json", str(tmp_path / "c.json"))
    assert code == 0
    rep = json.loads(out)
    assert rep["min_hessian_eigenvalue"] > 0
    assert rep["max_compatibility_residual"] <= 1e-6
    assert rep["pass"] is True
    assert json.loads((tmp_path / "c.json").read_text()) == rep


def test_validate_flux(capsys):
    code, out, _ = run_cli(capsys, "validate-flux", "--flux-law", "log", "--r-min", "1", "--r-max", "4")
    assert code == 0
    assert json.loads(out)["min_dphi"] == pytest.approx(0.25)


def test_simulate_outputs_and_determinism(capsys, tmp_path, shock_cfg):
    outs = []
    for tag in ("a", "b"):
        out_dir = tmp_path / tag
        code, out, _ = run_cli(capsys, "simulate", "--config", str(shock_cfg), "--out", str(out_dir),
                               "--ledger", str(out_dir / "ledger.csv"))
        assert code == 0
        outs.append(out_dir)
    meta = json.loads((outs[0] / "meta.json").read_text())
    assert meta["n_steps"] > 0 and "wall_time" in meta and meta["config"]["n_cells"] == 100
    assert meta["final_region"]["pass"] is True
    files = sorted(p.name for p in outs[0].glob("snapshot_*.csv"))
    assert files and files == [s["file"] for s in meta["snapshots"]]
    for name in files + ["ledger.csv"]:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_simulate_inviscid(capsys, shock_cfg):
    code, out, _ = run_cli(capsys, "simulate", "--config", str(shock_cfg), "--epsilon", "0",
                           "--override", "representation=conservative")
    assert code == 0
    assert json.loads(out)["config"]["epsilon"] == 0.0


def test_simulate_numerical_failure_exit_code(capsys, shock_cfg):
    code, _, err = run_cli(capsys, "simulate", "--config", str(shock_cfg), "--override", "max_steps=3")
    assert code == 2
    assert "step budget" in err and "t = " in err


def test_config_errors(capsys, tmp_path, shock_cfg):
    code, _, err = run_cli(capsys, "simulate", "--config", str(shock_cfg), "--override", "epsilon=-1")
    assert code == 1 and "epsilon" in err
    code, _, err = run_cli(capsys, "simulate", "--config", str(tmp_path / "none.cfg"))
    assert code == 3
    code, _, _ = run_cli(capsys, "riemann", "--left", "2", "--right", "1,1")
    assert code == 1
    code, _, _ = run_cli(capsys, "riemann", "--left", "0.1,2", "--right", "1,1", "--m", "0.5")
    assert code == 1


def test_io_failure_exit_code(capsys, tmp_path, shock_cfg):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    code, _, err = run_cli(capsys, "simulate", "--config", str(shock_cfg), "--out", str(blocker / "sub"))
    assert code == 3 and err


def test_demo_identity(capsys, tmp_path):
    path = tmp_path / "contact.cfg"
    path.write_text("scenario = contact\nepsilon = 0.1\nn_cells = 200\nt_end = 0.5\n")
    code, out, _ = run_cli(capsys, "demo-identity-diffusion", "--config", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["overshoot"] is True and rep["max_r_peak"] > rep["max_r_initial"]


def test_converge(capsys, tmp_path, shock_cfg):
    code, out, _ = run_cli(capsys, "converge", "--config", str(shock_cfg), "--eps", "0.4,0.2",
                           "--csv", str(tmp_path / "c.csv"))
    assert code == 0
    rep = json.loads(out)
    assert "order_estimate" in rep
    assert (tmp_path / "c.csv").read_text().startswith("eps,dx,L1_error,wall_time\n")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kklab", "riemann", "--left", "1,1", "--right", "2,2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["wave2"]["type"] == "rarefaction"
