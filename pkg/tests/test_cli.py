"""Command-line interface: exit codes, config handling, outputs."""

import json
import math

import pytest

from vortexsphere import cli


def run(*argv):
    return cli.main(list(argv))


def _json_of(text):
    """Parse the JSON document, ignoring trailing # comment lines."""
    body = "\n".join(l for l in text.split("\n") if not l.startswith("#"))
    return json.loads(body)


# -- analyze -----------------------------------------------------------------

def test_analyze_ring_json(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = run("analyze", "--family", "ring", "--n", "4", "--theta0", "0.5",
               "--out", str(out))
    assert code == cli.EXIT_OK
    data = _json_of(out.read_text())
    assert data["verdict"] == "LyapunovStable"
    assert data["analytic_verdict"] == "LyapunovStable"
    assert data["agreement"] is True
    assert "# command=analyze" in out.read_text()


def test_analyze_stdout(capsys):
    code = run("analyze", "--family", "ring-pole", "--n", "5",
               "--theta0", "1.0", "--kappa", "1.5")
    assert code == cli.EXIT_OK
    data = _json_of(capsys.readouterr().out)
    assert data["kappa"] == 1.5
    assert isinstance(data["blocks"], list)


def test_analyze_two_rings(capsys):
    code = run("analyze", "--family", "two-rings", "--n", "3",
               "--theta0", "0.5", "--theta1", "2.0", "--staggered")
    assert code == cli.EXIT_OK
    data = _json_of(capsys.readouterr().out)
    assert data["verdict"] == "LyapunovStable"
    assert data["kappa"] > 0


def test_analyze_degenerate_two_rings(capsys):
    # the cube: four vortices on each of two aligned squares
    t0 = math.acos(1 / math.sqrt(3))
    code = run("analyze", "--family", "two-rings", "--n", "4",
               "--theta0", repr(t0), "--theta1", repr(math.pi - t0),
               "--aligned")
    assert code == cli.EXIT_OK
    data = _json_of(capsys.readouterr().out)
    assert data["verdict"] == "Degenerate"
    assert "note" in data


# -- parameter validation ----------------------------------------------------

def test_missing_family_exits_2(capsys):
    assert run("analyze", "--n", "4", "--theta0", "0.5") == 2


def test_missing_kappa_exits_2(capsys):
    assert run("analyze", "--family", "ring-pole", "--n", "4",
               "--theta0", "0.5") == 2


def test_degrees_hint(capsys):
    code = run("analyze", "--family", "ring", "--n", "4", "--theta0", "45")
    assert code == 2
    err = capsys.readouterr().err
    assert "radians" in err


def test_bad_tol_exits_2(capsys):
    assert run("analyze", "--family", "ring", "--n", "4", "--theta0", "0.5",
               "--tol-eig", "-1") == 2


def test_zero_kappa_pole_exits_2(capsys):
    assert run("analyze", "--family", "ring-pole", "--n", "4",
               "--theta0", "0.5", "--kappa", "0") == 2


def test_two_rings_requires_arrangement(capsys):
    assert run("analyze", "--family", "two-rings", "--n", "3",
               "--theta0", "0.5", "--theta1", "1.2") == 2


# -- config files ------------------------------------------------------------

def test_config_file(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# a comment\n"
        "family=ring-pole\n"
        "n=5\n"
        "theta0=1.0\n"
        "kappa=1.5\n")
    code = run("analyze", "--config", str(cfgfile))
    assert code == cli.EXIT_OK
    data = _json_of(capsys.readouterr().out)
    assert data["kappa"] == 1.5


def test_flags_override_config(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("family=ring-pole\nn=5\ntheta0=1.0\nkappa=1.5\n")
    code = run("analyze", "--config", str(cfgfile), "--kappa", "-2.0")
    assert code == cli.EXIT_OK
    data = _json_of(capsys.readouterr().out)
    assert data["kappa"] == -2.0


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("family=ring\nn=4\ntheta0=0.5\nbogus=1\n")
    assert run("analyze", "--config", str(cfgfile)) == 2
    assert "bogus" in capsys.readouterr().err


def test_config_rejects_malformed_line(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("family ring\n")
    assert run("analyze", "--config", str(cfgfile)) == 2


# -- scan --------------------------------------------------------------------

def test_scan_csv_output(tmp_path):
    out = tmp_path / "scan.csv"
    code = run("scan", "--family", "ring-pole", "--n", "4",
               "--resolution", "8", "--out", str(out))
    assert code == cli.EXIT_OK
    lines = out.read_text().strip().split("\n")
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "param1,param2,verdict,margin,kappa,xi,mu_z"
    assert len(body) == 1 + 64
    assert any(l.startswith("# command=scan") for l in lines)


def test_scan_svg_sibling(tmp_path):
    out = tmp_path / "scan.csv"
    code = run("scan", "--family", "ring-pole", "--n", "4",
               "--resolution", "6", "--out", str(out), "--svg")
    assert code == cli.EXIT_OK
    svg = (tmp_path / "scan.svg").read_text()
    assert svg.startswith("<svg ")


def test_scan_rejects_plain_ring(capsys):
    assert run("scan", "--family", "ring", "--n", "4",
               "--resolution", "4") == 2


def test_scan_two_poles_needs_kappa_s(capsys):
    assert run("scan", "--family", "ring-2poles", "--n", "5",
               "--resolution", "4") == 2


def test_scan_two_rings(tmp_path):
    out = tmp_path / "tr.csv"
    code = run("scan", "--family", "two-rings", "--n", "3", "--staggered",
               "--resolution", "6", "--out", str(out))
    assert code == cli.EXIT_OK
    body = [l for l in out.read_text().strip().split("\n")
            if not l.startswith("#")]
    assert len(body) == 1 + 36


# -- simulate ----------------------------------------------------------------

def test_simulate_reports_drifts(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = run("simulate", "--family", "ring", "--n", "4", "--theta0", "0.6",
               "--T", "0.5", "--dt", "1e-3", "--out", str(out))
    assert code == cli.EXIT_OK
    msg = capsys.readouterr().out
    assert "H drift" in msg
    assert "rigid rotation dev" in msg
    header = [l for l in out.read_text().split("\n")
              if not l.startswith("#")][0]
    assert header.startswith("time,x0,y0,z0")


def test_simulate_perturbed_growth(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = run("simulate", "--family", "ring", "--n", "8", "--theta0", "1.2",
               "--T", "1.0", "--dt", "1e-3", "--perturb", "--seed", "0",
               "--amplitude", "1e-6", "--out", str(out))
    assert code == cli.EXIT_OK
    msg = capsys.readouterr().out
    assert "growth exponent" in msg
    rate = float(msg.split("growth exponent:")[1].split()[0])
    assert rate > 0.5


def test_simulate_bad_T_exits_2(capsys):
    assert run("simulate", "--family", "ring", "--n", "4", "--theta0", "0.6",
               "--T", "-1") == 2


# -- verify ------------------------------------------------------------------

def test_verify_passes(capsys):
    assert run("verify", "--seed", "0") == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "FAIL" not in out
