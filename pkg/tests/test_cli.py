"""Command-line contract: config resolution, artifacts, exit codes."""

import json
from pathlib import Path

import pytest

from caputohj.cli import DEFAULTS, main, parse_config

FIXTURES = Path(__file__).parent / "fixtures"


# --- config resolution --------------------------------------------------

def test_defaults_apply_without_config():
    cfg = parse_config(["solve"])
    assert cfg["subcommand"] == "solve"
    assert cfg["alpha"] == DEFAULTS["alpha"]
    assert cfg["eps_ladder"] == DEFAULTS["eps_ladder"]
    assert cfg["output_dir"] == "out"


def test_set_flag_overrides_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"alpha": 0.3, "t_final": 0.5}))
    cfg = parse_config(["solve", "--config", str(path),
                        "--set", "alpha=0.7",
                        "--set", "eps_ladder=[0.5,0.25,0.125]",
                        "--out", str(tmp_path / "results")])
    assert cfg["alpha"] == 0.7                    # flag beats file
    assert cfg["t_final"] == 0.5                  # file beats default
    assert cfg["eps_ladder"] == [0.5, 0.25, 0.125]
    assert cfg["output_dir"] == str(tmp_path / "results")


def test_set_flag_accepts_bare_strings():
    cfg = parse_config(["solve", "--set", "hamiltonian=eikonal"])
    assert cfg["hamiltonian"] == "eikonal"


def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"bogus_knob": 1}))
    assert main(["solve", "--config", str(path)]) == 1


@pytest.mark.parametrize("override,fragment", [
    ("alpha=1.0", "classical"),                  # hint at the baseline flag
    ("alpha=2.0", "(0, 1)"),
    ("eps=0.3", "reciprocal"),
    ("nu=0.0", "(0, 1)"),
    ("eps_ladder=[0.5,0.25]", ">= 3"),
    ("lambda_ladder=[0.05,0.1,0.2]", "decreasing"),
    ("cfl_fraction=0", "(0, 1]"),
    ("resolution=8", ">= 16"),
])
def test_validation_messages_name_key_and_range(override, fragment, capsys):
    assert main(["solve", "--set", override]) == 1
    err = capsys.readouterr().err
    assert fragment in err


def test_operational_errors_from_bad_files(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--config", str(bad)]) == 1
    listy = tmp_path / "list.json"
    listy.write_text("[1, 2]")
    assert main(["solve", "--config", str(listy)]) == 1
    assert main(["frobnicate"]) == 1              # unknown subcommand
    assert main(["solve", "--set", "noequals"]) == 1


# --- exit-code fixtures -------------------------------------------------

def test_fixture_configs_exercise_exit_contract(tmp_path):
    """The three shipped fixture configs walk the 0/1/2 contract."""
    assert main(["estimates",
                 "--config", str(FIXTURES / "estimates_pass.json"),
                 "--out", str(tmp_path / "a")]) == 0
    assert main(["estimates",
                 "--config", str(FIXTURES / "unknown_key.json"),
                 "--out", str(tmp_path / "b")]) == 1
    # slopes on the flat piece of the effective Hamiltonian leave only a
    # first-order term, so the scaled sensitivity halves with the
    # discount instead of staying put -> stability check fails
    assert main(["estimates",
                 "--config", str(FIXTURES / "estimates_unstable.json"),
                 "--out", str(tmp_path / "c")]) == 2


# --- subcommand artifacts ----------------------------------------------

def test_caputo_check_writes_report(tmp_path, capsys):
    assert main(["caputo-check", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") == 1 and "PASS" in out
    payload = json.loads((tmp_path / "caputo_report.json").read_text())
    assert payload["pass"] is True
    assert payload["histories"] == 100
    assert payload["max_identity_gap"] <= 1e-10
    assert len(payload["power_orders"]) == 3


def test_cell_writes_table(tmp_path):
    assert main(["cell", "--set", "p_count=5", "--set", "p_min=-1.0",
                 "--set", "p_max=1.0", "--set", "cell_n_cells=64",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "hbar.csv").read_text().splitlines()
    assert lines[0] == "p,hbar,fit_slope"
    assert len(lines) == 6
    p, hbar, _ = lines[1].split(",")
    assert float(p) == -1.0
    assert float(hbar) == pytest.approx(1.0, abs=0.02)


def test_solve_writes_snapshots(tmp_path):
    assert main(["solve", "--set", "eps=1.0", "--set", "t_final=0.1",
                 "--set", "snapshot_times=[0.0,0.1]",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "solution.csv").read_text().splitlines()
    assert lines[0] == "t,x,u"
    assert len(lines) == 1 + 2 * 16        # two snapshots on a 16-cell grid


def test_estimates_writes_both_reports(tmp_path):
    assert main(["estimates",
                 "--config", str(FIXTURES / "estimates_pass.json"),
                 "--out", str(tmp_path)]) == 0
    env = json.loads((tmp_path / "envelope_report.json").read_text())
    assert env["pass"] is True
    assert [r["delta"] for r in env["reports"]] == [0.1, 0.01, 0.001]
    disc = json.loads((tmp_path / "discount_report.json").read_text())
    assert disc["pass"] is True
    assert disc["stable"] is True
    assert len(disc["checks"]) == 2
