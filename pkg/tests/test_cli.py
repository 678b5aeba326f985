import json
import math
from pathlib import Path

import numpy as np
import pytest

from ergoscope.cli import main, run_scenario
from ergoscope.states import binary_entropy

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    lines = Path(path).read_text().strip().splitlines()
    assert lines[0].startswith("# ")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split(" "))
    header = lines[1].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[2:]]
    return meta, header, np.array(rows)


BOUND_BASELINE = """
seed = 5
[model]
preset = "ising_zz_field"
params = {{ h = 1.0 }}
[lattice]
L = 6
[partition]
l = 2
[state]
kind = "gibbs"
beta = 1.0
[reference]
policy = "gibbs"
beta = 1.0
[bounds]
beta0 = 1.0
[[channels]]
kind = "identity"
{extra}
"""


def test_bound_gibbs_baseline(tmp_path):
    cfg = write(tmp_path, "bound.toml", BOUND_BASELINE.format(extra=""))
    files = run_scenario(cfg, "bound", out=str(tmp_path / "out"))
    report = json.loads(Path(files[0]).read_text())
    assert report["verified"] == [True]
    assert abs(report["athermality_term"]) <= 1e-9
    assert report["meta"]["seed"] == 5
    assert "config_hash" in report["meta"]


def test_bound_with_random_circuits(tmp_path):
    extra = '[[channels]]\nkind = "random_circuits"\ncount = 20\ngates = 3\n'
    cfg = write(tmp_path, "bound.toml", BOUND_BASELINE.format(extra=extra))
    files = run_scenario(cfg, "bound", out=str(tmp_path / "out"))
    report = json.loads(Path(files[0]).read_text())
    assert len(report["works"]) == 21
    assert all(report["verified"])
    assert max(report["works"][1:]) <= 1e-9  # Gibbs states are passive


def test_bound_with_local_control_caps(tmp_path):
    text = BOUND_BASELINE.format(extra="").replace(
        "beta0 = 1.0", "beta0 = 1.0\nbeta1 = 1.0\nT = 0.5\nc_tilde = 4.0")
    cfg = write(tmp_path, "bound.toml", text)
    files = run_scenario(cfg, "bound", out=str(tmp_path / "out"))
    report = json.loads(Path(files[0]).read_text())
    caps = report["local_control_caps"]
    assert caps["sie_entropy_cap"] == pytest.approx(
        4.0 * 0.5 * caps["cut_sum_total"] / 1.0)
    assert caps["athermality_cap"] == pytest.approx(0.0, abs=1e-12)
    missing_beta1 = text.replace("beta1 = 1.0\n", "")
    cfg2 = write(tmp_path, "bound2.toml", missing_beta1)
    assert main(["bound", "--config", cfg2, "--out", str(tmp_path / "o2")]) == 1


def test_exit_codes(tmp_path):
    bad_partition = BOUND_BASELINE.format(extra="").replace("l = 2", "l = 4")
    cfg = write(tmp_path, "bad_partition.toml", bad_partition)
    assert main(["bound", "--config", cfg, "--out", str(tmp_path / "o1")]) == 1

    cfg2 = write(tmp_path, "unknown.toml", "mystery = 3\n")
    assert main(["fig1", "--config", cfg2, "--out", str(tmp_path / "o2")]) == 1

    nested = "[lattice]\nL = 4\nwarp = 1\n"
    cfg_nested = write(tmp_path, "nested.toml", nested)
    assert main(["fig1", "--config", cfg_nested,
                 "--out", str(tmp_path / "o4")]) == 1

    big = """
[model]
preset = "ising_zz_field"
[lattice]
L = 20
[thermo]
beta_points = 3
"""
    cfg3 = write(tmp_path, "big.toml", big)
    assert main(["thermo-curve", "--config", cfg3, "--out", str(tmp_path / "o3")]) == 2

    assert main(["bound", "--config", str(tmp_path / "missing.toml")]) == 1


def test_usage_errors_and_seed_override(tmp_path):
    assert main(["warp", "--config", "x.toml"]) == 1
    assert main(["--help"]) == 0
    cfg = write(tmp_path, "bound.toml", BOUND_BASELINE.format(extra=""))
    files = run_scenario(cfg, "bound", out=str(tmp_path / "out"), seed=99)
    report = json.loads(Path(files[0]).read_text())
    assert report["meta"]["seed"] == 99
    assert report["seed"] == 99


def test_verification_failure_exit_code(tmp_path, monkeypatch):
    import ergoscope.cli as cli_mod

    def boom(raw, out_dir, seed, meta, threads):
        raise cli_mod.VerificationFailure("synthetic")

    monkeypatch.setattr(cli_mod, "_run_bound", boom)
    cfg = write(tmp_path, "bound.toml", BOUND_BASELINE.format(extra=""))
    assert main(["bound", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_fig1_outputs_and_idempotence(tmp_path):
    fig1 = """
seed = 2
[fig1]
l = 4
h = 1.0
lambda_points = 10
beta_points = 60
crosscheck_sizes = [2, 3]
"""
    cfg = write(tmp_path, "fig1.toml", fig1)
    files = run_scenario(cfg, "fig1", out=str(tmp_path / "out"))
    by_name = {Path(f).name: f for f in files}
    meta, header, rows = read_csv(by_name["fig1_lambda.csv"])
    assert meta["dominance_ok"] == "True"
    assert header[:3] == ["lambda", "S_density", "E_density"]
    for row in rows:
        lam = row[0]
        assert row[1] == pytest.approx(binary_entropy(lam), abs=1e-12)
        assert row[2] == pytest.approx(-(1 - 2 * lam) ** 2 - (1 - 2 * lam), abs=1e-12)
    first = Path(by_name["fig1_lambda.csv"]).read_bytes()
    run_scenario(cfg, "fig1", out=str(tmp_path / "out"))
    assert Path(by_name["fig1_lambda.csv"]).read_bytes() == first

    gmeta, gheader, grows = read_csv(by_name["fig1_gibbs.csv"])
    assert gheader == ["beta", "S_density", "E_density"]
    assert gmeta["config_hash"] == meta["config_hash"]
    # entropy decreases along ascending beta
    assert np.all(np.diff(grows[:, 1]) < 1e-12)


def test_protocol_command(tmp_path):
    files = run_scenario(str(CONFIGS / "protocol.toml"), "protocol",
                         out=str(tmp_path / "out"))
    report = json.loads(Path(files[0]).read_text())
    assert report["work"] == pytest.approx(10.0, abs=1e-9)
    assert report["closed_form_work"] == pytest.approx(10.0, abs=1e-12)
    assert report["fidelity_ground"] >= 1 - 1e-9
    assert max(report["block_entropies"]) <= 1e-9


def test_eth_scan_command(tmp_path):
    eth = """
seed = 4
[model]
preset = "mixed_field_ising"
[lattice]
L = 6
[partition]
l = 2
[eth]
channels_per_state = 2
band = [0.4, 0.6]
"""
    cfg = write(tmp_path, "eth.toml", eth)
    files = run_scenario(cfg, "eth-scan", out=str(tmp_path / "out"))
    meta, header, rows = read_csv(files[0])
    assert header[:6] == ["index", "energy", "energy_density",
                          "max_trace_distance", "athermality_cap", "best_work"]
    assert header[6:] == ["dist_block1", "dist_block2", "dist_block3"]
    assert meta["chain_ok"] == "True"
    assert len(rows) == pytest.approx(0.2 * 64, abs=1)
    assert np.all(rows[:, 3] <= 2.0)


def test_dynamics_command(tmp_path):
    dyncfg = """
seed = 6
[model]
preset = "mixed_field_ising"
[lattice]
L = 8
[partition]
l = 2
[state]
kind = "basis"
digits = [0, 1, 0, 1, 0, 1, 0, 1]
[dynamics]
T = 1.0
dt = 0.02
stride = 5
l_values = [2, 4]
"""
    cfg = write(tmp_path, "dyn.toml", dyncfg)
    files = run_scenario(cfg, "dynamics", out=str(tmp_path / "out"))
    names = {Path(f).name for f in files}
    assert names == {"trajectory.csv", "sie_panel.csv"}
    meta, header, rows = read_csv(tmp_path / "out" / "trajectory.csv")
    assert header[:2] == ["t", "energy"]
    assert sum(1 for c in header if c.startswith("S_block")) == 4
    assert sum(1 for c in header if c.startswith("rate_block")) == 4
    smeta, sheader, srows = read_csv(tmp_path / "out" / "sie_panel.csv")
    assert sheader == ["l", "max_rate", "cut_sum", "max_ratio"]
    assert list(srows[:, 0]) == [2.0, 4.0]
    assert "area_law_slope" in smeta


def test_thermo_curve_command(tmp_path):
    files = run_scenario(str(CONFIGS / "thermo_curve.toml"), "thermo-curve",
                         out=str(tmp_path / "out"))
    meta, header, rows = read_csv(files[0])
    assert header == ["beta", "F", "E", "S", "sigma2"]
    assert len(rows) == 100
    # S = beta (E - F) identity on the emitted data
    assert np.max(np.abs(rows[:, 3] - rows[:, 0] * (rows[:, 2] - rows[:, 1]))) < 1e-10


def test_explicit_terms_model(tmp_path):
    explicit = """
[model]
d = 2
u0 = 4.0
delta = 1.0
[[model.pair_terms]]
sites = [1, 2]
matrix = [[-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0],
          [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0]]
[lattice]
L = 2
boundary = "open"
[thermo]
beta_min = 0.5
beta_max = 2.0
beta_points = 4
"""
    cfg = write(tmp_path, "explicit.toml", explicit)
    files = run_scenario(cfg, "thermo-curve", out=str(tmp_path / "out"))
    meta, header, rows = read_csv(files[0])
    # F(beta) for eigenvalues (-1, -1, 1, 1)
    for row in rows:
        beta = row[0]
        z = 2 * math.exp(beta) + 2 * math.exp(-beta)
        assert row[1] == pytest.approx(-math.log(z) / beta, abs=1e-10)
