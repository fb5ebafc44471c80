import os

import pytest

from gossipcover import cli

QUICK_PAIRWISE = """\
environment:
  rectangle: [2.0, 1.0]
n: 2
initial:
  kind: random_voronoi
density:
  kind: uniform
performance:
  kind: quadratic
algorithm:
  kind: gossip
scheduler:
  kind: round_robin
budget: 200
check_every: 1
seed: 0
"""

NETSIM_SHORT = """\
environment:
  rectangle: [3.0, 1.0]
initial:
  kind: strips
  cuts: [1.0, 2.0]
density:
  kind: uniform
performance:
  kind: quadratic
algorithm:
  kind: netsim
  speeds: [1.0, 1.0, 1.0]
  comm_radius: 1.0
  comm_rate: 2.0
  waypoint_margin: 0.2
  delta: 0.2
  time_step: 0.06
  horizon_legs: 3
seed: 0
"""


def write_cfg(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ---------------------------------------------------------------------------
# config loading

def test_preset_names_ship_with_package():
    assert cli.preset_names() == ["interval-comb", "netsim-strip",
                                  "polar-switching", "rect6"]
    for name in cli.preset_names():
        cfg = cli.load_config(name)
        assert isinstance(cfg, dict)


def test_load_config_rejections(tmp_path):
    with pytest.raises(cli.ConfigError):
        cli.load_config("no-such-preset")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [1, 2\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(str(bad))
    listy = tmp_path / "list.yaml"
    listy.write_text("- a\n- b\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(str(listy))


def test_presets_command_lists_names(capsys):
    assert cli.main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in cli.preset_names():
        assert name in out


# ---------------------------------------------------------------------------
# run command

def test_run_pairwise_converges(tmp_path):
    cfg = write_cfg(tmp_path, QUICK_PAIRWISE)
    out = tmp_path / "out"
    code = cli.main(["run", cfg, "--out", str(out), "--snapshots", "0"])
    assert code == 0
    for fn in ("trace.txt", "h_series.csv", "summary.txt", "snapshot-0.svg"):
        assert (out / fn).is_file()
    summary = (out / "summary.txt").read_text()
    assert "termination converged" in summary
    head = (out / "h_series.csv").read_text().splitlines()
    assert head[0] == "t,h,residual"
    assert len(head) >= 2


def test_run_seed_override_and_reproducibility(tmp_path):
    cfg = write_cfg(tmp_path, QUICK_PAIRWISE)
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert cli.main(["run", cfg, "--out", str(out), "--seed", "3"]) == 0
        outs.append(out)
    assert (outs[0] / "h_series.csv").read_bytes() == \
        (outs[1] / "h_series.csv").read_bytes()
    assert (outs[0] / "trace.txt").read_bytes() == \
        (outs[1] / "trace.txt").read_bytes()


def test_run_batch_fans_out_seeds(tmp_path):
    cfg = write_cfg(tmp_path, QUICK_PAIRWISE)
    out = tmp_path / "batch"
    assert cli.main(["run", cfg, "--out", str(out), "--batch", "2"]) == 0
    assert (out / "seed-0" / "summary.txt").is_file()
    assert (out / "seed-1" / "summary.txt").is_file()


def test_run_budget_exhaustion_returns_4(tmp_path):
    cfg = write_cfg(tmp_path, QUICK_PAIRWISE.replace("budget: 200",
                                                     "budget: 1"))
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "--out", str(out)]) == 4
    assert "termination step_budget" in (out / "summary.txt").read_text()


def test_run_unknown_algorithm_returns_2(tmp_path):
    cfg = write_cfg(tmp_path, QUICK_PAIRWISE.replace("kind: gossip",
                                                     "kind: quantum"))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 2


def test_run_missing_config_returns_2(tmp_path):
    assert cli.main(["run", "definitely-not-a-preset",
                     "--out", str(tmp_path / "o")]) == 2


def test_run_netsim_short(tmp_path):
    cfg = write_cfg(tmp_path, NETSIM_SHORT)
    out = tmp_path / "net"
    code = cli.main(["run", cfg, "--out", str(out)])
    # the strip start is already pairwise balanced, so the mixed check holds
    assert code == 0
    for fn in ("comm_log.txt", "h_series.csv", "summary.txt"):
        assert (out / fn).is_file()
    summary = (out / "summary.txt").read_text()
    assert "mixed_centroidal True" in summary
    assert "pair_0_1" in summary


def test_run_netsim_bad_delta_returns_2(tmp_path):
    cfg = write_cfg(tmp_path, NETSIM_SHORT.replace("delta: 0.2",
                                                   "delta: 0.5"))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 2


def test_run_polar(tmp_path):
    cfg = write_cfg(tmp_path, """\
algorithm:
  kind: polar
  mode: alternating
  steps: 400
  rho0: 1.7
""")
    out = tmp_path / "polar"
    assert cli.main(["run", cfg, "--out", str(out)]) == 0
    rows = (out / "polar_trace.csv").read_text().splitlines()
    assert rows[0] == "t,rho,theta,map"
    assert len(rows) == 402
    assert rows[1].endswith(",")  # state 0 precedes any applied map
    assert rows[2].endswith(",spiral")
    summary = (out / "summary.txt").read_text()
    assert "limit_set_distance" in summary


def test_run_comb_exact_table(tmp_path):
    cfg = write_cfg(tmp_path, """\
algorithm:
  kind: comb
  levels: 4
""")
    out = tmp_path / "comb"
    assert cli.main(["run", cfg, "--out", str(out)]) == 0
    rows = (out / "comb_table.csv").read_text().splitlines()
    assert rows[0] == ("t,left_measure,left_cost_at_zero,pair_cost,"
                       "hausdorff_to_full,symdiff_to_full")
    assert rows[1] == "0,1,3/4,1,1/2,1"
    assert rows[2] == "1,1,1/2,1,1/4,1"
    assert rows[5] == "4,1,1/2,1,1/32,1"


# ---------------------------------------------------------------------------
# compare command

def test_compare_two_algorithms(tmp_path):
    cfg = write_cfg(tmp_path, QUICK_PAIRWISE)
    out = tmp_path / "cmp"
    code = cli.main(["compare", cfg, "--algos", "gossip,lloyd",
                     "--out", str(out)])
    assert code == 0
    rows = (out / "compare.csv").read_text().splitlines()
    assert rows[0] == "t,h_gossip,h_lloyd"
    assert len(rows) >= 2
    summary = (out / "summary.txt").read_text()
    assert "gossip termination converged" in summary
    assert "lloyd termination converged" in summary


def test_compare_rejects_unknown_algo(tmp_path):
    cfg = write_cfg(tmp_path, QUICK_PAIRWISE)
    assert cli.main(["compare", cfg, "--algos", "netsim",
                     "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["compare", cfg, "--algos", "partial:zilch",
                     "--out", str(tmp_path / "o")]) == 2
