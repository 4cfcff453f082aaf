import subprocess
import sys

import pytest

from ltlshape.cli import main

from conftest import DATA

SMALL_RUN = """[experiment]
benchmark = buttons
modes = shaped, baseline
seeds = 0-1
episodes = 200
window = 50
out = {out}
qtables = {qtables}
"""


def _write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_rendezvous(capsys):
    assert main(["validate", str(DATA / "rendezvous.hoa")]) == 0
    out = capsys.readouterr().out
    assert "7 states, 5 accepting transitions" in out
    assert "epsilon moves: 0" in out


def test_validate_flags_with_grid(capsys):
    assert main(["validate", str(DATA / "flags.hoa"), "--grid", str(DATA / "flags.grid")]) == 0
    out = capsys.readouterr().out
    assert "7 states, 6 accepting transitions" in out
    assert "covered by the alphabet" in out


def test_validate_choice_lists_epsilons(capsys):
    assert main(["validate", str(DATA / "choice.hoa")]) == 0
    out = capsys.readouterr().out
    assert "state 0: eps0 -> 1, eps1 -> 2" in out and "epsilon moves: 2" in out


def test_validate_label_outside_alphabet(tmp_path, capsys):
    grid = (DATA / "buttons.grid").read_text().replace("g2", "zz")
    g = _write(tmp_path, grid, "bad.grid")
    code = main(["validate", str(DATA / "motivating_phi3.hoa"), "--grid", g])
    assert code == 1
    assert "zz" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["buttons.cfg", "buttons_v2.cfg", "flags.cfg", "flags_shaped.cfg",
                                  "rendezvous.cfg", "oracle_small.cfg", "oracle_mutant.cfg"])
def test_shipped_configs_validate(name, capsys):
    assert main(["validate", "--config", str(DATA / name)]) == 0


def test_gamma_order_rejected_before_training(tmp_path, capsys):
    out = tmp_path / "res"
    cfg = _write(tmp_path, SMALL_RUN.format(out=out, qtables="false")
                 + "[shaping]\ngamma = 0.9\ngamma_b = 0.99\n")
    assert main(["run", "--config", cfg]) == 1
    assert "gamma" in capsys.readouterr().err
    assert not out.exists()


def test_missing_automaton_is_io_error(tmp_path, capsys):
    missing = tmp_path / "nope.hoa"
    cfg = _write(tmp_path, SMALL_RUN.format(out=tmp_path, qtables="false")
                 + f"automaton = {missing}\n")
    assert main(["run", "--config", cfg]) == 2
    assert "nope.hoa" in capsys.readouterr().err


def test_missing_config_is_io_error(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "none.cfg")]) == 2


def test_unknown_section_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "[experimnet]\nbenchmark = flags\n")
    assert main(["validate", "--config", cfg]) == 1


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "[shaping]\ngama_b = 0.5\n")
    assert main(["validate", "--config", cfg]) == 1
    assert "gama_b" in capsys.readouterr().err


def test_bad_hoa_is_validation_error(tmp_path, capsys):
    p = _write(tmp_path, "HOA: v1\nStates: 1\n--BODY--\n", "bad.hoa")
    assert main(["validate", p]) == 1


def test_run_writes_identical_csvs(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        cfg = _write(tmp_path, SMALL_RUN.format(out=out, qtables="true"), f"c{k}.cfg")
        assert main(["run", "--config", cfg]) == 0
        outs.append(out)
    text = capsys.readouterr().out
    assert "buttons shaped: final smoothed normalized" in text
    for mode in ("shaped", "baseline"):
        a, b = (o / f"buttons_{mode}.csv" for o in outs)
        assert a.read_bytes() == b.read_bytes()
    assert (outs[0] / "buttons_shaped_seed1_agent1.qtable").exists()


def test_run_overrides(tmp_path, capsys):
    cfg = _write(tmp_path, SMALL_RUN.format(out=tmp_path / "x", qtables="false"))
    out = tmp_path / "y"
    assert main(["run", "--config", cfg, "--seeds", "3", "--mode", "baseline", "--out", str(out)]) == 0
    assert [p.name for p in out.iterdir()] == ["buttons_baseline.csv"]
    rows = (out / "buttons_baseline.csv").read_text().splitlines()[1:]
    assert {r.split(",")[1] for r in rows} == {"3"}


def test_bad_seed_override(tmp_path, capsys):
    cfg = _write(tmp_path, SMALL_RUN.format(out=tmp_path, qtables="false"))
    assert main(["run", "--config", cfg, "--seeds", "4-1"]) == 1


def test_oracle_ok(capsys):
    assert main(["oracle", "--config", str(DATA / "oracle_small.cfg"), "--seeds", "0"]) == 0
    assert "oracle: 4/4 runs equivalent" in capsys.readouterr().out


def test_oracle_mutant_diverges(capsys):
    assert main(["oracle", "--config", str(DATA / "oracle_mutant.cfg"), "--seeds", "0"]) == 3
    assert "divergence at step" in capsys.readouterr().out


def test_oracle_state_cap(tmp_path, capsys):
    text = (DATA / "oracle_small.cfg").read_text().replace("state_cap = 1000000", "state_cap = 50")
    cfg = _write(tmp_path, text)  # relative paths fall back to the data directory
    assert main(["oracle", "--config", cfg, "--seeds", "0"]) == 1
    assert "cap" in capsys.readouterr().err


def test_plot_svg(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    cfg = _write(tmp_path, SMALL_RUN.format(out=tmp_path / "r", qtables="false"))
    assert main(["run", "--config", cfg]) == 0
    svg = tmp_path / "fig.svg"
    assert main(["plot", "--config", cfg, "--out", str(svg), "--title", "buttons"]) == 0
    text = svg.read_text()
    assert text.startswith("<?xml") and "<svg" in text


def test_console_script_exit_code(tmp_path):
    r = subprocess.run([sys.executable, "-m", "ltlshape.cli", "validate",
                        str(tmp_path / "missing.hoa")], capture_output=True, text=True)
    assert r.returncode == 2
    assert "missing.hoa" in r.stderr
