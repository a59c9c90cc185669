import csv
import io
import logging

import pytest

from src.analysis.model import CodingConfig, MetricsRow, throughput
from src.cli.commands import EXIT_ABORT, EXIT_OK, EXIT_USAGE, main
from src.storage.csv_table import format_cell

ANALYZE = ["analyze", "--K", "80", "--u", "3", "--n", "200", "--snr-db", "3.5"]


@pytest.fixture(autouse=True)
def restore_root_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def parse(text):
    lines = text.splitlines()
    data = [line for line in lines if not line.startswith("#")]
    comments = [line[2:] for line in lines if line.startswith("# ")]
    rows = list(csv.reader(io.StringIO("\n".join(data))))
    return rows[0], rows[1:], comments


def run_cli(capsys, argv):
    status = main(argv)
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def test_analyze_columns_and_values(capsys):
    status, out, _ = run_cli(capsys, ANALYZE)
    assert status == EXIT_OK
    header, rows, _ = parse(out)
    assert header == list(MetricsRow.FIELDS)
    assert len(rows) == 1

    expected = throughput(CodingConfig.from_u(K=80, u=3, n=200, gamma_b_db=3.5))
    assert rows[0] == [format_cell(getattr(expected, name)) for name in MetricsRow.FIELDS]


def test_analyze_single_symbol(capsys):
    status, out, _ = run_cli(capsys, ["analyze", "--K", "1", "--u", "1", "--n", "1", "--snr-db", "1000"])
    assert status == EXIT_OK
    header, rows, _ = parse(out)
    assert float(rows[0][header.index("S")]) == pytest.approx(0.25)


def test_analyze_with_precode_and_toggles(capsys):
    status, out, _ = run_cli(capsys, ANALYZE + ["--precode-k", "100", "--gv-literal", "--eq4-literal"])
    assert status == EXIT_OK
    header, rows, _ = parse(out)
    expected = throughput(CodingConfig.from_u(K=80, u=3, n=200, gamma_b_db=3.5, precode_k=100,
                                              gv_literal=True, eq4_literal=True))
    assert rows[0][header.index("S_LB")] == format_cell(expected.S_LB)
    assert rows[0][header.index("d")] == str(expected.d)


@pytest.mark.parametrize("argv", [
    ["analyze", "--K", "80", "--u", "3", "--n", "200"],
    ANALYZE + ["--bogus"],
    ["analyze", "--K", "0", "--u", "3", "--n", "200", "--snr-db", "3.5"],
    ANALYZE + ["--precode-k", "300"],
    ["analyze", "--K", "80", "--u", "3", "--n", "2", "--snr-db", "3.5", "--const-epsilon", "2"],
    ["frobnicate"],
    [],
])
def test_bad_invocations_exit_1(capsys, argv):
    status, out, err = run_cli(capsys, argv)
    assert status == EXIT_USAGE
    assert out == ""
    assert "error:" in err


def test_flag_abbreviations_rejected(capsys):
    status, _, _ = run_cli(capsys, ["analyze", "--K", "80", "--u", "3", "--n", "200", "--snr", "3.5"])
    assert status == EXIT_USAGE


def test_sweep_figure_1(capsys):
    status, out, _ = run_cli(capsys, ["sweep", "--figure", "1"])
    assert status == EXIT_OK
    header, rows, comments = parse(out)
    assert header == ["n"] + list(MetricsRow.FIELDS)
    assert len(rows) == 2000
    assert [row[0] for row in rows[:3]] == ["1", "2", "3"]
    assert len(comments) == 1
    assert comments[0].startswith("argmax_S=")


def test_sweep_single_row(capsys):
    status, out, _ = run_cli(capsys, ["sweep"] + ANALYZE[1:] +
                             ["--var", "n", "--from", "200", "--to", "200"])
    assert status == EXIT_OK
    _, rows, comments = parse(out)
    assert len(rows) == 1
    assert comments == ["argmax_S=200 argmax_R=200"]


def test_sweep_needs_range(capsys):
    status, _, err = run_cli(capsys, ["sweep", "--K", "80", "--u", "3", "--n", "200", "--snr-db", "3.5",
                                      "--var", "n"])
    assert status == EXIT_USAGE
    assert "--from" in err


def test_sweep_unknown_figure(capsys):
    status, _, err = run_cli(capsys, ["sweep", "--figure", "9"])
    assert status == EXIT_USAGE
    assert "unknown figure preset" in err


def test_fixed_rate_beats_fixed_k_at_long_packets(capsys):
    _, out_a, _ = run_cli(capsys, ["sweep", "--figure", "4a"])
    _, out_b, _ = run_cli(capsys, ["sweep", "--figure", "4b"])
    header, rows_a, _ = parse(out_a)
    _, rows_b, _ = parse(out_b)
    column = header.index("S_LB")
    assert float(rows_a[-1][column]) > float(rows_b[-1][column])


def test_simulate_is_reproducible(capsys):
    argv = ["simulate", "--K", "10", "--u", "3", "--n", "10", "--snr-db", "3.5",
            "--trials", "300", "--seed", "17"]
    status, first, _ = run_cli(capsys, argv)
    assert status == EXIT_OK
    _, second, _ = run_cli(capsys, argv)
    assert first == second
    header, rows, comments = parse(first)
    assert header[0] == "mode"
    assert rows[0][header.index("trials")] == "300"
    assert comments == ["seed=17"]


def test_simulate_zero_trials(capsys):
    status, _, err = run_cli(capsys, ["simulate", "--K", "10", "--u", "3", "--n", "10",
                                      "--snr-db", "3.5", "--trials", "0"])
    assert status == EXIT_USAGE
    assert "trials" in err


def test_simulate_validate(capsys):
    status, out, _ = run_cli(capsys, ["simulate", "--K", "10", "--u", "3", "--n", "10",
                                      "--snr-db", "3.5", "--trials", "1500", "--seed", "5",
                                      "--validate"])
    assert status == EXIT_OK
    header, rows, comments = parse(out)
    assert [row[0] for row in rows] == ["packet-erasure", "symbol-level"]
    assert comments == ["trials=1500 seed=5 all_agree=true"]
    for row in rows:
        assert abs(float(row[header.index("z_S")])) < 4


def test_simulate_trial_cap_exit_2(capsys):
    status, out, err = run_cli(capsys, ["simulate", "--K", "10", "--u", "3", "--n", "10",
                                        "--snr-db", "3.5", "--const-epsilon", "1",
                                        "--trials", "3", "--trial-cap", "500"])
    assert status == EXIT_ABORT
    assert out == ""
    assert "cap" in err


def test_optimize_matches_sweep_argmax(capsys):
    _, sweep_out, _ = run_cli(capsys, ["sweep", "--figure", "1"])
    argmax_s = int(parse(sweep_out)[2][0].split()[0].split("=")[1])

    status, out, _ = run_cli(capsys, ["optimize", "--figure", "1", "--from", "1", "--to", "2000"])
    assert status == EXIT_OK
    header, rows, comments = parse(out)
    assert header[0] == "n"
    assert int(rows[0][0]) == argmax_s
    assert comments == ["maximize=S range=[1,2000]"]

    _, out_r, _ = run_cli(capsys, ["optimize", "--figure", "1", "--from", "1", "--to", "2000",
                                   "--maximize", "R"])
    assert int(parse(out_r)[1][0][0]) > argmax_s


def test_optimize_explicit_config(capsys):
    status, out, _ = run_cli(capsys, ["optimize"] + ANALYZE[1:] +
                             ["--var", "u", "--from", "1", "--to", "8"])
    assert status == EXIT_OK
    _, rows, _ = parse(out)
    assert rows[0][0] == "1"


def test_optimize_empty_range(capsys):
    status, _, _ = run_cli(capsys, ["optimize", "--figure", "1", "--from", "10", "--to", "9"])
    assert status == EXIT_USAGE


def test_out_writes_file(capsys, tmp_path):
    target = tmp_path / "results" / "point.csv"
    status, out, _ = run_cli(capsys, ANALYZE + ["--out", str(target)])
    assert status == EXIT_OK
    assert out == ""
    text = target.read_text(encoding="utf-8")
    assert text.startswith(",".join(MetricsRow.FIELDS) + "\n")
    assert "\r" not in text


def test_presets_listing(capsys):
    status, out, _ = run_cli(capsys, ["presets"])
    assert status == EXIT_OK
    header, rows, _ = parse(out)
    assert header == ["name", "variable", "precode", "description"]
    assert [row[0] for row in rows] == ["fig1", "fig2", "fig3", "fig4a", "fig4b"]


def test_verbose_logs_to_stderr(capsys):
    status, _, err = run_cli(capsys, ["-v"] + ANALYZE)
    assert status == EXIT_OK
    assert "[Cli] Running analyze" in err


SIM_SMALL = ["simulate", "--K", "10", "--u", "3", "--n", "10", "--snr-db", "3.5", "--trials", "20"]
SWEEP_SMALL = ["sweep"] + ANALYZE[1:] + ["--var", "n", "--from", "10", "--to", "40"]


@pytest.mark.parametrize("argv", [
    SIM_SMALL + ["--trial-cap", "0"],
    SIM_SMALL + ["--workers", "0"],
    SIM_SMALL + ["--workers", "-2"],
    SWEEP_SMALL + ["--workers", "-2"],
    SWEEP_SMALL + ["--step", "0"],
    SWEEP_SMALL + ["--geometric", "0"],
    ["optimize", "--figure", "1", "--from", "1", "--to", "50", "--workers", "0"],
])
def test_counts_below_one_rejected(capsys, argv):
    status, out, err = run_cli(capsys, argv)
    assert status == EXIT_USAGE
    assert out == ""
    assert "must be >= 1" in err


def test_step_and_geometric_are_exclusive(capsys):
    status, _, err = run_cli(capsys, SWEEP_SMALL + ["--step", "2", "--geometric", "5"])
    assert status == EXIT_USAGE
    assert "mutually exclusive" in err


@pytest.mark.parametrize("extra", [
    ["--K", "7", "--var", "u"],
    ["--n", "100"],
    ["--from", "1", "--to", "10"],
    ["--geometric", "5"],
    ["--precode", "fixed-rate", "--rate", "0.5"],
])
def test_sweep_figure_rejects_overrides(capsys, extra):
    status, out, err = run_cli(capsys, ["sweep", "--figure", "1"] + extra)
    assert status == EXIT_USAGE
    assert out == ""
    assert "--figure cannot be combined with" in err
    assert extra[0] in err


def test_sweep_figure_accepts_model_toggles(capsys):
    status, out, _ = run_cli(capsys, ["sweep", "--figure", "1", "--eq4-literal"])
    assert status == EXIT_OK
    assert len(parse(out)[1]) == 2000


def test_optimize_figure_rejects_config_flags(capsys):
    status, _, err = run_cli(capsys, ["optimize", "--figure", "1", "--K", "7",
                                      "--from", "1", "--to", "50"])
    assert status == EXIT_USAGE
    assert "--K" in err


def test_analyze_huge_field(capsys):
    status, out, _ = run_cli(capsys, ["analyze", "--K", "80", "--u", "1100", "--n", "200",
                                      "--snr-db", "3.5"])
    assert status == EXIT_OK
    header, rows, _ = parse(out)
    assert float(rows[0][header.index("P_q")]) == pytest.approx(1.0)
    assert float(rows[0][header.index("S")]) == 0.0
