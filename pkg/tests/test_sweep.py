import math

import numpy as np
import pytest

from src.analysis.model import CodingConfig, expected_N, throughput
from src.storage.preset_manager import PresetError, PresetManager
from src.sweep.sweep import (
    PRECODE_FIXED_K,
    PRECODE_FIXED_RATE,
    PRECODE_NONE,
    SweepError,
    SweepSpec,
    build_grid,
    optimize,
    preset_base,
    preset_spec,
    run_sweep,
)


@pytest.fixture(scope="module")
def presets():
    return PresetManager()


@pytest.fixture(scope="module")
def fig2(presets):
    return run_sweep(preset_spec(presets.get("fig2")))


@pytest.fixture(scope="module")
def fig3(presets):
    return run_sweep(preset_spec(presets.get("fig3")))


def base_config(**overrides):
    values = dict(K=80, u=3, n=200, gamma_b_db=3.5)
    values.update(overrides)
    return CodingConfig.from_u(**values)


def decays_after_peak(values):
    peak = int(np.argmax(values))
    tail = values[peak:]
    return all(b <= a for a, b in zip(tail, tail[1:]))


def test_build_grid_linear_and_geometric():
    assert build_grid(1, 5) == (1, 2, 3, 4, 5)
    assert build_grid(1, 10, step=4) == (1, 5, 9)
    grid = build_grid(20, 50000, num=300, spacing="geometric")
    assert grid[0] == 20 and grid[-1] == 50000
    assert all(b > a for a, b in zip(grid, grid[1:]))
    with pytest.raises(SweepError):
        build_grid(5, 1)
    with pytest.raises(SweepError):
        build_grid(1, 5, step=0)
    with pytest.raises(SweepError):
        build_grid(0, 5, num=3, spacing="geometric")


def test_sweep_spec_validation():
    base = base_config()
    with pytest.raises(SweepError):
        SweepSpec(base, "K", (1, 2))
    with pytest.raises(SweepError):
        SweepSpec(base, "n", ())
    with pytest.raises(SweepError):
        SweepSpec(base, "n", (3, 2))
    with pytest.raises(SweepError):
        SweepSpec(base, "n", (1, 2), PRECODE_FIXED_RATE)
    with pytest.raises(SweepError):
        SweepSpec(base, "k", (1, 2))
    with pytest.raises(SweepError):
        SweepSpec(base, "n", (1, 2), "sometimes")


def test_fixed_rate_rounds_k_up():
    spec = SweepSpec(base_config(), "n", (7, 200, 201), PRECODE_FIXED_RATE, rate=0.5)
    assert [spec.config_at(n).k for n in spec.grid] == [4, 100, 101]
    assert all(spec.config_at(n).precode_enabled for n in spec.grid)


def test_sweep_rows_equal_pointwise_evaluation():
    base = base_config(precode_k=100)
    spec = SweepSpec(base, "u", (1, 4, 9), PRECODE_FIXED_K)
    result = run_sweep(spec)
    for u, row in zip(spec.grid, result.rows):
        assert row == throughput(base_config(u=u, precode_k=100))


def test_sweep_over_k():
    spec = SweepSpec(base_config(precode_k=100), "k", (50, 100, 150), PRECODE_FIXED_K)
    result = run_sweep(spec)
    assert [spec.config_at(k).k for k in spec.grid] == [50, 100, 150]
    assert len(result.rows) == 3


def test_threaded_sweep_keeps_grid_order():
    spec = SweepSpec(base_config(), "n", build_grid(1, 400, step=7))
    assert run_sweep(spec, workers=4).rows == run_sweep(spec).rows


def test_single_point_sweep():
    result = run_sweep(SweepSpec(base_config(), "n", (200,)))
    assert result.argmax_S == result.argmax_R == 200


@pytest.mark.parametrize("literal", [False, True])
def test_throughput_over_n_has_interior_peak(presets, literal):
    result = run_sweep(preset_spec(presets.get("fig1"), eq4_literal=literal))
    s = result.column("S")
    assert len(result.rows) == 2000
    assert 1 < result.argmax_S < 2000
    assert s[-1] < 0.2 * s.max()
    assert result.argmax_R >= result.argmax_S


def test_throughput_over_u_decays(fig2):
    s = fig2.column("S")
    assert s[-1] < 1e-3
    assert decays_after_peak(s)


def test_precoded_bound_over_u(fig2, fig3):
    assert decays_after_peak(fig3.column("S_LB"))
    s_plain = fig2.column("S")
    s_lb = fig3.column("S_LB")
    # rate 1/2 halves the payload, so the bound must beat half the uncoded throughput
    both = np.flatnonzero((s_plain > 0) & (s_lb > 0))
    last = both[-1]
    assert s_lb[last] > 0.5 * s_plain[last]
    assert np.all(s_lb[both] >= 0.5 * s_plain[both] * (1 - 1e-12))


def test_fixed_rate_bound_approaches_half_of_coding_efficiency(presets):
    result = run_sweep(preset_spec(presets.get("fig4a")))
    limit = 0.5 * 80 / expected_N(80, 8)
    s_lb = result.column("S_LB")
    tail = 1.0 - result.column("epsilon")
    grid = np.array(result.grid)
    reliable = tail > 0.999
    assert reliable.any()
    assert np.all(np.abs(s_lb[reliable] - limit) / limit < 0.05)

    # once the pre-code is reliable, longer packets never lower S_LB
    first = int(np.argmax(reliable))
    assert reliable[first:].all()
    assert np.all(np.diff(s_lb[first:]) >= 0)

    r_lb = result.column("R_LB")
    top_decade = r_lb[grid >= 5000]
    assert np.all(np.diff(top_decade) > 0)


def test_fixed_k_data_rate_collapses(presets):
    result = run_sweep(preset_spec(presets.get("fig4b")))
    r_lb = result.column("R_LB")
    assert r_lb[-1] < 0.01 * r_lb.max()


def test_optimize_single_point():
    best, row = optimize(base_config(), "n", 150, 150)
    assert best == 150
    assert row == throughput(base_config(n=150))


def test_optimize_matches_brute_force():
    base = base_config()
    best, row = optimize(base, "n", 1, 300)
    values = [throughput(base_config(n=n)).S for n in range(1, 301)]
    assert best == 1 + int(np.argmax(values))
    assert row.S == max(values)


def test_optimize_rate_prefers_longer_packets():
    base = base_config()
    best_s, _ = optimize(base, "n", 1, 500, objective="S")
    best_r, _ = optimize(base, "n", 1, 500, objective="R")
    assert best_r > best_s


def test_optimize_rejects_bad_requests():
    with pytest.raises(SweepError):
        optimize(base_config(), "n", 10, 9)
    with pytest.raises(SweepError):
        optimize(base_config(), "n", 1, 9, objective="T")


def test_preset_lookup(presets):
    assert presets.names() == ["fig1", "fig2", "fig3", "fig4a", "fig4b"]
    assert presets.get("4a").name == "fig4a"
    assert presets.get("fig4b").precode == PRECODE_FIXED_K
    assert presets.get("fig1").precode == PRECODE_NONE
    assert preset_base(presets.get("fig3")).k == 100
    assert preset_base(presets.get("fig1")).precode_enabled is False
    with pytest.raises(PresetError):
        presets.get("fig9")


def test_missing_preset_file(tmp_path):
    with pytest.raises(PresetError):
        PresetManager(tmp_path / "absent.json").names()


def test_malformed_preset(tmp_path):
    path = tmp_path / "presets.json"
    path.write_text('{"fig1": {"variable": "n"}}')
    with pytest.raises(PresetError):
        PresetManager(path).get("1")


def test_fig1_peak_value_sensible(presets):
    result = run_sweep(preset_spec(presets.get("fig1")))
    row = result.rows[result.grid.index(result.argmax_S)]
    assert 0.0 < row.S < 80 / expected_N(80, 8)
    assert math.isclose(row.S_LB, row.S)
