import json
import math

import numpy as np
import pytest

from cfc_tlm.cli import ANGLE_HEADER, main, read_sparams_csv
from cfc_tlm.scenario import (
    ScenarioError,
    dump_scenario,
    load_shipped,
    parse_scenario,
    scenario_from_dict,
    scenario_to_dict,
    shipped_scenarios,
)

HEADER = "freq_hz,s11_re,s11_im,s21_re,s21_im,se_db"


def small(tmp_path, name="fig5", steps=4096, **panel):
    """A shipped scenario shortened to ``steps`` and written to ``tmp_path``."""
    data = scenario_to_dict(load_shipped(name))
    data["mesh"]["steps"] = steps
    data["panel"].update(panel)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(data))
    return path


def test_shipped_set():
    assert set(shipped_scenarios()) >= {
        "fig5", "fig5_N10", "fig5_N20", "fig6", "fig7", "tableI_A", "tableI_B", "tableI_C", "tableI_D"
    }


def test_parse_fig5():
    sc = load_shipped("fig5")
    (layer,) = sc.panel.layers
    assert (layer.thickness_m, layer.eps_r, layer.sigma_s_per_m) == (1e-3, 4.56, 8000.0)
    assert sc.panel.n_terms == 100
    assert sc.mesh.cell_size_m == 0.01
    assert sc.dt == pytest.approx(3.3356e-11, rel=1e-4)


def test_parse_table_d_is_multilayer():
    sc = load_shipped("tableI_D")
    assert len(sc.panel.layers) == 9
    assert sc.stack().thickness_m == pytest.approx(1.8e-3)
    assert sc.solver.resolve(len(sc.panel.layers)) == "gauss_seidel"
    assert sc.outputs.band_hz == (1e7, 1e9)


def test_parse_anisotropic():
    sc = load_shipped("fig6")
    an = sc.panel.anisotropic
    assert an.phi_deg == 45.0
    assert an.x_layers[0].sigma_s_per_m != an.y_layers[0].sigma_s_per_m
    panel = sc.anisotropic_panel(90.0)
    assert panel.phi_rad == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("name", sorted(shipped_scenarios()))
def test_round_trip(name, tmp_path):
    sc = load_shipped(name)
    path = tmp_path / "s.json"
    path.write_text(dump_scenario(sc))
    assert parse_scenario(path) == sc


def test_missing_layers_names_field(tmp_path):
    data = scenario_to_dict(load_shipped("fig5"))
    del data["panel"]["layers"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data, indent=2))
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(path)
    assert exc.value.field_path == "panel.layers"
    assert "bad.json" in str(exc.value)


@pytest.mark.parametrize(
    "path, value, field",
    [
        (("panel", "n_terms"), 0, "panel.n_terms"),
        (("mesh", "cell_size_m"), -1.0, "mesh.cell_size_m"),
        (("excitation", "node"), 40, "excitation.node"),
        (("outputs", "band_hz"), [1e7, 1e11], "outputs.band_hz"),
    ],
)
def test_invalid_values_name_field(path, value, field):
    data = scenario_to_dict(load_shipped("fig5"))
    data[path[0]][path[1]] = value
    with pytest.raises(ScenarioError) as exc:
        scenario_from_dict(data)
    assert field in str(exc.value)


def test_bad_layer_reports_index():
    data = scenario_to_dict(load_shipped("fig7"))
    data["panel"]["layers"][1]["eps_r"] = 0.2
    with pytest.raises(ScenarioError) as exc:
        scenario_from_dict(data)
    assert "panel.layers[1]" in str(exc.value)


def test_simulate_writes_schema_and_is_deterministic(tmp_path, capsys):
    sc = small(tmp_path)
    outs = []
    for run in ("a", "b"):
        assert main(["simulate", "--scenario", str(sc), "--out", str(tmp_path / run), "--n-terms", "20"]) == 0
        outs.append((tmp_path / run / "fig5_sim.csv").read_bytes())
    assert outs[0] == outs[1]
    text = outs[0].decode()
    assert text.splitlines()[0] == HEADER
    assert "Gauss-Seidel sweeps" in capsys.readouterr().out


def test_oracle_and_compare(tmp_path, capsys):
    sc = small(tmp_path, steps=8192)
    assert main(["simulate", "--scenario", str(sc), "--out", str(tmp_path)]) == 0
    assert main(["oracle", "--scenario", str(sc), "--out", str(tmp_path)]) == 0
    sim, orc = tmp_path / "fig5_sim.csv", tmp_path / "fig5_oracle.csv"
    assert main(["compare", "--sim", str(sim), "--oracle", str(orc)]) == 0
    assert main(["compare", "--sim", str(sim), "--oracle", str(sim)]) == 0
    assert "max |d| = 0.000000e+00" in capsys.readouterr().out
    assert main(["compare", "--sim", str(sim), "--oracle", str(orc), "--max-s-dev", "1e-9"]) == 3


def test_compare_low_order_deviates_more(tmp_path):
    sc = small(tmp_path, steps=8192)
    assert main(["sweep-n", "--scenario", str(sc), "--out", str(tmp_path), "--n-list", "10,100",
                 "--threads", "2"]) == 0
    orc = read_sparams_csv(tmp_path / "fig5_oracle.csv")
    dev = {n: np.max(np.abs(read_sparams_csv(tmp_path / f"fig5_N{n}.csv").s21 - orc.s21)) for n in (10, 100)}
    assert dev[10] > dev[100]


def test_oracle_vacuum_panel(tmp_path):
    data = scenario_to_dict(load_shipped("fig5"))
    data["panel"]["layers"] = [{"thickness_m": 1e-3}]
    path = tmp_path / "vac.json"
    path.write_text(json.dumps(data))
    assert main(["oracle", "--scenario", str(path), "--out", str(tmp_path), "--freqs", "1e8,1e9"]) == 0
    sp = read_sparams_csv(tmp_path / "fig5_oracle.csv")
    np.testing.assert_allclose(np.abs(sp.s11), 0.0, atol=1e-12)
    np.testing.assert_allclose(sp.se_db, 0.0, atol=1e-9)


def test_oracle_table_a_low_frequency(tmp_path):
    assert main(["oracle", "--scenario", "tableI_A", "--out", str(tmp_path), "--freqs", "1e6"]) == 0
    sp = read_sparams_csv(tmp_path / "tableI_A_oracle.csv")
    assert sp.se_db[0] == pytest.approx(65.5, abs=0.05)


def test_sweep_angle(tmp_path):
    sc = small(tmp_path, "fig6", steps=4096, n_terms=20)
    assert main(["sweep-angle", "--scenario", str(sc), "--out", str(tmp_path), "--angles", "0,45,90",
                 "--threads", "3"]) == 0
    rows = (tmp_path / "fig6_angle.csv").read_text().splitlines()
    assert rows[0] == ",".join(ANGLE_HEADER)
    assert len(rows) == 4


def test_simulate_anisotropic_writes_both_axes(tmp_path):
    sc = small(tmp_path, "fig6", steps=4096, n_terms=10)
    assert main(["simulate", "--scenario", str(sc), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig6_sim_x.csv").exists() and (tmp_path / "fig6_sim_y.csv").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--scenario", "no_such_scenario"],
        ["simulate"],
        ["frobnicate"],
        ["simulate", "--scenario", "fig5", "--band", "5:1"],
        ["sweep-n", "--scenario", "fig6"],
        ["sweep-angle", "--scenario", "fig5"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_parse_error_exit_1_with_location(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "name": "x"\n}\n')
    assert main(["simulate", "--scenario", str(path)]) == 1
    assert "bad.json" in capsys.readouterr().err


def test_validate_subset(capsys):
    assert main(["validate", "--only", "2"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "checks passed" in out
