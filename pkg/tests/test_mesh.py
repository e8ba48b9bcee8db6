import numpy as np
import pytest

from cfc_tlm.errors import ConfigurationError
from cfc_tlm.filters import MaterialLayer
from cfc_tlm.mesh import Mesh1D, RunStats, SourceSpec, connect, run, scatter, total_voltage
from cfc_tlm.panel import PanelStack, build_junction
from cfc_tlm.postproc import spectrum


@pytest.mark.parametrize("vl, vr, expected", [(0.5, 0.5, 1.0), (1.0, 0.0, 1.0), (0.3, -0.3, 0.0)])
def test_total_voltage(vl, vr, expected):
    assert total_voltage(vl, vr) == pytest.approx(expected)


@pytest.mark.parametrize("vl, vr, rl, rr", [(0.5, 0.5, 0.5, 0.5), (1.0, 0.0, 0.0, 1.0), (0.0, 0.0, 0.0, 0.0)])
def test_scatter(vl, vr, rl, rr):
    m = Mesh1D(0.01, 5)
    m.vl_inc[2], m.vr_inc[2] = vl, vr
    out_l, out_r = scatter(m)
    assert out_l[2] == pytest.approx(rl)
    assert out_r[2] == pytest.approx(rr)


def test_connect_exchanges_and_terminates():
    m = Mesh1D(0.01, 6)
    rl = np.arange(6, dtype=float) + 0.7
    rr = -np.arange(6, dtype=float) - 0.1
    connect(m, rl, rr)
    assert m.vr_inc[2] == rl[3]
    assert m.vl_inc[3] == rr[2]
    assert m.vl_inc[0] == 0.0
    assert m.vr_inc[5] == 0.0


def test_connect_leaves_junction_link_empty():
    m = Mesh1D(0.01, 6)
    connect(m, np.ones(6), np.ones(6), junction_link=2)
    assert m.vr_inc[2] == 0.0 and m.vl_inc[3] == 0.0
    assert m.vr_inc[1] == 1.0 and m.vl_inc[4] == 1.0


def test_time_step_from_cell_size():
    assert Mesh1D(0.01, 10).time_step_s == pytest.approx(33.356e-12, rel=1e-4)


def test_delta_arrives_after_distance_steps():
    m = Mesh1D(0.01, 100)
    (rec,) = run(m, SourceSpec("delta", 10, 1.0), probes=[50], steps=200)
    assert len(rec.samples) == 200
    assert np.nonzero(rec.samples)[0].tolist() == [40]
    assert rec.samples[40] == 1.0


def test_pulse_from_node_5_reaches_node_10_in_5_steps():
    m = Mesh1D(0.01, 30)
    (rec,) = run(m, SourceSpec("delta", 5, 0.3), probes=[10], steps=20)
    assert np.argmax(np.abs(rec.samples)) == 5


def test_free_space_spectrum_is_flat():
    m = Mesh1D(0.01, 100)
    (rec,) = run(m, SourceSpec("delta", 10, 1.0), probes=[50], steps=256)
    mag = np.abs(spectrum(rec.samples, m.time_step_s).values)
    np.testing.assert_allclose(mag, 1.0, rtol=0, atol=1e-15)


@pytest.mark.parametrize("a, b", [(3, 40), (40, 3), (20, 21)])
def test_causality(a, b):
    m = Mesh1D(0.01, 50)
    (rec,) = run(m, SourceSpec("gaussian", a, 1.0, 3e-11, 0.0), probes=[b], steps=60)
    assert not np.any(rec.samples[: abs(b - a)])
    assert np.any(rec.samples[abs(b - a):])


def test_two_cycles_translate_pulse_two_nodes():
    m = Mesh1D(0.01, 20)
    m.vl_inc[5] = 1.0
    for _ in range(2):
        rl, rr = scatter(m)
        connect(m, rl, rr)
    assert m.vl_inc[7] == 1.0
    assert np.count_nonzero(m.vl_inc) == 1 and not np.any(m.vr_inc)


def test_energy_constant_until_boundary_then_non_increasing():
    m = Mesh1D(0.01, 40)
    stats = RunStats(0, 0.0)
    run(m, SourceSpec("delta", 15, 1.0), steps=60, track_energy=True, stats=stats)
    e = stats.energy
    # pulses leave through the left end after 15 steps and the right end after 24
    np.testing.assert_array_equal(e[:15], 2.0)
    assert np.all(np.diff(e) <= 0)
    assert e[-1] == 0.0


def test_gaussian_source_waveform():
    src = SourceSpec("gaussian", 0, 2.0, gaussian_sigma_s=1e-10, gaussian_delay_s=5e-10)
    w = src.waveform(100, 1e-11)
    assert np.argmax(w) == 50 and w[50] == pytest.approx(2.0)
    assert w[60] == pytest.approx(2.0 * np.exp(-0.5))


def test_soft_source_passes_waves():
    m = Mesh1D(0.01, 40)
    (rec,) = run(m, SourceSpec("delta", 20, 1.0), probes=[30], steps=5)
    m.vl_inc[15] = 0.5  # pulse travelling right through the source node
    (rec,) = run(m, SourceSpec("delta", 20, 1e-30), probes=[30], steps=20)
    assert rec.samples[15] == pytest.approx(0.5)


@pytest.mark.parametrize("kwargs", [dict(cell_size_m=0.0, node_count=10), dict(cell_size_m=0.01, node_count=2)])
def test_mesh_validation(kwargs):
    with pytest.raises(ConfigurationError):
        Mesh1D(**kwargs)


def test_source_validation():
    with pytest.raises(ConfigurationError):
        SourceSpec("delta", 0, 0.0)
    with pytest.raises(ConfigurationError):
        SourceSpec("gaussian", 0, 1.0)


def test_run_rejects_bad_junction_link():
    m = Mesh1D(0.01, 10)
    j = build_junction(PanelStack([MaterialLayer(1e-3)], 5), dt=m.time_step_s)
    with pytest.raises(ConfigurationError):
        run(m, SourceSpec("delta", 1), j, probes=[2], steps=3, junction_link=9)
    with pytest.raises(ConfigurationError):
        run(m, SourceSpec("delta", 1), None, probes=[12], steps=3)
    with pytest.raises(ConfigurationError):
        run(m, SourceSpec("delta", 1), j, probes=[2], steps=0, junction_link=4)


def test_run_rejects_junction_with_other_dt():
    m = Mesh1D(0.01, 10)
    j = build_junction(PanelStack([MaterialLayer(1e-3)], 5), dt=2 * m.time_step_s)
    with pytest.raises(ConfigurationError):
        run(m, SourceSpec("delta", 1), j, probes=[2], steps=3, junction_link=4)
