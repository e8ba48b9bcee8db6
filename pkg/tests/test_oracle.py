import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfc_tlm.constants import EPS0, ETA0, MU0
from cfc_tlm.filters import MaterialLayer
from cfc_tlm.oracle import SParams, TwoPortMatrix, layer_abcd, stack_abcd, stack_s_params, thin_sheet_se
from cfc_tlm.panel import PanelStack

FIG5 = MaterialLayer(1e-3, 4.56, 8000.0)
FREQS = np.linspace(1e6, 2e9, 101)

layers = st.builds(
    MaterialLayer,
    st.floats(1e-5, 1e-2),
    st.floats(1.0, 20.0),
    st.one_of(st.just(0.0), st.floats(1e-3, 1e6)),
)


def test_vacuum_layer_abcd():
    d, f = 0.05, 1e9
    m = layer_abcd(MaterialLayer(d), f)
    bd = 2 * math.pi * f * d * math.sqrt(MU0 * EPS0)
    a, b, c, dd = m.entries()
    assert a == pytest.approx(math.cos(bd)) and dd == pytest.approx(math.cos(bd))
    assert b == pytest.approx(1j * ETA0 * math.sin(bd))
    assert c == pytest.approx(1j * math.sin(bd) / ETA0)
    s11, s21 = m.s_params()
    assert abs(s11) < 1e-12
    assert s21 == pytest.approx(np.exp(-1j * bd))


def test_vanishing_thickness_is_identity():
    m = layer_abcd(MaterialLayer(1e-15, 4.0, 1e3), 1e9)
    np.testing.assert_allclose(m.entries(), [1, 0, 0, 1], atol=1e-9)


def test_half_wave_slab_has_no_reflection():
    eps_r = 4.0
    f = 1e9
    d = 0.5 * 299792458.0 / f / math.sqrt(eps_r)
    s = stack_s_params([MaterialLayer(d, eps_r)], [f])
    assert abs(s.s11[0]) < 1e-12
    assert abs(s.s21[0]) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.builds(MaterialLayer, st.floats(1e-5, 1e-3), st.floats(1.0, 20.0),
                          st.floats(0.0, 1e4)), min_size=1, max_size=4))
def test_cascade_determinant_is_one(ls):
    # ad - bc cancels to exp(-2 Re(gamma d)) before rescaling, which sets the attainable accuracy
    m = stack_abcd(ls, FREQS)
    scale = (np.abs(m.a * m.d) + np.abs(m.b * m.c)) * np.exp(2 * np.real(m.log_scale))
    assert np.all(np.abs(m.det - 1.0) <= 1e-12 + 1e-14 * scale)


def test_thick_good_conductor_does_not_overflow():
    with np.errstate(over="raise", invalid="raise"):
        s = stack_s_params([MaterialLayer(1e-2, 1.0, 1e6)] * 2, FREQS)
    assert np.all(np.isfinite(s.s11)) and np.all(np.isfinite(s.s21))
    np.testing.assert_allclose(np.abs(s.s11), 1.0, atol=1e-3)
    assert np.all(s.se_db > 300)


@settings(max_examples=50, deadline=None)
@given(st.lists(layers, min_size=1, max_size=4))
def test_passive_and_reciprocal(ls):
    fwd = stack_s_params(ls, FREQS)
    back = stack_s_params(ls[::-1], FREQS)
    assert np.all(np.abs(fwd.s11) ** 2 + np.abs(fwd.s21) ** 2 <= 1 + 1e-9)
    np.testing.assert_allclose(fwd.s21, back.s21, rtol=1e-9, atol=1e-300)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.builds(MaterialLayer, st.floats(1e-5, 1e-2), st.floats(1.0, 20.0)), min_size=1, max_size=3))
def test_lossless_stack_is_unitary(ls):
    s = stack_s_params(ls, FREQS)
    np.testing.assert_allclose(np.abs(s.s11) ** 2 + np.abs(s.s21) ** 2, 1.0, atol=1e-9)


def test_split_layer_equals_whole_layer():
    half = MaterialLayer(0.5e-3, 4.56, 8000.0)
    a = stack_s_params([FIG5], FREQS)
    b = stack_s_params([half, half], FREQS)
    np.testing.assert_allclose(b.s21, a.s21, rtol=1e-9)
    np.testing.assert_allclose(b.s11, a.s11, rtol=1e-9)


def test_accepts_panel_stack():
    a = stack_s_params(PanelStack([FIG5], 10), FREQS)
    b = stack_s_params([FIG5], FREQS)
    np.testing.assert_array_equal(a.s21, b.s21)


def test_fig5_shielding_at_1ghz():
    assert stack_s_params([FIG5], [1e9]).se_db[0] == pytest.approx(88.38, abs=0.01)


@pytest.mark.parametrize("layer", [FIG5, MaterialLayer(2e-4, 2.0, 1e4), MaterialLayer(5e-3, 3.0, 10.0)])
def test_absorption_reflection_multiple_reflection_sum(layer):
    # independent decomposition of the single-slab shielding
    f = np.array([1e7, 3e8, 1e9])
    w = 2 * np.pi * f
    eps = EPS0 * layer.eps_r - 1j * layer.sigma_s_per_m / w
    gamma = 1j * w * np.sqrt(MU0 * eps)
    gamma = np.where(gamma.real < 0, -gamma, gamma)
    eta = np.sqrt(MU0 / eps)
    d = layer.thickness_m
    absorption = 20 * np.log10(np.e) * gamma.real * d
    reflection = 20 * np.log10(np.abs((ETA0 + eta) ** 2 / (4 * ETA0 * eta)))
    g = (ETA0 - eta) / (ETA0 + eta)
    multiple = 20 * np.log10(np.abs(1 - g**2 * np.exp(-2 * gamma * d)))
    np.testing.assert_allclose(stack_s_params([layer], f).se_db, absorption + reflection + multiple, atol=1e-9)


@pytest.mark.parametrize(
    "layer, expected",
    [
        (MaterialLayer(1e-3, 1.0, 0.0), 0.0),
        (MaterialLayer(1e-3, 2.0, 1e4), 65.5046),
        (MaterialLayer(1e-3, 1.0, 2 / ETA0 / 1e-3), 20 * math.log10(2)),
    ],
)
def test_thin_sheet_examples(layer, expected):
    assert thin_sheet_se(layer, 1e6) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("sigma, d", [(1e3, 1e-3), (1e4, 6e-4), (1e5, 2e-4), (1e4, 1e-3)])
def test_thin_sheet_agrees_with_slab_at_low_frequency(sigma, d):
    layer = MaterialLayer(d, 2.0, sigma)
    for f in (1e4, 1e5, 1e6):
        assert stack_s_params([layer], [f]).se_db[0] == pytest.approx(thin_sheet_se(layer, f), abs=0.5)


def test_two_port_matmul_and_det():
    a = TwoPortMatrix(1.0, 2.0, 0.0, 1.0)
    b = TwoPortMatrix(1.0, 0.0, 3.0, 1.0)
    c = a @ b
    assert c.entries() == (7.0, 2.0, 3.0, 1.0)
    assert c.det == 1.0
    scaled = TwoPortMatrix(1.0, 0.0, 0.0, 1.0, log_scale=math.log(2.0))
    assert (scaled @ scaled).entries()[0] == pytest.approx(4.0)


def test_sparams_band_and_validation():
    s = SParams([1.0, 2.0, 3.0], [0, 0, 0], [1, 0.1, 0])
    b = s.band(1.5, 3.0)
    assert b.freqs.tolist() == [2.0, 3.0]
    assert b.se_db[0] == pytest.approx(20.0)
    assert b.se_db[1] == np.inf
    with pytest.raises(ValueError):
        SParams([1.0], [0, 0], [0])


def test_rejects_non_positive_frequency():
    with pytest.raises(ValueError):
        layer_abcd(FIG5, [0.0, 1e6])
