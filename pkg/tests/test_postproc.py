import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfc_tlm.postproc import dft_at, extract_s_params, shielding_effectiveness, spectrum
from cfc_tlm.experiments import Geometry, probe_run
from cfc_tlm.mesh import SourceSpec

DT = 1e-11


def test_impulse_spectrum_is_flat():
    x = np.zeros(64)
    x[0] = 1.0
    s = spectrum(x, DT)
    np.testing.assert_allclose(s.values, 1.0)
    assert s.freqs[1] == pytest.approx(1 / (64 * DT))
    assert s.df == pytest.approx(1 / (64 * DT))


def test_delay_is_linear_phase():
    x = np.zeros(64)
    x[5] = 1.0
    s = spectrum(x, DT)
    np.testing.assert_allclose(s.values, np.exp(-2j * np.pi * s.freqs * 5 * DT), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=40), st.floats(-10, 10))
def test_spectrum_is_linear(xs, a):
    x = np.array(xs)
    y = np.roll(x, 1)
    lhs = spectrum(a * x + y, DT).values
    rhs = a * spectrum(x, DT).values + spectrum(y, DT).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(x).sum() * (1 + abs(a))))


def test_dft_at_matches_fft_bins():
    x = np.random.default_rng(1).normal(size=128)
    s = spectrum(x, DT)
    np.testing.assert_allclose(dft_at(x, DT, s.freqs[:10]), s.values[:10], atol=1e-10)


def test_sinusoid_peak_bin():
    n = 1024
    f0 = 37 / (n * DT)
    x = np.sin(2 * np.pi * f0 * np.arange(n) * DT)
    s = spectrum(x, DT)
    assert np.argmax(np.abs(s.values)) == 37
    assert abs(s.values[37]) == pytest.approx(n / 2)


def test_empty_series_rejected():
    with pytest.raises(ValueError):
        spectrum([], DT)


def test_no_panel_gives_zero_reflection_and_unit_transmission():
    geo = Geometry()
    ref = probe_run(geo, SourceSpec("delta", geo.source_node), 4096)
    sp = extract_s_params(spectrum(ref.refl - ref.refl, geo.dt), spectrum(ref.trans, geo.dt),
                          spectrum(ref.refl, geo.dt), 1, 1, band=(1e7, 2e9))
    np.testing.assert_allclose(sp.s11, 0.0)
    np.testing.assert_allclose(sp.s21, 1.0, atol=1e-12)


def test_perfect_reflector():
    n = 512
    inc = np.zeros(n)
    inc[10] = 1.0
    refl = np.zeros(n)
    refl[12] = -1.0  # inverted, two steps round trip
    sp = extract_s_params(spectrum(refl, DT), spectrum(np.zeros(n), DT), spectrum(inc, DT), 2, 0)
    np.testing.assert_allclose(sp.s11, -1.0, atol=1e-12)
    np.testing.assert_allclose(sp.s21, 0.0)


def test_band_selection():
    x = np.zeros(100)
    x[0] = 1.0
    s = spectrum(x, DT)
    sp = extract_s_params(s, s, s, band=(1e9, 2e10))
    assert sp.freqs.min() >= 1e9 and sp.freqs.max() <= 2e10


def test_weak_incident_bins_are_dropped(caplog):
    inc = np.zeros(64)
    inc[0], inc[1] = 1.0, 1.0  # zero at Nyquist
    s = spectrum(inc, DT)
    with caplog.at_level(logging.WARNING):
        sp = extract_s_params(s, s, s)
    assert "below floor" in caplog.text
    assert len(sp.freqs) == len(s.freqs) - 1


def test_mismatched_grids_rejected():
    with pytest.raises(ValueError):
        extract_s_params(spectrum(np.ones(8), DT), spectrum(np.ones(16), DT), spectrum(np.ones(8), DT))


@pytest.mark.parametrize("ratio, expected", [(1.0, 0.0), (0.1, 20.0), (1e-3, 60.0)])
def test_shielding_examples(ratio, expected):
    e = np.zeros(16)
    e[0] = 1.0
    se = shielding_effectiveness(spectrum(e, DT), spectrum(ratio * e, DT))
    np.testing.assert_allclose(se.se_db, expected, atol=1e-12)


def test_shielding_of_blocked_field_is_infinite():
    e = np.zeros(16)
    e[0] = 1.0
    se = shielding_effectiveness(spectrum(e, DT), spectrum(np.zeros(16), DT))
    assert np.all(np.isinf(se.se_db))


def test_shielding_matches_transmission():
    rng = np.random.default_rng(3)
    inc = rng.normal(size=64)
    trans = 0.01 * np.roll(inc, 3)
    si, st_ = spectrum(inc, DT), spectrum(trans, DT)
    se = shielding_effectiveness(si, st_)
    sp = extract_s_params(st_, st_, si)
    np.testing.assert_allclose(se.se_db, -20 * np.log10(np.abs(sp.s21)), atol=1e-9)
