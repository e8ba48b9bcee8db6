"""Spectra, S-parameter extraction and shielding effectiveness."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .oracle import SParams

logger = logging.getLogger(__name__)

SE_CAP_DB = 300.0


@dataclass
class Spectrum:
    freqs: np.ndarray
    values: np.ndarray
    dt: float

    @property
    def df(self) -> float:
        return float(self.freqs[1] - self.freqs[0]) if len(self.freqs) > 1 else 0.0


@dataclass
class SEResult:
    freqs: np.ndarray
    se_db: np.ndarray


def spectrum(samples, dt: float) -> Spectrum:
    """One-sided DFT of a real series (no window); bin ``m`` is at ``m / (len * dt)``."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample series")
    return Spectrum(np.fft.rfftfreq(x.size, dt), np.fft.rfft(x), float(dt))


def dft_at(samples, dt: float, f) -> np.ndarray:
    """DFT of a real series evaluated at arbitrary frequencies."""
    x = np.asarray(samples, dtype=float)
    f = np.atleast_1d(np.asarray(f, dtype=float))
    k = np.arange(x.size)
    return np.exp(-2j * np.pi * np.outer(f, k) * dt) @ x


def extract_s_params(reflected: Spectrum, transmitted: Spectrum, incident: Spectrum,
                     reflection_delay: int = 0, transmission_delay: int = 0,
                     band: tuple[float, float] | None = None, floor: float = 1e-12) -> SParams:
    """Bin-wise ``S11 = R/I`` and ``S21 = T/I``.

    The delays (in time steps) are the extra path of the reflected and
    transmitted probes relative to the incident reference; they are removed
    as a linear phase.  Bins where ``|I|`` is below ``floor`` times its peak
    are dropped with a warning.
    """
    for s in (reflected, transmitted):
        if s.freqs.shape != incident.freqs.shape or not np.allclose(s.freqs, incident.freqs):
            raise ValueError("spectra are on different frequency grids")
    f = incident.freqs
    keep = np.ones(f.shape, bool)
    if band is not None:
        keep &= (f >= band[0]) & (f <= band[1])
    mag = np.abs(incident.values)
    weak = keep & (mag <= floor * mag.max())
    if weak.any():
        logger.warning("incident spectrum below floor on %d bins; band truncated", int(weak.sum()))
        keep &= ~weak
    inc = incident.values[keep]
    fk = f[keep]
    w = 2j * np.pi * fk * incident.dt
    s11 = reflected.values[keep] / inc * np.exp(w * reflection_delay)
    s21 = transmitted.values[keep] / inc * np.exp(w * transmission_delay)
    return SParams(fk, s11, s21)


def shielding_effectiveness(e_i: Spectrum, e_t: Spectrum) -> SEResult:
    """``20 log10(|E_i| / |E_t|)``; bins with ``E_t = 0`` give ``+inf``."""
    if e_i.freqs.shape != e_t.freqs.shape:
        raise ValueError("spectra are on different frequency grids")
    with np.errstate(divide="ignore"):
        se = 20.0 * np.log10(np.abs(e_i.values)) - 20.0 * np.log10(np.abs(e_t.values))
    return SEResult(e_i.freqs, se)
