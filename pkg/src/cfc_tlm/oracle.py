"""Frequency-domain reference: ABCD cascade of lossy slabs in free space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import EPS0, ETA0, MU0
from .filters import MaterialLayer


@dataclass(frozen=True)
class TwoPortMatrix:
    """Transmission (ABCD) matrix; entries may be arrays over frequency.

    The matrix is ``exp(log_scale) * [[a, b], [c, d]]``.  Lossy slabs keep
    ``a..d`` of order one and carry the growth ``exp(gamma d)`` in
    ``log_scale``, so thick good conductors do not overflow.
    """

    a: complex | np.ndarray
    b: complex | np.ndarray
    c: complex | np.ndarray
    d: complex | np.ndarray
    reference_impedance: float = ETA0
    log_scale: complex | np.ndarray = 0.0

    def __matmul__(self, other: "TwoPortMatrix") -> "TwoPortMatrix":
        return TwoPortMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            self.reference_impedance,
            self.log_scale + other.log_scale,
        )

    def entries(self):
        """Unscaled ``(A, B, C, D)``; may overflow for very lossy stacks."""
        k = np.exp(self.log_scale)
        return self.a * k, self.b * k, self.c * k, self.d * k

    @property
    def det(self):
        return (self.a * self.d - self.b * self.c) * np.exp(2 * self.log_scale)

    def s_params(self):
        """``(S11, S21)`` with the same reference impedance on both ports."""
        z = self.reference_impedance
        den = self.a + self.b / z + self.c * z + self.d
        with np.errstate(under="ignore"):
            s21 = 2.0 / den * np.exp(-self.log_scale)
        return (self.a + self.b / z - self.c * z - self.d) / den, s21


@dataclass
class SParams:
    freqs: np.ndarray
    s11: np.ndarray
    s21: np.ndarray

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.s11 = np.asarray(self.s11, dtype=complex)
        self.s21 = np.asarray(self.s21, dtype=complex)
        if not (self.freqs.shape == self.s11.shape == self.s21.shape):
            raise ValueError("freqs, s11 and s21 must have the same length")

    def band(self, fmin: float, fmax: float) -> "SParams":
        m = (self.freqs >= fmin) & (self.freqs <= fmax)
        return SParams(self.freqs[m], self.s11[m], self.s21[m])

    @property
    def se_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return -20.0 * np.log10(np.abs(self.s21))


def layer_abcd(layer: MaterialLayer, f) -> TwoPortMatrix:
    """ABCD matrix of one homogeneous slab at normal incidence."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequencies must be positive")
    w = 2 * np.pi * f
    mu = MU0 * layer.mu_r
    eps = EPS0 * layer.eps_r - 1j * layer.sigma_s_per_m / w
    gamma = 1j * w * np.sqrt(mu * eps + 0j)
    # principal root of mu*eps puts gamma in the right half plane (decaying wave)
    gamma = np.where(gamma.real < 0, -gamma, gamma)
    eta = np.sqrt(mu / eps + 0j)
    gd = gamma * layer.thickness_m
    # cosh and sinh with the factor exp(gd) pulled out
    e2 = np.exp(-2 * gd)
    ch, sh = 0.5 * (1 + e2), 0.5 * (1 - e2)
    return TwoPortMatrix(ch, eta * sh, sh / eta, ch, log_scale=gd)


def stack_abcd(layers, f) -> TwoPortMatrix:
    layers = list(layers)
    total = layer_abcd(layers[0], f)
    for layer in layers[1:]:
        total = total @ layer_abcd(layer, f)
    return total


def stack_s_params(stack, freqs) -> SParams:
    """Exact S-parameters of a layered panel between free-space half-spaces.

    ``stack`` is a ``PanelStack`` or a sequence of ``MaterialLayer``.
    """
    layers = getattr(stack, "layers", stack)
    freqs = np.asarray(freqs, dtype=float)
    s11, s21 = stack_abcd(layers, freqs).s_params()
    return SParams(freqs, s11, s21)


def thin_sheet_se(layer: MaterialLayer, f=None) -> float:
    """Shielding of an electrically thin conducting sheet, ``20 log10|1 + eta0 sigma d / 2|``.

    Valid where the sheet is thin against the wavelength and conduction
    dominates displacement current; ``f`` only documents the frequency.
    """
    return float(20.0 * np.log10(abs(1.0 + ETA0 * layer.sigma_s_per_m * layer.thickness_m / 2.0)))
