"""Digital filter banks for the admittance terms of a lossy layer.

A layer of thickness ``d`` behaves as a transmission line with per-length
inductance ``L``, capacitance ``C`` and shunt conductance ``G``.  The two
distinct entries of its admittance matrix, ``-jY cot(theta)`` and
``-jY csc(theta)``, have the partial-fraction forms (``s = jw``)::

    -jY cot(theta) = 1/(s d L) + sum_k        2d(sC + G) / (s^2 d^2 LC + s d^2 LG + k^2 pi^2)
    -jY csc(theta) = 1/(s d L) + sum_k (-1)^k 2d(sC + G) / (s^2 d^2 LC + s d^2 LG + k^2 pi^2)

Truncating the sums at ``N`` terms and mapping every term through the
bilinear transform gives one first-order integrator section plus ``N``
biquads per bank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numba import njit

from .constants import EPS0, MU0
from .errors import ConfigurationError, SolverFault

BankKind = Literal["cot", "csc"]


@dataclass(frozen=True)
class MaterialLayer:
    thickness_m: float
    eps_r: float = 1.0
    sigma_s_per_m: float = 0.0
    mu_r: float = 1.0

    def __post_init__(self):
        if not self.thickness_m > 0:
            raise ConfigurationError(f"thickness_m must be > 0, got {self.thickness_m}")
        if not self.eps_r >= 1:
            raise ConfigurationError(f"eps_r must be >= 1, got {self.eps_r}")
        if not self.sigma_s_per_m >= 0:
            raise ConfigurationError(f"sigma_s_per_m must be >= 0, got {self.sigma_s_per_m}")
        if not self.mu_r >= 1:
            raise ConfigurationError(f"mu_r must be >= 1, got {self.mu_r}")


@dataclass(frozen=True)
class LineParams:
    l_per_m: float
    c_per_m: float
    g_per_m: float = 0.0

    def __post_init__(self):
        if not (self.l_per_m > 0 and self.c_per_m > 0 and self.g_per_m >= 0):
            raise ConfigurationError(f"invalid line parameters {self}")

    def c_eff(self, s):
        """Complex capacitance ``C + G/s``."""
        return self.c_per_m + self.g_per_m / s


def line_params(layer: MaterialLayer) -> LineParams:
    return LineParams(
        l_per_m=MU0 * layer.mu_r,
        c_per_m=EPS0 * layer.eps_r,
        g_per_m=float(layer.sigma_s_per_m),
    )


@dataclass
class BiquadSection:
    """One second-order section ``(b0 + b1 z^-1 + b2 z^-2) / (a0 + a1 z^-1 + a2 z^-2)``.

    First-order sections have ``b2 = a2 = 0``.  State is kept in
    direct-form-II-transposed registers ``s1, s2``.
    """

    b0: float
    b1: float
    b2: float
    a0: float
    a1: float
    a2: float
    s1: float = 0.0
    s2: float = 0.0

    def __post_init__(self):
        if self.a0 == 0:
            raise ConfigurationError("a0 must be non-zero")

    def step(self, x: float) -> float:
        b0, b1, b2 = self.b0 / self.a0, self.b1 / self.a0, self.b2 / self.a0
        a1, a2 = self.a1 / self.a0, self.a2 / self.a0
        y = b0 * x + self.s1
        self.s1 = b1 * x - a1 * y + self.s2
        self.s2 = b2 * x - a2 * y
        return y

    def response(self, z):
        zi = 1.0 / z
        return (self.b0 + self.b1 * zi + self.b2 * zi * zi) / (self.a0 + self.a1 * zi + self.a2 * zi * zi)


@njit(cache=True, nogil=True)
def _sections_step(b, a, state, x):
    # b, a: (n, 3) with a[:, 0] == 1; state: (n, 2).  Returns the summed output.
    total = 0.0
    for i in range(b.shape[0]):
        y = b[i, 0] * x + state[i, 0]
        state[i, 0] = b[i, 1] * x - a[i, 1] * y + state[i, 1]
        state[i, 1] = b[i, 2] * x - a[i, 2] * y
        total += y
    return total


@njit(cache=True, nogil=True)
def _sections_history(state):
    total = 0.0
    for i in range(state.shape[0]):
        total += state[i, 0]
    return total


def _series_sections(p: LineParams, d: float, n_terms: int, dt: float, kind: BankKind):
    """Raw (num, den) coefficient rows for the integrator and the N series terms."""
    K = 2.0 / dt
    L, C, G = p.l_per_m, p.c_per_m, p.g_per_m
    num = np.zeros((n_terms + 1, 3))
    den = np.zeros((n_terms + 1, 3))

    # 1/(s d L) -> (1 + z^-1) / (K d L (1 - z^-1))
    num[0] = (1.0, 1.0, 0.0)
    den[0] = (K * d * L, -K * d * L, 0.0)

    k = np.arange(1, n_terms + 1, dtype=float)
    sign = np.ones_like(k) if kind == "cot" else np.where(k % 2 == 0, 1.0, -1.0)
    p1 = 2.0 * d * C * sign
    p0 = 2.0 * d * G * sign
    q2 = d * d * L * C
    q1 = d * d * L * G
    q0 = (k * math.pi) ** 2
    num[1:, 0] = p1 * K + p0
    num[1:, 1] = 2.0 * p0
    num[1:, 2] = -p1 * K + p0
    den[1:, 0] = q2 * K * K + q1 * K + q0
    den[1:, 1] = 2.0 * (q0 - q2 * K * K)
    den[1:, 2] = q2 * K * K - q1 * K + q0
    return num, den


class AdmittanceFilterBank:
    """Parallel sum of IIR sections realizing ``-jY cot`` or ``-jY csc``.

    Coefficients are stored once in ``num``/``den`` (raw) and ``b``/``a``
    (normalized by ``a0``).  ``state`` may be a view into a larger array
    owned by a panel junction.
    """

    def __init__(self, kind: BankKind, num, den, dt: float, state=None):
        if kind not in ("cot", "csc"):
            raise ConfigurationError(f"unknown bank kind {kind!r}")
        self.kind = kind
        self.dt = float(dt)
        self.num = np.ascontiguousarray(num, dtype=float)
        self.den = np.ascontiguousarray(den, dtype=float)
        if np.any(self.den[:, 0] == 0):
            raise ConfigurationError("section with a0 == 0")
        a0 = self.den[:, :1]
        self.b = self.num / a0
        self.a = self.den / a0
        self.state = np.zeros((len(self.num), 2)) if state is None else state

    @property
    def n_terms(self) -> int:
        return len(self.num) - 1

    @property
    def inst_coeff(self) -> float:
        return float(self.b[:, 0].sum())

    @property
    def sections(self) -> list[BiquadSection]:
        return [BiquadSection(*n, *d, s1=s[0], s2=s[1]) for n, d, s in zip(self.num, self.den, self.state)]

    def copy(self) -> "AdmittanceFilterBank":
        return AdmittanceFilterBank(self.kind, self.num, self.den, self.dt, self.state.copy())

    def reset(self):
        self.state[:] = 0.0

    def step(self, x: float) -> float:
        if not math.isfinite(x):
            raise SolverFault(f"non-finite filter input {x!r}")
        return _sections_step(self.b, self.a, self.state, float(x))

    def history(self) -> float:
        return _sections_history(self.state)

    def response(self, f):
        return bank_response(self, f)

    def __repr__(self):
        return f"AdmittanceFilterBank(kind={self.kind!r}, n_terms={self.n_terms}, inst_coeff={self.inst_coeff:.6g})"


def synthesize_bank(params: LineParams, d: float, n_terms: int, dt: float, kind: BankKind) -> AdmittanceFilterBank:
    """Bilinear-transform the truncated expansion of ``-jY cot`` / ``-jY csc``."""
    if int(n_terms) != n_terms or n_terms < 1:
        raise ConfigurationError(f"n_terms must be a positive integer, got {n_terms}")
    if not dt > 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    if not d > 0:
        raise ConfigurationError(f"thickness must be > 0, got {d}")
    if kind not in ("cot", "csc"):
        raise ConfigurationError(f"unknown bank kind {kind!r}")
    num, den = _series_sections(params, d, int(n_terms), dt, kind)
    return AdmittanceFilterBank(kind, num, den, dt)


def bank_response(bank: AdmittanceFilterBank, f):
    """Transfer function of the bank at ``z = exp(j 2 pi f dt)``."""
    f = np.asarray(f, dtype=float)
    nyquist = 0.5 / bank.dt
    if np.any(f <= 0) or np.any(f >= nyquist):
        raise ValueError(f"frequency outside (0, {nyquist:g}) Hz")
    zi = np.exp(-2j * np.pi * f * bank.dt)[..., None]
    num = bank.num[:, 0] + bank.num[:, 1] * zi + bank.num[:, 2] * zi * zi
    den = bank.den[:, 0] + bank.den[:, 1] * zi + bank.den[:, 2] * zi * zi
    return (num / den).sum(axis=-1)


def exact_admittance(params: LineParams, d: float, f, kind: BankKind):
    """Closed-form ``-jY cot(theta)`` or ``-jY csc(theta)`` with complex theta.

    The product ``Y * cot(theta)`` is independent of the square-root branch,
    so principal roots are used.
    """
    w = 2 * np.pi * np.asarray(f, dtype=float)
    c_eff = params.c_per_m - 1j * params.g_per_m / w
    theta = w * d * np.sqrt(params.l_per_m * c_eff + 0j)
    Y = np.sqrt(c_eff / params.l_per_m + 0j)
    if kind == "cot":
        return -1j * Y / np.tan(theta)
    return -1j * Y / np.sin(theta)


def electrical_length(params: LineParams, d: float, f):
    w = 2 * np.pi * np.asarray(f, dtype=float)
    return w * d * np.sqrt(params.l_per_m * (params.c_per_m - 1j * params.g_per_m / w) + 0j)


def filter_step(bank: AdmittanceFilterBank, x: float) -> float:
    return bank.step(x)


def history_output(bank: AdmittanceFilterBank) -> float:
    """Output the bank would produce now for a zero input; state is untouched."""
    return bank.history()
