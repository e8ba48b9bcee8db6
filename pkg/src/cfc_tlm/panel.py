"""Embedded panel junctions: single-layer, multilayer and anisotropic.

An ``n``-layer panel between mesh nodes adds ``n + 1`` unknown voltages
(the layer interfaces).  Each layer contributes the 2x2 admittance block
``[[Kc, -Ks], [-Ks, Kc]]`` with ``Kc = -jY cot(theta)`` and
``Ks = -jY csc(theta)``; the blocks overlap into a symmetric tridiagonal
system whose end rows also carry the port admittances ``y1, y2``.

Per time step only the instantaneous part of every bank is unknown, so the
system is solved with the real matrix of instantaneous coefficients and the
bank histories moved to the right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numba import njit

from .constants import Y0
from .errors import ConfigurationError, SolverFault
from .filters import (
    AdmittanceFilterBank,
    MaterialLayer,
    _sections_step,
    line_params,
    synthesize_bank,
)

SolverMethod = Literal["gauss_seidel", "direct_tridiagonal"]
_METHOD_CODES = {"direct_tridiagonal": 0, "gauss_seidel": 1}

# Kernel status codes.
OK, NOT_CONVERGED, NON_FINITE, ZERO_PIVOT = 0, 1, 2, 3


@dataclass(frozen=True)
class PanelStack:
    layers: tuple[MaterialLayer, ...]
    n_terms: int = 50

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ConfigurationError("a panel needs at least one layer")
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise ConfigurationError(f"n_terms must be a positive integer, got {self.n_terms}")

    def reversed(self) -> "PanelStack":
        return PanelStack(self.layers[::-1], self.n_terms)

    def with_n_terms(self, n_terms: int) -> "PanelStack":
        return PanelStack(self.layers, n_terms)

    @property
    def thickness_m(self) -> float:
        return sum(layer.thickness_m for layer in self.layers)


@dataclass(frozen=True)
class SolverConfig:
    """``method=None`` picks the direct solve for one or two layers, Gauss-Seidel otherwise."""

    method: SolverMethod | None = None
    tol: float = 1e-10
    max_iter: int = 1000

    def __post_init__(self):
        if self.method is not None and self.method not in _METHOD_CODES:
            raise ConfigurationError(f"unknown solver method {self.method!r}")
        if not self.tol > 0:
            raise ConfigurationError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")

    def resolve(self, n_layers: int) -> SolverMethod:
        if self.method is not None:
            return self.method
        return "direct_tridiagonal" if n_layers <= 2 else "gauss_seidel"


@dataclass(frozen=True)
class AnisotropicPanel:
    stack_x: PanelStack
    stack_y: PanelStack
    phi_rad: float = 0.0

    def __post_init__(self):
        if self.stack_x.n_terms != self.stack_y.n_terms:
            raise ConfigurationError("x and y stacks must share n_terms")


# ---------------------------------------------------------------------------
# tridiagonal solvers


@njit(cache=True, nogil=True)
def _thomas(diag, off, rhs, out, cp):
    n = diag.shape[0]
    if diag[0] == 0.0:
        return ZERO_PIVOT
    cp[0] = off[0] / diag[0] if n > 1 else 0.0
    out[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - off[i - 1] * cp[i - 1]
        if den == 0.0:
            return ZERO_PIVOT
        cp[i] = off[i] / den if i < n - 1 else 0.0
        out[i] = (rhs[i] - off[i - 1] * out[i - 1]) / den
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]
    return OK


@njit(cache=True, nogil=True)
def _residual_norm(diag, off, x, rhs):
    n = diag.shape[0]
    acc = 0.0
    for i in range(n):
        r = diag[i] * x[i] - rhs[i]
        if i > 0:
            r += off[i - 1] * x[i - 1]
        if i < n - 1:
            r += off[i] * x[i + 1]
        acc += r * r
    return math.sqrt(acc)


@njit(cache=True, nogil=True)
def _gauss_seidel(diag, off, rhs, x, tol, max_iter):
    # x holds the warm start on entry.  Returns (status, sweeps).
    n = diag.shape[0]
    bnorm = 0.0
    for i in range(n):
        bnorm += rhs[i] * rhs[i]
    bnorm = math.sqrt(bnorm)
    if bnorm == 0.0:
        for i in range(n):
            x[i] = 0.0
        return OK, 0
    if _residual_norm(diag, off, x, rhs) <= tol * bnorm:
        return OK, 0
    for it in range(1, max_iter + 1):
        for i in range(n):
            acc = rhs[i]
            if i > 0:
                acc -= off[i - 1] * x[i - 1]
            if i < n - 1:
                acc -= off[i] * x[i + 1]
            x[i] = acc / diag[i]
        if _residual_norm(diag, off, x, rhs) <= tol * bnorm:
            return OK, it
    return NOT_CONVERGED, max_iter


def _tridiagonal_parts(a):
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    diag = np.ascontiguousarray(np.diag(a))
    upper = np.ascontiguousarray(np.diag(a, 1))
    lower = np.diag(a, -1)
    if not np.array_equal(upper, lower):
        raise ValueError("matrix must be symmetric")
    if np.any(np.triu(a, 2)) or np.any(np.tril(a, -2)):
        raise ValueError("matrix must be tridiagonal")
    return diag, upper


def solve_instantaneous(a, b, cfg: SolverConfig = SolverConfig("direct_tridiagonal"), x0=None):
    """Solve the symmetric tridiagonal system ``a x = b``.

    ``x0`` warm-starts Gauss-Seidel.  Raises :class:`SolverFault` on a zero
    pivot or when Gauss-Seidel misses ``cfg.tol`` within ``cfg.max_iter``.
    """
    diag, off = _tridiagonal_parts(a)
    rhs = np.ascontiguousarray(b, dtype=float)
    if rhs.shape != diag.shape:
        raise ValueError("dimension mismatch")
    method = cfg.method or "direct_tridiagonal"
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float)
    if method == "direct_tridiagonal":
        status = _thomas(diag, off, rhs, x, np.empty_like(rhs))
        if status != OK:
            raise SolverFault("zero pivot in tridiagonal solve")
        return x
    status, sweeps = _gauss_seidel(diag, off, rhs, x, cfg.tol, cfg.max_iter)
    if status != OK:
        res = _residual_norm(diag, off, x, rhs) / max(np.linalg.norm(rhs), 1e-300)
        raise SolverFault(f"Gauss-Seidel did not converge in {sweeps} sweeps (relative residual {res:.3e})")
    return x


# ---------------------------------------------------------------------------
# junction kernel
#
# b, a:   (n_layers, 2, n_sec, 3) normalized coefficients; [:, 0] cot, [:, 1] csc
# state:  (n_layers, 4, n_sec, 2) bank states, one per bank instance:
#         0 cot fed by the layer's left node    -> row l
#         1 cot fed by the layer's right node   -> row l + 1
#         2 csc fed by the left node            -> row l + 1 (sign -)
#         3 csc fed by the right node           -> row l     (sign -)


@njit(cache=True, nogil=True)
def _junction_step(b, a, state, diag, off, y1, y2, v1i, v2i, V, method, tol, max_iter, rhs, work):
    n_layers = state.shape[0]
    n_sec = state.shape[2]
    n = n_layers + 1
    for i in range(n):
        rhs[i] = 0.0
    for l in range(n_layers):
        hcl = 0.0
        hcr = 0.0
        hsl = 0.0
        hsr = 0.0
        for k in range(n_sec):
            hcl += state[l, 0, k, 0]
            hcr += state[l, 1, k, 0]
            hsl += state[l, 2, k, 0]
            hsr += state[l, 3, k, 0]
        rhs[l] -= hcl - hsr
        rhs[l + 1] -= hcr - hsl
    rhs[0] += 2.0 * y1 * v1i
    rhs[n - 1] += 2.0 * y2 * v2i

    sweeps = 0
    if method == 0:
        status = _thomas(diag, off, rhs, V, work)
    else:
        status, sweeps = _gauss_seidel(diag, off, rhs, V, tol, max_iter)
    if status != OK:
        return 0.0, 0.0, sweeps, status
    for i in range(n):
        if not math.isfinite(V[i]):
            return 0.0, 0.0, sweeps, NON_FINITE

    for l in range(n_layers):
        _sections_step(b[l, 0], a[l, 0], state[l, 0], V[l])
        _sections_step(b[l, 0], a[l, 0], state[l, 1], V[l + 1])
        _sections_step(b[l, 1], a[l, 1], state[l, 2], V[l])
        _sections_step(b[l, 1], a[l, 1], state[l, 3], V[l + 1])
    return V[0] - v1i, V[n - 1] - v2i, sweeps, OK


def _fault(status, sweeps, where=""):
    if status == NOT_CONVERGED:
        return SolverFault(f"Gauss-Seidel did not converge within {sweeps} sweeps{where}")
    if status == ZERO_PIVOT:
        return SolverFault(f"zero pivot in tridiagonal solve{where}")
    return SolverFault(f"non-finite panel voltage{where}")


@dataclass(eq=False)
class PanelJunction:
    """The (n+1)-port panel spliced into a mesh link.

    ``banks[l]`` maps ``"cot_left", "cot_right", "csc_left", "csc_right"``
    to the filter bank of layer ``l`` fed by that node; their states are
    views into ``state``, so stepping a bank object or the junction kernel
    advances the same registers.
    """

    stack: PanelStack
    y1: float
    y2: float
    dt: float
    solver_cfg: SolverConfig
    b: np.ndarray
    a: np.ndarray
    state: np.ndarray
    inst_diag: np.ndarray
    inst_off: np.ndarray
    banks: list[dict[str, AdmittanceFilterBank]]
    node_voltages: np.ndarray = field(default=None)
    sweeps_total: int = 0
    sweeps_max: int = 0
    steps: int = 0

    def __post_init__(self):
        if self.node_voltages is None:
            self.node_voltages = np.zeros(len(self.stack.layers) + 1)
        self._rhs = np.zeros_like(self.node_voltages)
        self._work = np.zeros_like(self.node_voltages)

    @property
    def size(self) -> int:
        return len(self.stack.layers) + 1

    @property
    def method(self) -> SolverMethod:
        return self.solver_cfg.resolve(len(self.stack.layers))

    @property
    def inst_matrix(self) -> np.ndarray:
        return np.diag(self.inst_diag) + np.diag(self.inst_off, 1) + np.diag(self.inst_off, -1)

    def entry_banks(self, i: int, j: int) -> list[tuple[float, AdmittanceFilterBank]]:
        """Signed banks summed into matrix entry ``(i, j)``; the input is ``V[j]``."""
        out = []
        if i == j:
            if i < len(self.banks):
                out.append((1.0, self.banks[i]["cot_left"]))
            if i > 0:
                out.append((1.0, self.banks[i - 1]["cot_right"]))
        elif j == i + 1:
            out.append((-1.0, self.banks[i]["csc_right"]))
        elif i == j + 1:
            out.append((-1.0, self.banks[j]["csc_left"]))
        return out

    def reset(self):
        self.state[:] = 0.0
        self.node_voltages[:] = 0.0
        self.sweeps_total = self.sweeps_max = self.steps = 0

    def kernel_args(self):
        return (
            self.b, self.a, self.state, self.inst_diag, self.inst_off,
            float(self.y1), float(self.y2), self.node_voltages,
            _METHOD_CODES[self.method], float(self.solver_cfg.tol), int(self.solver_cfg.max_iter),
            self._rhs, self._work,
        )


def build_junction(stack: PanelStack, y1: float = Y0, y2: float = Y0, dt: float = 0.0,
                   solver_cfg: SolverConfig | None = None) -> PanelJunction:
    if not (y1 > 0 and y2 > 0):
        raise ConfigurationError("port admittances must be positive")
    if not dt > 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    solver_cfg = solver_cfg or SolverConfig()
    n_layers = len(stack.layers)
    n_sec = stack.n_terms + 1
    b = np.zeros((n_layers, 2, n_sec, 3))
    a = np.zeros((n_layers, 2, n_sec, 3))
    state = np.zeros((n_layers, 4, n_sec, 2))
    banks = []
    inst_cot = np.zeros(n_layers)
    inst_csc = np.zeros(n_layers)
    for l, layer in enumerate(stack.layers):
        p = line_params(layer)
        cot = synthesize_bank(p, layer.thickness_m, stack.n_terms, dt, "cot")
        csc = synthesize_bank(p, layer.thickness_m, stack.n_terms, dt, "csc")
        b[l, 0], a[l, 0] = cot.b, cot.a
        b[l, 1], a[l, 1] = csc.b, csc.a
        banks.append({
            "cot_left": AdmittanceFilterBank("cot", cot.num, cot.den, dt, state[l, 0]),
            "cot_right": AdmittanceFilterBank("cot", cot.num, cot.den, dt, state[l, 1]),
            "csc_left": AdmittanceFilterBank("csc", csc.num, csc.den, dt, state[l, 2]),
            "csc_right": AdmittanceFilterBank("csc", csc.num, csc.den, dt, state[l, 3]),
        })
        inst_cot[l] = cot.inst_coeff
        inst_csc[l] = csc.inst_coeff

    diag = np.zeros(n_layers + 1)
    diag[:-1] += inst_cot
    diag[1:] += inst_cot
    diag[0] += y1
    diag[-1] += y2
    off = -inst_csc

    offsum = np.zeros_like(diag)
    offsum[:-1] += np.abs(off)
    offsum[1:] += np.abs(off)
    slack = diag - offsum
    if np.any(slack < -1e-12 * diag) or slack[0] <= 0 or slack[-1] <= 0:
        raise ConfigurationError(
            f"instantaneous matrix is not diagonally dominant: diag={diag}, off={off}"
        )
    return PanelJunction(stack, float(y1), float(y2), float(dt), solver_cfg, b, a, state, diag, off, banks)


def junction_step(j: PanelJunction, v1_inc: float, v2_inc: float) -> tuple[float, float]:
    """Advance the panel one step; returns the voltages reflected back into both ports."""
    if not (math.isfinite(v1_inc) and math.isfinite(v2_inc)):
        raise SolverFault("non-finite incident voltage")
    r1, r2, sweeps, status = _junction_step(*_split_args(j, v1_inc, v2_inc))
    if status != OK:
        raise _fault(status, sweeps, f" at junction step {j.steps}")
    j.steps += 1
    j.sweeps_total += sweeps
    j.sweeps_max = max(j.sweeps_max, sweeps)
    return r1, r2


def _split_args(j, v1i, v2i):
    (b, a, state, diag, off, y1, y2, V, method, tol, max_iter, rhs, work) = j.kernel_args()
    return b, a, state, diag, off, y1, y2, float(v1i), float(v2i), V, method, tol, max_iter, rhs, work


# ---------------------------------------------------------------------------
# single-layer closed form


class ClosedFormJunction:
    """Single-layer panel stepped from the closed-form 2x2 operator.

    Solves ``D V = M (2 y1 V1i, 2 y2 V2i)`` with
    ``D = y1 y2 + (y1 + y2) Kc + Y^2`` and ``M = [[y2 + Kc, Ks], [Ks, y1 + Kc]]``
    directly in the time domain, without the matrix assembly used by
    :class:`PanelJunction`.

    ``y_squared="consistent"`` realizes ``Y^2`` as ``Kc*Kc - Ks*Ks`` with
    cascaded banks, which is the identity the truncated banks satisfy.
    ``y_squared="first_order"`` uses a separate bilinear bank for ``C_eff/L``;
    this differs from the truncated-bank identity by the truncation error.
    """

    def __init__(self, layer: MaterialLayer, n_terms: int, dt: float, y1: float = Y0, y2: float = Y0,
                 y_squared: Literal["consistent", "first_order"] = "consistent"):
        if y_squared not in ("consistent", "first_order"):
            raise ConfigurationError(f"unknown y_squared realization {y_squared!r}")
        p = line_params(layer)
        d = layer.thickness_m
        self.y1, self.y2 = float(y1), float(y2)
        self.y_squared = y_squared
        cot = synthesize_bank(p, d, n_terms, dt, "cot")
        csc = synthesize_bank(p, d, n_terms, dt, "csc")
        # index 0 -> port-1 unknown, index 1 -> port-2 unknown
        self.kc_v = [cot.copy(), cot.copy()]
        self.kc_out = [cot.copy(), cot.copy()]
        self.ks_v = [csc.copy(), csc.copy()]
        self.ks_out = [csc.copy(), csc.copy()]
        self.kc_i = [cot.copy(), cot.copy()]
        self.ks_i = [csc.copy(), csc.copy()]
        K = 2.0 / dt
        g = p.g_per_m / (K * p.l_per_m)
        # C/L + G/(s L) as one first-order section
        c_over_l = p.c_per_m / p.l_per_m
        num = np.array([[c_over_l + g, g - c_over_l, 0.0]])
        den = np.array([[1.0, -1.0, 0.0]])
        self.y2_bank = [AdmittanceFilterBank("cot", num, den, dt), AdmittanceFilterBank("cot", num, den, dt)]
        self.kc0 = cot.inst_coeff
        self.ks0 = csc.inst_coeff

    def _solve_port(self, idx, rhs):
        y1, y2 = self.y1, self.y2
        kc0, ks0 = self.kc0, self.ks0
        hu = self.kc_v[idx].history()
        d0 = y1 * y2 + (y1 + y2) * kc0
        hist = (y1 + y2) * hu
        if self.y_squared == "consistent":
            hw = self.ks_v[idx].history()
            d0 += kc0 * kc0 - ks0 * ks0
            hist += kc0 * hu + self.kc_out[idx].history() - ks0 * hw - self.ks_out[idx].history()
        else:
            yb = self.y2_bank[idx]
            d0 += yb.inst_coeff
            hist += yb.history()
        v = (rhs - hist) / d0
        u = self.kc_v[idx].step(v)
        if self.y_squared == "consistent":
            self.kc_out[idx].step(u)
            self.ks_out[idx].step(self.ks_v[idx].step(v))
        else:
            self.y2_bank[idx].step(v)
        return v

    def step(self, v1_inc: float, v2_inc: float) -> tuple[float, float]:
        i1 = 2.0 * self.y1 * v1_inc
        i2 = 2.0 * self.y2 * v2_inc
        r1 = self.y2 * i1 + self.kc_i[0].step(i1) + self.ks_i[1].step(i2)
        r2 = self.ks_i[0].step(i1) + self.y1 * i2 + self.kc_i[1].step(i2)
        v1 = self._solve_port(0, r1)
        v2 = self._solve_port(1, r2)
        if not (math.isfinite(v1) and math.isfinite(v2)):
            raise SolverFault("non-finite panel voltage")
        return v1 - v1_inc, v2 - v2_inc


# ---------------------------------------------------------------------------
# anisotropic panels


def axis_weights(phi_rad: float) -> tuple[float, float]:
    """``(cos phi, sin phi)`` with exact zeros on the principal axes."""
    c, s = math.cos(phi_rad), math.sin(phi_rad)
    if abs(c) < 1e-15:
        c = 0.0
    if abs(s) < 1e-15:
        s = 0.0
    return c, s


def anisotropic_step(panel: AnisotropicPanel, jx: PanelJunction, jy: PanelJunction, e_inc: float,
                     phi: float | None = None, e_inc_far: tuple[float, float] = (0.0, 0.0)):
    """Split ``e_inc`` onto the principal axes and step both channel junctions.

    Returns ``(e_refl_x, e_refl_y, e_trans_x, e_trans_y)``; ``e_inc_far`` are
    the per-axis incident voltages on the far port.
    """
    if jx.dt != jy.dt:
        raise ConfigurationError(f"channel junctions have different dt ({jx.dt} vs {jy.dt})")
    cx, sy = axis_weights(panel.phi_rad if phi is None else phi)
    rx, tx = junction_step(jx, e_inc * cx, e_inc_far[0])
    ry, ty = junction_step(jy, e_inc * sy, e_inc_far[1])
    return rx, ry, tx, ty
