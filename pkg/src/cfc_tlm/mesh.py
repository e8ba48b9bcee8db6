"""1D TLM background mesh.

Node ``n`` has a left and a right link port.  One time step is scatter
(``V = VL + VR``; reflected = ``V`` minus incident) followed by connect
(reflected pulses swap onto the neighbouring node).  The outer ends are
matched, so nothing returns from them.  A panel junction may replace the
connect exchange on one link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numba import njit

from .constants import C0, Y0
from .errors import ConfigurationError, SolverFault
from .panel import OK, PanelJunction, _fault, _junction_step


@dataclass(eq=False)
class Mesh1D:
    cell_size_m: float
    node_count: int
    link_admittance_s: float = Y0
    vl_inc: np.ndarray = field(default=None, repr=False)
    vr_inc: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.cell_size_m > 0:
            raise ConfigurationError(f"cell_size_m must be > 0, got {self.cell_size_m}")
        if int(self.node_count) != self.node_count or self.node_count < 3:
            raise ConfigurationError(f"node_count must be an integer >= 3, got {self.node_count}")
        self.node_count = int(self.node_count)
        if self.vl_inc is None:
            self.vl_inc = np.zeros(self.node_count)
        if self.vr_inc is None:
            self.vr_inc = np.zeros(self.node_count)
        if self.vl_inc.shape != (self.node_count,) or self.vr_inc.shape != (self.node_count,):
            raise ConfigurationError("incident arrays must have length node_count")

    @property
    def time_step_s(self) -> float:
        return self.cell_size_m / C0

    def energy(self) -> float:
        """Sum of squared incident voltages (proportional to stored link energy)."""
        return float(np.dot(self.vl_inc, self.vl_inc) + np.dot(self.vr_inc, self.vr_inc))

    def reset(self):
        self.vl_inc[:] = 0.0
        self.vr_inc[:] = 0.0


@dataclass(frozen=True)
class SourceSpec:
    kind: Literal["delta", "gaussian"] = "delta"
    node: int = 0
    amplitude: float = 1.0
    gaussian_sigma_s: float | None = None
    gaussian_delay_s: float | None = None

    def __post_init__(self):
        if self.kind not in ("delta", "gaussian"):
            raise ConfigurationError(f"unknown source kind {self.kind!r}")
        if self.amplitude == 0:
            raise ConfigurationError("source amplitude must be non-zero")
        if self.kind == "gaussian":
            if self.gaussian_sigma_s is None or not self.gaussian_sigma_s > 0:
                raise ConfigurationError("gaussian source needs gaussian_sigma_s > 0")

    def scaled(self, factor: float) -> "SourceSpec":
        return SourceSpec(self.kind, self.node, self.amplitude * factor,
                          self.gaussian_sigma_s, self.gaussian_delay_s)

    def waveform(self, steps: int, dt: float) -> np.ndarray:
        w = np.zeros(steps)
        if self.kind == "delta":
            w[0] = self.amplitude
        else:
            delay = self.gaussian_delay_s
            if delay is None:
                delay = 4.0 * self.gaussian_sigma_s
            t = np.arange(steps) * dt
            w[:] = self.amplitude * np.exp(-0.5 * ((t - delay) / self.gaussian_sigma_s) ** 2)
        return w


@dataclass
class ProbeRecord:
    node: int
    samples: np.ndarray


def total_voltage(vl_inc, vr_inc):
    return vl_inc + vr_inc


@njit(cache=True, nogil=True)
def _scatter(vl, vr, rl, rr):
    for n in range(vl.shape[0]):
        v = vl[n] + vr[n]
        rl[n] = v - vl[n]
        rr[n] = v - vr[n]


@njit(cache=True, nogil=True)
def _connect(vl, vr, rl, rr, skip):
    m = vl.shape[0]
    for n in range(m - 1):
        if n == skip:
            continue
        vr[n] = rl[n + 1]
        vl[n + 1] = rr[n]
    vl[0] = 0.0
    vr[m - 1] = 0.0


def scatter(mesh: Mesh1D) -> tuple[np.ndarray, np.ndarray]:
    """Reflected voltages ``(VL_r, VR_r)`` for every node."""
    rl = np.empty(mesh.node_count)
    rr = np.empty(mesh.node_count)
    _scatter(mesh.vl_inc, mesh.vr_inc, rl, rr)
    return rl, rr


def connect(mesh: Mesh1D, vl_refl, vr_refl, junction_link: int | None = None):
    """Exchange reflected pulses into next-step incident voltages in place.

    The link ``junction_link -> junction_link + 1`` is left at zero for the
    caller to fill from a panel junction.
    """
    skip = -1 if junction_link is None else int(junction_link)
    _connect(mesh.vl_inc, mesh.vr_inc, np.asarray(vl_refl, float), np.asarray(vr_refl, float), skip)
    if skip >= 0:
        mesh.vr_inc[skip] = 0.0
        mesh.vl_inc[skip + 1] = 0.0


@njit(cache=True, nogil=True)
def _run_kernel(vl, vr, wave, src, probes, out, energy, link,
                b, a, state, diag, off, y1, y2, V, method, tol, max_iter, rhs, work):
    m = vl.shape[0]
    rl = np.empty(m)
    rr = np.empty(m)
    steps = wave.shape[0]
    track = energy.shape[0] > 0
    sweeps_total = 0
    sweeps_max = 0
    for k in range(steps):
        vl[src] += wave[k]
        vr[src] += wave[k]
        for p in range(probes.shape[0]):
            out[p, k] = vl[probes[p]] + vr[probes[p]]
        _scatter(vl, vr, rl, rr)
        if link >= 0:
            r1, r2, sweeps, status = _junction_step(
                b, a, state, diag, off, y1, y2, rr[link], rl[link + 1], V, method, tol, max_iter, rhs, work
            )
            if status != OK:
                return status, k, sweeps_total, sweeps
            sweeps_total += sweeps
            if sweeps > sweeps_max:
                sweeps_max = sweeps
        _connect(vl, vr, rl, rr, link)
        if link >= 0:
            vr[link] = r1
            vl[link + 1] = r2
        if track:
            e = 0.0
            for n in range(m):
                e += vl[n] * vl[n] + vr[n] * vr[n]
            energy[k] = e
    return OK, steps, sweeps_total, sweeps_max


_NO_PANEL = (
    np.zeros((0, 2, 1, 3)), np.zeros((0, 2, 1, 3)), np.zeros((0, 4, 1, 2)),
    np.zeros(1), np.zeros(0), 1.0, 1.0, np.zeros(1), 0, 1.0, 1, np.zeros(1), np.zeros(1),
)


@dataclass
class RunStats:
    steps: int
    wall_time_s: float
    gs_sweeps_total: int = 0
    gs_sweeps_max: int = 0
    energy: np.ndarray | None = None


def run(mesh: Mesh1D, source: SourceSpec, junction: PanelJunction | None = None, probes=(),
        steps: int = 1, junction_link: int | None = None, track_energy: bool = False,
        stats: RunStats | None = None) -> list[ProbeRecord]:
    """Step the mesh ``steps`` times and return the total voltage at each probe node.

    The junction, if given, sits on the link between ``junction_link`` and
    ``junction_link + 1``.  Mesh and junction state persist across calls.
    Pass a :class:`RunStats` to collect timing, Gauss-Seidel sweep counts and
    (with ``track_energy``) the mesh energy after every step.
    """
    import time

    if int(steps) != steps or steps < 1:
        raise ConfigurationError(f"steps must be >= 1, got {steps}")
    probes = np.asarray(list(probes), dtype=np.int64)
    if np.any(probes < 0) or np.any(probes >= mesh.node_count):
        raise ConfigurationError(f"probe nodes {probes.tolist()} outside mesh of {mesh.node_count} nodes")
    if not 0 <= source.node < mesh.node_count:
        raise ConfigurationError(f"source node {source.node} outside mesh")
    link = -1
    if junction is not None:
        if junction_link is None or not 0 <= junction_link < mesh.node_count - 1:
            raise ConfigurationError(f"junction link {junction_link} outside mesh of {mesh.node_count} nodes")
        if not math.isclose(junction.dt, mesh.time_step_s, rel_tol=1e-12):
            raise ConfigurationError("junction dt differs from the mesh time step")
        link = int(junction_link)
        panel_args = junction.kernel_args()
    else:
        panel_args = _NO_PANEL

    out = np.zeros((len(probes), steps))
    energy = np.zeros(steps if track_energy else 0)
    wave = source.waveform(int(steps), mesh.time_step_s)
    t0 = time.perf_counter()
    status, at, sweeps_total, sweeps_max = _run_kernel(
        mesh.vl_inc, mesh.vr_inc, wave, int(source.node), probes, out, energy, link, *panel_args
    )
    elapsed = time.perf_counter() - t0
    if status != OK:
        raise _fault(status, sweeps_max, f" at step {at}")
    if junction is not None:
        junction.steps += int(steps)
        junction.sweeps_total += sweeps_total
        junction.sweeps_max = max(junction.sweeps_max, sweeps_max)
    if stats is not None:
        stats.steps = int(steps)
        stats.wall_time_s = elapsed
        stats.gs_sweeps_total = int(sweeps_total)
        stats.gs_sweeps_max = int(sweeps_max)
        stats.energy = energy if track_energy else None
    return [ProbeRecord(int(n), out[i]) for i, n in enumerate(probes)]
