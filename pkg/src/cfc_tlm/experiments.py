"""Reference-run/panel-run measurements shared by the CLI and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .mesh import Mesh1D, RunStats, SourceSpec, run
from .oracle import SParams
from .panel import AnisotropicPanel, PanelStack, SolverConfig, axis_weights, build_junction
from .postproc import Spectrum, dft_at, extract_s_params, spectrum


@dataclass(frozen=True)
class Geometry:
    """Mesh layout: the panel sits on the link ``position_node -> position_node + 1``.

    Reflection is probed at ``position_node`` and transmission at
    ``position_node + 1``, so both sit half a cell from the panel.
    """

    cell_size_m: float = 0.01
    node_count: int = 64
    position_node: int = 32
    source_node: int = 8

    def __post_init__(self):
        if not 0 <= self.source_node < self.position_node:
            raise ConfigurationError("source must lie on the incident side of the panel")
        if self.position_node + 1 >= self.node_count:
            raise ConfigurationError("transmission probe falls outside the mesh")

    @property
    def dt(self) -> float:
        return Mesh1D(self.cell_size_m, self.node_count).time_step_s

    @property
    def probes(self) -> tuple[int, int]:
        return self.position_node, self.position_node + 1


@dataclass
class ProbeSeries:
    """Node-voltage series at the reflection and transmission probes."""

    refl: np.ndarray
    trans: np.ndarray
    stats: RunStats


@dataclass
class Measurement:
    reference: ProbeSeries
    panel: ProbeSeries
    dt: float

    @property
    def reflected(self) -> np.ndarray:
        return self.panel.refl - self.reference.refl

    def s_params(self, band: tuple[float, float] | None = None) -> SParams:
        sp = lambda x: spectrum(x, self.dt)
        return extract_s_params(
            sp(self.reflected), sp(self.panel.trans), sp(self.reference.refl),
            reflection_delay=1, transmission_delay=1, band=band,
        )

    def s_params_at(self, freqs) -> SParams:
        """S-parameters from direct DFTs at arbitrary frequencies."""
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        inc = dft_at(self.reference.refl, self.dt, freqs)
        ph = np.exp(2j * np.pi * freqs * self.dt)
        return SParams(freqs, dft_at(self.reflected, self.dt, freqs) / inc * ph,
                       dft_at(self.panel.trans, self.dt, freqs) / inc * ph)

    def incident_spectrum(self) -> Spectrum:
        return spectrum(self.reference.trans, self.dt)

    def transmitted_spectrum(self) -> Spectrum:
        return spectrum(self.panel.trans, self.dt)


def probe_run(geometry: Geometry, source: SourceSpec, steps: int, stack: PanelStack | None = None,
              solver: SolverConfig | None = None, track_energy: bool = False) -> ProbeSeries:
    mesh = Mesh1D(geometry.cell_size_m, geometry.node_count)
    junction = None
    if stack is not None:
        junction = build_junction(stack, mesh.link_admittance_s, mesh.link_admittance_s, mesh.time_step_s, solver)
    stats = RunStats(0, 0.0)
    refl, trans = run(mesh, source, junction, geometry.probes, steps, geometry.position_node,
                      track_energy=track_energy, stats=stats)
    return ProbeSeries(refl.samples, trans.samples, stats)


def measure(stack: PanelStack, geometry: Geometry = Geometry(), steps: int = 2**16,
            source: SourceSpec | None = None, solver: SolverConfig | None = None) -> Measurement:
    """Run the empty mesh and the mesh with the panel; keep both probe pairs."""
    source = source or SourceSpec("delta", geometry.source_node, 1.0)
    ref = probe_run(geometry, source, steps)
    pan = probe_run(geometry, source, steps, stack, solver)
    return Measurement(ref, pan, geometry.dt)


@dataclass
class AnisotropicMeasurement:
    """Both polarization channels of one anisotropic run.

    ``reference`` is the empty-mesh run for the full-amplitude field; the
    channel runs are driven by its projections onto the x and y axes.  A
    channel with zero projection is not run and holds zeros.
    """

    reference: ProbeSeries
    x_ref: ProbeSeries
    x_panel: ProbeSeries
    y_ref: ProbeSeries
    y_panel: ProbeSeries
    dt: float
    phi_rad: float

    def components_at(self, f: float) -> tuple[complex, complex, complex, complex]:
        """Reflected and transmitted field components ``(rx, ry, tx, ty)`` per unit incident field."""
        inc = dft_at(self.reference.refl, self.dt, f)[0]
        ph = np.exp(2j * np.pi * f * self.dt)
        dft = lambda x: dft_at(x, self.dt, f)[0] / inc * ph
        return (dft(self.x_panel.refl - self.x_ref.refl), dft(self.y_panel.refl - self.y_ref.refl),
                dft(self.x_panel.trans), dft(self.y_panel.trans))

    def magnitudes_at(self, f: float) -> tuple[float, float]:
        """``(|R|, |T|)``: norms of the combined reflected and transmitted field vectors."""
        rx, ry, tx, ty = self.components_at(f)
        return float(np.hypot(abs(rx), abs(ry))), float(np.hypot(abs(tx), abs(ty)))


def measure_anisotropic(panel: AnisotropicPanel, geometry: Geometry = Geometry(), steps: int = 2**16,
                        source: SourceSpec | None = None, solver: SolverConfig | None = None
                        ) -> AnisotropicMeasurement:
    source = source or SourceSpec("delta", geometry.source_node, 1.0)
    reference = probe_run(geometry, source, steps)
    chans = []
    for weight, stack in zip(axis_weights(panel.phi_rad), (panel.stack_x, panel.stack_y)):
        if weight == 0.0:
            zero = ProbeSeries(np.zeros(steps), np.zeros(steps), RunStats(steps, 0.0))
            chans += [zero, zero]
            continue
        src = source.scaled(weight)
        chans += [probe_run(geometry, src, steps), probe_run(geometry, src, steps, stack, solver)]
    return AnisotropicMeasurement(reference, *chans, geometry.dt, panel.phi_rad)
