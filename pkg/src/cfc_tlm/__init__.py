"""Time-domain 1D TLM with thin multilayer and anisotropic composite panels.

Panels are embedded between two mesh nodes as banks of digital IIR filters
built from truncated cotangent/cosecant expansions of the layer admittance
matrix.  A frequency-domain cascade solver provides the reference answer.
"""

from .constants import C0, EPS0, ETA0, MU0, Y0
from .experiments import Geometry, Measurement, measure, measure_anisotropic
from .filters import (
    AdmittanceFilterBank,
    BiquadSection,
    LineParams,
    MaterialLayer,
    bank_response,
    exact_admittance,
    filter_step,
    history_output,
    line_params,
    synthesize_bank,
)
from .mesh import Mesh1D, ProbeRecord, SourceSpec, connect, run, scatter, total_voltage
from .oracle import SParams, TwoPortMatrix, layer_abcd, stack_s_params, thin_sheet_se
from .panel import (
    AnisotropicPanel,
    ClosedFormJunction,
    PanelJunction,
    PanelStack,
    SolverConfig,
    anisotropic_step,
    build_junction,
    junction_step,
    solve_instantaneous,
)
from .postproc import SEResult, Spectrum, extract_s_params, shielding_effectiveness, spectrum
from .scenario import Scenario, load_shipped, parse_scenario

__all__ = [
    "C0", "EPS0", "ETA0", "MU0", "Y0",
    "AdmittanceFilterBank", "BiquadSection", "LineParams", "MaterialLayer",
    "bank_response", "exact_admittance", "filter_step", "history_output",
    "line_params", "synthesize_bank",
    "Mesh1D", "ProbeRecord", "SourceSpec", "connect", "run", "scatter", "total_voltage",
    "SParams", "TwoPortMatrix", "layer_abcd", "stack_s_params", "thin_sheet_se",
    "AnisotropicPanel", "ClosedFormJunction", "PanelJunction", "PanelStack",
    "SolverConfig", "anisotropic_step", "build_junction", "junction_step",
    "solve_instantaneous",
    "SEResult", "Spectrum", "extract_s_params", "shielding_effectiveness", "spectrum",
    "Geometry", "Measurement", "measure", "measure_anisotropic",
    "Scenario", "load_shipped", "parse_scenario",
]
