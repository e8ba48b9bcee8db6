"""JSON scenario files describing one 1D panel experiment."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .constants import C0
from .errors import ConfigurationError
from .filters import MaterialLayer
from .mesh import SourceSpec
from .panel import AnisotropicPanel, PanelStack, SolverConfig


class ScenarioError(ConfigurationError):
    def __init__(self, field_path: str, message: str, source: str | None = None, line: int | None = None):
        self.field_path = field_path
        where = ""
        if source:
            where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(f"{where}{field_path}: {message}")


@dataclass(frozen=True)
class MeshConfig:
    cell_size_m: float
    node_count: int
    steps: int


@dataclass(frozen=True)
class AnisotropicConfig:
    x_layers: tuple[MaterialLayer, ...]
    y_layers: tuple[MaterialLayer, ...]
    phi_deg: float = 0.0
    phi_sweep_deg: tuple[float, ...] = ()


@dataclass(frozen=True)
class PanelConfig:
    layers: tuple[MaterialLayer, ...]
    n_terms: int
    position_node: int
    anisotropic: AnisotropicConfig | None = None
    n_terms_sweep: tuple[int, ...] = ()

    @property
    def stack(self) -> PanelStack:
        return PanelStack(self.layers, self.n_terms)


@dataclass(frozen=True)
class OutputConfig:
    directory: str
    band_hz: tuple[float, float]
    readout_hz: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    mesh: MeshConfig
    panel: PanelConfig
    excitation: SourceSpec
    solver: SolverConfig = field(default_factory=SolverConfig)
    outputs: OutputConfig = OutputConfig("out", (1e7, 2e9))
    notes: str = ""

    @property
    def dt(self) -> float:
        return self.mesh.cell_size_m / C0

    def stack(self, n_terms: int | None = None) -> PanelStack:
        return PanelStack(self.panel.layers, n_terms or self.panel.n_terms)

    def anisotropic_panel(self, phi_deg: float | None = None, n_terms: int | None = None) -> AnisotropicPanel:
        an = self.panel.anisotropic
        if an is None:
            raise ConfigurationError(f"scenario {self.name!r} has no anisotropic panel")
        n = n_terms or self.panel.n_terms
        phi = an.phi_deg if phi_deg is None else phi_deg
        return AnisotropicPanel(PanelStack(an.x_layers, n), PanelStack(an.y_layers, n), math.radians(phi))

    def geometry(self):
        from .experiments import Geometry

        return Geometry(self.mesh.cell_size_m, self.mesh.node_count, self.panel.position_node, self.excitation.node)

    def replace(self, **changes) -> "Scenario":
        from dataclasses import replace

        return replace(self, **changes)


# ---------------------------------------------------------------------------
# parsing


def _line_of(text: str | None, path: str) -> int | None:
    """Best-effort line number of the deepest key of ``path`` present in ``text``."""
    if not text:
        return None
    pos, found = 0, None
    for part in path.replace("]", "").replace("[", ".").split("."):
        if part.isdigit():
            continue
        i = text.find(f'"{part}"', pos)
        if i < 0:
            break
        pos, found = i, i
    return None if found is None else text.count("\n", 0, found) + 1


class _Reader:
    def __init__(self, text: str | None, source: str | None):
        self.text, self.source = text, source

    def fail(self, path: str, message: str):
        raise ScenarioError(path, message, self.source, _line_of(self.text, path))

    def obj(self, data: Any, path: str) -> dict:
        if not isinstance(data, dict):
            self.fail(path, "expected an object")
        return data

    def get(self, data: dict, key: str, path: str, kind=float, default=...):
        full = f"{path}.{key}" if path else key
        if key not in data or data[key] is None:
            if default is ...:
                self.fail(full, "missing required field")
            return default
        value = data[key]
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                self.fail(full, f"expected an integer, got {value!r}")
            return int(value)
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                self.fail(full, f"expected a finite number, got {value!r}")
            return float(value)
        if kind is str:
            if not isinstance(value, str):
                self.fail(full, f"expected a string, got {value!r}")
            return value
        return value

    def layers(self, data: dict, key: str, path: str) -> tuple[MaterialLayer, ...]:
        full = f"{path}.{key}"
        raw = self.get(data, key, path, kind=list)
        if not isinstance(raw, list) or not raw:
            self.fail(full, "expected a non-empty list of layers")
        out = []
        for i, item in enumerate(raw):
            lp = f"{full}[{i}]"
            item = self.obj(item, lp)
            try:
                out.append(MaterialLayer(
                    thickness_m=self.get(item, "thickness_m", lp),
                    eps_r=self.get(item, "eps_r", lp, default=1.0),
                    sigma_s_per_m=self.get(item, "sigma_s_per_m", lp, default=0.0),
                    mu_r=self.get(item, "mu_r", lp, default=1.0),
                ))
            except ScenarioError:
                raise
            except ConfigurationError as exc:
                self.fail(lp, str(exc))
        return tuple(out)


def scenario_from_dict(data: dict, name: str = "scenario", text: str | None = None,
                       source: str | None = None) -> Scenario:
    r = _Reader(text, source)
    data = r.obj(data, "")
    mesh_d = r.obj(r.get(data, "mesh", "", kind=dict), "mesh")
    mesh = MeshConfig(
        r.get(mesh_d, "cell_size_m", "mesh"),
        r.get(mesh_d, "node_count", "mesh", kind=int),
        r.get(mesh_d, "steps", "mesh", kind=int),
    )
    if not mesh.cell_size_m > 0:
        r.fail("mesh.cell_size_m", "must be > 0")
    if mesh.node_count < 3:
        r.fail("mesh.node_count", "must be >= 3")
    if mesh.steps < 1:
        r.fail("mesh.steps", "must be >= 1")

    pd = r.obj(r.get(data, "panel", "", kind=dict), "panel")
    aniso = None
    if pd.get("anisotropic") is not None:
        ad = r.obj(pd["anisotropic"], "panel.anisotropic")
        sweep = r.get(ad, "phi_sweep_deg", "panel.anisotropic", kind=list, default=[])
        if not isinstance(sweep, list) or not all(isinstance(v, (int, float)) for v in sweep):
            r.fail("panel.anisotropic.phi_sweep_deg", "expected a list of angles")
        aniso = AnisotropicConfig(
            r.layers(ad, "x_layers", "panel.anisotropic"),
            r.layers(ad, "y_layers", "panel.anisotropic"),
            r.get(ad, "phi_deg", "panel.anisotropic", default=0.0),
            tuple(float(v) for v in sweep),
        )
        layers = r.layers(pd, "layers", "panel") if "layers" in pd else aniso.x_layers
    else:
        layers = r.layers(pd, "layers", "panel")
    n_sweep = r.get(pd, "n_terms_sweep", "panel", kind=list, default=[])
    if not isinstance(n_sweep, list) or not all(isinstance(v, int) and v >= 1 for v in n_sweep):
        r.fail("panel.n_terms_sweep", "expected a list of positive integers")
    panel = PanelConfig(
        layers,
        r.get(pd, "n_terms", "panel", kind=int),
        r.get(pd, "position_node", "panel", kind=int),
        aniso,
        tuple(n_sweep),
    )
    if panel.n_terms < 1:
        r.fail("panel.n_terms", "must be >= 1")

    ed = r.obj(r.get(data, "excitation", "", kind=dict), "excitation")
    try:
        excitation = SourceSpec(
            kind=r.get(ed, "kind", "excitation", kind=str, default="delta"),
            node=r.get(ed, "node", "excitation", kind=int),
            amplitude=r.get(ed, "amplitude", "excitation", default=1.0),
            gaussian_sigma_s=r.get(ed, "gaussian_sigma_s", "excitation", default=None),
            gaussian_delay_s=r.get(ed, "gaussian_delay_s", "excitation", default=None),
        )
    except ScenarioError:
        raise
    except ConfigurationError as exc:
        r.fail("excitation", str(exc))

    sd = r.obj(data.get("solver") or {}, "solver")
    try:
        solver = SolverConfig(
            method=r.get(sd, "method", "solver", kind=str, default=None),
            tol=r.get(sd, "tol", "solver", default=1e-10),
            max_iter=r.get(sd, "max_iter", "solver", kind=int, default=1000),
        )
    except ConfigurationError as exc:
        r.fail("solver", str(exc))

    od = r.obj(r.get(data, "outputs", "", kind=dict), "outputs")
    band = r.get(od, "band_hz", "outputs", kind=list)
    if not (isinstance(band, list) and len(band) == 2 and all(isinstance(v, (int, float)) for v in band)):
        r.fail("outputs.band_hz", "expected [min, max]")
    outputs = OutputConfig(
        r.get(od, "directory", "outputs", kind=str),
        (float(band[0]), float(band[1])),
        r.get(od, "readout_hz", "outputs", default=None),
    )
    notes = r.get(data, "notes", "", kind=str, default="")
    sc = Scenario(r.get(data, "name", "", kind=str, default=name), mesh, panel, excitation, solver, outputs, notes)

    # cross-field invariants
    if not 0 <= excitation.node < panel.position_node:
        r.fail("excitation.node", "source must lie before the panel (0 <= node < panel.position_node)")
    if not panel.position_node + 1 < mesh.node_count:
        r.fail("panel.position_node", "transmission probe (position_node + 1) must lie inside the mesh")
    nyq = 0.5 / sc.dt
    lo, hi = outputs.band_hz
    if not 0 < lo < hi < nyq:
        r.fail("outputs.band_hz", f"band must satisfy 0 < min < max < Nyquist ({nyq:.6g} Hz)")
    if outputs.readout_hz is not None and not 0 < outputs.readout_hz < nyq:
        r.fail("outputs.readout_hz", "readout frequency outside (0, Nyquist)")
    return sc


def parse_scenario(path) -> Scenario:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"malformed JSON: {exc.msg}", str(path), exc.lineno) from None
    return scenario_from_dict(data, name=path.stem, text=text, source=str(path))


def _layer_dict(layer: MaterialLayer) -> dict:
    return {"thickness_m": layer.thickness_m, "eps_r": layer.eps_r,
            "sigma_s_per_m": layer.sigma_s_per_m, "mu_r": layer.mu_r}


def scenario_to_dict(s: Scenario) -> dict:
    panel: dict[str, Any] = {
        "layers": [_layer_dict(l) for l in s.panel.layers],
        "n_terms": s.panel.n_terms,
        "position_node": s.panel.position_node,
    }
    if s.panel.n_terms_sweep:
        panel["n_terms_sweep"] = list(s.panel.n_terms_sweep)
    if s.panel.anisotropic is not None:
        an = s.panel.anisotropic
        panel["anisotropic"] = {
            "x_layers": [_layer_dict(l) for l in an.x_layers],
            "y_layers": [_layer_dict(l) for l in an.y_layers],
            "phi_deg": an.phi_deg,
            "phi_sweep_deg": list(an.phi_sweep_deg),
        }
    ex = s.excitation
    excitation = {"kind": ex.kind, "node": ex.node, "amplitude": ex.amplitude}
    if ex.gaussian_sigma_s is not None:
        excitation["gaussian_sigma_s"] = ex.gaussian_sigma_s
    if ex.gaussian_delay_s is not None:
        excitation["gaussian_delay_s"] = ex.gaussian_delay_s
    outputs: dict[str, Any] = {"directory": s.outputs.directory, "band_hz": list(s.outputs.band_hz)}
    if s.outputs.readout_hz is not None:
        outputs["readout_hz"] = s.outputs.readout_hz
    out = {
        "name": s.name,
        "mesh": {"cell_size_m": s.mesh.cell_size_m, "node_count": s.mesh.node_count, "steps": s.mesh.steps},
        "panel": panel,
        "excitation": excitation,
        "solver": {"method": s.solver.method, "tol": s.solver.tol, "max_iter": s.solver.max_iter},
        "outputs": outputs,
    }
    if s.notes:
        out["notes"] = s.notes
    return out


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def shipped_scenarios() -> dict[str, Path]:
    """Scenario files bundled with the package, keyed by stem."""
    root = Path(__file__).with_name("scenarios")
    return {p.stem: p for p in sorted(root.glob("*.json"))}


def load_shipped(name: str) -> Scenario:
    paths = shipped_scenarios()
    if name not in paths:
        raise KeyError(f"no shipped scenario {name!r}; available: {', '.join(paths)}")
    return parse_scenario(paths[name])
