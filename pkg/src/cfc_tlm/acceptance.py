"""Acceptance checks, shared by ``tests/test_acceptance.py`` and ``cfc-tlm validate``.

Every ``criterion_*`` function returns a list of :class:`Check`; a criterion
passes when all of its checks pass.  Tolerances are fixed here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .constants import C0, ETA0, Y0
from .experiments import Geometry, measure, measure_anisotropic, probe_run
from .filters import (
    MaterialLayer,
    bank_response,
    electrical_length,
    exact_admittance,
    line_params,
    synthesize_bank,
)
from .mesh import SourceSpec
from .oracle import stack_s_params
from .panel import (
    ClosedFormJunction,
    PanelStack,
    SolverConfig,
    build_junction,
    junction_step,
    solve_instantaneous,
)
from .scenario import load_shipped

FIG5_LAYER = MaterialLayer(1e-3, 4.56, 8000.0)
STEPS = 2**16
RUNTIME_LIMIT_S = 2.0


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  [{self.criterion}] {self.name}: {self.detail}"


def _max_dev(sim, ref):
    return float(np.max(np.abs(sim - ref)))


def _timed_measure(stack, geometry, solver=None):
    # one warm-up so JIT compilation is not counted
    probe_run(geometry, SourceSpec("delta", geometry.source_node), 16, stack, solver)
    t0 = time.perf_counter()
    m = measure(stack, geometry, STEPS, solver=solver)
    elapsed = m.panel.stats.wall_time_s
    return m, elapsed, time.perf_counter() - t0


def criterion_1() -> list[Check]:
    sc = load_shipped("fig5")
    stack = sc.stack(100)
    m, run_s, total_s = _timed_measure(stack, sc.geometry(), sc.solver)
    sp = m.s_params((10e6, 2e9))
    o = stack_s_params(stack, sp.freqs)
    d11, d21 = _max_dev(sp.s11, o.s11), _max_dev(sp.s21, o.s21)
    return [
        Check(1, "fig5 N=100 S11 vs oracle (<= 0.02)", d11 <= 0.02, f"max |dS11| = {d11:.3e}"),
        Check(1, "fig5 N=100 S21 vs oracle (<= 0.02)", d21 <= 0.02, f"max |dS21| = {d21:.3e}"),
        Check(1, "fig5 2^16-step run < 2 s", run_s < RUNTIME_LIMIT_S,
              f"panel run {run_s:.3f} s (reference + panel incl. setup {total_s:.3f} s)"),
    ]


def criterion_2() -> list[Check]:
    sc = load_shipped("fig5")
    devs = []
    for n in (10, 20, 100):
        sp = measure(sc.stack(n), sc.geometry(), STEPS).s_params((1e9, 2e9))
        devs.append(_max_dev(sp.s21, stack_s_params(sc.stack(n), sp.freqs).s21))
    ok = devs[0] > devs[1] > devs[2]
    return [Check(2, "S21 deviation decreases over N = 10, 20, 100 (1-2 GHz)", ok,
                  ", ".join(f"N={n}: {d:.3e}" for n, d in zip((10, 20, 100), devs)))]


def criterion_3() -> list[Check]:
    sc = load_shipped("fig7")
    stack = sc.stack(50)
    m, run_s, _ = _timed_measure(stack, sc.geometry(), sc.solver)
    sp = m.s_params((10e6, 2e9))
    o = stack_s_params(stack, sp.freqs)
    d11, d21 = _max_dev(sp.s11, o.s11), _max_dev(sp.s21, o.s21)
    return [
        Check(3, "fig7 N=50 S11 vs oracle (<= 0.02)", d11 <= 0.02, f"max |dS11| = {d11:.3e}"),
        Check(3, "fig7 N=50 S21 vs oracle (<= 0.02)", d21 <= 0.02, f"max |dS21| = {d21:.3e}"),
        Check(3, "fig7 2^16-step run < 2 s", run_s < RUNTIME_LIMIT_S,
              f"panel run {run_s:.3f} s, max Gauss-Seidel sweeps/step {m.panel.stats.gs_sweeps_max}"),
    ]


def criterion_4() -> list[Check]:
    checks = []
    for key in "ABCD":
        sc = load_shipped(f"tableI_{key}")
        stack = sc.stack()
        m = measure(stack, sc.geometry(), sc.mesh.steps, solver=sc.solver)
        sp = m.s_params((10e6, 1e9))
        o = stack_s_params(stack, sp.freqs)
        gated = o.se_db <= 120.0
        dev = float(np.max(np.abs(sp.se_db - o.se_db)[gated]))
        checks.append(Check(4, f"panel {key} SE vs oracle (<= 1 dB where SE <= 120 dB)", dev <= 1.0,
                            f"max dev {dev:.3f} dB over {int(gated.sum())} bins"))
        low = float(sp.se_db.min())
        checks.append(Check(4, f"panel {key} SE > 50 dB over 10 MHz-1 GHz", low > 50.0, f"min SE {low:.2f} dB"))
        if key == "A":
            layer = stack.layers[0]
            formula = 20 * math.log10(1 + ETA0 * layer.sigma_s_per_m * layer.thickness_m / 2)
            se_1mhz = float(m.s_params_at([1e6]).se_db[0])
            checks.append(Check(4, "panel A SE at 1 MHz vs 20log10(1 + eta0 sigma d / 2) (0.5 dB)",
                                abs(se_1mhz - formula) <= 0.5,
                                f"simulated {se_1mhz:.3f} dB, formula {formula:.3f} dB"))
    return checks


def criterion_5() -> list[Check]:
    sc = load_shipped("fig6")
    geo = sc.geometry()
    steps = sc.mesh.steps
    f = sc.outputs.readout_hz or 1e9
    checks = []
    iso = {}
    for axis in ("x", "y"):
        panel = sc.anisotropic_panel(0.0)
        stack = panel.stack_x if axis == "x" else panel.stack_y
        iso[axis] = probe_run(geo, sc.excitation, steps, stack, sc.solver)
    for phi, live, dead in ((0.0, "x", "y"), (90.0, "y", "x")):
        am = measure_anisotropic(sc.anisotropic_panel(phi), geo, steps, sc.excitation, sc.solver)
        run_live = am.x_panel if live == "x" else am.y_panel
        run_dead = am.y_panel if live == "x" else am.x_panel
        same = (np.array_equal(run_live.refl, iso[live].refl) and np.array_equal(run_live.trans, iso[live].trans))
        zero = not np.any(run_dead.refl) and not np.any(run_dead.trans)
        checks.append(Check(5, f"phi={phi:g} deg equals isotropic {live}-stack bit-for-bit", same and zero,
                            f"{live}-channel identical: {same}, {dead}-channel zero: {zero}"))
    angles = sc.panel.anisotropic.phi_sweep_deg or tuple(float(a) for a in range(0, 91, 5))
    mags = np.array([measure_anisotropic(sc.anisotropic_panel(a), geo, steps, sc.excitation, sc.solver)
                     .magnitudes_at(f) for a in angles])
    for col, label in ((0, "reflection"), (1, "transmission")):
        v = mags[:, col]
        d = np.diff(v)
        mono = bool(np.all(d >= -1e-12)) or bool(np.all(d <= 1e-12))
        inside = bool(np.all(v >= min(v[0], v[-1]) - 1e-12) and np.all(v <= max(v[0], v[-1]) + 1e-12))
        checks.append(Check(5, f"|{label}| at {f / 1e9:g} GHz monotone across phi 0-90 deg", mono and inside,
                            f"{v[0]:.6g} -> {v[-1]:.6g} over {len(v)} angles"))
    return checks


TABLE_I_MATERIALS = [
    MaterialLayer(1.0e-3, 2.0, 1e4),
    MaterialLayer(0.6e-3, 2.0, 1e4),
    MaterialLayer(0.6e-3, 4.0, 50.0),
    MaterialLayer(0.6e-3, 3.0, 1e3),
    MaterialLayer(0.2e-3, 2.0, 1e4),
    MaterialLayer(0.2e-3, 4.0, 50.0),
    MaterialLayer(0.2e-3, 3.0, 1e3),
]
BANK_ORDERS = (10, 20, 50, 100)


def bank_error_table(materials=TABLE_I_MATERIALS, orders=BANK_ORDERS, dt=0.01 / C0, theta_fraction=0.25,
                     points=2000):
    """Worst relative bank error per (material, kind, N) where f <= 0.05/dt and |theta| <= frac * N * pi."""
    f = np.linspace(0.05 / dt / points, 0.05 / dt, points)
    rows = []
    for layer in materials:
        p = line_params(layer)
        theta = np.abs(electrical_length(p, layer.thickness_m, f))
        for n in orders:
            m = theta <= theta_fraction * n * math.pi
            if not m.any():
                continue
            for kind in ("cot", "csc"):
                bank = synthesize_bank(p, layer.thickness_m, n, dt, kind)
                exact = exact_admittance(p, layer.thickness_m, f[m], kind)
                err = np.abs(bank_response(bank, f[m]) - exact) / np.abs(exact)
                i = int(err.argmax())
                rows.append((layer, kind, n, float(err[i]), float(f[m][i]), float(theta[m][i])))
    return rows


def criterion_6() -> list[Check]:
    checks = []
    rows = bank_error_table()
    for layer in TABLE_I_MATERIALS:
        for kind in ("cot", "csc"):
            sel = [r for r in rows if r[0] is layer and r[1] == kind]
            worst = max(sel, key=lambda r: r[3])
            ok = all(r[3] <= 0.02 for r in sel)
            checks.append(Check(
                6, f"{kind} bank d={layer.thickness_m * 1e3:g} mm eps_r={layer.eps_r:g} "
                   f"sigma={layer.sigma_s_per_m:g} (<= 2%)", ok,
                f"worst {worst[3] * 100:.2f}% at N={worst[2]}, f={worst[4] / 1e6:.0f} MHz, |theta|={worst[5]:.2f}"))
    return checks


def criterion_7() -> list[Check]:
    checks = []
    geo = Geometry()

    lossless = PanelStack([MaterialLayer(1e-3, 4.56, 0.0)], 50)
    sp = measure(lossless, geo, STEPS).s_params((10e6, 2e9))
    power = np.abs(sp.s11) ** 2 + np.abs(sp.s21) ** 2
    dev = float(np.max(np.abs(power - 1)))
    checks.append(Check(7, "lossless unitarity |S11|^2+|S21|^2 = 1 +- 0.01", dev <= 0.01, f"max |P - 1| = {dev:.2e}"))

    freqs = np.linspace(1e6, 2e9, 400)
    worst = 0.0
    for key in "BCD":
        stack = load_shipped(f"tableI_{key}").stack()
        worst = max(worst, _max_dev(stack_s_params(stack, freqs).s21, stack_s_params(stack.reversed(), freqs).s21))
    checks.append(Check(7, "oracle reciprocity under layer reversal (1e-10)", worst <= 1e-10, f"max |dS21| = {worst:.2e}"))

    rng = np.random.default_rng(7)
    n = 10
    off = rng.uniform(-1, 1, n - 1)
    diag = np.abs(np.r_[off, 0]) + np.abs(np.r_[0, off]) + rng.uniform(0.1, 1.0, n)
    a = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    b = rng.standard_normal(n)
    gs = solve_instantaneous(a, b, SolverConfig("gauss_seidel", tol=1e-12, max_iter=10000))
    direct = solve_instantaneous(a, b, SolverConfig("direct_tridiagonal"))
    d = _max_dev(gs, direct)
    checks.append(Check(7, "Gauss-Seidel vs direct tridiagonal (1e-8)", d <= 1e-8, f"max |dV| = {d:.2e}"))

    dt = geo.dt
    j = build_junction(PanelStack([FIG5_LAYER], 100), Y0, Y0, dt)
    cf = ClosedFormJunction(FIG5_LAYER, 100, dt)
    drive = rng.standard_normal((10_000, 2))
    seq17 = np.array([junction_step(j, *v) for v in drive])
    seq5 = np.array([cf.step(*v) for v in drive])
    rel = _max_dev(seq17, seq5) / float(np.max(np.abs(seq17)))
    checks.append(Check(7, "closed-form 2x2 path vs (n+1) matrix path, 1e4 steps (1e-9 rel)", rel <= 1e-9,
                        f"max relative difference {rel:.2e}"))

    half = MaterialLayer(0.5e-3, 4.56, 8000.0)
    split = measure(PanelStack([half, half], 100), geo, STEPS).s_params((10e6, 2e9))
    whole = measure(PanelStack([FIG5_LAYER], 100), geo, STEPS).s_params((10e6, 2e9))
    d = max(_max_dev(split.s11, whole.s11), _max_dev(split.s21, whole.s21))
    checks.append(Check(7, "layer-merge consistency (0.02)", d <= 0.02, f"max |dS| = {d:.2e}"))

    bank = synthesize_bank(line_params(FIG5_LAYER), 1e-3, 100, dt, "csc")
    worst = 0.0
    for _ in range(200):
        bank.state[:] = rng.standard_normal(bank.state.shape)
        x = float(rng.standard_normal())
        expect = bank.inst_coeff * x + bank.history()
        got = bank.step(x)
        worst = max(worst, abs(got - expect) / max(abs(got), 1.0))
    checks.append(Check(7, "filter decomposition step(x) = inst*x + history (machine precision)",
                        worst <= 1e-13, f"max relative residual {worst:.1e}"))
    return checks


def criterion_8(steps: int = 1_000_000) -> list[Check]:
    sc = load_shipped("tableI_D")
    geo = Geometry(sc.mesh.cell_size_m, sc.mesh.node_count, sc.panel.position_node, sc.excitation.node)
    r = probe_run(geo, sc.excitation, steps, sc.stack(), sc.solver, track_energy=True)
    e = r.stats.energy
    finite = bool(np.all(np.isfinite(r.refl)) and np.all(np.isfinite(r.trans)) and np.all(np.isfinite(e)))
    rises = np.diff(e)
    n_up = int(np.sum(rises > 0))
    injected = 2.0 * sc.excitation.amplitude ** 2
    return [
        Check(8, f"panel D {steps} steps: voltages finite", finite,
              f"final mesh energy {e[-1]:.3e}, max |V| {max(np.abs(r.refl).max(), np.abs(r.trans).max()):.3e}"),
        Check(8, "panel D mesh energy non-increasing after source off", n_up == 0,
              f"{n_up} of {len(rises)} steps increase (largest +{rises.max():.3e}); panel re-radiates stored energy"),
        Check(8, "panel D mesh energy never exceeds injected energy", bool(np.all(e <= injected * (1 + 1e-12))),
              f"max {e.max():.6g} vs injected {injected:.6g}"),
    ]


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
}


def run_all(selected=None, echo=print) -> list[Check]:
    checks = []
    for k, fn in CRITERIA.items():
        if selected and k not in selected:
            continue
        for c in fn():
            checks.append(c)
            if echo:
                echo(c.line())
    return checks
