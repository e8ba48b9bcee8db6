"""Command-line front end: ``cfc-tlm <subcommand> --scenario file.json ...``.

Exit codes: 0 success, 1 usage or parse error, 2 solver fault, 3 comparison
or validation failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, SolverFault
from .experiments import measure, measure_anisotropic
from .oracle import SParams, stack_s_params
from .panel import SolverConfig
from .postproc import SE_CAP_DB, extract_s_params, spectrum
from .scenario import Scenario, parse_scenario, shipped_scenarios

log = logging.getLogger("cfc_tlm")

CSV_HEADER = ["freq_hz", "s11_re", "s11_im", "s21_re", "s21_im", "se_db"]
ANGLE_HEADER = ["phi_deg", "freq_hz", "refl_mag", "trans_mag", "se_db"]
EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_COMPARE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    return repr(float(x))


def _se(x: float) -> float:
    return SE_CAP_DB if not math.isfinite(x) or x > SE_CAP_DB else x


def write_sparams_csv(path: Path, sp: SParams):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for f, s11, s21, se in zip(sp.freqs, sp.s11, sp.s21, sp.se_db):
            w.writerow([_num(f), _num(s11.real), _num(s11.imag), _num(s21.real), _num(s21.imag), _num(_se(se))])


def read_sparams_csv(path) -> SParams:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise UsageError(f"{path}: expected header {','.join(CSV_HEADER)}")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 6)
    return SParams(data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4])


def _parse_band(text: str | None, default):
    if text is None:
        return default
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--band expects <min:max> in Hz, got {text!r}") from None
    if not 0 < lo < hi:
        raise UsageError(f"--band needs 0 < min < max, got {text!r}")
    return lo, hi


def _solver(args, sc: Scenario) -> SolverConfig:
    if args.solver is None:
        return sc.solver
    method = {"gs": "gauss_seidel", "direct": "direct_tridiagonal"}[args.solver]
    return SolverConfig(method, sc.solver.tol, sc.solver.max_iter)


def _resolve_scenario(text: str) -> Scenario:
    p = Path(text)
    if not p.exists():
        shipped = shipped_scenarios()
        if text in shipped:
            p = shipped[text]
        else:
            raise UsageError(f"scenario file not found: {text}")
    return parse_scenario(p)


def _out_dir(args, sc: Scenario) -> Path:
    return Path(args.out or sc.outputs.directory)


def _fft_grid(sc: Scenario, band) -> np.ndarray:
    f = np.fft.rfftfreq(sc.mesh.steps, sc.dt)
    return f[(f >= band[0]) & (f <= band[1])]


def cmd_simulate(args) -> int:
    sc = _resolve_scenario(args.scenario)
    band = _parse_band(args.band, sc.outputs.band_hz)
    n = args.n_terms or sc.panel.n_terms
    out = _out_dir(args, sc)
    solver = _solver(args, sc)
    t0 = time.perf_counter()
    if sc.panel.anisotropic is not None:
        am = measure_anisotropic(sc.anisotropic_panel(n_terms=n), sc.geometry(), sc.mesh.steps, sc.excitation, solver)
        inc = spectrum(am.reference.refl, am.dt)
        for axis, ref, pan in (("x", am.x_ref, am.x_panel), ("y", am.y_ref, am.y_panel)):
            # field components per unit incident field, i.e. already weighted by cos/sin phi
            sp = extract_s_params(spectrum(pan.refl - ref.refl, am.dt), spectrum(pan.trans, am.dt), inc,
                                  reflection_delay=1, transmission_delay=1, band=band)
            write_sparams_csv(out / f"{sc.name}_sim_{axis}.csv", sp)
        stats = [am.x_panel.stats, am.y_panel.stats]
    else:
        m = measure(sc.stack(n), sc.geometry(), sc.mesh.steps, sc.excitation, solver)
        write_sparams_csv(out / f"{sc.name}_sim.csv", m.s_params(band))
        stats = [m.panel.stats]
    wall = time.perf_counter() - t0
    sweeps = sum(s.gs_sweeps_total for s in stats)
    print(f"{sc.name}: N={n}, {sc.mesh.steps} steps, wall time {wall:.3f} s "
          f"(panel kernel {sum(s.wall_time_s for s in stats):.3f} s)")
    print(f"Gauss-Seidel sweeps: total {sweeps}, max per step {max(s.gs_sweeps_max for s in stats)}, "
          f"mean per step {sweeps / (len(stats) * sc.mesh.steps):.3f}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    sc = _resolve_scenario(args.scenario)
    band = _parse_band(args.band, sc.outputs.band_hz)
    freqs = _fft_grid(sc, band) if not args.freqs else np.array([float(v) for v in args.freqs.split(",")])
    out = _out_dir(args, sc)
    if sc.panel.anisotropic is not None:
        an = sc.panel.anisotropic
        stacks = {"x": an.x_layers, "y": an.y_layers}
    else:
        stacks = {"": sc.panel.layers}
    ok = True
    for axis, layers in stacks.items():
        sp = stack_s_params(layers, freqs)
        power = np.abs(sp.s11) ** 2 + np.abs(sp.s21) ** 2
        passive = bool(np.all(power <= 1 + 1e-9))
        ok &= passive
        name = f"{sc.name}_oracle{'_' + axis if axis else ''}.csv"
        write_sparams_csv(out / name, sp)
        print(f"wrote {out / name}: {len(freqs)} points, passivity {'ok' if passive else 'VIOLATED'} "
              f"(max |S11|^2+|S21|^2 = {power.max():.12f})")
    return EXIT_OK if ok else EXIT_COMPARE


def _sweep_n_point(sc, n, solver, band):
    m = measure(sc.stack(n), sc.geometry(), sc.mesh.steps, sc.excitation, solver)
    return n, m.s_params(band)


def cmd_sweep_n(args) -> int:
    sc = _resolve_scenario(args.scenario)
    if sc.panel.anisotropic is not None:
        raise UsageError("sweep-n needs an isotropic scenario")
    band = _parse_band(args.band, sc.outputs.band_hz)
    if args.n_list:
        orders = [int(v) for v in args.n_list.split(",")]
    else:
        orders = list(sc.panel.n_terms_sweep) or [10, 20, 100]
    out = _out_dir(args, sc)
    solver = _solver(args, sc)
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(lambda n: _sweep_n_point(sc, n, solver, band), orders))
    print(f"{'N':>6} {'max|dS11|':>12} {'max|dS21|':>12} {'max dSE (dB)':>13}")
    for n, sp in results:
        write_sparams_csv(out / f"{sc.name}_N{n}.csv", sp)
        o = stack_s_params(sc.stack(n), sp.freqs)
        gated = o.se_db <= 120
        dse = float(np.max(np.abs(sp.se_db - o.se_db)[gated])) if gated.any() else float("nan")
        print(f"{n:>6} {np.max(np.abs(sp.s11 - o.s11)):>12.4e} {np.max(np.abs(sp.s21 - o.s21)):>12.4e} {dse:>13.4f}")
    write_sparams_csv(out / f"{sc.name}_oracle.csv", stack_s_params(sc.panel.layers, results[0][1].freqs))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_sweep_angle(args) -> int:
    sc = _resolve_scenario(args.scenario)
    an = sc.panel.anisotropic
    if an is None:
        raise UsageError("sweep-angle needs a scenario with panel.anisotropic")
    angles = ([float(v) for v in args.angles.split(",")] if args.angles
              else list(an.phi_sweep_deg) or [float(a) for a in range(0, 91, 5)])
    f = args.freq or sc.outputs.readout_hz or 1e9
    n = args.n_terms or sc.panel.n_terms
    solver = _solver(args, sc)

    def point(phi):
        am = measure_anisotropic(sc.anisotropic_panel(phi, n), sc.geometry(), sc.mesh.steps, sc.excitation, solver)
        return am.magnitudes_at(f)

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        mags = list(pool.map(point, angles))
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{sc.name}_angle.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANGLE_HEADER)
        for phi, (r, t) in zip(angles, mags):
            se = -20 * math.log10(t) if t > 0 else math.inf
            w.writerow([_num(phi), _num(f), _num(r), _num(t), _num(_se(se))])
    for phi, (r, t) in zip(angles, mags):
        print(f"phi={phi:6.2f} deg  |R|={r:.6f}  |T|={t:.6e}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    sim = read_sparams_csv(args.sim)
    ref = read_sparams_csv(args.oracle)
    lo, hi = _parse_band(args.band, (max(sim.freqs.min(), ref.freqs.min()), min(sim.freqs.max(), ref.freqs.max())))
    sim, ref = sim.band(lo, hi), ref.band(lo, hi)
    if len(sim.freqs) == 0 or len(ref.freqs) == 0 or sim.freqs.max() < ref.freqs.min() or ref.freqs.max() < sim.freqs.min():
        raise UsageError("frequency grids do not overlap on the requested band")
    if sim.freqs.shape != ref.freqs.shape or not np.allclose(sim.freqs, ref.freqs, rtol=1e-12, atol=0):
        # interpolate the reference onto the simulation grid
        m = (sim.freqs >= ref.freqs.min()) & (sim.freqs <= ref.freqs.max())
        sim = SParams(sim.freqs[m], sim.s11[m], sim.s21[m])
        interp = lambda v: np.interp(sim.freqs, ref.freqs, v.real) + 1j * np.interp(sim.freqs, ref.freqs, v.imag)
        ref = SParams(sim.freqs, interp(ref.s11), interp(ref.s21))
    d11 = np.abs(sim.s11 - ref.s11)
    d21 = np.abs(sim.s21 - ref.s21)
    se_s, se_r = np.minimum(sim.se_db, SE_CAP_DB), np.minimum(ref.se_db, SE_CAP_DB)
    gated = se_r <= args.se_ceiling
    dse = float(np.max(np.abs(se_s - se_r)[gated])) if gated.any() else 0.0
    print(f"band {lo:.6g}-{hi:.6g} Hz, {len(sim.freqs)} points")
    print(f"S11: max |d| = {d11.max():.6e}, mean |d| = {d11.mean():.6e}")
    print(f"S21: max |d| = {d21.max():.6e}, mean |d| = {d21.mean():.6e}")
    print(f"SE:  max |d| = {dse:.6f} dB (where oracle SE <= {args.se_ceiling:g} dB)")
    ok = d11.max() <= args.max_s_dev and d21.max() <= args.max_s_dev
    if args.max_se_dev is not None:
        ok &= dse <= args.max_se_dev
    print("within thresholds" if ok else "OUTSIDE thresholds")
    return EXIT_OK if ok else EXIT_COMPARE


def cmd_validate(args) -> int:
    from .acceptance import run_all

    selected = {int(v) for v in args.only.split(",")} if args.only else None
    checks = run_all(selected)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_COMPARE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfc-tlm", description="1D TLM simulations of thin composite panels.", epilog="exit codes: 0 ok, 1 usage or parse error, 2 solver fault, 3 comparison or validation failure")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True, help="scenario JSON path or shipped scenario name")
            sp.add_argument("--out", help="output directory (default: scenario outputs.directory)")
            sp.add_argument("--band", help="reporting band <min:max> in Hz")
        sp.add_argument("--threads", type=int, default=1)

    s = sub.add_parser("simulate", help="reference + panel run, write S-parameter CSV")
    common(s)
    s.add_argument("--n-terms", type=int)
    s.add_argument("--solver", choices=["gs", "direct"])
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("oracle", help="write analytic S-parameters on the simulation grid")
    common(s)
    s.add_argument("--freqs", help="comma-separated frequencies (Hz) instead of the FFT grid")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sweep-n", help="simulate for several truncation orders")
    common(s)
    s.add_argument("--n-list", help="comma-separated orders (default: scenario panel.n_terms_sweep)")
    s.add_argument("--solver", choices=["gs", "direct"])
    s.set_defaults(func=cmd_sweep_n)

    s = sub.add_parser("sweep-angle", help="polarization-angle sweep of an anisotropic panel")
    common(s)
    s.add_argument("--angles", help="comma-separated angles in degrees")
    s.add_argument("--freq", type=float, help="readout frequency in Hz")
    s.add_argument("--n-terms", type=int)
    s.add_argument("--solver", choices=["gs", "direct"])
    s.set_defaults(func=cmd_sweep_angle)

    s = sub.add_parser("compare", help="compare a simulation CSV with an oracle CSV")
    s.add_argument("--sim", required=True)
    s.add_argument("--oracle", required=True)
    s.add_argument("--band", help="<min:max> in Hz (default: overlap of both grids)")
    s.add_argument("--max-s-dev", type=float, default=0.02)
    s.add_argument("--max-se-dev", type=float, default=None, help="also gate on SE deviation (dB)")
    s.add_argument("--se-ceiling", type=float, default=120.0, help="ignore SE deviations above this oracle SE")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("validate", help="run the acceptance checks")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFault as exc:
        print(f"solver fault: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
