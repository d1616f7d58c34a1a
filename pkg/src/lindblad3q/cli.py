"""Command-line front end.

Every command reads one or more model files, writes its results into
``--out`` together with a normalized copy of each model, and reports
tolerance breaches through the exit status:

    0 success, 1 parse/validation, 2 no steady state, 3 series
    non-convergence, 4 oracle mismatch beyond tolerance.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import kerr, oracle, phasespace
from . import thirdq_boson as tb
from . import thirdq_fermion as tf
from .errors import (CapacityError, DefectiveMatrixError, EnvelopeError, InstabilityError,
                     SeriesNonConvergence, SpecError, U1BreakingError)
from .model import _hash_dict, spec_from_dict, spec_to_dict

EXIT_OK, EXIT_PARSE, EXIT_UNSTABLE, EXIT_SERIES, EXIT_MISMATCH = 0, 1, 2, 3, 4
COMMANDS = ("spectrum", "steady-state", "covariance-evolve", "wigner-evolve",
            "kerr-wigner", "kerr-average", "kerr-propagate", "oracle-check")
CHECKS = ("spectrum", "covariance", "kernel", "wigner")
CONVENTIONS = {
    "generator": "i d(rho)/dt = L rho, evolution exp(-i L t)",
    "phase_space": phasespace.CONVENTION,
    "vectorization": "column stacking, A rho B -> kron(B.T, A)",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- models ------------------------------------------------------------------------

def kerr_to_dict(model):
    return {"kind": "kerr", "omega0": model.omega0, "U": model.U,
            "kappa": model.kappa, "nth": model.nth}


def model_to_dict(model):
    return kerr_to_dict(model) if isinstance(model, kerr.KerrModel) else spec_to_dict(model)


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise SpecError("model file must hold a JSON object")
    if doc.get("kind") == "kerr":
        try:
            return kerr.KerrModel(*(float(doc[k]) for k in ("omega0", "U", "kappa", "nth")))
        except KeyError as exc:
            raise SpecError(f"Kerr model missing field {exc}") from exc
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
    return spec_from_dict(doc)


def model_hash(model):
    return _hash_dict(model_to_dict(model))


def load_any_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc)


def dump_any_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1, sort_keys=True) + "\n")


# -- argument parsing ----------------------------------------------------------------

def parse_times(text):
    """Comma list ``0.1,1,5`` or linspace ``start:stop:count``; must be non-negative ascending."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            times = np.linspace(float(start), float(stop), int(count))
        else:
            times = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise UsageError(f"bad time list {text!r}") from exc
    if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise UsageError("times must be a non-empty, non-negative, ascending list")
    return [float(t) for t in times]


def parse_grid(text):
    try:
        extent, resolution = text.split(":")
        extent, resolution = float(extent), int(resolution)
    except ValueError as exc:
        raise UsageError(f"grid must be extent:resolution, got {text!r}") from exc
    if extent <= 0 or resolution < 2:
        raise UsageError("grid needs extent > 0 and resolution >= 2")
    return extent, resolution


def parse_complex_list(text):
    try:
        return [complex(v.replace(" ", "")) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad complex list {text!r}") from exc


def build_parser():
    parser = _Parser(prog="lindblad3q", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("check", nargs="?", choices=CHECKS, help="comparison run by oracle-check")
    parser.add_argument("--model", action="append", required=True,
                        help="model JSON file; repeat for multi-panel Kerr runs")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--t", default=None, help="times: comma list or start:stop:count")
    parser.add_argument("--grid", default=f"{phasespace.DEFAULT_EXTENT:g}:{phasespace.DEFAULT_RESOLUTION}",
                        help="phase-space grid extent:resolution")
    parser.add_argument("--lmax", type=int, default=kerr.DEFAULT_CONTROL.l_max)
    parser.add_argument("--term-tol", type=float, default=kerr.DEFAULT_CONTROL.term_tol)
    parser.add_argument("--cutoff", type=int, default=None, help="oracle Fock cutoff per mode")
    parser.add_argument("--check-tol", type=float, default=1e-6)
    parser.add_argument("--statistics", choices=("boson", "fermion"), default=None,
                        help="assert the statistics declared in the model file")
    parser.add_argument("--alpha0", default=None, help="coherent amplitude(s), sqrt2-scaled, e.g. 1.4+1.4j")
    parser.add_argument("--fock", type=int, default=None, help="start from the Fock state |n><n|")
    parser.add_argument("--initial", default=None, help="initial Wigner grid CSV (kerr-propagate)")
    parser.add_argument("--max-excitations", type=int, default=2)
    parser.add_argument("--include-initial", action="store_true",
                        help="kerr-wigner: add the t = 0 panel")
    return parser


# -- output helpers ----------------------------------------------------------------

def _thread_count():
    try:
        return max(1, int(os.environ.get("LINDBLAD3Q_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(func, items):
    items = list(items)
    workers = min(_thread_count(), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _metadata(ctx, **extra):
    meta = {"tool": "lindblad3q", "command": ctx.command, "model_hash": [model_hash(m) for m in ctx.models],
            "conventions": CONVENTIONS,
            "tolerances": {"l_max": ctx.ctrl.l_max, "term_tol": ctx.ctrl.term_tol, "check_tol": ctx.check_tol}}
    meta.update(extra)
    return meta


def _cjson(z):
    return [float(np.real(z)), float(np.imag(z))]


def _mjson(mat):
    return [[_cjson(z) for z in row] for row in np.asarray(mat)]


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _grid_header(ctx, model, t, **extra):
    header = {"model_hash": model_hash(model), "t": repr(t), "generator": CONVENTIONS["generator"],
              "l_max": ctx.ctrl.l_max, "term_tol": ctx.ctrl.term_tol}
    header.update(extra)
    return header


def _tag(t):
    return f"{t:.6g}".replace(".", "p").replace("-", "m")


def emit_plot_script(path, panels, image=None):
    """Gnuplot script showing each ``(csv_name, title)`` panel as a heatmap.

    Four panels are laid out 2 x 2; other counts go in one row.
    """
    if not panels:
        raise ValueError("no grids to plot")
    for name, _ in panels:
        if not (Path(path).parent / name).exists():
            raise FileNotFoundError(f"missing grid file {name}")
    rows, cols = (2, 2) if len(panels) == 4 else (1, len(panels))
    image = image or Path(path).with_suffix(".png").name
    lines = [
        f"set terminal pngcairo size {450 * cols},{420 * rows}",
        f"set output '{image}'",
        "set datafile separator ','",
        "set key autotitle columnheader",
        "set size ratio -1",
        "set xlabel 'Re alpha'",
        "set ylabel 'Im alpha'",
        "set palette defined (-1 'blue', 0 'white', 1 'red')",
        "set cbrange [-2:2]",  # |W| <= 2 for any state, so zero sits at white
        f"set multiplot layout {rows},{cols}",
    ]
    for name, title in panels:
        lines += [f"set title '{title}'", f"plot '{name}' using 1:2:3 with image notitle"]
    lines.append("unset multiplot")
    Path(path).write_text("\n".join(lines) + "\n")


def emit_line_plot_script(path, data_name, titles, image=None):
    """Gnuplot line plot of scaled |<a(t)>| against U t, one curve per data block."""
    image = image or Path(path).with_suffix(".png").name
    lines = [
        "set terminal pngcairo size 700,450",
        f"set output '{image}'",
        "set datafile separator ','",
        "set xlabel 'U t'",
        "set ylabel '|<a(t)>| / |<a(0)>|'",
        "set key top right",
    ]
    plots = [f"'{data_name}' index {i} using 2:5 with lines title '{title}'" for i, title in enumerate(titles)]
    lines.append("plot " + ", \\\n     ".join(plots))
    Path(path).write_text("\n".join(lines) + "\n")


# -- commands ----------------------------------------------------------------------

class Context:
    def __init__(self, args):
        self.command = args.command
        self.args = args
        self.out = Path(args.out)
        self.models = [load_any_model(p) for p in args.model]
        self.model_paths = args.model
        self.ctrl = kerr.SeriesControl(args.lmax, args.term_tol) if args.lmax >= 0 and args.term_tol > 0 else None
        if self.ctrl is None:
            raise UsageError("need --lmax >= 0 and --term-tol > 0")
        self.check_tol = args.check_tol
        self.extent, self.resolution = parse_grid(args.grid)
        self.times = parse_times(args.t) if args.t is not None else None
        if args.statistics is not None:
            for m in self.models:
                if isinstance(m, kerr.KerrModel) or m.statistics != args.statistics:
                    raise SpecError(f"model is not a {args.statistics} quadratic spec")

    def single(self):
        if len(self.models) != 1:
            raise UsageError(f"{self.command} takes exactly one --model")
        return self.models[0]

    def quadratic(self):
        m = self.single()
        if isinstance(m, kerr.KerrModel):
            raise SpecError(f"{self.command} needs a quadratic model, got a Kerr model")
        return m

    def kerr_models(self):
        for m in self.models:
            if not isinstance(m, kerr.KerrModel):
                raise SpecError(f"{self.command} needs Kerr models")
        return self.models

    def need_times(self):
        if self.times is None:
            raise UsageError(f"{self.command} needs --t")
        return self.times

    def grid(self):
        return phasespace.make_grid(self.extent, self.resolution)


def _spectral(spec):
    if spec.statistics == "boson":
        tq = tb.third_quantize(spec)
        return tq, tb.spectral_data(tq)
    tq = tf.third_quantize_fermion(spec)
    return tq, tf.fermion_spectral_data(tq)


def _spectrum_entries(spec, sd, max_excitations):
    if spec.statistics == "boson":
        return tb.enumerate_spectrum(sd.E, max_excitations)
    return tf.fermion_spectrum(sd.E, max_excitations)


def cmd_spectrum(ctx):
    spec = ctx.quadratic()
    _, sd = _spectral(spec)
    entries = _spectrum_entries(spec, sd, ctx.args.max_excitations)
    doc = {"metadata": _metadata(ctx, max_excitations=ctx.args.max_excitations,
                                 eigenbasis_condition=sd.condition),
           "single_particle": [_cjson(e) for e in sd.E],
           "spectrum": [{"mu": list(mu), "nu": list(nu), "re": float(e.real), "im": float(e.imag)}
                        for (mu, nu), e in entries]}
    _write_json(ctx.out / "spectrum.json", doc)
    return EXIT_OK


def cmd_steady_state(ctx):
    spec = ctx.quadratic()
    _, sd = _spectral(spec)
    key = "S_ss" if spec.statistics == "boson" else "A_ss"
    cov = sd.S_ss if spec.statistics == "boson" else sd.A_ss
    doc = {"metadata": _metadata(ctx), key: _mjson(cov),
           "eigenvalues": [float(v) for v in np.linalg.eigvalsh(cov)]}
    _write_json(ctx.out / "steady_state.json", doc)
    return EXIT_OK


def _evolve_cov(spec, t):
    """Covariance at time t starting from the vacuum (identity for both statistics)."""
    start = np.eye(spec.modes, dtype=complex)
    if spec.statistics == "boson":
        return tb.evolve_covariance(tb.third_quantize(spec), start, t)
    return tf.evolve_anticovariance(tf.third_quantize_fermion(spec), start, t)


def cmd_covariance_evolve(ctx):
    spec = ctx.quadratic()
    times = ctx.need_times()
    covs = _parallel_map(lambda t: _evolve_cov(spec, t), times)
    doc = {"metadata": _metadata(ctx, initial_state="vacuum"),
           "times": times, "covariance": [_mjson(c) for c in covs]}
    _write_json(ctx.out / "covariance.json", doc)
    return EXIT_OK


def _damped_params(spec):
    if spec.statistics != "boson" or spec.modes != 1 or not spec.is_u1_symmetric:
        raise SpecError("phase-space evolution needs a single-mode bosonic model without pairing")
    kappa = float((spec.L - spec.P)[0, 0].real)
    if kappa <= 0:
        raise InstabilityError("loss must exceed pump for a damped oscillator")
    return phasespace.DampedOscillatorParams(float(spec.H[0, 0].real), kappa, float(spec.P[0, 0].real) / kappa)


def _initial_values(ctx, points):
    if ctx.args.fock is not None:
        return phasespace.wigner_of_fock_diagonal(ctx.args.fock, points)
    alpha0 = parse_complex_list(ctx.args.alpha0)[0] if ctx.args.alpha0 else 0j
    return phasespace.coherent_wigner(alpha0, points)


def _check_norm(grid):
    drift = abs(grid.integral() - 1)
    if drift > 1e-6:
        raise EnvelopeError(f"grid normalization off by {drift:.1e}; enlarge --grid")


def cmd_wigner_evolve(ctx):
    spec = ctx.quadratic()
    params = _damped_params(spec)
    grid0 = ctx.grid()
    grid0 = grid0.with_values(_initial_values(ctx, grid0.points).astype(complex))
    grids = _parallel_map(lambda t: phasespace.evolve_wigner_damped(params, grid0, t), ctx.need_times())
    panels = []
    for t, g in zip(ctx.times, grids):
        _check_norm(g)
        name = f"wigner_t{_tag(t)}.csv"
        phasespace.write_grid_csv(ctx.out / name, g, _grid_header(ctx, spec, t))
        panels.append((name, f"t = {t:.4g}"))
    emit_plot_script(ctx.out / "wigner.gp", panels)
    return EXIT_OK


def cmd_kerr_wigner(ctx):
    models = ctx.kerr_models()
    alpha0 = parse_complex_list(ctx.args.alpha0)[0] if ctx.args.alpha0 else np.sqrt(2) * (1 + 1j)
    grid = ctx.grid()
    tasks = []
    if ctx.args.include_initial:
        tasks.append((0, models[0], 0.0))
    tasks += [(i, m, t) for i, m in enumerate(models) for t in ctx.need_times()]

    def run(task):
        _, m, t = task
        values, tail = kerr.kerr_wigner_coherent(m, grid.points, alpha0, t, ctx.ctrl, full_output=True)
        return grid.with_values(np.asarray(values, dtype=complex)), tail

    results = _parallel_map(run, tasks)
    panels = []
    for (i, m, t), (g, tail) in zip(tasks, results):
        name = f"kerr_wigner_m{i}_t{_tag(t)}.csv"
        phasespace.write_grid_csv(ctx.out / name, g,
                                  _grid_header(ctx, m, t, alpha0=repr(complex(alpha0)), series_tail=f"{tail:.3e}"))
        panels.append((name, f"kappa/U = {m.kappa / m.U:.3g}, nth = {m.nth:.3g}, Ut = {m.U * t:.4g}"
                       if m.U else f"t = {t:.4g}"))
    emit_plot_script(ctx.out / "kerr_wigner.gp", panels)
    return EXIT_OK


def cmd_kerr_average(ctx):
    models = ctx.kerr_models()
    alphas = parse_complex_list(ctx.args.alpha0) if ctx.args.alpha0 else [2.0 + 0j]
    times = ctx.need_times()
    blocks, titles = [], []
    for m in models:
        for a0 in alphas:
            values = kerr.kerr_average_a(m, a0, np.array(times), ctx.ctrl)
            scale = abs(a0) / np.sqrt(2)
            rows = [f"# nth = {m.nth!r}, alpha0 = {a0!r}"]
            for t, v in zip(times, values):
                scaled = abs(v) / scale if scale else 0.0
                rows.append(",".join(repr(float(x)) for x in (t, m.U * t, v.real, v.imag, scaled)))
            blocks.append("\n".join(rows))
            titles.append(f"nth = {m.nth:g}, |alpha0| = {abs(a0):g}")
    header = [f"# model_hash: {','.join(model_hash(m) for m in models)}",
              f"# generator: {CONVENTIONS['generator']}",
              "# columns: t, U t, re <a>, im <a>, |<a(t)>| / |<a(0)>|"]
    (ctx.out / "kerr_average.csv").write_text("\n".join(header) + "\n" + "\n\n\n".join(blocks) + "\n")
    emit_line_plot_script(ctx.out / "kerr_average.gp", "kerr_average.csv", titles)
    return EXIT_OK


def cmd_kerr_propagate(ctx):
    m = ctx.kerr_models()[0] if len(ctx.models) == 1 else ctx.single()
    if ctx.args.initial:
        grid0 = phasespace.read_grid_csv(ctx.args.initial)
    else:
        grid0 = ctx.grid()
        grid0 = grid0.with_values(_initial_values(ctx, grid0.points).astype(complex))
    grids = _parallel_map(lambda t: kerr.evolve_wigner_grid(m, grid0, t, ctx.ctrl), ctx.need_times())
    panels = []
    for t, g in zip(ctx.times, grids):
        name = f"kerr_propagate_t{_tag(t)}.csv"
        phasespace.write_grid_csv(ctx.out / name, g, _grid_header(ctx, m, t))
        panels.append((name, f"t = {t:.4g}"))
    emit_plot_script(ctx.out / "kerr_propagate.gp", panels)
    return EXIT_OK


# -- oracle comparisons ----------------------------------------------------------------

def _cutoff(ctx, default):
    return ctx.args.cutoff if ctx.args.cutoff is not None else default


def _nearest_gap(a, b):
    return float(np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :]).min(axis=1).max())


def check_spectrum(ctx, spec):
    _, sd = _spectral(spec)
    if spec.statistics == "fermion":
        ana = np.array([e for _, e in tf.fermion_spectrum(sd.E)])
        num = oracle.liouvillian_spectrum(oracle.build_fermion_liouvillian(spec))
        cost = np.abs(ana[:, None] - num[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max()), {"compared": int(ana.size)}
    N_c = _cutoff(ctx, 30 if spec.modes == 1 else 6)
    num = oracle.liouvillian_spectrum(oracle.build_boson_liouvillian(spec, (N_c,) * spec.modes, cap=None))
    lattice = np.array([e for _, e in tb.enumerate_spectrum(sd.E, 6)])
    ana10 = lattice[:10]
    num10 = num[np.lexsort((num.real, np.abs(num.imag)))][:10]
    err = max(_nearest_gap(ana10, num), _nearest_gap(num10, lattice))
    return err, {"compared": 10, "cutoff": N_c}


def check_covariance(ctx, spec):
    times = ctx.times or [0.1, 1.0, 5.0]
    if spec.statistics == "fermion":
        liou = oracle.build_fermion_liouvillian(spec)
        vac = np.zeros((liou.D, liou.D), complex)
        vac[0, 0] = 1
        rhos = oracle.evolve_density(liou, vac, times)
        errs = [np.abs(oracle.antisymmetric_covariance(r, spec.modes) - _evolve_cov(spec, t)).max()
                for t, r in zip(times, rhos)]
        return float(max(errs)), {"times": times}
    N_c = _cutoff(ctx, 25 if spec.modes <= 2 else 8)
    dims = (N_c,) * spec.modes
    liou = oracle.build_boson_liouvillian(spec, dims, cap=None)
    vac = np.zeros((liou.D, liou.D), complex)
    vac[0, 0] = 1
    rhos = oracle.evolve_density(liou, vac, times)
    errs = [np.abs(oracle.symmetric_covariance(r, dims) - _evolve_cov(spec, t)).max()
            for t, r in zip(times, rhos)]
    return float(max(errs)), {"times": times, "cutoff": N_c}


def _sample_points(count, modes, radius, seed=0):
    rng = np.random.default_rng(seed)
    def draw():
        return radius * rng.uniform(0, 1, (count, modes)) * np.exp(2j * np.pi * rng.uniform(0, 1, (count, modes)))
    return draw(), draw()


def _kerr_oracle_state(ctx, m, t, alpha0):
    N_c = _cutoff(ctx, 60)
    liou = oracle.build_boson_liouvillian(m, N_c, cap=None)
    return oracle.evolve_density(liou, oracle.coherent_state(alpha0 / np.sqrt(2), N_c), t)


def check_kernel(ctx, model):
    times = ctx.times or [1.0]
    if isinstance(model, kerr.KerrModel):
        alpha0 = parse_complex_list(ctx.args.alpha0)[0] if ctx.args.alpha0 else np.sqrt(2) * (1 + 1j)
        etas = ctx.grid().points[::8, ::8]
        errs = []
        for t in times:
            rho = _kerr_oracle_state(ctx, model, t, alpha0)
            errs.append(np.abs(kerr.kerr_characteristic_coherent(model, etas, alpha0, t, ctx.ctrl)
                               - oracle.characteristic_numeric(rho, etas)).max())
        return float(max(errs)), {"times": times, "quantity": "characteristic function of evolved coherent state"}
    if model.statistics != "boson":
        raise SpecError("kernel check supports bosonic models")
    tq = tb.third_quantize(model)
    N_c = _cutoff(ctx, 40 if model.modes == 1 else 20)
    liou = oracle.build_boson_liouvillian(model, (N_c,) * model.modes, cap=None)
    etas, alphas = _sample_points(5, model.modes, 0.8)
    errs = []
    for t in times:
        for eta, alpha in zip(etas, alphas):
            errs.append(abs(oracle.kernel_numeric(liou, eta, alpha, t) - tb.gaussian_kernel(tq, eta, alpha, t)))
    return float(max(errs)), {"times": times, "points": 5, "cutoff": N_c}


def check_wigner(ctx, model):
    times = ctx.times or [1.0]
    grid = ctx.grid()
    alpha0 = parse_complex_list(ctx.args.alpha0)[0] if ctx.args.alpha0 else (
        np.sqrt(2) * (1 + 1j) if isinstance(model, kerr.KerrModel) else 1.0 + 0j)
    errs = []
    if isinstance(model, kerr.KerrModel):
        for t in times:
            rho = _kerr_oracle_state(ctx, model, t, alpha0)
            errs.append(np.abs(kerr.kerr_wigner_coherent(model, grid.points, alpha0, t, ctx.ctrl)
                               - oracle.wigner_numeric(rho, grid.points)).max())
        return float(max(errs)), {"times": times, "alpha0": _cjson(alpha0)}
    params = _damped_params(model)
    N_c = _cutoff(ctx, 40)
    liou = oracle.build_boson_liouvillian(model, N_c)
    grid0 = grid.with_values(phasespace.coherent_wigner(alpha0, grid.points).astype(complex))
    for t in times:
        rho = oracle.evolve_density(liou, oracle.coherent_state(alpha0 / np.sqrt(2), N_c), t)
        ana = phasespace.evolve_wigner_damped(params, grid0, t).values.real
        errs.append(np.abs(ana - oracle.wigner_numeric(rho, grid.points)).max())
    return float(max(errs)), {"times": times, "alpha0": _cjson(alpha0), "cutoff": N_c}


def cmd_oracle_check(ctx):
    kind = ctx.args.check
    if kind is None:
        raise UsageError(f"oracle-check needs one of {', '.join(CHECKS)}")
    model = ctx.single()
    if kind in ("spectrum", "covariance") and isinstance(model, kerr.KerrModel):
        raise SpecError(f"{kind} check needs a quadratic model")
    runner = {"spectrum": check_spectrum, "covariance": check_covariance,
              "kernel": check_kernel, "wigner": check_wigner}[kind]
    err, details = runner(ctx, model)
    passed = bool(err < ctx.check_tol)
    doc = {"metadata": _metadata(ctx, check=kind), "max_abs_err": err,
           "tolerance": ctx.check_tol, "pass": passed, "details": details}
    _write_json(ctx.out / f"oracle_check_{kind}.json", doc)
    print(json.dumps({"check": kind, "max_abs_err": err, "tolerance": ctx.check_tol, "pass": passed}))
    return EXIT_OK if passed else EXIT_MISMATCH


HANDLERS = {"spectrum": cmd_spectrum, "steady-state": cmd_steady_state,
            "covariance-evolve": cmd_covariance_evolve, "wigner-evolve": cmd_wigner_evolve,
            "kerr-wigner": cmd_kerr_wigner, "kerr-average": cmd_kerr_average,
            "kerr-propagate": cmd_kerr_propagate, "oracle-check": cmd_oracle_check}


def run(argv=None):
    """Parse ``argv``, run one command and return its exit status."""
    try:
        args = build_parser().parse_args(argv)
        ctx = Context(args)
        ctx.out.mkdir(parents=True, exist_ok=True)
        for i, m in enumerate(ctx.models):
            dump_any_model(m, ctx.out / ("model.json" if len(ctx.models) == 1 else f"model_{i}.json"))
        return HANDLERS[args.command](ctx)
    except (UsageError, SpecError, U1BreakingError, CapacityError, EnvelopeError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InstabilityError, DefectiveMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except SeriesNonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SERIES


def main(argv=None):
    sys.exit(run(argv))
