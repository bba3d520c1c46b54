"""Command-line experiment runner.

    frictionlab {drag,simulate,clamp,fgr,spectrum} [--config FILE] [--out DIR]
                [--set section.key=value ...] [--preset NAME]

Configuration files are INI-style with sections [model], [grid] and [run].
Every key has a default (see ``DEFAULTS``); unknown sections or keys are
rejected. Exit codes: 0 success, 2 configuration error, 3 numerical failure.
The thread count for parameter sweeps is read from FRICTIONLAB_THREADS.
"""

import argparse
import configparser
import io
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .classical import ModeGrid, SimulationConfig, measure_drag_clamped, run
from .drag import drag_curve, exponent_for_mu, gamma_alpha, drag_magnitude
from .errors import ConfigError, NumericalError
from .fgr import fgr_curve
from .fock import (
    FockBasis, SingleBosonGrid, assemble_H, flatness_probe, ir_ground_state_probe,
    lowest_eigenpair, mourre_check, pt2_energy, spectral_report,
)
from .formfactor import FormFactorModel, RadialProfile
from .output import svg_line_plot, write_csv, write_manifest
from .quadrature import QuadratureGrid

# (type, default); lists are comma separated
DEFAULTS = {
    "model": {
        "rho1": (str, "gaussian"), "rho1_scale": (float, 1.0), "rho1_amplitude": (float, 1.0),
        "rho2": (str, "gaussian"), "rho2_scale": (float, 1.0), "rho2_amplitude": (float, 1.0),
        "mu": (float, 0.0), "mu_list": ("floats", "0.0"), "g": (float, 1.0),
        "d": (int, 1), "m": (float, 1.0),
    },
    "grid": {
        "n_nodes": (int, 256), "quad_tol": (float, 1e-9), "cutoff": (float, 12.0),
        "k_min": (float, 1e-4), "k_max": (float, 6.0), "n_k": (int, 240), "k_ratio": (float, 0.0),
        "k_switch": (float, 0.0), "k_step": (float, 0.0),
        "xi_max": (float, 6.0), "n_xi": (int, 120),
        "fock_k_min": (float, 0.05), "fock_k_max": (float, 6.0), "fock_ratio": (float, 1.5),
        "fock_xi_step": (float, 0.5), "fock_xi_max": (float, 4.0), "dimension_cap": (int, 600000),
    },
    "run": {
        "dt": (float, 0.02), "T": (float, 100.0), "v0": (float, 0.5), "q0": (float, 0.0),
        "initial": (str, "static"), "sample_every": (int, 50),
        "v_min": (float, 1e-3), "v_max": (float, 1.0), "n_v": (int, 41),
        "fit_lo": (float, 1e-3), "fit_hi": (float, 1e-2),
        "v": (float, 0.3), "settle_tol": (float, 0.01),
        "P_max": (float, 4.0), "n_P": (int, 33), "fgr_method": (str, "delta"),
        "P": (float, 0.0), "P_list": ("floats", "0.5,1.0"), "n_max": (int, 2), "eig_tol": (float, 1e-10),
        "probes": ("strs", "ground,flatness,ir,mourre"),
        "flatness_levels": (int, 4), "flatness_g": (float, 0.2),
        "flatness_k_min_hi": (float, 0.2), "flatness_xi_max_lo": (float, 2.0),
        "ir_mu_list": ("floats", "-0.75,-0.5,0.0"), "ir_g": (float, 1e-6),
        "ir_k_min_hi": (float, 2.0**-6), "ir_levels": (int, 8),
        "mourre_mu": (float, 1.0), "mourre_g": (float, 0.1),
    },
}

PRESETS = {
    # mu = 0 friction demonstration on a graded grid
    "friction-demo": {
        "model.mu": "0.0", "model.g": "0.3", "grid.k_min": "1e-4", "grid.k_ratio": "1.05",
        "grid.k_switch": "0.2", "grid.k_step": "0.01",
        "grid.k_max": "4.5", "grid.xi_max": "4.5", "grid.n_xi": "120",
        "run.dt": "0.1", "run.T": "400", "run.sample_every": "10",
    },
}

SUBCOMMANDS = ("drag", "simulate", "clamp", "fgr", "spectrum")


def _convert(kind, raw, where):
    try:
        if kind == "floats":
            vals = [float(s) for s in raw.split(",") if s.strip()]
            return vals
        if kind == "strs":
            return [s.strip() for s in raw.split(",") if s.strip()]
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {where}: {raw!r}") from exc


def load_config(path=None, overrides=(), preset=None):
    """Resolve defaults, preset, file and ``section.key=value`` overrides."""
    raw = {s: {k: str(v[1]) for k, v in keys.items()} for s, keys in DEFAULTS.items()}

    def put(section, key, value, origin):
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}] ({origin})")
        if key not in DEFAULTS[section]:
            raise ConfigError(f"unknown config key {section}.{key} ({origin})")
        raw[section][key] = value

    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        for dotted, value in PRESETS[preset].items():
            put(*dotted.split("."), value, f"preset {preset}")
    if path:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for section in cp.sections():
            for key, value in cp.items(section):
                put(section, key, value, path)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        section, key = dotted.strip().split(".", 1)
        put(section, key, value.strip(), "--set")
    cfg = {s: {k: _convert(DEFAULTS[s][k][0], v, f"{s}.{k}") for k, v in keys.items()} for s, keys in raw.items()}
    return cfg, raw


def config_text(raw):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for s in raw:
        cp[s] = raw[s]
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def build_model(cfg, **changes):
    m = cfg["model"]
    try:
        model = FormFactorModel(
            rho1_hat=RadialProfile(m["rho1"], m["rho1_scale"], m["rho1_amplitude"]),
            rho2_hat=RadialProfile(m["rho2"], m["rho2_scale"], m["rho2_amplitude"]),
            mu=m["mu"], d=m["d"], m=m["m"], g=m["g"],
        )
        return model.replace(**changes) if changes else model
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_quadrature(cfg):
    g = cfg["grid"]
    return QuadratureGrid(g["n_nodes"], g["quad_tol"], g["cutoff"])


def build_mode_grid(cfg):
    g = cfg["grid"]
    try:
        if g["k_ratio"] > 1.0 and g["k_switch"] > 0.0:
            # geometric cells below k_switch, uniform cells of width k_step above
            if g["k_step"] <= 0.0:
                raise ConfigError("grid.k_step must be positive when grid.k_switch is set")
            return ModeGrid.graded(g["k_min"], g["k_switch"], g["k_ratio"], g["k_step"], g["k_max"],
                                   g["xi_max"], g["n_xi"])
        if g["k_ratio"] > 1.0:
            n = int(np.ceil(np.log(g["k_max"] / g["k_min"]) / np.log(g["k_ratio"])))
            return ModeGrid.from_edges(np.geomspace(g["k_min"], g["k_max"], n + 1), g["xi_max"], g["n_xi"])
        return ModeGrid.uniform(g["k_max"], g["n_k"], g["xi_max"], g["n_xi"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_fock_grid(cfg, k_min=None, xi_max=None):
    g = cfg["grid"]
    try:
        return SingleBosonGrid.log_grid(
            k_min=g["fock_k_min"] if k_min is None else k_min, k_max=g["fock_k_max"],
            ratio=g["fock_ratio"], xi_step=g["fock_xi_step"],
            xi_max=g["fock_xi_max"] if xi_max is None else xi_max,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _threads():
    try:
        return max(1, int(os.environ.get("FRICTIONLAB_THREADS", "1")))
    except ValueError:
        raise ConfigError("FRICTIONLAB_THREADS must be an integer")


def _pmap(fn, items):
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(n) as ex:
        return list(ex.map(fn, items))


# subcommands ---------------------------------------------------------------

def cmd_drag(cfg, out):
    r = cfg["run"]
    mus = cfg["model"]["mu_list"]
    if not mus:
        raise ConfigError("model.mu_list is empty")
    if not (0 < r["v_min"] < r["v_max"]) or r["n_v"] < 2:
        raise ConfigError("need 0 < v_min < v_max and n_v >= 2")
    quad = build_quadrature(cfg)
    v = np.geomspace(r["v_min"], r["v_max"], r["n_v"])
    window = (r["fit_lo"], r["fit_hi"])

    def one(mu):
        model = build_model(cfg, mu=mu)
        return model, drag_curve(model, v, window, quad)

    results = _pmap(one, mus)
    curve_rows, fit_rows, series = [], [], []
    for model, c in results:
        curve_rows += [(x, f, c.mu) for x, f in zip(c.velocities, c.magnitudes)]
        fit_rows.append((c.mu, c.fit_exponent, c.fit_coefficient, exponent_for_mu(c.mu),
                         gamma_alpha(model, quad), window[0], window[1]))
        series.append((f"mu={c.mu:g}", c.velocities, c.magnitudes))
    return [
        write_csv(os.path.join(out, "drag_curve.csv"), ["v", "f_r", "mu"], curve_rows),
        write_csv(os.path.join(out, "drag_fit.csv"),
                  ["mu", "exponent", "coefficient", "expected_exponent", "gamma_alpha", "fit_lo", "fit_hi"], fit_rows),
        svg_line_plot(os.path.join(out, "drag.svg"), series, "drag magnitude", "v", "f_r", True, True),
    ]


def _simulation_config(cfg):
    r = cfg["run"]
    if r["dt"] <= 0 or r["T"] <= 0:
        raise ConfigError("run.dt and run.T must be positive")
    model = build_model(cfg)
    if model.d != 1:
        raise ConfigError("simulation requires model.d = 1")
    try:
        return SimulationConfig(model, build_mode_grid(cfg), r["dt"], r["T"], r["v0"], r["q0"],
                                r["initial"], r["sample_every"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(cfg, out):
    sc = _simulation_config(cfg)
    rec = run(sc)
    cols = rec.columns()
    names = list(cols)
    rows = list(zip(*[cols[n] for n in names]))
    e0 = rec.energy[0]
    e_drift = float(np.max(np.abs(rec.energy - e0)))
    rel = e_drift / abs(e0) if e0 != 0 else e_drift
    p_drift = float(np.max(np.abs(rec.momentum - rec.momentum[0])))
    f_drift = float(np.max(np.abs(rec.field_energy - rec.field_energy[0])))
    cons = [("energy_drift_abs", e_drift), ("energy_drift_rel", rel), ("momentum_drift_abs", p_drift),
            ("field_energy_drift_abs", f_drift), ("final_q", rec.q[-1]), ("final_p", rec.p[-1])]
    return [
        write_csv(os.path.join(out, "trajectory.csv"), names, rows),
        write_csv(os.path.join(out, "conservation.csv"), ["quantity", "value"], cons),
        svg_line_plot(os.path.join(out, "trajectory.svg"),
                      [("q(t)", rec.t, rec.q), ("p(t)", rec.t, rec.p)], "trajectory", "t", ""),
    ]


def cmd_clamp(cfg, out):
    r = cfg["run"]
    if r["v"] == 0:
        raise ConfigError("run.v must be nonzero")
    if r["dt"] <= 0 or r["T"] <= 0:
        raise ConfigError("run.dt and run.T must be positive")
    model = build_model(cfg)
    grid = build_mode_grid(cfg)
    force = measure_drag_clamped(r["v"], model, grid, r["T"], r["dt"], r["settle_tol"])
    ref = -np.sign(r["v"]) * model.g**2 * drag_magnitude(abs(r["v"]), model, build_quadrature(cfg))
    rows = [(r["v"], force, ref, force / ref - 1.0, grid.shape[0], grid.shape[1])]
    return [write_csv(os.path.join(out, "clamp.csv"),
                      ["v", "measured_force", "kernel_force", "relative_difference", "n_k", "n_xi"], rows)]


def cmd_fgr(cfg, out):
    r = cfg["run"]
    mus = cfg["model"]["mu_list"]
    if not mus:
        raise ConfigError("model.mu_list is empty")
    if r["fgr_method"] not in ("delta", "lorentzian"):
        raise ConfigError("run.fgr_method must be 'delta' or 'lorentzian'")
    if r["P_max"] <= 0 or r["n_P"] < 2:
        raise ConfigError("need P_max > 0 and n_P >= 2")
    P = np.linspace(0.0, r["P_max"], r["n_P"])
    quad = build_quadrature(cfg)
    curves = _pmap(lambda mu: fgr_curve(P, build_model(cfg, mu=mu), r["fgr_method"], quad), mus)
    rows, series = [], []
    for c in curves:
        rows += [(p, v, c.mu, c.d, c.method) for p, v in zip(c.P, c.c)]
        series.append((f"mu={c.mu:g}", c.P, c.c))
    return [
        write_csv(os.path.join(out, "fgr.csv"), ["P", "c", "mu", "d", "method"], rows),
        svg_line_plot(os.path.join(out, "fgr.svg"), series, "Fermi Golden Rule rate", "|P|", "c(P)"),
    ]


def cmd_spectrum(cfg, out):
    r, g = cfg["run"], cfg["grid"]
    probes = set(r["probes"])
    unknown = probes - {"ground", "flatness", "ir", "mourre"}
    if unknown:
        raise ConfigError(f"unknown probes {sorted(unknown)}")
    if r["n_max"] < 1:
        raise ConfigError("run.n_max must be >= 1")
    model = build_model(cfg)
    if model.d != 1:
        raise ConfigError("spectrum requires model.d = 1")
    files = []
    if "ground" in probes:
        grid = build_fock_grid(cfg)
        basis = FockBasis(grid.n_modes, r["n_max"], g["dimension_cap"])
        res = lowest_eigenpair(assemble_H(r["P"], model, grid, r["n_max"], basis), r["eig_tol"])
        rep = spectral_report(res, basis)
        pt = pt2_energy(r["P"], model, grid)
        row = [r["P"], model.g, rep.energy, pt.real, pt.imag, pt.n_excluded, rep.residual,
               rep.vacuum_overlap, rep.mean_number] + list(rep.sector_norms)
        head = ["P", "g", "E", "E2_real", "E2_imag", "E2_excluded", "residual", "vacuum_overlap", "mean_N"]
        head += [f"sector_{n}" for n in range(len(rep.sector_norms))]
        files.append(write_csv(os.path.join(out, "spectrum.csv"), head, [row]))
    if "flatness" in probes:
        levels = r["flatness_levels"]
        if levels < 2:
            raise ConfigError("run.flatness_levels must be >= 2")
        # ratio 2 keeps coarser grids nested inside finer ones
        try:
            grids = [SingleBosonGrid.log_grid(r["flatness_k_min_hi"] * 2.0**-i, g["fock_k_max"], 2.0,
                                              g["fock_xi_step"], r["flatness_xi_max_lo"] + i)
                     for i in range(levels)]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        fm = model.replace(g=r["flatness_g"])
        rows = flatness_probe([0.0] + list(r["P_list"]), fm, grids, r["n_max"], r["eig_tol"])
        files.append(write_csv(os.path.join(out, "flatness.csv"),
                               ["level", "P", "k_min", "xi_max", "E_P", "E_0", "gap"], rows))
    if "ir" in probes:
        kl = [r["ir_k_min_hi"] * 4.0**-i for i in range(r["ir_levels"])]
        rows, fits = ir_ground_state_probe(r["ir_mu_list"], kl, model.replace(g=r["ir_g"]))
        files.append(write_csv(os.path.join(out, "ir_probe.csv"), ["mu", "k_min", "amplitude_norm", "pt_sum"],
                               [(x.mu, x.k_min, x.amplitude_norm, x.pt_sum) for x in rows]))
        files.append(write_csv(os.path.join(out, "ir_fit.csv"),
                               ["mu", "loglog_exponent", "expected_exponent", "log_r2", "max_ratio"],
                               [(mu, f["slope"], 2 * mu + 1, f["log_r2"], f["max_ratio"]) for mu, f in fits.items()]))
    if "mourre" in probes:
        mm = model.replace(mu=r["mourre_mu"])
        rep = mourre_check(mm, build_fock_grid(cfg), r["n_max"], r["mourre_g"])
        files.append(write_csv(os.path.join(out, "mourre.csv"),
                               ["mu", "g", "norm_ah0", "c0", "C", "lambda_min", "margin", "holds"],
                               [(mm.mu, rep.g, rep.norm_ah0, rep.c0, rep.C, rep.lambda_min, rep.margin, rep.holds)]))
    return files


COMMANDS = {"drag": cmd_drag, "simulate": cmd_simulate, "clamp": cmd_clamp, "fgr": cmd_fgr, "spectrum": cmd_spectrum}


def build_parser():
    p = argparse.ArgumentParser(prog="frictionlab", description="Hamiltonian friction experiments")
    p.add_argument("--version", action="version", version=f"frictionlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name, help=COMMANDS[name].__name__.replace("cmd_", "") + " experiment")
        s.add_argument("--config", help="INI file with [model], [grid], [run] sections")
        s.add_argument("--out", default=f"out_{name}", help="output directory")
        s.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
        s.add_argument("--preset", choices=sorted(PRESETS))
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg, raw = load_config(args.config, args.set, args.preset)
        os.makedirs(args.out, exist_ok=True)
        files = COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    write_manifest(args.out, args.command, config_text(raw), files, time.perf_counter() - t0, __version__)
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
