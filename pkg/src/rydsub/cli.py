"""Command-line front end: ``rydsub <command> [options]``.

Commands write figure data under ``--out``. Exit status is 0 on success,
1 when a computation or a verification check fails and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, io
from .absorber import (AbsorberParams, absorb_prob, absorber_subtract_fock, optimize_absorber,
                       residual_prob)
from .config import RunConfig, load_config
from .core import (FieldSpec, ModelParams, SCATTERING_EXPONENT, scattering_exponent_by_quadrature,
                   scattering_probability)
from .density import SpinWaveMode, two_excitation_slice
from .errors import ConfigError, RydsubError
from .kernel import transmission_amplitude
from .oracles import (convergence_order, mc_absorber, mc_decoherence, mc_pipeline,
                      mc_retrieval, mc_scattered, ode_amplitude)
from .retrieval import (efficiency_vs_scattered, ideal_subtraction_curve, mean_retrieved,
                        mean_retrieved_fock, no_protection_baseline, scattered_photons)
from .subtraction import (decoherence_probs, efficiency_surface, optimize_fidelity,
                          subtract_prob_coherent_source)


def _map(fn, items, threads):
    """Ordered map over a worker pool; results never depend on ``threads``."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _emit(cfg: RunConfig, stem: str, header, rows, meta) -> Path:
    if cfg.format == "json":
        rows = np.asarray(rows, dtype=float)
        return io.write_json(cfg.out / f"{stem}.json", {
            "meta": meta, "columns": list(header),
            "data": {h: rows[:, i] for i, h in enumerate(header)},
        })
    return io.write_csv(cfg.out / f"{stem}.csv", header, rows, meta)


def _fmt_num(x: float) -> str:
    return repr(float(x))


# -- commands ---------------------------------------------------------------

def cmd_fig1d(cfg: RunConfig) -> list:
    """Two-excitation density matrix slices rho(x, r, y, r) after n_s photons."""
    sec = cfg.section("fig1d")
    params = cfg.model.replace(d_b=sec["d_b"])
    mode = SpinWaveMode(sec["mode"], sec["mode_center"], sec["mode_width"])
    files = []
    for r in sec["r"]:
        grid = two_excitation_slice(r, sec["n_s"], mode, params, sec["points_per_zb"],
                                    cfg.threads)
        meta = {"command": "fig1d", "model": params.to_dict(), "fig1d": sec,
                "kernel_form": "split", "trace": grid.trace(), "purity": grid.purity()}
        stem = f"fig1d_r{_fmt_num(r)}"
        if cfg.format == "json":
            files.append(grid.to_json(cfg.out / f"{stem}.json", meta))
        else:
            files.append(grid.to_csv(cfg.out / f"{stem}.csv", meta))
    return files


def cmd_retrieval(cfg: RunConfig) -> list:
    """Normalised retrieval efficiency against scattered photons, per alpha_g."""
    sec = cfg.section("retrieval")
    axis = np.linspace(0.0, sec["alpha_s_bar_max"], sec["points"])
    header, cols = ["alpha_s_bar"], [axis]
    for ag in sec["alpha_g"]:
        curve = efficiency_vs_scattered(ag, sec["p"], axis, sec["eta_R"])
        header += [f"eta_norm(alpha_g={_fmt_num(ag)})", f"baseline(alpha_g={_fmt_num(ag)})"]
        cols += [curve.values, no_protection_baseline(axis, ag)]
    return [_emit(cfg, "fig2_retrieval", header, np.column_stack(cols),
                  {"command": "retrieval", "retrieval": sec,
                   "note": "eta normalised by eta_R; baseline = exp(-alpha_s_bar/alpha_g)"})]


def cmd_subtract(cfg: RunConfig) -> list:
    """Mean retrieved gate photons against alpha_g, per alpha_s, plus the ideal curve."""
    sec = cfg.section("subtract")
    axis = np.linspace(0.0, sec["alpha_g_max"], sec["points"])
    header, cols = ["alpha_g"], [axis]
    for a_s in sec["alpha_s"]:
        header.append(f"mean_retrieved(alpha_s={_fmt_num(a_s)})")
        cols.append([mean_retrieved(FieldSpec(a, a_s, 1.0, sec["eta_R"]), sec["p"])
                     for a in axis])
    header.append("ideal(p=1;alpha_s=inf)")
    cols.append(ideal_subtraction_curve(axis, sec["eta_R"]))
    return [_emit(cfg, "fig3_subtract", header, np.column_stack(cols),
                  {"command": "subtract", "subtract": sec})]


def fidelity_point(d_b: float, alpha_g: float, bounds: tuple, ratio_min: float) -> list:
    """One row of ``FIDELITY_HEADER`` (without the d_b column)."""
    exact = optimize_fidelity(alpha_g, float(scattering_probability(d_b, True)), bounds=bounds)
    approx = optimize_fidelity(alpha_g, float(scattering_probability(d_b, False)), bounds=bounds)
    absorber = optimize_absorber(alpha_g, d_b, ratio_min)
    return [exact.fidelity, exact.alpha_s_opt, approx.fidelity, approx.alpha_s_opt,
            absorber.fidelity, absorber.location["delta_over_gamma"],
            absorber.location["eit_over_dephasing"]]


FIDELITY_HEADER = ["d_b", "F_decoherence", "alpha_s_opt", "F_decoherence_approx_p",
                   "alpha_s_opt_approx_p", "F_absorber", "absorber_delta_over_gamma",
                   "absorber_eit_over_dephasing"]


def fidelity_curve(alpha_g: float, d_b_axis, bounds: tuple, ratio_min: float, threads: int = 1):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = _map(lambda d: fidelity_point(d, alpha_g, bounds, ratio_min), list(d_b_axis),
                    threads)
    return np.column_stack([np.asarray(d_b_axis, dtype=float), np.asarray(rows)])


def cmd_fidelity(cfg: RunConfig) -> list:
    """Optimal subtraction fidelity of both mechanisms against d_b, plus efficiency surfaces."""
    sec = cfg.section("fidelity")
    axis = np.linspace(sec["d_b_min"], sec["d_b_max"], sec["points"])
    bounds = (sec["alpha_s_min"], sec["alpha_s_max"])
    table = fidelity_curve(sec["alpha_g"], axis, bounds, sec["ratio_min"], cfg.threads)
    meta = {"command": "fidelity", "fidelity": sec,
            "p_exact": f"1-exp(-{SCATTERING_EXPONENT!r} d_b)", "p_approx": "1-exp(-4 d_b)"}
    files = [_emit(cfg, "fig4_fidelity", FIDELITY_HEADER, table, meta)]
    if sec["surfaces"]:
        eta = np.linspace(0.0, 1.0, sec["surface_points"])
        n_g = sec["surface_n_g"]
        for d_b in sec["surface_d_b"]:
            p = float(scattering_probability(d_b))
            a_opt, surf = efficiency_surface(n_g, p, eta, eta, bounds)
            header = ["eta_S"] + [f"P1(eta_R={_fmt_num(e)})" for e in eta]
            smeta = {"command": "fidelity", "d_b": d_b, "n_g": n_g, "p": p,
                     "alpha_s_opt": a_opt}
            files.append(_emit(cfg, f"surface_db{_fmt_num(d_b)}", header,
                               np.column_stack([eta, surf]), smeta))
            diag = np.array([subtract_prob_coherent_source(n_g, a_opt, e, e, p) for e in eta])
            files.append(_emit(cfg, f"surface_diag_db{_fmt_num(d_b)}", ["eta_S_eta_R", "P1"],
                               np.column_stack([eta * eta, diag]), smeta))
    return files


def verification_matrix(cfg: RunConfig) -> list:
    """Every oracle cross-check as ``{name, passed, detail}``."""
    v = cfg.section("verify")
    seed, trials, sig = cfg.seed, v["trials"], v["sigmas"]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2 ** 20,))))
    checks = []

    def add(name, passed, **detail):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    c_quad = scattering_exponent_by_quadrature()
    add("scattering_exponent", abs(c_quad - SCATTERING_EXPONENT) < 1e-8,
        quadrature=c_quad, closed_form=SCATTERING_EXPONENT)

    worst = 0.0
    for _ in range(v["ode_configs"]):
        n = int(rng.integers(1, 5))
        xs = np.sort(rng.uniform(1.0, 19.0, n))
        params = ModelParams(d_b=float(rng.uniform(0.1, 6.0)))
        diff = abs(ode_amplitude(xs, params, v["ode_step"])
                   - transmission_amplitude(params.length, xs, params))
        worst = max(worst, diff)
    add("ode_vs_analytic", worst <= v["ode_tol"], max_abs_diff=worst, tol=v["ode_tol"])
    order = convergence_order([5.0], ModelParams(d_b=1.0))
    add("ode_convergence_order", order >= v["min_order"], order=order)

    dec = mc_decoherence(2, 2, 0.5, trials, seed)
    _, p1 = decoherence_probs(2, 2, 0.5)
    add("mc_decoherence_class1", dec["1"].within(p1, sig), mc=dec["1"].estimate,
        std_error=dec["1"].std_error, analytic=p1)

    for i in range(3):
        n_g, n_s = int(rng.integers(1, 6)), int(rng.integers(0, 8))
        p, eta_r = float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.2, 1.0))
        tot, _ = mc_retrieval(n_g, n_s, p, eta_r, trials, seed + 1 + i)
        exact = mean_retrieved_fock(n_g, n_s, p, eta_r)
        add(f"mc_retrieval_{i}", tot.within(exact, sig), mc=tot.estimate,
            std_error=tot.std_error, analytic=exact, n_g=n_g, n_s=n_s, p=p, eta_R=eta_r)

    a_s, p = float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.05, 0.95))
    sc = mc_scattered(a_s, p, n_g=1, trials=trials, seed=seed + 10)
    add("mc_scattered_fock1", sc.within(a_s * p, sig), mc=sc.estimate, analytic=a_s * p)
    a_g = float(rng.uniform(0.2, 4.0))
    sc = mc_scattered(a_s, p, alpha_g=a_g, trials=trials, seed=seed + 11)
    exact = scattered_photons(FieldSpec(a_g, a_s), p)
    add("mc_scattered_coherent", sc.within(exact, sig), mc=sc.estimate, analytic=exact)

    for i in range(v["sets"]):
        n_g = int(rng.integers(1, 6))
        a_s = float(rng.uniform(0.0, 8.0))
        e_s, e_r = float(rng.uniform(0.5, 1.0)), float(rng.uniform(0.5, 1.0))
        p = float(rng.uniform(0.0, 1.0))
        mc = mc_pipeline(n_g, a_s, e_s, e_r, p, trials, seed + 100 + i)
        exact = subtract_prob_coherent_source(n_g, a_s, e_s, e_r, p)
        add(f"mc_pipeline_{i}", mc.within(exact, sig), mc=mc.estimate,
            std_error=mc.std_error, analytic=exact, n_g=n_g, alpha_s=a_s, eta_S=e_s,
            eta_R=e_r, p=p)

    for i in range(3):
        params = AbsorberParams(float(rng.uniform(0.2, 6.0)), float(rng.uniform(0.1, 10.0)),
                                float(rng.uniform(0.0, 20.0)))
        n_g = int(rng.integers(1, 7))
        mc = mc_absorber(n_g, absorb_prob(params), residual_prob(params), trials,
                         seed + 200 + i)
        exact = absorber_subtract_fock(n_g, params)
        add(f"mc_absorber_{i}", mc.within(exact, sig), mc=mc.estimate,
            std_error=mc.std_error, analytic=exact, n_g=n_g)
    return checks


def cmd_verify(cfg: RunConfig) -> tuple:
    checks = verification_matrix(cfg)
    ok = all(c["passed"] for c in checks)
    report = {"passed": ok, "seed": cfg.seed, "config": cfg.snapshot("model", "verify"),
              "checks": checks}
    path = io.write_json(cfg.out / "verify.json", report)
    return [path], ok


# -- argument handling ------------------------------------------------------

COMMANDS = {
    "fig1d": (cmd_fig1d, "density-matrix slices of two stored excitations"),
    "retrieval": (cmd_retrieval, "retrieval efficiency against scattered photons"),
    "subtract": (cmd_subtract, "retrieved gate photons against stored excitations"),
    "fidelity": (cmd_fidelity, "optimal subtraction fidelity of both mechanisms"),
    "verify": (cmd_verify, "run every oracle cross-check and write a JSON report"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydsub", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rydsub {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, text) in COMMANDS.items():
        aliases = ["oracle"] if name == "verify" else []
        p = sub.add_parser(name, aliases=aliases, help=text, description=text)
        p.add_argument("--config", type=Path, help="INI configuration file")
        p.add_argument("--out", help="output directory (run.out)")
        p.add_argument("--format", choices=("csv", "json"), help="output format (run.format)")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed (run.seed)")
        p.add_argument("--threads", type=int, help="worker threads (run.threads)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="override one configuration key")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = list(args.overrides)
    for key in ("out", "format", "seed", "threads"):
        value = getattr(args, key)
        if value is not None:
            overrides.append(f"run.{key}={value}")
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"rydsub: configuration error: {exc}", file=sys.stderr)
        return 2
    command = "verify" if args.command == "oracle" else args.command
    fn = COMMANDS[command][0]
    try:
        result = fn(cfg)
    except RydsubError as exc:
        print(f"rydsub {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    ok = True
    if isinstance(result, tuple):
        result, ok = result
    for path in result:
        print(path)
    if not ok:
        print(f"rydsub {command}: verification failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
