"""Command-line front end.

    quadfloquet static-spectrum --config c.yaml --out DIR
    quadfloquet sweep           --config c.yaml --out DIR [--jobs N]
    quadfloquet evolve          --config c.yaml --out DIR
    quadfloquet disorder        --config c.yaml --out DIR [--seed S] [--jobs N]

Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 partial
result (some sweep points or disorder realizations failed).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .diagnostics import SweepResult, classify_static_states, ipr, sweep_frequency
from .disorder import PRNG_NAME, DisorderConfig, RevivalProtocol, disorder_scan, realization_seed
from .dynamics import (
    NormBreakdownError,
    auto_substeps,
    biorthogonal_bra,
    detect_revivals,
    evolve,
    predicted_period,
    prepare_state,
)
from .floquet import FloquetResult, quasi_energies
from .lattice import Boundary, DriveParams, build_h1_static, hopping_matrix
from .linalg import LinalgError, eig_general
from .output import line_plot, write_csv, write_json, write_manifest

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3


class Outcome:
    """Files, knobs and status collected by one command."""

    def __init__(self, out: Path):
        self.out = out
        self.files: list[Path] = []
        self.knobs: dict = {}
        self.partial: list[str] = []
        self.prng: str | None = None

    def csv(self, name, header, rows) -> None:
        self.files.append(write_csv(self.out / name, header, rows))

    def json(self, name, data) -> None:
        self.files.append(write_json(self.out / name, data))

    def plot(self, name, *args, **kwargs) -> None:
        self.files.append(line_plot(self.out / name, *args, **kwargs))


def _spectrum_rows(values, modes=None):
    for i, e in enumerate(values):
        row = [i, e.real, e.imag]
        if modes is not None:
            row.append(ipr(modes[:, i]))
        yield row


def _print_table(title: str, values) -> None:
    print(title)
    for i, e in enumerate(values):
        print(f"  {i:3d}  {e.real:+.10f}  {e.imag:+.3e}")


# ---------------------------------------------------------------- commands

def cmd_static_spectrum(cfg: RunConfig, res: Outcome) -> None:
    p = cfg.lattice
    er = eig_general(build_h1_static(p))
    prob = np.abs(er.vectors) ** 2
    prob /= prob.sum(axis=0)
    res.csv("eigenvalues.csv", ["index", "re", "im"], _spectrum_rows(er.values))
    res.csv("states.csv", ["site"] + [f"state_{j}" for j in range(p.N)],
            ([l] + list(prob[i]) for i, l in enumerate(p.sites)))
    if p.boundary is Boundary.OPEN:
        cl = classify_static_states(p, cfg.static_threshold)
        n_c = "" if cl.n_c is None else cl.n_c
        res.csv("classification.csv",
                ["index", "family", "mean_abs_site", "center_of_mass", "n_c"],
                ([i, cl.labels[i], cl.mean_distance[i], cl.center_of_mass[i], n_c]
                 for i in range(p.N)))
        res.knobs["n_c"] = cl.n_c
    else:
        res.csv("classification.csv",
                ["index", "family", "mean_abs_site", "center_of_mass", "n_c"],
                ([i, "unclassified", "", "", ""] for i in range(p.N)))
    if cfg.plot:
        res.plot("eigenvalues.svg", np.arange(p.N), {"Re E": er.values.real},
                 xlabel="index", ylabel="energy")


def _sweep(cfg: RunConfig, res: Outcome) -> SweepResult:
    grid = cfg.omega_grid if cfg.omega_grid is not None else (cfg.omega,)
    sw = sweep_frequency(cfg.lattice, grid, cfg.method, sambe=cfg.sambe,
                         propagator=cfg.propagator, window=cfg.window,
                         refine=cfg.refine, jobs=cfg.jobs)
    res.knobs.update(omega_c=sw.omega_c, delta_at_omega_c=sw.delta_at_omega_c,
                     ladder_spacing=sw.ladder_spacing, sweep_points=len(sw.points),
                     refined_points=len(sw.refined))
    if sw.failed:
        res.partial.append(f"{len(sw.failed)} sweep point(s) failed")
    return sw


def _floquet(cfg: RunConfig, omega: float, res: Outcome, key: str) -> FloquetResult:
    fr = quasi_energies(cfg.lattice, DriveParams(omega), cfg.method,
                        sambe=cfg.sambe, propagator=cfg.propagator)
    res.knobs[key] = {"method": fr.method.value, "omega": omega, **fr.knobs}
    return fr


def cmd_sweep(cfg: RunConfig, res: Outcome) -> None:
    sw = _sweep(cfg, res)
    rows = [[pt.omega, pt.delta, pt.mipr, pt.max_imag, pt.mean_spacing, 0, pt.error]
            for pt in sw.points]
    rows += [[pt.omega, pt.delta, pt.mipr, pt.max_imag, pt.mean_spacing, 1, pt.error]
             for pt in sw.refined]
    res.csv("sweep.csv", ["omega", "delta", "mipr", "max_imag", "mean_spacing", "refined", "error"],
            rows)
    if sw.static_unfolded:
        er = eig_general(hopping_matrix(cfg.lattice))
        values, modes = er.values, er.vectors
    else:
        fr = _floquet(cfg, sw.omega_c, res, "ladder")
        values, modes = fr.quasi_energies, fr.modes
    res.csv("ladder.csv", ["index", "re", "im", "ipr"], _spectrum_rows(values, modes))
    _print_table(f"quasi-energies at omega_c = {sw.omega_c:.10g}", values)
    if cfg.plot:
        x = sw.omega_grid
        res.plot("delta.svg", x, {"delta": sw.delta_curve}, xlabel="omega", ylabel="delta",
                 logy=True, vline=sw.omega_c)
        res.plot("mipr.svg", x, {"MIPR": sw.mipr_curve}, xlabel="omega", ylabel="MIPR",
                 vline=sw.omega_c)


def _resolve_omega(cfg: RunConfig, res: Outcome) -> float:
    if cfg.omega is not None:
        return cfg.omega
    sw = _sweep(cfg, res)
    print(f"omega_c = {sw.omega_c:.10g} (delta = {sw.delta_at_omega_c:.4g})")
    return sw.omega_c


def cmd_evolve(cfg: RunConfig, res: Outcome) -> None:
    p, dyn = cfg.lattice, cfg.dynamics
    omega = _resolve_omega(cfg, res)
    d = DriveParams(omega)
    fr = _floquet(cfg, omega, res, "floquet")
    _print_table(f"quasi-energies at omega = {omega:.10g} (mode index, Re, Im)", fr.quasi_energies)
    res.csv("quasienergies.csv", ["index", "re", "im", "ipr"],
            _spectrum_rows(fr.quasi_energies, fr.modes))

    psi0 = prepare_state(dyn.initial, fr)
    bra = None
    if dyn.fidelity == "biorthogonal":
        bra = biorthogonal_bra(dyn.initial, fr)
    period = predicted_period(fr, dyn.initial.mode_indices)
    t_max = dyn.t_max
    if t_max is None:
        t_max = dyn.dt * math.ceil(dyn.revival_periods * period / dyn.dt)
    substeps = dyn.substeps or auto_substeps(dyn.dt, d)
    res.knobs["dynamics"] = {"dt": dyn.dt, "t_max": t_max, "substeps": substeps,
                             "sampling": dyn.sampling.value, "fidelity": dyn.fidelity,
                             "predicted_period": period}

    trace = evolve(psi0, p, d, dyn.dt, t_max, substeps=substeps, sampling=dyn.sampling, bra=bra)
    res.csv("trace.csv", ["t", "fidelity", "norm"],
            zip(trace.times, trace.fidelity, trace.norm))
    sites = [f"l={l}" for l in p.sites]
    res.csv("siteprob.csv", ["t"] + sites,
            ([t] + list(row) for t, row in zip(trace.times, trace.site_prob)))
    res.csv("siteprob_raw.csv", ["t"] + sites,
            ([t] + list(row) for t, row in zip(trace.times, trace.raw_site_prob)))
    try:
        rep = detect_revivals(trace, period=period, threshold=dyn.threshold)
        report = rep.as_dict()
        if not rep.found:
            res.partial.append("no fidelity peak above threshold")
        else:
            print(f"revival period ~ {rep.period_estimate:.6g} (predicted {period:.6g})")
    except ValueError as exc:
        report = {"found": False, "predicted_period": period, "error": str(exc)}
        res.partial.append(str(exc))
    res.json("revivals.json", report)
    if cfg.plot:
        res.plot("fidelity.svg", trace.times, {"fidelity": trace.fidelity},
                 xlabel="t", ylabel="fidelity")


def cmd_disorder(cfg: RunConfig, res: Outcome) -> None:
    dc: DisorderConfig = cfg.disorder
    dyn = cfg.dynamics
    omega = _resolve_omega(cfg, res)
    d = DriveParams(omega)
    protocol = RevivalProtocol(
        initial=dyn.initial, dt=dyn.dt, substeps=dyn.substeps, sampling=dyn.sampling,
        n_periods=cfg.n_periods, half_width=cfg.half_width, method=cfg.method,
        sambe=cfg.sambe, propagator=cfg.propagator,
    )
    curves = disorder_scan(cfg.lattice, d, protocol, dc, jobs=cfg.jobs)
    res.prng = PRNG_NAME
    res.knobs["disorder"] = {"omega": omega, "substeps": protocol.steps(d),
                             "sampling": protocol.sampling.value}
    res.csv("disorder.csv",
            ["lambda", "mean_fmax", "std_fmax", "n_ok", "n_failed", "n_negative"],
            ([c.lam, c.mean_fmax, c.std_fmax, c.n_ok, c.per_realization.size - c.n_ok,
              c.n_negative] for c in curves))
    res.csv("disorder_realizations.csv", ["lambda_index", "lambda", "realization", "fmax"],
            ([i, c.lam, r, v] for i, c in enumerate(curves)
             for r, v in enumerate(c.per_realization)))
    res.json("disorder.json", {
        "master_seed": dc.master_seed,
        "prng": PRNG_NAME,
        "seeds": [[list(realization_seed(dc.master_seed, i, r).spawn_key)
                   for r in range(dc.n_realizations)] for i in range(len(dc.lambda_grid))],
        "errors": {str(c.lam): c.errors for c in curves if c.errors},
    })
    failed = sum(c.per_realization.size - c.n_ok for c in curves)
    if failed:
        res.partial.append(f"{failed} realization(s) failed")
    for c in curves:
        print(f"lambda={c.lam:<8g} mean_fmax={c.mean_fmax:.4f} std={c.std_fmax:.4f} "
              f"ok={c.n_ok}/{c.per_realization.size}")
    if cfg.plot:
        res.plot("disorder.svg", [c.lam for c in curves], {"mean F_max": [c.mean_fmax for c in curves]},
                 xlabel="lambda", ylabel="F_max")


COMMANDS = {
    "static-spectrum": cmd_static_spectrum,
    "sweep": cmd_sweep,
    "evolve": cmd_evolve,
    "disorder": cmd_disorder,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quadfloquet", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="YAML run configuration")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--jobs", type=int, help="worker processes")
        sp.add_argument("--seed", type=int, help="master seed for disorder draws")
        sp.add_argument("--method", choices=["sambe", "propagator"])
        sp.add_argument("--boundary", choices=["open", "periodic"])
        sp.add_argument("--plot", action="store_true", help="also write SVG line plots")
    return ap


def _prepare_out(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {path} is not writable: {exc}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, command=args.command, out=args.out, jobs=args.jobs,
                          seed=args.seed, method=args.method, boundary=args.boundary,
                          plot=args.plot)
        _prepare_out(cfg.output_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    res = Outcome(cfg.output_dir)
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](cfg, res)
    except (LinalgError, NormBreakdownError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:  # e.g. mode index outside the spectrum
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    status = "partial" if res.partial else "ok"
    write_manifest(cfg.output_dir, command=args.command, config=cfg.as_dict(),
                   version=__version__, prng=res.prng, knobs=res.knobs,
                   wall_clock=time.perf_counter() - t0, files=res.files, status=status)
    for msg in res.partial:
        print(f"warning: {msg}", file=sys.stderr)
    return EXIT_PARTIAL if res.partial else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
