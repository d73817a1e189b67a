"""Command-line entry point: dist, law, calibrate, curve, quasistatic, gamma, sent.

Every run that writes artifacts creates its output directory first,
refuses to clobber a non-empty one without --force, and persists a
manifest.json (resolved configuration, seed, version, wall-clock time)
alongside the outputs. CSV cells use 17 significant digits so files
round-trip bit-exactly.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .damage_laws import DamageLaw, calibrate_length, damage, degradation, psi
from .distributions import DistributionSpec, cdf, moment_closed, moment_numeric, pdf
from .errors import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    NoClosedFormError,
    NonConvergenceError,
)
from .fem2d import MESH_LEVELS, SimulationConfig, build_sent_mesh, run_sent
from .quasistatic import (
    BarProblem,
    RawCdfLaw,
    certify_energy_balance,
    certify_stability,
    gamma_recovery_table,
    reaction,
    solve,
    uniform_times,
)
from .response_driver import drive_path
from .vtkio import write_vtk

_VALIDATION_ERRORS = (
    ConfigurationError,
    DomainError,
    DivergenceError,
    NoClosedFormError,
    FileNotFoundError,
    KeyError,
    argparse.ArgumentTypeError,
)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract is 1 for validation errors
    def error(self, message):
        raise ConfigurationError(message)


def _ensure_outdir(path: str, force: bool) -> Path:
    out = Path(path)
    if out.exists() and any(out.iterdir()) and not force:
        raise ConfigurationError(
            f"output directory '{out}' is not empty; pass --force to overwrite"
        )
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, subcommand: str, config: dict, seed, t0: float):
    def jsonable(v):
        if isinstance(v, (list, tuple)):
            return [jsonable(x) for x in v]
        return v if isinstance(v, (str, int, float, bool, type(None), dict)) else str(v)

    manifest = {
        "subcommand": subcommand,
        "config": {k: jsonable(v) for k, v in config.items() if k != "func"},
        "output_dir": str(out),
        "seed": seed,
        "tool_version": __version__,
        "duration_s": time.time() - t0,
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)


def _dist_spec(args) -> DistributionSpec:
    return DistributionSpec(args.kind, args.n)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_dist(args) -> int:
    t0 = time.time()
    d = _dist_spec(args)
    for m in args.moments or []:
        try:
            res = moment_closed(d, m)
            value, tag = res.value, ("closed" if res.convergent else "divergent")
        except NoClosedFormError:
            value, tag = moment_numeric(d, m), "numeric"
        print(f"{value:.6f}" if np.isfinite(value) else f"divergent ({tag})")
    if args.out:
        out = _ensure_outdir(args.out, args.force)
        lo, hi, count = args.grid
        xs = np.geomspace(lo, hi, int(count)) if lo > 0 else np.linspace(lo, hi, int(count))
        rows = [(x, pdf(d, x), cdf(d, x)) for x in xs]
        write_csv(out / "distribution.csv", ["x", "pdf", "cdf"], rows)
        _write_manifest(out, "dist", vars(args) | {"grid": list(args.grid)}, None, t0)
    return 0


def _cmd_law(args) -> int:
    t0 = time.time()
    law = DamageLaw(args.kind, G=args.G, ell=args.ell, n=args.n)
    out = _ensure_outdir(args.out, args.force)
    phis = np.linspace(0.0, args.phi_max * law.Gl, args.points)
    rows = [(p, psi(law, p), degradation(law, p), damage(law, p)) for p in phis]
    write_csv(out / "law.csv", ["phi", "psi", "degradation", "damage"], rows)
    _write_manifest(out, "law", vars(args), None, t0)
    return 0


def _cmd_calibrate(args) -> int:
    ell, numeric = calibrate_length(args.kind, args.sigma_max, args.k, args.G, args.n)
    tag = "  (numeric calibration)" if numeric else ""
    print(f"ell = {ell:.12g}{tag}")
    return 0


def _cmd_curve(args) -> int:
    t0 = time.time()
    law = DamageLaw(args.model, G=args.G, ell=args.ell, n=args.n)
    eps_max = args.eps_max if args.eps_max is not None else 3.0 * np.sqrt(2.0 * law.Gl / args.k)
    if args.path == "ramp":
        strains = np.linspace(0.0, eps_max, args.points)
    elif args.path == "cycle":
        third = args.points // 3
        strains = np.concatenate(
            [
                np.linspace(0.0, eps_max, third),
                np.linspace(eps_max, 0.0, third),
                np.linspace(0.0, eps_max, args.points - 2 * third),
            ]
        )
    else:  # file
        if not args.file:
            raise ConfigurationError("--path file requires --file with one strain per line")
        strains = np.loadtxt(args.file, ndmin=1)
    out = _ensure_outdir(args.out, args.force)
    records = drive_path(law, args.k, strains)
    rows = [(r.strain, r.stress_eff, r.damage, r.eta, r.dissipation_cum) for r in records]
    write_csv(out / "curve.csv", ["strain", "stress_eff", "damage", "eta", "dissipation"], rows)
    _write_manifest(out, "curve", vars(args), None, t0)
    return 0


def _read_ini(path: str) -> configparser.ConfigParser:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    ini = configparser.ConfigParser()
    ini.read(p)
    return ini


def _bar_problem(ini: configparser.ConfigParser) -> tuple[BarProblem, np.ndarray, dict]:
    bar = ini["bar"]
    lawsec = ini["law"]
    loading = ini["loading"]
    evo = ini["evolution"]
    law_type = lawsec.get("type", "damage")
    if law_type == "damage":
        law = DamageLaw(
            lawsec["kind"],
            G=lawsec.getfloat("G", 1.0),
            ell=lawsec.getfloat("ell", 1.0),
            n=lawsec.getfloat("n") if "n" in lawsec else None,
        )
    elif law_type == "rawcdf":
        law = RawCdfLaw(
            DistributionSpec(lawsec["kind"], lawsec.getfloat("n") if "n" in lawsec else None),
            lam=lawsec.getfloat("lam", 1.0),
        )
    else:
        raise ConfigurationError(f"law.type must be 'damage' or 'rawcdf', got '{law_type}'")
    if "knots" in loading:
        knots = tuple(
            (float(a), float(b))
            for a, b in (pair.split(":") for pair in loading["knots"].split(","))
        )
    else:
        knots = ((0.0, 0.0), (loading.getfloat("t_end", 1.0), loading.getfloat("g_end")))
    prob = BarProblem(
        element_count=bar.getint("element_count"),
        bar_length=bar.getfloat("bar_length", 1.0),
        law=law,
        jump_cost=evo.getfloat("jump_cost"),
        boundary_knots=knots,
        k=bar.getfloat("k", 1.0),
    )
    times = uniform_times(knots[-1][0], loading.getint("steps", 100))
    cert = dict(
        competitors=ini.getint("certificates", "competitors", fallback=200),
        stability_tol=ini.getfloat("certificates", "stability_tol", fallback=1e-9),
        balance_tol=ini.getfloat("certificates", "balance_tol", fallback=0.02),
    )
    return prob, times, cert


def _cmd_quasistatic(args) -> int:
    t0 = time.time()
    ini = _read_ini(args.config)
    prob, times, cert_cfg = _bar_problem(ini)
    out = _ensure_outdir(args.out, args.force)
    traj = solve(prob, times)
    rows = []
    for i, s in enumerate(traj.states):
        diss = traj.dissipation_increments[i - 1] if i > 0 else 0.0
        rows.append((s.time, s.g, s.stored_energy, diss, len(s.open_jumps), reaction(prob, s)))
    write_csv(
        out / "trajectory.csv",
        ["t", "g", "stored_energy", "dissipation_inc", "crack_count", "reaction"],
        rows,
    )
    stab = certify_stability(
        traj, prob, competitors=cert_cfg["competitors"], seed=args.seed,
        tolerance=cert_cfg["stability_tol"],
    )
    bal = certify_energy_balance(traj, prob, tolerance=cert_cfg["balance_tol"])
    with open(out / "certificates.txt", "w") as f:
        f.write("stability: worst margin = {:.6e}  tolerance = {:.1e}  {}\n".format(
            stab.worst_margin, stab.tolerance, "PASS" if stab.passed else "FAIL"))
        f.write(
            "energy balance: residual = {:.6e}  characteristic = {:.6e}  rel = {:.3e}  {}\n".format(
                bal.residual, bal.characteristic_energy,
                bal.residual / bal.characteristic_energy, "PASS" if bal.passed else "FAIL")
        )
        f.write(f"total dissipation = {bal.dissipation_total:.6e}\n")
        f.write(f"external work     = {bal.work_total:.6e}\n")
        f.write(f"final crack count = {len(traj.states[-1].open_jumps)}\n")
    cfg_dict = {sec: dict(ini[sec]) for sec in ini.sections()}
    _write_manifest(out, "quasistatic", cfg_dict, args.seed, t0)
    print(f"stability {'PASS' if stab.passed else 'FAIL'}; balance {'PASS' if bal.passed else 'FAIL'}")
    return 0 if (stab.passed and bal.passed) else 2


def _cmd_gamma(args) -> int:
    t0 = time.time()
    d = DistributionSpec(args.cdf, args.n)
    lambdas = [float(v) for v in args.lambdas.split(",")]
    rows, warning = gamma_recovery_table(d, lambdas)
    for r in rows:
        print(f"lambda={r.lam:<10g} eps={r.layer_width:<12.6g} E={r.energy:<14.8g} bound={r.bound:.8g}")
    if warning:
        print(f"warning: {warning}")
    if args.out:
        out = _ensure_outdir(args.out, args.force)
        write_csv(
            out / "gamma_table.csv",
            ["lambda", "layer_width", "energy", "bound"],
            [(r.lam, r.layer_width, r.energy, r.bound) for r in rows],
        )
        _write_manifest(out, "gamma", vars(args), None, t0)
    return 0


def _sent_config(ini: configparser.ConfigParser) -> tuple[SimulationConfig, str]:
    mat = ini["material"] if "material" in ini else {}
    lawsec = ini["law"] if "law" in ini else {}
    loading = ini["loading"] if "loading" in ini else {}
    solver = ini["solver"] if "solver" in ini else {}
    output = ini["output"] if "output" in ini else {}

    def fget(sec, key, default):
        return float(sec[key]) if key in sec else default

    cfg = SimulationConfig(
        E=fget(mat, "e", 210.0),
        nu=fget(mat, "nu", 0.3),
        Gc=fget(mat, "gc", 2.7e-3),
        law_kind=lawsec.get("kind", "exponential"),
        law_n=float(lawsec["n"]) if "n" in lawsec else None,
        ell=float(lawsec["ell"]) if "ell" in lawsec else None,
        ell_factor=float(lawsec["ell_factor"]) if "ell_factor" in lawsec else (
            None if "ell" in lawsec else 1.0462),
        u_max=fget(loading, "u_max", 8.0e-3),
        du_coarse=fget(loading, "du_coarse", 1.0e-4),
        du_fine=fget(loading, "du_fine", 1.0e-5),
        u_switch=float(loading["u_switch"]) if "u_switch" in loading else None,
        stop_reaction_fraction=fget(loading, "stop_reaction_fraction", 0.15),
        staggered_tol=fget(solver, "staggered_tol", 1.0e-6),
        max_staggered_iters=int(fget(solver, "max_staggered_iters", 50)),
        max_halvings=int(fget(solver, "max_halvings", 10)),
        stiffness_floor=fget(solver, "stiffness_floor", 1.0e-8),
        field_every=int(fget(output, "field_every", 0)),
    )
    level = ini.get("mesh", "level", fallback="coarse")
    return cfg, level


def _cmd_sent(args) -> int:
    t0 = time.time()
    ini = _read_ini(args.config)
    cfg, level = _sent_config(ini)
    if args.mesh:
        level = args.mesh
    if args.law:
        cfg.law_kind = args.law
    out = _ensure_outdir(args.out, args.force)
    mesh = build_sent_mesh(level)
    result = run_sent(cfg, mesh=mesh)
    rows = [
        (s.step, s.u_top, s.reaction, s.max_damage, s.iterations) for s in result.steps
    ]
    write_csv(
        out / "load_displacement.csv",
        ["step", "u_top_mm", "reaction_kN", "max_damage", "iterations"],
        rows,
    )
    for step_no, nodal_damage, disp in result.snapshots:
        write_vtk(
            out / f"fields_{step_no:05d}.vtk",
            mesh.nodes,
            mesh.elems,
            point_scalars={"damage": nodal_damage},
            point_vectors={"displacement": disp},
        )
    cfg_dict = {sec: dict(ini[sec]) for sec in ini.sections()}
    cfg_dict["resolved"] = {
        "mesh_level": level,
        "law_kind": cfg.law_kind,
        "ell": cfg.resolve_ell(mesh),
        "elements": int(mesh.n_elems),
    }
    _write_manifest(out, "sent", cfg_dict, None, t0)
    print(
        f"peak reaction {result.peak_reaction:.6g} kN over {len(result.steps)} steps; "
        f"final max damage {result.steps[-1].max_damage:.4f}"
    )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="cdfdamage", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--threads", type=int, default=None,
                   help="cap BLAS/LAPACK thread pools used by the linear algebra")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", help="tabulate pdf/cdf and print moments")
    d.add_argument("--kind", required=True)
    d.add_argument("--n", type=float, default=None, help="shape/rate/scale parameter")
    d.add_argument("--moments", type=lambda s: [float(v) for v in s.split(",")], default=None)
    d.add_argument("--grid", type=lambda s: tuple(float(v) for v in s.split(":")),
                   default=(1e-3, 1e3, 200), help="lo:hi:count")
    d.add_argument("--out", default=None)
    d.add_argument("--force", action="store_true")
    d.set_defaults(func=_cmd_dist)

    l = sub.add_parser("law", help="tabulate psi, degradation, damage over an energy grid")
    l.add_argument("--kind", required=True)
    l.add_argument("--n", type=float, default=None)
    l.add_argument("--G", type=float, default=1.0)
    l.add_argument("--ell", type=float, default=1.0)
    l.add_argument("--phi-max", dest="phi_max", type=float, default=5.0,
                   help="grid end in multiples of G/ell")
    l.add_argument("--points", type=int, default=200)
    l.add_argument("--out", required=True)
    l.add_argument("--force", action="store_true")
    l.set_defaults(func=_cmd_law)

    c = sub.add_parser("calibrate", help="internal length from peak stress")
    c.add_argument("--kind", required=True)
    c.add_argument("--n", type=float, default=None)
    c.add_argument("--sigma-max", dest="sigma_max", type=float, required=True)
    c.add_argument("--k", type=float, required=True)
    c.add_argument("--G", type=float, required=True)
    c.set_defaults(func=_cmd_calibrate)

    cv = sub.add_parser("curve", help="1D stress/damage curve along a strain path")
    cv.add_argument("--model", required=True)
    cv.add_argument("--n", type=float, default=None)
    cv.add_argument("--G", type=float, default=1.0)
    cv.add_argument("--ell", type=float, default=1.0)
    cv.add_argument("--k", type=float, default=1.0)
    cv.add_argument("--path", choices=("ramp", "cycle", "file"), default="ramp")
    cv.add_argument("--file", default=None)
    cv.add_argument("--eps-max", dest="eps_max", type=float, default=None)
    cv.add_argument("--points", type=int, default=601)
    cv.add_argument("--out", required=True)
    cv.add_argument("--force", action="store_true")
    cv.set_defaults(func=_cmd_curve)

    q = sub.add_parser("quasistatic", help="energetic bar evolution plus certificates")
    q.add_argument("--config", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=_cmd_quasistatic)

    g = sub.add_parser("gamma", help="recovery-sequence energy table")
    g.add_argument("--cdf", required=True)
    g.add_argument("--n", type=float, default=None)
    g.add_argument("--lambdas", default="1,10,100,1000,10000")
    g.add_argument("--out", default=None)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=_cmd_gamma)

    s = sub.add_parser("sent", help="single-edge-notched tension benchmark")
    s.add_argument("--config", required=True)
    s.add_argument("--mesh", choices=MESH_LEVELS, default=None)
    s.add_argument("--law", default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=_cmd_sent)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigurationError("--threads must be >= 1")
            import os

            for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
                os.environ[var] = str(args.threads)
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonConvergenceError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version paths
        code = exc.code if isinstance(exc.code, int) else 0
        return code


parse_and_dispatch = main


if __name__ == "__main__":
    sys.exit(main())
