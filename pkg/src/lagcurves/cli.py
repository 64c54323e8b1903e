"""Command line front end.

Exit codes: 0 on success, 1 on a domain error (a JSON object on stderr whose
``error`` field names the error class), 2 on usage and parse errors. The
environment variable ``LF_LOG`` sets the log level (default WARNING).
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from math import pi

import numpy as np

from . import files
from .classify import ClassCase, classify, closedness, generate
from .core import J, random_group
from .curves import (_grid, invariant_arrays, invariant_derivatives, phase_portraits,
                     phi_from_curvatures)
from .errors import LagCurvesError, ParseError
from .frames import CrossSection, frame, is_in_algebra, serret_matrix
from .geodesics import el_residual, first_variation
from .reconstruct import integrate
from .tori import export_obj, make_profile, molding_surface, PROJECTIONS

log = logging.getLogger("lagcurves")

SECTIONS = [s.value for s in CrossSection]


class UsageError(Exception):
    pass


def _emit(args, text):
    if getattr(args, "out", None):
        files._write(args.out, text)
    else:
        sys.stdout.write(text)


def _grid_size(text):
    try:
        n, m = text.lower().split("x")
        n, m = int(n), int(m)
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like 256x256") from None
    if n < 2 or m < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2x2 vertices")
    return (n, m)


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# subcommands


def cmd_invariants(args):
    c = files.load_curve(args.curve)
    ts = np.array(args.t, dtype=float) if args.t else _grid(c, args.window, args.n, 5)
    d = invariant_arrays(c.jets(ts, 5))
    names = ("k1", "k2", "k3", "k4", "dk1", "ddk1", "dk2", "phi")
    out = {"t": ts}
    out.update({k: d[k] for k in names})
    out["phi_formula"] = phi_from_curvatures(d["k1"], d["k2"], d["k3"], d["dk1"], d["dk2"], d["ddk1"])
    _emit(args, files.dumps(out))


def cmd_frame(args):
    c = files.load_curve(args.curve)
    F = frame(c.jet(args.t, 4), args.section)
    _emit(args, files.dumps({"t": args.t, "section": args.section, "p": F.p, "E": F.E,
                             "matrix": F.matrix()}))


def cmd_serret_matrix(args):
    c = files.load_curve(args.curve)
    data = serret_matrix(args.section, invariant_derivatives(c.jet(args.t, 5)))
    _emit(args, files.dumps({"t": args.t, "section": args.section, "K": data.K, "tau": data.tau,
                             "in_algebra": is_in_algebra(data.K)}))


def cmd_reconstruct(args):
    profile = files.load_profile(args.profile)
    if args.init == "identity":
        init = None
    elif args.init == "random":
        init = random_group(np.random.default_rng(args.seed))
    else:
        obj = files.parse_json(files._read_text(args.init), args.init)
        try:
            m = np.array(obj["matrix"] if isinstance(obj, dict) else obj, dtype=float)
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"{args.init}: expected a 5x5 matrix or {{'matrix': ...}}", 1, 1) from None
        if m.shape != (5, 5):
            raise ParseError(f"{args.init}: expected a 5x5 matrix", 1, 1)
        init = m
    res = integrate(profile, (args.s0, args.s1), h=args.h, init=init, order=args.order)
    E = res.frames[:, 1:, 1:]
    drift = np.max(np.abs(np.einsum("nji,jk,nkl->nil", E, J, E) - J), axis=(1, 2))
    rows = np.column_stack([res.s, res.curve, drift])
    _emit(args, files.csv_text(["s", "x1", "x2", "x3", "x4", "drift"], rows))
    if args.frames:
        files.save_json(args.frames, {"s": res.s, "frames": res.frames, "drift": res.drift})
    log.info("reconstructed %d steps, drift %.3g", len(res.s) - 1, res.drift)


def cmd_classify(args):
    case = classify(args.k3, args.k4, args.tol)
    info = closedness(args.k3, args.k4)
    out = {"case": case.tag, "mu": case.mu, "nu": case.nu, "closed": info is not None,
           "m": None, "n": None, "length": None}
    if info is not None:
        out.update(m=info.m, n=info.n, length=info.length)
    _emit(args, files.dumps(out))


def cmd_generate(args):
    curve = generate(ClassCase(args.case, args.mu, args.nu))
    s = np.linspace(args.s0, args.s1, args.samples)
    pts = curve(s)
    _emit(args, files.csv_text(["s", "x1", "x2", "x3", "x4"], np.column_stack([s, pts])))


def cmd_closedness(args):
    info = closedness(args.k3, args.k4, tol=args.tol, max_den=args.max_den)
    out = {"closed": info is not None}
    if info is not None:
        out.update(info.as_dict())
    _emit(args, files.dumps(out))


def cmd_torus(args):
    prof = make_profile(args.level, args.k3, args.branch, args.z0, args.kind, args.delta)
    mesh = molding_surface((args.k3, args.k4), prof, args.grid)
    obj, side = export_obj(mesh, args.out, args.projection)
    summary = mesh.summary()
    summary.update(obj=str(obj), csv=str(side))
    sys.stdout.write(files.dumps(summary))


def cmd_portrait(args):
    c = files.load_curve(args.curve)
    p = phase_portraits(c, args.window, args.n)
    rows = np.column_stack([p.t, p.a, p.b])
    _emit(args, files.csv_text(["t", "a_x", "a_y", "b_x", "b_y"], rows))


def cmd_geodesic_check(args):
    case = classify(args.k3, args.k4)
    rep = el_residual(generate(case), (-1.0, 1.0), tol=args.tol)
    out = rep.as_dict()
    out["case"] = case.tag
    _emit(args, files.dumps(out))


def cmd_first_variation(args):
    c = files.load_curve(args.curve)
    var = files.load_variation(args.var)
    _emit(args, files.dumps(first_variation(c, var, eps=args.eps).as_dict()))


def cmd_selftest(args):
    from .selftest import run
    results = run(args.seed)
    for name, ok, detail in results:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    return 0 if all(ok for _, ok, _ in results) else 1


# parser


def build_parser():
    p = argparse.ArgumentParser(prog="lagcurves", description="Lagrangian curves in symplectic R^4.")
    p.add_argument("--config", help="JSON file of option values for the subcommand")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, description=help)
        sp.set_defaults(func=fn)
        return sp

    def out(sp):
        sp.add_argument("--out", help="output file (default: stdout)")

    def curve(sp):
        sp.add_argument("--curve", required=True, help="curve file (samples or classified)")

    sp = add("invariants", cmd_invariants, "curvatures and phi along a curve (JSON)")
    curve(sp)
    sp.add_argument("--t", type=float, action="append", help="parameter value (repeatable)")
    sp.add_argument("--n", type=_positive_int, default=11, help="grid size when --t is absent")
    sp.add_argument("--window", type=float, nargs=2, help="grid window")
    out(sp)

    for name, fn, help in (("frame", cmd_frame, "moving frame at a point (JSON)"),
                           ("serret-matrix", cmd_serret_matrix, "Serret-Frenet matrix at a point (JSON)")):
        sp = add(name, fn, help)
        curve(sp)
        sp.add_argument("--t", type=float, required=True)
        sp.add_argument("--section", choices=SECTIONS, default="minimal")
        out(sp)

    sp = add("reconstruct", cmd_reconstruct, "integrate a curvature profile (CSV s,x1..x4,drift)")
    sp.add_argument("--profile", required=True)
    sp.add_argument("--s0", type=float, default=0.0)
    sp.add_argument("--s1", type=float, default=10.0)
    sp.add_argument("--h", type=float, default=1e-3)
    sp.add_argument("--init", default="identity", help="identity, random or a JSON 5x5 matrix file")
    sp.add_argument("--order", type=int, choices=(2, 4), default=2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--frames", help="JSON file for the frame dump")
    out(sp)

    sp = add("classify", cmd_classify, "case of constant curvatures (JSON)")
    sp.add_argument("--k3", type=float, required=True)
    sp.add_argument("--k4", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    out(sp)

    sp = add("generate", cmd_generate, "sample a classified curve (CSV s,x1..x4)")
    sp.add_argument("--case", required=True)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--samples", type=_positive_int, default=100)
    sp.add_argument("--s0", type=float, default=0.0)
    sp.add_argument("--s1", type=float, default=2 * pi)
    out(sp)

    sp = add("closedness", cmd_closedness, "torus-knot data of a constant-curvature curve (JSON)")
    sp.add_argument("--k3", type=float, required=True)
    sp.add_argument("--k4", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--max-den", type=_positive_int, default=64)
    out(sp)

    sp = add("torus", cmd_torus, "Lagrangian torus mesh (OBJ plus CSV sidecar)")
    sp.add_argument("--k3", type=float, required=True)
    sp.add_argument("--k4", type=float, required=True)
    sp.add_argument("--h", dest="level", type=float, required=True, help="profile level h")
    sp.add_argument("--z0", type=float)
    sp.add_argument("--branch", choices=("+", "-"), default="+")
    sp.add_argument("--kind", choices=("ellipse", "wave"), default="ellipse")
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--grid", type=_grid_size, default=(64, 64))
    sp.add_argument("--projection", choices=sorted(PROJECTIONS), default="drop4")
    sp.add_argument("--out", required=True, help="OBJ path; the sidecar gets suffix .csv")

    sp = add("portrait", cmd_portrait, "phase portraits (CSV t,a_x,a_y,b_x,b_y)")
    curve(sp)
    sp.add_argument("--n", type=_positive_int, default=201)
    sp.add_argument("--window", type=float, nargs=2)
    out(sp)

    sp = add("geodesic-check", cmd_geodesic_check, "Lagrangian geodesic verdict (JSON)")
    sp.add_argument("--k3", type=float, required=True)
    sp.add_argument("--k4", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    out(sp)

    sp = add("first-variation", cmd_first_variation, "first variation of the symplectic length (JSON)")
    curve(sp)
    sp.add_argument("--var", required=True, help="variation file")
    sp.add_argument("--eps", type=float, default=1e-4)
    out(sp)

    sp = add("selftest", cmd_selftest, "run the built-in invariant checks")
    sp.add_argument("--seed", type=int, default=0)
    return p


POSITIVE = ("tol", "h", "eps")


@dataclass
class JobConfig:
    """Option values for one subcommand, as read from a ``--config`` file."""

    subcommand: str
    options: dict = field(default_factory=dict)

    def validate(self, allowed):
        for key in self.options:
            if key not in allowed:
                raise UsageError(f"unknown config key {key!r} for {self.subcommand}")

    @staticmethod
    def check_positive(ns):
        for key in POSITIVE:
            v = getattr(ns, key, None)
            if v is not None and not v > 0:
                raise UsageError(f"--{key} must be positive")


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    command = next((a for a in rest if not a.startswith("-")), None)
    if command is None:
        return
    sp = _subparser(parser, command)
    obj = files.parse_json(files._read_text(known.config), known.config)
    if not isinstance(obj, dict):
        raise ParseError("config must be a JSON object", 1, 1)
    obj = {k.replace("-", "_"): v for k, v in obj.items()}
    allowed = {a.dest for a in sp._actions if a.dest != "help"}
    JobConfig(command, obj).validate(allowed)
    # config values act as defaults; explicit flags win
    sp.set_defaults(**obj)
    for a in sp._actions:
        if a.dest in obj:
            a.required = False


def _setup_logging():
    level = os.environ.get("LF_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(code, payload):
    sys.stderr.write(files.dumps(payload))
    return code


def run(argv=None):
    """Run one command; returns the exit code."""
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        try:
            ns = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        JobConfig.check_positive(ns)
        code = ns.func(ns)
        return 0 if code is None else int(code)
    except UsageError as exc:
        return _fail(2, {"error": "UsageError", "message": str(exc)})
    except ParseError as exc:
        return _fail(2, exc.to_dict())
    except LagCurvesError as exc:
        return _fail(1, exc.to_dict())
    except ValueError as exc:
        return _fail(2, {"error": "UsageError", "message": str(exc)})


def main():
    sys.exit(run())
