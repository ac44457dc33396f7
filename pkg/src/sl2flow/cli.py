"""Command-line front end.

    sl2flow classify  --kappa 1 --ambient "1,0,0,1;0,-2,2,0"
    sl2flow simulate  --preset homoclinic --dt 0.1 --out traj.csv
    sl2flow portrait  --figure 3
    sl2flow fields    --preset pressureless --grid 5
    sl2flow verify    --suite invariants --seed 7

Matrices are written row-major, ``a11,a12,a21,a22``, and a pair ``(A, B)``
is separated by ``;``.  Exit codes: 0 success, 1 verification failure,
2 data not on the tangent bundle, 3 malformed input, 4 drift budget exceeded,
5 any other numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .charts import ChartPoint, PhaseState, Regime, ReducedState, check_on_bundle
from .errors import NoCriticalPoint, NotOnManifold, NotPeriodic, SL2FlowError, ToleranceExceeded
from .matrix_core import DEFAULT_TOL, Mat2

log = logging.getLogger("sl2flow")

CSV_SCHEMA = "sl2flow-trajectory/1"
FIELDS_SCHEMA = "sl2flow-fields/1"
PORTRAIT_SCHEMA = "sl2flow-portrait/1"

EXIT_VERIFY = 1
EXIT_MANIFOLD = 2
EXIT_PARSE = 3
EXIT_DRIFT = 4
EXIT_NUMERIC = 5

TRAJ_COLUMNS = ["t", "a11", "a12", "a21", "a22", "b11", "b12", "b21", "b22", "normA2",
                "lambda", "dX1", "dX2", "dX3", "det_defect", "axis_major", "axis_minor",
                "orientation"]

#: hard defaults, applied after the config file and the command line
DEFAULTS = {"kappa": None, "t0": 0.0, "t1": 10.0, "dt": None, "rtol": 1e-10, "atol": 1e-12,
            "format": None, "out": None, "seed": 0, "suite": "all", "horizon": None,
            "max_drift": None, "formulation": None, "workers": 1, "sampling": 400,
            "q_max": None, "grid": 5, "time": 0.0, "c0": None}


class ParseError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- parsing helpers

def parse_numbers(text: str, n: int, what: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ParseError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise ParseError(f"{what}: expected {n} finite numbers, got {text!r}")
    return vals


def parse_ambient(text: str) -> PhaseState:
    """``"a11,a12,a21,a22;b11,b12,b21,b22"`` to a PhaseState."""
    parts = text.split(";")
    if len(parts) != 2:
        raise ParseError(f"ambient pair must be 'A;B', got {text!r}")
    return PhaseState(Mat2(*parse_numbers(parts[0], 4, "A")),
                      Mat2(*parse_numbers(parts[1], 4, "B")))


def parse_chart(text: str) -> ChartPoint:
    parts = text.split(";")
    if len(parts) != 2:
        raise ParseError(f"chart point must be 'x1,x2,x3;p1,p2,p3', got {text!r}")
    return ChartPoint(parse_numbers(parts[0], 3, "x"), parse_numbers(parts[1], 3, "p"))


def parse_reduced(text: str) -> ReducedState:
    parts = text.split(";")
    if len(parts) not in (2, 3):
        raise ParseError(f"reduced point must be 'q1,q2,q3;xi1,xi2,xi3[;regime]', got {text!r}")
    q = parse_numbers(parts[0], 3, "q")
    xi = parse_numbers(parts[1], 3, "xi")
    regime = parts[2].strip() if len(parts) == 3 else Regime.X2_NONZERO.value
    try:
        return ReducedState(q, xi, Regime(regime))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


@dataclass
class RunConfig:
    kappa: float
    initial: object
    t_span: tuple
    dt: float | None
    rtol: float
    atol: float
    fmt: str
    seed: int
    formulation: str
    t_init: float
    max_drift: float | None = None


def _merge(args, config_path):
    """Config file values fill arguments left unset; then hard defaults."""
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read config {config_path!r}: {exc}") from None
        if not isinstance(conf, dict):
            raise ParseError("config file must hold a JSON object")
        for k, v in conf.items():
            key = k.replace("-", "_")
            if not hasattr(args, key):
                raise ParseError(f"unknown config key {k!r}")
            if getattr(args, key) is None:
                setattr(args, key, v)
                if key in ("t0", "t1"):
                    setattr(args, key + "_given", True)
    for k, v in DEFAULTS.items():
        if k in ("rtol", "atol"):
            continue  # a preset may supply its own; resolved in build_config
        if hasattr(args, k) and getattr(args, k) is None:
            setattr(args, k, v)
    return args


def build_config(args, default_format="csv") -> RunConfig:
    from .presets import get_preset

    forms = [f for f in ("ambient", "chart", "reduced", "preset") if getattr(args, f, None)]
    if len(forms) != 1:
        raise ParseError("give exactly one of --ambient, --chart, --reduced, --preset")
    form = forms[0]
    preset = None
    t_span = (getattr(args, "t0", 0.0), getattr(args, "t1", DEFAULTS["t1"]))
    t_init = t_span[0]
    formulation = args.formulation or "Ambient"
    if form == "preset":
        try:
            preset = get_preset(args.preset)
        except KeyError as exc:
            raise ParseError(str(exc.args[0])) from None
        initial = preset.initial
        user_span = getattr(args, "t0_given", False) or getattr(args, "t1_given", False)
        if not user_span:
            t_span = preset.t_span
            t_init = preset.t_init
        else:
            t_init = min(max(preset.t_init, t_span[0]), t_span[1])
        formulation = args.formulation or preset.formulation
    elif form == "ambient":
        initial = parse_ambient(args.ambient)
    elif form == "chart":
        initial = parse_chart(args.chart)
    else:
        initial = parse_reduced(args.reduced)
    kappa = args.kappa
    if kappa is None:
        if preset is None:
            raise ParseError("--kappa is required unless a preset is used")
        kappa = preset.kappa
    kappa = float(kappa)
    if not kappa >= 0:
        raise ParseError("--kappa must be nonnegative")
    if not t_span[1] > t_span[0]:
        raise ParseError("the time span must be nonempty (t1 > t0)")
    dt = getattr(args, "dt", None)
    if dt is not None and not float(dt) > 0:
        raise ParseError("--dt must be positive")
    tol = {}
    for k in ("rtol", "atol"):
        v = getattr(args, k, None)
        if v is None and preset is not None:
            v = getattr(preset, k)
        tol[k] = float(DEFAULTS[k] if v is None else v)
    drift = getattr(args, "max_drift", None)
    return RunConfig(kappa, initial, (float(t_span[0]), float(t_span[1])),
                     None if dt is None else float(dt),
                     tol["rtol"], tol["atol"],
                     args.format or default_format, int(args.seed), formulation,
                     float(t_init), None if drift is None else float(drift))


def _ambient_initial(cfg: RunConfig) -> PhaseState:
    from .charts import chart_to_ambient, reduced_to_ambient

    ini = cfg.initial
    if isinstance(ini, ReducedState):
        st = reduced_to_ambient(ini)
    elif isinstance(ini, ChartPoint):
        st = chart_to_ambient(ini)
    else:
        st = PhaseState(*ini)
    check_on_bundle(st, DEFAULT_TOL)
    return st


# ---------------------------------------------------------------- output

def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(repr(o))


def _csv_text(header_comment: str, columns, rows) -> str:
    buf = io.StringIO(newline="")
    buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return v


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_classify(cfg: RunConfig) -> dict:
    from .classify import classify, critical_points, frequencies
    from .dynamics import invariants_of

    st = _ambient_initial(cfg)
    oc = classify(st, cfg.kappa)
    inv = invariants_of(st, cfg.kappa)
    out = oc.as_dict()
    try:
        X2 = 0.0 if abs(inv.X2) <= 1e-10 * max(1.0, abs(inv.X1)) else inv.X2
        out["critical_points"] = [{"q1": q, "type": t}
                                  for q, t in critical_points(cfg.kappa, X2, inv.X3)]
    except NoCriticalPoint:
        out["critical_points"] = []
    try:
        f = frequencies(st, cfg.kappa)
        out["frequencies"] = {"T": f.T, "omega1": f.omega1, "omega2": f.omega2,
                              "hatA_period": f.hatA_period}
    except NotPeriodic:
        out["frequencies"] = None
    return out


def simulate_rows(cfg: RunConfig):
    from .dynamics import integrate, lagrange_multiplier, state_from_array
    from .physics import ellipse_arrays

    t0, t1 = cfg.t_span
    dt = cfg.dt if cfg.dt is not None else (t1 - t0) / 200.0
    n = int(round((t1 - t0) / dt)) + 1
    te = np.linspace(t0, t0 + (n - 1) * dt, n)
    te = te[te <= t1 + 1e-12 * max(1.0, abs(t1))]
    traj = integrate(cfg.formulation, cfg.initial, cfg.kappa, (t0, max(t1, te[-1])), te,
                     rtol=cfg.rtol, atol=cfg.atol, max_drift=cfg.max_drift,
                     t_init=cfg.t_init)
    amb = traj.ambient_samples
    st = state_from_array(amb)
    lam = np.broadcast_to(np.asarray(lagrange_multiplier(st, cfg.kappa), dtype=float), te.shape)
    drift = traj.invariant_drift()
    major, minor, ori = ellipse_arrays(st.A)
    cols = np.column_stack([te, amb, traj.norm_sq_A(), lam, drift, traj.det_defect(),
                            major, minor, ori])
    return traj, cols


def cmd_simulate(cfg: RunConfig) -> str:
    traj, cols = simulate_rows(cfg)
    if cfg.fmt == "json":
        inv = traj.invariants0
        return _dump_json({"schema": CSV_SCHEMA, "kappa": cfg.kappa,
                           "formulation": traj.formulation.value,
                           "invariants": {"X1": inv.X1, "X2": inv.X2, "X3": inv.X3},
                           "columns": TRAJ_COLUMNS, "rows": cols.tolist()})
    return _csv_text(CSV_SCHEMA, TRAJ_COLUMNS, cols.tolist())


def cmd_portrait(hamiltonian, kappa, X2, X3, energies, *, sampling=400, q_max=None) -> dict:
    """Level-curve dataset; energies below the minimum are reported per level."""
    from .classify import portrait

    data = portrait(hamiltonian, kappa, X2, X3, energies, sampling=sampling, q_max=q_max)
    data["schema"] = PORTRAIT_SCHEMA
    return data


def _portrait_csv(data) -> str:
    rows = []
    for i, lv in enumerate(data["levels"]):
        for j, c in enumerate(lv["curves"]):
            for q, x in zip(c["q1"], c["xi1"]):
                rows.append([i, float(lv["energy"]), j, c["tag"], float(q), float(x)])
    return _csv_text(PORTRAIT_SCHEMA, ["level", "energy", "branch", "tag", "q1", "xi1"], rows)


def cmd_fields(cfg: RunConfig, points=None, grid: int = 5, time: float = 0.0,
               c0: float | None = None) -> dict:
    from .dynamics import integrate
    from .physics import divergence_checks, ellipse_of, fields_at

    st = _ambient_initial(cfg)
    if time:
        lo, hi = min(0.0, time), max(0.0, time)
        tr = integrate(cfg.formulation, st, cfg.kappa, (lo, hi), [time], rtol=cfg.rtol,
                       atol=cfg.atol, t_init=0.0)
        st = tr.state_at(time)
    geo = ellipse_of(st.A, tol=1e-8)
    if points is None:
        r = geo.semi_axis_major
        g = np.linspace(-r, r, int(grid))
        points = [(float(x), float(y)) for y in g for x in g]
    samples = [fields_at(st, cfg.kappa, c0, p) for p in points]
    div = divergence_checks(st, cfg.kappa, c0)
    return {"schema": FIELDS_SCHEMA, "kappa": cfg.kappa, "time": time,
            "A": list(map(float, st.A)), "B": list(map(float, st.B)),
            "ellipse": geo.__dict__, "divergence": div.__dict__,
            "samples": [{"x": s.x, "u": s.u, "b": s.b, "p": s.p, "inside": s.inside}
                        for s in samples]}


def _fields_csv(data) -> str:
    rows = [[*s["x"], s["inside"], *s["u"], *s["b"], s["p"]] for s in data["samples"]]
    return _csv_text(FIELDS_SCHEMA, ["x", "y", "inside", "u1", "u2", "b1", "b2", "p"], rows)


def cmd_verify(suite="all", seed=0, horizon=None, workers=1):
    from . import verify

    return verify.run(suite, seed, workers=workers, horizon=horizon)


# ---------------------------------------------------------------- argument parser

class _Given(argparse.Action):
    """Store a value and remember that it was given explicitly."""

    def __call__(self, parser, ns, values, option_string=None):
        setattr(ns, self.dest, values)
        setattr(ns, self.dest + "_given", True)


def _common(p, initial=True, span=True):
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--kappa", type=float, help="magnetic parameter kappa >= 0")
    if initial:
        p.add_argument("--ambient", help='A;B as "a11,a12,a21,a22;b11,b12,b21,b22"')
        p.add_argument("--chart", help='x;p as "x1,x2,x3;p1,p2,p3"')
        p.add_argument("--reduced", help='"q1,q2,q3;xi1,xi2,xi3[;X2NonZero|X2Zero]"')
        p.add_argument("--preset", help="named initial data (see 'sl2flow simulate --list')")
        p.add_argument("--formulation", choices=["Ambient", "Hamsys", "Hamsys2", "Hamsys3"])
    if span:
        p.add_argument("--t0", type=float, action=_Given)
        p.add_argument("--t1", type=float, action=_Given)
        p.add_argument("--dt", type=float)
        p.add_argument("--rtol", type=float)
        p.add_argument("--atol", type=float)
        p.add_argument("--max-drift", type=float, dest="max_drift")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--seed", type=int)
    p.set_defaults(t0_given=False, t1_given=False)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sl2flow", description="Affine motions of an incompressible "
                 "fluid ellipse: simulation, classification and checks.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, required=True)
    p = sub.add_parser("classify", help="classify the orbit through the initial data")
    _common(p, span=False)
    p = sub.add_parser("simulate", help="integrate and write a trajectory table")
    _common(p)
    p.add_argument("--list", action="store_true", help="list the presets and exit")
    p = sub.add_parser("portrait", help="level curves of the reduced Hamiltonians")
    _common(p, initial=False, span=False)
    p.add_argument("--figure", type=int, choices=range(1, 7), help="standard portrait 1-6")
    p.add_argument("--hamiltonian", choices=["Htilde", "H0"])
    p.add_argument("--X2", type=float, dest="X2")
    p.add_argument("--X3", type=float, dest="X3")
    p.add_argument("--energies", help="comma-separated levels; 'min' for the minimum")
    p.add_argument("--sampling", type=int)
    p.add_argument("--q-max", type=float, dest="q_max")
    p = sub.add_parser("fields", help="velocity, magnetic field and pressure")
    _common(p)
    p.add_argument("--points", help='evaluation points "x,y;x,y;..."')
    p.add_argument("--grid", type=int, help="N x N grid over the ellipse's bounding box")
    p.add_argument("--time", type=float, help="evolve the data to this time first")
    p.add_argument("--c0", type=float, help="either square root of kappa (default +)")
    p = sub.add_parser("verify", help="run the verification suites")
    _common(p, initial=False, span=False)
    p.add_argument("--suite", help="all, a suite name or a criterion number")
    p.add_argument("--horizon", type=float, help="time window for the asymptotic suites")
    p.add_argument("--workers", type=int, help="criteria run in parallel threads")
    p.add_argument("--timings", action="store_true", help="include runtimes in the output")
    return ap


def _energies(text):
    if text is None:
        return None
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if tok.lower() == "min":
            out.append(None)
        else:
            out.append(parse_numbers(tok, 1, "energy")[0])
    return out


def _run(args) -> int:
    if args.command == "verify":
        from . import verify

        try:
            verify.select(args.suite)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        rep = cmd_verify(args.suite, args.seed, args.horizon, args.workers)
        for r in rep.results:
            print(r.line(), file=sys.stderr)
        fmt = args.format or "json"
        if fmt == "json":
            d = rep.as_dict()
            if not args.timings:
                for c in d["criteria"]:
                    c.pop("runtime")
            _emit(_dump_json(d), args.out)
        else:
            rows = [[r.number, r.name, r.passed, json.dumps(r.measured, sort_keys=True)]
                    for r in rep.results]
            _emit(_csv_text("sl2flow-verify/1", ["criterion", "name", "passed", "measured"],
                            rows), args.out)
        return 0 if rep.passed else EXIT_VERIFY

    if args.command == "portrait":
        from .classify import FIGURES

        if args.figure:
            fig = dict(FIGURES[args.figure])
            for k in ("hamiltonian", "X2", "X3", "kappa"):
                if getattr(args, k, None) is None:
                    setattr(args, k, fig[k])
            energies = _energies(args.energies) or list(fig["energies"])
        else:
            energies = _energies(args.energies)
        if args.hamiltonian is None or args.kappa is None or args.X3 is None or not energies:
            raise ParseError("portrait needs --figure or --hamiltonian, --kappa, --X3 "
                             "and --energies")
        X2 = 0.0 if args.X2 is None else args.X2
        data = cmd_portrait(args.hamiltonian, args.kappa, X2, args.X3, energies,
                            sampling=args.sampling, q_max=args.q_max)
        if args.figure:
            data["figure"] = args.figure
        for lv in data["levels"]:
            if "error" in lv:
                log.warning("level %s: %s", lv["energy"], lv["message"])
        _emit(_portrait_csv(data) if args.format == "csv" else _dump_json(data), args.out)
        return 0

    if args.command == "simulate" and args.list:
        from .presets import PRESETS

        for p in PRESETS.values():
            print(f"{p.name:16s} kappa={p.kappa:g}  t=[{p.t_span[0]:g}, {p.t_span[1]:g}]  "
                  f"{p.description}")
        return 0

    cfg = build_config(args, default_format="json" if args.command == "classify" else "csv")
    if args.command == "classify":
        data = cmd_classify(cfg)
        if cfg.fmt == "csv":
            flat = [("kind", data["kind"]), ("pressureless", data["pressureless"])]
            flat += [(k, v) for k, v in data["invariants"].items()]
            _emit(_csv_text("sl2flow-classify/1", ["key", "value"], flat), args.out)
        else:
            _emit(_dump_json(data), args.out)
        return 0
    if args.command == "simulate":
        _emit(cmd_simulate(cfg), args.out)
        return 0
    if args.command == "fields":
        pts = None
        if args.points:
            pts = [parse_numbers(s, 2, "point") for s in args.points.split(";")]
        data = cmd_fields(cfg, pts, args.grid, args.time, args.c0)
        _emit(_fields_csv(data) if cfg.fmt == "csv" else _dump_json(data), args.out)
        return 0
    raise ParseError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SL2FLOW_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge(args, getattr(args, "config", None))
        return _run(args)
    except ParseError as exc:
        print(f"sl2flow: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotOnManifold as exc:
        print(f"sl2flow: not on the tangent bundle: {exc}", file=sys.stderr)
        return EXIT_MANIFOLD
    except ToleranceExceeded as exc:
        print(f"sl2flow: {exc}", file=sys.stderr)
        return EXIT_DRIFT
    except SL2FlowError as exc:
        print(f"sl2flow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
