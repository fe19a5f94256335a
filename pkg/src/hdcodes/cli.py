"""
Command-line front end.

Every subcommand writes its result (JSON, CSV or alist text) to --out or
stdout, and a manifest JSON next to it recording the argv, the parsed
configuration, package versions and wall time.  `hdcodes --replay MANIFEST`
re-runs the recorded argv.

Exit codes: 0 success, 1 input error, 2 resource budget exceeded.
"""

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from fractions import Fraction

import numpy as np
import scipy

from . import BudgetExceeded, __version__
from .complex import simplex_sphere, sphere_product, torus_from_lattice
from .counting import first_moment_experiment, min_volume_sublattice
from .css import (CssCode, DISTANCE_BUDGET, alist, distance_cycle_q1, distance_exact,
                  from_complex, soundness_profile)
from .exterior import shortest_wedge_report
from .fpla import random_code_generator
from .lattice import DEFAULT_BUDGET, Lattice, default_rankin_radius, rankin
from .lda import build_lda

THREADS_ENV = "HDCODES_THREADS"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


# --- stable output -------------------------------------------------------------

def fmt_float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def dumps(obj, indent=0):
    """JSON with floats at 17 significant digits and Fractions as "p/q" strings."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, str, bool, Fraction, np.integer, np.floating))
               or v is None for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v).strip('"')
    return str(v)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from e


def _load_lattice(path):
    data = _load_json(path)
    if "lattice" in data:
        data = data["lattice"]
    try:
        return Lattice.from_json(data)
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as e:
        raise InputError(f"{path} is not a lattice JSON: {e}") from e


def _load_code(path):
    data = _load_json(path)
    try:
        return CssCode.from_json(data)
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"{path} is not a code JSON: {e}") from e


# --- subcommands ---------------------------------------------------------------

def cmd_gen_lda(a):
    G = random_code_generator(a.n, a.k, a.p, a.seed)
    L = build_lda(G)
    return {"n": a.n, "k": a.k, "p": a.p, "seed": a.seed,
            "G": G.array.tolist(), "volume_sq": L.volume_sq(),
            "lattice": L.lattice.to_json()}


def cmd_rankin(a):
    L = _load_lattice(a.lattice)
    radius = Fraction(a.radius) if a.radius is not None else None
    res = rankin(L, a.m, radius=radius, certify=not a.no_certify, budget=a.budget)
    val = res.value
    return {"n": L.rank, "m": a.m, "rankin": val if isinstance(val, Fraction) else float(val),
            "rankin_float": float(val), "min_volume_sq": res.min_volume_sq,
            "certified": res.certified, "witness": [list(w) for w in res.witness],
            "default_radius": float(default_rankin_radius(L, a.m))}


def cmd_min_sublattice(a):
    accept = None
    if a.lattice:
        L = _load_lattice(a.lattice)
        if not L.integral:
            raise InputError("containing lattice must be integral")
        if L.ambient_dim != a.n:
            raise InputError("containing lattice must live in Z^n")
        accept = L.contains
    res = min_volume_sublattice(a.n, a.m, accept, H_sq=Fraction(a.h_sq), budget=a.budget)
    out = {"n": a.n, "m": a.m, "H_sq": Fraction(a.h_sq), "found": res.lattice is not None,
           "exact": res.exact, "nodes": res.nodes}
    if res.lattice is not None:
        out["volume_sq"] = res.volume_sq
        out["pivots"] = list(res.lattice.pivots)
        out["columns"] = [list(c) for c in res.lattice.columns]
    return out


def _build(a):
    if a.family == "torus":
        L = Lattice([[a.ell if i == j else 0 for i in range(a.n)] for j in range(a.n)])
        C = torus_from_lattice(L, d=a.d)
    elif a.family == "simplex":
        C = simplex_sphere(a.n, d=a.d)
    else:
        C = sphere_product(a.n, a.p, d=a.d)
    q = a.q if a.q is not None else (a.n if a.family == "sphere-product" else None)
    if q is None:
        raise InputError("--q is required for this family")
    if not 0 <= q <= C.dim:
        raise InputError(f"--q must lie in 0..{C.dim}")
    return from_complex(C, q)


def cmd_build_code(a):
    code = _build(a)
    if a.format == "alist":
        return ("text", "# bd2^T\n" + alist(code.bd2.T) + "# bd1\n" + alist(code.bd1))
    return code.to_json()


def _soundness_json(code, a):
    out = {}
    sides = ["Z", "X"] if a.side == "both" else [a.side]
    for side in sides:
        prof = soundness_profile(code, a.wmax, mode=a.mode, side=side, samples=a.samples,
                                 seed=a.seed, budget=a.budget)
        js = prof.to_json()
        mv = prof.min_value()
        js["min_epsilon"] = None if mv is None else mv
        js["min_epsilon_float"] = None if mv is None else float(mv)
        js["at_least_one"] = None if mv is None else bool(mv >= 1)
        out[side] = js
    return out


def cmd_analyze(a):
    code = _load_code(a.code)
    out = {"N": code.N, "d": code.d, "q": code.q, "K": code.logical_count(),
           "W": code.weight(), "commutes": code.commutes()}
    if a.distance:
        dz = distance_exact(code, "Z", budget=a.budget)
        dx = distance_exact(code, "X", budget=a.budget)
        out["D_Z"] = "inf" if dz == math.inf else dz
        out["D_X"] = "inf" if dx == math.inf else dx
    if a.soundness:
        out["soundness"] = _soundness_json(code, a)
    return out


def cmd_soundness(a):
    code = _load_code(a.code)
    return {"N": code.N, "soundness": _soundness_json(code, a)}


def cmd_wedge_report(a):
    L = _load_lattice(a.lattice)
    radius = Fraction(a.radius) if a.radius is not None else None
    rep = shortest_wedge_report(L, a.m, radius=radius, seed=a.seed)
    return rep.to_json()


def cmd_experiment(a):
    rep = first_moment_experiment(a.n, a.k, a.p, a.m, a.c, a.trials, a.seed, x=a.x,
                                  budget=a.budget, workers=a.threads)
    buf = io.StringIO()
    cols = ["trial", "found", "min_vol", "bound"] + ([] if a.no_runtime else ["runtime_ms"])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rep.rows:
        w.writerow([_cell(r[c]) for c in cols])
    summary = {"n": rep.n, "k": rep.k, "p": rep.p, "m": rep.m, "m_used": rep.m_used,
               "c": rep.c, "x": rep.x, "H": rep.H, "trials": rep.trials,
               "successes": rep.successes, "completed": rep.completed,
               "frequency": rep.frequency, "ci_low": rep.ci_low, "ci_high": rep.ci_high,
               "bound": rep.bound, "consistent": rep.consistent, "complete": rep.complete,
               "note": rep.note}
    return ("text", buf.getvalue(), summary)


# --- parser --------------------------------------------------------------------

def _default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--manifest", help="manifest path (default: OUT.manifest.json)")
    common.add_argument("--threads", type=int, default=_default_threads(),
                        help=f"worker count (default: ${THREADS_ENV} or 1)")
    common.add_argument("--seed", type=int, default=0)

    ap = _Parser(prog="hdcodes", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--replay", metavar="MANIFEST", help="re-run the argv recorded in a manifest")
    sub = ap.add_subparsers(dest="cmd", parser_class=_Parser)

    s = sub.add_parser("gen-lda", parents=[common], help="random LDA lattice")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--p", type=int, required=True)
    s.set_defaults(func=cmd_gen_lda)

    s = sub.add_parser("rankin", parents=[common], help="Rankin invariant of a lattice")
    s.add_argument("--lattice", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--radius", help="enumeration radius (rational)")
    s.add_argument("--no-certify", action="store_true")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_rankin)

    s = sub.add_parser("min-sublattice", parents=[common],
                       help="minimum-volume rank-m sublattice of Z^n (optionally inside a lattice)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--h-sq", required=True, help="cap on the squared volume (rational)")
    s.add_argument("--lattice", help="only accept columns in this integral lattice")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_min_sublattice)

    s = sub.add_parser("build-code", parents=[common], help="build a CSS code")
    s.add_argument("family", choices=["torus", "simplex", "sphere-product"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--ell", type=int, default=2)
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--q", type=int)
    s.add_argument("--d", type=int, default=2, help="qudit dimension")
    s.add_argument("--format", choices=["json", "alist"], default="json")
    s.set_defaults(func=cmd_build_code)

    def sound_args(s):
        s.add_argument("--wmax", type=int, default=4)
        s.add_argument("--side", choices=["Z", "X", "both"], default="both")
        s.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
        s.add_argument("--samples", type=int, default=1000)
        s.add_argument("--budget", type=int, default=DISTANCE_BUDGET)

    s = sub.add_parser("analyze", parents=[common], help="parameters of a code JSON")
    s.add_argument("--code", required=True)
    s.add_argument("--distance", action="store_true")
    s.add_argument("--soundness", action="store_true")
    sound_args(s)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("soundness", parents=[common], help="soundness profile of a code JSON")
    s.add_argument("--code", required=True)
    sound_args(s)
    s.set_defaults(func=cmd_soundness)

    s = sub.add_parser("wedge-report", parents=[common], help="shortest exterior-power vector")
    s.add_argument("--lattice", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--radius", help="enumeration radius (rational)")
    s.set_defaults(func=cmd_wedge_report)

    s = sub.add_parser("experiment", help="experiments")
    esub = s.add_subparsers(dest="experiment", parser_class=_Parser)
    e = esub.add_parser("first-moment", parents=[common],
                        help="frequency of small consistent lattices in random LDA lattices")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--k", type=int)
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--m", type=int, default=2)
    e.add_argument("--c", type=float, default=0.2)
    e.add_argument("--x", type=float, default=4.5)
    e.add_argument("--trials", type=int, default=100)
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    e.add_argument("--no-runtime", action="store_true", help="omit the runtime_ms column")
    e.set_defaults(func=cmd_experiment)
    return ap


def _config(a):
    return {k: v for k, v in sorted(vars(a).items())
            if k not in ("func", "out", "manifest", "replay") and v is not None}


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run(argv):
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.replay:
        data = _load_json(a.replay)
        if "argv" not in data:
            raise InputError(f"{a.replay} is not a manifest")
        return _run(list(data["argv"]))
    if getattr(a, "func", None) is None:
        ap.print_usage(sys.stderr)
        raise InputError("missing subcommand")
    if a.threads < 1:
        raise InputError("--threads must be >= 1")
    if getattr(a, "k", 0) is None:
        a.k = a.n // 2
    t0 = time.perf_counter()
    res = a.func(a)
    wall = time.perf_counter() - t0
    extra = None
    if isinstance(res, tuple):
        text = res[1]
        extra = res[2] if len(res) > 2 else None
    else:
        text = dumps(res) + "\n"
    _write(a.out, text)
    manifest = {
        "argv": list(argv),
        "config": _config(a),
        "versions": {"hdcodes": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "wall_time_s": wall,
        "output": a.out,
    }
    if extra is not None:
        manifest["summary"] = extra
    mpath = a.manifest or (f"{a.out}.manifest.json" if a.out else "hdcodes-manifest.json")
    _write(mpath, dumps(manifest) + "\n")
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        return _run(argv)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
