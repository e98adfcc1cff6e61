"""Command-line surface: freecalc {eval|diff|axioms|domain|shiftform|invert}.

All I/O is JSON.  Exit codes: 0 success, 1 suite failure, 2 input/domain
error, 3 dilation error, 4 degenerate derivative, 5 stall.  Errors print a
structured JSON object to stderr.  Every command is deterministic given its
input files and seed; floats are printed with 17 significant digits so
reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import diff, io, shift, solve, suites
from .domain import contains, exhaustion_audit, level_index
from .errors import (
    DegenerateDerivative,
    DilationError,
    FreecalcError,
    InvalidInput,
    StallError,
)
from .expr import eval_map
from .linalg import MatrixTuple

ENV_SEED = "FREECALC_SEED"

_EXIT_CODES = [
    (DilationError, 3),
    (DegenerateDerivative, 4),
    (StallError, 5),
]


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc


def _emit(obj):
    sys.stdout.write(io.dumps(obj) + "\n")


def _jsonable(v):
    if isinstance(v, MatrixTuple):
        return io.tuple_to_json(v)
    if isinstance(v, np.ndarray):
        return io.matrix_to_json(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def load_config(path: str) -> dict:
    """Parse a simple key=value config file (seed, trials, dims, tol, cond_cap)."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{lineno}: expected key=value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        try:
            if key == "seed":
                values["seed"] = int(val)
            elif key == "trials":
                values["trials"] = int(val)
            elif key == "dims":
                values["dims"] = tuple(int(v) for v in val.split(",") if v.strip())
            elif key == "tol":
                values["tol"] = float(val)
            elif key == "cond_cap":
                values["cond_cap"] = float(val)
            else:
                raise InvalidInput(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise InvalidInput(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _suite_config(args) -> suites.SuiteConfig:
    values: dict = {}
    if args.config:
        values.update(load_config(args.config))
    if ENV_SEED in os.environ:
        try:
            values["seed"] = int(os.environ[ENV_SEED])
        except ValueError as exc:
            raise InvalidInput(f"{ENV_SEED} must be an integer: {exc}") from exc
    for key in ("seed", "trials", "tol", "cond_cap"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "dims", None):
        try:
            values["dims"] = tuple(int(v) for v in args.dims.split(","))
        except ValueError as exc:
            raise InvalidInput(f"--dims must be comma-separated integers: {exc}") from exc
    return suites.SuiteConfig(**values)


def _cmd_eval(args) -> int:
    f = io.map_from_json(_load_json(args.map))
    x = io.tuple_from_json(_load_json(args.tuple))
    _emit(io.tuple_to_json(eval_map(f, x)))
    return 0


def _cmd_diff(args) -> int:
    f = io.map_from_json(_load_json(args.map))
    x = io.tuple_from_json(_load_json(args.tuple))
    h = io.tuple_from_json(_load_json(args.direction))
    if args.hessian:
        k = io.tuple_from_json(_load_json(args.hessian))
        result = diff.hessian(f, x, h, k)
        t = 1e-4
        oracle = (diff.derivative(f, x + t * k, h) - diff.derivative(f, x, h)) * (1.0 / t)
        disc = (result - oracle).norm()
        _emit(
            {
                "hessian": io.tuple_to_json(result),
                "oracle_discrepancy": disc,
                "oracle_t": t,
            }
        )
        return 0
    result, eps = diff._derivative_with_eps(f, x, h, None, None)
    t = 1e-5
    fd = diff.derivative_fd(f, x, h, t)
    disc = (result - fd).norm()
    _emit(
        {
            "derivative": io.tuple_to_json(result),
            "fd_discrepancy": disc,
            "fd_t": t,
            "epsilon": eps,
        }
    )
    return 0


def _cmd_axioms(args) -> int:
    f = io.map_from_json(_load_json(args.map))
    config = _suite_config(args)
    report = suites.run_suite(args.suite, f, config)
    # runtime_seconds stays out of the serialized report: reruns of a
    # command with the same files and seed must be byte-identical.
    _emit(
        {
            "suite": report.suite,
            "trials": report.trials,
            "passes": report.passes,
            "failures": report.failures,
            "skipped": report.skipped,
            "worst_discrepancy": report.worst_discrepancy,
            "worst_witness": _jsonable(report.worst_witness),
            "passed": report.passed,
        }
    )
    return 0 if report.passed else 1


def _cmd_domain(args) -> int:
    spec = io.domain_from_json(_load_json(args.spec))
    x = io.tuple_from_json(_load_json(args.tuple))
    out = {"contains": contains(spec, x), "level": level_index(spec, x)}
    if args.audit:
        report = exhaustion_audit(spec, [x], seed=args.seed)
        out["audit"] = {
            "all_passed": report.all_passed,
            "no_common_level": report.no_common_level,
            "levels": report.levels,
            "entries": [
                {"check": e.check, "passed": e.passed, "detail": e.detail}
                for e in report.entries
            ],
        }
    _emit(out)
    return 0


def _cmd_shiftform(args) -> int:
    x = io.tuple_from_json(_load_json(args.tuple))
    form = shift.build_shift_form(x)
    out = {
        "u": io.matrix_to_json(form.u),
        "tilde": io.tuple_to_json(form.tilde),
        "dims": form.flag.dims,
        "alpha": [shift.alpha(k, x.d) for k in range(form.flag.K + 1)],
        "sh1_ok": form.sh1_ok,
        "sh2_ok": form.sh2_ok,
    }
    if args.k is not None:
        checks = shift.sizeshift_components(x, args.k, form=form)
        worst = shift.sizeshift_check(x, args.k, form=form)
        out["sizeshift"] = {
            "k": args.k,
            "lhs": worst.lhs,
            "rhs": worst.rhs,
            "holds": worst.holds,
            "per_component": [
                {"lhs": c.lhs, "rhs": c.rhs, "holds": c.holds} for c in checks
            ],
        }
    if args.sot_demo:
        members = [io.tuple_from_json(_load_json(p)) for p in args.sot_demo]
        demo = shift.truncated_sot_demo(members, lead=args.lead)
        out["sot_demo"] = {
            "lead": demo.lead,
            "alpha_dim": demo.alpha_dim,
            "containment": demo.containment,
            "selected": demo.selected,
            "diameter": demo.diameter,
            "limit": [io.matrix_to_json(m) for m in demo.limit],
        }
    _emit(out)
    return 0


def _trace_json(trace: solve.NewtonTrace, full: bool) -> dict:
    if full:
        iterates = [io.tuple_to_json(z) for z in trace.iterates]
    else:
        iterates = {
            "first": io.tuple_to_json(trace.iterates[0]),
            "last": io.tuple_to_json(trace.iterates[-1]),
        }
    sigma = trace.sigma_min_at_solution
    return {
        "converged": trace.converged,
        "iterations": trace.iterations,
        "residual_norms": trace.residual_norms,
        # NaN marks "linearization not evaluable at the solution"; JSON has
        # no NaN, so it serializes as null.
        "sigma_min_at_solution": sigma if math.isfinite(sigma) else None,
        "solution": io.tuple_to_json(trace.solution),
        "iterates": iterates,
    }


def _cmd_invert(args) -> int:
    f = io.map_from_json(_load_json(args.map))
    y = io.tuple_from_json(_load_json(args.target))
    z0 = io.tuple_from_json(_load_json(args.start))
    if args.implicit:
        trace = solve.implicit_solve(f, y, z0, tol=args.tol, max_iter=args.max_iter)
    else:
        trace = solve.newton_invert(f, y, z0, tol=args.tol, max_iter=args.max_iter)
    _emit(_trace_json(trace, args.full_trace))
    return 0 if trace.converged else 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="freecalc",
        description="Noncommutative function calculus on matrix tuples.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eval", help="evaluate a map at a tuple")
    sp.add_argument("map")
    sp.add_argument("tuple")
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("diff", help="derivative (or Hessian) with an FD cross-check")
    sp.add_argument("map")
    sp.add_argument("tuple")
    sp.add_argument("direction")
    sp.add_argument("--hessian", metavar="KFILE", default=None)
    sp.set_defaults(func=_cmd_diff)

    sp = sub.add_parser("axioms", help="run a randomized structural suite")
    sp.add_argument("map")
    sp.add_argument("--suite", required=True, choices=suites.SUITE_NAMES)
    sp.add_argument("--config", default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--dims", default=None, help="comma-separated dimensions")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--cond-cap", dest="cond_cap", type=float, default=None)
    sp.set_defaults(func=_cmd_axioms)

    sp = sub.add_parser("domain", help="membership and level index")
    sp.add_argument("spec")
    sp.add_argument("tuple")
    sp.add_argument("--audit", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_domain)

    sp = sub.add_parser("shiftform", help="shift form of a tuple")
    sp.add_argument("tuple")
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--sot-demo", nargs="+", default=None, metavar="FILE")
    sp.add_argument("--lead", type=int, default=1)
    sp.set_defaults(func=_cmd_shiftform)

    sp = sub.add_parser("invert", help="Newton inversion or implicit solve")
    sp.add_argument("map")
    sp.add_argument("target")
    sp.add_argument("start")
    sp.add_argument("--implicit", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=50)
    sp.add_argument("--full-trace", action="store_true")
    sp.set_defaults(func=_cmd_invert)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FreecalcError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "position", None) is not None:
            payload["position"] = exc.position
        sys.stderr.write(io.dumps(payload) + "\n")
        for cls, code in _EXIT_CODES:
            if isinstance(exc, cls):
                return code
        return 2


if __name__ == "__main__":
    sys.exit(main())
