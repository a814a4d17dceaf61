"""Command line front end.

Exit codes: 0 ok, 2 parse error, 3 invariant violation, 4 critical system,
5 not contractive, 6 numerical failure, 7 iteration limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from .errors import ShiftFloquetError
from .floquet import (floquet_decompose, periodic_solution_exists_homogeneous, theta_parts,
                      transition_table)
from .periodic_solver import (PeriodicVectorFunction, check_conditions, solve_picard,
                              verify_solution)
from .problem import load_problem
from .timescale import catalog_systems, verify_period, verify_shift_axioms

COMMANDS = ("axioms", "transition", "floquet", "theta", "check", "solve", "verify", "report")


# ---------------------------------------------------------------------------
# serialization

def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e17:
        return f"{int(x)}.0" if x or math.copysign(1, x) > 0 else "-0.0"
    return format(x, ".17g")


def plain(obj):
    """Convert numpy and complex values into JSON-ready python objects."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dump_json(obj, indent=0) -> str:
    """JSON text with floats written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dump_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dump_json(v) for v in obj) + "]"
        items = [inner + dump_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    return json.dumps(obj)


def dump_csv(tables: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for i, (name, (header, rows)) in enumerate(tables.items()):
        if len(tables) > 1:
            if i:
                buf.write("\n")
            buf.write(f"# {name}\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{_num(v.real)}{'+' if v.imag >= 0 else '-'}{_num(abs(v.imag))}j"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return "" if v is None else str(v)


def _matrix_cols(prefix, n):
    return [f"{prefix}{i + 1}{j + 1}" for i in range(n) for j in range(n)]


# ---------------------------------------------------------------------------
# commands; each returns (document, tables)

def cmd_axioms(args, p):
    systems = {p.name: p.sys} if p is not None else catalog_systems()
    reports, rows = {}, []
    for label, s in systems.items():
        rep = verify_shift_axioms(s).to_dict()
        if s.P is not None:
            ok, per = verify_period(s, s.P)
            rep["period"] = per.to_dict()
        reports[label] = rep
        for a in rep["axioms"]:
            ce = a["counterexample"]
            rows.append([label, a["name"], a["passed"], a["checked"],
                         "" if ce is None else " ".join(_num(v) for v in ce)])
    doc = {"systems": reports, "all_passed": all(r["all_passed"] for r in reports.values())}
    return doc, {"axioms": (["system", "axiom", "passed", "checked", "counterexample"], rows)}


def _closed_window(p):
    return range(p.sys.k0, p.k_end + 1)


def cmd_transition(args, p):
    Phi = transition_table(p.A, p.k_end)
    rows = [[p.point(k)] + Phi[k].ravel().tolist() for k in _closed_window(p)]
    doc = {"t0": p.sys.t0, "T": p.T,
           "table": [{"t": p.point(k), "Phi": Phi[k]} for k in _closed_window(p)]}
    return doc, {"transition": (["t"] + _matrix_cols("Phi", p.n), rows)}


def cmd_floquet(args, p):
    critical, spectrum = periodic_solution_exists_homogeneous(p.A, p.T, args.spectral_tol)
    fd = floquet_decompose(p.A, p.T)
    R_rows, L_rows, R_doc, L_doc = [], [], [], []
    for k in p.window:
        t = p.point(k)
        R = fd.R.at_index(k)
        L = fd.L[t]
        R_rows.append([t] + R.ravel().tolist())
        L_rows.append([t] + L.ravel().tolist())
        R_doc.append({"t": t, "R": R})
        L_doc.append({"t": t, "L": L})
    doc = {"M": fd.M, "spectrum": spectrum, "eigenvalue_one": critical,
           "noncritical": not critical, "R": R_doc, "L": L_doc, "residuals": fd.residuals()}
    tables = {
        "monodromy": (["row"] + [f"c{j + 1}" for j in range(p.n)],
                      [[i + 1] + fd.M[i].tolist() for i in range(p.n)]),
        "spectrum": (["index", "eigenvalue", "abs_minus_one"],
                     [[i + 1, complex(w), abs(w - 1)] for i, w in enumerate(spectrum)]),
        "R": (["t"] + _matrix_cols("R", p.n), R_rows),
        "L": (["t"] + _matrix_cols("L", p.n), L_rows),
    }
    return doc, tables


def cmd_theta(args, p):
    rows = []
    stop = p.sys.iterate_index(p.kT, p.sys.k0, args.horizon_periods)
    for k in range(p.sys.k0, stop + 1):
        m, G, th, member = theta_parts(p.sys, p.T, p.point(k))
        rows.append([p.point(k), m, G, th, member])
    header = ["t", "m", "G", "Theta", "in_P"]
    doc = {"T": p.T, "t0": p.sys.t0, "table": [dict(zip(header, r)) for r in rows]}
    return doc, {"theta": (header, rows)}


def _report(args, p):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = check_conditions(p, seed=args.seed, horizon_periods=args.horizon_periods)
    return rep, [str(w.message) for w in caught]


def cmd_check(args, p):
    rep, notes = _report(args, p)
    doc = rep.to_dict()
    doc["problem_checks"] = dict(p.checks)
    doc["warnings"] = notes
    rows = [[k, v] for k, v in doc.items() if not isinstance(v, (list, dict))]
    rows += [[f"check:{k}", v] for k, v in p.checks.items()]
    return doc, {"conditions": (["quantity", "value"], rows)}


def _solve(args, p, rep):
    tol = args.tol if args.tol is not None else p.solver.get("tol", 1e-12)
    max_iter = args.max_iter if args.max_iter is not None else p.solver.get("max_iter", 10000)
    return solve_picard(p, tol=tol, max_iter=max_iter, report=rep, force=args.force_noncontractive)


def _solution_doc(p, x):
    pts = [p.point(k) for k in p.window]
    return {"t": pts, "x": x.values, "norm": x.norm()}


def _solution_table(p, x):
    rows = [[p.point(k)] + x.values[i].tolist() for i, k in enumerate(p.window)]
    return ["t"] + [f"x{i + 1}" for i in range(p.n)], rows


def cmd_solve(args, p):
    rep, notes = _report(args, p)
    x, diag = _solve(args, p, rep)
    res = verify_solution(p, x)
    doc = {"solution": _solution_doc(p, x), "diagnostics": vars(diag),
           "residuals": res, "conditions": rep.to_dict(), "warnings": notes}
    return doc, {"solution": _solution_table(p, x),
                 "residuals": (["residual", "value"], [[k, v] for k, v in res.items()])}


def _read_solution(path, p):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    sol = doc.get("solution", doc)
    if "x" not in sol:
        raise ValueError("solution file lacks an 'x' table")
    return PeriodicVectorFunction(p.sys, p.T, np.asarray(sol["x"], dtype=float))


def cmd_verify(args, p):
    if args.solution:
        x = _read_solution(args.solution, p)
        source = args.solution
    else:
        rep, _ = _report(args, p)
        x, _ = _solve(args, p, rep)
        source = "picard"
    res = verify_solution(p, x)
    doc = {"source": source, "solution": _solution_doc(p, x), "residuals": res}
    return doc, {"residuals": (["residual", "value"], [[k, v] for k, v in res.items()])}


def cmd_report(args, p):
    doc, tables = {}, {}
    for name in ("axioms", "transition", "floquet", "theta", "check", "solve"):
        d, t = COMMAND_FUNCS[name](args, p)
        doc[name] = d
        tables.update({f"{name}:{k}" if k != name else k: v for k, v in t.items()})
    return doc, tables


COMMAND_FUNCS = {
    "axioms": cmd_axioms, "transition": cmd_transition, "floquet": cmd_floquet,
    "theta": cmd_theta, "check": cmd_check, "solve": cmd_solve,
    "verify": cmd_verify, "report": cmd_report,
}


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", help="problem file, or a bundled name "
                        "(dyadic_example, alternating_example)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--tol", type=float, help="Picard step tolerance")
    common.add_argument("--max-iter", type=int, dest="max_iter")
    common.add_argument("--seed", type=int, default=0, help="seed for Lipschitz estimation")
    common.add_argument("--horizon-periods", type=int, default=4, dest="horizon_periods")
    common.add_argument("--force-noncontractive", action="store_true",
                        help="run damped iteration when the contraction test fails")
    common.add_argument("--spectral-tol", type=float, default=1e-8, dest="spectral_tol")

    ap = argparse.ArgumentParser(prog="shiftfloquet",
                                 description="Periodic solutions of neutral delay systems "
                                             "on isolated time scales.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify":
            sp.add_argument("--solution", help="JSON written by the solve command")
    return ap


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    if args.horizon_periods < 1:
        print("error: --horizon-periods must be at least 1", file=stderr)
        return 2
    try:
        if args.problem is None and args.command != "axioms":
            print("error: --problem is required", file=stderr)
            return 2
        p = load_problem(args.problem) if args.problem is not None else None
        doc, tables = COMMAND_FUNCS[args.command](args, p)
    except ShiftFloquetError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    text = dump_json(plain(doc)) + "\n" if args.format == "json" else dump_csv(tables)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
