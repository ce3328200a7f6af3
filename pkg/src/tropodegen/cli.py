"""Command line front end.

JSON is the default output; ``--format csv`` and ``--format table`` give
flat views.  Exit status is 0 on success, 2 for bad input and 3 when a
numeric computation fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fixture_path
from .equations import (
    ShapeAssignment,
    build_gluing_system,
    format_gluing_equations,
    format_matching_equations,
    matrix_csv,
    system_to_json,
)
from .errors import InputError, NumericError, SchemaError
from .geometry import (
    SolveOptions,
    develop,
    fig8_degeneration_path,
    holonomy_eval,
    solve,
    track_degeneration,
    trace_squared,
    volume,
)
from .surfaces import boundary_slopes, nontriviality_certificate, nu_evaluate, peripheral_basis
from .triangulation import load_triangulation
from .tropical import QuadCoordinate, enumerate_pf_vertices, quads_to_xi

TOL_ENV = "TROPODEGEN_TOL"


# -- output helpers -----------------------------------------------------------------


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return x


def _cx(x: complex) -> str:
    scale = max(1.0, abs(x))
    re = x.real if abs(x.real) > 1e-12 * scale else 0.0
    im = x.imag if abs(x.imag) > 1e-12 * scale else 0.0
    return f"{re:.12g}{im:+.12g}i"


def _vec(v) -> str:
    return "(" + ",".join(str(_num(x)) for x in v) + ")"


def _emit_json(doc) -> None:
    print(json.dumps(doc, indent=2))


def _emit_rows(fmt: str, headers: list[str], rows: list[list]) -> None:
    rows = [[str(c) for c in r] for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(headers)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
        return
    widths = [max([len(h)] + [len(r[k]) for r in rows]) for k, h in enumerate(headers)]
    print("  ".join(h.ljust(n) for h, n in zip(headers, widths)).rstrip())
    for r in rows:
        print("  ".join(c.ljust(n) for c, n in zip(r, widths)).rstrip())


def _tolerance(default: float) -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return default
    try:
        tol = float(raw)
    except ValueError:
        raise SchemaError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0:
        raise SchemaError(f"{TOL_ENV} must be positive")
    return tol


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace("i", "j").replace(" ", ""))
    except ValueError:
        raise SchemaError(f"cannot read {text!r} as a complex number") from None


def _parse_shapes(text: str) -> list[complex]:
    return [_parse_complex(t) for t in text.split(",") if t.strip()]


def _shapes_or_complete(args, T, S) -> ShapeAssignment:
    if args.shapes:
        return ShapeAssignment.from_z(_parse_shapes(args.shapes))
    basis = peripheral_basis(T)
    curves = [c for pair in basis.values() for c in pair]
    return solve(S, curves, SolveOptions(complete=True, tolerance=_tolerance(1e-12)))


# -- subcommands ---------------------------------------------------------------------


def cmd_equations(args) -> None:
    T = load_triangulation(args.file)
    S = build_gluing_system(T)
    if args.format == "csv":
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, M in (("A", S.A), ("B", S.B)):
            (out / f"{name}.csv").write_text(matrix_csv(M))
            print(out / f"{name}.csv")
    elif args.format == "table":
        print("gluing equations")
        for line in format_gluing_equations(S):
            print("  " + line)
        print("matching equations")
        for line in format_matching_equations(S):
            print("  " + line)
    else:
        _emit_json({"manifold": T.name, **system_to_json(S)})


def _vertex_rows(T, S, vertices, certify: bool):
    curves = list(T.peripheral_curves)
    basis = peripheral_basis(T) if curves else {}
    rows = []
    for N in vertices:
        row = {
            "N": [_num(x) for x in N.integral()],
            "xi": [_num(x) for x in quads_to_xi(N).values],
            "nu": {c.name: _num(nu) for c, nu in _nus(N, curves, S)},
        }
        if basis:
            report = boundary_slopes(N, basis, S, T.cusp_count)
            row["slopes"] = [
                None if c.slope is None else _num(c.slope) for c in report.cusps
            ]
            notes = [c.note for c in report.cusps if c.note]
            if notes:
                row["notes"] = notes
        if certify:
            row["certificate"] = nontriviality_certificate(N, curves, S).verdict
        rows.append(row)
    return rows


def _nus(N, curves, S):
    return [(c, nu_evaluate(N, c, S)) for c in curves]


def _print_vertex_rows(args, T, rows) -> None:
    if args.format == "json":
        _emit_json({"manifold": T.name, "vertices": rows})
        return
    names = [c.name for c in T.peripheral_curves]
    headers = ["solution"] + [f"nu({n})" for n in names]
    if T.peripheral_curves:
        headers += ["slope"] if T.cusp_count == 1 else [f"slope{k}" for k in range(T.cusp_count)]
    if args.certify:
        headers.append("certificate")
    table = []
    for r in rows:
        line = [_vec(r["N"])] + [r["nu"][n] for n in names]
        if "slopes" in r:
            line += ["undefined" if s is None else s for s in r["slopes"]]
        if args.certify:
            line.append(r["certificate"])
        table.append(line)
    _emit_rows(args.format, headers, table)


def cmd_ideal_points(args) -> None:
    T = load_triangulation(args.file)
    S = build_gluing_system(T)
    if args.jobs < 1:
        raise SchemaError("--jobs must be at least 1")
    vertices = enumerate_pf_vertices(S, jobs=args.jobs)
    _print_vertex_rows(args, T, _vertex_rows(T, S, vertices, args.certify))


def cmd_slopes(args) -> None:
    T = load_triangulation(args.file)
    S = build_gluing_system(T)
    if args.quads:
        try:
            values = [Fraction(x.strip()) for x in args.quads.split(",")]
        except ValueError:
            raise SchemaError(f"cannot read quad coordinates {args.quads!r}") from None
        vertices = [QuadCoordinate(values)]
    else:
        vertices = enumerate_pf_vertices(S)
    basis = peripheral_basis(T)
    if args.format == "json":
        out = []
        for N in vertices:
            report = boundary_slopes(N, basis, S, T.cusp_count).to_json()
            out.append({"N": [_num(x) for x in N.values], **report})
        _emit_json({"manifold": T.name, "surfaces": out})
        return
    headers = ["solution", "cusp", "nu(M)", "nu(L)", "slope"]
    table = []
    for N in vertices:
        for c in boundary_slopes(N, basis, S, T.cusp_count).cusps:
            slope = "undefined" if c.slope is None else _num(c.slope)
            table.append([_vec(N.values), c.cusp, _num(c.nu_meridian), _num(c.nu_longitude), slope])
    _emit_rows(args.format, headers, table)


def _shape_json(Z: ShapeAssignment, names) -> list:
    return [
        {"tet": names[i] if names else i, "z": _num(t[0]), "z'": _num(t[1]), "z''": _num(t[2])}
        for i, t in enumerate(Z.triples)
    ]


def cmd_solve(args) -> None:
    T = load_triangulation(args.file)
    S = build_gluing_system(T)
    curves = []
    if args.complete:
        curves = [c for pair in peripheral_basis(T).values() for c in pair]
    fixed = {}
    for item in args.fix or []:
        try:
            idx, val = item.split("=", 1)
            fixed[int(idx)] = _parse_complex(val)
        except ValueError:
            raise SchemaError(f"--fix expects INDEX=VALUE, got {item!r}") from None
    opts = SolveOptions(
        initial=_parse_shapes(args.initial) if args.initial else None,
        complete=args.complete,
        tolerance=_tolerance(1e-12),
        fixed=fixed,
        seed=args.seed,
    )
    Z = solve(S, curves, opts)
    doc = {
        "manifold": T.name,
        "complete": args.complete,
        "shapes": _shape_json(Z, T.shape_names),
        "iterations": Z.info["iterations"],
        "attempts": Z.info["attempts"],
        "max_residual": Z.info["residual"],
        "volume": volume(Z),
    }
    if args.format == "json":
        _emit_json(doc)
    else:
        rows = [[s["tet"], _cx(t[0]), _cx(t[1]), _cx(t[2])] for s, t in zip(doc["shapes"], Z.triples)]
        _emit_rows(args.format, ["tet", "z", "z'", "z''"], rows)


def cmd_volume(args) -> None:
    T = load_triangulation(args.file)
    S = build_gluing_system(T)
    Z = _shapes_or_complete(args, T, S)
    vol = volume(Z)
    if args.format == "json":
        _emit_json({"manifold": T.name, "volume": vol})
    else:
        _emit_rows(args.format, ["volume"], [[f"{vol:.12f}"]])


def cmd_holonomy(args) -> None:
    T = load_triangulation(args.file)
    S = build_gluing_system(T)
    try:
        curves = [T.curve(args.curve)] if args.curve else list(T.peripheral_curves)
    except KeyError:
        raise SchemaError(f"no curve named {args.curve!r}") from None
    Z = _shapes_or_complete(args, T, S)
    rows = []
    for c in curves:
        mu = holonomy_eval(Z, c)
        rows.append({"curve": c.name, "mu": _num(mu), "trace_squared": _num(trace_squared(Z, c))})
    if args.format == "json":
        _emit_json({"manifold": T.name, "holonomy": rows})
    else:
        table = [[r["curve"], _cx(complex(*r["mu"])), _cx(complex(*r["trace_squared"]))] for r in rows]
        _emit_rows(args.format, ["curve", "mu", "trace^2"], table)


def cmd_develop(args) -> None:
    T = load_triangulation(args.file)
    S = build_gluing_system(T)
    Z = _shapes_or_complete(args, T, S)
    D = develop(T, Z)

    def point(x):
        return "inf" if not np.isfinite(x) else _num(complex(x))

    def matrix(M):
        return [[_num(complex(x)) for x in row] for row in M]

    doc = {
        "manifold": T.name,
        "positions": [[point(x) for x in p] for p in D.positions],
        "face_pairings": [
            {"tet": i, "face": f, "matrix": matrix(M), "trace_squared": _num(complex(np.trace(M) ** 2))}
            for (i, f), M in sorted(D.generators.items())
        ],
        "curves": [
            {"curve": c.name, "trace_squared": _num(complex(np.trace(D.curve_matrix(c)) ** 2))}
            for c in T.peripheral_curves
        ],
    }
    if args.format == "json":
        _emit_json(doc)
    else:
        rows = [[f"{r['tet']}:{r['face']}", _cx(complex(*r["trace_squared"]))] for r in doc["face_pairings"]]
        rows += [[r["curve"], _cx(complex(*r["trace_squared"]))] for r in doc["curves"]]
        _emit_rows(args.format, ["pairing", "trace^2"], rows)


def _read_path(path: str):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None
    samples = doc.get("samples") if isinstance(doc, dict) else doc
    if not isinstance(samples, list):
        raise SchemaError("path file needs a list of samples")
    out = []
    for k, s in enumerate(samples):
        if not isinstance(s, dict) or not isinstance(s.get("shapes"), list):
            raise SchemaError(f"sample {k} needs a 'shapes' list")
        zs = []
        for x in s["shapes"]:
            if isinstance(x, str):
                zs.append(_parse_complex(x))
            elif isinstance(x, list) and len(x) == 2:
                zs.append(complex(float(x[0]), float(x[1])))
            else:
                raise SchemaError(f"sample {k}: cannot read shape {x!r}")
        out.append((s.get("r"), ShapeAssignment.from_z(zs)))
    return out


def cmd_degenerate(args) -> None:
    if args.fig8_builtin == bool(args.path):
        raise SchemaError("give exactly one of --path FILE or --fig8-builtin")
    T = load_triangulation(args.file or fixture_path("fig8"))
    S = build_gluing_system(T)
    if args.fig8_builtin:
        if args.samples < 1:
            raise SchemaError("--samples must be at least 1")
        path = fig8_degeneration_path(args.samples)
    else:
        path = _read_path(args.path)
    vertices = enumerate_pf_vertices(S)
    result = track_degeneration(
        path, [quads_to_xi(N) for N in vertices], S, threshold=args.threshold, window=args.window
    )
    labels = [_vec(N.integral()) for N in vertices]
    verdict = "NONE" if result.verdict is None else labels[result.verdict]
    if args.format == "json":
        _emit_json({
            "manifold": T.name,
            "candidates": labels,
            "samples": [
                {
                    "r": s.r,
                    "u": s.u,
                    "normalized_log": [float(x) for x in s.normalized],
                    "distances": list(s.distances),
                }
                for s in result.samples
            ],
            "verdict": verdict,
        })
        return
    headers = ["r", "u"] + [f"d{label}" for label in labels]
    rows = [[s.r, f"{s.u:.6e}"] + [f"{d:.6e}" for d in s.distances] for s in result.samples]
    _emit_rows(args.format, headers, rows)
    if args.format == "table":
        print(f"verdict: {verdict}")


# -- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tropodegen",
        description="Gluing equations, ideal points, boundary slopes and shape solutions "
        "for ideal triangulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, file_optional=False, formats=("json", "csv", "table")):
        p = sub.add_parser(name, help=help_)
        if file_optional:
            p.add_argument("file", nargs="?", help="triangulation JSON (default: built-in fig8)")
        else:
            p.add_argument("file", help="triangulation JSON")
        p.add_argument("--format", choices=formats, default="json")
        p.set_defaults(func=func)
        return p

    p = add("equations", cmd_equations, "gluing and matching equations")
    p.add_argument("--out-dir", default=".", help="directory for A.csv and B.csv")

    p = add("ideal-points", cmd_ideal_points, "vertices of the admissible solution space")
    p.add_argument("--certify", action="store_true", help="add the non-triviality verdict")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for enumeration")

    p = add("slopes", cmd_slopes, "boundary slopes of quad vectors")
    p.add_argument("--quads", help="comma separated quad coordinates (default: all vertices)")

    p = add("solve", cmd_solve, "solve the gluing equations")
    p.add_argument("--complete", action="store_true", help="also impose completeness")
    p.add_argument("--initial", help="comma separated starting shapes")
    p.add_argument("--fix", action="append", metavar="INDEX=VALUE", help="hold a shape fixed")
    p.add_argument("--seed", type=int, default=0, help="seed for restart points")

    for name, func, help_ in (
        ("volume", cmd_volume, "volume of a shape assignment"),
        ("holonomy", cmd_holonomy, "peripheral holonomy and trace squared"),
        ("develop", cmd_develop, "developing map and face pairings"),
    ):
        p = add(name, func, help_)
        p.add_argument("--shapes", help="comma separated shapes (default: complete structure)")
        if name == "holonomy":
            p.add_argument("--curve", help="curve name (default: all curves)")

    p = add("degenerate", cmd_degenerate, "track a path towards an ideal point", file_optional=True)
    p.add_argument("--path", help="JSON file of shape samples")
    p.add_argument("--fig8-builtin", action="store_true", help="use the analytic fig8 path")
    p.add_argument("--samples", type=int, default=20, help="samples on the built-in path")
    p.add_argument("--threshold", type=float, default=1e-3)
    p.add_argument("--window", type=int, default=5)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
