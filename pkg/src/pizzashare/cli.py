"""Command-line front end: validate, gen, solve, verify, verify-lines,
map-back, eval, export-etr, render.

Exit codes: 0 success/verified, 1 verification failed, 2 input error,
3 solver budget exhausted.  All outputs are deterministic given the inputs
and --seed; PIZZA_THREADS caps solver workers without affecting results.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .geometry import (
    InstanceError,
    PizzaInstance,
    Point2,
    normalize_instance,
    parse_instance,
    parse_scalar,
    serialize_instance,
    validate_instance,
)
from .measure import (
    bu_eval,
    compile_instance,
    export_etr,
    serialize_eval_report,
)
from .reductions import (
    CHSolution,
    StraightCutSet,
    lines_to_ch_cuts,
    parse_ch_instance,
    parse_ch_solution,
    parse_lines,
    parse_meta,
    path_to_ch_cuts,
    reduce_checkerboard,
    reduce_exact,
    reduce_overlapping,
    reduce_straight,
    serialize_ch_solution,
    serialize_lines,
    serialize_meta,
    verify_ch,
    verify_scpath,
    verify_straight,
)
from .scpath import (
    HSeg,
    SCPath,
    parse_path,
    path_polyline,
    serialize_path,
    solution_to_path,
    sphere_to_solution,
)
from .solver import BudgetError, SolverConfig, solve

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InstanceError(f"cannot write {path}: {exc}") from exc


def _load_instance(path: str) -> PizzaInstance:
    inst = parse_instance(_read(path))
    if not inst.normalized:
        inst, _ = normalize_instance(inst)
        print("note: instance normalized into the unit square", file=sys.stderr)
    return inst


# ---------------------------------------------------------------------------
# Rendering (deterministic SVG)
# ---------------------------------------------------------------------------

PALETTE = (
    "#e41a1c",
    "#377eb8",
    "#4daf4a",
    "#984ea3",
    "#ff7f00",
    "#a65628",
    "#f781bf",
    "#999999",
)

_CANVAS = 512.0
_MARGIN = 24.0


def _svg_xy(p: Point2) -> tuple[float, float]:
    span = _CANVAS - 2 * _MARGIN
    return (_MARGIN + float(p.x) * span, _CANVAS - _MARGIN - float(p.y) * span)


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _poly_path(chains: list[tuple[Point2, ...]]) -> str:
    parts = []
    for chain in chains:
        coords = [_svg_xy(p) for p in chain]
        parts.append(
            "M " + " L ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in coords) + " Z"
        )
    return " ".join(parts)


def _clip_line_to_unit(a: Fraction, b: Fraction, c: Fraction) -> list[Point2]:
    pts = []
    if b != 0:
        for x in (Fraction(0), Fraction(1)):
            y = (c - a * x) / b
            if 0 <= y <= 1:
                pts.append(Point2(x, y))
    if a != 0:
        for y in (Fraction(0), Fraction(1)):
            x = (c - b * y) / a
            if 0 <= x <= 1:
                pts.append(Point2(x, y))
    uniq = sorted(set((p.x, p.y) for p in pts))
    return [Point2(x, y) for x, y in uniq]


def _render_path_svg(path: SCPath) -> list[str]:
    out = []
    pts, wraps = path_polyline(path)
    for (p, q), wrap in zip(zip(pts, pts[1:]), wraps):
        if wrap:
            # travel leaves p away from q, crossing the x=0/x=1 seam
            seam = Fraction(0) if p.x <= q.x else Fraction(1)
            other = Fraction(1) - seam
            for s, e in ((p, Point2(seam, p.y)), (Point2(other, q.y), q)):
                x1, y1 = _svg_xy(s)
                x2, y2 = _svg_xy(e)
                out.append(
                    f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                    'stroke="#111111" stroke-width="2.5" stroke-dasharray="7 5"/>'
                )
        else:
            x1, y1 = _svg_xy(p)
            x2, y2 = _svg_xy(q)
            out.append(
                f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                'stroke="#111111" stroke-width="2.5"/>'
            )
    return out


def render_svg(
    inst: PizzaInstance,
    path: SCPath | None = None,
    lines: StraightCutSet | None = None,
) -> str:
    """Static vector image: one fill color per mass, optional overlays."""
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_CANVAS)}" '
        f'height="{int(_CANVAS)}" viewBox="0 0 {int(_CANVAS)} {int(_CANVAS)}">',
        f'<rect width="{int(_CANVAS)}" height="{int(_CANVAS)}" fill="#ffffff"/>',
    ]
    x0, y0 = _svg_xy(Point2(Fraction(0), Fraction(1)))
    span = _CANVAS - 2 * _MARGIN
    body.append(
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(span)}" height="{_fmt(span)}" '
        'fill="none" stroke="#bbbbbb" stroke-width="1"/>'
    )
    for idx, mass in enumerate(inst.masses):
        color = PALETTE[idx % len(PALETTE)]
        for poly in mass.polygons:
            d = _poly_path([poly.outer, *poly.holes])
            body.append(
                f'<path d="{d}" fill="{color}" fill-opacity="0.45" fill-rule="evenodd" '
                f'stroke="{color}" stroke-width="1"/>'
            )
    if path is not None:
        body.extend(_render_path_svg(path))
    if lines is not None:
        for a, b, c in lines.lines:
            ends = _clip_line_to_unit(a, b, c)
            if len(ends) >= 2:
                x1, y1 = _svg_xy(ends[0])
                x2, y2 = _svg_xy(ends[-1])
                body.append(
                    f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                    'stroke="#111111" stroke-width="2"/>'
                )
    body.append("</svg>")
    return "\n".join(body) + "\n"


def _write_figure(path: str, inst: PizzaInstance, masses) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [str(m.color_id) for m in inst.masses]
    side_a = [float(a) for a, _ in masses]
    side_b = [float(b) for _, b in masses]
    xs = range(len(labels))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([x - 0.2 for x in xs], side_a, width=0.4, label="side A")
    ax.bar([x + 0.2 for x in xs], side_b, width=0.4, label="side B")
    ax.set_xticks(list(xs), labels)
    ax.set_xlabel("color")
    ax.set_ylabel("mass")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    inst = parse_instance(_read(args.instance))
    validate_instance(inst)
    totals = ", ".join(
        f"color {m.color_id}: {m.total_mass()}" for m in inst.masses
    )
    print(f"valid instance with {inst.n} colors ({totals})")
    return EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    ch = parse_ch_instance(_read(args.src))
    eps = parse_scalar(args.eps) if args.eps is not None else None
    if args.reduction == "overlapping":
        inst, meta = reduce_overlapping(ch)
    elif args.reduction == "checkerboard":
        if eps is None:
            raise InstanceError("checkerboard reduction needs --eps")
        inst, meta = reduce_checkerboard(ch, eps, mode=args.mode)
    elif args.reduction == "straight":
        if eps is None:
            raise InstanceError("straight reduction needs --eps")
        inst, meta = reduce_straight(ch, eps, parse_scalar(args.delta), mode=args.mode)
    else:
        inst, meta = reduce_exact(ch)
    _write(args.output, serialize_instance(inst))
    if args.meta:
        _write(args.meta, serialize_meta(meta))
    print(
        f"{args.reduction} reduction: {inst.n} colors, "
        f"{sum(len(m.polygons) for m in inst.masses)} polygons"
    )
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    ci = compile_instance(inst)
    cfg = SolverConfig(
        epsilon=parse_scalar(args.eps),
        turns=args.turns,
        method=args.method,
        rng_seed=args.seed,
        grid_resolution=args.grid_resolution,
    )
    report = solve(ci, cfg, inst)
    if args.output:
        _write(args.output, serialize_path(report.point))
    masses = [(a, t - a) for a, t in zip(bu_eval(ci, report.point), ci.totals)]
    if args.report:
        _write(args.report, serialize_eval_report(inst, masses))
    if args.figure:
        _write_figure(args.figure, inst, masses)
    print(
        f"status={report.status} residual={float(report.residual):.3e} "
        f"turns={report.path.turns} evaluations={report.evaluations} "
        f"time={report.wall_time:.2f}s verified={report.verified_exact}"
    )
    return EXIT_OK if report.verified_exact else EXIT_BUDGET


def _cmd_verify(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    point = parse_path(_read(args.path))
    sol = sphere_to_solution(point)
    meta = parse_meta(_read(args.meta)) if args.meta else None
    rep = verify_scpath(inst, sol, parse_scalar(args.eps), meta)
    gaps = ", ".join(f"{float(g):.3e}" for g in rep.gaps)
    print(
        f"{'PASS' if rep.ok else 'FAIL'} gaps=[{gaps}] "
        f"turns={rep.turns}/{rep.turn_budget}"
    )
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_FAILED


def _cmd_verify_lines(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    lines = parse_lines(_read(args.lines))
    rep = verify_straight(inst, lines, parse_scalar(args.eps))
    ok = rep.ok
    if args.meta:
        meta = parse_meta(_read(args.meta))
        if meta.budget is not None and len(lines.lines) > meta.budget:
            print(
                f"line budget exceeded: {len(lines.lines)} > {meta.budget}",
                file=sys.stderr,
            )
            ok = False
    gaps = ", ".join(f"{float(g):.3e}" for g in rep.gaps)
    print(f"{'PASS' if ok else 'FAIL'} gaps=[{gaps}]")
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_map_back(args: argparse.Namespace) -> int:
    meta = parse_meta(_read(args.meta))
    if bool(args.path) == bool(args.lines):
        raise InstanceError("map-back needs exactly one of --path or --lines")
    if args.path:
        sol = sphere_to_solution(parse_path(_read(args.path)))
        ch_sol = path_to_ch_cuts(meta, sol)
    else:
        ch_sol = lines_to_ch_cuts(meta, parse_lines(_read(args.lines)))
    _write(args.output, serialize_ch_solution(ch_sol))
    print(f"{len(ch_sol.cuts)} cuts, first label {ch_sol.first_label!r}")
    if args.src:
        ch = parse_ch_instance(_read(args.src))
        if args.eps is None:
            raise InstanceError("verifying a map-back needs --eps")
        rep = verify_ch(ch, ch_sol, parse_scalar(args.eps))
        gaps = ", ".join(f"{float(g):.3e}" for g in rep.gaps)
        print(f"{'PASS' if rep.ok else 'FAIL'} gaps=[{gaps}]")
        return EXIT_OK if rep.ok else EXIT_FAILED
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    ci = compile_instance(inst)
    point = parse_path(_read(args.path))
    masses = [(a, t - a) for a, t in zip(bu_eval(ci, point), ci.totals)]
    report = serialize_eval_report(inst, masses)
    if args.output:
        _write(args.output, report)
    else:
        sys.stdout.write(report)
    if args.figure:
        _write_figure(args.figure, inst, masses)
    return EXIT_OK


def _cmd_export_etr(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    ci = compile_instance(inst)
    formula = export_etr(ci, args.turns)
    _write(args.output, formula.text)
    print(
        f"{len(formula.variables)} variables "
        f"({formula.max_count} max gates, {formula.min_count} min gates)"
    )
    return EXIT_OK


def _cmd_render(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    path = None
    if args.path:
        path = solution_to_path(sphere_to_solution(parse_path(_read(args.path))))
    lines = parse_lines(_read(args.lines)) if args.lines else None
    _write(args.output, render_svg(inst, path, lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pizzashare",
        description="Exact square-cut and straight-cut pizza sharing.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("gen", help="encode a consensus-halving instance as pizza")
    p.add_argument("--from", dest="src", required=True, help="consensus-halving JSON")
    p.add_argument(
        "--reduction",
        required=True,
        choices=("overlapping", "checkerboard", "straight", "exact"),
    )
    p.add_argument("--eps", help="target accuracy driving the construction")
    p.add_argument("--delta", default="1/2", help="extra-lines exponent (straight)")
    p.add_argument("--mode", default="exact", choices=("exact", "approx"))
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--meta", help="where to write the map-back metadata")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="find a square-cut path balancing all colors")
    p.add_argument("--instance", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--turns", type=int, required=True)
    p.add_argument("--method", default="multistart", choices=("multistart", "grid"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-resolution", type=int, default=64)
    p.add_argument("-o", "--output")
    p.add_argument("--report", help="write a per-color CSV mass report")
    p.add_argument("--figure", help="write a bar-chart figure of the split")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="check a path against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--meta", help="reduction metadata for gadget diagnostics")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("verify-lines", help="check straight-line cuts")
    p.add_argument("--instance", required=True)
    p.add_argument("--lines", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--meta", help="reduction metadata enforcing the line budget")
    p.set_defaults(func=_cmd_verify_lines)

    p = sub.add_parser("map-back", help="turn a pizza solution into interval cuts")
    p.add_argument("--meta", required=True)
    p.add_argument("--path")
    p.add_argument("--lines")
    p.add_argument("--from", dest="src", help="verify against this consensus-halving file")
    p.add_argument("--eps")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_map_back)

    p = sub.add_parser("eval", help="per-color masses of a path, as CSV")
    p.add_argument("--instance", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--figure", help="write a bar-chart figure of the split")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("export-etr", help="emit the residual-zero formula")
    p.add_argument("--instance", required=True)
    p.add_argument("--turns", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_export_etr)

    p = sub.add_parser("render", help="draw an instance (and overlay) as SVG")
    p.add_argument("--instance", required=True)
    p.add_argument("--path")
    p.add_argument("--lines")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
