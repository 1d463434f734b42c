"""Command-line driver: validate, flow, prescribe, admissible, triangle.

Exit codes: 0 converged or valid, 1 violated or not converged, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import admissibility as adm
from .curvature import curvature_extended, curvature_jacobian, gauss_bonnet_defect, in_omega, restricted_spectrum
from .errors import InvFlowError, ProblemFileError, SurfaceError, TooManySubsets
from .flow import FlowConfig, FlowStatus, estimate_rate, run_flow
from .geometry import (
    TriangleConfig,
    angle_bounds,
    degenerate_radius,
    invert_angle_map,
)
from .problem import load_problem, parse_problem, read_document

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("invflow")


def _floats(a) -> list[float]:
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _emit(args, name: str, doc) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / name, doc)
    if getattr(args, "json", False):
        print(json.dumps(doc, indent=2))


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_trajectory_csv(path: Path, traj) -> None:
    n = traj.final.u.size
    head = ["t", "residual", "in_omega", "potential"]
    head += [f"u_{i}" for i in range(1, n + 1)] + [f"K_{i}" for i in range(1, n + 1)]
    lines = [",".join(head)]
    for s in traj.samples:
        pot = "" if s.potential is None else _fmt(s.potential)
        row = [_fmt(s.t), _fmt(s.residual), "1" if s.in_omega else "0", pot]
        row += [_fmt(x) for x in s.u] + [_fmt(x) for x in s.K]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def residual_svg(times, residuals, width: int = 640, height: int = 400) -> str:
    """log10(residual) against t as a single polyline."""
    t = np.asarray(times, dtype=float)
    y = np.log10(np.maximum(np.asarray(residuals, dtype=float), 1e-300))
    pad = 50
    t0, t1 = float(t.min()), float(t.max()) if t.max() > t.min() else float(t.min()) + 1.0
    y0, y1 = math.floor(y.min()), math.ceil(y.max())
    if y1 == y0:
        y1 = y0 + 1
    px = pad + (t - t0) / (t1 - t0) * (width - 2 * pad)
    py = height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    ticks = []
    for k in range(y0, y1 + 1):
        yy = height - pad - (k - y0) / (y1 - y0) * (height - 2 * pad)
        ticks.append(
            f'<line x1="{pad - 4}" y1="{yy:.2f}" x2="{pad}" y2="{yy:.2f}" stroke="black"/>'
            f'<text x="{pad - 8}" y="{yy + 4:.2f}" font-size="10" text-anchor="end">1e{k}</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
        + "".join(ticks)
        + f'\n<text x="{width / 2:.0f}" y="{height - 15}" font-size="12" text-anchor="middle">'
        f"t (0 to {t1:.4g})</text>\n"
        f'<text x="15" y="{height / 2:.0f}" font-size="12" transform="rotate(-90 15 {height / 2:.0f})" '
        f'text-anchor="middle">sup |K - Kbar|</text>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>\n</svg>\n'
    )


def _config(problem, args) -> FlowConfig:
    s = dict(problem.solver)
    over = {
        "dt": args.dt,
        "t_max": args.t_max,
        "tol": args.tol,
        "method": args.method,
        "normalize": args.normalize,
        "record_every": args.record_every,
    }
    s.update({k: v for k, v in over.items() if v is not None})
    return FlowConfig(
        target=problem.target_values(),
        dt=float(s.get("dt", 0.01)),
        t_max=float(s.get("t_max", 200.0)),
        residual_tol=float(s.get("tol", 1e-10)),
        method=s.get("method", "rk4"),
        normalize=bool(s.get("normalize", True)),
        record_every=int(s.get("record_every", 1)),
        record_potential=True,
    )


def cmd_validate(args) -> int:
    try:
        doc = read_document(args.problem)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        p = parse_problem(doc)
    except (ProblemFileError, SurfaceError, ValueError) as exc:
        report = {"valid": False, "error": type(exc).__name__, "message": str(exc)}
        edge = getattr(exc, "edge", None)
        if edge is not None:
            report["edge"] = list(edge)
        print(f"invalid: {type(exc).__name__}: {exc}")
        _emit(args, "validation.json", report)
        return EXIT_FAIL
    s = p.surface
    chi = s.n_vertices - s.n_edges + s.n_faces
    report = {
        "valid": True,
        "vertices": s.n_vertices,
        "edges": s.n_edges,
        "faces": s.n_faces,
        "euler_characteristic": chi,
        "target": "explicit" if p.target_given else "constant",
    }
    print(f"OK: V={s.n_vertices} E={s.n_edges} F={s.n_faces} chi={chi}")
    _emit(args, "validation.json", report)
    return EXIT_OK


def _run(args, require_target: bool) -> int:
    p = load_problem(args.problem)
    if require_target and not p.target_given:
        raise ProblemFileError("prescribe needs an explicit per-vertex target in the problem file")
    cfg = _config(p, args)
    r0 = p.initial_radii(args.seed)
    t_start = time.perf_counter()
    traj = run_flow(p.surface, p.weights, r0, cfg)
    wall = time.perf_counter() - t_start

    fin = traj.final
    r = traj.final_radii(normalize=True)
    inside = in_omega(p.surface, p.weights, r)
    report = {
        "status": traj.status.value,
        "t_final": float(fin.t),
        "residual": float(fin.residual),
        "steps": traj.steps,
        "dt_halvings": traj.halvings,
        "newton_iterations": traj.newton_iterations,
        "final_radii": _floats(r),
        "final_curvature": _floats(fin.K),
        "target": _floats(cfg.target.values),
        "gauss_bonnet_defect": gauss_bonnet_defect(fin.K, p.surface),
        "in_omega": bool(inside),
    }
    try:
        est = estimate_rate(traj)
        report["rate"] = {"lambda": est.rate, "r_squared": est.r_squared, "samples": est.n_samples}
    except InvFlowError as exc:
        report["rate"] = {"lambda": None, "reason": str(exc)}
    if inside:
        spec = restricted_spectrum(curvature_jacobian(p.surface, p.weights, r))
        report["smallest_nonzero_eigenvalue"] = float(spec[0])
    try:
        nec = adm.check_necessary(p.surface, p.weights, cfg.target.values, args.max_subsets or adm.DEFAULT_SUBSET_BUDGET)
        report["target_necessary_conditions"] = nec.verdict
    except TooManySubsets:
        report["target_necessary_conditions"] = "skipped: too many subsets"
    if args.timing:
        report["wall_time_s"] = wall

    _emit(args, "report.json", report)
    if args.out:
        out = Path(args.out)
        write_trajectory_csv(out / "trajectory.csv", traj)
        if args.svg:
            (out / "residual.svg").write_text(residual_svg(traj.times, traj.residuals))
    rate = report["rate"].get("lambda")
    print(
        f"{traj.status.value}: t={fin.t:.6g} residual={fin.residual:.3e} steps={traj.steps}"
        + (f" rate={rate:.6g}" if rate is not None else "")
    )
    print(f"wall time {wall:.3f} s", file=sys.stderr)
    return EXIT_OK if traj.status == FlowStatus.CONVERGED else EXIT_FAIL


def cmd_flow(args) -> int:
    return _run(args, require_target=False)


def cmd_prescribe(args) -> int:
    return _run(args, require_target=True)


def _report_rows(reports, limit: int):
    worst = sorted(reports, key=lambda r: (r.margin, r.subset))[:limit]
    return [
        {"subset": list(r.subset), "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin, "satisfied": r.satisfied}
        for r in worst
    ]


def cmd_admissible(args) -> int:
    p = load_problem(args.problem)
    budget = args.max_subsets or adm.DEFAULT_SUBSET_BUDGET
    doc: dict = {"necessary_only": True}
    if p.target_given or p.radii is not None or p.random_radii:
        if p.target_given:
            x = p.target
            doc["source"] = "target"
        else:
            x = curvature_extended(p.surface, p.weights, p.initial_radii(args.seed))
            doc["source"] = "curvature of initial radii"
        rep = adm.check_necessary(
            p.surface, p.weights, x, budget, closure=args.closure, sample=args.sample, seed=args.seed
        )
        doc.update(
            mode="closure" if args.closure else "strict",
            verdict=rep.verdict,
            exhaustive=rep.exhaustive,
            subsets=len(rep.reports),
            violated=[list(r.subset) for r in rep.violated],
            worst=_report_rows(rep.reports, args.show),
        )
        ok = not rep.violated
        print(f"{rep.verdict}: {len(rep.reports)} subsets, {len(rep.violated)} violated"
              + ("" if rep.exhaustive else " (sampled, not exhaustive)"))
    else:
        cc = adm.constant_curvature_condition(p.surface, p.weights, budget)
        doc.update(
            source="constant curvature",
            verdict=cc.verdict,
            exhaustive=True,
            subsets=len(cc.reports),
            violated=[list(a) for a in cc.violated_by],
            worst=_report_rows(cc.reports, args.show),
        )
        ok = cc.holds
        print(f"{cc.verdict}: {len(cc.reports)} subsets, {len(cc.violated_by)} violated (necessary conditions only)")
    for row in doc["worst"]:
        print(f"  A={tuple(row['subset'])} margin={row['margin']:.6g}")
    _emit(args, "admissibility.json", doc)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_triangle(args) -> int:
    w = np.asarray(args.I, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ProblemFileError("inversive distances must be finite and >= 0")
    bounds = angle_bounds(w)
    doc: dict = {"inversive": _floats(w), "angle_upper_bounds": _floats(bounds)}
    print("Z bounds (pi - Lambda(I_jk)): " + " ".join(f"{b:.17g}" for b in bounds))
    code = EXIT_OK
    if args.target is not None:
        cfg = invert_angle_map(args.target, w)
        got = cfg.angles()
        doc["target"] = _floats(args.target)
        doc["radii"] = _floats(cfg.radii)
        doc["angle_error"] = float(np.max(np.abs(got - np.asarray(args.target))))
        print("radii: " + " ".join(f"{x:.17g}" for x in cfg.radii))
    if args.sweep:
        rows = []
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            for f in 10.0 ** -np.arange(1, 9):
                r = np.ones(3)
                r[i] = f
                theta = TriangleConfig(r, w).angles()
                rows.append({"vertex": i + 1, "radius": float(f), "angle": float(theta[i]), "bound": float(bounds[i])})
            if w[i] > 1:
                rbar = degenerate_radius(1.0, 1.0, (w[i], w[j], w[k]))
                doc.setdefault("degenerate_radii", {})[str(i + 1)] = rbar
        doc["sweep"] = rows
        for row in rows[7::8]:
            print(f"  vertex {row['vertex']}: r={row['radius']:.0e} angle={row['angle']:.10f} bound={row['bound']:.10f}")
    _emit(args, "triangle.json", doc)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="invflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="directory for report files")
        p.add_argument("--json", action="store_true", help="also print the report as JSON")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-subsets", type=int, default=None, help="largest N for exhaustive subset checks")

    p = sub.add_parser("validate", help="parse and check a problem file")
    p.add_argument("problem")
    common(p)
    p.set_defaults(func=cmd_validate)

    for name, func, hlp in (
        ("flow", cmd_flow, "run the extended flow"),
        ("prescribe", cmd_prescribe, "run the flow towards an explicit target"),
    ):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("problem")
        common(p)
        p.add_argument("--dt", type=float)
        p.add_argument("--t-max", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--method", choices=["explicit-euler", "rk4", "newton-hybrid"])
        p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--record-every", type=int)
        p.add_argument("--svg", action="store_true", help="write residual.svg into --out")
        p.add_argument("--timing", action="store_true", help="include wall time in report.json")
        p.set_defaults(func=func)

    p = sub.add_parser("admissible", help="check the subset half-space conditions")
    p.add_argument("problem")
    common(p)
    p.add_argument("--closure", action="store_true", help="closure mode: margins >= -1e-9 pass")
    p.add_argument("--sample", type=int, help="check this many random subsets instead of all")
    p.add_argument("--show", type=int, default=5, help="number of worst subsets to list")
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("triangle", help="single-triangle angle bounds and inversion")
    p.add_argument("--I", type=float, nargs=3, required=True, metavar=("I23", "I13", "I12"))
    p.add_argument("--target", type=float, nargs=3)
    p.add_argument("--sweep", action="store_true", help="shrink each radius and report the limiting angle")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_triangle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except TooManySubsets as exc:
        print(f"error: {exc}; pass --max-subsets to raise the limit or --sample", file=sys.stderr)
        return EXIT_INPUT
    except (InvFlowError, SurfaceError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
