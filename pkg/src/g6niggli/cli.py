"""Command-line entry point: ``g6niggli <subcommand> ...``.

Exit codes: 0 success, 1 domain error (invalid cell, not reduced, failed
golden comparison, ...), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import boundaries, characters, montecarlo, polytope_lab
from .errors import G6Error
from .g6_core import CellParams, cell_to_g6, check_valid_g6
from .reduction import DEFAULT_TOL, is_niggli_reduced, niggli_reduce


class UsageError(Exception):
    pass


def _vec(v) -> list[float]:
    # repr-exact floats so JSON vectors re-parse to the same values
    return [float(x) for x in np.asarray(v, dtype=float).reshape(-1)]


def _fmt(v) -> str:
    return "(" + ", ".join(f"{x:.10g}" for x in _vec(v)) + ")"


def _read_vectors(args) -> list[np.ndarray]:
    """Input from positional values, ``--file`` or stdin; one vector per line."""
    if args.values:
        lines = [" ".join(args.values)]
    elif args.file:
        with open(args.file) as fh:
            lines = fh.read().splitlines()
    else:
        lines = sys.stdin.read().splitlines()
    out = []
    for line in lines:
        line = line.split("#", 1)[0].replace(",", " ").strip("()[] \t")
        if not line:
            continue
        try:
            nums = [float(x) for x in line.replace("(", " ").replace(")", " ").split()]
        except ValueError:
            raise UsageError(f"cannot parse numbers from {line!r}") from None
        if len(nums) != 6:
            raise UsageError(f"expected 6 numbers, got {len(nums)} in {line!r}")
        out.append(cell_to_g6(CellParams(*nums)) if args.cell else check_valid_g6(nums))
    if not out:
        raise UsageError("no input vectors")
    return out


def _emit(args, payload, text_lines):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(text_lines))


# --- subcommands ------------------------------------------------------------

def cmd_reduce(args) -> int:
    results, lines = [], []
    for g in _read_vectors(args):
        r = niggli_reduce(g, args.tol)
        results.append({"input": _vec(r.input), "reduced": _vec(r.reduced),
                        "basis_transform": r.basis_transform.tolist(),
                        "g6_transform": r.g6_transform.tolist(),
                        "steps": r.steps, "iterations": r.iterations,
                        "branch": r.branch})
        lines.append(f"input    {_fmt(r.input)}")
        lines.append(f"reduced  {_fmt(r.reduced)}  branch {r.branch}")
        lines.append("transform " + " | ".join(" ".join(f"{x:2d}" for x in row)
                                                for row in r.basis_transform))
        lines.append(f"steps    {', '.join(r.steps) or '(none)'}")
    _emit(args, results[0] if len(results) == 1 else results, lines)
    return 0


def cmd_boundaries(args) -> int:
    reports, lines = [], []
    for g in _read_vectors(args):
        rows = boundaries.boundary_report(g, args.tol)
        reports.append({"input": _vec(g), "cases": rows})
        lines.append(f"input {_fmt(g)}")
        lines.append(" case  distance      on-boundary  special")
        for r in rows:
            lines.append(f" {r['case']:>4}  {r['distance']:<12.6g}  {str(r['on_boundary']):<11}  "
                         f"{r['special']}")
    _emit(args, reports[0] if len(reports) == 1 else reports, lines)
    return 0


def cmd_classify(args) -> int:
    out, lines = [], []
    tol = args.tol if args.tol is not None else 1e-6
    for g in _read_vectors(args):
        c = characters.classify(g, tol)
        rows = []
        for entry, d in c.top(args.top):
            rows.append({**entry.to_json(),
                         "distance": d if np.isfinite(d) else None,
                         "match": d <= tol * c.scale,
                         "projected": _vec(entry.projector @ c.input)})
        out.append({"input": _vec(g), "tol": tol, "candidates": rows})
        lines.append(f"input {_fmt(g)}   tol {tol:g}")
        lines.append(" roof  IT  bravais  distance      pattern")
        for r in rows:
            d = "inf" if r["distance"] is None else f"{r['distance']:.6g}"
            star = "*" if r["match"] else " "
            lines.append(f"{star}{r['roof']:>4}  {r['it_character']:>2}  {r['bravais']:<7}  "
                         f"{d:<12}  {r['pattern']}")
        if not c.matches:
            lines.append(" no character within tolerance: triclinic (aP, characters 31/44)")
    _emit(args, out[0] if len(out) == 1 else out, lines)
    return 0


def _catalog_labels() -> dict[tuple, str]:
    return {montecarlo.matrix_key(np.rint(c.M_float).astype(np.int64)): cid
            for cid, c in boundaries.catalog().items()}


def cmd_census(args) -> int:
    seed = montecarlo.effective_seed(args.seed)
    projector = None
    if args.boundary:
        cases, normals = characters.parse_generators(args.boundary.replace(",", ""))
        projector = polytope_lab.intersect_projectors(cases, extra_normals=normals)
    cfg = montecarlo.ProbeConfig(
        seed=seed, trials=args.trials, perturbation_scale=args.scale,
        edge_range=tuple(args.edge_range), boundary_projector=projector,
        step_back=args.step_back, threads=args.threads, tol=args.tol or DEFAULT_TOL)
    census = montecarlo.probe_boundary(cfg) if projector is not None else montecarlo.probe_5d(cfg)
    labels = _catalog_labels()
    ranked = census.ranked()
    try:
        z = montecarlo.zscore_analysis(census)
        zs = dict(zip(z.keys, z.z))
    except G6Error:
        z, zs = None, {}
    rows = [{"rank": i + 1, "count": n, "case": labels.get(k),
             "z": zs.get(k), "matrix": montecarlo.key_matrix(k).tolist()}
            for i, (k, n) in enumerate(ranked[:args.top])]
    payload = {"seed": seed, "trials": census.total_trials, "discarded": census.discarded_count,
               "identity": census.identity, "distinct_matrices": len(ranked),
               "cutoff_index": z.cutoff_index if z else None,
               "mean": z.mean if z else None, "sigma": z.sigma if z else None,
               "populations": rows}
    lines = [f"# seed {seed}", f"# trials {census.total_trials}  discarded "
             f"{census.discarded_count}  distinct matrices {len(ranked)}"]
    if z:
        lines.append(f"# head of {z.cutoff_index} above the first >10x drop: "
                     f"mean {z.mean:.6g}, sigma {z.sigma:.6g}")
    lines.append(" rank      count  case  z")
    for r in rows:
        zt = "" if r["z"] is None else f"{r['z']:+.3f}"
        lines.append(f" {r['rank']:>4}  {r['count']:>9}  {r['case'] or '-':>4}  {zt}")
    if args.plot:
        from .plotting import plot_populations
        shown = ranked[:max(args.top, 1)]
        plot_populations([n for _, n in shown], args.plot,
                         labels=[labels.get(k, "") or str(i + 1) for i, (k, _) in enumerate(shown)],
                         highlight=[i for i, (k, _) in enumerate(shown) if k in labels])
        lines.append(f"# plot written to {args.plot}")
    _emit(args, payload, lines)
    return 0


def cmd_enumerate(args) -> int:
    seed = montecarlo.effective_seed(args.seed)
    result = polytope_lab.enumerate_polytopes(args.budget, seed=seed, threads=args.threads)
    data = polytope_lab.catalog_to_json(result)
    if args.write:
        with open(args.write, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
            fh.write("\n")
    diffs = None
    if args.golden:
        golden = polytope_lab.load_golden(None if args.golden == "builtin" else args.golden)
        diffs = polytope_lab.compare_golden(result, golden)
    payload = {"seed": seed, "probe_budget": args.budget, "census": data["census"],
               "total": data["total"], "subsets_examined": result.subsets_examined,
               "nondegenerate_subsets": result.nondegenerate_subsets,
               "warnings": result.warnings}
    if diffs is not None:
        payload["golden_differences"] = diffs
    lines = [f"# seed {seed}", f"polytopes {data['total']}  census "
             + ", ".join(f"{k}-D: {v}" for k, v in data["census"].items()),
             f"subsets examined {result.subsets_examined}, "
             f"non-degenerate {result.nondegenerate_subsets}"]
    lines += [f"warning: {w}" for w in result.warnings]
    if diffs is not None:
        lines.append("golden: match" if not diffs else f"golden: {len(diffs)} differences")
        lines += [f"  {d}" for d in diffs[:50]]
    _emit(args, payload, lines)
    return 1 if diffs else 0


def cmd_project(args) -> int:
    cases, normals = characters.parse_generators(args.cases.replace(",", ""))
    p = polytope_lab.intersect_projectors(cases, extra_normals=normals)
    dim = polytope_lab.projector_dimension(p)
    p = np.where(np.abs(p) < 1e-13, 0.0, p)
    payload = {"cases": args.cases, "dimension": dim, "projector": p.tolist()}
    lines = [f"cases {args.cases}  dimension {dim}"]
    lines += ["  " + " ".join(f"{x:9.5f}" for x in row) for row in p]
    _emit(args, payload, lines)
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="relative tolerance")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default {montecarlo.DEFAULT_SEED}; "
                             f"${montecarlo.SEED_ENV} overrides)")
    common.add_argument("--threads", type=int, default=1)

    vec = argparse.ArgumentParser(add_help=False)
    vec.add_argument("values", nargs="*", help="six numbers (G6 vector, or a cell with --cell)")
    vec.add_argument("--file", help="read vectors from a file, one per line")
    vec.add_argument("--cell", action="store_true",
                     help="input is a, b, c, alpha, beta, gamma (degrees)")
    vec.add_argument("--g6", dest="cell", action="store_false", help="input is a G6 vector")

    ap = argparse.ArgumentParser(prog="g6niggli", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", parents=[common, vec], help="Niggli-reduce a cell")
    p.set_defaults(func=cmd_reduce)
    p = sub.add_parser("boundaries", parents=[common, vec],
                       help="distance to each of the 15 boundary cases")
    p.set_defaults(func=cmd_boundaries)
    p = sub.add_parser("classify", parents=[common, vec],
                       help="rank lattice characters for a reduced vector")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("census", parents=[common], help="Monte Carlo boundary census")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--scale", type=float, default=1e-4, help="perturbation scale")
    p.add_argument("--edge-range", type=float, nargs=2, default=(1.0, 100.0),
                   metavar=("LO", "HI"))
    p.add_argument("--boundary", "--cases", dest="boundary",
                   help="project starts onto this case set first, e.g. 1,2 or 12F2'F'")
    p.add_argument("--step-back", type=float, default=None)
    p.add_argument("--top", type=int, default=25)
    p.add_argument("--plot", help="write a log-scale population chart (SVG)")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("enumerate", parents=[common], help="enumerate boundary polytopes")
    p.add_argument("--budget", type=int, default=2000, help="witness probes per polytope")
    p.add_argument("--golden", nargs="?", const="builtin",
                   help="compare with a golden catalog JSON (bundled one if no path)")
    p.add_argument("--write", help="write the computed catalog JSON here")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("project", parents=[common], help="projector onto intersected cases")
    p.add_argument("--cases", required=True, help="e.g. 1,2,F or 12F2'F'")
    p.set_defaults(func=cmd_project)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.tol is None and args.command not in ("classify",):
            args.tol = DEFAULT_TOL
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except G6Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
