"""Command-line front end.

Commands: solve a single instance file, run the synthetic benchmark sweep
(CSV plus figures), emit synthetic fixtures, and dump intermediate
polynomials with exact integer coefficients for regression fixtures.

Exit codes: 0 success, 1 usage or input error, 2 no solution.  stdout
carries only the machine-readable payload; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import NoSolution, SolverError
from .normalize import ProblemInstance, apply_normalization
from .poly import rat


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def load_instance(path: str) -> ProblemInstance:
    """Parse an instance file: {"baseline": d, "views": [[[x, y] x4] x3]}."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "views" not in doc or "baseline" not in doc:
        raise ValueError("instance file needs 'baseline' and 'views' fields")
    views = doc["views"]
    if not isinstance(views, list) or len(views) != 3:
        n = len(views) if isinstance(views, list) else 0
        raise ValueError(f"expected 3 views, got {n}")
    for j, view in enumerate(views):
        if not isinstance(view, list) or len(view) != 4:
            n = len(view) if isinstance(view, list) else 0
            raise ValueError(f"view {j + 1}: expected 4 points, got {n}")
        for i, pt in enumerate(view):
            if not isinstance(pt, list) or len(pt) != 2:
                raise ValueError(f"view {j + 1} point {i + 1}: expected [x, y]")
    points = tuple(
        tuple((rat(str(x)) if isinstance(x, str) else rat(x),
               rat(str(y)) if isinstance(y, str) else rat(y))
              for (x, y) in view)
        for view in views
    )
    return ProblemInstance(points=points, baseline=rat(doc["baseline"]))


def _solution_payload(sol) -> dict:
    return {
        "R2": [[float(x) for x in row] for row in np.asarray(sol.r2)],
        "R3": [[float(x) for x in row] for row in np.asarray(sol.r3)],
        "t": [float(x) for x in sol.t],
        "sigma": int(sol.sigma),
        "O2": [float(x) for x in sol.o2],
        "O3": [float(x) for x in sol.o3],
        "points": [[float(x) for x in p] for p in sol.points],
        "reproj_error": float(sol.reproj_error),
        "n_real_roots": int(sol.n_real_roots),
    }


def cmd_solve(args) -> int:
    from .recover import solve

    try:
        inst = load_instance(args.instance)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        sol = solve(inst)
    except NoSolution as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    json.dump(_solution_payload(sol), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_bench(args) -> int:
    from .report import render_benchmark_figures
    from .synth import ScenarioConfig, run_benchmark, summarize, write_csv

    try:
        cfg = ScenarioConfig(kind=args.config, trials=args.trials, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.sigma_max < 0 or args.sigma_step <= 0:
        print("error: sigma grid must be nonnegative with positive step",
              file=sys.stderr)
        return 1
    sigmas = []
    k = 0
    while True:
        s = round(k * args.sigma_step, 10)
        if s > args.sigma_max + 1e-12:
            break
        sigmas.append(s)
        k += 1
    rows = run_benchmark(
        cfg,
        sigmas=sigmas,
        threads=args.threads,
        include_runtime=not args.omit_runtime,
    )
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    for s in summarize(rows):
        print(
            "  {config} sigma={sigma_px}: ok {n_ok}/{n} "
            "rot mean/median {rot_mean:.3e}/{rot_median:.3e} deg, "
            "transl {transl_mean:.3e}/{transl_median:.3e} deg".format(**s),
            file=sys.stderr,
        )
    if not args.no_plot:
        out_dir = os.path.dirname(os.path.abspath(args.out))
        stem = os.path.splitext(os.path.basename(args.out))[0]
        for path in render_benchmark_figures(rows, out_dir, stem):
            print(f"wrote figure {path}", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    from .synth import ScenarioConfig, add_noise, generate_scene

    try:
        cfg = ScenarioConfig(kind=args.config, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    inst, gt = generate_scene(cfg, args.trial)
    if args.sigma > 0:
        kind_flag = 0 if cfg.kind == "generic" else 1
        rng = np.random.default_rng(
            [cfg.seed, args.trial, kind_flag, int(round(args.sigma * 1000)), 7]
        )
        inst = add_noise(inst, args.sigma, rng)
    doc = {
        "baseline": float(inst.baseline),
        "views": [[[float(x), float(y)] for (x, y) in view]
                  for view in inst.points],
    }
    payload = json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(payload)
    if args.gt_out:
        gt_doc = {
            "R2": gt.r2.tolist(),
            "R3": gt.r3.tolist(),
            "t": gt.t.tolist(),
            "O2": gt.o2.tolist(),
            "O3": gt.o3.tolist(),
            "points": gt.points.tolist(),
            "lam": gt.lam,
            "sigma": gt.sigma,
        }
        with open(args.gt_out, "w") as fh:
            json.dump(gt_doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.gt_out}", file=sys.stderr)
    return 0


def cmd_dump(args) -> int:
    from .constraints import build_reduced_system
    from .eliminate import build_eliminant

    try:
        inst = load_instance(args.instance)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        norm = apply_normalization(inst)
        sys_ = build_reduced_system(norm)
    except SolverError as exc:
        print(f"solver failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    def unipoly_doc(p):
        return [str(int(c)) for c in p.int_coeffs()]

    def mpoly_doc(p):
        p = p.primitive()
        terms = sorted(p.terms.items())
        return {
            "vars": list(p.vars),
            "terms": [[list(e), str(int(c))] for e, c in terms],
        }

    if args.stage == "system":
        doc = {
            "h2": mpoly_doc(sys_.h2),
            "h3": mpoly_doc(sys_.h3),
            "hmix": mpoly_doc(sys_.hmix),
        }
    else:
        try:
            elim = build_eliminant(sys_, norm)
        except SolverError as exc:
            print(f"solver failed: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 2
        if args.stage == "s":
            doc = {"s": unipoly_doc(elim.S)}
        elif args.stage == "s2":
            doc = {"s2": unipoly_doc(elim.S2)}
        elif args.stage == "s3":
            doc = {"s3": unipoly_doc(elim.S3)}
        else:  # unreachable: argparse restricts choices
            return 1
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="collinear4p3v",
        description="Four-point three-view pose solver for collinear cameras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance", help="path to the instance JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run the synthetic noise sweep")
    p.add_argument("--config", choices=("generic", "planar"), default="generic")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--sigma-max", type=float, default=1.0)
    p.add_argument("--sigma-step", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench.csv")
    p.add_argument("--threads", type=int, default=None,
                   help="trial parallelism (default: COLLINEAR4P3V_THREADS or all cores)")
    p.add_argument("--omit-runtime", action="store_true",
                   help="blank the runtime column for byte-for-byte comparisons")
    p.add_argument("--no-plot", action="store_true",
                   help="skip rendering the error-curve figures")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="emit a synthetic instance fixture")
    p.add_argument("--config", choices=("generic", "planar"), default="generic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out", default=None)
    p.add_argument("--gt-out", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dump", help="dump exact intermediate polynomials")
    p.add_argument("instance", help="path to the instance JSON")
    p.add_argument("--stage", choices=("s", "s2", "s3", "system"), required=True)
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
