"""Command-line entry point: curves, pne, simulate, verify, tournament, replay.

Every run writes its artifacts plus ``manifest.json`` into ``--out-dir``.
Exit codes: 0 success, 2 usage, 3 numerical failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import DEBUG_INEQUALITIES, INEQUALITIES, verify_inequalities
from .distributions import Family, Strategy
from .engine import expected_utility, simulate
from .equilibrium import (
    FrontierGrid, expected_curve, expost_curve, find_pne, refinement_check,
)
from .game import COMPARISONS, TIE_RULES, GameConfig
from .quadrature import QuadratureError, QuadratureSpec
from .ridge import DatasetError, TournamentSpec, load_csv, synth_data, tournament

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
TREND_THRESHOLD = 0.9
MANIFEST = "manifest.json"


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _family(text: str) -> Family:
    try:
        return Family.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _strategy(text: str) -> Strategy:
    """``family:mu`` (frontier) or ``family:mu:sigma``."""
    parts = text.split(":")
    try:
        fam = Family.parse(parts[0])
        if len(parts) == 2:
            return Strategy.frontier(fam, float(parts[1]))
        if len(parts) == 3:
            return Strategy(fam, float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad strategy {text!r}: {exc}") from None
    raise argparse.ArgumentTypeError(f"bad strategy {text!r}; use family:mu or family:mu:sigma")


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--reward", type=_positive, default=1.0)
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    g.add_argument("--out-dir", type=Path, default=Path("out"))
    g.add_argument("--abs-tol", type=_positive, default=QuadratureSpec.abs_tol)
    g.add_argument("--rel-tol", type=_positive, default=QuadratureSpec.rel_tol)
    g.add_argument("--max-subdiv", type=int, default=QuadratureSpec.max_subdivisions)
    g.add_argument("--tie-rule", choices=TIE_RULES, default="split-expected")
    g.add_argument("--comparison", choices=COMPARISONS, default="magnitude",
                   help="compare |a_i| (default) or the signed realizations")

    parser = argparse.ArgumentParser(prog="bvgame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curves", parents=[common], help="utility curves on the frontier grid")
    p.add_argument("--family", type=_family, required=True)
    p.add_argument("--kind", choices=("expost", "expected"), required=True)
    p.add_argument("--opponent", type=float, nargs="+", required=True,
                   help="realizations a (expost) or opponent mu_j values (expected)")
    p.add_argument("--grid-step", type=_positive, default=0.01)

    p = sub.add_parser("pne", parents=[common], help="pure Nash equilibria on the frontier grid")
    p.add_argument("--family", type=_family, required=True)
    p.add_argument("--grid-step", type=_positive, default=0.01)
    p.add_argument("--refine", action="store_true", help="re-check each equilibrium on a half-step grid")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo play of two strategies")
    p.add_argument("--p1", type=_strategy, required=True, help="family:mu (frontier) or family:mu:sigma")
    p.add_argument("--p2", type=_strategy, required=True)
    p.add_argument("--rounds", type=int, default=1_000_000)
    p.add_argument("--no-compare", action="store_true", help="skip the quadrature cross-check")

    p = sub.add_parser("verify", parents=[common], help="evaluate the dominance inequalities on a grid")
    p.add_argument("--mu-step", type=_positive, default=0.01)
    p.add_argument("--mu-max", type=float, default=0.99)
    p.add_argument("--a-min", type=float, default=1.0)
    p.add_argument("--a-max", type=float, default=10.0)
    p.add_argument("--a-step", type=_positive, default=0.05)
    p.add_argument("--ids", nargs="+", choices=[*INEQUALITIES, *DEBUG_INEQUALITIES], default=list(INEQUALITIES))
    p.add_argument("--slack", type=float, default=1e-12)

    p = sub.add_parser("tournament", parents=[common], help="two-player ridge regression tournament")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", type=Path)
    src.add_argument("--synthetic", action="store_true")
    p.add_argument("--target", default="y", help="label column of --csv")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--p", type=int, default=8)
    p.add_argument("--noise-sd", type=float, default=1.0)
    p.add_argument("--lambdas", type=float, nargs="+")
    p.add_argument("--repetitions", type=int, default=100)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--write-data", action="store_true", help="also save the synthetic dataset as CSV")
    p.add_argument("--trend-check", action="store_true",
                   help=f"exit {EXIT_VERIFY} unless >= {TREND_THRESHOLD:.0%} of own-lambda steps are nonincreasing")

    p = sub.add_parser("replay", help="re-run a manifest and compare output hashes")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out-dir", type=Path, required=True)
    return parser


def default_lambda_grid() -> list[float]:
    return [0.0] + np.logspace(-1.5, 0.5, 21).tolist()


def _config(args, frontier=False) -> GameConfig:
    return GameConfig(args.reward, args.tie_rule, frontier, args.comparison)


def _quad(args) -> QuadratureSpec:
    return QuadratureSpec(args.abs_tol, args.rel_tol, args.max_subdiv)


def cmd_curves(args, parser) -> tuple[int, list, dict]:
    for v in args.opponent:
        if args.kind == "expost" and v < 0:
            parser.error("expost realizations must be nonnegative")
        if args.kind == "expected" and not 0 <= v <= 1:
            parser.error("expected-curve opponent mu_j must lie in [0, 1]")
    grid = FrontierGrid.regular(args.family, args.grid_step, _config(args, frontier=True))
    quad = _quad(args)
    fn = expost_curve if args.kind == "expost" else expected_curve
    curves = [fn(grid, v, quad) for v in args.opponent]
    outputs = [c.write_csv(args.out_dir / f"{c.stem}.csv") for c in curves]
    summary = [
        {**c.to_dict(), "max_increase": c.max_increase(), "argmax": c.argmax()} for c in curves
    ]
    outputs.append(write_json(args.out_dir / f"curves_{args.kind}_{args.family.value}.json", summary))
    return EXIT_OK, outputs, {}


def cmd_pne(args, parser):
    grid = FrontierGrid.regular(args.family, args.grid_step, _config(args, frontier=True))
    quad = _quad(args)
    res = find_pne(grid, quad, threads=args.threads)
    doc = res.to_dict()
    doc["grid_step"] = args.grid_step
    if args.refine:
        doc["refinement"] = [
            {"pair": list(e), "survives": refinement_check(grid, e, quad)} for e in res.equilibria
        ]
    path = write_json(args.out_dir / f"pne_{args.family.value}_R{args.reward:g}.json", doc)
    return EXIT_OK, [path], {"equilibria": doc["equilibria"]}


def cmd_simulate(args, parser):
    if args.rounds < 1:
        parser.error("--rounds must be at least 1")
    config = _config(args)
    res = simulate(args.p1, args.p2, config, args.rounds, args.seed, threads=args.threads)
    doc = {
        "player1": args.p1.to_dict(),
        "player2": args.p2.to_dict(),
        "config": config.to_dict(),
        "result": res.to_dict(),
        "comparison": None,
    }
    if not args.no_compare:
        try:
            quad = _quad(args)
            eu = (expected_utility(args.p1, args.p2, config, quad),
                  expected_utility(args.p2, args.p1, config, quad))
        except QuadratureError as exc:
            doc["comparison_error"] = str(exc)
        else:
            z = [
                (m - e) / s if s > 0 else (0.0 if m == e else float("inf"))
                for m, e, s in zip(res.mean_payoffs, eu, res.std_errors)
            ]
            doc["comparison"] = {
                "expected_utility": list(eu),
                "z_scores": z,
                "within_4se": all(abs(v) <= 4.0 for v in z),
            }
    path = write_json(args.out_dir / "simulate.json", doc)
    return EXIT_OK, [path], {"mean_payoffs": list(res.mean_payoffs)}


def _grid(lo, hi, step):
    n = int(np.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(n + 1), 12)


def cmd_verify(args, parser):
    if not 0 <= args.mu_max < 1:
        parser.error("--mu-max must lie in [0, 1)")
    if args.a_min < 0 or args.a_max < args.a_min:
        parser.error("need 0 <= --a-min <= --a-max")
    mus = _grid(0.0, args.mu_max, args.mu_step)
    As = _grid(args.a_min, args.a_max, args.a_step)
    rows = verify_inequalities(mus, As, args.ids, args.slack)
    ok = all(r["passed"] for r in rows)
    doc = {
        "mu_grid": {"start": 0.0, "stop": float(mus[-1]), "step": args.mu_step, "size": int(mus.size)},
        "a_grid": {"start": float(As[0]), "stop": float(As[-1]), "step": args.a_step, "size": int(As.size)},
        "slack": args.slack,
        "inequalities": rows,
        "all_passed": ok,
    }
    path = write_json(args.out_dir / "verify.json", doc)
    for r in rows:
        print(f"{r['id']:>16}  {r['asserted']}  {r['extreme_kind']}={r['extreme_value']:+.3e}  "
              f"{'PASS' if r['passed'] else 'FAIL'}")
    return (EXIT_OK if ok else EXIT_VERIFY), [path], {"all_passed": ok}


def cmd_tournament(args, parser):
    outputs = []
    if args.csv is not None:
        if not args.csv.is_file():
            parser.error(f"CSV file not found: {args.csv}")
        try:
            data = load_csv(args.csv, args.target)
        except DatasetError as exc:
            parser.error(str(exc))
        lambdas = args.lambdas or default_lambda_grid()
    else:
        data = synth_data(args.n, args.p, noise_sd=args.noise_sd, seed=args.seed)
        lambdas = args.lambdas or default_lambda_grid()
        if args.write_data:
            outputs.append(data.write_csv(args.out_dir / "synthetic.csv"))
    try:
        spec = TournamentSpec(
            tuple(lambdas), args.test_fraction, args.repetitions, args.reward, args.seed,
            standardize=not args.no_standardize,
        )
    except ValueError as exc:
        parser.error(str(exc))
    pm = tournament(data, spec)
    outputs += pm.write(args.out_dir)
    trend = (pm.trend_fraction(1), pm.trend_fraction(2))
    code = EXIT_OK
    if args.trend_check and min(trend) < TREND_THRESHOLD:
        code = EXIT_VERIFY
    print(f"trend fraction: player1={trend[0]:.3f} player2={trend[1]:.3f}")
    return code, outputs, {"trend_fraction": list(trend)}


COMMANDS = {
    "curves": cmd_curves,
    "pne": cmd_pne,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "tournament": cmd_tournament,
}


def _params(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, Family):
            v = v.value
        elif isinstance(v, Strategy):
            v = v.to_dict()
        out[k] = v
    return out


def replay(args) -> int:
    try:
        manifest = json.loads(args.manifest.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        print(f"bvgame: cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_USAGE
    argv = list(manifest["argv"]) + ["--out-dir", str(args.out_dir)]
    code = main(argv)
    if code != manifest["exit_code"]:
        print(f"replay exit code {code} differs from recorded {manifest['exit_code']}", file=sys.stderr)
        return EXIT_VERIFY
    mismatched = [
        name for name, digest in manifest["outputs"].items()
        if not (args.out_dir / name).is_file() or sha256(args.out_dir / name) != digest
    ]
    for name in mismatched:
        print(f"replay output differs: {name}", file=sys.stderr)
    return EXIT_VERIFY if mismatched else EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "replay":
        return replay(args)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    start = time.perf_counter()
    try:
        code, outputs, summary = COMMANDS[args.command](args, sub)
    except SystemExit as exc:
        return int(exc.code or 0)
    except QuadratureError as exc:
        print(f"bvgame: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {
        "tool": "bvgame",
        "version": __version__,
        "subcommand": args.command,
        "argv": [a for a in _strip_out_dir(argv)],
        "params": _params(args),
        "seed": args.seed,
        "outputs": {p.name: sha256(p) for p in outputs},
        "summary": summary,
        "exit_code": code,
        "duration_s": round(time.perf_counter() - start, 6),
    }
    write_json(args.out_dir / MANIFEST, manifest)
    return code


def _strip_out_dir(argv):
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out-dir":
            skip = True
            continue
        if a.startswith("--out-dir="):
            continue
        out.append(a)
    return out


if __name__ == "__main__":
    sys.exit(main())
