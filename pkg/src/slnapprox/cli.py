"""Command line front end.

Subcommands: enumerate, volumes, density, sieve, spectral, params, witness,
verify-count.  Exit codes: 0 success, 2 budget exhausted, 3 no witness
found, 4 invalid parameters or input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
from fractions import Fraction

import sympy

from . import densities, engine, enumeration, sieve, spectral, volumes
from .config import DEFAULT_CONFIG, Config
from .core import (
    family_from_file,
    family_from_preset,
    FAMILY_PRESETS,
    identity_matrix,
    to_fraction_matrix,
)
from .errors import (
    AlphaTooLarge,
    BudgetExceeded,
    EnumerationAborted,
    EXIT_BUDGET,
    EXIT_INVALID,
    EXIT_NO_WITNESS,
    EXIT_OK,
    LevelInsufficient,
    MissingDensities,
    NotUnimodular,
    NoWitness,
    SearchSpaceTooLarge,
    SlnApproxError,
    UnsupportedDimension,
    ZeroValue,
)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from exc


def _parse_center(text: str, n_dim: int):
    # called from the command handlers, so failures must surface as the
    # ValueError family that main() maps to the invalid-parameters code
    if text == "identity":
        return identity_matrix(n_dim)
    try:
        raw = json.loads(text)
        return to_fraction_matrix(
            [[Fraction(str(e)) for e in row] for row in raw]
        )
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad center matrix: {exc}") from exc


def _load_family(spec_text: str, n_dim: int):
    if spec_text in FAMILY_PRESETS:
        return family_from_preset(spec_text, n_dim)
    return family_from_file(spec_text)


def _frac_json(fr: Fraction) -> dict:
    return {"num": str(fr.numerator), "den": str(fr.denominator)}


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the invalid-parameters code, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="slnapprox",
        description="Rational points of small denominator near a target matrix: "
        "enumeration, volumes, densities, sieve bounds, spectral decay.",
    )
    parser.add_argument("--group", choices=["sl2", "sl3"], default="sl2")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="force JSON output")
    fmt.add_argument("--csv", action="store_true", help="force CSV output")
    parser.add_argument("--budget", type=int, help="override enumeration budgets")
    parser.add_argument("--seed", type=int, help="seed for randomized fallbacks")
    parser.add_argument("--config", help="JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list points of a denominator ball")
    p.add_argument("--center", default="identity")
    p.add_argument("--radius", type=_parse_fraction, required=True)
    p.add_argument("-n", "--denominator", type=int, required=True)
    p.add_argument(
        "--strategy", choices=["optimized", "oracle", "both"], default="optimized"
    )
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("volumes", help="local shell volumes vs the class count")
    p.add_argument("--p-list", type=_parse_int_list, default=[2, 3, 5, 7, 11, 13])
    p.add_argument("--lmax", type=int, default=3)

    p = sub.add_parser("density", help="zero densities of a polynomial family")
    p.add_argument("--poly", default="entry11")
    p.add_argument("--q", type=_parse_int_list, help="explicit moduli")
    p.add_argument("--p-range", type=int, help="all primes up to this bound")

    p = sub.add_parser("sieve", help="axiom check and lower bound on a point file")
    p.add_argument("--points", required=True, help="JSON-lines file from enumerate")
    p.add_argument("--poly", default="entry11")
    p.add_argument("-n", "--denominator", type=int)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--s", type=float, default=10.0)
    p.add_argument("--q-max", type=int)
    p.add_argument("--delta", type=int, help="gcd obstruction; computed if omitted")

    p = sub.add_parser("spectral", help="averaging operator gap decay")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--lmax", type=int, default=3)
    p.add_argument("--reps", choices=["lagrange", "hermite"], default="lagrange")

    p = sub.add_parser("params", help="exponent threshold and almost-prime bound")
    p.add_argument("--alpha", required=True)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--deg", type=int, default=1)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--a", default="2")

    p = sub.add_parser("witness", help="best approximant in the exponent ball")
    p.add_argument("--center", default="identity")
    p.add_argument("-n", "--denominator", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--poly", default="entry11")

    p = sub.add_parser("verify-count", help="count-to-volume ratios across cells")
    p.add_argument("--centers", default="bounded5", help="bounded5 or a JSON file")
    p.add_argument("--n-list", type=_parse_int_list, default=[53, 59, 61, 67, 71])
    p.add_argument("--epsilon", type=_parse_fraction, default=Fraction(1, 2))
    p.add_argument("--threshold", type=int, default=1000)
    return parser


def _make_config(args) -> Config:
    cfg = Config.from_json(args.config) if args.config else DEFAULT_CONFIG
    if args.budget is not None:
        cfg = dataclasses.replace(
            cfg, oracle_cell_budget=args.budget, optimized_row_budget=args.budget
        )
    return cfg


def _cmd_enumerate(args, cfg: Config, n_dim: int) -> int:
    from .core import BallSpec

    center = _parse_center(args.center, n_dim)
    ball = BallSpec.make(
        center, args.radius, args.denominator, snap_bits=cfg.dyadic_bits
    )
    result = enumeration.enumerate_points(ball, strategy=args.strategy, config=cfg)
    if args.out:
        with open(args.out, "w") as fh:
            enumeration.write_jsonl(result, fh)
    else:
        enumeration.write_jsonl(result, sys.stdout)
    return EXIT_OK


def _cmd_volumes(args, cfg: Config, n_dim: int) -> int:
    print("p,ell,closed_form,oracle,match")
    for p in args.p_list:
        for ell in range(args.lmax + 1):
            closed = volumes.local_ball_volume(p, ell, n_dim, cfg)
            oracle = volumes.hnf_coset_oracle(p, ell)
            print(f"{p},{ell},{closed},{oracle},{str(closed == oracle).lower()}")
    return EXIT_OK


def _cmd_density(args, cfg: Config, n_dim: int) -> int:
    family = _load_family(args.poly, n_dim)
    moduli = list(args.q or [])
    if args.p_range:
        moduli.extend(sympy.primerange(2, args.p_range + 1))
    if not moduli:
        moduli = [2, 3, 5, 7, 11, 13]
    moduli = sorted(set(moduli))
    table = densities.density_table(family, moduli, n_dim, cfg)
    print("q,rho_num,rho_den,order")
    for q in moduli:
        rho = table.value(q)
        print(f"{q},{rho.numerator},{rho.denominator},{table.group_orders[q]}")
    return EXIT_OK


def _cmd_sieve(args, cfg: Config, n_dim: int) -> int:
    with open(args.points) as fh:
        points = enumeration.read_jsonl_points(fh)
    family = _load_family(args.poly, n_dim)
    n = args.denominator
    if n is None:
        dens = {pt.den for pt in points}
        if len(dens) != 1:
            raise ValueError("points have mixed denominators; pass -n explicitly")
        n = dens.pop()
    if args.delta is not None:
        delta = args.delta
    else:
        delta = densities.delta_n(family, n, n_dim, config=cfg).delta
    T = len(points)
    z = float(T) ** (args.tau / args.s) if T else 1.0
    q_max = args.q_max if args.q_max is not None else max(1, int(z))
    needed = set(sieve.squarefree_moduli(q_max, delta * n))
    needed.update(sieve.sieving_primes(z, n, delta))
    rho = densities.density_table(family, sorted(needed), n_dim, cfg)
    report = sieve.run_sieve(
        points, family, n, rho, tau=args.tau, s=args.s, q_max=q_max,
        delta=delta, C1=cfg.c1, C2=cfg.c2,
    )
    json.dump(sieve.sieve_report_to_json_dict(report), sys.stdout, indent=2)
    print()
    return EXIT_OK


def _cmd_spectral(args, cfg: Config, n_dim: int) -> int:
    if n_dim != 2:
        raise UnsupportedDimension("spectral checks are for the 2x2 group")
    report = spectral.gap_decay_report(
        args.p, args.q, range(1, args.lmax + 1), rep_reduction=args.reps, config=cfg
    )
    print("ell,volume,lambda2")
    for row in report.rows:
        print(f"{row.ell},{row.volume},{row.lambda2:.12g}")
    if report.slope is None:
        print("# slope undefined (fewer than two usable rows)")
    else:
        print(
            f"# slope {report.slope:.6f} threshold {report.threshold} "
            f"passed {str(report.passed).lower()}"
        )
    return EXIT_OK


def _cmd_params(args, cfg: Config, n_dim: int) -> int:
    del n_dim
    alpha = Fraction(args.alpha)
    tp = engine.exponent_parameters(
        alpha, t=args.t, deg_f=args.deg, delta_n=args.delta,
        d=args.d, a=Fraction(args.a), config=cfg,
    )
    out = {
        "d": tp.d,
        "a": _frac_json(tp.a),
        "iota": tp.iota,
        "r_g": tp.r_g,
        "t": tp.t,
        "deg_f": tp.deg_f,
        "delta_n": tp.delta_n,
        "alpha": _frac_json(tp.alpha),
        "alpha0": _frac_json(tp.alpha0),
        "alpha_prime": _frac_json(tp.alpha_prime),
        "r": tp.r,
        "kappa": _frac_json(tp.kappa),
        "tau0": _frac_json(tp.tau0),
        "alpha0_restricted": _frac_json(tp.alpha0_restricted),
    }
    json.dump(out, sys.stdout, indent=2)
    print()
    return EXIT_OK


def _cmd_witness(args, cfg: Config, n_dim: int) -> int:
    center = _parse_center(args.center, n_dim)
    family = _load_family(args.poly, n_dim)
    record = engine.find_witness(
        center, args.denominator, args.alpha, family, config=cfg
    )
    out = {
        "n": record.n,
        "alpha": record.alpha,
        "epsilon": _frac_json(record.epsilon),
        "z": record.z.to_json_dict(),
        "distance": _frac_json(record.distance),
        "factor_count": record.factor_count,
        "candidates": record.candidates,
        "zero_values_skipped": record.zero_values_skipped,
        "elapsed_s": record.elapsed_s,
    }
    json.dump(out, sys.stdout, indent=2)
    print()
    return EXIT_OK


def _cmd_verify_count(args, cfg: Config, n_dim: int) -> int:
    if args.centers == "bounded5":
        centers = list(engine.BOUNDED_CENTERS)
    else:
        with open(args.centers) as fh:
            raw = json.load(fh)
        centers = [
            to_fraction_matrix([[Fraction(str(e)) for e in row] for row in mat])
            for mat in raw
        ]
    report = engine.counting_verification(
        centers, args.n_list, args.epsilon, count_threshold=args.threshold, config=cfg
    )
    print("center,n,epsilon,T,volume,ratio,significant")
    for i, row in enumerate(report.rows):
        if row.skipped:
            print(f"{i // len(args.n_list)},{row.n},{row.epsilon},,,{row.skipped},false")
            continue
        print(
            f"{i // len(args.n_list)},{row.n},{row.epsilon},{row.T},{row.volume},"
            f"{float(row.ratio):.6f},{str(row.significant).lower()}"
        )
    if report.spread is None:
        print("# spread not significant (no cell reached the count threshold)")
    else:
        print(
            f"# spread {float(report.spread):.6f} over "
            f"{report.significant_cells} significant cells"
        )
    return EXIT_OK


_COMMANDS = {
    "enumerate": _cmd_enumerate,
    "volumes": _cmd_volumes,
    "density": _cmd_density,
    "sieve": _cmd_sieve,
    "spectral": _cmd_spectral,
    "params": _cmd_params,
    "witness": _cmd_witness,
    "verify-count": _cmd_verify_count,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        random.seed(args.seed)
    n_dim = 2 if args.group == "sl2" else 3
    try:
        cfg = _make_config(args)
        return _COMMANDS[args.command](args, cfg, n_dim)
    except (SearchSpaceTooLarge, BudgetExceeded, EnumerationAborted) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NoWitness as exc:
        print(f"no witness: {exc}", file=sys.stderr)
        return EXIT_NO_WITNESS
    except (
        AlphaTooLarge,
        LevelInsufficient,
        MissingDensities,
        NotUnimodular,
        UnsupportedDimension,
        ZeroValue,
        ValueError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
