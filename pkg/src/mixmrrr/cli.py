"""Command-line entry point: gen, solve, bench, verify."""
from __future__ import annotations

import argparse
import sys

from . import harness
from .mrrr import ConfigError, SolverConfig, solve
from .precision import DOUBLE_QUAD, PrecisionMode
from .verify import residual_and_orthogonality

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2


def _subset(text: str) -> tuple[int, int]:
    try:
        il, iu = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("subset must look like IL:IU") from None
    return il, iu


def _mode(text: str) -> PrecisionMode:
    try:
        return PrecisionMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixmrrr", description="Mixed-precision MRRR tridiagonal eigensolver")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a test matrix")
    g.add_argument("--family", required=True, choices=harness.FAMILIES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", type=_mode, default=DOUBLE_QUAD)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="compute eigenpairs of a matrix file")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--mode", type=_mode, default=DOUBLE_QUAD)
    s.add_argument("--gaptol", type=float)
    s.add_argument("--subset", type=_subset)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")

    b = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    b.add_argument("--suite", choices=sorted(harness.SUITE_SIZES), default="quick")
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="residual and orthogonality of stored pairs")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--pairs", required=True)
    v.add_argument("--mode", type=_mode, default=DOUBLE_QUAD)
    return p


def _cmd_gen(a) -> int:
    spec = harness.MatrixSpec(a.family, a.n, a.seed)
    harness.write_matrix(a.out, harness.generate(spec, a.mode))
    return EXIT_OK


def _cmd_solve(a) -> int:
    config = SolverConfig(mode=a.mode, gaptol=a.gaptol, subset=a.subset, threads=a.threads, seed=a.seed)
    T = harness.read_matrix(a.inp, a.mode)
    res = solve(T, config)
    if a.out:
        harness.write_pairs(a.out, res.pairs, T.n)
    s = res.stats
    print(f"pairs={len(res.pairs)} d_max={s.d_max} rho={s.rho!r} "
          f"robustness_failures={s.robustness_failures} rqi_fallbacks={s.rqi_fallbacks}")
    return EXIT_OK


def _cmd_bench(a) -> int:
    if a.threads < 1:
        raise ConfigError("threads must be positive")
    records = harness.run_bench(harness.suite(a.suite, a.seed), threads=a.threads)
    harness.write_csv(a.out, records)
    return EXIT_OK


def _cmd_verify(a) -> int:
    T = harness.read_matrix(a.inp, a.mode)
    pairs = harness.read_pairs(a.pairs, a.mode)
    if pairs and pairs[0].z.shape[0] != T.n:
        raise harness.MatrixFormatError("pairs do not match the matrix dimension")
    rep = residual_and_orthogonality(T, pairs, a.mode)
    print(f"R={rep.R!r} O={rep.O!r}")
    return EXIT_OK


COMMANDS = {"gen": _cmd_gen, "solve": _cmd_solve, "bench": _cmd_bench, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[a.command](a)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
