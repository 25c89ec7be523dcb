"""Command-line front end.

Exit codes: 0 property holds / counterexample valid, 1 violated / invalid,
2 usage or parse error, 3 inconclusive (depth or iteration limit).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .abstraction import Partition, PartitionError, quotient
from .cegar import Valid, VerdictKind, cegar_loop, check_validity, gen_min_cex
from .formula import FormulaError, parse_formula
from .mdp import Mdp
from .modelcheck import check
from .modelio import (
    ModelSyntaxError,
    export_dot,
    parse_mdp_file,
    parse_partition_file,
    print_mdp,
    print_partition,
    read_cex,
    write_cex,
)
from .onthefly import OtfKind, otf_check

HOLDS, VIOLATED, USAGE, INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _model(path: str) -> Mdp:
    try:
        return parse_mdp_file(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    except (ModelSyntaxError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _partition(path: str | None, m: Mdp) -> Partition:
    if path is None:
        return Partition.identity(len(m))
    try:
        return parse_partition_file(Path(path).read_text(), m)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    except (ModelSyntaxError, PartitionError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _seed(args) -> int | None:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("PCEGAR_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"PCEGAR_SEED must be an integer, got {env!r}") from None


def cmd_check(args) -> int:
    m = _model(args.model)
    psi = parse_formula(args.formula)
    ok = check(m, psi)
    print("holds" if ok else "violated")
    return HOLDS if ok else VIOLATED


def cmd_abstract(args) -> int:
    m = _model(args.model)
    quo = quotient(m, _partition(args.partition, m))
    sys.stdout.write(print_mdp(quo.abstract))
    return HOLDS


def cmd_cex(args) -> int:
    m = _model(args.model)
    psi = parse_formula(args.formula)
    part = _partition(args.partition, m)
    abstract = quotient(m, part).abstract
    if check(abstract, psi):
        print("holds: no counterexample")
        return HOLDS
    cex = gen_min_cex(abstract, psi, args.order, _seed(args))
    if args.out:
        write_cex(args.out, cex, abstract)
    sys.stdout.write(print_mdp(cex.e))
    return VIOLATED


def cmd_validate(args) -> int:
    m = _model(args.model)
    part = _partition(args.partition, m)
    abstract = quotient(m, part).abstract
    cex = _read_cex(args.cexdir, abstract)
    res = check_validity(m, part, cex)
    if isinstance(res, Valid):
        print("valid")
        for a, q in res.relation.pairs():
            print(f"{cex.e.names[a]}\t{m.names[q]}")
        return HOLDS
    print(f"invalid at {cex.e.names[res.state]} (sweep {res.sweeps})")
    return VIOLATED


def _read_cex(directory: str, abstract: Mdp):
    try:
        return read_cex(directory, abstract)
    except OSError as exc:
        raise UsageError(f"{directory}: {exc.strerror}") from None
    except ModelSyntaxError as exc:
        raise UsageError(f"{directory}: {exc}") from None


def cmd_cegar(args) -> int:
    m = _model(args.model)
    psi = parse_formula(args.formula)
    init = _partition(args.partition, m) if args.partition else None
    res = cegar_loop(m, psi, init=init, max_iters=args.max_iters, order=args.order, seed=_seed(args))
    for rec in res.trace:
        print(rec.line())
    if args.trace:
        out = Path(args.trace)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.txt").write_text("".join(r.line() + "\n" for r in res.trace))
        for rec in res.trace:
            d = out / f"iter{rec.iteration:03d}"
            d.mkdir(exist_ok=True)
            (d / "partition.txt").write_text(print_partition(m, rec.partition))
            (d / "abstract.mdp").write_text(print_mdp(rec.quotient.abstract))
            if rec.cex is not None:
                write_cex(d / "cex", rec.cex, rec.quotient.abstract)
    kind = res.verdict.kind
    print(kind.value)
    return {VerdictKind.HOLDS: HOLDS, VerdictKind.VIOLATED: VIOLATED}.get(kind, INCONCLUSIVE)


def cmd_otf(args) -> int:
    m = _model(args.model)
    part = _partition(args.partition, m)
    abstract = quotient(m, part).abstract
    cex = _read_cex(args.cexdir, abstract)
    psi = parse_formula(args.formula)
    res = otf_check(m, part, cex, psi, max_depth=args.max_depth, incremental=args.incremental,
                    decimal_trace=args.decimal)
    if args.verbose:
        for line in res.trace():
            print(line)
    print(f"{res.kind.value} k={res.depth}")
    return {OtfKind.SAFETY_VIOLATED: HOLDS, OtfKind.NOT_SIMULATED: VIOLATED}.get(res.kind, INCONCLUSIVE)


def cmd_dot(args) -> int:
    p = Path(args.target)
    if p.is_dir():
        e = _model(str(p / "cex.mdp"))
        if args.abstract:
            abstract = _model(args.abstract)
            sys.stdout.write(export_dot(_read_cex(str(p), abstract), abstract))
        else:
            sys.stdout.write(export_dot(e))
    else:
        sys.stdout.write(export_dot(_model(args.target)))
    return HOLDS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcegar", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def order_opts(p):
        p.add_argument("--order", choices=["default", "reverse", "random"], default="default")
        p.add_argument("--seed", type=int, default=None, help="seed for --order random (else $PCEGAR_SEED)")

    p = sub.add_parser("check", help="model check a formula")
    p.add_argument("model")
    p.add_argument("formula")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("abstract", help="print the quotient MDP")
    p.add_argument("model")
    p.add_argument("partition")
    p.set_defaults(func=cmd_abstract)

    p = sub.add_parser("cex", help="minimal counterexample against a quotient (identity by default)")
    p.add_argument("model")
    p.add_argument("formula")
    p.add_argument("--partition")
    p.add_argument("--out", help="write cex.mdp and rel.tsv to this directory")
    order_opts(p)
    p.set_defaults(func=cmd_cex)

    p = sub.add_parser("validate", help="check validity of a counterexample directory")
    p.add_argument("model")
    p.add_argument("partition")
    p.add_argument("cexdir")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cegar", help="run abstraction refinement")
    p.add_argument("model")
    p.add_argument("formula")
    p.add_argument("--partition")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--trace", help="dump per-iteration artifacts here")
    order_opts(p)
    p.set_defaults(func=cmd_cegar)

    p = sub.add_parser("otf", help="on-the-fly check for weak-safety formulas")
    p.add_argument("model")
    p.add_argument("partition")
    p.add_argument("cexdir")
    p.add_argument("formula")
    p.add_argument("--max-depth", type=int, default=10**6)
    p.add_argument("--incremental", action="store_true")
    p.add_argument("--decimal", action="store_true", help="print trace probabilities as decimals")
    p.set_defaults(func=cmd_otf)

    p = sub.add_parser("dot", help="Graphviz export of a model or counterexample directory")
    p.add_argument("target")
    p.add_argument("--abstract", help="abstract model file, to draw the relation of a counterexample")
    p.set_defaults(func=cmd_dot)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else HOLDS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, FormulaError, PartitionError, ModelSyntaxError) as exc:
        print(f"pcegar: {exc}", file=sys.stderr)
        return USAGE
    except ValueError as exc:
        print(f"pcegar: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
