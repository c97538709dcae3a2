"""Command-line entry point.

Exit codes: 0 success or passing check, 1 failing check, 2 usage error,
3 malformed input.  Randomized commands default to ``--seed 0``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import formats
from .access_structure import (StructureError, builtin_structure, diagonal_refutation,
                               gdelta_membership, gen_membership, minimize_generators,
                               normalize_witness)
from .bridge import run_perfect_pipeline, run_ramp_pipeline
from .classifier import classify
from .gaussian_ramp import (QualifiedSetError, conditional_check, hilbert_from_witness,
                            orthogonal_decompose, simulate, wrapped_density_bounds)
from .linear_scheme import (NotQualified, MissingShare, deal, joint_distribution, recover)
from .span_program import from_generators, realized_structure, realizes
from .tail_threshold import (conditional_secret_distribution, eventual_value_recover,
                             sample)

DEFAULT_SEED = 0


class CheckFailed(Exception):
    """Carries output for a command whose check did not pass."""


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise formats.FormatError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _set(text: str):
    try:
        return formats.parse_set(text)
    except formats.FormatError:
        raise
    except ValueError as exc:
        raise formats.FormatError(str(exc)) from None


def _fmt_set(s) -> str:
    return " ".join(map(str, sorted(s)))


# -- structure ------------------------------------------------------------------------

def cmd_structure(args) -> str:
    if args.action == "minimize":
        gens = formats.parse_generators(_read(args.generators))
        return formats.dump_structure(minimize_generators(gens))
    if args.action == "member":
        A = _set(args.set)
        if args.witness:
            w = formats.parse_witness(_read(args.witness))
            ok = gdelta_membership(w, A, args.level)
        else:
            ok = gen_membership(formats.parse_generators(_read(args.generators)), A)
        if not ok:
            raise CheckFailed("false\n")
        return "true\n"
    if args.action == "normalize":
        return formats.dump_witness(normalize_witness(formats.parse_layers(_read(args.layers))))
    if args.action == "builtin":
        params = dict(max_index=args.max_index, levels=args.levels, m=args.m)
        if args.forbidden:
            params["forbidden"] = [_set(part) for part in args.forbidden.split(";")]
        elif args.name == "forbidden":
            raise formats.FormatError("--forbidden is required for the forbidden builtin")
        obj = builtin_structure(args.name, **params)
        return formats.dump_witness(obj) if hasattr(obj, "levels") else formats.dump_structure(obj)
    if args.action == "refute":
        sets = formats.parse_generators(_read(args.sets))
        w = formats.parse_witness(_read(args.witness))
        return "refutation " + _fmt_set(diagonal_refutation(sets, w)) + "\n"
    raise AssertionError(args.action)


# -- span ---------------------------------------------------------------------------

def cmd_span(args) -> str:
    if args.action == "build":
        gens = formats.parse_generators(_read(args.generators))
        return formats.dump_span(from_generators(gens, args.prime))
    program = formats.parse_span(_read(args.program))
    if args.action == "realize":
        if not realizes(program, _set(args.set)):
            raise CheckFailed("false\n")
        return "true\n"
    if args.action == "structure":
        universe = _set(args.universe) if args.universe else None
        return formats.dump_structure(realized_structure(program, universe))
    raise AssertionError(args.action)


# -- scheme -------------------------------------------------------------------------

def cmd_scheme(args) -> str:
    if args.action == "classify" and args.table:
        table = formats.parse_table(_read(args.table))
        program = None
    else:
        program = formats.parse_span(_read(args.program))
    if args.action == "deal":
        return formats.dump_dealing(deal(program, args.seed))
    if args.action == "recover":
        _, shares = formats.parse_dealing(_read(args.dealing))
        value = recover(program, _set(args.set), formats.shares_as_lists(shares))
        return f"secret {value}\n"
    if args.action == "enumerate":
        observed = _set(args.observed) if args.observed is not None else program.universe
        table = joint_distribution(program, observed, workers=args.workers)
        return formats.dump_table(table)
    if args.action == "classify":
        structure = formats.parse_structure(_read(args.structure))
        if program is not None:
            table = joint_distribution(program, program.universe | structure.participants,
                                       workers=args.workers)
        result = classify(table, structure)
        lines = [f"label {result.label}", f"c {result.c if result.c is not None else 'inf'}",
                 f"realizes {str(result.realizes).lower()}"]
        for k in ("perfect", "almost_perfect", "ramp", "almost_ramp"):
            lines.append(f"condition {k} {str(result.conditions[k]).lower()}")
        for B in sorted(result.c_B, key=lambda s: (len(s), sorted(s))):
            lines.append(f"c_B {{{_fmt_set(B)}}} {result.c_B[B]}")
        for v in result.violations:
            lines.append("violation " + " ".join(
                "{" + _fmt_set(x) + "}" if isinstance(x, frozenset) else formats.format_atom(x)
                for x in v))
        text = "\n".join(lines) + "\n"
        if result.label == "none":
            raise CheckFailed(text)
        return text
    raise AssertionError(args.action)


# -- gauss --------------------------------------------------------------------------

def cmd_gauss(args) -> str:
    if args.action == "bounds":
        return f"c {wrapped_density_bounds(args.sigma):.15g}\n"
    if args.action == "build":
        w = formats.parse_witness(_read(args.witness))
        if not w.normalized:
            w = normalize_witness(w.levels)
        return formats.dump_hilbert(hilbert_from_witness(w, args.levels))
    program = formats.parse_hilbert(_read(args.program))
    if args.action == "decompose":
        d = orthogonal_decompose(program, _set(args.set))
        return (f"v1_norm_sq {d.v1_norm_sq:.15g}\nv2_norm_sq {d.v2_norm_sq:.15g}\n"
                f"target_norm_sq {d.target_norm_sq:.15g}\nrank {d.rank}\n"
                f"qualified {str(d.qualified).lower()}\n"
                "coeffs " + " ".join(f"{c:.15g}" for c in d.projection_coeffs) + "\n")
    if args.action == "simulate":
        return simulate(program, args.samples, args.seed, wrap=args.wrap,
                        workers=args.workers).to_text()
    if args.action == "check":
        rep = conditional_check(program, _set(args.set), args.samples, args.seed,
                                wrap=args.wrap, workers=args.workers)
        text = "\n".join(rep.lines()) + "\n"
        if not rep.passed or rep.band_passed is False:
            raise CheckFailed(text)
        return text
    raise AssertionError(args.action)


# -- tail ---------------------------------------------------------------------------

def _observations(args) -> dict[int, int]:
    obs: dict[int, int] = {}
    if args.obs_file:
        obs.update(formats.parse_observations(_read(args.obs_file)))
    for item in args.obs or ():
        for part in item.replace(",", " ").split():
            try:
                i, v = part.split("=")
                obs[int(i)] = int(v)
            except ValueError:
                raise formats.FormatError(f"bad observation {part!r}, expected index=value") from None
    return obs


def cmd_tail(args) -> str:
    if args.action == "sample":
        d = sample(args.prefix, args.seed)
        return (f"secret {d.secret}\nthreshold {d.threshold}\n"
                "shares " + " ".join(map(str, d.shares)) + "\n")
    if args.action == "posterior":
        post = conditional_secret_distribution(_observations(args), args.cap)
        return "\n".join(post.lines()) + "\n"
    if args.action == "recover":
        shares = [int(x) for x in args.shares.replace(",", " ").split()]
        value = eventual_value_recover(shares, args.run_length)
        if value is None:
            raise CheckFailed("undetermined\n")
        return f"secret {value}\n"
    raise AssertionError(args.action)


# -- pipeline -------------------------------------------------------------------------

def cmd_pipeline(args) -> str:
    if args.action == "perfect":
        report = run_perfect_pipeline(formats.parse_generators(_read(args.generators)),
                                      args.prime, workers=args.workers)
    else:
        w = formats.parse_witness(_read(args.witness))
        report = run_ramp_pipeline(w, args.levels, args.samples, args.seed, workers=args.workers)
    text = report.to_text()
    if not report.passed:
        raise CheckFailed(text)
    return text


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probshare", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)

    def sub(group, name, fn):
        p = group.add_parser(name)
        p.set_defaults(func=fn, action=name)
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    g = top.add_parser("structure").add_subparsers(dest="action", required=True)
    p = sub(g, "minimize", cmd_structure)
    p.add_argument("--generators", required=True)
    p = sub(g, "member", cmd_structure)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--generators")
    src.add_argument("--witness")
    p.add_argument("--level", type=int)
    p.add_argument("--set", required=True)
    p = sub(g, "normalize", cmd_structure)
    p.add_argument("--layers", required=True)
    p = sub(g, "builtin", cmd_structure)
    p.add_argument("--name", required=True,
                   choices=["all_infinite", "forbidden", "grid_rows", "disjoint_infinite"])
    p.add_argument("--max-index", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--forbidden", help="forbidden sets separated by ';'")
    p = sub(g, "refute", cmd_structure)
    p.add_argument("--sets", required=True, help="structure file listing the disjoint sets")
    p.add_argument("--witness", required=True)

    g = top.add_parser("span").add_subparsers(dest="action", required=True)
    p = sub(g, "build", cmd_span)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--generators", required=True)
    p = sub(g, "realize", cmd_span)
    p.add_argument("--program", required=True)
    p.add_argument("--set", required=True)
    p = sub(g, "structure", cmd_span)
    p.add_argument("--program", required=True)
    p.add_argument("--universe")

    g = top.add_parser("scheme").add_subparsers(dest="action", required=True)
    p = sub(g, "deal", cmd_scheme)
    p.add_argument("--program", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p = sub(g, "recover", cmd_scheme)
    p.add_argument("--program", required=True)
    p.add_argument("--dealing", required=True)
    p.add_argument("--set", required=True)
    p = sub(g, "enumerate", cmd_scheme)
    p.add_argument("--program", required=True)
    p.add_argument("--observed")
    p.add_argument("--workers", type=int, default=1)
    p = sub(g, "classify", cmd_scheme)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--program")
    src.add_argument("--table")
    p.add_argument("--structure", required=True)
    p.add_argument("--workers", type=int, default=1)

    g = top.add_parser("gauss").add_subparsers(dest="action", required=True)
    p = sub(g, "build", cmd_gauss)
    p.add_argument("--witness", required=True)
    p.add_argument("--levels", type=int, required=True)
    p = sub(g, "decompose", cmd_gauss)
    p.add_argument("--program", required=True)
    p.add_argument("--set", required=True)
    for name in ("simulate", "check"):
        p = sub(g, name, cmd_gauss)
        p.add_argument("--program", required=True)
        p.add_argument("--samples", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--wrap", action="store_true")
        p.add_argument("--workers", type=int, default=1)
        if name == "check":
            p.add_argument("--set", required=True)
    p = sub(g, "bounds", cmd_gauss)
    p.add_argument("--sigma", type=float, required=True)

    g = top.add_parser("tail").add_subparsers(dest="action", required=True)
    p = sub(g, "sample", cmd_tail)
    p.add_argument("--prefix", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p = sub(g, "posterior", cmd_tail)
    p.add_argument("--obs", action="append", help="index=value pairs")
    p.add_argument("--obs-file")
    p.add_argument("--cap", type=int, required=True)
    p = sub(g, "recover", cmd_tail)
    p.add_argument("--shares", required=True)
    p.add_argument("--run-length", type=int, required=True)

    g = top.add_parser("pipeline").add_subparsers(dest="action", required=True)
    p = sub(g, "perfect", cmd_pipeline)
    p.add_argument("--generators", required=True)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p = sub(g, "ramp", cmd_pipeline)
    p.add_argument("--witness", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _emit(args.func(args), args.out)
        return 0
    except CheckFailed as exc:
        _emit(str(exc), args.out)
        return 1
    except formats.FormatError as exc:
        print(f"probshare: input error: {exc}", file=sys.stderr)
        return 3
    except (NotQualified, MissingShare, QualifiedSetError, StructureError, ValueError) as exc:
        print(f"probshare: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
