"""Line-oriented text formats.

Every format starts with a ``<kind> v1`` header; blank lines and ``#``
comments are ignored.  Writers emit canonical text so that parsing and
re-writing reproduces the same bytes.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .access_structure import (GDeltaWitness, MonotoneStructure, canonical_family,
                               minimize_generators)
from .classifier import JointDistributionTable
from .gaussian_ramp import HilbertProgram
from .linear_scheme import Dealing
from .span_program import SpanProgram


class FormatError(ValueError):
    pass


def _lines(text: str) -> list[list[str]]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line.split())
    return out


def _header(rows, kind):
    if not rows or rows[0] != [kind, "v1"]:
        got = " ".join(rows[0]) if rows else "<empty>"
        raise FormatError(f"expected header '{kind} v1', got '{got}'")
    return rows[1:]


def _ints(tokens, what="integer"):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"bad {what} in {' '.join(tokens)!r}") from None


def _fmt_set(s) -> str:
    return " ".join(str(x) for x in sorted(s))


def parse_set(text: str) -> frozenset[int]:
    return frozenset(_ints(text.replace(",", " ").split(), "participant id"))


# -- structures -------------------------------------------------------------------

def dump_family(family: Iterable[Iterable[int]]) -> list[str]:
    return [_fmt_set(B) for B in canonical_family(family)]


def dump_structure(generators) -> str:
    if isinstance(generators, MonotoneStructure):
        generators = generators.generators
    return "\n".join(["structure v1", *dump_family(generators)]) + "\n"


def parse_generators(text: str) -> tuple[frozenset[int], ...]:
    """Generator family of a ``structure v1`` file, in file order."""
    rows = _header(_lines(text), "structure")
    return tuple(frozenset(_ints(r, "participant id")) for r in rows)


def parse_structure(text: str, permissive: bool = True) -> MonotoneStructure:
    return MonotoneStructure.from_generators(parse_generators(text), permissive=permissive)


def dump_witness(witness: GDeltaWitness) -> str:
    out = ["gdelta v1"]
    for i, family in enumerate(witness.levels):
        if i:
            out.append("---")
        out += dump_family(family)
    return "\n".join(out) + "\n"


def parse_layers(text: str) -> list[list[frozenset[int]]]:
    rows = _header(_lines(text), "gdelta")
    layers: list[list[frozenset[int]]] = [[]]
    for r in rows:
        if r == ["---"]:
            layers.append([])
        else:
            layers[-1].append(frozenset(_ints(r, "participant id")))
    if rows == []:
        return []
    return layers


def parse_witness(text: str) -> GDeltaWitness:
    """Read a witness; it is marked normalized when its levels decrease."""
    levels = tuple(minimize_generators(layer) for layer in parse_layers(text))
    w = GDeltaWitness(levels)
    return GDeltaWitness(levels, normalized=w.is_decreasing())


# -- span programs and dealings -------------------------------------------------

def dump_span(program: SpanProgram) -> str:
    out = ["span v1", f"p {program.p}", f"dim {program.dim}",
           "target " + " ".join(map(str, program.target))]
    extra = program.universe - set(program.assignment)
    if extra:
        out.append("participants " + _fmt_set(program.universe))
    for pid, vecs in program.assignment.items():
        for v in vecs:
            out.append(f"vec {pid} " + " ".join(map(str, v)))
    return "\n".join(out) + "\n"


def parse_span(text: str) -> SpanProgram:
    rows = _header(_lines(text), "span")
    p = dim = target = None
    universe: frozenset[int] = frozenset()
    assignment: dict[int, list[tuple[int, ...]]] = {}
    for r in rows:
        key, args = r[0], r[1:]
        if key == "p" and len(args) == 1:
            p = _ints(args)[0]
        elif key == "dim" and len(args) == 1:
            dim = _ints(args)[0]
        elif key == "target":
            target = tuple(_ints(args))
        elif key == "participants":
            universe = frozenset(_ints(args))
        elif key == "vec" and args:
            vals = _ints(args)
            assignment.setdefault(vals[0], []).append(tuple(vals[1:]))
        else:
            raise FormatError(f"unexpected line {' '.join(r)!r}")
    if p is None or dim is None or target is None:
        raise FormatError("span file needs p, dim and target lines")
    try:
        return SpanProgram(p, dim, target, {k: tuple(v) for k, v in assignment.items()}, universe)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def dump_dealing(dealing: Dealing) -> str:
    out = ["dealing v1", f"secret {dealing.secret}"]
    for pid in sorted(dealing.shares):
        for k, (_, value) in enumerate(dealing.shares[pid]):
            out.append(f"share {pid} {k} {value}")
    return "\n".join(out) + "\n"


def parse_dealing(text: str) -> tuple[int | None, dict[int, dict[int, int]]]:
    """Secret and ``{pid: {vector index: value}}`` from a dealing dump."""
    rows = _header(_lines(text), "dealing")
    secret = None
    shares: dict[int, dict[int, int]] = {}
    for r in rows:
        if r[0] == "secret" and len(r) == 2:
            secret = _ints(r[1:])[0]
        elif r[0] == "share" and len(r) == 4:
            pid, k, value = _ints(r[1:])
            shares.setdefault(pid, {})[k] = value
        else:
            raise FormatError(f"unexpected line {' '.join(r)!r}")
    return secret, shares


def shares_as_lists(shares: dict[int, dict[int, int]]) -> dict[int, list[int]]:
    """Per-participant lists; gaps in the vector indices end the list."""
    out = {}
    for pid, entries in shares.items():
        vals = []
        k = 0
        while k in entries:
            vals.append(entries[k])
            k += 1
        out[pid] = vals
    return out


# -- tables -----------------------------------------------------------------------

def format_atom(a) -> str:
    if isinstance(a, tuple):
        return "(" + ",".join(map(str, a)) + ")"
    return str(a)


def _parse_atom(tok: str):
    if tok.startswith("(") and tok.endswith(")"):
        inner = tok[1:-1]
        try:
            return tuple(int(x) for x in inner.split(",")) if inner else ()
        except ValueError:
            raise FormatError(f"bad tuple atom {tok!r}") from None
    try:
        return int(tok)
    except ValueError:
        return tok


def dump_table(table: JointDistributionTable) -> str:
    out = ["table v1", "participants " + " ".join(map(str, table.participants)),
           "secretdomain " + " ".join(format_atom(a) for a in table.secret_domain)]
    for pid in table.participants:
        out.append(f"domain {pid} " + " ".join(format_atom(a) for a in table.share_domains[pid]))
    for atom, w in table.weights.items():
        if w:
            m = Fraction(w, table.denominator)
            out.append("p " + " ".join(format_atom(a) for a in atom)
                       + f" {m.numerator}/{m.denominator}")
    return "\n".join(out) + "\n"


def parse_table(text: str) -> JointDistributionTable:
    rows = _header(_lines(text), "table")
    participants = None
    secret_domain = None
    domains: dict[int, tuple] = {}
    masses: dict[tuple, Fraction] = {}
    for r in rows:
        key, args = r[0], r[1:]
        if key == "participants":
            participants = _ints(args)
        elif key == "secretdomain":
            secret_domain = tuple(_parse_atom(a) for a in args)
        elif key == "domain" and args:
            domains[_ints(args[:1])[0]] = tuple(_parse_atom(a) for a in args[1:])
        elif key == "p":
            if participants is None:
                raise FormatError("mass line before participants line")
            if len(args) != len(participants) + 2:
                raise FormatError(f"mass line has wrong arity: {' '.join(r)!r}")
            try:
                m = Fraction(args[-1])
            except (ValueError, ZeroDivisionError):
                raise FormatError(f"bad mass {args[-1]!r}") from None
            atom = tuple(_parse_atom(a) for a in args[:-1])
            masses[atom] = masses.get(atom, Fraction(0)) + m
        else:
            raise FormatError(f"unexpected line {' '.join(r)!r}")
    if participants is None or secret_domain is None:
        raise FormatError("table needs participants and secretdomain lines")
    try:
        return JointDistributionTable.from_masses(participants, domains, secret_domain, masses)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# -- Hilbert programs ---------------------------------------------------------------

def _fmt_real(x: Fraction) -> str:
    return str(x)


def dump_hilbert(program: HilbertProgram) -> str:
    out = ["hilbert v1", f"dim {program.dim}",
           "target " + " ".join(_fmt_real(x) for x in program.target)]
    for pid, vecs in program.assignment.items():
        for v in vecs:
            out.append(f"vec {pid} " + " ".join(_fmt_real(x) for x in v))
    return "\n".join(out) + "\n"


def parse_hilbert(text: str) -> HilbertProgram:
    rows = _header(_lines(text), "hilbert")
    dim = target = None
    assignment: dict[int, list[tuple[Fraction, ...]]] = {}

    def reals(tokens):
        try:
            return tuple(Fraction(t) for t in tokens)
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"bad real in {' '.join(tokens)!r}") from None

    for r in rows:
        key, args = r[0], r[1:]
        if key == "dim" and len(args) == 1:
            dim = _ints(args)[0]
        elif key == "target":
            target = reals(args)
        elif key == "vec" and args:
            assignment.setdefault(_ints(args[:1])[0], []).append(reals(args[1:]))
        else:
            raise FormatError(f"unexpected line {' '.join(r)!r}")
    if dim is None or target is None:
        raise FormatError("hilbert file needs dim and target lines")
    try:
        return HilbertProgram(dim, target, {k: tuple(v) for k, v in assignment.items()})
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# -- observations ---------------------------------------------------------------------

def parse_observations(text: str) -> dict[int, int]:
    """``obs <index> <value>`` lines."""
    out = {}
    for r in _lines(text):
        if r[0] != "obs" or len(r) != 3:
            raise FormatError(f"expected 'obs <index> <value>', got {' '.join(r)!r}")
        i, v = _ints(r[1:])
        out[i] = v
    return out


def parse_simulation(text: str) -> list[list[float]]:
    return [[float(x) for x in line.split("\t")] for line in text.splitlines() if line]
