"""Scheme-type classification of finite joint distributions.

A finite scheme is a joint distribution of shares and secret on finitely
many atoms.  For an unqualified set B, the ratio

    joint(u, e) / (marginal_B(u) * marginal_s(e))

over atoms u of B's shares and e of the secret decides the scheme type.  It
suffices to look at atoms: if ``lo <= joint <= hi * product`` holds atom by
atom, summing over the atoms of any rectangle U x E keeps the same bounds,
because the product measure of a rectangle is the sum of the atom products.
So the smallest constant c valid for all rectangles is
``max(max_ratio, 1 / min_ratio)`` taken over atoms with positive marginals.

On finite spaces a positive minimum ratio already gives a finite constant,
so almost perfect, ramp and almost ramp coincide; :func:`classify` checks
that collapse instead of assuming it.
"""
from __future__ import annotations

import functools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .access_structure import MonotoneStructure, StructureError, subsets


class TableError(ValueError):
    pass


@functools.total_ordering
class _Infinite:
    """Distinguished unbounded constant; larger than every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infinite"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("Infinite")


Infinite = _Infinite()

Atom = Hashable


@dataclass(frozen=True)
class JointDistributionTable:
    """Exact joint distribution on (shares of each participant, secret).

    Masses are integer ``weights`` over a common ``denominator``; a full atom
    is a tuple with one share atom per participant followed by the secret.
    """

    participants: tuple[int, ...]
    share_domains: Mapping[int, tuple[Atom, ...]]
    secret_domain: tuple[Atom, ...]
    weights: Mapping[tuple, int]
    denominator: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(set(self.participants)) != len(self.participants):
            raise TableError("duplicate participant ids")
        if len(self.secret_domain) < 2:
            raise TableError("secret domain needs at least two elements")
        for pid in self.participants:
            if not self.share_domains.get(pid):
                raise TableError(f"empty share domain for participant {pid}")
        if self.denominator <= 0:
            raise TableError("denominator must be positive")
        domains = [set(self.share_domains[pid]) for pid in self.participants]
        secrets = set(self.secret_domain)
        total = 0
        for atom, w in self.weights.items():
            if len(atom) != len(self.participants) + 1:
                raise TableError(f"atom {atom!r} has wrong arity")
            if w < 0:
                raise TableError(f"negative mass at {atom!r}")
            if atom[-1] not in secrets or any(a not in d for a, d in zip(atom, domains)):
                raise TableError(f"atom {atom!r} outside its domains")
            total += w
        if total != self.denominator:
            raise TableError(f"masses sum to {Fraction(total, self.denominator)}, not 1")

    @classmethod
    def from_masses(cls, participants: Sequence[int], share_domains: Mapping[int, Sequence[Atom]],
                    secret_domain: Sequence[Atom], masses: Mapping[tuple, Fraction]):
        masses = {a: Fraction(m) for a, m in masses.items() if m != 0}
        den = lcm(*(m.denominator for m in masses.values())) if masses else 1
        weights = {a: int(m * den) for a, m in masses.items()}
        return cls(tuple(participants), {k: tuple(v) for k, v in share_domains.items()},
                   tuple(secret_domain), weights, den)

    def mass(self, atom) -> Fraction:
        return Fraction(self.weights.get(tuple(atom), 0), self.denominator)

    @property
    def masses(self) -> dict[tuple, Fraction]:
        return {a: Fraction(w, self.denominator) for a, w in self.weights.items()}

    def _positions(self, B: Iterable[int]) -> tuple[int, ...]:
        index = {pid: i for i, pid in enumerate(self.participants)}
        try:
            return tuple(index[pid] for pid in sorted(set(B)))
        except KeyError as exc:
            raise TableError(f"unknown participant {exc.args[0]}") from None

    def joint_marginal(self, B: Iterable[int]) -> dict[tuple, int]:
        """Weights of ((shares of B), secret) pairs."""
        pos = self._positions(B)
        key = ("joint", pos)
        if key not in self._cache:
            out: dict[tuple, int] = defaultdict(int)
            for atom, w in self.weights.items():
                if w:
                    out[(tuple(atom[i] for i in pos), atom[-1])] += w
            self._cache[key] = dict(out)
        return self._cache[key]

    def marginal(self, B: Iterable[int]) -> dict[tuple, int]:
        out: dict[tuple, int] = defaultdict(int)
        for (u, _), w in self.joint_marginal(B).items():
            out[u] += w
        return dict(out)

    def secret_marginal(self) -> dict[Atom, int]:
        out: dict[Atom, int] = defaultdict(int)
        for atom, w in self.weights.items():
            if w:
                out[atom[-1]] += w
        return dict(out)


def recovery_check(table: JointDistributionTable, A: Iterable[int]) -> bool:
    """Whether A's shares pin down the secret on every atom of positive mass."""
    seen: dict[tuple, Atom] = {}
    for (u, e), w in table.joint_marginal(A).items():
        if w and seen.setdefault(u, e) != e:
            return False
    return True


def _recovery_failure(table, A):
    seen: dict[tuple, Atom] = {}
    for (u, e), w in sorted(table.joint_marginal(A).items(), key=lambda kv: repr(kv[0])):
        if w and seen.setdefault(u, e) != e:
            return u
    return None


@dataclass(frozen=True)
class RatioBounds:
    """Extreme atom ratios joint / (marginal_B * marginal_s) for one set B."""

    low: Fraction
    high: Fraction
    low_atom: tuple | None
    high_atom: tuple | None

    @property
    def c(self):
        if self.low == 0:
            return Infinite
        return max(self.high, 1 / self.low)


def ratio_bounds(table: JointDistributionTable, B: Iterable[int]) -> RatioBounds:
    D = table.denominator
    joint = table.joint_marginal(B)
    mB = table.marginal(B)
    ms = table.secret_marginal()
    secrets = [e for e in table.secret_domain if ms.get(e)]
    lo = hi = None  # (num, den, atom)
    for u in sorted(mB, key=repr):
        for e in secrets:
            num = joint.get((u, e), 0) * D
            den = mB[u] * ms[e]
            if lo is None or num * lo[1] < lo[0] * den:
                lo = (num, den, (u, e))
            if hi is None or num * hi[1] > hi[0] * den:
                hi = (num, den, (u, e))
    if lo is None:
        return RatioBounds(Fraction(1), Fraction(1), None, None)
    return RatioBounds(Fraction(lo[0], lo[1]), Fraction(hi[0], hi[1]), lo[2], hi[2])


def min_c(table: JointDistributionTable, B: Iterable[int]):
    """Smallest c with joint within a factor c of the product, or ``Infinite``."""
    return ratio_bounds(table, B).c


def is_independent(table: JointDistributionTable, B: Iterable[int]) -> bool:
    """Exact factorization joint == marginal_B * marginal_s on every atom."""
    D = table.denominator
    joint = table.joint_marginal(B)
    mB = table.marginal(B)
    ms = table.secret_marginal()
    return all(joint.get((u, e), 0) * D == wu * ms.get(e, 0)
               for u, wu in mB.items() for e in table.secret_domain)


def positivity_violation(table: JointDistributionTable, B: Iterable[int]):
    """First atom (u, e) with positive marginals but zero joint mass, if any."""
    joint = table.joint_marginal(B)
    mB = table.marginal(B)
    ms = table.secret_marginal()
    for u in sorted(mB, key=repr):
        for e in table.secret_domain:
            if ms.get(e) and not joint.get((u, e)):
                return (u, e)
    return None


LABELS = ("perfect", "almost_perfect", "ramp", "almost_ramp")


@dataclass(frozen=True)
class Classification:
    """Outcome of :func:`classify`.

    ``conditions`` records each of the four scheme conditions separately;
    ``label`` is the strongest one that holds when the table also realizes
    the structure, otherwise ``"none"``.
    """

    label: str
    c: Fraction | None
    c_B: dict[frozenset[int], object]
    conditions: dict[str, bool]
    realizes: bool
    violations: list[tuple]

    @property
    def chain_ok(self) -> bool:
        flags = [self.conditions[k] for k in LABELS]
        return all(not a or b for a, b in zip(flags, flags[1:]))


def classify(table: JointDistributionTable, structure) -> Classification:
    """Classify ``table`` against ``structure`` (a MonotoneStructure or predicate).

    Every unqualified subset of the table's participants is checked, not just
    the maximal ones: the constant for a subset is not bounded by the
    constant of a superset.
    """
    if isinstance(structure, MonotoneStructure):
        unknown = structure.participants - set(table.participants)
        if unknown:
            raise StructureError(f"structure references unknown participants {sorted(unknown)}")
        qualified: Callable = structure.qualified
    else:
        qualified = structure

    violations: list[tuple] = []
    realizes = True
    minimal: list[frozenset[int]] = []
    unqualified: list[frozenset[int]] = []
    for A in subsets(table.participants):
        if qualified(A):
            if not any(M <= A for M in minimal):
                minimal.append(A)
                bad = _recovery_failure(table, A)
                if bad is not None:
                    realizes = False
                    violations.append(("recovery", A, bad))
        else:
            unqualified.append(A)

    c_B = {}
    positive = True
    for B in unqualified:
        c_B[B] = min_c(table, B)
        v = positivity_violation(table, B)
        if v is not None:
            positive = False
            violations.append(("positivity", B) + v)

    finite = all(c is not Infinite for c in c_B.values())
    c = max(c_B.values(), default=Fraction(1)) if finite else None
    if finite != positive:
        raise AssertionError("finite-table collapse failed: bounded ratio and positivity disagree")
    conditions = {
        "perfect": finite and c == 1,
        "almost_perfect": finite,
        "ramp": finite,
        "almost_ramp": positive,
    }
    label = next((k for k in LABELS if conditions[k]), "none") if realizes else "none"
    return Classification(label, c, c_B, conditions, realizes, violations)
