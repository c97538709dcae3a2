"""Monotone access structures over natural-number participants.

A structure is stored by a finite family of finite generator sets; a set of
participants is qualified when it contains one of them.  G-delta structures
are carried by a :class:`GDeltaWitness`, a chain of generator families whose
generated structures shrink from level to level.  Infinite participant sets
are never materialized: every builder takes explicit truncation bounds.

All families are kept in canonical order (by size, then lexicographically on
the sorted members), which fixes every tie-break downstream.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Iterable, Sequence

Family = tuple[frozenset[int], ...]


class StructureError(ValueError):
    """Invalid generator family or witness."""


class CoverageError(StructureError):
    """A witness level has no generator inside a candidate set."""


class RefutationError(StructureError):
    """A diagonal refutation candidate failed its own checks."""


def canonical_key(s: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    members = tuple(sorted(s))
    return len(members), members


def canonical_family(sets: Iterable[Iterable[int]]) -> Family:
    """Deduplicate and sort a family into canonical order."""
    unique = {frozenset(s) for s in sets}
    return tuple(sorted(unique, key=canonical_key))


def gen_membership(generators: Iterable[Iterable[int]], A: Iterable[int]) -> bool:
    A = frozenset(A)
    return any(frozenset(B) <= A for B in generators)


def minimize_generators(generators: Iterable[Iterable[int]]) -> Family:
    """Drop every generator that contains another one.

    The result generates the same structure and is an antichain in canonical
    order.
    """
    kept: list[frozenset[int]] = []
    for B in canonical_family(generators):
        if not any(K <= B for K in kept):
            kept.append(B)
    return tuple(kept)


def intersect_families(F: Iterable[Iterable[int]], G: Iterable[Iterable[int]]) -> Family:
    """Generators of ``gen(F) & gen(G)``: minimal unions of one member from each."""
    F = minimize_generators(F)
    G = minimize_generators(G)
    return minimize_generators(a | b for a, b in product(F, G))


def subsets(universe: Iterable[int], max_size: int | None = None):
    """All subsets of ``universe`` in canonical order."""
    members = sorted(set(universe))
    top = len(members) if max_size is None else min(max_size, len(members))
    for k in range(top + 1):
        for combo in combinations(members, k):
            yield frozenset(combo)


@dataclass(frozen=True)
class MonotoneStructure:
    """An access structure ``gen(generators)``.

    The public constructor :meth:`from_generators` rejects the empty set and
    singletons as generators, and an empty family; ``permissive=True`` skips
    those checks for intermediate families.
    """

    generators: Family
    universe_hint: int | None = None

    @classmethod
    def from_generators(cls, generators, universe_hint=None, permissive=False):
        family = minimize_generators(generators)
        if not permissive:
            if not family:
                raise StructureError("access structure must not be empty")
            for B in family:
                if len(B) <= 1:
                    raise StructureError(
                        f"generator {sorted(B)} has fewer than two participants")
        for B in family:
            if any(not isinstance(i, int) or i < 0 for i in B):
                raise StructureError(f"participant ids must be non-negative integers: {sorted(B)}")
        if universe_hint is not None:
            top = max((max(B) for B in family if B), default=0)
            if top > universe_hint:
                raise StructureError(f"generator id {top} exceeds universe bound {universe_hint}")
        return cls(family, universe_hint)

    @property
    def participants(self) -> frozenset[int]:
        return frozenset().union(*self.generators) if self.generators else frozenset()

    def __contains__(self, A) -> bool:
        return gen_membership(self.generators, A)

    def qualified(self, A) -> bool:
        return gen_membership(self.generators, A)


@dataclass(frozen=True)
class GDeltaWitness:
    levels: tuple[Family, ...]
    normalized: bool = False

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def participants(self) -> frozenset[int]:
        out: set[int] = set()
        for family in self.levels:
            for B in family:
                out |= B
        return frozenset(out)

    def is_decreasing(self) -> bool:
        """Every member of level i+1 lies in gen(level i)."""
        return all(
            gen_membership(self.levels[i], B)
            for i in range(len(self.levels) - 1)
            for B in self.levels[i + 1]
        )


def normalize_witness(layers: Sequence[Iterable[Iterable[int]]]) -> GDeltaWitness:
    """Turn arbitrary open layers into a decreasing chain.

    Level i generates the intersection of the structures generated by the
    first i layers.
    """
    levels: list[Family] = []
    current: Family | None = None
    for layer in layers:
        layer = minimize_generators(layer)
        current = layer if current is None else intersect_families(current, layer)
        levels.append(current)
    return GDeltaWitness(tuple(levels), normalized=True)


def gdelta_membership(witness: GDeltaWitness, A, up_to_level: int | None = None) -> bool:
    if up_to_level is None:
        up_to_level = witness.depth
    if not 1 <= up_to_level <= witness.depth:
        raise StructureError(
            f"level {up_to_level} out of range 1..{witness.depth}")
    A = frozenset(A)
    return all(gen_membership(witness.levels[i], A) for i in range(up_to_level))


def _check_bound(name, value):
    if value is None or value <= 0:
        raise StructureError(f"{name} must be a positive integer, got {value!r}")


def all_infinite_witness(max_index: int, levels: int) -> GDeltaWitness:
    """Truncated witness for "all infinite subsets": level i is every i-subset."""
    _check_bound("max_index", max_index)
    _check_bound("levels", levels)
    universe = range(1, max_index + 1)
    return GDeltaWitness(
        tuple(canonical_family(combinations(universe, i)) for i in range(1, levels + 1)),
        normalized=True,
    )


def forbidden_sets_witness(forbidden: Sequence[Iterable[int]], max_index: int,
                           levels: int | None = None) -> GDeltaWitness:
    """Sets not covered by any forbidden set, truncated to ``{1..max_index}``.

    Level n generates the sets that have a point outside each of the first n
    forbidden sets; its generators have at most n elements.
    """
    _check_bound("max_index", max_index)
    if levels is None:
        levels = len(forbidden)
    _check_bound("levels", levels)
    if levels > len(forbidden):
        raise StructureError(f"only {len(forbidden)} forbidden sets for {levels} levels")
    universe = frozenset(range(1, max_index + 1))
    layers = [[{x} for x in sorted(universe - frozenset(F))] for F in forbidden[:levels]]
    return normalize_witness(layers)


def grid_index(row: int, col: int, m: int) -> int:
    """Row-major id of lattice point (row, col), both 1-based."""
    return (row - 1) * m + col


def grid_rows_structure(m: int) -> MonotoneStructure:
    """The m-by-m grid whose minimal qualified sets are the rows."""
    _check_bound("m", m)
    rows = [[grid_index(r, c, m) for c in range(1, m + 1)] for r in range(1, m + 1)]
    return MonotoneStructure.from_generators(rows, universe_hint=m * m, permissive=m < 2)


def grid_rows(m: int) -> list[frozenset[int]]:
    return [frozenset(grid_index(r, c, m) for c in range(1, m + 1)) for r in range(1, m + 1)]


def disjoint_progressions(m: int, max_index: int) -> list[frozenset[int]]:
    """Residue classes ``{n : n = k mod m}`` in ``{1..max_index}`` for k = 0..m-1."""
    _check_bound("m", m)
    _check_bound("max_index", max_index)
    return [frozenset(n for n in range(1, max_index + 1) if n % m == k) for k in range(m)]


def disjoint_infinite_structure(m: int, max_index: int) -> MonotoneStructure:
    return MonotoneStructure.from_generators(
        disjoint_progressions(m, max_index), universe_hint=max_index, permissive=True)


BUILTINS = ("all_infinite", "forbidden", "grid_rows", "disjoint_infinite")


def builtin_structure(name: str, **params):
    if name == "all_infinite":
        return all_infinite_witness(params.get("max_index"), params.get("levels"))
    if name == "forbidden":
        return forbidden_sets_witness(
            params["forbidden"], params.get("max_index"), params.get("levels"))
    if name == "grid_rows":
        return grid_rows_structure(params.get("m"))
    if name == "disjoint_infinite":
        return disjoint_infinite_structure(params.get("m"), params.get("max_index"))
    raise StructureError(f"unknown builtin structure {name!r}; expected one of {BUILTINS}")


def diagonal_refutation(disjoint_sets: Sequence[Iterable[int]],
                        witness: GDeltaWitness) -> frozenset[int]:
    """Build a set in every witness level that extends none of the candidates.

    The i-th candidate set is paired with level i; from that level the
    canonically smallest generator inside the candidate is taken, and the
    union of those picks is returned.  The union lies in each of the paired
    levels yet meets every candidate in a proper subset, so the structure
    generated by the candidates is not the one the witness describes.
    """
    sets = [frozenset(A) for A in disjoint_sets]
    if not sets:
        raise StructureError("need at least one candidate set")
    if len(sets) > witness.depth:
        raise StructureError(
            f"{len(sets)} candidate sets but witness has only {witness.depth} levels")
    for i, A in enumerate(sets):
        for Bj in sets[i + 1:]:
            if A & Bj:
                raise StructureError("candidate sets must be pairwise disjoint")

    picks = []
    for i, A in enumerate(sets):
        choice = next((B for B in witness.levels[i] if B <= A), None)
        if choice is None:
            raise CoverageError(
                f"level {i + 1} has no generator inside candidate {sorted(A)}")
        picks.append(choice)
    union = frozenset().union(*picks)

    for i in range(len(sets)):
        if not gen_membership(witness.levels[i], union):
            raise RefutationError(f"union escaped level {i + 1}")
    for A in sets:
        if not (union & A) < A:
            raise RefutationError(
                f"union contains all of candidate {sorted(A)}; truncation too short")
    return union


def important_participants(structure, universe: Iterable[int], bound: int = 16) -> frozenset[int]:
    """Participants p with an unqualified B such that B + p is qualified.

    ``structure`` is a :class:`MonotoneStructure` or a membership predicate.
    """
    qualified: Callable = structure.qualified if isinstance(structure, MonotoneStructure) else structure
    universe = frozenset(universe)
    if len(universe) > bound:
        raise StructureError(f"universe of {len(universe)} exceeds brute-force bound {bound}")
    out = set()
    for p in sorted(universe):
        rest = universe - {p}
        for B in subsets(rest):
            if not qualified(B) and qualified(B | {p}):
                out.add(p)
                break
    return frozenset(out)
