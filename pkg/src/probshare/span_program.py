"""Monotone span programs over prime fields."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .access_structure import canonical_family, subsets

Vector = tuple[int, ...]


class SpanProgramError(ValueError):
    pass


class UnknownParticipant(SpanProgramError, KeyError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise SpanProgramError(f"modulus must be prime, got {p!r}")
    return p


def span_membership(vectors: Sequence[Sequence[int]], target: Sequence[int], p: int):
    """Solve ``sum(coeffs[i] * vectors[i]) == target`` over GF(p).

    Returns the lexicographically smallest coefficient tuple (field elements
    ordered 0 < 1 < ... < p-1), or ``None`` when the target is outside the
    span.  Elimination runs over the columns from last to first so that the
    pivots are as far right as possible; the free coefficients, which are
    then the leading ones, are set to zero and every pivot coefficient is
    forced by the ones before it.
    """
    check_prime(p)
    n = len(vectors)
    d = len(target)
    for v in vectors:
        if len(v) != d:
            raise SpanProgramError(f"dimension mismatch: {len(v)} != {d}")
    # augmented rows: d equations, n unknowns
    rows = [[vectors[j][i] % p for j in range(n)] + [target[i] % p] for i in range(d)]
    pivots: list[tuple[int, int]] = []  # (row, column)
    r = 0
    for col in reversed(range(n)):
        pivot = next((i for i in range(r, d) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = pow(rows[r][col], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(d):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        pivots.append((r, col))
        r += 1
        if r == d:
            break
    if any(rows[i][n] for i in range(r, d)):
        return None
    coeffs = [0] * n
    for row, col in pivots:
        coeffs[col] = rows[row][n]
    return tuple(coeffs)


@dataclass(frozen=True)
class SpanProgram:
    """Target vector and per-participant vector lists over GF(p).

    ``universe`` may list participants that hold no vectors; it defaults to
    the assigned ones.
    """

    p: int
    dim: int
    target: Vector
    assignment: Mapping[int, tuple[Vector, ...]]
    universe: frozenset[int] = field(default=frozenset())

    def __post_init__(self):
        check_prime(self.p)
        if len(self.target) != self.dim:
            raise SpanProgramError("target length differs from dim")
        target = tuple(x % self.p for x in self.target)
        if not any(target):
            raise SpanProgramError("target vector must be nonzero")
        object.__setattr__(self, "target", target)
        clean = {}
        for pid in sorted(self.assignment):
            vecs = self.assignment[pid]
            if not vecs:
                raise SpanProgramError(f"participant {pid} has an empty vector list")
            for v in vecs:
                if len(v) != self.dim:
                    raise SpanProgramError(f"vector of participant {pid} has length {len(v)}")
            clean[pid] = tuple(tuple(x % self.p for x in v) for v in vecs)
        object.__setattr__(self, "assignment", clean)
        object.__setattr__(self, "universe", frozenset(self.universe) | frozenset(clean))

    def vectors_of(self, A: Iterable[int]) -> list[tuple[int, int, Vector]]:
        """(participant, index, vector) for every vector held by members of A."""
        out = []
        for pid in sorted(set(A)):
            if pid not in self.universe:
                raise UnknownParticipant(pid)
            for k, v in enumerate(self.assignment.get(pid, ())):
                out.append((pid, k, v))
        return out

    @property
    def labels(self) -> list[tuple[int, int]]:
        return [(pid, k) for pid, k, _ in self.vectors_of(self.assignment)]

    @property
    def matrix(self) -> list[Vector]:
        return [v for _, _, v in self.vectors_of(self.assignment)]


def realizes(program: SpanProgram, A: Iterable[int]) -> bool:
    vecs = [v for _, _, v in program.vectors_of(A)]
    return span_membership(vecs, program.target, program.p) is not None


def from_generators(generators: Iterable[Iterable[int]], p: int) -> SpanProgram:
    """Span program whose qualified sets are the supersets of the generators.

    Coordinate 0 carries the target ``e_0``.  Generators are taken in
    canonical order; all but the largest member of each receive fresh unit
    vectors and the largest member receives the target minus their sum.
    """
    check_prime(p)
    family = canonical_family(generators)
    if not family:
        raise SpanProgramError("need at least one generator")
    if any(len(B) == 0 for B in family):
        raise SpanProgramError("empty generator")
    dim = 1 + sum(len(B) - 1 for B in family)
    assignment: dict[int, list[Vector]] = {}
    nxt = 1
    for B in family:
        members = sorted(B)
        last = [0] * dim
        last[0] = 1
        for pid in members[:-1]:
            fresh = [0] * dim
            fresh[nxt] = 1
            last[nxt] = p - 1
            assignment.setdefault(pid, []).append(tuple(fresh))
            nxt += 1
        assignment.setdefault(members[-1], []).append(tuple(last))
    target = (1,) + (0,) * (dim - 1)
    return SpanProgram(p, dim, target, {k: tuple(v) for k, v in assignment.items()})


def realized_structure(program: SpanProgram, universe: Iterable[int] | None = None,
                       bound: int = 12):
    """Minimal qualified sets of ``program`` within ``universe`` by brute force.

    Members of ``universe`` outside the program hold no vectors.
    """
    universe = program.universe if universe is None else frozenset(universe)
    if len(universe) > bound:
        raise SpanProgramError(f"universe of {len(universe)} exceeds brute-force bound {bound}")
    minimal: list[frozenset[int]] = []
    for A in subsets(universe):
        if any(M <= A for M in minimal):
            continue
        vecs = [v for pid in sorted(A) for v in program.assignment.get(pid, ())]
        if span_membership(vecs, program.target, program.p) is not None:
            minimal.append(A)
    return tuple(minimal)
