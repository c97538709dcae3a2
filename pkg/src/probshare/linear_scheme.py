"""The perfect scheme induced by a span program over GF(p).

The dealer draws one uniform field element per standard basis vector.  The
secret is the target's coordinates dotted with that randomness, and every
vector assigned to a participant yields one share, the vector dotted with
the randomness.  Qualified sets recover the secret by the linear
combination that expresses the target through their vectors.

Randomness from a seed
----------------------
``deal(program, seed)`` uses :class:`random.Random` (MT19937) seeded with
``seed``.  It draws ``dim * ceil(log2 p) + 64`` bits once, reduces the
resulting integer modulo ``p**dim`` and reads the base-p digits, least
significant first, as ``r_0, r_1, ...``.  The 64 surplus bits keep the
deviation from uniform below 2**-64.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classifier import JointDistributionTable
from .span_program import SpanProgram, span_membership

DEFAULT_ENUMERATION_BOUND = 10**7


class SchemeError(ValueError):
    pass


class NotQualified(SchemeError):
    pass


class MissingShare(SchemeError, KeyError):
    pass


class EnumerationBoundExceeded(SchemeError):
    pass


@dataclass(frozen=True)
class Dealing:
    randomness: tuple[int, ...]
    secret: int
    shares: Mapping[int, tuple[tuple[tuple[int, ...], int], ...]]

    def share_values(self, pid: int) -> tuple[int, ...]:
        return tuple(value for _, value in self.shares[pid])


def randomness_from_seed(p: int, dim: int, seed: int) -> tuple[int, ...]:
    rng = random.Random(seed)
    bits = dim * max(1, (p - 1).bit_length()) + 64
    n = rng.getrandbits(bits) % p**dim
    digits = []
    for _ in range(dim):
        n, d = divmod(n, p)
        digits.append(d)
    return tuple(digits)


def deal_with_randomness(program: SpanProgram, r: Sequence[int]) -> Dealing:
    """Dealing for a given randomness vector; the seed path is bypassed."""
    p = program.p
    if len(r) != program.dim:
        raise SchemeError(f"randomness has length {len(r)}, expected {program.dim}")
    r = tuple(x % p for x in r)
    secret = sum(b * x for b, x in zip(program.target, r)) % p
    shares = {
        pid: tuple((v, sum(a * x for a, x in zip(v, r)) % p) for v in vecs)
        for pid, vecs in program.assignment.items()
    }
    return Dealing(r, secret, shares)


def deal(program: SpanProgram, seed: int) -> Dealing:
    return deal_with_randomness(program, randomness_from_seed(program.p, program.dim, seed))


def recovery_coefficients(program: SpanProgram, A: Iterable[int]):
    """Labels ``(pid, index)`` and coefficients expressing the target over A's vectors."""
    held = program.vectors_of(A)
    coeffs = span_membership([v for _, _, v in held], program.target, program.p)
    if coeffs is None:
        raise NotQualified(f"{sorted(set(A))} cannot span the target")
    return [(pid, k) for pid, k, _ in held], coeffs


def _share_value(shares, pid, k):
    if pid not in shares:
        raise MissingShare(f"no share for participant {pid}")
    entry = shares[pid]
    if isinstance(entry, int):
        entry = (entry,)
    try:
        item = entry[k]
    except IndexError:
        raise MissingShare(f"participant {pid} lacks share #{k}") from None
    return item[1] if isinstance(item, tuple) else item


def recover(program: SpanProgram, A: Iterable[int], shares: Mapping) -> int:
    """Secret reconstructed by A.

    ``shares`` maps participants to their share values, given either as
    ``Dealing.shares`` entries or as bare integers.
    """
    labels, coeffs = recovery_coefficients(program, A)
    return sum(c * _share_value(shares, pid, k) for (pid, k), c in zip(labels, coeffs)) % program.p


def enumerate_randomness(p: int, dim: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows r with base-p digits of the indices ``start..stop-1`` (least significant first)."""
    stop = p**dim if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(idx), dim), dtype=np.int64)
    for j in range(dim):
        idx, out[:, j] = np.divmod(idx, p)
    return out


def _tally(args):
    p, dim, start, stop, M, beta, radix = args
    R = enumerate_randomness(p, dim, start, stop)
    shares = (R @ M.T) % p
    secret = (R @ beta) % p
    codes = shares @ radix * p + secret if len(radix) else secret
    uniq, counts = np.unique(codes, return_counts=True)
    return dict(zip(uniq.tolist(), counts.tolist()))


def joint_distribution(program: SpanProgram, observed: Iterable[int],
                       bound: int = DEFAULT_ENUMERATION_BOUND,
                       workers: int = 1) -> JointDistributionTable:
    """Exact table of (shares of ``observed``, secret) over all randomness.

    Each randomness vector has weight ``1 / p**dim``.  The share atom of a
    participant is the tuple of its share values.  With ``workers > 1`` the
    randomness range is split into chunks tallied in separate processes; the
    merged counts do not depend on the split.
    """
    p, dim = program.p, program.dim
    total = p**dim
    if total > bound:
        raise EnumerationBoundExceeded(f"{p}^{dim} = {total} exceeds bound {bound}")
    observed = sorted(set(observed))
    held = program.vectors_of(observed)
    M = np.array([v for _, _, v in held], dtype=np.int64).reshape(len(held), dim)
    beta = np.array(program.target, dtype=np.int64)
    radix = np.array([p ** (len(held) - 1 - i) for i in range(len(held))], dtype=np.int64)
    if len(held) and p ** (len(held) + 1) >= 2**62:
        raise EnumerationBoundExceeded("too many share coordinates to encode")

    chunk = max(1, -(-total // max(1, workers)))
    jobs = [(p, dim, s, min(total, s + chunk), M, beta, radix) for s in range(0, total, chunk)]
    counts: dict[int, int] = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_tally, jobs))
    else:
        parts = [_tally(j) for j in jobs]
    for part in parts:
        for code, n in part.items():
            counts[code] = counts.get(code, 0) + n

    sizes = [len(program.assignment.get(pid, ())) for pid in observed]
    weights = {}
    for code in sorted(counts):
        digits = []
        rest, secret = divmod(code, p)
        for _ in range(len(held)):
            rest, d = divmod(rest, p)
            digits.append(d)
        digits.reverse()
        atom, pos = [], 0
        for size in sizes:
            atom.append(tuple(digits[pos:pos + size]))
            pos += size
        weights[tuple(atom) + (secret,)] = counts[code]

    domains = {pid: tuple(product(range(p), repeat=size)) for pid, size in zip(observed, sizes)}
    return JointDistributionTable(tuple(observed), domains, tuple(range(p)), weights, total)


def recovery_failures(program: SpanProgram, A: Iterable[int],
                      bound: int = DEFAULT_ENUMERATION_BOUND) -> int:
    """Number of randomness vectors on which A's recovery misses the secret.

    Uses the same coefficients as :func:`recover`, applied to every
    randomness vector at once.
    """
    p, dim = program.p, program.dim
    if p**dim > bound:
        raise EnumerationBoundExceeded(f"{p}^{dim} exceeds bound {bound}")
    labels, coeffs = recovery_coefficients(program, A)
    held = {(pid, k): v for pid, k, v in program.vectors_of(A)}
    M = np.array([held[lab] for lab in labels], dtype=np.int64).reshape(len(labels), dim)
    R = enumerate_randomness(p, dim)
    recovered = ((R @ M.T) % p) @ np.array(coeffs, dtype=np.int64) % p
    secret = (R @ np.array(program.target, dtype=np.int64)) % p
    return int(np.count_nonzero(recovered != secret))
