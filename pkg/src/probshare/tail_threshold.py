"""Ramp scheme with finite share domains and infinitely many secrets.

The secret s is a positive integer with probability 2^-s, the threshold t > s
exceeds it by a geometric(1/2) amount, participant i <= t receives a uniform
integer in {1..i} and participant i > t receives s.

Random bits come from numpy's PCG64 seeded with ``seed``.  A geometric(1/2)
value on {1, 2, ...} is one plus the number of trailing one-bits of a 64-bit
word from ``Generator.bit_generator.random_raw``; an all-ones word adds 64
and draws another word.  Per dealing, s is drawn, then t - s, then the
shares of indices 1..N in order via ``Generator.integers``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class ImpossibleObservation(ValueError):
    pass


@dataclass(frozen=True)
class TailDealing:
    secret: int
    threshold: int
    shares: tuple[int, ...]


def _trailing_ones(words: np.ndarray) -> np.ndarray:
    inv = ~words
    low = inv & (~inv + np.uint64(1))  # lowest set bit of the complement
    out = np.zeros(words.shape, dtype=np.int64)
    nz = low != 0
    out[nz] = np.log2(low[nz].astype(np.float64)).astype(np.int64)
    out[~nz] = 64
    return out


def geometric_half(rng: np.random.Generator, size: int) -> np.ndarray:
    """Geometric(1/2) on {1, 2, ...} from raw 64-bit words."""
    words = np.asarray(rng.bit_generator.random_raw(size), dtype=np.uint64)
    out = 1 + _trailing_ones(words)
    redo = np.flatnonzero(words == _ALL_ONES)
    for i in redo:
        extra = 0
        word = _ALL_ONES
        while word == _ALL_ONES:
            word = np.uint64(rng.bit_generator.random_raw())
            extra += int(_trailing_ones(np.array([word]))[0])
        out[i] += extra
    return out


def sample_many(count: int, prefix_length: int, seed):
    """Arrays (secrets, thresholds, shares) for ``count`` dealings.

    ``seed`` is an integer or a ``numpy.random.SeedSequence``.
    """
    if prefix_length < 1:
        raise ValueError("prefix_length must be at least 1")
    rng = np.random.default_rng(seed)
    s = geometric_half(rng, count)
    t = s + geometric_half(rng, count)
    shares = np.empty((count, prefix_length), dtype=np.int64)
    for i in range(1, prefix_length + 1):
        u = rng.integers(1, i + 1, size=count)
        shares[:, i - 1] = np.where(i <= t, u, s)
    return s, t, shares


def sample(prefix_length: int, seed: int) -> TailDealing:
    s, t, shares = sample_many(1, prefix_length, seed)
    return TailDealing(int(s[0]), int(t[0]), tuple(shares[0].tolist()))


@dataclass(frozen=True)
class Posterior:
    """Exact posterior of the secret on 1..cap plus the exact mass beyond cap."""

    probabilities: dict[int, Fraction]
    tail_mass: Fraction
    cap: int

    def lines(self) -> list[str]:
        out = [f"{s} {p}" for s, p in self.probabilities.items()]
        out.append(f"tail {self.tail_mass}")
        return out


def _validate(observed: Mapping[int, int]):
    for i, v in observed.items():
        if i < 1:
            raise ImpossibleObservation(f"participant index {i} must be positive")
        if v < 1:
            raise ImpossibleObservation(f"share {v} of participant {i} is not a positive integer")


def _joint_given_secret(observed: Mapping[int, int], s: int) -> Fraction:
    """P(secret = s and shares match), summed over every threshold in closed form."""
    m = max(observed, default=1)
    uniform = Fraction(1)
    for i in observed:
        uniform /= i
    total = Fraction(0)
    # thresholds below m: enumerate
    for t in range(s + 1, m):
        like = Fraction(1)
        for i, v in observed.items():
            if i <= t:
                like *= Fraction(1, i) if v <= i else 0
            else:
                like *= 1 if v == s else 0
        total += like * Fraction(1, 2**t)
    # thresholds >= max(m, s+1): every observed index is uniform
    if all(v <= i for i, v in observed.items()):
        t0 = max(m, s + 1)
        total += uniform * Fraction(1, 2 ** (t0 - 1))
    return total


def conditional_secret_distribution(observed: Mapping[int, int], cap: int) -> Posterior:
    """Exact posterior of the secret given some participants' shares.

    Secrets at or above the largest observed index behave alike (every
    observed participant then sits below the threshold), so their joint mass
    is ``2^-s`` times a constant and the total beyond ``cap`` has a closed
    form; the reported tail mass is exact.
    """
    observed = dict(observed)
    _validate(observed)
    if cap < max(observed.values(), default=1):
        raise ValueError("cap must be at least the largest observed share")
    m = max(observed, default=1)
    uniform = Fraction(1)
    for i in observed:
        uniform /= i
    consistent_far = all(v <= i for i, v in observed.items())
    far = uniform if consistent_far else Fraction(0)   # joint(s) = far * 2^-s for s >= m
    head = {s: _joint_given_secret(observed, s) for s in range(1, max(m, cap + 1))}
    # sum_{s >= m} far * 2^-s = far * 2^-(m-1)
    Z = sum(head[s] for s in range(1, m)) + far * Fraction(1, 2 ** (m - 1))
    if Z == 0:
        raise ImpossibleObservation(f"observation {observed} has probability zero")
    probs = {s: head[s] / Z for s in range(1, cap + 1)}
    tail = 1 - sum(probs.values())
    return Posterior(probs, tail, cap)


def eventual_value_recover(shares: Sequence[int], run_length: int):
    """The common value of the last ``run_length`` shares, or None.

    Any run reaching past the threshold carries the secret.  A wrong answer
    needs r equal uniform shares below the threshold, which has probability
    at most ``2**-(r-1)`` since every index after the first is at least 2.
    """
    if run_length < 1:
        raise ValueError("run_length must be at least 1")
    if len(shares) < run_length:
        return None
    tail = shares[-run_length:]
    return tail[0] if all(x == tail[0] for x in tail) else None


def posterior_ratio_range(indices: Iterable[int], cap: int) -> tuple[Fraction, Fraction]:
    """Min and max of posterior(s) / prior(s) over s <= cap and all observations of ``indices``."""
    indices = sorted(set(indices))
    lo = hi = None
    for values in product(*(range(1, i + 1) for i in indices)):
        post = conditional_secret_distribution(dict(zip(indices, values)), cap)
        for s, p in post.probabilities.items():
            r = p * 2**s
            lo = r if lo is None or r < lo else lo
            hi = r if hi is None or r > hi else hi
    return lo, hi


def monte_carlo_posterior(observed: Mapping[int, int], samples: int, seed: int,
                          cap: int, chunk: int = 250_000):
    """Counts of secrets 1..cap (and a tail bin) among samples matching ``observed``."""
    prefix = max(observed)
    counts = np.zeros(cap + 1, dtype=np.int64)
    matched = 0
    done = 0
    k = 0
    while done < samples:
        n = min(chunk, samples - done)
        s, _, shares = sample_many(n, prefix, seed if samples <= chunk else np.random.SeedSequence([seed, k]))
        mask = np.ones(n, dtype=bool)
        for i, v in observed.items():
            mask &= shares[:, i - 1] == v
        hit = s[mask]
        matched += len(hit)
        counts += np.bincount(np.minimum(hit, cap + 1) - 1, minlength=cap + 1)[:cap + 1]
        done += n
        k += 1
    return counts, matched
