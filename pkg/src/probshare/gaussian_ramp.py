"""Finite-dimensional Hilbert-space programs and their Gaussian schemes.

Truncation
    Programs live in R^dim.  A finite-dimensional span is closed, so "target
    in the closure of the span" is plain span membership, decided by the
    residual of a least-squares projection against ``RANK_TOL``.

Construction from a witness
    Coordinates ``0..levels-1`` are e_1, ..., e_levels and the level-n
    target is ``v_n = e_1 + e_2/2 + ... + e_n/n``.  Every generator B of
    level n hands fresh unit vectors to all but its largest member and
    ``v_n`` minus those to the largest one.  Only fresh coordinates that are
    actually used exist.  Coordinates are kept as exact fractions.

Gaussian scheme
    Each coordinate gets an independent standard normal; a vector a carries
    ``xi_a = <a, z>``.  Shares are the xi of the assigned vectors and the
    secret is ``xi_v`` (or its fractional part when wrapping).  Normals are
    produced by inverse-CDF: numpy's PCG64 stream seeded with ``seed`` emits
    53-bit integers k, mapped to ``u = (k + 1/2) / 2**53`` and then to
    ``scipy.special.ndtri(u)``, row by row over the coordinates.

Wrapped band
    Given an unqualified B's shares, the secret is normal with standard
    deviation ``||v1||`` (the component of the target orthogonal to B's
    span) around a share-dependent mean.  The wrapped density of any normal
    with standard deviation sigma has mean 1 on [0, 1) and max/min ratio
    ``c(sigma)``, so it lies in [1/c(sigma), c(sigma)].  The conditional
    density over the unconditional one therefore lies in
    [1/(c(||v1||) c(||v||)), c(||v1||) c(||v||)], a bound that depends on B
    only.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.special import ndtri
from scipy.stats import norm

from .access_structure import GDeltaWitness, subsets

RANK_TOL = 1e-9
SERIES_TOL = 1e-15


class HilbertProgramError(ValueError):
    pass


class QualifiedSetError(HilbertProgramError):
    """The checked set spans the target; there is no conditional spread."""


@dataclass(frozen=True)
class HilbertProgram:
    dim: int
    target: tuple[Fraction, ...]
    assignment: Mapping[int, tuple[tuple[Fraction, ...], ...]]
    level_targets: tuple[tuple[Fraction, ...], ...] = ()
    universe: frozenset[int] = field(default=frozenset())

    def __post_init__(self):
        if self.dim <= 0:
            raise HilbertProgramError("dimension must be positive")
        vecs = [self.target, *self.level_targets]
        vecs += [v for vs in self.assignment.values() for v in vs]
        if any(len(v) != self.dim for v in vecs):
            raise HilbertProgramError("vector length differs from dim")
        if not any(self.target):
            raise HilbertProgramError("target must be nonzero")
        object.__setattr__(self, "assignment", {k: tuple(self.assignment[k]) for k in sorted(self.assignment)})
        object.__setattr__(self, "universe", frozenset(self.universe) | frozenset(self.assignment))

    def vectors_of(self, A: Iterable[int]) -> list[tuple[int, int, tuple]]:
        out = []
        for pid in sorted(set(A)):
            for k, v in enumerate(self.assignment.get(pid, ())):
                out.append((pid, k, v))
        return out

    @property
    def labels(self) -> list[tuple[int, int]]:
        return [(pid, k) for pid, k, _ in self.vectors_of(self.assignment)]

    def target_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.target])

    def matrix(self, A: Iterable[int] | None = None) -> np.ndarray:
        """Vectors of A (default: everyone) as columns."""
        held = self.vectors_of(self.assignment if A is None else A)
        M = np.array([[float(x) for x in v] for _, _, v in held], dtype=float)
        return M.reshape(len(held), self.dim).T


def level_target(n: int, dim: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, i + 1) if i < n else Fraction(0) for i in range(dim))


def hilbert_from_witness(witness: GDeltaWitness, levels: int) -> HilbertProgram:
    if levels < 1 or levels > witness.depth:
        raise HilbertProgramError(f"levels must be in 1..{witness.depth}, got {levels}")
    families = witness.levels[:levels]
    for family in families:
        if any(len(B) == 0 for B in family):
            raise HilbertProgramError("empty generator")
    dim = levels + sum(len(B) - 1 for family in families for B in family)
    assignment: dict[int, list[tuple[Fraction, ...]]] = {}
    fresh = levels
    for n, family in enumerate(families, start=1):
        vn = list(level_target(n, dim))
        for B in family:
            members = sorted(B)
            last = list(vn)
            for pid in members[:-1]:
                e = [Fraction(0)] * dim
                e[fresh] = Fraction(1)
                last[fresh] = Fraction(-1)
                assignment.setdefault(pid, []).append(tuple(e))
                fresh += 1
            assignment.setdefault(members[-1], []).append(tuple(last))
    return HilbertProgram(
        dim=dim,
        target=level_target(levels, dim),
        assignment={k: tuple(v) for k, v in assignment.items()},
        level_targets=tuple(level_target(n, dim) for n in range(1, levels + 1)),
        universe=witness.participants,
    )


@dataclass(frozen=True)
class Decomposition:
    """Target split into a part in span(B) and a part orthogonal to it."""

    v1_norm_sq: float
    v2_norm_sq: float
    target_norm_sq: float
    projection_coeffs: tuple[float, ...]
    rank: int

    @property
    def qualified(self) -> bool:
        return self.v1_norm_sq == 0.0


def orthogonal_decompose(program: HilbertProgram, B: Iterable[int],
                         tol: float = RANK_TOL) -> Decomposition:
    """Project the target onto the span of B's vectors.

    Uses column-pivoted QR.  The orthogonal part is reported as exactly zero
    when its norm is below ``tol * ||v||``.
    """
    v = program.target_array()
    vv = float(v @ v)
    M = program.matrix(B)
    m = M.shape[1]
    if m == 0:
        return Decomposition(vv, 0.0, vv, (), 0)
    Q, R, piv = scipy.linalg.qr(M, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    cutoff = max(M.shape) * np.finfo(float).eps * (diag[0] if len(diag) else 0.0)
    rank = int(np.count_nonzero(diag > cutoff))
    Qr = Q[:, :rank]
    y = Qr.T @ v
    coeffs = np.zeros(m)
    if rank:
        coeffs[piv[:rank]] = scipy.linalg.solve_triangular(R[:rank, :rank], y)
    v2 = M @ coeffs
    v1 = v - v2
    v1_sq = float(v1 @ v1)
    if math.sqrt(v1_sq) < tol * math.sqrt(vv):
        v1_sq = 0.0
    return Decomposition(v1_sq, float(v2 @ v2), vv, tuple(coeffs.tolist()), rank)


def hilbert_realizes(program: HilbertProgram, A: Iterable[int], tol: float = RANK_TOL) -> bool:
    return orthogonal_decompose(program, A, tol).qualified


def maximal_unqualified(program: HilbertProgram, universe: Iterable[int] | None = None,
                        bound: int = 12) -> list[frozenset[int]]:
    universe = program.universe if universe is None else frozenset(universe)
    if len(universe) > bound:
        raise HilbertProgramError(f"universe of {len(universe)} exceeds bound {bound}")
    unq = [A for A in subsets(universe) if not hilbert_realizes(program, A)]
    return [A for A in unq if not any(A < C for C in unq)]


# -- simulation ---------------------------------------------------------------

def standard_normals(rng: np.random.Generator, shape) -> np.ndarray:
    k = rng.integers(0, 2**53, size=shape, dtype=np.int64)
    return ndtri((k + 0.5) / 2.0**53)


def frac(x: np.ndarray) -> np.ndarray:
    out = x - np.floor(x)
    return np.where(out >= 1.0, 0.0, out)


@dataclass(frozen=True)
class Simulation:
    labels: tuple[tuple[int, int], ...]
    shares: np.ndarray  # samples x len(labels)
    secret: np.ndarray
    wrapped: bool

    def columns(self, B: Iterable[int]) -> np.ndarray:
        B = set(B)
        idx = [i for i, (pid, _) in enumerate(self.labels) if pid in B]
        return self.shares[:, idx]

    def to_text(self, precision: int = 12) -> str:
        fmt = f"{{:.{precision}g}}"
        lines = ["\t".join(fmt.format(x) for x in (*row, s))
                 for row, s in zip(self.shares.tolist(), self.secret.tolist())]
        return "\n".join(lines) + ("\n" if lines else "")


def simulate(program: HilbertProgram, samples: int, seed: int, wrap: bool = False,
             workers: int = 1) -> Simulation:
    """Draw ``samples`` joint realizations of shares and secret.

    With ``workers > 1`` the samples are split into contiguous blocks, block k
    drawing from ``SeedSequence(seed).spawn(workers)[k]``; output is fixed for
    a given (seed, workers) pair.
    """
    if samples < 1:
        raise HilbertProgramError("samples must be at least 1")
    M = program.matrix()
    v = program.target_array()
    if workers <= 1:
        Z = standard_normals(np.random.default_rng(seed), (samples, program.dim))
    else:
        seqs = np.random.SeedSequence(seed).spawn(workers)
        sizes = [samples // workers + (k < samples % workers) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = pool.map(lambda a: standard_normals(np.random.default_rng(a[0]), (a[1], program.dim)),
                              zip(seqs, sizes))
            Z = np.vstack(list(blocks))
    secret = Z @ v
    if wrap:
        secret = frac(secret)
    return Simulation(tuple(program.labels), Z @ M, secret, wrap)


# -- wrapped normal -------------------------------------------------------------

def _theta_sum(sigma: float, x: float) -> float:
    """Density at x of the wrapped N(0, sigma^2) on [0, 1), with truncation below SERIES_TOL.

    Large sigma uses the Fourier form ``1 + 2 sum q^(n^2) cos(2 pi n x)`` with
    ``q = exp(-2 pi^2 sigma^2)``; the tail after N terms is at most
    ``2 q^((N+1)^2) / (1 - q)``.  Small sigma sums the shifted Gaussians
    directly; the tail beyond |k| > K (K >= 1) is at most
    ``2 phi(K - 1/2) / (1 - exp(-1/(2 sigma^2)))`` in density units.
    """
    if sigma >= 0.5:
        q = math.exp(-2 * math.pi**2 * sigma**2)
        total, n = 1.0, 1
        while True:
            total += 2 * q ** (n * n) * math.cos(2 * math.pi * n * x)
            if 2 * q ** ((n + 1) ** 2) / (1 - q) < SERIES_TOL:
                return total
            n += 1
    total = 0.0
    K = 0
    ratio = math.exp(-1 / (2 * sigma**2))
    while True:
        ks = (0,) if K == 0 else (K, -K)
        total += sum(norm.pdf((x + k) / sigma) / sigma for k in ks)
        K += 1
        tail = 2 * norm.pdf((K - 0.5) / sigma) / sigma / (1 - ratio)
        if K >= 2 and tail < SERIES_TOL:
            return total


def wrapped_normal_density(x, sigma: float, mean: float = 0.0):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.array([_theta_sum(sigma, float(frac(np.array([xi - mean]))[0])) for xi in x])


def wrapped_density_bounds(sigma: float) -> float:
    """max/min ratio of the wrapped N(mu, sigma^2) density on [0, 1).

    The density is symmetric and unimodal around mu, so the extremes sit at
    mu and mu + 1/2.
    """
    if not sigma > 0:
        raise HilbertProgramError(f"sigma must be positive, got {sigma}")
    return _theta_sum(sigma, 0.0) / _theta_sum(sigma, 0.5)


def wrapped_bin_probs(sigma: float, bins: int) -> np.ndarray:
    """Probability of each of ``bins`` equal bins of [0,1) under wrapped N(0, sigma^2)."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    K = int(math.ceil(12 * sigma)) + 2
    shifts = np.arange(-K, K + 1)[:, None]
    cdf = norm.cdf((edges[None, :] + shifts) / sigma).sum(axis=0)
    return np.diff(cdf)


# -- checks -----------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalReport:
    B: frozenset[int]
    v1_norm_sq: float
    residual_variance: float
    standard_error: float
    z: float
    passed: bool
    band_c: float | None = None
    band_worst_z: float | None = None
    band_passed: bool | None = None

    def lines(self) -> list[str]:
        out = [
            f"set {' '.join(map(str, sorted(self.B)))}",
            f"v1_norm_sq {self.v1_norm_sq:.12g}",
            f"residual_variance {self.residual_variance:.6f}",
            f"standard_error {self.standard_error:.6f}",
            f"z {self.z:.3f}",
            f"variance_check {'pass' if self.passed else 'fail'}",
        ]
        if self.band_c is not None:
            out += [f"band_c {self.band_c:.9f}", f"band_worst_z {self.band_worst_z:.3f}",
                    f"band_check {'pass' if self.band_passed else 'fail'}"]
        return out


def conditional_check(program: HilbertProgram, B: Iterable[int], samples: int, seed: int,
                      wrap: bool = False, bins: int = 20, cells: int = 5,
                      z_variance: float = 4.0, z_band: float = 5.0,
                      workers: int = 1) -> ConditionalReport:
    """Monte Carlo check of the conditional law of the secret given B's shares.

    The unwrapped secret is regressed on B's shares; the residual variance
    must match ``||v1||^2`` within ``z_variance`` standard errors, the
    standard error of a normal sample variance being
    ``||v1||^2 * sqrt(2 / (n - rank))``.

    With ``wrap`` the share space is cut into ``cells`` events by the
    fractional part of the fitted conditional mean.  Within each event, the
    frequency of every secret bin must lie in
    ``[q / c - z_band * se, q * c + z_band * se]``, where ``q = 1 / bins``,
    ``c = c(||v1||) * c(||v||)`` and se the binomial standard error at the
    event's sample count.  The conditional density alone stays within a
    factor c(||v1||) of uniform, so this band holds with room to spare.
    """
    B = frozenset(B)
    dec = orthogonal_decompose(program, B)
    if dec.qualified:
        raise QualifiedSetError(f"{sorted(B)} spans the target")
    sim = simulate(program, samples, seed, wrap=False, workers=workers)
    X = sim.columns(B)
    y = sim.secret
    if X.shape[1]:
        coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        fitted = X @ coef
    else:
        rank, fitted = 0, np.zeros_like(y)
    resid = y - fitted
    dof = samples - rank
    resid_var = float(resid @ resid / dof)
    se = dec.v1_norm_sq * math.sqrt(2.0 / dof)
    z = abs(resid_var - dec.v1_norm_sq) / se
    report = dict(B=B, v1_norm_sq=dec.v1_norm_sq, residual_variance=resid_var,
                  standard_error=se, z=z, passed=z <= z_variance)
    if wrap:
        c = wrapped_density_bounds(math.sqrt(dec.v1_norm_sq)) * \
            wrapped_density_bounds(math.sqrt(dec.target_norm_sq))
        q = np.full(bins, 1.0 / bins)
        secret_bin = np.minimum((frac(y) * bins).astype(int), bins - 1)
        cell = np.minimum((frac(fitted) * cells).astype(int), cells - 1) if rank else np.zeros(samples, int)
        worst = 0.0
        ok = True
        for k in range(cells):
            mask = cell == k
            n = int(mask.sum())
            if n == 0:
                continue
            freq = np.bincount(secret_bin[mask], minlength=bins) / n
            lo, hi = q / c, np.minimum(q * c, 1.0)
            se_bin = np.sqrt(np.clip(q * c, 0, 1) * (1 - np.clip(q / c, 0, 1)) / n)
            excess = np.maximum(lo - freq, freq - hi) / se_bin
            worst = max(worst, float(excess.max()))
            ok &= bool((excess <= z_band).all())
        report.update(band_c=c, band_worst_z=worst, band_passed=ok)
    return ConditionalReport(**report)
