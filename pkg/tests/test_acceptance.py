"""Acceptance checks, one test per criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.
"""
import math
import random
import subprocess
import sys
import time
from fractions import Fraction
from itertools import combinations

import pytest

from probshare.access_structure import (GDeltaWitness, all_infinite_witness, diagonal_refutation,
                                        disjoint_progressions, gdelta_membership, gen_membership,
                                        grid_rows, grid_rows_structure, important_participants,
                                        minimize_generators, normalize_witness, subsets)
from probshare.classifier import (Infinite, JointDistributionTable, classify, is_independent,
                                  min_c, positivity_violation)
from probshare.gaussian_ramp import (conditional_check, hilbert_from_witness, hilbert_realizes,
                                     maximal_unqualified, orthogonal_decompose)
from probshare.linear_scheme import joint_distribution, recovery_failures
from probshare.span_program import from_generators, realized_structure
from probshare.tail_threshold import conditional_secret_distribution, monte_carlo_posterior

from catalogue import (GENERATOR_FAMILIES, PRIMES, brute_posterior, hilbert_catalogue,
                       random_table, witness_catalogue)

ENUMERATION_LIMIT = 10**6
GAUSS_SAMPLES = 100_000


def _enumerable_cases():
    for name in sorted(GENERATOR_FAMILIES):
        G = GENERATOR_FAMILIES[name]
        for p in PRIMES:
            prog = from_generators(G, p)
            if p**prog.dim <= ENUMERATION_LIMIT:
                yield name, G, p, prog


@pytest.mark.criterion(1, "perfect-scheme exactness")
def test_c01_unqualified_sets_independent_of_secret(detail):
    start = time.perf_counter()
    cases = sets = 0
    bad = []
    assert len(GENERATOR_FAMILIES) >= 20
    for name, G, p, prog in _enumerable_cases():
        cases += 1
        table = joint_distribution(prog, prog.universe)
        for B in subsets(prog.universe):
            if gen_membership(G, B):
                continue
            sets += 1
            if not is_independent(table, B):
                bad.append((name, p, sorted(B)))
    elapsed = time.perf_counter() - start
    detail(f"{cases} (family, p) cases, {sets} unqualified sets, {elapsed:.1f}s")
    assert not bad, bad[:5]
    assert elapsed < 60


@pytest.mark.criterion(2, "recovery identity")
def test_c02_recovery_on_every_randomness_vector(detail):
    checked = 0
    bad = []
    for name, G, p, prog in _enumerable_cases():
        for A in minimize_generators(G):
            checked += 1
            failures = recovery_failures(prog, A, bound=ENUMERATION_LIMIT)
            if failures:
                bad.append((name, p, sorted(A), failures))
    detail(f"{checked} minimal qualified sets, every randomness vector")
    assert not bad, bad[:5]


@pytest.mark.criterion(3, "span round trip")
def test_c03_realized_structure_matches_generators(detail):
    bad = []
    for name in sorted(GENERATOR_FAMILIES):
        G = GENERATOR_FAMILIES[name]
        for p in PRIMES:
            if realized_structure(from_generators(G, p)) != minimize_generators(G):
                bad.append((name, p))
    detail(f"{len(GENERATOR_FAMILIES) * len(PRIMES)} (family, p) pairs")
    assert not bad, bad


def _random_predicate(rng, participants):
    pool = [frozenset(c) for k in range(2, len(participants) + 1)
            for c in combinations(participants, k)]
    gens = rng.sample(pool, rng.randint(0, len(pool))) if pool else []
    return lambda A: gen_membership(gens, A)


@pytest.mark.criterion(4, "classifier collapse and implication chain")
def test_c04_finite_collapse(detail):
    rng = random.Random(20240601)
    n_tables = 250
    mismatches = chain_breaks = 0
    labels = {}
    for _ in range(n_tables):
        t = random_table(rng, max_participants=3, max_atoms=3)
        for B in subsets(t.participants):
            finite = min_c(t, B) is not Infinite
            positive = positivity_violation(t, B) is None
            mismatches += finite != positive
        r = classify(t, _random_predicate(rng, t.participants))
        chain_breaks += not r.chain_ok
        labels[r.label] = labels.get(r.label, 0) + 1
    detail(f"{n_tables} tables, labels {dict(sorted(labels.items()))}")
    assert mismatches == 0 and chain_breaks == 0
    # the fuzz must exercise both sides of the equivalence
    assert labels.get("none", 0) and (labels.get("almost_perfect", 0) or labels.get("perfect", 0))


@pytest.mark.criterion(5, "almost-perfect constant of the biased XOR table")
def test_c05_biased_xor(detail):
    F = Fraction
    weights = {(0, 0): F(4, 10), (0, 1): F(1, 10), (1, 0): F(2, 10), (1, 1): F(3, 10)}
    masses = {(a, b, a ^ b): w for (a, b), w in weights.items()}
    t = JointDistributionTable.from_masses([1, 2], {1: (0, 1), 2: (0, 1)}, (0, 1), masses)
    r = classify(t, lambda A: {1, 2} <= set(A))
    detail(f"c = {r.c}, label {r.label}")
    assert min_c(t, {1}) == F(3, 2)
    assert r.c == F(3, 2) and r.label == "almost_perfect"


def _gauss_cases():
    cat = hilbert_catalogue()
    for k, name in enumerate(sorted(cat)):
        prog = cat[name]
        for j, B in enumerate(maximal_unqualified(prog)):
            yield name, prog, B, 1000 * k + j


def _exact_residual_sq(vectors, target):
    basis = []
    for v in vectors:
        w = list(v)
        for b in basis:
            c = sum(x * y for x, y in zip(w, b)) / sum(y * y for y in b)
            w = [x - c * y for x, y in zip(w, b)]
        if any(w):
            basis.append(w)
    r = list(target)
    for b in basis:
        c = sum(x * y for x, y in zip(r, b)) / sum(y * y for y in b)
        r = [x - c * y for x, y in zip(r, b)]
    return sum(x * x for x in r)


@pytest.mark.criterion(6, "Gaussian conditional variance")
def test_c06_conditional_variance(detail):
    start = time.perf_counter()
    assert len(hilbert_catalogue()) >= 5
    worst = 0.0
    n = 0
    bad = []
    for name, prog, B, seed in _gauss_cases():
        n += 1
        d = orthogonal_decompose(prog, B)
        exact = float(_exact_residual_sq([v for _, _, v in prog.vectors_of(B)], prog.target))
        assert abs(d.v1_norm_sq - (d.target_norm_sq - d.v2_norm_sq)) <= 1e-9 * d.target_norm_sq
        assert abs(d.v1_norm_sq - exact) <= 1e-9 * exact
        rep = conditional_check(prog, B, GAUSS_SAMPLES, seed)
        worst = max(worst, rep.z)
        if not rep.passed:
            bad.append((name, sorted(B), rep.z))
    elapsed = time.perf_counter() - start
    detail(f"{n} (program, set) pairs, worst z {worst:.2f}, {elapsed:.1f}s")
    assert not bad, bad
    assert elapsed < 120


@pytest.mark.criterion(7, "wrapped band")
def test_c07_wrapped_band(detail):
    worst = 0.0
    n = 0
    bad = []
    for name, prog, B, seed in _gauss_cases():
        n += 1
        rep = conditional_check(prog, B, GAUSS_SAMPLES, seed, wrap=True, bins=20)
        worst = max(worst, rep.band_worst_z)
        if not rep.band_passed:
            bad.append((name, sorted(B), rep.band_worst_z))
    detail(f"{n} (program, set) pairs, worst band excess {worst:.2f} SE")
    assert not bad, bad


@pytest.mark.criterion(8, "Hilbert realization equivalence")
def test_c08_realization_equivalence(detail):
    checked = 0
    bad = []
    for name, w in sorted(witness_catalogue().items()):
        assert len(w.participants) <= 6
        universe = range(1, 7)
        for k in range(1, w.depth + 1):
            prog = hilbert_from_witness(w, k)
            for A in subsets(universe):
                checked += 1
                A_in = A & prog.universe
                if hilbert_realizes(prog, A_in) != gdelta_membership(w, A, k):
                    bad.append((name, k, sorted(A)))
    detail(f"{checked} (witness, level, subset) checks")
    assert not bad, bad[:5]


@pytest.mark.criterion(9, "tail-scheme posteriors")
def test_c09_tail_posteriors(detail):
    cap = 6
    obs = {3: 3}
    post = conditional_secret_distribution(obs, cap)
    oracle = brute_posterior(obs, max_secret=60, max_threshold=120)
    # the oracle drops prior mass below 2^-59; relative to Z = 1/4 that is under 2^-55
    tol = Fraction(1, 2**55)
    for s in range(1, cap + 1):
        assert abs(post.probabilities[s] - oracle[s]) <= tol
    assert abs(post.tail_mass - sum(p for s, p in oracle.items() if s > cap)) <= tol
    assert sum(post.probabilities.values()) + post.tail_mass == 1

    counts, matched = monte_carlo_posterior(obs, 1_000_000, 7, cap)
    worst = 0.0
    for s in range(1, cap + 2):
        p = float(post.probabilities[s]) if s <= cap else float(post.tail_mass)
        se = math.sqrt(p * (1 - p) / matched)
        z = abs(counts[s - 1] / matched - p) / se
        worst = max(worst, z)
        assert z <= 5, (s, z)

    for o in ({3: 3}, {2: 2, 3: 1}, {1: 1}, {4: 4, 5: 1}, {2: 1, 3: 2, 6: 6}):
        assert all(p > 0 for p in conditional_secret_distribution(o, 15).probabilities.values())
    detail(f"exact vs oracle within 2^-55, MC {matched} matches, worst z {worst:.2f}")


def _prefix(witness, n):
    # a prefix of a decreasing chain is still decreasing
    return GDeltaWitness(witness.levels[:n], normalized=witness.normalized)


@pytest.mark.criterion(10, "negative results")
def test_c10_refutations_and_important_participants(detail):
    # disjoint residue classes against every prefix of the all-subsets witness
    sets = disjoint_progressions(3, 12)
    witness = all_infinite_witness(12, 3)
    for n in range(1, 4):
        prefix = _prefix(witness, n)
        B = diagonal_refutation(sets[:n], prefix)
        assert all(gen_membership(prefix.levels[i], B) for i in range(n))
        assert not any(A <= B for A in sets)
    assert diagonal_refutation(sets, witness) == frozenset({1, 2, 3, 4, 5, 8})

    # grid rows: each witness level needs i points of some row, never a full row
    grids = 0
    for m in range(2, 6):
        rows = grid_rows(m)
        witnesses = [
            all_infinite_witness(m * m, m - 1),
            normalize_witness([[set(sorted(r)[:i]) for r in rows] for i in range(1, m)]),
        ]
        for w in witnesses:
            for n in range(1, m):
                prefix = _prefix(w, n)
                B = diagonal_refutation(rows[:n], prefix)
                assert all(gen_membership(prefix.levels[i], B) for i in range(n))
                assert not grid_rows_structure(m).qualified(B)
                grids += 1

    # the all-infinite structure truncated to n participants has no qualified set
    for n in range(1, 9):
        trunc = all_infinite_witness(n, n + 1)
        assert important_participants(lambda A: gdelta_membership(trunc, A), range(1, n + 1)) == frozenset()
    detail(f"3 progression prefixes, {grids} grid-row refutations, truncations 1..8 empty")


def _cli_cases(d):
    files = {
        "g.txt": "structure v1\n1 2\n1 3\n2 3\n",
        "layers.txt": "gdelta v1\n1\n2\n---\n3\n",
        "sets.txt": "structure v1\n3 6 9 12\n1 4 7 10\n2 5 8 11\n",
        "pairs.txt": "gdelta v1\n1 2\n---\n1 2\n",
        "obs.txt": "obs 3 3\nobs 2 2\n",
    }
    for name, text in files.items():
        (d / name).write_text(text)
    subprocess.run([sys.executable, "-m", "probshare", "span", "build", "--prime", "3",
                    "--generators", "g.txt", "--out", "prog.txt"], cwd=d, check=True)
    subprocess.run([sys.executable, "-m", "probshare", "structure", "builtin", "--name",
                    "all_infinite", "--max-index", "12", "--levels", "3", "--out", "ai.txt"],
                   cwd=d, check=True)
    subprocess.run([sys.executable, "-m", "probshare", "scheme", "deal", "--program", "prog.txt",
                    "--seed", "11", "--out", "deal.txt"], cwd=d, check=True)
    subprocess.run([sys.executable, "-m", "probshare", "gauss", "build", "--witness", "pairs.txt",
                    "--levels", "2", "--out", "h.txt"], cwd=d, check=True)
    return [
        ["structure", "minimize", "--generators", "g.txt"],
        ["structure", "member", "--generators", "g.txt", "--set", "1 3"],
        ["structure", "normalize", "--layers", "layers.txt"],
        ["structure", "builtin", "--name", "grid_rows", "--m", "3"],
        ["structure", "refute", "--sets", "sets.txt", "--witness", "ai.txt"],
        ["span", "build", "--prime", "5", "--generators", "g.txt"],
        ["span", "realize", "--program", "prog.txt", "--set", "2 3"],
        ["span", "structure", "--program", "prog.txt"],
        ["scheme", "deal", "--program", "prog.txt", "--seed", "5"],
        ["scheme", "deal", "--program", "prog.txt"],
        ["scheme", "recover", "--program", "prog.txt", "--dealing", "deal.txt", "--set", "1 3"],
        ["scheme", "enumerate", "--program", "prog.txt", "--observed", "1 2"],
        ["scheme", "classify", "--program", "prog.txt", "--structure", "g.txt"],
        ["gauss", "decompose", "--program", "h.txt", "--set", "1"],
        ["gauss", "simulate", "--program", "h.txt", "--samples", "500", "--seed", "3"],
        ["gauss", "simulate", "--program", "h.txt", "--samples", "500", "--seed", "3",
         "--wrap", "--workers", "2"],
        ["gauss", "check", "--program", "h.txt", "--set", "1", "--samples", "20000", "--seed", "4",
         "--wrap"],
        ["gauss", "bounds", "--sigma", "0.2"],
        ["tail", "sample", "--prefix", "12", "--seed", "9"],
        ["tail", "posterior", "--obs", "3=3", "--cap", "6"],
        ["tail", "posterior", "--obs-file", "obs.txt", "--cap", "10"],
        ["tail", "recover", "--shares", "1 2 3 3 3", "--run-length", "3"],
        ["pipeline", "perfect", "--generators", "g.txt", "--prime", "2"],
        ["pipeline", "ramp", "--witness", "pairs.txt", "--levels", "2", "--samples", "20000",
         "--seed", "2"],
    ]


@pytest.mark.criterion(11, "CLI determinism")
def test_c11_cli_byte_identical(tmp_path, detail):
    cases = _cli_cases(tmp_path)
    differing = []
    for k, argv in enumerate(cases):
        outputs = []
        for run in range(2):
            out_file = tmp_path / f"out_{k}_{run}.txt"
            res = subprocess.run([sys.executable, "-m", "probshare", *argv, "--out", str(out_file)],
                                 cwd=tmp_path, capture_output=True)
            assert res.returncode in (0, 1), (argv, res.stderr.decode())
            stdout = subprocess.run([sys.executable, "-m", "probshare", *argv], cwd=tmp_path,
                                    capture_output=True).stdout
            outputs.append((res.returncode, out_file.read_bytes(), stdout))
        if outputs[0] != outputs[1] or outputs[0][1] != outputs[0][2]:
            differing.append(argv)
    detail(f"{len(cases)} invocations run twice, {len(differing)} differing")
    assert not differing, differing
