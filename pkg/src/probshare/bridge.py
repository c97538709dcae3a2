"""End-to-end pipelines producing plain-text verdict reports.

A pipeline runs its stages in order and stops at the first failure; the
report names that stage and carries a witness a person can re-check.
Timing is kept on the report object but left out of the text form so that
reports are byte-stable.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

from . import formats
from .access_structure import (GDeltaWitness, MonotoneStructure, StructureError,
                               gdelta_membership, minimize_generators, subsets)
from .classifier import classify
from .gaussian_ramp import (conditional_check, hilbert_from_witness, hilbert_realizes,
                            maximal_unqualified)
from .linear_scheme import joint_distribution
from .span_program import from_generators, realized_structure


@dataclass
class Stage:
    name: str
    passed: bool
    witnesses: list[str] = field(default_factory=list)
    info: list[str] = field(default_factory=list)


@dataclass
class PipelineReport:
    pipeline: str
    digest: str
    stages: list[Stage] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.stages) and all(s.passed for s in self.stages)

    @property
    def failed_stage(self) -> str | None:
        return next((s.name for s in self.stages if not s.passed), None)

    def to_text(self) -> str:
        out = ["report v1", f"pipeline {self.pipeline}", f"digest {self.digest}"]
        for s in self.stages:
            out.append(f"stage {s.name} {'pass' if s.passed else 'fail'}")
            out += [f"info {line}" for line in s.info]
            out += [f"witness {line}" for line in s.witnesses]
        out.append(f"verdict {'pass' if self.passed else 'fail'}")
        return "\n".join(out) + "\n"


def parse_report(text: str) -> PipelineReport:
    rows = [line.split(" ", 1) for line in text.splitlines() if line.strip()]
    if not rows or rows[0] != ["report", "v1"]:
        raise formats.FormatError("expected header 'report v1'")
    report = PipelineReport("", "")
    for key, *rest in rows[1:]:
        val = rest[0] if rest else ""
        if key == "pipeline":
            report.pipeline = val
        elif key == "digest":
            report.digest = val
        elif key == "stage":
            name, verdict = val.rsplit(" ", 1)
            report.stages.append(Stage(name, verdict == "pass"))
        elif key == "info":
            report.stages[-1].info.append(val)
        elif key == "witness":
            report.stages[-1].witnesses.append(val)
        elif key != "verdict":
            raise formats.FormatError(f"unexpected report line {key!r}")
    return report


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _fmt(s) -> str:
    return "{" + " ".join(map(str, sorted(s))) + "}"


def run_perfect_pipeline(generators, p: int, workers: int = 1) -> PipelineReport:
    """Generators -> span program -> exact dealt distribution -> classification."""
    start = time.perf_counter()
    generators = [frozenset(B) for B in generators]
    family = minimize_generators(generators)
    report = PipelineReport("perfect", _digest(formats.dump_structure(generators) + f"p {p}\n"))

    def done():
        report.elapsed = time.perf_counter() - start
        return report

    try:
        structure = MonotoneStructure.from_generators(generators)
    except StructureError as exc:
        report.stages.append(Stage("structure", False, [str(exc)]))
        return done()
    report.stages.append(Stage("structure", True, info=[f"generators {len(family)}"]))

    try:
        program = from_generators(family, p)
    except ValueError as exc:
        report.stages.append(Stage("span_build", False, [str(exc)]))
        return done()
    report.stages.append(Stage("span_build", True, info=[f"p {p}", f"dim {program.dim}"]))

    realized = realized_structure(program, structure.participants)
    st = Stage("round_trip", realized == family)
    if not st.passed:
        st.witnesses += [f"expected {_fmt(B)}" for B in family if B not in realized]
        st.witnesses += [f"realized {_fmt(B)}" for B in realized if B not in family]
    report.stages.append(st)
    if not st.passed:
        return done()

    try:
        table = joint_distribution(program, structure.participants, workers=workers)
    except ValueError as exc:
        report.stages.append(Stage("enumerate", False, [str(exc)]))
        return done()
    report.stages.append(Stage("enumerate", True, info=[f"atoms {len(table.weights)}",
                                                        f"denominator {table.denominator}"]))

    result = classify(table, structure)
    st = Stage("classify", result.label == "perfect", info=[f"label {result.label}",
                                                             f"c {result.c}"])
    for v in result.violations[:5]:
        st.witnesses.append(" ".join(_fmt(x) if isinstance(x, frozenset) else formats.format_atom(x)
                                     for x in v))
    if not st.passed and not result.violations:
        B = max(result.c_B, key=lambda k: result.c_B[k])
        st.witnesses.append(f"set {_fmt(B)} c {result.c_B[B]}")
    report.stages.append(st)
    return done()


def run_ramp_pipeline(witness: GDeltaWitness, levels: int, samples: int, seed: int,
                      bound: int = 10, workers: int = 1) -> PipelineReport:
    """Witness -> Hilbert program -> realization check -> Gaussian checks.

    The realization stage compares span membership with witness membership
    on every subset of the witness's participants.  Each maximal unqualified
    set then gets a conditional-variance check and a wrapped-band check,
    with seeds ``seed + k`` for the k-th set.
    """
    start = time.perf_counter()
    report = PipelineReport(
        "ramp", _digest(formats.dump_witness(witness) + f"levels {levels}\nsamples {samples}\nseed {seed}\n"))

    def done():
        report.elapsed = time.perf_counter() - start
        return report

    problems = []
    if witness.depth == 0 or not any(witness.levels):
        problems.append("witness has no generators")
    elif not (witness.normalized or witness.is_decreasing()):
        problems.append("witness levels are not decreasing")
    elif not 1 <= levels <= witness.depth:
        problems.append(f"levels {levels} outside 1..{witness.depth}")
    report.stages.append(Stage("witness", not problems, problems))
    if problems:
        return done()

    program = hilbert_from_witness(witness, levels)
    report.stages.append(Stage("hilbert_build", True, info=[f"dim {program.dim}"]))

    universe = witness.participants
    if len(universe) > bound:
        report.stages.append(Stage("realization", False, [f"universe {len(universe)} exceeds bound {bound}"]))
        return done()
    st = Stage("realization", True)
    qualified = 0
    for A in subsets(universe):
        span = hilbert_realizes(program, A)
        want = gdelta_membership(witness, A, levels)
        qualified += span
        if span != want:
            st.passed = False
            st.witnesses.append(f"set {_fmt(A)} span {span} witness {want}")
    st.info.append(f"qualified {qualified} of {2 ** len(universe)}")
    report.stages.append(st)
    if not st.passed:
        return done()

    maximal = maximal_unqualified(program, universe, bound)
    cond = Stage("conditional", True)
    band = Stage("wrapped_band", True)
    for k, B in enumerate(maximal):
        rep = conditional_check(program, B, samples, seed + k, wrap=True, workers=workers)
        cond.info.append(f"set {_fmt(B)} v1_norm_sq {rep.v1_norm_sq:.9f} "
                         f"residual {rep.residual_variance:.6f} z {rep.z:.3f}")
        band.info.append(f"set {_fmt(B)} c {rep.band_c:.9f} worst_z {rep.band_worst_z:.3f}")
        if not rep.passed:
            cond.passed = False
            cond.witnesses.append(f"set {_fmt(B)} residual {rep.residual_variance:.6f} "
                                  f"expected {rep.v1_norm_sq:.6f}")
        if not rep.band_passed:
            band.passed = False
            band.witnesses.append(f"set {_fmt(B)} worst_z {rep.band_worst_z:.3f}")
    report.stages += [cond, band]
    return done()
