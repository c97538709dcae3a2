"""Probabilistic secret sharing: span programs, Hilbert-space programs and their schemes."""

from .access_structure import (GDeltaWitness, MonotoneStructure, builtin_structure,
                               diagonal_refutation, gdelta_membership, gen_membership,
                               important_participants, minimize_generators, normalize_witness)
from .classifier import (Infinite, JointDistributionTable, classify, min_c,
                         recovery_check)
from .gaussian_ramp import (HilbertProgram, conditional_check, hilbert_from_witness,
                            orthogonal_decompose, simulate, wrapped_density_bounds)
from .linear_scheme import deal, joint_distribution, recover
from .span_program import SpanProgram, from_generators, realized_structure, realizes, span_membership
from .tail_threshold import (conditional_secret_distribution, eventual_value_recover, sample)

__version__ = "0.1.0"
