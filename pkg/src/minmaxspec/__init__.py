"""Spectral theory of min/max operators over finite families of nonnegative matrices.

Modules
-------
classgraph  classes, access, basic/final classes, depths, principal partition
perron      spectral radius, positive eigenvectors, dual matrix, eigen-chains,
            growth descriptors of a single matrix
family      row-choice families, ``f_K``/``g_K``, growth-extremal matrices
minmax      positive eigenvector and generalized eigen-chain of ``f_K``,
            growth of ``f_K^n``/``g_K^n``
dynamics    iteration oracle and empirical growth estimator
io, cli     file formats and the ``minmaxspec`` command
"""
__version__ = "0.1.0"

from .classgraph import EPS_SPR, ClassStructure, classes, classify
from .dynamics import GrowthEstimate, IterationTrace, compare_growth, estimate_growth, iterate
from .errors import (
    ClosureTooLarge,
    ContractViolation,
    ConvergenceError,
    MinMaxError,
    NilpotentError,
    NonterminationError,
    NotIrreducibleError,
    ParseError,
    PreconditionError,
    SingularSystemError,
)
from .family import (
    MinimalPartition,
    RowChoiceFamily,
    apply,
    enumerate_closure,
    extremal_matrix,
    family_from_matrices,
    minimal_partition,
    select_policy,
    single,
)
from .minmax import (
    Characterization,
    NestedSolution,
    PositiveEigenvector,
    characterize,
    generalized_chain_min,
    growth,
    growth_all,
    irreducible_eigenvector_min,
    nested_policy_iteration,
    positive_eigenvector_min,
)
from .perron import (
    EigenChain,
    GrowthDescriptor,
    combine_growth,
    dual_matrix,
    growth_descriptor,
    growth_descriptors,
    perron_vector,
    positive_eigenvector_single,
    rothblum_chain,
    solve_nested_linear,
    spectral_radius,
)
