"""Nominal classification over criteria hierarchies with robustness analysis.

The pipeline: elicit category weights from ranked card decks with
imprecision intervals (`srf`), sample every compatible weight vector
uniformly (`sampler`), evaluate likeness-based assignments per sample
(`likeness`, `smaa`), and extract loss-minimal deterministic
classifications (`robust`).  `document` defines the on-disk problem
format, `cli` and `service` expose the pipeline.
"""

from .hierarchy import (
    ROOT,
    CriteriaHierarchy,
    NodeId,
    Problem,
    Scale,
    SimDisFunction,
    ValidationError,
    build_problem,
    elementary_descendants,
    performance_diff,
)
from .likeness import (
    ParameterSet,
    assign,
    eval_simdis,
    likeness_to_set,
    partial_dissimilarity,
    partial_likeness,
    partial_similarity,
    split_sd,
)
from .srf import (
    Card,
    CardDeck,
    ConstraintSystem,
    InteractionDecl,
    build_constraints,
    feasibility_check,
    srf_deterministic,
)
from .sampler import SampleBatch, compile_polytope, hit_and_run
from .smaa import AssignmentDistribution, run_smaa
from .robust import (
    InfeasibleRequirements,
    Requirements,
    enumerate_optima,
    solve_classification,
)
from .document import (
    DocumentError,
    ProblemDocument,
    document_problem,
    document_systems,
    parse_document,
)

__all__ = [
    "ROOT",
    "CriteriaHierarchy",
    "NodeId",
    "Problem",
    "Scale",
    "SimDisFunction",
    "ValidationError",
    "build_problem",
    "elementary_descendants",
    "performance_diff",
    "ParameterSet",
    "assign",
    "eval_simdis",
    "likeness_to_set",
    "partial_dissimilarity",
    "partial_likeness",
    "partial_similarity",
    "split_sd",
    "Card",
    "CardDeck",
    "ConstraintSystem",
    "InteractionDecl",
    "build_constraints",
    "feasibility_check",
    "srf_deterministic",
    "SampleBatch",
    "compile_polytope",
    "hit_and_run",
    "AssignmentDistribution",
    "run_smaa",
    "InfeasibleRequirements",
    "Requirements",
    "enumerate_optima",
    "solve_classification",
    "DocumentError",
    "ProblemDocument",
    "document_problem",
    "document_systems",
    "parse_document",
]

__version__ = "0.1.0"
