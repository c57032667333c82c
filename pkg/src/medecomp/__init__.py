"""Per-mediator decomposition of total causal effects from observational data.

The total effect of a binary exposure on an outcome is split, for each
binary mediator, into a controlled direct effect (exposure contrast with the
mediator held at 0) and a scaled controlled indirect effect (the
mediator-treatment contrast weighted by how prevalent the mediator is under
each exposure level). Effects are estimated with doubly robust or plug-in
estimators on ridge-GLM nuisance models, identification is verified
mechanically by d-separation on intervention graphs, and a built-in
simulator with a direct-manipulation oracle validates the whole pipeline.
"""

__version__ = "0.1.0"

from .dag import (
    CausalDag,
    DagError,
    DagNode,
    DagSyntaxError,
    Digraph,
    DSeparation,
    IgnorabilityReport,
    Swig,
    build_swig,
    check_ignorability,
    contract_swig,
    d_separated,
    dependent_mediators_dag,
    independent_mediators_dag,
    parse_dag,
    serialize_dag,
)
from .dataset import DataError, Dataset, read_csv_columns
from .estimator import (
    DR,
    GFORMULA,
    AveragedDecomposition,
    EmptyStratumError,
    EstimationError,
    IdentificationError,
    MediationDecomposition,
    MediatorDecomposition,
    NuisanceBundle,
    PotentialEstimate,
    average_decomposition,
    bootstrap_ci,
    decompose_mediator,
    default_templates,
    dr_estimate_m,
    dr_estimate_y,
    fit_nuisance_bundle,
    gformula_estimate,
    run_analysis,
)
from .nuisance import (
    DEFAULT_PENALTY_GRID,
    FAMILY_LINEAR,
    FAMILY_LOGISTIC,
    CandidatePair,
    CrossFittedNuisance,
    FitError,
    FittedNuisance,
    ModelSpec,
    StratumError,
    design_matrix,
    fit_regularized_glm,
    minmax_select_models,
    nested_cv_select,
)
from .scm import (
    NodeEquation,
    ScmError,
    ScmSpec,
    TrueEffects,
    generate_scm,
    oracle_effects,
    scm_from_file,
    scm_from_text,
    scm_to_file,
    scm_to_text,
    simulate_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
