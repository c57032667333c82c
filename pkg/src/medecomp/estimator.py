"""Doubly robust effect estimation and the per-mediator decomposition.

For mediator ``k`` the analysis needs two families of potential quantities:
the mediator under a forced exposure level, ``M_k(a)``, and the outcome
under a forced exposure and forced mediator, ``Y_k(a, m)`` (the other
mediators keep their natural, exposure-driven values). Both are estimated
either by the doubly robust form

    mean_i [ f_i + indicator_i / g_i * (observed_i - f_i) ]

with ``f`` an outcome-type regression and ``g`` a (product) propensity,
or by the plug-in g-formula ``mean_i f_i`` when the exposure is known to be
randomized. Propensities are clipped to [0.01, 0.99] (factor-wise for the
product propensity) before weighting. Doubly robust estimates of
probabilities may leave [0, 1]; they are reported as-is and flagged, never
clamped, because clamping would break the decomposition identities.

From the potential quantities, :func:`decompose_mediator` assembles

    CDE_k(0)  = Y_k(1,0) - Y_k(0,0)
    CIE_k(a)  = Y_k(a,1) - Y_k(a,0)
    sCIE_k    = M_k(1) * CIE_k(1) - M_k(0) * CIE_k(0)
    TE_k      = CDE_k(0) + sCIE_k

so the total-effect identity holds exactly by construction, and the
percentage split is computed as ``pct_cde = 100 * CDE / TE`` with
``pct_scie = 100 - pct_cde`` (undefined and flagged when TE is within
1e-12 of zero). :func:`average_decomposition` averages the direct and
scaled indirect parts across mediators, which estimates the same total
effect.

Confidence intervals come from a nonparametric percentile bootstrap: rows
are resampled with replacement under replicate-indexed sub-seeds, the
entire pipeline (nuisance refits at the frozen penalty, estimation,
decomposition) reruns per replicate, and interval endpoints are linear
interpolation quantiles of the kept replicate values. Replicates that hit
an empty required stratum are dropped and counted; more than 20% dropped is
an error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .dag import CausalDag, check_ignorability
from .dataset import DataError, Dataset
from .nuisance import (
    DEFAULT_INNER_FOLDS,
    DEFAULT_OUTER_FOLDS,
    DEFAULT_PENALTY_GRID,
    FAMILY_LINEAR,
    FAMILY_LOGISTIC,
    CandidatePair,
    ModelSpec,
    SelectionResult,
    StratumError,
    design_matrix,
    minmax_select_models,
    nested_cv_select,
)
from .seeding import derive_rng, derive_seed

DR = "doubly-robust"
GFORMULA = "g-formula"

PROPENSITY_CLIP = (0.01, 0.99)
TE_ZERO_TOLERANCE = 1e-12


class EstimationError(ValueError):
    """Analysis-level failure (positivity, strata, identification)."""


class EmptyStratumError(EstimationError):
    """A stratum required by the requested estimand has no observations."""


class IdentificationError(EstimationError):
    """An ignorability condition failed and was not explicitly overridden."""


def _clip_propensity(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROPENSITY_CLIP[0], PROPENSITY_CLIP[1])


def _check_aligned(data: Dataset, *arrays):
    for arr in arrays:
        if len(arr) != data.n:
            raise EstimationError("predictions are not aligned with the data rows")


@dataclass(frozen=True)
class PotentialEstimate:
    """One estimated potential quantity.

    ``kind`` is ``"mediator"`` for ``M_k(a)`` and ``"outcome"`` for
    ``Y_k(a, m)``; ``stratum_count`` is the number of rows whose indicator is
    active (all rows for the g-formula).
    """

    value: float
    kind: str
    k: int
    a: int
    m: int | None
    estimator: str
    stratum_count: int


def dr_estimate_m(
    data: Dataset, f: np.ndarray, g_exposure: np.ndarray, k: int, a: int
) -> PotentialEstimate:
    """Doubly robust estimate of ``M_k(a)``.

    ``f`` holds out-of-fold predictions of ``E[M_k | A=a, L_i]``;
    ``g_exposure`` holds out-of-fold predictions of ``P(A=1 | L_i)``. The
    weight for row ``i`` is the clipped probability of level ``a``.
    """
    data.require_both_exposure_levels()
    _check_aligned(data, f, g_exposure)
    m_obs = data.mediator(k)
    indicator = (data.exposure == a).astype(float)
    count = int(indicator.sum())
    if count == 0:
        raise EmptyStratumError(f"no units with {data.exposure_name}={a}")
    g = _clip_propensity(g_exposure if a == 1 else 1.0 - np.asarray(g_exposure))
    value = float(np.mean(f + indicator / g * (m_obs - f)))
    return PotentialEstimate(value, "mediator", k, a, None, DR, count)


def dr_estimate_y(
    data: Dataset,
    f: np.ndarray,
    g_mediator: np.ndarray,
    g_exposure: np.ndarray,
    k: int,
    a: int,
    m: int,
) -> PotentialEstimate:
    """Doubly robust estimate of ``Y_k(a, m)``.

    ``f`` holds out-of-fold predictions of ``E[Y | A=a, M_k=m, L_i]``;
    ``g_mediator`` holds ``P(M_k=1 | L_i, A=a)`` and ``g_exposure`` holds
    ``P(A=1 | L_i)``. The weight is the product propensity, clipped factor
    by factor.
    """
    data.require_both_exposure_levels()
    _check_aligned(data, f, g_mediator, g_exposure)
    m_obs = data.mediator(k)
    indicator = ((data.exposure == a) & (m_obs == m)).astype(float)
    count = int(indicator.sum())
    if count == 0:
        raise EmptyStratumError(
            f"stratum ({data.exposure_name}={a}, {data.mediator_names[k - 1]}={m}) is empty"
        )
    gm = _clip_propensity(g_mediator if m == 1 else 1.0 - np.asarray(g_mediator))
    ga = _clip_propensity(g_exposure if a == 1 else 1.0 - np.asarray(g_exposure))
    g = gm * ga
    value = float(np.mean(f + indicator / g * (data.outcome - f)))
    return PotentialEstimate(value, "outcome", k, a, m, DR, count)


def gformula_estimate(
    data: Dataset, f: np.ndarray, kind: str, k: int, a: int, m: int | None = None
) -> PotentialEstimate:
    """Plug-in estimate: average the outcome-model predictions over all rows
    (standardization over the empirical covariate distribution)."""
    _check_aligned(data, f)
    if kind not in ("mediator", "outcome"):
        raise EstimationError(f"unknown estimand kind {kind!r}")
    value = float(np.mean(f))
    return PotentialEstimate(value, kind, k, a, m, GFORMULA, data.n)


# ---------------------------------------------------------------------------
# Nuisance bundle
# ---------------------------------------------------------------------------

_ROLE_F_M = "f_m"  # E[M_k | A, L]        (outcome-type model of the mediator)
_ROLE_F_Y = "f_y"  # E[Y | A, M_k, L]
_ROLE_G_A = "g_a"  # P(A = 1 | L)
_ROLE_G_M = "g_m"  # P(M_k = 1 | L, A)    (propensity factor)


@dataclass
class NuisanceBundle:
    """Cross-fitted nuisance models and their out-of-fold predictions.

    Predictions are cached per (role, mediator, forced levels); the frozen
    per-role penalties feed bootstrap refits.
    """

    kind: str
    outcome_template: ModelSpec
    propensity_template: ModelSpec
    fits: dict = field(default_factory=dict)
    predictions: dict = field(default_factory=dict)

    def exposure_propensity(self) -> np.ndarray:
        return self.predictions[(_ROLE_G_A,)]

    def mediator_mean(self, k: int, a: int) -> np.ndarray:
        return self.predictions[(_ROLE_F_M, k, a)]

    def mediator_propensity(self, k: int, a: int) -> np.ndarray:
        return self.predictions[(_ROLE_G_M, k, a)]

    def outcome_mean(self, k: int, a: int, m: int) -> np.ndarray:
        return self.predictions[(_ROLE_F_Y, k, a, m)]

    def frozen_penalties(self) -> dict:
        return {role: fit.chosen_penalty for role, fit in self.fits.items()}

    def chosen_penalty_summary(self) -> dict:
        return {"/".join(str(p) for p in role): fit.chosen_penalty for role, fit in self.fits.items()}


def _role_spec(template: ModelSpec, family: str, extra: tuple[str, ...]) -> ModelSpec:
    return ModelSpec(
        family=family,
        features=template.features + extra,
        interactions=template.interactions,
        penalty_grid=template.penalty_grid,
        standardize=template.standardize,
    )


def fit_nuisance_bundle(
    data: Dataset,
    outcome_template: ModelSpec,
    propensity_template: ModelSpec,
    kind: str = DR,
    outer_folds: int = DEFAULT_OUTER_FOLDS,
    inner_folds: int = DEFAULT_INNER_FOLDS,
    seed: int = 0,
    frozen: Mapping | None = None,
    cache: dict | None = None,
) -> NuisanceBundle:
    """Fit every nuisance model the decomposition needs.

    Templates carry the covariate feature set; the exposure column is
    appended for the mediator models and the exposure plus the mediator for
    the outcome model. Mediator models are logistic regardless of the
    outcome template family because the mediators are binary. ``frozen``
    maps role keys to penalties from a previous run (bootstrap refits skip
    the inner loop). ``cache`` deduplicates identical fits across candidate
    pairs during model selection.
    """
    if kind not in (DR, GFORMULA):
        raise EstimationError(f"unknown estimator kind {kind!r}")
    columns = data.columns()
    bundle = NuisanceBundle(kind, outcome_template, propensity_template)
    cache = cache if cache is not None else {}

    def fit_role(role_key, y_key, spec, y):
        # Cache on (spec, target column): identical outcome- and
        # propensity-side requests for the same mediator model share a fit.
        frozen_c = frozen.get(role_key) if frozen else None
        cache_key = (spec, y_key, frozen_c)
        if cache_key not in cache:
            x = design_matrix(spec, columns)
            cache[cache_key] = nested_cv_select(
                spec,
                x,
                y,
                outer_folds=outer_folds,
                inner_folds=inner_folds,
                seed=derive_seed(seed, "role", y_key),
                target="/".join(str(p) for p in role_key),
                frozen_penalty=frozen_c,
            )
        bundle.fits[role_key] = cache[cache_key]
        return cache[cache_key]

    def oof_at(fit, spec, overrides):
        forced = dict(columns)
        for name, value in overrides.items():
            forced[name] = np.full(data.n, float(value))
        return fit.predict_oof(design_matrix(spec, forced))

    exposure = data.exposure_name
    if kind == DR:
        g_a_spec = _role_spec(propensity_template, FAMILY_LOGISTIC, ())
        fit_g_a = fit_role((_ROLE_G_A,), "A", g_a_spec, data.exposure)
        bundle.predictions[(_ROLE_G_A,)] = oof_at(fit_g_a, g_a_spec, {})

    for k in range(1, data.n_mediators + 1):
        med = data.mediator_names[k - 1]
        f_m_spec = _role_spec(outcome_template, FAMILY_LOGISTIC, (exposure,))
        fit_f_m = fit_role((_ROLE_F_M, k), f"M{k}", f_m_spec, data.mediator(k))
        for a in (0, 1):
            bundle.predictions[(_ROLE_F_M, k, a)] = oof_at(
                fit_f_m, f_m_spec, {exposure: a}
            )
        if kind == DR:
            g_m_spec = _role_spec(propensity_template, FAMILY_LOGISTIC, (exposure,))
            fit_g_m = fit_role((_ROLE_G_M, k), f"M{k}", g_m_spec, data.mediator(k))
            if g_m_spec == f_m_spec:
                for a in (0, 1):
                    bundle.predictions[(_ROLE_G_M, k, a)] = bundle.predictions[
                        (_ROLE_F_M, k, a)
                    ]
            else:
                for a in (0, 1):
                    bundle.predictions[(_ROLE_G_M, k, a)] = oof_at(
                        fit_g_m, g_m_spec, {exposure: a}
                    )
        f_y_spec = _role_spec(
            outcome_template, outcome_template.family, (exposure, med)
        )
        fit_f_y = fit_role((_ROLE_F_Y, k), f"Y{k}", f_y_spec, data.outcome)
        for a in (0, 1):
            for m in (0, 1):
                bundle.predictions[(_ROLE_F_Y, k, a, m)] = oof_at(
                    fit_f_y, f_y_spec, {exposure: a, med: m}
                )
    return bundle


def default_templates(data: Dataset, penalty_grid=DEFAULT_PENALTY_GRID) -> CandidatePair:
    """Ridge GLM templates over all covariate columns."""
    return CandidatePair(
        outcome=ModelSpec(FAMILY_LINEAR, data.covariate_names, penalty_grid=penalty_grid),
        propensity=ModelSpec(FAMILY_LOGISTIC, data.covariate_names, penalty_grid=penalty_grid),
    )


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------


@dataclass
class MediatorDecomposition:
    """Single-mediator slice of the decomposition.

    ``pct_cde + pct_scie == 100`` exactly when defined (``pct_scie`` is
    computed as the complement); both are None and ``pct_defined`` is False
    when the total effect is within 1e-12 of zero.
    """

    k: int
    mediator: str
    estimator: str
    m0: float
    m1: float
    y00: float
    y01: float
    y10: float
    y11: float
    cde0: float
    cie0: float
    cie1: float
    scie: float
    te: float
    delta_m: float
    delta_c: float
    pct_cde: float | None
    pct_scie: float | None
    pct_defined: bool
    stratum_counts: dict
    flags: tuple[str, ...] = ()

    def effect_values(self) -> dict[str, float | None]:
        return {
            "pctCDE": self.pct_cde,
            "pctsCIE": self.pct_scie,
            "CDE": self.cde0,
            "sCIE": self.scie,
            "TE": self.te,
            "CIE0": self.cie0,
            "CIE1": self.cie1,
            "M0": self.m0,
            "M1": self.m1,
            "dM": self.delta_m,
            "dC": self.delta_c,
        }


@dataclass
class AveragedDecomposition:
    """Across-mediator average of the direct and scaled indirect parts."""

    cde0: float
    scie: float
    te: float

    def effect_values(self) -> dict[str, float]:
        return {"CDE": self.cde0, "sCIE": self.scie, "TE": self.te}


def _assemble_slice(k, mediator, estimator, m0, m1, y00, y01, y10, y11, counts):
    cde0 = y10 - y00
    cie1 = y11 - y10
    cie0 = y01 - y00
    scie = m1 * cie1 - m0 * cie0
    te = cde0 + scie
    flags = []
    for label, value in (("M0", m0), ("M1", m1)):
        if value < 0.0 or value > 1.0:
            flags.append(f"{label} estimate {value:.4f} outside [0, 1]")
    if abs(te) <= TE_ZERO_TOLERANCE:
        pct_cde = None
        pct_scie = None
        pct_defined = False
        flags.append("total effect within 1e-12 of zero; percentages undefined")
    else:
        pct_cde = 100.0 * cde0 / te
        pct_scie = 100.0 - pct_cde  # exact complement
        pct_defined = True
    return MediatorDecomposition(
        k=k,
        mediator=mediator,
        estimator=estimator,
        m0=m0,
        m1=m1,
        y00=y00,
        y01=y01,
        y10=y10,
        y11=y11,
        cde0=cde0,
        cie0=cie0,
        cie1=cie1,
        scie=scie,
        te=te,
        delta_m=m1 - m0,
        delta_c=cie1 - cie0,
        pct_cde=pct_cde,
        pct_scie=pct_scie,
        pct_defined=pct_defined,
        stratum_counts=counts,
        flags=tuple(flags),
    )


def decompose_mediator(
    data: Dataset,
    dag: CausalDag | None,
    k: int,
    kind: str,
    bundle: NuisanceBundle,
    allow_unidentified: bool = False,
    check_identification: bool = True,
) -> MediatorDecomposition:
    """Estimate the full effect decomposition for mediator ``k``.

    When ``dag`` is given and ``check_identification`` is set, the two
    ignorability conditions are verified first; a failure raises
    :class:`IdentificationError` unless ``allow_unidentified`` is set, in
    which case a warning is emitted and estimation proceeds.
    """
    if kind not in (DR, GFORMULA):
        raise EstimationError(f"unknown estimator kind {kind!r}")
    if dag is not None and check_identification:
        report = check_ignorability(dag, k)
        if not report.holds:
            message = (
                f"ignorability fails for mediator {report.mediator} "
                f"(condition {report.witness_condition}; "
                f"witness path {' - '.join(report.witness)})"
            )
            if not allow_unidentified:
                raise IdentificationError(message)
            warnings.warn(message + "; proceeding because unidentified analyses "
                          "were explicitly allowed", stacklevel=2)

    if kind == DR:
        g_a = bundle.exposure_propensity()
        est_m = {
            a: dr_estimate_m(data, bundle.mediator_mean(k, a), g_a, k, a)
            for a in (0, 1)
        }
        est_y = {
            (a, m): dr_estimate_y(
                data,
                bundle.outcome_mean(k, a, m),
                bundle.mediator_propensity(k, a),
                g_a,
                k,
                a,
                m,
            )
            for a in (0, 1)
            for m in (0, 1)
        }
    else:
        est_m = {
            a: gformula_estimate(data, bundle.mediator_mean(k, a), "mediator", k, a)
            for a in (0, 1)
        }
        est_y = {
            (a, m): gformula_estimate(
                data, bundle.outcome_mean(k, a, m), "outcome", k, a, m
            )
            for a in (0, 1)
            for m in (0, 1)
        }
    counts = {"M0": est_m[0].stratum_count, "M1": est_m[1].stratum_count}
    counts.update({f"Y{a}{m}": est_y[(a, m)].stratum_count for a in (0, 1) for m in (0, 1)})
    return _assemble_slice(
        k,
        data.mediator_names[k - 1],
        kind,
        est_m[0].value,
        est_m[1].value,
        est_y[(0, 0)].value,
        est_y[(0, 1)].value,
        est_y[(1, 0)].value,
        est_y[(1, 1)].value,
        counts,
    )


def average_decomposition(slices: Sequence[MediatorDecomposition]) -> AveragedDecomposition:
    """Average the direct and scaled indirect parts across mediators.

    The averaged total effect is defined as the sum of the two averages, so
    the averaged identity holds exactly.
    """
    if not slices:
        raise EstimationError("need at least one mediator slice")
    estimators = {s.estimator for s in slices}
    if len(estimators) != 1:
        raise EstimationError("slices mix estimator kinds")
    cde = float(np.mean([s.cde0 for s in slices]))
    scie = float(np.mean([s.scie for s in slices]))
    return AveragedDecomposition(cde, scie, cde + scie)


# ---------------------------------------------------------------------------
# Bootstrap
# ---------------------------------------------------------------------------

MAX_DROPPED_FRACTION = 0.20


@dataclass
class BootstrapResult:
    intervals: dict[str, tuple[float, float]]
    level: float
    n_replicates: int
    n_dropped: int
    n_undefined: dict[str, int]


def bootstrap_ci(
    statistic: Callable[[Dataset, int], Mapping[str, float | None]],
    data: Dataset,
    n_replicates: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> BootstrapResult:
    """Percentile bootstrap over row resamples.

    ``statistic(resample, replicate_seed)`` returns named statistics (None
    marks an undefined value, e.g. a percentage at zero total effect, and is
    excluded from that statistic's quantiles). Replicates raising
    :class:`EmptyStratumError` or :class:`StratumError` are dropped and
    counted; more than 20% dropped aborts the analysis. Interval endpoints
    are linear-interpolation quantiles of the kept replicate values, taken
    in replicate order, so results are independent of any scheduling.
    """
    if n_replicates < 100:
        raise EstimationError("need at least 100 bootstrap replicates")
    if not 0.0 < level < 1.0:
        raise EstimationError("confidence level must be in (0, 1)")
    values: dict[str, list] = {}
    n_dropped = 0
    kept = 0
    for b in range(n_replicates):
        rng = derive_rng(seed, "resample", b)
        idx = rng.integers(0, data.n, size=data.n)
        resample = data.take(idx)
        try:
            stats = statistic(resample, derive_seed(seed, "replicate", b))
        except (EmptyStratumError, StratumError, DataError):
            n_dropped += 1
            continue
        kept += 1
        for key, value in stats.items():
            values.setdefault(key, []).append(value)
    if n_dropped > MAX_DROPPED_FRACTION * n_replicates:
        raise EstimationError(
            f"{n_dropped} of {n_replicates} bootstrap replicates hit an empty "
            "stratum; the sample is too small for the requested analysis"
        )
    lo_q = (1.0 - level) / 2.0
    hi_q = 1.0 - lo_q
    intervals = {}
    undefined = {}
    for key, seq in values.items():
        arr = np.asarray([v for v in seq if v is not None], dtype=float)
        undefined[key] = len(seq) - len(arr)
        if len(arr) == 0:
            intervals[key] = (math.nan, math.nan)
        else:
            intervals[key] = (
                float(np.quantile(arr, lo_q)),
                float(np.quantile(arr, hi_q)),
            )
    return BootstrapResult(intervals, level, kept, n_dropped, undefined)


# ---------------------------------------------------------------------------
# End-to-end analysis
# ---------------------------------------------------------------------------


@dataclass
class MediationDecomposition:
    """Full analysis result: per-mediator slices, the across-mediator
    average, bootstrap intervals keyed like ``"M1.CDE"`` / ``"average.TE"``,
    and run diagnostics."""

    slices: list[MediatorDecomposition]
    average: AveragedDecomposition
    intervals: dict[str, tuple[float, float]]
    level: float
    ignorability: list
    selection: SelectionResult | None
    bootstrap_replicates: int
    bootstrap_dropped: int
    undefined_counts: dict[str, int]
    chosen_penalties: dict
    flags: tuple[str, ...]


def _flatten(slices, average) -> dict[str, float | None]:
    out: dict[str, float | None] = {}
    for s in slices:
        for effect, value in s.effect_values().items():
            out[f"{s.mediator}.{effect}"] = value
    for effect, value in average.effect_values().items():
        out[f"average.{effect}"] = value
    return out


def make_te_functional(
    kind: str,
    outer_folds: int,
    inner_folds: int,
    seed: int,
    cache: dict,
) -> Callable:
    """Averaged-total-effect functional used as the model-selection target."""

    def psi(data: Dataset, outcome_spec: ModelSpec, propensity_spec: ModelSpec) -> float:
        bundle = fit_nuisance_bundle(
            data,
            outcome_spec,
            propensity_spec,
            kind=kind,
            outer_folds=outer_folds,
            inner_folds=inner_folds,
            seed=seed,
            cache=cache,
        )
        slices = [
            decompose_mediator(data, None, k, kind, bundle, check_identification=False)
            for k in range(1, data.n_mediators + 1)
        ]
        return average_decomposition(slices).te

    return psi


def run_analysis(
    data: Dataset,
    dag: CausalDag,
    kind: str = DR,
    outer_folds: int = DEFAULT_OUTER_FOLDS,
    inner_folds: int = DEFAULT_INNER_FOLDS,
    n_replicates: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    candidates: Sequence[CandidatePair] | None = None,
    allow_unidentified: bool = False,
    penalty_grid=DEFAULT_PENALTY_GRID,
) -> MediationDecomposition:
    """Run the full pipeline: identification checks, model selection,
    nested-CV nuisance fits, per-mediator decomposition, the averaged
    decomposition, and bootstrap confidence intervals."""
    # mediator columns must already follow the DAG's causal order (the CSV
    # loader and the simulator both guarantee this); names may differ
    if data.n_mediators != dag.n_mediators:
        raise EstimationError(
            f"dataset has {data.n_mediators} mediator columns but the DAG "
            f"declares {dag.n_mediators}"
        )
    if kind == DR:
        data.require_both_exposure_levels()

    reports = [check_ignorability(dag, k) for k in range(1, dag.n_mediators + 1)]
    failing = [r for r in reports if not r.holds]
    if failing and not allow_unidentified:
        first = failing[0]
        raise IdentificationError(
            f"ignorability fails for mediator {first.mediator} "
            f"(condition {first.witness_condition}; witness path "
            f"{' - '.join(first.witness)})"
        )
    if failing:
        warnings.warn(
            f"{len(failing)} mediator(s) fail ignorability; proceeding because "
            "unidentified analyses were explicitly allowed",
            stacklevel=2,
        )

    cache: dict = {}
    selection: SelectionResult | None = None
    if candidates is not None and len(candidates) >= 2:
        psi = make_te_functional(kind, outer_folds, inner_folds, seed, cache)
        selection = minmax_select_models(list(candidates), data, psi)
        pair = selection.chosen
    elif candidates:
        pair = candidates[0]
    else:
        pair = default_templates(data, penalty_grid=penalty_grid)

    bundle = fit_nuisance_bundle(
        data,
        pair.outcome,
        pair.propensity,
        kind=kind,
        outer_folds=outer_folds,
        inner_folds=inner_folds,
        seed=seed,
        cache=cache,
    )
    slices = [
        # identification already verified for all mediators above
        decompose_mediator(data, dag, k, kind, bundle, check_identification=False)
        for k in range(1, data.n_mediators + 1)
    ]
    average = average_decomposition(slices)
    frozen = bundle.frozen_penalties()

    def statistic(resample: Dataset, replicate_seed: int):
        boot_bundle = fit_nuisance_bundle(
            resample,
            pair.outcome,
            pair.propensity,
            kind=kind,
            outer_folds=outer_folds,
            inner_folds=inner_folds,
            seed=replicate_seed,
            frozen=frozen,
        )
        boot_slices = [
            decompose_mediator(
                resample, None, k, kind, boot_bundle, check_identification=False
            )
            for k in range(1, resample.n_mediators + 1)
        ]
        return _flatten(boot_slices, average_decomposition(boot_slices))

    boot = bootstrap_ci(statistic, data, n_replicates, level, seed)
    flags = tuple(flag for s in slices for flag in s.flags)
    return MediationDecomposition(
        slices=slices,
        average=average,
        intervals=boot.intervals,
        level=level,
        ignorability=reports,
        selection=selection,
        bootstrap_replicates=boot.n_replicates,
        bootstrap_dropped=boot.n_dropped,
        undefined_counts=boot.n_undefined,
        chosen_penalties=bundle.chosen_penalty_summary(),
        flags=flags,
    )
