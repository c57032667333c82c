"""Ridge-penalized GLMs, nested cross-validation, and model selection.

The conditional-expectation and propensity models behind the estimators are
l2-penalized linear or logistic regressions fitted from scratch: ridge
regression in closed form, ridge logistic regression by damped Newton/IRLS
iterations. The intercept is never penalized, and features can be
standardized on each training split.

``nested_cv_select`` realizes the two-level scheme used throughout the
analysis pipeline: outer folds give honest out-of-fold predictions, inner
folds pick the penalty strength ``C``; the chosen ``C`` is refit on the
combined inner training and validation rows, and each outer model predicts
only its own test fold. The penalty grows with ``C`` (larger ``C`` means
more shrinkage).

``minmax_select_models`` picks among candidate (outcome model, propensity
model) pairs by a perturbation pseudo-risk: for a pair (f, g) it measures
how far the doubly robust estimate moves when either side is swapped for
any other candidate, and keeps the pair whose worst-case move is smallest.
A pair containing one well-specified model anchors the estimate under all
perturbations, so it wins; this is a concrete instantiation of perturbation
based selection and is flagged as such in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .seeding import derive_rng

FAMILY_LINEAR = "ridge-linear"
FAMILY_LOGISTIC = "ridge-logistic"

DEFAULT_PENALTY_GRID = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
DEFAULT_OUTER_FOLDS = 5
DEFAULT_INNER_FOLDS = 3

IRLS_TOL = 1e-8
IRLS_MAX_ITER = 100


class FitError(ValueError):
    """Invalid fitting request or data."""


class StratumError(FitError):
    """A class stratum required by a fold split is empty."""


# Fixed-order reductions: einsum with optimize=False sums in row-major order
# on a single thread, so fitted coefficients and predictions are bit-stable
# regardless of BLAS threading.


def _gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nj->ij", a, b, optimize=False)


def _xtv(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ni,n->i", x, v, optimize=False)


def _matvec(x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return np.einsum("ni,i->n", x, beta, optimize=False)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class ModelSpec:
    """Family, feature map, penalty grid, and standardization policy.

    ``features`` are source column names; ``interactions`` add pairwise
    product terms. The grid must be non-empty, strictly positive, and
    sorted ascending.
    """

    family: str
    features: tuple[str, ...]
    interactions: tuple[tuple[str, str], ...] = ()
    penalty_grid: tuple[float, ...] = DEFAULT_PENALTY_GRID
    standardize: bool = True

    def __post_init__(self):
        if self.family not in (FAMILY_LINEAR, FAMILY_LOGISTIC):
            raise FitError(f"unknown model family {self.family!r}")
        if not self.penalty_grid:
            raise FitError("penalty grid must be non-empty")
        grid = tuple(float(c) for c in self.penalty_grid)
        if any(c <= 0 for c in grid):
            raise FitError("penalty grid values must be positive")
        if list(grid) != sorted(grid):
            raise FitError("penalty grid must be sorted ascending")
        object.__setattr__(self, "penalty_grid", grid)
        for pair in self.interactions:
            for name in pair:
                if name not in self.features:
                    raise FitError(f"interaction references unknown feature {name!r}")

    def describe(self) -> str:
        inter = "".join(f"+{a}*{b}" for a, b in self.interactions)
        return f"{self.family}[{','.join(self.features)}{inter}]"


def design_matrix(spec: ModelSpec, columns: Mapping[str, np.ndarray]) -> np.ndarray:
    """Assemble the design matrix for ``spec`` from named columns."""
    cols = []
    for name in spec.features:
        if name not in columns:
            raise FitError(f"missing feature column {name!r}")
        cols.append(np.asarray(columns[name], dtype=float))
    for a, b in spec.interactions:
        cols.append(np.asarray(columns[a], dtype=float) * np.asarray(columns[b], dtype=float))
    return np.column_stack(cols) if cols else np.zeros((_n_rows(columns), 0))


def _n_rows(columns: Mapping[str, np.ndarray]) -> int:
    for v in columns.values():
        return len(v)
    raise FitError("no columns given")


@dataclass
class FittedNuisance:
    """One fitted GLM with its standardization transform and diagnostics.

    ``coefficients`` live on the (possibly standardized) internal feature
    scale; :attr:`raw_coefficients` / :attr:`raw_intercept` give the
    equivalent parameters on the original feature scale.
    """

    spec: ModelSpec
    penalty: float
    coefficients: np.ndarray
    intercept: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    target: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def raw_coefficients(self) -> np.ndarray:
        return self.coefficients / self.feature_scales

    @property
    def raw_intercept(self) -> float:
        return float(self.intercept - np.sum(self.coefficients * self.feature_means / self.feature_scales))

    def linear_predictor(self, x: np.ndarray) -> np.ndarray:
        xs = (x - self.feature_means) / self.feature_scales
        return _matvec(xs, self.coefficients) + self.intercept

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Mean response: identity for linear, probability for logistic.

        Logistic probabilities are kept strictly inside (0, 1): the sigmoid
        saturates to exact 0/1 in float for |linear predictor| > ~37.
        """
        eta = self.linear_predictor(x)
        if self.spec.family == FAMILY_LOGISTIC:
            return np.clip(_sigmoid(eta), 1e-15, 1.0 - 1e-15)
        return eta


def _validate_xy(spec: ModelSpec, x: np.ndarray, y: np.ndarray):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise FitError("feature matrix must be 2-dimensional")
    if x.shape[0] != y.shape[0]:
        raise FitError("feature matrix and response length differ")
    if x.shape[0] < 2:
        raise FitError("need at least 2 rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite values in inputs")
    if spec.family == FAMILY_LOGISTIC and not np.all((y == 0.0) | (y == 1.0)):
        raise FitError("logistic family requires a 0/1 response")
    return x, y


def fit_regularized_glm(
    spec: ModelSpec, x: np.ndarray, y: np.ndarray, penalty: float, target: str = ""
) -> FittedNuisance:
    """Fit one ridge GLM at penalty ``penalty`` (> 0), intercept unpenalized.

    Linear family: closed-form penalized least squares. Logistic family:
    penalized maximum likelihood by Newton/IRLS with step halving, run to a
    gradient norm of 1e-8 or 100 iterations.
    """
    if not penalty > 0:
        raise FitError("penalty must be > 0")
    x, y = _validate_xy(spec, x, y)
    n, p = x.shape
    if spec.standardize and p:
        means = x.mean(axis=0)
        scales = x.std(axis=0)
        scales = np.where(scales < 1e-12, 1.0, scales)
    else:
        means = np.zeros(p)
        scales = np.ones(p)
    xs = (x - means) / scales

    if spec.family == FAMILY_LINEAR:
        beta, intercept, diag = _fit_linear(xs, y, penalty)
    else:
        beta, intercept, diag = _fit_logistic(xs, y, penalty)
    return FittedNuisance(
        spec=spec,
        penalty=penalty,
        coefficients=beta,
        intercept=intercept,
        feature_means=means,
        feature_scales=scales,
        target=target,
        diagnostics=diag,
    )


def _fit_linear(xs, y, penalty):
    # Centering makes the unpenalized intercept exact:
    # beta solves (Xc'Xc + C I) beta = Xc'yc, intercept = ybar - xbar.beta
    n, p = xs.shape
    if p == 0:
        return np.zeros(0), float(np.mean(y)), {"objective_path": []}
    xbar = xs.mean(axis=0)
    ybar = float(np.mean(y))
    xc = xs - xbar
    yc = y - ybar
    lhs = _gram(xc, xc) + penalty * np.eye(p)
    beta = np.linalg.solve(lhs, _xtv(xc, yc))
    intercept = ybar - float(np.sum(xbar * beta))
    resid = yc - _matvec(xc, beta)
    rel = float(
        np.linalg.norm(_gram(xc, xc) @ beta + penalty * beta - _xtv(xc, yc))
        / max(np.linalg.norm(_xtv(xc, yc)), 1e-30)
    )
    diag = {
        "residual_sumsq": float(np.sum(resid * resid)),
        "normal_eq_relative_residual": rel,
    }
    return beta, intercept, diag


def _logistic_objective(xs, y, beta, intercept, penalty):
    eta = _matvec(xs, beta) + intercept
    # log(1 + exp(eta)) - y*eta via the stable softplus form
    softplus = np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))
    return float(np.sum(softplus - y * eta)) + 0.5 * penalty * float(np.sum(beta * beta))


def _fit_logistic(xs, y, penalty):
    n, p = xs.shape
    beta = np.zeros(p)
    intercept = 0.0
    objective = _logistic_objective(xs, y, beta, intercept, penalty)
    path = [objective]
    grad_norm = math.inf
    for _ in range(IRLS_MAX_ITER):
        eta = _matvec(xs, beta) + intercept
        prob = _sigmoid(eta)
        resid = prob - y
        grad = np.concatenate([_xtv(xs, resid) + penalty * beta, [float(np.sum(resid))]])
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= IRLS_TOL:
            break
        w = np.maximum(prob * (1.0 - prob), 1e-12)
        xw = xs * w[:, None]
        hess = np.empty((p + 1, p + 1))
        hess[:p, :p] = _gram(xw, xs) + penalty * np.eye(p)
        hess[:p, p] = _xtv(xs, w)
        hess[p, :p] = hess[:p, p]
        hess[p, p] = float(np.sum(w))
        step = np.linalg.solve(hess, grad)
        # Near convergence the true decrease falls below what float
        # evaluation of the objective can resolve, so accept steps whose
        # apparent increase is within summation noise.
        slack = 64.0 * np.finfo(float).eps * (1.0 + abs(objective))
        scale = 1.0
        improved = False
        for _ in range(30):
            new_beta = beta - scale * step[:p]
            new_intercept = intercept - scale * step[p]
            new_objective = _logistic_objective(xs, y, new_beta, new_intercept, penalty)
            if new_objective <= objective + slack:
                improved = True
                break
            scale *= 0.5
        if not improved:
            break  # numerically converged: no step measurably decreases the objective
        beta, intercept, objective = new_beta, new_intercept, new_objective
        path.append(objective)
    else:
        eta = _matvec(xs, beta) + intercept
        resid = _sigmoid(eta) - y
        grad = np.concatenate([_xtv(xs, resid) + penalty * beta, [float(np.sum(resid))]])
        grad_norm = float(np.linalg.norm(grad))
    diag = {"objective_path": path, "final_gradient_norm": grad_norm}
    return beta, float(intercept), diag


# ---------------------------------------------------------------------------
# Fold assignment
# ---------------------------------------------------------------------------


def fold_assignment(
    y: np.ndarray, n_folds: int, seed: int, stratify: bool, *keys
) -> np.ndarray:
    """Seeded fold labels; stratified by the 0/1 response when asked."""
    n = len(y)
    if n_folds < 2:
        raise FitError("need at least 2 folds")
    rng = derive_rng(seed, "folds", *keys)
    folds = np.empty(n, dtype=int)
    if stratify:
        for cls in (0.0, 1.0):
            idx = np.flatnonzero(y == cls)
            rng.shuffle(idx)
            folds[idx] = np.arange(len(idx)) % n_folds
    else:
        idx = np.arange(n)
        rng.shuffle(idx)
        folds[idx] = np.arange(n) % n_folds
    return folds


def _check_training_strata(y, folds, n_folds, where):
    for f in range(n_folds):
        train = y[folds != f]
        for cls in (0.0, 1.0):
            if not np.any(train == cls):
                raise StratumError(
                    f"stratum y={int(cls)} is empty in the training split of "
                    f"{where} fold {f}"
                )


# ---------------------------------------------------------------------------
# Nested cross-validation
# ---------------------------------------------------------------------------


@dataclass
class CrossFittedNuisance:
    """Per-outer-fold fitted models plus the frozen penalty choice.

    ``fold_of_row[i]`` names the single outer fold whose model is allowed to
    predict row ``i`` (the fold that held row ``i`` out of training), so no
    out-of-fold prediction ever comes from a model trained on its own row.
    ``chosen_penalty`` is the per-fold selections reduced to one value (the
    log-scale median snapped to the grid); bootstrap refits freeze it.
    """

    spec: ModelSpec
    target: str
    folds: list[FittedNuisance]
    fold_of_row: np.ndarray
    fold_penalties: tuple[float, ...]
    chosen_penalty: float
    diagnostics: dict = field(default_factory=dict)

    def predict_oof(self, x: np.ndarray) -> np.ndarray:
        """Out-of-fold predictions for a row-aligned feature matrix."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != len(self.fold_of_row):
            raise FitError("feature matrix is not aligned with the training rows")
        out = np.empty(x.shape[0])
        for f, model in enumerate(self.folds):
            mask = self.fold_of_row == f
            if np.any(mask):
                out[mask] = model.predict(x[mask])
        return out


def _validation_loss(spec, model, x, y):
    pred = model.predict(x)
    if spec.family == FAMILY_LOGISTIC:
        p = np.clip(pred, 1e-12, 1.0 - 1e-12)
        return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
    return float(np.mean((y - pred) ** 2))


def _median_grid_penalty(grid: Sequence[float], chosen: Sequence[float]) -> float:
    log_median = float(np.median(np.log(np.asarray(chosen))))
    best = min(grid, key=lambda c: (abs(math.log(c) - log_median), c))
    return best


def nested_cv_select(
    spec: ModelSpec,
    x: np.ndarray,
    y: np.ndarray,
    outer_folds: int = DEFAULT_OUTER_FOLDS,
    inner_folds: int = DEFAULT_INNER_FOLDS,
    seed: int = 0,
    target: str = "",
    frozen_penalty: float | None = None,
) -> CrossFittedNuisance:
    """Outer folds for out-of-fold prediction, inner folds to choose ``C``.

    For each outer fold, inner cross-validation over the grid picks the
    penalty with the best average validation loss (squared error for the
    linear family, log loss for the logistic family; ties go to the smaller
    penalty); the winner is refit on the whole outer training split. Fold
    assignment is a seeded permutation, stratified by class for logistic
    targets. With ``frozen_penalty`` the inner loop is skipped and every
    fold refits at that penalty (used inside bootstrap replicates).
    """
    x, y = _validate_xy(spec, x, y)
    if outer_folds < 2:
        raise FitError("need at least 2 outer folds")
    if frozen_penalty is None and inner_folds < 2:
        raise FitError("need at least 2 inner folds")
    stratify = spec.family == FAMILY_LOGISTIC
    folds = fold_assignment(y, outer_folds, seed, stratify, "outer")
    if stratify:
        _check_training_strata(y, folds, outer_folds, "outer")

    grid = spec.penalty_grid
    fold_models: list[FittedNuisance] = []
    fold_penalties: list[float] = []
    loss_tables = []
    for f in range(outer_folds):
        train_idx = np.flatnonzero(folds != f)
        x_train = x[train_idx]
        y_train = y[train_idx]
        if frozen_penalty is not None:
            best_c = float(frozen_penalty)
            losses = {}
        else:
            inner = fold_assignment(
                y_train, inner_folds, seed, stratify, "inner", f
            )
            if stratify:
                _check_training_strata(y_train, inner, inner_folds, f"outer-{f} inner")
            losses = {c: 0.0 for c in grid}
            for g in range(inner_folds):
                fit_idx = inner != g
                val_idx = ~fit_idx
                for c in grid:
                    model = fit_regularized_glm(
                        spec, x_train[fit_idx], y_train[fit_idx], c, target
                    )
                    losses[c] += _validation_loss(
                        spec, model, x_train[val_idx], y_train[val_idx]
                    )
            for c in grid:
                losses[c] /= inner_folds
            best_c = min(grid, key=lambda c: (losses[c], c))
        model = fit_regularized_glm(spec, x_train, y_train, best_c, target)
        model.diagnostics["validation_losses"] = losses
        fold_models.append(model)
        fold_penalties.append(best_c)
        loss_tables.append(losses)

    chosen = (
        float(frozen_penalty)
        if frozen_penalty is not None
        else _median_grid_penalty(grid, fold_penalties)
    )
    return CrossFittedNuisance(
        spec=spec,
        target=target,
        folds=fold_models,
        fold_of_row=folds,
        fold_penalties=tuple(fold_penalties),
        chosen_penalty=chosen,
        diagnostics={"validation_losses": loss_tables},
    )


# ---------------------------------------------------------------------------
# Minmax model selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidatePair:
    """An (outcome model, propensity model) template pair."""

    outcome: ModelSpec
    propensity: ModelSpec

    def describe(self) -> str:
        return f"({self.outcome.describe()}, {self.propensity.describe()})"


_FAMILY_RANK = {FAMILY_LINEAR: 0, FAMILY_LOGISTIC: 0}  # ridge GLMs are simplest


@dataclass
class SelectionResult:
    chosen_index: int
    chosen: CandidatePair
    table: list[dict]


def minmax_select_models(
    candidates: Sequence[CandidatePair],
    data,
    target: Callable[[object, ModelSpec, ModelSpec], float],
) -> SelectionResult:
    """Pick the candidate pair least sensitive to swapping either side.

    ``target(data, outcome_spec, propensity_spec)`` must return the doubly
    robust estimate of the target functional under that pair; callers
    normally close it over a shared fit cache so swapped combinations reuse
    fitted models. Pseudo-risk of pair (f, g) is the larger of
    ``max_g' |psi(f, g') - psi(f, g)|`` and ``max_f' |psi(f', g) - psi(f, g)|``
    over the candidate outcome set F and propensity set G. Ties go to the
    simpler family and then to the earlier candidate.
    """
    if len(candidates) < 2:
        raise FitError("model selection needs at least 2 candidate pairs")
    outcome_set: list[ModelSpec] = []
    propensity_set: list[ModelSpec] = []
    for pair in candidates:
        if pair.outcome not in outcome_set:
            outcome_set.append(pair.outcome)
        if pair.propensity not in propensity_set:
            propensity_set.append(pair.propensity)

    psi_cache: dict[tuple[int, int], float] = {}

    def psi(f_spec: ModelSpec, g_spec: ModelSpec) -> float:
        key = (outcome_set.index(f_spec), propensity_set.index(g_spec))
        if key not in psi_cache:
            psi_cache[key] = float(target(data, f_spec, g_spec))
        return psi_cache[key]

    table = []
    for i, pair in enumerate(candidates):
        base = psi(pair.outcome, pair.propensity)
        risk_g = max(
            (abs(psi(pair.outcome, g) - base) for g in propensity_set), default=0.0
        )
        risk_f = max(
            (abs(psi(f, pair.propensity) - base) for f in outcome_set), default=0.0
        )
        risk = max(risk_g, risk_f)
        rank = max(
            _FAMILY_RANK.get(pair.outcome.family, 1),
            _FAMILY_RANK.get(pair.propensity.family, 1),
        )
        table.append(
            {
                "candidate": i,
                "outcome": pair.outcome.describe(),
                "propensity": pair.propensity.describe(),
                "psi": base,
                "pseudo_risk": risk,
                "family_rank": rank,
            }
        )
    chosen_index = min(
        range(len(candidates)),
        key=lambda i: (table[i]["pseudo_risk"], table[i]["family_rank"], i),
    )
    for i, row in enumerate(table):
        row["chosen"] = i == chosen_index
    return SelectionResult(chosen_index, candidates[chosen_index], table)
