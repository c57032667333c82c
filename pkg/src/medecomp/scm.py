"""Linear-Gaussian structural causal models over a study DAG.

Every node is a generalized linear function of its causal parents: a
coefficient vector, an intercept, and additive Gaussian noise on the linear
predictor. Continuous nodes (covariates, latents, the outcome) use the
identity link; binary nodes (exposure, mediators) pass the noisy linear
predictor through a sigmoid and threshold at 0.5. Note the noise is added
*before* the sigmoid, so the conditional event ``node = 1`` is
``linear predictor + noise > 0``.

:func:`generate_scm` draws coefficients at random and calibrates each
intercept so the mean linear predictor over a 100 000-draw calibration
sample is zero, which keeps binary nodes near 50/50 prevalence.

:func:`oracle_effects` computes ground-truth effects by direct manipulation:
it simulates the model while forcing the exposure (and, for the controlled
quantities, one mediator) and averages the resulting potential outcomes.
All contrasted arms share the same exogenous noise draws (common random
numbers), so the per-unit decomposition

    total effect = direct effect with the mediator held at 0
                   + scaled controlled indirect effect

holds exactly, not just in expectation. The scaled indirect effect is
accordingly reported as the average of per-unit products
``M_k(1)*CIE_k(1) - M_k(0)*CIE_k(0)``; with causally independent mediators
this coincides with the same expression assembled from the marginal means
(see :meth:`TrueEffects.scie_assembled`), but with dependent mediators the
two differ by covariance terms and the per-unit version is the one that
sums exactly with the direct effect.

Monte Carlo runs are split into 100 fixed batches with batch-indexed
sub-seeds and aggregated in batch order, so results do not depend on any
parallel scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .dag import (
    ROLE_EXPOSURE,
    ROLE_MEDIATOR,
    CausalDag,
    DagNode,
)
from .dataset import Dataset, format_float, write_text_atomic
from .seeding import derive_rng

LINK_IDENTITY = "identity"
LINK_SIGMOID_THRESHOLD = "sigmoid-threshold"

CALIBRATION_DRAWS = 100_000
ORACLE_BATCHES = 100
MIN_ORACLE_DRAWS = 10_000


class ScmError(ValueError):
    """Invalid model specification or generation request."""


@dataclass(frozen=True)
class NodeEquation:
    """One structural equation: ``link(coefficients . parents + intercept + noise)``."""

    name: str
    parents: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    noise_sd: float = 1.0
    link: str = LINK_IDENTITY
    threshold: float = 0.5

    def __post_init__(self):
        if len(self.parents) != len(self.coefficients):
            raise ScmError(
                f"node {self.name!r}: {len(self.coefficients)} coefficients for "
                f"{len(self.parents)} parents"
            )
        if self.link not in (LINK_IDENTITY, LINK_SIGMOID_THRESHOLD):
            raise ScmError(f"node {self.name!r}: unknown link {self.link!r}")
        if self.noise_sd < 0:
            raise ScmError(f"node {self.name!r}: negative noise sd")


@dataclass(frozen=True)
class ScmSpec:
    """A DAG plus one equation per node (in topological order) and a seed.

    Immutable; simulation and oracle computations are pure functions of
    ``(spec, seed)`` and may run concurrently.
    """

    dag: CausalDag
    equations: tuple[NodeEquation, ...]
    seed: int

    def __post_init__(self):
        by_name = {eq.name: eq for eq in self.equations}
        if len(by_name) != len(self.equations):
            raise ScmError("duplicate equation")
        order = self.dag.topological_order
        if tuple(eq.name for eq in self.equations) != order:
            raise ScmError("equations must follow the DAG topological order")
        for eq in self.equations:
            if set(eq.parents) != set(self.dag.parents(eq.name)):
                raise ScmError(f"node {eq.name!r}: parents do not match the DAG")
            role = self.dag.role(eq.name)
            binary = role in (ROLE_EXPOSURE, ROLE_MEDIATOR)
            if binary and eq.link != LINK_SIGMOID_THRESHOLD:
                raise ScmError(f"binary node {eq.name!r} must use the sigmoid-threshold link")
            if not binary and eq.link != LINK_IDENTITY:
                raise ScmError(f"continuous node {eq.name!r} must use the identity link")

    def equation(self, name: str) -> NodeEquation:
        return next(eq for eq in self.equations if eq.name == name)

    def replaced(self, name: str, **changes) -> "ScmSpec":
        """Copy of the spec with one equation's fields replaced."""
        equations = tuple(
            replace(eq, **changes) if eq.name == name else eq for eq in self.equations
        )
        return ScmSpec(self.dag, equations, self.seed)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _draw_noises(spec: ScmSpec, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    return {eq.name: rng.normal(0.0, eq.noise_sd, size=n) for eq in spec.equations}


def _propagate(
    spec: ScmSpec,
    noises: Mapping[str, np.ndarray],
    interventions: Mapping[str, float] | None = None,
) -> dict[str, np.ndarray]:
    """Evaluate all equations in causal order, forcing any intervened nodes."""
    values: dict[str, np.ndarray] = {}
    for eq in spec.equations:
        if interventions is not None and eq.name in interventions:
            n = len(noises[eq.name])
            values[eq.name] = np.full(n, float(interventions[eq.name]))
            continue
        eta = noises[eq.name] + eq.intercept
        for coef, parent in zip(eq.coefficients, eq.parents):
            eta = eta + coef * values[parent]
        if eq.link == LINK_SIGMOID_THRESHOLD:
            values[eq.name] = (_sigmoid(eta) >= eq.threshold).astype(float)
        else:
            values[eq.name] = eta
    return values


def generate_scm(dag: CausalDag, seed: int, coefficient_scale: float = 1.0) -> ScmSpec:
    """Draw coefficients and calibrate intercepts for every node.

    Coefficients are i.i.d. standard normal times ``coefficient_scale``.
    Intercepts are set so the mean of ``coefficients . parents`` over a
    100 000-draw calibration sample (generated with a dedicated sub-seed)
    is exactly zero. Regeneration with the same seed is bit-identical.
    """
    if not coefficient_scale > 0:
        raise ScmError("coefficient scale must be > 0")
    rng_coef = derive_rng(seed, "coefficients")
    rng_cal = derive_rng(seed, "calibration")
    equations: list[NodeEquation] = []
    sample: dict[str, np.ndarray] = {}
    for name in dag.topological_order:
        parents = tuple(p for p in dag.node_names if p in set(dag.parents(name)))
        coefs = rng_coef.normal(0.0, 1.0, size=len(parents)) * coefficient_scale
        raw = np.zeros(CALIBRATION_DRAWS)
        for coef, parent in zip(coefs, parents):
            raw = raw + coef * sample[parent]
        intercept = -float(np.mean(raw)) if parents else 0.0
        intercept += 0.0  # normalize -0.0
        binary = dag.role(name) in (ROLE_EXPOSURE, ROLE_MEDIATOR)
        eq = NodeEquation(
            name=name,
            parents=parents,
            coefficients=tuple(float(c) for c in coefs),
            intercept=intercept,
            noise_sd=1.0,
            link=LINK_SIGMOID_THRESHOLD if binary else LINK_IDENTITY,
        )
        equations.append(eq)
        noise = rng_cal.normal(0.0, eq.noise_sd, size=CALIBRATION_DRAWS)
        eta = raw + intercept + noise
        if binary:
            sample[name] = (_sigmoid(eta) >= eq.threshold).astype(float)
        else:
            sample[name] = eta
    return ScmSpec(dag, tuple(equations), int(seed))


def simulate_dataset(spec: ScmSpec, n: int, seed: int) -> Dataset:
    """Simulate ``n`` observational rows.

    Columns are ordered covariates, exposure, mediators (topological order),
    outcome; latent nodes are generated but not emitted.
    """
    if n < 1:
        raise ScmError("n must be >= 1")
    rng = derive_rng(seed, "simulate")
    noises = _draw_noises(spec, n, rng)
    values = _propagate(spec, noises)
    dag = spec.dag
    covs = dag.covariates
    meds = dag.mediators
    covariates = (
        np.column_stack([values[c] for c in covs]) if covs else np.zeros((n, 0))
    )
    return Dataset(
        covariates=covariates,
        exposure=values[dag.exposure],
        mediators=np.column_stack([values[m] for m in meds]),
        outcome=values[dag.outcome],
        covariate_names=covs,
        mediator_names=meds,
        exposure_name=dag.exposure,
        outcome_name=dag.outcome,
    )


# ---------------------------------------------------------------------------
# Ground-truth effects by direct manipulation
# ---------------------------------------------------------------------------

_ORACLE_KEYS = (
    "m0", "m1", "te", "cde0", "cie0", "cie1", "scie",
    "y00", "y01", "y10", "y11",
)


@dataclass(frozen=True)
class TrueEffects:
    """Monte Carlo ground truth for one mediator, with standard errors.

    ``m0``/``m1`` are potential-mediator probabilities; ``y{a}{m}`` are mean
    potential outcomes with the exposure at ``a`` and the mediator forced to
    ``m`` (other mediators evolving naturally under ``a``); ``scie`` is the
    per-unit-averaged scaled indirect effect, so ``te = cde0 + scie`` holds
    up to floating-point roundoff by construction.
    """

    k: int
    mediator: str
    n_mc: int
    m0: float
    m1: float
    te: float
    cde0: float
    cie0: float
    cie1: float
    scie: float
    y00: float
    y01: float
    y10: float
    y11: float
    se: Mapping[str, float]

    @property
    def delta_m(self) -> float:
        return self.m1 - self.m0

    @property
    def delta_c(self) -> float:
        return self.cie1 - self.cie0

    @property
    def scie_assembled(self) -> float:
        """Scaled indirect effect assembled from the marginal means."""
        return self.m1 * self.cie1 - self.m0 * self.cie0

    @property
    def decomposition_gap(self) -> float:
        return self.te - self.cde0 - self.scie

    def to_dict(self) -> dict:
        out = {
            "k": self.k,
            "mediator": self.mediator,
            "n_mc": self.n_mc,
        }
        for key in _ORACLE_KEYS:
            out[key] = getattr(self, key)
        out["delta_m"] = self.delta_m
        out["delta_c"] = self.delta_c
        out["se"] = dict(self.se)
        return out


def oracle_effects(spec: ScmSpec, k: int, n_mc: int, seed: int) -> TrueEffects:
    """Ground-truth effects for mediator ``k`` by direct manipulation.

    Simulates ``n_mc`` units in 100 batches; within each batch all arms
    (exposure at 0/1, mediator free or forced to 0/1) share the same noise
    draws.
    """
    if not 1 <= k <= spec.dag.n_mediators:
        raise ScmError(f"mediator index {k} out of range 1..{spec.dag.n_mediators}")
    if n_mc < MIN_ORACLE_DRAWS:
        raise ScmError(f"n_mc must be >= {MIN_ORACLE_DRAWS}")
    mediator = spec.dag.mediators[k - 1]
    exposure = spec.dag.exposure
    outcome = spec.dag.outcome

    base = n_mc // ORACLE_BATCHES
    remainder = n_mc % ORACLE_BATCHES
    sums = {key: 0.0 for key in _ORACLE_KEYS}
    sumsq = {key: 0.0 for key in _ORACLE_KEYS}
    for b in range(ORACLE_BATCHES):
        size = base + (1 if b < remainder else 0)
        if size == 0:
            continue
        rng = derive_rng(seed, "oracle", b)
        noises = _draw_noises(spec, size, rng)
        nat1 = _propagate(spec, noises, {exposure: 1.0})
        nat0 = _propagate(spec, noises, {exposure: 0.0})
        forced = {
            (a, m): _propagate(spec, noises, {exposure: float(a), mediator: float(m)})
            for a in (0, 1)
            for m in (0, 1)
        }
        m1 = nat1[mediator]
        m0 = nat0[mediator]
        y = {(a, m): forced[(a, m)][outcome] for a in (0, 1) for m in (0, 1)}
        d1 = y[(1, 1)] - y[(1, 0)]
        d0 = y[(0, 1)] - y[(0, 0)]
        per_unit = {
            "m0": m0,
            "m1": m1,
            "te": nat1[outcome] - nat0[outcome],
            "cde0": y[(1, 0)] - y[(0, 0)],
            "cie0": d0,
            "cie1": d1,
            "scie": m1 * d1 - m0 * d0,
            "y00": y[(0, 0)],
            "y01": y[(0, 1)],
            "y10": y[(1, 0)],
            "y11": y[(1, 1)],
        }
        for key, arr in per_unit.items():
            sums[key] += float(np.sum(arr))
            sumsq[key] += float(np.sum(arr * arr))

    means = {key: sums[key] / n_mc for key in _ORACLE_KEYS}
    se = {}
    for key in _ORACLE_KEYS:
        var = max(sumsq[key] - n_mc * means[key] ** 2, 0.0) / (n_mc - 1)
        se[key] = math.sqrt(var / n_mc)
    return TrueEffects(
        k=k, mediator=mediator, n_mc=n_mc, se=se,
        **{key: means[key] for key in _ORACLE_KEYS},
    )


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------


def scm_to_text(spec: ScmSpec) -> str:
    """Archive the model as a sectioned key = value document.

    The DAG is embedded (roles plus per-node parent lists), so the document
    alone is enough to reproduce simulations and oracle effects.
    """
    lines = ["[scm]", f"seed = {spec.seed}", ""]
    for eq in spec.equations:
        lines.append(f"[node {eq.name}]")
        lines.append(f"role = {spec.dag.role(eq.name)}")
        lines.append(f"link = {eq.link}")
        if eq.link == LINK_SIGMOID_THRESHOLD:
            lines.append(f"threshold = {format_float(eq.threshold)}")
        lines.append(f"noise_sd = {format_float(eq.noise_sd)}")
        lines.append(f"intercept = {format_float(eq.intercept)}")
        lines.append("parents = " + ", ".join(eq.parents))
        lines.append(
            "coefficients = " + ", ".join(format_float(c) for c in eq.coefficients)
        )
        lines.append("")
    return "\n".join(lines)


def scm_from_text(text: str) -> ScmSpec:
    import configparser

    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScmError(f"bad model document: {exc}") from None
    if "scm" not in parser:
        raise ScmError("missing [scm] section")
    seed = int(parser["scm"]["seed"])
    nodes: list[DagNode] = []
    equations: list[NodeEquation] = []
    edges: list[tuple[str, str]] = []
    for section in parser.sections():
        if not section.startswith("node "):
            continue
        name = section.split(" ", 1)[1]
        body = parser[section]
        parents = tuple(p.strip() for p in body["parents"].split(",") if p.strip())
        coef_text = body.get("coefficients", "")
        coefs = tuple(float(c) for c in coef_text.split(",") if c.strip())
        nodes.append(DagNode(name, body["role"]))
        equations.append(
            NodeEquation(
                name=name,
                parents=parents,
                coefficients=coefs,
                intercept=float(body["intercept"]),
                noise_sd=float(body.get("noise_sd", "1")),
                link=body["link"],
                threshold=float(body.get("threshold", "0.5")),
            )
        )
        edges.extend((p, name) for p in parents)
    dag = CausalDag(tuple(nodes), tuple(edges))
    order = {name: i for i, name in enumerate(dag.topological_order)}
    equations.sort(key=lambda eq: order[eq.name])
    return ScmSpec(dag, tuple(equations), seed)


def scm_to_file(spec: ScmSpec, path: str):
    write_text_atomic(path, scm_to_text(spec))


def scm_from_file(path: str) -> ScmSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return scm_from_text(fh.read())
