"""Command-line surface: simulate, checkdag, analyze.

Exit codes: 0 on success, 1 on analysis-level failures (identification,
empty strata, bad data, excessive dropped bootstrap replicates), 2 on input
errors (bad arguments, malformed DAG or config files).

All outputs are written atomically (temp file + rename). JSON reports emit
numbers with 17 significant digits so they round-trip losslessly, and a
rerun with the same seed reproduces every artifact byte for byte except the
report's timestamp field.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .dag import (
    CausalDag,
    DagError,
    check_ignorability,
    parse_dag,
)
from .dataset import DataError, Dataset, format_float, read_csv_columns, write_text_atomic
from .estimator import (
    DR,
    GFORMULA,
    EstimationError,
    MediationDecomposition,
    run_analysis,
)
from .nuisance import (
    DEFAULT_INNER_FOLDS,
    DEFAULT_OUTER_FOLDS,
    DEFAULT_PENALTY_GRID,
    FAMILY_LINEAR,
    FAMILY_LOGISTIC,
    CandidatePair,
    FitError,
    ModelSpec,
)
from .scm import (
    ScmError,
    generate_scm,
    oracle_effects,
    scm_from_file,
    scm_to_text,
    simulate_dataset,
)

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_INPUT = 2

EFFECT_ROWS = ("pctCDE", "pctsCIE", "CDE", "sCIE", "TE", "CIE0", "CIE1")

_ORACLE_EFFECT_KEYS = {
    "CDE": "cde0",
    "sCIE": "scie",
    "TE": "te",
    "CIE0": "cie0",
    "CIE1": "cie1",
}


class CliInputError(ValueError):
    """Bad command-line input or config file; maps to exit code 2."""


class CliAnalysisError(ValueError):
    """Analysis-level failure surfaced by the CLI; maps to exit code 1."""


# ---------------------------------------------------------------------------
# Deterministic JSON writer (17-significant-digit floats)
# ---------------------------------------------------------------------------


def _json_token(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value != value:
            return "NaN"
        if value in (float("inf"), float("-inf")):
            return "Infinity" if value > 0 else "-Infinity"
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value)!r}")


def dump_json(value, indent: int = 0) -> str:
    pad = "  " * indent
    child = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{child}{_json_token(str(key))}: {dump_json(item, indent + 1)}"
            for key, item in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{child}{dump_json(item, indent + 1)}" for item in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _json_token(value)


def write_json_atomic(path: str, value):
    write_text_atomic(path, dump_json(value) + "\n")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# Analysis config
# ---------------------------------------------------------------------------


_ANALYSIS_DEFAULTS = {
    "estimator": "dr",
    "bootstrap": 1000,
    "level": 0.95,
    "outer_folds": DEFAULT_OUTER_FOLDS,
    "inner_folds": DEFAULT_INNER_FOLDS,
    "allow_unidentified": False,
    "report": "report.json",
}


def _read_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise CliInputError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise CliInputError(f"bad config {path}: {exc}") from None
    return parser


class AnalysisConfig:
    """Resolved analysis settings: file paths, column roles, estimator,
    folds, bootstrap, candidate feature sets, and the master seed (runs are
    never seeded from the clock)."""

    def __init__(self, path: str, overrides: dict):
        parser = _read_config(path)
        base_dir = os.path.dirname(os.path.abspath(path))
        if "analysis" not in parser:
            raise CliInputError(f"{path}: missing [analysis] section")
        section = parser["analysis"]

        def resolve(name, default=None):
            if overrides.get(name) is not None:
                return overrides[name]
            if name in section:
                return section[name]
            return default

        def resolve_path(name):
            # command-line paths are relative to the caller's directory,
            # config-file paths to the config's directory
            if overrides.get(name) is not None:
                return str(overrides[name])
            if name in section:
                return self._path(base_dir, section[name], name)
            raise CliInputError(f"missing required setting {name!r}")

        self.data_path = resolve_path("data")
        self.dag_path = resolve_path("dag")
        estimator = str(resolve("estimator", _ANALYSIS_DEFAULTS["estimator"]))
        if estimator not in ("dr", "gformula"):
            raise CliInputError(f"estimator must be 'dr' or 'gformula', got {estimator!r}")
        self.kind = DR if estimator == "dr" else GFORMULA
        seed = resolve("seed")
        if seed is None:
            raise CliInputError("a seed is required (config [analysis] seed or --seed)")
        self.seed = self._int("seed", seed)
        self.bootstrap = self._int("bootstrap", resolve("bootstrap", _ANALYSIS_DEFAULTS["bootstrap"]))
        self.level = self._float("level", resolve("level", _ANALYSIS_DEFAULTS["level"]))
        self.outer_folds = self._int("outer_folds", resolve("outer_folds", _ANALYSIS_DEFAULTS["outer_folds"]))
        self.inner_folds = self._int("inner_folds", resolve("inner_folds", _ANALYSIS_DEFAULTS["inner_folds"]))
        allow = resolve("allow_unidentified", _ANALYSIS_DEFAULTS["allow_unidentified"])
        self.allow_unidentified = (
            allow if isinstance(allow, bool) else str(allow).strip().lower() in ("1", "true", "yes")
        )
        self.report_path = str(resolve("report", _ANALYSIS_DEFAULTS["report"]))
        if overrides.get("report") is None and "report" in section:
            self.report_path = os.path.join(base_dir, section["report"])
        grid_text = resolve("penalty_grid")
        if grid_text is None:
            self.penalty_grid = DEFAULT_PENALTY_GRID
        else:
            try:
                self.penalty_grid = tuple(
                    float(v) for v in str(grid_text).split(",") if v.strip()
                )
            except ValueError:
                raise CliInputError(f"bad penalty_grid {grid_text!r}") from None

        if "columns" not in parser or not parser["columns"]:
            raise CliInputError(f"{path}: missing [columns] section")
        self.column_map = {
            node: tuple(c.strip() for c in cols.split(",") if c.strip())
            for node, cols in parser["columns"].items()
        }
        self.binarize = {}
        if "binarize" in parser:
            for column, threshold in parser["binarize"].items():
                self.binarize[column] = self._float(f"binarize {column}", threshold)
        self.candidate_sets: list[tuple[str, tuple[str, ...] | None]] = []
        if "candidates" in parser:
            for name, cols in parser["candidates"].items():
                cols = cols.strip()
                if cols == "*":
                    self.candidate_sets.append((name, None))
                else:
                    self.candidate_sets.append(
                        (name, tuple(c.strip() for c in cols.split(",") if c.strip()))
                    )
        self.oracle_spec = None
        self.oracle_mc = 100_000
        self.oracle_seed = None
        if "oracle" in parser:
            spec_path = parser["oracle"].get("spec")
            if spec_path:
                self.oracle_spec = os.path.join(base_dir, spec_path)
            if "n_mc" in parser["oracle"]:
                self.oracle_mc = self._int("oracle n_mc", parser["oracle"]["n_mc"])
            if "seed" in parser["oracle"]:
                self.oracle_seed = self._int("oracle seed", parser["oracle"]["seed"])

    @staticmethod
    def _path(base_dir, value, name):
        if value is None:
            raise CliInputError(f"missing required setting {name!r}")
        value = str(value)
        return value if os.path.isabs(value) else os.path.join(base_dir, value)

    @staticmethod
    def _int(name, value):
        try:
            return int(str(value))
        except ValueError:
            raise CliInputError(f"bad integer for {name}: {value!r}") from None

    @staticmethod
    def _float(name, value):
        try:
            return float(str(value))
        except ValueError:
            raise CliInputError(f"bad number for {name}: {value!r}") from None

    def echo(self) -> dict:
        return {
            "data": self.data_path,
            "dag": self.dag_path,
            "estimator": "dr" if self.kind == DR else "gformula",
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "level": self.level,
            "outer_folds": self.outer_folds,
            "inner_folds": self.inner_folds,
            "allow_unidentified": self.allow_unidentified,
            "penalty_grid": list(self.penalty_grid),
            "columns": {node: list(cols) for node, cols in self.column_map.items()},
            "binarize": dict(self.binarize),
            "candidates": {
                name: (list(cols) if cols is not None else "*")
                for name, cols in self.candidate_sets
            },
            "report": self.report_path,
        }


def load_dataset(config: AnalysisConfig, dag: CausalDag) -> Dataset:
    """Map CSV columns onto DAG roles, binarizing where configured."""
    columns = read_csv_columns(config.data_path)
    for column, threshold in config.binarize.items():
        if column not in columns:
            raise CliAnalysisError(f"binarize references unknown column {column!r}")
        columns[column] = (columns[column] >= threshold).astype(float)

    mapped: dict[str, tuple[str, ...]] = {}
    for node, cols in config.column_map.items():
        if node not in dag.node_names:
            raise CliAnalysisError(f"column map references unknown DAG node {node!r}")
        if dag.role(node) == "latent":
            raise CliAnalysisError(f"latent node {node!r} cannot map to data columns")
        for col in cols:
            if col not in columns:
                raise CliAnalysisError(f"unknown column {col!r} mapped to node {node!r}")
        if dag.role(node) != "covariate" and len(cols) != 1:
            raise CliAnalysisError(
                f"node {node!r} must map to exactly one column (got {len(cols)})"
            )
        mapped[node] = cols
    for node in dag.node_names:
        if dag.role(node) != "latent" and node not in mapped:
            raise CliAnalysisError(f"DAG node {node!r} has no column mapping")

    covariate_cols: list[str] = []
    for node in dag.covariates:
        covariate_cols.extend(mapped[node])
    mediator_cols = [mapped[m][0] for m in dag.mediators]
    exposure_col = mapped[dag.exposure][0]
    outcome_col = mapped[dag.outcome][0]
    n = len(columns[exposure_col])
    covariates = (
        np.column_stack([columns[c] for c in covariate_cols])
        if covariate_cols
        else np.zeros((n, 0))
    )
    try:
        return Dataset(
            covariates=covariates,
            exposure=columns[exposure_col],
            mediators=np.column_stack([columns[c] for c in mediator_cols]),
            outcome=columns[outcome_col],
            covariate_names=tuple(covariate_cols),
            mediator_names=tuple(mediator_cols),
            exposure_name=exposure_col,
            outcome_name=outcome_col,
        )
    except DataError as exc:
        raise CliAnalysisError(str(exc)) from None


def build_candidates(config: AnalysisConfig, data: Dataset) -> list[CandidatePair] | None:
    if not config.candidate_sets:
        return None
    pairs = []
    for name, cols in config.candidate_sets:
        features = data.covariate_names if cols is None else cols
        for col in features:
            if col not in data.covariate_names:
                raise CliAnalysisError(
                    f"candidate {name!r} references non-covariate column {col!r}"
                )
        pairs.append(
            CandidatePair(
                outcome=ModelSpec(FAMILY_LINEAR, tuple(features), penalty_grid=config.penalty_grid),
                propensity=ModelSpec(FAMILY_LOGISTIC, tuple(features), penalty_grid=config.penalty_grid),
            )
        )
    return pairs


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------


def _oracle_rows(config: AnalysisConfig, dag: CausalDag, data: Dataset):
    if config.oracle_spec is None:
        return None
    spec = scm_from_file(config.oracle_spec)
    if tuple(spec.dag.mediators) != tuple(dag.mediators):
        raise CliAnalysisError("oracle model mediators do not match the analysis DAG")
    seed = config.oracle_seed if config.oracle_seed is not None else config.seed
    out = {}
    for k, med in enumerate(dag.mediators, start=1):
        effects = oracle_effects(spec, k, config.oracle_mc, seed)
        column = data.mediator_names[k - 1]
        row = {key: getattr(effects, attr) for key, attr in _ORACLE_EFFECT_KEYS.items()}
        if abs(effects.te) > 1e-12:
            row["pctCDE"] = 100.0 * effects.cde0 / effects.te
            row["pctsCIE"] = 100.0 - row["pctCDE"]
        else:
            row["pctCDE"] = None
            row["pctsCIE"] = None
        out[column] = row
    return out


def build_report(
    config: AnalysisConfig,
    dag: CausalDag,
    data: Dataset,
    result: MediationDecomposition,
    oracle_rows,
) -> dict:
    effects = []
    for s in result.slices:
        values = s.effect_values()
        for effect in EFFECT_ROWS:
            key = f"{s.mediator}.{effect}"
            ci = result.intervals.get(key, (None, None))
            entry = {
                "mediator": s.mediator,
                "effect": effect,
                "estimate": values[effect],
                "ci_lower": ci[0],
                "ci_upper": ci[1],
            }
            if oracle_rows is not None:
                entry["oracle"] = oracle_rows[s.mediator].get(effect)
            effects.append(entry)
    average = {}
    for effect, value in result.average.effect_values().items():
        ci = result.intervals.get(f"average.{effect}", (None, None))
        average[effect] = {"estimate": value, "ci_lower": ci[0], "ci_upper": ci[1]}
    ignorability = [
        {
            "k": r.k,
            "mediator": r.mediator,
            "condition_m": r.condition_m,
            "condition_y": r.condition_y,
            "witness": list(r.witness) if r.witness else None,
            "witness_condition": r.witness_condition,
        }
        for r in result.ignorability
    ]
    if result.selection is None:
        selection = {"performed": False, "reason": "fewer than 2 candidate pairs"}
    else:
        selection = {
            "performed": True,
            "note": (
                "perturbation pseudo-risk over candidate pairs; a concrete "
                "instantiation of minmax perturbation selection"
            ),
            "chosen": result.selection.chosen_index,
            "table": result.selection.table,
        }
    details = {
        s.mediator: {
            "M0": s.m0,
            "M1": s.m1,
            "dM": s.delta_m,
            "dC": s.delta_c,
            "Y00": s.y00,
            "Y01": s.y01,
            "Y10": s.y10,
            "Y11": s.y11,
            "stratum_counts": s.stratum_counts,
            "pct_defined": s.pct_defined,
        }
        for s in result.slices
    }
    digests = {"data": _sha256(config.data_path), "dag": _sha256(config.dag_path)}
    if config.oracle_spec is not None:
        digests["oracle_spec"] = _sha256(config.oracle_spec)
    return {
        "config": config.echo(),
        "ignorability": ignorability,
        "selection": selection,
        "effects": effects,
        "average": average,
        "diagnostics": {
            "n": data.n,
            "level": result.level,
            "bootstrap_replicates": result.bootstrap_replicates,
            "bootstrap_dropped": result.bootstrap_dropped,
            "undefined_replicates": {
                k: v for k, v in sorted(result.undefined_counts.items()) if v
            },
            "chosen_penalties": result.chosen_penalties,
            "mediator_details": details,
            "flags": list(result.flags),
            "version": __version__,
            "input_digests": digests,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
    }


def _fmt_cell(effect: str, value, ci) -> str:
    if value is None:
        return "n/a"
    digits = 1 if effect.startswith("pct") else 3
    text = f"{value:.{digits}f}"
    if ci is not None and ci[0] is not None:
        text += f" [{ci[0]:.{digits}f}, {ci[1]:.{digits}f}]"
    return text


def format_table(result: MediationDecomposition, oracle_rows=None) -> str:
    headers = ["effect"]
    for s in result.slices:
        headers.append(s.mediator)
        if oracle_rows is not None:
            headers.append(f"{s.mediator} (true)")
    rows = []
    display = {"pctCDE": "%CDE", "pctsCIE": "%sCIE"}
    for effect in EFFECT_ROWS:
        row = [display.get(effect, effect)]
        for s in result.slices:
            values = s.effect_values()
            ci = result.intervals.get(f"{s.mediator}.{effect}")
            row.append(_fmt_cell(effect, values[effect], ci))
            if oracle_rows is not None:
                row.append(_fmt_cell(effect, oracle_rows[s.mediator].get(effect), None))
        rows.append(row)
    widths = [0] * len(headers)
    for row in [headers] + rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = []
    for row in [headers] + rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    avg = result.average
    avg_ci = {e: result.intervals.get(f"average.{e}") for e in ("CDE", "sCIE", "TE")}
    lines.append("")
    lines.append(
        "average  CDE " + _fmt_cell("CDE", avg.cde0, avg_ci["CDE"])
        + "  sCIE " + _fmt_cell("sCIE", avg.scie, avg_ci["sCIE"])
        + "  TE " + _fmt_cell("TE", avg.te, avg_ci["TE"])
    )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _load_dag_file(path: str) -> CausalDag:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_dag(fh.read())
    except OSError as exc:
        raise CliInputError(f"cannot read DAG file {path}: {exc}") from None
    except DagError as exc:
        raise CliInputError(f"{path}: {exc}") from None


def run_simulate(args) -> int:
    dag = _load_dag_file(args.dag)
    if args.n < 1:
        raise CliInputError("n must be ≥ 1")
    if not args.scale > 0:
        raise CliInputError("coefficient scale must be > 0")
    spec = generate_scm(dag, args.seed, args.scale)
    data = simulate_dataset(spec, args.n, args.seed)
    data.to_csv(args.out)
    if args.spec:
        write_text_atomic(args.spec, scm_to_text(spec))
    if args.oracle is not None:
        if args.oracle == "all":
            ks = list(range(1, dag.n_mediators + 1))
        else:
            try:
                ks = [int(args.oracle)]
            except ValueError:
                raise CliInputError(f"--oracle expects a mediator index or 'all', got {args.oracle!r}") from None
        payload = []
        for k in ks:
            effects = oracle_effects(spec, k, args.oracle_mc, args.seed)
            payload.append(effects.to_dict())
        out_path = args.oracle_out or (os.path.splitext(args.out)[0] + ".oracle.json")
        write_json_atomic(out_path, {"n_mc": args.oracle_mc, "effects": payload})
    print(f"wrote {args.n} rows x {len(data.column_names)} columns to {args.out}")
    return EXIT_OK


def run_checkdag(args) -> int:
    dag = _load_dag_file(args.dag)
    reports = [check_ignorability(dag, k) for k in range(1, dag.n_mediators + 1)]
    all_pass = True
    for r in reports:
        if r.holds:
            print(f"mediator {r.mediator}: ok (both conditions hold)")
        else:
            all_pass = False
            failed = "M-condition" if r.witness_condition == "M" else "Y-condition"
            print(
                f"mediator {r.mediator}: FAIL ({failed}; "
                f"d-connecting path: {' - '.join(r.witness)})"
            )
    if args.out:
        write_json_atomic(
            args.out,
            {
                "dag": os.path.abspath(args.dag),
                "all_pass": all_pass,
                "mediators": [
                    {
                        "k": r.k,
                        "mediator": r.mediator,
                        "condition_m": r.condition_m,
                        "condition_y": r.condition_y,
                        "witness": list(r.witness) if r.witness else None,
                        "witness_condition": r.witness_condition,
                    }
                    for r in reports
                ],
            },
        )
    return EXIT_OK if all_pass else EXIT_ANALYSIS


def run_analyze(args) -> int:
    overrides = {
        "data": args.data,
        "dag": args.dag,
        "seed": args.seed,
        "bootstrap": args.bootstrap,
        "level": args.level,
        "estimator": args.estimator,
        "report": args.out,
    }
    config = AnalysisConfig(args.config, overrides)
    if args.allow_unidentified:
        config.allow_unidentified = True
    if args.out:
        config.report_path = args.out
    dag = _load_dag_file(config.dag_path)
    data = load_dataset(config, dag)
    candidates = build_candidates(config, data)
    try:
        result = run_analysis(
            data,
            dag,
            kind=config.kind,
            outer_folds=config.outer_folds,
            inner_folds=config.inner_folds,
            n_replicates=config.bootstrap,
            level=config.level,
            seed=config.seed,
            candidates=candidates,
            allow_unidentified=config.allow_unidentified,
            penalty_grid=config.penalty_grid,
        )
        oracle_rows = _oracle_rows(config, dag, data)
    except (EstimationError, FitError, ScmError, DataError) as exc:
        raise CliAnalysisError(str(exc)) from None
    report = build_report(config, dag, data, result, oracle_rows)
    write_json_atomic(config.report_path, report)
    print(format_table(result, oracle_rows))
    print(f"\nreport written to {config.report_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medecomp",
        description=(
            "Decompose the total effect of a binary exposure on an outcome "
            "into per-mediator direct and scaled indirect effects."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset from a DAG")
    p_sim.add_argument("--dag", required=True, help="DAG-spec file")
    p_sim.add_argument("--n", type=int, required=True, help="number of rows")
    p_sim.add_argument("--seed", type=int, required=True, help="master seed")
    p_sim.add_argument("--scale", type=float, default=1.0, help="coefficient scale (default 1)")
    p_sim.add_argument("--out", required=True, help="output CSV path")
    p_sim.add_argument("--spec", help="also archive the generated model to this path")
    p_sim.add_argument("--oracle", help="mediator index or 'all': also compute ground-truth effects")
    p_sim.add_argument("--oracle-mc", type=int, default=100_000, help="Monte Carlo draws for the oracle")
    p_sim.add_argument("--oracle-out", help="oracle JSON path (default: <out>.oracle.json)")
    p_sim.set_defaults(func=run_simulate)

    p_chk = sub.add_parser("checkdag", help="verify the identification conditions of a DAG")
    p_chk.add_argument("--dag", required=True, help="DAG-spec file")
    p_chk.add_argument("--out", help="also write a JSON report to this path")
    p_chk.set_defaults(func=run_checkdag)

    p_ana = sub.add_parser("analyze", help="run a full mediation analysis from CSV + config")
    p_ana.add_argument("--config", required=True, help="analysis config file")
    p_ana.add_argument("--data", help="override the dataset CSV path")
    p_ana.add_argument("--dag", help="override the DAG-spec path")
    p_ana.add_argument("--seed", type=int, help="override the master seed")
    p_ana.add_argument("--bootstrap", type=int, help="override the bootstrap replicate count")
    p_ana.add_argument("--level", type=float, help="override the confidence level")
    p_ana.add_argument("--estimator", choices=("dr", "gformula"), help="override the estimator")
    p_ana.add_argument("--allow-unidentified", action="store_true",
                       help="proceed despite failing identification checks")
    p_ana.add_argument("--out", help="override the JSON report path")
    p_ana.set_defaults(func=run_analyze)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CliAnalysisError, EstimationError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    raise SystemExit(main())
