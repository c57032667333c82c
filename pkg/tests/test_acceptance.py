"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
complete. The simulation designs fix the model seed and use coefficient
scale 0.5, which keeps true exposure propensities inside the clipping range
so positivity genuinely holds.
"""

import json
import os
import re
import subprocess
import sys
import time

import numpy as np
import pytest

import medecomp as mc
from medecomp import (
    CausalDag,
    DagNode,
    Digraph,
    d_separated,
    dependent_mediators_dag,
    independent_mediators_dag,
    serialize_dag,
)
from medecomp.cli import main
from medecomp.estimator import (
    decompose_mediator,
    default_templates,
    fit_nuisance_bundle,
)
from medecomp.nuisance import CandidatePair, ModelSpec
from path_oracle import d_separated_by_enumeration, random_dag

SCM_SEED = 42
SCALE = 0.5


def _report(ok: bool, label: str, detail: str):
    print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def dependent_design():
    dag = dependent_mediators_dag()
    return dag, mc.generate_scm(dag, seed=SCM_SEED, coefficient_scale=SCALE)


@pytest.fixture(scope="module")
def independent_design():
    dag = independent_mediators_dag()
    return dag, mc.generate_scm(dag, seed=SCM_SEED, coefficient_scale=SCALE)


def test_criterion_1_decomposition_identity(dependent_design):
    """Oracle identity with common random numbers, three dependent mediators."""
    dag, spec = dependent_design
    start = time.monotonic()
    worst = 0.0
    for k in (1, 2, 3):
        eff = mc.oracle_effects(spec, k, 1_000_000, seed=101)
        bound = 3.0 * np.sqrt(
            eff.se["te"] ** 2 + eff.se["cde0"] ** 2 + eff.se["scie"] ** 2
        )
        gap = abs(eff.decomposition_gap)
        worst = max(worst, gap)
        assert gap <= bound, (k, gap, bound)
    elapsed = time.monotonic() - start
    _report(
        elapsed < 60.0,
        "criterion 1 (decomposition identity)",
        f"max |TE - CDE - sCIE| = {worst:.2e} across k=1..3; {elapsed:.1f}s",
    )


def test_criterion_2_averaged_identity(dependent_design):
    """Averaging identity at the oracle and, exactly, at the estimator."""
    dag, spec = dependent_design
    effects = [mc.oracle_effects(spec, k, 200_000, seed=102) for k in (1, 2, 3)]
    te = effects[0].te
    avg = np.mean([e.cde0 for e in effects]) + np.mean([e.scie for e in effects])
    mc_bound = 3.0 * np.sqrt(sum(e.se["cde0"] ** 2 + e.se["scie"] ** 2 for e in effects)) / 3.0
    oracle_gap = abs(te - avg)
    assert oracle_gap <= max(mc_bound, 1e-10)

    data = mc.simulate_dataset(spec, 1000, seed=103)
    res = mc.run_analysis(data, dag, n_replicates=150, seed=104)
    est_gap = abs(
        res.average.te
        - (np.mean([s.cde0 for s in res.slices]) + np.mean([s.scie for s in res.slices]))
    )
    assert est_gap <= 1e-12
    _report(
        True,
        "criterion 2 (averaged identity)",
        f"oracle gap {oracle_gap:.2e} (MC bound {mc_bound:.2e}); estimator gap {est_gap:.2e}",
    )


def test_criterion_3_assembled_identities(dependent_design, independent_design):
    """Exact assembled identities on every analysis run."""
    runs = []
    for (dag, spec), kind in (
        (dependent_design, "doubly-robust"),
        (independent_design, "doubly-robust"),
        (independent_design, "g-formula"),
    ):
        data = mc.simulate_dataset(spec, 800, seed=105)
        runs.append(mc.run_analysis(data, dag, kind=kind, n_replicates=120, seed=106))
    worst = 0.0
    for res in runs:
        for s in res.slices:
            worst = max(worst, abs(s.te - (s.cde0 + s.scie)))
            worst = max(worst, abs((s.pct_cde + s.pct_scie) - 100.0))
            worst = max(worst, abs(s.scie - (s.delta_c * s.m0 + s.delta_m * s.cie1)))
        worst = max(
            worst,
            abs(res.average.te - (res.average.cde0 + res.average.scie)),
        )
    _report(
        worst <= 1e-12,
        "criterion 3 (assembled identities)",
        f"max deviation {worst:.2e} over {len(runs)} runs (bound 1e-12)",
    )


def test_criterion_4_estimator_recovery_and_coverage(independent_design):
    """95% bootstrap CI covers the oracle CIE/sCIE in >= 90% of 50 seeds."""
    dag, spec = independent_design
    start = time.monotonic()
    oracle = {k: mc.oracle_effects(spec, k, 1_000_000, seed=107) for k in (1, 2)}
    effects = (("CIE0", "cie0"), ("CIE1", "cie1"), ("sCIE", "scie"))
    n_seeds = 50
    hits = {f"M{k}.{eff}": 0 for k in (1, 2) for eff, _ in effects}
    for s in range(n_seeds):
        data = mc.simulate_dataset(spec, 1000, seed=200 + s)
        res = mc.run_analysis(data, dag, n_replicates=500, seed=300 + s)
        for k in (1, 2):
            for eff, attr in effects:
                lo, hi = res.intervals[f"M{k}.{eff}"]
                if lo <= getattr(oracle[k], attr) <= hi:
                    hits[f"M{k}.{eff}"] += 1
    elapsed = time.monotonic() - start
    summary = ", ".join(f"{key} {n}/{n_seeds}" for key, n in hits.items())
    ok = all(n >= 45 for n in hits.values()) and elapsed < 1800.0
    _report(ok, "criterion 4 (coverage)", f"{summary}; {elapsed / 60:.1f} min")


def test_criterion_5_doubly_robust_property(independent_design):
    """One correct nuisance keeps the bias small; both wrong break it."""
    dag, spec = independent_design
    oracle = {k: mc.oracle_effects(spec, k, 1_000_000, seed=108) for k in (1, 2)}
    m_keys = [(k, a) for k in (1, 2) for a in (0, 1)]
    y_keys = [(k, a, m) for k in (1, 2) for a in (0, 1) for m in (0, 1)]
    configs = ("both_good", "f_wrong", "g_wrong", "both_wrong")
    errs = {c: {"m": {key: [] for key in m_keys}, "y": {key: [] for key in y_keys}}
            for c in configs}
    n_seeds = 20
    for s in range(n_seeds):
        data = mc.simulate_dataset(spec, 20_000, seed=400 + s)
        good = default_templates(data)
        # feature-dropped mis-specification: one of the two confounders
        bad_out = ModelSpec("ridge-linear", ("L1",))
        bad_prop = ModelSpec("ridge-logistic", ("L1",))
        pairs = {
            "both_good": good,
            "f_wrong": CandidatePair(bad_out, good.propensity),
            "g_wrong": CandidatePair(good.outcome, bad_prop),
            "both_wrong": CandidatePair(bad_out, bad_prop),
        }
        cache = {}
        for name, pair in pairs.items():
            bundle = fit_nuisance_bundle(
                data, pair.outcome, pair.propensity, seed=s, cache=cache
            )
            for k in (1, 2):
                sl = decompose_mediator(data, None, k, "doubly-robust", bundle,
                                        check_identification=False)
                for a in (0, 1):
                    truth = oracle[k].m1 if a else oracle[k].m0
                    errs[name]["m"][(k, a)].append((sl.m1 if a else sl.m0) - truth)
                for a in (0, 1):
                    for m in (0, 1):
                        est = getattr(sl, f"y{a}{m}")
                        errs[name]["y"][(k, a, m)].append(
                            est - getattr(oracle[k], f"y{a}{m}")
                        )

    def mean_bias(config, block):
        return {key: abs(float(np.mean(v))) for key, v in errs[config][block].items()}

    worst_m = max(
        max(mean_bias(c, "m").values()) for c in ("both_good", "f_wrong", "g_wrong")
    )
    worst_y = max(
        max(mean_bias(c, "y").values()) for c in ("both_good", "f_wrong", "g_wrong")
    )
    good_y = mean_bias("both_good", "y")
    broken_y = mean_bias("both_wrong", "y")
    control = any(broken_y[key] >= 2.0 * good_y[key] for key in y_keys)
    ok = worst_m < 0.02 and worst_y < 0.05 and control
    _report(
        ok,
        "criterion 5 (doubly robust property)",
        f"max |bias| mediator {worst_m:.4f} (<0.02), outcome {worst_y:.4f} (<0.05), "
        f"negative control {'breaks' if control else 'does not break'} "
        f"(max ratio {max(broken_y[key] / max(good_y[key], 1e-12) for key in y_keys):.0f}x)",
    )


def test_criterion_6_dsep_oracle_equivalence():
    """Reachability d-separation agrees with exhaustive path enumeration."""
    start = time.monotonic()
    rng = np.random.default_rng(42)
    n_queries = 0
    for _ in range(100):
        n_nodes = int(rng.integers(3, 8))
        nodes, edges = random_dag(rng, n_nodes, edge_prob=float(rng.uniform(0.2, 0.6)))
        g = Digraph(nodes, edges)
        for x in nodes:
            for y in nodes:
                if y <= x:
                    continue
                for z in nodes:
                    if z in (x, y):
                        continue
                    fast = bool(d_separated(g, {x}, {y}, {z}))
                    slow = d_separated_by_enumeration(nodes, edges, {x}, {y}, {z})
                    assert fast == slow, (nodes, edges, x, y, z)
                    n_queries += 1
    elapsed = time.monotonic() - start
    _report(
        elapsed < 60.0,
        "criterion 6 (d-separation oracle equivalence)",
        f"{n_queries} singleton triples over 100 DAGs, 100% agreement; {elapsed:.1f}s",
    )


def _general_template_dag():
    """Five mediators with a hub: two upstream parents, two downstream children."""
    meds = [f"M{i}" for i in range(1, 6)]
    nodes = [DagNode("L", "covariate"), DagNode("A", "exposure")]
    nodes += [DagNode(m, "mediator") for m in meds]
    nodes.append(DagNode("Y", "outcome"))
    edges = [("L", "A"), ("L", "Y"), ("A", "Y")]
    for m in meds:
        edges += [("L", m), ("A", m), (m, "Y")]
    edges += [("M1", "M3"), ("M2", "M3"), ("M3", "M4"), ("M3", "M5")]
    return CausalDag(tuple(nodes), tuple(edges))


def test_criterion_7_ignorability_checks():
    """Identification holds on the study topologies; a latent confounder
    fails with a genuine d-connecting witness."""
    for dag in (
        independent_mediators_dag(),
        dependent_mediators_dag(),
        _general_template_dag(),
    ):
        for k in range(1, dag.n_mediators + 1):
            report = mc.check_ignorability(dag, k)
            assert report.holds, (dag.mediators, k, report)

    base = independent_mediators_dag(1, 2)
    latent = CausalDag(
        tuple(DagNode(n.name, "latent" if n.name == "L1" else n.role) for n in base.nodes),
        base.edges,
    )
    report = mc.check_ignorability(latent, 1)
    assert not report.holds and report.witness is not None
    # the witness must be d-connecting in the corresponding intervention graph
    swig = mc.build_swig(latent, {"A": "a"})
    names = swig.node_names
    connected = not d_separated_by_enumeration(
        names, swig.edges, {report.witness[0]}, {report.witness[-1]}, set()
    )
    assert connected
    assert report.witness == ("M1(a)", "L1", "A")
    _report(
        True,
        "criterion 7 (ignorability checks)",
        "all mediators identified on 3 topologies; latent-confounder variant "
        f"fails with witness {' - '.join(report.witness)}",
    )


def test_criterion_8_cli_determinism(tmp_path):
    """Byte-identical artifacts across reruns and BLAS thread counts."""
    dag_path = tmp_path / "independent.dag"
    dag_path.write_text(serialize_dag(independent_mediators_dag()))
    artifacts = []
    for run, threads in (("r1", "1"), ("r2", "4")):
        env = dict(os.environ)
        env.update({
            "OPENBLAS_NUM_THREADS": threads,
            "OMP_NUM_THREADS": threads,
            "MKL_NUM_THREADS": threads,
        })
        csv = tmp_path / f"{run}.csv"
        scm = tmp_path / f"{run}.scm"
        proc = subprocess.run(
            [sys.executable, "-m", "medecomp", "simulate",
             "--dag", str(dag_path), "--n", "500", "--seed", "77",
             "--out", str(csv), "--spec", str(scm),
             "--oracle", "all", "--oracle-mc", "50000",
             "--oracle-out", str(tmp_path / f"{run}.oracle.json")],
            capture_output=True, env=env,
        )
        assert proc.returncode == 0, proc.stderr
        cfg = tmp_path / f"{run}.cfg"
        cfg.write_text(
            f"[analysis]\ndata = {run}.csv\ndag = independent.dag\nseed = 5\n"
            f"bootstrap = 120\nreport = {run}.json\n\n"
            "[columns]\nL1 = L1\nL2 = L2\nA = A\nM1 = M1\nM2 = M2\nY = Y\n"
        )
        proc = subprocess.run(
            [sys.executable, "-m", "medecomp", "analyze", "--config", str(cfg)],
            capture_output=True, env=env, cwd=tmp_path,
        )
        assert proc.returncode == 0, proc.stderr
        report = re.sub(
            r'"timestamp": "[^"]*"', '"timestamp": "X"',
            (tmp_path / f"{run}.json").read_text(),
        ).replace(run, "rX")
        artifacts.append((
            csv.read_bytes(),
            scm.read_bytes(),
            (tmp_path / f"{run}.oracle.json").read_bytes(),
            report,
        ))
    ok = artifacts[0] == artifacts[1]
    _report(
        ok,
        "criterion 8 (determinism)",
        "CSV, model archive, oracle JSON, and report identical across reruns "
        "with 1 vs 4 BLAS threads (timestamp excluded)",
    )


FRAMING_COLUMNS = ("emo", "p_harm", "treat", "immigr", "age", "educ", "gender", "income")


def _framing_csv_path():
    env = os.environ.get("FRAMING_CSV")
    if env and os.path.exists(env):
        return env
    local = os.path.join(os.path.dirname(__file__), "data", "framing.csv")
    if os.path.exists(local):
        return local
    return None


def test_criterion_9_framing_reproduction(tmp_path):
    """Optional: requires the user-supplied framing survey CSV (265 rows)."""
    path = _framing_csv_path()
    if path is None:
        print(
            "SKIP criterion 9 (framing reproduction): no framing CSV found "
            "(set FRAMING_CSV or place tests/data/framing.csv; "
            "columns required: " + ", ".join(FRAMING_COLUMNS) + ")"
        )
        pytest.skip("framing CSV not supplied")
    dag_path = tmp_path / "framing.dag"
    dag_path.write_text(
        "node L covariate\nnode A exposure\nnode M1 mediator\nnode M2 mediator\n"
        "node Y outcome\n"
        "edge L -> A\nedge L -> M1\nedge L -> M2\nedge L -> Y\n"
        "edge A -> M1\nedge A -> M2\nedge A -> Y\nedge M1 -> Y\nedge M2 -> Y\n"
    )
    cfg = tmp_path / "framing.cfg"
    cfg.write_text(
        f"[analysis]\ndata = {os.path.abspath(path)}\ndag = framing.dag\n"
        "estimator = gformula\nseed = 7\nbootstrap = 1000\nreport = framing.json\n\n"
        "[columns]\nL = age, educ, gender, income\nA = treat\n"
        "M1 = emo\nM2 = p_harm\nY = immigr\n\n"
        "[binarize]\nemo = 8\np_harm = 7\n"
    )
    assert main(["analyze", "--config", str(cfg)]) == 0
    report = json.loads((tmp_path / "framing.json").read_text())
    te = {
        e["mediator"]: e["estimate"]
        for e in report["effects"]
        if e["effect"] == "TE"
    }
    scie = {
        e["mediator"]: e["estimate"]
        for e in report["effects"]
        if e["effect"] == "sCIE"
    }
    in_interval = all(0.17 <= v <= 0.62 for v in te.values())
    ordering = scie["emo"] > scie["p_harm"]
    _report(
        in_interval and ordering,
        "criterion 9 (framing reproduction)",
        f"TE per mediator {te} within [0.17, 0.62]: {in_interval}; "
        f"emotion sCIE {scie['emo']:.3f} > harm sCIE {scie['p_harm']:.3f}: {ordering}",
    )
