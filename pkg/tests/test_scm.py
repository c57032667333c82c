import numpy as np
import pytest

from medecomp import (
    NodeEquation,
    ScmError,
    ScmSpec,
    generate_scm,
    independent_mediators_dag,
    dependent_mediators_dag,
    oracle_effects,
    parse_dag,
    scm_from_text,
    scm_to_text,
    simulate_dataset,
)


class TestGenerate:
    def test_deterministic_regeneration(self, independent_dag):
        a = generate_scm(independent_dag, seed=7, coefficient_scale=1.0)
        b = generate_scm(independent_dag, seed=7, coefficient_scale=1.0)
        assert a == b

    def test_structure(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        eq_a = spec.equation("A")
        assert eq_a.parents == ("L1", "L2")
        assert eq_a.link == "sigmoid-threshold"
        assert spec.equation("L1").parents == ()
        assert spec.equation("Y").link == "identity"

    def test_seed_changes_coefficients(self, independent_dag):
        a = generate_scm(independent_dag, seed=7)
        b = generate_scm(independent_dag, seed=8)
        assert a != b
        assert any(
            ea.coefficients != eb.coefficients
            for ea, eb in zip(a.equations, b.equations)
        )

    def test_zero_scale_rejected(self, independent_dag):
        with pytest.raises(ScmError, match="scale"):
            generate_scm(independent_dag, seed=7, coefficient_scale=0.0)

    def test_intercept_calibration_centers_binary_nodes(self, independent_dag):
        spec = generate_scm(independent_dag, seed=19)
        data = simulate_dataset(spec, 100_000, seed=2)
        # calibrated intercepts keep prevalences near 1/2
        assert abs(data.exposure.mean() - 0.5) < 0.05
        for k in (1, 2):
            assert abs(data.mediator(k).mean() - 0.5) < 0.05


class TestSimulate:
    def test_column_order_and_shape(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        data = simulate_dataset(spec, 1000, seed=3)
        assert data.column_names == ("L1", "L2", "A", "M1", "M2", "Y")
        assert data.n == 1000
        assert set(np.unique(data.exposure)) <= {0.0, 1.0}

    def test_zero_coefficients_give_half_rates(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        for name in ("A", "M1", "M2"):
            eq = spec.equation(name)
            spec = spec.replaced(
                name, coefficients=(0.0,) * len(eq.parents), intercept=0.0
            )
        n = 100_000
        data = simulate_dataset(spec, n, seed=4)
        sigma3 = 3 * 0.5 / np.sqrt(n)
        assert abs(data.exposure.mean() - 0.5) < sigma3
        assert abs(data.mediator(1).mean() - 0.5) < sigma3

    def test_byte_identical_csv(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        a = simulate_dataset(spec, 100, seed=5).to_csv_text()
        b = simulate_dataset(spec, 100, seed=5).to_csv_text()
        assert a == b

    def test_n_must_be_positive(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        with pytest.raises(ScmError, match="n must be"):
            simulate_dataset(spec, 0, seed=5)

    def test_latent_nodes_generated_but_not_emitted(self):
        dag = parse_dag(
            "node U latent\nnode L covariate\nnode A exposure\nnode M mediator\n"
            "node Y outcome\n"
            "edge U -> A\nedge U -> M\nedge L -> A\nedge L -> Y\n"
            "edge A -> M\nedge A -> Y\nedge M -> Y\n"
        )
        spec = generate_scm(dag, seed=9)
        data = simulate_dataset(spec, 200, seed=1)
        assert data.column_names == ("L", "A", "M", "Y")


class TestOracle:
    def test_decomposition_identity_exact_with_common_noise(self, dependent_dag):
        spec = generate_scm(dependent_dag, seed=13)
        for k in (1, 2, 3):
            eff = oracle_effects(spec, k, 100_000, seed=2)
            scale = 3 * np.sqrt(
                eff.se["te"] ** 2 + eff.se["cde0"] ** 2 + eff.se["scie"] ** 2
            )
            assert abs(eff.decomposition_gap) <= max(scale, 1e-12)
            # common random numbers make the identity hold to roundoff
            assert abs(eff.decomposition_gap) < 1e-10

    def test_averaged_identity(self, dependent_dag):
        spec = generate_scm(dependent_dag, seed=13)
        effects = [oracle_effects(spec, k, 50_000, seed=2) for k in (1, 2, 3)]
        te = effects[0].te
        assert all(abs(e.te - te) < 1e-12 for e in effects)  # same draws, same TE
        avg = np.mean([e.cde0 for e in effects]) + np.mean([e.scie for e in effects])
        assert abs(te - avg) < 1e-10

    def test_scie_component_algebra(self, dependent_dag):
        spec = generate_scm(dependent_dag, seed=13)
        eff = oracle_effects(spec, 2, 50_000, seed=2)
        assembled = eff.delta_c * eff.m0 + eff.delta_m * eff.cie1
        assert abs(assembled - eff.scie_assembled) < 1e-12

    def test_null_mediator(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        eq_y = spec.equation("Y")
        coefs = list(eq_y.coefficients)
        coefs[eq_y.parents.index("M1")] = 0.0
        spec = spec.replaced("Y", coefficients=tuple(coefs))
        eff = oracle_effects(spec, 1, 50_000, seed=2)
        assert abs(eff.cie0) < 1e-12  # exactly zero: the mediator never enters Y
        assert abs(eff.cie1) < 1e-12
        assert abs(eff.scie) < 1e-12

    def test_forcing_matches_natural_on_matching_units(self, dependent_dag):
        # forcing the mediator to the value it would naturally take leaves
        # the outcome untouched, unit by unit
        from medecomp.scm import _draw_noises, _propagate
        from medecomp.seeding import derive_rng

        spec = generate_scm(dependent_dag, seed=13)
        noises = _draw_noises(spec, 5000, derive_rng(99, "check"))
        nat = _propagate(spec, noises, {"A": 1.0})
        for k, med in enumerate(dependent_dag.mediators, start=1):
            for m in (0.0, 1.0):
                forced = _propagate(spec, noises, {"A": 1.0, med: m})
                match = nat[med] == m
                assert np.array_equal(nat["Y"][match], forced["Y"][match])

    def test_mc_errors_shrink_with_draws(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        wins = 0
        for s in range(10):
            small = oracle_effects(spec, 1, 10_000, seed=s)
            large = oracle_effects(spec, 1, 40_000, seed=s)
            if large.se["te"] <= 0.55 * small.se["te"]:
                wins += 1
        assert wins >= 8  # quadrupling draws halves the error, up to noise

    def test_rejects_small_mc(self, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        with pytest.raises(ScmError, match="n_mc"):
            oracle_effects(spec, 1, 5000, seed=2)
        with pytest.raises(ScmError, match="out of range"):
            oracle_effects(spec, 9, 10_000, seed=2)


class TestSerialization:
    def test_text_round_trip(self, dependent_dag):
        spec = generate_scm(dependent_dag, seed=13)
        text = scm_to_text(spec)
        again = scm_from_text(text)
        assert scm_to_text(again) == text
        a = simulate_dataset(spec, 50, seed=8).to_csv_text()
        b = simulate_dataset(again, 50, seed=8).to_csv_text()
        assert a == b

    def test_equation_validation(self, independent_dag):
        with pytest.raises(ScmError, match="coefficients"):
            NodeEquation("X", ("p",), (), intercept=0.0)
        spec = generate_scm(independent_dag, seed=7)
        with pytest.raises(ScmError, match="sigmoid-threshold"):
            ScmSpec(
                independent_dag,
                tuple(
                    eq if eq.name != "A" else NodeEquation(
                        "A", eq.parents, eq.coefficients, eq.intercept, link="identity"
                    )
                    for eq in spec.equations
                ),
                seed=1,
            )
