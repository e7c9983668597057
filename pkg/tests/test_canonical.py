import json

import numpy as np
import pytest

from conftest import SCENARIOS, load_fixture, make_model, make_model_from_config

from diplodyn.canonical import (
    canonical_rhs_general,
    canonical_rhs_phenotypic,
    canonical_rhs_symmetric,
    fitness_gradient,
    integrate_canonical,
    phenotypic_variance,
)
from diplodyn.tss import find_singular_strategies


def cubic_phi_model(k=1000):
    cfg = json.loads(json.dumps(SCENARIOS["affine_death"]))
    cfg["phenotype"] = {"family": "cubic", "center": 0.5, "scale": 1.0,
                        "offset": 0.5}
    cfg["death"] = {"family": "affine", "intercept": 1.2, "slope": -0.4}
    return make_model_from_config(cfg, k=k)


class TestFitnessGradient:
    def test_zero_at_singular_strategy(self):
        model = make_model("gaussian")
        assert fitness_gradient(model, 0.15) == pytest.approx(0.0, abs=1e-8)

    def test_zero_for_neutral_constants(self):
        model = make_model("neutral")
        for u in (0.1, 0.5, 0.9):
            assert fitness_gradient(model, u) == pytest.approx(0.0, abs=1e-10)

    def test_matches_regression_fixture(self):
        fx = load_fixture("fitness_gradient.json")
        model = make_model(fx["scenario"])
        for case in fx["cases"]:
            got = fitness_gradient(model, case["u"])
            assert got == pytest.approx(case["slope"], abs=fx["tol"])

    def test_boundary_uses_one_sided_stencil_with_warning(self):
        model = make_model("directional")
        with pytest.warns(UserWarning, match="one-sided"):
            g = fitness_gradient(model, 0.0)
        assert g == pytest.approx(0.25, rel=1e-4)


class TestRighthandSides:
    def test_zero_at_singular_strategy(self):
        model = make_model("gaussian")
        assert canonical_rhs_general(model, 0.15) == pytest.approx(0.0, abs=1e-12)
        assert canonical_rhs_symmetric(model, 0.15) == pytest.approx(0.0, abs=1e-10)

    def test_symmetric_matches_fixture_and_general(self):
        fx = load_fixture("canonical_rhs.json")
        model = make_model(fx["scenario"], sigma=fx["sigma"])
        for case in fx["cases"]:
            sym = canonical_rhs_symmetric(model, case["u"])
            gen = canonical_rhs_general(model, case["u"])
            assert sym == pytest.approx(case["symmetric_rhs"], abs=1e-10)
            assert gen == pytest.approx(case["general_rhs"], abs=1e-10)
            assert gen == pytest.approx(sym, abs=fx["tol_cross"])

    def test_asymmetric_law_beats_symmetric_uphill(self):
        fx = load_fixture("canonical_rhs.json")
        skew = make_model(fx["scenario"], sigma=fx["sigma"],
                          right_mass=2.0 / 3.0)
        for case in fx["cases"]:
            gen = canonical_rhs_general(skew, case["u"])
            assert gen == pytest.approx(case["general_rhs_right_mass_2_3"],
                                        abs=1e-10)
            assert gen > case["symmetric_rhs"]

    def test_sign_follows_gradient_everywhere(self):
        model = make_model("gaussian")
        for u in np.linspace(-0.8, 0.9, 25):
            g1 = fitness_gradient(model, u)
            rhs = canonical_rhs_symmetric(model, u)
            assert np.sign(rhs) == np.sign(g1)


class TestPhenotypicForm:
    def test_zero_at_ecological_singularity(self):
        model = make_model("gaussian")
        U = model.phi.diagonal(0.15)
        assert canonical_rhs_phenotypic(model, U) == pytest.approx(0.0,
                                                                   abs=1e-10)

    def test_zero_at_developmental_constraint_via_variance(self):
        model = cubic_phi_model()
        # d1 phi vanishes at u = 0.5 although the ecological gradient not
        assert phenotypic_variance(model, 0.5) == 0.0
        U = model.phi.diagonal(0.5)
        assert canonical_rhs_phenotypic(model, U) == 0.0

    def test_chain_rule_consistency_with_allelic_form(self):
        for model, us in ((make_model("directional"), (0.3, 0.6)),
                          (cubic_phi_model(), (0.3, 0.8))):
            for u in us:
                du = canonical_rhs_symmetric(model, u)
                dU = canonical_rhs_phenotypic(model, model.phi.diagonal(u))
                lift = 2.0 * model.phi.d1_diagonal(u)
                assert dU == pytest.approx(lift * du, abs=1e-8)

    def test_non_monotone_phenotype_rejected(self):
        model = make_model("developmental")  # quadratic diagonal
        with pytest.raises(ValueError, match="monotone"):
            canonical_rhs_phenotypic(model, 0.3)


class TestIntegration:
    def test_constant_at_singular_start(self):
        model = make_model("gaussian")
        traj = integrate_canonical(model, 0.15, 50.0)
        assert np.max(np.abs(traj.u - 0.15)) < 1e-8

    def test_monotone_approach_to_singularity(self):
        model = make_model("gaussian")
        traj = integrate_canonical(model, 0.7, 5e4)
        assert np.all(np.diff(traj.u) <= 1e-12)
        assert traj.u[-1] == pytest.approx(0.15, abs=1e-3)

    def test_equilibria_match_singular_strategies(self):
        model = make_model("gaussian")
        roots = [s.u for s in find_singular_strategies(model)]
        traj = integrate_canonical(model, 0.6, 3e5, ess_tol=1e-12)
        assert min(abs(traj.u[-1] - r) for r in roots) < 1e-6

    def test_boundary_equilibrium_flagged(self):
        model = make_model("directional")  # uphill everywhere
        traj = integrate_canonical(model, 0.8, 2e5, form="symmetric")
        assert traj.boundary_hit
        assert traj.u[-1] == pytest.approx(1.0, abs=1e-9)

    def test_form_selector_validated(self):
        model = make_model("gaussian")
        with pytest.raises(ValueError, match="form"):
            integrate_canonical(model, 0.3, 1.0, form="bogus")

    def test_uphill_property_along_trajectory(self):
        model = make_model("directional")
        traj = integrate_canonical(model, 0.2, 1e4)
        for u in traj.u[:-1:20]:
            assert fitness_gradient(model, float(u)) > 0.0
        assert np.all(np.diff(traj.u) >= -1e-14)
