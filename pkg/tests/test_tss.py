import math

import numpy as np
import pytest

from conftest import (AD_CRITICAL_1PCT, anderson_darling_statistic,
                      ks_critical, ks_statistic, load_fixture, make_model)

from diplodyn import tss
from diplodyn.canonical import fitness_gradient
from diplodyn.dynamics import invasion_fitness
from diplodyn.tss import (
    DegenerateGradientError,
    find_singular_strategies,
    jump_rate_density,
    m1_modulus,
    sample_jump,
    sample_steps,
    simulate_tss,
    total_jump_rate,
)


class TestJumpDensity:
    def test_matches_fixture_composition(self):
        fx = load_fixture("jump_density.json")
        model = make_model(fx["scenario"])
        for h, expected in zip(fx["h_grid"], fx["density"]):
            got = jump_rate_density(model, fx["uA"], h)
            assert got == pytest.approx(expected, abs=fx["tol"])

    def test_zero_where_fitness_nonpositive(self):
        model = make_model("directional")
        # downhill steps have negative fitness in this scenario
        for h in (-0.04, -0.01, -0.001):
            assert jump_rate_density(model, 0.5, h) == 0.0

    def test_zero_at_zero_step(self):
        model = make_model("directional")
        assert jump_rate_density(model, 0.5, 0.0) == 0.0


class TestTotalRate:
    def test_small_sigma_asymptotics(self):
        fx = load_fixture("jump_asymptotics.json")
        model = make_model(fx["scenario"], sigma=fx["sigma"])
        rate = total_jump_rate(model, fx["u"])
        assert rate == pytest.approx(fx["asymptotic_rate"],
                                     rel=fx["rel_tol"])

    def test_rate_shrinks_with_sigma_near_singularity(self):
        # near an attracting singular strategy the uphill window closes
        u_star = 0.15
        u = u_star + 0.02
        rates = []
        for sigma in (0.05, 0.025):
            model = make_model("gaussian", sigma=sigma)
            rates.append(total_jump_rate(model, u))
        assert rates[1] < rates[0]

    def test_zero_when_no_step_has_positive_fitness(self):
        # narrow niche relative to the carrying-capacity width makes the
        # optimum uninvadable: every step is deleterious and the rate is 0
        from conftest import SCENARIOS, make_model_from_config
        import json
        cfg = json.loads(json.dumps(SCENARIOS["gaussian"]))
        cfg["competition"]["sigma_a"] = 1.2
        cfg["competition"]["sigma_k"] = 0.6
        model = make_model_from_config(cfg)
        assert total_jump_rate(model, 0.15) == pytest.approx(0.0, abs=1e-12)

    def test_matches_fixture_quadrature(self):
        fx = load_fixture("jump_cdf.json")
        model = make_model(fx["scenario"], sigma=fx["sigma"])
        rate = total_jump_rate(model, fx["u"])
        assert rate == pytest.approx(fx["total_rate"], abs=1e-9)


class TestSampleJump:
    def test_seeded_replay(self):
        model = make_model("directional")
        draws = []
        for _ in range(2):
            rng = np.random.default_rng(11)
            draws.append([sample_jump(model, 0.4, rng) for _ in range(5)])
        assert draws[0] == draws[1]

    def test_steps_match_quadrature_cdf(self, rng):
        fx = load_fixture("jump_cdf.json")
        model = make_model(fx["scenario"], sigma=fx["sigma"])
        n = 100_000
        steps = sample_steps(model, fx["u"], n, rng)
        grid = np.array(fx["h_grid"])
        cdf_vals = np.array(fx["cdf"])
        d = ks_statistic(steps, lambda h: np.interp(h, grid, cdf_vals))
        assert d < ks_critical(n, alpha=0.01)

    def test_accepted_jumps_have_positive_fitness(self, rng):
        model = make_model("gaussian")
        u = 0.6
        for _ in range(200):
            _w, u_new = sample_jump(model, u, rng)
            assert invasion_fitness(model, u_new, u) > 0.0

    def test_waits_are_exponential_with_quadrature_rate(self, rng):
        model = make_model("directional")
        u = 0.4
        rate = total_jump_rate(model, u)
        waits = np.array([sample_jump(model, u, rng)[0] for _ in range(1000)])
        a2 = anderson_darling_statistic(
            waits, lambda w: 1.0 - math.exp(-rate * w))
        assert a2 < AD_CRITICAL_1PCT


class TestSimulateTss:
    def test_zero_horizon_single_state(self, rng):
        model = make_model("directional")
        traj = simulate_tss(model, 0.3, 0.0, 0.01, rng, singular_set=[])
        assert len(traj.times) == 1
        assert traj.traits[0] == 0.3
        assert not traj.stopped

    def test_monotone_under_uphill_gradient(self, rng):
        model = make_model("directional", sigma=0.01)
        traj = simulate_tss(model, 0.2, 2e4, 0.01, rng, singular_set=[])
        assert len(traj.times) > 5
        assert np.all(np.diff(traj.traits) > 0.0)

    def test_every_jump_improves_fitness(self, rng):
        model = make_model("gaussian", sigma=0.02)
        traj = simulate_tss(model, 0.7, 5e3, 0.01, rng,
                            singular_set=[0.15])
        assert np.all(traj.fitness_at_jump[1:] > 0.0)
        assert np.all(np.abs(np.diff(traj.traits)) <= 0.02 + 1e-15)

    def test_requires_initial_distance_from_singular_set(self, rng):
        model = make_model("gaussian")
        with pytest.raises(ValueError):
            simulate_tss(model, 0.16, 10.0, 0.05, rng, singular_set=[0.15])

    def test_stops_near_attracting_singularity(self, rng):
        # the chain walks downhill in phenotype distance and freezes
        # within eta + sigma of the singular strategy
        model = make_model("gaussian", sigma=0.05)
        eta = 0.05
        u_star = 0.15
        hits = 0
        total = 200
        for _ in range(total):
            traj = simulate_tss(model, 0.6, 1e5, eta, rng,
                                singular_set=[u_star])
            if traj.stopped and abs(traj.state.u - u_star) <= eta + 0.05:
                hits += 1
        assert hits >= 0.95 * total


class TestSingularStrategies:
    def test_gaussian_scenario_ecological_point(self):
        model = make_model("gaussian")
        found = find_singular_strategies(model)
        assert len(found) == 1
        s = found[0]
        assert s.kind == "ecological"
        assert s.u == pytest.approx(0.15, abs=1e-8)
        assert not s.degenerate and not s.boundary
        assert s.gradient_slope < 0.0  # attracting

    def test_developmental_point_from_phenotype_criticality(self):
        model = make_model("developmental")
        found = find_singular_strategies(model)
        assert any(s.kind == "developmental"
                   and s.u == pytest.approx(0.5, abs=1e-8) for s in found)

    def test_constant_model_is_degenerate(self):
        model = make_model("neutral")
        with pytest.raises(DegenerateGradientError):
            find_singular_strategies(model)


class TestM1Modulus:
    def test_monotone_and_constant_paths_have_zero_modulus(self):
        t = np.linspace(0, 10, 201)
        assert m1_modulus(t, np.sort(np.random.default_rng(3).random(201)),
                          1.0) == 0.0
        assert m1_modulus(t, np.ones(201), 2.0) == 0.0

    def test_against_brute_force_fixture(self):
        fx = load_fixture("m1_modulus.json")
        for case in fx["cases"]:
            got = m1_modulus(np.array(case["t"]), np.array(case["x"]),
                             case["delta"])
            assert got == pytest.approx(case["w"], abs=fx["tol"])

    def test_spike_has_unit_modulus(self):
        fx = load_fixture("m1_modulus.json")
        spike = fx["cases"][0]
        assert spike["w"] == 1.0

    def test_too_coarse_sampling_rejected(self):
        t = np.linspace(0, 10, 11)
        with pytest.raises(ValueError, match="coarse"):
            m1_modulus(t, np.zeros(11), 0.5)
