import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import SCENARIOS, ks_critical, ks_statistic, load_fixture, make_model

from diplodyn.model import (
    ConfigError,
    DomainError,
    GaussianKernelParams,
    Genotype,
    MutationLaw,
    TraitSpace,
    build_model,
    gaussian_competition,
    quadratic_phenotype,
)


def test_trait_space_validation():
    with pytest.raises(ConfigError):
        TraitSpace(1.0, 1.0)
    s = TraitSpace(0.0, 2.0)
    assert s.contains(0.0) and s.contains(2.0) and not s.contains(2.1)


def test_genotype_canonical_and_symmetric():
    assert Genotype(0.9, 0.2) == Genotype(0.2, 0.9)
    assert Genotype(0.9, 0.2).alleles == (0.2, 0.9)
    assert hash(Genotype(0.3, 0.1)) == hash(Genotype(0.1, 0.3))


def test_coefficients_symmetric_under_swap():
    model = make_model("gaussian")
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        a, b = rng.uniform(-1.0, 1.0, size=2)
        g1, g2 = Genotype(a, b), Genotype(b, a)
        # canonical storage makes symmetry structural: identical objects
        assert g1 == g2
        assert model.phenotype(g1) == model.phenotype(g2)
        assert model.fertility_of(g1) == model.fertility_of(g2)
        assert model.death_of(g1) == model.death_of(g2)


def test_phenotype_examples():
    model = make_model("neutral")
    assert model.phenotype(Genotype(0.4, 0.6)) == pytest.approx(0.5, abs=0)
    with pytest.raises(DomainError):
        model.phenotype(Genotype(-0.1, 0.5))


def test_phenotype_local_additivity():
    # for a smooth map the heterozygote sits mid between the homozygotes
    # up to O(zeta^2)
    phi = quadratic_phenotype(center=0.3, scale=2.0, offset=0.1)
    zeta = 1e-3
    for u in (0.1, 0.45, 0.8):
        het = phi(u, u + zeta)
        mid = 0.5 * (phi(u, u) + phi(u + zeta, u + zeta))
        # exact residual here is scale * zeta^2 / 4
        assert abs(het - mid) <= 2.0 * 2.0 * zeta ** 2


def test_gaussian_kernel_against_fixture():
    fx = load_fixture("gaussian_kernel.json")
    p = fx["params"]
    params = GaussianKernelParams(p["r_bar"], p["sigma_a"], p["sigma_k"],
                                  p["phi_0"])
    for pf, po, expected in fx["pairs"]:
        assert gaussian_competition(params, pf, po) == pytest.approx(
            expected, abs=fx["tol"])
    assert gaussian_competition(params, p["phi_0"], p["phi_0"]) == pytest.approx(
        fx["special"]["at_optimum"], abs=0)
    assert gaussian_competition(params, p["phi_0"], p["phi_0"] + p["sigma_a"]) \
        == pytest.approx(fx["special"]["one_sigma_a"], rel=1e-15)


def test_gaussian_kernel_is_not_symmetric_in_arguments():
    p = SCENARIOS["gaussian"]["competition"]
    params = GaussianKernelParams(p["r_bar"], p["sigma_a"], p["sigma_k"],
                                  p["phi_0"])
    assert gaussian_competition(params, 0.4, 0.9) != pytest.approx(
        gaussian_competition(params, 0.9, 0.4), rel=1e-6)


def test_gaussian_kernel_param_validation():
    with pytest.raises(ConfigError):
        GaussianKernelParams(1.0, 0.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        GaussianKernelParams(-1.0, 1.0, 1.0, 0.0)


class TestMutationLaw:
    def test_moments_match_fixture(self):
        fx = load_fixture("mutation_law.json")
        for case in fx["cases"]:
            law = MutationLaw(TraitSpace(case["u_min"], case["u_max"]),
                              case["sigma"], case["right_mass"])
            assert law.mean(case["u"]) == pytest.approx(case["mean"],
                                                        abs=fx["tol"])
            assert law.second_moment(case["u"]) == pytest.approx(
                case["second_moment"], abs=fx["tol"])

    def test_pdf_normalized_even_when_truncated(self):
        law = MutationLaw(TraitSpace(0.0, 1.0), 0.1, 0.5)
        for u in (0.5, 0.97, 1.0):
            lo, hi = law.support(u)
            mass, _ = quad(lambda h: law.pdf(u, h), lo, hi, limit=100)
            assert mass == pytest.approx(1.0, abs=1e-10)

    def test_sampling_support_and_boundary(self, rng):
        model = make_model("neutral")  # sigma = 0.1
        draws = np.array([model.sample_mutation_step(0.5, rng)
                          for _ in range(20_000)])
        assert np.all(np.abs(draws) <= 0.1)
        assert np.all((0.5 + draws >= 0.0) & (0.5 + draws <= 1.0))
        top = np.array([model.sample_mutation_step(1.0, rng)
                        for _ in range(2_000)])
        assert np.all(top <= 0.0)

    def test_sampling_mean_within_three_se(self, rng):
        model = make_model("neutral")
        n = 100_000
        draws = np.array([model.sample_mutation_step(0.5, rng)
                          for _ in range(n)])
        se = math.sqrt(model.mutation.second_moment(0.5) / n)
        assert abs(draws.mean()) < 3.0 * se

    def test_sampling_ks_against_cdf(self, rng):
        model = make_model("neutral", right_mass=2.0 / 3.0)
        law = model.mutation
        n = 100_000
        draws = np.array([law.sample(0.5, rng) for _ in range(n)])
        d = ks_statistic(draws, lambda h: law.cdf(0.5, h))
        assert d < ks_critical(n, alpha=0.01)


def test_bounds_validation_rejects_nonpositive_growth():
    cfg = {
        "trait_space": {"u_min": 0.0, "u_max": 1.0},
        "phenotype": {"family": "mean"},
        "fertility": {"family": "constant", "value": 1.0},
        "death": {"family": "affine", "intercept": 0.5, "slope": 1.0},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.1},
    }
    with pytest.raises(ConfigError, match="positive"):
        build_model(cfg)


def test_bounds_validation_rejects_negative_rates():
    cfg = {
        "trait_space": {"u_min": 0.0, "u_max": 1.0},
        "phenotype": {"family": "mean"},
        "fertility": {"family": "constant", "value": 2.0},
        "death": {"family": "affine", "intercept": 0.1, "slope": -0.5},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.1},
    }
    with pytest.raises(ConfigError):
        build_model(cfg)


def test_unknown_family_reports_field():
    cfg = {
        "trait_space": {"u_min": 0.0, "u_max": 1.0},
        "phenotype": {"family": "nope"},
        "fertility": {"family": "constant", "value": 2.0},
        "death": {"family": "constant", "value": 1.0},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.1},
    }
    with pytest.raises(ConfigError, match="phenotype"):
        build_model(cfg)


def test_model_bounds_are_recorded():
    model = make_model("affine_death")
    b = model.bounds
    assert b.f_max == pytest.approx(2.0)
    assert 0.0 < b.r_min <= 1.5
    assert b.c_min > 0.0
