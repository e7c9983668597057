import json
import math
from pathlib import Path

import numpy as np
import pytest

from diplodyn.scenario import scenario_from_dict

FIXTURES = Path(__file__).parent / "fixtures"

# mirrors tools/gen_fixtures.py; the fixtures reference these by name
SCENARIOS = {
    "neutral": {
        "trait_space": {"u_min": 0.0, "u_max": 1.0},
        "phenotype": {"family": "mean"},
        "fertility": {"family": "constant", "value": 2.0},
        "death": {"family": "constant", "value": 1.0},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.1, "mu_k": 0.0, "right_mass": 0.5},
    },
    "affine_death": {
        "trait_space": {"u_min": 0.0, "u_max": 1.0},
        "phenotype": {"family": "mean"},
        "fertility": {"family": "constant", "value": 2.0},
        "death": {"family": "affine", "intercept": 1.5, "slope": -1.0},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.05, "mu_k": 0.0, "right_mass": 0.5},
    },
    "directional": {
        "trait_space": {"u_min": 0.0, "u_max": 1.0},
        "phenotype": {"family": "mean"},
        "fertility": {"family": "constant", "value": 1.0},
        "death": {"family": "affine", "intercept": 0.75, "slope": -0.5},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.05, "mu_k": 0.0, "right_mass": 0.5},
    },
    "gaussian": {
        "trait_space": {"u_min": -1.0, "u_max": 1.0},
        "phenotype": {"family": "mean"},
        "fertility": {"family": "constant", "value": 2.0},
        "death": {"family": "constant", "value": 1.0},
        "competition": {
            "family": "gaussian",
            "r_bar": 1.0,
            "sigma_a": 0.7,
            "sigma_k": 1.1,
            "phi_0": 0.15,
        },
        "mutation": {"sigma": 0.05, "mu_k": 0.0, "right_mass": 0.5},
    },
    "developmental": {
        "trait_space": {"u_min": 0.0, "u_max": 1.0},
        "phenotype": {"family": "quadratic", "center": 0.5, "scale": 1.0,
                      "offset": 0.2},
        "fertility": {"family": "constant", "value": 2.0},
        "death": {"family": "affine", "intercept": 1.2, "slope": -0.4},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.05, "mu_k": 0.0, "right_mass": 0.5},
    },
}


def load_fixture(name: str) -> dict:
    with open(FIXTURES / name) as fh:
        return json.load(fh)


def make_model(name: str, k: int = 1000, **mutation_overrides):
    cfg = json.loads(json.dumps(SCENARIOS[name]))  # deep copy
    cfg["population"] = {"k": k}
    cfg["mutation"].update(mutation_overrides)
    return scenario_from_dict(cfg).model


def make_model_from_config(cfg: dict, k: int = 1000):
    cfg = json.loads(json.dumps(cfg))
    cfg["population"] = {"k": k}
    return scenario_from_dict(cfg).model


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance against a fully specified CDF."""
    xs = np.sort(samples)
    n = len(xs)
    F = np.array([cdf(x) for x in xs])
    up = np.max(np.arange(1, n + 1) / n - F)
    dn = np.max(F - np.arange(0, n) / n)
    return max(up, dn)


def ks_critical(n: int, alpha: float = 0.01) -> float:
    # asymptotic critical value for a fully specified null
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def anderson_darling_statistic(samples: np.ndarray, cdf) -> float:
    """A^2 against a fully specified continuous CDF."""
    xs = np.sort(samples)
    n = len(xs)
    F = np.clip(np.array([cdf(x) for x in xs]), 1e-15, 1.0 - 1e-15)
    i = np.arange(1, n + 1)
    return float(-n - np.mean((2 * i - 1) * (np.log(F) + np.log(1.0 - F[::-1]))))


# 1% significance point of A^2 for a fully specified null
AD_CRITICAL_1PCT = 3.857
