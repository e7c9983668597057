"""Trait space, genotypes, and the demographic model.

A model bundles the coefficient functions of a diploid single-locus
Lotka-Volterra community: per-capita fertility f, background death rate D,
pairwise competition kernel C (scaled by 1/K), a genotype-to-phenotype map,
and the mutation law of allelic steps. All coefficient functions act on the
allelic traits through the phenotype, so genotype-level evaluations are
symmetric under allele swap by construction.

Every other module evaluates the biology only through this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline


class ConfigError(ValueError):
    """Invalid model configuration (bad family, parameter, or assumption)."""


class DomainError(ValueError):
    """Allelic trait outside the trait space."""


@dataclass(frozen=True)
class TraitSpace:
    """Closed bounded interval of admissible allelic trait values."""

    u_min: float
    u_max: float

    def __post_init__(self):
        if not (self.u_min < self.u_max):
            raise ConfigError(f"empty trait space [{self.u_min}, {self.u_max}]")

    @property
    def width(self) -> float:
        return self.u_max - self.u_min

    def contains(self, u: float) -> bool:
        return self.u_min <= u <= self.u_max

    def require(self, u: float) -> None:
        if not self.contains(u):
            raise DomainError(f"allelic trait {u} outside [{self.u_min}, {self.u_max}]")


@dataclass(frozen=True, order=True)
class Genotype:
    """Unordered pair of allelic traits, stored canonically with u1 <= u2.

    Equality and hashing are order-insensitive because construction sorts
    the pair, so (a, b) and (b, a) are the same genotype.
    """

    u1: float
    u2: float

    def __post_init__(self):
        if self.u2 < self.u1:
            lo, hi = self.u2, self.u1
            object.__setattr__(self, "u1", lo)
            object.__setattr__(self, "u2", hi)

    @property
    def alleles(self) -> tuple[float, float]:
        return (self.u1, self.u2)

    def is_homozygous(self, tol: float = 0.0) -> bool:
        return abs(self.u2 - self.u1) <= tol


# ----------------------------------------------------------------------
# phenotype maps: symmetric functions of the two allelic traits
# ----------------------------------------------------------------------

class PhenotypeMap:
    """Symmetric genotype-to-phenotype map phi(u1, u2) = g((u1 + u2) / 2).

    Routing through the allele mean keeps the map symmetric and smooth for
    every profile g, which is all the supported families need.
    """

    def __init__(self, profile: Callable[[float], float],
                 dprofile: Callable[[float], float]):
        self._g = profile
        self._dg = dprofile

    def __call__(self, u1: float, u2: float) -> float:
        return self._g(0.5 * (u1 + u2))

    def diagonal(self, u: float) -> float:
        """phi(u, u)."""
        return self._g(u)

    def d1_diagonal(self, u: float) -> float:
        """Partial derivative in the first allele evaluated at (u, u)."""
        return 0.5 * self._dg(u)


def mean_phenotype() -> PhenotypeMap:
    return PhenotypeMap(lambda x: x, lambda x: 1.0)


def affine_phenotype(intercept: float, slope: float) -> PhenotypeMap:
    return PhenotypeMap(lambda x: intercept + slope * x, lambda x: slope)


def quadratic_phenotype(center: float, scale: float, offset: float) -> PhenotypeMap:
    return PhenotypeMap(
        lambda x: offset + scale * (x - center) ** 2,
        lambda x: 2.0 * scale * (x - center),
    )


def cubic_phenotype(center: float, scale: float, offset: float) -> PhenotypeMap:
    return PhenotypeMap(
        lambda x: offset + scale * (x - center) ** 3,
        lambda x: 3.0 * scale * (x - center) ** 2,
    )


def spline_phenotype(knots: Sequence[float], values: Sequence[float]) -> PhenotypeMap:
    s = CubicSpline(np.asarray(knots, float), np.asarray(values, float))
    ds = s.derivative()
    return PhenotypeMap(lambda x: float(s(x)), lambda x: float(ds(x)))


# ----------------------------------------------------------------------
# rate functions of the phenotype (fertility and background death)
# ----------------------------------------------------------------------

class RateFunction:
    """Nonnegative scalar function of the phenotype."""

    def __init__(self, fn: Callable[[float], float]):
        self._fn = fn

    def __call__(self, phi: float) -> float:
        return self._fn(phi)


def constant_rate(value: float) -> RateFunction:
    return RateFunction(lambda p: value)


def affine_rate(intercept: float, slope: float) -> RateFunction:
    return RateFunction(lambda p: intercept + slope * p)


def spline_rate(knots: Sequence[float], values: Sequence[float]) -> RateFunction:
    s = CubicSpline(np.asarray(knots, float), np.asarray(values, float))
    return RateFunction(lambda p: float(s(p)))


# ----------------------------------------------------------------------
# competition kernels over (focal, competitor) phenotypes
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianKernelParams:
    """Parameters of the classical Gaussian competition kernel.

    The induced kernel is r_bar * exp(-(pf - po)^2 / (2 sigma_a^2)
    + (pf - phi_0)^2 / (2 sigma_k^2)), with pf the focal and po the
    competitor phenotype. Note the kernel is generally NOT symmetric in
    (focal, competitor): the carrying-capacity term involves only the focal.
    """

    r_bar: float
    sigma_a: float
    sigma_k: float
    phi_0: float

    def __post_init__(self):
        if self.r_bar <= 0.0:
            raise ConfigError("r_bar must be positive")
        if self.sigma_a <= 0.0 or self.sigma_k <= 0.0:
            raise ConfigError("kernel widths must be strictly positive")


def gaussian_competition(params: GaussianKernelParams,
                         phi_focal: float, phi_other: float) -> float:
    """Competition rate felt by the focal phenotype from a competitor."""
    d = phi_focal - phi_other
    e = phi_focal - params.phi_0
    return params.r_bar * math.exp(
        -d * d / (2.0 * params.sigma_a ** 2) + e * e / (2.0 * params.sigma_k ** 2)
    )


class CompetitionKernel:
    """Pairwise competition over (focal, competitor) phenotypes."""

    def __init__(self, fn: Callable[[float, float], float]):
        self._fn = fn

    def __call__(self, phi_focal: float, phi_other: float) -> float:
        return self._fn(phi_focal, phi_other)


def constant_kernel(value: float) -> CompetitionKernel:
    if value <= 0.0:
        raise ConfigError("competition must be bounded away from zero")
    return CompetitionKernel(lambda pf, po: value)


def gaussian_kernel(params: GaussianKernelParams) -> CompetitionKernel:
    return CompetitionKernel(lambda pf, po: gaussian_competition(params, pf, po))


# ----------------------------------------------------------------------
# mutation law
# ----------------------------------------------------------------------

class MutationLaw:
    """Scaled mutation law m_sigma(u, h) = (1/sigma) m(u, h/sigma).

    The base density m is piecewise uniform on [-1, 1] with total mass
    `right_mass` on the positive side; the default 1/2 gives the symmetric
    uniform density. Near a boundary of the trait space the support is
    truncated to keep u + h admissible and the density is renormalized so
    the law stays a probability measure. All draws satisfy |h| <= sigma.
    """

    def __init__(self, space: TraitSpace, sigma: float, right_mass: float = 0.5):
        if sigma <= 0.0:
            raise ConfigError("mutation amplitude sigma must be positive")
        if not (0.0 <= right_mass <= 1.0):
            raise ConfigError("right_mass must lie in [0, 1]")
        self.space = space
        self.sigma = sigma
        self.right_mass = right_mass

    def support(self, u: float) -> tuple[float, float]:
        """Admissible step interval [h_lo, h_hi] for an allele at u."""
        self.space.require(u)
        lo = max(-self.sigma, self.space.u_min - u)
        hi = min(self.sigma, self.space.u_max - u)
        if hi - lo <= 0.0:
            raise RuntimeError("empty mutation support; trait space degenerate")
        return lo, hi

    def _pieces(self, u: float):
        # normalized piecewise-constant density in w = h / sigma
        lo, hi = self.support(u)
        wlo, whi = lo / self.sigma, hi / self.sigma
        p = self.right_mass
        mass = (1.0 - p) * (-wlo) + p * whi
        if mass <= 0.0:
            raise RuntimeError("mutation law has zero admissible mass")
        return wlo, whi, p, mass

    def pdf(self, u: float, h: float) -> float:
        wlo, whi, p, mass = self._pieces(u)
        w = h / self.sigma
        if w < wlo or w > whi:
            return 0.0
        base = (1.0 - p) if w < 0.0 else p
        return base / mass / self.sigma

    def cdf(self, u: float, h: float) -> float:
        wlo, whi, p, mass = self._pieces(u)
        w = min(max(h / self.sigma, wlo), whi)
        if w <= 0.0:
            acc = (1.0 - p) * (w - wlo)
        else:
            acc = (1.0 - p) * (-wlo) + p * w
        return acc / mass

    def mean(self, u: float) -> float:
        wlo, whi, p, mass = self._pieces(u)
        m1 = (-(1.0 - p) * wlo * wlo + p * whi * whi) / (2.0 * mass)
        return m1 * self.sigma

    def second_moment(self, u: float) -> float:
        """Second moment about zero of m_sigma(u, .); the mutational variance
        for the symmetric untruncated law."""
        wlo, whi, p, mass = self._pieces(u)
        m2 = ((1.0 - p) * (-wlo) ** 3 + p * whi ** 3) / (3.0 * mass)
        return m2 * self.sigma * self.sigma

    def sample(self, u: float, rng: np.random.Generator) -> float:
        wlo, whi, p, mass = self._pieces(u)
        v = rng.random() * mass
        left = (1.0 - p) * (-wlo)
        if v < left and p < 1.0:
            w = wlo + v / (1.0 - p)
        else:
            w = (v - left) / p if p > 0.0 else 0.0
        return w * self.sigma


# ----------------------------------------------------------------------
# the assembled model
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ModelBounds:
    """Coefficient bounds measured on a dense grid at load time."""

    f_max: float
    d_max: float
    c_max: float
    c_min: float
    r_min: float


@dataclass(frozen=True)
class DemographyModel:
    """Immutable bundle of all demographic coefficient functions.

    Attributes:
        space: admissible allelic trait interval.
        phi: genotype-to-phenotype map.
        fertility: per-capita birth rate as a function of the phenotype.
        base_death: background death rate as a function of the phenotype.
        competition: pairwise kernel over (focal, competitor) phenotypes;
            the realized rate between individuals is C/K.
        mutation: allelic step law (carries sigma and boundary truncation).
        mu_k: mutation probability per birth, genotype-independent.
        k: system size scaling the competition strength.
        bounds: load-time coefficient bounds (validates A-type assumptions).

    Instances are immutable and safe to share across threads; all sampling
    takes an externally supplied RNG.
    """

    space: TraitSpace
    phi: PhenotypeMap
    fertility: RateFunction
    base_death: RateFunction
    competition: CompetitionKernel
    mutation: MutationLaw
    mu_k: float
    k: int
    bounds: ModelBounds = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not (0.0 <= self.mu_k <= 1.0):
            raise ConfigError(f"mu_k must lie in [0, 1], got {self.mu_k}")
        if self.k < 1:
            raise ConfigError("system size K must be a positive integer")
        if self.bounds is None:
            object.__setattr__(self, "bounds", self._validate())

    def _validate(self, n_grid: int = 61) -> ModelBounds:
        us = np.linspace(self.space.u_min, self.space.u_max, n_grid)
        f_max = d_max = c_max = -math.inf
        c_min = r_min = math.inf
        phis = [self.phi(a, b) for a in us for b in us if a <= b]
        for p in phis:
            fv, dv = self.fertility(p), self.base_death(p)
            if fv < 0.0 or dv < 0.0:
                raise ConfigError("fertility and death rates must be nonnegative")
            f_max = max(f_max, fv)
            d_max = max(d_max, dv)
            r_min = min(r_min, fv - dv)
        # competition scanned on a coarser phenotype product grid
        sub = phis[:: max(1, len(phis) // 60)]
        for pf in sub:
            for po in sub:
                cv = self.competition(pf, po)
                c_max = max(c_max, cv)
                c_min = min(c_min, cv)
        if r_min <= 0.0:
            raise ConfigError(
                f"growth rate f - D must stay positive; sampled minimum {r_min:.3g}")
        if c_min <= 0.0:
            raise ConfigError("competition kernel must be bounded away from zero")
        return ModelBounds(f_max, d_max, c_max, c_min, r_min)

    @property
    def sigma(self) -> float:
        return self.mutation.sigma

    def with_k(self, k: int) -> "DemographyModel":
        """The same model at a different system size (bounds are reused)."""
        return DemographyModel(self.space, self.phi, self.fertility,
                               self.base_death, self.competition,
                               self.mutation, self.mu_k, int(k), self.bounds)

    # genotype-level evaluations -------------------------------------

    def phenotype(self, g: Genotype) -> float:
        self.space.require(g.u1)
        self.space.require(g.u2)
        return self.phi(g.u1, g.u2)

    def fertility_of(self, g: Genotype) -> float:
        return self.fertility(self.phenotype(g))

    def death_of(self, g: Genotype) -> float:
        return self.base_death(self.phenotype(g))

    def competition_between(self, focal: Genotype, other: Genotype) -> float:
        return self.competition(self.phenotype(focal), self.phenotype(other))

    def growth_rate(self, g: Genotype) -> float:
        p = self.phenotype(g)
        return self.fertility(p) - self.base_death(p)

    def carrying_capacity(self, u: float) -> float:
        """Monomorphic equilibrium density (f - D) / C at genotype (u, u)."""
        g = Genotype(u, u)
        p = self.phenotype(g)
        c = self.competition(p, p)
        if c <= 0.0:
            raise ConfigError("competition vanished at a monomorphic state")
        return (self.fertility(p) - self.base_death(p)) / c

    def sample_mutation_step(self, u: float, rng: np.random.Generator) -> float:
        """Draw an allelic step h with u + h admissible and |h| <= sigma."""
        return self.mutation.sample(u, rng)


_PHENOTYPE_FAMILIES = {
    "mean": lambda cfg: mean_phenotype(),
    "affine": lambda cfg: affine_phenotype(cfg["intercept"], cfg["slope"]),
    "quadratic": lambda cfg: quadratic_phenotype(cfg["center"], cfg["scale"], cfg["offset"]),
    "cubic": lambda cfg: cubic_phenotype(cfg["center"], cfg["scale"], cfg["offset"]),
    "spline": lambda cfg: spline_phenotype(cfg["knots"], cfg["values"]),
}

_RATE_FAMILIES = {
    "constant": lambda cfg: constant_rate(cfg["value"]),
    "affine": lambda cfg: affine_rate(cfg["intercept"], cfg["slope"]),
    "spline": lambda cfg: spline_rate(cfg["knots"], cfg["values"]),
}


def _build_kernel(cfg: dict) -> CompetitionKernel:
    fam = cfg.get("family")
    if fam == "constant":
        return constant_kernel(cfg["value"])
    if fam == "gaussian":
        return gaussian_kernel(GaussianKernelParams(
            cfg["r_bar"], cfg["sigma_a"], cfg["sigma_k"], cfg["phi_0"]))
    raise ConfigError(f"unknown competition family {fam!r}")


def _build_family(table: dict, cfg: dict, what: str):
    fam = cfg.get("family")
    if fam not in table:
        raise ConfigError(f"unknown {what} family {fam!r}")
    try:
        return table[fam](cfg)
    except KeyError as exc:
        raise ConfigError(f"{what} family {fam!r} missing parameter {exc}") from exc


def build_model(cfg: dict) -> DemographyModel:
    """Assemble and validate a DemographyModel from a nested config dict.

    Expected sections: trait_space, phenotype, fertility, death,
    competition, mutation, and optionally population (K). Functions are
    restricted to named parametric families so configurations stay
    reproducible.
    """
    try:
        ts = cfg["trait_space"]
        space = TraitSpace(float(ts["u_min"]), float(ts["u_max"]))
        phi = _build_family(_PHENOTYPE_FAMILIES, cfg["phenotype"], "phenotype")
        fert = _build_family(_RATE_FAMILIES, cfg["fertility"], "fertility")
        death = _build_family(_RATE_FAMILIES, cfg["death"], "death")
        comp = _build_kernel(cfg["competition"])
        mcfg = cfg["mutation"]
        law = MutationLaw(space, float(mcfg["sigma"]),
                          float(mcfg.get("right_mass", 0.5)))
        mu_k = float(mcfg.get("mu_k", 0.0))
        k = int(cfg.get("population", {}).get("k", 1))
    except KeyError as exc:
        raise ConfigError(f"missing configuration section or key: {exc}") from exc
    return DemographyModel(space, phi, fert, death, comp, law, mu_k, k)
