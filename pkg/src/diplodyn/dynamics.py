"""Deterministic limits: logistic growth and the three-genotype flow.

The large-population limit of a dimorphic population follows a cubic-ish
vector field on the (AA, Aa, aa) densities built from Mendelian birth
rates and competitive death rates. This module evaluates that field, its
equilibria and spectra, the invasion fitness, the Hardy-Weinberg change of
coordinates, and integrates the flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import DemographyModel, Genotype

AA, Aa, aa = 0, 1, 2


class IntegrationError(RuntimeError):
    """The adaptive integrator failed (stiffness or step underflow)."""


def logistic_rhs(n: float, f: float, D: float, C: float) -> float:
    """Monomorphic logistic drift n (f - D - C n)."""
    if C <= 0.0:
        raise ValueError("competition coefficient must be positive")
    return n * (f - D - C * n)


def carrying_capacity(f: float, D: float, C: float) -> float:
    if C <= 0.0:
        raise ValueError("competition coefficient must be positive")
    return (f - D) / C


@dataclass(frozen=True, eq=False)
class DimorphicModel:
    """The nine demographic constants of a two-allele population.

    Index order is (AA, Aa, aa); c[i, j] is the competition felt by
    genotype i from genotype j. w_phi holds the three phenotypes.
    """

    u_A: float
    u_a: float
    f: np.ndarray
    d: np.ndarray
    c: np.ndarray
    w_phi: np.ndarray

    @classmethod
    def from_model(cls, model: DemographyModel, u_A: float,
                   u_a: float) -> "DimorphicModel":
        gs = [Genotype(u_A, u_A), Genotype(u_A, u_a), Genotype(u_a, u_a)]
        return cls(
            u_A, u_a,
            np.array([model.fertility_of(g) for g in gs]),
            np.array([model.death_of(g) for g in gs]),
            np.array([[model.competition_between(gi, gj) for gj in gs]
                      for gi in gs]),
            np.array([model.phenotype(g) for g in gs]),
        )

    @property
    def zeta(self) -> float:
        return self.u_a - self.u_A

    @property
    def n_bar_AA(self) -> float:
        return (self.f[AA] - self.d[AA]) / self.c[AA, AA]

    @property
    def n_bar_aa(self) -> float:
        return (self.f[aa] - self.d[aa]) / self.c[aa, aa]

    def swapped(self) -> "DimorphicModel":
        """The same population seen with the alleles exchanged."""
        perm = [aa, Aa, AA]
        return DimorphicModel(
            self.u_a, self.u_A,
            self.f[perm], self.d[perm],
            self.c[np.ix_(perm, perm)], self.w_phi[perm])


def constant_dimorphic(f: float, d0: float, d1: float) -> DimorphicModel:
    """Neutral constants: equal fertility f, death d0, competition d1."""
    return DimorphicModel(0.0, 0.0, np.full(3, f), np.full(3, d0),
                          np.full((3, 3), d1), np.zeros(3))


def genotype_rhs(state: np.ndarray, dm: DimorphicModel) -> np.ndarray:
    """Time derivative of the (AA, Aa, aa) densities.

    Births follow the Mendelian gamete pairing written with the squared
    fertility-weighted gamete pools over the total pool; deaths are the
    background rate plus the density-weighted competition load. The zero
    state maps to the zero vector.
    """
    x, y, z = state
    n = x + y + z
    if n <= 0.0:
        return np.zeros(3)
    f, d, c = dm.f, dm.d, dm.c
    pool = f[AA] * x + f[Aa] * y + f[aa] * z
    gA = f[AA] * x + 0.5 * f[Aa] * y
    ga = f[aa] * z + 0.5 * f[Aa] * y
    births = np.array([gA * gA, 2.0 * gA * ga, ga * ga]) / pool
    dens = np.array([x, y, z])
    deaths = (d + c @ dens) * dens
    return births - deaths


def invasion_fitness(model: DemographyModel, u_a: float, u_A: float) -> float:
    """Initial growth rate S(u_a; u_A) of rare Aa mutants in an AA
    resident at its carrying capacity."""
    het = Genotype(u_A, u_a)
    hom = Genotype(u_A, u_A)
    return (model.fertility_of(het) - model.death_of(het)
            - model.competition_between(het, hom) * model.carrying_capacity(u_A))


def fitness_from_dimorphic(dm: DimorphicModel) -> float:
    return dm.f[Aa] - dm.d[Aa] - dm.c[Aa, AA] * dm.n_bar_AA


def jacobian_spectrum_at_AA(dm: DimorphicModel) -> tuple[float, float, float]:
    """Closed-form eigenvalues of the Jacobian at the AA equilibrium:
    (-f_AA + D_AA, -C_aa,AA nbar_AA - D_aa, S_Aa,AA)."""
    return (
        -dm.f[AA] + dm.d[AA],
        -dm.c[aa, AA] * dm.n_bar_AA - dm.d[aa],
        fitness_from_dimorphic(dm),
    )


def jacobian_spectrum_at_aa(dm: DimorphicModel) -> tuple[float, float, float]:
    return jacobian_spectrum_at_AA(dm.swapped())


def numerical_jacobian(fun, x: np.ndarray, h: float = 1e-7) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.size
    J = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2.0 * h)
    return J


# ----------------------------------------------------------------------
# Hardy-Weinberg coordinates (n, p, h)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class NphCoordinates:
    """Total density n, A-allele frequency p, excess heterozygosity h."""

    n: float
    p: float
    h: float


def to_nph(state) -> NphCoordinates:
    x, y, z = state
    n = x + y + z
    if n <= 0.0:
        raise ValueError("coordinates undefined at zero total density")
    p = (x + 0.5 * y) / n
    return NphCoordinates(n, p, y / n - 2.0 * p * (1.0 - p))


def from_nph(c: NphCoordinates) -> np.ndarray:
    y = c.n * (c.h + 2.0 * c.p * (1.0 - c.p))
    x = c.n * c.p - 0.5 * y
    return np.array([x, y, c.n - x - y])


def nph_series(states: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized coordinate change along a trajectory (rows = states)."""
    n = states.sum(axis=1)
    if np.any(n <= 0.0):
        raise ValueError("coordinates undefined at zero total density")
    p = (states[:, AA] + 0.5 * states[:, Aa]) / n
    h = states[:, Aa] / n - 2.0 * p * (1.0 - p)
    return n, p, h


# ----------------------------------------------------------------------
# flow integration
# ----------------------------------------------------------------------

@dataclass
class FlowTrajectory:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), 3)
    fixed_point_reached: bool = False


def integrate_flow(d0, dm: DimorphicModel, horizon: float,
                   tol: float = 1e-9, dt_record: float = 0.1,
                   stop_at_fixed_point: bool = False,
                   fixed_point_tol: float = 1e-9) -> FlowTrajectory:
    """Integrate the three-genotype flow from a nonnegative start.

    Uses an adaptive embedded Runge-Kutta pair with relative tolerance
    tol. Tiny negative excursions (within tol) are clamped to exact zero;
    with stop_at_fixed_point the run ends once the field norm stays below
    fixed_point_tol and the state is stable over one time unit.
    """
    y0 = np.asarray(d0, dtype=float)
    if np.any(y0 < 0.0):
        raise ValueError("start must lie in the closed positive octant")
    if horizon <= 0.0:
        return FlowTrajectory(np.array([0.0]), y0[None, :].copy())

    def rhs(_t, y):
        return genotype_rhs(y, dm)

    def clamp(arr):
        out = np.array(arr, dtype=float)
        bad = out < -max(tol, 1e-12)
        if np.any(bad):
            raise IntegrationError("negative density beyond tolerance")
        out[(out < 0.0)] = 0.0
        return out

    atol = min(tol * 1e-3, 1e-12)
    if not stop_at_fixed_point:
        n_eval = int(math.floor(horizon / dt_record)) + 1
        t_eval = dt_record * np.arange(n_eval)
        if t_eval[-1] < horizon:
            t_eval = np.append(t_eval, horizon)
        sol = solve_ivp(rhs, (0.0, horizon), y0, method="RK45",
                        rtol=tol, atol=atol, t_eval=t_eval)
        if not sol.success:
            raise IntegrationError(sol.message)
        return FlowTrajectory(sol.t, clamp(sol.y.T))

    ts = [0.0]
    ys = [y0.copy()]
    t = 0.0
    y = y0.copy()
    reached = False
    while t < horizon:
        chunk = min(1.0, horizon - t)
        n_eval = max(2, int(round(chunk / dt_record)) + 1)
        t_eval = t + np.linspace(0.0, chunk, n_eval)
        sol = solve_ivp(rhs, (t, t + chunk), y, method="RK45",
                        rtol=tol, atol=atol, t_eval=t_eval)
        if not sol.success:
            raise IntegrationError(sol.message)
        ts.extend(sol.t[1:])
        block = clamp(sol.y.T)
        ys.extend(block[1:])
        y_prev, y = y, block[-1]
        t += chunk
        if (np.linalg.norm(genotype_rhs(y, dm)) < fixed_point_tol
                and np.max(np.abs(y - y_prev)) < fixed_point_tol):
            reached = True
            break
    return FlowTrajectory(np.array(ts), np.vstack(ys), reached)


def average_phenotype_series(states: np.ndarray,
                             weights: np.ndarray) -> np.ndarray:
    """Density-weighted mean phenotype <M(t), W> / <M(t), 1> along a
    trajectory; errors out if the total density vanishes anywhere."""
    states = np.asarray(states, dtype=float)
    tot = states.sum(axis=1)
    if np.any(tot <= 0.0):
        raise ValueError("mean phenotype undefined at zero total density")
    return (states @ np.asarray(weights, dtype=float)) / tot
