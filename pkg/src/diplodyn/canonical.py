"""Canonical equation of adaptive dynamics in three equivalent forms.

The general form integrates the truncated first moment of the mutation law
against the linearized fitness advantage; for a symmetric law it reduces
to one half of the mutational variance times the fitness gradient, and the
latter lifts to phenotype space through the genotype-to-phenotype map.

The fertility factor of the general display is kept in the symmetric and
phenotypic reductions as well, so the three forms agree with each other
wherever their hypotheses overlap; the lift convention between allelic and
phenotypic mutational variance is an explicit parameter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .dynamics import invasion_fitness
from .model import DemographyModel


class QuadratureError(RuntimeError):
    pass


def fitness_gradient(model: DemographyModel, u: float,
                     rel_step: float = 1e-6) -> float:
    """Selection gradient: derivative of S(u + h; u) in h at h = 0.

    Central difference with one Richardson extrapolation step. At the
    boundary of the trait space the difference falls back to a one-sided
    stencil and emits a warning.
    """
    w = model.space.width
    step = rel_step * w
    lo, hi = model.space.u_min, model.space.u_max

    def S(h):
        return invasion_fitness(model, u + h, u)

    if u - step < lo or u + step > hi:
        warnings.warn("one-sided fitness gradient at the trait-space boundary")
        if u - step < lo:
            return (S(step) - S(0.0)) / step
        return (S(0.0) - S(-step)) / step

    def central(h):
        return (S(h) - S(-h)) / (2.0 * h)

    d1 = central(step)
    d2 = central(0.5 * step)
    return (4.0 * d2 - d1) / 3.0


def phenotypic_fitness(model: DemographyModel, phi_mutant: float,
                       phi_resident: float) -> float:
    """Ecological fitness component evaluated directly on phenotypes."""
    f, D, C = model.fertility, model.base_death, model.competition
    nbar = (f(phi_resident) - D(phi_resident)) / C(phi_resident, phi_resident)
    return f(phi_mutant) - D(phi_mutant) - C(phi_mutant, phi_resident) * nbar


def phenotypic_fitness_gradient(model: DemographyModel, phi: float,
                                step: float = 1e-6) -> float:
    up = phenotypic_fitness(model, phi + step, phi)
    dn = phenotypic_fitness(model, phi - step, phi)
    return (up - dn) / (2.0 * step)


def canonical_rhs_general(model: DemographyModel, u: float) -> float:
    """Trait drift f(u,u) nbar(u) * int h [h dS]_+ m_sigma(u, h) dh."""
    g1 = fitness_gradient(model, u)
    nbar = model.carrying_capacity(u)
    f0 = model.fertility(model.phi.diagonal(u))
    law = model.mutation
    lo, hi = law.support(u)

    def integrand(h):
        return h * max(h * g1, 0.0) * law.pdf(u, h)

    pts = [0.0] if lo < 0.0 < hi else None
    val, err = quad(integrand, lo, hi, points=pts, limit=200, epsabs=1e-14)
    if not math.isfinite(val):
        raise QuadratureError("canonical drift integral failed")
    return f0 * nbar * val


def canonical_rhs_symmetric(model: DemographyModel, u: float) -> float:
    """Symmetric-law reduction (1/2) f nbar V_a dS with V_a the allelic
    mutational variance of the scaled law."""
    g1 = fitness_gradient(model, u)
    nbar = model.carrying_capacity(u)
    f0 = model.fertility(model.phi.diagonal(u))
    va = model.mutation.second_moment(u)
    return 0.5 * f0 * nbar * va * g1


def _invert_diagonal_phenotype(model: DemographyModel, U: float) -> float:
    lo, hi = model.space.u_min, model.space.u_max
    grid = np.linspace(lo, hi, 41)
    diag = np.array([model.phi.diagonal(u) for u in grid])
    d = np.diff(diag)
    if not (np.all(d > 0.0) or np.all(d < 0.0)):
        raise ValueError("diagonal phenotype map is not strictly monotone")
    a, b = min(diag[0], diag[-1]), max(diag[0], diag[-1])
    if not (a <= U <= b):
        raise ValueError(f"phenotype {U} outside the diagonal range [{a}, {b}]")
    return brentq(lambda u: model.phi.diagonal(u) - U, lo, hi, xtol=1e-14)


def phenotypic_variance(model: DemographyModel, u: float,
                        het_convention: float = 1.0) -> float:
    """Phenotypic mutational variance V_p = (2 d1_phi)^2 V_a / 4 * kappa.

    A substitution moves the diagonal phenotype by twice the heterozygote
    offset, hence the factor (2 d1_phi); kappa is the declared
    heterozygote-to-homozygote convention (default 1).
    """
    dphi = model.phi.d1_diagonal(u)
    va = model.mutation.second_moment(u)
    return (2.0 * dphi) ** 2 * va / 4.0 * het_convention


def canonical_rhs_phenotypic(model: DemographyModel, U: float,
                             het_convention: float = 1.0) -> float:
    """Phenotype-level drift f nbar V_p dS_tilde at the diagonal state U.

    Requires u -> phi(u, u) strictly monotone (checked on inversion).
    Developmental constraints enter through V_p vanishing where the
    phenotype map is critical.
    """
    u = _invert_diagonal_phenotype(model, U)
    vp = phenotypic_variance(model, u, het_convention)
    if vp == 0.0:
        return 0.0
    f0 = model.fertility(U)
    D0 = model.base_death(U)
    nbar = (f0 - D0) / model.competition(U, U)
    return f0 * nbar * vp * phenotypic_fitness_gradient(model, U)


_FORMS = {
    "general": canonical_rhs_general,
    "symmetric": canonical_rhs_symmetric,
    "phenotypic": canonical_rhs_phenotypic,
}


@dataclass
class CanonicalTrajectory:
    t: np.ndarray
    u: np.ndarray
    form: str
    ess_reached: bool = False
    boundary_hit: bool = False


def integrate_canonical(model: DemographyModel, u0: float, horizon: float,
                        form: str = "symmetric", rtol: float = 1e-10,
                        dt_record: float = None,
                        ess_tol: float = 1e-10) -> CanonicalTrajectory:
    """Integrate the chosen canonical form from an interior start.

    Stops early when the drift magnitude falls below ess_tol (a singular
    strategy is reached) or when the state hits the boundary of its
    domain, which is reported as a boundary equilibrium.
    """
    if form not in _FORMS:
        raise ValueError(f"unknown canonical form {form!r}; "
                         f"expected one of {sorted(_FORMS)}")
    rhs_of = _FORMS[form]
    if form == "phenotypic":
        lo = model.phi.diagonal(model.space.u_min)
        hi = model.phi.diagonal(model.space.u_max)
        lo, hi = min(lo, hi), max(lo, hi)
    else:
        lo, hi = model.space.u_min, model.space.u_max
    pad = 1e-12 * (hi - lo)

    def rhs(_t, y):
        x = min(max(y[0], lo + pad), hi - pad)
        return [rhs_of(model, x)]

    def ess_event(_t, y):
        return abs(rhs(_t, y)[0]) - ess_tol

    ess_event.terminal = True

    def lo_event(_t, y):
        return y[0] - (lo + pad)

    def hi_event(_t, y):
        return y[0] - (hi - pad)

    lo_event.terminal = hi_event.terminal = True

    if dt_record is None:
        dt_record = horizon / 200.0 if horizon > 0 else 1.0
    n_eval = int(math.floor(horizon / dt_record)) + 1 if horizon > 0 else 1
    t_eval = np.unique(np.append(dt_record * np.arange(n_eval), horizon))
    sol = solve_ivp(rhs, (0.0, horizon), [u0], method="RK45",
                    rtol=rtol, atol=1e-13, t_eval=t_eval,
                    events=[ess_event, lo_event, hi_event])
    if not sol.success and sol.status != 1:
        raise RuntimeError(f"canonical integration failed: {sol.message}")
    t = sol.t
    u = sol.y[0]
    ess = len(sol.t_events[0]) > 0
    boundary = len(sol.t_events[1]) > 0 or len(sol.t_events[2]) > 0
    if sol.status == 1:  # append the event point
        t = np.append(t, sol.t_events[0 if ess else (1 if len(sol.t_events[1]) else 2)])
        u = np.append(u, np.clip(sol.y_events[0][0] if ess else
                                 (sol.y_events[1][0] if len(sol.t_events[1])
                                  else sol.y_events[2][0]), lo, hi))
    return CanonicalTrajectory(t, u, form, ess, boundary)
