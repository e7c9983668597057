"""Trait substitution sequence on the mutational time scale.

The resident trait jumps from u to u + h at a rate combining the resident
mutant supply (fertility times equilibrium density), the establishment
probability of the heterozygote lineage (positive part of the invasion
fitness over the heterozygote fertility), and the mutation law. Jumps are
therefore always uphill: every accepted step has positive invasion fitness
against the departed resident.

Near evolutionary singular strategies the substitution picture degrades,
so trajectories stop (enter a cemetery state) once the trait comes within
eta of the singular set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from . import _core
from .canonical import fitness_gradient
from .dynamics import invasion_fitness
from .model import DemographyModel, Genotype


class DegenerateGradientError(RuntimeError):
    """The selection gradient vanishes identically; no isolated roots."""


@dataclass(frozen=True)
class SingularStrategy:
    """A root of the selection gradient g1(u) = d1 S(u; u)."""

    u: float
    kind: str                # ecological | developmental
    gradient_slope: float    # d g1 / du at the root
    degenerate: bool = False  # slope below tolerance (non-hyperbolic)
    boundary: bool = False


@dataclass
class TssState:
    u: float
    t: float = 0.0
    stopped: bool = False
    eta: float = 0.0
    singular_set: list = field(default_factory=list)


def find_singular_strategies(model: DemographyModel,
                             grid_resolution: int = 201,
                             phi_tol: float = 1e-6,
                             slope_tol: float = 1e-8) -> list[SingularStrategy]:
    """Locate the zeros of the selection gradient by bracketing.

    Each root is classified developmental when the phenotype map is
    critical there (|d1 phi(u*, u*)| < phi_tol) and ecological otherwise,
    and flagged degenerate when the gradient's slope through the root is
    below slope_tol (isolation is then not guaranteed).
    """
    lo, hi = model.space.u_min, model.space.u_max
    us = np.linspace(lo, hi, grid_resolution)
    g1 = np.array([fitness_gradient(model, u) for u in us[1:-1]])
    scale = max(1.0, np.max(np.abs(g1)))
    if np.max(np.abs(g1)) < 1e-12:
        raise DegenerateGradientError(
            "selection gradient vanishes on the whole grid")
    roots: list[float] = []
    for a, b, fa, fb in zip(us[1:-2], us[2:-1], g1[:-1], g1[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(brentq(
                lambda u: fitness_gradient(model, u), a, b, xtol=1e-12)))
    if g1[-1] == 0.0:
        roots.append(float(us[-2]))
    out = []
    width = hi - lo
    for u in roots:
        step = 1e-5 * width
        a = max(lo, u - step)
        b = min(hi, u + step)
        slope = (fitness_gradient(model, b) - fitness_gradient(model, a)) / (b - a)
        kind = ("developmental" if abs(model.phi.d1_diagonal(u)) < phi_tol
                else "ecological")
        out.append(SingularStrategy(
            u, kind, slope,
            degenerate=abs(slope) < slope_tol * scale,
            boundary=min(u - lo, hi - u) < 1e-9 * width))
    return out


def jump_rate_density(model: DemographyModel, u_A: float, h: float) -> float:
    """Density in h of the substitution rate out of resident u_A:
    f(u_A,u_A) nbar_AA [S(u_A + h; u_A)]_+ / f(u_A, u_A + h) m_sigma(u_A, h).
    """
    u_new = u_A + h
    if not model.space.contains(u_new):
        return 0.0
    m = model.mutation.pdf(u_A, h)
    if m == 0.0:
        return 0.0
    S = invasion_fitness(model, u_new, u_A)
    if S <= 0.0:
        return 0.0
    f_res = model.fertility_of(Genotype(u_A, u_A))
    f_het = model.fertility_of(Genotype(u_A, u_new))
    if f_het <= 0.0:
        raise ValueError("heterozygote fertility vanished; model violates "
                         "the positivity assumptions")
    return f_res * model.carrying_capacity(u_A) * S / f_het * m


def _positive_part_breakpoints(model, u_A, lo, hi, n=101):
    """Sign-change locations of the fitness along the step support."""
    hs = np.linspace(lo, hi, n)
    Ss = np.array([invasion_fitness(model, u_A + h, u_A) for h in hs])
    pts = []
    for a, b, fa, fb in zip(hs[:-1], hs[1:], Ss[:-1], Ss[1:]):
        if fa * fb < 0.0:
            pts.append(brentq(
                lambda h: invasion_fitness(model, u_A + h, u_A), a, b,
                xtol=1e-13))
    return pts


def total_jump_rate(model: DemographyModel, u_A: float,
                    tol: float = 1e-10) -> float:
    """Total substitution rate: adaptive quadrature of the jump density
    over the admissible step support."""
    lo, hi = model.mutation.support(u_A)
    pts = _positive_part_breakpoints(model, u_A, lo, hi)
    if lo < 0.0 < hi:
        pts.append(0.0)
    val, err = quad(lambda h: jump_rate_density(model, u_A, h), lo, hi,
                    points=sorted(pts) or None, limit=200, epsabs=tol)
    if not math.isfinite(val):
        raise RuntimeError("jump-rate quadrature failed")
    return max(val, 0.0)


def _rejection_envelope(model: DemographyModel, u_A: float) -> float:
    """Upper bound of [S]_+ / f_het over the admissible steps (grid scan
    plus local refinement)."""
    lo, hi = model.mutation.support(u_A)

    def ratio(h):
        S = invasion_fitness(model, u_A + h, u_A)
        if S <= 0.0:
            return 0.0
        return S / model.fertility_of(Genotype(u_A, u_A + h))

    hs = np.linspace(lo, hi, 201)
    vals = np.array([ratio(h) for h in hs])
    i = int(np.argmax(vals))
    a, b = hs[max(0, i - 1)], hs[min(len(hs) - 1, i + 1)]
    res = minimize_scalar(lambda h: -ratio(h), bounds=(a, b), method="bounded")
    best = max(vals[i], -res.fun)
    return best * (1.0 + 1e-9)


def _rejection_step(model: DemographyModel, u_A: float, bound: float,
                    rng: np.random.Generator) -> float:
    for _ in range(1_000_000):
        h = model.sample_mutation_step(u_A, rng)
        S = invasion_fitness(model, u_A + h, u_A)
        if S <= 0.0:
            continue
        ratio = S / model.fertility_of(Genotype(u_A, u_A + h))
        if rng.random() * bound < ratio:
            return h
    raise RuntimeError("rejection sampling failed to accept a step")


def sample_jump(model: DemographyModel, u_A: float,
                rng: np.random.Generator) -> tuple[float, float]:
    """Draw (waiting time, new resident trait) for the next substitution.

    The step is rejection-sampled with the mutation law as proposal and
    the fitness-ratio envelope as bound; acceptance requires positive
    invasion fitness, so degrading steps are never taken.
    """
    total = total_jump_rate(model, u_A)
    if total <= 0.0:
        raise ValueError(f"resident {u_A} is absorbed: total jump rate is zero")
    wait = rng.exponential(1.0 / total)
    bound = _rejection_envelope(model, u_A)
    if bound <= 0.0:
        raise ValueError("positive total rate with empty acceptance region")
    return wait, u_A + _rejection_step(model, u_A, bound, rng)


def sample_steps(model: DemographyModel, u_A: float, n: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Draw n substitution steps at a frozen resident (shared envelope)."""
    bound = _rejection_envelope(model, u_A)
    if bound <= 0.0:
        raise ValueError("no admissible step has positive fitness")
    return np.array([_rejection_step(model, u_A, bound, rng)
                     for _ in range(n)])


@dataclass
class TssTrajectory:
    """Piecewise-constant jump chain: trait traits[i] holds on
    [times[i], times[i+1])."""

    times: np.ndarray
    traits: np.ndarray
    fitness_at_jump: np.ndarray  # S(u_k; u_{k-1}); NaN for the start point
    state: TssState
    absorbed: bool = False

    @property
    def stopped(self) -> bool:
        return self.state.stopped


def simulate_tss(model: DemographyModel, u0: float, horizon: float,
                 eta: float, rng: np.random.Generator,
                 singular_set: list[float] | None = None,
                 max_jumps: int = 1_000_000) -> TssTrajectory:
    """Run the substitution chain until the horizon or the singular set.

    The chain enters the cemetery (stopped flag, frozen trait and time) at
    the first jump landing within eta of a singular strategy; the initial
    trait must start farther than eta from the set.
    """
    if singular_set is None:
        try:
            singular_set = [s.u for s in find_singular_strategies(model)]
        except DegenerateGradientError:
            raise
    dist = (lambda u: min(abs(u - s) for s in singular_set)) \
        if singular_set else (lambda u: math.inf)
    if dist(u0) <= eta:
        raise ValueError("initial trait is already within eta of the "
                         "singular set")
    times = [0.0]
    traits = [u0]
    fits = [math.nan]
    state = TssState(u0, 0.0, False, eta, list(singular_set))
    absorbed = False
    t, u = 0.0, u0
    for _ in range(max_jumps):
        if t >= horizon:
            break
        try:
            wait, u_new = sample_jump(model, u, rng)
        except ValueError:
            absorbed = True
            break
        if t + wait > horizon:
            break
        t += wait
        S = invasion_fitness(model, u_new, u)
        times.append(t)
        traits.append(u_new)
        fits.append(S)
        u = u_new
        state.u, state.t = u, t
        if dist(u) <= eta:
            state.stopped = True
            break
    return TssTrajectory(np.array(times), np.array(traits), np.array(fits),
                         state, absorbed)


def m1_modulus(times, values, delta: float) -> float:
    """Continuity modulus for the M1 topology of a sampled path.

    Supremum over window pairs t1 <= t <= t2 with t2 - t1 <= delta of the
    distance from x(t) to the interval [x(t1), x(t2)]; zero for monotone
    paths. The sampling grid must be finer than delta / 10.
    """
    ts = np.ascontiguousarray(times, dtype=float)
    xs = np.ascontiguousarray(values, dtype=float)
    if len(ts) != len(xs) or len(ts) < 2:
        raise ValueError("need matching time and value arrays")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if np.max(np.diff(ts)) > delta / 10.0:
        raise ValueError("sampling too coarse for this delta "
                         "(need spacing below delta / 10)")
    return float(_core.m1_scan(ts, xs, delta))
