"""Mutant-lineage branching approximation and invasion experiments.

While mutants are rare against an equilibrated resident, the (Aa, aa)
counts evolve like a bi-type linear birth-death process; its extinction
probabilities solve a quadratic ODE system whose stable fixed point gives
the establishment probability [S]_+ / f_Aa. This module exposes the
formula, the ODE system, exact simulation of the branching chain, and
full individual-based invasion experiments with their phase structure.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import _core, ibm
from .dynamics import AA, Aa, aa, DimorphicModel, fitness_from_dimorphic
from .model import DemographyModel, Genotype


@dataclass(frozen=True)
class BranchingSpec:
    """Linear rates of the rare-mutant (Aa, aa) approximation at the
    reference (vanishing mutant density) limit.

    Aa individuals are born at rate birth_y * y + birth_z * z; aa births
    vanish in this limit. Deaths are death_y * y and death_z * z with the
    competitive pressure of the resident equilibrium folded in.
    """

    birth_y: float
    birth_z: float
    death_y: float
    death_z: float

    def __post_init__(self):
        if min(self.birth_y, self.birth_z, self.death_y, self.death_z) < 0.0:
            raise ValueError("branching rates must be nonnegative")

    @classmethod
    def from_dimorphic(cls, dm: DimorphicModel) -> "BranchingSpec":
        nbar = dm.n_bar_AA
        return cls(
            birth_y=dm.f[Aa],
            birth_z=2.0 * dm.f[aa],
            death_y=dm.d[Aa] + dm.c[Aa, AA] * nbar,
            death_z=dm.d[aa] + dm.c[aa, AA] * nbar,
        )


@dataclass
class ExtinctionState:
    """Extinction probabilities by the current time for one Aa or one aa
    founder."""

    q1: float
    q2: float


def survival_probability(dm: DimorphicModel) -> float:
    """Establishment probability [S_Aa,AA]_+ / f_Aa of a single mutant."""
    if dm.f[Aa] <= 0.0:
        raise ValueError("heterozygote fertility must be positive")
    return max(fitness_from_dimorphic(dm), 0.0) / dm.f[Aa]


def extinction_ode_rhs(q, dm: DimorphicModel) -> tuple[float, float]:
    """Quadratic vector field governing the extinction probabilities."""
    spec = BranchingSpec.from_dimorphic(dm)
    q1, q2 = (q.q1, q.q2) if isinstance(q, ExtinctionState) else (q[0], q[1])
    by, bz = spec.birth_y, spec.birth_z
    dy, dz = spec.death_y, spec.death_z
    return (
        by * q1 * q1 + dy - (by + dy) * q1,
        bz * q1 * q2 + dz - (bz + dz) * q2,
    )


def extinction_fixed_point(dm: DimorphicModel) -> tuple[float, float]:
    """Stable fixed point reached from the origin: (1, 1) in the
    subcritical case, the interior point otherwise."""
    spec = BranchingSpec.from_dimorphic(dm)
    if fitness_from_dimorphic(dm) <= 0.0:
        return 1.0, 1.0
    q1 = spec.death_y / spec.birth_y
    q2 = spec.death_z / (spec.birth_z * (1.0 - q1) + spec.death_z)
    return q1, q2


def integrate_extinction(dm: DimorphicModel, t_end: float | None = None,
                         rtol: float = 1e-10):
    """Integrate the extinction system from the origin.

    The default horizon 50 / min(rates) comfortably covers the exponential
    convergence to the hyperbolic fixed point. Returns (t, q) with q of
    shape (len(t), 2).
    """
    spec = BranchingSpec.from_dimorphic(dm)
    rates = [r for r in (spec.birth_y, spec.birth_z, spec.death_y,
                         spec.death_z) if r > 0.0]
    if t_end is None:
        t_end = 50.0 / min(rates)
    sol = solve_ivp(lambda _t, q: extinction_ode_rhs(q, dm),
                    (0.0, t_end), [0.0, 0.0], method="RK45",
                    rtol=rtol, atol=1e-13, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"extinction ODE integration failed: {sol.message}")
    return sol.t, sol.y.T


def simulate_branching(spec: BranchingSpec, founder: str, threshold: int,
                       rng: np.random.Generator,
                       max_events: int = 50_000_000) -> str:
    """Exact chain of the bi-type process until extinction or threshold.

    Returns "extinct", "reached_threshold", or "censored" when the event
    budget runs out.
    """
    if founder not in ("Aa", "aa"):
        raise ValueError("founder must be 'Aa' or 'aa'")
    y0, z0 = (1, 0) if founder == "Aa" else (0, 1)
    state = np.array([rng.integers(0, 2 ** 63 - 1)], dtype=np.uint64)
    status, _events = _core.branching_run(
        y0, z0, spec.birth_y, spec.birth_z, spec.death_y, spec.death_z,
        threshold, max_events, state)
    if status == _core.EXTINCT:
        return "extinct"
    if status == _core.STOP_HIGH:
        return "reached_threshold"
    return "censored"


@dataclass
class InvasionEstimate:
    probability: float
    stderr: float
    successes: int
    replicates: int
    formula_probability: float


def _mutant_allele_weight(g: Genotype, u_a: float) -> float:
    return float(g.u1 == u_a) + float(g.u2 == u_a)


def monte_carlo_invasion(model: DemographyModel, u_A: float, u_a: float,
                         K: int, replicates: int, epsilon: float,
                         rng: np.random.Generator,
                         horizon: float = 1e5,
                         threads: int = 1) -> InvasionEstimate:
    """Fraction of full individual-based runs whose mutant-allele count
    reaches K * epsilon before hitting zero.

    Each replicate starts from round(K nbar_AA) resident homozygotes plus
    a single heterozygote and runs with mutation switched off.
    """
    work = model.with_k(K)
    dm = DimorphicModel.from_model(work, u_A, u_a)
    n_res = int(round(K * dm.n_bar_AA))
    target = math.ceil(K * epsilon)
    seeds = rng.integers(0, 2 ** 63 - 1, size=replicates)
    stop = ibm.StopRule(lambda g: _mutant_allele_weight(g, u_a),
                        low=0.0, high=float(target))

    def one(seed) -> bool:
        sub = np.random.Generator(np.random.PCG64(seed))
        init = ibm.PopulationState(
            {Genotype(u_A, u_A): n_res, Genotype(u_A, u_a): 1}, K)
        traj = ibm.simulate(init, work, horizon, sub,
                            dt_record=horizon + 1.0, stop=stop)
        return traj.status == "stopped_high"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(one, seeds))
    else:
        hits = sum(one(s) for s in seeds)
    p = hits / replicates
    se = math.sqrt(max(p * (1.0 - p), 1.0 / replicates) / replicates)
    return InvasionEstimate(p, se, hits, replicates, survival_probability(dm))


@dataclass
class PhaseSplit:
    """Entry times of the three invasion phases: mutant establishment at
    density epsilon (t1), arrival near the mutant equilibrium (t2), and
    extinction of the resident allele (t3)."""

    t1: float
    t2: float
    t3: float


def three_phase_split(times, densities, epsilon: float,
                      n_bar_aa: float) -> PhaseSplit | None:
    """Split a fixing trajectory of (AA, Aa, aa) densities into phases.

    t1: first time the mutant density y + z reaches epsilon; t2: first
    subsequent time the state is within epsilon of (0, 0, nbar_aa) in the
    max norm; t3: first subsequent time the resident allele count is
    exactly zero. Returns None when the trajectory never fixes.
    """
    times = np.asarray(times, dtype=float)
    d = np.asarray(densities, dtype=float)
    mut = d[:, Aa] + d[:, aa]
    i1 = np.flatnonzero(mut >= epsilon)
    if len(i1) == 0:
        return None
    i1 = i1[0]
    near = ((d[:, AA] <= epsilon) & (d[:, Aa] <= epsilon)
            & (np.abs(d[:, aa] - n_bar_aa) <= epsilon))
    i2 = np.flatnonzero(near & (np.arange(len(times)) >= i1))
    if len(i2) == 0:
        return None
    i2 = i2[0]
    fixed = (d[:, AA] == 0.0) & (d[:, Aa] == 0.0)
    i3 = np.flatnonzero(fixed & (np.arange(len(times)) >= i2))
    if len(i3) == 0:
        return None
    return PhaseSplit(float(times[i1]), float(times[i2]), float(times[i3[0]]))


def exit_time_scaling(model: DemographyModel, u_A: float, epsilon: float,
                      k_list, horizon: float, replicates: int,
                      rng: np.random.Generator,
                      death_jitter: float = 0.0) -> list[dict]:
    """Exit frequencies from the epsilon-neighborhood of the monomorphic
    equilibrium for a ladder of system sizes (no mutation).

    Returns one record per K with the fraction of replicates whose total
    density left [nbar - epsilon, nbar + epsilon] before the horizon.
    An optional bounded random perturbation of the death rates checks the
    robustness of the conclusion.
    """
    out = []
    for K in k_list:
        work = model.with_k(int(K))
        nbar = work.carrying_capacity(u_A)
        n0 = int(round(K * nbar))
        stop = ibm.StopRule(lambda g: 1.0,
                            low=K * (nbar - epsilon), high=K * (nbar + epsilon))
        exits = 0
        for seed in rng.integers(0, 2 ** 63 - 1, size=replicates):
            sub = np.random.Generator(np.random.PCG64(seed))
            init = ibm.PopulationState({Genotype(u_A, u_A): n0}, int(K))
            traj = ibm.simulate(init, work, horizon, sub,
                                dt_record=horizon + 1.0, stop=stop,
                                death_jitter=death_jitter)
            if traj.status in ("stopped_low", "stopped_high", "extinct"):
                exits += 1
        out.append({"K": int(K), "exit_fraction": exits / replicates,
                    "replicates": replicates})
    return out
