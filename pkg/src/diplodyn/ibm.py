"""Exact event-driven simulation of the renormalized birth-death process.

Births draw an ordered mating pair (mother by fertility, father by
fertility among the rest), the child samples one allele from each parent,
and with probability mu_k exactly one of the child's two alleles is
displaced by a mutation step. Deaths combine the background rate with
competition summed over every individual, the focal one included; the
realized pairwise pressure is C/K.

`step` advances one event in plain Python and is the reference semantics;
`simulate` runs the identical chain through the compiled kernel, grouped
by genotype, suspending only when a mutant birth extends the allele
support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _core
from .model import DemographyModel, Genotype


class RateBookkeepingError(RuntimeError):
    """Incremental and from-scratch total rates disagreed beyond 1e-9."""


@dataclass
class PopulationState:
    """Integer genotype counts at scale K plus the current time.

    Zero-count genotypes are never retained; `extinct` flags a terminal
    absorbed state.
    """

    counts: dict[Genotype, int]
    k: int
    time: float = 0.0
    extinct: bool = False

    def __post_init__(self):
        self.counts = {g: c for g, c in self.counts.items() if c > 0}

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def density(self) -> float:
        return self.total / self.k

    def density_of(self, g: Genotype) -> float:
        return self.counts.get(g, 0) / self.k

    def copy(self) -> "PopulationState":
        return PopulationState(dict(self.counts), self.k, self.time, self.extinct)


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: str  # birth | mutant_birth | death
    genotype: Genotype
    parent_pair: Optional[tuple[Genotype, Genotype]] = None


@dataclass(frozen=True)
class StopRule:
    """Stop when a per-genotype weighted count leaves [low, high]."""

    weight_of: Callable[[Genotype], float]
    low: float = -math.inf
    high: float = math.inf


def monomorphic_state(model: DemographyModel, u: float, density: float,
                      time: float = 0.0) -> PopulationState:
    n = int(round(density * model.k))
    return PopulationState({Genotype(u, u): n}, model.k, time)


# ----------------------------------------------------------------------
# reference per-event operations (from-scratch rates)
# ----------------------------------------------------------------------

def death_rate(state: PopulationState, model: DemographyModel,
               g: Genotype) -> float:
    """Per-capita death rate D(g) + (1/K) sum_j C(g, g_j) over ALL
    individuals, the focal one included."""
    if g not in state.counts:
        raise ValueError(f"genotype {g} not present in the population")
    comp = sum(model.competition_between(g, h) * c
               for h, c in state.counts.items())
    return model.death_of(g) + comp / state.k


def total_event_rate(state: PopulationState,
                     model: DemographyModel) -> tuple[float, float]:
    """Total birth and death rates of the current population.

    birth_total = sum_i f_i (F - f_i) / F over individuals (ordered mating
    pairs exclude self-mating); death_total sums `death_rate` over
    individuals. Empty population gives (0, 0).
    """
    if not state.counts:
        return 0.0, 0.0
    items = list(state.counts.items())
    fs = np.array([model.fertility_of(g) for g, _ in items])
    cs = np.array([float(c) for _, c in items])
    F = float(fs @ cs)
    birth = float(((F - fs) * fs) @ cs) / F if F > 0.0 else 0.0
    death = sum(c * death_rate(state, model, g) for g, c in items)
    return birth, death


def birth_event(state: PopulationState, model: DemographyModel,
                rng: np.random.Generator) -> tuple[Genotype, bool]:
    """Sample one mating event and return (child genotype, mutated).

    Mother is chosen proportionally to fertility, the father proportionally
    to fertility among the remaining individuals; the child receives one
    uniformly chosen allele from each parent. With probability mu_k one of
    the child's two alleles, chosen uniformly, takes a mutation step
    centered on the allele being mutated.
    """
    if state.total < 2:
        raise ValueError("mating requires at least two individuals")
    items = list(state.counts.items())
    fs = np.array([model.fertility_of(g) for g, _ in items])
    cs = np.array([float(c) for _, c in items])
    F = float(fs @ cs)
    w_mother = cs * fs * (F - fs)
    a = rng.choice(len(items), p=w_mother / w_mother.sum())
    w_father = fs * (cs - (np.arange(len(items)) == a))
    b = rng.choice(len(items), p=w_father / w_father.sum())
    u_m = items[a][0].alleles[rng.integers(2)]
    u_p = items[b][0].alleles[rng.integers(2)]
    mutated = model.mu_k > 0.0 and rng.random() < model.mu_k
    if mutated:
        if rng.integers(2) == 0:
            u_m = u_m + model.sample_mutation_step(u_m, rng)
        else:
            u_p = u_p + model.sample_mutation_step(u_p, rng)
    return Genotype(u_m, u_p), mutated


def step(state: PopulationState, model: DemographyModel,
         rng: np.random.Generator) -> tuple[PopulationState, EventRecord]:
    """Advance one event of the embedded jump chain."""
    if state.total < 1 or state.extinct:
        raise ValueError("cannot step an empty or absorbed population")
    birth, death = total_event_rate(state, model)
    total = birth + death
    wait = rng.exponential(1.0 / total)
    new = state.copy()
    new.time = state.time + wait
    if rng.random() * total < birth:
        child, mutated = birth_event(state, model, rng)
        new.counts[child] = new.counts.get(child, 0) + 1
        kind = "mutant_birth" if mutated else "birth"
        rec = EventRecord(new.time, kind, child)
    else:
        items = list(state.counts.items())
        w = np.array([c * death_rate(state, model, g) for g, c in items])
        i = rng.choice(len(items), p=w / w.sum())
        g = items[i][0]
        new.counts[g] -= 1
        if new.counts[g] == 0:
            del new.counts[g]
        if not new.counts:
            new.extinct = True
        rec = EventRecord(new.time, "death", g)
    return new, rec


# ----------------------------------------------------------------------
# grouped support tables for the compiled kernel
# ----------------------------------------------------------------------

class _Support:
    """Realized genotype support with incrementally growable rate tables.

    Only genotypes that have actually occurred get a row; the kernel
    suspends when Mendelian mixing produces an unseen allele pairing, and
    the tables grow by one row and column.
    """

    def __init__(self, model: DemographyModel, counts: dict[Genotype, int]):
        self.model = model
        self.alleles: list[float] = []
        self.allele_idx: dict[float, int] = {}
        self.genotypes: list[Genotype] = []
        self.n = np.zeros(0, dtype=np.int64)
        self.f = np.zeros(0)
        self.D = np.zeros(0)
        self.C = np.zeros((0, 0))
        self.gall = np.zeros((0, 2), dtype=np.int64)
        self.pair_idx = np.zeros((0, 0), dtype=np.int64)
        for g in sorted(counts):
            self.add_genotype(g, counts[g])

    def add_allele(self, u: float) -> int:
        i = self.allele_idx.get(u)
        if i is not None:
            return i
        i = len(self.alleles)
        self.alleles.append(u)
        self.allele_idx[u] = i
        grown = np.full((i + 1, i + 1), -1, dtype=np.int64)
        grown[:i, :i] = self.pair_idx
        self.pair_idx = grown
        return i

    def add_genotype(self, g: Genotype, count: int = 0) -> int:
        i1 = self.add_allele(g.u1)
        i2 = self.add_allele(g.u2)
        gi = len(self.genotypes)
        model = self.model
        row = np.array([model.competition_between(g, h) for h in self.genotypes]
                       + [model.competition_between(g, g)])
        col = np.array([model.competition_between(h, g) for h in self.genotypes])
        m = gi + 1
        C = np.zeros((m, m))
        C[:gi, :gi] = self.C
        C[gi, :] = row
        C[:gi, gi] = col
        self.C = C
        self.genotypes.append(g)
        self.n = np.append(self.n, np.int64(count))
        self.f = np.append(self.f, model.fertility_of(g))
        self.D = np.append(self.D, model.death_of(g))
        self.gall = np.vstack([self.gall, [i1, i2]])
        self.pair_idx[i1, i2] = gi
        self.pair_idx[i2, i1] = gi
        return gi

    @property
    def dead_rows(self) -> int:
        return int(np.sum(self.n == 0))

    def to_counts(self) -> dict[Genotype, int]:
        return {g: int(c) for g, c in zip(self.genotypes, self.n) if c > 0}


@dataclass
class Trajectory:
    """Recorded genotype counts on a time grid plus the terminal state.

    The final row is the exact termination time and state, so the time
    column is uniform except possibly for the last entry.
    """

    times: np.ndarray
    counts: np.ndarray          # shape (len(times), len(genotypes))
    genotypes: list[Genotype]
    k: int
    status: str
    final_state: PopulationState
    events: int

    def densities(self) -> np.ndarray:
        return self.counts / self.k

    def density_of(self, g: Genotype) -> np.ndarray:
        if g in self.genotypes:
            return self.counts[:, self.genotypes.index(g)] / self.k
        return np.zeros(len(self.times))


_STATUS = {
    _core.HORIZON: "horizon",
    _core.EXTINCT: "extinct",
    _core.STOP_LOW: "stopped_low",
    _core.STOP_HIGH: "stopped_high",
    _core.STOP2_LOW: "stopped2_low",
    _core.STOP2_HIGH: "stopped2_high",
    _core.BUDGET: "event_budget",
}


def simulate(initial: PopulationState, model: DemographyModel,
             horizon: float, rng: np.random.Generator,
             dt_record: float = 0.1,
             stop: Optional[StopRule] = None,
             stop2: Optional[StopRule] = None,
             max_events: int = 2_000_000_000,
             check_every: int = 10_000,
             death_jitter: float = 0.0) -> Trajectory:
    """Simulate the population over [time, time + horizon].

    The recorder subsamples the piecewise-constant path on a dt_record
    grid; the optional StopRules terminate the run when their weighted
    counts leave [low, high] (statuses stopped_* and stopped2_*).
    Exceeding max_events flags a truncated run.
    """
    if initial.total < 1:
        raise ValueError("initial population is empty")
    t0 = initial.time
    t_end = t0 + horizon
    nrec = int(math.floor(horizon / dt_record)) + 1 if horizon > 0 else 1
    rec_times = t0 + dt_record * np.arange(nrec)
    rng_state = np.array([rng.integers(0, 2 ** 63 - 1)], dtype=np.uint64)

    col_of: dict[Genotype, int] = {}
    blocks: list[tuple[int, np.ndarray, list[int]]] = []
    rec_pos = 0
    events = 0
    t = t0
    sup = _Support(model, dict(initial.counts))

    while True:
        if sup.dead_rows > max(8, len(sup.genotypes) // 2):
            sup = _Support(model, sup.to_counts())
        m = len(sup.genotypes)
        for g in sup.genotypes:
            if g not in col_of:
                col_of[g] = len(col_of)
        colmap = [col_of[g] for g in sup.genotypes]
        rec_out = np.zeros((nrec, m), dtype=np.int64)
        if stop is not None:
            stop_w = np.array([stop.weight_of(g) for g in sup.genotypes])
            lo, hi, use = stop.low, stop.high, 1
        else:
            stop_w = np.zeros(m)
            lo, hi, use = -math.inf, math.inf, 0
        if stop2 is not None:
            stop_w2 = np.array([stop2.weight_of(g) for g in sup.genotypes])
            lo2, hi2, use2 = stop2.low, stop2.high, 1
        else:
            stop_w2 = np.zeros(m)
            lo2, hi2, use2 = -math.inf, math.inf, 0
        res = _core.gillespie_epoch(
            sup.n, sup.f, sup.D, sup.C, sup.gall, sup.pair_idx,
            float(model.k), model.mu_k, t, t_end,
            rec_times, rec_out, rec_pos,
            stop_w, lo, hi, use,
            stop_w2, lo2, hi2, use2,
            death_jitter, max_events - events, check_every, rng_state)
        status, t, ev, new_pos, mo, fa, am, ap, slot = res
        events += ev
        if new_pos > rec_pos:
            blocks.append((rec_pos, rec_out[rec_pos:new_pos], colmap))
            rec_pos = new_pos
        if status == _core.RATE_MISMATCH:
            raise RateBookkeepingError(
                "incremental rates diverged from recomputation")
        if status in (_core.NEW_GENOTYPE, _core.MUTATION):
            if status == _core.NEW_GENOTYPE:
                child = Genotype(sup.alleles[am], sup.alleles[ap])
            else:
                if slot == 0:
                    parent_u = sup.alleles[am]
                    other_u = sup.alleles[ap]
                else:
                    parent_u = sup.alleles[ap]
                    other_u = sup.alleles[am]
                h = model.sample_mutation_step(parent_u, rng)
                child = Genotype(other_u, parent_u + h)
            gi = (sup.genotypes.index(child) if child in sup.genotypes
                  else sup.add_genotype(child))
            sup.n[gi] += 1
            events += 1
            triggered = False
            for rule, codes in ((stop, (_core.STOP_LOW, _core.STOP_HIGH)),
                                (stop2, (_core.STOP2_LOW, _core.STOP2_HIGH))):
                if rule is None:
                    continue
                ws = sum(rule.weight_of(g) * int(c)
                         for g, c in zip(sup.genotypes, sup.n))
                if ws <= rule.low:
                    status, triggered = codes[0], True
                    break
                if ws >= rule.high:
                    status, triggered = codes[1], True
                    break
            if triggered:
                break
            continue
        break

    counts = sup.to_counts()
    final = PopulationState(counts, model.k, t, extinct=(status == _core.EXTINCT))
    ncols = len(col_of)
    genos = [None] * ncols
    for g, j in col_of.items():
        genos[j] = g
    full = np.zeros((rec_pos + 1, ncols), dtype=np.int64)
    for start, block, colmap in blocks:
        for loc, glob in enumerate(colmap):
            full[start:start + len(block), glob] = block[:, loc]
    for g, c in counts.items():
        full[rec_pos, col_of[g]] = c
    times = np.append(rec_times[:rec_pos], t)
    return Trajectory(times, full, genos, model.k, _STATUS[status], final, events)
