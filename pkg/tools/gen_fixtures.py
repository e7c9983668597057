#!/usr/bin/env python3
"""Generate oracle fixture data for the test suite.

Standalone on purpose: everything here is an independent re-implementation
(brute-force double sums, closed-form solutions, duplicate formula
evaluators, exact discrete laws) that must never import the main package.
The JSON files written to tests/fixtures/ are committed; the package is
required to reproduce each value within the tolerance stored alongside it.

Run from the repository root:

    python tools/gen_fixtures.py
"""

import json
import math
import os
from pathlib import Path

import numpy as np
from scipy.integrate import quad, solve_ivp

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


# ----------------------------------------------------------------------
# duplicate model formulas (kept deliberately naive and local)
# ----------------------------------------------------------------------

def phi_mean(u1, u2):
    return 0.5 * (u1 + u2)


def make_scalar(cfg):
    """Phenotype-level rate function from a family config dict."""
    fam = cfg["family"]
    if fam == "constant":
        v = cfg["value"]
        return lambda p: v
    if fam == "affine":
        a, b = cfg["intercept"], cfg["slope"]
        return lambda p: a + b * p
    raise ValueError(fam)


def make_kernel(cfg):
    fam = cfg["family"]
    if fam == "constant":
        v = cfg["value"]
        return lambda pf, po: v
    if fam == "gaussian":
        r, sa, sk, p0 = cfg["r_bar"], cfg["sigma_a"], cfg["sigma_k"], cfg["phi_0"]
        return lambda pf, po: r * math.exp(
            -((pf - po) ** 2) / (2.0 * sa * sa) + ((pf - p0) ** 2) / (2.0 * sk * sk)
        )
    raise ValueError(fam)


class Scen:
    """Duplicate evaluator for a scenario: f, D, C over genotypes via phi."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.u_min = cfg["trait_space"]["u_min"]
        self.u_max = cfg["trait_space"]["u_max"]
        pf = cfg["phenotype"]["family"]
        if pf == "mean":
            self.phi = phi_mean
        elif pf == "quadratic":
            c, s, o = (cfg["phenotype"][k] for k in ("center", "scale", "offset"))
            self.phi = lambda u1, u2, c=c, s=s, o=o: o + s * (phi_mean(u1, u2) - c) ** 2
        else:
            raise ValueError(pf)
        self.fphi = make_scalar(cfg["fertility"])
        self.dphi = make_scalar(cfg["death"])
        self.cker = make_kernel(cfg["competition"])

    def f(self, u1, u2):
        return self.fphi(self.phi(u1, u2))

    def D(self, u1, u2):
        return self.dphi(self.phi(u1, u2))

    def C(self, g, h):
        return self.cker(self.phi(*g), self.phi(*h))

    def capacity(self, u):
        return (self.f(u, u) - self.D(u, u)) / self.C((u, u), (u, u))

    def fitness(self, ua, uA):
        # invasion fitness of an Aa mutant in an AA resident at equilibrium
        return (
            self.f(uA, ua)
            - self.D(uA, ua)
            - self.C((uA, ua), (uA, uA)) * self.capacity(uA)
        )

    def fitness_gradient(self, u, h=1e-6):
        return (self.fitness(u + h, u) - self.fitness(u - h, u)) / (2.0 * h)


# scenario definitions shared with the test suite (frozen here)
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
        "phenotype": {"family": "quadratic", "center": 0.5, "scale": 1.0, "offset": 0.2},
        "fertility": {"family": "constant", "value": 2.0},
        "death": {"family": "affine", "intercept": 1.2, "slope": -0.4},
        "competition": {"family": "constant", "value": 1.0},
        "mutation": {"sigma": 0.05, "mu_k": 0.0, "right_mass": 0.5},
    },
}


def dump(name, payload):
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / name
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    print(f"wrote {path.relative_to(OUT.parent.parent)}")


# ----------------------------------------------------------------------
# 1. Gaussian competition kernel: duplicate-formula oracle
# ----------------------------------------------------------------------

def gen_gaussian_kernel():
    rng = np.random.default_rng(101)
    params = SCENARIOS["gaussian"]["competition"]
    ker = make_kernel(params)
    pairs = []
    for _ in range(50):
        pf, po = rng.uniform(-1.5, 1.5, size=2)
        pairs.append([pf, po, ker(pf, po)])
    dump("gaussian_kernel.json", {
        "params": params,
        "pairs": pairs,
        "tol": 1e-12,
        "special": {
            "at_optimum": params["r_bar"],
            "one_sigma_a": params["r_bar"] * math.exp(-0.5),
        },
    })


# ----------------------------------------------------------------------
# 2. IBM per-capita death rates and total event rates: brute force O(N^2)
# ----------------------------------------------------------------------

def brute_rates(scen, genotype_counts, K):
    # expand into individuals, sum pairwise competition explicitly
    individuals = []
    for (u1, u2), c in genotype_counts:
        individuals.extend([(u1, u2)] * c)
    n = len(individuals)
    deaths = []
    for g in individuals:
        comp = sum(scen.C(g, h) for h in individuals)  # includes the focal itself
        deaths.append(scen.D(*g) + comp / K)
    F = sum(scen.f(*g) for g in individuals)
    birth_total = 0.0
    for i, g in enumerate(individuals):
        for j, h in enumerate(individuals):
            if i != j:
                birth_total += scen.f(*g) * scen.f(*h) / F
    death_total = sum(deaths)
    # per-genotype death rate for one individual of that genotype
    per_genotype = []
    seen = set()
    for (u1, u2), _c in genotype_counts:
        if (u1, u2) in seen:
            continue
        seen.add((u1, u2))
        comp = sum(scen.C((u1, u2), h) for h in individuals)
        per_genotype.append([u1, u2, scen.D(u1, u2) + comp / K])
    return per_genotype, birth_total, death_total


def gen_ibm_rates():
    rng = np.random.default_rng(202)
    cases = []
    for scen_name in ("affine_death", "gaussian"):
        scen = Scen(SCENARIOS[scen_name])
        lo, hi = scen.u_min, scen.u_max
        for _ in range(4):
            alleles = sorted(rng.uniform(lo, hi, size=3))
            genos = []
            for a in range(3):
                for b in range(a, 3):
                    c = int(rng.integers(0, 8))
                    if c > 0:
                        genos.append([[alleles[a], alleles[b]], c])
            if sum(c for _, c in genos) < 2:
                genos.append([[alleles[0], alleles[1]], 3])
            K = int(rng.integers(5, 40))
            per_g, bt, dt = brute_rates(scen, [((g[0][0], g[0][1]), g[1]) for g in genos], K)
            cases.append({
                "scenario": scen_name,
                "genotypes": genos,
                "K": K,
                "death_rates": per_g,
                "birth_total": bt,
                "death_total": dt,
            })
    dump("ibm_rates.json", {"cases": cases, "tol": 1e-12})


# ----------------------------------------------------------------------
# 3. Logistic equation: closed-form solution oracle
# ----------------------------------------------------------------------

def gen_logistic():
    f, D, C = 2.0, 1.0, 1.0
    r = f - D
    nbar = r / C
    n0, t = 0.1, 20.0
    # closed form of dn/dt = n (r - C n)
    n_t = nbar / (1.0 + (nbar / n0 - 1.0) * math.exp(-r * t))
    dump("logistic.json", {
        "f": f, "D": D, "C": C,
        "capacity": nbar,
        "n0": n0, "t": t, "n_t": n_t,
        "tol": 1e-6,
    })


# ----------------------------------------------------------------------
# 4/5. Three-genotype vector field and its spectrum at the AA equilibrium
# ----------------------------------------------------------------------

def dimorphic_constants(scen, uA, ua):
    gs = [(uA, uA), (uA, ua), (ua, ua)]
    f = [scen.f(*g) for g in gs]
    D = [scen.D(*g) for g in gs]
    C = [[scen.C(g, h) for h in gs] for g in gs]
    return f, D, C


def rhs_via_gametic_ratio(state, f, D, C):
    """Independent algebra path: birth rates through the gametic ratio p."""
    x, y, z = state
    n = x + y + z
    if n <= 0.0:
        return [0.0, 0.0, 0.0]
    tot = f[0] * x + f[1] * y + f[2] * z
    p = (f[0] * x + 0.5 * f[1] * y) / tot
    bAA = (f[0] * x + 0.5 * f[1] * y) * p
    bAa = (f[0] * x + 0.5 * f[1] * y) * (1.0 - p) + (f[2] * z + 0.5 * f[1] * y) * p
    baa = (f[2] * z + 0.5 * f[1] * y) * (1.0 - p)
    dens = [x, y, z]
    out = []
    for i, b in enumerate((bAA, bAa, baa)):
        comp = sum(C[i][j] * dens[j] for j in range(3))
        out.append(b - (D[i] + comp) * dens[i])
    return out


def gen_field_and_spectrum():
    rng = np.random.default_rng(303)
    field_cases = []
    spec_cases = []
    for scen_name, uA, ua in (("affine_death", 0.3, 0.5), ("gaussian", -0.2, 0.1)):
        scen = Scen(SCENARIOS[scen_name])
        f, D, C = dimorphic_constants(scen, uA, ua)
        states = rng.uniform(0.05, 1.5, size=(6, 3)).tolist()
        field_cases.append({
            "scenario": scen_name, "uA": uA, "ua": ua,
            "f": f, "D": D, "C": C,
            "states": states,
            "rhs": [rhs_via_gametic_ratio(s, f, D, C) for s in states],
        })
        # numeric Jacobian of the duplicate field at (nbar_AA, 0, 0)
        nAA = (f[0] - D[0]) / C[0][0]
        J = np.zeros((3, 3))
        h = 1e-7
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            up = rhs_via_gametic_ratio(np.array([nAA, 0, 0]) + e, f, D, C)
            dn = rhs_via_gametic_ratio(np.array([nAA, 0, 0]) - e, f, D, C)
            J[:, j] = (np.asarray(up) - np.asarray(dn)) / (2 * h)
        eig = np.sort(np.linalg.eigvals(J).real).tolist()
        S = f[1] - D[1] - C[1][0] * nAA
        spec_cases.append({
            "scenario": scen_name, "uA": uA, "ua": ua,
            "nbar_AA": nAA,
            "numeric_eigenvalues_sorted": eig,
            "closed_form_sorted": sorted([-f[0] + D[0], -C[2][0] * nAA - D[2], S]),
            "fitness": S,
        })
    dump("genotype_rhs.json", {"cases": field_cases, "tol": 1e-12})
    dump("spectrum.json", {"cases": spec_cases, "tol_numeric": 1e-8, "tol_fitness": 1e-8})


# ----------------------------------------------------------------------
# 6. Neutral flow: p frozen, h decays at rate f (closed-form targets)
# ----------------------------------------------------------------------

def gen_neutral_decay():
    rng = np.random.default_rng(404)
    f, d0, d1 = 2.0, 1.0, 1.0
    starts = rng.uniform(0.05, 1.2, size=(5, 3)).tolist()
    recs = []
    for x, y, z in starts:
        n = x + y + z
        p = (x + 0.5 * y) / n
        h = y / n - 2.0 * p * (1.0 - p)
        recs.append({"start": [x, y, z], "p0": p, "h0": h})
    dump("neutral_decay.json", {
        "f": f, "d0": d0, "d1": d1, "n0": (f - d0) / d1,
        "starts": recs,
        "t_grid": np.linspace(0.0, 3.0, 7).tolist(),
        "p_tol": 1e-8,
        "decay_rel_tol": 1e-6,
    })


# ----------------------------------------------------------------------
# 7/8. Reduced scalar field limit g(v) and the perturbed equilibria
# ----------------------------------------------------------------------

def gen_reduced_g():
    scen = Scen(SCENARIOS["affine_death"])
    uA = 0.3
    dSdz = scen.fitness_gradient(uA)
    n0 = scen.capacity(uA)
    vgrid = np.linspace(-n0, n0, 21)
    g = [-(1.0 / (2.0 * n0)) * dSdz * (v * v - n0 * n0) for v in vgrid]
    zeta = 0.01
    dump("reduced_g.json", {
        "scenario": "affine_death", "uA": uA,
        "dS_dzeta": dSdz, "n0": n0,
        "v_grid": list(vgrid), "g": g,
        "zeta_ladder": [0.02, 0.01, 0.005],
        "zeta": zeta,
        "equilibria": {
            "nbar_AA": scen.capacity(uA),
            "nbar_aa": scen.capacity(uA + zeta),
        },
    })


# ----------------------------------------------------------------------
# 9-11. TSS jump law: density composition, quadrature CDF, small-sigma rate
# ----------------------------------------------------------------------

def msigma_uniform(u, h, sigma, u_min, u_max, right_mass=0.5):
    """Truncated-and-renormalized scaled uniform mutation density."""
    w = h / sigma
    lo = max(-1.0, (u_min - u) / sigma)
    hi = min(1.0, (u_max - u) / sigma)
    if not (lo <= w <= hi) or w == 0.0:
        if w < lo or w > hi:
            return 0.0
    mass = (1.0 - right_mass) * (-lo) + right_mass * hi
    base = (1.0 - right_mass) if w < 0 else right_mass
    return base / mass / sigma


def gen_jump_law():
    # density values on a grid: gaussian scenario
    scen = Scen(SCENARIOS["gaussian"])
    sig = SCENARIOS["gaussian"]["mutation"]["sigma"]
    uA = 0.45
    nbar = scen.capacity(uA)
    fAA = scen.f(uA, uA)
    hgrid = np.linspace(-sig, sig, 41)
    dens = []
    for h in hgrid:
        S = scen.fitness(uA + h, uA)
        m = msigma_uniform(uA, h, sig, scen.u_min, scen.u_max)
        dens.append(fAA * nbar * max(S, 0.0) / scen.f(uA, uA + h) * m)
    dump("jump_density.json", {
        "scenario": "gaussian", "uA": uA, "sigma": sig,
        "h_grid": list(hgrid), "density": dens, "tol": 1e-12,
    })

    # quadrature CDF of the jump law: directional scenario
    scen = Scen(SCENARIOS["directional"])
    u0 = 0.4
    sig = 0.05
    nbar = scen.capacity(u0)
    f00 = scen.f(u0, u0)

    def rho(h):
        S = scen.fitness(u0 + h, u0)
        m = msigma_uniform(u0, h, sig, scen.u_min, scen.u_max)
        return f00 * nbar * max(S, 0.0) / scen.f(u0, u0 + h) * m

    total, _ = quad(rho, -sig, sig, points=[0.0], limit=200, epsabs=1e-13)
    hcdf = np.linspace(-sig, sig, 101)
    cdf = []
    acc = 0.0
    for a, b in zip(hcdf[:-1], hcdf[1:]):
        val, _ = quad(rho, a, b, limit=100, epsabs=1e-13)
        acc += val
        cdf.append(acc / total)
    dump("jump_cdf.json", {
        "scenario": "directional", "u": u0, "sigma": sig,
        "total_rate": total,
        "h_grid": list(hcdf), "cdf": [0.0] + cdf,
        "rate_tol": 1e-9,
    })

    # small-sigma asymptotics of the total rate
    sig_small = 1e-3
    g1 = scen.fitness_gradient(u0)
    asym = nbar * sig_small * g1 / 4.0
    dump("jump_asymptotics.json", {
        "scenario": "directional", "u": u0, "sigma": sig_small,
        "gradient": g1, "asymptotic_rate": asym, "rel_tol": 0.10,
    })


# ----------------------------------------------------------------------
# 12. Mutation law moments and CDF targets
# ----------------------------------------------------------------------

def law_moments(u, sigma, u_min, u_max, right_mass):
    lo = max(-1.0, (u_min - u) / sigma)
    hi = min(1.0, (u_max - u) / sigma)
    mass = (1.0 - right_mass) * (-lo) + right_mass * hi
    mean_w = ((1.0 - right_mass) * (-(lo ** 2) / 2.0) + right_mass * hi ** 2 / 2.0) / mass
    m2_w = ((1.0 - right_mass) * (-(lo ** 3)) + right_mass * hi ** 3) / (3.0 * mass)
    return mean_w * sigma, m2_w * sigma * sigma


def gen_mutation_law():
    cases = []
    for (u, rm) in ((0.5, 0.5), (1.0, 0.5), (0.0, 0.5), (0.5, 2.0 / 3.0)):
        sigma, u_min, u_max = 0.1, 0.0, 1.0
        mean, m2 = law_moments(u, sigma, u_min, u_max, rm)
        cases.append({
            "u": u, "sigma": sigma, "u_min": u_min, "u_max": u_max,
            "right_mass": rm, "mean": mean, "second_moment": m2,
        })
    dump("mutation_law.json", {"cases": cases, "tol": 1e-12})


# ----------------------------------------------------------------------
# 14. M1 continuity modulus: brute-force O(n^3) oracle
# ----------------------------------------------------------------------

def m1_brute(ts, xs, delta):
    n = len(ts)
    worst = 0.0
    for i in range(n):
        for k in range(i, n):
            if ts[k] - ts[i] > delta:
                break
            lo = min(xs[i], xs[k])
            hi = max(xs[i], xs[k])
            for j in range(i, k + 1):
                d = max(0.0, lo - xs[j], xs[j] - hi)
                worst = max(worst, d)
    return worst


def gen_m1():
    rng = np.random.default_rng(505)
    cases = []
    # single up-down spike of height 1 inside a delta window
    ts = np.linspace(0.0, 1.0, 201)
    xs = np.zeros(201)
    xs[100] = 1.0
    cases.append({"t": list(ts), "x": list(xs), "delta": 0.1,
                  "w": m1_brute(ts, xs, 0.1)})
    for _ in range(4):
        n = 401  # spacing 0.0125 keeps every delta below finer than delta/10
        ts2 = np.linspace(0.0, 5.0, n)
        xs2 = np.cumsum(rng.normal(0, 1, size=n))
        for delta in (0.4, 1.5):
            cases.append({"t": list(ts2), "x": list(xs2), "delta": delta,
                          "w": m1_brute(ts2, xs2, delta)})
    dump("m1_modulus.json", {"cases": cases, "tol": 1e-12})


# ----------------------------------------------------------------------
# 13/15. Fitness gradients and canonical right-hand sides
# ----------------------------------------------------------------------

def gen_gradients_and_canonical():
    scen = Scen(SCENARIOS["gaussian"])
    grads = []
    for u in (-0.6, -0.1, 0.15, 0.4, 0.8):
        hs = np.linspace(-1e-3, 1e-3, 21)
        Ss = [scen.fitness(u + h, u) for h in hs]
        coef = np.polyfit(hs, Ss, 2)  # quadratic regression; slope at h=0
        grads.append({"u": u, "slope": float(coef[1])})
    dump("fitness_gradient.json", {"scenario": "gaussian", "cases": grads, "tol": 1e-6})

    scen = Scen(SCENARIOS["directional"])
    sig = SCENARIOS["directional"]["mutation"]["sigma"]
    cases = []
    for u in (0.2, 0.5, 0.8):
        g1 = scen.fitness_gradient(u)
        nbar = scen.capacity(u)
        f00 = scen.f(u, u)
        _, m2 = law_moments(u, sig, 0.0, 1.0, 0.5)
        sym = 0.5 * f00 * nbar * m2 * g1

        def integrand(h, u=u, g1=g1):
            val = h * max(h * g1, 0.0)
            return val * msigma_uniform(u, h, sig, 0.0, 1.0, 0.5)

        gen, _ = quad(integrand, -sig, sig, points=[0.0], epsabs=1e-14)
        gen *= f00 * nbar

        def integrand_asym(h, u=u, g1=g1):
            val = h * max(h * g1, 0.0)
            return val * msigma_uniform(u, h, sig, 0.0, 1.0, 2.0 / 3.0)

        gen_asym, _ = quad(integrand_asym, -sig, sig, points=[0.0], epsabs=1e-14)
        gen_asym *= f00 * nbar
        cases.append({
            "u": u, "symmetric_rhs": sym, "general_rhs": gen,
            "general_rhs_right_mass_2_3": gen_asym,
        })
    dump("canonical_rhs.json", {
        "scenario": "directional", "sigma": sig, "cases": cases,
        "tol_cross": 1e-10,
    })


# ----------------------------------------------------------------------
# 16. Appendix-style bi-type extinction system: fixed points and formula
# ----------------------------------------------------------------------

def gen_extinction():
    scen = Scen(SCENARIOS["affine_death"])
    uA, ua = 0.2, 0.9
    f, D, C = dimorphic_constants(scen, uA, ua)
    nAA = (f[0] - D[0]) / C[0][0]
    dy = D[1] + C[1][0] * nAA
    dz = D[2] + C[2][0] * nAA
    S = f[1] - dy
    q1 = dy / f[1]
    q2 = dz / (2.0 * f[2] * (1.0 - q1) + dz)
    surv = max(S, 0.0) / f[1]

    def ode(t, q):
        return [
            f[1] * q[0] ** 2 + dy - (f[1] + dy) * q[0],
            2.0 * f[2] * q[0] * q[1] + dz - (2.0 * f[2] + dz) * q[1],
        ]

    sol = solve_ivp(ode, (0.0, 200.0), [0.0, 0.0], rtol=1e-12, atol=1e-14)
    dump("extinction.json", {
        "scenario": "affine_death", "uA": uA, "ua": ua,
        "f": f, "D": D, "C": C,
        "nbar_AA": nAA,
        "rates": {"birth_y": f[1], "birth_z_coeff": 2.0 * f[2],
                  "death_y": dy, "death_z": dz},
        "fitness": S,
        "survival_probability": surv,
        "fixed_point": [q1, q2],
        "ode_limit": [float(sol.y[0, -1]), float(sol.y[1, -1])],
        "rhs_at_origin": ode(0.0, [0.0, 0.0]),
        "tol": 1e-6,
    })


# ----------------------------------------------------------------------
# 17. Random substitution scenarios for the fixation dichotomy
# ----------------------------------------------------------------------

def gen_tube_scenarios():
    rng = np.random.default_rng(606)
    out = []
    zeta = 1e-2
    n = 0
    while n < 20:
        kind = "affine" if n % 2 == 0 else "gaussian"
        if kind == "affine":
            fv = float(rng.uniform(1.2, 3.0))
            slope = float(rng.uniform(0.2, 0.9)) * (1 if rng.random() < 0.5 else -1)
            intercept = float(rng.uniform(0.6, 1.0)) - min(0.0, slope)
            cfg = {
                "trait_space": {"u_min": 0.0, "u_max": 1.0},
                "phenotype": {"family": "mean"},
                "fertility": {"family": "constant", "value": fv},
                "death": {"family": "affine", "intercept": intercept, "slope": slope},
                "competition": {"family": "constant",
                                "value": float(rng.uniform(0.5, 2.0))},
                "mutation": {"sigma": 0.05, "mu_k": 0.0, "right_mass": 0.5},
            }
            uA = float(rng.uniform(0.25, 0.75))
        else:
            cfg = {
                "trait_space": {"u_min": -1.0, "u_max": 1.0},
                "phenotype": {"family": "mean"},
                "fertility": {"family": "constant", "value": 2.0},
                "death": {"family": "constant", "value": 1.0},
                "competition": {
                    "family": "gaussian",
                    "r_bar": 1.0,
                    "sigma_a": float(rng.uniform(0.5, 1.0)),
                    "sigma_k": float(rng.uniform(1.0, 1.6)),
                    "phi_0": float(rng.uniform(-0.3, 0.3)),
                },
                "mutation": {"sigma": 0.05, "mu_k": 0.0, "right_mass": 0.5},
            }
            uA = float(rng.uniform(-0.7, 0.7))
        scen = Scen(cfg)
        # validity: positive growth rate over the square, nonzero gradient
        us = np.linspace(scen.u_min, scen.u_max, 21)
        rmin = min(scen.f(a, b) - scen.D(a, b) for a in us for b in us)
        dS = scen.fitness_gradient(uA)
        if rmin <= 0.05 or abs(dS) < 0.05:
            continue
        if abs(scen.cfg["phenotype"].get("center", 99) - uA) < 0.1:
            continue
        z = zeta if dS > 0 else -zeta  # uphill: zeta * dS/dzeta > 0
        out.append({
            "config": cfg, "uA": uA, "zeta_uphill": z,
            "dS_dzeta": dS,
            "nbar_AA_up": scen.capacity(uA),
            "nbar_aa_up": scen.capacity(uA + z),
            "nbar_AA_down": scen.capacity(uA),
            "nbar_aa_down": scen.capacity(uA - z),
        })
        n += 1
    dump("tube_scenarios.json", {"scenarios": out, "target_tol": 1e-4})


def main():
    gen_gaussian_kernel()
    gen_ibm_rates()
    gen_logistic()
    gen_field_and_spectrum()
    gen_neutral_decay()
    gen_reduced_g()
    gen_jump_law()
    gen_mutation_law()
    gen_m1()
    gen_gradients_and_canonical()
    gen_extinction()
    gen_tube_scenarios()


if __name__ == "__main__":
    main()
