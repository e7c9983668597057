"""Command-line surface: one subcommand per engine plus cross-checks.

Every run writes a manifest.json with the fully resolved configuration
and the master seed, so any output can be regenerated exactly. Replicate
streams derive from (master seed, replicate index) through a counter-based
splitting scheme, which makes each replicate reproducible in isolation.
Floating-point output uses 17 significant digits for lossless round trips.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, canonical, dynamics, invasion, tss
from . import ibm as ibm_engine
from .model import ConfigError, Genotype
from .scenario import Scenario, SweepSpec, load_scenario, scenario_from_dict, set_by_path


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _replicate_rng(master_seed: int, replicate: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([master_seed, replicate])))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_manifest(outdir: Path, command: str, scenario: Scenario,
                    outputs: list[str]) -> None:
    payload = {
        "command": command,
        "version": __version__,
        "seed": scenario.run.seed,
        "config": scenario.config,
        "outputs": sorted(outputs),
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)


def _dimorphic_from_section(scenario: Scenario, section: str):
    sec = scenario.section(section)
    try:
        u_A = float(sec["u_resident"])
        u_a = float(sec["u_mutant"])
    except KeyError as exc:
        raise ConfigError(f"{section}: missing field {exc}") from exc
    return dynamics.DimorphicModel.from_model(scenario.model, u_A, u_a), sec


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_ibm(scenario: Scenario, outdir: Path) -> list[str]:
    model = scenario.model
    run = scenario.run
    initial = scenario.initial_state()
    outputs = []

    def one(r):
        rng = _replicate_rng(run.seed, r)
        return ibm_engine.simulate(initial.copy(), model, run.horizon, rng,
                                   dt_record=run.dt_record)

    if run.threads > 1:
        with ThreadPoolExecutor(max_workers=run.threads) as pool:
            trajs = list(pool.map(one, range(run.replicates)))
    else:
        trajs = [one(r) for r in range(run.replicates)]

    genotype_ids: dict[Genotype, int] = {}
    for traj in trajs:
        for g in traj.genotypes:
            genotype_ids.setdefault(g, len(genotype_ids))
    dict_rows = [[gid, g.u1, g.u2, model.phenotype(g)]
                 for g, gid in sorted(genotype_ids.items(), key=lambda kv: kv[1])]
    _write_csv(outdir / "genotypes.csv", ["genotype_id", "u1", "u2", "phenotype"],
               dict_rows)
    outputs.append("genotypes.csv")

    for r, traj in enumerate(trajs):
        rows = []
        dens = traj.densities()
        for i, t in enumerate(traj.times):
            for j, g in enumerate(traj.genotypes):
                if traj.counts[i, j] > 0:
                    rows.append([t, genotype_ids[g], dens[i, j]])
        name = f"ibm_r{r}.csv"
        _write_csv(outdir / name, ["time", "genotype_id", "density"], rows)
        outputs.append(name)

    if scenario.section("run").get("event_log"):
        # event-level view from the reference engine (small populations)
        for r in range(run.replicates):
            rng = _replicate_rng(run.seed, r)
            state = initial.copy()
            name = f"events_r{r}.jsonl"
            with open(outdir / name, "w") as fh:
                while state.time < run.horizon and not state.extinct:
                    state, rec = ibm_engine.step(state, model, rng)
                    if state.time > run.horizon:
                        break
                    fh.write(json.dumps({
                        "time": rec.time, "kind": rec.kind,
                        "u1": rec.genotype.u1, "u2": rec.genotype.u2}) + "\n")
            outputs.append(name)
    return outputs


def cmd_ode(scenario: Scenario, outdir: Path) -> list[str]:
    dm, sec = _dimorphic_from_section(scenario, "ode")
    start = sec.get("initial")
    if start is None or len(start) != 3:
        raise ConfigError("ode: need initial: [x, y, z] densities")
    horizon = float(sec.get("horizon", scenario.run.horizon))
    dt = float(sec.get("dt_record", scenario.run.dt_record))
    tol = float(sec.get("tol", 1e-9))
    traj = dynamics.integrate_flow([float(v) for v in start], dm, horizon,
                                   tol=tol, dt_record=dt)
    n, p, h = dynamics.nph_series(traj.y)
    mean_phi = dynamics.average_phenotype_series(traj.y, dm.w_phi)
    rows = [[t, *y, nn, pp, hh, mp] for t, y, nn, pp, hh, mp
            in zip(traj.t, traj.y, n, p, h, mean_phi)]
    _write_csv(outdir / "ode.csv",
               ["time", "x", "y", "z", "n", "p", "h", "mean_phenotype"], rows)
    return ["ode.csv"]


def cmd_tss(scenario: Scenario, outdir: Path) -> list[str]:
    model = scenario.model
    sec = scenario.section("tss")
    u0 = float(sec.get("u0", scenario.section("initial").get("u", math.nan)))
    if math.isnan(u0):
        raise ConfigError("tss: need u0 (or initial.u)")
    eta = float(sec.get("eta", 0.05 * model.space.width))
    horizon = float(sec.get("horizon", scenario.run.horizon))
    rng = _replicate_rng(scenario.run.seed, 0)
    traj = tss.simulate_tss(model, u0, horizon, eta, rng)
    rows = [[i, t, u, s, traj.state.stopped and i == len(traj.times) - 1]
            for i, (t, u, s) in enumerate(zip(traj.times, traj.traits,
                                              traj.fitness_at_jump))]
    _write_csv(outdir / "tss.csv",
               ["jump_index", "time", "u", "fitness_at_jump", "stopped"], rows)
    return ["tss.csv"]


def cmd_canonical(scenario: Scenario, outdir: Path) -> list[str]:
    model = scenario.model
    sec = scenario.section("canonical")
    u0 = float(sec.get("u0", scenario.section("initial").get("u", math.nan)))
    if math.isnan(u0):
        raise ConfigError("canonical: need u0 (or initial.u)")
    form = str(sec.get("form", "symmetric"))
    horizon = float(sec.get("horizon", scenario.run.horizon))
    if form == "phenotypic":
        u0 = model.phi.diagonal(u0)
    traj = canonical.integrate_canonical(model, u0, horizon, form=form)
    rows = []
    for t, u in zip(traj.t, traj.u):
        if form == "phenotypic":
            rhs = canonical.canonical_rhs_phenotypic(model, u)
            rows.append([t, math.nan, u, rhs, math.nan])
        else:
            rhs = (canonical.canonical_rhs_general(model, u) if form == "general"
                   else canonical.canonical_rhs_symmetric(model, u))
            rows.append([t, u, model.phi.diagonal(u), rhs,
                         canonical.fitness_gradient(model, u)])
    _write_csv(outdir / "canonical.csv",
               ["time", "u", "U", "rhs", "gradient"], rows)
    return ["canonical.csv"]


def cmd_invasion(scenario: Scenario, outdir: Path) -> list[str]:
    dm, sec = _dimorphic_from_section(scenario, "invasion")
    model = scenario.model
    eps = float(sec.get("epsilon", 0.1))
    reps = int(sec.get("replicates", scenario.run.replicates))
    K = int(sec.get("k", model.k))
    rng = _replicate_rng(scenario.run.seed, 0)
    est = invasion.monte_carlo_invasion(
        model, dm.u_A, dm.u_a, K, reps, eps, rng,
        threads=scenario.run.threads)
    ci = 1.96 * est.stderr
    report = {
        "fitness": dynamics.fitness_from_dimorphic(dm),
        "formula_probability": est.formula_probability,
        "mc_probability": est.probability,
        "ci95_halfwidth": ci,
        "successes": est.successes,
        "replicates": est.replicates,
        "K": K,
        "epsilon": eps,
    }
    with open(outdir / "invasion.json", "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    return ["invasion.json"]


def cmd_ess(scenario: Scenario, outdir: Path) -> list[str]:
    strategies = tss.find_singular_strategies(scenario.model)
    payload = [{"u": s.u, "kind": s.kind, "gradient_slope": s.gradient_slope,
                "degenerate": s.degenerate, "boundary": s.boundary}
               for s in strategies]
    with open(outdir / "ess.json", "w") as fh:
        json.dump({"singular_strategies": payload}, fh, indent=1, sort_keys=True)
    return ["ess.json"]


def cmd_compare(scenario: Scenario, outdir: Path) -> list[str]:
    """Cross-layer consistency distances on the configured scenario."""
    model = scenario.model
    run = scenario.run
    dm, sec = _dimorphic_from_section(scenario, "compare")
    x0 = sec.get("initial", [0.5, 0.25, 0.1])
    horizon = float(sec.get("horizon", run.horizon))
    flow = dynamics.integrate_flow([float(v) for v in x0], dm, horizon,
                                   dt_record=run.dt_record)
    init = ibm_engine.PopulationState(
        {Genotype(dm.u_A, dm.u_A): int(round(x0[0] * model.k)),
         Genotype(dm.u_A, dm.u_a): int(round(x0[1] * model.k)),
         Genotype(dm.u_a, dm.u_a): int(round(x0[2] * model.k))}, model.k)
    rng = _replicate_rng(run.seed, 0)
    traj = ibm_engine.simulate(init, model, horizon, rng,
                               dt_record=run.dt_record)
    cols = [traj.genotypes.index(g) for g in
            (Genotype(dm.u_A, dm.u_A), Genotype(dm.u_A, dm.u_a),
             Genotype(dm.u_a, dm.u_a))]
    n = min(len(flow.t), len(traj.times))
    dens = traj.densities()[:n, cols]
    sup_dist = float(np.max(np.abs(dens - flow.y[:n])))
    alive = dens.sum(axis=1) > 0.0
    mean_phi = dynamics.average_phenotype_series(dens[alive], dm.w_phi)
    delta = float(sec.get("m1_delta", horizon))
    modulus = tss.m1_modulus(traj.times[:n][alive], mean_phi, delta)
    report = {
        "ibm_vs_ode_sup_distance": sup_dist,
        "mean_phenotype_m1_modulus": modulus,
        "m1_delta": delta,
        "horizon": horizon,
        "K": model.k,
        "tss_vs_canonical_sup_distance": None,
    }
    tss_sec = scenario.section("tss")
    if tss_sec:
        u0 = float(tss_sec["u0"])
        eta = float(tss_sec.get("eta", 0.05 * model.space.width))
        th = float(tss_sec.get("horizon", horizon))
        sig2 = model.sigma ** 2
        jump = tss.simulate_tss(model, u0, th, eta, _replicate_rng(run.seed, 1))
        can = canonical.integrate_canonical(model, u0, th * sig2,
                                            form="symmetric")
        # rescale the jump chain onto the canonical time axis
        grid = np.linspace(0.0, th * sig2, 201)
        u_tss = jump.traits[np.searchsorted(jump.times * sig2, grid,
                                            side="right") - 1]
        u_can = np.interp(grid, can.t, can.u)
        report["tss_vs_canonical_sup_distance"] = float(
            np.max(np.abs(u_tss - u_can)))
    with open(outdir / "compare.json", "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    return ["compare.json"]


_COMMANDS = {
    "ibm": cmd_ibm,
    "ode": cmd_ode,
    "tss": cmd_tss,
    "canonical": cmd_canonical,
    "invasion": cmd_invasion,
    "compare": cmd_compare,
    "ess": cmd_ess,
}


def _run_one(command: str, scenario: Scenario, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = _COMMANDS[command](scenario, outdir)
    _write_manifest(outdir, command, scenario, outputs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="diplodyn",
        description="Adaptive dynamics of diploid Mendelian populations")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="scenario YAML file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario master seed")
    parser.add_argument("--replicates", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        scenario = load_scenario(args.config)
        cfg = scenario.config
        if args.seed is not None:
            cfg = set_by_path(cfg, "run.seed", args.seed)
        if args.replicates is not None:
            cfg = set_by_path(cfg, "run.replicates", args.replicates)
        if args.threads is not None:
            cfg = set_by_path(cfg, "run.threads", args.threads)
        scenario = scenario_from_dict(cfg)

        base = Path(args.out)
        if scenario.sweep is not None:
            runs = []
            for value in scenario.sweep.values:
                sub_cfg = set_by_path(cfg, scenario.sweep.parameter, value)
                sub_cfg["sweep"] = None
                sub = scenario_from_dict(sub_cfg)
                name = f"{scenario.sweep.parameter.replace('.', '_')}={value}"
                _run_one(args.command, sub, base / name)
                runs.append(name)
            base.mkdir(parents=True, exist_ok=True)
            with open(base / "manifest.json", "w") as fh:
                json.dump({"command": args.command, "version": __version__,
                           "sweep": {"parameter": scenario.sweep.parameter,
                                     "values": scenario.sweep.values},
                           "runs": runs}, fh, indent=1, sort_keys=True)
        else:
            _run_one(args.command, scenario, base)
    except (ConfigError, ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr, indent=1)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
