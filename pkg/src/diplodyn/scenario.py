"""Scenario files: everything a run needs, in one YAML document.

A scenario selects the model function families and their parameters, the
initial condition, and run/sweep settings. Keeping functions inside named
parametric families (rather than arbitrary code) makes configurations
portable and every run reproducible from its manifest.
"""

from __future__ import annotations

import copy
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .ibm import PopulationState
from .model import ConfigError, DemographyModel, Genotype, build_model


class TimeScaleWindowWarning(UserWarning):
    """The substitution time-scale separation looks violated."""


@dataclass
class RunSpec:
    horizon: float = 10.0
    dt_record: float = 0.1
    seed: int = 0
    replicates: int = 1
    threads: int = 1


@dataclass
class SweepSpec:
    parameter: str
    values: list


@dataclass
class Scenario:
    """Parsed scenario: a validated model plus run settings and the raw
    resolved configuration (as written to run manifests)."""

    config: dict
    model: DemographyModel
    run: RunSpec
    sweep: Optional[SweepSpec] = None

    def section(self, name: str) -> dict:
        return self.config.get(name, {}) or {}

    def initial_state(self) -> PopulationState:
        init = self.section("initial")
        kind = init.get("kind", "monomorphic")
        if kind == "monomorphic":
            try:
                u = float(init["u"])
                density = float(init["density"])
            except KeyError as exc:
                raise ConfigError(f"initial: missing field {exc}") from exc
            n = int(round(density * self.model.k))
            return PopulationState({Genotype(u, u): n}, self.model.k)
        if kind == "counts":
            counts = {}
            for row in init.get("genotypes", []):
                g = Genotype(float(row["u1"]), float(row["u2"]))
                counts[g] = counts.get(g, 0) + int(row["count"])
            if not counts:
                raise ConfigError("initial: empty genotype count list")
            return PopulationState(counts, self.model.k)
        raise ConfigError(f"initial: unknown kind {kind!r}")


def check_time_scale_window(model: DemographyModel) -> None:
    """Advisory check of ln(K)/sigma << 1/(K mu_K).

    Only the left inequality is verifiable at run time; the exp(V K) upper
    side involves an unknown rate constant and is documented as such.
    """
    if model.mu_k <= 0.0:
        return
    left = math.log(model.k) / model.sigma
    right = 1.0 / (model.k * model.mu_k)
    if not (left < right):
        warnings.warn(
            f"time-scale window violated: ln(K)/sigma = {left:.3g} is not "
            f"below 1/(K mu_K) = {right:.3g}; substitution dynamics may "
            "overlap with mutation arrivals", TimeScaleWindowWarning)


def set_by_path(cfg: dict, dotted: str, value: Any) -> dict:
    """Return a copy of cfg with the dotted key path replaced."""
    out = copy.deepcopy(cfg)
    node = out
    keys = dotted.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
    return out


def scenario_from_dict(cfg: dict) -> Scenario:
    model = build_model(cfg)
    check_time_scale_window(model)
    run_cfg = cfg.get("run", {}) or {}
    run = RunSpec(
        horizon=float(run_cfg.get("horizon", 10.0)),
        dt_record=float(run_cfg.get("dt_record", 0.1)),
        seed=int(run_cfg.get("seed", 0)),
        replicates=int(run_cfg.get("replicates", 1)),
        threads=int(run_cfg.get("threads", 1)),
    )
    sweep = None
    if "sweep" in cfg and cfg["sweep"]:
        s = cfg["sweep"]
        try:
            sweep = SweepSpec(str(s["parameter"]), list(s["values"]))
        except KeyError as exc:
            raise ConfigError(f"sweep: missing field {exc}") from exc
    return Scenario(cfg, model, run, sweep)


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        try:
            cfg = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse scenario file {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"scenario file {path} is not a mapping")
    return scenario_from_dict(cfg)
