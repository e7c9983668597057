"""Neutral fixed-point geometry and the perturbed zero-curve analysis.

With equal fertility f, background death d0 and competition d1 across all
three genotypes, the flow has a line of Hardy-Weinberg equilibria. This
module evaluates that line, its eigenbasis and dual basis, continues the
zeros of the weakly perturbed field along a tubular coordinate frame, and
counts the equilibria that survive the perturbation (generically the two
monomorphic ones).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dynamics import DimorphicModel, genotype_rhs
from .model import DemographyModel, Genotype


class NoCurveError(RuntimeError):
    """Zero-curve continuation failed; the perturbation is too large."""


class DegenerateCurveError(RuntimeError):
    """The reduced field vanishes identically (neutral perturbation)."""


@dataclass(frozen=True)
class NeutralGeometry:
    """Closed-form geometry of the neutral line of fixed points.

    Parametrized by v in [-n0, n0], the line runs from the pure-AA
    equilibrium (v = -n0) to the pure-aa one (v = +n0), where
    n0 = (f - d0) / d1.
    """

    f: float
    d0: float
    d1: float

    def __post_init__(self):
        if self.f <= self.d0:
            raise ValueError("neutral geometry needs f > d0")
        if self.d1 <= 0.0:
            raise ValueError("neutral geometry needs d1 > 0")

    @classmethod
    def at_resident(cls, model: DemographyModel, u_A: float) -> "NeutralGeometry":
        g = Genotype(u_A, u_A)
        p = model.phenotype(g)
        return cls(model.fertility(p), model.base_death(p),
                   model.competition(p, p))

    @property
    def n0(self) -> float:
        return (self.f - self.d0) / self.d1

    @property
    def eigenvalues(self) -> tuple[float, float, float]:
        return (self.d0 - self.f, 0.0, -self.f)

    def gamma0(self, v: float) -> np.ndarray:
        n0 = self.n0
        return np.array([
            (v - n0) ** 2 / (4.0 * n0),
            -(v * v - n0 * n0) / (2.0 * n0),
            (v + n0) ** 2 / (4.0 * n0),
        ])

    def e1(self, v: float) -> np.ndarray:
        return self.gamma0(v)

    def e2(self, v: float) -> np.ndarray:
        n0 = self.n0
        return np.array([(v - n0) / (2.0 * n0), -v / n0, (v + n0) / (2.0 * n0)])

    def e3(self, v: float) -> np.ndarray:
        return np.array([1.0, -2.0, 1.0]) / (2.0 * self.n0)

    def basis(self, v: float) -> np.ndarray:
        """Eigenvector matrix with columns (e1, e2, e3)."""
        return np.column_stack([self.e1(v), self.e2(v), self.e3(v)])

    def duals(self, v: float) -> np.ndarray:
        """Dual basis as rows: <duals[i], basis[:, j]> = delta_ij."""
        return np.linalg.inv(self.basis(v))

    def frame_point(self, v: float, r: float, s: float) -> np.ndarray:
        """Tubular-frame parametrization (1 + r) Gamma0(v) + s e3(v)."""
        return (1.0 + r) * self.gamma0(v) + s * self.e3(v)


def zero_curve(dm: DimorphicModel, geom: NeutralGeometry, v: float,
               max_iter: int = 50, tol: float = 1e-12) -> tuple[float, float]:
    """Solve the transversal zero conditions for (r, s) near (0, 0).

    Newton iteration with damped steps on the two hyperbolic components
    <beta1, X(M(v, r, s))> = <beta3, X(M(v, r, s))> = 0. Non-convergence
    within max_iter signals the allelic step is too large for the tubular
    analysis.
    """
    duals = geom.duals(v)
    b1, b3 = duals[0], duals[2]

    def residual(r, s):
        X = genotype_rhs(geom.frame_point(v, r, s), dm)
        return np.array([b1 @ X, b3 @ X])

    r = s = 0.0
    g = residual(r, s)
    for _ in range(max_iter):
        if np.max(np.abs(g)) < tol:
            return r, s
        h = 1e-8
        J = np.column_stack([
            (residual(r + h, s) - residual(r - h, s)) / (2.0 * h),
            (residual(r, s + h) - residual(r, s - h)) / (2.0 * h),
        ])
        try:
            dr, ds = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError as exc:
            raise NoCurveError(f"singular Newton system at v={v}") from exc
        lam = 1.0
        for _ in range(40):
            gn = residual(r + lam * dr, s + lam * ds)
            if np.linalg.norm(gn) < np.linalg.norm(g):
                break
            lam *= 0.5
        r += lam * dr
        s += lam * ds
        g = gn
    if np.max(np.abs(g)) < tol:
        return r, s
    raise NoCurveError(
        f"no zero curve at v={v}: residual {np.max(np.abs(g)):.2e} "
        "(allelic step too large)")


def reduced_field(dm: DimorphicModel, geom: NeutralGeometry, v: float) -> float:
    """Neutral-direction component <beta2, X> evaluated on the zero curve."""
    r, s = zero_curve(dm, geom, v)
    return float(geom.duals(v)[1] @ genotype_rhs(geom.frame_point(v, r, s), dm))


def g_limit(geom: NeutralGeometry, ds_dzeta: float, v: float) -> float:
    """First-order limit of reduced_field / zeta for small allelic steps:
    -(1 / 2 n0) dS/dzeta(0) (v^2 - n0^2)."""
    n0 = geom.n0
    return -(ds_dzeta / (2.0 * n0)) * (v * v - n0 * n0)


@dataclass
class ZeroScan:
    v_grid: np.ndarray
    values: np.ndarray
    roots: list[float]
    degenerate: bool

    @property
    def count(self) -> int:
        return len(self.roots)


def scan_zero_curve(dm: DimorphicModel, geom: NeutralGeometry,
                    delta: float | None = None, n_grid: int = 81,
                    degenerate_tol: float = 1e-12) -> ZeroScan:
    """Scan the reduced field along the zero curve and bracket its roots.

    The scan covers [-n0 - delta, n0 + delta] with the default tubular
    half-width delta = 0.1 n0. A reduced field below degenerate_tol
    everywhere is reported as degenerate (the unperturbed case: the whole
    curve consists of zeros).
    """
    n0 = geom.n0
    if delta is None:
        delta = 0.1 * n0
    vg = np.linspace(-n0 - delta, n0 + delta, n_grid)
    vals = np.array([reduced_field(dm, geom, v) for v in vg])
    if np.max(np.abs(vals)) < degenerate_tol:
        return ZeroScan(vg, vals, [], True)
    roots = []
    for a, b, fa, fb in zip(vg[:-1], vg[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(brentq(lambda v: reduced_field(dm, geom, v), a, b,
                                      xtol=1e-12)))
    if vals[-1] == 0.0:
        roots.append(float(vg[-1]))
    return ZeroScan(vg, vals, roots, False)


def count_zeros_near_curve(dm: DimorphicModel, geom: NeutralGeometry,
                           delta: float | None = None, n_grid: int = 81) -> int:
    """Number of equilibria of the perturbed field near the neutral line.

    Raises DegenerateCurveError for a neutral perturbation (zeta = 0),
    where every point of the curve is an equilibrium.
    """
    scan = scan_zero_curve(dm, geom, delta, n_grid)
    if scan.degenerate:
        raise DegenerateCurveError(
            "reduced field vanishes identically; the whole curve is zeros")
    return scan.count
