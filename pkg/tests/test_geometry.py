import numpy as np
import pytest

from conftest import load_fixture, make_model

from diplodyn.canonical import fitness_gradient
from diplodyn.dynamics import (
    DimorphicModel,
    constant_dimorphic,
    genotype_rhs,
    numerical_jacobian,
)
from diplodyn.geometry import (
    DegenerateCurveError,
    NeutralGeometry,
    count_zeros_near_curve,
    g_limit,
    reduced_field,
    scan_zero_curve,
    zero_curve,
)


@pytest.fixture(scope="module")
def geom():
    return NeutralGeometry(2.0, 1.0, 1.0)  # n0 = 1


class TestNeutralLine:
    def test_endpoints_are_monomorphic_equilibria(self, geom):
        n0 = geom.n0
        assert np.allclose(geom.gamma0(-n0), [n0, 0.0, 0.0], atol=1e-15)
        assert np.allclose(geom.gamma0(n0), [0.0, 0.0, n0], atol=1e-15)

    def test_line_consists_of_fixed_points(self, geom):
        dm = constant_dimorphic(geom.f, geom.d0, geom.d1)
        worst = max(np.max(np.abs(genotype_rhs(geom.gamma0(v), dm)))
                    for v in np.linspace(-geom.n0, geom.n0, 33))
        assert worst < 1e-10

    def test_dual_basis_orthonormality(self, geom):
        for v in np.linspace(-geom.n0, geom.n0, 21):
            B = geom.basis(v)
            D = geom.duals(v)
            assert np.max(np.abs(D @ B - np.eye(3))) < 1e-10

    def test_known_vectors_at_minus_n0(self, geom):
        n0 = geom.n0
        assert np.allclose(geom.e2(-n0), [-1.0, 1.0, 0.0], atol=1e-15)
        assert np.allclose(geom.duals(-n0)[1], [0.0, 1.0, 2.0], atol=1e-12)

    def test_eigenvector_relations_by_finite_differences(self, geom):
        dm = constant_dimorphic(geom.f, geom.d0, geom.d1)
        lam = geom.eigenvalues
        worst = 0.0
        for v in np.linspace(-geom.n0, geom.n0, 11):
            J = numerical_jacobian(lambda y: genotype_rhs(y, dm),
                                   geom.gamma0(v))
            for i, e in enumerate((geom.e1(v), geom.e2(v), geom.e3(v))):
                worst = max(worst, np.max(np.abs(J @ e - lam[i] * e)))
        assert worst < 1e-8

    def test_rejects_invalid_constants(self):
        with pytest.raises(ValueError):
            NeutralGeometry(1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            NeutralGeometry(2.0, 1.0, 0.0)


def perturbed_dimorphic(zeta, uA=0.3):
    model = make_model("affine_death")
    return DimorphicModel.from_model(model, uA, uA + zeta)


class TestZeroCurve:
    def test_unperturbed_curve_is_trivial(self, geom):
        fx = load_fixture("reduced_g.json")
        model = make_model("affine_death")
        geom_s = NeutralGeometry.at_resident(model, fx["uA"])
        dm0 = DimorphicModel.from_model(model, fx["uA"], fx["uA"])
        for v in np.linspace(-geom_s.n0, geom_s.n0, 7):
            r, s = zero_curve(dm0, geom_s, v)
            assert abs(r) < 1e-12 and abs(s) < 1e-12

    def test_curve_size_scales_linearly_in_zeta(self):
        fx = load_fixture("reduced_g.json")
        model = make_model("affine_death")
        geom_s = NeutralGeometry.at_resident(model, fx["uA"])
        vgrid = np.linspace(-geom_s.n0, geom_s.n0, 9)
        sizes = []
        for zeta in (0.02, 0.01):
            dm = perturbed_dimorphic(zeta, fx["uA"])
            sizes.append(max(max(abs(r), abs(s))
                             for r, s in (zero_curve(dm, geom_s, v)
                                          for v in vgrid)))
        ratio = sizes[1] / sizes[0]
        assert 0.4 <= ratio <= 0.6  # halving zeta halves the curve within 20%

    def test_reduced_field_converges_to_g(self):
        fx = load_fixture("reduced_g.json")
        model = make_model("affine_death")
        geom_s = NeutralGeometry.at_resident(model, fx["uA"])
        errs = []
        for zeta in fx["zeta_ladder"]:
            dm = perturbed_dimorphic(zeta, fx["uA"])
            err = max(abs(reduced_field(dm, geom_s, v) / zeta - g)
                      for v, g in zip(fx["v_grid"], fx["g"]))
            errs.append(err)
        # first-order convergence: each halving of zeta halves the error
        for a, b in zip(errs[:-1], errs[1:]):
            assert b < 0.7 * a

    def test_g_limit_matches_fixture_formula(self):
        fx = load_fixture("reduced_g.json")
        model = make_model("affine_death")
        geom_s = NeutralGeometry.at_resident(model, fx["uA"])
        ds = fitness_gradient(model, fx["uA"])
        assert ds == pytest.approx(fx["dS_dzeta"], abs=1e-8)
        for v, g in zip(fx["v_grid"], fx["g"]):
            assert g_limit(geom_s, ds, v) == pytest.approx(g, abs=1e-10)


class TestTwoZeros:
    def test_generic_perturbation_has_exactly_two(self):
        fx = load_fixture("reduced_g.json")
        model = make_model("affine_death")
        geom_s = NeutralGeometry.at_resident(model, fx["uA"])
        dm = perturbed_dimorphic(fx["zeta"], fx["uA"])
        assert count_zeros_near_curve(dm, geom_s) == 2

    def test_gaussian_scenario_has_exactly_two(self):
        model = make_model("gaussian")
        uA = 0.5
        geom_s = NeutralGeometry.at_resident(model, uA)
        dm = DimorphicModel.from_model(model, uA, uA + 1e-2)
        assert count_zeros_near_curve(dm, geom_s) == 2

    def test_unperturbed_case_reported_degenerate(self):
        model = make_model("affine_death")
        uA = 0.3
        geom_s = NeutralGeometry.at_resident(model, uA)
        dm = DimorphicModel.from_model(model, uA, uA)
        with pytest.raises(DegenerateCurveError):
            count_zeros_near_curve(dm, geom_s)

    def test_roots_sit_near_the_monomorphic_equilibria(self):
        fx = load_fixture("reduced_g.json")
        model = make_model("affine_death")
        zeta = fx["zeta"]
        geom_s = NeutralGeometry.at_resident(model, fx["uA"])
        dm = perturbed_dimorphic(zeta, fx["uA"])
        scan = scan_zero_curve(dm, geom_s)
        assert scan.count == 2
        n0 = geom_s.n0
        lo_root, hi_root = sorted(scan.roots)
        assert abs(lo_root + n0) < 10 * zeta
        assert abs(hi_root - n0) < 10 * zeta
        # the frame point at each root approximates the true equilibrium
        nAA = fx["equilibria"]["nbar_AA"]
        naa = fx["equilibria"]["nbar_aa"]
        r, s = zero_curve(dm, geom_s, lo_root)
        pt = geom_s.frame_point(lo_root, r, s)
        assert np.max(np.abs(pt - [nAA, 0.0, 0.0])) < 10 * zeta
        r, s = zero_curve(dm, geom_s, hi_root)
        pt = geom_s.frame_point(hi_root, r, s)
        assert np.max(np.abs(pt - [0.0, 0.0, naa])) < 10 * zeta
