import numpy as np
import pytest

from surfband.discretize import build_grid
from surfband.fields import (
    ABFlux,
    GaugeFunction,
    Sampled,
    UniformAxial,
    add_gauge,
    eval_potential,
    link_integrals,
    load_sampled_csv,
    magnetic_field_of,
    materialize,
    sample_magnetic_field,
    sample_potential,
    surface_gradient,
    zero_field,
)
from surfband.geometry import cylinder, ring, sphere


class TestEvalPotential:
    def test_uniform_axial_cylinder(self):
        # A_theta = B R / 2 from the curl in cylindrical coordinates
        surf = cylinder(1.0, 1.0)
        for th in (0.0, 1.0, 4.0):
            a1, a2 = eval_potential(UniformAxial(B=2.0), surf, (th, 0.3))
            assert a1 == pytest.approx(1.0) and a2 == 0.0

    def test_uniform_axial_sphere_equator(self):
        a1, a2 = eval_potential(UniformAxial(B=1.0), sphere(1.0), (np.pi / 2, 0.0))
        assert a1 == 0.0 and a2 == pytest.approx(0.5)

    def test_zero_flux_is_zero(self):
        comps = eval_potential(ABFlux(Phi=0.0), ring(1.0), (0.7,))
        assert all(c == 0.0 for c in comps)

    def test_ab_flux_value(self):
        a1, _ = eval_potential(ABFlux(Phi=2 * np.pi), ring(2.0), (0.0,))
        assert a1 == pytest.approx(1.0 / 2.0)

    def test_sphere_pole_singular(self):
        with pytest.raises(ValueError, match="singular potential at pole"):
            eval_potential(ABFlux(Phi=1.0), sphere(1.0), (0.0, 0.0))

    def test_radial_component_appended(self):
        out = eval_potential(ABFlux(Phi=0.0, radial_component=0.4), ring(1.0), (0.0,))
        assert out[-1] == pytest.approx(0.4)


class TestMagneticField:
    def test_uniform_axial_curl(self):
        assert magnetic_field_of(UniformAxial(B=2.0), cylinder(1.0, 1.0), (0.0, 0.0)) == (0.0, 0.0, 2.0)

    def test_ab_flux_pure_gauge(self):
        assert magnetic_field_of(ABFlux(Phi=3.0), ring(1.0), (1.0,)) == (0.0, 0.0, 0.0)

    def test_sampled_constant_axial_curl_free(self):
        surf = cylinder(1.0, 1.0)
        g = build_grid(surf, 8, 8)
        spec = Sampled(grid=g, a1=np.zeros((8, 8)), a2=np.full((8, 8), 1.3))
        B = magnetic_field_of(spec, surf, (g.coords1[2], g.coords2[3]))
        np.testing.assert_allclose(B, 0.0, atol=1e-12)

    def test_sphere_uniform_axial_components(self):
        th = 0.8
        Br, Bth, Bph = magnetic_field_of(UniformAxial(B=1.5), sphere(1.0), (th, 0.0))
        assert Br == pytest.approx(1.5 * np.cos(th))
        assert Bth == pytest.approx(-1.5 * np.sin(th))
        assert Bph == 0.0


class TestSurfaceGradient:
    def test_constant_gives_zero(self):
        surf = ring(1.0)
        g = build_grid(surf, 16)
        lam = GaugeFunction.from_callable(lambda t, z: 2.5, g)
        g1, g2 = surface_gradient(lam, surf, g)
        np.testing.assert_allclose(g1, 0, atol=1e-14)
        np.testing.assert_allclose(g2, 0, atol=1e-14)

    def test_sin_theta_gains_cos_to_stencil_order(self):
        surf = ring(1.0)
        errs = []
        for n in (32, 64):
            g = build_grid(surf, n)
            lam = GaugeFunction.from_callable(lambda t, z: np.sin(t), g)
            g1, _ = surface_gradient(lam, surf, g)
            errs.append(np.abs(g1.ravel() - np.cos(g.coords1)).max())
        assert errs[1] < errs[0] / 3.2  # second order
        assert errs[0] < 1e-2

    def test_linear_z_exact(self):
        surf = cylinder(1.0, 2.0)
        g = build_grid(surf, 6, 10)
        lam = GaugeFunction.from_callable(lambda t, z: z, g)
        g1, g2 = surface_gradient(lam, surf, g)
        np.testing.assert_allclose(g2, 1.0, atol=1e-12)
        np.testing.assert_allclose(g1, 0.0, atol=1e-12)

    def test_multivalued_rejected(self):
        g = build_grid(ring(1.0), 16)
        with pytest.raises(ValueError, match="multivalued"):
            GaugeFunction.from_callable(lambda t, z: t, g)


class TestAddGauge:
    def test_constant_keeps_zero_field(self):
        surf = ring(1.0)
        g = build_grid(surf, 16)
        lam = GaugeFunction.from_callable(lambda t, z: 1.0, g)
        shifted = add_gauge(zero_field(), lam, g)
        np.testing.assert_allclose(shifted.a1, 0, atol=1e-14)

    def test_curl_grad_vanishes(self):
        # the two directional stencils commute on the tensor grid, so the
        # gauge shift leaves the sampled field of a uniform B untouched
        surf = cylinder(1.0, np.pi)
        g = build_grid(surf, 16, 16)
        lam = GaugeFunction.from_callable(lambda t, z: np.sin(t) * np.cos(z), g)
        shifted = add_gauge(UniformAxial(B=1.0), lam, g)
        B1, B2, B3 = sample_magnetic_field(shifted, g)
        assert np.abs(B1).max() < 1e-12
        assert np.abs(B2).max() < 1e-12
        assert np.abs(B3 - 1.0).max() < 1e-12

    def test_curl_grad_vanishes_on_sphere(self):
        surf = sphere(1.0)
        g = build_grid(surf, 16, 16)
        lam = GaugeFunction.from_callable(lambda t, p: np.cos(t) * np.cos(p), g)
        shifted = add_gauge(UniformAxial(B=1.0), lam, g)
        direct = sample_magnetic_field(UniformAxial(B=1.0), g)
        got = sample_magnetic_field(shifted, g)
        for a, b in zip(got, direct):
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_gauge_and_inverse_restore_samples(self):
        surf = ring(1.0)
        g = build_grid(surf, 32)
        lam = GaugeFunction.from_callable(lambda t, z: np.sin(t), g)
        minus = GaugeFunction(-lam.values, "-lambda")
        spec = add_gauge(add_gauge(UniformAxial(B=1.0), lam, g), minus, g)
        base1, _ = sample_potential(UniformAxial(B=1.0), g)
        np.testing.assert_allclose(spec.a1, base1, atol=1e-13)
        # attached increments cancel exactly in the link integrals
        li = link_integrals(spec, g)
        li0 = link_integrals(UniformAxial(B=1.0), g)
        np.testing.assert_allclose(li["axis1"], li0["axis1"], atol=1e-15)

    def test_addition_associative(self):
        surf = ring(1.0)
        g = build_grid(surf, 24)
        rng = np.random.default_rng(11)
        lam_a = GaugeFunction(rng.standard_normal((24, 1)), "a")
        lam_b = GaugeFunction(rng.standard_normal((24, 1)), "b")
        ab = add_gauge(add_gauge(zero_field(), lam_a, g), lam_b, g)
        ba = add_gauge(add_gauge(zero_field(), lam_b, g), lam_a, g)
        np.testing.assert_allclose(ab.a1, ba.a1, atol=1e-13)


class TestSampledEvaluation:
    def test_eval_at_node(self):
        g = build_grid(ring(1.0), 8)
        vals = np.arange(8.0).reshape(8, 1)
        spec = Sampled(grid=g, a1=vals, a2=np.zeros((8, 1)))
        a1, a2 = eval_potential(spec, g.surface, (g.coords1[3],))
        assert a1 == 3.0 and a2 == 0.0

    def test_eval_off_node_rejected(self):
        g = build_grid(ring(1.0), 8)
        spec = Sampled(grid=g, a1=np.zeros((8, 1)), a2=np.zeros((8, 1)))
        with pytest.raises(ValueError, match="grid node"):
            eval_potential(spec, g.surface, (0.1234,))

    def test_integer_flux_quanta_leave_spectrum(self):
        # n flux quanta are invisible to the ring spectrum, exactly
        from surfband.analysis import spectrum
        from surfband.geometry import PhysicalConstants
        from surfband.hamiltonians import HamiltonianRequest, build_hamiltonian

        g = build_grid(ring(1.0), 32)
        c = PhysicalConstants()
        ev0 = spectrum(build_hamiltonian(
            HamiltonianRequest(g.surface, g, ABFlux(Phi=0.0)))).eigenvalues
        ev2 = spectrum(build_hamiltonian(
            HamiltonianRequest(g.surface, g, ABFlux(Phi=2 * c.flux_quantum)))).eigenvalues
        assert np.abs(ev0 - ev2).max() < 1e-10


class TestMaterialize:
    def test_materialize_drops_exact_terms(self):
        g = build_grid(ring(1.0), 16)
        lam = GaugeFunction.from_callable(lambda t, z: np.sin(t), g)
        shifted = add_gauge(UniformAxial(B=1.0), lam, g)
        plain = materialize(shifted, g)
        assert plain.gauge_terms == ()
        np.testing.assert_allclose(plain.a1, shifted.a1)


class TestCsvLoading:
    def test_round_trip(self, tmp_path):
        surf = cylinder(1.0, 1.0)
        g = build_grid(surf, 4, 4)
        rng = np.random.default_rng(2)
        a1 = rng.standard_normal((4, 4))
        a2 = rng.standard_normal((4, 4))
        ar = rng.standard_normal((4, 4))
        path = tmp_path / "field.csv"
        lines = ["coord1,coord2,A_1,A_2,A_r"]
        for j, t in enumerate(g.coords1):
            for k, z in enumerate(g.coords2):
                lines.append(f"{t:.17g},{z:.17g},{a1[j,k]:.17g},{a2[j,k]:.17g},{ar[j,k]:.17g}")
        path.write_text("\n".join(lines) + "\n")
        spec = load_sampled_csv(path, g)
        np.testing.assert_allclose(spec.a1, a1)
        np.testing.assert_allclose(spec.a2, a2)
        np.testing.assert_allclose(spec.radial_component, ar)

    def test_header_mandatory(self, tmp_path):
        g = build_grid(ring(1.0), 4)
        path = tmp_path / "bad.csv"
        path.write_text("0.0,0.0,1.0,0.0\n")
        with pytest.raises(ValueError, match="header"):
            load_sampled_csv(path, g)

    def test_non_node_coordinates_rejected(self, tmp_path):
        g = build_grid(ring(1.0), 4)
        path = tmp_path / "bad2.csv"
        rows = ["coord1,coord2,A_1,A_2"]
        rows += [f"{0.123 + j},0.0,1.0,0.0" for j in range(4)]
        path.write_text("\n".join(rows) + "\n")
        with pytest.raises(ValueError, match="grid node"):
            load_sampled_csv(path, g)

    def test_non_finite_samples_rejected(self):
        g = build_grid(ring(1.0), 4)
        with pytest.raises(ValueError, match="non-finite"):
            Sampled(grid=g, a1=np.array([np.inf, 0, 0, 0]), a2=np.zeros(4))
