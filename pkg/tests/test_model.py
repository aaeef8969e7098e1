import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voigt_evp import kernels
from voigt_evp.errors import InvalidArgument
from voigt_evp.model import (
    ForcingSpec,
    PhysicalParams,
    State,
    VoigtEVP,
    deviator,
    eval_forcing,
    momentum_rhs,
    nondimensional_params,
    ocean_stress,
    perp,
    random_state,
    rest_state,
    rheology_relaxation,
    smooth_state,
    strain_rate,
    strain_rate_original,
    strain_rate_simplified,
    strain_rate_smoothed_max,
    stress_rhs,
    sym_gradient,
    table_params,
    trace,
    wind_stress,
)
from voigt_evp.spectral import TWO_PI, divergence_sym_tensor, galerkin_project, make_grid, voigt_invert


def const_tensor(g, a11, a12, a21, a22):
    return np.array([[a11, a12], [a21, a22]], dtype=float).reshape(2, 2, 1, 1) * np.ones(g.shape)


class TestParams:
    def test_table_defaults(self):
        p = table_params()
        assert (p.E_mod, p.alpha, p.P, p.e_bar) == (0.25, 0.1, 27.5e3, 2.0)
        assert p.c_a * p.rho_a == pytest.approx(1.56e-3)
        assert p.m == 1.0

    @pytest.mark.parametrize("field,value", [
        ("P", 0.0), ("E_mod", -1.0), ("e_bar", 1.0), ("alpha", -0.1), ("eps", -1e-3),
        ("theta", 0.8), ("c_w", -1.0), ("rho_a", 0.0), ("m", 2.0), ("P", float("nan")),
    ])
    def test_rejects(self, field, value):
        with pytest.raises(InvalidArgument):
            table_params(**{field: value})

    def test_theta_message_names_bound(self):
        with pytest.raises(InvalidArgument, match="pi/4"):
            table_params(theta=0.8)

    def test_with(self):
        p = nondimensional_params()
        assert p.with_(eps=0.0).eps == 0.0 and p.eps == 0.1


class TestKinematics:
    def test_zero(self):
        g = make_grid(4)
        assert np.all(sym_gradient(g, g.zeros(2)) == 0.0)

    def test_shear_example(self):
        g = make_grid(4)
        x, y = g.coords()
        u = np.stack([np.sin(TWO_PI * y), np.zeros(g.shape)])
        D = sym_gradient(g, u)
        assert np.allclose(D[0, 1], np.pi * np.cos(TWO_PI * y), atol=1e-12)
        assert np.allclose(D[1, 0], D[0, 1], atol=0)
        assert np.allclose(D[0, 0], 0, atol=1e-12) and np.allclose(D[1, 1], 0, atol=1e-12)

    def test_random_symmetric_and_matches_fd(self, rng):
        from conftest import TrigField
        g = make_grid(5)
        x, y = g.coords()
        tf = [TrigField(4, rng), TrigField(4, rng)]
        D = sym_gradient(g, np.stack([f(x, y) for f in tf]))
        assert np.array_equal(D, D.swapaxes(0, 1))
        h = 1e-5
        d12 = 0.5 * ((tf[0](x, y + h) - tf[0](x, y - h)) + (tf[1](x + h, y) - tf[1](x - h, y))) / (2 * h)
        assert np.max(np.abs(D[0, 1] - d12)) < 1e-5 * np.max(np.abs(d12))


class TestStrainRates:
    def test_simplified_examples(self):
        g = make_grid(2)
        assert np.allclose(strain_rate_simplified(g.zeros(2, 2), 0.1), 0.1)
        assert np.allclose(strain_rate_simplified(const_tensor(g, 1, 0, 0, 1), 0.0), math.sqrt(2))

    def test_original_examples(self):
        g = make_grid(2)
        c, eps = 0.7, 0.2
        assert np.allclose(strain_rate_original(const_tensor(g, c, 0, 0, c), 2.0, eps),
                           math.sqrt(4 * c * c + eps * eps))
        s = 0.3
        for e_bar in (1.5, 2.0, 3.0):
            assert np.allclose(strain_rate_original(const_tensor(g, 0, s, s, 0), e_bar, eps),
                               math.sqrt(4 * s * s / e_bar**2 + eps * eps))
        with pytest.raises(InvalidArgument):
            strain_rate_original(const_tensor(g, 0, s, s, 0), 1.0, eps)

    def test_original_uniaxial(self):
        # u = (u(x), 0) gives sqrt(5/4) |u_x| for e_bar = 2
        g = make_grid(4)
        x, y = g.coords()
        u = np.stack([np.sin(TWO_PI * x) + 0.3 * np.cos(2 * TWO_PI * x), np.zeros(g.shape)])
        D = sym_gradient(g, u)
        assert np.allclose(strain_rate_original(D, 2.0, 0.0), math.sqrt(1.25) * np.abs(D[0, 0]),
                           atol=1e-12)

    def test_smoothed_max_examples(self, rng):
        Dbar = np.abs(rng.standard_normal(500))
        eps = 0.4
        assert np.array_equal(strain_rate_smoothed_max(Dbar, eps, 0.0), np.maximum(Dbar, eps))
        assert strain_rate_smoothed_max(np.array(eps), eps, 0.1) == pytest.approx(eps + 0.1)

    def test_smoothed_max_order_in_gamma(self, rng):
        Dbar = np.abs(rng.standard_normal(500))
        eps = 0.4
        errs = []
        for gamma in (0.1, 0.05, 0.025):
            v = strain_rate_smoothed_max(Dbar, eps, gamma)
            assert np.all(v >= np.maximum(Dbar, eps))
            errs.append(np.max(v - np.maximum(Dbar, eps)))
        # the largest gap sits at Dbar = eps and equals gamma exactly
        assert errs == pytest.approx([0.1, 0.05, 0.025], rel=1e-2)

    @pytest.mark.parametrize("variant", ["simplified", "original", "smoothed_max"])
    def test_floor(self, variant, rng):
        g = make_grid(4)
        p = nondimensional_params(gamma=0.01)
        D = sym_gradient(g, random_state(g, p, rng).u)
        assert np.all(strain_rate(D, p, variant) >= p.eps)

    def test_unknown_variant(self):
        g = make_grid(2)
        with pytest.raises(InvalidArgument):
            strain_rate(g.zeros(2, 2), nondimensional_params(), "bogus")

    def test_l2_bound_by_gradient(self, rng):
        g = make_grid(8)
        p = nondimensional_params()
        for _ in range(5):
            u = random_state(g, p, rng, kmax=6).u
            D = sym_gradient(g, u)
            lhs = math.sqrt(np.mean(strain_rate_original(D, 2.0, p.eps) ** 2))
            grad = math.sqrt(np.mean(np.sum(D * D, axis=(0, 1))))
            assert lhs <= math.sqrt(2) * (grad + p.eps)


class TestRheology:
    def test_steady_shift_vanishes(self, rng):
        g = make_grid(4)
        sigma = const_tensor(g, -13.75, 0, 0, -13.75)
        Dfield = np.abs(rng.standard_normal(g.shape))
        assert np.all(rheology_relaxation(sigma, Dfield, 27.5, 2.0) == 0.0)

    def test_zero_stress(self, rng):
        g = make_grid(4)
        Dfield = np.abs(rng.standard_normal(g.shape))
        R = rheology_relaxation(g.zeros(2, 2), Dfield, 3.0)
        assert np.allclose(R[0, 0], Dfield / 2) and np.allclose(R[1, 1], Dfield / 2)
        assert np.all(R[0, 1] == 0) and np.all(R[1, 0] == 0)

    def test_scalar_oracle(self, rng):
        P, e_bar = 2.5, 1.7
        sigma = rng.standard_normal((2, 2, 7))
        Dv = np.abs(rng.standard_normal(7))
        R = rheology_relaxation(sigma, Dv, P, e_bar)
        for n in range(7):
            s = sigma[:, :, n]
            d = Dv[n]
            tr = s[0, 0] + s[1, 1]
            expect = e_bar**2 * d / P * (s - 0.5 * tr * np.eye(2)) + d / (2 * P) * tr * np.eye(2) \
                + d / 2 * np.eye(2)
            assert np.allclose(R[:, :, n], expect, rtol=1e-13, atol=1e-14)

    def test_antisymmetric_part_law(self, rng):
        sigma = rng.standard_normal((2, 2, 9))
        Dv = np.abs(rng.standard_normal(9))
        P, e_bar = 1.3, 2.0
        R = rheology_relaxation(sigma, Dv, P, e_bar)
        W = 0.5 * (sigma - sigma.swapaxes(0, 1))
        assert np.allclose(0.5 * (R - R.swapaxes(0, 1)), e_bar**2 * Dv / P * W, rtol=1e-13)

    def test_nonpositive_strength(self):
        with pytest.raises(InvalidArgument):
            rheology_relaxation(np.zeros((2, 2, 1)), np.ones(1), 0.0)


class TestDrag:
    def test_perp(self):
        assert np.array_equal(perp(np.array([1.0, 0.0])), [0.0, 1.0])
        assert np.array_equal(perp(np.array([0.0, 1.0])), [-1.0, 0.0])

    def test_perp_orthogonal(self, rng):
        u = rng.standard_normal((2, 50))
        assert np.allclose(np.sum(u * perp(u), axis=0), 0.0, atol=1e-15)

    def test_wind_example(self):
        p = table_params(phi=0.0)
        out = wind_stress(np.array([[1.0], [0.0]]), p)
        assert out[:, 0] == pytest.approx([1.56e-3, 0.0])
        assert np.all(wind_stress(np.zeros((2, 3)), p) == 0)

    def test_ocean_examples(self, rng):
        p = table_params(theta=0.0)
        Uw = rng.standard_normal((2, 5))
        assert np.all(ocean_stress(Uw, Uw, p) == 0)
        out = ocean_stress(np.array([[1.0], [0.0]]), np.zeros((2, 1)), p)
        assert out[:, 0] == pytest.approx([p.c_w * p.rho_w, 0.0])

    def test_pointwise_oracle(self, rng):
        p = table_params()
        V = rng.standard_normal((2, 20))
        out = wind_stress(V, p)
        for n in range(20):
            v = V[:, n]
            rot = np.array([[math.cos(p.phi), -math.sin(p.phi)], [math.sin(p.phi), math.cos(p.phi)]])
            assert np.allclose(out[:, n], p.c_a * p.rho_a * np.linalg.norm(v) * rot @ v, rtol=1e-13)

    def test_ocean_drag_dissipative(self, rng):
        # V . T(V) >= 0 whenever theta <= pi/4
        p = table_params(theta=math.pi / 4)
        V = rng.standard_normal((2, 100))
        assert np.all(np.sum(V * ocean_stress(V, np.zeros_like(V), p), axis=0) >= 0)


class TestForcing:
    def test_zero_mode(self):
        g = make_grid(4)
        for f in eval_forcing(ForcingSpec("zero"), g, 0.3):
            assert np.all(f == 0)

    def test_gyre_values(self):
        from voigt_evp.model import gyre_ocean, gyre_wind
        assert gyre_ocean(0.5, 0.5) == (0.0, 0.0)
        ua = gyre_wind(np.array(0.0), np.array(0.0), 0.0, 1.0)
        assert (float(ua[0]), float(ua[1])) == (5.0, 5.0)

    def test_periodic_mode_is_periodic(self):
        from voigt_evp.model import periodic_ocean, periodic_wind
        for x, y in [(0.13, 0.71), (0.5, 0.25)]:
            assert np.allclose(periodic_ocean(x + 1, y + 1), periodic_ocean(x, y))
            assert np.allclose(periodic_wind(x + 1, y - 1, 0.3, 1.0), periodic_wind(x, y, 0.3, 1.0))

    def test_unknown_mode(self):
        with pytest.raises(InvalidArgument):
            ForcingSpec("gale")

    def test_negative_time(self):
        with pytest.raises(InvalidArgument):
            eval_forcing(ForcingSpec(), make_grid(2), -1.0)

    def test_topography(self):
        g = make_grid(4)
        x, y = g.coords()
        spec = ForcingSpec("zero", topography=lambda x, y: np.sin(TWO_PI * x))
        gradH = eval_forcing(spec, g, 0.0)[2]
        assert np.allclose(gradH[0], TWO_PI * np.cos(TWO_PI * x), atol=1e-12)


class TestRightHandSides:
    def test_momentum_examples(self):
        g = make_grid(4)
        x, y = g.coords()
        p = nondimensional_params(Omega=0.0)
        s = State(g.zeros(2), const_tensor(g, 1.0, 2.0, 3.0, 4.0), 0.0)
        assert np.max(np.abs(momentum_rhs(s, ForcingSpec("zero"), p, g))) < 1e-13
        sigma = g.zeros(2, 2)
        sigma[0, 0] = np.sin(TWO_PI * x)
        du = momentum_rhs(State(g.zeros(2), sigma, 0.0), ForcingSpec("zero"), p, g)
        assert np.allclose(du[0], TWO_PI * np.cos(TWO_PI * x), atol=1e-12)

    def test_momentum_assembly(self, rng):
        g = make_grid(6)
        p = nondimensional_params()
        s = random_state(g, p, rng)
        spec = ForcingSpec("paper", topography=lambda x, y: np.cos(TWO_PI * y))
        Ua, Uw, gH = eval_forcing(spec, g, 0.4)
        s = State(s.u, s.sigma, 0.4)
        expect = (divergence_sym_tensor(g, s.sigma)
                  + galerkin_project(g, wind_stress(Ua, p)) + galerkin_project(g, ocean_stress(Uw, s.u, p))
                  + p.Omega * perp(s.u) - p.g * gH)
        assert np.allclose(momentum_rhs(s, spec, p, g), expect, rtol=1e-13, atol=1e-13)

    def test_stress_steady(self):
        g = make_grid(4)
        p = nondimensional_params()
        assert np.all(stress_rhs(rest_state(g, p), p, g) == 0.0)

    def test_stress_single_mode(self):
        g = make_grid(4)
        p = nondimensional_params()
        x, y = g.coords()
        u = np.stack([np.sin(TWO_PI * y), np.cos(TWO_PI * x)])
        s = State(u, rest_state(g, p).sigma, 0.0)
        expect = p.E_mod * voigt_invert(g, sym_gradient(g, u), p.alpha)
        assert np.allclose(stress_rhs(s, p, g), expect, atol=1e-13)

    def test_stress_requires_alpha(self):
        g = make_grid(4)
        p = nondimensional_params(alpha=0.0)
        with pytest.raises(InvalidArgument):
            stress_rhs(rest_state(g, p), p, g)

    @pytest.mark.parametrize("variant", ["simplified", "original", "smoothed_max"])
    @pytest.mark.parametrize("mode", ["zero", "periodic", "paper"])
    def test_fused_matches_reference(self, variant, mode, rng):
        g = make_grid(8)
        p = nondimensional_params(gamma=0.02)
        s = random_state(g, p, rng, symmetric=False)
        s = State(s.u, s.sigma, 0.3)
        spec = ForcingSpec(mode)
        du, ds = VoigtEVP(g, p, spec, variant)(s)
        assert np.allclose(du, momentum_rhs(s, spec, p, g), rtol=1e-12, atol=1e-12)
        assert np.allclose(ds, stress_rhs(s, p, g, variant), rtol=1e-12, atol=1e-12)

    def test_linear_homogeneity(self, rng):
        g = make_grid(6)
        p = nondimensional_params(Omega=0.0)
        s = random_state(g, p, rng)
        a = momentum_rhs(State(g.zeros(2), s.sigma, 0), ForcingSpec("zero"), p, g)
        b = momentum_rhs(State(g.zeros(2), 2.5 * s.sigma, 0), ForcingSpec("zero"), p, g)
        assert np.allclose(b, 2.5 * a, rtol=1e-13, atol=1e-13)

    def test_outputs_band_limited(self, rng):
        g = make_grid(6)
        p = nondimensional_params()
        du, ds = VoigtEVP(g, p, ForcingSpec("periodic"))(random_state(g, p, rng))
        assert g.is_band_limited(du[0]) and g.is_band_limited(ds[0, 1])


class TestInitialData:
    def test_rest_state(self):
        g = make_grid(3)
        p = nondimensional_params(P=4.0)
        s = rest_state(g, p)
        assert np.all(s.u == 0) and np.all(s.sigma[0, 0] == -2.0) and np.all(s.sigma[0, 1] == 0)

    def test_smooth_symmetric(self):
        g = make_grid(4)
        s = smooth_state(g, nondimensional_params())
        assert np.array_equal(s.sigma[0, 1], s.sigma[1, 0])
        s = smooth_state(g, nondimensional_params(), symmetric=False)
        assert not np.array_equal(s.sigma[0, 1], s.sigma[1, 0])

    def test_random_band_limited(self, rng):
        g = make_grid(8)
        s = random_state(g, nondimensional_params(), rng, kmax=3)
        assert g.spectral_content_above(s.u[0], 3) < 1e-12


class TestKernelBackends:
    @pytest.mark.skipif(len(kernels.available_backends()) < 2, reason="compiled kernels not built")
    @settings(max_examples=20, deadline=None)
    @given(variant=st.sampled_from([0, 1, 2]), eps=st.floats(0, 1), gamma=st.floats(0, 0.5),
           e_bar=st.floats(1.1, 4), seed=st.integers(0, 2**32 - 1))
    def test_backends_agree(self, variant, eps, gamma, e_bar, seed):
        rng = np.random.default_rng(seed)
        G = rng.standard_normal((2, 2, 6, 6))
        sigma = rng.standard_normal((2, 2, 6, 6))
        py = kernels.get_backend("python")
        cc = kernels.get_backend("compiled")
        D1, R1 = py.constitutive(G, sigma, variant, eps, gamma, e_bar, 1.7)
        D2, R2 = cc.constitutive(G, sigma, variant, eps, gamma, e_bar, 1.7)
        assert np.allclose(D1, D2, rtol=1e-14, atol=0) and np.allclose(R1, R2, rtol=1e-13, atol=1e-15)
        V = rng.standard_normal((2, 6, 6))
        assert np.allclose(py.drag(V, 0.3, 0.4), cc.drag(V, 0.3, 0.4), rtol=1e-14, atol=1e-16)

    def test_python_kernel_matches_model(self, rng):
        g = make_grid(4)
        p = nondimensional_params(gamma=0.05)
        s = random_state(g, p, rng, symmetric=False)
        from voigt_evp.spectral import gradient
        G = gradient(g, s.u)
        for name, code in [("simplified", 0), ("original", 1), ("smoothed_max", 2)]:
            D, R = kernels.get_backend("python").constitutive(G, s.sigma, code, p.eps, p.gamma, p.e_bar, p.P)
            Dref = strain_rate(sym_gradient(g, s.u), p, name)
            assert np.allclose(D, Dref, rtol=1e-14)
            assert np.allclose(R, rheology_relaxation(s.sigma, Dref, p.P, p.e_bar), rtol=1e-13, atol=1e-15)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.get_backend("gpu")

    def test_deviator_trace(self, rng):
        T = rng.standard_normal((2, 2, 4))
        assert np.allclose(trace(deviator(T)), 0.0, atol=1e-15)
