import math

import numpy as np
import pytest

from balancelaws import systems
from balancelaws.systems import (
    GNL, LD, CosineBumpDuct, GaussianBumpDuct, LinearDuct, OutOfPhaseBox,
    PhaseBox, SystemDef, euler_duct_system, euler_system, make_time_source,
    ode_system, p_system, scalar_system,
)

from oracles import duct_source_symbolic


def builtin_systems():
    return [
        scalar_system("burgers"),
        ode_system(make_time_source("cos")),
        p_system(),
        euler_system(),
        euler_duct_system(1.4, GaussianBumpDuct(amplitude=0.1, width=0.5)),
    ]


class TestPhaseBox:
    def test_contains_center(self):
        box = PhaseBox(np.array([1.0, 2.0]), np.array([0.5, 0.5]))
        assert box.contains(box.center)
        assert not box.contains(np.array([1.6, 2.0]))
        assert box.contains(np.array([1.6, 2.0]), slack=0.5)

    def test_rejects_bad_widths(self):
        with pytest.raises(ValueError):
            PhaseBox(np.array([0.0]), np.array([0.0]))
        with pytest.raises(ValueError):
            PhaseBox(np.array([0.0]), np.array([-1.0]))


class TestScalar:
    def test_burgers_eigen(self):
        system = scalar_system("burgers")
        lam, r = system.eigen(0.0, 0.0, np.array([0.3]))
        assert lam[0] == pytest.approx(0.3, abs=0.0)
        assert r[0, 0] == 1.0

    def test_zero_source_q(self):
        system = scalar_system("burgers")
        for t, x, u in [(0.0, 0.0, 0.1), (1.0, -2.0, 0.7), (3.0, 5.0, -1.2)]:
            assert system.combined_source(t, x, np.array([u]))[0] == 0.0

    def test_exp_source_q(self):
        system = scalar_system("burgers", make_time_source("exp_decay"))
        for x, u in [(0.0, 0.0), (1.5, 0.4), (-2.0, -0.3)]:
            assert system.combined_source(0.0, x, np.array([u]))[0] == 1.0

    def test_rejects_nonconvex(self):
        with pytest.raises(ValueError, match="convex"):
            scalar_system("cubic")  # f'' changes sign over the default box

    def test_custom_convex_box_accepts_cubic(self):
        box = PhaseBox(np.array([1.0]), np.array([0.5]))
        system = scalar_system("cubic", phase_box=box)
        assert system.p == 1


class TestEulerDuct:
    def test_constant_duct_source_exactly_zero(self):
        system = euler_duct_system(1.4, None)
        rng = np.random.default_rng(0)
        for u in system.sample_states(rng, 50):
            g = system.source(0.3, -1.2, u)
            assert np.all(g == 0.0)

    def test_sound_speed_eigenvalues(self):
        system = euler_system(1.4)
        u = system.from_primitive(1.0, 0.0, 1.0)
        lam, _ = system.eigen(0.0, 0.0, u)
        c = math.sqrt(1.4)
        assert lam == pytest.approx([-c, 0.0, c], abs=1e-14)

    def test_linear_duct_source_against_symbolic(self):
        # a(x) = 1 + 0.1 x, state rho=1 v=1 p=1: g = -0.1/(1+0.1x) (1,1,4)
        system = euler_duct_system(1.4, LinearDuct(slope=0.1))
        u = system.from_primitive(1.0, 1.0, 1.0)
        for x in (0.0, 0.5, -0.3):
            got = system.source(0.0, x, u)
            want = duct_source_symbolic(1.4, 0.1, x, 1.0, 1.0, 1.0)
            np.testing.assert_allclose(got, want, rtol=1e-12)
            np.testing.assert_allclose(
                got, -0.1 / (1.0 + 0.1 * x) * np.array([1.0, 1.0, 4.0]),
                rtol=1e-12)

    def test_rejects_nonpositive_state(self):
        system = euler_system()
        with pytest.raises(OutOfPhaseBox):
            system.primitive(np.array([-1.0, 0.0, 1.0]))
        with pytest.raises(OutOfPhaseBox):
            system.primitive(np.array([1.0, 10.0, 1.0]))  # p < 0

    def test_cosine_bump_compact_support(self):
        duct = CosineBumpDuct(amplitude=0.2, center=0.0, width=0.5)
        assert duct.a(0.0, 0.6) == 1.0
        assert duct.a_x(0.0, 0.6) == 0.0
        assert duct.a(0.0, 0.0) == pytest.approx(1.2)
        # C^1: derivative matches finite differences near the edge
        for x in (0.2, 0.45, 0.499):
            h = 1e-6
            fd = (duct.a(0.0, x + h) - duct.a(0.0, x - h)) / (2 * h)
            assert duct.a_x(0.0, x) == pytest.approx(fd, abs=1e-8)


class TestPSystem:
    def test_gamma_law_eigenvalues(self):
        system = p_system(gamma=2.0)
        lam, _ = system.eigen(0.0, 0.0, np.array([1.0, 0.0]))
        assert lam == pytest.approx([-math.sqrt(2.0), math.sqrt(2.0)], abs=1e-14)

    def test_no_source_and_flux_x(self):
        system = p_system()
        u = np.array([0.9, 0.1])
        assert np.all(system.combined_source(0.1, 0.2, u) == 0.0)
        assert np.all(system.flux_x(0.1, 0.2, u) == 0.0)

    def test_rejects_vacuum_box(self):
        with pytest.raises(ValueError, match="v > 0"):
            p_system(phase_box=PhaseBox(np.array([0.3, 0.0]),
                                        np.array([0.4, 0.4])))


class TestEigenstructureProperties:
    """Sampled invariants: 10^3 states per system."""

    @pytest.mark.parametrize("system", builtin_systems(),
                             ids=lambda s: s.name)
    def test_strict_hyperbolicity_and_eigenpairs(self, system):
        rng = np.random.default_rng(11)
        for u in system.sample_states(rng, 1000):
            t, x = rng.random(), 2.0 * rng.random() - 1.0
            lam, R = system.eigen(t, x, u)
            if system.p > 1:
                assert np.min(np.diff(lam)) >= 1e-8
            A = system.jacobian(t, x, u)
            for i in range(system.p):
                err = np.linalg.norm(A @ R[:, i] - lam[i] * R[:, i])
                assert err <= 1e-10 * max(1.0, abs(lam[i])) * np.linalg.norm(R[:, i])

    @pytest.mark.parametrize("system", builtin_systems(),
                             ids=lambda s: s.name)
    def test_combined_source_is_exact_difference(self, system):
        rng = np.random.default_rng(5)
        for u in system.sample_states(rng, 1000):
            t, x = 2.0 * rng.random(), 3.0 * rng.random() - 1.5
            q = system.combined_source(t, x, u)
            ref = system.source(t, x, u) - system.flux_x(t, x, u)
            assert np.all(q == ref)

    @pytest.mark.parametrize("system", builtin_systems(),
                             ids=lambda s: s.name)
    def test_gnl_normalization(self, system):
        rng = np.random.default_rng(3)
        h = 1e-6
        for u in system.sample_states(rng, 200):
            lam, R = system.eigen(0.0, 0.0, u)
            for i, char in enumerate(system.characters):
                lp, _ = system.eigen(0.0, 0.0, u + h * R[:, i])
                lm, _ = system.eigen(0.0, 0.0, u - h * R[:, i])
                deriv = (lp[i] - lm[i]) / (2.0 * h)
                target = 1.0 if char is GNL else 0.0
                assert deriv == pytest.approx(target, abs=1e-5)


class _XModulatedBurgers(SystemDef):
    """f(t, x, u) = (1 + 0.1 sin x) u^2/2: exercises a genuine flux_x."""

    p = 1
    characters = (GNL,)
    name = "x_modulated"
    phase_box = PhaseBox(np.array([0.5]), np.array([1.0]))

    def _mod(self, x):
        return 1.0 + 0.1 * math.sin(x)

    def flux(self, t, x, u):
        return np.array([self._mod(x) * 0.5 * u[0] ** 2])

    def source(self, t, x, u):
        return np.zeros(1)

    def flux_x(self, t, x, u):
        return np.array([0.1 * math.cos(x) * 0.5 * u[0] ** 2])

    def jacobian(self, t, x, u):
        return np.array([[self._mod(x) * u[0]]])

    def eigen(self, t, x, u):
        return (np.array([self._mod(x) * u[0]]),
                np.array([[1.0 / self._mod(x)]]))


class TestFluxXChecker:
    def test_autonomous_systems_have_zero_fd(self):
        for system in builtin_systems():
            rng = np.random.default_rng(1)
            for u in system.sample_states(rng, 20):
                h = 1e-4
                fd = (system.flux(0.1, 0.3 + h, u)
                      - system.flux(0.1, 0.3 - h, u)) / (2 * h)
                assert np.max(np.abs(fd - system.flux_x(0.1, 0.3, u))) <= 1e-12

    def test_second_order_on_x_dependent_flux(self):
        system = _XModulatedBurgers()
        u = np.array([0.7])
        hs = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
        errs = []
        for h in hs:
            fd = (system.flux(0.0, 0.4 + h, u)
                  - system.flux(0.0, 0.4 - h, u)) / (2 * h)
            errs.append(abs(fd[0] - system.flux_x(0.0, 0.4, u)[0]))
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert abs(slope - 2.0) <= 0.3
        # halving h quarters the error
        assert errs[1] == pytest.approx(errs[0] / 4.0, rel=0.05)

    def test_q_nontrivial_when_flux_depends_on_x(self):
        system = _XModulatedBurgers()
        u = np.array([0.7])
        q = system.combined_source(0.0, 0.4, u)
        assert q[0] == -system.flux_x(0.0, 0.4, u)[0]
        assert q[0] != 0.0
