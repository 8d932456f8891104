import math

import numpy as np
import pytest

from balancelaws.functionals import (
    EntropyPair, SupportExceedsWindow, WaveStrengths, approaching,
    check_glimm_estimate, check_perturbed_estimate, crossing_strengths,
    entropy_residual, fan_strengths, interaction_potential, level_functionals,
    square_entropy, total_variation, weak_residual,
)
from balancelaws.generalized import product_bump
from balancelaws.riemann import WaveKind, solve_classical
from balancelaws.scheme import (
    SchemeConfig, initialize, run, sample_step, solve_level_fans,
)
from balancelaws.systems import (
    PhaseBox, make_time_source, p_system, scalar_system,
)

from oracles import interaction_enumeration, rarefaction_curve_ivp


class Tag:
    def __init__(self, family, kind):
        self.family = family
        self.kind = kind


class TestApproaching:
    def test_faster_family_on_left(self):
        assert approaching(Tag(2, WaveKind.SHOCK), Tag(1, WaveKind.SHOCK))

    def test_same_family_rarefactions_do_not(self):
        assert not approaching(Tag(1, WaveKind.RAREFACTION),
                               Tag(1, WaveKind.RAREFACTION))

    def test_ordered_families_do_not(self):
        assert not approaching(Tag(1, WaveKind.SHOCK), Tag(2, WaveKind.SHOCK))

    def test_same_family_with_one_shock_does(self):
        assert approaching(Tag(1, WaveKind.SHOCK), Tag(1, WaveKind.RAREFACTION))
        assert approaching(Tag(1, WaveKind.RAREFACTION), Tag(1, WaveKind.SHOCK))

    def test_contacts_never_approach_same_family(self):
        assert not approaching(Tag(2, WaveKind.CONTACT),
                               Tag(2, WaveKind.CONTACT))


def record(eps, shock, position=0.0, fan_key=0):
    return WaveStrengths(origin=(0, 0), position=position, fan_key=fan_key,
                         side="fan", eps=np.asarray(eps, dtype=float),
                         shock=np.asarray(shock, dtype=bool))


class TestInteractionPotential:
    def test_two_shock_cross_family(self):
        alpha = record([0.0, -0.2], [False, True])
        beta = record([-0.1, 0.0], [True, False])
        assert interaction_potential(alpha, beta) == pytest.approx(0.02)

    def test_rarefactions_zero(self):
        alpha = record([0.3, 0.0], [False, False])
        beta = record([0.4, 0.0], [False, False])
        assert interaction_potential(alpha, beta) == 0.0

    def test_same_family_shocks(self):
        alpha = record([-0.1, 0.0], [True, False])
        beta = record([-0.2, 0.0], [True, False])
        assert interaction_potential(alpha, beta) == pytest.approx(0.02)

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            p = rng.integers(1, 5)
            ea, eb = rng.standard_normal((2, p)) * 0.3
            sa, sb = rng.random((2, p)) < 0.5
            got = interaction_potential(record(ea, sa), record(eb, sb))
            want = interaction_enumeration(ea, sa, eb, sb)
            assert got == pytest.approx(want, rel=1e-14, abs=1e-300)

    def test_absolute_homogeneity_exact_for_dyadic_scale(self):
        alpha = record([-0.1, 0.3], [True, False])
        beta = record([0.7, -0.25], [False, True])
        base = interaction_potential(alpha, beta)
        for c in (2.0, 0.25, -4.0):
            scaled = record(c * alpha.eps, alpha.shock)
            assert interaction_potential(scaled, beta) == abs(c) * base

    def test_nonapproaching_vanishes(self):
        alpha = record([0.5, 0.0], [False, False])
        beta = record([0.0, 0.3], [False, False])
        assert interaction_potential(alpha, beta) == 0.0


class TestTotalVariation:
    def test_values(self):
        assert total_variation(np.array([[0.3], [0.3]])) == 0.0
        assert total_variation(np.array([[1.0], [0.0]])) == 1.0
        assert total_variation(np.array([[0.0], [1.0], [0.0]])) == 2.0

    def test_vector_states(self):
        states = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert total_variation(states) == 2.0


def _burgers_level(u0, r=0.125, box=None, source=None, jump_factor=1.0):
    system = scalar_system("burgers", source,
                           phase_box=box or PhaseBox(np.array([0.5]),
                                                     np.array([1.0])))
    config = SchemeConfig.create(system, (-1.0, 1.0), r, 0.5,
                                 jump_factor=jump_factor)
    level = initialize(system, config, u0)
    solve_level_fans(system, level, config)
    return system, config, level


class TestLevelFunctionals:
    def test_constant_level(self):
        system, config, level = _burgers_level(lambda x: np.array([0.4]))
        rec = level_functionals(system, level, K=10.0)
        assert rec.L == rec.Q == rec.F == rec.TV == 0.0

    def test_single_shock(self):
        system, config, level = _burgers_level(
            lambda x: np.array([0.7 if x < 0.0 else 0.3]))
        rec = level_functionals(system, level, K=10.0)
        assert rec.L == pytest.approx(0.4)
        assert rec.Q == 0.0
        assert rec.F == pytest.approx(0.4)
        assert rec.TV == pytest.approx(0.4)

    def test_two_approaching_shocks(self):
        def u0(x):
            if x < -0.5:
                return np.array([0.8])
            if x < 0.5:
                return np.array([0.7])
            return np.array([0.5])

        system, config, level = _burgers_level(u0)
        rec = level_functionals(system, level, K=10.0)
        assert rec.L == pytest.approx(0.3)
        assert rec.Q == pytest.approx(0.1 * 0.2)
        assert rec.F == pytest.approx(0.3 + 10.0 * 0.02)

    def test_invariants(self):
        system, config, level = _burgers_level(
            lambda x: np.array([0.5 + 0.2 * math.sin(math.pi * x)]))
        for K in (1.0, 10.0, 50.0):
            rec = level_functionals(system, level, K=K)
            assert rec.F == rec.L + K * rec.Q
            assert rec.L >= 0.0 and rec.Q >= 0.0 and rec.TV >= 0.0

    def test_mixed_pairs_equals_whole_fan_bookkeeping(self):
        # splitting each fan at the sampled state leaves L and Q unchanged;
        # the literal two-bundle re-solve must agree with the fast path
        system, config, level = _burgers_level(
            lambda x: np.array([0.5 + 0.3 * math.sin(math.pi * x)]))
        new = sample_step(system, level, 0.37, config)
        fast = level_functionals(system, level, K=10.0, new_level=new,
                                 s=config.s)
        literal = level_functionals(system, level, K=10.0, new_level=new,
                                    s=config.s, mixed_pairs=True)
        assert literal.L == pytest.approx(fast.L, abs=1e-12)
        assert literal.Q == pytest.approx(fast.Q, abs=1e-12)
        assert literal.F == pytest.approx(fast.F, abs=1e-12)

    def test_crossing_strength_sides(self):
        system, config, level = _burgers_level(
            lambda x: np.array([0.5 + 0.3 * math.sin(math.pi * x)]))
        new = sample_step(system, level, -0.2, config)
        records = crossing_strengths(system, level, new)
        assert {rec.side for rec in records} == {"left", "right"}
        # each fan contributes one bundle on each side of its sample point
        by_fan = {}
        for rec in records:
            by_fan.setdefault(rec.fan_key, []).append(rec.side)
        assert all(sorted(v) == ["left", "right"] for v in by_fan.values())

    def test_l_equivalent_to_tv_for_scalar(self):
        system, config, level = _burgers_level(
            lambda x: np.array([0.5 + 0.25 * math.sin(math.pi * x)]))
        rec = level_functionals(system, level, K=10.0)
        # strengths are measured in f' units, and f'' = 1 for this flux
        assert 0.1 * rec.TV <= rec.L <= 10.0 * rec.TV


class TestGlimmEstimate:
    def test_p_system_report(self):
        report = check_glimm_estimate(p_system(), trials=1000, seed=0)
        assert report.passed
        assert math.isfinite(report.max_ratio)
        assert report.zero_d_max_numerator <= 1e-8
        assert len(report.rows) > 800

    def test_curve_additivity_oracle(self):
        # uM, uR built on the same 1-rarefaction curve by independent ODE
        # integration: the strengths must add exactly (no interaction)
        system = p_system()
        uL = np.array([1.0, 0.0])
        uM = rarefaction_curve_ivp(system, 1, uL, 0.04)
        uR = rarefaction_curve_ivp(system, 1, uM, 0.03)
        alpha = solve_classical(system, 0.0, 0.0, uL, uM).strengths
        beta = solve_classical(system, 0.0, 0.0, uM, uR).strengths
        gamma = solve_classical(system, 0.0, 0.0, uL, uR).strengths
        assert np.max(np.abs(gamma - (alpha + beta))) <= 1e-8

    def test_zero_beta_case(self):
        system = p_system()
        uL = np.array([1.0, 0.0])
        uM = system.wave_curve(1, uL, 0.05, 0.0, 0.0)
        alpha = solve_classical(system, 0.0, 0.0, uL, uM).strengths
        gamma = solve_classical(system, 0.0, 0.0, uL, uM).strengths
        assert np.max(np.abs(gamma - alpha)) <= 1e-10


class TestPerturbedEstimate:
    def test_burgers_constant_source(self):
        system = scalar_system("burgers",
                               make_time_source("constant", amplitude=1.0))
        s = 0.01
        # mu_L = mu_R = -s for g == 1, so the endpoint shifts cancel
        muL = -s * system.combined_source(s, 0.0, np.array([0.2]))
        muR = -s * system.combined_source(s, 0.0, np.array([0.7]))
        assert muL[0] == muR[0] == -s
        report = check_perturbed_estimate(system, trials=100,
                                          s_values=(0.02, 0.01, 0.005))
        assert report.passed
        means = [row[1] for row in report.rows]
        assert means[0] > means[1] > means[2]

    def test_p_system_refinement(self):
        report = check_perturbed_estimate(p_system(), trials=100, seed=3)
        assert report.passed


class TestEntropyPair:
    def test_square_entropy_compatibility(self):
        system = scalar_system("burgers")
        pair = square_entropy(system)
        h = 1e-6
        for u in (-0.8, 0.1, 0.9):
            state = np.array([u])
            dphi = (pair.Phi(0, 0, state + h) - pair.Phi(0, 0, state - h)) / (2 * h)
            want = pair.dU(state)[0] * system.jacobian(0, 0, state)[0, 0]
            assert dphi == pytest.approx(want, rel=1e-6, abs=1e-9)

    def test_convexity_sampled(self):
        system = scalar_system("burgers")
        pair = square_entropy(system)
        h = 1e-4
        for u in np.linspace(-1.5, 1.5, 21):
            state = np.array([u])
            hess = (pair.U(state + h) - 2 * pair.U(state)
                    + pair.U(state - h)) / (h * h)
            assert hess > 0.0


def _shock_result(r=1 / 50, t_end=0.4):
    box = PhaseBox(np.array([0.5]), np.array([1.0]))
    system = scalar_system("burgers", None, phase_box=box)
    config = SchemeConfig.create(system, (-1.0, 1.0), r, t_end,
                                 jump_factor=1.0, cfl_safety=0.75)
    u0 = lambda x: np.array([1.0 if x < 0.0 else 0.0])
    return system, run(system, config, u0, keep_levels=True,
                       collect_diagnostics=False)


class TestResiduals:
    def test_constant_solution_zero_residual(self):
        system = scalar_system("burgers")
        config = SchemeConfig.create(system, (-1.0, 1.0), 0.125, 0.5)
        result = run(system, config, lambda x: np.array([0.3]),
                     keep_levels=True, collect_diagnostics=False)
        theta = product_bump((0.05, 0.4), (-0.5, 0.5))
        assert weak_residual(system, result, theta) <= 1e-10

    def test_support_check(self):
        system, result = _shock_result()
        theta = product_bump((0.05, 0.9), (-0.5, 0.5))  # beyond t_end
        with pytest.raises(SupportExceedsWindow):
            weak_residual(system, result, theta)
        theta = product_bump((0.05, 0.3), (-2.5, 0.5))  # beyond domain
        with pytest.raises(SupportExceedsWindow):
            weak_residual(system, result, theta)

    def test_entropy_requires_nonnegative_bump(self):
        system, result = _shock_result()
        pair = square_entropy(system)
        theta = product_bump((0.05, 0.35), (-0.3, 0.5))
        bad = type(theta)(value=lambda t, x: -theta.value(t, x),
                          dt=lambda t, x: -theta.dt(t, x),
                          dx=lambda t, x: -theta.dx(t, x),
                          support=theta.support)
        with pytest.raises(ValueError, match="nonnegative"):
            entropy_residual(system, result, pair, bad)

    def test_smooth_trajectory_entropy_residual_decays(self):
        theta = product_bump((0.05, 0.3), (-0.4, 0.6))
        values = []
        for r in (1 / 25, 1 / 50, 1 / 100):
            box = PhaseBox(np.array([0.5]), np.array([1.0]))
            system = scalar_system("burgers", None, phase_box=box)
            config = SchemeConfig.create(system, (-1.0, 1.0), r, 0.4,
                                         jump_factor=1.0)
            u0 = lambda x: np.array([0.0 if x < 0.0 else 1.0])  # rarefaction
            result = run(system, config, u0, keep_levels=True,
                         collect_diagnostics=False)
            pair = square_entropy(system)
            values.append(abs(entropy_residual(system, result, pair, theta)))
        assert values[-1] <= values[0]
        assert values[-1] <= 5e-3
