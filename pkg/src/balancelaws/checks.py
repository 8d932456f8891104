"""Property-check suites behind the `check` subcommand.

Each suite runs a batch of randomized or constructed probes and returns
rows for the CSV report plus a pass flag.  Assertions follow the
empirical shape of the interaction estimates: bounded ratios and
refinement decay, never fixed constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import functionals, systems
from .functionals import (
    EntropyPair, check_glimm_estimate, check_perturbed_estimate,
    entropy_residual, square_entropy,
)
from .generalized import GeneralizedFan, product_bump
from .riemann import Wave, WaveFan, WaveKind
from .scheme import MeshLevel, RunResult, SchemeConfig, run
from .systems import PhaseBox


@dataclass
class CheckResult:
    name: str
    header: tuple
    rows: list
    passed: bool
    summary: str
    aborted: bool = False


def _builtin_systems():
    return [
        systems.scalar_system("burgers"),
        systems.p_system(),
        systems.euler_system(),
        systems.euler_duct_system(
            1.4, systems.GaussianBumpDuct(amplitude=0.1, width=0.5)),
    ]


def eigenstructure_check(samples: int = 1000, seed: int = 7) -> CheckResult:
    """Strict hyperbolicity, eigenpair accuracy, q = g - f_x, normalization."""
    rows = []
    passed = True
    rng = np.random.default_rng(seed)
    for system in _builtin_systems():
        states = system.sample_states(rng, samples)
        min_gap = math.inf
        max_pair_err = 0.0
        max_q_err = 0.0
        max_gnl_err = 0.0
        for u in states:
            t, x = rng.random(), 2.0 * rng.random() - 1.0
            lam, R = system.eigen(t, x, u)
            if system.p > 1:
                min_gap = min(min_gap, float(np.min(np.diff(lam))))
            A = system.jacobian(t, x, u)
            for i in range(system.p):
                err = np.linalg.norm(A @ R[:, i] - lam[i] * R[:, i])
                scale = max(1.0, abs(lam[i])) * np.linalg.norm(R[:, i])
                max_pair_err = max(max_pair_err, err / scale)
            q = system.combined_source(t, x, u)
            q_ref = system.source(t, x, u) - system.flux_x(t, x, u)
            max_q_err = max(max_q_err, float(np.max(np.abs(q - q_ref))))
            h = 1e-6
            for i, char in enumerate(system.characters):
                lp, _ = system.eigen(t, x, u + h * R[:, i])
                lm, _ = system.eigen(t, x, u - h * R[:, i])
                deriv = (lp[i] - lm[i]) / (2.0 * h)
                target = 1.0 if char is systems.GNL else 0.0
                max_gnl_err = max(max_gnl_err, abs(deriv - target))
        ok = (min_gap >= 1e-8 and max_pair_err <= 1e-10
              and max_q_err == 0.0 and max_gnl_err <= 1e-5)
        passed = passed and ok
        rows.append((system.name, min_gap, max_pair_err, max_q_err,
                     max_gnl_err, int(ok)))
    return CheckResult(
        "eigenstructure",
        ("system", "min_gap", "max_eigenpair_err", "max_q_err",
         "max_gnl_normalization_err", "ok"),
        rows, passed,
        "eigenstructure " + ("pass" if passed else "FAIL"))


def glimm_estimate_check(trials: int = 1000, seed: int = 0) -> CheckResult:
    report = check_glimm_estimate(systems.p_system(), trials=trials, seed=seed)
    rows = [(D, num, ratio) for D, num, ratio in report.rows]
    summary = (f"max ratio {report.max_ratio:.3f}, bin medians "
               + "/".join(f"{m:.3f}" for m in report.bin_medians)
               + f", zero-D numerator {report.zero_d_max_numerator:.2e}")
    return CheckResult("glimm-estimate", ("D", "numerator", "ratio"), rows,
                       report.passed, summary)


def perturbed_estimate_check(trials: int = 200, seed: int = 0) -> CheckResult:
    burgers = systems.scalar_system(
        "burgers", systems.make_time_source("constant", amplitude=1.0))
    rep_b = check_perturbed_estimate(burgers, trials=trials, seed=seed)
    rep_p = check_perturbed_estimate(systems.p_system(), trials=trials,
                                     seed=seed + 1)
    rows = [("burgers", *row) for row in rep_b.rows]
    rows += [("p_system", *row) for row in rep_p.rows]
    passed = rep_b.passed and rep_p.passed
    return CheckResult(
        "perturbed-estimate", ("system", "s", "mean_abs_excess", "max_ratio"),
        rows, passed,
        f"excess decreasing under refinement: burgers={rep_b.decreasing}, "
        f"p_system={rep_p.decreasing}")


# ---------------------------------------------------------------------------
# entropy suite
# ---------------------------------------------------------------------------

def _burgers_shock_run(r: float):
    from .studies import _SHOCK_CFL

    box = PhaseBox(np.array([0.5]), np.array([1.0]))
    system = systems.scalar_system("burgers", None, phase_box=box)
    config = SchemeConfig.create(system, (-1.0, 1.0), r, 0.4, jump_factor=1.0,
                                 cfl_safety=_SHOCK_CFL)
    u0 = lambda x: np.array([1.0 if x < 0.0 else 0.0])
    result = run(system, config, u0, keep_levels=True,
                 collect_diagnostics=False)
    return system, config, result


def shock_dissipation_oracle(theta, t_grid_n: int = 4001) -> float:
    """(uL - uR)^3 / 12 times the bump mass along the shock path x = t/2.

    Independent quadrature (composite Simpson on a fine grid) of
    theta(t, t/2); the cubic dissipation rate comes from the jump of the
    entropy flux minus shock speed times the jump of the entropy.
    """
    from scipy.integrate import simpson

    t0, t1 = theta.support[0], theta.support[1]
    ts = np.linspace(t0, t1, t_grid_n)
    vals = np.array([theta.value(t, 0.5 * t) for t in ts])
    return (1.0 / 12.0) * float(simpson(vals, x=ts))


def synthetic_reversed_jump(r: float = 0.02, t_end: float = 0.4) -> tuple:
    """Trajectory holding a non-entropic stationary jump 0 -> 1 in place."""
    box = PhaseBox(np.array([0.5]), np.array([1.0]))
    system = systems.scalar_system("burgers", None, phase_box=box)
    config = SchemeConfig.create(system, (-1.0, 1.0), r, t_end,
                                 jump_factor=1.0)
    u0 = lambda x: np.array([0.0 if x < 0.0 else 1.0])
    n_steps = math.ceil(config.t_end / config.s - 1e-9)
    levels = []
    for k in range(n_steps + 1):
        states = {h: u0(config.x_of(h)) for h in config.state_indices(k)}
        level = MeshLevel(k=k, states=states,
                          tilde={h: u.copy() for h, u in states.items()})
        if k < n_steps:
            fans = {}
            for h in config.fan_indices(k):
                ul = states.get(h - 1, u0(config.x_of(h - 1)))
                ur = states.get(h + 1, u0(config.x_of(h + 1)))
                if ul[0] == ur[0]:
                    wave = Wave(1, WaveKind.RAREFACTION, 0.0, ul[0], ul[0],
                                ul, ur)
                else:
                    # deliberately non-entropic stationary discontinuity
                    wave = Wave(1, WaveKind.SHOCK, -1.0, 0.0, 0.0, ul, ur)
                fan = WaveFan(system, k * config.s, config.x_of(h), [ul, ur],
                              [wave])
                fans[h] = GeneralizedFan(fan)
            level.fans = fans
        levels.append(level)
    result = RunResult(system=system, config=config, u0=u0, snapshots=[],
                       diagnostics=[], final_level=levels[-1], levels=levels)
    return system, result


def entropy_check(r: float = 1 / 400) -> CheckResult:
    theta = product_bump((0.05, 0.35), (-0.25, 0.45))
    system, config, result = _burgers_shock_run(r)
    if not result.ok:
        return CheckResult("entropy", ("case", "residual", "reference"), [],
                           False, f"run aborted: {result.failure}",
                           aborted=True)
    pair = square_entropy(system)
    res = entropy_residual(system, result, pair, theta)
    reference = shock_dissipation_oracle(theta)
    ok_shock = abs(res - reference) <= 0.1 * reference

    synth_system, synth_result = synthetic_reversed_jump()
    synth_pair = square_entropy(synth_system)
    res_rev = entropy_residual(synth_system, synth_result, synth_pair, theta)
    ok_rev = res_rev < 0.0

    rows = [("burgers_shock", res, reference),
            ("reversed_jump", res_rev, 0.0)]
    passed = ok_shock and ok_rev
    return CheckResult(
        "entropy", ("case", "residual", "reference"), rows, passed,
        f"shock dissipation {res:.6f} vs oracle {reference:.6f} "
        f"(within 10%: {ok_shock}); reversed jump residual {res_rev:.6f} "
        f"(negative: {ok_rev})")


SUITES = {
    "eigenstructure": eigenstructure_check,
    "glimm-estimate": glimm_estimate_check,
    "perturbed-estimate": perturbed_estimate_check,
    "entropy": entropy_check,
}
