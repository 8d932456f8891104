"""Wave-strength bookkeeping and stability diagnostics.

Implements the interaction potential between approaching waves, the
linear/quadratic/Glimm functionals evaluated on the canonical curve
between two consecutive levels, total variation, empirical checks of
the interaction estimates, and the weak-form / entropy residuals of a
completed run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .generalized import (
    GeneralizedFan, TestFunction, gauss_integrate_1d, integrate_fan_rectangle,
)
from .riemann import WaveFan, WaveKind, solve_classical
from .systems import State, SystemDef


class SupportExceedsWindow(RuntimeError):
    """A test function reaches outside the computed spacetime window."""


# ---------------------------------------------------------------------------
# strengths and the interaction potential
# ---------------------------------------------------------------------------

@dataclass
class WaveStrengths:
    """Per-family strengths of one Riemann solution crossing the curve.

    ``side`` records the crossing classification: "left" bundles are the
    right-incoming waves of the diamond to their left (type II), "right"
    bundles the left-incoming waves of the diamond to their right
    (type I); whole fans are tagged "fan".
    """

    origin: tuple[int, int]
    position: float
    fan_key: int
    side: str
    eps: np.ndarray
    shock: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(np.abs(self.eps)))


def fan_strengths(fan: WaveFan, origin=(0, 0), position: float = 0.0,
                  fan_key: int = 0, side: str = "fan") -> WaveStrengths:
    eps = fan.strengths
    shock = np.array([w.kind is WaveKind.SHOCK for w in fan.waves])
    return WaveStrengths(origin=origin, position=position, fan_key=fan_key,
                         side=side, eps=eps, shock=shock)


def approaching(left, right) -> bool:
    """Do a left i-wave and a right j-wave approach (interact later)?

    True when i > j, or i == j with at least one of the two a shock.
    Arguments are waves or any objects with ``family`` and ``kind``.
    """
    if left.family > right.family:
        return True
    if left.family == right.family:
        return left.kind is WaveKind.SHOCK or right.kind is WaveKind.SHOCK
    return False


def interaction_potential(alpha: WaveStrengths, beta: WaveStrengths) -> float:
    """Sum of |alpha_i beta_j| over approaching pairs, alpha to the left."""
    a, b = np.abs(alpha.eps), np.abs(beta.eps)
    p = a.shape[0]
    total = 0.0
    for i in range(p):
        for j in range(i):
            total += a[i] * b[j]
        if alpha.shock[i] or beta.shock[i]:
            total += a[i] * b[i]
    return total


def _interaction_sum_matrix(A: np.ndarray, S: np.ndarray) -> float:
    """Sum of D over spatially ordered row pairs: prefix sums, O(m p^2)."""
    m, p = A.shape
    if m < 2:
        return 0.0
    total = 0.0
    cum = np.cumsum(A, axis=0)
    for i in range(p):
        for j in range(i):
            total += float(np.dot(A[1:, j], cum[:-1, i]))
        no_shock = A[:, i] * (~S[:, i])
        t_all = float(np.dot(A[1:, i], cum[:-1, i]))
        t_ns = float(np.dot(no_shock[1:], np.cumsum(no_shock)[:-1]))
        total += t_all - t_ns
    return total


def _pairwise_interaction_sum(records: Sequence[WaveStrengths]) -> float:
    """Sum of D over all spatially ordered pairs from distinct fans.

    Same-fan bundle pairs are removed afterwards (they never approach,
    but roundoff noise is excluded too).
    """
    if len(records) < 2:
        return 0.0
    A = np.abs(np.array([rec.eps for rec in records]))
    S = np.array([rec.shock for rec in records])
    total = _interaction_sum_matrix(A, S)
    by_fan: dict[int, list[WaveStrengths]] = {}
    for rec in records:
        by_fan.setdefault(rec.fan_key, []).append(rec)
    for group in by_fan.values():
        if len(group) == 2:
            left, right = sorted(group, key=lambda rec: rec.position)
            total -= interaction_potential(left, right)
    return total


# ---------------------------------------------------------------------------
# level functionals
# ---------------------------------------------------------------------------

@dataclass
class LevelDiagnostics:
    k: int
    t: float
    L: float
    Q: float
    F: float
    TV: float
    budget_used: float = 0.0


def total_variation(level_or_states) -> float:
    """Sum over adjacent cells of the 1-norm of state differences."""
    if hasattr(level_or_states, "sorted_states"):
        _, states = level_or_states.sorted_states()
    elif isinstance(level_or_states, dict):
        states = np.array([level_or_states[h] for h in sorted(level_or_states)])
    else:
        states = np.atleast_2d(np.asarray(level_or_states, dtype=float))
    if states.shape[0] < 2:
        return 0.0
    return float(np.sum(np.abs(np.diff(states, axis=0))))


def crossing_strengths(system: SystemDef, level, new_level) -> list[WaveStrengths]:
    """The two wave bundles per fan crossing the curve between two levels.

    Each fan's waves split at the sampled state into a left bundle
    (toward the corrected left input) and a right bundle (toward the
    corrected right input); both are re-solved at the fan anchor, which
    is exact because the sampled state lies on the fan's wave curves.
    """
    records = []
    for h in sorted(level.fans):
        gfan = level.fans[h]
        fan = gfan.fan
        u_mid = new_level.tilde[h]
        left = solve_classical(system, fan.t0, fan.x0, fan.left, u_mid,
                               jump_factor=math.inf)
        right = solve_classical(system, fan.t0, fan.x0, u_mid, fan.right,
                                jump_factor=math.inf)
        records.append(fan_strengths(left, origin=(level.k, h),
                                     position=h - 0.5, fan_key=h, side="left"))
        records.append(fan_strengths(right, origin=(level.k, h),
                                     position=h + 0.5, fan_key=h, side="right"))
    return records


def level_functionals(system: SystemDef, level, K: float, new_level=None,
                      s: float | None = None,
                      mixed_pairs: bool = False) -> LevelDiagnostics:
    """L, Q, F = L + K Q and TV for the curve just above ``level``.

    With ``new_level`` the curve is the canonical one threading the new
    sample points; splitting each fan at its sampled state leaves both L
    and Q unchanged (same-sign pieces, same kinds), so the default path
    uses whole-fan strengths.  ``mixed_pairs=True`` forces the split
    bundles to be re-solved explicitly; it is the literal bookkeeping
    and is cross-checked against the fast path in the tests.
    """
    if not level.fans:
        raise ValueError("level fans must be populated")
    if mixed_pairs:
        if new_level is None:
            raise ValueError("mixed_pairs requires the sampled next level")
        records = crossing_strengths(system, level, new_level)
        L = sum(rec.total for rec in records)
        Q = _pairwise_interaction_sum(records)
    else:
        hs = sorted(level.fans)
        waves = [level.fans[h].fan.waves for h in hs]
        A = np.array([[w.strength for w in row] for row in waves])
        S = np.array([[w.kind is WaveKind.SHOCK for w in row] for row in waves])
        A = np.abs(A)
        L = float(A.sum())
        Q = _interaction_sum_matrix(A, S)
        fan_totals = dict(zip(hs, A.sum(axis=1)))
    F = L + K * Q
    tv_level = new_level if new_level is not None else level
    step = s if (s is not None and new_level is not None) else 0.0
    record = LevelDiagnostics(
        k=tv_level.k,
        t=level.fans[min(level.fans)].t0 + step,
        L=L, Q=Q, F=F, TV=total_variation(tv_level))
    if new_level is not None and s is not None:
        budget = 0.0
        for h in sorted(level.fans):
            gfan = level.fans[h]
            q_norm = float(np.sum(np.abs(gfan.frozen_q(new_level.tilde[h]))))
            if q_norm == 0.0:
                continue
            strength = (fan_totals[h] if not mixed_pairs
                        else float(np.sum(np.abs(gfan.fan.strengths))))
            budget += abs(s) * float(strength) * q_norm
        record.budget_used = budget
    return record


# ---------------------------------------------------------------------------
# empirical interaction-estimate checks
# ---------------------------------------------------------------------------

@dataclass
class GlimmEstimateReport:
    rows: list            # (D, numerator, ratio)
    max_ratio: float
    bin_medians: list     # medians of ratio, largest-D bin first
    zero_d_max_numerator: float
    passed: bool


def _solve_strengths(system, t0, x0, ua, ub, position=0.0):
    fan = solve_classical(system, t0, x0, ua, ub, jump_factor=math.inf)
    return fan_strengths(fan, position=position)


def check_glimm_estimate(system: SystemDef, trials: int = 1000,
                         jump_scale: float = 0.05, seed: int = 0,
                         t0: float = 0.0, x0: float = 0.0,
                         bins: int = 5) -> GlimmEstimateReport:
    """Ratio |gamma - (alpha + beta)| / D over random state triples.

    The ratio must stay bounded with no blow-up as D -> 0, and the
    numerator must vanish outright whenever no waves approach.
    """
    rng = np.random.default_rng(seed)
    center = system.phase_box.center
    hw = system.phase_box.half_widths
    rows = []
    zero_d_numerators = []

    def triple(uL, uM, uR):
        alpha = _solve_strengths(system, t0, x0, uL, uM)
        beta = _solve_strengths(system, t0, x0, uM, uR)
        gamma = _solve_strengths(system, t0, x0, uL, uR)
        D = interaction_potential(alpha, beta)
        numerator = float(np.sum(np.abs(gamma.eps - (alpha.eps + beta.eps))))
        return D, numerator

    for _ in range(trials):
        uL, uM, uR = center + jump_scale * hw * (
            2.0 * rng.random((3, system.p)) - 1.0)
        D, numerator = triple(uL, uM, uR)
        if D > 1e-12:
            rows.append((D, numerator, numerator / D))
        else:
            zero_d_numerators.append(numerator)

    # constructed non-approaching triples: the numerator must vanish
    for scale in (0.3, 1.0):
        delta = scale * jump_scale * float(np.min(hw))
        uL = center.copy()
        uM = system.wave_curve(1, uL, delta, t0, x0)
        zero_d_numerators.append(triple(uL, uM, uM)[1])            # beta = 0
        uR = system.wave_curve(1, uM, 0.7 * delta, t0, x0)         # same curve
        zero_d_numerators.append(triple(uL, uM, uR)[1])
        if system.p > 1:
            uR = system.wave_curve(system.p, uM, 0.5 * delta, t0, x0)
            zero_d_numerators.append(triple(uL, uM, uR)[1])        # ordered families

    rows.sort(key=lambda row: -row[0])
    per_bin = max(1, len(rows) // bins)
    medians = []
    for b in range(bins):
        chunk = rows[b * per_bin:(b + 1) * per_bin] if b < bins - 1 else rows[b * per_bin:]
        if chunk:
            medians.append(float(np.median([c[2] for c in chunk])))
    max_ratio = max((row[2] for row in rows), default=0.0)
    zero_d_max = max(zero_d_numerators, default=0.0)
    # The ratio profile is flat as D -> 0 (the estimate is sharp), so the
    # bin medians wiggle by sampling noise around a constant; the
    # non-increase check carries an allowance of several median standard
    # errors so that only a genuine upward trend toward small D fails.
    monotone = True
    running_max = 0.0
    for m in medians:
        if running_max > 0.0 and m > 1.25 * running_max:
            monotone = False
        running_max = max(running_max, m)
    passed = math.isfinite(max_ratio) and monotone and zero_d_max <= 1e-8
    return GlimmEstimateReport(rows=rows, max_ratio=max_ratio,
                               bin_medians=medians,
                               zero_d_max_numerator=zero_d_max, passed=passed)


@dataclass
class PerturbedEstimateReport:
    rows: list               # (s, mean_abs_lhs, max_ratio)
    decreasing: bool
    passed: bool


def check_perturbed_estimate(system: SystemDef, trials: int = 200,
                             s_values: Sequence[float] = (0.02, 0.01, 0.005),
                             lambda_star: float = 1.0, jump_scale: float = 0.1,
                             seed: int = 0, t0: float = 0.0,
                             x0: float = 0.0) -> PerturbedEstimateReport:
    """Replay the two-fan interaction geometry with source perturbations.

    alpha and beta are solved at (t0, x0 -+ r); gamma at (t0 + s, x0)
    with endpoints shifted by mu = -s q(t0 + s, x0, .).  The excess
    |gamma| - (|alpha| + |beta|) must shrink against the bound shape
    D + (|alpha| + |beta|)(|mu_L| + |mu_R| + s + r) + |mu_R - mu_L|
    as s, r and the jumps shrink together.
    """
    rng = np.random.default_rng(seed)
    center = system.phase_box.center
    hw = system.phase_box.half_widths
    directions = 2.0 * rng.random((trials, 3, system.p)) - 1.0
    s0 = max(s_values)
    rows = []
    for s in s_values:
        r = lambda_star * s
        scale = jump_scale * (s / s0)
        abs_lhs = []
        ratios = []
        for n in range(trials):
            uL, uM, uR = center + scale * hw * directions[n]
            alpha = _solve_strengths(system, t0, x0 - r, uL, uM)
            beta = _solve_strengths(system, t0, x0 + r, uM, uR)
            muL = -s * system.combined_source(t0 + s, x0, uL)
            muR = -s * system.combined_source(t0 + s, x0, uR)
            gamma = _solve_strengths(system, t0 + s, x0, uL + muL, uR + muR)
            lhs = gamma.total - (alpha.total + beta.total)
            D = interaction_potential(alpha, beta)
            bound = (D + (alpha.total + beta.total)
                     * (float(np.sum(np.abs(muL))) + float(np.sum(np.abs(muR)))
                        + s + r)
                     + float(np.sum(np.abs(muR - muL))))
            abs_lhs.append(abs(lhs))
            # only the upper-bound direction enters the stability proof;
            # cancelling same-family waves make the signed excess O(sqrt(D))
            if bound > 1e-14:
                ratios.append(max(lhs, 0.0) / bound)
        rows.append((s, float(np.mean(abs_lhs)), max(ratios, default=0.0)))
    ordered = sorted(rows, key=lambda row: -row[0])
    decreasing = all(b[1] <= a[1] * (1.0 + 1e-9)
                     for a, b in zip(ordered[:-1], ordered[1:]))
    max_ratio = max(row[2] for row in rows)
    passed = decreasing and math.isfinite(max_ratio)
    return PerturbedEstimateReport(rows=rows, decreasing=decreasing,
                                   passed=passed)


# ---------------------------------------------------------------------------
# entropy pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyPair:
    """Convex entropy with compatible flux; Phi_x is the analytic partial."""

    U: Callable[[State], float]
    dU: Callable[[State], np.ndarray]
    Phi: Callable[[float, float, State], float]
    Phi_x: Callable[[float, float, State], float]


def square_entropy(system) -> EntropyPair:
    """U = u^2 / 2 for a scalar law with known entropy flux."""
    ent = getattr(system.scalar_flux, "entropy_flux", None)
    if ent is None:
        raise ValueError("scalar flux does not carry an entropy flux")
    return EntropyPair(
        U=lambda u: 0.5 * float(u[0]) ** 2,
        dU=lambda u: np.array([float(u[0])]),
        Phi=lambda t, x, u: ent(float(u[0])),
        Phi_x=lambda t, x, u: 0.0,
    )


# ---------------------------------------------------------------------------
# residuals of completed runs
# ---------------------------------------------------------------------------

def _require_support(run_result, theta: TestFunction):
    cfg = run_result.config
    t_min, t_max, x_lo, x_hi = theta.support
    t_window = run_result.final_level.k * cfg.s
    if t_min < -1e-12 or t_max > t_window + 1e-12:
        raise SupportExceedsWindow(
            f"support [{t_min:g}, {t_max:g}] vs window [0, {t_window:g}]")
    if x_lo < cfg.x_min - 1e-12 or x_hi > cfg.x_max + 1e-12:
        raise SupportExceedsWindow(
            f"support [{x_lo:g}, {x_hi:g}] vs domain "
            f"[{cfg.x_min:g}, {cfg.x_max:g}]")


def _accumulate_over_cells(run_result, theta, integrand, width_out):
    cfg = run_result.config
    levels = run_result.levels
    if levels is None:
        raise ValueError("run was made without keep_levels=True")
    t_min, t_max, x_lo, x_hi = theta.support
    total = np.zeros(width_out)
    for level in levels[:-1]:
        t_a = level.k * cfg.s
        t_b = t_a + cfg.s
        if t_b <= t_min or t_a >= t_max:
            continue
        for h, gfan in level.fans.items():
            xc = cfg.x_of(h)
            if xc + cfg.r <= x_lo or xc - cfg.r >= x_hi:
                continue
            total += integrate_fan_rectangle(
                gfan, integrand, t_a, t_b, xc - cfg.r, xc + cfg.r,
                n_time=1, n_space=2, gauss_n=3)
    return total


def _initial_term(run_result, theta, fn, width_out):
    cfg = run_result.config
    if theta.value(0.0, 0.5 * (cfg.x_min + cfg.x_max)) == 0.0:
        probe = theta.support
        if probe[0] > 0.0:
            return np.zeros(width_out)
    breaks = [cfg.x_of(h) for h in range(cfg.n_half + 1)]
    return gauss_integrate_1d(
        lambda x: fn(x) * theta.value(0.0, x), cfg.x_min, cfg.x_max,
        breaks=breaks, panels=cfg.n_half, gauss_n=3)


def weak_residual(system: SystemDef, run_result, theta: TestFunction) -> float:
    """Weak-form residual of the trajectory against the test function.

    Returns the largest component magnitude; it vanishes with the mesh
    exactly when the scheme converges to a weak solution.
    """
    _require_support(run_result, theta)

    def m(t, x, w):
        return (w * theta.dt(t, x)
                + system.flux(t, x, w) * theta.dx(t, x)
                + system.source(t, x, w) * theta.value(t, x))

    total = _accumulate_over_cells(run_result, theta, m, system.p)
    total += _initial_term(run_result, theta,
                           lambda x: np.asarray(run_result.u0(x), dtype=float),
                           system.p)
    return float(np.max(np.abs(total)))


def entropy_residual(system: SystemDef, run_result, pair: EntropyPair,
                     theta: TestFunction) -> float:
    """Signed entropy inequality functional; >= -o(1) for entropy solutions."""
    _require_support(run_result, theta)
    t_min, t_max, x_lo, x_hi = theta.support
    for t in np.linspace(t_min, t_max, 13):
        for x in np.linspace(x_lo, x_hi, 13):
            if theta.value(t, x) < -1e-15:
                raise ValueError("entropy test function must be nonnegative")

    def m(t, x, w):
        p_term = (float(np.dot(pair.dU(w), system.combined_source(t, x, w)))
                  + pair.Phi_x(t, x, w))
        return np.array([pair.U(w) * theta.dt(t, x)
                         + pair.Phi(t, x, w) * theta.dx(t, x)
                         + p_term * theta.value(t, x)])

    total = _accumulate_over_cells(run_result, theta, m, 1)
    total += _initial_term(
        run_result, theta,
        lambda x: np.array([pair.U(np.asarray(run_result.u0(x), dtype=float))]),
        1)
    return float(total[0])
