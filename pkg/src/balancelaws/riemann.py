"""Classical Riemann solver with frozen coefficients.

Solves the self-similar problem with flux frozen at an anchor point
(t0, x0) and two nearby constant states, producing the full Lax fan:
intermediate states, per-family wave kind, signed strengths and speeds.
Strengths are measured in eigenvalue units (change of lambda_i across
genuinely nonlinear waves, arc length along contact curves), so a
strength is directly comparable to the eigenvalue spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .systems import (
    GNL, LD, BOX_SLACK, Euler, OutOfPhaseBox, ScalarLaw, State, SystemDef,
    ZeroFluxLaw, as_state,
)

RH_TOL = 1e-9          # Rankine-Hugoniot acceptance (relative)
NEWTON_TOL = 1e-12     # state residual for the star-state iteration
MAX_NEWTON = 100
DEGENERATE_EPS = 0.0   # only bitwise-equal inputs take the trivial path


class NoSolution(RuntimeError):
    """The star-state iteration failed or the data admits no small fan."""


class WaveKind(Enum):
    SHOCK = "shock"
    RAREFACTION = "rarefaction"
    CONTACT = "contact"


@dataclass(frozen=True)
class Wave:
    family: int
    kind: WaveKind
    strength: float
    lower_speed: float
    upper_speed: float
    left_state: State
    right_state: State


@dataclass(frozen=True)
class WaveFan:
    """Self-similar fan: p+1 states separated by p waves."""

    system: SystemDef
    t0: float
    x0: float
    states: list
    waves: list

    @property
    def strengths(self) -> np.ndarray:
        return np.array([w.strength for w in self.waves])

    @property
    def kinds(self) -> list:
        return [w.kind for w in self.waves]

    @property
    def left(self) -> State:
        return self.states[0]

    @property
    def right(self) -> State:
        return self.states[-1]

    @property
    def max_speed(self) -> float:
        if not self.waves:
            return 0.0
        return max(max(abs(w.lower_speed), abs(w.upper_speed)) for w in self.waves)

    def is_degenerate(self, tol: float = 1e-14) -> bool:
        return bool(np.all(np.abs(self.strengths) <= tol))


# ---------------------------------------------------------------------------
# fan assembly
# ---------------------------------------------------------------------------

def _shock_speed(system, t0, x0, ul, ur):
    """Least-squares Rankine-Hugoniot speed with residual validation."""
    du = ur - ul
    df = system.flux(t0, x0, ur) - system.flux(t0, x0, ul)
    nn = float(du @ du)
    if nn == 0.0:
        lam, _ = system.eigen(t0, x0, ul)
        return float(lam[0]), 0.0
    sigma = float(df @ du) / nn
    resid = float(np.max(np.abs(df - sigma * du)))
    return sigma, resid


def _build_wave(system, t0, x0, family, eps, ul, ur):
    char = system.characters[family - 1]
    lam_l, _ = system.eigen(t0, x0, ul)
    lam_r, _ = system.eigen(t0, x0, ur)
    if char is LD:
        sigma, resid = _shock_speed(system, t0, x0, ul, ur)
        if abs(eps) <= 1e-14:
            sigma = float(lam_l[family - 1])
        scale = 1.0 + float(np.max(np.abs(system.flux(t0, x0, ul))))
        if resid > RH_TOL * scale:
            raise NoSolution(
                f"contact in family {family} violates Rankine-Hugoniot "
                f"(residual {resid:.3e})")
        return Wave(family, WaveKind.CONTACT, eps, sigma, sigma, ul, ur)
    if eps >= 0.0:
        return Wave(family, WaveKind.RAREFACTION, eps,
                    float(lam_l[family - 1]), float(lam_r[family - 1]), ul, ur)
    sigma, resid = _shock_speed(system, t0, x0, ul, ur)
    scale = 1.0 + float(np.max(np.abs(system.flux(t0, x0, ul))))
    if resid > RH_TOL * scale:
        raise NoSolution(
            f"shock in family {family} violates Rankine-Hugoniot "
            f"(residual {resid:.3e})")
    return Wave(family, WaveKind.SHOCK, eps, sigma, sigma, ul, ur)


def _assemble(system, t0, x0, states, eps):
    waves = []
    for i in range(system.p):
        waves.append(_build_wave(system, t0, x0, i + 1, float(eps[i]),
                                 states[i], states[i + 1]))
    for a, b in zip(waves[:-1], waves[1:]):
        if a.upper_speed > b.lower_speed + 1e-10:
            raise NoSolution(
                f"wave speeds out of order between families {a.family} "
                f"and {b.family}: {a.upper_speed:.6g} > {b.lower_speed:.6g}")
    return WaveFan(system, t0, x0, [np.asarray(s, dtype=float) for s in states],
                   waves)


def _degenerate_fan(system, t0, x0, u):
    states = [u.copy() for _ in range(system.p + 1)]
    return _assemble(system, t0, x0, states, np.zeros(system.p))


# ---------------------------------------------------------------------------
# star-state solvers
# ---------------------------------------------------------------------------

def _solve_scalar(system: ScalarLaw, t0, x0, uL, uR):
    """Direct fan for convex scalar laws: shock iff f' decreases."""
    fl = system.scalar_flux
    a, b = uL[0], uR[0]
    eps = fl.fp(b) - fl.fp(a)
    if eps < 0.0:
        sigma = (fl.f(b) - fl.f(a)) / (b - a)
        wave = Wave(1, WaveKind.SHOCK, eps, sigma, sigma, uL, uR)
    else:
        wave = Wave(1, WaveKind.RAREFACTION, eps, fl.fp(a), fl.fp(b), uL, uR)
    return WaveFan(system, t0, x0, [uL, uR], [wave])


def _solve_zero_flux(system: ZeroFluxLaw, t0, x0, uL, uR):
    return [uL, uR], np.array([uR[0] - uL[0]])


def _compose(system, t0, x0, uL, eps):
    states = [uL]
    for i in range(system.p):
        states.append(system.wave_curve(i + 1, states[-1], float(eps[i]), t0, x0))
    return states


def _solve_generic(system, t0, x0, uL, uR):
    """Damped Newton on the wave-curve parameters, acoustic initial guess."""
    p = system.p
    du = uR - uL
    scale = 1.0 + float(np.linalg.norm(du))
    _, R = system.eigen(t0, x0, 0.5 * (uL + uR))
    eps = np.linalg.solve(R, du)

    def residual(e):
        try:
            states = _compose(system, t0, x0, uL, e)
        except (ValueError, OutOfPhaseBox):
            return None, math.inf
        r = states[-1] - uR
        return states, float(np.linalg.norm(r))

    states, rnorm = residual(eps)
    for _ in range(MAX_NEWTON):
        if states is not None and rnorm <= NEWTON_TOL * scale:
            return states, eps
        if states is None:
            eps *= 0.5
            states, rnorm = residual(eps)
            continue
        F = states[-1] - uR
        J = np.empty((p, p))
        for j in range(p):
            h = 1e-7 * (1.0 + abs(eps[j]))
            ep = eps.copy()
            ep[j] += h
            em = eps.copy()
            em[j] -= h
            sp, np_ = residual(ep)
            sm, nm_ = residual(em)
            if sp is None or sm is None:
                raise NoSolution("wave-curve composition left the valid domain")
            J[:, j] = (sp[-1] - sm[-1]) / (2.0 * h)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NoSolution(f"singular curve Jacobian: {exc}") from exc
        lam = 1.0
        while lam > 1e-6:
            cand = eps + lam * step
            cstates, cnorm = residual(cand)
            if cstates is not None and cnorm < (1.0 - 0.25 * lam) * rnorm:
                eps, states, rnorm = cand, cstates, cnorm
                break
            lam *= 0.5
        else:
            raise NoSolution(
                f"star-state Newton stalled at residual {rnorm:.3e}")
    raise NoSolution(f"star-state Newton did not converge (residual {rnorm:.3e})")


def _euler_pressure_fn(g, rho, pr, c, p):
    if p > pr:
        A = 2.0 / ((g + 1.0) * rho)
        B = (g - 1.0) / (g + 1.0) * pr
        return (p - pr) * math.sqrt(A / (p + B))
    return 2.0 * c / (g - 1.0) * ((p / pr) ** ((g - 1.0) / (2.0 * g)) - 1.0)


def _euler_pressure_fn_prime(g, rho, pr, c, p):
    if p > pr:
        A = 2.0 / ((g + 1.0) * rho)
        B = (g - 1.0) / (g + 1.0) * pr
        return math.sqrt(A / (B + p)) * (1.0 - 0.5 * (p - pr) / (B + p))
    return (p / pr) ** (-0.5 * (g + 1.0) / g) / (rho * c)


def _solve_euler(system: Euler, t0, x0, uL, uR):
    g = system.gamma
    rhoL, vL, pL = system.primitive(uL)
    rhoR, vR, pR = system.primitive(uR)
    cL, cR = system.sound(rhoL, pL), system.sound(rhoR, pR)
    dv = vR - vL
    if 2.0 * (cL + cR) / (g - 1.0) <= dv:
        raise NoSolution("pressure positivity fails: data generates vacuum")

    def F(p):
        return (_euler_pressure_fn(g, rhoL, pL, cL, p)
                + _euler_pressure_fn(g, rhoR, pR, cR, p) + dv)

    def Fp(p):
        return (_euler_pressure_fn_prime(g, rhoL, pL, cL, p)
                + _euler_pressure_fn_prime(g, rhoR, pR, cR, p))

    # PVRS guess, clipped positive; F is monotone so Newton stays safe
    ppv = 0.5 * (pL + pR) - 0.125 * dv * (rhoL + rhoR) * (cL + cR)
    p_star = max(ppv, 1e-10 * min(pL, pR))
    for _ in range(MAX_NEWTON):
        f = F(p_star)
        step = f / Fp(p_star)
        p_new = p_star - step
        if p_new <= 0.0:
            p_new = 0.5 * p_star
        if abs(p_new - p_star) <= 1e-14 * p_new and abs(F(p_new)) <= 1e-11 * (
                1.0 + abs(dv) + cL + cR):
            p_star = p_new
            break
        p_star = p_new
    else:
        raise NoSolution(f"pressure iteration did not converge (F={F(p_star):.3e})")

    v_star = 0.5 * (vL + vR) + 0.5 * (
        _euler_pressure_fn(g, rhoR, pR, cR, p_star)
        - _euler_pressure_fn(g, rhoL, pL, cL, p_star))
    mu = (g - 1.0) / (g + 1.0)

    if p_star > pL:
        ratio = p_star / pL
        rho1 = rhoL * (ratio + mu) / (mu * ratio + 1.0)
    else:
        rho1 = rhoL * (p_star / pL) ** (1.0 / g)
    if p_star > pR:
        ratio = p_star / pR
        rho2 = rhoR * (ratio + mu) / (mu * ratio + 1.0)
    else:
        rho2 = rhoR * (p_star / pR) ** (1.0 / g)

    u1 = system.from_primitive(rho1, v_star, p_star)
    u2 = system.from_primitive(rho2, v_star, p_star)
    c1 = system.sound(rho1, p_star)
    c2 = system.sound(rho2, p_star)
    eps1 = (v_star - c1) - (vL - cL)
    eps3 = (vR + cR) - (v_star + c2)
    eps2 = (rho2 - rho1) * math.sqrt(1.0 + v_star ** 2 + 0.25 * v_star ** 4)
    return [uL, u1, u2, uR], np.array([eps1, eps2, eps3])


def _euler_waves(system: Euler, t0, x0, states, eps):
    g = system.gamma
    uL, u1, u2, uR = states
    rhoL, vL, pL = system.primitive(uL)
    rhoR, vR, pR = system.primitive(uR)
    cL, cR = system.sound(rhoL, pL), system.sound(rhoR, pR)
    _, v_star, p_star = system.primitive(u1)
    c1 = system.sound(system.primitive(u1)[0], p_star)
    c2 = system.sound(system.primitive(u2)[0], p_star)

    waves = []
    if eps[0] < 0.0:
        s1 = vL - cL * math.sqrt((g + 1.0) / (2.0 * g) * p_star / pL
                                 + (g - 1.0) / (2.0 * g))
        waves.append(Wave(1, WaveKind.SHOCK, float(eps[0]), s1, s1, uL, u1))
    else:
        waves.append(Wave(1, WaveKind.RAREFACTION, float(eps[0]),
                          vL - cL, v_star - c1, uL, u1))
    waves.append(Wave(2, WaveKind.CONTACT, float(eps[1]), v_star, v_star, u1, u2))
    if eps[2] < 0.0:
        s3 = vR + cR * math.sqrt((g + 1.0) / (2.0 * g) * p_star / pR
                                 + (g - 1.0) / (2.0 * g))
        waves.append(Wave(3, WaveKind.SHOCK, float(eps[2]), s3, s3, u2, uR))
    else:
        waves.append(Wave(3, WaveKind.RAREFACTION, float(eps[2]),
                          v_star + c2, vR + cR, u2, uR))
    for a, b in zip(waves[:-1], waves[1:]):
        if a.upper_speed > b.lower_speed + 1e-10:
            raise NoSolution("euler wave speeds out of order")
    return WaveFan(system, t0, x0, list(states), waves)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def solve_classical(system: SystemDef, t0: float, x0: float,
                    uL, uR, jump_factor: float | None = None) -> WaveFan:
    """Solve the frozen-coefficient Riemann problem at (t0, x0).

    ``jump_factor`` bounds |uR - uL| componentwise by that multiple of
    the phase-box half widths (default 0.5); pass ``math.inf`` to
    disable.  Raises :class:`NoSolution` or :class:`OutOfPhaseBox`.
    """
    uL = as_state(uL, system.p)
    uR = as_state(uR, system.p)
    system.validate_state(uL, where=f"Riemann data ({t0:g},{x0:g})")
    system.validate_state(uR, where=f"Riemann data ({t0:g},{x0:g})")
    factor = 0.5 if jump_factor is None else float(jump_factor)
    if not math.isinf(factor):
        limit = factor * system.phase_box.half_widths
        if np.any(np.abs(uR - uL) > limit * (1.0 + 1e-12)):
            raise NoSolution(
                f"initial jump {np.abs(uR - uL)} exceeds the small-jump "
                f"radius {limit}")

    if isinstance(system, ScalarLaw):
        return _solve_scalar(system, t0, x0, uL, uR)

    if np.array_equal(uL, uR):
        return _degenerate_fan(system, t0, x0, uL)

    if isinstance(system, ZeroFluxLaw):
        states, eps = _solve_zero_flux(system, t0, x0, uL, uR)
    elif isinstance(system, Euler):
        states, eps = _solve_euler(system, t0, x0, uL, uR)
        fan = _euler_waves(system, t0, x0, states, eps)
        _check_interior(system, fan)
        return fan
    else:
        states, eps = _solve_generic(system, t0, x0, uL, uR)
    fan = _assemble(system, t0, x0, states, eps)
    _check_interior(system, fan)
    return fan


def _check_interior(system, fan):
    for u in fan.states[1:-1]:
        if not system.admissible(u) or not system.phase_box.contains(
                u, slack=BOX_SLACK):
            raise OutOfPhaseBox(
                f"{system.name}: intermediate Riemann state {u} left the "
                f"enlarged phase box")


def sample_fan(fan: WaveFan, xi: float) -> State:
    """Value of the self-similar solution on the ray (x - x0)/(t - t0) = xi.

    Constant between waves, the interior profile inside rarefactions;
    a ray that hits a discontinuity exactly returns the left limit.
    """
    if not math.isfinite(xi):
        raise ValueError("sampling ray must be finite")
    for i, w in enumerate(fan.waves):
        if xi <= w.lower_speed:
            return fan.states[i]
        if xi <= w.upper_speed:
            # strictly inside a rarefaction (lower < xi <= upper)
            if xi == w.upper_speed:
                return fan.states[i + 1]
            eps_loc = xi - w.lower_speed
            return fan.system.wave_curve(w.family, w.left_state, eps_loc,
                                         fan.t0, fan.x0)
    return fan.states[-1]


def wave_strengths(fan: WaveFan) -> tuple[np.ndarray, list]:
    """Signed strength vector and per-family kinds."""
    return fan.strengths, fan.kinds
