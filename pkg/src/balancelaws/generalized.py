"""First-order generalized Riemann solution and its consistency residual.

The generalized solution superposes the frozen-coefficient fan with a
linear-in-time source correction captured at the fan anchor:

    W(t, x) = W_c(xi) + (t - t0) q(t0, x0, W_c(xi)),   xi = (x - x0)/(t - t0),

where q = g - df/dx is the combined source.  The module also provides
the weak-form residual of W over a spacetime rectangle, evaluated by a
deterministic composite Gauss rule on panels aligned with the wave rays
so that every panel sees a smooth integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .riemann import WaveFan, WaveKind, sample_fan
from .systems import State, SystemDef

CFL_SLACK = 1e-12


class CflViolated(RuntimeError):
    """A wave would leave its rectangle/diamond within the time step."""


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """C^1 bump with analytic partials and a rectangular support."""

    value: Callable[[float, float], float]
    dt: Callable[[float, float], float]
    dx: Callable[[float, float], float]
    support: tuple[float, float, float, float]  # (t_min, t_max, x_min, x_max)


def _bump_1d(a: float, b: float):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def value(s):
        tau = (s - mid) / half
        if abs(tau) >= 1.0:
            return 0.0
        return (1.0 - tau * tau) ** 2

    def deriv(s):
        tau = (s - mid) / half
        if abs(tau) >= 1.0:
            return 0.0
        return -4.0 * tau * (1.0 - tau * tau) / half

    return value, deriv


def product_bump(t_span: tuple[float, float],
                 x_span: tuple[float, float]) -> TestFunction:
    """theta(t, x) = phi(t) psi(x) with quartic polynomial bumps."""
    phi, dphi = _bump_1d(*t_span)
    psi, dpsi = _bump_1d(*x_span)
    return TestFunction(
        value=lambda t, x: phi(t) * psi(x),
        dt=lambda t, x: dphi(t) * psi(x),
        dx=lambda t, x: phi(t) * dpsi(x),
        support=(t_span[0], t_span[1], x_span[0], x_span[1]),
    )


# ---------------------------------------------------------------------------
# generalized fan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneralizedFan:
    """Classical fan plus the source map frozen at its anchor."""

    fan: WaveFan

    @property
    def t0(self) -> float:
        return self.fan.t0

    @property
    def x0(self) -> float:
        return self.fan.x0

    @property
    def system(self) -> SystemDef:
        return self.fan.system

    def frozen_q(self, u: State) -> State:
        return self.system.combined_source(self.t0, self.x0, u)


def solve_generalized(system: SystemDef, t0: float, x0: float, uL, uR,
                      jump_factor: float | None = None) -> GeneralizedFan:
    from .riemann import solve_classical
    return GeneralizedFan(solve_classical(system, t0, x0, uL, uR,
                                          jump_factor=jump_factor))


def evaluate_generalized(gfan: GeneralizedFan, t: float, x: float) -> State:
    """W(t, x) for t strictly past the anchor time."""
    if t <= gfan.t0:
        raise ValueError("generalized solution is defined for t > t0 only")
    xi = (x - gfan.x0) / (t - gfan.t0)
    w = sample_fan(gfan.fan, xi)
    return w + (t - gfan.t0) * gfan.frozen_q(w)


def cfl_check(system: SystemDef, s: float, r: float, states) -> float:
    """(s/r) max |lambda_i| over the given states; caller asserts <= 1."""
    worst = 0.0
    for u in states:
        lam, _ = system.eigen(0.0, 0.0, np.asarray(u, dtype=float))
        worst = max(worst, float(np.max(np.abs(lam))))
    return (s / r) * worst


# ---------------------------------------------------------------------------
# ray-aligned composite Gauss quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gauss01(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def gauss_integrate_1d(fn, a: float, b: float, breaks=(), panels: int = 8,
                       gauss_n: int = 4):
    """Composite Gauss rule on [a, b] with forced breakpoints."""
    if b <= a:
        return 0.0 * np.asarray(fn(a))
    edges = [a, b] + [c for c in breaks if a < c < b]
    edges = sorted(set(edges))
    nodes, weights = _gauss01(gauss_n)
    total = None
    span = b - a
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, int(round(panels * (hi - lo) / span)))
        sub = np.linspace(lo, hi, k + 1)
        for pa, pb in zip(sub[:-1], sub[1:]):
            h = pb - pa
            for xi, wi in zip(nodes, weights):
                val = np.asarray(fn(pa + xi * h)) * (wi * h)
                total = val if total is None else total + val
    return total if total is not None else 0.0 * np.asarray(fn(a))


def _fan_regions(fan: WaveFan):
    """Bands of smoothness in xi: constant states and rarefaction interiors."""
    regions = []
    prev = -math.inf
    for i, w in enumerate(fan.waves):
        if w.lower_speed > prev:
            regions.append((prev, w.lower_speed, "const", fan.states[i]))
        if w.kind is WaveKind.RAREFACTION and w.upper_speed > w.lower_speed:
            regions.append((w.lower_speed, w.upper_speed, "raref", w))
        prev = max(prev, w.upper_speed)
    regions.append((prev, math.inf, "const", fan.states[-1]))
    return regions


def integrate_fan_rectangle(gfan: GeneralizedFan, f_point,
                            t_lo: float, t_hi: float,
                            x_lo: float, x_hi: float,
                            n_time: int = 8, n_space: int = 8,
                            gauss_n: int = 4) -> np.ndarray:
    """Integrate f_point(t, x, W(t, x)) over a rectangle above the anchor.

    Panels follow the wave rays, so discontinuities never cross a panel
    and the composite Gauss rule keeps its full order.  Results are
    deterministic: fixed panel layout, fixed node order.
    """
    fan = gfan.fan
    t0, x0 = gfan.t0, gfan.x0
    if t_lo < t0 - 1e-15:
        raise ValueError("rectangle starts before the fan anchor")
    nodes, weights = _gauss01(gauss_n)
    if fan.is_degenerate():
        regions = [(-math.inf, math.inf, "const", fan.states[0])]
    else:
        regions = _fan_regions(fan)
    frozen = {id(payload): gfan.frozen_q(payload)
              for _, _, kind, payload in regions if kind == "const"}

    width = x_hi - x_lo
    total = None
    t_edges = np.linspace(t_lo, t_hi, n_time + 1)
    for ta, tb in zip(t_edges[:-1], t_edges[1:]):
        dt = tb - ta
        for sig_lo, sig_hi, kind, payload in regions:
            # ray-bounded band clipped to the rectangle
            def xl(t):
                if sig_lo == -math.inf:
                    return x_lo
                return min(max(x0 + sig_lo * (t - t0), x_lo), x_hi)

            def xr(t):
                if sig_hi == math.inf:
                    return x_hi
                return min(max(x0 + sig_hi * (t - t0), x_lo), x_hi)

            if xr(tb) - xl(tb) <= 0.0:
                continue
            k = max(1, min(n_space,
                           int(round(n_space * (xr(tb) - xl(tb)) / width))))
            eta_edges = np.linspace(0.0, 1.0, k + 1)
            for ti, wt in zip(nodes, weights):
                t = ta + ti * dt
                a, b = xl(t), xr(t)
                band = b - a
                if band <= 0.0:
                    continue
                tau = t - t0
                for ea, eb in zip(eta_edges[:-1], eta_edges[1:]):
                    for ei, we in zip(nodes, weights):
                        x = a + (ea + ei * (eb - ea)) * band
                        if kind == "const":
                            w = payload + tau * frozen[id(payload)]
                        else:
                            xi = (x - x0) / tau
                            eps_loc = min(max(xi - payload.lower_speed, 0.0),
                                          payload.strength)
                            wc = fan.system.wave_curve(
                                payload.family, payload.left_state, eps_loc,
                                t0, x0)
                            w = wc + tau * gfan.frozen_q(wc)
                        val = np.asarray(f_point(t, x, w), dtype=float)
                        val = val * (wt * dt * we * (eb - ea) * band)
                        total = val if total is None else total + val
    if total is None:
        probe = np.asarray(f_point(t_lo, x_lo, fan.states[0]), dtype=float)
        return 0.0 * probe
    return total


# ---------------------------------------------------------------------------
# consistency residual over one rectangle
# ---------------------------------------------------------------------------

def _require_cfl(gfan: GeneralizedFan, s: float, r: float):
    fan = gfan.fan
    worst = fan.max_speed
    for u in fan.states:
        lam, _ = fan.system.eigen(fan.t0, fan.x0, u)
        worst = max(worst, float(np.max(np.abs(lam))))
    if (s / r) * worst > 1.0 + CFL_SLACK:
        raise CflViolated(
            f"(s/r) sup|lambda| = {(s / r) * worst:.6g} exceeds 1")


def residual_delta(system: SystemDef, gfan: GeneralizedFan, s: float, r: float,
                   theta: TestFunction, quad_n: int = 16,
                   gauss_n: int = 4) -> np.ndarray:
    """Weak-form residual of W over [t0, t0+s] x [x0-r, x0+r].

    Returns the p-vector of the spacetime integral of
    W theta_t + f(t,x,W) theta_x + g(t,x,W) theta.
    """
    if quad_n < 8:
        raise ValueError("quad_n must be at least 8")
    _require_cfl(gfan, s, r)
    t0, x0 = gfan.t0, gfan.x0

    def m(t, x, w):
        return (w * theta.dt(t, x)
                + system.flux(t, x, w) * theta.dx(t, x)
                + system.source(t, x, w) * theta.value(t, x))

    return integrate_fan_rectangle(gfan, m, t0, t0 + s, x0 - r, x0 + r,
                                   n_time=quad_n, n_space=quad_n,
                                   gauss_n=gauss_n)


def fan_boundary_terms(system: SystemDef, gfan: GeneralizedFan, s: float,
                       r: float, theta: TestFunction, quad_n: int = 16,
                       gauss_n: int = 4) -> np.ndarray:
    """The four edge integrals the residual reduces to for exact solutions."""
    t0, x0 = gfan.t0, gfan.x0
    t1 = t0 + s
    fan = gfan.fan
    rays = sorted({w.lower_speed for w in fan.waves}
                  | {w.upper_speed for w in fan.waves})

    top_breaks = [x0 + sig * s for sig in rays]
    top = gauss_integrate_1d(
        lambda x: evaluate_generalized(gfan, t1, x) * theta.value(t1, x),
        x0 - r, x0 + r, breaks=top_breaks, panels=quad_n, gauss_n=gauss_n)
    bottom = gauss_integrate_1d(
        lambda x: (fan.left if x < x0 else fan.right) * theta.value(t0, x),
        x0 - r, x0 + r, breaks=[x0], panels=quad_n, gauss_n=gauss_n)

    def side(x_edge):
        return gauss_integrate_1d(
            lambda t: system.flux(t, x_edge,
                                  evaluate_generalized(gfan, t, x_edge))
            * theta.value(t, x_edge),
            t0, t1, panels=quad_n, gauss_n=gauss_n)

    return top - bottom + side(x0 + r) - side(x0 - r)


def corrected_residual(system: SystemDef, gfan: GeneralizedFan, s: float,
                       r: float, theta: TestFunction, quad_n: int = 16,
                       gauss_n: int = 4) -> np.ndarray:
    """Residual minus the exact edge bookkeeping: the consistency error."""
    delta = residual_delta(system, gfan, s, r, theta, quad_n, gauss_n)
    edges = fan_boundary_terms(system, gfan, s, r, theta, quad_n, gauss_n)
    return delta - edges


# ---------------------------------------------------------------------------
# entropy analogues: same rectangles, scalar (U, Phi, P) integrand
# ---------------------------------------------------------------------------

def entropy_residual_delta(system: SystemDef, pair, gfan: GeneralizedFan,
                           s: float, r: float, theta: TestFunction,
                           quad_n: int = 16, gauss_n: int = 4) -> float:
    _require_cfl(gfan, s, r)
    t0, x0 = gfan.t0, gfan.x0

    def m(t, x, w):
        p_term = (np.dot(pair.dU(w), system.combined_source(t, x, w))
                  + pair.Phi_x(t, x, w))
        return np.array([pair.U(w) * theta.dt(t, x)
                         + pair.Phi(t, x, w) * theta.dx(t, x)
                         + p_term * theta.value(t, x)])

    out = integrate_fan_rectangle(gfan, m, t0, t0 + s, x0 - r, x0 + r,
                                  n_time=quad_n, n_space=quad_n,
                                  gauss_n=gauss_n)
    return float(out[0])


def entropy_boundary_terms(system: SystemDef, pair, gfan: GeneralizedFan,
                           s: float, r: float, theta: TestFunction,
                           quad_n: int = 16, gauss_n: int = 4) -> float:
    t0, x0 = gfan.t0, gfan.x0
    t1 = t0 + s
    fan = gfan.fan
    rays = sorted({w.lower_speed for w in fan.waves}
                  | {w.upper_speed for w in fan.waves})
    top = gauss_integrate_1d(
        lambda x: np.array([pair.U(evaluate_generalized(gfan, t1, x))
                            * theta.value(t1, x)]),
        x0 - r, x0 + r, breaks=[x0 + sig * s for sig in rays],
        panels=quad_n, gauss_n=gauss_n)
    bottom = gauss_integrate_1d(
        lambda x: np.array([pair.U(fan.left if x < x0 else fan.right)
                            * theta.value(t0, x)]),
        x0 - r, x0 + r, breaks=[x0], panels=quad_n, gauss_n=gauss_n)

    def side(x_edge):
        return gauss_integrate_1d(
            lambda t: np.array([
                pair.Phi(t, x_edge, evaluate_generalized(gfan, t, x_edge))
                * theta.value(t, x_edge)]),
            t0, t1, panels=quad_n, gauss_n=gauss_n)

    return float((top - bottom + side(x0 + r) - side(x0 - r))[0])
