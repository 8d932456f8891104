"""Independent oracles used to freeze expected values.

Everything here deliberately avoids the library's own solution paths:
root finding uses bracketed brentq instead of the solver's Newton, wave
curves are integrated as ODEs instead of evaluated in closed form, and
symbolic evaluation backs the coefficient formulas.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


def sod_star_oracle(gamma, rho_l, v_l, p_l, rho_r, v_r, p_r):
    """Star pressure/velocity from the two-sided pressure function.

    Bracketed root find (independent of the solver's Newton); returns
    (p_star, v_star, residual).
    """
    c_l = math.sqrt(gamma * p_l / rho_l)
    c_r = math.sqrt(gamma * p_r / rho_r)

    def branch(p, rho_k, p_k, c_k):
        if p > p_k:
            a = 2.0 / ((gamma + 1.0) * rho_k)
            b = (gamma - 1.0) / (gamma + 1.0) * p_k
            return (p - p_k) * math.sqrt(a / (p + b))
        return 2.0 * c_k / (gamma - 1.0) * (
            (p / p_k) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)

    def f(p):
        return branch(p, rho_l, p_l, c_l) + branch(p, rho_r, p_r, c_r) + (v_r - v_l)

    lo = 1e-12 * min(p_l, p_r)
    hi = 10.0 * max(p_l, p_r)
    while f(hi) < 0.0:
        hi *= 10.0
    p_star = brentq(f, lo, hi, xtol=1e-16, rtol=8.9e-16)
    v_star = 0.5 * (v_l + v_r) + 0.5 * (branch(p_star, rho_r, p_r, c_r)
                                        - branch(p_star, rho_l, p_l, c_l))
    return p_star, v_star, abs(f(p_star))


def burgers_exact_riemann(u_l, u_r, xi):
    """Self-similar solution of the convex scalar law f = u^2/2."""
    if u_l > u_r:  # admissible shock
        sigma = 0.5 * (u_l + u_r)
        return u_l if xi <= sigma else u_r
    if xi <= u_l:
        return u_l
    if xi >= u_r:
        return u_r
    return xi


def rarefaction_curve_ivp(system, family, u0, eps, t0=0.0, x0=0.0):
    """Integrate du/dh = r_family(u) as an ODE (independent of closed forms)."""

    def rhs(h, u):
        _, R = system.eigen(t0, x0, u)
        return R[:, family - 1]

    sol = solve_ivp(rhs, (0.0, eps), np.asarray(u0, dtype=float),
                    method="DOP853", rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[:, -1]


def interaction_enumeration(eps_a, shock_a, eps_b, shock_b):
    """Brute-force interaction potential over all family pairs."""
    total = 0.0
    p = len(eps_a)
    for i in range(p):
        for j in range(p):
            if i > j or (i == j and (shock_a[i] or shock_b[j])):
                total += abs(eps_a[i]) * abs(eps_b[j])
    return total


def burgers_shock_dissipation(theta, u_l=1.0, u_r=0.0, n=20001):
    """Entropy dissipation of the exact shock against a bump, U = u^2/2.

    Rate per unit time is the entropy-flux jump minus speed times the
    entropy jump, which evaluates to (u_l - u_r)^3 / 12; the path
    integral uses adaptive quadrature along x = sigma t.
    """
    sigma = 0.5 * (u_l + u_r)
    rate = (u_l - u_r) ** 3 / 12.0
    t0, t1 = theta.support[0], theta.support[1]
    value, _ = quad(lambda t: theta.value(t, sigma * t), max(t0, 0.0), t1,
                    limit=200)
    return rate * value


def duct_source_symbolic(gamma, slope, x_val, rho, v, p):
    """Symbolic evaluation of the geometric source for a(x) = 1 + slope*x."""
    import sympy as sp

    x = sp.Symbol("x")
    a = 1 + slope * x
    e = p / ((gamma - 1) * rho)
    E = e + sp.Rational(1, 2) * v ** 2
    g1 = sp.Matrix([rho * v, rho * v ** 2, rho * v * E + p * v])
    u = sp.Matrix([rho, rho * v, rho * E])
    g = -(sp.diff(a, x) / a) * g1 - (sp.diff(a, 0) if False else 0) * u
    return np.array([float(sp.simplify(gi.subs(x, x_val))) for gi in g])


def constant_state_residual_symbolic(u, f_u, source_time_fn, t_span, x_span,
                                     t_bump, x_bump):
    """Closed form of the rectangle residual for a constant state.

    For constant u the integrand is u dtheta/dt + f(u) dtheta/dx +
    g(t) theta with theta = phi(t) psi(x) the quartic product bump;
    sympy integrates each factor exactly.
    """
    import sympy as sp

    t, x = sp.symbols("t x")

    def bump(sym, a, b):
        tau = (2 * sym - (a + b)) / (b - a)
        return (1 - tau ** 2) ** 2

    phi = bump(t, *t_bump)
    psi = bump(x, *x_bump)
    t0, t1 = t_span
    x0, x1 = x_span
    g_expr = source_time_fn(t)

    term_t = sp.integrate(sp.diff(phi, t), (t, t0, t1)) * sp.integrate(
        psi, (x, x0, x1))
    term_x = sp.integrate(phi, (t, t0, t1)) * sp.integrate(
        sp.diff(psi, x), (x, x0, x1))
    term_g = sp.integrate(g_expr * phi, (t, t0, t1)) * sp.integrate(
        psi, (x, x0, x1))
    return float(u * term_t + f_u * term_x + term_g)
