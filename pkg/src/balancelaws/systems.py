"""System definitions for 1-D quasilinear balance laws.

A system is the Cauchy problem data for

    d/dt u + d/dx f(t, x, u) = g(t, x, u),    u(t, x) in R^p,

together with its eigenstructure, the admissible phase-space box the
solver is allowed to visit, and the per-family wave-curve maps that the
Riemann solver composes.  Three concrete families are provided: a convex
scalar law (Burgers by default), the 2x2 isentropic p-system, and the
compressible Euler equations in a duct of smoothly varying cross
section.  A zero-flux scalar law is included so that the pure-ODE
reduction d/dt u = g(t) can be run through the same machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

State = np.ndarray

# Intermediate Riemann states may overshoot the box the data lives in;
# they are accepted within this relative enlargement.
BOX_SLACK = 0.5


class OutOfPhaseBox(RuntimeError):
    """A state left the admissible neighborhood; the run must abort."""


class FieldCharacter(Enum):
    GENUINELY_NONLINEAR = "gnl"
    LINEARLY_DEGENERATE = "ld"


GNL = FieldCharacter.GENUINELY_NONLINEAR
LD = FieldCharacter.LINEARLY_DEGENERATE


def as_state(values, p: int | None = None) -> State:
    if type(values) is np.ndarray and values.dtype == np.float64:
        u = values
    else:
        u = np.atleast_1d(np.asarray(values, dtype=float))
    if u.ndim != 1:
        raise ValueError(f"state must be a flat vector, got shape {u.shape}")
    if p is not None and u.shape[0] != p:
        raise ValueError(f"state has {u.shape[0]} components, expected {p}")
    if not np.isfinite(u).all():
        raise ValueError(f"state has non-finite components: {u}")
    return u


@dataclass(frozen=True)
class PhaseBox:
    """Axis-aligned neighborhood of the reference state u*."""

    center: State
    half_widths: np.ndarray

    def __post_init__(self):
        c = as_state(self.center)
        h = np.atleast_1d(np.asarray(self.half_widths, dtype=float))
        if c.shape != h.shape:
            raise ValueError("center and half_widths must have equal length")
        if not np.all(h > 0.0):
            raise ValueError("half_widths must be strictly positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_widths", h)

    @property
    def p(self) -> int:
        return self.center.shape[0]

    def contains(self, u: State, slack: float = 0.0) -> bool:
        return bool(
            (np.abs(u - self.center) <= (1.0 + slack) * self.half_widths).all()
        )

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        offsets = 2.0 * rng.random((n, self.p)) - 1.0
        return self.center + offsets * self.half_widths


class SystemDef:
    """Abstract balance law.  Subclasses fill in the coefficient maps.

    States are plain float64 vectors of length ``p``.  All coefficient
    maps take scalar ``(t, x)`` and one state.  ``flux_x`` is the
    analytic partial d f / d x at frozen u (identically zero whenever
    f = f(u)); no finite differencing happens inside the solver.
    """

    p: int
    characters: tuple[FieldCharacter, ...]
    phase_box: PhaseBox
    entropy_pair = None
    name = "system"

    # -- coefficient maps -------------------------------------------------
    def flux(self, t: float, x: float, u: State) -> State:
        raise NotImplementedError

    def source(self, t: float, x: float, u: State) -> State:
        raise NotImplementedError

    def flux_x(self, t: float, x: float, u: State) -> State:
        raise NotImplementedError

    def jacobian(self, t: float, x: float, u: State) -> np.ndarray:
        raise NotImplementedError

    def eigen(self, t: float, x: float, u: State) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (increasing) and right eigenvectors as matrix columns.

        Genuinely nonlinear columns are scaled so grad(lambda_i) . r_i = +1;
        linearly degenerate columns have unit Euclidean norm.
        """
        raise NotImplementedError

    def combined_source(self, t: float, x: float, u: State) -> State:
        # Contract: exactly source - flux_x, the only combination the
        # generalized solver ever sees.
        return self.source(t, x, u) - self.flux_x(t, x, u)

    # -- admissibility -----------------------------------------------------
    def admissible(self, u: State) -> bool:
        """Physical validity beyond the box (positivity etc.)."""
        return bool(np.isfinite(u).all())

    def validate_state(self, u: State, slack: float = 0.0, where: str = "") -> None:
        if not self.admissible(u) or not self.phase_box.contains(u, slack=slack):
            ctx = f" at {where}" if where else ""
            raise OutOfPhaseBox(f"{self.name}: state {u} left the phase box{ctx}")

    def sample_states(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n admissible states from the phase box (rejection sampling)."""
        out = []
        while len(out) < n:
            for u in self.phase_box.sample(rng, n):
                if self.admissible(u):
                    out.append(u)
                if len(out) == n:
                    break
        return np.array(out)

    def lambda_bound(self) -> float:
        """Upper bound for sup |lambda_i| over the phase box."""
        raise NotImplementedError

    # -- wave curves --------------------------------------------------------
    def wave_curve(self, family: int, u_left: State, eps: float,
                   t: float, x: float) -> State:
        """Right state of the i-wave with signed strength eps from u_left.

        The strength parameter is the change of lambda_i across the wave
        for genuinely nonlinear families (positive on the rarefaction
        branch, negative on the shock branch) and the signed arc length
        along the contact curve for linearly degenerate families.
        """
        raise NotImplementedError


# ---------------------------------------------------------------------------
# scalar convex law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarFlux:
    """Convex scalar flux with analytic derivatives and inverse of f'."""

    name: str
    f: Callable[[float], float]
    fp: Callable[[float], float]
    fpp: Callable[[float], float]
    fp_inv: Callable[[float], float] | None = None
    entropy_flux: Callable[[float], float] | None = None  # int_0^u s f'(s) ds

    def invert_fp(self, y: float, lo: float, hi: float) -> float:
        if self.fp_inv is not None:
            return self.fp_inv(y)
        # f' strictly increasing on a convex flux: bisection + Newton polish
        a, b = (lo, hi) if lo <= hi else (hi, lo)
        while self.fp(a) > y:
            a -= max(1.0, b - a)
        while self.fp(b) < y:
            b += max(1.0, b - a)
        for _ in range(200):
            m = 0.5 * (a + b)
            if self.fp(m) < y:
                a = m
            else:
                b = m
            if b - a < 1e-15 * (1.0 + abs(m)):
                break
        u = 0.5 * (a + b)
        for _ in range(5):
            u -= (self.fp(u) - y) / self.fpp(u)
        return u


def burgers_flux() -> ScalarFlux:
    return ScalarFlux(
        name="burgers",
        f=lambda u: 0.5 * u * u,
        fp=lambda u: u,
        fpp=lambda u: 1.0,
        fp_inv=lambda y: y,
        entropy_flux=lambda u: u ** 3 / 3.0,
    )


def cubic_flux() -> ScalarFlux:
    """f(u) = u^3: convex only for u > 0; used to exercise rejection."""
    return ScalarFlux(
        name="cubic",
        f=lambda u: u ** 3,
        fp=lambda u: 3.0 * u * u,
        fpp=lambda u: 6.0 * u,
    )


SCALAR_FLUXES = {"burgers": burgers_flux, "cubic": cubic_flux}

SourceFn = Callable[[float, float, State], State]


def make_time_source(kind: str, p: int = 1, **params) -> SourceFn | None:
    """Named catalog of t-only source terms g(t), broadcast over components."""
    if kind == "zero":
        return None
    if kind == "constant":
        value = np.full(p, float(params.get("amplitude", 1.0)))
        return lambda t, x, u: value.copy()
    if kind == "exp_decay":
        amp = float(params.get("amplitude", 1.0))
        rate = float(params.get("rate", 1.0))
        return lambda t, x, u: np.full(p, amp * math.exp(-rate * t))
    if kind == "cos":
        amp = float(params.get("amplitude", 1.0))
        omega = float(params.get("omega", 1.0))
        return lambda t, x, u: np.full(p, amp * math.cos(omega * t))
    raise ValueError(f"unknown source kind {kind!r}")


class ScalarLaw(SystemDef):
    """p = 1 genuinely nonlinear law with strictly convex flux."""

    p = 1
    characters = (GNL,)

    def __init__(self, flux: ScalarFlux, source: SourceFn | None = None,
                 phase_box: PhaseBox | None = None):
        self.name = f"scalar[{flux.name}]"
        self._flux = flux
        self._source = source
        self.phase_box = phase_box or PhaseBox(np.array([0.0]), np.array([2.0]))
        self._check_convexity()

    def _check_convexity(self):
        lo = self.phase_box.center[0] - self.phase_box.half_widths[0]
        hi = self.phase_box.center[0] + self.phase_box.half_widths[0]
        for u in np.linspace(lo, hi, 101):
            if self._flux.fpp(u) <= 1e-12:
                raise ValueError(
                    f"flux {self._flux.name!r} is not strictly convex on the "
                    f"phase box (f''({u:.6g}) = {self._flux.fpp(u):.3g})")

    def flux(self, t, x, u):
        return np.array([self._flux.f(u[0])])

    def source(self, t, x, u):
        if self._source is None:
            return np.zeros(1)
        return self._source(t, x, u)

    def flux_x(self, t, x, u):
        return np.zeros(1)

    def jacobian(self, t, x, u):
        return np.array([[self._flux.fp(u[0])]])

    def eigen(self, t, x, u):
        lam = np.array([self._flux.fp(u[0])])
        r = np.array([[1.0 / self._flux.fpp(u[0])]])
        return lam, r

    def lambda_bound(self):
        lo = self.phase_box.center[0] - self.phase_box.half_widths[0]
        hi = self.phase_box.center[0] + self.phase_box.half_widths[0]
        return max(abs(self._flux.fp(lo)), abs(self._flux.fp(hi)))

    def wave_curve(self, family, u_left, eps, t, x):
        lo = self.phase_box.center[0] - 2.0 * self.phase_box.half_widths[0]
        hi = self.phase_box.center[0] + 2.0 * self.phase_box.half_widths[0]
        y = self._flux.fp(u_left[0]) + eps
        return np.array([self._flux.invert_fp(y, lo, hi)])

    @property
    def scalar_flux(self) -> ScalarFlux:
        return self._flux


class ZeroFluxLaw(SystemDef):
    """p = 1 law with f = 0: the trivial reduction d/dt u = g(t, x, u).

    The single field is linearly degenerate (lambda = 0), so every jump
    is a stationary contact; the scheme then reproduces forward Euler
    for the source ODE.
    """

    p = 1
    characters = (LD,)
    name = "ode"

    def __init__(self, source: SourceFn | None, phase_box: PhaseBox | None = None):
        self._source = source
        self.phase_box = phase_box or PhaseBox(np.array([0.0]), np.array([2.0]))

    def flux(self, t, x, u):
        return np.zeros(1)

    def source(self, t, x, u):
        if self._source is None:
            return np.zeros(1)
        return self._source(t, x, u)

    def flux_x(self, t, x, u):
        return np.zeros(1)

    def jacobian(self, t, x, u):
        return np.zeros((1, 1))

    def eigen(self, t, x, u):
        return np.zeros(1), np.ones((1, 1))

    def lambda_bound(self):
        return 0.0

    def wave_curve(self, family, u_left, eps, t, x):
        return np.array([u_left[0] + eps])


# ---------------------------------------------------------------------------
# isentropic p-system (Lagrangian coordinates)
# ---------------------------------------------------------------------------

class PSystem(SystemDef):
    """u = (v, w): d/dt v - d/dx w = 0, d/dt w + d/dx p(v) = 0.

    Gamma-law pressure p(v) = kappa v^-gamma gives two genuinely
    nonlinear fields with speeds -c(v), +c(v), c = sqrt(-p'(v)).  Both
    wave-curve branches are closed-form under the Delta-lambda strength
    parametrization, which makes this the workhorse for p = 2
    interaction bookkeeping.
    """

    p = 2
    characters = (GNL, GNL)

    def __init__(self, gamma: float = 2.0, kappa: float = 1.0,
                 phase_box: PhaseBox | None = None,
                 source: SourceFn | None = None):
        if gamma <= 1.0 or kappa <= 0.0:
            raise ValueError("need gamma > 1 and kappa > 0")
        self.gamma = float(gamma)
        self.kappa = float(kappa)
        self.name = f"p_system[gamma={gamma:g}]"
        self._source = source
        self.phase_box = phase_box or PhaseBox(np.array([1.0, 0.0]),
                                               np.array([0.4, 0.4]))
        if self.phase_box.center[0] - self.phase_box.half_widths[0] <= 0.0:
            raise ValueError("phase box must keep specific volume v > 0")

    # p(v) and helpers
    def pressure(self, v: float) -> float:
        return self.kappa * v ** (-self.gamma)

    def sound(self, v: float) -> float:
        return math.sqrt(self.gamma * self.kappa) * v ** (-0.5 * (self.gamma + 1.0))

    def _sound_inv(self, c: float) -> float:
        if c <= 0.0:
            raise ValueError("wave curve left the v > 0 domain")
        return (c / math.sqrt(self.gamma * self.kappa)) ** (-2.0 / (self.gamma + 1.0))

    def _sound_antideriv(self, v: float) -> float:
        # int c(v) dv
        g = self.gamma
        return -2.0 * math.sqrt(g * self.kappa) / (g - 1.0) * v ** (-0.5 * (g - 1.0))

    def admissible(self, u):
        return bool(np.isfinite(u).all()) and u[0] > 0.0

    def flux(self, t, x, u):
        return np.array([-u[1], self.pressure(u[0])])

    def source(self, t, x, u):
        if self._source is None:
            return np.zeros(2)
        return self._source(t, x, u)

    def flux_x(self, t, x, u):
        return np.zeros(2)

    def jacobian(self, t, x, u):
        dp = -self.gamma * self.kappa * u[0] ** (-self.gamma - 1.0)
        return np.array([[0.0, -1.0], [dp, 0.0]])

    def eigen(self, t, x, u):
        v = u[0]
        c = self.sound(v)
        ppp = self.gamma * (self.gamma + 1.0) * self.kappa * v ** (-self.gamma - 2.0)
        k = 2.0 * c / ppp  # makes grad(lambda) . r = +1 in both families
        lam = np.array([-c, c])
        r = np.column_stack([k * np.array([1.0, c]), k * np.array([-1.0, c])])
        return lam, r

    def lambda_bound(self):
        v_min = self.phase_box.center[0] - self.phase_box.half_widths[0]
        return self.sound(v_min)

    def wave_curve(self, family, u_left, eps, t, x):
        v0, w0 = u_left
        c0 = self.sound(v0)
        c1 = c0 - eps if family == 1 else c0 + eps
        v1 = self._sound_inv(c1)
        if eps >= 0.0:  # rarefaction branch: Riemann invariant transport
            dw = self._sound_antideriv(v1) - self._sound_antideriv(v0)
            w1 = w0 + dw if family == 1 else w0 - dw
        else:  # shock branch: Rankine-Hugoniot velocity jump
            dp = self.pressure(v1) - self.pressure(v0)
            jump = math.sqrt(max(-dp * (v1 - v0), 0.0))
            w1 = w0 - jump
        return np.array([v1, w1])


# ---------------------------------------------------------------------------
# compressible Euler, optionally in a smoothly varying duct
# ---------------------------------------------------------------------------

class DuctGeometry:
    """Cross section a(t, x) > 0 with analytic partial derivatives."""

    kind = "duct"

    def a(self, t: float, x: float) -> float:
        raise NotImplementedError

    def a_t(self, t: float, x: float) -> float:
        raise NotImplementedError

    def a_x(self, t: float, x: float) -> float:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class ConstantDuct(DuctGeometry):
    kind = "constant"

    def __init__(self, a0: float = 1.0):
        if a0 <= 0.0:
            raise ValueError("duct area must be positive")
        self.a0 = float(a0)

    def a(self, t, x):
        return self.a0

    def a_t(self, t, x):
        return 0.0

    def a_x(self, t, x):
        return 0.0

    def describe(self):
        return {"kind": self.kind, "a0": self.a0}


class LinearDuct(DuctGeometry):
    kind = "linear"

    def __init__(self, slope: float, a0: float = 1.0):
        self.slope = float(slope)
        self.a0 = float(a0)

    def a(self, t, x):
        a = self.a0 + self.slope * x
        if a <= 0.0:
            raise ValueError(f"duct area non-positive at x={x:g}")
        return a

    def a_t(self, t, x):
        return 0.0

    def a_x(self, t, x):
        return self.slope

    def describe(self):
        return {"kind": self.kind, "slope": self.slope, "a0": self.a0}


class GaussianBumpDuct(DuctGeometry):
    kind = "gaussian_bump"

    def __init__(self, amplitude: float, center: float = 0.0, width: float = 1.0):
        if amplitude <= -1.0:
            raise ValueError("bump would close the duct")
        self.amplitude = float(amplitude)
        self.center = float(center)
        self.width = float(width)

    def a(self, t, x):
        y = (x - self.center) / self.width
        return 1.0 + self.amplitude * math.exp(-y * y)

    def a_t(self, t, x):
        return 0.0

    def a_x(self, t, x):
        y = (x - self.center) / self.width
        return self.amplitude * math.exp(-y * y) * (-2.0 * y / self.width)

    def describe(self):
        return {"kind": self.kind, "amplitude": self.amplitude,
                "center": self.center, "width": self.width}


class CosineBumpDuct(DuctGeometry):
    """Compactly supported C^1 bump: a = 1 + A cos^2(pi y / 2) on |y| < 1."""

    kind = "cosine_bump"

    def __init__(self, amplitude: float, center: float = 0.0, width: float = 1.0):
        if amplitude <= -1.0:
            raise ValueError("bump would close the duct")
        self.amplitude = float(amplitude)
        self.center = float(center)
        self.width = float(width)

    def a(self, t, x):
        y = (x - self.center) / self.width
        if abs(y) >= 1.0:
            return 1.0
        return 1.0 + self.amplitude * math.cos(0.5 * math.pi * y) ** 2

    def a_t(self, t, x):
        return 0.0

    def a_x(self, t, x):
        y = (x - self.center) / self.width
        if abs(y) >= 1.0:
            return 0.0
        return -self.amplitude * 0.5 * math.pi / self.width * math.sin(math.pi * y)

    def describe(self):
        return {"kind": self.kind, "amplitude": self.amplitude,
                "center": self.center, "width": self.width}


DUCTS = {
    "constant": ConstantDuct,
    "linear": LinearDuct,
    "gaussian_bump": GaussianBumpDuct,
    "cosine_bump": CosineBumpDuct,
}


class Euler(SystemDef):
    """Ideal-gas Euler equations, u = (rho, rho v, rho E), source-free."""

    p = 3
    characters = (GNL, LD, GNL)
    name = "euler"

    def __init__(self, gamma: float = 1.4, phase_box: PhaseBox | None = None):
        if gamma <= 1.0:
            raise ValueError("need gamma > 1")
        self.gamma = float(gamma)
        self.phase_box = phase_box or PhaseBox(
            np.array([1.0, 0.0, 2.5]), np.array([0.95, 1.5, 2.4]))
        lo = self.phase_box.center - self.phase_box.half_widths
        if lo[0] <= 0.0 or lo[2] <= 0.0:
            raise ValueError("phase box must keep rho > 0 and total energy > 0")

    # -- thermodynamics ----------------------------------------------------
    def primitive(self, u: State) -> tuple[float, float, float]:
        rho, m, E = u
        if rho <= 0.0:
            raise OutOfPhaseBox(f"euler: non-positive density {rho}")
        v = m / rho
        pr = (self.gamma - 1.0) * (E - 0.5 * m * v)
        if pr <= 0.0:
            raise OutOfPhaseBox(f"euler: non-positive pressure {pr}")
        return rho, v, pr

    def from_primitive(self, rho: float, v: float, pr: float) -> State:
        if rho <= 0.0 or pr <= 0.0:
            raise OutOfPhaseBox("euler: primitive state must have rho, p > 0")
        return np.array([rho, rho * v, pr / (self.gamma - 1.0) + 0.5 * rho * v * v])

    def sound(self, rho: float, pr: float) -> float:
        return math.sqrt(self.gamma * pr / rho)

    def admissible(self, u):
        if not np.isfinite(u).all() or u[0] <= 0.0:
            return False
        return (self.gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0]) > 0.0

    # -- coefficient maps ----------------------------------------------------
    def flux(self, t, x, u):
        rho, v, pr = self.primitive(u)
        return np.array([u[1], u[1] * v + pr, v * (u[2] + pr)])

    def source(self, t, x, u):
        return np.zeros(3)

    def flux_x(self, t, x, u):
        return np.zeros(3)

    def jacobian(self, t, x, u):
        g = self.gamma
        rho, v, pr = self.primitive(u)
        H = (u[2] + pr) / rho
        return np.array([
            [0.0, 1.0, 0.0],
            [0.5 * (g - 3.0) * v * v, (3.0 - g) * v, g - 1.0],
            [v * (0.5 * (g - 1.0) * v * v - H), H - (g - 1.0) * v * v, g * v],
        ])

    def eigen(self, t, x, u):
        g = self.gamma
        rho, v, pr = self.primitive(u)
        c = self.sound(rho, pr)
        H = (u[2] + pr) / rho
        lam = np.array([v - c, v, v + c])
        k = 2.0 * rho / ((g + 1.0) * c)
        r1 = -k * np.array([1.0, v - c, H - v * c])
        r2 = np.array([1.0, v, 0.5 * v * v])
        r2 = r2 / np.linalg.norm(r2)
        r3 = k * np.array([1.0, v + c, H + v * c])
        return lam, np.column_stack([r1, r2, r3])

    def lambda_bound(self):
        lo = self.phase_box.center - self.phase_box.half_widths
        hi = self.phase_box.center + self.phase_box.half_widths
        rho_min, e_max = lo[0], hi[2]
        v_max = max(abs(lo[1]), abs(hi[1])) / rho_min
        c_max = math.sqrt(self.gamma * (self.gamma - 1.0) * e_max / rho_min)
        return v_max + c_max

    # -- wave curves -----------------------------------------------------
    def wave_curve(self, family, u_left, eps, t, x):
        g = self.gamma
        rho0, v0, p0 = self.primitive(u_left)
        c0 = self.sound(rho0, p0)
        if family == 2:
            n = math.sqrt(1.0 + v0 * v0 + 0.25 * v0 ** 4)
            rho1 = rho0 + eps / n
            if rho1 <= 0.0:
                raise ValueError("contact curve left rho > 0")
            return self.from_primitive(rho1, v0, p0)
        sgn = -1.0 if family == 1 else 1.0
        if eps >= 0.0:  # isentropic rarefaction branch
            c1 = c0 + sgn * eps * (g - 1.0) / (g + 1.0)
            if c1 <= 0.0:
                raise ValueError("rarefaction curve reached vacuum")
            v1 = v0 + 2.0 * eps / (g + 1.0)
            p1 = p0 * (c1 / c0) ** (2.0 * g / (g - 1.0))
            rho1 = g * p1 / (c1 * c1)
            return self.from_primitive(rho1, v1, p1)
        return self._shock_curve(family, rho0, v0, p0, c0, eps)

    def _shock_curve(self, family, rho0, v0, p0, c0, eps):
        """Hugoniot point at strength eps < 0 via bracketed root find."""
        from scipy.optimize import brentq

        g = self.gamma
        mu = (g - 1.0) / (g + 1.0)
        lam0 = (v0 - c0) if family == 1 else (v0 + c0)

        def state_at(p1):
            ratio = p1 / p0
            rho1 = rho0 * (ratio + mu) / (mu * ratio + 1.0)
            if family == 1:
                # left state is ahead of the shock
                A0, B0 = 2.0 / ((g + 1.0) * rho0), mu * p0
                v1 = v0 - (p1 - p0) * math.sqrt(A0 / (p1 + B0))
            else:
                # left state is behind; invert the ahead-side jump relation
                A1, B1 = 2.0 / ((g + 1.0) * rho1), mu * p1
                v1 = v0 - (p0 - p1) * math.sqrt(A1 / (p0 + B1))
            return rho1, v1, p1

        def gap(p1):
            rho1, v1, _ = state_at(p1)
            c1 = self.sound(rho1, p1)
            lam1 = (v1 - c1) if family == 1 else (v1 + c1)
            return (lam1 - lam0) - eps

        if family == 1:
            hi = 2.0 * p0
            while gap(hi) > 0.0:
                hi *= 2.0
                if hi > 1e8 * p0:
                    raise ValueError("shock curve bracket failed")
            p1 = brentq(gap, p0, hi, xtol=1e-15, rtol=8.9e-16)
        else:
            lo = 1e-12 * p0
            if gap(lo) > 0.0:
                raise ValueError("shock curve bracket failed")
            p1 = brentq(gap, lo, p0, xtol=1e-15, rtol=8.9e-16)
        rho1, v1, p1 = state_at(p1)
        return self.from_primitive(rho1, v1, p1)


class EulerDuct(Euler):
    """Euler flow in a duct of cross section a(t, x).

    The geometry enters only through the source
        g = -(a_x / a) (rho v, rho v^2, v (E + p)) - (a_t / a) u,
    so a constant duct reduces to the plain system with source exactly
    zero.
    """

    def __init__(self, gamma: float = 1.4, duct: DuctGeometry | None = None,
                 phase_box: PhaseBox | None = None):
        super().__init__(gamma=gamma, phase_box=phase_box)
        self.duct = duct or ConstantDuct()
        self.name = f"euler_duct[{self.duct.kind}]"

    def source(self, t, x, u):
        rho, v, pr = self.primitive(u)
        a = self.duct.a(t, x)
        g1 = np.array([u[1], u[1] * v, v * (u[2] + pr)])
        return -(self.duct.a_x(t, x) / a) * g1 - (self.duct.a_t(t, x) / a) * u


# ---------------------------------------------------------------------------
# constructors mirroring the public catalog
# ---------------------------------------------------------------------------

def scalar_system(flux_spec: str | ScalarFlux = "burgers",
                  source_spec: SourceFn | None = None,
                  phase_box: PhaseBox | None = None) -> ScalarLaw:
    flux = SCALAR_FLUXES[flux_spec]() if isinstance(flux_spec, str) else flux_spec
    return ScalarLaw(flux, source=source_spec, phase_box=phase_box)


def ode_system(source_spec: SourceFn | None,
               phase_box: PhaseBox | None = None) -> ZeroFluxLaw:
    return ZeroFluxLaw(source_spec, phase_box=phase_box)


def p_system(gamma: float = 2.0, kappa: float = 1.0,
             phase_box: PhaseBox | None = None) -> PSystem:
    return PSystem(gamma=gamma, kappa=kappa, phase_box=phase_box)


def euler_system(gamma: float = 1.4, phase_box: PhaseBox | None = None) -> Euler:
    return Euler(gamma=gamma, phase_box=phase_box)


def euler_duct_system(gamma: float = 1.4, duct_spec: DuctGeometry | None = None,
                      phase_box: PhaseBox | None = None) -> EulerDuct:
    return EulerDuct(gamma=gamma, duct=duct_spec, phase_box=phase_box)
