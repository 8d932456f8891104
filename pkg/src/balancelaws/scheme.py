"""Random-choice time stepper on the staggered mesh.

Cell centers live at x_h = x_min + h r with (k + h) odd at time level k;
Riemann fans sit between them at even-parity indices.  Each step solves
one generalized Riemann problem per fan, then samples every fan at the
shared equidistributed offset a_{k+1} and applies the frozen source
correction of the generalized solution:

    u~ = W_c(a r / s),    u = u~ + s q(k s, h_fan r, u~).

Both the corrected and pre-correction states are retained because the
wave-strength bookkeeping is defined on mixed pairs of them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .generalized import CflViolated, GeneralizedFan, solve_generalized
from .riemann import NoSolution, sample_fan
from .systems import OutOfPhaseBox, State, SystemDef, as_state


# ---------------------------------------------------------------------------
# equidistributed sequences
# ---------------------------------------------------------------------------

def van_der_corput(k: int) -> float:
    """2 vdc_2(k) - 1: deterministic equidistributed offset in (-1, 1)."""
    if k < 1:
        raise ValueError("index must be >= 1")
    inv, denom = 0.0, 1.0
    n = k
    while n:
        denom *= 2.0
        inv += (n & 1) / denom
        n >>= 1
    return 2.0 * inv - 1.0


class VanDerCorput:
    kind = "van_der_corput"

    def value(self, k: int) -> float:
        return van_der_corput(k)

    def describe(self) -> dict:
        return {"kind": self.kind}


class SeededUniform:
    """Reproducible uniform offsets; for robustness experiments only."""

    kind = "seeded_uniform"

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._cache: list[float] = []

    def value(self, k: int) -> float:
        while len(self._cache) < k:
            a = 2.0 * self._rng.random() - 1.0
            while abs(a) >= 1.0:
                a = 2.0 * self._rng.random() - 1.0
            self._cache.append(a)
        return self._cache[k - 1]

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}


def make_sequence(kind: str, seed: int | None = None):
    if kind == "van_der_corput":
        return VanDerCorput()
    if kind == "seeded_uniform":
        return SeededUniform(0 if seed is None else seed)
    raise ValueError(f"unknown sequence kind {kind!r}")


# ---------------------------------------------------------------------------
# configuration and mesh level
# ---------------------------------------------------------------------------

@dataclass
class SchemeConfig:
    r: float
    s: float
    lambda_star: float        # r / s
    x_min: float
    x_max: float
    n_half: int               # (x_max - x_min) / r, even
    t_end: float
    sequence: object
    boundary: str = "constant"            # or "periodic"
    K: float = 10.0
    cfl_safety: float = 0.9
    jump_factor: float = 0.5
    workers: int = 1

    @classmethod
    def create(cls, system: SystemDef, domain: tuple[float, float], r: float,
               t_end: float, *, s: float | None = None, cfl_safety: float = 0.9,
               sequence=None, boundary: str = "constant", K: float = 10.0,
               jump_factor: float = 0.5, workers: int = 1) -> "SchemeConfig":
        x_min, x_max = float(domain[0]), float(domain[1])
        width = x_max - x_min
        if width <= 0.0 or r <= 0.0:
            raise ValueError("need x_max > x_min and r > 0")
        n = round(width / r)
        if n % 2 != 0 or abs(n * r - width) > 1e-9 * width:
            raise ValueError(
                f"domain width {width:g} must be an even multiple of r={r:g}")
        if not (0.0 < cfl_safety <= 1.0):
            raise ValueError("cfl_safety must lie in (0, 1]")
        bound = system.lambda_bound()
        if s is None:
            if bound <= 0.0:
                raise ValueError(
                    "system has no wave speeds; supply the time step explicitly")
            s = cfl_safety * r / bound
        s = float(s)
        if s <= 0.0:
            raise ValueError("time step must be positive")
        if (s / r) * bound > cfl_safety * (1.0 + 1e-12):
            raise ValueError(
                f"(s/r) sup|lambda| = {(s / r) * bound:.6g} exceeds the "
                f"safety factor {cfl_safety:g}")
        if boundary not in ("constant", "periodic"):
            raise ValueError(f"unknown boundary {boundary!r}")
        if K <= 0.0:
            raise ValueError("K must be positive")
        return cls(r=r, s=s, lambda_star=r / s, x_min=x_min, x_max=x_max,
                   n_half=n, t_end=float(t_end),
                   sequence=sequence or VanDerCorput(), boundary=boundary,
                   K=float(K), cfl_safety=float(cfl_safety),
                   jump_factor=float(jump_factor), workers=int(workers))

    def x_of(self, h: int) -> float:
        return self.x_min + h * self.r

    def state_indices(self, k: int) -> list[int]:
        top = self.n_half if self.boundary == "constant" else self.n_half - 1
        return [h for h in range(0, top + 1) if (k + h) % 2 == 1]

    def fan_indices(self, k: int) -> list[int]:
        top = self.n_half if self.boundary == "constant" else self.n_half - 1
        return [h for h in range(0, top + 1) if (k + h) % 2 == 0]


@dataclass
class MeshLevel:
    """Piecewise-constant scheme state at one time level."""

    k: int
    states: dict[int, State]
    tilde: dict[int, State]
    fans: dict[int, GeneralizedFan] = field(default_factory=dict)

    def sorted_states(self) -> tuple[np.ndarray, np.ndarray]:
        hs = sorted(self.states)
        return np.array(hs), np.array([self.states[h] for h in hs])


def _check_parity(level: MeshLevel):
    for h in level.states:
        if (level.k + h) % 2 != 1:
            raise AssertionError(f"state key {h} has wrong parity at level {level.k}")
    for h in level.fans:
        if (level.k + h) % 2 != 0:
            raise AssertionError(f"fan key {h} has wrong parity at level {level.k}")


# ---------------------------------------------------------------------------
# scheme operations
# ---------------------------------------------------------------------------

def initialize(system: SystemDef, config: SchemeConfig,
               u0: Callable[[float], State]) -> MeshLevel:
    """Piecewise-constant projection of the initial data at level 0."""
    states = {}
    for h in config.state_indices(0):
        u = as_state(u0(config.x_of(h)), system.p)
        system.validate_state(u, where=f"initial cell h={h}")
        states[h] = u
    return MeshLevel(k=0, states=states, tilde={h: u.copy() for h, u in states.items()})


def _neighbor(level: MeshLevel, h: int, config: SchemeConfig) -> State:
    if h in level.states:
        return level.states[h]
    if config.boundary == "periodic":
        return level.states[h % config.n_half]
    # constant extension: nearest interior cell of the right parity
    if h < 0:
        return level.states[min(level.states)]
    return level.states[max(level.states)]


def solve_level_fans(system: SystemDef, level: MeshLevel,
                     config: SchemeConfig) -> MeshLevel:
    """Populate the generalized fans between the level's cells."""
    t0 = level.k * config.s
    hs = config.fan_indices(level.k)

    def solve_one(h):
        ul = _neighbor(level, h - 1, config)
        ur = _neighbor(level, h + 1, config)
        try:
            gfan = solve_generalized(system, t0, config.x_of(h), ul, ur,
                                     jump_factor=config.jump_factor)
        except (NoSolution, OutOfPhaseBox) as exc:
            raise type(exc)(f"level k={level.k}, fan h={h}: {exc}") from exc
        if gfan.fan.max_speed > config.lambda_star * (1.0 + 1e-12):
            raise CflViolated(
                f"level k={level.k}, fan h={h}: wave speed "
                f"{gfan.fan.max_speed:.6g} leaves the diamond "
                f"(lambda* = {config.lambda_star:.6g})")
        return gfan

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            fans = list(pool.map(solve_one, hs))
    else:
        fans = [solve_one(h) for h in hs]
    level.fans = dict(zip(hs, fans))
    return level


def sample_step(system: SystemDef, level: MeshLevel, a_next: float,
                config: SchemeConfig) -> MeshLevel:
    """Advance one level by sampling every fan at the shared offset."""
    if not level.fans:
        raise ValueError("fans must be populated before sampling")
    if not (-1.0 < a_next < 1.0):
        raise ValueError("sampling offset must lie strictly inside (-1, 1)")
    k1 = level.k + 1
    t_anchor = level.k * config.s
    xi = a_next * config.lambda_star
    states, tilde = {}, {}

    def sample_one(h):
        gfan = level.fans[h]
        u_t = sample_fan(gfan.fan, xi)
        u_c = u_t + config.s * system.combined_source(
            t_anchor, config.x_of(h), u_t)
        return u_t, u_c

    hs = sorted(level.fans)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(sample_one, hs))
    else:
        results = [sample_one(h) for h in hs]
    for h, (u_t, u_c) in zip(hs, results):
        system.validate_state(u_c, where=f"level k={k1}, cell h={h}")
        tilde[h] = u_t
        states[h] = u_c
    new_level = MeshLevel(k=k1, states=states, tilde=tilde)
    _check_parity(new_level)
    return new_level


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

@dataclass
class Snapshot:
    k: int
    t: float
    h: np.ndarray
    x: np.ndarray
    states: np.ndarray  # (cells, p)


@dataclass
class RunResult:
    system: SystemDef
    config: SchemeConfig
    u0: Callable[[float], State]
    snapshots: list[Snapshot]
    diagnostics: list
    final_level: MeshLevel | None
    levels: list[MeshLevel] | None
    failure: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _snapshot(level: MeshLevel, config: SchemeConfig) -> Snapshot:
    hs, states = level.sorted_states()
    xs = config.x_min + hs * config.r
    return Snapshot(k=level.k, t=level.k * config.s, h=hs, x=xs, states=states)


def run(system: SystemDef, config: SchemeConfig, u0: Callable[[float], State],
        observers: Sequence[Callable] = (), snapshot_times: Sequence[float] = (),
        keep_levels: bool = False, collect_diagnostics: bool = True) -> RunResult:
    """Drive the scheme to t_end, collecting snapshots and diagnostics.

    Aborts (CFL, phase box, solver failure) preserve everything computed
    so far and are reported in ``failure`` instead of raising.
    """
    from . import functionals  # local import: functionals is a consumer

    n_steps = max(0, math.ceil(config.t_end / config.s - 1e-9))
    pending = sorted(float(t) for t in snapshot_times)
    snapshots: list[Snapshot] = []
    diagnostics: list = []
    levels: list[MeshLevel] | None = [] if keep_levels else None
    budget = 0.0

    level = initialize(system, config, u0)
    if keep_levels:
        levels.append(level)
    while pending and pending[0] <= 0.0:
        snapshots.append(_snapshot(level, config))
        pending.pop(0)

    failure = None
    try:
        for k in range(n_steps):
            solve_level_fans(system, level, config)
            if collect_diagnostics and k == 0:
                rec = functionals.level_functionals(system, level, config.K)
                diagnostics.append(rec)
                for obs in observers:
                    obs(rec, level, None)
            a_next = config.sequence.value(k + 1)
            new_level = sample_step(system, level, a_next, config)
            if collect_diagnostics:
                rec = functionals.level_functionals(
                    system, level, config.K, new_level=new_level, s=config.s)
                budget += rec.budget_used
                rec.budget_used = budget
                diagnostics.append(rec)
                for obs in observers:
                    obs(rec, level, new_level)
            t_new = new_level.k * config.s
            while pending and pending[0] <= t_new + 1e-12:
                snapshots.append(_snapshot(new_level, config))
                pending.pop(0)
            level = new_level
            if keep_levels:
                levels.append(level)
    except (CflViolated, OutOfPhaseBox, NoSolution) as exc:
        failure = {"kind": type(exc).__name__, "message": str(exc),
                   "level": level.k}

    return RunResult(system=system, config=config, u0=u0, snapshots=snapshots,
                     diagnostics=diagnostics, final_level=level, levels=levels,
                     failure=failure)


def run_classical(system: SystemDef, config: SchemeConfig,
                  u0: Callable[[float], State]) -> list[dict[int, State]]:
    """Reference classical random choice: no source correction, no tilde
    bookkeeping.  Used to verify exact reduction when q is identically 0."""
    from .riemann import solve_classical

    n_steps = max(0, math.ceil(config.t_end / config.s - 1e-9))
    states = {h: as_state(u0(config.x_of(h)), system.p)
              for h in config.state_indices(0)}
    history = [dict(states)]
    for k in range(n_steps):
        fans = {}
        level = MeshLevel(k=k, states=states, tilde={})
        for h in config.fan_indices(k):
            fans[h] = solve_classical(
                system, k * config.s, config.x_of(h),
                _neighbor(level, h - 1, config), _neighbor(level, h + 1, config),
                jump_factor=config.jump_factor)
        xi = config.sequence.value(k + 1) * config.lambda_star
        states = {h: sample_fan(fans[h], xi) for h in sorted(fans)}
        history.append(dict(states))
    return history
