"""
Direct simulation of

    U_t = eps^2 U_xx + (1 + V - U^2) U
    tau V_t = V_xx + F(U, V)

on [-L, L] with Neumann ends. Cell-centred finite differences; diffusion by
Crank-Nicolson (tridiagonal solves), reaction by second-order Adams-Bashforth.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy.linalg import solve_banded

from frontlab.errors import GridError, PreconditionError
from frontlab.existence import CompositeFront
from frontlab.model import ModelParams, ReactionSpec

logger = logging.getLogger("frontlab.simulation")

REACTION_BUDGET = 0.4
BACKGROUND_WATCH = 10.0             # background deviation is tracked while max|U| stays below this
FIT_WINDOW = 0.25


@dataclass(frozen=True)
class SimConfig:
    L: float = 50.0
    N: int = 2048
    dt: float = 0.01
    T_final: float = 200.0
    blowup_threshold: float = 1e3
    collapse_threshold: float = 1e-3
    record_every: int = 10
    snapshot_every: int = 0         # 0 disables full-state snapshots
    reaction: bool = True

    def __post_init__(self):
        if self.N < 64 or self.N % 2:
            raise GridError(f"N must be even and >= 64, got {self.N}")
        if not self.L > 0:
            raise GridError(f"L must be positive, got {self.L}")
        if not (self.dt > 0 and self.T_final > 0):
            raise PreconditionError("dt and T_final must be positive")
        if self.record_every < 1 or self.snapshot_every < 0:
            raise PreconditionError("record_every must be >= 1 and snapshot_every >= 0")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    def grid(self) -> np.ndarray:
        return -self.L + self.h * (np.arange(self.N) + 0.5)


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    U: np.ndarray
    V: np.ndarray
    previous_reaction: tuple[np.ndarray, np.ndarray] | None = None
    steps: int = 0


class Verdict(str, Enum):
    PERSISTS = "Persists"
    BLOW_UP = "BlowUp"
    COLLAPSE = "Collapse"


@dataclass(eq=False)
class SimOutcome:
    verdict: Verdict
    drift: float
    series: pd.DataFrame            # t, max_abs_u, max_abs_v, front_position
    t_blow: float | None = None
    growth_rate: float | None = None
    background_deviation: float = 0.0
    x: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    snapshots: list[tuple[float, np.ndarray, np.ndarray]] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "t_blow": self.t_blow,
            "growth_rate": self.growth_rate,
            "drift": self.drift,
            "background_deviation": self.background_deviation,
            "records": len(self.series),
        }


def _laplacian(f: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(f)
    out[1:-1] = f[2:] - 2.0 * f[1:-1] + f[:-2]
    out[0] = f[1] - f[0]
    out[-1] = f[-2] - f[-1]
    return out / (h * h)


@lru_cache(maxsize=16)
def _implicit_band(n: int, h: float, dt: float, kappa: float) -> np.ndarray:
    """Banded form of I - dt/2 kappa D2 (cell-centred Neumann)."""
    r = 0.5 * dt * kappa / (h * h)
    ab = np.zeros((3, n))
    ab[0, 1:] = -r
    ab[2, :-1] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[1, 0] = ab[1, -1] = 1.0 + r
    ab.setflags(write=False)
    return ab


def _reaction(U: np.ndarray, V: np.ndarray, params: ModelParams, spec: ReactionSpec):
    u_sq = U * U
    return (1.0 + V - u_sq) * U, np.asarray(spec.F(u_sq, V), float) / params.tau


def reaction_rate(U: np.ndarray, V: np.ndarray, params: ModelParams, spec: ReactionSpec) -> float:
    """Largest diagonal reaction Jacobian entry, for the explicit step budget."""
    u_sq = U * U
    r = 1.0 + V - u_sq
    g_v = np.asarray(spec.H(u_sq, V), float) + r * np.asarray(spec.dH_dV(u_sq, V), float)
    g_v = g_v + np.asarray(spec.dG_dV(V), float)
    f_u = 1.0 + V - 3.0 * u_sq
    return max(1.0, float(np.max(np.abs(f_u))), float(np.max(np.abs(g_v))) / params.tau)


def check_time_step(state: SimState, config: SimConfig, params: ModelParams, spec: ReactionSpec) -> None:
    limit = REACTION_BUDGET / reaction_rate(state.U, state.V, params, spec)
    if config.dt > limit:
        raise GridError(f"dt={config.dt} exceeds the explicit reaction budget {limit:.4g}")


def initial_front(config: SimConfig, params: ModelParams, spec: ReactionSpec, v0: float) -> SimState:
    """
    Composite front: V = v0 exp(-rate |x|) with the slow decay rate of the
    regime, U the fast core u0(x/eps; v0) blended into sign(x) sqrt(1 + V).
    """
    eps = params.epsilon
    if config.h > eps:
        raise GridError(f"grid spacing {config.h:.3g} does not resolve the fast core (eps={eps})")
    if params.is_super_slow:
        rate = eps * math.sqrt(abs(params.gamma))
    else:
        rate = math.sqrt(-params.g1)
    U, V = CompositeFront(v0=v0, epsilon=eps, decay_rate=rate)(config.grid())
    return SimState(t=0.0, U=np.asarray(U, float), V=np.asarray(V, float))


def step(state: SimState, config: SimConfig, params: ModelParams, spec: ReactionSpec) -> SimState:
    dt, h, n = config.dt, config.h, config.N
    kappa_u, kappa_v = params.epsilon**2, 1.0 / params.tau
    if config.reaction:
        ru, rv = _reaction(state.U, state.V, params, spec)
    else:
        ru, rv = np.zeros_like(state.U), np.zeros_like(state.V)
    if state.previous_reaction is None:
        eu, ev = ru, rv
    else:
        pu, pv = state.previous_reaction
        eu, ev = 1.5 * ru - 0.5 * pu, 1.5 * rv - 0.5 * pv

    rhs_u = state.U + 0.5 * dt * kappa_u * _laplacian(state.U, h) + dt * eu
    rhs_v = state.V + 0.5 * dt * kappa_v * _laplacian(state.V, h) + dt * ev
    U = solve_banded((1, 1), _implicit_band(n, h, dt, kappa_u), rhs_u, check_finite=False)
    V = solve_banded((1, 1), _implicit_band(n, h, dt, kappa_v), rhs_v, check_finite=False)
    return SimState(state.t + dt, U, V, (ru, rv), state.steps + 1)


def front_position(x: np.ndarray, U: np.ndarray) -> float:
    """Zero crossing of U closest to the origin (linear interpolation)."""
    idx = np.flatnonzero(np.signbit(U[:-1]) != np.signbit(U[1:]))
    if idx.size == 0:
        return float("nan")
    a, b = U[idx], U[idx + 1]
    crossings = x[idx] - a * (x[idx + 1] - x[idx]) / (b - a)
    return float(crossings[np.argmin(np.abs(crossings))])


def _background_deviation(U: np.ndarray, V: np.ndarray) -> float:
    return float(max(abs(U[0] + 1.0), abs(U[-1] - 1.0), abs(V[0]), abs(V[-1])))


def _growth_rate(series: pd.DataFrame) -> float | None:
    t_end = series["t"].iloc[-1]
    window = series[series["t"] >= (1.0 - FIT_WINDOW) * t_end]
    max_v = window["max_abs_v"].to_numpy()
    if len(window) < 3 or np.any(max_v <= 0) or np.any(np.diff(max_v) <= 0):
        logger.warning("max|V| is not growing monotonically over the fit window; no growth rate")
        return None
    slope, _ = np.polyfit(window["t"].to_numpy(), np.log(max_v), 1)
    return float(slope)


def run_and_classify(config: SimConfig, params: ModelParams, spec: ReactionSpec, v0: float) -> SimOutcome:
    state = initial_front(config, params, spec, v0)
    check_time_step(state, config, params, spec)
    x = config.grid()
    start = front_position(x, state.U)
    n_steps = math.ceil(config.T_final / config.dt - 1e-9)
    progress_every = max(1, n_steps // 10)

    rows = [(0.0, float(np.max(np.abs(state.U))), float(np.max(np.abs(state.V))), start)]
    snapshots: list[tuple[float, np.ndarray, np.ndarray]] = []
    deviation = _background_deviation(state.U, state.V)
    t_blow = None

    for n in range(1, n_steps + 1):
        state = step(state, config, params, spec)
        max_u = float(np.max(np.abs(state.U)))
        finite = np.all(np.isfinite(state.U)) and np.all(np.isfinite(state.V))
        if not finite or max_u > config.blowup_threshold:
            t_blow = state.t
            logger.info(f"Blow-up at t={t_blow:.4g} (max|U|={max_u:.3g})")
            break
        if max_u <= BACKGROUND_WATCH:
            deviation = max(deviation, _background_deviation(state.U, state.V))
        if n % config.record_every == 0 or n == n_steps:
            rows.append((state.t, max_u, float(np.max(np.abs(state.V))), front_position(x, state.U)))
        if config.snapshot_every and n % config.snapshot_every == 0:
            snapshots.append((state.t, state.U.copy(), state.V.copy()))
        if n % progress_every == 0:
            logger.info(f"t={state.t:.4g}/{config.T_final:g}: max|U|={max_u:.4g}")

    series = pd.DataFrame(rows, columns=["t", "max_abs_u", "max_abs_v", "front_position"])
    final_position = series["front_position"].iloc[-1]
    drift = abs(final_position - start) if math.isfinite(final_position) else float("nan")

    if t_blow is not None:
        outcome = SimOutcome(Verdict.BLOW_UP, drift, series, t_blow=t_blow)
    elif float(np.max(np.abs(state.U))) < config.collapse_threshold:
        outcome = SimOutcome(Verdict.COLLAPSE, drift, series, growth_rate=_growth_rate(series))
    else:
        outcome = SimOutcome(Verdict.PERSISTS, drift, series)
    outcome.background_deviation = deviation
    outcome.x = x
    outcome.snapshots = snapshots
    logger.info(f"Simulation verdict: {outcome.verdict.value} (drift={drift:.3g})")
    return outcome
