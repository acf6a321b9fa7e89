"""
Existence of stationary fronts.

In the super-slow regime a front with fast-jump level v0 exists when the
take-off curve q = J(v)/2 meets the slow unstable line q = sqrt(gamma) v:

    g(v) = sqrt(gamma) v - J(v) / 2 = 0.

Folds are the tangencies g = g' = 0. Fronts are built as composite
asymptotic profiles and optionally refined by collocation on the full
four-dimensional stationary problem.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np
from scipy.integrate import solve_bvp
from scipy.linalg import eig
from scipy.optimize import brentq

from frontlab.errors import (
    ContinuationStall,
    GridError,
    NoConvergence,
    NoFoldFound,
    PreconditionError,
    RegimeError,
)
from frontlab.fast_field import (
    fast_front_eval,
    jump_integral_J,
    jump_integrals_mapped,
    stability_integrals,
)
from frontlab.grids import stretched_grid
from frontlab.model import V_FLOOR, ModelParams, ReactionSpec

logger = logging.getLogger("frontlab.existence")

SCAN_STEP = 1e-3
V_MAX_DEFAULT = 50.0
ROOT_TOL = 1e-10
TRANSVERSAL_TOL = 1e-6
FOLD_TOL = 1e-7
MIN_POINTS = 512
FAR_FIELD_FLOOR = 1e-6
_SLOPE_FD_STEP = 1e-4


# =============================================================================
# Records
# =============================================================================


class Construction(str, Enum):
    COMPOSITE = "CompositeAsymptotic"
    REFINED = "BVPRefined"


@dataclass(frozen=True)
class BranchPoint:
    v0: float
    gamma: float
    branch_index: int               # 1-based, ordered by v0
    transversal: bool
    residual: float
    slope: float                    # g'(v0)


@dataclass(frozen=True)
class FoldPoint:
    gamma_double: float
    v_fold: float
    contact_order: int = 2


@dataclass(frozen=True)
class TakeoffSample:
    v: float
    half_jump: float                # J(v) / 2
    slow_line: float                # sqrt(gamma) v
    residual: float                 # g(v)


@dataclass(frozen=True)
class TypeD:
    fold: FoldPoint


@dataclass(frozen=True)
class TypeE:
    gamma_min: float                # smallest gamma reached by continuation
    v0_at_gamma_min: float


@dataclass(frozen=True, eq=False)
class FrontProfile:
    x_grid: np.ndarray
    U: np.ndarray
    V: np.ndarray
    v0: float
    construction: Construction
    params: ModelParams
    interpolant: Callable | None = field(default=None, repr=False)

    @property
    def half_width(self) -> float:
        return float(self.x_grid[-1])

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """(U, V) at arbitrary x in [-L, L]."""
        x = np.asarray(x, dtype=float)
        if self.interpolant is not None:
            return self.interpolant(x)
        return np.interp(x, self.x_grid, self.U), np.interp(x, self.x_grid, self.V)

    def metadata(self) -> dict[str, Any]:
        return {
            "v0": self.v0,
            "construction": self.construction.value,
            "half_width": self.half_width,
            "points": int(self.x_grid.size),
            "params": self.params.to_dict(),
        }


@dataclass
class ContinuationParams:
    tolerance: float = 1e-10        # corrector residual (relative)
    max_newton_iters: int = 12
    initial_ds: float = 0.05        # arclength in (ln gamma, ln(1+v0))
    max_ds: float = 0.25
    min_ds: float = 1e-10
    max_steps: int = 20000


# =============================================================================
# Existence function
# =============================================================================


def _jump_pair(v: float, spec: ReactionSpec) -> tuple[float, float]:
    """(J, J') by adaptive quadrature."""
    i1, i2, _ = stability_integrals(v, spec)
    return i1, (i1 + 2.0 * i2) / (2.0 * (1.0 + v))


def existence_residual(v: float, gamma: float, spec: ReactionSpec) -> float:
    return math.sqrt(gamma) * v - 0.5 * jump_integral_J(v, spec).value


def _require_super_slow(params: ModelParams) -> float:
    if not params.is_super_slow:
        raise RegimeError("operation needs the super-slow regime")
    return params.gamma


def regular_front_v_peak(params: ModelParams, spec: ReactionSpec) -> float:
    """Peak of V for the regular-regime front: eps * J(0) / (2 sqrt(-G1))."""
    if params.is_super_slow:
        raise RegimeError("regular_front_v_peak needs the regular regime")
    g1 = params.g1
    if g1 >= 0:
        raise RegimeError(f"regular front needs G1 < 0, got {g1}")
    if abs(g1) < 10.0 * params.epsilon**2:
        raise RegimeError(f"|G1|={abs(g1)} is not O(1) for eps={params.epsilon}; use the super-slow regime")
    j0 = jump_integral_J(0.0, spec).value
    return params.epsilon * 0.5 * j0 / math.sqrt(-g1)


def takeoff_curve(params: ModelParams, spec: ReactionSpec, v_grid: Sequence[float]) -> list[TakeoffSample]:
    gamma = _require_super_slow(params)
    v = np.asarray(v_grid, dtype=float)
    j, _ = jump_integrals_mapped(v, spec)
    line = math.sqrt(max(gamma, 0.0)) * v
    return [
        TakeoffSample(float(vi), float(0.5 * ji), float(li), float(li - 0.5 * ji))
        for vi, ji, li in zip(v, j, line)
    ]


def _scan_grid(lo: float, hi: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / SCAN_STEP + 1e-9)) + 1
    grid = lo + SCAN_STEP * np.arange(n)
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    return grid


def find_branches(params: ModelParams, spec: ReactionSpec, v_max: float = V_MAX_DEFAULT) -> list[BranchPoint]:
    """All fronts of the super-slow regime with levels in (-0.9, v_max]."""
    gamma = _require_super_slow(params)
    if gamma <= 0:
        raise PreconditionError(f"find_branches needs gamma > 0, got {gamma}")
    if not (0.0 < v_max <= V_MAX_DEFAULT):
        raise PreconditionError(f"v_max must lie in (0, {V_MAX_DEFAULT}], got {v_max}")

    root_gamma = math.sqrt(gamma)
    grid = _scan_grid(V_FLOOR, v_max)
    j, _ = jump_integrals_mapped(grid, spec)
    g = root_gamma * grid - 0.5 * j

    def residual(v: float) -> float:
        return root_gamma * v - 0.5 * jump_integral_J(v, spec).value

    brackets = [(grid[i], grid[i + 1]) for i in np.flatnonzero(g[:-1] * g[1:] < 0)]
    brackets += [(grid[i], grid[i]) for i in np.flatnonzero(g == 0.0) if i > 0]

    roots: list[tuple[float, float, float]] = []
    for a, b in sorted(brackets):
        try:
            v = a if a == b else brentq(residual, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        except ValueError:
            logger.warning(f"Bracket [{a:.4f}, {b:.4f}] lost its sign change under adaptive quadrature; skipped")
            continue
        r = residual(v)
        slope = root_gamma - 0.5 * _jump_pair(v, spec)[1]
        # Newton polish
        for _ in range(3):
            if abs(r) < ROOT_TOL or abs(slope) <= TRANSVERSAL_TOL:
                break
            candidate = v - r / slope
            r_new = residual(candidate)
            if abs(r_new) >= abs(r):
                break
            v, r = candidate, r_new
        if abs(r) > 1e-8 * (1.0 + abs(v)):
            logger.warning(f"Root near v={v:.6f} only resolved to |g|={abs(r):.2e}")
        roots.append((v, r, slope))

    branches = [
        BranchPoint(
            v0=float(v), gamma=gamma, branch_index=i + 1,
            transversal=abs(slope) > TRANSVERSAL_TOL, residual=float(abs(r)), slope=float(slope),
        )
        for i, (v, r, slope) in enumerate(sorted(roots))
    ]
    logger.info(f"gamma={gamma}: {len(branches)} front(s) at v0={[round(b.v0, 6) for b in branches]}")
    return branches


def find_fold(
    params: ModelParams,
    spec: ReactionSpec,
    v_window: tuple[float, float] = (V_FLOOR, V_MAX_DEFAULT),
) -> FoldPoint:
    """Saddle-node of fronts: solve g(v) = 0, g'(v) = 0 for (gamma, v)."""
    lo, hi = max(v_window[0], V_FLOOR), v_window[1]
    if not hi > lo:
        raise PreconditionError(f"empty fold window {v_window}")
    grid = _scan_grid(lo, hi)
    j, dj = jump_integrals_mapped(grid, spec)
    # tangency of the take-off curve with a line through the origin
    phi = grid * dj - j
    slope = 0.5 * dj
    candidates = [
        i for i in np.flatnonzero(phi[:-1] * phi[1:] <= 0)
        if slope[i] > 0 and slope[i + 1] > 0
    ]
    if not candidates:
        raise NoFoldFound(f"take-off curve has no tangency with a positive slope in {v_window}")
    if len(candidates) > 1:
        logger.info(f"{len(candidates)} tangencies in window; using the lowest")
    i = candidates[0]
    denom = phi[i] - phi[i + 1]
    v = float(grid[i] + (grid[i + 1] - grid[i]) * (phi[i] / denom if denom != 0 else 0.5))
    s = float(np.interp(v, grid, slope))

    def system(s_: float, v_: float) -> np.ndarray:
        jv, djv = _jump_pair(v_, spec)
        return np.array([s_ * v_ - 0.5 * jv, s_ - 0.5 * djv])

    def second_derivative(v_: float) -> float:
        h = _SLOPE_FD_STEP * max(1.0, 1.0 + v_)
        return (_jump_pair(v_ + h, spec)[1] - _jump_pair(v_ - h, spec)[1]) / (2.0 * h)

    residual = system(s, v)
    for it in range(50):
        norm = float(np.max(np.abs(residual)))
        logger.debug(f"fold Newton {it}: s={s:.12g}, v={v:.12g}, |F|={norm:.3e}")
        if norm < 1e-11:
            break
        jac = np.array([[v, s - 0.5 * _jump_pair(v, spec)[1]], [1.0, -0.5 * second_derivative(v)]])
        try:
            step = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError as e:
            raise NoConvergence(f"singular fold Jacobian at v={v}") from e
        damping = 1.0
        while True:
            trial_v = v + damping * step[1]
            if trial_v > -1.0:
                trial = system(s + damping * step[0], trial_v)
                if np.max(np.abs(trial)) < norm or damping < 1.0 / 64:
                    break
            damping /= 2.0
            if damping < 1.0 / 1024:
                raise NoConvergence(f"fold Newton cannot reduce the residual at v={v}", residual=norm)
        s, v, residual = s + damping * step[0], trial_v, trial

    if np.max(np.abs(residual)) > FOLD_TOL or s <= 0:
        raise NoConvergence("fold equations not satisfied", residual=float(np.max(np.abs(residual))))

    curvature = -0.5 * second_derivative(v)
    contact_order = 2 if abs(curvature) > 1e-8 else 3
    fold = FoldPoint(gamma_double=s * s, v_fold=v, contact_order=contact_order)
    logger.info(f"Fold at gamma_double={fold.gamma_double:.8f}, v_fold={fold.v_fold:.8f}")
    return fold


# =============================================================================
# Front profiles
# =============================================================================


def _slow_decay_rate(params: ModelParams) -> float:
    if params.is_super_slow:
        return params.epsilon * math.sqrt(abs(params.gamma))
    return math.sqrt(-params.g1)


def default_half_width(params: ModelParams) -> float:
    rate = _slow_decay_rate(params)
    return max(50.0, 12.0 / rate) if rate > 0 else 50.0


def far_field_tolerance(params: ModelParams, v0: float, L: float) -> float:
    """
    Largest admissible |U(L) - 1|, |V(L)| of a refined front.

    The slow tail still carries (1 + |v0|) exp(-rate L) at x = L, about 6e-6
    (1 + |v0|) at the default L = 12 / rate; ten times that is accepted,
    never less than FAR_FIELD_FLOOR. With gamma = 0 there is no decaying tail and the bound is 1e-3.
    """
    rate = _slow_decay_rate(params)
    tail = (1.0 + abs(v0)) * math.exp(-rate * L) if rate > 0 else 1e-4
    return max(FAR_FIELD_FLOOR, 10.0 * tail)


@dataclass(frozen=True)
class CompositeFront:
    """Fast core u0(x/eps; v0) blended into the outer tails sign(x) sqrt(1 + V(x))."""

    v0: float
    epsilon: float
    decay_rate: float

    def __call__(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        V = self.v0 * np.exp(-self.decay_rate * ax)
        xi = x / self.epsilon
        core, _ = fast_front_eval(xi, self.v0)
        level = 1.0 + V
        # outer solution, keeping the fast approach to the manifold
        tail = np.sqrt(level) * np.tanh(np.sqrt(level / 2.0) * xi)
        a, b = math.sqrt(self.epsilon), 2.0 * math.sqrt(self.epsilon)
        t = np.clip((ax - a) / (b - a), 0.0, 1.0)
        w = 1.0 - t * t * (3.0 - 2.0 * t)
        return w * core + (1.0 - w) * tail, V


def build_composite_front(
    v0: float,
    params: ModelParams,
    spec: ReactionSpec,
    L: float | None = None,
    N: int = 2048,
) -> FrontProfile:
    if N < MIN_POINTS:
        raise GridError(f"composite front needs N >= {MIN_POINTS}, got {N}")
    if not v0 > -1.0:
        raise PreconditionError(f"front level must exceed -1, got {v0}")
    rate = _slow_decay_rate(params)
    if rate <= 0:
        raise GridError("slow tails do not decay (gamma = 0)")
    L = default_half_width(params) if L is None else float(L)
    if L < 10.0 / rate:
        raise GridError(f"L={L} does not cover the slow decay length {1.0 / rate:.3g} (need L >= {10.0 / rate:.3g})")

    x = np.linspace(-L, L, N)
    interpolant = CompositeFront(v0=v0, epsilon=params.epsilon, decay_rate=rate)
    U, V = interpolant(x)
    logger.info(f"Composite front: v0={v0:.6f}, L={L:.3g}, N={N}")
    return FrontProfile(x, U, V, float(v0), Construction.COMPOSITE, params, interpolant)


def _stationary_rhs(params: ModelParams, spec: ReactionSpec):
    eps = params.epsilon

    def fun(x, y):
        u, p, v, q = y
        u_sq = u * u
        r = 1.0 + v - u_sq
        h = np.asarray(spec.H(u_sq, v), float) * np.ones_like(u)
        return np.vstack([p / eps, -r * u / eps, q, -r * h - np.asarray(spec.G(v), float) * np.ones_like(u)])

    def fun_jac(x, y):
        u, p, v, q = y
        u_sq = u * u
        r = 1.0 + v - u_sq
        ones = np.ones_like(u)
        h = np.asarray(spec.H(u_sq, v), float) * ones
        h_u = np.asarray(spec.dH_dUsq(u_sq, v), float) * ones
        h_v = np.asarray(spec.dH_dV(u_sq, v), float) * ones
        dg = np.asarray(spec.dG_dV(v), float) * ones
        jac = np.zeros((4, 4, u.size))
        jac[0, 1] = 1.0 / eps
        jac[1, 0] = -(1.0 + v - 3.0 * u_sq) / eps
        jac[1, 2] = -u / eps
        jac[2, 3] = 1.0
        jac[3, 0] = 2.0 * u * (h - r * h_u)
        jac[3, 2] = -h - r * h_v - dg
        return jac

    return fun, fun_jac


def _unstable_projection(jac_inf: np.ndarray) -> np.ndarray:
    """Rows l with l . (y - y_inf) = 0 removing the unstable directions at x = +L."""
    w, vl = eig(jac_inf, left=True, right=False)
    rows: list[np.ndarray] = []
    for i in np.flatnonzero(w.real > 0):
        left = vl[:, i].conj()
        if abs(w[i].imag) > 1e-12:
            if w[i].imag > 0:
                rows += [left.real, left.imag]
        else:
            rows.append(left.real)
    if len(rows) != 2:
        raise NoConvergence(f"background state is not a 2+2 saddle (eigenvalues {w})")
    return np.array(rows)


@dataclass(frozen=True)
class ReflectedSolution:
    """Half-line collocation solution extended by U odd, V even."""

    sol: Callable

    def __call__(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        y = self.sol(np.abs(x))
        return (np.sign(x) * y[0])[()], y[2][()]


def refine_front_bvp(
    seed: FrontProfile,
    params: ModelParams,
    spec: ReactionSpec,
    tol: float = 1e-8,
    nodes: int = 2000,
    max_nodes: int = 500000,
) -> FrontProfile:
    """
    Solve the stationary problem for (u, p, v, q), p = eps U_x, q = V_x.

    Posed on [0, L] with u(0) = 0 and q(0) = 0 (U odd, V even), and at x = L
    the solution is pinned to the stable subspace of (1, 0, 0, 0).
    """
    eps = params.epsilon
    L = seed.half_width
    x = stretched_grid(L, 2 * nodes - 1, core_spacing=eps / 4.0)[nodes - 1:]
    x[0] = 0.0
    U, V = seed.evaluate(x)
    y_guess = np.vstack([U, eps * np.gradient(U, x), V, np.gradient(V, x)])
    y_guess[0, 0] = 0.0
    y_guess[3, 0] = 0.0

    fun, fun_jac = _stationary_rhs(params, spec)
    y_inf = np.array([1.0, 0.0, 0.0, 0.0])
    projection = _unstable_projection(fun_jac(None, y_inf[:, None])[:, :, 0])

    def bc(ya, yb):
        return np.concatenate([[ya[0], ya[3]], projection @ (yb - y_inf)])

    sol = solve_bvp(fun, bc, x, y_guess, fun_jac=fun_jac, tol=tol, max_nodes=max_nodes)
    worst = float(np.max(sol.rms_residuals)) if sol.rms_residuals is not None else float("nan")
    if not sol.success:
        raise NoConvergence(f"collocation failed: {sol.message}", residual=worst)

    end = sol.sol(L)
    far = far_field_tolerance(params, seed.v0, L)
    if abs(end[0] - 1.0) > far or abs(end[2]) > far:
        raise NoConvergence(
            f"refined orbit does not connect to (1, 0): U(L)={end[0]:.4g}, V(L)={end[2]:.4g} (tolerance {far:.2e})"
        )

    interpolant = ReflectedSolution(sol.sol)
    U_ref, V_ref = interpolant(seed.x_grid)
    v0 = float(sol.sol(0.0)[2])
    drift = float(np.max(np.abs(U_ref - seed.U)))
    logger.info(
        f"Refined front: v0={v0:.6f} (seed {seed.v0:.6f}), max|U - U_seed|={drift:.3e}, "
        f"mesh={sol.x.size}, rms residual={worst:.2e}"
    )
    return FrontProfile(seed.x_grid, U_ref, V_ref, v0, Construction.REFINED, params, interpolant)


# =============================================================================
# Destabilization type by continuation of the regular front
# =============================================================================


@dataclass
class _ArcPoint:
    z: np.ndarray                   # (ln gamma, ln(1 + v0))
    tangent: np.ndarray


def _arc_residual(z: np.ndarray, spec: ReactionSpec) -> tuple[float, np.ndarray, float]:
    """R(z) = sqrt(gamma) v - J(v)/2 in (ln gamma, ln(1+v)) with its gradient."""
    ell, w = z
    v = math.expm1(w)
    j, dj = jump_integrals_mapped(np.array([v]), spec)
    root_gamma = math.exp(0.5 * ell)
    r = root_gamma * v - 0.5 * j[0]
    grad = np.array([0.5 * root_gamma * v, math.exp(w) * (root_gamma - 0.5 * dj[0])])
    scale = max(1.0, abs(root_gamma * v), abs(0.5 * j[0]))
    return r, grad, scale


def _tangent(grad: np.ndarray, previous: np.ndarray | None) -> np.ndarray:
    t = np.array([-grad[1], grad[0]])
    t /= np.linalg.norm(t)
    if previous is None:
        return t if t[0] < 0 else -t    # start towards decreasing gamma
    return t if t @ previous >= 0 else -t


def _regular_root(gamma: float, spec: ReactionSpec, params: ModelParams) -> float:
    branches = find_branches(params.with_gamma(gamma), spec)
    if not branches:
        raise ContinuationStall(f"no front at the starting value gamma={gamma}")
    return min(branches, key=lambda b: abs(b.v0)).v0


def classify_destabilization_type(
    spec: ReactionSpec,
    params: ModelParams,
    gamma_scan: Sequence[float] | None = None,
    continuation: ContinuationParams | None = None,
) -> TypeD | TypeE:
    """
    Follow the regular front (the one with v0 -> 0 as gamma -> infinity) towards
    gamma -> 0. A turning point in gamma is a fold (type D); reaching the end of
    the scan is destabilization by the essential spectrum (type E).
    """
    cp = continuation or ContinuationParams()
    scan = np.asarray(gamma_scan if gamma_scan is not None else np.geomspace(1e4, 1e-4, 9), dtype=float)
    if scan.size < 2 or np.any(np.diff(scan) >= 0) or scan[-1] <= 0:
        raise PreconditionError("gamma_scan must be a strictly descending positive grid")
    gamma_start, gamma_stop = float(scan[0]), float(scan[-1])

    _, dj0 = jump_integrals_mapped(np.array([0.0]), spec)
    gamma_ref = (0.5 * dj0[0]) ** 2
    if gamma_start < 10.0 * gamma_ref:
        logger.warning(f"gamma scan starts at {gamma_start}, below 10x the reference scale {gamma_ref:.3g}")

    v_start = _regular_root(gamma_start, spec, params)
    z = np.array([math.log(gamma_start), math.log1p(v_start)])
    _, grad, _ = _arc_residual(z, spec)
    point = _ArcPoint(z, _tangent(grad, None))
    ell_stop = math.log(gamma_stop)
    ds = cp.initial_ds
    logger.info(f"Continuing regular front from gamma={gamma_start:g}, v0={v_start:.6g}")

    for step in range(cp.max_steps):
        predicted = point.z + ds * point.tangent
        z_new = predicted.copy()
        converged = False
        for it in range(cp.max_newton_iters):
            if z_new[1] > 40.0:
                break
            r, grad, scale = _arc_residual(z_new, spec)
            arc = point.tangent @ (z_new - predicted)
            if abs(r) <= cp.tolerance * scale and abs(arc) <= 1e-12:
                converged = True
                break
            jac = np.array([grad, point.tangent])
            try:
                z_new = z_new - np.linalg.solve(jac, np.array([r, arc]))
            except np.linalg.LinAlgError:
                break
        if not converged:
            ds /= 2.0
            logger.debug(f"Corrector failed at step {step}; ds -> {ds:.3e}")
            if ds < cp.min_ds:
                raise ContinuationStall(f"step size fell below {cp.min_ds} near gamma={math.exp(point.z[0]):.6g}")
            continue

        tangent = _tangent(grad, point.tangent)
        if point.tangent[0] < 0 <= tangent[0]:
            v_prev, v_new = math.expm1(point.z[1]), math.expm1(z_new[1])
            window = (min(v_prev, v_new) - 0.05, max(v_prev, v_new) + 0.05)
            logger.info(f"Turning point in gamma between v0={v_prev:.5f} and {v_new:.5f}")
            return TypeD(find_fold(params, spec, v_window=window))

        point = _ArcPoint(z_new, tangent)
        if point.z[0] <= ell_stop:
            v_end = math.expm1(point.z[1])
            logger.info(f"Regular front persists down to gamma={math.exp(point.z[0]):.3g} (v0={v_end:.6g})")
            return TypeE(gamma_min=math.exp(point.z[0]), v0_at_gamma_min=v_end)
        if it <= 3:
            ds = min(1.5 * ds, cp.max_ds)

    raise ContinuationStall(f"no verdict after {cp.max_steps} continuation steps")
