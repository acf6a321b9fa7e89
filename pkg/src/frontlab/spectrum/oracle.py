"""
Direct eigenvalue oracle for the linearized front problem.

Independent of the Evans machinery: the linearization in x,

    lambda u     = eps^2 u_xx + f_u u + U v
    tau lambda v = v_xx + g_u u + g_v v,

is discretized by finite differences with Neumann ends on a core-refined grid
and handed to a shift-invert Arnoldi solver.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigs

from frontlab.errors import GridError, SolverFailure
from frontlab.grids import neumann_laplacian, stretch_factor, stretched_grid
from frontlab.spectrum.essential import distance_to_essential_spectrum
from frontlab.spectrum.evans import LinearizationContext, linearization_coefficients
from frontlab.spectrum.types import OracleEigenvalue, ParityClass

logger = logging.getLogger("frontlab.spectrum.oracle")

PARITY_DOMINANCE = 0.99
_NEGLIGIBLE = 1e-16                 # squared-norm share below which a component is ignored
_RE_FLOOR = -2.0


def _operator(ctx: LinearizationContext, n: int, half_width: float, alpha: float) -> tuple[sp.csc_matrix, np.ndarray]:
    eps = ctx.params.epsilon
    tau = ctx.params.tau
    x = stretched_grid(half_width, n, alpha=alpha)
    U, V = ctx.front.evaluate(x)
    f_u, _, c_u, c_v = linearization_coefficients(U, V, ctx.spec).T
    lap = neumann_laplacian(x)
    # time-derivative weights (1, tau) folded into the v rows
    op = sp.bmat([
        [eps**2 * lap + sp.diags(f_u), sp.diags(U)],
        [sp.diags(-c_u / tau), (lap - sp.diags(c_v)) / tau],
    ], format="csc")
    return op, x


def _solve(op: sp.csc_matrix, shifts: Sequence[float], n_eigs: int) -> tuple[np.ndarray, np.ndarray]:
    values, vectors = [], []
    for shift in shifts:
        try:
            w, v = eigs(op, k=n_eigs, sigma=shift, which="LM")
        except (ArpackNoConvergence, ArpackError, RuntimeError) as e:
            raise SolverFailure(f"eigensolver failed near shift {shift}: {e}") from e
        values.append(w)
        vectors.append(v)
    w = np.concatenate(values)
    v = np.concatenate(vectors, axis=1)
    keep: list[int] = []
    for i in np.argsort(-w.real, kind="stable"):
        if all(abs(w[i] - w[j]) > 1e-9 * (1.0 + abs(w[i])) for j in keep):
            keep.append(int(i))
    return w[keep], v[:, keep]


def discrete_spectrum_oracle(
    ctx: LinearizationContext,
    N: int = 4096,
    L: float | None = None,
    shifts: Sequence[float] | None = None,
    n_eigs: int = 8,
    cluster_margin: float | None = None,
) -> list[OracleEigenvalue]:
    """
    Eigenvalues with Re lambda > -2 near the given shifts, each with a
    Richardson error estimate |lambda_2N - lambda_N| / 3 and a parity label.

    The second solve runs on the nested grid with 2N - 1 points. Isolated
    eigenvalues are reported Richardson-extrapolated; cluster members are the
    fine-grid values.
    """
    front, params = ctx.front, ctx.params
    eps = params.epsilon
    L = front.half_width if L is None else float(L)
    if L > front.half_width + 1e-12:
        raise GridError(f"oracle domain L={L} exceeds the front profile half-width {front.half_width}")
    if N < 4096 and eps <= 0.05:
        logger.warning(f"N={N} is coarse for eps={eps}; use N >= 4096")
    if shifts is None:
        v_peak = float(front.evaluate(np.array([0.0]))[1][0])
        shifts = (0.01, -1.5 * (1.0 + v_peak))
    if cluster_margin is None:
        cluster_margin = 1e-3 * eps**2

    # same mapping on both grids: the fine grid halves every spacing
    alpha = stretch_factor(L, N, 0.1 * eps)
    coarse_op, _ = _operator(ctx, N, L, alpha)
    fine_op, _ = _operator(ctx, 2 * N - 1, L, alpha)
    coarse, _ = _solve(coarse_op, shifts, n_eigs)
    fine, vectors = _solve(fine_op, shifts, n_eigs)

    results = []
    for value, vector in zip(fine, vectors.T):
        if value.real <= _RE_FLOOR:
            continue
        partner = coarse[np.argmin(np.abs(coarse - value))]
        error = float(abs(value - partner)) / 3.0
        distance = distance_to_essential_spectrum(value, params, ctx.spec)
        label = "cluster" if distance <= max(5.0 * error, cluster_margin) else "point"
        if label == "point":
            # second-order scheme: extrapolate, keep the fine-grid error as the bound
            value = value + (value - partner) / 3.0
        results.append(OracleEigenvalue(
            value=complex(value),
            error_estimate=error,
            label=label,
            parity=parity_check(vector),
            distance_to_essential=distance,
        ))
    points = [r for r in results if r.label == "point"]
    logger.info(
        f"Oracle (N={N}/{2 * N - 1}, L={L:.4g}): {len(points)} point eigenvalue(s) "
        f"{[f'{r.value:.6g}' for r in points]}, {len(results) - len(points)} cluster"
    )
    return results


def _component_parity(f: np.ndarray, total: float) -> str | None:
    even = 0.5 * (f + f[::-1])
    odd = 0.5 * (f - f[::-1])
    e = float(np.vdot(even, even).real)
    o = float(np.vdot(odd, odd).real)
    if e + o <= _NEGLIGIBLE * total:
        return None
    if o >= PARITY_DOMINANCE * (e + o):
        return "odd"
    if e >= PARITY_DOMINANCE * (e + o):
        return "even"
    return "mixed"


def parity_check(eigenvector: np.ndarray) -> ParityClass:
    """Parity of a stacked (u, v) eigenvector on a grid symmetric about x = 0."""
    vec = np.asarray(eigenvector)
    n = vec.size // 2
    total = float(np.vdot(vec, vec).real)
    u = _component_parity(vec[:n], total)
    v = _component_parity(vec[n:], total)
    if (u in ("odd", None)) and (v in ("even", None)) and (u, v) != (None, None):
        return ParityClass.U_ODD_V_EVEN
    if (u in ("even", None)) and (v in ("odd", None)) and (u, v) != (None, None):
        return ParityClass.U_EVEN_V_ODD
    logger.warning(f"Mixed parity (u: {u}, v: {v})")
    return ParityClass.MIXED
