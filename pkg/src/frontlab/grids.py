"""Spatial grids shared by the front, spectrum and oracle code."""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from frontlab.errors import GridError

logger = logging.getLogger("frontlab.grids")


def stretch_factor(half_width: float, n: int, core_spacing: float) -> float:
    """
    alpha for which an n-point stretched grid on [-L, L] has core_spacing at
    the origin; 0 when a uniform grid already meets that spacing.
    """
    if n < 3:
        raise GridError(f"grid needs at least 3 points, got {n}")
    uniform = 2.0 * half_width / (n - 1)
    if uniform <= core_spacing:
        return 0.0
    ratio = core_spacing / uniform
    return float(brentq(lambda a: a / np.sinh(a) - ratio, 1e-8, 60.0))


def stretched_grid(half_width: float, n: int, core_spacing: float | None = None, alpha: float | None = None) -> np.ndarray:
    """
    Symmetric grid on [-L, L] refined around x = 0.

    x(s) = L sinh(alpha s) / sinh(alpha) with s uniform on [-1, 1]. alpha is
    chosen so the spacing at the origin is core_spacing; when a uniform grid
    already meets that spacing the grid is uniform.

    Passing alpha instead fixes the mapping. Grids with n and 2n - 1 points
    and the same alpha are nested: the finer one halves every spacing.
    """
    if n < 3:
        raise GridError(f"grid needs at least 3 points, got {n}")
    if (core_spacing is None) == (alpha is None):
        raise GridError("give exactly one of core_spacing and alpha")
    if alpha is None:
        alpha = stretch_factor(half_width, n, core_spacing)
    s = np.linspace(-1.0, 1.0, n)
    if alpha <= 0.0:
        x = half_width * s
    else:
        logger.debug(f"Stretched grid: L={half_width}, n={n}, alpha={alpha:.4f}")
        x = half_width * np.sinh(alpha * s) / np.sinh(alpha)
    # exact mirror symmetry
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -half_width, half_width
    return x


def neumann_laplacian(x: np.ndarray) -> sp.csr_matrix:
    """Second-difference operator on a vertex grid with mirrored ghost nodes."""
    h = np.diff(x)
    n = x.size
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    main = np.zeros(n)

    hl, hr = h[:-1], h[1:]
    w = 2.0 / (hl + hr)
    main[1:-1] = -w * (1.0 / hl + 1.0 / hr)
    lower[:-1] = w / hl          # row i, column i-1 for i = 1..n-2
    upper[1:] = w / hr           # row i, column i+1 for i = 1..n-2

    main[0] = -2.0 / h[0] ** 2
    upper[0] = 2.0 / h[0] ** 2
    main[-1] = -2.0 / h[-1] ** 2
    lower[-1] = 2.0 / h[-1] ** 2
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr")
