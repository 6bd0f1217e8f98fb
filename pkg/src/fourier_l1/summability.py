"""Partial sums, Cesaro means and de la Vallee-Poussin means on the torus.

Every mean is a per-mode weighting of the coefficient grid followed by one
separable synthesis onto a uniform half-open sample grid of ``[-pi, pi)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CoefficientGrid
from .kernels import VPParams


def sample_points(count: int) -> np.ndarray:
    """``-pi + 2 pi a / count`` for ``a = 0 .. count - 1``."""
    if count < 1:
        raise ValueError(f"sample count must be positive, got {count}")
    return -np.pi + 2 * np.pi * np.arange(count) / count


@dataclass
class SampleGrid:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2:
            raise ValueError("sample values must be a 2-D array")

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return sample_points(self.nx)

    @property
    def y(self) -> np.ndarray:
        return sample_points(self.ny)

    def __add__(self, other):
        return SampleGrid(self.values + _values(other))

    def __sub__(self, other):
        return SampleGrid(self.values - _values(other))

    def __rmul__(self, alpha):
        return SampleGrid(alpha * self.values)

    def __neg__(self):
        return SampleGrid(-self.values)


def _values(obj):
    return obj.values if isinstance(obj, SampleGrid) else obj


def synthesize(weights: np.ndarray, nx: int, ny: int) -> SampleGrid:
    """``sum_{j,k} W[j, k] exp(i (j x + k y))`` on the uniform grid.

    ``weights`` has odd extents and is centred like ``CoefficientGrid.values``.
    """
    return SampleGrid(synthesize_at(weights, sample_points(nx), sample_points(ny)))


def synthesize_at(weights: np.ndarray, x, y) -> np.ndarray:
    """Tensor-grid synthesis at arbitrary coordinate vectors ``x`` and ``y``."""
    bj, bk = (weights.shape[0] - 1) // 2, (weights.shape[1] - 1) // 2
    ex = np.exp(1j * np.outer(x, np.arange(-bj, bj + 1)))
    ey = np.exp(1j * np.outer(np.arange(-bk, bk + 1), y))
    return ex @ weights @ ey


def coefficients_from_samples(values: np.ndarray, bound_j: int, bound_k: int) -> np.ndarray:
    """Inverse of :func:`synthesize` for polynomials of degree ``<= (bound_j, bound_k)``.

    Exact when the sample counts exceed ``2 * bound + 1`` on each axis.
    """
    values = np.asarray(values, dtype=complex)
    nx, ny = values.shape
    if nx < 2 * bound_j + 1 or ny < 2 * bound_k + 1:
        raise ValueError(f"{nx}x{ny} samples cannot resolve degree ({bound_j}, {bound_k})")
    spectrum = np.fft.fft2(values) / (nx * ny)
    j = np.arange(-bound_j, bound_j + 1)
    k = np.arange(-bound_k, bound_k + 1)
    # sample points start at -pi, which multiplies mode (j, k) by (-1)^(j + k)
    block = spectrum[np.ix_(j % nx, k % ny)]
    return block * np.outer((-1.0) ** np.abs(j), (-1.0) ** np.abs(k))


def evaluate_points(weights: np.ndarray, x, y) -> np.ndarray:
    """Synthesis at scattered points ``(x[i], y[i])``."""
    bj, bk = (weights.shape[0] - 1) // 2, (weights.shape[1] - 1) // 2
    ex = np.exp(1j * np.outer(x, np.arange(-bj, bj + 1)))
    ey = np.exp(1j * np.outer(y, np.arange(-bk, bk + 1)))
    return np.einsum("pj,jk,pk->p", ex, weights, ey)


# per-axis mode weights; `bound` is the grid half-width along that axis

def rect_weights(bound: int, m: int) -> np.ndarray:
    return (np.abs(np.arange(-bound, bound + 1)) <= m).astype(float)


def cesaro_weights(bound: int, m: int) -> np.ndarray:
    j = np.abs(np.arange(-bound, bound + 1))
    return np.where(j <= m, 1 - j / (m + 1), 0.0)


def vp_weights(bound: int, m: int, lambda_m: int) -> np.ndarray:
    # fraction of the window m+1..lambda_m whose partial sums contain |j|
    j = np.abs(np.arange(-bound, bound + 1))
    counts = lambda_m - np.maximum(j, m + 1) + 1
    return np.clip(counts, 0, None) / (lambda_m - m)


def _mean(grid: CoefficientGrid, wj: np.ndarray, wk: np.ndarray, nx: int, ny: int) -> SampleGrid:
    return synthesize(grid.values * np.outer(wj, wk), nx, ny)


def partial_sum(grid: CoefficientGrid, m: int, n: int, nx: int, ny: int) -> SampleGrid:
    _check_mn(m, n)
    return _mean(grid, rect_weights(grid.bound_j, m), rect_weights(grid.bound_k, n), nx, ny)


def cesaro_mean(grid: CoefficientGrid, m: int, n: int, nx: int, ny: int) -> SampleGrid:
    """Average of the two-sided rectangular sums ``S_jk``, ``0 <= j <= m``, ``0 <= k <= n``."""
    _check_mn(m, n)
    return _mean(grid, cesaro_weights(grid.bound_j, m), cesaro_weights(grid.bound_k, n), nx, ny)


def vp_mean(grid: CoefficientGrid, params: VPParams, nx: int, ny: int) -> SampleGrid:
    """Average of ``S_jk`` over ``m < j <= lambda_m``, ``n < k <= lambda_n``."""
    wj = vp_weights(grid.bound_j, params.m, params.lambda_m)
    wk = vp_weights(grid.bound_k, params.n, params.lambda_n)
    return _mean(grid, wj, wk, nx, ny)


def single_partial_sum(coeffs, n: int, points) -> np.ndarray:
    """``S_n(x) = sum_{|k| <= n} c_k exp(i k x)`` for a centred two-sided array."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    coeffs = np.asarray(coeffs, dtype=complex)
    bound = (len(coeffs) - 1) // 2
    k = np.arange(-bound, bound + 1)
    keep = np.abs(k) <= n
    return np.exp(1j * np.outer(np.asarray(points, dtype=float), k[keep])) @ coeffs[keep]


def _check_mn(m: int, n: int):
    if m < 0 or n < 0:
        raise ValueError(f"m and n must be non-negative, got ({m}, {n})")
