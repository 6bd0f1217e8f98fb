"""One-sided exponential kernels, window indices and kernel norm profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import MINUS, PLUS, SignedIndex


class DegenerateWindow(ValueError):
    """``floor(lambda * n) <= n``: the averaging window is empty."""


class InsufficientResolution(RuntimeError):
    pass


def log_weight(t):
    """``log(max(|t|, 2))``, the regularised logarithmic weight."""
    return np.log(np.maximum(np.abs(t), 2))


def lambda_index(lam: float, n: int, strict: bool = True) -> int:
    """``floor(lam * n)``; with ``strict`` an empty window above ``n`` raises."""
    if not lam > 1:
        raise ValueError(f"lambda must exceed 1, got {lam}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    value = math.floor(lam * n)
    if strict and value <= n:
        raise DegenerateWindow(f"floor({lam} * {n}) = {value} does not exceed {n}; the window is empty")
    return value


@dataclass(frozen=True)
class VPParams:
    lam: float
    m: int
    n: int
    lambda_m: int = field(init=False)
    lambda_n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lambda_m", lambda_index(self.lam, self.m))
        object.__setattr__(self, "lambda_n", lambda_index(self.lam, self.n))


def e_kernel(n, x):
    """``E_n(x) = sum_{t=0}^{n} exp(i t x)``, ``E_{-n}(x) = E_n(-x)``, ``E_{0+-} = 1/2``.

    ``n`` is a :class:`SignedIndex` or an int (0 is read as "0+").
    """
    n = n if isinstance(n, SignedIndex) else SignedIndex.of(int(n))
    x = np.asarray(x, dtype=float)
    if n.magnitude == 0:
        return np.full(x.shape, 0.5 + 0j)[()]
    t = np.arange(n.magnitude + 1)
    phase = np.exp(1j * n.sign * np.multiply.outer(x, t))
    return phase.sum(axis=-1)


def e_kernel_closed(n: int, x):
    """Geometric-sum form ``exp(i n x / 2) sin((n + 1) x / 2) / sin(x / 2)`` for ``n >= 1``."""
    x = np.asarray(x, dtype=float)
    half = np.sin(x / 2)
    safe = np.where(np.abs(half) < 1e-300, 1.0, half)
    ratio = np.where(np.abs(half) < 1e-300, n + 1.0, np.sin((n + 1) * x / 2) / safe)
    return np.exp(0.5j * n * x) * ratio


def kernel_table(max_a: int, x, branch: bool = True) -> np.ndarray:
    """Kernels for both branches at once, shape ``(2, max_a + 1, len(x))``.

    Row ``[0, a]`` is the plus branch at magnitude ``a``, row ``[1, a]`` the
    minus branch.  With ``branch`` (the default) the kernels are
    ``1/2 + sum_{t=1}^{a} exp(+-i t x)``; these agree with ``E_{0+-} = 1/2``
    and satisfy ``K_a - K_{a-1} = exp(+-i a x)`` for every ``a >= 1``, which
    is what summation by parts through the origin needs.  With
    ``branch=False`` the rows are the plain ``E_a`` (``E_0`` still 1/2).
    """
    x = np.asarray(x, dtype=float)
    terms = np.exp(1j * np.outer(np.arange(max_a + 1), x))
    terms[0] = 0.5
    plus = np.cumsum(terms, axis=0)
    if not branch and max_a >= 1:
        plus[1:] += 0.5
    return np.stack([plus, plus.conj()])


def branch_kernel(n, x):
    """Single entry of the branch kernel table (see :func:`kernel_table`)."""
    n = n if isinstance(n, SignedIndex) else SignedIndex.of(int(n))
    value = e_kernel(n, x)
    return value if n.magnitude == 0 else value - 0.5


@dataclass
class NormBoundReport:
    max_k: int
    ratios: list[tuple[int, float]]
    norms: list[tuple[int, float]]
    estimated_c: float
    quadrature_points: int


def _rectangle_abs_e(k: int, q: int) -> float:
    x = -np.pi + 2 * np.pi * np.arange(q) / q
    return float(np.abs(e_kernel_closed(k, x)).sum() * (2 * np.pi / q))


def e_norm_l1(k: int, quadrature_points: int, check: float = 1e-2) -> float:
    """``||E_k||_1`` on ``[-pi, pi)`` by the rectangle rule.

    The node count is rounded up to an even multiple of ``k + 1`` so every
    zero of ``E_k`` is a node; the error then expands in even powers of the
    spacing and one Richardson step against the doubled rule removes the
    leading term.  ``check`` bounds the relative gap between the plain and
    extrapolated values.
    """
    if k < 1:
        return 2 * np.pi * 0.5
    per = 2 * (k + 1)
    q = per * max(1, -(-quadrature_points // per))
    coarse = _rectangle_abs_e(k, q)
    fine = _rectangle_abs_e(k, 2 * q)
    value = (4 * fine - coarse) / 3
    if abs(value - fine) > check * value:
        raise InsufficientResolution(f"rectangle rule for ||E_{k}|| not resolved with {q} points")
    return value


def e_norm_profile(max_k: int, quadrature_points: int | None = None) -> NormBoundReport:
    """Ratios ``||E_k||_1 / log(max(k, 2))`` for ``1 <= k <= max_k``.

    ``estimated_c`` is the largest ratio over ``2 <= k <= max_k``.
    """
    if max_k < 2:
        raise ValueError(f"max_k must be at least 2, got {max_k}")
    if quadrature_points is None:
        quadrature_points = 16 * max_k
    if quadrature_points < 16 * max_k:
        raise ValueError(f"quadrature_points must be >= 16 * max_k = {16 * max_k}")
    norms, ratios = [], []
    for k in range(1, max_k + 1):
        value = e_norm_l1(k, quadrature_points)
        norms.append((k, value))
        ratios.append((k, value / float(log_weight(k))))
    estimated = max(r for k, r in ratios if k >= 2)
    return NormBoundReport(max_k, ratios, norms, estimated, quadrature_points)


__all__ = [
    "DegenerateWindow", "InsufficientResolution", "NormBoundReport", "VPParams",
    "branch_kernel", "e_kernel", "e_kernel_closed", "e_norm_l1", "e_norm_profile",
    "kernel_table", "lambda_index", "log_weight", "MINUS", "PLUS",
]
