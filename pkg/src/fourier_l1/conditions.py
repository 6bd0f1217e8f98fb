"""Tauberian-type condition profiles for one- and two-dimensional coefficients.

Every quantity is a finite sum of absolute values, so each profile is a
nonnegative sequence; the verdict only summarises its trend over the probed
range.  Sums written over ``|j| = 0+-`` visit both branch positions at
magnitude zero, each at full weight.  The logarithmic weight is
:func:`fourier_l1.kernels.log_weight`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import CoefficientGrid, branch_array, branch_diff
from .kernels import DegenerateWindow, lambda_index, log_weight

VANISHING = "vanishing-trend"
NON_VANISHING = "non-vanishing-trend"
INCONCLUSIVE = "inconclusive"

CONDITION_IDS = ("HK13", "LIM14", "C31", "C32", "C33", "C34", "DECAY")


class TruncationError(ValueError):
    pass


@dataclass
class ConditionParams:
    lambdas: list[float] = field(default_factory=lambda: [1.25, 1.5, 2.0])
    n_range: list[int] = field(default_factory=lambda: [4, 8, 16, 32, 64])
    truncation: int | None = None
    p: float = 2.0

    def __post_init__(self):
        if not 1 < self.p <= 2:
            raise ValueError(f"p must lie in (1, 2], got {self.p}")
        if any(not lam > 1 for lam in self.lambdas):
            raise ValueError("every lambda must exceed 1")
        if any(n < 1 for n in self.n_range):
            raise ValueError("probed indices must be positive")
        self.lambdas = sorted(float(v) for v in self.lambdas)
        self.n_range = sorted(int(v) for v in self.n_range)


@dataclass
class ConditionReport:
    condition_id: str
    profile: list[dict]
    verdict: str
    truncation: int | None = None

    def values(self) -> list[float]:
        return [entry["value"] for entry in self.profile]


def trend_verdict(values) -> str:
    """Vanishing if the last value is under a tenth of the maximum and the last
    three do not increase; non-vanishing if the last three sit within 10% of
    the maximum; inconclusive otherwise.  An all-zero profile is vanishing."""
    values = [float(v) for v in values]
    if not values:
        return INCONCLUSIVE
    peak = max(values)
    if peak == 0:
        return VANISHING
    tail = values[-3:]
    if values[-1] < 0.1 * peak and all(a >= b for a, b in zip(tail, tail[1:])):
        return VANISHING
    if len(values) >= 3 and all(v >= 0.9 * peak for v in tail):
        return NON_VANISHING
    return INCONCLUSIVE


def combine_verdicts(verdicts) -> str:
    verdicts = list(verdicts)
    if verdicts and all(v == VANISHING for v in verdicts):
        return VANISHING
    if NON_VANISHING in verdicts:
        return NON_VANISHING
    return INCONCLUSIVE


# -- single-variable conditions --------------------------------------------

def _directional_diffs(seq) -> tuple[np.ndarray, int]:
    """Away-from-zero first differences of a centred two-sided array, padded by zero."""
    seq = np.asarray(seq, dtype=complex)
    bound = (len(seq) - 1) // 2
    padded = np.concatenate([[0], seq, [0]])
    centre = bound + 1
    k = np.arange(-bound, bound + 1)
    idx = k + centre
    step = np.where(k < 0, -1, 1)
    return padded[idx] - padded[idx + step], bound


def _window_diffs(seq, lam: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    top = lambda_index(lam, n)
    diffs, bound = _directional_diffs(seq)
    k = np.arange(-bound, bound + 1)
    inside = (np.abs(k) >= n) & (np.abs(k) <= top)
    return np.abs(k[inside]), np.abs(diffs[inside])


def hk_single(seq, p: float, lam: float, n: int) -> float:
    """``sum_{n <= |k| <= [lam n]} |k|^(p-1) |dc_k|^p`` for a centred array."""
    if not 1 < p <= 2:
        raise ValueError(f"p must lie in (1, 2], got {p}")
    k, d = _window_diffs(seq, lam, n)
    return float(np.sum(k.astype(float) ** (p - 1) * d ** p))


def lim_single(seq, lam: float, n: int) -> float:
    """``log(n) * sum_{n <= |k| <= [lam n]} |dc_k|``."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    _, d = _window_diffs(seq, lam, n)
    return float(np.log(n) * np.sum(d))


def _single_report(cid, func, params: ConditionParams) -> ConditionReport:
    profile, verdicts = [], []
    for lam in params.lambdas:
        series = []
        for n in params.n_range:
            try:
                value = func(lam, n)
            except DegenerateWindow:
                continue
            profile.append({"lambda": lam, "n": n, "value": value})
            series.append(value)
        verdicts.append(trend_verdict(series))
    return ConditionReport(cid, profile, combine_verdicts(verdicts))


def hk_profile(seq, params: ConditionParams) -> ConditionReport:
    return _single_report("HK13", lambda lam, n: hk_single(seq, params.p, lam, n), params)


def lim_profile(seq, params: ConditionParams) -> ConditionReport:
    return _single_report("LIM14", lambda lam, n: lim_single(seq, lam, n), params)


# -- double-series conditions ----------------------------------------------

def _truncation(bound: int, requested: int | None) -> int:
    if requested is None:
        return bound
    if requested > bound:
        raise TruncationError(f"truncation {requested} exceeds grid bound {bound}")
    if requested < 0:
        raise TruncationError("truncation must be non-negative")
    return requested


def _weighted_abs_diff(grid: CoefficientGrid, p: int, q: int, max_a: int, max_b: int) -> np.ndarray:
    """``w(a) w(b) |D_pq c|`` in branch coordinates, shape ``(2, max_a+1, 2, max_b+1)``."""
    raw = branch_array(grid, max_a + p, max_b + q)
    d = np.abs(branch_diff(raw, p, q))[:, : max_a + 1, :, : max_b + 1]
    wa = log_weight(np.arange(max_a + 1))
    wb = log_weight(np.arange(max_b + 1))
    return d * wa[None, :, None, None] * wb[None, None, None, :]


# Partial sums use math.fsum (correctly rounded), so enlarging a truncation
# never decreases a value and window sums equal the sum of their shells.

def _signed_line(grid: CoefficientGrid, p: int, q: int, mags: np.ndarray, trunc: int, along_j: bool):
    """Weighted |diff| summed over the branch range ``0+- .. trunc`` of one
    axis, for each sign and probed magnitude of the other; shape ``(2, len(mags))``."""
    top = int(mags.max())
    if along_j:
        d = _weighted_abs_diff(grid, p, q, trunc, top)
        return np.array([[math.fsum(d[:, :, s, b].ravel()) for b in mags] for s in (0, 1)])
    d = _weighted_abs_diff(grid, p, q, top, trunc)
    return np.array([[math.fsum(d[r, a, :, :].ravel()) for a in mags] for r in (0, 1)])


def cond31_value(grid: CoefficientGrid, k: int, truncation: int | None = None) -> float:
    """``sum_{|j| = 0+-}^{J} w(j) w(k) |Delta_10 c_jk|`` at a fixed signed ``k``."""
    trunc = _truncation(grid.bound_j, truncation)
    per = _signed_line(grid, 1, 0, np.array([abs(k)]), trunc, along_j=True)
    return float(per[0 if k >= 0 else 1, 0])


def cond32_value(grid: CoefficientGrid, j: int, truncation: int | None = None) -> float:
    """Mirror of :func:`cond31_value`: ``Delta_01`` summed over ``|k| = 0+- .. K``."""
    trunc = _truncation(grid.bound_k, truncation)
    per = _signed_line(grid, 0, 1, np.array([abs(j)]), trunc, along_j=False)
    return float(per[0 if j >= 0 else 1, 0])


def _line_report(cid: str, grid, params: ConditionParams, along_j: bool) -> ConditionReport:
    if along_j:
        trunc = _truncation(grid.bound_j, params.truncation)
    else:
        trunc = _truncation(grid.bound_k, params.truncation)
    mags = np.array(params.n_range)
    p, q = (1, 0) if along_j else (0, 1)
    per = _signed_line(grid, p, q, mags, trunc, along_j)
    # both signs of the probed index; the larger one is reported
    worst = per.max(axis=0)
    key = "k" if along_j else "j"
    profile = [{key: int(t), "value": float(v)} for t, v in zip(mags, worst)]
    return ConditionReport(cid, profile, trend_verdict(worst), trunc)


def cond31_profile(grid: CoefficientGrid, params: ConditionParams) -> ConditionReport:
    return _line_report("C31", grid, params, along_j=True)


def cond32_profile(grid: CoefficientGrid, params: ConditionParams) -> ConditionReport:
    return _line_report("C32", grid, params, along_j=False)


def cond33_shell(grid: CoefficientGrid, k_shell: int, truncation: int | None = None) -> float:
    """Contribution of the two rows ``|k| = k_shell`` to :func:`cond33_value`."""
    trunc = _truncation(grid.bound_j, truncation)
    d = _weighted_abs_diff(grid, 1, 1, trunc, k_shell)
    return math.fsum(d[:, :, :, k_shell].ravel())


def cond34_shell(grid: CoefficientGrid, j_shell: int, truncation: int | None = None) -> float:
    trunc = _truncation(grid.bound_k, truncation)
    d = _weighted_abs_diff(grid, 1, 1, j_shell, trunc)
    return math.fsum(d[:, j_shell, :, :].ravel())


def cond33_value(grid: CoefficientGrid, lam: float, n: int, truncation: int | None = None) -> float:
    """``sum_{|j|=0+-}^{J} sum_{|k|=n}^{[lam n]} w(j) w(k) |Delta_11 c_jk|``, shell by shell."""
    top = lambda_index(lam, n)
    return sum(cond33_shell(grid, s, truncation) for s in range(n, top + 1))


def cond34_value(grid: CoefficientGrid, lam: float, m: int, truncation: int | None = None) -> float:
    """Mirror of :func:`cond33_value` with the window on ``|j|``."""
    top = lambda_index(lam, m)
    return sum(cond34_shell(grid, s, truncation) for s in range(m, top + 1))


def _window_report(cid: str, grid, params: ConditionParams, value_fn, bound: int) -> ConditionReport:
    trunc = _truncation(bound, params.truncation)
    profile, verdicts = [], []
    for lam in params.lambdas:
        series = []
        for n in params.n_range:
            try:
                value = value_fn(grid, lam, n, trunc)
            except DegenerateWindow:
                continue
            profile.append({"lambda": lam, "n": n, "value": value})
            series.append(value)
        verdicts.append(trend_verdict(series))
    return ConditionReport(cid, profile, combine_verdicts(verdicts), trunc)


def cond33_profile(grid: CoefficientGrid, params: ConditionParams) -> ConditionReport:
    return _window_report("C33", grid, params, cond33_value, grid.bound_j)


def cond34_profile(grid: CoefficientGrid, params: ConditionParams) -> ConditionReport:
    return _window_report("C34", grid, params, cond34_value, grid.bound_k)


def decay_diagnostic(grid: CoefficientGrid) -> ConditionReport:
    """``w(j) w(k) |c_jk|`` along the diagonal ``|j| = |k| = t`` and as a
    maximum over shells ``max(|j|, |k|) = t``; the verdict follows the shells."""
    j = np.abs(grid.j_range())[:, None]
    k = np.abs(grid.k_range())[None, :]
    weighted = log_weight(j) * log_weight(k) * np.abs(grid.values)
    shell = np.maximum(j, k)
    top = max(grid.bound_j, grid.bound_k)
    shell_max = np.zeros(top + 1)
    np.maximum.at(shell_max, shell.ravel(), weighted.ravel())
    profile = []
    for t in range(min(grid.bound_j, grid.bound_k) + 1):
        diag = weighted[np.ix_([grid.bound_j - t, grid.bound_j + t], [grid.bound_k - t, grid.bound_k + t])]
        profile.append({"path": "diagonal", "t": t, "value": float(diag.max())})
    for t in range(top + 1):
        profile.append({"path": "shell", "t": t, "value": float(shell_max[t])})
    return ConditionReport("DECAY", profile, trend_verdict(shell_max))


def full_report(grid: CoefficientGrid, params: ConditionParams) -> list[ConditionReport]:
    return [
        cond31_profile(grid, params),
        cond32_profile(grid, params),
        cond33_profile(grid, params),
        cond34_profile(grid, params),
        decay_diagnostic(grid),
    ]
