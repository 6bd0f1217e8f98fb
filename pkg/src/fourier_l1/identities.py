"""Pointwise checks of the summation-by-parts representations of V - S.

Each ``*_residual`` check evaluates a left-hand side directly from its
definition as a mode sum, evaluates the matching right-hand side term by term
(differences of coefficients against one-sided kernels), and reports the
largest pointwise gap over a uniform sample grid.

Right-hand sides are sums over branch coordinates ``(r, a)`` x ``(s, b)``
(see :mod:`fourier_l1.grid`), paired with the branch kernels of
:func:`fourier_l1.kernels.kernel_table`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import CoefficientGrid, branch_array, branch_diff
from .kernels import VPParams, kernel_table
from .summability import SampleGrid, cesaro_mean, partial_sum, sample_points, synthesize, vp_mean


class GridTooSmall(ValueError):
    pass


@dataclass
class IdentityResidual:
    lemma: str
    max_abs_residual: float
    at_point: tuple[float, float]
    lhs_scale: float
    m: int = 0
    n: int = 0
    lam: float = 0.0
    nx: int = 0
    ny: int = 0

    @property
    def relative_residual(self) -> float:
        return self.max_abs_residual / max(self.lhs_scale, 1e-300)

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "m": self.m,
            "n": self.n,
            "lambda": self.lam,
            "nx": self.nx,
            "ny": self.ny,
            "maxAbsResidual": self.max_abs_residual,
            "lhsScale": self.lhs_scale,
            "relativeResidual": self.relative_residual,
        }


COMPONENTS = ("R0", "R1", "R2", "R3", "R4", "R5")
# V - S = R1 + R2 - R3 - R4 + R5 - R0
COMPONENT_SIGNS = {"R0": -1, "R1": 1, "R2": 1, "R3": -1, "R4": -1, "R5": 1}


@dataclass
class DecompositionResult:
    components: dict[str, SampleGrid]
    reconstructed: SampleGrid
    residual: IdentityResidual
    component_norms: dict[str, float] = field(default_factory=dict)
    norm_v_minus_s: float = 0.0


def default_resolution(params: VPParams) -> tuple[int, int]:
    return 2 * params.lambda_m + 3, 2 * params.lambda_n + 3


def _check(grid: CoefficientGrid, params: VPParams, nx, ny):
    if grid.bound_j < params.lambda_m or grid.bound_k < params.lambda_n:
        raise GridTooSmall(
            f"grid bounds ({grid.bound_j}, {grid.bound_k}) do not cover the window "
            f"({params.lambda_m}, {params.lambda_n})")
    dx, dy = default_resolution(params)
    return (dx if nx is None else nx), (dy if ny is None else ny)


def _residual(name, lhs, rhs, params, nx, ny) -> IdentityResidual:
    gap = np.abs(lhs - rhs)
    ia, ib = np.unravel_index(np.argmax(gap), gap.shape)
    return IdentityResidual(
        lemma=name,
        max_abs_residual=float(gap[ia, ib]),
        at_point=(float(sample_points(nx)[ia]), float(sample_points(ny)[ib])),
        lhs_scale=float(np.abs(lhs).max()),
        m=params.m, n=params.n, lam=params.lam, nx=nx, ny=ny,
    )


# -- left-hand sides: boundary sums straight from the mode weights ---------

def _ramp(bound: int, m: int, lambda_m: int) -> np.ndarray:
    """``(lambda_m + 1 - |j|) / (lambda_m - m)`` on ``m < |j| <= lambda_m``, else 0."""
    j = np.abs(np.arange(-bound, bound + 1))
    inside = (j > m) & (j <= lambda_m)
    return np.where(inside, (lambda_m + 1 - j) / (lambda_m - m), 0.0)


def _box(bound: int, m: int) -> np.ndarray:
    return (np.abs(np.arange(-bound, bound + 1)) <= m).astype(float)


def boundary_sums(grid: CoefficientGrid, params: VPParams, nx: int, ny: int) -> dict[str, np.ndarray]:
    """The three weighted sums making up ``V - S``.

    ``"k"``: ``|j| <= m`` against the ramp in ``k``; ``"j"``: the mirror;
    ``"jk"``: both ramps.
    """
    rj = _ramp(grid.bound_j, params.m, params.lambda_m)
    rk = _ramp(grid.bound_k, params.n, params.lambda_n)
    bj = _box(grid.bound_j, params.m)
    bk = _box(grid.bound_k, params.n)
    c = grid.values
    return {
        "k": synthesize(c * np.outer(bj, rk), nx, ny).values,
        "j": synthesize(c * np.outer(rj, bk), nx, ny).values,
        "jk": synthesize(c * np.outer(rj, rk), nx, ny).values,
    }


# -- right-hand sides: differences against branch kernels ------------------

class _BranchSums:
    """Evaluates ``sum_{r,a,s,b} w(a) v(b) X[r,a,s,b] K_(r,a)(x) K_(s,b)(y)``
    for coefficient blocks ``X`` restricted to rectangular ``(a, b)`` ranges."""

    def __init__(self, grid: CoefficientGrid, params: VPParams, nx: int, ny: int):
        self.A = params.lambda_m
        self.B = params.lambda_n
        self.params = params
        self.raw = branch_array(grid, self.A + 2, self.B + 2)
        self.kx = kernel_table(self.A, sample_points(nx)).reshape(2 * (self.A + 1), nx)
        self.ky = kernel_table(self.B, sample_points(ny)).reshape(2 * (self.B + 1), ny)
        m, n = params.m, params.n
        a = np.arange(self.A + 1)
        b = np.arange(self.B + 1)
        # descending ramps on the difference side of the window
        self.ramp_a = (self.A - a) / (self.A - m)
        self.ramp_b = (self.B - b) / (self.B - n)

    def d(self, p: int, q: int) -> np.ndarray:
        return branch_diff(self.raw, p, q)[:, : self.A + 1, :, : self.B + 1]

    def term(self, arr, a_range, b_range, wa=None, wb=None) -> np.ndarray:
        a_lo, a_hi = a_range
        b_lo, b_hi = b_range
        block = np.zeros_like(arr)
        if a_lo <= a_hi and b_lo <= b_hi:
            sa, sb = slice(a_lo, a_hi + 1), slice(b_lo, b_hi + 1)
            sub = arr[:, sa, :, sb]
            if wa is not None:
                sub = sub * wa[sa][None, :, None, None]
            if wb is not None:
                sub = sub * wb[sb][None, None, None, :]
            block[:, sa, :, sb] = sub
        flat = block.reshape(2 * (self.A + 1), 2 * (self.B + 1))
        return self.kx.T @ flat @ self.ky


def _edge_terms(bs: _BranchSums) -> list[np.ndarray]:
    m, n, B = bs.params.m, bs.params.n, bs.B
    inv = 1.0 / (B - n)
    c, d10, d01, d11 = bs.d(0, 0), bs.d(1, 0), bs.d(0, 1), bs.d(1, 1)
    return [
        bs.term(d11, (0, m - 1), (n, B - 1), wb=bs.ramp_b),
        inv * bs.term(d10, (0, m - 1), (n + 1, B)),
        -bs.term(d10, (0, m - 1), (n, n)),
        bs.term(d01, (m, m), (n, B - 1), wb=bs.ramp_b),
        inv * bs.term(c, (m, m), (n + 1, B)),
        -bs.term(c, (m, m), (n, n)),
    ]


def _corner_terms(bs: _BranchSums) -> list[np.ndarray]:
    m, n, A, B = bs.params.m, bs.params.n, bs.A, bs.B
    ia, ib = 1.0 / (A - m), 1.0 / (B - n)
    c, d10, d01, d11 = bs.d(0, 0), bs.d(1, 0), bs.d(0, 1), bs.d(1, 1)
    ra, rb = bs.ramp_a, bs.ramp_b
    return [
        bs.term(d11, (m, A - 1), (n, B - 1), wa=ra, wb=rb),
        ib * bs.term(d10, (m, A - 1), (n + 1, B), wa=ra),
        ia * bs.term(d01, (m + 1, A), (n, B - 1), wb=rb),
        -bs.term(d10, (m, A - 1), (n, n), wa=ra),
        -bs.term(d01, (m, m), (n, B - 1), wb=rb),
        -ia * bs.term(c, (m + 1, A), (n, n)),
        -ib * bs.term(c, (m, m), (n + 1, B)),
        ia * ib * bs.term(c, (m + 1, A), (n + 1, B)),
        # the corner term enters with a plus sign
        bs.term(c, (m, m), (n, n)),
    ]


def partial_minus_cesaro_residual(grid: CoefficientGrid, params: VPParams, nx: int | None = None,
                     ny: int | None = None) -> IdentityResidual:
    """``S - sigma`` against four Cesaro combinations and three boundary sums."""
    nx, ny = _check(grid, params, nx, ny)
    m, n, lm, ln = params.m, params.n, params.lambda_m, params.lambda_n

    def sig(a, b):
        return cesaro_mean(grid, a, b, nx, ny).values

    s_mn = partial_sum(grid, m, n, nx, ny).values
    lhs = s_mn - sig(m, n)
    fm = (lm + 1) / (lm - m)
    fn = (ln + 1) / (ln - n)
    s_mn_sig = sig(m, n)
    s_ln, s_mln, s_lmln = sig(lm, n), sig(m, ln), sig(lm, ln)
    t = boundary_sums(grid, params, nx, ny)
    rhs = (fm * fn * (s_lmln - s_ln - s_mln + s_mn_sig)
           + fm * (s_ln - s_mn_sig) + fn * (s_mln - s_mn_sig)
           - t["k"] - t["j"] - t["jk"])
    return _residual("S-sigma", lhs, rhs, params, nx, ny)


def vp_minus_partial_residual(grid: CoefficientGrid, params: VPParams, nx: int | None = None,
                     ny: int | None = None, third_sign: int = 1) -> IdentityResidual:
    """``V - S`` against the three boundary sums.

    ``third_sign`` multiplies the ``m < |j| <= lambda_m, |k| <= n`` sum; the
    identity holds with ``+1`` and the option exists to show that ``-1`` fails.
    """
    nx, ny = _check(grid, params, nx, ny)
    lhs = vp_mean(grid, params, nx, ny).values - partial_sum(grid, params.m, params.n, nx, ny).values
    t = boundary_sums(grid, params, nx, ny)
    rhs = t["jk"] + t["k"] + third_sign * t["j"]
    return _residual("V-S", lhs, rhs, params, nx, ny)


def edge_sum_terms(grid: CoefficientGrid, params: VPParams, nx: int, ny: int) -> list[np.ndarray]:
    return _edge_terms(_BranchSums(grid, params, nx, ny))


def corner_sum_terms(grid: CoefficientGrid, params: VPParams, nx: int, ny: int) -> list[np.ndarray]:
    return _corner_terms(_BranchSums(grid, params, nx, ny))


def edge_sum_residual(grid: CoefficientGrid, params: VPParams, nx: int | None = None,
                     ny: int | None = None) -> IdentityResidual:
    """Sum over ``|j| <= m``, ``n < |k| <= lambda_n`` with the ``k`` ramp,
    against its six-term summation-by-parts form."""
    nx, ny = _check(grid, params, nx, ny)
    lhs = boundary_sums(grid, params, nx, ny)["k"]
    rhs = sum(edge_sum_terms(grid, params, nx, ny))
    return _residual("edge", lhs, rhs, params, nx, ny)


def corner_sum_residual(grid: CoefficientGrid, params: VPParams, nx: int | None = None,
                     ny: int | None = None) -> IdentityResidual:
    """Doubly ramped corner sum against its nine-term form."""
    nx, ny = _check(grid, params, nx, ny)
    lhs = boundary_sums(grid, params, nx, ny)["jk"]
    rhs = sum(corner_sum_terms(grid, params, nx, ny))
    return _residual("corner", lhs, rhs, params, nx, ny)


def decomposition_components(grid: CoefficientGrid, params: VPParams, nx: int,
                             ny: int) -> dict[str, np.ndarray]:
    bs = _BranchSums(grid, params, nx, ny)
    m, n, A, B = params.m, params.n, bs.A, bs.B
    ia, ib = 1.0 / (A - m), 1.0 / (B - n)
    c, d10, d01, d11 = bs.d(0, 0), bs.d(1, 0), bs.d(0, 1), bs.d(1, 1)
    ra, rb = bs.ramp_a, bs.ramp_b
    return {
        "R1": (bs.term(d11, (m, A - 1), (n, B - 1), wa=ra, wb=rb)
               + bs.term(d11, (0, m - 1), (n, B - 1), wb=rb)
               + bs.term(d11, (m, A - 1), (0, n - 1), wa=ra)),
        "R2": (ib * bs.term(d10, (0, m - 1), (n + 1, B))
               + ib * bs.term(d10, (m, A - 1), (n + 1, B), wa=ra)
               + ia * bs.term(d01, (m + 1, A), (0, n - 1))
               + ia * bs.term(d01, (m + 1, A), (n, B - 1), wb=rb)),
        "R3": bs.term(d10, (0, m - 1), (n, n)),
        "R4": bs.term(d01, (m, m), (0, n - 1)),
        "R5": ia * ib * bs.term(c, (m + 1, A), (n + 1, B)),
        "R0": bs.term(c, (m, m), (n, n)),
    }


def decompose_v_minus_s(grid: CoefficientGrid, params: VPParams, nx: int | None = None,
                        ny: int | None = None) -> DecompositionResult:
    """Split ``V - S`` into ``R1 + R2 - R3 - R4 + R5 - R0`` and check the sum."""
    from .analysis import l1_norm

    nx, ny = _check(grid, params, nx, ny)
    lhs = vp_mean(grid, params, nx, ny).values - partial_sum(grid, params.m, params.n, nx, ny).values
    parts = decomposition_components(grid, params, nx, ny)
    rebuilt = sum(COMPONENT_SIGNS[name] * parts[name] for name in COMPONENTS)
    components = {name: SampleGrid(parts[name]) for name in COMPONENTS}
    return DecompositionResult(
        components=components,
        reconstructed=SampleGrid(rebuilt),
        residual=_residual("decomposition", lhs, rebuilt, params, nx, ny),
        component_norms={name: l1_norm(g) for name, g in components.items()},
        norm_v_minus_s=l1_norm(SampleGrid(lhs)),
    )


def all_identity_residuals(grid: CoefficientGrid, params: VPParams, nx: int | None = None,
                        ny: int | None = None) -> list[IdentityResidual]:
    return [
        partial_minus_cesaro_residual(grid, params, nx, ny),
        vp_minus_partial_residual(grid, params, nx, ny),
        edge_sum_residual(grid, params, nx, ny),
        corner_sum_residual(grid, params, nx, ny),
    ]
