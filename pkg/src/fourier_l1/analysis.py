"""L1 quadrature on the torus and the convergence experiment harness."""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .families import (FamilySpec, Unavailable, build, build_default, closed_form, closed_form_at,
                       reference_truncation)
from .kernels import VPParams
from .summability import (SampleGrid, cesaro_weights, coefficients_from_samples, partial_sum, rect_weights,
                          sample_points, synthesize_at, vp_mean, vp_weights)

log = logging.getLogger(__name__)

CSV_HEADER = ["m", "n", "lambda", "norm_S_f", "norm_sigma_f", "norm_V_f", "norm_V_S", "quad_n", "refine_delta"]
THREADS_ENV = "FOURIER_L1_THREADS"


class NoConvergence(RuntimeError):
    def __init__(self, value: float, resolution: int, delta: float, tol: float):
        self.value, self.resolution, self.delta, self.tol = value, resolution, delta, tol
        super().__init__(f"refinement stopped at N={resolution} with delta {delta:.3e} >= tol {tol:.3e}")


def l1_norm(samples: SampleGrid) -> float:
    """Rectangle rule ``(2 pi / nx)(2 pi / ny) sum |v|`` on the half-open grid."""
    v = samples.values if isinstance(samples, SampleGrid) else np.asarray(samples)
    nx, ny = v.shape
    return float(np.abs(v).sum() * (2 * np.pi / nx) * (2 * np.pi / ny))


def l1_distance(a: SampleGrid, b: SampleGrid) -> float:
    if a.values.shape != b.values.shape:
        raise ValueError(f"shape mismatch: {a.values.shape} vs {b.values.shape}")
    return l1_norm(SampleGrid(a.values - b.values))


def _row_integrals(g: np.ndarray, h: float) -> np.ndarray:
    """Integral of ``|g|`` along axis 1 for real periodic rows sampled with spacing ``h``.

    Cells where ``g`` changes sign are integrated exactly against the cubic
    through the four surrounding samples, and the trapezoid runs between
    sign changes receive their leading end correction
    ``-h^2/12 (f'(end) - f'(start))``, so each row is fourth-order accurate.
    """
    base = h * np.abs(g).sum(axis=1)
    n = g.shape[1]
    positive = g > 0
    cross = np.empty(g.shape, dtype=bool)
    np.not_equal(positive[:, :-1], positive[:, 1:], out=cross[:, :-1])
    np.not_equal(positive[:, -1], positive[:, 0], out=cross[:, -1])
    rows, cols = np.nonzero(cross)
    if rows.size == 0:
        return base
    gm1 = g[rows, (cols - 1) % n]
    g0 = g[rows, cols]
    g1 = g[rows, (cols + 1) % n]
    g2 = g[rows, (cols + 2) % n]
    # cubic p(t) through t = -1, 0, 1, 2 (t in units of h from the cell start)
    a = g0
    b = -gm1 / 3 - g0 / 2 + g1 - g2 / 6
    c = gm1 / 2 - g0 + g1 / 2
    d = (g2 - gm1) / 6 + (g0 - g1) / 2
    t = g0 / (g0 - g1)
    for _ in range(30):
        p = a + t * (b + t * (c + t * d))
        dp = b + t * (2 * c + 3 * t * d)
        t = np.clip(t - p / np.where(dp == 0, 1.0, dp), 0.0, 1.0)

    def antideriv(u):
        return u * (a + u * (b / 2 + u * (c / 3 + u * d / 4)))

    exact = h * (np.abs(antideriv(t)) + np.abs(antideriv(1.0) - antideriv(t)))
    trapezoid = h * (np.abs(g0) + np.abs(g1)) / 2
    slope_sum = (g1 - gm1 + g2 - g0) / (2 * h)
    # orientation of the crossing; np.sign would drop a sample that is exactly zero
    end_terms = -h * h / 12 * np.where(g0 > 0, 1.0, -1.0) * slope_sum
    out = base.copy()
    np.add.at(out, rows, exact - trapezoid + end_terms)
    return out


def l1_norm_corrected(samples: SampleGrid, real: bool | None = None) -> float:
    """L1 norm with sign-change corrections along rows (real integrands only).

    ``real=None`` decides from the samples; complex integrands fall back to
    :func:`l1_norm`.
    """
    v = samples.values if isinstance(samples, SampleGrid) else np.asarray(samples)
    if real is None:
        real = bool(np.all(np.abs(v.imag) <= 1e-13 * max(np.abs(v).max(), 1e-300)))
    if not real:
        return l1_norm(v)
    nx, ny = v.shape
    return float(_row_integrals(v.real, 2 * np.pi / ny).sum() * 2 * np.pi / nx)


def is_conjugate_symmetric(grid, rtol: float = 1e-14) -> bool:
    """``c[-j, -k] == conj(c[j, k])``, so every mean of ``grid`` is real-valued."""
    v = grid.values
    return bool(np.abs(v - v[::-1, ::-1].conj()).max() <= rtol * max(np.abs(v).max(), 1e-300))


def refine(compute: Callable[[int], float], start: int, tol: float, max_n: int) -> tuple[float, int, float]:
    """Double the resolution until successive values differ by less than ``tol``.

    Returns ``(value, N, delta)`` where ``value`` is computed at ``N`` and
    ``delta = |value(N) - value(N / 2)|``.  Raises :class:`NoConvergence`
    when ``max_n`` is reached first; when ``start >= max_n`` no doubling is
    attempted and ``delta`` is infinite.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = start
    value = compute(n)
    delta = float("inf")
    while 2 * n <= max_n:
        finer = compute(2 * n)
        # vector-valued computations refine on their worst entry
        delta = float(np.max(np.abs(np.subtract(finer, value))))
        n, value = 2 * n, finer
        if delta < tol:
            return value, n, delta
    raise NoConvergence(value, n, delta, tol)


def worker_count(requested: int | None = None) -> int:
    if requested is None:
        requested = int(os.environ.get(THREADS_ENV, "0") or 0)
    if requested <= 0:
        requested = os.cpu_count() or 1
    return max(1, requested)


@dataclass
class ExperimentRecord:
    m: int
    n: int
    lam: float
    norm_s_f: float
    norm_sigma_f: float
    norm_v_f: float
    norm_v_s: float
    quad_n: int
    refinement_delta: float

    def row(self) -> list:
        return [self.m, self.n, self.lam, self.norm_s_f, self.norm_sigma_f, self.norm_v_f,
                self.norm_v_s, self.quad_n, self.refinement_delta]


class Reference:
    """The target function ``f`` of a family: closed form when it exists,
    otherwise a certified truncated series."""

    def __init__(self, spec: FamilySpec, tol: float):
        self.spec = spec
        try:
            closed_form(spec, 1, 1)
            self.grid = None
        except Unavailable:
            bj, bk = reference_truncation(spec, tol / 10)
            self.grid = build(spec, bj, bk)

    def sample(self, nx: int, ny: int) -> SampleGrid:
        if self.grid is None:
            return closed_form(self.spec, nx, ny)
        g = self.grid
        return partial_sum(g, g.bound_j, g.bound_k, nx, ny)

    def rows(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.grid is None:
            return closed_form_at(self.spec, x, y)
        return synthesize_at(self.grid.values, x, y)

    def real_rows(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.grid is None:
            return closed_form_at(self.spec, x, y, real=True)
        return synthesize_at(self.grid.values, x, y).real

    def max_frequency(self) -> int:
        return 0 if self.grid is None else max(self.grid.bound_j, self.grid.bound_k)

    def is_real(self) -> bool:
        if self.grid is not None:
            return is_conjugate_symmetric(self.grid)
        pts = sample_points(7) + 0.1
        v = closed_form_at(self.spec, pts, pts)
        return bool(np.abs(v.imag).max() <= 1e-13 * max(np.abs(v).max(), 1e-300))


def experiment_grid(spec: FamilySpec, reach_j: int, reach_k: int, tol: float):
    """Coefficient grid wide enough for every mode the means touch."""
    try:
        tj, tk = reference_truncation(spec, tol / 10)
    except Unavailable:
        tj, tk = 1, 1
    return build_default(spec, max(reach_j, tj, 1), max(reach_k, tk, 1))


def start_resolution(max_frequency: int) -> int:
    return max(64, 2 * max_frequency + 3)


class _ModeSum:
    """Trigonometric polynomial ``sum W[j, k] e^{i(jx + ky)}`` trimmed to its nonzero block."""

    def __init__(self, coefficients: np.ndarray, wj: np.ndarray, wk: np.ndarray):
        keep_j, keep_k = np.nonzero(wj)[0], np.nonzero(wk)[0]
        bj = (len(wj) - 1) // 2
        bk = (len(wk) - 1) // 2
        rj = int(np.abs(keep_j - bj).max()) if keep_j.size else 0
        rk = int(np.abs(keep_k - bk).max()) if keep_k.size else 0
        self.weights = (coefficients * np.outer(wj, wk))[bj - rj:bj + rj + 1, bk - rk:bk + rk + 1]
        self.j = np.arange(-rj, rj + 1)
        self.k = np.arange(-rk, rk + 1)
        self._cache: tuple | None = None

    def rows(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.exp(1j * np.outer(x, self.j)) @ self._partial(y)

    def real_rows(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Real part of :meth:`rows` with half the arithmetic."""
        phase = np.outer(x, self.j)
        self._partial(y)
        re, im = self._cache[2]
        return np.cos(phase) @ re - np.sin(phase) @ im

    def _partial(self, y: np.ndarray) -> np.ndarray:
        if self._cache is None or self._cache[0] != len(y):
            partial = self.weights @ np.exp(1j * np.outer(self.k, y))
            parts = (np.ascontiguousarray(partial.real), np.ascontiguousarray(partial.imag))
            self._cache = (len(y), partial, parts)
        return self._cache[1]


class _RowAccumulator:
    """Collects row integrals ``I(x_i) = int |g(x_i, y)| dy`` and then integrates over ``x``.

    Where ``g`` factors locally as ``u(x) v(y)``, a zero of ``u`` flips the
    sign of a whole row and leaves a kink in ``I``.  Consecutive rows that are
    exactly anti-proportional mark such flips; carrying the sign gives a
    smooth signed profile whose absolute integral gets the same sign-change
    correction as the rows.
    """

    def __init__(self, h: float):
        self.h = h
        self.integrals: list[np.ndarray] = []
        self.flips: list[np.ndarray] = []
        self.first: np.ndarray | None = None
        self.last: np.ndarray | None = None

    def add(self, g: np.ndarray):
        self.integrals.append(_row_integrals(g, self.h))
        if self.first is None:
            self.first = g[0].copy()
        else:
            self.flips.append(_anti_proportional(self.last, g[0]))
        norms = np.einsum("ij,ij->i", g, g)
        self.flips.append(_anti_proportional(g[:-1], g[1:], norms[:-1], norms[1:]))
        self.last = g[-1].copy()

    def total(self) -> float:
        rows = np.concatenate(self.integrals)
        flips = np.concatenate(self.flips + [_anti_proportional(self.last, self.first)])
        if not flips.any() or flips.sum() % 2:
            return float(rows.sum() * self.h)
        signs = np.concatenate([[1.0], np.where(np.cumsum(flips[:-1]) % 2, -1.0, 1.0)])
        return float(_row_integrals((signs * rows)[None, :], self.h)[0])


def _anti_proportional(a: np.ndarray, b: np.ndarray, norms_a=None, norms_b=None) -> np.ndarray:
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    dot = np.einsum("ij,ij->i", a, b)
    if norms_a is None:
        norms_a = np.einsum("ij,ij->i", a, a)
    if norms_b is None:
        norms_b = np.einsum("ij,ij->i", b, b)
    scale = np.sqrt(norms_a * norms_b)
    return (scale > 0) & (dot <= -(1 - 1e-9) * scale)


def streamed_l1(sources: dict[str, Callable], pairs: Sequence[tuple[str, str | None]], q: int,
                real: bool, chunk_elements: int = 1 << 22) -> list[float]:
    """L1 distances ``||a - b||`` on the ``q`` by ``q`` grid, evaluated a block of rows at a time.

    ``sources`` maps names to ``rows(x, y)`` evaluators; a ``None`` partner
    means the norm of ``a`` itself.  Real integrands use the sign-change
    corrected rule, complex ones the rectangle rule.
    """
    x = sample_points(q)
    y = sample_points(q)
    h = 2 * np.pi / q
    accumulators = [_RowAccumulator(h) for _ in pairs]
    totals = [0.0] * len(pairs)
    step = max(1, chunk_elements // q)
    for start in range(0, q, step):
        xs = x[start:start + step]
        cache = {}

        def get(name):
            if name not in cache:
                cache[name] = sources[name](xs, y)
            return cache[name]

        for i, (a, b) in enumerate(pairs):
            g = get(a) if b is None else get(a) - get(b)
            if real:
                accumulators[i].add(np.real(g))
            else:
                totals[i] += float(np.abs(g).sum() * h * h)
    if real:
        return [acc.total() for acc in accumulators]
    return totals


def _record(spec, reference: Reference, m: int, n: int, lam: float, tol: float, max_n: int) -> ExperimentRecord:
    params = VPParams(lam, m, n)
    grid = experiment_grid(spec, params.lambda_m, params.lambda_n, tol)
    bj, bk = grid.bound_j, grid.bound_k
    means = {
        "S": _ModeSum(grid.values, rect_weights(bj, m), rect_weights(bk, n)),
        "sigma": _ModeSum(grid.values, cesaro_weights(bj, m), cesaro_weights(bk, n)),
        "V": _ModeSum(grid.values, vp_weights(bj, m, params.lambda_m), vp_weights(bk, n, params.lambda_n)),
    }
    real = reference.is_real() and is_conjugate_symmetric(grid)
    if real:
        sources = {name: mean.real_rows for name, mean in means.items()}
        sources["f"] = reference.real_rows
    else:
        sources = {name: mean.rows for name, mean in means.items()}
        sources["f"] = reference.rows

    def norm_sf(q):
        return streamed_l1(sources, [("S", "f")], q, real)[0]

    top = max(params.lambda_m, params.lambda_n, reference.max_frequency())
    s_f, q, delta = refine(norm_sf, start_resolution(top), tol, max_n)
    sigma_f, v_f, v_s = streamed_l1(sources, [("sigma", "f"), ("V", "f"), ("V", "S")], q, real)
    rec = ExperimentRecord(m, n, lam, s_f, sigma_f, v_f, v_s, q, delta)
    # triangle inequality; the corrected rule is not a discrete norm, so allow its error scale
    slack = 1e-12 * (1 + rec.norm_v_f) + 10 * tol
    if rec.norm_v_f > rec.norm_v_s + rec.norm_s_f + slack:
        raise AssertionError(f"triangle inequality violated at (m, n) = ({m}, {n})")
    return rec


def convergence_run(spec: FamilySpec, mn_list: Sequence[tuple[int, int]], lam: float, tol: float = 1e-7,
                    max_n: int = 32768, workers: int | None = None) -> list[ExperimentRecord]:
    """``||S_mn - f||``, ``||sigma_mn - f||``, ``||V_mn - f||`` and ``||V_mn - S_mn||``
    per ``(m, n)``; the quadrature grid is refined on ``||S_mn - f||``."""
    for m, n in mn_list:
        VPParams(lam, m, n)  # reject degenerate windows before any work
    reference = Reference(spec, tol)
    ordered = sorted(mn_list, key=lambda mn: (min(mn), mn))
    with ThreadPoolExecutor(max_workers=worker_count(workers)) as pool:
        records = list(pool.map(lambda mn: _record(spec, reference, mn[0], mn[1], lam, tol, max_n), ordered))
    for rec in records:
        log.info("m=%d n=%d |S-f|=%.3e |sigma-f|=%.3e N=%d", rec.m, rec.n, rec.norm_s_f, rec.norm_sigma_f, rec.quad_n)
    return records


def decomposition_norm_run(spec: FamilySpec, mn_list: Sequence[tuple[int, int]], lam: float,
                           tol: float = 1e-7, max_n: int = 32768) -> list[dict]:
    """L1 norms of ``R0 .. R5`` per ``(m, n)``, refined jointly to ``tol``, plus ``||V - S||``.

    Components are trigonometric polynomials, so their coefficients are read
    off exactly from one FFT and then integrated like the means in
    :func:`convergence_run`.
    """
    from .identities import COMPONENTS, decompose_v_minus_s, default_resolution

    for m, n in mn_list:
        VPParams(lam, m, n)
    rows = []
    for m, n in sorted(mn_list, key=lambda mn: (min(mn), mn)):
        params = VPParams(lam, m, n)
        grid = experiment_grid(spec, params.lambda_m + 1, params.lambda_n + 1, tol)
        nx, ny = default_resolution(params)
        result = decompose_v_minus_s(grid, params, nx, ny)
        names = list(COMPONENTS) + ["V-S"]
        real = is_conjugate_symmetric(grid)
        polys = dict(result.components)
        polys["V-S"] = vp_mean(grid, params, nx, ny) - partial_sum(grid, m, n, nx, ny)
        sources = {}
        for name in names:
            coeffs = coefficients_from_samples(polys[name].values, params.lambda_m, params.lambda_n)
            poly = _ModeSum(coeffs, np.ones(coeffs.shape[0]), np.ones(coeffs.shape[1]))
            sources[name] = poly.real_rows if real else poly.rows

        def norms(q):
            return streamed_l1(sources, [(name, None) for name in COMPONENTS], q, real)

        values, q, delta = refine(norms, start_resolution(max(params.lambda_m, params.lambda_n)), tol, max_n)
        by_name = dict(zip(COMPONENTS, values))
        # reported at the final resolution only; convergence_run refines this norm itself
        by_name["V-S"] = streamed_l1(sources, [("V-S", None)], q, real)[0]
        total = sum(by_name[name] for name in COMPONENTS)
        if by_name["V-S"] > total + 10 * tol:
            raise AssertionError(f"||V - S|| exceeds the sum of component norms at ({m}, {n})")
        row = {"m": m, "n": n, "lambda": lam, "quad_n": q, "refine_delta": delta}
        row.update({name: by_name[name] for name in COMPONENTS})
        row["norm_V_S"] = by_name["V-S"]
        row["relative_residual"] = result.residual.relative_residual
        rows.append(row)
    return rows


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([format_number(v) for v in rec.row()])
    return buf.getvalue()


def format_number(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17e}"


def record_dicts(records: Sequence[ExperimentRecord]) -> list[dict]:
    return [dict(zip(CSV_HEADER, rec.row())) for rec in records]


__all__ = [
    "CSV_HEADER", "ExperimentRecord", "NoConvergence", "Reference", "convergence_run",
    "decomposition_norm_run", "is_conjugate_symmetric", "l1_distance", "l1_norm", "l1_norm_corrected",
    "records_to_csv", "refine", "streamed_l1", "worker_count",
]
