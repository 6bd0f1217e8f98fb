"""Truncated double Fourier coefficient arrays and directional differences.

Coefficients ``c[j, k]`` are stored densely for ``|j| <= bound_j`` and
``|k| <= bound_k`` and read as zero everywhere else.  Differences step away
from zero in each variable, so on the negative side the first difference in
``j`` is ``c[j, k] - c[j - 1, k]``.

Many sums run over "branch" coordinates: a sign ``r`` in ``{+1, -1}`` and a
magnitude ``a >= 0``, with ``(+, 0)`` and ``(-, 0)`` kept as distinct
positions that both read ``c[0, k]``.  :func:`branch_array` lays a grid out in
those coordinates; differences along a branch are then plain forward
differences in ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

PLUS = 1
MINUS = -1
# branch axis position -> sign
BRANCH_SIGNS = (PLUS, MINUS)


@dataclass(frozen=True)
class SignedIndex:
    """Index with an explicit sign; ``SignedIndex(MINUS, 0)`` is "0-"."""

    sign: int
    magnitude: int

    def __post_init__(self):
        if self.sign not in (PLUS, MINUS):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.magnitude < 0:
            raise ValueError(f"magnitude must be non-negative, got {self.magnitude}")

    @classmethod
    def of(cls, value: int) -> "SignedIndex":
        """Signed index for a plain integer; zero maps to "0+"."""
        return cls(MINUS if value < 0 else PLUS, abs(value))

    @property
    def value(self) -> int:
        return self.sign * self.magnitude

    def step(self, count: int = 1) -> "SignedIndex":
        """Move ``count`` places away from zero along the same branch."""
        return SignedIndex(self.sign, self.magnitude + count)

    def __str__(self):
        if self.magnitude == 0:
            return "0+" if self.sign == PLUS else "0-"
        return str(self.value)


@dataclass(frozen=True)
class DiffOrder:
    p: int
    q: int

    def __post_init__(self):
        if self.p not in (0, 1, 2) or self.q not in (0, 1, 2):
            raise ValueError(f"difference orders must lie in {{0, 1, 2}}, got ({self.p}, {self.q})")


class GridParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CoefficientGrid:
    """Immutable dense coefficient array with zero extension.

    ``values[j + bound_j, k + bound_k]`` holds ``c[j, k]``.
    """

    __slots__ = ("bound_j", "bound_k", "values")

    def __init__(self, values, bound_j: int | None = None, bound_k: int | None = None):
        arr = np.array(values, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] % 2 == 0 or arr.shape[1] % 2 == 0:
            raise ValueError(f"coefficient array must be 2-D with odd extents, got shape {arr.shape}")
        bj, bk = (arr.shape[0] - 1) // 2, (arr.shape[1] - 1) // 2
        if bound_j is not None and bound_j != bj or bound_k is not None and bound_k != bk:
            raise ValueError("bounds do not match array shape")
        if bj < 1 or bk < 1:
            raise ValueError("bounds must be positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "bound_j", bj)
        object.__setattr__(self, "bound_k", bk)

    def __setattr__(self, name, value):
        raise AttributeError("CoefficientGrid is immutable")

    @classmethod
    def zeros(cls, bound_j: int, bound_k: int) -> "CoefficientGrid":
        return cls(np.zeros((2 * bound_j + 1, 2 * bound_k + 1), dtype=complex))

    @classmethod
    def from_function(cls, func, bound_j: int, bound_k: int) -> "CoefficientGrid":
        """Grid with ``c[j, k] = func(j, k)`` evaluated on integer meshes."""
        j, k = np.meshgrid(np.arange(-bound_j, bound_j + 1), np.arange(-bound_k, bound_k + 1), indexing="ij")
        return cls(np.broadcast_to(func(j, k), j.shape))

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[int, int, complex]], bound_j: int | None = None,
                     bound_k: int | None = None) -> "CoefficientGrid":
        entries = list(entries)
        bj = max([1] + [abs(j) for j, _, _ in entries])
        bk = max([1] + [abs(k) for _, k, _ in entries])
        bj = bj if bound_j is None else max(bj, bound_j)
        bk = bk if bound_k is None else max(bk, bound_k)
        arr = np.zeros((2 * bj + 1, 2 * bk + 1), dtype=complex)
        for j, k, v in entries:
            arr[j + bj, k + bk] += v
        return cls(arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def j_range(self) -> np.ndarray:
        return np.arange(-self.bound_j, self.bound_j + 1)

    def k_range(self) -> np.ndarray:
        return np.arange(-self.bound_k, self.bound_k + 1)

    def lookup(self, j, k) -> np.ndarray:
        """Vectorised ``get`` over broadcastable integer arrays."""
        j, k = np.broadcast_arrays(np.asarray(j, dtype=int), np.asarray(k, dtype=int))
        inside = (np.abs(j) <= self.bound_j) & (np.abs(k) <= self.bound_k)
        out = np.zeros(j.shape, dtype=complex)
        out[inside] = self.values[j[inside] + self.bound_j, k[inside] + self.bound_k]
        return out

    def resized(self, bound_j: int, bound_k: int) -> "CoefficientGrid":
        """Same coefficients on new bounds (truncating or zero padding)."""
        j = np.arange(-bound_j, bound_j + 1)[:, None]
        k = np.arange(-bound_k, bound_k + 1)[None, :]
        return CoefficientGrid(self.lookup(j, k))

    def scaled(self, alpha: complex) -> "CoefficientGrid":
        return CoefficientGrid(alpha * self.values)

    def __add__(self, other: "CoefficientGrid") -> "CoefficientGrid":
        bj, bk = max(self.bound_j, other.bound_j), max(self.bound_k, other.bound_k)
        return CoefficientGrid(self.resized(bj, bk).values + other.resized(bj, bk).values)

    def __eq__(self, other):
        if not isinstance(other, CoefficientGrid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self):
        return f"CoefficientGrid(bound_j={self.bound_j}, bound_k={self.bound_k})"


def get(grid: CoefficientGrid, j: int, k: int) -> complex:
    if abs(j) > grid.bound_j or abs(k) > grid.bound_k:
        return 0j
    return complex(grid.values[j + grid.bound_j, k + grid.bound_k])


def _as_signed(index) -> SignedIndex:
    return index if isinstance(index, SignedIndex) else SignedIndex.of(int(index))


def diff(grid: CoefficientGrid, order: DiffOrder, j, k) -> complex:
    """Directional difference of order ``(p, q)`` at ``(j, k)``.

    ``j`` and ``k`` are :class:`SignedIndex` values (plain ints are accepted,
    with 0 read as "0+").  Each first difference subtracts the neighbour one
    step further from zero along the index's branch.
    """
    j, k = _as_signed(j), _as_signed(k)
    # composition of first differences, done by recursion on the order
    if order.p > 0:
        lower = DiffOrder(order.p - 1, order.q)
        return diff(grid, lower, j, k) - diff(grid, lower, j.step(), k)
    if order.q > 0:
        lower = DiffOrder(order.p, order.q - 1)
        return diff(grid, lower, j, k) - diff(grid, lower, j, k.step())
    return get(grid, j.value, k.value)


def binomial_diff(grid: CoefficientGrid, order: DiffOrder, j, k) -> complex:
    """Closed binomial expansion of ``diff``; kept as an independent check."""
    j, k = _as_signed(j), _as_signed(k)
    total = 0j
    for s in range(order.p + 1):
        for t in range(order.q + 1):
            coeff = (-1) ** (s + t) * math.comb(order.p, s) * math.comb(order.q, t)
            total += coeff * get(grid, j.step(s).value, k.step(t).value)
    return total


def branch_array(grid: CoefficientGrid, max_a: int, max_b: int) -> np.ndarray:
    """Coefficients in branch coordinates.

    Returns ``D`` of shape ``(2, max_a + 1, 2, max_b + 1)`` with
    ``D[r, a, s, b] = c[sign_r * a, sign_s * b]`` where ``sign_0 = +1`` and
    ``sign_1 = -1``.
    """
    signs = np.array(BRANCH_SIGNS)
    j = signs[:, None] * np.arange(max_a + 1)[None, :]
    k = signs[:, None] * np.arange(max_b + 1)[None, :]
    return grid.lookup(j[:, :, None, None], k[None, None, :, :])


def branch_diff(arr: np.ndarray, p: int, q: int) -> np.ndarray:
    """Forward differences along the magnitude axes of a branch array.

    The result is shorter by ``p`` along axis 1 and by ``q`` along axis 3.
    """
    for _ in range(p):
        arr = arr[:, :-1] - arr[:, 1:]
    for _ in range(q):
        arr = arr[:, :, :, :-1] - arr[:, :, :, 1:]
    return arr


def load_grid(text: str) -> CoefficientGrid:
    """Parse ``j k re im`` lines (``#`` starts a comment)."""
    entries: dict[tuple[int, int], complex] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise GridParseError(f"expected 'j k re im', got {raw.strip()!r}", lineno)
        try:
            j, k = int(fields[0]), int(fields[1])
            re_, im_ = float(fields[2]), float(fields[3])
        except ValueError as exc:
            raise GridParseError(f"cannot parse {raw.strip()!r}: {exc}", lineno) from None
        if not (math.isfinite(re_) and math.isfinite(im_)):
            raise GridParseError("coefficient is not finite", lineno)
        if (j, k) in entries:
            raise GridParseError(f"duplicate index ({j}, {k})", lineno)
        entries[j, k] = complex(re_, im_)
    if not entries:
        raise GridParseError("no coefficients found")
    return CoefficientGrid.from_entries((j, k, v) for (j, k), v in entries.items())


def save_grid(grid: CoefficientGrid, include_zeros: bool = False) -> str:
    """Serialise to the text format, sorted by ``(j, k)``.

    The corner entry ``(bound_j, bound_k)`` is always written so that the
    bounds survive a round trip through :func:`load_grid`.
    """
    lines = [f"# bounds {grid.bound_j} {grid.bound_k}"]
    for j in grid.j_range():
        for k in grid.k_range():
            v = grid.values[j + grid.bound_j, k + grid.bound_k]
            corner = j == grid.bound_j and k == grid.bound_k
            if v != 0 or include_zeros or corner:
                lines.append(f"{j} {k} {float(v.real)!r} {float(v.imag)!r}")
    return "\n".join(lines) + "\n"
