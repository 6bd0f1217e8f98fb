"""Named coefficient families with certified reference functions.

Four kinds are supported:

``finite``
    explicit ``(j, k, value)`` entries; everything is exact.
``geometric``
    ``c[j, k] = rx**|j| * ry**|k|`` whose sum is a product of Poisson kernels.
``product``
    ``c[j, k] = a[j] * b[k]`` for two one-dimensional sequences, each either
    ``{"kind": "geometric", "r": r}`` or ``{"kind": "finite", "terms": [[k, re, im], ...]}``.
``randomSparse``
    reproducible random complex entries on a sampled subset of
    ``|j| <= boundJ, |k| <= boundK``, damped by ``(1+|j|)**-d (1+|k|)**-d``.

Random grids use numpy's PCG64 bit generator seeded with the family's seed.
Draw order is fixed: one uniform array for the support mask, then the real
parts, then the imaginary parts, each of shape ``(2 boundJ + 1, 2 boundK + 1)``
in row-major ``(j, k)`` order with ``j`` and ``k`` ascending from the negative
bound.  Values are uniform on ``[-1, 1)`` per component.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import zeta

from .grid import CoefficientGrid
from .summability import SampleGrid, sample_points

KINDS = ("finite", "geometric", "product", "randomSparse")


class Unavailable(Exception):
    """No closed form or certified tail bound exists for this family."""


@dataclass
class FamilySpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {KINDS}")
        p = self.params
        if self.kind == "geometric":
            for key in ("rx", "ry"):
                if not 0 <= float(p[key]) < 1:
                    raise ValueError(f"geometric radius {key}={p[key]} must lie in [0, 1)")
        elif self.kind == "finite":
            p["terms"] = [(int(j), int(k), complex(v)) for j, k, v in p.get("terms", [])]
        elif self.kind == "product":
            _check_sequence(p["x"])
            _check_sequence(p["y"])
        elif self.kind == "randomSparse":
            if not 0 < float(p["density"]) <= 1:
                raise ValueError(f"density must lie in (0, 1], got {p['density']}")
            if float(p.get("decayExponent", 0.0)) < 0:
                raise ValueError("decayExponent must be non-negative")
            if int(p["boundJ"]) < 1 or int(p["boundK"]) < 1:
                raise ValueError("random support bounds must be positive")

    # constructors

    @classmethod
    def geometric(cls, rx: float, ry: float | None = None) -> "FamilySpec":
        return cls("geometric", {"rx": float(rx), "ry": float(rx if ry is None else ry)})

    @classmethod
    def finite(cls, terms) -> "FamilySpec":
        return cls("finite", {"terms": list(terms)})

    @classmethod
    def product(cls, x: dict, y: dict) -> "FamilySpec":
        return cls("product", {"x": x, "y": y})

    @classmethod
    def random_sparse(cls, seed: int, bound_j: int, bound_k: int, density: float = 1.0,
                      decay: float = 0.0) -> "FamilySpec":
        return cls("randomSparse", {"seed": int(seed), "boundJ": int(bound_j), "boundK": int(bound_k),
                                    "density": float(density), "decayExponent": float(decay)})

    # serialisation

    def to_json(self) -> dict:
        if self.kind == "finite":
            terms = [[j, k, v.real, v.imag] for j, k, v in self.params["terms"]]
            return {"kind": "finite", "terms": terms}
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_json(cls, data: dict) -> "FamilySpec":
        data = dict(data)
        kind = data.pop("kind")
        if kind == "finite":
            terms = []
            for t in data["terms"]:
                j, k, re_ = t[0], t[1], t[2]
                im_ = t[3] if len(t) > 3 else 0.0
                terms.append((j, k, complex(re_, im_)))
            return cls.finite(terms)
        return cls(kind, data)

    def support(self) -> tuple[int, int] | None:
        """Largest ``(|j|, |k|)`` with a possibly nonzero coefficient, if finite."""
        if self.kind == "finite":
            terms = self.params["terms"]
            return (max([1] + [abs(j) for j, _, _ in terms]), max([1] + [abs(k) for _, k, _ in terms]))
        if self.kind == "randomSparse":
            return int(self.params["boundJ"]), int(self.params["boundK"])
        if self.kind == "product":
            sx, sy = _seq_support(self.params["x"]), _seq_support(self.params["y"])
            if sx is not None and sy is not None:
                return sx, sy
        return None


def parse_family(text: str) -> FamilySpec:
    """Inline shorthand or a path to a JSON spec file.

    Shorthands: ``geometric:RX[,RY]``, ``finite:j,k,re[,im];...``,
    ``random:SEED,BOUNDJ,BOUNDK[,DENSITY[,DECAY]]``, ``zero``.
    """
    path = Path(text)
    if text.endswith(".json") or path.is_file():
        return FamilySpec.from_json(json.loads(path.read_text()))
    kind, _, rest = text.partition(":")
    try:
        if kind == "zero":
            return FamilySpec.finite([])
        if kind == "geometric":
            radii = [float(v) for v in rest.split(",")]
            if len(radii) not in (1, 2):
                raise ValueError("expected one or two radii")
            return FamilySpec.geometric(*radii)
        if kind == "finite":
            terms = []
            for chunk in filter(None, rest.split(";")):
                f = chunk.split(",")
                if len(f) not in (3, 4):
                    raise ValueError(f"bad finite term {chunk!r}")
                terms.append((int(f[0]), int(f[1]), complex(float(f[2]), float(f[3]) if len(f) == 4 else 0.0)))
            return FamilySpec.finite(terms)
        if kind in ("random", "randomSparse"):
            f = rest.split(",")
            if not 3 <= len(f) <= 5:
                raise ValueError("expected SEED,BOUNDJ,BOUNDK[,DENSITY[,DECAY]]")
            return FamilySpec.random_sparse(int(f[0]), int(f[1]), int(f[2]),
                                            float(f[3]) if len(f) > 3 else 1.0,
                                            float(f[4]) if len(f) > 4 else 0.0)
    except (ValueError, KeyError) as exc:
        raise ValueError(f"cannot parse family {text!r}: {exc}") from None
    raise ValueError(f"cannot parse family {text!r}: unknown kind {kind!r}")


# one-dimensional sequences used by the product kind

def _check_sequence(seq: dict):
    if seq.get("kind") == "geometric":
        if not 0 <= float(seq["r"]) < 1:
            raise ValueError(f"geometric radius {seq['r']} must lie in [0, 1)")
    elif seq.get("kind") == "finite":
        for term in seq["terms"]:
            int(term[0])
    else:
        raise ValueError(f"unknown sequence kind {seq.get('kind')!r}")


def _seq_terms(seq: dict) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for t in seq["terms"]:
        out[int(t[0])] = out.get(int(t[0]), 0) + complex(t[1], t[2] if len(t) > 2 else 0.0)
    return out


def _seq_support(seq: dict) -> int | None:
    if seq["kind"] == "finite":
        return max([1] + [abs(k) for k in _seq_terms(seq)])
    return None


def _seq_values(seq: dict, bound: int) -> np.ndarray:
    k = np.arange(-bound, bound + 1)
    if seq["kind"] == "geometric":
        return np.power(float(seq["r"]), np.abs(k)).astype(complex)
    out = np.zeros(len(k), dtype=complex)
    for idx, v in _seq_terms(seq).items():
        if abs(idx) <= bound:
            out[idx + bound] += v
    return out


def _seq_closed(seq: dict, t: np.ndarray) -> np.ndarray:
    if seq["kind"] == "geometric":
        return poisson(float(seq["r"]), t).astype(complex)
    out = np.zeros(len(t), dtype=complex)
    for idx, v in _seq_terms(seq).items():
        out += v * np.exp(1j * idx * t)
    return out


def _seq_abs_total(seq: dict) -> float:
    if seq["kind"] == "geometric":
        r = float(seq["r"])
        return (1 + r) / (1 - r)
    return float(sum(abs(v) for v in _seq_terms(seq).values()))


def _seq_tail(seq: dict, bound: int) -> float:
    """``sum_{|k| > bound} |a_k|``."""
    if seq["kind"] == "geometric":
        r = float(seq["r"])
        return 2 * r ** (bound + 1) / (1 - r)
    return float(sum(abs(v) for k, v in _seq_terms(seq).items() if abs(k) > bound))


def _as_product(spec: FamilySpec) -> tuple[dict, dict] | None:
    if spec.kind == "geometric":
        return {"kind": "geometric", "r": spec.params["rx"]}, {"kind": "geometric", "r": spec.params["ry"]}
    if spec.kind == "product":
        return spec.params["x"], spec.params["y"]
    return None


def poisson(r: float, t) -> np.ndarray:
    """``(1 - r^2) / (1 - 2 r cos t + r^2) = sum_k r^|k| exp(i k t)``."""
    t = np.asarray(t, dtype=float)
    return (1 - r * r) / (1 - 2 * r * np.cos(t) + r * r)


def _random_block(spec: FamilySpec) -> np.ndarray:
    p = spec.params
    bj, bk = int(p["boundJ"]), int(p["boundK"])
    shape = (2 * bj + 1, 2 * bk + 1)
    rng = np.random.Generator(np.random.PCG64(int(p["seed"])))
    mask = rng.random(shape) < float(p["density"])
    re_ = rng.uniform(-1.0, 1.0, shape)
    im_ = rng.uniform(-1.0, 1.0, shape)
    d = float(p.get("decayExponent", 0.0))
    damp = np.outer((1.0 + np.abs(np.arange(-bj, bj + 1))) ** -d, (1.0 + np.abs(np.arange(-bk, bk + 1))) ** -d)
    return np.where(mask, (re_ + 1j * im_) * damp, 0)


def build(spec: FamilySpec, bound_j: int, bound_k: int) -> CoefficientGrid:
    if bound_j < 1 or bound_k < 1:
        raise ValueError(f"bounds must be positive, got ({bound_j}, {bound_k})")
    factors = _as_product(spec)
    if factors is not None:
        return CoefficientGrid(np.outer(_seq_values(factors[0], bound_j), _seq_values(factors[1], bound_k)))
    if spec.kind == "finite":
        full = CoefficientGrid.from_entries(spec.params["terms"])
        return full.resized(bound_j, bound_k)
    return CoefficientGrid(_random_block(spec)).resized(bound_j, bound_k)


def build_default(spec: FamilySpec, bound_j: int, bound_k: int) -> CoefficientGrid:
    """``build`` at bounds at least as large as the family's own support."""
    support = spec.support()
    if support is not None:
        bound_j, bound_k = max(bound_j, support[0]), max(bound_k, support[1])
    return build(spec, bound_j, bound_k)


def closed_form_at(spec: FamilySpec, x, y, real: bool = False) -> np.ndarray:
    """Reference function on the tensor grid ``x`` by ``y``.

    ``real=True`` returns only the real part, computed in real arithmetic
    where the factors allow it.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    factors = _as_product(spec)
    if factors is not None:
        fx, fy = _seq_closed(factors[0], x), _seq_closed(factors[1], y)
        if real:
            return np.outer(fx.real, fy.real) - np.outer(fx.imag, fy.imag)
        return np.outer(fx, fy)
    if real:
        return closed_form_at(spec, x, y).real
    if spec.kind == "finite":
        out = np.zeros((len(x), len(y)), dtype=complex)
        for j, k, v in spec.params["terms"]:
            out += v * np.outer(np.exp(1j * j * x), np.exp(1j * k * y))
        return out
    raise Unavailable(f"no closed form for family kind {spec.kind!r}")


def closed_form(spec: FamilySpec, nx: int, ny: int) -> SampleGrid:
    return SampleGrid(closed_form_at(spec, sample_points(nx), sample_points(ny)))


def _first_bound(tail, target: float, start: int = 1, limit: int = 1_000_000) -> int:
    b = start
    while tail(b) > target:
        b += 1
        if b > limit:
            raise Unavailable("tail bound does not reach the requested accuracy")
    return b


def reference_truncation(spec: FamilySpec, epsilon: float) -> tuple[int, int]:
    """Bounds ``(J, K)`` whose discarded tail is at most ``epsilon`` in sup norm.

    The tail is bounded by ``tail_x(J) * total_y + total_x * tail_y(K)``
    (absolute coefficient sums), each half held below ``epsilon / 2``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if spec.kind == "finite":
        return spec.support()
    factors = _as_product(spec)
    if factors is not None:
        fx, fy = factors
        tx, ty = _seq_abs_total(fx), _seq_abs_total(fy)
        j = _first_bound(lambda b: _seq_tail(fx, b) * ty, epsilon / 2)
        k = _first_bound(lambda b: tx * _seq_tail(fy, b), epsilon / 2)
        sx, sy = _seq_support(fx), _seq_support(fy)
        return (j if sx is None else min(j, sx)), (k if sy is None else min(k, sy))
    p = spec.params
    d = float(p.get("decayExponent", 0.0))
    if d <= 1:
        raise Unavailable("randomSparse needs decayExponent > 1 for a certified tail bound")
    amp = math.sqrt(2.0)
    total = 2 * zeta(d, 1) - 1  # sum over all integers t of (1 + |t|)^-d

    def tail(b):
        return 2 * zeta(d, b + 2)

    j = _first_bound(lambda b: amp * tail(b) * total, epsilon / 2)
    k = _first_bound(lambda b: amp * total * tail(b), epsilon / 2)
    return min(j, int(p["boundJ"])), min(k, int(p["boundK"]))
