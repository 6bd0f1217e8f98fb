"""Reference run for the geometric-family trend tests, independent of fourier_l1.

Everything is rebuilt from scratch here: coefficients from the formula,
directional differences by recursion on a dict, Cesaro and de la
Vallee-Poussin means by literally averaging the indicator masks of the
partial sums, the six V - S components as coefficient arrays built from the
one-sided kernels' mode coefficients, synthesis by inverse FFT and L1 norms
by the plain rectangle rule at a high resolution.

    python3 tests/oracles/make_golden.py            # writes tests/golden/*.json
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "golden"
LADDER = (4, 8, 16, 32, 64)
QUAD_N = 4096


def coeffs(r: float, bound: int) -> np.ndarray:
    j = np.abs(np.arange(-bound, bound + 1))
    return np.outer(r ** j, r ** j).astype(complex)


def poisson_product(r: float, n: int) -> np.ndarray:
    t = -math.pi + 2 * math.pi * np.arange(n) / n
    p = (1 - r * r) / (1 - 2 * r * np.cos(t) + r * r)
    return np.outer(p, p)


def synth(c: np.ndarray, n: int) -> np.ndarray:
    """Samples on x_a = -pi + 2 pi a / n of a centred coefficient array, via inverse FFT."""
    b = (c.shape[0] - 1) // 2
    assert 2 * b + 1 <= n
    idx = np.arange(-b, b + 1)
    sign = (-1.0) ** np.abs(idx)
    placed = np.zeros((n, n), dtype=complex)
    placed[np.ix_(idx % n, idx % n)] = c * np.outer(sign, sign)
    return np.fft.ifft2(placed) * n * n


def l1(v: np.ndarray) -> float:
    n = v.shape[0]
    return float(np.abs(v).sum() * (2 * math.pi / n) ** 2)


def mask(bound: int, m: int, n: int) -> np.ndarray:
    j = np.abs(np.arange(-bound, bound + 1))
    return np.outer(j <= m, j <= n).astype(float)


def cesaro_coeffs(c, bound, m, n):
    acc = np.zeros_like(c)
    for a in range(m + 1):
        for b in range(n + 1):
            acc += c * mask(bound, a, b)
    return acc / ((m + 1) * (n + 1))


def vp_coeffs(c, bound, m, n, big_m, big_n):
    acc = np.zeros_like(c)
    for a in range(m + 1, big_m + 1):
        for b in range(n + 1, big_n + 1):
            acc += c * mask(bound, a, b)
    return acc / ((big_m - m) * (big_n - n))


class Diffs:
    """Directional differences of c(j, k) = r^|j| r^|k| (zero outside the stored box)."""

    def __init__(self, r: float, bound: int):
        self.r, self.bound = r, bound
        self.memo = {}

    def c(self, j, k):
        if abs(j) > self.bound or abs(k) > self.bound:
            return 0.0
        return self.r ** abs(j) * self.r ** abs(k)

    def d(self, p, q, sj, aj, sk, ak):
        """Delta_pq at signed position (sj * aj, sk * ak); sj, sk in {+1, -1} also at magnitude 0."""
        key = (p, q, sj, aj, sk, ak)
        if key in self.memo:
            return self.memo[key]
        if p > 0:
            v = self.d(p - 1, q, sj, aj, sk, ak) - self.d(p - 1, q, sj, aj + 1, sk, ak)
        elif q > 0:
            v = self.d(p, q - 1, sj, aj, sk, ak) - self.d(p, q - 1, sj, aj, sk, ak + 1)
        else:
            v = self.c(sj * aj, sk * ak)
        self.memo[key] = v
        return v


def kernel_coeffs(sign: int, a: int, bound: int) -> np.ndarray:
    """Mode coefficients of 1/2 + sum_{t=1}^{a} e^{i sign t x}."""
    out = np.zeros(2 * bound + 1)
    out[bound] = 0.5
    for t in range(1, a + 1):
        out[bound + sign * t] = 1.0
    return out


def component(diffs: Diffs, p, q, a_range, b_range, wa, wb, bound):
    acc = np.zeros((2 * bound + 1, 2 * bound + 1))
    for sj in (1, -1):
        for a in range(a_range[0], a_range[1] + 1):
            kx = kernel_coeffs(sj, a, bound)
            row = np.zeros(2 * bound + 1)
            for sk in (1, -1):
                for b in range(b_range[0], b_range[1] + 1):
                    row += diffs.d(p, q, sj, a, sk, b) * wa(a) * wb(b) * kernel_coeffs(sk, b, bound)
            acc += np.outer(kx, row)
    return acc


def components(r: float, m: int, n: int, lam: float, bound: int) -> dict:
    big_a, big_b = math.floor(lam * m), math.floor(lam * n)
    diffs = Diffs(r, bound)
    one = lambda t: 1.0
    ra = lambda a: (big_a - a) / (big_a - m)
    rb = lambda b: (big_b - b) / (big_b - n)
    ia, ib = 1.0 / (big_a - m), 1.0 / (big_b - n)
    kb = big_a + 1

    def comp(p, q, ar, br, wa=one, wb=one):
        return component(diffs, p, q, ar, br, wa, wb, kb)

    return {
        "R1": comp(1, 1, (m, big_a - 1), (n, big_b - 1), ra, rb) + comp(1, 1, (0, m - 1), (n, big_b - 1), one, rb)
        + comp(1, 1, (m, big_a - 1), (0, n - 1), ra, one),
        "R2": ib * comp(1, 0, (0, m - 1), (n + 1, big_b)) + ib * comp(1, 0, (m, big_a - 1), (n + 1, big_b), ra, one)
        + ia * comp(0, 1, (m + 1, big_a), (0, n - 1)) + ia * comp(0, 1, (m + 1, big_a), (n, big_b - 1), one, rb),
        "R3": comp(1, 0, (0, m - 1), (n, n)),
        "R4": comp(0, 1, (m, m), (0, n - 1)),
        "R5": ia * ib * comp(0, 0, (m + 1, big_a), (n + 1, big_b)),
        "R0": comp(0, 0, (m, m), (n, n)),
    }, kb


def fejer_golden(r=0.8):
    bound = max(LADDER)
    c = coeffs(r, bound)
    f = poisson_product(r, QUAD_N)
    rows = []
    for m in LADDER:
        sigma = synth(cesaro_coeffs(c, bound, m, m), QUAD_N)
        rows.append({"m": m, "n": m, "norm_sigma_f": l1(sigma - f)})
        print("sigma", m, rows[-1]["norm_sigma_f"], file=sys.stderr)
    return {"family": f"geometric:{r},{r}", "quad_n": QUAD_N, "rule": "rectangle", "rows": rows}


def convergence_golden(r=0.8, lam=1.5, ladder=LADDER):
    rows = []
    f = poisson_product(r, QUAD_N)
    for m in ladder:
        parts, kb = components(r, m, m, lam, bound=None or math.floor(lam * m) + 2)
        c = coeffs(r, kb)
        big = math.floor(lam * m)
        v_minus_s = vp_coeffs(c, kb, m, m, big, big) - c * mask(kb, m, m)
        rebuilt = parts["R1"] + parts["R2"] - parts["R3"] - parts["R4"] + parts["R5"] - parts["R0"]
        gap = float(np.abs(rebuilt - v_minus_s).max() / max(np.abs(v_minus_s).max(), 1e-300))
        s_f = l1(synth(c * mask(kb, m, m), QUAD_N) - f)
        row = {"m": m, "n": m, "lambda": lam, "coefficient_gap": gap, "norm_S_f": s_f,
               "norm_V_S": l1(synth(v_minus_s, QUAD_N))}
        for name in ("R0", "R1", "R2", "R3", "R4", "R5"):
            row[name] = l1(synth(parts[name].astype(complex), QUAD_N))
        rows.append(row)
        print("R", m, row, file=sys.stderr)
    return {"family": f"geometric:{r},{r}", "quad_n": QUAD_N, "rule": "rectangle", "rows": rows}


def main():
    OUT.mkdir(exist_ok=True)
    (OUT / "fejer_geometric_0.8.json").write_text(json.dumps(fejer_golden(), indent=2) + "\n")
    (OUT / "convergence_geometric_0.8.json").write_text(json.dumps(convergence_golden(), indent=2) + "\n")
    (OUT / "decomposition_geometric_0.7.json").write_text(
        json.dumps(convergence_golden(0.7, 1.5, (8, 16, 32)), indent=2) + "\n")


if __name__ == "__main__":
    main()
