import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fourier_l1.grid import (MINUS, PLUS, CoefficientGrid, DiffOrder, GridParseError, SignedIndex,
                             binomial_diff, branch_array, branch_diff, diff, get, load_grid, save_grid)

from conftest import random_grid

orders = st.builds(DiffOrder, st.integers(0, 2), st.integers(0, 2))
signed = st.builds(SignedIndex, st.sampled_from([PLUS, MINUS]), st.integers(0, 5))


def naive_expansion(grid, p, q, j: SignedIndex, k: SignedIndex):
    # written out independently of the package's helpers
    total = 0j
    for s in range(p + 1):
        for t in range(q + 1):
            jj = j.sign * (j.magnitude + s)
            kk = k.sign * (k.magnitude + t)
            total += (-1) ** (s + t) * math.comb(p, s) * math.comb(q, t) * get(grid, jj, kk)
    return total


def test_get_round_trip_and_zero_extension():
    grid = CoefficientGrid.from_entries([(1, 2, 3 + 4j)])
    assert get(grid, 1, 2) == 3 + 4j
    assert get(grid, grid.bound_j + 5, 0) == 0
    assert get(CoefficientGrid.zeros(2, 2), 0, 0) == 0


def test_signed_zero_has_two_values():
    plus, minus = SignedIndex(PLUS, 0), SignedIndex(MINUS, 0)
    assert plus != minus
    assert plus.value == minus.value == 0
    assert (str(plus), str(minus)) == ("0+", "0-")
    assert SignedIndex(MINUS, 3).value == -3


def test_diff_annihilates_constants():
    grid = CoefficientGrid.from_function(lambda j, k: 7 + 0 * j, 6, 6)
    for j in (SignedIndex(PLUS, 1), SignedIndex(MINUS, 2), SignedIndex(MINUS, 0)):
        assert diff(grid, DiffOrder(1, 1), j, SignedIndex(PLUS, 2)) == 0


def test_diff_of_linear_sequence():
    grid = CoefficientGrid.from_function(lambda j, k: j + 0 * k, 3, 3)
    assert diff(grid, DiffOrder(1, 0), SignedIndex(PLUS, 1), SignedIndex(PLUS, 0)) == -1


def test_negative_side_steps_away_from_zero():
    grid = CoefficientGrid.from_function(lambda j, k: j * j + 10 * k, 4, 4)
    # c[-2, 1] - c[-3, 1]
    assert diff(grid, DiffOrder(1, 0), SignedIndex(MINUS, 2), SignedIndex(PLUS, 1)) == (4 + 10) - (9 + 10)
    # 0- steps to -1, 0+ steps to +1
    assert diff(grid, DiffOrder(0, 1), SignedIndex(PLUS, 0), SignedIndex(MINUS, 0)) == 0 - (-10)
    assert diff(grid, DiffOrder(0, 1), SignedIndex(PLUS, 0), SignedIndex(PLUS, 0)) == 0 - 10


def test_diff_matches_binomial_expansion(rng):
    grid = random_grid(rng, 6, 6)
    for _ in range(200):
        p, q = rng.integers(0, 3, size=2)
        j = SignedIndex(int(rng.choice([PLUS, MINUS])), int(rng.integers(0, 7)))
        k = SignedIndex(int(rng.choice([PLUS, MINUS])), int(rng.integers(0, 7)))
        got = diff(grid, DiffOrder(int(p), int(q)), j, k)
        want = naive_expansion(grid, int(p), int(q), j, k)
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))
        assert abs(binomial_diff(grid, DiffOrder(int(p), int(q)), j, k) - want) <= 1e-12 * max(1.0, abs(want))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), signed, signed)
def test_first_difference_recovers_value(seed, j, k):
    grid = random_grid(np.random.default_rng(seed), 4, 4)
    lhs = diff(grid, DiffOrder(1, 0), j, k) + get(grid, j.step().value, k.value)
    want = get(grid, j.value, k.value)
    assert abs(lhs - want) <= 1e-14 * max(1.0, abs(want))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), orders, signed, signed,
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_diff_is_linear(seed, order, j, k, alpha, beta):
    rng = np.random.default_rng(seed)
    a, b = random_grid(rng, 4, 4), random_grid(rng, 4, 4)
    combo = CoefficientGrid(alpha * a.values + beta * b.values)
    got = diff(combo, order, j, k)
    want = alpha * diff(a, order, j, k) + beta * diff(b, order, j, k)
    scale = abs(alpha) * abs(diff(a, order, j, k)) + abs(beta) * abs(diff(b, order, j, k)) + 1e-300
    assert abs(got - want) <= 1e-12 * max(scale, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), signed, signed)
def test_order_zero_is_get_and_composition_commutes(seed, j, k):
    grid = random_grid(np.random.default_rng(seed), 5, 5)
    assert diff(grid, DiffOrder(0, 0), j, k) == get(grid, j.value, k.value)
    j_then_k = diff(grid, DiffOrder(1, 0), j, k) - diff(grid, DiffOrder(1, 0), j, k.step())
    k_then_j = diff(grid, DiffOrder(0, 1), j, k) - diff(grid, DiffOrder(0, 1), j.step(), k)
    assert abs(j_then_k - k_then_j) <= 1e-14 * max(1.0, abs(j_then_k))
    assert abs(diff(grid, DiffOrder(1, 1), j, k) - j_then_k) <= 1e-14 * max(1.0, abs(j_then_k))


def test_branch_layout_and_differences(rng):
    grid = random_grid(rng, 5, 5)
    arr = branch_array(grid, 6, 6)
    assert arr.shape == (2, 7, 2, 7)
    assert arr[1, 3, 0, 2] == get(grid, -3, 2)
    assert arr[0, 0, 1, 0] == arr[1, 0, 0, 0] == get(grid, 0, 0)
    assert arr[0, 6, 0, 0] == 0  # beyond the bound
    d = branch_diff(arr, 2, 1)
    assert d.shape == (2, 5, 2, 6)
    for r, sr in enumerate((PLUS, MINUS)):
        for s, ss in enumerate((PLUS, MINUS)):
            for a in range(5):
                for b in range(6):
                    want = diff(grid, DiffOrder(2, 1), SignedIndex(sr, a), SignedIndex(ss, b))
                    assert abs(d[r, a, s, b] - want) <= 1e-12


def test_grid_validation():
    with pytest.raises(ValueError):
        CoefficientGrid(np.zeros((4, 3)))
    with pytest.raises(ValueError):
        CoefficientGrid(np.full((3, 3), np.nan))
    grid = CoefficientGrid.zeros(1, 1)
    with pytest.raises(AttributeError):
        grid.values = None
    with pytest.raises(ValueError):
        grid.values[0, 0] = 1
    with pytest.raises(ValueError):
        DiffOrder(3, 0)
    with pytest.raises(ValueError):
        SignedIndex(0, 1)


def test_load_grid_examples():
    grid = load_grid("0 0 1 0")
    assert (grid.bound_j, grid.bound_k) == (1, 1)
    assert get(grid, 0, 0) == 1
    with pytest.raises(GridParseError, match="duplicate"):
        load_grid("0 0 1 0\n0 0 2 0")
    with pytest.raises(GridParseError) as err:
        load_grid("x y z")
    assert err.value.line == 1 and "line 1" in str(err.value)
    with pytest.raises(GridParseError):
        load_grid("# only a comment\n\n")
    with pytest.raises(GridParseError) as err:
        load_grid("0 0 1 0\n1 2 a 0\n")
    assert err.value.line == 2


def test_load_grid_comments_and_bounds():
    grid = load_grid("# header\n-3 1 0.5 -0.25  # trailing\n\n2 -4 1e-3 0\n")
    assert (grid.bound_j, grid.bound_k) == (3, 4)
    assert get(grid, -3, 1) == 0.5 - 0.25j
    assert get(grid, 2, -4) == 1e-3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5), st.booleans())
def test_save_load_round_trip(seed, bj, bk, sparse):
    rng = np.random.default_rng(seed)
    grid = random_grid(rng, bj, bk)
    if sparse:
        grid = CoefficientGrid(np.where(rng.random(grid.shape) < 0.3, grid.values, 0))
    text = save_grid(grid)
    assert load_grid(text) == grid
    lines = [tuple(map(int, l.split()[:2])) for l in text.splitlines() if not l.startswith("#")]
    assert lines == sorted(lines)
