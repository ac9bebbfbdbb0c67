import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from localph.errors import ParameterError
from localph.filtration import Filtration, build_rips_filtration
from localph.geometry import pairwise_distances
from localph.persistence import (
    Barcode,
    PersistenceInterval,
    betti_numbers_at_scale,
    bottleneck_distance,
    compute_barcode,
    count_long_bars,
    gf2_rank,
    rips_barcode,
    rips_long_bar_count,
)

from oracles import barcode_matches_betti, bottleneck_brute_force

SQRT2 = math.sqrt(2.0)


def square():
    return np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)


# golden values -------------------------------------------------------------


def test_square_has_one_loop():
    bc = rips_barcode(square(), max_degree=1, t_max=10)
    assert bc.pairs(1).tolist() == [[1.0, SQRT2]]
    assert bc.pairs(0).tolist() == [[0.0, 1.0]] * 3 + [[0.0, math.inf]]


def test_two_points():
    bc = compute_barcode(build_rips_filtration(np.array([[0.0], [0.7]]), 1, 10), max_degree=0)
    assert bc.pairs(0).tolist() == [[0.0, 0.7], [0.0, math.inf]]


def test_equilateral_triangle_fills_in():
    pts = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    bc = compute_barcode(build_rips_filtration(pts, 2, 10), max_degree=1)
    assert bc.in_degree(1) == []


def test_hexagon_loop_born_at_side_length():
    t = np.arange(6) * np.pi / 3
    pts = np.column_stack([np.cos(t), np.sin(t)])
    bars = rips_barcode(pts, 1, 10).pairs(1)
    assert len(bars) == 1
    assert bars[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert bars[0, 1] == pytest.approx(math.sqrt(3), abs=1e-12)


def test_octahedron_has_a_void():
    pts = np.vstack([np.eye(3), -np.eye(3)])
    bc = compute_barcode(build_rips_filtration(pts, 3, 10))
    assert bc.pairs(2).tolist() == [[SQRT2, 2.0]]


def test_truncated_filtration_keeps_class_alive():
    bc = rips_barcode(square(), 1, t_max=1.2)
    assert bc.pairs(1).tolist() == [[1.0, math.inf]]


# dense Betti oracle ------------------------------------------------------


def test_gf2_rank():
    assert gf2_rank(np.array([[1, 1], [1, 1]])) == 1
    assert gf2_rank(np.eye(4, dtype=int)) == 4
    assert gf2_rank(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 2  # dependent over GF(2)


def test_betti_of_square_at_scales():
    f = build_rips_filtration(square(), 2, 10)
    assert betti_numbers_at_scale(f, 0.5, 2) == [4, 0, 0]
    assert betti_numbers_at_scale(f, 1.0, 2) == [1, 1, 0]
    # four triangles and no tetrahedron: a hollow 2-sphere
    assert betti_numbers_at_scale(f, SQRT2, 2) == [1, 0, 1]
    full = build_rips_filtration(square(), 3, 10)
    assert betti_numbers_at_scale(full, SQRT2, 2) == [1, 0, 0]


@given(st.integers(1, 10), st.sampled_from([2, 3]), st.integers(0, 2**31))
def test_reduction_matches_betti_oracle(n, dim, seed):
    pts = np.random.default_rng(seed).uniform(size=(n, dim))
    f = build_rips_filtration(pts, 3, 2.0)
    bc = compute_barcode(f, max_degree=2)
    assert barcode_matches_betti(bc, f, 2) == []


@given(st.integers(2, 9), st.integers(0, 2**31))
def test_euler_characteristic(n, seed):
    pts = np.random.default_rng(seed).uniform(size=(n, 3))
    f = build_rips_filtration(pts, n - 1, 10.0)  # full simplex: contractible
    bc = compute_barcode(f)
    chi_cells = sum((-1) ** int(d) for d in f.dims)
    chi_betti = sum((-1) ** iv.dim for iv in bc if iv.is_infinite())
    assert chi_cells == chi_betti == 1


def test_rejects_invalid_filtration():
    f = Filtration.from_entries([((0,), 0.0), ((0, 1), 1.0)], sort=False)
    with pytest.raises(Exception):
        compute_barcode(f)


# implicit vs explicit -----------------------------------------------------


@given(st.integers(1, 22), st.floats(0.3, 3.0), st.integers(0, 2**31))
def test_implicit_route_matches_explicit(n, t_max, seed):
    pts = np.random.default_rng(seed).normal(size=(n, 3))
    fast = rips_barcode(pts, 1, t_max, max_dim=2)
    slow = compute_barcode(build_rips_filtration(pts, 2, t_max), max_degree=1)
    assert fast == slow


def test_implicit_route_with_ties():
    # integer lattice: many equal diameters
    g = np.array([(i, j) for i in range(4) for j in range(3)], float)
    fast = rips_barcode(g, 1, 5.0)
    slow = compute_barcode(build_rips_filtration(g, 2, 5.0), max_degree=1)
    assert fast == slow


@given(st.integers(3, 20), st.floats(0.0, 1.0), st.integers(0, 2**31))
def test_long_bar_fast_path(n, thr, seed):
    pts = np.random.default_rng(seed).normal(size=(n, 2))
    t_max = 2.0
    bc = rips_barcode(pts, 1, t_max)
    for deg in (0, 1):
        want = count_long_bars(bc, deg, thr, t_max)
        assert rips_long_bar_count(pairwise_distances(pts), deg, thr, t_max, 2) == want


# relabelling / scaling -----------------------------------------------------


@given(st.integers(2, 12), st.integers(0, 2**31))
def test_barcode_invariant_under_relabelling(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    perm = rng.permutation(n)
    assert rips_barcode(pts, 1, 3.0) == rips_barcode(pts[perm], 1, 3.0)


def test_barcode_scales():
    t = np.linspace(0, 2 * np.pi, 9, endpoint=False)
    pts = np.column_stack([np.cos(t), np.sin(t)])
    a = rips_barcode(pts, 1, 10).pairs(1)
    b = rips_barcode(4.0 * pts, 1, 40).pairs(1)
    assert np.allclose(4.0 * a, b)


# counting -----------------------------------------------------------------


def test_count_long_bars_is_strict():
    bc = Barcode([PersistenceInterval(1, 0.0, 0.5), PersistenceInterval(1, 0.0, 0.6), PersistenceInterval(1, 1.0, math.inf)])
    assert count_long_bars(bc, 1, 0.5) == 2
    assert count_long_bars(bc, 1, 0.6) == 1
    assert count_long_bars(bc, 0, 0.0) == 0
    with pytest.raises(ParameterError):
        count_long_bars(bc, 1, -1.0)


def test_interval_validation():
    with pytest.raises(Exception):
        PersistenceInterval(0, 1.0, 0.5)
    assert PersistenceInterval(0, 0.0, math.inf).length == math.inf


def test_text_round_trip():
    bc = rips_barcode(square(), 1, 10)
    assert Barcode.from_text(bc.to_text()) == bc


# bottleneck ---------------------------------------------------------------


finite_diagram = st.lists(
    st.tuples(st.floats(0, 5), st.floats(0, 3)).map(lambda p: (p[0], p[0] + p[1])), max_size=3
)


@given(finite_diagram, finite_diagram)
def test_bottleneck_matches_permutation_oracle(a, b):
    ba, bb = Barcode.from_pairs({1: a}), Barcode.from_pairs({1: b})
    want = bottleneck_brute_force(ba.pairs(1), bb.pairs(1))
    assert bottleneck_distance(ba, bb, 1) == pytest.approx(want, abs=1e-12)


@given(finite_diagram, finite_diagram)
def test_bottleneck_is_a_metric(a, b):
    ba, bb = Barcode.from_pairs({0: a}), Barcode.from_pairs({0: b})
    assert bottleneck_distance(ba, ba, 0) == 0
    assert bottleneck_distance(ba, bb, 0) == bottleneck_distance(bb, ba, 0) >= 0


def test_bottleneck_infinite_bars():
    a = Barcode.from_pairs({0: [(0, math.inf), (0, 1)]})
    b = Barcode.from_pairs({0: [(0.25, math.inf)]})
    assert bottleneck_distance(a, b, 0) == pytest.approx(0.5)
    c = Barcode.from_pairs({0: [(0, math.inf), (1, math.inf)]})
    assert bottleneck_distance(a, c, 0) == math.inf


@given(st.integers(2, 25), st.sampled_from([0.01, 0.05]), st.integers(0, 2**31))
def test_stability_under_perturbation(n, eps, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n, 2))
    step = rng.normal(size=pts.shape)
    step *= eps * rng.uniform(size=(n, 1)) / np.linalg.norm(step, axis=1, keepdims=True)
    moved = pts + step  # every point moves by at most eps
    a, b = rips_barcode(pts, 1, 10), rips_barcode(moved, 1, 10)
    for d in (0, 1):
        assert bottleneck_distance(a, b, d) <= 2 * eps + 1e-12
