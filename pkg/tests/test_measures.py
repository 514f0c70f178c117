import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsd.measures import (
    CEMETERY,
    BinGrid,
    FiniteStateSpace,
    FiniteSupport,
    InsufficientPointsError,
    Measure,
    SupportMismatchError,
    coarsen_histogram,
    distribution,
    histogram_from_samples,
    lipschitz_constant,
    tv_distance,
)

probs = st.lists(st.floats(0.01, 10.0), min_size=2, max_size=6).map(
    lambda w: np.array(w) / np.sum(w)
)


def test_tv_identical_measures_is_zero():
    assert tv_distance(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0


def test_tv_mutually_singular_is_two():
    assert tv_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 2.0


def test_tv_direct_summation():
    # |0.4-0.5| + |0.6-0.5|
    assert tv_distance(np.array([0.4, 0.6]), np.array([0.5, 0.5])) == pytest.approx(0.2, abs=1e-15)


def test_tv_support_mismatch():
    a = Measure(FiniteSupport(2), np.array([0.5, 0.5]))
    b = Measure(FiniteSupport(3), np.array([0.3, 0.3, 0.4]))
    with pytest.raises(SupportMismatchError):
        tv_distance(a, b)
    grid = BinGrid.regular(0.0, 1.0, 4)
    other = BinGrid.regular(0.0, 1.0, 8)
    with pytest.raises(SupportMismatchError):
        tv_distance(Measure(grid, np.ones(4) / 4), Measure(other, np.ones(8) / 8))


@settings(max_examples=50, deadline=None)
@given(probs, probs, probs)
def test_tv_triangle_and_range(a, b, c):
    n = min(len(a), len(b), len(c))
    a, b, c = a[:n] / a[:n].sum(), b[:n] / b[:n].sum(), c[:n] / c[:n].sum()
    tab = tv_distance(a, b)
    assert tab <= tv_distance(a, c) + tv_distance(c, b) + 1e-12
    assert -1e-12 <= tab <= 2 + 1e-12
    assert tab == pytest.approx(tv_distance(b, a))


def test_measure_validation():
    with pytest.raises(ValueError):
        Measure(FiniteSupport(2), np.array([0.5, -0.1]))
    with pytest.raises(ValueError):
        distribution(FiniteSupport(2), np.array([0.5, 0.4]))
    m = Measure(FiniteSupport(2), np.array([0.2, 0.3]))
    assert m.mass == pytest.approx(0.5)
    assert m.normalized().is_distribution


def test_lipschitz_constant_function_is_zero():
    pts = [0.0, 0.3, 1.0]
    assert lipschitz_constant(pts, [2.0, 2.0, 2.0], lambda a, b: abs(a - b)) == 0.0


def test_lipschitz_single_pair():
    assert lipschitz_constant([0.0, 1.0], [0.0, 3.0], lambda a, b: abs(a - b)) == 3.0


def test_lipschitz_enumerates_pairs():
    # pairs: (0,0.5)->0.5, (0,1)->1, (0.5,1)->1.5
    got = lipschitz_constant([0.0, 0.5, 1.0], [0.0, 0.25, 1.0], lambda a, b: abs(a - b))
    assert got == pytest.approx(1.5, abs=1e-15)


def test_lipschitz_needs_two_points():
    with pytest.raises(InsufficientPointsError):
        lipschitz_constant([0.0], [1.0], lambda a, b: abs(a - b))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(-500, 500), min_size=2, max_size=6, unique=True),
    st.floats(-10, 10),
)
def test_lipschitz_shift_invariance(ks, shift):
    # coarse grid keeps the shifted differences away from float cancellation
    xs = [k / 100.0 for k in ks]
    vals = [np.sin(3 * x) for x in xs]
    metric = lambda a, b: abs(a - b)
    base = lipschitz_constant(xs, vals, metric)
    shifted = lipschitz_constant(xs, [v + shift for v in vals], metric)
    assert shifted == pytest.approx(base, rel=1e-12, abs=1e-12)


def test_finite_state_space_metric():
    sp = FiniteStateSpace(3)
    assert sp.metric(0, 1) == 1.0
    assert sp.metric(2, 2) == 0.0
    assert sp.metric(0, CEMETERY) == 1.0
    assert sp.rho_boundary(CEMETERY) == 0.0
    emb = FiniteStateSpace(3, embedding=np.array([0.0, 1.0, 3.0]), boundary_distance=np.array([0.5, 1.0, 0.2]))
    assert emb.metric(0, 2) == pytest.approx(3.0)
    assert emb.metric(1, CEMETERY) == pytest.approx(1.0)


def test_histogram_and_coarsen():
    grid = BinGrid.regular(0.0, 1.0, 8)
    g = np.random.default_rng(0)
    h = histogram_from_samples(grid, g.random(1000))
    assert h.is_distribution
    coarse = coarsen_histogram(h, 2)
    assert coarse.support.size == 4
    assert coarse.is_distribution
    # mass is conserved bin-pairwise
    assert coarse.weights[0] == pytest.approx(h.weights[0] + h.weights[1])


def test_bin_grid_2d():
    grid = BinGrid.regular([0.0, 0.0], [1.0, 2.0], [4, 5])
    assert grid.size == 20
    lo, hi = grid.bounds()
    assert lo.shape == (20, 2)
    assert hi[-1][1] == pytest.approx(2.0)
    pts = np.array([[0.1, 0.1], [0.9, 1.9]])
    h = histogram_from_samples(grid, pts)
    assert h.weights.sum() == pytest.approx(1.0)
