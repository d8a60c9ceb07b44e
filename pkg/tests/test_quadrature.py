import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coa.exceptions import QuadratureError
from coa.model import RealLine
from coa.quadrature import Partition, apply, mesh_width, refine, uniform_partition


def test_uniform_partition_midpoints():
    p = uniform_partition(0.0, 1.0, 4)
    np.testing.assert_allclose(p.weights, 0.25)
    np.testing.assert_allclose(p.points, [0.125, 0.375, 0.625, 0.875])


def test_single_cell():
    p = uniform_partition(-1.0, 1.0, 1)
    assert p.points.tolist() == [0.0]
    assert p.weights.tolist() == [2.0]


@pytest.mark.parametrize("n", [0, -3])
def test_invalid_cell_count(n):
    with pytest.raises(ValueError):
        uniform_partition(0.0, 1.0, n)


def test_invalid_interval():
    with pytest.raises(ValueError):
        uniform_partition(1.0, 1.0, 4)


def test_refine_halves():
    p = refine(uniform_partition(0.0, 1.0, 4))
    assert p.n_cells == 8
    assert p.level == 1
    np.testing.assert_allclose(p.weights, 0.125)
    assert mesh_width(refine(uniform_partition(0.0, 1.0, 2))) == 0.25


def test_refine_real_line_extends_coverage():
    line = RealLine(4.0, 16)
    p0 = line.partition(0)
    p1 = refine(p0, line)
    assert p1.bounds == pytest.approx((-4 * np.sqrt(2), 4 * np.sqrt(2)), abs=1e-14)
    assert p1.n_cells == 32
    assert mesh_width(p1) < mesh_width(p0)


def test_repeated_refinement_mesh_width():
    p = uniform_partition(0.0, 1.0, 4)
    for k in range(1, 6):
        p = refine(p)
        assert mesh_width(p) == pytest.approx(0.25 / 2**k, rel=0, abs=1e-15)


def test_mesh_width_mixed_partition():
    p = Partition([0.0, 0.25, 0.5, 1.0])
    assert mesh_width(p) == 0.5


def test_apply_examples():
    p = uniform_partition(0.0, 1.0, 4)
    assert apply(p, lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=1e-15)
    assert apply(p, lambda x: x) == 0.5
    assert apply(uniform_partition(0.0, 1.0, 2), lambda x: x**2) == 0.3125


def test_apply_reports_bad_node():
    p = uniform_partition(0.0, 1.0, 4)
    with pytest.raises(QuadratureError) as info:
        apply(p, lambda x: np.where(x > 0.5, np.nan, x))
    assert info.value.node == 2


def test_points_must_lie_in_cells():
    with pytest.raises(ValueError):
        Partition([0.0, 1.0, 2.0], points=[0.5, 2.5])


def test_cell_index():
    p = uniform_partition(0.0, 1.0, 4)
    assert p.cell_index([-0.1, 0.0, 0.3, 1.0, 1.1]).tolist() == [-1, 0, 1, 3, -1]


@settings(max_examples=50, deadline=None)
@given(
    a=st.floats(-50, 50),
    length=st.floats(1e-3, 100),
    n=st.integers(1, 2000),
    slope=st.floats(-10, 10),
    icpt=st.floats(-10, 10),
)
def test_weights_sum_and_affine_exactness(a, length, n, slope, icpt):
    b = a + length
    p = uniform_partition(a, b, n)
    assert abs(np.sum(p.weights) - (b - a)) <= 1e-12 * max(1.0, b - a)
    exact = slope * (b**2 - a**2) / 2 + icpt * (b - a)
    scale = max(1.0, abs(slope) * max(abs(a), abs(b)) * length, abs(icpt) * length)
    assert apply(p, lambda x: slope * x + icpt) == pytest.approx(exact, abs=1e-11 * scale)


SMOOTH = [
    (np.exp, np.e - 1.0),
    (np.sin, 1.0 - np.cos(1.0)),
    (lambda x: 1.0 / (1.0 + x**2), np.pi / 4),
    (lambda x: np.sqrt(1.0 + x), (2.0 / 3.0) * (2**1.5 - 1.0)),
]


@pytest.mark.parametrize("f,_exact", SMOOTH)
def test_convergence_against_reference(f, _exact):
    # reference: 10**6-cell midpoint sum, independent of the Partition class
    m = 10**6
    xs = (np.arange(m) + 0.5) / m
    reference = float(np.sum(f(xs)) / m)
    assert reference == pytest.approx(_exact, abs=1e-11)
    p = uniform_partition(0.0, 1.0, 4)
    while mesh_width(p) > 1e-3:
        p = refine(p)
    assert abs(apply(p, f) - reference) <= 1e-6
