import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_lab.domain import build_grid, indicator, quasi_ball_cells, radius_order, refine
from nonlocal_lab.errors import DomainError
from nonlocal_lab.models import Ball, Box, GridFunction, Interval, QuasiBall


def test_interval_grid_counts(interval_domain):
    assert interval_domain.n_interior == 32
    # Shell covers (1, 2] on each side: 16 cells per side.
    assert interval_domain.n_shell == 32
    assert interval_domain.measure == pytest.approx(2.0)


def test_cells_are_lexicographic(interval_domain):
    assert np.all(np.diff(interval_domain.interior_index[:, 0]) > 0)
    assert np.all(np.diff(interval_domain.shell_index[:, 0]) > 0)


def test_box_grid_measure_is_exact():
    domain = build_grid(Box((0.0, 0.0), (1.0, 0.5)), 0.125, 0.25)
    assert domain.n_interior == 32
    assert domain.measure == pytest.approx(0.5)
    assert domain.cell_volume == pytest.approx(0.125 ** 2)


def test_disk_area_converges():
    domain = build_grid(Ball(1.0, 2), 0.05, 0.05)
    assert domain.measure == pytest.approx(math.pi, rel=0.01)


def test_shell_cells_stay_within_r_ext():
    shape = Ball(1.0, 2)
    domain = build_grid(shape, 0.1, 0.3)
    distance = shape.exterior_distance(domain.centers("shell"))
    assert np.all(distance > 0)
    assert np.all(distance <= 0.3)


def test_grid_too_coarse_is_rejected():
    with pytest.raises(DomainError, match="grid too coarse"):
        build_grid(Interval(0.0, 0.1), 0.25, 1.0)


def test_shell_must_cover_singular_range():
    with pytest.raises(DomainError):
        build_grid(Interval(-1.0, 1.0), 0.125, 0.5, rho=1.0)


@given(st.integers(min_value=2, max_value=200), st.sampled_from([1, 2]))
def test_quasi_ball_has_exact_cell_count(n_cells, dimension):
    cells = quasi_ball_cells(n_cells, dimension, 0.1)
    assert cells.shape == (n_cells, dimension)
    assert len({tuple(row) for row in cells.tolist()}) == n_cells
    radii = np.linalg.norm((cells + 0.5) * 0.1, axis=1)
    assert np.all(np.diff(radii) >= -1e-12)


def test_quasi_ball_grid_matches_its_cell_count():
    domain = build_grid(QuasiBall(45, 2), 0.1, 0.2)
    assert domain.n_interior == 45
    assert domain.measure == pytest.approx(45 * 0.01)
    order = radius_order(domain)
    radii = np.linalg.norm(domain.centers("interior")[order], axis=1)
    assert np.all(np.diff(radii) >= -1e-12)


def test_indicator_and_refine(interval_domain):
    chi = indicator(interval_domain, Interval(-0.5, 0.5))
    assert chi.integral() == pytest.approx(1.0)
    assert chi.zero_exterior
    fine = refine(interval_domain)
    assert fine.h == pytest.approx(interval_domain.h / 2)
    assert fine.n_interior == 2 * interval_domain.n_interior


def test_grid_function_constructors(interval_domain):
    u = GridFunction.from_callable(interval_domain, lambda x: x[:, 0] ** 2)
    assert u.zero_exterior
    assert u.norm_p(math.inf) == pytest.approx((1 - 1 / 32) ** 2)
    shifted = u.with_shell(np.ones(interval_domain.n_shell))
    assert not shifted.zero_exterior
    np.testing.assert_array_equal(shifted.interior, u.interior)
    with pytest.raises(DomainError):
        GridFunction(interval_domain, np.zeros(3))
