import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nonlocal_lab.analysis import (
    distribution_profile,
    identity_weight,
    lorentz_norm,
    lorentz_weight,
    rearrange,
    sharpness_trend,
    weighted_lp,
)
from nonlocal_lab.domain import build_grid, radius_order
from nonlocal_lab.errors import DomainError
from nonlocal_lab.models import GridFunction, Interval

values_32 = arrays(np.float64, (32,), elements=st.floats(min_value=-5.0, max_value=5.0))


@given(values_32)
def test_rearrangement_keeps_the_values(interval_domain, values):
    u = GridFunction.from_interior(interval_domain, values)
    star, _ = rearrange(u)
    np.testing.assert_array_equal(np.sort(star.interior), np.sort(np.abs(values)))
    assert star.domain.measure == pytest.approx(interval_domain.measure)
    for p in (1.0, 2.0, math.inf):
        assert star.norm_p(p) == pytest.approx(u.norm_p(p), rel=1e-12)


def test_rearrangement_decreases_with_radius(interval_domain):
    u = GridFunction.from_callable(interval_domain, lambda x: np.sin(3.0 * x[:, 0]))
    star, _ = rearrange(u)
    ordered = star.interior[radius_order(star.domain)]
    assert np.all(np.diff(ordered) <= 0)


def test_rearrangement_target_must_match(interval_domain):
    u = GridFunction.zeros(interval_domain)
    with pytest.raises(DomainError):
        rearrange(u, build_grid(Interval(-1.0, 1.0), 1.0 / 8, 1.0))


def test_distribution_function(interval_domain):
    values = np.zeros(32)
    values[:4] = 3.0
    values[4:12] = -1.0
    profile = distribution_profile(GridFunction.from_interior(interval_domain, values))
    h = interval_domain.h
    assert float(profile.mu(0.5)) == pytest.approx(12 * h)
    assert float(profile.mu(1.0)) == pytest.approx(4 * h)
    assert float(profile.mu(3.0)) == 0.0
    np.testing.assert_allclose(profile.breakpoints, [3.0, 1.0])
    assert profile.total_measure == pytest.approx(2.0)


@given(values_32, st.sampled_from([1.0, 2.0, 3.5]))
def test_identity_weight_gives_lp_norm(interval_domain, values, p):
    u = GridFunction.from_interior(interval_domain, values)
    weight = identity_weight(interval_domain.measure)
    assert lorentz_norm(u, weight, p) == pytest.approx(u.norm_p(p), rel=1e-9, abs=1e-12)


def test_lorentz_weight_is_increasing_and_concave(log_kernel):
    weight = lorentz_weight(log_kernel, 2.0, 1.0 / 16)
    assert weight.values[0] == 0.0
    assert np.all(np.diff(weight.values) > 0)
    # psi decreases with the radius, so the increments shrink.
    assert np.all(np.diff(np.diff(weight.values)) <= 1e-12)
    assert weight.psi.shape == (32,)


def test_lorentz_weight_integrates_the_cell_density(log_kernel):
    h = 1.0 / 16
    weight = lorentz_weight(log_kernel, 2.0, h)
    np.testing.assert_allclose(weight.values[1:], h * np.cumsum(weight.psi), rtol=1e-13)
    # A is linear across each cell with slope psi_k.
    assert float(weight(0.5 * h)) == pytest.approx(0.5 * h * weight.psi[0], rel=1e-13)
    assert float(weight(2.5 * h)) == pytest.approx(h * (weight.psi[0] + weight.psi[1] + 0.5 * weight.psi[2]), rel=1e-13)


def test_lorentz_norm_of_indicator(log_kernel, interval_domain):
    weight = lorentz_weight(log_kernel, interval_domain.measure, interval_domain.h)
    values = np.zeros(32)
    values[10:14] = 1.0
    u = GridFunction.from_interior(interval_domain, values)
    expected = math.sqrt(float(weight(4 * interval_domain.h)))
    assert lorentz_norm(u, weight, 2.0) == pytest.approx(expected, rel=1e-12)


def test_lorentz_norm_is_weighted_lp_of_rearrangement(log_kernel, interval_domain):
    weight = lorentz_weight(log_kernel, interval_domain.measure, interval_domain.h)
    u = GridFunction.from_callable(interval_domain, lambda x: np.cos(2.0 * x[:, 0]))
    star, _ = rearrange(u)
    psi_in_order = np.empty(32)
    psi_in_order[radius_order(star.domain)] = weight.psi
    assert lorentz_norm(u, weight) == pytest.approx(weighted_lp(star, psi_in_order), rel=1e-9)


def test_lorentz_norm_rejects_small_p(log_kernel, interval_domain):
    weight = lorentz_weight(log_kernel, interval_domain.measure, interval_domain.h)
    with pytest.raises(DomainError):
        lorentz_norm(GridFunction.zeros(interval_domain), weight, 0.5)
    assert lorentz_norm(GridFunction.zeros(interval_domain), weight) == 0.0


def test_sharpness_trend_grows(log_kernel):
    trend = sharpness_trend(log_kernel, [1 / 16, 1 / 64, 1 / 256])
    assert np.all(trend["growth"] > 1.0)
    assert trend["lp"][-1] / trend["lp"][0] < trend["lorentz"][-1] / trend["lorentz"][0]
