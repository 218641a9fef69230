import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nonlocal_lab.domain import build_grid
from nonlocal_lab.errors import DomainError, QuadratureError
from nonlocal_lab.forms import (
    PairWeights,
    apply_L,
    apply_L_discrete,
    apply_N,
    assemble,
    boundary_mass_profile,
    energy,
    hardy_witness,
    hardy_witness_table,
    j_perimeter,
    operator_matrix,
    thread_count,
)
from nonlocal_lab.kernels import log_modulus
from nonlocal_lab.models import Ball, EllSpec, GridFunction, Interval, KernelSpec, TailSpec

interior_values = arrays(np.float64, (32,), elements=st.floats(min_value=-10.0, max_value=10.0))


def _primitive(x):
    # Antiderivative of -log(1 - x) on [0, 1).
    return (1.0 - x) * np.log(1.0 - x) + x


@pytest.mark.parametrize("h", [1 / 8, 1 / 16, 1 / 32])
def test_adjacent_weight_closed_form(log_kernel, h):
    assert PairWeights(log_kernel, h).weight((1,)) == pytest.approx(2.0 * h * math.log(2.0), rel=1e-8)


def test_separated_weight_closed_form(log_kernel):
    h = 1.0 / 16
    expected = h * (3.0 * math.log(3.0) - 4.0 * math.log(2.0))
    assert PairWeights(log_kernel, h).weight((2,)) == pytest.approx(expected, rel=1e-10)


def test_weights_are_symmetric_with_empty_shell_block(disk_form):
    w = disk_form.weights
    n_int = disk_form.domain.n_interior
    np.testing.assert_array_equal(w, w.T)
    assert np.all(w >= 0)
    assert not np.any(w[n_int:, n_int:])
    assert not np.any(np.diag(w))


def test_energy_matches_brute_force_sum():
    kernel = KernelSpec(dimension=1, ell=EllSpec.constant(1.0, rho=0.25), tail=TailSpec.zero())
    domain = build_grid(Interval(0.0, 1.0), 1.0 / 16, 0.25)
    form = assemble(domain, kernel)
    rng = np.random.default_rng(7)
    u = GridFunction(domain, rng.standard_normal(domain.n_cells))
    v = GridFunction(domain, rng.standard_normal(domain.n_cells))
    n_int = domain.n_interior
    brute = 0.0
    for i in range(n_int):
        for j in range(domain.n_cells):
            if j < n_int and j <= i:
                continue
            brute += (u.values[i] - u.values[j]) * (v.values[i] - v.values[j]) * form.weights[i, j]
        brute += form.tail[i] * u.values[i] * v.values[i]
    assert energy(form, u, v) == pytest.approx(brute, abs=1e-12)


def test_exterior_mass_is_cell_average_of_log_profile(log_form):
    h = log_form.domain.h
    lower = log_form.domain.interior_index[:, 0] * h
    right = lower >= 0
    a, b = lower[right], lower[right] + h
    expected = (_primitive(b) - _primitive(a)) / h
    np.testing.assert_allclose(log_form.exterior_mass[right], expected, rtol=1e-7)


def test_exterior_mass_near_half(log_form):
    centers = log_form.domain.centers("interior")[:, 0]
    k = int(np.argmin(np.abs(centers - 0.5)))
    assert abs(log_form.exterior_mass[k] - math.log(2.0)) <= 2 * log_form.domain.h
    exact = -np.log(1.0 - np.abs(centers))
    assert np.max(np.abs(log_form.exterior_mass - exact) / exact) <= 3 * log_form.domain.h


@given(interior_values)
def test_poincare_inequality(log_form, values):
    u = GridFunction.from_interior(log_form.domain, values)
    rhs = log_form.poincare_constant * log_form.domain.cell_volume * float(np.sum(values ** 2))
    assert energy(log_form, u) >= rhs * (1 - 1e-12) - 1e-300


@given(interior_values)
def test_matrix_and_operator_agree_with_energy(tailed_form, values):
    u = GridFunction.from_interior(tailed_form.domain, values)
    matrix = operator_matrix(tailed_form)
    e = energy(tailed_form, u)
    assert float(values @ matrix @ values) == pytest.approx(e, rel=1e-10, abs=1e-10)
    pairing = tailed_form.domain.cell_volume * float(apply_L_discrete(tailed_form, u) @ values)
    assert pairing == pytest.approx(e, rel=1e-10, abs=1e-10)


def test_censored_energy_is_below_full(tailed_form):
    rng = np.random.default_rng(3)
    u = GridFunction.from_interior(tailed_form.domain, rng.standard_normal(tailed_form.domain.n_interior))
    assert energy(tailed_form, u, which="censored") < energy(tailed_form, u)
    assert energy(tailed_form, u, which="global") == energy(tailed_form, u)


def test_global_energy_needs_zero_exterior(log_form):
    u = GridFunction(log_form.domain, np.ones(log_form.domain.n_cells))
    with pytest.raises(DomainError):
        energy(log_form, u, which="global")


def test_neumann_matrix_annihilates_constants(log_form):
    matrix = operator_matrix(log_form, "neumann")
    np.testing.assert_allclose(matrix @ np.ones(matrix.shape[0]), 0.0, atol=1e-12)
    with pytest.raises(DomainError):
        operator_matrix(log_form, "robin")


def test_normal_derivative_sign(log_form):
    domain = log_form.domain
    u = GridFunction.from_interior(domain, np.zeros(domain.n_interior), np.ones(domain.n_shell))
    n_u = apply_N(log_form, u)
    expected = log_form.weights[domain.n_interior:, : domain.n_interior].sum(axis=1) / domain.h
    np.testing.assert_allclose(n_u, expected)
    assert np.all(n_u[expected > 0] > 0)


def test_j_perimeter_of_centered_interval(log_form):
    result = j_perimeter(log_form, Interval(-0.25, 0.25))
    assert result.value == pytest.approx(1.0 + math.log(2.0), rel=1e-7)
    assert j_perimeter(log_form, None).value == 0.0


def test_j_perimeter_diagnostic_and_containment(log_form):
    result = j_perimeter(log_form, Interval(-0.25, 0.25), boundary_modulus=log_modulus(1.0))
    assert result.diagnostic is not None
    with pytest.raises(DomainError, match="inside Omega"):
        j_perimeter(log_form, Interval(0.5, 1.5))


def test_boundary_mass_profile_has_positive_infimum(log_form):
    profile = boundary_mass_profile(log_form)
    assert float(profile["infimum"]) > 0


def test_assembly_is_independent_of_threads(tailed_kernel, interval_domain, tailed_form):
    threaded = assemble(interval_domain, tailed_kernel, threads=3)
    np.testing.assert_array_equal(threaded.weights, tailed_form.weights)
    np.testing.assert_array_equal(threaded.tail, tailed_form.tail)


def test_thread_count_reads_environment(monkeypatch):
    monkeypatch.setenv("NONLOCAL_THREADS", "4")
    assert thread_count() == 4
    monkeypatch.setenv("NONLOCAL_THREADS", "many")
    assert thread_count() == 1


def test_strong_core_is_rejected(interval_domain):
    kernel = KernelSpec(dimension=1, ell=EllSpec.constant(1.0), tail=TailSpec.piecewise_power(1.2, 0.5))
    with pytest.raises(QuadratureError, match="diverges"):
        assemble(interval_domain, kernel)


def test_dimension_mismatch_is_rejected(log_kernel):
    with pytest.raises(DomainError):
        assemble(build_grid(Ball(1.0, 2), 0.25, 1.0), log_kernel)


def test_disk_form_is_positive(disk_form):
    assert disk_form.poincare_constant > 0
    assert np.all(disk_form.tail_uncertainty >= 0)


def test_apply_L_of_quadratic_is_constant(log_kernel):
    square = lambda points: points[:, 0] ** 2
    for x in (0.0, 0.3):
        assert apply_L(log_kernel, square, x) == pytest.approx(-1.0, rel=1e-8)


def test_apply_L_of_constant_vanishes(tailed_kernel):
    assert apply_L(tailed_kernel, lambda points: np.ones(points.shape[0]), 0.2) == pytest.approx(0.0, abs=1e-12)


def test_hardy_witness_is_radial_in_the_plane():
    kernel = KernelSpec(dimension=2, ell=EllSpec.constant(1.0), tail=TailSpec.power_decay(0.5))
    on_axis = hardy_witness(kernel, [0.1, 0.0])
    # Evaluated where they are, off-axis points put the singular direction inside (0, pi).
    for x in ([0.06, 0.08], [0.0, 0.1], [-0.08, 0.06]):
        direct = hardy_witness(kernel, x)
        assert direct == pytest.approx(on_axis, rel=1e-6)
        assert direct == pytest.approx(hardy_witness(kernel, x, rotate=True), rel=1e-6)
    assert hardy_witness(kernel, [0.06, 0.08], rotate=True) == pytest.approx(on_axis, rel=1e-12)


def test_hardy_witness_grows_toward_the_origin(tailed_kernel):
    radii = 2.0 ** -np.arange(3, 11)
    table = hardy_witness_table(tailed_kernel, radii)
    assert np.all(np.diff(table["W"]) > 0)
    assert np.all(table["ratio"] > 0)
    with pytest.raises(DomainError):
        hardy_witness(tailed_kernel, 0.5)
