import numpy as np
import pytest

from nonlocal_lab.errors import DomainError, HypothesisViolation
from nonlocal_lab.forms import energy
from nonlocal_lab.models import EllSpec, GridFunction, KernelSpec, TailSpec
from nonlocal_lab.random_fields import random_grid_function
from nonlocal_lab.spectral import (
    berezin_bound,
    censored_eigen,
    dirichlet_eigen,
    eigenvalue_sum_check,
    h_norm,
    hstar_dual_pairing,
    hstar_norm,
    spectral_apply,
)


def _leading(dec):
    return type(dec)(domain=dec.domain, eigenvalues=dec.eigenvalues[:1], vectors=dec.vectors[:, :1])


@pytest.fixture(scope="module")
def log_spectrum(log_form):
    return dirichlet_eigen(log_form)


def test_eigenvalues_are_positive_and_sorted(log_spectrum, log_form):
    values = log_spectrum.eigenvalues
    assert log_spectrum.complete
    assert values[0] > 0
    assert np.all(np.diff(values) >= 0)
    assert values[0] == pytest.approx(log_form.poincare_constant, rel=1e-10)


def test_eigenvectors_are_orthonormal(log_spectrum):
    gram = log_spectrum.domain.cell_volume * log_spectrum.vectors.T @ log_spectrum.vectors
    np.testing.assert_allclose(gram, np.eye(log_spectrum.count), atol=1e-10)


def test_ground_state_is_positive(log_spectrum):
    assert np.all(log_spectrum.eigenfunction(0).interior > 0)


def test_eigenfunction_energy_equals_eigenvalue(log_spectrum, log_form):
    phi = log_spectrum.eigenfunction(2)
    assert energy(log_form, phi) == pytest.approx(log_spectrum.eigenvalues[2], rel=1e-10)


def test_partial_decomposition_matches_full(log_form, log_spectrum):
    partial = dirichlet_eigen(log_form, k=4)
    np.testing.assert_allclose(partial.eigenvalues, log_spectrum.eigenvalues[:4], rtol=1e-12)
    with pytest.raises(DomainError):
        spectral_apply(partial, partial.eigenfunction(0))
    with pytest.raises(DomainError):
        dirichlet_eigen(log_form, k=0)


def test_spectral_apply_matches_energy(log_spectrum, log_form):
    u = random_grid_function(log_form.domain, "spectral", 0)
    lu = spectral_apply(log_spectrum, u)
    assert log_form.domain.cell_volume * float(lu.interior @ u.interior) == pytest.approx(
        energy(log_form, u), rel=1e-9
    )
    assert h_norm(log_spectrum, u) ** 2 == pytest.approx(energy(log_form, u), rel=1e-9)


def test_inverse_power_undoes_the_operator(log_spectrum, log_form):
    u = random_grid_function(log_form.domain, "spectral", 1)
    back = spectral_apply(log_spectrum, spectral_apply(log_spectrum, u), power=-1.0)
    np.testing.assert_allclose(back.interior, u.interior, atol=1e-9)


def test_dual_pairing_is_bounded(log_spectrum, log_form):
    for index in range(5):
        u = random_grid_function(log_form.domain, "pairing_u", index)
        v = random_grid_function(log_form.domain, "pairing_v", index)
        result = hstar_dual_pairing(log_spectrum, u, v)
        assert result["pairing"] <= result["bound"] * (1 + 1e-12)
    v = random_grid_function(log_form.domain, "pairing_v", 0)
    assert hstar_norm(log_spectrum, v) > 0


def test_censored_spectrum_starts_at_zero(log_form, log_spectrum):
    censored = censored_eigen(log_form, k=3)
    assert censored.eigenvalues[0] == pytest.approx(0.0, abs=1e-9)
    ground = censored.eigenfunction(0).interior
    np.testing.assert_allclose(ground, ground[0], rtol=1e-8)
    assert censored.eigenvalues[1] <= log_spectrum.eigenvalues[1]


def test_berezin_bound_holds(log_kernel, log_form, log_spectrum):
    result = berezin_bound(log_kernel, log_form.domain)
    assert result.bound > 0
    assert result.bound <= log_spectrum.eigenvalues[0]
    assert result.t_star == pytest.approx(np.pi / 2)


def test_berezin_bound_in_the_plane(disk_form):
    kernel = KernelSpec(dimension=2, ell=EllSpec.constant(1.0, rho=0.5), tail=TailSpec.zero())
    result = berezin_bound(kernel, disk_form.domain)
    assert 0 < result.bound <= dirichlet_eigen(disk_form, k=1).eigenvalues[0]


def test_berezin_bound_needs_nonincreasing_profile(interval_domain):
    kernel = KernelSpec(dimension=1, ell=EllSpec.log_pow(-1.0), tail=TailSpec.zero())
    with pytest.raises(HypothesisViolation, match="nonincreasing"):
        berezin_bound(kernel, interval_domain)


def test_eigenvalue_sums_exceed_their_bound(log_kernel, log_spectrum):
    for k in (1, 4, 16):
        result = eigenvalue_sum_check(log_spectrum, log_kernel, k)
        assert result["ratio"] >= 1.0
    with pytest.raises(DomainError):
        eigenvalue_sum_check(_leading(log_spectrum), log_kernel, 2)


def test_zero_function_has_zero_norms(log_spectrum, log_form):
    zero = GridFunction.zeros(log_form.domain)
    assert h_norm(log_spectrum, zero) == 0.0
    assert hstar_norm(log_spectrum, zero) == 0.0
