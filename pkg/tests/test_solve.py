import numpy as np
import pytest

from nonlocal_lab.errors import ConvergenceError, DomainError, HypothesisViolation, IncompatibleDataError
from nonlocal_lab.forms import apply_L_discrete, apply_N, stiffness_matrix
from nonlocal_lab.kernels import scaling_sigma
from nonlocal_lab.models import GridFunction, Interval
from nonlocal_lab.random_fields import random_grid_function, stream
from nonlocal_lab.solve import (
    SourceSpec,
    comparison_check,
    critical_exponent,
    neumann_integration_by_parts,
    neumann_tail,
    pohozaev_check,
    refinement_study,
    smoothing_report,
    solve_dirichlet,
    solve_dirichlet_nonhom,
    solve_neumann,
    solve_sublinear,
    supercritical_attempt,
)


def _x(domain):
    return domain.centers("interior")[:, 0]


def test_torsion_function_is_positive_and_even(log_form):
    report = solve_dirichlet(log_form, 1.0)
    u = report.solution.interior
    assert report.residual <= 1e-10
    assert np.all(u > 0)
    np.testing.assert_allclose(u, u[::-1], rtol=1e-9)
    matrix = stiffness_matrix(log_form)
    np.testing.assert_allclose(matrix @ u, log_form.domain.cell_volume, rtol=1e-9)


def test_dirichlet_recovers_a_manufactured_solution(tailed_form):
    v = random_grid_function(tailed_form.domain, "manufactured", 0, kind="smooth")
    f = apply_L_discrete(tailed_form, v)
    u = solve_dirichlet(tailed_form, f).solution
    np.testing.assert_allclose(u.interior, v.interior, atol=1e-8)
    assert u.zero_exterior


def test_stalled_solve_is_noted(log_form):
    with pytest.raises(ConvergenceError) as excinfo:
        solve_dirichlet(log_form, 1.0, max_iter=1)
    first_step = excinfo.value.residual
    # One iteration lands within a factor 10 of this tolerance but not below it.
    report = solve_dirichlet(log_form, 1.0, tol=first_step / 5, max_iter=1)
    assert report.residual == pytest.approx(first_step)
    assert len(report.notes) == 1
    assert "stalled" in report.notes[0]
    assert not solve_dirichlet(log_form, 1.0).notes


def test_zero_data_gives_zero_solution(log_form):
    report = solve_dirichlet(log_form, 0.0)
    assert report.iterations == 0
    assert not np.any(report.solution.values)


def test_data_must_be_finite(log_form):
    with pytest.raises(DomainError):
        solve_dirichlet(log_form, np.full(32, np.nan))


def test_constant_exterior_data_propagates(tailed_form):
    domain = tailed_form.domain
    g = GridFunction.from_interior(domain, np.zeros(domain.n_interior), np.ones(domain.n_shell))
    report = solve_dirichlet_nonhom(tailed_form, 0.0, g, far_value=1.0)
    np.testing.assert_allclose(report.solution.interior, 1.0, atol=1e-8)
    np.testing.assert_array_equal(report.solution.shell, 1.0)
    assert not report.notes


def test_nonnegative_data_give_nonnegative_solution(tailed_form):
    domain = tailed_form.domain
    shell = stream(42, "exterior", 0).uniform(0.0, 2.0, domain.n_shell)
    g = GridFunction.from_interior(domain, np.zeros(domain.n_interior), shell)
    report = solve_dirichlet_nonhom(tailed_form, 0.5, g)
    assert report.norms["u_min"] >= -1e-10


def test_comparison_principle(log_form):
    f2 = 1.0 + stream(42, "comparison", 0).uniform(0.0, 1.0, 32)
    result = comparison_check(log_form, 1.0, f2)
    assert result["ordered"] == 1.0
    with pytest.raises(DomainError):
        comparison_check(log_form, f2, 1.0)


def test_smoothing_report(log_form):
    u = solve_dirichlet(log_form, 1.0).solution
    ratios = smoothing_report(log_form, u, np.ones(32), 2.0)
    assert 0 < ratios["lp_ratio"] <= 1.0 / log_form.poincare_constant * (1 + 1e-9)
    assert ratios["lorentz_ratio"] > 0
    assert smoothing_report(log_form, u, np.zeros(32), 2.0)["lorentz_ratio"] == 0.0


def test_refinement_study_ratios_settle(log_kernel):
    study = refinement_study(log_kernel, Interval(-1.0, 1.0), [1 / 8, 1 / 16, 1 / 32], lambda x: np.ones(x.shape[0]))
    assert [row["h"] for row in study.rows] == [1 / 8, 1 / 16, 1 / 32]
    assert set(study.worst_growth) == {"lp_ratio_2", "lorentz_ratio_2", "lp_ratio_4", "lorentz_ratio_4"}
    assert study.worst_growth["lp_ratio_2"] <= 1.1


def test_sublinear_constant_source_is_linear(log_form):
    report = solve_sublinear(log_form, SourceSpec(power=None, scale=2.0))
    torsion = solve_dirichlet(log_form, 1.0).solution.interior
    np.testing.assert_allclose(report.solution.interior, 2.0 * torsion, rtol=1e-9)
    assert "constant source" in report.notes[0]


def test_sublinear_power_source(log_form):
    report = solve_sublinear(log_form, SourceSpec(power=0.5, scale=1.0))
    u = report.solution.interior
    assert np.all(u > 0)
    assert report.norms["agreement"] <= 1e-6
    assert report.norms["monotone_from_below"] == 1.0
    assert report.residual <= 1e-4


def test_sublinear_rejects_superlinear_power(log_form):
    with pytest.raises(DomainError):
        solve_sublinear(log_form, SourceSpec(power=1.5))
    with pytest.raises(DomainError):
        SourceSpec(power=0.5, scale=0.0)


def test_source_primitive():
    source = SourceSpec(power=0.5, scale=3.0)
    assert float(source.F(4.0)) == pytest.approx(3.0 * 8.0 / 1.5)
    assert float(source.f(-1.0)) == 0.0


def test_critical_exponent():
    assert critical_exponent(1, 0.5) == pytest.approx(3.0)
    assert critical_exponent(2, 1.0) == pytest.approx(3.0)
    with pytest.raises(HypothesisViolation, match="exceeds dimension"):
        critical_exponent(1, 1.0)


def test_pohozaev_on_a_sublinear_solution(tailed_form):
    source = SourceSpec(power=0.5)
    u = solve_sublinear(tailed_form, source).solution
    result = pohozaev_check(tailed_form, u, source)
    sigma = scaling_sigma(tailed_form.kernel).sigma
    assert result["sigma"] == pytest.approx(sigma)
    assert result["p_star"] == pytest.approx(critical_exponent(1, sigma))
    assert result["pass"]


def test_supercritical_attempt_terminates(tailed_form):
    sigma = scaling_sigma(tailed_form.kernel).sigma
    result = supercritical_attempt(tailed_form, critical_exponent(1, sigma) + 1.0)
    assert result["outcome"] != "undecided"
    if result["outcome"] != "blow-up":
        assert "pohozaev" in result


def test_neumann_solution(log_form):
    domain = log_form.domain
    f = _x(domain)
    report = solve_neumann(log_form, f)
    u = report.solution
    assert abs(np.mean(u.interior)) <= 1e-12
    np.testing.assert_allclose(apply_L_discrete(log_form, u), f, atol=1e-8)
    np.testing.assert_allclose(apply_N(log_form, u), 0.0, atol=1e-8)
    # Odd data give an odd solution.
    np.testing.assert_allclose(u.interior, -u.interior[::-1], atol=1e-9)


def test_neumann_rejects_incompatible_data(log_form):
    with pytest.raises(IncompatibleDataError, match="incompatible data"):
        solve_neumann(log_form, np.ones(32))
    assert solve_neumann(log_form, np.zeros(32)).iterations == 0


def test_neumann_integration_by_parts(tailed_form):
    domain = tailed_form.domain
    rng = stream(42, "integration_by_parts", 0)
    u = GridFunction(domain, rng.standard_normal(domain.n_cells))
    v = GridFunction(domain, rng.standard_normal(domain.n_cells))
    result = neumann_integration_by_parts(tailed_form, u, v)
    assert result["lhs"] == pytest.approx(result["rhs"], rel=1e-10, abs=1e-10)


def test_neumann_tail_approaches_the_mean(tailed_kernel, interval_domain):
    u = GridFunction.from_callable(interval_domain, lambda x: np.exp(x[:, 0]))
    tail = neumann_tail(tailed_kernel, interval_domain, u)
    np.testing.assert_allclose(tail["radius"], [4.0, 8.0, 16.0])
    np.testing.assert_array_equal(tail["directions"], [[1.0], [-1.0]])
    assert tail["far_value"].shape == (3, 2)
    # Each far point settles on its own.
    assert np.all(np.diff(tail["deviation"], axis=0) < 0)
    assert np.all(tail["deviation"][-1] < 0.05)
    np.testing.assert_allclose(tail["far_values"], tail["far_value"].mean(axis=1))
    assert np.all(np.diff(tail["mean_deviation"]) < 0)
    assert tail["mean_deviation"][-1] < 0.01


def test_neumann_tail_points_lean_toward_their_side(tailed_kernel, interval_domain):
    # An increasing function reads larger on the right than on the left.
    u = GridFunction.from_callable(interval_domain, lambda x: np.exp(x[:, 0]))
    far = neumann_tail(tailed_kernel, interval_domain, u)["far_value"]
    mean = float(np.mean(u.interior))
    assert np.all(far[:, 0] > mean)
    assert np.all(far[:, 1] < mean)


def test_neumann_tail_needs_a_power_tail(log_kernel, interval_domain):
    with pytest.raises(IncompatibleDataError, match="no stabilization limit"):
        neumann_tail(log_kernel, interval_domain, GridFunction.zeros(interval_domain))
