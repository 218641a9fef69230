"""
Solvers built on the discrete form.

- solve_dirichlet / solve_dirichlet_nonhom: A u = h^N f with zero or given exterior data.
- smoothing_report / refinement_study: L^p and Lorentz ratios of u against f.
- comparison_check: ordered data give ordered solutions.
- solve_sublinear / pohozaev_check / supercritical_attempt: the semilinear problem.
- solve_neumann / neumann_tail / neumann_integration_by_parts: the Neumann problem.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .analysis import lorentz_norm, lorentz_weight
from .domain import build_grid
from .errors import ConvergenceError, DomainError, HypothesisViolation, IncompatibleDataError
from .forms import apply_L_discrete, apply_N, assemble, energy, neumann_matrix, stiffness_matrix
from .kernels import scaling_sigma
from .models import Domain, FormMatrix, GridFunction, KernelSpec, LorentzWeight, Shape, SolveReport
from .quadrature import gauss_legendre

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12


def _interior_values(domain: Domain, f: Union[GridFunction, np.ndarray, float]) -> np.ndarray:
    if isinstance(f, GridFunction):
        if not f.domain.same_grid(domain):
            raise DomainError("data lives on a different domain than the form")
        return np.array(f.interior)
    values = np.broadcast_to(np.asarray(f, dtype=float), (domain.n_interior,)).copy()
    if not np.all(np.isfinite(values)):
        raise DomainError("data must be finite")
    return values


def _cg(
    matrix: np.ndarray,
    rhs: np.ndarray,
    tol: float,
    max_iter: Optional[int],
    x0: Optional[np.ndarray] = None,
    project: bool = False,
) -> Tuple[np.ndarray, float, int, List[str]]:
    """Jacobi-preconditioned CG; the notes record a residual accepted above `tol`."""
    n = rhs.shape[0]
    diag = np.diag(matrix).copy()
    diag[diag <= 0] = 1.0

    if project:
        def matvec(x):
            y = matrix @ (x - x.mean())
            return y - y.mean()

        def precondition(x):
            y = x / diag
            return y - y.mean()

        rhs = rhs - rhs.mean()
    else:
        matvec = lambda x: matrix @ x
        precondition = lambda x: x / diag

    operator = LinearOperator((n, n), matvec=matvec, dtype=float)
    jacobi = LinearOperator((n, n), matvec=precondition, dtype=float)
    iterations = [0]

    def count(_):
        iterations[0] += 1

    solution, info = cg(operator, rhs, x0=x0, rtol=tol, atol=0.0, maxiter=max_iter or 10 * n, M=jacobi, callback=count)
    scale = float(np.linalg.norm(rhs)) or 1.0
    residual = float(np.linalg.norm(matvec(solution) - rhs)) / scale
    if info != 0 and residual > 10 * tol:
        raise ConvergenceError(
            f"conjugate gradients stopped after {iterations[0]} iterations with relative residual {residual:.3g}",
            residual=residual,
            iterations=iterations[0],
        )
    notes: List[str] = []
    if info != 0 and residual > tol:
        # Stalled within a factor 10 of tol: kept, but the report says so.
        notes.append(f"conjugate gradients stalled at relative residual {residual:.3g} above tol {tol:.3g}")
        logger.warning(notes[-1])
    return solution, residual, iterations[0], notes


def solve_dirichlet(
    form: FormMatrix,
    f: Union[GridFunction, np.ndarray, float],
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    x0: Optional[np.ndarray] = None,
) -> SolveReport:
    """Weak solution of L u = f in Omega, u = 0 outside: A u = h^N f."""
    domain = form.domain
    f_int = _interior_values(domain, f)
    rhs = domain.cell_volume * f_int
    if not np.any(rhs):
        return SolveReport(GridFunction.zeros(domain), 0.0, 0, norms={"u_2": 0.0, "f_2": 0.0})
    solution, residual, iterations, notes = _cg(stiffness_matrix(form), rhs, tol, max_iter, x0)
    u = GridFunction.from_interior(domain, solution)
    logger.debug("dirichlet solve: %d iterations, residual %.3g", iterations, residual)
    f_grid = GridFunction.from_interior(domain, f_int)
    return SolveReport(u, residual, iterations, norms={"u_2": u.norm_p(2), "f_2": f_grid.norm_p(2)}, notes=notes)


def solve_dirichlet_nonhom(
    form: FormMatrix,
    f: Union[GridFunction, np.ndarray, float],
    g: GridFunction,
    far_value: float = 0.0,
    tol: float = DEFAULT_TOL,
) -> SolveReport:
    """
    L u = f in Omega with u = g on the shell and u = far_value beyond it.

    Solves for w = u - g, which vanishes outside Omega, with right side f - L_h g.
    """
    domain = form.domain
    f_int = _interior_values(domain, f)
    rhs = f_int - apply_L_discrete(form, g, far_value=far_value)
    inner = solve_dirichlet(form, rhs, tol=tol)
    u = GridFunction(domain, g.values + np.concatenate([inner.solution.interior, np.zeros(domain.n_shell)]))
    report = SolveReport(u, inner.residual, inner.iterations, norms={"u_2": u.norm_p(2), "u_min": float(np.min(u.interior))})
    report.notes.extend(inner.notes)
    if np.all(f_int >= 0) and np.all(g.values >= 0) and far_value >= 0 and report.norms["u_min"] < -1e-10:
        report.notes.append("maximum principle violated: u < 0 with nonnegative data")
        logger.warning("maximum principle violated: min u = %.3g", report.norms["u_min"])
    return report


def smoothing_report(
    form: FormMatrix,
    u: GridFunction,
    f: Union[GridFunction, np.ndarray],
    p: float,
    weight: Optional[LorentzWeight] = None,
) -> Dict[str, float]:
    """||u||_p / ||f||_p and ||u||_{A,p} / ||f||_p (both 0 for f = 0)."""
    domain = form.domain
    f_grid = GridFunction.from_interior(domain, _interior_values(domain, f))
    f_norm = f_grid.norm_p(p)
    if weight is None:
        weight = lorentz_weight(form.kernel, domain.measure, domain.h)
    if f_norm == 0.0:
        return {"lp_ratio": 0.0, "lorentz_ratio": 0.0, "f_p": 0.0}
    return {
        "lp_ratio": u.norm_p(p) / f_norm,
        "lorentz_ratio": lorentz_norm(u, weight, p) / f_norm,
        "f_p": f_norm,
    }


@dataclass
class RefinementStudy:
    """Smoothing ratios per cell size and the worst growth factor per halving."""

    rows: List[Dict[str, float]]
    worst_growth: Dict[str, float] = field(default_factory=dict)

    def bounded(self, limit: float = 1.1) -> bool:
        return all(v <= limit for v in self.worst_growth.values())


def refinement_study(
    kernel: KernelSpec,
    shape: Shape,
    hs: Sequence[float],
    f_callable: Callable[[np.ndarray], np.ndarray],
    p_values: Sequence[float] = (2.0, 4.0),
    r_ext: Optional[float] = None,
) -> RefinementStudy:
    """Solve the Dirichlet problem on each grid and track the smoothing ratios."""
    rows: List[Dict[str, float]] = []
    for h in hs:
        domain = build_grid(shape, h, r_ext or kernel.rho, rho=kernel.rho)
        form = assemble(domain, kernel)
        f = GridFunction.from_callable(domain, f_callable)
        u = solve_dirichlet(form, f).solution
        weight = lorentz_weight(kernel, domain.measure, h)
        row: Dict[str, float] = {"h": float(h)}
        for p in p_values:
            ratios = smoothing_report(form, u, f, p, weight)
            row[f"lp_ratio_{p:g}"] = ratios["lp_ratio"]
            row[f"lorentz_ratio_{p:g}"] = ratios["lorentz_ratio"]
        rows.append(row)
        logger.info("refinement study h=%g: %s", h, row)
    growth: Dict[str, float] = {}
    for key in rows[0]:
        if key == "h":
            continue
        series = np.array([row[key] for row in rows])
        if series.size > 1:
            growth[key] = float(np.max(series[1:] / series[:-1]))
    return RefinementStudy(rows, growth)


def comparison_check(form: FormMatrix, f1, f2, tol: float = DEFAULT_TOL) -> Dict[str, float]:
    """Solve for f1 <= f2 and report max(u1 - u2), which should not exceed 1e-10."""
    domain = form.domain
    a, b = _interior_values(domain, f1), _interior_values(domain, f2)
    if np.any(a > b):
        raise DomainError("comparison needs f1 <= f2 everywhere")
    u1 = solve_dirichlet(form, a, tol=tol).solution.interior
    u2 = solve_dirichlet(form, b, tol=tol).solution.interior
    violation = float(np.max(u1 - u2))
    return {"max_violation": violation, "ordered": float(violation <= 1e-10)}


# ---------------------------------------------------------------------------
# Semilinear problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceSpec:
    """f(t) = scale t^power for t > 0 (0 otherwise), or the constant `scale` when power is None."""

    power: Optional[float] = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise DomainError(f"source scale must be positive, got {self.scale}")
        if self.power is not None and not self.power > 0:
            raise DomainError(f"source power must be positive, got {self.power}")

    def f(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.power is None:
            return np.full_like(t, self.scale)
        return self.scale * np.maximum(t, 0.0) ** self.power

    def F(self, t: np.ndarray) -> np.ndarray:
        """Primitive with F(0) = 0."""
        t = np.asarray(t, dtype=float)
        if self.power is None:
            return self.scale * t
        return self.scale * np.maximum(t, 0.0) ** (self.power + 1.0) / (self.power + 1.0)


def _picard(
    form: FormMatrix,
    source: SourceSpec,
    start: np.ndarray,
    damping: float,
    tol: float,
    max_iter: int,
    track_monotone: bool = False,
) -> tuple:
    u = start.copy()
    monotone = True
    step = math.inf
    for iteration in range(1, max_iter + 1):
        target = solve_dirichlet(form, source.f(u), x0=u).solution.interior
        nxt = (1.0 - damping) * u + damping * target
        if track_monotone and np.any(nxt < u - 1e-10 * max(1.0, float(np.max(np.abs(u))))):
            monotone = False
        step = float(np.max(np.abs(nxt - u))) / max(1.0, float(np.max(np.abs(nxt))))
        u = nxt
        if step <= tol:
            return u, iteration, step, monotone
    raise ConvergenceError(f"sublinear iteration stagnated: step norm {step:.3g} after {max_iter} iterations", residual=step, iterations=max_iter)


def solve_sublinear(
    form: FormMatrix,
    source: SourceSpec,
    tol: float = 1e-8,
    damping: float = 0.5,
    max_iter: int = 2000,
    agreement: float = 1e-6,
) -> SolveReport:
    """
    Nonnegative solution of L u = f(u) in Omega, u = 0 outside, for sublinear f.

    A constant source is a single linear solve. For f(t) = c t^q, 0 < q < 1,
    damped Picard iteration runs from a subsolution below and from a large
    constant above; the two limits must agree.
    """
    domain = form.domain
    if source.power is None:
        report = solve_dirichlet(form, source.f(np.zeros(domain.n_interior)))
        report.notes.append("constant source: single linear solve")
        return report
    q, c = source.power, source.scale
    if not 0 < q < 1:
        raise DomainError(f"sublinear solver needs a power in (0, 1), got {q}")

    torsion = solve_dirichlet(form, 1.0).solution.interior
    if np.min(torsion) <= 0:
        raise ConvergenceError("torsion function is not positive; the form is not positivity preserving here")
    low = 0.5 * (c * np.min(torsion) ** q) ** (1.0 / (1.0 - q)) * torsion
    high_level = 2.0 * (c * np.max(torsion) ** q) ** (1.0 / (1.0 - q)) * np.max(torsion)
    high = np.full(domain.n_interior, high_level)

    u_low, it_low, step_low, monotone = _picard(form, source, low, damping, tol, max_iter, track_monotone=True)
    u_high, it_high, step_high, _ = _picard(form, source, high, damping, tol, max_iter)
    gap = float(np.max(np.abs(u_low - u_high))) / max(1.0, float(np.max(np.abs(u_low))))
    if gap > agreement:
        raise ConvergenceError(f"initializations disagree by {gap:.3g}", residual=gap, iterations=it_low + it_high)
    logger.info("sublinear solve: %d + %d iterations, gap %.3g", it_low, it_high, gap)

    u = GridFunction.from_interior(domain, np.maximum(u_low, 0.0))
    residual = float(np.linalg.norm(apply_L_discrete(form, u) - source.f(u.interior)))
    return SolveReport(
        u,
        residual,
        it_low + it_high,
        norms={
            "agreement": gap,
            "step": max(step_low, step_high),
            "monotone_from_below": float(monotone),
            "u_max": float(np.max(u.interior)),
        },
    )


def critical_exponent(dimension: int, sigma: float) -> float:
    """p_* = (N + sigma) / (N - sigma)."""
    if sigma >= dimension:
        raise HypothesisViolation(f"supercritical scaling exceeds dimension: sigma={sigma:g} >= N={dimension}")
    return (dimension + sigma) / (dimension - sigma)


def pohozaev_check(
    form: FormMatrix,
    u: GridFunction,
    source: SourceSpec,
    sigma: Optional[float] = None,
    slack: float = 5e-2,
) -> Dict[str, float]:
    """h^N sum u f(u) <= 2N / (N - sigma) h^N sum F(u), with p_* reported."""
    dim = form.domain.dimension
    sigma = scaling_sigma(form.kernel).sigma if sigma is None else float(sigma)
    p_star = critical_exponent(dim, sigma)
    vol = form.domain.cell_volume
    lhs = vol * float(np.sum(u.interior * source.f(u.interior)))
    rhs = 2.0 * dim / (dim - sigma) * vol * float(np.sum(source.F(u.interior)))
    return {"lhs": lhs, "rhs": rhs, "sigma": sigma, "p_star": p_star, "pass": bool(lhs <= rhs * (1.0 + slack))}


def supercritical_attempt(
    form: FormMatrix,
    power: float,
    scale: float = 1.0,
    max_iter: int = 200,
    blowup: float = 1e8,
    tol: float = 1e-8,
) -> Dict[str, object]:
    """
    Run the damped iteration for f(u) = scale u^power from the torsion function
    and report whether it blows up, collapses to 0 or settles.
    """
    sigma = scaling_sigma(form.kernel).sigma
    p_star = critical_exponent(form.domain.dimension, sigma)
    source = SourceSpec(power=power, scale=scale)
    u = solve_dirichlet(form, 1.0).solution.interior
    outcome = "undecided"
    iteration = 0
    for iteration in range(1, max_iter + 1):
        target = solve_dirichlet(form, source.f(u)).solution.interior
        nxt = 0.5 * (u + target)
        size = float(np.max(np.abs(nxt)))
        step = float(np.max(np.abs(nxt - u))) / max(1.0, size)
        u = nxt
        if size > blowup:
            outcome = "blow-up"
            break
        if size < 1e-12:
            outcome = "collapse"
            break
        if step <= tol:
            outcome = "stagnation"
            break
    result: Dict[str, object] = {"power": power, "p_star": p_star, "outcome": outcome, "iterations": iteration, "sup_norm": float(np.max(np.abs(u)))}
    if outcome != "blow-up":
        result["pohozaev"] = pohozaev_check(form, GridFunction.from_interior(form.domain, u), source, sigma=sigma)
    logger.info("supercritical attempt p=%g (p_*=%g): %s after %d iterations", power, p_star, outcome, iteration)
    return result


# ---------------------------------------------------------------------------
# Neumann problem
# ---------------------------------------------------------------------------


def solve_neumann(form: FormMatrix, f: Union[GridFunction, np.ndarray], tol: float = DEFAULT_TOL) -> SolveReport:
    """
    L u = f in Omega with N u = 0 on the shell; unknowns on interior and shell.

    The solution is unique up to constants and is returned with interior mean 0.
    Shell cells with no weight to Omega are set to 0.
    """
    domain = form.domain
    f_int = _interior_values(domain, f)
    vol = domain.cell_volume
    total = vol * float(np.sum(f_int))
    l1 = vol * float(np.sum(np.abs(f_int)))
    if abs(total) > 1e-10 * l1:
        raise IncompatibleDataError(f"incompatible data: integral of f is {total:.3g}, must vanish")
    if l1 == 0.0:
        return SolveReport(GridFunction.zeros(domain), 0.0, 0)
    matrix = neumann_matrix(form)
    active = np.where(np.diag(matrix) > 0)[0]
    rhs = np.concatenate([vol * f_int, np.zeros(domain.n_shell)])
    solution, residual, iterations, notes = _cg(matrix[np.ix_(active, active)], rhs[active], tol, None, project=True)
    values = np.zeros(domain.n_cells)
    values[active] = solution
    values[active] -= values[: domain.n_interior].mean()
    if active.size < domain.n_cells:
        logger.debug("neumann solve: %d shell cells carry no weight", domain.n_cells - active.size)
    norms = {"u_2": float(np.sqrt(vol * np.sum(values ** 2)))}
    return SolveReport(GridFunction(domain, values), residual, iterations, norms=norms, notes=notes)


def neumann_integration_by_parts(form: FormMatrix, u: GridFunction, v: GridFunction) -> Dict[str, float]:
    """h^N sum_Omega (L_h u) v + h^N sum_shell (N u) v against E(u, v)."""
    vol = form.domain.cell_volume
    lhs = vol * float(np.dot(apply_L_discrete(form, u), v.interior) + np.dot(apply_N(form, u), v.shell))
    return {"lhs": lhs, "rhs": energy(form, u, v)}


FAR_MULTIPLES = (2.0, 4.0, 8.0)


def _cell_masses(kernel: KernelSpec, domain: Domain, point: np.ndarray, order: int = 4) -> np.ndarray:
    """integral over each interior cell of K(point - y) dy, by tensor Gauss-Legendre."""
    nodes, weights = gauss_legendre(order)
    h = domain.h
    lower = domain.interior_index * h
    if domain.dimension == 1:
        ys = lower[:, :1] + h * nodes[None, :]
        vals = kernel.radial(np.abs(point[0] - ys))
        return h * vals @ weights
    gx = lower[:, 0, None, None] + h * nodes[None, :, None]
    gy = lower[:, 1, None, None] + h * nodes[None, None, :]
    dist = np.hypot(point[0] - gx, point[1] - gy)
    vals = kernel.radial(dist)
    return h * h * np.einsum("a,nab,b->n", weights, vals, weights)


def neumann_tail(kernel: KernelSpec, domain: Domain, u: GridFunction, multiples: Sequence[float] = FAR_MULTIPLES) -> Dict[str, np.ndarray]:
    """
    Exterior reconstruction u(x) = sum_j u_j w_xj / sum_j w_xj at the far points
    +-e_k m diam(Omega).

    `far_value` and `deviation` hold one column per far point (ordered +e_1, -e_1,
    +e_2, ...); deviation is |u(x) - mean| relative to max |u - mean|. The
    average over the far points and its deviation are returned as `far_values` and
    `mean_deviation`.
    """
    if not kernel.tail.has_power_tail:
        raise IncompatibleDataError("no stabilization limit: the kernel vanishes far from Omega")
    mean = float(np.mean(u.interior))
    spread = float(np.max(np.abs(u.interior - mean))) or 1.0
    diam = domain.diameter
    directions = []
    for axis in range(domain.dimension):
        for sign in (1.0, -1.0):
            direction = np.zeros(domain.dimension)
            direction[axis] = sign
            directions.append(direction)
    radii = np.array([m * diam for m in multiples])
    far = np.empty((radii.size, len(directions)))
    for i, radius in enumerate(radii):
        for k, direction in enumerate(directions):
            masses = _cell_masses(kernel, domain, radius * direction)
            far[i, k] = float(np.dot(masses, u.interior) / np.sum(masses))
    averaged = far.mean(axis=1)
    return {
        "radius": radii,
        "directions": np.array(directions),
        "far_value": far,
        "deviation": np.abs(far - mean) / spread,
        "far_values": averaged,
        "mean_deviation": np.abs(averaged - mean) / spread,
        "weighted_mean": np.array(mean),
    }
