"""
Acceptance suite behind the `report` subcommand.

Each item builds its own small kernel and grid, computes the quantity it is
about and returns {"name", "value", "pass", ...}. Items share nothing but the
seed settings, so the suite is deterministic for a fixed master seed.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List

import numpy as np

from .domain import build_grid
from .errors import HypothesisViolation, IncompatibleDataError
from .forms import PairWeights, assemble, energy, apply_L_discrete
from .kernels import multiplier_lower_constant, multiplier_m, scaling_sigma
from .models import Ball, EllSpec, GridFunction, Interval, KernelSpec, TailSpec, pure_power
from .random_fields import random_grid_function, stream
from .solve import (
    SourceSpec,
    critical_exponent,
    neumann_integration_by_parts,
    neumann_tail,
    pohozaev_check,
    refinement_study,
    solve_dirichlet,
    solve_neumann,
    solve_sublinear,
)
from .spectral import berezin_bound, dirichlet_eigen, spectral_apply
from .verify import CheckContext, verify_batch

logger = logging.getLogger(__name__)

Item = Dict[str, object]


def _kernel(ell: EllSpec, tail: TailSpec = TailSpec.zero(), dimension: int = 1) -> KernelSpec:
    return KernelSpec(dimension=dimension, ell=ell, tail=tail)


CONSTANT = EllSpec.constant(1.0)
LOG_POW = EllSpec.log_pow(1.0)
POWER_TAIL = TailSpec.power_decay(0.5)


def _item(name: str, value: float, passed: bool, **extra) -> Item:
    return {"name": name, "value": float(value), "pass": bool(passed), **extra}


def energy_oracle(seeds: int, master_seed: int) -> Item:
    kernel = _kernel(EllSpec.constant(1.0, rho=0.25))
    domain = build_grid(Interval(0.0, 1.0), 1.0 / 16, 0.25)
    form = assemble(domain, kernel)
    worst = 0.0
    n_int = domain.n_interior
    for index in range(min(seeds, 20)):
        u = random_grid_function(domain, "energy_oracle", index, master_seed)
        values = u.values
        brute = 0.0
        for i in range(n_int):
            for j in range(domain.n_cells):
                if j < n_int and j <= i:
                    continue
                brute += (values[i] - values[j]) ** 2 * form.weights[i, j]
            brute += form.tail[i] * values[i] ** 2
        worst = max(worst, abs(brute - energy(form, u)))
    return _item("energy_oracle", worst, worst <= 1e-12)


def adjacent_weight() -> Item:
    kernel = _kernel(CONSTANT)
    errors = []
    for h in (1 / 8, 1 / 16, 1 / 32):
        exact = 2 * h * math.log(2.0)
        errors.append(abs(PairWeights(kernel, h).weight((1,)) - exact) / exact)
    worst = max(errors)
    return _item("adjacent_weight", worst, worst <= 1e-8)


def exterior_mass_profile() -> Item:
    h = 1.0 / 16
    domain = build_grid(Interval(-1.0, 1.0), h, 1.0)
    form = assemble(domain, _kernel(CONSTANT))
    x = domain.centers("interior")[:, 0]
    lam = form.exterior_mass
    exact = -np.log(1.0 - np.abs(x))
    nearest = int(np.argmin(np.abs(x - 0.5)))
    point_error = abs(lam[nearest] - math.log(2.0))
    profile_error = float(np.max(np.abs(lam - exact) / exact))
    passed = point_error <= max(1e-6, 2 * h) and profile_error <= 3 * h
    return _item("exterior_mass_profile", profile_error, passed, point_error=point_error)


def _batch_item(name: str, check: str, contexts: List[CheckContext], seeds: int, master_seed: int, tol: float) -> Item:
    results = [verify_batch(check, ctx, seeds, master_seed, tol=tol) for ctx in contexts]
    min_ratio = min(r.min_ratio for r in results)
    rate = min(r.pass_rate for r in results)
    return _item(name, min_ratio, rate == 1.0, pass_rate=rate)


def _contexts(kernels, shapes) -> List[CheckContext]:
    out = []
    for kernel in kernels:
        for shape, h in shapes:
            k = KernelSpec(dimension=shape.dimension, ell=kernel.ell, tail=kernel.tail)
            out.append(CheckContext(assemble(build_grid(shape, h, k.rho), k)))
    return out


SHAPES = ((Interval(-1.0, 1.0), 1.0 / 16), (Ball(1.0, 2), 0.2))


def poincare(seeds: int, master_seed: int) -> Item:
    contexts = _contexts([_kernel(CONSTANT), _kernel(LOG_POW, POWER_TAIL)], SHAPES)
    return _batch_item("poincare", "poincare", contexts, seeds, master_seed, 1e-12)


def contractions(seeds: int, master_seed: int) -> Item:
    contexts = _contexts([_kernel(CONSTANT)], SHAPES[:1])
    sv = _batch_item("stroock_varopoulos", "stroock_varopoulos", contexts, seeds, master_seed, 1e-12)
    absolute = _batch_item("absolute_value", "absolute_value", contexts, seeds, master_seed, 1e-12)
    return _item(
        "stroock_varopoulos_absolute_value",
        min(sv["value"], absolute["value"]),
        sv["pass"] and absolute["pass"],
        pass_rate=min(sv["pass_rate"], absolute["pass_rate"]),
    )


def symmetrization(seeds: int, master_seed: int) -> Item:
    contexts = _contexts([_kernel(CONSTANT), _kernel(LOG_POW)], SHAPES)
    return _batch_item("symmetrization", "symmetrization", contexts, seeds, master_seed, 5e-2)


def hardy_origin(seeds: int, master_seed: int) -> Item:
    # Grids of spacing 1/16 and 1/32 compare against the constants of 1/8 and 1/16.
    constants = []
    raw = math.inf
    all_pass = True
    for h in (1.0 / 16, 1.0 / 32):
        ctx = CheckContext(assemble(build_grid(Interval(-1.0, 1.0), h, 1.0), _kernel(CONSTANT)))
        result = verify_batch("hardy_origin", ctx, seeds, master_seed)
        constants.append(ctx.constants["hardy_origin_coarse"])
        raw = min(raw, min(r.details["raw_ratio"] for r in result.reports))
        all_pass = all_pass and result.pass_rate == 1.0
    drift = abs(constants[1] / constants[0] - 1.0)
    passed = constants[-1] > 0 and drift <= 0.2 and raw > 0 and all_pass
    return _item("hardy_origin", constants[-1], passed, drift=drift, raw_infimum=raw)


def multiplier_law() -> Item:
    slopes = {}
    for alpha in (0.3, 0.7):
        kernel = pure_power(1, alpha)
        slopes[alpha] = math.log(multiplier_m(kernel, 100.0) / multiplier_m(kernel, 10.0)) / math.log(10.0)
    slope_error = max(abs(slopes[a] - a) / a for a in slopes)
    lower = multiplier_lower_constant(_kernel(CONSTANT))
    return _item("multiplier_law", slope_error, slope_error <= 0.02 and lower > 0, lower_constant=lower)


def berezin() -> Item:
    kernel = _kernel(CONSTANT, POWER_TAIL)
    domain = build_grid(Interval(-1.0, 1.0), 1.0 / 16, 1.0)
    lam1 = float(dirichlet_eigen(assemble(domain, kernel), 1).eigenvalues[0])
    bound = berezin_bound(kernel, domain)
    return _item("berezin", lam1 / bound.bound, lam1 >= bound.bound * (1 - 1e-3) and bound.condition_ok, bound=bound.bound, lambda_1=lam1)


def spectral_calculus(seeds: int, master_seed: int) -> Item:
    form = assemble(build_grid(Interval(-1.0, 1.0), 1.0 / 16, 1.0), _kernel(CONSTANT))
    dec = dirichlet_eigen(form)
    worst = 0.0
    for index in range(min(seeds, 50)):
        u = random_grid_function(form.domain, "spectral_calculus", index, master_seed)
        e = energy(form, u)
        parseval = float(np.sum(dec.eigenvalues * dec.coefficients(u) ** 2))
        half = spectral_apply(dec, spectral_apply(dec, u, 0.5), 0.5).interior
        full = apply_L_discrete(form, u)
        worst = max(worst, abs(parseval - e) / e, float(np.max(np.abs(half - full)) / np.max(np.abs(full))))
    return _item("spectral_calculus", worst, worst <= 1e-8)


def dirichlet_solver() -> Item:
    kernel = _kernel(CONSTANT)
    form = assemble(build_grid(Interval(-1.0, 1.0), 1.0 / 16, 1.0), kernel)
    dec = dirichlet_eigen(form, 1)
    phi = dec.eigenfunction(0)
    u = solve_dirichlet(form, dec.eigenvalues[0] * phi.interior).solution
    recover = float(np.max(np.abs(u.interior - phi.interior)))
    f = np.ones(form.domain.n_interior)
    v = solve_dirichlet(form, f).solution
    identity = abs(energy(form, v) - form.domain.cell_volume * float(np.dot(f, v.interior))) / energy(form, v)
    study = refinement_study(kernel, Interval(-1.0, 1.0), (1 / 16, 1 / 32, 1 / 64), lambda x: np.ones(x.shape[0]))
    growth = max(study.worst_growth.values())
    return _item("dirichlet_solver", max(recover, identity), recover <= 1e-8 and identity <= 1e-9 and study.bounded(1.1), worst_growth=growth)


def sublinear() -> Item:
    configs = [
        _kernel(CONSTANT, POWER_TAIL),
        _kernel(LOG_POW, POWER_TAIL),
        KernelSpec(dimension=1, ell=EllSpec.constant(1.0), tail=TailSpec.piecewise_power(0.5, 0.5)),
    ]
    source = SourceSpec(power=0.5)
    gaps, nonneg, pohozaev_ok = [], True, True
    skipped: Dict[str, str] = {}
    for k, kernel in enumerate(configs):
        form = assemble(build_grid(Interval(-1.0, 1.0), 1.0 / 16, 1.0), kernel)
        report = solve_sublinear(form, source)
        gaps.append(report.norms["agreement"])
        nonneg = nonneg and bool(np.min(report.solution.interior) >= 0)
        try:
            pohozaev_ok = pohozaev_ok and pohozaev_check(form, report.solution, source)["pass"]
        except HypothesisViolation as exc:
            # No critical exponent when sigma reaches the dimension.
            skipped[f"config_{k}"] = str(exc)
    p_star = critical_exponent(1, scaling_sigma(configs[2]).sigma)
    worst = max(gaps)
    return _item("sublinear", worst, worst <= 1e-6 and nonneg and pohozaev_ok and abs(p_star - 3.0) <= 1e-3, p_star=p_star, pohozaev_skipped=skipped)


def neumann(seeds: int, master_seed: int) -> Item:
    kernel = _kernel(CONSTANT, POWER_TAIL)
    form = assemble(build_grid(Interval(-1.0, 1.0), 1.0 / 16, 1.0), kernel)
    n_int = form.domain.n_interior
    zero_ok = float(np.max(np.abs(solve_neumann(form, np.zeros(n_int)).solution.values))) == 0.0
    try:
        solve_neumann(form, np.ones(n_int))
        rejected = False
    except IncompatibleDataError:
        rejected = True
    worst = 0.0
    for index in range(min(seeds, 20)):
        # Both functions carry shell values here.
        rng = stream(master_seed, "neumann_ibp", index)
        u = GridFunction(form.domain, rng.standard_normal(form.domain.n_cells))
        v = GridFunction(form.domain, rng.standard_normal(form.domain.n_cells))
        sides = neumann_integration_by_parts(form, u, v)
        worst = max(worst, abs(sides["lhs"] - sides["rhs"]) / max(abs(sides["rhs"]), 1e-300))
    f = random_grid_function(form.domain, "neumann_tail", 0, master_seed).interior
    solution = solve_neumann(form, f - f.mean()).solution
    tail = neumann_tail(kernel, form.domain, solution)
    per_point = tail["deviation"]
    averaged = tail["mean_deviation"]
    # Every far point must settle on its own, not only their average.
    decreasing = bool(np.all(np.diff(per_point, axis=0) <= 0))
    passed = zero_ok and rejected and worst <= 1e-9 and averaged[-1] < 0.02 and decreasing
    return _item(
        "neumann",
        float(averaged[-1]),
        passed,
        ibp_error=worst,
        worst_point_deviation=float(per_point[-1].max()),
    )


def scaling_exponent() -> Item:
    errors = []
    for alpha in (0.3, 0.7):
        errors.append(abs(scaling_sigma(pure_power(1, alpha)).sigma - alpha))
    mixed = KernelSpec(dimension=1, ell=EllSpec.constant(1.0), tail=TailSpec.piecewise_power(0.3, 0.7))
    mixed_error = abs(scaling_sigma(mixed).sigma - 0.7)
    return _item("scaling_exponent", max(errors), max(errors) <= 1e-4 and mixed_error <= 1e-3, mixed_error=mixed_error)


def acceptance_items(seeds: int, master_seed: int) -> List[Callable[[], Item]]:
    return [
        lambda: energy_oracle(seeds, master_seed),
        adjacent_weight,
        exterior_mass_profile,
        lambda: poincare(seeds, master_seed),
        lambda: contractions(seeds, master_seed),
        lambda: symmetrization(seeds, master_seed),
        lambda: hardy_origin(seeds, master_seed),
        multiplier_law,
        berezin,
        lambda: spectral_calculus(seeds, master_seed),
        dirichlet_solver,
        sublinear,
        lambda: neumann(seeds, master_seed),
        scaling_exponent,
    ]


def run_acceptance(seeds: int, master_seed: int) -> Dict[str, object]:
    """Run every item; the payload lists them in a fixed order."""
    items = []
    for build in acceptance_items(seeds, master_seed):
        item = build()
        logger.info("acceptance item %s: value=%.6g pass=%s", item["name"], item["value"], item["pass"])
        items.append(item)
    return {
        "items": items,
        "passed": sum(1 for item in items if item["pass"]),
        "total": len(items),
        "seeds": seeds,
        "master_seed": master_seed,
    }
