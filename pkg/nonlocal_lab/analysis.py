"""
Rearrangements and Lorentz-type norms of grid functions.

- rearrange: decreasing rearrangement onto the quasi-ball of equal measure.
- distribution_profile: mu(t) = |{|u| > t}| of a piecewise constant function.
- lorentz_weight / identity_weight: the weights A(s) used by lorentz_norm.
- lorentz_norm: (p integral_0^inf A(mu(t)) t^(p-1) dt)^(1/p), evaluated exactly.
- sharpness_trend: a function in L^p whose weighted norm grows as h shrinks.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .domain import build_grid, quasi_ball_cells, radius_order
from .errors import DomainError
from .kernels import mass_M
from .models import (
    Domain,
    DistributionProfile,
    GridFunction,
    KernelSpec,
    LorentzWeight,
    QuasiBall,
    ball_volume,
)

logger = logging.getLogger(__name__)

# Smallest argument handed to M, as a fraction of rho.
MASS_FLOOR = 1e-12


def distribution_profile(u: GridFunction) -> DistributionProfile:
    """Distribution data of |u| over the interior cells."""
    values = np.sort(np.abs(u.interior))[::-1]
    return DistributionProfile(values=values, cell_measure=u.domain.cell_volume)


def rearrangement_target(domain: Domain) -> Domain:
    """Quasi-ball grid with the same cell size, cell count and shell width."""
    return build_grid(QuasiBall(domain.n_interior, domain.dimension), domain.h, domain.r_ext)


def rearrange(u: GridFunction, target: Optional[Domain] = None) -> Tuple[GridFunction, DistributionProfile]:
    """
    Decreasing rearrangement u* of |u|.

    The sorted values of |u| are laid out on the quasi-ball cells in order of
    increasing center radius, so u* and u share the same multiset of values.
    """
    target = rearrangement_target(u.domain) if target is None else target
    if target.n_interior != u.domain.n_interior or target.h != u.domain.h:
        raise DomainError("rearrangement target must have the same cell size and cell count")
    profile = distribution_profile(u)
    values = np.zeros(target.n_interior)
    values[radius_order(target)] = profile.values
    return GridFunction.from_interior(target, values), profile


def identity_weight(measure: float) -> LorentzWeight:
    """A(s) = s."""
    return LorentzWeight.identity_weight(measure)


def lorentz_weight(kernel: KernelSpec, measure: float, h: float) -> LorentzWeight:
    """
    A(s) built from psi(x) = M(rho |x| / R), R = (|Omega| / omega_N)^(1/N).

    psi is sampled at the quasi-ball cell centers in radius order. A is the
    cumulative trapezoid of the step density equal to psi_k on the k-th cell
    of measure, so A(k h^N) = h^N sum_{j <= k} psi_j.
    """
    dim = kernel.dimension
    n_cells = int(round(measure / h ** dim))
    if n_cells < 1:
        raise DomainError(f"measure {measure:g} holds no cell of size {h:g}")
    exact = n_cells * h ** dim
    big_r = (exact / ball_volume(dim)) ** (1.0 / dim)
    centers = (quasi_ball_cells(n_cells, dim, h) + 0.5) * h
    radii = np.linalg.norm(centers, axis=1)
    rho = kernel.rho
    psi = np.asarray(mass_M(kernel, np.clip(rho * radii / big_r, MASS_FLOOR * rho, rho)), dtype=float).reshape(-1)
    nodes = h ** dim * np.arange(n_cells + 1)
    # Each cell is a flat segment [s_(k-1), s_k]; zero-width joins carry the jumps.
    x = np.repeat(nodes, 2)[1:-1]
    y = np.repeat(psi, 2)
    values = np.concatenate([[0.0], cumulative_trapezoid(y, x)[::2]])
    return LorentzWeight(nodes=nodes, values=values, psi=psi, radii=radii)


def lorentz_norm(u: GridFunction, weight: LorentzWeight, p: float = 2.0) -> float:
    """
    ||u||_{A,p} for piecewise constant u.

    With |u| sorted as v_1 >= ... >= v_n and v_{n+1} = 0, mu equals k h^N on
    (v_{k+1}, v_k), which gives ||u||^p = sum_k A(k h^N) (v_k^p - v_{k+1}^p).
    """
    if p < 1:
        raise DomainError(f"p must be at least 1, got {p}")
    profile = distribution_profile(u)
    v = profile.values
    if v.size == 0 or v[0] == 0.0:
        return 0.0
    powered = v ** p
    drops = powered - np.append(powered[1:], 0.0)
    measures = profile.cell_measure * np.arange(1, v.size + 1)
    total = float(np.sum(weight(measures) * drops))
    return total ** (1.0 / p)


def weighted_lp(u: GridFunction, psi: np.ndarray, p: float = 2.0) -> float:
    """(h^N sum |u|^p psi)^(1/p) over interior cells."""
    return float((u.domain.cell_volume * np.sum(np.abs(u.interior) ** p * psi)) ** (1.0 / p))


def sharpness_trend(
    kernel: KernelSpec,
    hs: Sequence[float],
    p: float = 2.0,
    nu: float = 1.5,
    radius: float = 1.0,
) -> Dict[str, np.ndarray]:
    """
    Norms of u = v^(1/p), v(s) = -psi'(s) / (s^(N-1) psi(s)^nu), on shrinking grids.

    v is cut off at s = radius/2. Its L^p norm stays bounded as h -> 0 while the
    A-weighted norm keeps growing, because A'(0+) is infinite.
    """
    dim = kernel.dimension
    rho = kernel.rho
    measure = ball_volume(dim) * radius ** dim
    rows = {"h": [], "lp": [], "lorentz": []}
    for h in hs:
        n_cells = int(round(measure / h ** dim))
        domain = build_grid(QuasiBall(n_cells, dim), h, max(rho, h))
        weight = lorentz_weight(kernel, domain.measure, h)
        big_r = (domain.measure / ball_volume(dim)) ** (1.0 / dim)

        def field(points: np.ndarray) -> np.ndarray:
            s = np.linalg.norm(points, axis=1)
            inner = s < 0.5 * big_r
            arg = np.clip(rho * s / big_r, MASS_FLOOR * rho, rho)
            psi = np.asarray(mass_M(kernel, arg), dtype=float)
            ell = kernel.profile(arg)
            with np.errstate(divide="ignore", invalid="ignore"):
                v = ell / (s ** dim * psi ** nu)
            return np.where(inner, v, 0.0) ** (1.0 / p)

        u = GridFunction.from_callable(domain, field)
        rows["h"].append(h)
        rows["lp"].append(u.norm_p(p))
        rows["lorentz"].append(lorentz_norm(u, weight, p))
        logger.info("sharpness trend: h=%g, ||u||_p=%.6g, ||u||_A,p=%.6g", h, rows["lp"][-1], rows["lorentz"][-1])
    out = {key: np.asarray(val, dtype=float) for key, val in rows.items()}
    out["growth"] = out["lorentz"][1:] / out["lorentz"][:-1]
    return out
