"""
Uniform Cartesian grids covering a bounded shape plus its exterior shell.

Cells have centers (i + 1/2) h for integer multi-indices i. A cell is interior
when its center lies strictly inside Omega and belongs to the shell when its
center lies outside Omega within distance r_ext of it.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Union

import numpy as np

from .errors import DomainError
from .models import Ball, Box, Domain, GridFunction, Interval, QuasiBall, Shape

logger = logging.getLogger(__name__)


def _lattice(lower: np.ndarray, upper: np.ndarray, h: float) -> np.ndarray:
    """Integer indices of every cell whose center lies in the box [lower, upper]."""
    axes = [np.arange(math.floor(lo / h) - 1, math.ceil(hi / h) + 1, dtype=np.int64) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    # meshgrid with "ij" indexing already enumerates lexicographically.
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _lex_order(index: np.ndarray) -> np.ndarray:
    keys = tuple(index[:, k] for k in reversed(range(index.shape[1])))
    return np.lexsort(keys)


def quasi_ball_cells(n_cells: int, dimension: int, h: float) -> np.ndarray:
    """
    Integer indices of the n cells nearest the origin.

    Returned in radius order with lexicographic tie-breaks, which is also the
    order rearranged values are laid out in.
    """
    radius = (n_cells / (math.pi if dimension == 2 else 2.0)) ** (1.0 / dimension) * h + 2 * h
    index = _lattice(np.full(dimension, -radius), np.full(dimension, radius), h)
    centers = (index + 0.5) * h
    norms = np.round(np.linalg.norm(centers, axis=1) / h, 12)
    keys = tuple(index[:, k] for k in reversed(range(dimension))) + (norms,)
    order = np.lexsort(keys)
    if order.shape[0] < n_cells:
        raise DomainError("quasi-ball enumeration window too small")
    return index[order[:n_cells]]


def build_grid(shape: Shape, h: float, r_ext: float, rho: Optional[float] = None) -> Domain:
    """
    Enumerate interior and shell cells of `shape` for cell size h.

    When `rho` is given the shell must cover the kernel's singular range
    (r_ext >= rho). A grid with fewer than two interior cells, or with h larger
    than the inradius of the shape, is rejected as too coarse.
    """
    if not (h > 0 and math.isfinite(h)):
        raise DomainError(f"cell size h must be positive, got {h}")
    if not r_ext > 0:
        raise DomainError(f"r_ext must be positive, got {r_ext}")
    if rho is not None and r_ext < rho:
        raise DomainError(f"r_ext={r_ext:g} must be at least rho={rho:g}")

    if isinstance(shape, QuasiBall):
        geometry = shape.as_ball(h)
        interior = quasi_ball_cells(shape.n_cells, shape.dimension, h)
        interior = interior[_lex_order(interior)]
    else:
        geometry = shape
        interior = None

    dimension = geometry.dimension
    if geometry.inradius < h:
        raise DomainError(f"grid too coarse: h={h:g} exceeds the inradius {geometry.inradius:g} of the shape")

    lower, upper = geometry.bounds
    candidates = _lattice(lower - r_ext - h, upper + r_ext + h, h)
    centers = (candidates + 0.5) * h
    if interior is None:
        inside = geometry.contains(centers)
        interior = candidates[inside]
    else:
        member = {tuple(row) for row in interior.tolist()}
        inside = np.array([tuple(row) in member for row in candidates.tolist()], dtype=bool)
    outside = ~inside
    shell = candidates[outside & (geometry.exterior_distance(centers) <= r_ext)]

    if interior.shape[0] < 2:
        raise DomainError(f"grid too coarse: only {interior.shape[0]} interior cell(s) for h={h:g}")

    domain = Domain(
        shape=shape,
        h=float(h),
        r_ext=float(r_ext),
        interior_index=interior[_lex_order(interior)],
        shell_index=shell[_lex_order(shell)],
        geometry=geometry,
    )
    logger.debug(
        "grid built: N=%d, h=%g, %d interior, %d shell, |Omega|=%g",
        dimension,
        h,
        domain.n_interior,
        domain.n_shell,
        domain.measure,
    )
    return domain


def indicator(domain: Domain, subset: Optional[Union[Interval, Box, Ball]]) -> GridFunction:
    """1 on cells whose centers lie inside `subset`, 0 elsewhere (None is empty)."""
    if subset is None:
        return GridFunction.zeros(domain)
    if subset.dimension != domain.dimension:
        raise DomainError("subset and domain dimensions differ")
    values = subset.contains(domain.centers()).astype(float)
    return GridFunction(domain, values)


def boundary_distance(domain: Domain) -> GridFunction:
    """Distance from each cell center to the boundary of Omega."""
    return GridFunction(domain, domain.boundary_distance())


def radius_order(domain: Domain) -> np.ndarray:
    """Interior positions sorted by center radius, ties broken lexicographically."""
    index = domain.interior_index
    norms = np.round(np.linalg.norm(domain.centers("interior"), axis=1) / domain.h, 12)
    keys = tuple(index[:, k] for k in reversed(range(domain.dimension))) + (norms,)
    return np.lexsort(keys)


def refine(domain: Domain, factor: int = 2) -> Domain:
    """Same shape and shell width with h divided by `factor`."""
    return build_grid(domain.shape, domain.h / factor, domain.r_ext)
