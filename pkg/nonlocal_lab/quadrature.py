"""
Quadrature helpers on top of scipy.integrate.quad and Gauss-Legendre rules.

- integrate: adaptive quadrature with break points and an explicit error policy.
- graded_integral: geometric panels toward a singular endpoint.
- gauss_legendre / rect_integral: tensor Gauss-Legendre rules for smooth pieces.
- averaged_partial_sums: acceleration for alternating panel sums.
"""

from __future__ import annotations

# Standard library logging and caching helpers.
import logging
import math
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from .errors import QuadratureError

logger = logging.getLogger(__name__)

# quad may report trouble (ier != 0) yet land close to the target; beyond this
# factor of the requested tolerance the result is rejected.
HARD_FAILURE_FACTOR = 1e4
ABS_FLOOR = 1e-13


def _quad_piece(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    epsrel: float,
    epsabs: float,
    limit: int,
    what: str,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
) -> Tuple[float, float]:
    kwargs = {"epsrel": epsrel, "epsabs": epsabs, "limit": limit, "full_output": 1}
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
        if math.isinf(b):
            # QAWF takes only epsabs and limlst.
            kwargs = {"weight": weight, "wvar": wvar, "epsabs": max(epsabs, ABS_FLOOR), "full_output": 1, "limlst": 200}
    result = quad(f, a, b, **kwargs)
    value, abserr = float(result[0]), float(result[1])
    ier = 0
    message = ""
    if len(result) > 3:
        message = str(result[3])
        ier = 1
    target = max(epsabs, epsrel * abs(value), ABS_FLOOR)
    if not math.isfinite(value) or not math.isfinite(abserr):
        raise QuadratureError(f"{what}: non-finite result on [{a:g}, {b:g}]", achieved=abserr)
    if ier and abserr > HARD_FAILURE_FACTOR * target:
        raise QuadratureError(
            f"{what}: no convergence on [{a:g}, {b:g}], achieved {abserr:.3g} vs target {target:.3g} ({message.strip()[:80]})",
            achieved=abserr,
        )
    if ier:
        logger.debug("%s: quad warning on [%g, %g], err %.3g (%s)", what, a, b, abserr, message.strip()[:80])
    return value, abserr


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    epsrel: float = 1e-8,
    epsabs: float = 0.0,
    points: Optional[Iterable[float]] = None,
    limit: int = 200,
    what: str = "integral",
) -> Tuple[float, float]:
    """
    Adaptive quadrature of f over [a, b] (b may be inf), split at `points`.

    Returns (value, error estimate) and raises QuadratureError when quad fails by
    more than HARD_FAILURE_FACTOR times the requested tolerance.
    """
    cuts = sorted({float(p) for p in (points or []) if a < p < b})
    edges = [a] + cuts + [b]
    total = 0.0
    error = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err = _quad_piece(f, lo, hi, epsrel=epsrel, epsabs=epsabs, limit=limit, what=what)
        total += value
        error += err
    return total, error


def integrate_oscillatory(
    f: Callable[[float], float],
    a: float,
    omega: float,
    *,
    what: str = "oscillatory integral",
    epsabs: float = 1e-12,
) -> Tuple[float, float]:
    """integral from a to infinity of f(r) cos(omega r), by QAWF."""
    return _quad_piece(f, a, math.inf, epsrel=0.0, epsabs=epsabs, limit=200, what=what, weight="cos", wvar=omega)


def graded_integral(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    ratio: float = 0.5,
    epsrel: float = 1e-10,
    max_levels: int = 400,
    what: str = "graded integral",
) -> float:
    """
    Integrate f over (a, b] with panels graded geometrically toward a.

    Panel k is [a + (b-a) ratio^(k+1), a + (b-a) ratio^k]. Panels are added until
    one contributes less than epsrel times the running total; the remainder is
    then estimated from the last two panels as a geometric series.
    """
    width = b - a
    total = 0.0
    previous = None
    for level in range(max_levels):
        hi = a + width * ratio ** level
        lo = a + width * ratio ** (level + 1)
        panel, _ = _quad_piece(f, lo, hi, epsrel=epsrel, epsabs=0.0, limit=100, what=what)
        total += panel
        if abs(panel) <= epsrel * abs(total) and level > 2:
            if previous and abs(previous) > 0:
                q = panel / previous
                if 0 <= q < 1:
                    total += panel * q / (1 - q)
            return total
        previous = panel
    raise QuadratureError(
        f"{what}: graded panels still contribute {abs(previous or 0.0):.3g} after {max_levels} levels",
        achieved=abs(previous or 0.0),
    )


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    nodes, weights = roots_legendre(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def line_integral(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, order: int = 20) -> float:
    """Fixed-order Gauss-Legendre rule for a smooth vectorized f on [a, b]."""
    nodes, weights = gauss_legendre(order)
    x = a + (b - a) * nodes
    return float((b - a) * np.dot(weights, f(x)))


def rect_integral(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x0: float,
    x1: float,
    y0: float,
    y1: float,
    order: int = 8,
) -> float:
    """Tensor Gauss-Legendre rule over the rectangle [x0, x1] x [y0, y1]."""
    nodes, weights = gauss_legendre(order)
    xs = x0 + (x1 - x0) * nodes
    ys = y0 + (y1 - y0) * nodes
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    values = f(grid_x, grid_y)
    return float((x1 - x0) * (y1 - y0) * weights @ values @ weights)


def averaged_partial_sums(panels: Sequence[float], rounds: int = 12) -> float:
    """
    Limit of an alternating series of panel integrals.

    Repeated averaging of consecutive partial sums removes the oscillation of the
    partial sums geometrically fast for slowly varying amplitudes.
    """
    partial = np.cumsum(np.asarray(panels, dtype=float))
    rounds = min(rounds, partial.shape[0] - 1)
    for _ in range(rounds):
        partial = 0.5 * (partial[:-1] + partial[1:])
    return float(partial[-1])
