"""
Discrete Dirichlet form and operator applications.

- assemble: pair weights w_ij over cell pairs plus the exterior tail beyond the shell.
- energy: full, censored and global bilinear forms of grid functions.
- stiffness_matrix / neumann_matrix: matrices behind the energies.
- apply_L_discrete / apply_N: discrete operator and nonlocal normal derivative.
- j_perimeter: the J-perimeter of a subset with its finiteness diagnostic.
- apply_L / hardy_witness: pointwise principal values for smooth callables.
"""

from __future__ import annotations

# Standard library concurrency, environment and typing helpers.
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Union

import numpy as np

from .domain import indicator
from .errors import DomainError, QuadratureError
from .kernels import ModulusIntegral, mass_M, modulus_integral, radial_tail_mass
from .models import Ball, Box, Domain, FormMatrix, GridFunction, Interval, KernelSpec, TailVariant
from .quadrature import graded_integral, integrate, rect_integral

logger = logging.getLogger(__name__)

# Dyadic layers toward the singular corner of an adjacent pair.
GRADING_LEVELS = 30
# Gauss-Legendre order on each smooth rectangle.
RECT_ORDER = 10
# Quadtree depth used where a rectangle crosses |z| = rho.
CIRCLE_DEPTH = 6


def thread_count() -> int:
    """Worker cap for assembly, from NONLOCAL_THREADS (default 1)."""
    raw = os.environ.get("NONLOCAL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("NONLOCAL_THREADS=%r is not an integer; using 1", raw)
        return 1


class PairWeights:
    """
    Weights w(d) = integral of K(z) prod_k (h - |z_k - d_k h|)_+ dz for integer
    offsets d, which equal the double integral of J over two cells d apart.
    Results are cached by canonical offset (sorted absolute values).
    """

    def __init__(self, kernel: KernelSpec, h: float, order: int = RECT_ORDER):
        self.kernel = kernel
        self.h = h
        self.order = order
        self.log = logging.getLogger(self.__class__.__name__)
        self._cache: Dict[tuple, float] = {}

    def weight(self, key: tuple) -> float:
        if key in self._cache:
            return self._cache[key]
        if not any(key):
            value = 0.0
        elif len(key) == 1:
            value = self._weight_1d(key[0])
        else:
            value = self._weight_2d(key[0], key[1])
        self._cache[key] = value
        return value

    # -- one dimension -----------------------------------------------------

    def _weight_1d(self, d: int) -> float:
        h, rho = self.h, self.kernel.rho
        kernel = self.kernel
        lo = (d - 1) * h
        if kernel.tail.variant == TailVariant.ZERO and lo >= rho:
            return 0.0
        mid, hi = d * h, (d + 1) * h
        total = 0.0
        rising = lambda z: float(kernel.radial(z)) * (z - lo)
        falling = lambda z: float(kernel.radial(z)) * (hi - z)
        what = f"pair weight at offset {d}"
        if d == 1:
            # z K(z) = l(z) near 0: grade toward the shared endpoint.
            cut = min(h, rho)
            total += graded_integral(lambda z: float(kernel.profile(z)), 0.0, cut, epsrel=1e-12, what=what)
            if cut < h:
                total += integrate(rising, cut, h, epsrel=1e-12, points=[rho], what=what)[0]
        else:
            total += integrate(rising, lo, mid, epsrel=1e-12, points=[rho], what=what)[0]
        total += integrate(falling, mid, hi, epsrel=1e-12, points=[rho], what=what)[0]
        return total

    # -- two dimensions ----------------------------------------------------

    def _integrand(self, wx: Callable[[np.ndarray], np.ndarray], wy: Callable[[np.ndarray], np.ndarray]):
        kernel = self.kernel

        def f(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return kernel.radial(np.hypot(x, y)) * wx(x) * wy(y)

        return f

    def _smooth_rect(self, f, x0: float, x1: float, y0: float, y1: float, depth: int = 0) -> float:
        rho = self.kernel.rho
        xs, ys = (x0, x1), (y0, y1)
        near_x = 0.0 if x0 <= 0.0 <= x1 else min(abs(x0), abs(x1))
        near_y = 0.0 if y0 <= 0.0 <= y1 else min(abs(y0), abs(y1))
        nearest = math.hypot(near_x, near_y)
        farthest = max(math.hypot(a, b) for a in xs for b in ys)
        if self.kernel.tail.variant == TailVariant.ZERO and nearest >= rho:
            return 0.0
        if nearest < rho < farthest and depth < CIRCLE_DEPTH:
            mx, my = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            return sum(
                self._smooth_rect(f, a0, a1, b0, b1, depth + 1)
                for a0, a1 in ((x0, mx), (mx, x1))
                for b0, b1 in ((y0, my), (my, y1))
            )
        return rect_integral(f, x0, x1, y0, y1, order=self.order)

    def _graded_rect(self, f, x0: float, x1: float, y0: float, y1: float) -> float:
        # The origin is a corner of the rectangle; peel dyadic L-shaped layers.
        cx = x0 if abs(x0) < abs(x1) else x1
        cy = y0 if abs(y0) < abs(y1) else y1
        total = 0.0
        previous = None
        layer = 0.0
        for _ in range(GRADING_LEVELS):
            mx, my = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            children = [((a0, a1), (b0, b1)) for a0, a1 in ((x0, mx), (mx, x1)) for b0, b1 in ((y0, my), (my, y1))]
            layer = 0.0
            for (a0, a1), (b0, b1) in children:
                if cx in (a0, a1) and cy in (b0, b1):
                    x0, x1, y0, y1 = a0, a1, b0, b1
                    continue
                layer += self._smooth_rect(f, a0, a1, b0, b1)
            total += layer
            if previous is not None and previous > 0 and layer <= 1e-13 * total:
                break
            previous = layer
        if previous and 0 < layer < previous:
            q = layer / previous
            total += layer * q / (1 - q)
        return total

    def _weight_2d(self, a: int, b: int) -> float:
        h = self.h
        total = 0.0
        for x0, x1, wx in self._pieces(a):
            for y0, y1, wy in self._pieces(b):
                f = self._integrand(wx, wy)
                corner = (x0 == 0.0 or x1 == 0.0) and (y0 == 0.0 or y1 == 0.0)
                if corner:
                    total += self._graded_rect(f, x0, x1, y0, y1)
                else:
                    total += self._smooth_rect(f, x0, x1, y0, y1)
        return total

    def _pieces(self, d: int):
        h = self.h
        lo, mid, hi = (d - 1) * h, d * h, (d + 1) * h
        return (
            (lo, mid, lambda t, lo=lo: t - lo),
            (mid, hi, lambda t, hi=hi: hi - t),
        )


def _check_pair_integrable(domain: Domain, kernel: KernelSpec) -> None:
    if kernel.fractional_core and kernel.tail.alpha1 >= 1.0:
        index = domain.interior_index
        # Name the first interior cell and its right neighbour.
        first = tuple(int(v) for v in index[0])
        neighbour = tuple(int(v) + (1 if k == 0 else 0) for k, v in enumerate(index[0]))
        raise QuadratureError(
            f"pair weight for adjacent cells {first} and {neighbour} diverges: alpha1={kernel.tail.alpha1:g} >= 1"
        )


def _offset_keys(domain: Domain) -> tuple:
    n_int = domain.n_interior
    index = domain.cell_index
    diff = np.abs(domain.interior_index[:, None, :].astype(np.int32) - index[None, :, :].astype(np.int32))
    if domain.dimension == 1:
        keys = diff[..., 0]
        return keys, [(int(k),) for k in np.unique(keys)], np.unique(keys)
    hi = diff.max(axis=2)
    lo = diff.min(axis=2)
    base = int(hi.max()) + 1
    codes = hi * base + lo
    unique = np.unique(codes)
    return codes, [(int(c // base), int(c % base)) for c in unique], unique


def _exterior_tail_1d(domain: Domain, kernel: KernelSpec) -> np.ndarray:
    h = domain.h
    index = domain.cell_index[:, 0]
    left, right = index.min() * h, (index.max() + 1) * h
    rho = kernel.rho

    def one_sided(s: float) -> float:
        return 0.5 * float(radial_tail_mass(kernel, max(s, 1e-300)))

    out = np.empty(domain.n_interior)
    for k, x_lo in enumerate(domain.interior_index[:, 0] * h):
        x_hi = x_lo + h
        value, _ = integrate(
            lambda x: one_sided(right - x) + one_sided(x - left),
            x_lo,
            x_hi,
            epsrel=1e-12,
            points=[right - rho, left + rho],
            what="exterior tail",
        )
        out[k] = value
    return out


def _exterior_tail_2d(domain: Domain, kernel: KernelSpec) -> tuple:
    h = domain.h
    vol = domain.cell_volume
    centers = domain.centers("interior")
    near = domain.geometry.boundary_distance(centers)
    far = domain.geometry.farthest_distance(centers)
    slack = h * math.sqrt(2.0)
    upper = vol * np.asarray(radial_tail_mass(kernel, np.maximum(near + domain.r_ext - slack, 1e-12)))
    lower = vol * np.asarray(radial_tail_mass(kernel, far + domain.r_ext + slack))
    return 0.5 * (upper + lower), 0.5 * (upper - lower)


def assemble(domain: Domain, kernel: KernelSpec, threads: Optional[int] = None) -> FormMatrix:
    """
    Assemble the discrete form of `kernel` on `domain`.

    Pairs of two shell cells are never computed. In 1D the mass beyond the shell
    is integrated exactly; in 2D it is bracketed between two radial tail masses
    and the half-width is reported as uncertainty.
    """
    if domain.dimension != kernel.dimension:
        raise DomainError(f"kernel dimension {kernel.dimension} does not match domain dimension {domain.dimension}")
    if domain.r_ext < kernel.rho:
        raise DomainError(f"r_ext={domain.r_ext:g} must be at least rho={kernel.rho:g}")
    _check_pair_integrable(domain, kernel)

    n_int, n = domain.n_interior, domain.n_cells
    codes, keys, unique = _offset_keys(domain)
    weights_for = PairWeights(kernel, domain.h)
    workers = threads or thread_count()

    def compute(key: tuple) -> float:
        try:
            return weights_for.weight(key)
        except QuadratureError as exc:
            raise QuadratureError(f"cell offset {key}: {exc}", achieved=exc.achieved) from exc

    logger.info("assembling %d interior x %d cells, %d distinct offsets, %d worker(s)", n_int, n, len(keys), workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.array(list(pool.map(compute, keys)))
    else:
        values = np.array([compute(key) for key in keys])

    block = values[np.searchsorted(unique, codes)]
    block[np.arange(n_int), np.arange(n_int)] = 0.0
    weights = np.zeros((n, n))
    weights[:n_int, :] = block
    weights[n_int:, :n_int] = block[:, n_int:].T

    if domain.dimension == 1:
        tail = _exterior_tail_1d(domain, kernel)
        uncertainty = np.zeros(n_int)
    else:
        tail, uncertainty = _exterior_tail_2d(domain, kernel)
        if np.any(uncertainty > 0):
            logger.info("exterior tail uncertainty up to %.3g per cell", float(np.max(uncertainty)))
    return FormMatrix(kernel=kernel, domain=domain, weights=weights, tail=tail, tail_uncertainty=uncertainty)


# ---------------------------------------------------------------------------
# Energies and matrices
# ---------------------------------------------------------------------------


def _same_domain(form: FormMatrix, *functions: GridFunction) -> None:
    for fn in functions:
        if not form.domain.same_grid(fn.domain):
            raise DomainError("grid function lives on a different domain than the form")


def stiffness_matrix(form: FormMatrix) -> np.ndarray:
    """A with E(u, v) = u^T A v for zero-exterior u, v (interior block)."""
    n_int = form.domain.n_interior
    weights = form.weights
    diagonal = weights[:n_int, :].sum(axis=1) + form.tail
    return np.diag(diagonal) - weights[:n_int, :n_int]


def censored_matrix(form: FormMatrix) -> np.ndarray:
    """Matrix of the censored form on interior cells."""
    n_int = form.domain.n_interior
    inner = form.weights[:n_int, :n_int]
    return np.diag(inner.sum(axis=1)) - inner


def neumann_matrix(form: FormMatrix) -> np.ndarray:
    """Form matrix over interior and shell cells with free shell values."""
    weights = form.weights
    return np.diag(weights.sum(axis=1)) - weights


def operator_matrix(form: FormMatrix, which: str = "dirichlet") -> np.ndarray:
    """Matrix of the form: "dirichlet" (interior, zero exterior), "censored" or "neumann"."""
    builders = {"dirichlet": stiffness_matrix, "censored": censored_matrix, "neumann": neumann_matrix}
    if which not in builders:
        raise DomainError(f"unknown operator matrix {which!r}; choose from {sorted(builders)}")
    return builders[which](form)


def energy(form: FormMatrix, u: GridFunction, v: Optional[GridFunction] = None, which: str = "full") -> float:
    """
    Bilinear form E(u, v).

    censored: pairs inside Omega only. full: pairs with at least one interior cell
    plus interior cells against the region beyond the shell, where values are 0.
    global: equals full and is only defined for zero-exterior u and v.
    """
    v = u if v is None else v
    _same_domain(form, u, v)
    n_int = form.domain.n_interior
    ui, vi = u.interior, v.interior
    inner = form.weights[:n_int, :n_int]
    censored = float(vi @ (inner.sum(axis=1) * ui) - vi @ (inner @ ui))
    if which == "censored":
        return censored
    if which == "global" and not (u.zero_exterior and v.zero_exterior):
        raise DomainError("global form is only defined here for zero-exterior functions")
    if which not in ("full", "global"):
        raise DomainError(f"unknown form {which!r}; use 'full', 'censored' or 'global'")
    cross = form.weights[:n_int, n_int:]
    us, vs = u.shell, v.shell
    rows = cross.sum(axis=1)
    cols = cross.sum(axis=0)
    mixed = float(np.sum(ui * vi * rows) - ui @ (cross @ vs) - vi @ (cross @ us) + np.sum(us * vs * cols))
    return censored + mixed + float(np.sum(form.tail * ui * vi))


def apply_L_discrete(form: FormMatrix, u: GridFunction, far_value: float = 0.0, include_tail: bool = True) -> np.ndarray:
    """(L_h u)_i = (sum_j (u_i - u_j) w_ij + tail_i (u_i - far_value)) / h^N on interior cells."""
    _same_domain(form, u)
    n_int = form.domain.n_interior
    block = form.weights[:n_int, :]
    values = block.sum(axis=1) * u.interior - block @ u.values
    if include_tail:
        values = values + form.tail * (u.interior - far_value)
    return values / form.domain.cell_volume


def apply_N(form: FormMatrix, u: GridFunction) -> np.ndarray:
    """(N u)_s = sum over interior j of (u_s - u_j) w_sj / h^N on shell cells."""
    _same_domain(form, u)
    n_int = form.domain.n_interior
    cross = form.weights[n_int:, :n_int]
    values = cross.sum(axis=1) * u.shell - cross @ u.interior
    return values / form.domain.cell_volume


class PerimeterReport(NamedTuple):
    """J-perimeter value and, when a boundary modulus was supplied, its diagnostic."""
    value: float
    diagnostic: Optional[ModulusIntegral]


def j_perimeter(
    form: FormMatrix,
    subset: Optional[Union[Interval, Box, Ball]],
    boundary_modulus: Optional[Callable[[float], float]] = None,
) -> PerimeterReport:
    """E_1(1_E, 1_E) = sum over i in E, j not in E of w_ij, plus the mass beyond the shell."""
    chi = indicator(form.domain, subset)
    if np.any(chi.shell > 0):
        raise DomainError("subset E must lie inside Omega")
    members = chi.interior > 0
    n_int = form.domain.n_interior
    outside = np.concatenate([~members, np.ones(form.domain.n_shell, dtype=bool)])
    value = float(form.weights[:n_int][members][:, outside].sum() + form.tail[members].sum())
    diagnostic = None
    if boundary_modulus is not None:
        diagnostic = modulus_integral(form.kernel, boundary_modulus, form.kernel.rho)
    return PerimeterReport(value, diagnostic)


def boundary_mass_profile(form: FormMatrix) -> Dict[str, np.ndarray]:
    """Lambda_i against M(dist_i); cells farther than rho from the boundary are skipped."""
    kernel = form.kernel
    dist = form.domain.boundary_distance()[: form.domain.n_interior]
    near = dist < kernel.rho
    masses = np.asarray(mass_M(kernel, np.clip(dist[near], 1e-12 * kernel.rho, kernel.rho)), dtype=float).reshape(-1)
    lam = form.exterior_mass[near]
    ratio = np.where(masses > 0, lam / np.where(masses > 0, masses, 1.0), np.inf)
    return {"distance": dist[near], "exterior_mass": lam, "mass": masses, "ratio": ratio, "infimum": np.array(np.min(ratio))}


# ---------------------------------------------------------------------------
# Pointwise principal values
# ---------------------------------------------------------------------------


ANGULAR_NODES = 64


def _as_point(x, dimension: int) -> np.ndarray:
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.shape != (dimension,):
        raise DomainError(f"point must have {dimension} coordinate(s), got {point}")
    return point


def apply_L(
    kernel: KernelSpec,
    u: Callable[[np.ndarray], np.ndarray],
    x,
    r_pv: Optional[float] = None,
    singular_radii: Sequence[float] = (),
    epsrel: float = 1e-9,
    singular_angles: Sequence[float] = (),
) -> float:
    """
    Lu(x) = P.V. integral of (u(x) - u(y)) K(x - y) dy for a callable u.

    `u` maps an array of points of shape (m, N) to m values. The integral is
    written as integral_0^inf of the symmetric difference 2u(x) - u(x+z) - u(x-z)
    averaged over directions, split at r_pv, rho and any `singular_radii` where u
    itself is singular along some direction. In 2D, `singular_angles` in [0, pi)
    name those directions and split the angular integral there.
    """
    dim = kernel.dimension
    point = _as_point(x, dim)
    rho = kernel.rho
    r_pv = 0.25 * rho if r_pv is None else float(r_pv)
    if not 0 < r_pv < rho:
        raise DomainError(f"r_pv must lie in (0, rho), got {r_pv}")
    center = float(np.asarray(u(point[None, :]))[0])
    what = f"L u at x={point.tolist()}"

    if dim == 1:
        def difference(r: float) -> float:
            pair = np.array([[point[0] + r], [point[0] - r]])
            vals = np.asarray(u(pair), dtype=float)
            return 2.0 * center - vals[0] - vals[1]

        radial_weight = lambda r: float(kernel.radial(r))
    else:
        nodes = np.arange(ANGULAR_NODES) * math.pi / ANGULAR_NODES

        def difference(r: float) -> float:
            if singular_radii:
                def angular(theta: float) -> float:
                    step = r * np.array([math.cos(theta), math.sin(theta)])
                    vals = np.asarray(u(np.stack([point + step, point - step])), dtype=float)
                    return 2.0 * center - vals[0] - vals[1]

                value, _ = integrate(angular, 0.0, math.pi, epsrel=epsrel * 10, points=singular_angles, what=what)
                return value
            steps = r * np.stack([np.cos(nodes), np.sin(nodes)], axis=1)
            vals = np.asarray(u(np.concatenate([point + steps, point - steps])), dtype=float)
            # The symmetric difference is pi-periodic in theta: the trapezoid rule is spectral.
            return float(math.pi / ANGULAR_NODES * np.sum(2.0 * center - vals[:ANGULAR_NODES] - vals[ANGULAR_NODES:]))

        radial_weight = lambda r: float(kernel.radial(r)) * r

    integrand = lambda r: difference(r) * radial_weight(r)
    cuts = [p for p in singular_radii if p > 0]
    inner, _ = integrate(integrand, 0.0, r_pv, epsrel=epsrel, points=cuts, what=f"{what} (inner)")
    outer, _ = integrate(integrand, r_pv, rho, epsrel=epsrel, points=cuts, what=f"{what} (outer)")
    far = 0.0
    if kernel.tail.has_power_tail:
        far, _ = integrate(integrand, rho, math.inf, epsrel=epsrel, points=cuts, what=f"{what} (tail)")
    return inner + outer + far


def inverse_half_power(dimension: int) -> Callable[[np.ndarray], np.ndarray]:
    """y -> |y|^(-N/2)."""
    def u(points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points, axis=1) ** (-0.5 * dimension)
    return u


def hardy_witness(kernel: KernelSpec, x, rotate: bool = False) -> float:
    """
    W(x) = |x|^(N/2) L[|y|^(-N/2)](x).

    `rotate` evaluates at (|x|, 0) instead, which is equivalent for the radial
    kernel and puts the singular direction at the ends of the angular range.
    """
    dim = kernel.dimension
    point = _as_point(x, dim)
    radius = float(np.linalg.norm(point))
    if not 0 < radius < kernel.rho / 3:
        raise DomainError(f"hardy witness needs 0 < |x| < rho/3, got |x|={radius:g}")
    if rotate:
        point = np.zeros(dim)
        point[0] = radius
    # |y|^(-N/2) blows up at y = 0, reached from x along the direction of x.
    angles = [math.atan2(point[1], point[0]) % math.pi] if dim == 2 else []
    value = apply_L(
        kernel,
        inverse_half_power(dim),
        point,
        r_pv=0.5 * radius,
        singular_radii=[radius],
        singular_angles=angles,
    )
    return radius ** (0.5 * dim) * value


def hardy_witness_table(kernel: KernelSpec, radii: Sequence[float]) -> Dict[str, np.ndarray]:
    """W(r), M(r) and W(r)/M(r) along the given radii."""
    radii = np.asarray(radii, dtype=float)
    witness = np.array([hardy_witness(kernel, np.r_[r, np.zeros(kernel.dimension - 1)], rotate=True) for r in radii])
    masses = np.asarray(mass_M(kernel, radii), dtype=float).reshape(-1)
    return {"r": radii, "W": witness, "M": masses, "ratio": witness / masses}
