"""
Shared data models used across the laboratory.

- EllVariant / EllSpec: the slowly varying profile l(s) of a kernel near the origin.
- TailVariant / TailSpec: how the kernel continues beyond the singular range rho.
- KernelSpec: radial kernel K(z) = |z|^-N l(|z|) on 0 < |z| < rho plus its tail.
- Interval / Box / Ball / QuasiBall: bounded shapes a grid can be built on.
- Domain / GridFunction: uniform cell-centered grid of Omega plus an exterior shell.
- FormMatrix: pair weights w_ij and the exterior mass of the discrete form.
- SpectralDecomposition: Dirichlet eigenpairs on the interior cells.
- DistributionProfile / LorentzWeight: distribution data and Lorentz weights A(s).
- SolveReport / Report: outputs of solvers and inequality checks.
"""

from __future__ import annotations

# Standard library data modeling and typing helpers.
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

# Numerical arrays back every grid quantity.
import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DomainError


def sphere_area(dimension: int) -> float:
    """Surface measure of the unit sphere S^{N-1} (2 for N=1, 2*pi for N=2)."""
    return 2.0 * math.pi ** (dimension / 2.0) / gamma_fn(dimension / 2.0)


def ball_volume(dimension: int) -> float:
    """Measure omega_N of the unit ball."""
    return math.pi ** (dimension / 2.0) / gamma_fn(dimension / 2.0 + 1.0)


class EllVariant(str, Enum):
    """Built-in slowly varying profiles."""
    CONSTANT = "constant"
    LOG_POW = "logpow"
    INV_LOG_LOG = "invloglog"


class TailVariant(str, Enum):
    """How the kernel behaves beyond the singular range."""
    ZERO = "zero"
    POWER_DECAY = "power_decay"
    PIECEWISE_POWER = "piecewise_power"


@dataclass(frozen=True)
class EllSpec:
    """
    Profile l(s) on (0, rho).

    CONSTANT uses `c`, LOG_POW uses `beta` (l = log^beta(2 rho / s), beta >= -1),
    INV_LOG_LOG is l = 1 / (L log L) with L(s) = e + log(rho / s).
    """

    variant: EllVariant = EllVariant.CONSTANT
    rho: float = 1.0
    beta: float = 1.0
    c: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", EllVariant(self.variant))
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise DomainError(f"rho must be positive and finite, got {self.rho}")
        if self.variant == EllVariant.LOG_POW and self.beta < -1:
            raise DomainError(f"LogPow needs beta >= -1, got {self.beta}")
        if self.variant == EllVariant.CONSTANT and not self.c > 0:
            raise DomainError(f"Constant profile needs c > 0, got {self.c}")

    @classmethod
    def constant(cls, c: float = 1.0, rho: float = 1.0) -> "EllSpec":
        return cls(EllVariant.CONSTANT, rho=rho, c=c)

    @classmethod
    def log_pow(cls, beta: float, rho: float = 1.0) -> "EllSpec":
        return cls(EllVariant.LOG_POW, rho=rho, beta=beta)

    @classmethod
    def inv_log_log(cls, rho: float = 1.0) -> "EllSpec":
        return cls(EllVariant.INV_LOG_LOG, rho=rho)

    def value(self, s: Union[float, np.ndarray]) -> np.ndarray:
        """Evaluate l(s) for 0 < s (values above rho follow the same formula)."""
        s = np.asarray(s, dtype=float)
        if self.variant == EllVariant.CONSTANT:
            return np.full_like(s, self.c)
        if self.variant == EllVariant.LOG_POW:
            return np.log(2.0 * self.rho / s) ** self.beta
        big_l = math.e + np.log(self.rho / s)
        return 1.0 / (big_l * np.log(big_l))

    def label(self) -> str:
        if self.variant == EllVariant.CONSTANT:
            return f"constant(c={self.c:g})"
        if self.variant == EllVariant.LOG_POW:
            return f"logpow(beta={self.beta:g})"
        return "invloglog"


@dataclass(frozen=True)
class TailSpec:
    """Tail law beyond rho; alpha1 only matters for PIECEWISE_POWER."""

    variant: TailVariant = TailVariant.ZERO
    alpha1: Optional[float] = None
    alpha2: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", TailVariant(self.variant))
        if self.variant in (TailVariant.POWER_DECAY, TailVariant.PIECEWISE_POWER):
            if self.alpha2 is None or not self.alpha2 > 0:
                raise DomainError(f"tail alpha2 must be positive, got {self.alpha2}")
        if self.variant == TailVariant.PIECEWISE_POWER:
            if self.alpha1 is None or not 0 < self.alpha1 < 2:
                raise DomainError(f"tail alpha1 must lie in (0, 2), got {self.alpha1}")

    @classmethod
    def zero(cls) -> "TailSpec":
        return cls(TailVariant.ZERO)

    @classmethod
    def power_decay(cls, alpha2: float) -> "TailSpec":
        return cls(TailVariant.POWER_DECAY, alpha2=alpha2)

    @classmethod
    def piecewise_power(cls, alpha1: float, alpha2: float) -> "TailSpec":
        return cls(TailVariant.PIECEWISE_POWER, alpha1=alpha1, alpha2=alpha2)

    @property
    def has_power_tail(self) -> bool:
        return self.variant != TailVariant.ZERO

    def label(self) -> str:
        if self.variant == TailVariant.ZERO:
            return "zero"
        if self.variant == TailVariant.POWER_DECAY:
            return f"power_decay(alpha2={self.alpha2:g})"
        return f"piecewise_power(alpha1={self.alpha1:g}, alpha2={self.alpha2:g})"


@dataclass(frozen=True)
class KernelSpec:
    """
    Radial Levy kernel in dimension 1 or 2.

    For 0 < r < rho the kernel is r^-N l(r); PIECEWISE_POWER replaces that part by
    the fractional comparison law l(rho) rho^-N (rho/r)^(N+alpha1). Power tails
    continue as l(rho) rho^-N (rho/r)^(N+alpha2) so K is continuous at rho.
    """

    dimension: int = 1
    ell: EllSpec = field(default_factory=EllSpec)
    tail: TailSpec = field(default_factory=TailSpec)

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.dimension}")

    @property
    def rho(self) -> float:
        return self.ell.rho

    @property
    def ell_at_rho(self) -> float:
        return float(self.ell.value(self.rho))

    @property
    def fractional_core(self) -> bool:
        """True when the singular part is the power law of PIECEWISE_POWER."""
        return self.tail.variant == TailVariant.PIECEWISE_POWER

    def profile(self, s: Union[float, np.ndarray]) -> np.ndarray:
        """r^N K(r): the effective slowly varying factor, for every r > 0."""
        s = np.asarray(s, dtype=float)
        rho = self.rho
        inside = s < rho
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.fractional_core:
                core = self.ell_at_rho * (rho / s) ** self.tail.alpha1
            else:
                core = self.ell.value(np.where(inside, s, rho))
            if self.tail.variant == TailVariant.ZERO:
                # Support is the closed ball of radius rho.
                outer = np.where(s <= rho, self.ell_at_rho, 0.0)
            else:
                outer = self.ell_at_rho * (rho / s) ** self.tail.alpha2
        return np.where(inside, core, outer)

    def radial(self, r: Union[float, np.ndarray]) -> np.ndarray:
        """K(r) for r > 0."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.profile(r) / r ** self.dimension

    def __call__(self, z: np.ndarray) -> np.ndarray:
        """K(z) for points z of shape (..., N) or scalars in 1D."""
        z = np.asarray(z, dtype=float)
        if self.dimension == 1 and (z.ndim == 0 or z.shape[-1] != 1):
            return self.radial(np.abs(z))
        return self.radial(np.linalg.norm(z, axis=-1))

    def label(self) -> str:
        return f"N={self.dimension}, rho={self.rho:g}, ell={self.ell.label()}, tail={self.tail.label()}"


def pure_power(dimension: int, alpha: float) -> KernelSpec:
    """The fractional kernel |z|^(-N-alpha) expressed as a built-in kernel."""
    return KernelSpec(
        dimension=dimension,
        ell=EllSpec.constant(1.0, rho=1.0),
        tail=TailSpec.piecewise_power(alpha, alpha),
    )


# ---------------------------------------------------------------------------
# Shapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Open interval (a, b) in one dimension."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise DomainError(f"interval needs a < b, got ({self.a}, {self.b})")

    @property
    def dimension(self) -> int:
        return 1

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([self.a]), np.array([self.b])

    @property
    def measure(self) -> float:
        return self.b - self.a

    @property
    def inradius(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def diameter(self) -> float:
        return self.b - self.a

    @property
    def sup_norm(self) -> float:
        return max(abs(self.a), abs(self.b))

    def contains(self, points: np.ndarray) -> np.ndarray:
        x = points[:, 0]
        return (x > self.a) & (x < self.b)

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        x = points[:, 0]
        return np.abs(np.where(self.contains(points), np.minimum(x - self.a, self.b - x), self.exterior_distance(points)))

    def exterior_distance(self, points: np.ndarray) -> np.ndarray:
        x = points[:, 0]
        return np.maximum.reduce([self.a - x, x - self.b, np.zeros_like(x)])

    def farthest_distance(self, points: np.ndarray) -> np.ndarray:
        x = points[:, 0]
        return np.maximum(np.abs(x - self.a), np.abs(x - self.b))


@dataclass(frozen=True)
class Box:
    """Open axis-aligned rectangle in two dimensions."""

    lower: Tuple[float, float]
    upper: Tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        if len(self.lower) != 2 or len(self.upper) != 2:
            raise DomainError("box corners must have two coordinates")
        if not all(lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise DomainError(f"box needs lower < upper, got {self.lower}, {self.upper}")

    @property
    def dimension(self) -> int:
        return 2

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array(self.lower), np.array(self.upper)

    @property
    def measure(self) -> float:
        lo, hi = self.bounds
        return float(np.prod(hi - lo))

    @property
    def inradius(self) -> float:
        lo, hi = self.bounds
        return float(0.5 * np.min(hi - lo))

    @property
    def diameter(self) -> float:
        lo, hi = self.bounds
        return float(np.linalg.norm(hi - lo))

    @property
    def sup_norm(self) -> float:
        lo, hi = self.bounds
        corners = np.array([[x, y] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])])
        return float(np.max(np.linalg.norm(corners, axis=1)))

    def contains(self, points: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds
        return np.all((points > lo) & (points < hi), axis=1)

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds
        inner = np.min(np.concatenate([points - lo, hi - points], axis=1), axis=1)
        return np.where(self.contains(points), inner, self.exterior_distance(points))

    def exterior_distance(self, points: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds
        gap = np.maximum(np.maximum(lo - points, points - hi), 0.0)
        return np.linalg.norm(gap, axis=1)

    def farthest_distance(self, points: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds
        far = np.maximum(np.abs(points - lo), np.abs(points - hi))
        return np.linalg.norm(far, axis=1)


@dataclass(frozen=True)
class Ball:
    """Open ball of the given radius; centered at the origin unless `center` is set."""

    radius: float
    dimension: int = 1
    center: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise DomainError(f"ball radius must be positive, got {self.radius}")
        if self.dimension not in (1, 2):
            raise DomainError(f"ball dimension must be 1 or 2, got {self.dimension}")
        center = self.center if self.center is not None else (0.0,) * self.dimension
        if len(center) != self.dimension:
            raise DomainError("ball center does not match its dimension")
        object.__setattr__(self, "center", tuple(float(c) for c in center))

    @property
    def origin(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.origin - self.radius, self.origin + self.radius

    @property
    def measure(self) -> float:
        return ball_volume(self.dimension) * self.radius ** self.dimension

    @property
    def inradius(self) -> float:
        return self.radius

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def sup_norm(self) -> float:
        return float(np.linalg.norm(self.origin)) + self.radius

    def _norms(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - self.origin, axis=1)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self._norms(points) < self.radius

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        return np.abs(self.radius - self._norms(points))

    def exterior_distance(self, points: np.ndarray) -> np.ndarray:
        return np.maximum(self._norms(points) - self.radius, 0.0)

    def farthest_distance(self, points: np.ndarray) -> np.ndarray:
        return self._norms(points) + self.radius


@dataclass(frozen=True)
class QuasiBall:
    """
    The `n_cells` grid cells whose centers are nearest the origin.

    Ties in radius are broken lexicographically by integer coordinates, so a
    quasi-ball has exactly the measure n_cells * h^N for any cell size h.
    """

    n_cells: int
    dimension: int = 1

    def __post_init__(self) -> None:
        if self.n_cells < 1:
            raise DomainError(f"quasi-ball needs at least one cell, got {self.n_cells}")

    def as_ball(self, h: float) -> Ball:
        """Ball of equal measure, used for geometric queries."""
        radius = (self.n_cells * h ** self.dimension / ball_volume(self.dimension)) ** (1.0 / self.dimension)
        return Ball(radius, self.dimension)


Shape = Union[Interval, Box, Ball, QuasiBall]


# ---------------------------------------------------------------------------
# Grids and grid functions
# ---------------------------------------------------------------------------


def _readonly(array: np.ndarray, dtype=float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Domain:
    """
    Uniform grid: interior cells (centers strictly inside Omega) followed by the
    exterior shell (centers outside Omega within r_ext of it). Both lists are in
    lexicographic order of integer coordinates; cell k has center (index + 1/2) h.
    """

    shape: Shape
    h: float
    r_ext: float
    interior_index: np.ndarray
    shell_index: np.ndarray
    geometry: Union[Interval, Box, Ball]

    def __post_init__(self) -> None:
        object.__setattr__(self, "interior_index", _readonly(self.interior_index, np.int64))
        object.__setattr__(self, "shell_index", _readonly(self.shell_index, np.int64))

    @property
    def dimension(self) -> int:
        return self.interior_index.shape[1]

    @property
    def n_interior(self) -> int:
        return self.interior_index.shape[0]

    @property
    def n_shell(self) -> int:
        return self.shell_index.shape[0]

    @property
    def n_cells(self) -> int:
        return self.n_interior + self.n_shell

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dimension

    @property
    def measure(self) -> float:
        """|Omega| as seen by the grid: h^N times the interior count."""
        return self.cell_volume * self.n_interior

    @property
    def cell_index(self) -> np.ndarray:
        return np.concatenate([self.interior_index, self.shell_index], axis=0)

    def centers(self, which: str = "all") -> np.ndarray:
        """Cell centers for `which` in {"all", "interior", "shell"}."""
        index = {
            "all": self.cell_index,
            "interior": self.interior_index,
            "shell": self.shell_index,
        }[which]
        return (index + 0.5) * self.h

    @property
    def diameter(self) -> float:
        return self.geometry.diameter

    @property
    def sup_radius(self) -> float:
        """sup of |x| over Omega."""
        return self.geometry.sup_norm

    def boundary_distance(self) -> np.ndarray:
        """Distance from every cell center to the boundary of Omega."""
        return self.geometry.boundary_distance(self.centers())

    def same_grid(self, other: "Domain") -> bool:
        return (
            self is other
            or (
                self.h == other.h
                and np.array_equal(self.interior_index, other.interior_index)
                and np.array_equal(self.shell_index, other.shell_index)
            )
        )


@dataclass(frozen=True, eq=False)
class GridFunction:
    """One real value per cell, interior cells first, then shell cells."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.domain.n_cells:
            raise DomainError(
                f"grid function has {values.shape[0]} values but the domain has {self.domain.n_cells} cells"
            )
        object.__setattr__(self, "values", _readonly(values))

    @classmethod
    def zeros(cls, domain: Domain) -> "GridFunction":
        return cls(domain, np.zeros(domain.n_cells))

    @classmethod
    def from_interior(cls, domain: Domain, interior: np.ndarray, shell: Optional[np.ndarray] = None) -> "GridFunction":
        """Interior values plus optional shell values (zero when omitted)."""
        shell_values = np.zeros(domain.n_shell) if shell is None else np.asarray(shell, dtype=float)
        return cls(domain, np.concatenate([np.asarray(interior, dtype=float).reshape(-1), shell_values]))

    @classmethod
    def from_callable(cls, domain: Domain, fn: Callable[[np.ndarray], np.ndarray], exterior: bool = False) -> "GridFunction":
        """Sample fn at cell centers; the shell is zero unless `exterior` is set."""
        values = np.asarray(fn(domain.centers()), dtype=float).reshape(-1)
        if not exterior:
            values = values.copy()
            values[domain.n_interior:] = 0.0
        return cls(domain, values)

    @property
    def interior(self) -> np.ndarray:
        return self.values[: self.domain.n_interior]

    @property
    def shell(self) -> np.ndarray:
        return self.values[self.domain.n_interior:]

    @property
    def zero_exterior(self) -> bool:
        return bool(np.all(self.shell == 0.0))

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.domain, values)

    def with_shell(self, shell: np.ndarray) -> "GridFunction":
        """Same interior values with new shell values."""
        return GridFunction.from_interior(self.domain, self.interior, shell)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return GridFunction(self.domain, fn(self.values))

    def norm_p(self, p: float) -> float:
        """L^p(Omega) norm over the interior cells."""
        vol = self.domain.cell_volume
        if math.isinf(p):
            return float(np.max(np.abs(self.interior), initial=0.0))
        return float((vol * np.sum(np.abs(self.interior) ** p)) ** (1.0 / p))

    def integral(self) -> float:
        return float(self.domain.cell_volume * np.sum(self.interior))


# ---------------------------------------------------------------------------
# Assembled forms and spectral data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FormMatrix:
    """
    Discrete Dirichlet form on a Domain.

    weights[i, j] = integral over C_i x C_j of J for every pair with at least one
    interior cell (the shell-shell block and the diagonal are zero). tail[i] is the
    cell-integrated kernel mass beyond the shell for interior cell i, and
    tail_uncertainty[i] bounds its error.
    """

    kernel: KernelSpec
    domain: Domain
    weights: np.ndarray
    tail: np.ndarray
    tail_uncertainty: np.ndarray
    tail_corrected: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _readonly(self.weights))
        object.__setattr__(self, "tail", _readonly(self.tail))
        object.__setattr__(self, "tail_uncertainty", _readonly(self.tail_uncertainty))

    @property
    def exterior_mass(self) -> np.ndarray:
        """Lambda_i as a density: (sum over shell of w_ij + tail_i) / h^N."""
        n_int = self.domain.n_interior
        shell_mass = self.weights[:n_int, n_int:].sum(axis=1)
        return (shell_mass + self.tail) / self.domain.cell_volume

    @property
    def poincare_constant(self) -> float:
        return float(np.min(self.exterior_mass))

    @property
    def weight_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, k=1)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Eigenpairs lambda_1 <= ... <= lambda_k of the Dirichlet form. Columns of
    `vectors` hold interior values normalized so that h^N sum phi_j^2 = 1.
    """

    domain: Domain
    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _readonly(self.eigenvalues))
        object.__setattr__(self, "vectors", _readonly(self.vectors))

    @property
    def count(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def complete(self) -> bool:
        return self.count == self.domain.n_interior

    def eigenfunction(self, j: int) -> GridFunction:
        """phi_{j+1} as a zero-exterior grid function (0-based j)."""
        return GridFunction.from_interior(self.domain, self.vectors[:, j])

    def coefficients(self, u: GridFunction) -> np.ndarray:
        """u_j = h^N sum u phi_j."""
        return self.domain.cell_volume * (self.vectors.T @ u.interior)


# ---------------------------------------------------------------------------
# Distribution data and Lorentz weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DistributionProfile:
    """
    Distribution function mu(t) = |{|u| > t}| of a piecewise constant function.

    `values` holds |u| sorted descending and every cell carries `cell_measure`.
    """

    values: np.ndarray
    cell_measure: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _readonly(self.values))

    @property
    def breakpoints(self) -> np.ndarray:
        """Distinct positive values t_0 > t_1 > ... of |u|."""
        positive = self.values[self.values > 0]
        return np.unique(positive)[::-1]

    @property
    def measures(self) -> np.ndarray:
        """mu just below each breakpoint, i.e. |{|u| >= t_k}|."""
        return np.array([self.mu(t) for t in self.breakpoints * (1 - 1e-15)]) if self.breakpoints.size else np.array([])

    @property
    def total_measure(self) -> float:
        return self.cell_measure * self.values.shape[0]

    def mu(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """mu(t), right-continuous and nonincreasing."""
        ascending = self.values[::-1]
        t = np.asarray(t, dtype=float)
        count = ascending.shape[0] - np.searchsorted(ascending, t, side="right")
        return count * self.cell_measure


@dataclass(frozen=True, eq=False)
class LorentzWeight:
    """
    Increasing weight A on [0, |Omega|] with A(0) = 0.

    A is piecewise linear through (k h^N, A_k). The identity weight A(s) = s sets
    `identity` and ignores the nodes.
    """

    nodes: np.ndarray
    values: np.ndarray
    psi: Optional[np.ndarray] = None
    radii: Optional[np.ndarray] = None
    identity: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", _readonly(self.nodes))
        object.__setattr__(self, "values", _readonly(self.values))

    @classmethod
    def identity_weight(cls, measure: float) -> "LorentzWeight":
        """A(s) = s on [0, measure]; the Lorentz norm is then the L^p norm."""
        return cls(np.array([0.0, measure]), np.array([0.0, measure]), identity=True)

    @classmethod
    def from_kernel(cls, kernel: "KernelSpec", measure: float, h: float) -> "LorentzWeight":
        """Weight built from psi(x) = M(rho |x| / R) on the quasi-ball of the given measure."""
        from .analysis import lorentz_weight

        return lorentz_weight(kernel, measure, h)

    def __call__(self, s: Union[float, np.ndarray]) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.identity:
            return s.copy()
        inside = np.interp(s, self.nodes, self.values)
        # Beyond the last node continue with the last slope.
        slope = (self.values[-1] - self.values[-2]) / (self.nodes[-1] - self.nodes[-2])
        return np.where(s > self.nodes[-1], self.values[-1] + slope * (s - self.nodes[-1]), inside)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class SolveReport:
    """Solution plus solver diagnostics; `norms` holds named auxiliary norms."""

    solution: GridFunction
    residual: float
    iterations: int
    converged: bool = True
    norms: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "norms": {k: float(v) for k, v in sorted(self.norms.items())},
            "notes": list(self.notes),
        }


@dataclass
class Report:
    """Outcome of one inequality check: both sides, their ratio and the verdict."""

    check: str
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    tol: float
    details: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "check": self.check,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "ratio": float(self.ratio),
            "pass": bool(self.passed),
            "tol": float(self.tol),
            "details": {k: float(v) for k, v in sorted(self.details.items())},
        }
