"""
Scalar functionals of a radial kernel.

- mass_M: M(r) = integral from r to rho of l(s)/s, closed form for built-in profiles.
- holder_mass_A / holder_g / modulus_omega / continuity_modulus: the ingredients of
  the modulus of continuity of Lu for Hoelder u.
- modulus_integral: finiteness test for integral_0 w0(s) l(s)/s ds.
- radial_tail_mass / levy_integral / check_admissible: integrability hypotheses.
- multiplier_m / spectral_mass_g / growth_condition: Fourier side of the form.
- scaling_gamma / scaling_sigma: dilation behaviour used by the Pohozaev check.

Every function is a pure function of an immutable KernelSpec.
"""

from __future__ import annotations

# Standard library helpers for caching and typed results.
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.optimize import bisect
from scipy.special import j0, jn_zeros

from .errors import DomainError, HypothesisViolation, QuadratureError
from .models import EllVariant, KernelSpec, TailVariant, sphere_area
from .quadrature import averaged_partial_sums, graded_integral, integrate, integrate_oscillatory

logger = logging.getLogger(__name__)

# Relative tolerances for one-dimensional and nested quadratures.
RTOL_1D = 1e-8
RTOL_NESTED = 1e-6

# Step for the one-sided finite differences of gamma at 1.
SIGMA_STEP = 1e-3

# Panels beyond the last Bessel zero inside rho used for the 2D tail.
BESSEL_TAIL_PANELS = 80


# ---------------------------------------------------------------------------
# Mass function and Hoelder ingredients
# ---------------------------------------------------------------------------


def kernel_profile(kernel: KernelSpec, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """K(r) for r > 0, vectorized."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError("kernel profile needs r > 0")
    out = kernel.radial(r_arr)
    return float(out) if np.ndim(out) == 0 else out


def _check_radius(kernel: KernelSpec, r: np.ndarray, name: str = "r") -> None:
    rho = kernel.rho
    if np.any(~np.isfinite(r)) or np.any(r <= 0) or np.any(r > rho * (1 + 1e-12)):
        raise DomainError(f"{name} must lie in (0, rho={rho:g}], got {r}")


def _mass_closed_form(kernel: KernelSpec, r: np.ndarray) -> np.ndarray:
    rho = kernel.rho
    r = np.minimum(r, rho)
    if kernel.fractional_core:
        alpha = kernel.tail.alpha1
        return kernel.ell_at_rho * ((rho / r) ** alpha - 1.0) / alpha
    ell = kernel.ell
    if ell.variant == EllVariant.CONSTANT:
        return ell.c * np.log(rho / r)
    if ell.variant == EllVariant.LOG_POW:
        top = np.log(2.0 * rho / r)
        bottom = math.log(2.0)
        if ell.beta == -1:
            return np.log(top) - math.log(bottom)
        power = ell.beta + 1.0
        return (top ** power - bottom ** power) / power
    big_l = math.e + np.log(rho / r)
    return np.log(np.log(big_l))


def _mass_quadrature(kernel: KernelSpec, r: float) -> float:
    # Substituting s = e^t turns l(s)/s ds into l(e^t) dt.
    rho = kernel.rho
    if r >= rho:
        return 0.0
    value, _ = integrate(
        lambda t: float(kernel.profile(math.exp(t))),
        math.log(r),
        math.log(rho),
        epsrel=1e-11,
        what="mass M",
    )
    return value


def mass_M(kernel: KernelSpec, r: Union[float, np.ndarray], method: str = "auto") -> Union[float, np.ndarray]:
    """
    M(r) = integral from r to rho of l(s)/s ds, for 0 < r <= rho.

    `method` is "auto" (closed form) or "quad" (adaptive quadrature); both accept
    scalars or arrays and return the same shape.
    """
    r_arr = np.asarray(r, dtype=float)
    _check_radius(kernel, r_arr)
    if method == "quad":
        out = np.vectorize(lambda x: _mass_quadrature(kernel, float(x)))(r_arr)
    elif method == "auto":
        out = _mass_closed_form(kernel, r_arr)
    else:
        raise DomainError(f"unknown method {method!r}; use 'auto' or 'quad'")
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=8192)
def _holder_mass_cached(kernel: KernelSpec, nu: float, radius: float) -> float:
    if kernel.fractional_core:
        alpha = kernel.tail.alpha1
        if nu <= alpha:
            raise DomainError(f"holder exponent nu={nu:g} must exceed alpha1={alpha:g} for a finite A(R)")
        return kernel.ell_at_rho * kernel.rho ** alpha * radius ** (nu - alpha) / (nu - alpha)
    if kernel.ell.variant == EllVariant.CONSTANT:
        return kernel.ell.c * radius ** nu / nu
    return graded_integral(
        lambda s: s ** (nu - 1.0) * float(kernel.profile(s)),
        0.0,
        radius,
        epsrel=1e-10,
        what="holder mass A",
    )


def holder_mass_A(kernel: KernelSpec, nu: float, R: float) -> float:
    """A(R) = integral from 0 to R of s^(nu-1) l(s) ds for 0 < nu < 1, 0 < R <= rho."""
    if not 0 < nu < 1:
        raise DomainError(f"nu must lie in (0, 1), got {nu}")
    _check_radius(kernel, np.asarray(R, dtype=float), "R")
    return _holder_mass_cached(kernel, float(nu), float(min(R, kernel.rho)))


def holder_g(kernel: KernelSpec, nu: float, R: float) -> float:
    """g(R) = (A(R)/M(R))^(1/nu); infinite at R = rho."""
    mass = mass_M(kernel, R)
    if mass <= 0:
        return math.inf
    return (holder_mass_A(kernel, nu, R) / mass) ** (1.0 / nu)


class OmegaValue(NamedTuple):
    """Modulus value together with the inverted radius and the clamp flag."""
    value: float
    radius: float
    clamped: bool


# Sampling window for g, as fractions of rho.
_G_LOW = 1e-12
_G_HIGH = 1.0 - 1e-3
_G_SAMPLES = 161


@lru_cache(maxsize=64)
def _g_samples(kernel: KernelSpec, nu: float):
    radii = kernel.rho * np.geomspace(_G_LOW, _G_HIGH, _G_SAMPLES)
    values = np.array([holder_g(kernel, nu, R) for R in radii])
    if not np.all(np.diff(values) > 0):
        bad = int(np.argmin(np.diff(values)))
        raise HypothesisViolation(
            f"g(R) = (A/M)^(1/nu) is not strictly increasing near R={radii[bad]:.3g}; cannot invert"
        )
    return radii, values


def modulus_omega(kernel: KernelSpec, nu: float, s: float) -> OmegaValue:
    """
    varpi(s) = M(g^{-1}(s)) by bisection on log R.

    Arguments below or above the sampled range of g are clamped to the nearest
    end of the window and flagged.
    """
    if not 0 < nu < 1:
        raise DomainError(f"nu must lie in (0, 1), got {nu}")
    if s < 0 or not math.isfinite(s):
        raise DomainError(f"s must be a nonnegative finite length, got {s}")
    radii, values = _g_samples(kernel, float(nu))
    if s <= values[0] or s >= values[-1]:
        radius = float(radii[0] if s <= values[0] else radii[-1])
        logger.warning("modulus_omega: s=%g outside the range of g, clamped to R=%g", s, radius)
        return OmegaValue(float(mass_M(kernel, radius)), radius, True)
    k = int(np.searchsorted(values, s))
    log_s = math.log(s)
    t_star = bisect(
        lambda t: math.log(holder_g(kernel, nu, math.exp(t))) - log_s,
        math.log(radii[k - 1]),
        math.log(radii[k]),
        xtol=1e-14,
        rtol=1e-15,
        maxiter=200,
    )
    radius = math.exp(t_star)
    return OmegaValue(float(mass_M(kernel, radius)), radius, False)


def continuity_modulus(kernel: KernelSpec, nu: float, s: float) -> float:
    """s^nu varpi(s), which equals A(g^{-1}(s)) and tends to 0 with s."""
    omega = modulus_omega(kernel, nu, s)
    if omega.clamped:
        return s ** nu * omega.value
    return holder_mass_A(kernel, nu, omega.radius)


class ModulusIntegral(NamedTuple):
    """Outcome of integral_0^upper w0(s) l(s)/s ds."""
    value: float
    finite: bool
    partial: float
    block_ratio: float


def modulus_integral(
    kernel: KernelSpec,
    modulus: Callable[[float], float],
    upper: Optional[float] = None,
    ratio_limit: float = 0.9,
) -> ModulusIntegral:
    """
    Decide whether integral_0^upper w0(s) l(s)/s ds is finite.

    With s = upper e^{-t} the integral becomes one over t in (0, inf). Blocks
    [2^k, 2^(k+1)] up to t = 512 are integrated; the integral is declared finite
    when the last two blocks shrink by a factor below `ratio_limit`, and the
    remainder is then summed as a geometric series.
    """
    upper = kernel.rho if upper is None else float(upper)
    if not 0 < upper <= kernel.rho * (1 + 1e-12):
        raise DomainError(f"upper limit must lie in (0, rho], got {upper}")

    def integrand(t: float) -> float:
        s = upper * math.exp(-t)
        return float(modulus(s)) * float(kernel.profile(s))

    edges = [0.0, 1.0] + [2.0 ** k for k in range(1, 10)]
    blocks = []
    try:
        for lo, hi in zip(edges[:-1], edges[1:]):
            value, _ = integrate(integrand, lo, hi, epsrel=1e-9, what="modulus integral")
            blocks.append(value)
    except (QuadratureError, OverflowError):
        return ModulusIntegral(math.inf, False, math.inf, math.inf)
    partial = float(sum(blocks))
    if not math.isfinite(partial):
        return ModulusIntegral(math.inf, False, partial, math.inf)
    last, previous = blocks[-1], blocks[-2]
    if last == 0.0:
        return ModulusIntegral(partial, True, partial, 0.0)
    ratio = last / previous if previous else math.inf
    if 0 <= ratio < ratio_limit:
        return ModulusIntegral(partial + last * ratio / (1 - ratio), True, partial, ratio)
    return ModulusIntegral(math.inf, False, partial, ratio)


def continuity_criterion(kernel: KernelSpec, modulus: Callable[[float], float]) -> ModulusIntegral:
    """Lu is continuous for u with modulus w0 when integral_0 w0(s) l(s)/s ds is finite."""
    return modulus_integral(kernel, modulus, kernel.rho)


def log_modulus(power: float) -> Callable[[float], float]:
    """w0(s) = log(1/s)^(-power) for s < 1."""
    return lambda s: math.log(1.0 / s) ** (-power)


def power_modulus(nu: float) -> Callable[[float], float]:
    """w0(s) = s^nu."""
    return lambda s: s ** nu


# ---------------------------------------------------------------------------
# Integrability hypotheses
# ---------------------------------------------------------------------------


def _tail_beyond_rho(kernel: KernelSpec) -> float:
    # integral from rho to inf of r^N K(r) / r dr.
    if kernel.tail.variant == TailVariant.ZERO:
        return 0.0
    return kernel.ell_at_rho / kernel.tail.alpha2


def radial_tail_mass(kernel: KernelSpec, s: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """integral over |z| > s of K(z) dz, for s > 0."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise DomainError("radial tail mass needs s > 0")
    rho = kernel.rho
    area = sphere_area(kernel.dimension)
    inside = _mass_closed_form(kernel, np.minimum(s_arr, rho)) + _tail_beyond_rho(kernel)
    if kernel.tail.variant == TailVariant.ZERO:
        outside = np.zeros_like(s_arr)
    else:
        alpha2 = kernel.tail.alpha2
        with np.errstate(divide="ignore"):
            outside = kernel.ell_at_rho * (rho / np.maximum(s_arr, rho)) ** alpha2 / alpha2
    out = area * np.where(s_arr < rho, inside, outside)
    return float(out) if np.ndim(out) == 0 else out


def levy_integral(kernel: KernelSpec) -> float:
    """integral of min(1, |z|^2) K(z) dz, finite for every admissible kernel."""
    area = sphere_area(kernel.dimension)
    near, _ = integrate(
        lambda r: r * float(kernel.profile(r)),
        0.0,
        1.0,
        epsrel=RTOL_1D,
        points=[kernel.rho],
        what="levy integral",
    )
    return area * near + float(radial_tail_mass(kernel, 1.0))


def _sampled_nonincreasing(values: np.ndarray, rtol: float = 1e-12) -> bool:
    return bool(np.all(np.diff(values) <= rtol * np.abs(values[:-1])))


def is_radially_nonincreasing(kernel: KernelSpec, samples: int = 2000) -> bool:
    """K(r) nonincreasing in r, sampled on (1e-9 rho, 1e3 rho)."""
    radii = kernel.rho * np.geomspace(1e-9, 1e3, samples)
    return _sampled_nonincreasing(kernel.radial(radii))


def is_profile_nonincreasing(kernel: KernelSpec, samples: int = 2000) -> bool:
    """r^N K(r) nonincreasing on (0, inf), sampled."""
    radii = kernel.rho * np.geomspace(1e-9, 1e3, samples)
    return _sampled_nonincreasing(kernel.profile(radii))


@dataclass
class AdmissibilityReport:
    """Sampled verdicts on the standing hypotheses for one kernel."""

    levy_integral: float
    mass_unbounded: bool
    slowly_varying: bool
    index_of_variation: float
    index_vanishes: bool
    radially_nonincreasing: bool
    profile_nonincreasing: bool
    slow_variation_ratios: Dict[float, float]

    @property
    def admissible(self) -> bool:
        return math.isfinite(self.levy_integral) and self.mass_unbounded and self.slowly_varying and self.index_vanishes


def check_admissible(
    kernel: KernelSpec,
    tol: float = 0.05,
    index_tol: float = 0.2,
    levels: int = 60,
) -> AdmissibilityReport:
    """
    Sample the hypotheses on a kernel.

    Slow variation: l(lambda s)/l(s) for lambda in {1/2, 2} along s_k = rho 2^-k / 4
    must end in [1 - tol, 1 + tol]. The index s l'(s)/l(s), by centered log
    differences, must shrink along the sequence and end below `index_tol`.
    M(r_k) along r_k = rho 2^-k must increase and at least double over the sweep.
    """
    rho = kernel.rho
    levy = levy_integral(kernel)

    radii = rho * 2.0 ** -np.arange(10, 1001, 10, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        masses = np.asarray(mass_M(kernel, radii))
    finite = masses[np.isfinite(masses)]
    if finite.size < masses.size:
        # Overflow along the sweep already shows the growth.
        mass_unbounded = bool(np.all(np.diff(finite) > 0))
    else:
        mass_unbounded = bool(np.all(np.diff(masses) > 0) and masses[-1] >= 2.0 * masses[0])

    s_k = rho * 2.0 ** -np.arange(levels + 1, dtype=float) / 4.0
    ratios: Dict[float, float] = {}
    slowly = True
    for lam in (0.5, 2.0):
        ratio = kernel.profile(lam * s_k) / kernel.profile(s_k)
        ratios[lam] = float(ratio[-1])
        slowly = slowly and abs(ratio[-1] - 1.0) <= tol

    delta = 1e-4
    index = (np.log(kernel.profile(s_k * math.exp(delta))) - np.log(kernel.profile(s_k * math.exp(-delta)))) / (2 * delta)
    index_vanishes = bool(abs(index[-1]) <= index_tol and abs(index[-1]) <= abs(index[0]) + 1e-12)

    return AdmissibilityReport(
        levy_integral=levy,
        mass_unbounded=mass_unbounded,
        slowly_varying=bool(slowly),
        index_of_variation=float(index[-1]),
        index_vanishes=index_vanishes,
        radially_nonincreasing=is_radially_nonincreasing(kernel),
        profile_nonincreasing=is_profile_nonincreasing(kernel),
        slow_variation_ratios=ratios,
    )


def mass_to_profile_ratios(kernel: KernelSpec, levels: Sequence[int] = tuple(range(2, 41, 2))) -> np.ndarray:
    """M(r_k)/l(r_k) along r_k = 2^-k (inside the singular range)."""
    radii = np.array([2.0 ** -k for k in levels]) * min(1.0, kernel.rho)
    return np.asarray(mass_M(kernel, radii)) / kernel.profile(radii)


# ---------------------------------------------------------------------------
# Fourier multiplier
# ---------------------------------------------------------------------------


def _frequency(xi: Union[float, Sequence[float], np.ndarray]) -> float:
    return float(np.linalg.norm(np.atleast_1d(np.asarray(xi, dtype=float))))


def _bessel_tail(alpha2: float, q: float, rho: float) -> float:
    # integral from rho to inf of J0(q r) r^(-1-alpha2) dr, panel by panel between zeros.
    inside = int(q * rho / math.pi) + 2
    zeros = jn_zeros(0, inside + BESSEL_TAIL_PANELS) / q
    edges = [rho] + [z for z in zeros if z > rho]
    panels = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = integrate(lambda r: j0(q * r) * r ** (-1.0 - alpha2), lo, hi, epsrel=1e-12, what="bessel tail")
        panels.append(value)
    return averaged_partial_sums(panels)


def multiplier_m(kernel: KernelSpec, xi: Union[float, Sequence[float], np.ndarray], epsrel: float = 1e-10) -> float:
    """
    m(xi) = integral of (1 - cos(z . xi)) K(z) dz.

    The radial integral over (0, rho) is split at multiples of pi/|xi|; power tails
    are handled in closed form for the constant part and by QAWF (1D) or Bessel
    zero panels with averaged partial sums (2D) for the oscillatory part.
    """
    q = _frequency(xi)
    if q == 0.0:
        return 0.0
    dim = kernel.dimension
    area = sphere_area(dim)
    rho = kernel.rho
    def one_minus_phase(x: float) -> float:
        # 1 - cos x written as 2 sin^2(x/2) keeps relative accuracy near 0.
        if dim == 1:
            return 2.0 * math.sin(0.5 * x) ** 2
        return 1.0 - j0(x)

    def integrand(r: float) -> float:
        return one_minus_phase(q * r) * float(kernel.profile(r)) / r

    period = math.pi / q
    n_panels = int(math.ceil(rho / period))
    edges = [min(k * period, rho) for k in range(n_panels + 1)]
    edges[-1] = rho
    near = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            value, _ = integrate(integrand, lo, hi, epsrel=epsrel, what=f"multiplier at |xi|={q:g}")
            near += value

    far = 0.0
    if kernel.tail.has_power_tail:
        alpha2 = kernel.tail.alpha2
        scale = kernel.ell_at_rho * rho ** alpha2
        if dim == 1:
            oscill, _ = integrate_oscillatory(lambda r: r ** (-1.0 - alpha2), rho, q, what="multiplier tail")
        else:
            oscill = _bessel_tail(alpha2, q, rho)
        far = scale * (rho ** (-alpha2) / alpha2 - oscill)
    return max(0.0, area * (near + far))


def multiplier_lower_constant(kernel: KernelSpec, frequencies: Optional[Sequence[float]] = None) -> float:
    """Fitted inf of m(xi)/M(1/|xi|) over |xi| in [2, 100] (needs 1/|xi| < rho)."""
    if frequencies is None:
        frequencies = np.geomspace(2.0, 100.0, 25)
    ratios = []
    for q in frequencies:
        if 1.0 / q >= kernel.rho:
            continue
        ratios.append(multiplier_m(kernel, q) / mass_M(kernel, 1.0 / q))
    if not ratios:
        raise DomainError("no sampled frequency satisfies 1/|xi| < rho")
    return float(min(ratios))


def spectral_mass_g(kernel: KernelSpec, t: float) -> float:
    """g(t) = integral over |xi| <= t of m(xi) d xi."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    return float(spectral_mass_table(kernel, [t])[0])


def _g_increment(kernel: KernelSpec, lo: float, hi: float) -> float:
    dim = kernel.dimension
    value, _ = integrate(
        lambda s: multiplier_m(kernel, s, epsrel=1e-9) * s ** (dim - 1),
        lo,
        hi,
        epsrel=RTOL_NESTED,
        what="spectral mass g",
    )
    return sphere_area(dim) * value


def spectral_mass_table(kernel: KernelSpec, ts: Sequence[float]) -> np.ndarray:
    """g at every t in `ts` (any order), accumulated over the sorted values."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise DomainError("g is defined for t >= 0")
    order = np.argsort(ts)
    out = np.zeros_like(ts)
    running = 0.0
    previous = 0.0
    for idx in order:
        t = ts[idx]
        if t > previous:
            running += _g_increment(kernel, previous, t)
            previous = t
        out[idx] = running
    return out


@dataclass
class GrowthCheck:
    """Samples of N g(t) <= t g'(t) with g' from central differences."""

    t: np.ndarray
    g: np.ndarray
    g_prime: np.ndarray
    ok: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.ok))


def growth_condition(kernel: KernelSpec, ts: Sequence[float], delta: float = 1e-3, slack: float = 1e-6) -> GrowthCheck:
    """Check N g(t) <= t g'(t) on the sample grid `ts` (all positive)."""
    ts = np.sort(np.asarray(ts, dtype=float))
    if np.any(ts <= 0):
        raise DomainError("growth condition needs positive sample points")
    dim = kernel.dimension
    g_vals = spectral_mass_table(kernel, ts)
    g_prime = np.empty_like(ts)
    for k, t in enumerate(ts):
        upper = _g_increment(kernel, t, t * (1 + delta))
        lower = _g_increment(kernel, t * (1 - delta), t)
        g_prime[k] = (upper + lower) / (2 * delta * t)
    ok = dim * g_vals <= ts * g_prime * (1 + slack)
    return GrowthCheck(ts, g_vals, g_prime, ok)


# ---------------------------------------------------------------------------
# Dilation behaviour
# ---------------------------------------------------------------------------


def _scaling_samples(kernel: KernelSpec, lam: float) -> np.ndarray:
    rho = kernel.rho
    base = rho * np.geomspace(1e-6, 1e3, 4001)
    extra = rho * np.array([1 - 1e-12, 1.0, math.sqrt(lam), lam * (1 - 1e-12), lam, lam * (1 + 1e-12)])
    return np.unique(np.concatenate([base, extra]))


def scaling_gamma(kernel: KernelSpec, lam: float) -> float:
    """gamma(lambda) = lambda^-N sup_z K(z/lambda)/K(z), sampled on [1e-6 rho, 1e3 rho]."""
    if lam < 1:
        raise DomainError(f"gamma is sampled for lambda >= 1, got {lam}")
    if lam == 1:
        return 1.0
    z = _scaling_samples(kernel, lam)
    top = kernel.radial(z / lam)
    bottom = kernel.radial(z)
    if np.any((bottom == 0) & (top > 0)):
        raise HypothesisViolation(
            f"gamma infinite: K(z/lambda)/K(z) is unbounded for lambda={lam:g} (kernel vanishes where its dilation does not)"
        )
    live = bottom > 0
    ratio = top[live] / bottom[live] * lam ** (-kernel.dimension)
    return float(np.max(ratio))


class SigmaResult(NamedTuple):
    """gamma sampled at 1, 1+h, 1+2h, 1+4h and the extrapolated slope sigma."""
    gamma: Dict[float, float]
    sigma: float


def scaling_sigma(kernel: KernelSpec, step: float = SIGMA_STEP) -> SigmaResult:
    """
    sigma = gamma'(1+) by one Richardson level on one-sided differences.

    gamma must be finite on (1, 1.1]; it is sampled at 1.05 and 1.1 besides the
    difference nodes.
    """
    for lam in (1.05, 1.1):
        scaling_gamma(kernel, lam)
    table = {1.0: 1.0}
    for mult in (1, 2, 4):
        lam = 1.0 + mult * step
        table[lam] = scaling_gamma(kernel, lam)
    d_h = (table[1.0 + step] - 1.0) / step
    d_2h = (table[1.0 + 2 * step] - 1.0) / (2 * step)
    return SigmaResult(table, 2.0 * d_h - d_2h)


def kernel_table(kernel: KernelSpec, radii: Sequence[float]) -> Dict[str, np.ndarray]:
    """Columns r, M, ell, m_at_1_over_r for the `kernel table` output."""
    radii = np.asarray(radii, dtype=float)
    return {
        "r": radii,
        "M": np.asarray(mass_M(kernel, radii), dtype=float).reshape(-1),
        "ell": kernel.profile(radii),
        "m_at_1_over_r": np.array([multiplier_m(kernel, 1.0 / r) for r in radii]),
    }
