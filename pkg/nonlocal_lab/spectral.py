"""
Dirichlet eigenpairs of the discrete form and the calculus built on them.

Eigenvalues solve A phi = lambda h^N phi on interior cells, with A the stiffness
matrix of the form. Dense symmetric decomposition is used up to DENSE_LIMIT
cells, shift-invert Lanczos above.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.linalg import LinAlgError, eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import ConvergenceError, DomainError, HypothesisViolation
from .forms import censored_matrix, stiffness_matrix
from .kernels import GrowthCheck, growth_condition, is_profile_nonincreasing, spectral_mass_g
from .models import Domain, FormMatrix, GridFunction, KernelSpec, SpectralDecomposition, ball_volume

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000


def _decompose(matrix: np.ndarray, domain: Domain, k: Optional[int], shift: float) -> SpectralDecomposition:
    n = matrix.shape[0]
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    scaled = matrix / domain.cell_volume
    if n <= DENSE_LIMIT:
        try:
            values, vectors = eigh(scaled, subset_by_index=[0, k - 1])
        except LinAlgError as exc:
            raise ConvergenceError(f"dense eigensolver failed: {exc}") from exc
    else:
        if k >= n - 1:
            raise DomainError(f"k={k} is too close to n={n} for the iterative eigensolver; lower k")
        try:
            values, vectors = eigsh(scaled, k=k, sigma=shift, which="LM", tol=1e-12)
        except ArpackNoConvergence as exc:
            partial = exc.eigenvalues
            residual = float("nan")
            if partial is not None and len(partial):
                vec = exc.eigenvectors[:, 0]
                residual = float(np.linalg.norm(scaled @ vec - partial[0] * vec))
            raise ConvergenceError(
                f"shift-invert Lanczos did not converge for k={k}", residual=residual
            ) from exc
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
    vectors = vectors / math.sqrt(domain.cell_volume)
    signs = np.where(vectors.sum(axis=0) < 0, -1.0, 1.0)
    logger.info("eigen solve: n=%d, k=%d, lambda_1=%.6g", n, k, values[0])
    return SpectralDecomposition(domain=domain, eigenvalues=values, vectors=vectors * signs)


def dirichlet_eigen(form: FormMatrix, k: Optional[int] = None) -> SpectralDecomposition:
    """First k Dirichlet eigenpairs (all of them when k is None), h^N sum phi^2 = 1."""
    return _decompose(stiffness_matrix(form), form.domain, k, shift=0.0)


def censored_eigen(form: FormMatrix, k: Optional[int] = None) -> SpectralDecomposition:
    """Eigenpairs of the censored form; lambda_1 = 0 with constant eigenfunction."""
    return _decompose(censored_matrix(form), form.domain, k, shift=-1.0)


def _require_complete(dec: SpectralDecomposition) -> None:
    if not dec.complete:
        raise DomainError(
            f"spectral calculus needs the full decomposition ({dec.count} of {dec.domain.n_interior} eigenpairs given)"
        )


def spectral_apply(dec: SpectralDecomposition, u: GridFunction, power: float = 1.0) -> GridFunction:
    """sum_j lambda_j^power u_j phi_j with u_j = h^N sum u phi_j."""
    _require_complete(dec)
    coeffs = dec.coefficients(u)
    values = dec.vectors @ (dec.eigenvalues ** power * coeffs)
    return GridFunction.from_interior(dec.domain, values)


def h_norm(dec: SpectralDecomposition, u: GridFunction) -> float:
    """(sum lambda_j u_j^2)^(1/2), the energy norm."""
    _require_complete(dec)
    coeffs = dec.coefficients(u)
    return float(math.sqrt(np.sum(dec.eigenvalues * coeffs ** 2)))


def hstar_norm(dec: SpectralDecomposition, v: GridFunction) -> float:
    """(sum lambda_j^-1 v_j^2)^(1/2), the dual norm."""
    _require_complete(dec)
    coeffs = dec.coefficients(v)
    return float(math.sqrt(np.sum(coeffs ** 2 / dec.eigenvalues)))


def hstar_dual_pairing(dec: SpectralDecomposition, u: GridFunction, v: GridFunction) -> Dict[str, float]:
    """|h^N sum u v| next to ||u||_H ||v||_H*; the first never exceeds the second."""
    pairing = abs(dec.domain.cell_volume * float(np.dot(u.interior, v.interior)))
    bound = h_norm(dec, u) * hstar_norm(dec, v)
    return {"pairing": pairing, "bound": bound}


# ---------------------------------------------------------------------------
# Berezin-type bounds
# ---------------------------------------------------------------------------


@dataclass
class BerezinBound:
    """Lower bound for lambda_1 and whether N g(t) <= t g'(t) held on the sample grid."""

    bound: float
    condition_ok: bool
    t_star: float
    growth: GrowthCheck


def _critical_frequency(domain: Domain, k: int = 1) -> float:
    dim = domain.dimension
    return 2.0 * math.pi * k ** (1.0 / dim) / (ball_volume(dim) * domain.measure) ** (1.0 / dim)


def berezin_bound(kernel: KernelSpec, domain: Domain) -> BerezinBound:
    """
    lambda_1 >= |Omega| / (2 pi)^N g(t*), t* = 2 pi / (omega_N |Omega|)^(1/N).

    Valid for a nonincreasing profile; the growth condition is sampled at
    t* times 1/4, 1/2, 1, 2 and 4.
    """
    if not is_profile_nonincreasing(kernel):
        raise HypothesisViolation("hypothesis violated: the Berezin bound needs a nonincreasing profile l")
    dim = domain.dimension
    t_star = _critical_frequency(domain)
    bound = domain.measure / (2.0 * math.pi) ** dim * spectral_mass_g(kernel, t_star)
    growth = growth_condition(kernel, t_star * np.array([0.25, 0.5, 1.0, 2.0, 4.0]))
    if not growth.holds:
        logger.warning("growth condition N g(t) <= t g'(t) failed on part of the sample grid")
    return BerezinBound(bound=float(bound), condition_ok=growth.holds, t_star=t_star, growth=growth)


def eigenvalue_sum_bound(kernel: KernelSpec, domain: Domain, k: int) -> float:
    """|Omega| / (2 pi)^N g(2 pi k^(1/N) / (omega_N |Omega|)^(1/N)), a lower estimate of sum_{j<=k} lambda_j."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    return float(domain.measure / (2.0 * math.pi) ** domain.dimension * spectral_mass_g(kernel, _critical_frequency(domain, k)))


def eigenvalue_sum_check(dec: SpectralDecomposition, kernel: KernelSpec, k: int) -> Dict[str, float]:
    """sum of the first k eigenvalues against eigenvalue_sum_bound (diagnostic only)."""
    if k > dec.count:
        raise DomainError(f"decomposition holds {dec.count} eigenvalues, {k} requested")
    total = float(np.sum(dec.eigenvalues[:k]))
    bound = eigenvalue_sum_bound(kernel, dec.domain, k)
    return {"k": float(k), "sum": total, "bound": bound, "ratio": total / bound if bound > 0 else math.inf}
