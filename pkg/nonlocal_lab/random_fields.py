"""
Deterministic random grid functions.

Every stream is a Philox generator keyed on (master seed, crc32 of the check
name, index), so adding a check or a seed never shifts another stream.
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import DomainError
from .models import Domain, GridFunction

DEFAULT_MASTER_SEED = 42
SMOOTH_MODES = 8


def stream(master_seed: int, name: str, index: int) -> np.random.Generator:
    """Counter-based generator for one (name, index) pair."""
    key = np.random.SeedSequence([int(master_seed), zlib.crc32(name.encode("utf-8")), int(index)])
    return np.random.Generator(np.random.Philox(key))


def white_noise(domain: Domain, rng: np.random.Generator) -> GridFunction:
    """Independent standard normal interior values, zero exterior."""
    return GridFunction.from_interior(domain, rng.standard_normal(domain.n_interior))


def smooth_field(domain: Domain, rng: np.random.Generator, modes: int = SMOOTH_MODES) -> GridFunction:
    """
    Sum of low sine modes of the bounding box with coefficients decaying like 1/k.

    Values are zero outside Omega. Fields of this kind keep the ratios of the
    Hardy and rearrangement checks away from the grid scale.
    """
    lower, upper = domain.geometry.bounds
    x = (domain.centers("interior") - lower) / (upper - lower)
    if domain.dimension == 1:
        k = np.arange(1, modes + 1)
        coeffs = rng.standard_normal(modes) / k
        values = np.sin(np.pi * np.outer(x[:, 0], k)) @ coeffs
    else:
        k1, k2 = np.meshgrid(np.arange(1, modes + 1), np.arange(1, modes + 1), indexing="ij")
        coeffs = rng.standard_normal(k1.shape) / (k1 + k2)
        sx = np.sin(np.pi * np.outer(x[:, 0], k1[:, 0]))
        sy = np.sin(np.pi * np.outer(x[:, 1], k2[0, :]))
        values = np.einsum("ia,ib,ab->i", sx, sy, coeffs)
    return GridFunction.from_interior(domain, values)


def random_grid_function(
    domain: Domain,
    name: str,
    index: int,
    master_seed: int = DEFAULT_MASTER_SEED,
    kind: str = "white",
) -> GridFunction:
    """Zero-exterior random function of the given kind: "white", "smooth" or "positive"."""
    rng = stream(master_seed, name, index)
    if kind == "white":
        return white_noise(domain, rng)
    if kind == "smooth":
        return smooth_field(domain, rng)
    if kind == "positive":
        return GridFunction.from_interior(domain, rng.uniform(0.0, 1.0, domain.n_interior))
    raise DomainError(f"unknown random field kind {kind!r}; use 'white', 'smooth' or 'positive'")
