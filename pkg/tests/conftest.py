import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from nonlocal_lab.domain import build_grid  # noqa: E402
from nonlocal_lab.forms import assemble  # noqa: E402
from nonlocal_lab.models import Ball, EllSpec, Interval, KernelSpec, TailSpec  # noqa: E402

settings.register_profile("default", max_examples=50, deadline=None)
settings.register_profile(
    "ci",
    max_examples=15,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def log_kernel():
    """l = 1, rho = 1, zero tail: K(z) = 1/|z| on |z| <= 1 in one dimension."""
    return KernelSpec(dimension=1, ell=EllSpec.constant(1.0), tail=TailSpec.zero())


@pytest.fixture(scope="session")
def tailed_kernel():
    return KernelSpec(dimension=1, ell=EllSpec.constant(1.0), tail=TailSpec.power_decay(0.5))


@pytest.fixture(scope="session")
def interval_domain():
    return build_grid(Interval(-1.0, 1.0), 1.0 / 16, 1.0)


@pytest.fixture(scope="session")
def log_form(log_kernel, interval_domain):
    return assemble(interval_domain, log_kernel)


@pytest.fixture(scope="session")
def tailed_form(tailed_kernel, interval_domain):
    return assemble(interval_domain, tailed_kernel)


@pytest.fixture(scope="session")
def disk_form():
    kernel = KernelSpec(dimension=2, ell=EllSpec.constant(1.0, rho=0.5), tail=TailSpec.zero())
    domain = build_grid(Ball(1.0, 2), 0.25, 0.5)
    return assemble(domain, kernel)
