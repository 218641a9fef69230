"""
CLI entrypoint for the nonlocal form laboratory.

Flow:
- Parse the subcommand and flags, configure logging once.
- Load and validate the run configuration (defaults when --config is absent).
- Build the kernel and grid, run the requested computation.
- Write CSV/JSON/binary artifacts atomically under the output directory and
  print a short JSON summary on stdout.

Library errors (NonlocalError) end the run with exit status 2 and the message
on stderr; nothing is written for a failing run.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from nonlocal_lab.analysis import lorentz_norm, lorentz_weight, rearrange
from nonlocal_lab.config import RunConfig, load_config
from nonlocal_lab.errors import ConfigError, NonlocalError
from nonlocal_lab.forms import assemble, j_perimeter
from nonlocal_lab.io import dumps, form_info, grid_frame, read_form, read_values, write_csv, write_form, write_json
from nonlocal_lab.kernels import kernel_table, power_modulus, scaling_sigma
from nonlocal_lab.models import Ball, FormMatrix, GridFunction, Interval
from nonlocal_lab.random_fields import random_grid_function
from nonlocal_lab.report import run_acceptance
from nonlocal_lab.solve import (
    pohozaev_check,
    refinement_study,
    solve_dirichlet,
    solve_dirichlet_nonhom,
    solve_neumann,
    solve_sublinear,
)
from nonlocal_lab.spectral import berezin_bound, dirichlet_eigen
from nonlocal_lab.verify import CheckContext, check_names, tolerance_for, verify_batch

logger = logging.getLogger("nonlocal_lab.cli")

# Radii of `kernel table`, as fractions of rho.
TABLE_FRACTIONS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Configure and parse CLI arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="Run configuration (key = value lines)")
    common.add_argument("--out", type=Path, default=None, help="Output directory (assemble: output file)")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: WARNING)",
    )

    parser = argparse.ArgumentParser(description="Nonlocal Dirichlet forms with weakly singular kernels")
    sub = parser.add_subparsers(dest="command", required=True)

    kernel = sub.add_parser("kernel", parents=[common], help="Kernel functionals")
    kernel.add_argument("action", choices=["table", "sigma"])

    sub.add_parser("assemble", parents=[common], help="Assemble the discrete form and write form.bin")

    form = sub.add_parser("form", parents=[common], help="Inspect an assembled form file")
    form.add_argument("action", choices=["info"])
    form.add_argument("path", type=Path, help="Form file written by `assemble`")

    eigen = sub.add_parser("eigen", parents=[common], help="Dirichlet eigenpairs")
    eigen.add_argument("action", nargs="?", choices=["berezin"], default=None)
    eigen.add_argument("--k", type=int, default=6, help="Number of eigenpairs (default: 6)")
    eigen.add_argument("--vectors", action="store_true", help="Also write one CSV per eigenfunction")

    verify = sub.add_parser("verify", parents=[common], help="Seeded inequality checks")
    verify.add_argument("--check", default=None, help=f"One of: {', '.join(check_names())} (default: config list)")
    verify.add_argument("--seeds", type=int, default=None, help="Random functions per check (default: config)")

    solve = sub.add_parser("solve", parents=[common], help="Linear and semilinear solvers")
    solve.add_argument("problem", choices=["dirichlet", "nonhom", "sublinear", "neumann", "pohozaev"])
    solve.add_argument("--f", dest="f_path", type=Path, default=None, help="CSV with one source value per interior cell")
    solve.add_argument("--g", dest="g_path", type=Path, default=None, help="CSV with one exterior value per shell cell (nonhom)")
    solve.add_argument("--far-value", type=float, default=0.0, help="Exterior datum beyond the shell (nonhom)")
    solve.add_argument("--h-sweep", default=None, help="Comma list of cell sizes for a refinement study (dirichlet)")

    perimeter = sub.add_parser("perimeter", parents=[common], help="J-perimeter of a centered ball inside Omega")
    perimeter.add_argument("--radius", type=float, default=None, help="Radius of E (default: half the inradius)")
    perimeter.add_argument(
        "--boundary-nu",
        type=float,
        default=1.0,
        help="Exponent nu of the boundary modulus w0(s) = s^nu for the integrability diagnostic",
    )

    rearr = sub.add_parser("rearrange", parents=[common], help="Decreasing rearrangement of a grid function")
    rearr.add_argument("--f", dest="f_path", type=Path, default=None, help="CSV of interior values (default: seeded smooth field)")

    report = sub.add_parser("report", parents=[common], help="Run the acceptance suite and write report.json")
    report.add_argument("--seeds", type=int, default=None, help="Random functions per seeded item (default: config)")

    return parser.parse_args(argv)


def _out_dir(args: argparse.Namespace, config: RunConfig) -> Path:
    return args.out if args.out is not None else config.output_dir


def _parse_sweep(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"--h-sweep expects a comma list of numbers, got {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise ConfigError(f"--h-sweep needs positive cell sizes, got {text!r}")
    return values


def _assembled(config: RunConfig) -> FormMatrix:
    domain = config.build_domain()
    logger.info("assembling %s on %d interior cells", config.kernel_spec().label(), domain.n_interior)
    return assemble(domain, config.kernel_spec())


def _source(form: FormMatrix, path: Optional[Path], default: float = 1.0) -> np.ndarray:
    n_int = form.domain.n_interior
    if path is None:
        return np.full(n_int, default)
    return read_values(path, n_int)


def cmd_kernel(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    kernel = config.kernel_spec()
    out = _out_dir(args, config)
    if args.action == "table":
        table = kernel_table(kernel, kernel.rho * np.array(TABLE_FRACTIONS))
        path = write_csv(out / "kernel_table.csv", table)
        return {"kernel": kernel.label(), "table": str(path)}
    sigma = scaling_sigma(kernel)
    return {"kernel": kernel.label(), "sigma": sigma.sigma, "gamma": {f"{k:g}": v for k, v in sigma.gamma.items()}}


def cmd_assemble(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    form = _assembled(config)
    path = args.out if args.out is not None else config.output_dir / "form.bin"
    write_form(path, form)
    return {"form": str(path), **form_info(form)}


def cmd_form(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    return form_info(read_form(args.path))


def cmd_eigen(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    form = _assembled(config)
    out = _out_dir(args, config)
    if args.action == "berezin":
        lam1 = float(dirichlet_eigen(form, 1).eigenvalues[0])
        bound = berezin_bound(config.kernel_spec(), form.domain)
        return {"bound": bound.bound, "lambda_1": lam1, "slack": lam1 - bound.bound, "condition_ok": bound.condition_ok}
    k = min(args.k, form.domain.n_interior)
    dec = dirichlet_eigen(form, k)
    path = write_csv(out / "eigen.csv", {"j": np.arange(1, k + 1), "lambda_j": dec.eigenvalues})
    if args.vectors:
        for j in range(k):
            write_csv(out / f"eigenfunction_{j + 1}.csv", grid_frame(dec.eigenfunction(j)))
    return {"eigenvalues": str(path), "lambda_1": float(dec.eigenvalues[0]), "k": k}


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    checks = [args.check] if args.check else config.verify.checks
    seeds = args.seeds if args.seeds is not None else config.verify.seeds
    if seeds < 1:
        raise ConfigError(f"--seeds must be at least 1, got {seeds}")
    for name in checks:
        if name not in check_names():
            raise ConfigError(f"unknown check {name!r}; valid checks: {', '.join(check_names())}")
    ctx = CheckContext(_assembled(config))
    out = _out_dir(args, config)
    summaries = []
    for name in checks:
        tol = tolerance_for(name, config.verify.tol_exact, config.verify.tol_cross)
        batch = verify_batch(name, ctx, seeds, config.verify.master_seed, tol=tol)
        write_csv(out / f"verify_{name}.csv", batch.rows())
        summaries.append(batch.summary())
    write_json(out / "verify_summary.json", {"checks": summaries, "seeds": seeds, "master_seed": config.verify.master_seed})
    return {"checks": summaries}


def cmd_solve(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    out = _out_dir(args, config)
    tol = config.solver.tol
    if args.problem == "dirichlet" and args.h_sweep:
        hs = _parse_sweep(args.h_sweep)
        study = refinement_study(config.kernel_spec(), config.shape(), hs, lambda x: np.ones(x.shape[0]), r_ext=config.r_ext)
        columns = {key: [row[key] for row in study.rows] for key in study.rows[0]}
        path = write_csv(out / "refinement.csv", columns)
        return {"refinement": str(path), "worst_growth": study.worst_growth, "bounded": study.bounded()}

    form = _assembled(config)
    if args.problem == "dirichlet":
        report = solve_dirichlet(form, _source(form, args.f_path), tol=tol)
    elif args.problem == "nonhom":
        domain = form.domain
        shell = np.zeros(domain.n_shell) if args.g_path is None else read_values(args.g_path, domain.n_shell)
        g = GridFunction.from_interior(domain, np.zeros(domain.n_interior), shell)
        report = solve_dirichlet_nonhom(form, _source(form, args.f_path), g, far_value=args.far_value, tol=tol)
    elif args.problem == "neumann":
        if args.f_path is None:
            # Default data: the centered first coordinate, which integrates to 0.
            x = form.domain.centers("interior")[:, 0]
            f = x - x.mean()
        else:
            f = read_values(args.f_path, form.domain.n_interior)
        report = solve_neumann(form, f, tol=tol)
    else:
        report = solve_sublinear(form, config.source(), max_iter=config.solver.max_iter)
        if args.problem == "pohozaev":
            return pohozaev_check(form, report.solution, config.source())

    write_csv(out / f"solution_{args.problem}.csv", grid_frame(report.solution))
    write_json(out / f"solve_{args.problem}.json", report.to_dict())
    return report.to_dict()


def cmd_perimeter(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    form = _assembled(config)
    geometry = form.domain.geometry
    radius = args.radius if args.radius is not None else 0.5 * geometry.inradius
    center = 0.5 * (geometry.bounds[0] + geometry.bounds[1])
    if form.domain.dimension == 1:
        subset = Interval(float(center[0] - radius), float(center[0] + radius))
    else:
        subset = Ball(radius, 2, tuple(center))
    if not 0 < args.boundary_nu <= 1:
        raise ConfigError(f"--boundary-nu must lie in (0, 1], got {args.boundary_nu}")
    result = j_perimeter(form, subset, boundary_modulus=power_modulus(args.boundary_nu))
    return {"radius": radius, "perimeter": result.value, "modulus_integral": result.diagnostic._asdict()}


def cmd_rearrange(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    domain = config.build_domain()
    if args.f_path is None:
        u = random_grid_function(domain, "rearrange", 0, config.verify.master_seed, kind="smooth")
    else:
        u = GridFunction.from_interior(domain, read_values(args.f_path, domain.n_interior))
    u_star, profile = rearrange(u)
    out = _out_dir(args, config)
    write_csv(out / "rearranged.csv", grid_frame(u_star))
    weight = lorentz_weight(config.kernel_spec(), domain.measure, domain.h)
    return {
        "l2": u.norm_p(2),
        "l2_rearranged": u_star.norm_p(2),
        "lorentz_2": lorentz_norm(u, weight, 2.0),
        "max": float(profile.values[0]) if profile.values.size else 0.0,
    }


def cmd_report(args: argparse.Namespace, config: RunConfig) -> Dict[str, object]:
    seeds = args.seeds if args.seeds is not None else config.verify.seeds
    payload = run_acceptance(seeds, config.verify.master_seed)
    path = write_json(_out_dir(args, config) / "report.json", payload, timestamp=True)
    return {"report": str(path), "passed": payload["passed"], "total": payload["total"]}


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], Dict[str, object]]] = {
    "kernel": cmd_kernel,
    "assemble": cmd_assemble,
    "form": cmd_form,
    "eigen": cmd_eigen,
    "verify": cmd_verify,
    "solve": cmd_solve,
    "perimeter": cmd_perimeter,
    "rearrange": cmd_rearrange,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entrypoint: load config, dispatch the subcommand, print its summary."""
    args = parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
        summary = COMMANDS[args.command](args, config)
    except NonlocalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
