"""Run orchestration: time loop, exact landing on the final time, error reports."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NumericalError
from ..integrators import StepContext, step
from ..models import Eos, EulerModel, MhdModel
from .cases import CaseSpec, get_case
from .norms import ErrorReport, divergence_diagnostic, l1_error, relative_l1, restrict

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    case: CaseSpec
    params: dict
    grid: object
    bc: object
    model: object
    values: np.ndarray
    t: float
    steps: int
    dts: list
    wall_time: float
    report: ErrorReport | None = None
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def _model_for(spec: CaseSpec, params: dict, dim: int):
    eos = Eos(float(params.get("gamma", spec.gamma)))
    return EulerModel(dim, eos) if spec.model == "euler" else MhdModel(dim, eos)


def run_case(
    spec: CaseSpec | str,
    n,
    order: int | None = None,
    nu: float | None = None,
    overrides: dict | None = None,
    *,
    t_end: float | None = None,
    limiter: str | None = None,
    diffusion: str | None = None,
    min_steps: int | None = None,
    solver: str = "auto",
    safety: float = 1.0,
    snapshots: int = 0,
    ordering: tuple | None = None,
    reduced_magnetic: bool = False,
    damping: float = 0.0,
    max_steps: int = 10**7,
) -> RunResult:
    """Advance a catalog case from its initial data to ``t_end``.

    The step size is the material CFL step clamped by ``t_end / min_steps``
    and by the remaining time, so the run lands exactly on ``t_end``.
    ``snapshots`` equally spaced intermediate states are recorded (plus the
    final one); 2D MHD runs also record divergence diagnostics every step.
    """
    if isinstance(spec, str):
        spec = get_case(spec)
    params = spec.merged(overrides)
    grid = spec.build_grid(n)
    bc = spec.boundary()
    model = _model_for(spec, params, grid.dim)
    t_end = spec.end_time(params) if t_end is None else float(t_end)
    if t_end < 0.0:
        raise ConfigError(f"final time must be non-negative, got {t_end}")
    nu = spec.cfl(params) if nu is None else float(nu)
    min_steps = spec.min_steps if min_steps is None else int(min_steps)
    if min_steps < 1:
        raise ConfigError("min_steps must be >= 1")
    ctx = StepContext(
        model,
        grid,
        bc,
        order=spec.order if order is None else int(order),
        nu=nu,
        limiter=limiter or spec.limiter,
        diffusion=diffusion or spec.diffusion,
        safety=safety,
        ordering=ordering,
        solver=solver,
        reduced_magnetic=reduced_magnetic,
        damping=damping,
    )
    u = spec.init(grid, params)
    model.check(u)
    dt_max = t_end / min_steps if t_end > 0 else 0.0
    track_div = model.name == "mhd" and grid.dim == 2
    marks = [t_end * (k + 1) / (snapshots + 1) for k in range(snapshots)]

    t, steps, dts, snaps, diags = 0.0, 0, [], [], []
    if track_div:
        diags.append(dict(zip(("t", "div_mean", "div_max"), (0.0, *divergence_diagnostic(u, grid, bc)))))
    start = time.perf_counter()
    while t < t_end:
        if steps >= max_steps:
            raise NumericalError(f"step limit {max_steps} reached at t={t}")
        dt = ctx.time_step(u, t, t_end, dt_max)
        if marks and t + dt > marks[0]:
            dt = marks[0] - t
        # stretch by at most 1e-6 relative rather than leave a round-off sliver
        if t_end - (t + dt) <= 1e-6 * dt:
            dt = t_end - t
        if not dt > 0.0:
            raise NumericalError(f"non-positive time step {dt} at t={t}")
        try:
            u = step(ctx, u, dt)
        except NumericalError as exc:
            raise type(exc)(f"{exc} (step {steps + 1}, t={t:.6g})") from exc
        steps += 1
        dts.append(dt)
        t = t_end if dt == t_end - t else t + dt
        if marks and t >= marks[0]:
            snaps.append((t, u.copy()))
            marks.pop(0)
        if track_div:
            diags.append(dict(zip(("t", "div_mean", "div_max"), (t, *divergence_diagnostic(u, grid, bc)))))
    wall = time.perf_counter() - start
    log.info("%s N=%s: %d steps to t=%g in %.2fs", spec.name, grid.n, steps, t, wall)

    report = None
    if spec.reference is not None:
        ref = spec.reference(grid, t, params)
        report = l1_error(u, ref, grid, model)
        report.wall_time = wall
        report.steps = steps
    return RunResult(spec, params, grid, bc, model, u, t, steps, dts, wall, report, snaps, diags)


def ap_errors(result: RunResult) -> dict:
    """Relative L1 errors of density and pressure against ``rho0 = 1``, ``p0 = 1/M^2``."""
    mach = result.params["mach"]
    rho, _, p = result.model.primitives(result.values)
    return {
        "rho": relative_l1(rho, 1.0, result.grid),
        "p": relative_l1(p, 1.0 / mach**2, result.grid),
    }


def self_convergence(spec: CaseSpec | str, resolutions, **kw) -> list:
    """L1 distances (conserved variables, summed) between successive doublings.

    Each finer solution is restricted onto the coarser grid by cell averaging.
    """
    if isinstance(spec, str):
        spec = get_case(spec)
    runs = [run_case(spec, n, **kw) for n in resolutions]
    out = []
    for coarse, fine in zip(runs, runs[1:]):
        diff = restrict(fine.values, 2) - coarse.values
        out.append(float(np.sum(np.abs(diff)) * coarse.grid.cell_volume))
    return out
