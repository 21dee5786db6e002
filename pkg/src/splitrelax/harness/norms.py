"""Error norms, convergence tables and divergence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..grid import BoundaryCondition, Grid, pad_interior


def derived_variables(values, model) -> dict:
    """Named scalar fields computed from interior conserved ``values``."""
    if model.name == "euler":
        rho, u, p = model.primitives(values)
        out = {"rho": rho}
        if model.dim == 1:
            out["u"] = u[0]
        else:
            out["|u|"] = np.sqrt(np.sum(u * u, axis=0))
        out["p"] = p
        return out
    rho, u, p, B, phi = model.primitives(values)
    return {
        "rho": rho,
        "|u|": np.sqrt(np.sum(u * u, axis=0)),
        "p": p,
        "|B|": np.sqrt(np.sum(B * B, axis=0)),
    }


@dataclass
class ErrorReport:
    """Per-variable L1 errors of one run."""

    errors: dict
    n: tuple
    dx: tuple
    wall_time: float = 0.0
    steps: int = 0
    extra: dict = field(default_factory=dict)


def l1_norm(a, grid: Grid) -> float:
    """``sum |a| * cell volume``."""
    return float(np.sum(np.abs(a)) * grid.cell_volume)


def l1_error(values, reference, grid: Grid, model, variables=None) -> ErrorReport:
    """L1 errors of derived variables between two interior states on ``grid``."""
    values = np.asarray(values)
    reference = np.asarray(reference)
    if values.shape != reference.shape or values.shape[1:] != grid.n:
        raise ConfigError(f"grid mismatch: {values.shape} vs {reference.shape} on {grid.n}")
    a = derived_variables(values, model)
    b = derived_variables(reference, model)
    names = list(a) if variables is None else list(variables)
    errs = {k: l1_norm(a[k] - b[k], grid) for k in names}
    return ErrorReport(errs, grid.n, grid.dx)


def relative_l1(field_values, constant: float, grid: Grid) -> float:
    """``||q - q0||_1 / ||q0||_1`` against a constant reference ``q0``."""
    area = grid.cell_volume * grid.size
    return l1_norm(field_values - constant, grid) / (abs(constant) * area)


@dataclass
class EocTable:
    """Rows ``(N, var, error, rate)``; rate is ``None`` on the coarsest grid."""

    rows: list

    def rates(self, var: str) -> list:
        return [r[3] for r in self.rows if r[1] == var and r[3] is not None]

    def errors(self, var: str) -> list:
        return [r[2] for r in self.rows if r[1] == var]

    def format(self) -> str:
        lines = [f"{'N':>6}  {'var':>5}  {'error':>12}  {'rate':>7}"]
        for n, var, err, rate in self.rows:
            rs = "---" if rate is None else f"{rate:.3f}"
            lines.append(f"{n:>6}  {var:>5}  {err:12.4e}  {rs:>7}")
        return "\n".join(lines)


def eoc_rate(e_coarse: float, e_fine: float) -> float:
    return float(np.log2(e_coarse / e_fine))


def eoc(reports: list, variables=None) -> EocTable:
    """Convergence rates ``log2(e_{k-1}/e_k)`` for strictly doubling resolutions."""
    if not reports:
        raise ConfigError("no error reports given")
    for prev, cur in zip(reports, reports[1:]):
        if any(2 * a != b for a, b in zip(prev.n, cur.n)):
            raise ConfigError(f"resolutions must double: {prev.n} -> {cur.n}")
    names = list(reports[0].errors) if variables is None else list(variables)
    rows = []
    for var in names:
        for k, rep in enumerate(reports):
            rate = None if k == 0 else eoc_rate(reports[k - 1].errors[var], rep.errors[var])
            rows.append((rep.n[0], var, rep.errors[var], rate))
    return EocTable(rows)


def restrict(values, factor: int = 2):
    """Average blocks of ``factor`` cells along every grid axis."""
    v = np.asarray(values)
    for axis in range(1, v.ndim):
        n = v.shape[axis]
        if n % factor:
            raise ConfigError(f"cannot restrict {n} cells by {factor}")
        shape = v.shape[:axis] + (n // factor, factor) + v.shape[axis + 1 :]
        v = v.reshape(shape).mean(axis=axis + 1)
    return v


def divergence_diagnostic(values, grid: Grid, bc: BoundaryCondition):
    """Mean and max of the compact corner divergence of ``(B1, B2)``.

    The divergence is evaluated at cell corners from the four surrounding
    cells (a central difference on the 2x2 stencil). Corners on
    non-periodic boundaries are skipped.
    """
    if grid.dim != 2:
        raise ConfigError("divergence diagnostic needs a 2D field")
    B = pad_interior(np.asarray(values)[5:7], grid, bc)
    g = grid.ghost
    nx, ny = grid.n
    ex = nx if bc.periodic(0) else nx - 1
    ey = ny if bc.periodic(1) else ny - 1
    if ex < 1 or ey < 1:
        return 0.0, 0.0
    c = B[:, g : g + ex + 1, g : g + ey + 1]
    B1, B2 = c[0], c[1]
    dx, dy = grid.dx
    div = (B1[1:, :-1] + B1[1:, 1:] - B1[:-1, :-1] - B1[:-1, 1:]) / (2.0 * dx) + (
        B2[:-1, 1:] + B2[1:, 1:] - B2[:-1, :-1] - B2[1:, :-1]
    ) / (2.0 * dy)
    a = np.abs(div)
    return float(a.mean()), float(a.max())
