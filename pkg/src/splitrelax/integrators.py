"""Semi-implicit relaxed time steppers.

Each step freezes the relaxation speeds (and for MHD the cleaning speed)
from the data at ``t^n``, then runs prediction stages in eliminated form:
one Helmholtz-type solve ``(I - dt^2 alpha^2 L_a) y = rhs`` per fast
sub-flux and stage, with ``L_a`` the weighted discrete Laplacian. The
correction rebuilds the update from the Rusanov slow fluxes and the central
fast fluxes at the predicted states, so the scheme stays conservative.

Notation used below (all divergences are per-cell flux differences over
``dx`` summed over axes):

``D_ex(q)``  slow Rusanov flux divergence (reconstructed for order 2),
``D_j(q)``   central divergence of fast sub-flux ``j``,
``L_j``      weighted Laplacian with the frozen speeds ``a[:, j]``.

The partitioned Runge-Kutta stepper covers every scheme: with the
one-stage pair (explicit ``[[0]]``, implicit ``[[1]]``) it is the
first-order prediction-correction scheme, with the LSDIRK2 pair the
second-order one. Stage ``r`` with implicit diagonal ``g = alpha_rr`` reads

    P_r   = q^n - dt sum_{k<=r} alpha_rk D_ex(Qex^(k-1)) - dt sum_{k<r} alpha_rk sum_j D_j(q^(k))
    y_A   : (I - dt^2 g^2 L_A) y_A = P_r - dt g D_A(q^n) + dt^2 g sum_{k<r} alpha_rk L_A q^(k)
    y_B   : (I - dt^2 g^2 L_B) y_B = y_A - dt g D_B(y_A)
    q^(r) = last sub-stage result
    Qex^(r) = q^n - dt sum_{k<=r} alpha~_{r+1,k} h^(k),   h^(k) = D_ex(Qex^(k-1)) + sum_j D_j(q^(k))

and the step closes with ``q^{n+1} = q^n - dt sum_r (b~_r D_ex(Qex^(r-1)) + b_r sum_j D_j(q^(r)))``.
The ``L q^(k)`` history terms come from eliminating the relaxation
variable, which restarts each step from ``f_fast(q^n)`` (equilibrium).
Later sub-stages restart their relaxation variable from the projection
``f_B(y_A)``, exactly as in the first-order sequential scheme, so they carry
no history. Mixing that restart with the ``f_B(q^n)`` history is unstable
when ``B`` is the stiff sub-flux.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, StateError
from .grid import BoundaryCondition, Grid, pad_interior
from .models import check_positive
from .linsolve import DEFAULT_TOL, HelmholtzSystem, solve_block
from .spatial import (
    compute_dt,
    compute_relax_speeds,
    explicit_divergence,
    fast_divergence,
    weighted_laplacian,
)


@dataclass(frozen=True)
class ButcherPair:
    """Explicit/implicit tableau pair of a partitioned Runge-Kutta method."""

    name: str
    A_ex: np.ndarray
    b_ex: np.ndarray
    A_im: np.ndarray
    b_im: np.ndarray

    def __post_init__(self):
        for attr in ("A_ex", "b_ex", "A_im", "b_im"):
            object.__setattr__(self, attr, np.asarray(getattr(self, attr), dtype=float))
        s = self.b_ex.size
        if self.A_ex.shape != (s, s) or self.A_im.shape != (s, s) or self.b_im.size != s:
            raise ConfigError(f"inconsistent tableau shapes in {self.name}")
        if np.any(np.triu(self.A_ex) != 0.0):
            raise ConfigError("explicit tableau must be strictly lower triangular")
        if np.any(np.triu(self.A_im, 1) != 0.0) or np.any(np.diag(self.A_im) == 0.0):
            raise ConfigError("implicit tableau must be lower triangular with nonzero diagonal")

    @property
    def s(self) -> int:
        return self.b_ex.size

    @property
    def c_ex(self) -> np.ndarray:
        return self.A_ex.sum(axis=1)

    @property
    def c_im(self) -> np.ndarray:
        return self.A_im.sum(axis=1)


FIRST_ORDER = ButcherPair("euler", [[0.0]], [1.0], [[1.0]], [1.0])


def lsdirk2() -> ButcherPair:
    """Second-order L-stable SDIRK pair with ``eta = 1 - 1/sqrt(2)``."""
    eta = 1.0 - 1.0 / np.sqrt(2.0)
    ct = 1.0 / (2.0 * eta)
    return ButcherPair(
        "lsdirk2",
        [[0.0, 0.0], [ct, 0.0]],
        [1.0 - eta, eta],
        [[eta, 0.0], [1.0 - eta, eta]],
        [1.0 - eta, eta],
    )


LSDIRK2 = lsdirk2()


@dataclass
class StepContext:
    """Configuration shared by all steps of one run.

    Parameters
    ----------
    model : EulerModel or MhdModel
    grid, bc : Grid, BoundaryCondition
    order : {1, 2}
        1 uses piecewise-constant data and the one-stage pair; 2 uses linear
        reconstruction and LSDIRK2.
    limiter : {"minmod", "none"}
        Slope used for order 2 (``"none"`` is the unlimited central slope).
    diffusion : {"local", "global"}
        Rusanov coefficient per face or maximised over the grid.
    ordering : tuple of int, optional
        Order of the fast sub-stages; defaults to the model's.
    solver : {"auto", "cg", "direct"}
        2D Helmholtz solver.
    reduced_magnetic : bool
        Solve only the B and phi components in the magnetic sub-stage.
    damping : float
        Optional GLM decay rate; ``phi`` is multiplied by ``exp(-damping dt)``.
    """

    model: object
    grid: Grid
    bc: BoundaryCondition
    order: int = 1
    nu: float = 0.5
    limiter: str = "minmod"
    diffusion: str = "local"
    safety: float = 1.0
    ordering: tuple | None = None
    solver: str = "auto"
    tol: float = DEFAULT_TOL
    reduced_magnetic: bool = False
    damping: float = 0.0
    pair: ButcherPair | None = None
    stats: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ConfigError(f"order must be 1 or 2, got {self.order}")
        if self.grid.dim != getattr(self.model, "dim", self.grid.dim):
            raise ConfigError("model and grid dimensions differ")
        if self.order == 2 and self.grid.ghost < 2:
            raise ConfigError("second order needs ghost width >= 2")
        order = self.fast_order
        if sorted(order) != list(range(self.model.k)):
            raise ConfigError(f"ordering {order} must permute the {self.model.k} fast sub-fluxes")

    @property
    def fast_order(self) -> tuple:
        return tuple(self.ordering) if self.ordering is not None else tuple(self.model.default_order)

    @property
    def butcher(self) -> ButcherPair:
        if self.pair is not None:
            return self.pair
        return FIRST_ORDER if self.order == 1 else LSDIRK2

    @property
    def reconstruction(self) -> str:
        return "constant" if self.order == 1 else self.limiter

    def replace(self, **kw) -> "StepContext":
        return dataclasses.replace(self, **kw)

    def time_step(self, values, t=0.0, t_end=np.inf, dt_max=np.inf) -> float:
        return compute_dt(values, self.grid, self.model, self.nu, dt_max, t, t_end)


class _Frozen:
    """Per-step operators with speeds frozen from ``q^n``."""

    def __init__(self, ctx: StepContext, u: np.ndarray, dt: float):
        self.ctx = ctx
        self.dt = dt
        model = ctx.model
        self.ch = model.cleaning_speed(u, range(ctx.grid.dim))
        self.model = model.with_cleaning_speed(self.ch)
        self.a = compute_relax_speeds(u, ctx.grid, self.model, ctx.safety)

    def pad(self, u):
        return pad_interior(u, self.ctx.grid, self.ctx.bc)

    def d_ex(self, u):
        c = self.ctx
        return explicit_divergence(self.pad(u), c.grid, self.model, c.reconstruction, c.diffusion)

    def d_fast(self, u, j):
        return fast_divergence(self.pad(u), self.ctx.grid, self.model, j)

    def lap(self, u, j):
        return weighted_laplacian(self.pad(u), self.ctx.grid, self.a[:, j])

    def system(self, j, coef=1.0) -> HelmholtzSystem:
        return HelmholtzSystem.from_speeds(self.ctx.grid, self.ctx.bc, self.a[:, j], self.dt, coef)

    def solve(self, rhs, j, coef=1.0, comps=None):
        sys = self.system(j, coef)
        if comps is None:
            return solve_block(sys, rhs, self.ctx.tol, self.ctx.solver)
        return solve_block(sys, rhs[comps], self.ctx.tol, self.ctx.solver)

    def check(self, u, stage, density_only=False):
        try:
            if density_only:
                # explicit stage states only feed the slow flux, which needs rho > 0
                check_positive(u[0], np.where(np.isfinite(u).all(axis=0), 1.0, np.nan), stage)
            else:
                self.model.check(u)
        except StateError as exc:
            raise StateError(str(exc).split(",")[0], exc.quantity, exc.cell, stage) from exc


def _finish(ctx: StepContext, ops: _Frozen, u: np.ndarray) -> np.ndarray:
    if ctx.damping > 0.0 and ctx.model.name == "mhd":
        u[8] *= np.exp(-ctx.damping * ops.dt)
    ops.check(u, "correction")
    ctx.stats.update(ch=ops.ch, a=ops.a.copy(), dt=ops.dt)
    return u


def _magnetic_reduced(ops: _Frozen, base, src, coef):
    """Magnetic sub-stage solving only for B and phi.

    The other components take the magnetic flux explicitly, evaluated at the
    state carrying the implicitly updated B and phi.
    """
    dt = ops.dt
    bphi = slice(5, 9)
    rhs = base - dt * coef * ops.d_fast(src, 1)
    out = base.copy()
    out[bphi] = ops.solve(rhs, 1, coef, comps=bphi)
    upd = ops.d_fast(out, 1)
    out[:5] = base[:5] - dt * coef * upd[:5]
    return out


def _substage(ctx, ops, y, j, src, coef, hist=None):
    dt = ops.dt
    base = y if hist is None else y + dt * dt * coef * hist
    if ctx.reduced_magnetic and ctx.model.name == "mhd" and j == 1:
        return _magnetic_reduced(ops, base, src, coef)
    return ops.solve(base - dt * coef * ops.d_fast(src, j), j, coef)


# first order -----------------------------------------------------------------

def step_two_split_o1(ctx: StepContext, u: np.ndarray, dt: float) -> np.ndarray:
    """First-order two-split prediction-correction step on interior values ``u``.

    Prediction ``(I - dt^2 L_a) q1 = q^n - dt (D_ex(q^n) + D_fast(q^n))``,
    correction ``q^{n+1} = q^n - dt (D_ex(q^n) + D_fast(q1))``.
    """
    if ctx.model.k != 1:
        raise ConfigError("two-split scheme needs a model with one fast sub-flux")
    if ctx.order != 1:
        ctx = ctx.replace(order=1)
    ops = _Frozen(ctx, u, dt)
    dex = ops.d_ex(u)
    q1 = ops.solve(u - dt * (dex + ops.d_fast(u, 0)), 0)
    ops.check(q1, "predictor")
    return _finish(ctx, ops, u - dt * (dex + ops.d_fast(q1, 0)))


def step_three_split_o1(ctx: StepContext, u: np.ndarray, dt: float) -> np.ndarray:
    """First-order three-split step with sequential fast sub-stages ``A`` then ``B``."""
    if ctx.model.k != 2:
        raise ConfigError("three-split scheme needs a model with two fast sub-fluxes")
    if ctx.order != 1:
        ctx = ctx.replace(order=1)
    ops = _Frozen(ctx, u, dt)
    A, B = ctx.fast_order
    dex = ops.d_ex(u)
    qs = _substage(ctx, ops, u - dt * dex, A, u, 1.0)
    ops.check(qs, "predictor A")
    q1 = _substage(ctx, ops, qs, B, qs, 1.0)
    ops.check(q1, "predictor B")
    return _finish(ctx, ops, u - dt * (dex + ops.d_fast(q1, A) + ops.d_fast(q1, B)))


# partitioned Runge-Kutta ------------------------------------------------------

def step_partitioned(ctx: StepContext, u: np.ndarray, dt: float, pair: ButcherPair | None = None):
    """One step of the partitioned IMEX scheme for any number of fast sub-fluxes."""
    pair = ctx.butcher if pair is None else pair
    ops = _Frozen(ctx, u, dt)
    Ae, be, Ai, bi = pair.A_ex, pair.b_ex, pair.A_im, pair.b_im
    order = ctx.fast_order
    qex = u
    dex, dim_, qs = [], [], []
    for r in range(pair.s):
        dex.append(ops.d_ex(qex))
        g = Ai[r, r]
        y = u - dt * sum(Ai[r, k] * dex[k] for k in range(r + 1))
        if r:
            y = y - dt * sum(Ai[r, k] * dim_[k] for k in range(r))
        for idx, j in enumerate(order):
            if idx == 0:
                hist = sum(Ai[r, k] * ops.lap(qs[k], j) for k in range(r)) if r else None
                y = _substage(ctx, ops, y, j, u, g, hist)
            else:
                y = _substage(ctx, ops, y, j, y, g)
            ops.check(y, f"{r + 1}{'AB'[idx] if len(order) > 1 else ''}")
        qs.append(y)
        dim_.append(sum(ops.d_fast(y, j) for j in order))
        if r + 1 < pair.s:
            qex = u - dt * sum(Ae[r + 1, k] * (dex[k] + dim_[k]) for k in range(r + 1))
            ops.check(qex, f"explicit {r + 2}", density_only=True)
    new = u - dt * sum(be[r] * dex[r] + bi[r] * dim_[r] for r in range(pair.s))
    return _finish(ctx, ops, new)


def step_two_split_o2(ctx: StepContext, u: np.ndarray, dt: float) -> np.ndarray:
    """Second-order IMEX step (LSDIRK2 unless ``ctx.pair`` says otherwise)."""
    if ctx.model.k != 1:
        raise ConfigError("two-split scheme needs a model with one fast sub-flux")
    return step_partitioned(ctx, u, dt, ctx.pair or LSDIRK2)


def step_three_split_o2(ctx: StepContext, u: np.ndarray, dt: float) -> np.ndarray:
    """Second-order partitioned step with two sequential fast sub-stages."""
    if ctx.model.k != 2:
        raise ConfigError("three-split scheme needs a model with two fast sub-fluxes")
    return step_partitioned(ctx, u, dt, ctx.pair or LSDIRK2)


def step(ctx: StepContext, u: np.ndarray, dt: float) -> np.ndarray:
    """Dispatch on order and number of fast sub-fluxes (1D or 2D)."""
    if ctx.order == 1:
        return (step_two_split_o1 if ctx.model.k == 1 else step_three_split_o1)(ctx, u, dt)
    return (step_two_split_o2 if ctx.model.k == 1 else step_three_split_o2)(ctx, u, dt)


def step_2d(ctx: StepContext, u: np.ndarray, dt: float) -> np.ndarray:
    if ctx.grid.dim != 2:
        raise ConfigError("step_2d needs a 2D grid")
    return step(ctx, u, dt)


def mhd_reduced_magnetic_stage(ctx: StepContext, u: np.ndarray, dt: float) -> np.ndarray:
    """MHD step whose magnetic sub-stage solves only for B and phi."""
    if ctx.model.name != "mhd":
        raise ConfigError("the reduced magnetic stage applies to MHD only")
    return step(ctx.replace(reduced_magnetic=True), u, dt)


# coupled (q, v) references ---------------------------------------------------

def _faces_1d(n: int, periodic: bool):
    """Left/right cell of every face; ``v[i+1] - v[i]`` is the difference of cell ``i``."""
    if periodic:
        k = np.arange(n + 1)
        return np.mod(k - 1, n), np.mod(k, n), n
    k = np.arange(n + 1)
    return np.clip(k - 1, 0, n - 1), np.clip(k, 0, n - 1), n + 1


def face_average(model, u, j, axis, bc_periodic):
    """Central average of ``f_j(q)`` on the faces of a 1D grid."""
    n = u.shape[1]
    L, R, nf = _faces_1d(n, bc_periodic)
    f = model.fast_flux(u, j, axis)
    return 0.5 * (f[:, L[:nf]] + f[:, R[:nf]])


def coupled_relaxation_solve(grid: Grid, bc: BoundaryCondition, base, v0, a, dt, coef=1.0):
    """Solve the linear relaxation system for ``(q, v)`` in one dense solve.

    ``q_i + c dt/dx (v_{i+1/2} - v_{i-1/2}) = base_i`` and
    ``v_{i+1/2} + c dt a^2/dx (q_{i+1} - q_i) = v0_{i+1/2}``, with
    ``c = coef`` and ghost cells closed by ``bc``. All components share the
    matrix and are solved as simultaneous right-hand sides.
    """
    if grid.dim != 1:
        raise ConfigError("coupled reference is 1D only")
    n = grid.n[0]
    dx = grid.dx[0]
    periodic = bc.periodic(0)
    L, R, nf = _faces_1d(n, periodic)
    M = np.zeros((n + nf, n + nf))
    lam = coef * dt / dx
    cells = np.arange(n)
    M[cells, cells] = 1.0
    right = np.mod(cells + 1, nf)
    np.add.at(M, (cells, n + right), lam)
    np.add.at(M, (cells, n + cells), -lam)
    for k in range(nf):
        M[n + k, n + k] = 1.0
        M[n + k, R[k]] += lam * a * a
        M[n + k, L[k]] -= lam * a * a
    rhs = np.concatenate([base, v0], axis=1).T
    sol = np.linalg.solve(M, rhs)
    return sol[:n].T, sol[n:].T


def step_two_split_o1_coupled(ctx: StepContext, u, dt, v=None):
    """Reference first-order two-split step in coupled ``(q, v)`` form (1D).

    ``v`` defaults to the face average of ``f_fast(q^n)``. Returns the new
    state and the relaxation variable re-projected onto ``f_fast(q^{n+1})``.
    """
    ctx = ctx.replace(order=1)
    ops = _Frozen(ctx, u, dt)
    periodic = ctx.bc.periodic(0)
    if v is None:
        v = face_average(ops.model, u, 0, 0, periodic)
    dex = ops.d_ex(u)
    q1, _ = coupled_relaxation_solve(ctx.grid, ctx.bc, u - dt * dex, v, ops.a[0, 0], dt)
    new = u - dt * (dex + ops.d_fast(q1, 0))
    return new, face_average(ops.model, new, 0, 0, periodic)


def step_three_split_o1_coupled(ctx: StepContext, u, dt):
    """Reference first-order three-split step in coupled ``(q, v_A, v_B)`` form (1D)."""
    ctx = ctx.replace(order=1)
    ops = _Frozen(ctx, u, dt)
    periodic = ctx.bc.periodic(0)
    A, B = ctx.fast_order
    dex = ops.d_ex(u)
    vA = face_average(ops.model, u, A, 0, periodic)
    qs, _ = coupled_relaxation_solve(ctx.grid, ctx.bc, u - dt * dex, vA, ops.a[0, A], dt)
    vB = face_average(ops.model, qs, B, 0, periodic)
    q1, _ = coupled_relaxation_solve(ctx.grid, ctx.bc, qs, vB, ops.a[0, B], dt)
    return u - dt * (dex + ops.d_fast(q1, A) + ops.d_fast(q1, B))
