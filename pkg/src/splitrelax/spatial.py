"""Numerical fluxes, reconstruction and discrete operators on padded arrays.

Everything here works on padded ``(m, ...)`` arrays with ghost layers
already filled (see :mod:`splitrelax.grid`). Face arrays along axis ``l``
hold the ``n_l + 1`` interfaces of the interior, with interior extent on
the other axes; face ``i`` separates cells ``i - 1`` and ``i``.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import Grid

LIMITERS = ("constant", "minmod", "none")
DIFFUSIONS = ("local", "global")


def minmod(a, b):
    """``sign(a) * min(|a|, |b|)`` where signs agree, zero otherwise."""
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def _strip(grid: Grid, axis: int, lo: int, hi: int) -> tuple:
    """Index tuple: cells ``lo .. n+hi-1`` along ``axis``, interior elsewhere."""
    g = grid.ghost
    idx = [slice(None)]
    for l, k in enumerate(grid.n):
        if l == axis:
            idx.append(slice(g + lo, g + k + hi))
        else:
            idx.append(slice(g, g + k))
    return tuple(idx)


def _shift(arr: np.ndarray, axis: int, start: int, stop: int | None) -> np.ndarray:
    idx = [slice(None)] * arr.ndim
    idx[axis + 1] = slice(start, stop)
    return arr[tuple(idx)]


def reconstruct(data: np.ndarray, grid: Grid, axis: int, limiter: str = "minmod"):
    """Interface states ``(q_minus, q_plus)`` on the faces along ``axis``.

    ``q_minus[i]`` is the reconstruction of cell ``i - 1`` evaluated at face
    ``i`` and ``q_plus[i]`` that of cell ``i``. Reconstruction is linear in
    the conserved variables with slope ``minmod`` of the one-sided
    differences (``limiter="minmod"``), their unlimited central average
    (``"none"``) or zero (``"constant"``).
    """
    if limiter not in LIMITERS:
        raise ConfigError(f"unknown limiter {limiter!r}; expected one of {LIMITERS}")
    if limiter == "constant":
        cells = data[_strip(grid, axis, -1, 1)]
        return _shift(cells, axis, 0, -1), _shift(cells, axis, 1, None)
    if grid.ghost < 2:
        raise ConfigError("linear reconstruction needs ghost width >= 2")
    wide = data[_strip(grid, axis, -2, 2)]
    d = np.diff(wide, axis=axis + 1)
    dl = _shift(d, axis, 0, -1)
    dr = _shift(d, axis, 1, None)
    half = 0.5 * (minmod(dl, dr) if limiter == "minmod" else 0.5 * (dl + dr))
    cells = _shift(wide, axis, 1, -1)
    hi = cells + half
    lo = cells - half
    return _shift(hi, axis, 0, -1), _shift(lo, axis, 1, None)


def rusanov_flux(qL, qR, axis, model, diffusion: str = "local"):
    """Rusanov flux of the slow sub-flux.

    ``F = (f_slow(qL) + f_slow(qR))/2 - s (qR - qL)/2`` with
    ``s = max(s_slow(qL), s_slow(qR))`` per face, or its maximum over all
    faces when ``diffusion="global"``.
    """
    if diffusion not in DIFFUSIONS:
        raise ConfigError(f"unknown diffusion mode {diffusion!r}; expected one of {DIFFUSIONS}")
    s = np.maximum(model.slow_speed(qL, axis), model.slow_speed(qR, axis))
    if diffusion == "global":
        s = np.max(s) if s.size else 0.0
    return 0.5 * (model.slow_flux(qL, axis) + model.slow_flux(qR, axis)) - 0.5 * s * (qR - qL)


def central_fast_flux(qL, qR, j, axis, model):
    """Central (diffusion-free) face flux of fast sub-flux ``j``."""
    return 0.5 * (model.fast_flux(qL, j, axis) + model.fast_flux(qR, j, axis))


def face_difference(F: np.ndarray, axis: int, dx: float) -> np.ndarray:
    """``(F_{i+1/2} - F_{i-1/2}) / dx`` for every interior cell."""
    return np.diff(F, axis=axis + 1) / dx


def explicit_divergence(data, grid, model, limiter="constant", diffusion="local"):
    """Sum over axes of the Rusanov slow-flux differences, interior shape."""
    out = None
    for axis in range(grid.dim):
        qm, qp = reconstruct(data, grid, axis, limiter)
        d = face_difference(rusanov_flux(qm, qp, axis, model, diffusion), axis, grid.dx[axis])
        out = d if out is None else out + d
    return out


def fast_divergence(data, grid, model, j):
    """Sum over axes of the central differences of fast sub-flux ``j``."""
    out = None
    for axis in range(grid.dim):
        f = model.fast_flux(data[_strip(grid, axis, -1, 1)], j, axis)
        F = 0.5 * (_shift(f, axis, 0, -1) + _shift(f, axis, 1, None))
        d = face_difference(F, axis, grid.dx[axis])
        out = d if out is None else out + d
    return out


def weighted_laplacian(data, grid, a_per_axis):
    """``sum_l a_l^2/dx_l^2 (q_{+1} - 2 q + q_{-1})`` along each axis, interior shape."""
    out = None
    for axis in range(grid.dim):
        w = data[_strip(grid, axis, -1, 1)]
        lap = _shift(w, axis, 2, None) - 2.0 * _shift(w, axis, 1, -1) + _shift(w, axis, 0, -2)
        lap = (a_per_axis[axis] / grid.dx[axis]) ** 2 * lap
        out = lap if out is None else out + lap
    return out


def compute_dt(values, grid, model, nu, dt_max=np.inf, t=0.0, t_end=np.inf) -> float:
    """Material CFL step ``min_l nu dx_l / max|u_l|``.

    Clamped by ``dt_max`` (which also covers fluid at rest) and so that
    ``t + dt`` does not overshoot ``t_end``.
    """
    if not 0.0 < nu <= 1.0:
        raise ConfigError(f"CFL number must lie in (0, 1], got {nu}")
    dt = float(dt_max)
    for axis in range(grid.dim):
        smax = float(np.max(model.slow_speed(values, axis)))
        if smax > 0.0:
            dt = min(dt, nu * grid.dx[axis] / smax)
    if not np.isfinite(dt):
        raise ConfigError("fluid at rest and no dt_max given")
    return max(0.0, min(dt, t_end - t))


def compute_relax_speeds(values, grid, model, safety: float = 1.0) -> np.ndarray:
    """Relaxation speeds ``a[l, j] = safety * max_cells fast_speed_j`` along axis ``l``."""
    if safety < 1.0:
        raise ConfigError(f"safety factor must be >= 1, got {safety}")
    a = np.empty((grid.dim, model.k))
    for axis in range(grid.dim):
        for j in range(model.k):
            a[axis, j] = safety * float(np.max(model.fast_speed(values, j, axis)))
    return a
