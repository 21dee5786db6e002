"""Benchmark case catalog: initial data, parameters and reference solutions."""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConfigError
from ..exact_riemann import cell_averages, solve_rp
from ..grid import OUTFLOW, PERIODIC, BoundaryCondition, Grid, build_grid
from ..models import Eos, EulerModel, MhdModel

SQRT_4PI = np.sqrt(4.0 * np.pi)


@dataclass(frozen=True)
class CaseSpec:
    """A benchmark problem.

    ``init(grid, params)`` returns interior conserved values of shape
    ``(m, *grid.n)``; ``reference(grid, t, params)``, when present, returns
    the exact (or reference) solution in the same layout. ``t_end`` and
    ``nu`` may be callables of the parameter dict.
    """

    name: str
    model: str
    dim: int
    domain: tuple
    bc: str
    gamma: float
    init: Callable
    t_end: float | Callable
    nu: float | Callable
    order: int = 2
    params: dict = field(default_factory=dict)
    reference: Callable | None = None
    limiter: str = "minmod"
    diffusion: str = "local"
    min_steps: int = 64
    default_n: int = 64
    description: str = ""

    def merged(self, overrides: dict | None = None) -> dict:
        p = dict(self.params)
        for key, val in (overrides or {}).items():
            if key not in p:
                raise ConfigError(f"case {self.name!r} has no parameter {key!r}; known: {sorted(p)}")
            p[key] = val
        return p

    def end_time(self, params: dict) -> float:
        return float(self.t_end(params) if callable(self.t_end) else self.t_end)

    def cfl(self, params: dict) -> float:
        return float(self.nu(params) if callable(self.nu) else self.nu)

    def build_model(self):
        eos = Eos(self.gamma)
        if self.model == "euler":
            return EulerModel(self.dim, eos)
        return MhdModel(self.dim, eos)

    def build_grid(self, n, ghost: int = 2) -> Grid:
        """Grid for resolution ``n`` (int or per-axis tuple).

        A single count on a 2D case keeps the aspect ratio of the domain.
        """
        if np.isscalar(n):
            n = int(n)
            if self.dim == 2:
                (x0, x1), (y0, y1) = self.domain
                ny = max(1, int(round(n * (y1 - y0) / (x1 - x0))))
                n = (n, ny)
        return build_grid(self.domain, n, ghost)

    def boundary(self) -> BoundaryCondition:
        return BoundaryCondition.uniform(self.bc, self.dim)


# Euler --------------------------------------------------------------------------

def _vortex_prims(x, y, mach, gamma, a=8.0, um=(1.0, 1.0)):
    r2 = x * x + y * y
    rho = 1.0 - mach**2 / 8.0 * np.exp(-2.0 * a * a * r2)
    p = rho**gamma / mach**2
    amp = a * np.sqrt(gamma / 2.0) * np.exp(-a * a * r2) * rho ** (gamma / 2.0 - 1.0)
    u = np.stack([um[0] + amp * y, um[1] - amp * x])
    return rho, u, p


def _wrap(x, lo, hi):
    return lo + np.mod(x - lo, hi - lo)


def _euler_vortex_init(grid, params, t=0.0):
    model = EulerModel(2, Eos(params["gamma"]))
    um = (params["um1"], params["um2"])
    x, y = grid.mesh()
    x = _wrap(x - um[0] * t, grid.lo[0], grid.hi[0])
    y = _wrap(y - um[1] * t, grid.lo[1], grid.hi[1])
    rho, u, p = _vortex_prims(x, y, params["mach"], params["gamma"], params["a"], um)
    return model.conserved(rho, u, p)


def _riemann_init_1d(grid, params):
    model = EulerModel(1, Eos(params["gamma"]))
    x = grid.centers(0)
    left = x < params["x0"]
    rho = np.where(left, params["rhoL"], params["rhoR"])
    u = np.where(left, params["uL"], params["uR"])[None]
    p = np.where(left, params["pL"], params["pR"])
    return model.conserved(rho, u, p)


def _riemann_reference(grid, t, params):
    sol = solve_rp(
        (params["rhoL"], params["uL"], params["pL"]),
        (params["rhoR"], params["uR"], params["pR"]),
        params["gamma"],
    )
    return cell_averages(sol, grid.faces(0), t, params["x0"])


EULER_RP = {
    "euler-rp1": dict(rhoL=1.0, uL=0.0, pL=1.0, rhoR=0.125, uR=0.0, pR=0.1, x0=0.5, t_end=0.1644),
    "euler-rp2": dict(rhoL=1.0, uL=0.0, pL=0.4, rhoR=1.0, uR=0.008, pR=0.399, x0=0.5, t_end=0.25),
    "euler-rp3": dict(rhoL=1e3, uL=1.0, pL=1e5, rhoR=0.01, uR=1.0, pR=1e5, x0=0.3, t_end=0.5),
}


def lcg_uniform(seed: int, count: int) -> np.ndarray:
    """Uniform [0, 1) samples from a 64-bit linear congruential generator.

    ``s <- 6364136223846793005 s + 1442695040888963407 (mod 2^64)``; each
    sample uses the top 53 bits of the state.
    """
    mask = (1 << 64) - 1
    s = int(seed) & mask
    out = np.empty(count)
    for i in range(count):
        s = (6364136223846793005 * s + 1442695040888963407) & mask
        out[i] = (s >> 11) * 2.0**-53
    return out


def kh_modes(seed: int, m: int = 10):
    """Mode amplitudes ``a[j, k]`` (rows sum to one) and phases ``b[j, k]``."""
    raw = lcg_uniform(seed, 4 * m)
    a = raw[: 2 * m].reshape(2, m)
    a = a / a.sum(axis=1, keepdims=True)
    b = 2.0 * np.pi * raw[2 * m :].reshape(2, m)
    return a, b


def kh_interfaces(x, params):
    a, b = kh_modes(params["seed"], params["modes"])
    k = np.arange(1, params["modes"] + 1)
    out = []
    for j, J in enumerate((params["J1"], params["J2"])):
        Y = np.sum(a[j][:, None] * np.cos(b[j][:, None] + 2.0 * np.pi * k[:, None] * np.ravel(x)[None]), axis=0)
        out.append(J + params["eps"] * Y.reshape(np.shape(x)))
    return out


def _kh_init(grid, params):
    model = EulerModel(2, Eos(params["gamma"]))
    x, y = grid.mesh()
    I1, I2 = kh_interfaces(x, params)
    inner = (I1 < y) & (y < I2)
    rho = np.where(inner, 2.0, 1.0)
    u = np.stack([np.where(inner, -0.5, 0.5), np.zeros_like(x)])
    p = np.full_like(x, params["p"])
    return model.conserved(rho, u, p)


# MHD ----------------------------------------------------------------------------

def balsara_prims(x, y, rho0, gamma=5.0 / 3.0, u0=(1.0, 1.0), p0=1.0, dp_form="equilibrium"):
    """Primitive state of the magnetised vortex centred at the origin.

    ``dp_form="equilibrium"`` integrates the radial force balance
    ``dp/dr = rho u_t^2 / r - B_t^2 / (4 pi r) - d(B_t^2)/dr / (8 pi)`` exactly;
    ``"halved"`` multiplies that pressure perturbation by 1/2, which is not
    in equilibrium and is kept only for comparison.
    """
    ut = np.sqrt(2.0 * np.pi)
    bt = SQRT_4PI
    r2 = x * x + y * y
    e = np.exp(0.5 * (1.0 - r2))
    ku = ut / (2.0 * np.pi)
    kb = bt / (2.0 * np.pi)
    rho = np.full_like(x, rho0)
    u = np.stack([u0[0] - ku * e * y, u0[1] + ku * e * x, np.zeros_like(x)])
    B = np.stack([-kb * e * y, kb * e * x, np.zeros_like(x)])
    dp = np.exp(1.0 - r2) * (kb**2 / (8.0 * np.pi) * (1.0 - r2) - 0.5 * rho0 * ku**2)
    if dp_form == "halved":
        dp = 0.5 * dp
    elif dp_form != "equilibrium":
        raise ConfigError(f"unknown dp_form {dp_form!r}; use 'equilibrium' or 'halved'")
    return rho, u, p0 + dp, B


def _balsara_init(grid, params, t=0.0):
    model = MhdModel(2, Eos(params["gamma"]))
    x, y = grid.mesh()
    x = _wrap(x - t, grid.lo[0], grid.hi[0])
    y = _wrap(y - t, grid.lo[1], grid.hi[1])
    rho, u, p, B = balsara_prims(x, y, params["rho0"], params["gamma"], dp_form=params["dp_form"])
    return model.conserved(rho, u, p, B, 0.0)


MHD_RP = {
    "mhd-rp1": (
        (1.0, 0.0, 0.0, 0.0, 1.0, 0.75 * SQRT_4PI, SQRT_4PI, 0.0),
        (0.125, 0.0, 0.0, 0.0, 0.1, 0.75 * SQRT_4PI, -SQRT_4PI, 0.0),
        0.5,
        0.1,
    ),
    "mhd-rp2": (
        (1.08, 1.2, 0.01, 0.5, 0.95, 2.0, 3.6, 2.0),
        (0.9891, -0.0131, 0.0269, 0.010037, 0.97159, 2.0, 4.0244, 2.0026),
        0.4,
        0.2,
    ),
    "mhd-rp3": (
        (1.7, 0.0, 0.0, 0.0, 1.7, 3.899398, 3.544908, 0.0),
        (0.2, 0.0, 0.0, -1.496891, 0.2, 3.899398, 2.785898, 2.192064),
        0.4,
        0.15,
    ),
    "mhd-rp4": (
        (1.0, 0.0, 0.0, 0.0, 1.0, 1.3 * SQRT_4PI, SQRT_4PI, 0.0),
        (0.4, 0.0, 0.0, 0.0, 0.4, 1.3 * SQRT_4PI, -SQRT_4PI, 0.0),
        0.5,
        0.16,
    ),
}


def _mhd_rp_init(name):
    left, right, x0, _ = MHD_RP[name]

    def init(grid, params):
        model = MhdModel(1, Eos(params["gamma"]))
        x = grid.centers(0)
        is_left = x < x0
        cols = [np.where(is_left, l, r) for l, r in zip(left, right)]
        rho, u1, u2, u3, p, B1, B2, B3 = cols
        return model.conserved(rho, np.stack([u1, u2, u3]), p, np.stack([B1, B2, B3]), 0.0)

    return init


def field_loop_potential(x, y, a0, radius=0.3):
    r = np.sqrt(x * x + y * y)
    return np.where(r <= radius, a0 * (radius - r), 0.0)


def curl_from_corners(Az, dx, dy):
    """Cell-centred ``(B1, B2) = (dAz/dy, -dAz/dx)`` from corner samples ``Az``.

    ``Az`` has shape ``(nx + 1, ny + 1)``. Each derivative is the edge
    difference averaged over the two parallel cell edges, which makes the
    compact corner divergence vanish identically.
    """
    B1 = 0.5 * ((Az[:-1, 1:] - Az[:-1, :-1]) + (Az[1:, 1:] - Az[1:, :-1])) / dy
    B2 = -0.5 * ((Az[1:, :-1] - Az[:-1, :-1]) + (Az[1:, 1:] - Az[:-1, 1:])) / dx
    return B1, B2


def _field_loop_init(grid, params):
    model = MhdModel(2, Eos(params["gamma"]))
    X, Y = np.meshgrid(grid.faces(0), grid.faces(1), indexing="ij")
    Az = field_loop_potential(X, Y, params["a0"])
    B1, B2 = curl_from_corners(Az, *grid.dx)
    shape = grid.n
    u = np.stack([np.full(shape, 2.0), np.full(shape, 1.0), np.zeros(shape)])
    B = np.stack([B1, B2, np.zeros(shape)])
    return model.conserved(np.ones(shape), u, np.full(shape, params["p"]), B, 0.0)


def _orszag_tang_init(grid, params):
    model = MhdModel(2, Eos(params["gamma"]))
    x, y = grid.mesh()
    tp = 2.0 * np.pi
    u = np.stack([-np.sin(tp * y), np.sin(tp * x), np.zeros_like(x)])
    b2_arg = x if params["b2_arg"] == "x" else y
    B = np.stack([-np.sin(tp * y) * SQRT_4PI, np.sin(2.0 * tp * b2_arg) * SQRT_4PI, np.zeros_like(x)])
    return model.conserved(np.full_like(x, 25.0 / 9.0), u, np.full_like(x, 5.0 / 3.0), B, 0.0)


# catalog ------------------------------------------------------------------------

def _build_catalog() -> dict:
    cases = {}

    def add(spec):
        cases[spec.name] = spec

    vortex = dict(mach=0.1, gamma=1.4, a=8.0, um1=1.0, um2=1.0)
    add(CaseSpec(
        "euler-vortex", "euler", 2, ((-1.0, 1.0), (-1.0, 1.0)), PERIODIC, 1.4,
        _euler_vortex_init, lambda p: p["mach"], lambda p: 2.5 * p["mach"], 2, vortex,
        reference=lambda g, t, p: _euler_vortex_init(g, p, t), limiter="none", min_steps=1,
        default_n=64, description="travelling isentropic vortex, final time = Mach, CFL = 2.5 Mach",
    ))
    add(CaseSpec(
        "euler-vortex-ap", "euler", 2, ((-1.0, 1.0), (-1.0, 1.0)), PERIODIC, 1.4,
        _euler_vortex_init, 0.1, 0.1, 1, dict(vortex, mach=1e-3, um1=0.0, um2=0.0),
        reference=lambda g, t, p: _euler_vortex_init(g, p, t), diffusion="global", min_steps=1,
        description="standing low-Mach vortex for the asymptotic-preserving error scaling",
    ))
    for name, vals in EULER_RP.items():
        params = dict(vals, gamma=1.4)
        t_end = params.pop("t_end")
        add(CaseSpec(
            name, "euler", 1, ((0.0, 1.0),), OUTFLOW, 1.4, _riemann_init_1d, t_end, 0.5,
            1 if name == "euler-rp3" else 2, params, reference=_riemann_reference,
            # starts at rest: the startup cap t_end / min_steps must stay near the acoustic CFL
            min_steps=256 if name == "euler-rp1" else 64,
            default_n=500 if name == "euler-rp3" else 1000,
            description="1D Euler Riemann problem with exact reference",
        ))
    add(CaseSpec(
        "kelvin-helmholtz", "euler", 2, ((0.0, 1.0), (0.0, 1.0)), PERIODIC, 1.4, _kh_init,
        2.0, 0.25, 2, dict(gamma=1.4, seed=42, modes=10, eps=0.01, J1=0.25, J2=0.75, p=2.5),
        default_n=128,
        description="shear layers with seeded multi-mode interface perturbations",
    ))
    add(CaseSpec(
        "balsara-vortex", "mhd", 2, ((-5.0, 5.0), (-5.0, 5.0)), PERIODIC, 5.0 / 3.0,
        _balsara_init, 0.2, 0.25, 2, dict(rho0=1.0, gamma=5.0 / 3.0, dp_form="equilibrium"),
        reference=lambda g, t, p: _balsara_init(g, p, t), limiter="none", min_steps=1,
        description="travelling magnetised vortex with exact translated solution",
    ))
    for name, (left, right, _, t_end) in MHD_RP.items():
        at_rest = left[1] == 0.0 and right[1] == 0.0
        add(CaseSpec(
            name, "mhd", 1, ((0.0, 1.0),), OUTFLOW, 5.0 / 3.0, _mhd_rp_init(name), t_end, 0.5,
            2, dict(gamma=5.0 / 3.0), min_steps=256 if at_rest else 64, default_n=1000,
            description="1D MHD Riemann problem",
        ))
    add(CaseSpec(
        "field-loop", "mhd", 2, ((-1.0, 1.0), (-0.5, 0.5)), PERIODIC, 5.0 / 3.0,
        _field_loop_init, 1.0, 0.25, 2, dict(a0=1e-3, p=1e5, gamma=5.0 / 3.0), min_steps=1,
        default_n=256,
        description="advected magnetic loop at low Mach number",
    ))
    add(CaseSpec(
        "orszag-tang", "mhd", 2, ((0.0, 1.0), (0.0, 1.0)), PERIODIC, 5.0 / 3.0,
        _orszag_tang_init, 0.5, 0.25, 2, dict(gamma=5.0 / 3.0, b2_arg="x"),
        default_n=128,
        description="Orszag-Tang vortex",
    ))
    return cases


_CATALOG = _build_catalog()


def case_catalog() -> list:
    return list(_CATALOG.values())


def get_case(name: str) -> CaseSpec:
    try:
        return _CATALOG[name]
    except KeyError:
        close = difflib.get_close_matches(name, list(_CATALOG), n=3)
        hint = f"; did you mean {', '.join(close)}?" if close else ""
        raise ConfigError(f"unknown case {name!r}{hint} (known: {', '.join(_CATALOG)})") from None
