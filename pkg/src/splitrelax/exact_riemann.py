"""Exact Riemann solver for the 1D Euler equations of an ideal gas.

Standard pressure-function approach: the star pressure is the root of
``f(p) = f_L(p) + f_R(p) + (u_R - u_L)``, found by Newton's method kept
inside a bracket (bisection whenever a Newton step leaves it).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SolverError, VacuumError

SHOCK = "shock"
RAREFACTION = "rarefaction"


@dataclass(frozen=True)
class RiemannSolution:
    """Star state and wave pattern of a solved Riemann problem.

    ``left`` and ``right`` are primitive triples ``(rho, u, p)``.
    """

    left: tuple
    right: tuple
    gamma: float
    p_star: float
    u_star: float
    rho_star_L: float
    rho_star_R: float
    left_wave: str
    right_wave: str
    iterations: int = 0

    def sample(self, xi):
        return sample(self, xi)


def _sound(rho, p, gamma):
    return np.sqrt(gamma * p / rho)


def _f_side(p, rho, pk, gamma):
    """Pressure function of one side and its derivative."""
    c = _sound(rho, pk, gamma)
    if p > pk:
        A = 2.0 / ((gamma + 1.0) * rho)
        B = (gamma - 1.0) / (gamma + 1.0) * pk
        s = np.sqrt(A / (p + B))
        return (p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (p + B))
    z = (gamma - 1.0) / (2.0 * gamma)
    ratio = p / pk
    return 2.0 * c / (gamma - 1.0) * (ratio**z - 1.0), ratio ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * c)


def pressure_function(p, left, right, gamma):
    """``f(p)`` whose root is the star pressure, and ``f'(p)``."""
    fl, dl = _f_side(p, left[0], left[2], gamma)
    fr, dr = _f_side(p, right[0], right[2], gamma)
    return fl + fr + right[1] - left[1], dl + dr


def _validate(state, side):
    rho, u, p = (float(v) for v in state)
    if not (rho > 0.0 and p > 0.0 and np.isfinite(u)):
        raise ConfigError(f"invalid {side} Riemann state {state}")
    return rho, u, p


def solve_rp(left, right, gamma: float = 1.4, max_iter: int = 200) -> RiemannSolution:
    """Solve the Riemann problem for primitive states ``(rho, u, p)``.

    Raises
    ------
    VacuumError
        If the data generate vacuum (pressure positivity condition fails).
    SolverError
        If the safeguarded iteration does not converge.
    """
    left = _validate(left, "left")
    right = _validate(right, "right")
    rl, ul, pl = left
    rr, ur, pr = right
    cl, cr = _sound(rl, pl, gamma), _sound(rr, pr, gamma)
    du = ur - ul
    if 2.0 / (gamma - 1.0) * (cl + cr) <= du:
        raise VacuumError(f"Riemann data generate vacuum: left={left}, right={right}")

    z = (gamma - 1.0) / (2.0 * gamma)
    guess = ((cl + cr - 0.5 * (gamma - 1.0) * du) / (cl / pl**z + cr / pr**z)) ** (1.0 / z)
    floor = 1e-8 * min(pl, pr)
    p = max(guess, floor)

    # bracket: f is increasing, f(0) < 0 without vacuum
    lo, hi = 0.0, max(p, pl, pr)
    while pressure_function(hi, left, right, gamma)[0] < 0.0:
        hi *= 2.0
    scale = cl + cr + abs(du)
    it = 0
    for it in range(1, max_iter + 1):
        f, df = pressure_function(p, left, right, gamma)
        if abs(f) <= 1e-15 * scale:
            break
        if f < 0.0:
            lo = p
        else:
            hi = p
        step = p - f / df
        new = step if lo <= step <= hi else 0.5 * (lo + hi)
        if abs(new - p) <= 1e-15 * max(p, 1e-300):
            p = new
            break
        p = new
    else:
        raise SolverError("exact Riemann iteration did not converge", residual=abs(f), iterations=it)

    fl, _ = _f_side(p, rl, pl, gamma)
    fr, _ = _f_side(p, rr, pr, gamma)
    u_star = 0.5 * (ul + ur) + 0.5 * (fr - fl)
    g6 = (gamma - 1.0) / (gamma + 1.0)

    def star_rho(rho, pk):
        if p > pk:
            return rho * (p / pk + g6) / (g6 * p / pk + 1.0)
        return rho * (p / pk) ** (1.0 / gamma)

    return RiemannSolution(
        left,
        right,
        gamma,
        float(p),
        float(u_star),
        float(star_rho(rl, pl)),
        float(star_rho(rr, pr)),
        SHOCK if p > pl else RAREFACTION,
        SHOCK if p > pr else RAREFACTION,
        it,
    )


def wave_speeds(sol: RiemannSolution) -> dict:
    """Shock speeds or rarefaction head/tail speeds of both outer waves."""
    g = sol.gamma
    rl, ul, pl = sol.left
    rr, ur, pr = sol.right
    cl, cr = _sound(rl, pl, g), _sound(rr, pr, g)
    out = {"contact": sol.u_star}
    if sol.left_wave == SHOCK:
        out["left"] = ul - cl * np.sqrt((g + 1.0) / (2.0 * g) * sol.p_star / pl + (g - 1.0) / (2.0 * g))
    else:
        out["left_head"] = ul - cl
        out["left_tail"] = sol.u_star - _sound(sol.rho_star_L, sol.p_star, g)
    if sol.right_wave == SHOCK:
        out["right"] = ur + cr * np.sqrt((g + 1.0) / (2.0 * g) * sol.p_star / pr + (g - 1.0) / (2.0 * g))
    else:
        out["right_head"] = ur + cr
        out["right_tail"] = sol.u_star + _sound(sol.rho_star_R, sol.p_star, g)
    return out


def sample(sol: RiemannSolution, xi):
    """Self-similar primitive state ``(rho, u, p)`` at ``xi = x / t`` (vectorised)."""
    xi = np.asarray(xi, dtype=float)
    g = sol.gamma
    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    p = np.empty_like(xi)
    ws = wave_speeds(sol)
    g1 = 2.0 / (g + 1.0)
    g2 = (g - 1.0) / (g + 1.0)

    for sign, state, rho_star, wave in (
        (1.0, sol.left, sol.rho_star_L, sol.left_wave),
        (-1.0, sol.right, sol.rho_star_R, sol.right_wave),
    ):
        rk, uk, pk = state
        ck = _sound(rk, pk, g)
        side = xi <= sol.u_star if sign > 0 else xi > sol.u_star
        name = "left" if sign > 0 else "right"
        # work in the frame mirrored so that the wave is a left-facing one
        s = sign * xi
        if wave == SHOCK:
            outer = s < sign * ws[name]
            star = ~outer
            fan = np.zeros_like(outer)
        else:
            outer = s < sign * ws[f"{name}_head"]
            star = s > sign * ws[f"{name}_tail"]
            fan = ~(outer | star)
        for mask, vals in ((outer, (rk, uk, pk)), (star, (rho_star, sol.u_star, sol.p_star))):
            m = side & mask
            rho[m], u[m], p[m] = vals
        m = side & fan
        if np.any(m):
            # u + sign*2c/(g-1) is constant through the fan and u - sign*c = xi
            base = g1 + g2 / ck * sign * (uk - xi[m])
            rho[m] = rk * base ** (2.0 / (g - 1.0))
            u[m] = g1 * (sign * ck + 0.5 * (g - 1.0) * uk + xi[m])
            p[m] = pk * base ** (2.0 * g / (g - 1.0))
    return rho, u, p


def sample_xt(sol: RiemannSolution, x, t: float, x0: float):
    """Primitive solution at positions ``x`` and time ``t`` for a jump at ``x0``."""
    x = np.asarray(x, dtype=float)
    if t <= 0.0:
        xi = np.where(x < x0, -np.inf, np.inf)
        return sample(sol, xi)
    return sample(sol, (x - x0) / t)


def cell_averages(sol: RiemannSolution, faces, t: float, x0: float, npts: int = 5):
    """Gauss-Legendre cell averages of the conserved variables ``(rho, rho u, rho E)``.

    ``faces`` are the ``n + 1`` cell interfaces; returns shape ``(3, n)``.
    """
    faces = np.asarray(faces, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(npts)
    lo, hi = faces[:-1], faces[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    rho, u, p = sample_xt(sol, x, t, x0)
    cons = np.stack([rho, rho * u, p / (sol.gamma - 1.0) + 0.5 * rho * u * u])
    return 0.5 * np.sum(cons * weights, axis=-1)
