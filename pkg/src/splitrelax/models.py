"""Split physical models: Euler (one fast sub-flux) and ideal MHD with GLM
cleaning (two fast sub-fluxes).

All evaluators are vectorised: a state array has the conserved components
on axis 0 and any number of trailing cell/face axes. ``axis`` selects the
flux direction (0 for x, 1 for y).

Component layout
----------------
Euler, ``d`` velocity components: ``(rho, rho*u_1..rho*u_d, rho*E)``.
MHD (always 3-vectors): ``(rho, rho*u_1..3, rho*E, B_1..3, phi)``.

Magnetic quantities use Gaussian units: magnetic pressure ``|B|^2/(8 pi)``,
Alfven speed ``|B|/sqrt(4 pi rho)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StateError

FOUR_PI = 4.0 * np.pi
EIGHT_PI = 8.0 * np.pi


@dataclass(frozen=True)
class Eos:
    """Ideal gas, ``p = (gamma - 1) * rho * e``."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ConfigError(f"gamma must exceed 1, got {self.gamma}")

    def sound_speed(self, rho, p):
        return np.sqrt(self.gamma * p / rho)


def _locate(mask: np.ndarray):
    bad = np.argwhere(mask)
    if bad.size == 0:
        return None
    return tuple(int(v) for v in bad[0])


def check_positive(rho, p, where: str = "state"):
    """Raise :class:`StateError` at the first cell with non-positive or NaN rho/p."""
    rho = np.asarray(rho)
    p = np.asarray(p)
    if not np.all(rho > 0.0):
        raise StateError(f"non-positive or non-finite density in {where}", "rho", _locate(~(rho > 0.0)))
    if not np.all(p > 0.0):
        raise StateError(f"non-positive or non-finite pressure in {where}", "p", _locate(~(p > 0.0)))
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(p))):
        mask = ~(np.isfinite(rho) & np.isfinite(p))
        raise StateError(f"non-finite state in {where}", "rho/p", _locate(mask))


def _fast_root(un, speed):
    """Largest modulus of ``(un +- sqrt(un^2 + 4 s^2)) / 2``."""
    aun = np.abs(un)
    return 0.5 * (aun + np.sqrt(un * un + 4.0 * speed * speed))


@dataclass(frozen=True)
class EulerModel:
    """Compressible Euler equations with the Toro / Vazquez-Cendon splitting.

    ``f_slow = (rho u_n, rho u u_n, rho E_kin u_n)`` carries the material
    waves (treated explicitly); ``f_fast = (0, p n, (rho e + p) u_n)`` the
    acoustic ones (treated implicitly).
    """

    dim: int = 1
    eos: Eos = Eos(1.4)

    name = "euler"
    k = 1
    fast_names = ("pressure",)

    @property
    def m(self) -> int:
        return self.dim + 2

    @property
    def nvel(self) -> int:
        return self.dim

    @property
    def default_order(self) -> tuple:
        return (0,)

    # conversions -----------------------------------------------------------
    def primitives(self, q, check: bool = True):
        """Return ``(rho, u, p)`` with ``u`` of shape ``(d, ...)``."""
        rho = q[0]
        u = q[1 : 1 + self.dim] / rho
        ekin = 0.5 * np.sum(q[1 : 1 + self.dim] * u, axis=0)
        p = (self.eos.gamma - 1.0) * (q[1 + self.dim] - ekin)
        if check:
            check_positive(rho, p)
        return rho, u, p

    def conserved(self, rho, u, p):
        rho = np.asarray(rho, dtype=float)
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.dim:
            raise ConfigError(f"expected {self.dim} velocity components, got {u.shape[0]}")
        q = np.empty((self.m,) + np.broadcast(rho, p).shape)
        q[0] = rho
        q[1 : 1 + self.dim] = rho * u
        q[1 + self.dim] = np.asarray(p) / (self.eos.gamma - 1.0) + 0.5 * rho * np.sum(u * u, axis=0)
        return q

    # fluxes ----------------------------------------------------------------
    def slow_flux(self, q, axis):
        rho, u, _ = self.primitives(q, check=False)
        un = u[axis]
        f = np.empty_like(q)
        f[0] = q[axis + 1]
        f[1 : 1 + self.dim] = q[1 : 1 + self.dim] * un
        f[1 + self.dim] = 0.5 * rho * np.sum(u * u, axis=0) * un
        return f

    def fast_flux(self, q, j, axis):
        rho, u, p = self.primitives(q)
        g = self.eos.gamma
        f = np.zeros_like(q)
        f[1 + axis] = p
        f[1 + self.dim] = g / (g - 1.0) * p * u[axis]
        return f

    def full_flux(self, q, axis):
        rho, u, p = self.primitives(q)
        f = np.empty_like(q)
        f[0] = q[1 + axis]
        f[1 : 1 + self.dim] = q[1 : 1 + self.dim] * u[axis]
        f[1 + axis] += p
        f[1 + self.dim] = (q[1 + self.dim] + p) * u[axis]
        return f

    # wave-speed bounds -----------------------------------------------------
    def slow_speed(self, q, axis):
        return np.abs(q[1 + axis] / q[0])

    def fast_speed(self, q, j, axis):
        rho, u, p = self.primitives(q)
        return _fast_root(u[axis], self.eos.sound_speed(rho, p))

    def with_cleaning_speed(self, ch: float):
        return self

    def cleaning_speed(self, q, axes) -> float:
        return 0.0

    def check(self, q, where="state"):
        rho = q[0]
        ekin = 0.5 * np.sum(q[1 : 1 + self.dim] ** 2, axis=0) / rho
        p = (self.eos.gamma - 1.0) * (q[1 + self.dim] - ekin)
        check_positive(rho, p, where)


@dataclass(frozen=True)
class MhdModel:
    """Ideal MHD with GLM divergence cleaning and the Fambri splitting.

    The first fast sub-flux is the pressure system (identical to the Euler
    one), the second the magnetic system including the cleaning terms
    ``ch^2 phi n`` (induction) and ``B_n`` (cleaning scalar). ``ch`` is held
    fixed for a whole time step; use :meth:`with_cleaning_speed`.
    """

    dim: int = 1
    eos: Eos = Eos(5.0 / 3.0)
    ch: float = 0.0

    name = "mhd"
    k = 2
    m = 9
    nvel = 3
    fast_names = ("pressure", "magnetic")
    PRESSURE = 0
    MAGNETIC = 1

    @property
    def default_order(self) -> tuple:
        # magnetic system first: the induction update feeds the pressure stage
        return (self.MAGNETIC, self.PRESSURE)

    def with_cleaning_speed(self, ch: float) -> "MhdModel":
        return dataclasses.replace(self, ch=float(ch))

    # conversions -----------------------------------------------------------
    def primitives(self, q, check: bool = True):
        """Return ``(rho, u, p, B, phi)``; ``u`` and ``B`` have shape ``(3, ...)``."""
        rho = q[0]
        u = q[1:4] / rho
        B = q[5:8]
        ekin = 0.5 * np.sum(q[1:4] * u, axis=0)
        emag = np.sum(B * B, axis=0) / EIGHT_PI
        p = (self.eos.gamma - 1.0) * (q[4] - ekin - emag)
        if check:
            check_positive(rho, p)
        return rho, u, p, B, q[8]

    def conserved(self, rho, u, p, B, phi=0.0):
        rho = np.asarray(rho, dtype=float)
        u = np.asarray(u, dtype=float)
        B = np.asarray(B, dtype=float)
        shape = np.broadcast(rho, p, u[0], B[0]).shape
        q = np.empty((9,) + shape)
        q[0] = rho
        q[1:4] = rho * u
        q[4] = (
            np.asarray(p) / (self.eos.gamma - 1.0)
            + 0.5 * rho * np.sum(u * u, axis=0)
            + np.sum(B * B, axis=0) / EIGHT_PI
        )
        q[5:8] = B
        q[8] = phi
        return q

    # fluxes ----------------------------------------------------------------
    def slow_flux(self, q, axis):
        rho = q[0]
        u = q[1:4] / rho
        un = u[axis]
        f = np.zeros_like(q)
        f[0] = q[1 + axis]
        f[1:4] = q[1:4] * un
        f[4] = 0.5 * np.sum(q[1:4] * u, axis=0) * un
        return f

    def fast_flux(self, q, j, axis):
        if j == self.PRESSURE:
            return self._pressure_flux(q, axis)
        if j == self.MAGNETIC:
            return self._magnetic_flux(q, axis)
        raise ConfigError(f"MHD has fast sub-fluxes 0 and 1, got {j}")

    def _pressure_flux(self, q, axis):
        rho, u, p, _, _ = self.primitives(q)
        g = self.eos.gamma
        f = np.zeros_like(q)
        f[1 + axis] = p
        f[4] = g / (g - 1.0) * p * u[axis]
        return f

    def _magnetic_flux(self, q, axis):
        u = q[1:4] / q[0]
        B = q[5:8]
        bn = B[axis]
        mp = np.sum(B * B, axis=0) / EIGHT_PI
        f = np.zeros_like(q)
        f[1:4] = -bn * B / FOUR_PI
        f[1 + axis] += mp
        f[4] = 2.0 * mp * u[axis] - bn * np.sum(u * B, axis=0) / FOUR_PI
        f[5:8] = B * u[axis] - u * bn
        f[5 + axis] += self.ch**2 * q[8]
        f[8] = bn
        return f

    def full_flux(self, q, axis):
        rho, u, p, B, phi = self.primitives(q)
        un = u[axis]
        bn = B[axis]
        mp = np.sum(B * B, axis=0) / EIGHT_PI
        f = np.empty_like(q)
        f[0] = rho * un
        f[1:4] = rho * u * un - bn * B / FOUR_PI
        f[1 + axis] += p + mp
        f[4] = (q[4] + p + mp) * un - bn * np.sum(u * B, axis=0) / FOUR_PI
        f[5:8] = B * un - u * bn
        f[5 + axis] += self.ch**2 * phi
        f[8] = bn
        return f

    # wave-speed bounds -----------------------------------------------------
    def slow_speed(self, q, axis):
        return np.abs(q[1 + axis] / q[0])

    def alfven_root(self, q, axis):
        """``(|u_n| + sqrt(u_n^2 + 4 b^2)) / 2`` with ``b = |B| / sqrt(4 pi rho)``.

        The total Alfven speed is taken as the norm of B (not its square)
        over sqrt(4 pi rho), which is the dimensionally consistent reading.
        """
        rho = q[0]
        b2 = np.sum(q[5:8] ** 2, axis=0) / (FOUR_PI * rho)
        return _fast_root(q[1 + axis] / rho, np.sqrt(b2))

    def fast_speed(self, q, j, axis):
        if j == self.PRESSURE:
            rho, u, p, _, _ = self.primitives(q)
            return _fast_root(u[axis], self.eos.sound_speed(rho, p))
        if j == self.MAGNETIC:
            return np.maximum(self.alfven_root(q, axis), self.ch)
        raise ConfigError(f"MHD has fast sub-fluxes 0 and 1, got {j}")

    def cleaning_speed(self, q, axes) -> float:
        """Twice the largest magnetic-system speed over cells and ``axes``."""
        return 2.0 * max(float(np.max(self.alfven_root(q, a))) for a in axes)

    def check(self, q, where="state"):
        rho = q[0]
        ekin = 0.5 * np.sum(q[1:4] ** 2, axis=0) / rho
        emag = np.sum(q[5:8] ** 2, axis=0) / EIGHT_PI
        p = (self.eos.gamma - 1.0) * (q[4] - ekin - emag)
        check_positive(rho, p, where)
        if not np.all(np.isfinite(q)):
            raise StateError(f"non-finite state in {where}", "q", _locate(~np.isfinite(q).all(axis=0)))


# single-state convenience wrappers ------------------------------------------

def euler_cons2prim(q, eos: Eos = Eos()):
    """``(rho, u, p)`` of an Euler state ``(rho, rho*u..., rho*E)``."""
    q = np.asarray(q, dtype=float)
    model = EulerModel(dim=q.shape[0] - 2, eos=eos)
    return model.primitives(q)


def euler_prim2cons(rho, u, p, eos: Eos = Eos()):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return EulerModel(dim=u.shape[0], eos=eos).conserved(rho, u, p)


def euler_split_fluxes(q, axis: int = 0, eos: Eos = Eos()):
    """``(f_slow, f_fast)`` of the Toro / Vazquez-Cendon splitting."""
    q = np.asarray(q, dtype=float)
    model = EulerModel(dim=q.shape[0] - 2, eos=eos)
    return model.slow_flux(q, axis), model.fast_flux(q, 0, axis)


def euler_speeds(q, axis: int = 0, eos: Eos = Eos()):
    """``(s_slow, s_fast)`` spectral-radius bounds of the two sub-fluxes."""
    q = np.asarray(q, dtype=float)
    model = EulerModel(dim=q.shape[0] - 2, eos=eos)
    return model.slow_speed(q, axis), model.fast_speed(q, 0, axis)


def mhd_split_fluxes(q, axis: int = 0, ch: float = 0.0, eos: Eos = Eos(5.0 / 3.0)):
    """``(f_slow, f_fast_pressure, f_fast_magnetic)`` of the Fambri splitting."""
    model = MhdModel(eos=eos, ch=ch)
    q = np.asarray(q, dtype=float)
    model.check(q)
    return model.slow_flux(q, axis), model.fast_flux(q, 0, axis), model.fast_flux(q, 1, axis)


def mhd_speeds(q, axis: int = 0, ch: float = 0.0, eos: Eos = Eos(5.0 / 3.0)):
    model = MhdModel(eos=eos, ch=ch)
    q = np.asarray(q, dtype=float)
    return model.slow_speed(q, axis), model.fast_speed(q, 0, axis), model.fast_speed(q, 1, axis)


def mhd_cleaning_speed(values, dim: int | None = None, eos: Eos = Eos(5.0 / 3.0)) -> float:
    """Cleaning speed for interior MHD values of shape ``(9, *n)``."""
    values = np.asarray(values, dtype=float)
    dim = values.ndim - 1 if dim is None else dim
    model = MhdModel(dim=dim, eos=eos)
    model.check(values)
    return model.cleaning_speed(values, range(dim))
