"""Solvers for the symmetric positive definite systems ``(I - sum_l mu_l D2_l) x = b``.

``D2_l`` is the three-point second difference along axis ``l`` closed by
the same ghost rule as the state: periodic wrap or zero-gradient copy. In
both cases constants lie in the kernel of ``D2``, so every solve first
splits off the mean of the right-hand side (solved exactly) and works on
the fluctuation. This keeps round-off relative to the fluctuation size,
which matters when e.g. the energy is ``O(1/M^2)`` but varies by ``O(1)``.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConfigError, SolverError
from .grid import PERIODIC, BoundaryCondition, Grid

DEFAULT_TOL = 1e-11
SOLVER_METHODS = ("cg", "direct", "spectral", "auto")


@dataclass(frozen=True)
class HelmholtzSystem:
    """Operator ``I - sum_l mu_l D2_l`` on the interior cells of ``grid``.

    ``mu_l = (coef * a_l * dt / dx_l)^2`` is dimensionless.
    """

    grid: Grid
    mu: tuple
    bc: BoundaryCondition

    def __post_init__(self):
        if len(self.mu) != self.grid.dim:
            raise ConfigError(f"need one mu per axis, got {self.mu}")
        if any(not (m >= 0.0 and np.isfinite(m)) for m in self.mu):
            raise ConfigError(f"mu must be finite and non-negative, got {self.mu}")

    @classmethod
    def from_speeds(cls, grid, bc, a_per_axis, dt, coef=1.0):
        mu = tuple(float((coef * a * dt / h) ** 2) for a, h in zip(a_per_axis, grid.dx))
        return cls(grid, mu, bc)

    @property
    def diagonal(self) -> np.ndarray:
        """Diagonal of the operator on the interior grid."""
        d = np.ones(self.grid.n)
        for axis, (k, m) in enumerate(zip(self.grid.n, self.mu)):
            line = np.full(k, 2.0 * m)
            if not self.bc.periodic(axis):
                line[0] -= m
                line[-1] -= m
            elif k == 1:
                line[:] = 0.0
            elif k == 2:
                line[:] = 2.0 * m
            shape = [1] * self.grid.dim
            shape[axis] = k
            d = d + line.reshape(shape)
        return d


def apply_operator(sys: HelmholtzSystem, x: np.ndarray) -> np.ndarray:
    """Matrix-free ``(I - sum mu D2) x`` for ``x`` of shape ``(..., *n)``."""
    out = x.copy()
    dim = sys.grid.dim
    for axis, m in enumerate(sys.mu):
        if m == 0.0:
            continue
        ax = x.ndim - dim + axis
        mode = "wrap" if sys.bc.periodic(axis) else "edge"
        pad = [(0, 0)] * x.ndim
        pad[ax] = (1, 1)
        w = np.pad(x, pad, mode=mode)
        n = x.shape[ax]
        lo = np.take(w, np.arange(0, n), axis=ax)
        hi = np.take(w, np.arange(2, n + 2), axis=ax)
        out -= m * (lo - 2.0 * x + hi)
    return out


def _dense_matrix(sys: HelmholtzSystem) -> np.ndarray:
    N = sys.grid.size
    eye = np.eye(N).reshape((N,) + sys.grid.n)
    return apply_operator(sys, eye).reshape(N, N).T


def _split_mean(rhs, dim):
    axes = tuple(range(rhs.ndim - dim, rhs.ndim))
    mean = np.mean(rhs, axis=axes, keepdims=True)
    return mean, rhs - mean


def solve_1d(sys: HelmholtzSystem, rhs) -> np.ndarray:
    """Direct solve on a 1D grid; ``rhs`` of shape ``(n,)`` or ``(b, n)``.

    Tridiagonal elimination for the zero-gradient closure, plus a rank-one
    (Sherman-Morrison) correction for the cyclic periodic system.
    """
    if sys.grid.dim != 1:
        raise ConfigError("solve_1d needs a 1D system")
    rhs = np.asarray(rhs, dtype=float)
    mu = sys.mu[0]
    if mu == 0.0:
        return rhs.copy()
    mean, b = _split_mean(rhs, 1)
    n = sys.grid.n[0]
    cols = b.reshape(-1, n).T
    if n <= 4:
        x = np.linalg.solve(_dense_matrix(sys), cols)
    else:
        periodic = sys.bc.periodic(0)
        ab = np.empty((3, n))
        ab[0] = -mu
        ab[1] = 1.0 + 2.0 * mu
        ab[2] = -mu
        if not periodic:
            ab[1, 0] = ab[1, -1] = 1.0 + mu
            x = scipy.linalg.solve_banded((1, 1), ab, cols, check_finite=False)
        else:
            diag = 1.0 + 2.0 * mu
            corner = -mu
            gam = -diag
            ab[1, 0] = diag - gam
            ab[1, -1] = diag - corner * corner / gam
            u = np.zeros(n)
            u[0] = gam
            u[-1] = corner
            sol = scipy.linalg.solve_banded(
                (1, 1), ab, np.column_stack([cols, u]), check_finite=False
            )
            y, z = sol[:, :-1], sol[:, -1]
            vy = y[0] + corner / gam * y[-1]
            vz = z[0] + corner / gam * z[-1]
            x = y - np.outer(z, vy / (1.0 + vz))
    return x.T.reshape(rhs.shape) + mean


def _cg_cap(N: int) -> int:
    return int(10 * np.sqrt(N) + 100)


def solve_cg(sys: HelmholtzSystem, rhs, tol: float = DEFAULT_TOL, maxiter: int | None = None):
    """Jacobi-preconditioned conjugate gradients, batched over leading axes.

    Zero initial guess; each batch member stops once its residual norm
    falls below ``tol`` times the norm of its (mean-free) right-hand side.
    Reductions are plain ordered numpy sums, so results are reproducible.

    Returns
    -------
    x : ndarray
    info : dict
        ``iterations`` and final relative ``residual`` (worst member).
    """
    rhs = np.asarray(rhs, dtype=float)
    dim = sys.grid.dim
    mean, b = _split_mean(rhs, dim)
    axes = tuple(range(b.ndim - dim, b.ndim))
    cap = _cg_cap(sys.grid.size) if maxiter is None else maxiter
    bnorm = np.sqrt(np.sum(b * b, axis=axes, keepdims=True))
    target = tol * bnorm
    dinv = 1.0 / sys.diagonal
    x = np.zeros_like(b)
    r = b.copy()
    z = dinv * r
    p = z.copy()
    rz = np.sum(r * z, axis=axes, keepdims=True)
    rnorm = bnorm.copy()
    it = 0
    while np.any(rnorm > target):
        if it >= cap:
            worst = float(np.max(rnorm / np.where(bnorm > 0, bnorm, 1.0)))
            raise SolverError("CG iteration cap exceeded", residual=worst, iterations=it)
        active = rnorm > target
        Ap = apply_operator(sys, p)
        pAp = np.sum(p * Ap, axis=axes, keepdims=True)
        alpha = np.where(active, rz / np.where(active, pAp, 1.0), 0.0)
        x += alpha * p
        r -= alpha * Ap
        z = dinv * r
        rz_new = np.sum(r * z, axis=axes, keepdims=True)
        beta = np.where(active, rz_new / np.where(active, rz, 1.0), 0.0)
        p = z + beta * p
        rz = np.where(active, rz_new, rz)
        rnorm = np.where(active, np.sqrt(np.sum(r * r, axis=axes, keepdims=True)), rnorm)
        it += 1
    rel = float(np.max(rnorm / np.where(bnorm > 0, bnorm, 1.0))) if rnorm.size else 0.0
    return x + mean, {"iterations": it, "residual": rel}


class _FactorCache:
    """Small LRU cache of sparse LU factorisations keyed by the operator."""

    def __init__(self, size: int = 6):
        self.size = size
        self._store: OrderedDict = OrderedDict()

    def get(self, sys: HelmholtzSystem):
        key = (sys.grid.n, sys.mu, sys.bc.kinds)
        lu = self._store.get(key)
        if lu is None:
            lu = scipy.sparse.linalg.splu(_sparse_matrix(sys).tocsc())
            self._store[key] = lu
            if len(self._store) > self.size:
                self._store.popitem(last=False)
        else:
            self._store.move_to_end(key)
        return lu

    def clear(self):
        self._store.clear()


_FACTORS = _FactorCache()


def _second_difference(n: int, periodic: bool):
    if n == 1:
        return scipy.sparse.csr_matrix((1, 1))
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    D = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="lil")
    if periodic:
        D[0, n - 1] += 1.0
        D[n - 1, 0] += 1.0
    else:
        D[0, 0] = -1.0
        D[n - 1, n - 1] = -1.0
    return D.tocsr()


def _sparse_matrix(sys: HelmholtzSystem):
    n = sys.grid.n
    N = sys.grid.size
    A = scipy.sparse.identity(N, format="csr")
    for axis, m in enumerate(sys.mu):
        if m == 0.0:
            continue
        D = _second_difference(n[axis], sys.bc.periodic(axis))
        # row-major flattening: the last axis varies fastest
        mats = [scipy.sparse.identity(k, format="csr") for k in n]
        mats[axis] = D
        K = mats[0]
        for M in mats[1:]:
            K = scipy.sparse.kron(K, M, format="csr")
        A = A - m * K
    return A


def solve_direct(sys: HelmholtzSystem, rhs) -> np.ndarray:
    """Sparse LU solve (factorisation cached per operator), batched."""
    rhs = np.asarray(rhs, dtype=float)
    dim = sys.grid.dim
    mean, b = _split_mean(rhs, dim)
    lu = _FACTORS.get(sys)
    cols = b.reshape(-1, sys.grid.size).T
    x = lu.solve(np.ascontiguousarray(cols))
    return x.T.reshape(rhs.shape) + mean


def _symbol(n: int, periodic: bool) -> np.ndarray:
    """Eigenvalues of ``-D2`` in the FFT (periodic) or DCT-II (zero-gradient) basis."""
    k = np.arange(n)
    return 4.0 * np.sin(np.pi * k / (n if periodic else 2 * n)) ** 2


def solve_spectral(sys: HelmholtzSystem, rhs) -> np.ndarray:
    """Exact solve by diagonalisation, batched over leading axes.

    The constant-coefficient operator is separable: periodic axes are
    diagonalised by the FFT and zero-gradient axes by the DCT-II.
    """
    rhs = np.asarray(rhs, dtype=float)
    dim = sys.grid.dim
    mean, b = _split_mean(rhs, dim)
    axes = [b.ndim - dim + l for l in range(dim)]
    cos_axes = [ax for ax, l in zip(axes, range(dim)) if not sys.bc.periodic(l)]
    fft_axes = [ax for ax, l in zip(axes, range(dim)) if sys.bc.periodic(l)]
    denom = np.ones(sys.grid.n)
    for l, (k, m) in enumerate(zip(sys.grid.n, sys.mu)):
        shape = [1] * dim
        shape[l] = k
        denom = denom + m * _symbol(k, sys.bc.periodic(l)).reshape(shape)
    w = scipy.fft.dctn(b, type=2, axes=cos_axes, norm="ortho") if cos_axes else b
    if fft_axes:
        w = np.real(scipy.fft.ifftn(scipy.fft.fftn(w, axes=fft_axes) / denom, axes=fft_axes))
    else:
        w = w / denom
    x = scipy.fft.idctn(w, type=2, axes=cos_axes, norm="ortho") if cos_axes else w
    return x + mean


def solve_2d(sys: HelmholtzSystem, rhs, tol: float = DEFAULT_TOL, method: str = "cg"):
    """Solve on a 2D grid; ``rhs`` of shape ``(*n)`` or ``(b, *n)``.

    ``method="cg"`` is the matrix-free Jacobi-PCG solver with the iteration
    cap ``10 sqrt(N) + 100``; ``"direct"`` uses a cached sparse LU;
    ``"spectral"`` diagonalises the operator with FFT/DCT; ``"auto"`` is
    the spectral solve, which is exact and costs ``O(N log N)`` at any
    stiffness.
    """
    if sys.grid.dim != 2:
        raise ConfigError("solve_2d needs a 2D system")
    if method not in SOLVER_METHODS:
        raise ConfigError(f"unknown solver {method!r}; expected one of {SOLVER_METHODS}")
    rhs = np.asarray(rhs, dtype=float)
    if all(m == 0.0 for m in sys.mu):
        return rhs.copy()
    if method in ("auto", "spectral"):
        return solve_spectral(sys, rhs)
    if method == "direct":
        return solve_direct(sys, rhs)
    return solve_cg(sys, rhs, tol)[0]


def solve_block(sys: HelmholtzSystem, rhs, tol: float = DEFAULT_TOL, method: str = "cg"):
    """Solve every component of ``rhs`` (shape ``(m, *n)``) with the same operator."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[1:] != sys.grid.n:
        raise ConfigError(f"rhs shape {rhs.shape} does not match grid {sys.grid.n}")
    if sys.grid.dim == 1:
        return solve_1d(sys, rhs)
    return solve_2d(sys, rhs, tol, method)


def residual(sys: HelmholtzSystem, x, rhs) -> float:
    """Max-norm residual ``|A x - rhs|``."""
    return float(np.max(np.abs(apply_operator(sys, np.asarray(x)) - rhs)))
