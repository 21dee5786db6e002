import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitrelax.errors import ConfigError, SolverError
from splitrelax.grid import OUTFLOW, PERIODIC, BoundaryCondition, build_grid
from splitrelax.linsolve import (
    HelmholtzSystem,
    apply_operator,
    residual,
    solve_1d,
    solve_2d,
    solve_block,
    solve_cg,
    solve_direct,
    solve_spectral,
)

METHODS_2D = ["cg", "direct", "spectral", "auto"]


def dense_oracle(sys):
    """Assemble ``I - sum mu D2`` entry by entry from the stencil definition."""
    n = sys.grid.n
    N = sys.grid.size
    A = np.eye(N)
    index = np.arange(N).reshape(n)
    for cell in np.ndindex(*n):
        row = index[cell]
        for axis, mu in enumerate(sys.mu):
            for off in (-1, 1):
                nb = list(cell)
                k = nb[axis] + off
                if sys.bc.periodic(axis):
                    k %= n[axis]
                else:
                    k = min(max(k, 0), n[axis] - 1)
                nb[axis] = k
                A[row, index[tuple(nb)]] -= mu
                A[row, row] += mu
    return A


def system_1d(n, mu, kind):
    return HelmholtzSystem(build_grid((0.0, 1.0), n), (mu,), BoundaryCondition((kind,)))


def system_2d(n, mu, kinds):
    return HelmholtzSystem(build_grid([(0.0, 1.0), (0.0, 2.0)], n), tuple(mu), BoundaryCondition(tuple(kinds)))


def solve_any(sys, rhs, method):
    return solve_1d(sys, rhs) if sys.grid.dim == 1 else solve_2d(sys, rhs, method=method)


# 1D ------------------------------------------------------------------------------


@pytest.mark.parametrize("kind", [PERIODIC, OUTFLOW])
def test_1d_identity_and_constant(kind):
    rhs = np.random.default_rng(0).normal(size=8)
    np.testing.assert_array_equal(solve_1d(system_1d(8, 0.0, kind), rhs), rhs)
    np.testing.assert_allclose(solve_1d(system_1d(8, 3.0, kind), np.full(8, 2.5)), 2.5, rtol=1e-15)


@pytest.mark.parametrize("kind", [PERIODIC, OUTFLOW])
@pytest.mark.parametrize("n", [1, 2, 3, 8, 33])
def test_1d_matches_dense_oracle(kind, n):
    sys = system_1d(n, 0.7, kind)
    rhs = np.random.default_rng(n).normal(size=n)
    x = solve_1d(sys, rhs)
    np.testing.assert_allclose(x, np.linalg.solve(dense_oracle(sys), rhs), rtol=0, atol=1e-12)
    assert residual(sys, x, rhs) <= 1e-12 * (1.0 + np.max(np.abs(rhs)))


@pytest.mark.parametrize("kind", [PERIODIC, OUTFLOW])
@pytest.mark.parametrize("mu", [1e2, 1e4])
def test_1d_residual(kind, mu):
    sys = system_1d(200, mu, kind)
    rhs = np.random.default_rng(3).normal(size=200)
    x = solve_1d(sys, rhs)
    assert residual(sys, x, rhs) <= 1e-12 * (1.0 + np.max(np.abs(rhs)))


@pytest.mark.parametrize("kind", [PERIODIC, OUTFLOW])
def test_1d_stiff_backward_error(kind):
    # beyond mu ~ 1e4 rounding in A x alone is ~ eps * 4 mu |x|; bound the backward error
    mu = 1e6
    sys = system_1d(200, mu, kind)
    rhs = np.random.default_rng(3).normal(size=200)
    x = solve_1d(sys, rhs)
    assert residual(sys, x, rhs) <= 1e-14 * ((1.0 + 4.0 * mu) * np.max(np.abs(x)) + np.max(np.abs(rhs)))


# 2D ------------------------------------------------------------------------------


@pytest.mark.parametrize("method", METHODS_2D)
@pytest.mark.parametrize("kinds", [(PERIODIC, PERIODIC), (OUTFLOW, OUTFLOW), (PERIODIC, OUTFLOW), (OUTFLOW, PERIODIC)])
def test_2d_matches_dense_oracle(method, kinds):
    sys = system_2d((8, 8), (0.5, 0.25), kinds)
    rhs = np.random.default_rng(4).normal(size=(8, 8))
    x = solve_2d(sys, rhs, method=method)
    ref = np.linalg.solve(dense_oracle(sys), rhs.ravel()).reshape(8, 8)
    np.testing.assert_allclose(x, ref, rtol=0, atol=1e-10)


@pytest.mark.parametrize("method", METHODS_2D)
def test_2d_relative_residual(method):
    sys = system_2d((24, 16), (40.0, 7.0), (PERIODIC, OUTFLOW))
    rhs = np.random.default_rng(5).normal(size=(24, 16))
    x = solve_2d(sys, rhs, method=method)
    r = apply_operator(sys, x) - rhs
    assert np.linalg.norm(r) <= 1e-11 * np.linalg.norm(rhs)


@pytest.mark.parametrize("method", METHODS_2D)
def test_2d_identity_and_constant(method):
    rhs = np.random.default_rng(6).normal(size=(5, 7))
    np.testing.assert_array_equal(solve_2d(system_2d((5, 7), (0.0, 0.0), (PERIODIC, PERIODIC)), rhs, method=method), rhs)
    c = np.full((5, 7), -1.25)
    x = solve_2d(system_2d((5, 7), (2.0, 3.0), (PERIODIC, PERIODIC)), c, method=method)
    np.testing.assert_allclose(x, c, rtol=1e-14)


def test_cg_iteration_cap_raises_solver_error():
    sys = system_2d((32, 32), (1e4, 1e4), (PERIODIC, PERIODIC))
    rhs = np.random.default_rng(7).normal(size=(32, 32))
    with pytest.raises(SolverError) as exc:
        solve_cg(sys, rhs, tol=1e-14, maxiter=3)
    assert exc.value.iterations == 3 and exc.value.residual > 1e-14


def test_cg_reports_iterations_and_is_deterministic():
    sys = system_2d((16, 16), (3.0, 1.0), (OUTFLOW, PERIODIC))
    rhs = np.random.default_rng(8).normal(size=(16, 16))
    x1, info = solve_cg(sys, rhs)
    x2, _ = solve_cg(sys, rhs)
    np.testing.assert_array_equal(x1, x2)
    assert info["residual"] <= 1e-11 and 0 < info["iterations"] <= 10 * 16 + 100


def test_unknown_method_and_bad_mu():
    sys = system_2d((4, 4), (1.0, 1.0), (PERIODIC, PERIODIC))
    with pytest.raises(ConfigError):
        solve_2d(sys, np.zeros((4, 4)), method="multigrid")
    with pytest.raises(ConfigError):
        system_2d((4, 4), (-1.0, 1.0), (PERIODIC, PERIODIC))
    with pytest.raises(ConfigError):
        solve_1d(sys, np.zeros((4, 4)))


# block solves ------------------------------------------------------------------------


@pytest.mark.parametrize("method", METHODS_2D)
def test_block_matches_per_component_oracle(method):
    sys = system_2d((6, 5), (0.8, 1.7), (OUTFLOW, PERIODIC))
    rhs = np.random.default_rng(9).normal(size=(4, 6, 5))
    x = solve_block(sys, rhs, method=method)
    A = dense_oracle(sys)
    for c in range(4):
        np.testing.assert_allclose(x[c], np.linalg.solve(A, rhs[c].ravel()).reshape(6, 5), atol=1e-10)


def test_block_identical_components_and_identity():
    sys = system_1d(12, 2.0, OUTFLOW)
    r = np.random.default_rng(10).normal(size=12)
    x = solve_block(sys, np.stack([r, r, r]))
    assert np.array_equal(x[0], x[1]) and np.array_equal(x[1], x[2])
    rhs = np.random.default_rng(11).normal(size=(3, 12))
    np.testing.assert_array_equal(solve_block(system_1d(12, 0.0, OUTFLOW), rhs), rhs)
    with pytest.raises(ConfigError):
        solve_block(sys, np.zeros((3, 11)))


def test_direct_and_spectral_agree_on_batches():
    sys = system_2d((10, 12), (5.0, 0.3), (OUTFLOW, OUTFLOW))
    rhs = np.random.default_rng(12).normal(size=(3, 10, 12))
    np.testing.assert_allclose(solve_direct(sys, rhs), solve_spectral(sys, rhs), atol=1e-12)


# operator properties ---------------------------------------------------------------------

SYSTEMS = st.sampled_from(
    [
        ("1d", PERIODIC),
        ("1d", OUTFLOW),
        ("2d", (PERIODIC, PERIODIC)),
        ("2d", (OUTFLOW, PERIODIC)),
        ("2d", (OUTFLOW, OUTFLOW)),
    ]
)


def _make(kind, mu, n):
    if kind[0] == "1d":
        return system_1d(n, mu[0], kind[1])
    return system_2d((n, n + 1), mu, kind[1])


@settings(max_examples=40, deadline=None)
@given(
    kind=SYSTEMS,
    mu=st.tuples(st.floats(0.0, 100.0), st.floats(0.0, 100.0)),
    n=st.integers(2, 12),
    seed=st.integers(0, 2**31 - 1),
)
def test_operator_symmetric_positive_definite(kind, mu, n, seed):
    sys = _make(kind, mu, n)
    rng = np.random.default_rng(seed)
    u = rng.normal(size=sys.grid.n)
    v = rng.normal(size=sys.grid.n)
    Au, Av = apply_operator(sys, u), apply_operator(sys, v)
    scale = np.linalg.norm(Au) * np.linalg.norm(v) + np.linalg.norm(u) * np.linalg.norm(Av)
    assert abs(np.sum(Au * v) - np.sum(u * Av)) <= 1e-13 * scale
    assert np.sum(Au * u) >= np.sum(u * u) * (1.0 - 1e-14)


@settings(max_examples=40, deadline=None)
@given(
    kind=SYSTEMS,
    mu=st.tuples(st.floats(0.0, 50.0), st.floats(0.0, 50.0)),
    n=st.integers(2, 12),
    seed=st.integers(0, 2**31 - 1),
    alpha=st.floats(-1e3, 1e3).filter(lambda a: abs(a) > 1e-3),
)
def test_solver_linearity_and_maximum_principle(kind, mu, n, seed, alpha):
    sys = _make(kind, mu, n)
    rng = np.random.default_rng(seed)
    rhs = rng.uniform(-2.0, 3.0, size=sys.grid.n)
    x = solve_any(sys, rhs, "auto")
    xa = solve_any(sys, alpha * rhs, "auto")
    np.testing.assert_allclose(xa, alpha * x, rtol=0, atol=1e-12 * abs(alpha) * np.max(np.abs(x)) + 1e-300)
    assert np.min(x) >= np.min(rhs) - 1e-12 and np.max(x) <= np.max(rhs) + 1e-12
