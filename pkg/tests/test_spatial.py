import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitrelax.errors import ConfigError
from splitrelax.grid import OUTFLOW, PERIODIC, BoundaryCondition, build_grid, pad_interior
from splitrelax.models import Eos, EulerModel, MhdModel
from splitrelax.spatial import (
    central_fast_flux,
    compute_dt,
    compute_relax_speeds,
    explicit_divergence,
    fast_divergence,
    minmod,
    reconstruct,
    rusanov_flux,
    weighted_laplacian,
)

EULER = EulerModel(1, Eos(1.4))
SOD_L = np.array([1.0, 0.0, 2.5])
SOD_R = np.array([0.125, 0.0, 0.25])


def test_minmod_values():
    np.testing.assert_array_equal(minmod(np.array([1.0, -1.0, -2.0]), np.array([2.0, 2.0, -1.0])), [1.0, 0.0, -1.0])


def test_rusanov_consistency():
    rng = np.random.default_rng(0)
    q = EULER.conserved(rng.uniform(0.5, 2, 20), rng.uniform(-3, 3, (1, 20)), rng.uniform(0.5, 2, 20))
    np.testing.assert_array_equal(rusanov_flux(q, q, 0, EULER), EULER.slow_flux(q, 0))


def test_rusanov_sod_interface_is_zero():
    F = rusanov_flux(SOD_L[:, None], SOD_R[:, None], 0, EULER)
    assert np.all(F == 0.0)


def test_rusanov_against_scalar_reference():
    qL = np.array([1.0, 2.0, 4.5])
    qR = 2.0 * qL  # rho = 2, u = 2, p = 2
    gamma = 1.4

    def slow(q):
        rho, m, E = q
        u = m / rho
        return np.array([m, m * u, 0.5 * m * u * u])

    s = max(abs(qL[1] / qL[0]), abs(qR[1] / qR[0]))
    assert s == 2.0
    ref = 0.5 * (slow(qL) + slow(qR)) - 0.5 * s * (qR - qL)
    F = rusanov_flux(qL[:, None], qR[:, None], 0, EulerModel(1, Eos(gamma)))[:, 0]
    np.testing.assert_allclose(F, ref, rtol=1e-15)
    np.testing.assert_allclose(F, [2.0, 4.0, 1.5], rtol=1e-15)


def test_rusanov_global_diffusion_uses_grid_maximum():
    qL = EULER.conserved(np.ones(2), np.array([[0.0, 3.0]]), np.ones(2))
    qR = EULER.conserved(np.array([2.0, 2.0]), np.array([[1.0, 3.0]]), np.ones(2))
    loc = rusanov_flux(qL, qR, 0, EULER, "local")
    glob = rusanov_flux(qL, qR, 0, EULER, "global")
    central = 0.5 * (EULER.slow_flux(qL, 0) + EULER.slow_flux(qR, 0))
    np.testing.assert_allclose(loc[:, 0], central[:, 0] - 0.5 * 1.0 * (qR - qL)[:, 0])
    np.testing.assert_allclose(glob[:, 0], central[:, 0] - 0.5 * 3.0 * (qR - qL)[:, 0])
    with pytest.raises(ConfigError):
        rusanov_flux(qL, qR, 0, EULER, "upwind")


def test_central_fast_flux_sod():
    F = central_fast_flux(SOD_L[:, None], SOD_R[:, None], 0, 0, EULER)[:, 0]
    np.testing.assert_allclose(F, [0.0, 0.55, 0.0], rtol=1e-15, atol=0.0)


def test_central_fast_flux_same_state_and_antisymmetric():
    q = EULER.conserved(1.0, np.array([0.3]), 2.0)[:, None]
    np.testing.assert_array_equal(central_fast_flux(q, q, 0, 0, EULER), EULER.fast_flux(q, 0, 0))
    # with B = 0 the magnetic sub-flux is the cleaning term ch^2 phi, odd in phi
    m = MhdModel(1).with_cleaning_speed(2.0)
    qa = m.conserved(1.0, np.array([0.5, 0.2, 0.0]), 1.0, np.zeros(3), 0.3)[:, None]
    qb = m.conserved(2.0, np.array([-0.1, 0.0, 0.4]), 3.0, np.zeros(3), -0.3)[:, None]
    np.testing.assert_array_equal(m.fast_flux(qa, 1, 0), -m.fast_flux(qb, 1, 0))
    assert np.all(central_fast_flux(qa, qb, 1, 0, m) == 0.0)


def _padded(values, n, kind=PERIODIC, ghost=2, domain=(0.0, 1.0)):
    g = build_grid(domain, n, ghost)
    return g, pad_interior(np.atleast_2d(values), g, BoundaryCondition((kind,)))


def test_reconstruct_linear_field_exact():
    g, data = _padded(3.0 * build_grid((0.0, 1.0), 10).centers(0), 10, OUTFLOW)
    qm, qp = reconstruct(data, g, 0, "minmod")
    faces = g.faces(0)
    # interior faces only: edge cells see the zero-gradient ghost
    np.testing.assert_allclose(qm[0, 2:-2], 3.0 * faces[2:-2], rtol=1e-14)
    np.testing.assert_allclose(qp[0, 2:-2], 3.0 * faces[2:-2], rtol=1e-14)
    qm2, qp2 = reconstruct(data, g, 0, "none")
    np.testing.assert_allclose(qm2[0, 2:-2], 3.0 * faces[2:-2], rtol=1e-14)


@pytest.mark.parametrize("limiter", ["minmod", "none", "constant"])
def test_reconstruct_constant_field(limiter):
    g, data = _padded(np.full(6, 2.5), 6)
    qm, qp = reconstruct(data, g, 0, limiter)
    assert qm.shape == (1, 7)
    assert np.all(qm == 2.5) and np.all(qp == 2.5)


def test_reconstruct_rejects_unknown_limiter():
    g, data = _padded(np.ones(4), 4)
    with pytest.raises(ConfigError):
        reconstruct(data, g, 0, "superbee")


def _interface_tv(values):
    n = values.size
    g, data = _padded(values, n)
    qm, qp = reconstruct(data, g, 0, "minmod")
    # per cell: left-face value then right-face value, walking the periodic line
    seq = np.empty(2 * n)
    seq[0::2] = qp[0, :-1]
    seq[1::2] = qm[0, 1:]
    return np.sum(np.abs(np.diff(np.append(seq, seq[0])))), np.sum(np.abs(np.diff(np.append(values, values[0]))))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10.0, 10.0, allow_nan=False), min_size=4, max_size=40))
def test_minmod_tvd_random(vals):
    tv_rec, tv_cells = _interface_tv(np.array(vals))
    assert tv_rec <= tv_cells * (1.0 + 1e-12) + 1e-12


@pytest.mark.parametrize("kind", ["monotone", "oscillatory"])
def test_minmod_tvd_structured(kind):
    rng = np.random.default_rng(5)
    v = np.cumsum(rng.uniform(0, 1, 50)) if kind == "monotone" else (-1.0) ** np.arange(50) * rng.uniform(1, 2, 50)
    tv_rec, tv_cells = _interface_tv(v)
    assert tv_rec <= tv_cells * (1.0 + 1e-12)


# time step ------------------------------------------------------------------------


def test_compute_dt_examples():
    g = build_grid((0.0, 1.0), 1000)
    q = EULER.conserved(np.ones(1000), np.full((1, 1000), 2.0), np.ones(1000))
    assert compute_dt(q, g, EULER, 0.5) == pytest.approx(2.5e-4, rel=1e-15)
    q0 = EULER.conserved(np.ones(1000), np.zeros((1, 1000)), np.ones(1000))
    assert compute_dt(q0, g, EULER, 0.5, dt_max=1e-2) == 1e-2
    g2 = build_grid([(0.0, 1.0), (0.0, 1.0)], (10, 10))
    m2 = EulerModel(2)
    u = np.stack([np.full((10, 10), 2.0), np.full((10, 10), 4.0)])
    q2 = m2.conserved(np.ones((10, 10)), u, np.ones((10, 10)))
    assert compute_dt(q2, g2, m2, 0.25) == pytest.approx(6.25e-3, rel=1e-14)


def test_compute_dt_lands_on_end_time_and_validates():
    g = build_grid((0.0, 1.0), 10)
    q = EULER.conserved(np.ones(10), np.ones((1, 10)), np.ones(10))
    assert compute_dt(q, g, EULER, 0.5, t=0.99, t_end=1.0) == pytest.approx(0.01)
    with pytest.raises(ConfigError):
        compute_dt(q, g, EULER, 1.5)
    q0 = EULER.conserved(np.ones(10), np.zeros((1, 10)), np.ones(10))
    with pytest.raises(ConfigError):
        compute_dt(q0, g, EULER, 0.5)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), nu1=st.floats(0.01, 1.0), nu2=st.floats(0.01, 1.0))
def test_compute_dt_monotone_and_extension_invariant(seed, nu1, nu2):
    rng = np.random.default_rng(seed)
    n = 12
    u = rng.uniform(-3, 3, (1, n))
    q = EULER.conserved(np.ones(n), u, np.ones(n))
    g = build_grid((0.0, 0.25 * n), n)
    lo, hi = sorted((nu1, nu2))
    assert compute_dt(q, g, EULER, lo) <= compute_dt(q, g, EULER, hi)
    # extra cells with smaller speed and the same dx leave dt unchanged
    extra = EULER.conserved(np.ones(5), 0.5 * np.max(np.abs(u)) * np.ones((1, 5)), np.ones(5))
    g2 = build_grid((0.0, 0.25 * (n + 5)), n + 5)
    assert compute_dt(np.concatenate([q, extra], axis=1), g2, EULER, hi) == compute_dt(q, g, EULER, hi)


# relaxation speeds ------------------------------------------------------------------


def test_relax_speeds_sod_and_uniform():
    g = build_grid((0.0, 1.0), 10)
    q = np.where(g.centers(0) < 0.5, SOD_L[:, None], SOD_R[:, None])
    a = compute_relax_speeds(q, g, EULER, safety=1.2)
    assert a.shape == (1, 1)
    assert a[0, 0] == pytest.approx(1.2 * np.sqrt(1.4), rel=1e-15)
    qu = EULER.conserved(np.ones(10), np.full((1, 10), 0.7), np.full(10, 3.0))
    np.testing.assert_allclose(compute_relax_speeds(qu, g, EULER)[0, 0], EULER.fast_speed(qu, 0, 0)[0], rtol=1e-15)
    with pytest.raises(ConfigError):
        compute_relax_speeds(qu, g, EULER, safety=0.9)


def test_relax_speeds_mhd_zero_field_is_cleaning_speed():
    g = build_grid([(0.0, 1.0), (0.0, 1.0)], (4, 4))
    m = MhdModel(2).with_cleaning_speed(2.5)
    q = m.conserved(np.ones((4, 4)), np.zeros((3, 4, 4)), np.ones((4, 4)), np.zeros((3, 4, 4)), 0.0)
    a = compute_relax_speeds(q, g, m, safety=1.1)
    np.testing.assert_allclose(a[:, 1], [1.1 * 2.5, 1.1 * 2.5], rtol=1e-15)


# weighted Laplacian ---------------------------------------------------------------------


def test_laplacian_peak():
    g, data = _padded([0, 0, 1, 0, 0], 5, domain=(0.0, 2.5))
    lap = weighted_laplacian(data, g, [1.0])
    np.testing.assert_allclose(lap[0], [0, 4, -8, 4, 0], rtol=1e-15)


def test_laplacian_quadratic_and_linear():
    g = build_grid((0.0, 1.0), 16)
    x = g.centers(0)
    data = pad_interior((x * x)[None], g, BoundaryCondition((OUTFLOW,)))
    lap = weighted_laplacian(data, g, [1.0])
    np.testing.assert_allclose(lap[0, 1:-1], 2.0, rtol=1e-10)
    lin = pad_interior((3.0 * x - 1.0)[None], g, BoundaryCondition((OUTFLOW,)))
    np.testing.assert_allclose(weighted_laplacian(lin, g, [2.0])[0, 1:-1], 0.0, atol=1e-10)
    const = pad_interior(np.full((1, 16), 4.0), g, BoundaryCondition((PERIODIC,)))
    assert np.all(weighted_laplacian(const, g, [3.0]) == 0.0)


def test_laplacian_2d_weights_axes():
    g = build_grid([(0.0, 1.0), (0.0, 1.0)], (8, 4))
    x, y = g.mesh()
    data = pad_interior((x * x + y * y)[None], g, BoundaryCondition.uniform(OUTFLOW, 2))
    lap = weighted_laplacian(data, g, [2.0, 3.0])
    np.testing.assert_allclose(lap[0, 1:-1, 1:-1], 2.0 * 4.0 + 2.0 * 9.0, rtol=1e-9)


# conservation of flux differences -------------------------------------------------------------


@pytest.mark.parametrize("limiter", ["constant", "minmod", "none"])
def test_periodic_flux_differences_sum_to_zero(limiter):
    rng = np.random.default_rng(7)
    g = build_grid([(0.0, 1.0), (0.0, 1.0)], (12, 10))
    m = MhdModel(2).with_cleaning_speed(3.0)
    n = g.n
    q = m.conserved(
        rng.uniform(0.5, 2.0, n), rng.uniform(-1, 1, (3,) + n), rng.uniform(1, 2, n), rng.uniform(-1, 1, (3,) + n),
        rng.uniform(-0.1, 0.1, n),
    )
    data = pad_interior(q, g, BoundaryCondition.uniform(PERIODIC, 2))
    for d in (explicit_divergence(data, g, m, limiter), fast_divergence(data, g, m, 0), fast_divergence(data, g, m, 1)):
        total = np.abs(d).sum(axis=(1, 2))
        assert np.all(np.abs(d.sum(axis=(1, 2))) <= 1e-12 * np.maximum(total, 1.0))
