import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlandscape.dynamics import (
    ControlGrid,
    ControlTask,
    QubitSystem,
    bloch_path,
    bloch_trajectory,
    global_max_value,
    global_min_value,
    gradient,
    objective,
    objective_and_gradient,
    propagate,
)
from qlandscape.errors import CommutingSystem, InvalidGrid, InvalidTask, TimeMismatch
from qlandscape.su2 import Hermitian2, expi, rotation_matrix, unitarity_error, z_rotation

SQ = np.sqrt(0.5)


def task(r0, a, T, v=(1, 0), tr_a=1.0):
    return ControlTask.from_bloch(v[0], v[1], r0, a, tr_a, T)


def random_task(rng, T=None):
    r0 = rng.normal(size=3)
    r0 *= rng.uniform(0, 1) / np.linalg.norm(r0)
    phi = rng.uniform(0, 2 * np.pi)
    return task(r0, rng.normal(size=3), rng.uniform(0.2, 4) if T is None else T,
                v=(np.cos(phi), np.sin(phi)), tr_a=rng.normal())


def fd_gradient(t, grid, h=1e-5):
    out = np.empty(grid.n)
    for k in range(grid.n):
        e = np.zeros(grid.n)
        e[k] = h
        jp = objective(t, grid.with_values(grid.f + e))
        jm = objective(t, grid.with_values(grid.f - e))
        out[k] = (jp - jm) / (2 * h * grid.dt)
    return out


def test_commuting_system_rejected():
    with pytest.raises(CommutingSystem):
        QubitSystem(Hermitian2(0, (0, 0, 1)), Hermitian2(0, (0, 0, 2)))


def test_grid_and_task_validation():
    with pytest.raises(InvalidGrid):
        ControlGrid(0.0, [1.0])
    with pytest.raises(InvalidGrid):
        ControlGrid(1.0, [np.nan])
    with pytest.raises(InvalidGrid):
        ControlGrid(1.0, [])
    with pytest.raises(InvalidTask):
        task((1, 1, 0), (1, 0, 0), 1.0)
    with pytest.raises(InvalidTask):
        ControlTask(QubitSystem(), Hermitian2(0.4, (0, 0, 0)), Hermitian2(0, (1, 0, 0)), 1.0)


def test_grid_values_read_only():
    g = ControlGrid.zeros(1.0, 4)
    with pytest.raises(ValueError):
        g.f[0] = 1.0


def test_drift_only_propagation():
    sys = QubitSystem.eq2(1, 0)
    fin = propagate(sys, ControlGrid.zeros(np.pi, 32)).final.m
    assert np.allclose(fin, -np.eye(2), atol=1e-13)
    for T in (0.3, 1.7, 5.2):
        fin = propagate(sys, ControlGrid.zeros(T, 17)).final.m
        assert np.allclose(fin, np.diag([np.exp(-1j * T), np.exp(1j * T)]), atol=1e-13)


@pytest.mark.parametrize("n", [64, 128, 256, 1000])
def test_constant_control_exact(n):
    sys = QubitSystem.eq2(1, 0)
    prop = propagate(sys, ControlGrid(1.0, np.ones(n)))
    ref = expi(Hermitian2(0, (1, 0, 1)), 1.0).m
    assert np.max(np.abs(prop.final.m - ref)) <= 1e-12
    assert np.allclose(prop.checkpoints[0], np.eye(2))
    assert unitarity_error(prop.checkpoints) <= 1e-12


def test_checkpoints_are_ordered_products():
    rng = np.random.default_rng(3)
    sys = QubitSystem.eq2(0.6, -0.8)
    grid = ControlGrid(2.0, rng.normal(size=9))
    u = np.eye(2, dtype=complex)
    cps = propagate(sys, grid).checkpoints
    for k, fk in enumerate(grid.f):
        u = expi(Hermitian2(0, sys.h0.c.array() + fk * sys.v.c.array()), grid.dt).m @ u
        assert np.allclose(cps[k + 1], u, atol=1e-13)


def test_objective_examples():
    x = (1, 0, 0)
    assert np.isclose(objective(task(x, x, 1e-12), ControlGrid.zeros(1e-12, 1)), 1.0)
    assert abs(objective(task(x, x, np.pi / 2), ControlGrid.zeros(np.pi / 2, 8))) < 1e-14
    t = task((0, 1, 0), (SQ, SQ, 0), np.pi / 8)
    assert abs(objective(t, t.zero_control(16)) - 0.5) < 1e-15


def test_time_mismatch():
    t = task((0, 1, 0), (1, 0, 0), 1.0)
    with pytest.raises(TimeMismatch):
        objective(t, ControlGrid.zeros(1.1, 8))
    with pytest.raises(TimeMismatch):
        gradient(t, ControlGrid.zeros(1.1, 8))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_objective_bounds(seed):
    rng = np.random.default_rng(seed)
    t = random_task(rng)
    j = objective(t, ControlGrid(t.T, rng.normal(scale=3, size=20)))
    lo, hi = t.obs.eigvals()
    assert lo - 1e-12 <= j <= hi + 1e-12
    assert global_min_value(t) - 1e-12 <= j <= global_max_value(t) + 1e-12


def test_gradient_vanishes_under_coplanarity():
    rng = np.random.default_rng(4)
    for _ in range(20):
        r0 = np.r_[rng.normal(size=2), 0]
        r0 *= rng.uniform(0, 1) / np.linalg.norm(r0)
        a = np.r_[rng.normal(size=2), 0]
        phi = rng.uniform(0, 2 * np.pi)
        t = task(r0, a, rng.uniform(0.1, 4), v=(np.cos(phi), np.sin(phi)))
        assert np.max(np.abs(gradient(t, t.zero_control(64)))) <= 1e-12


def test_gradient_zero_for_scalar_observable():
    t = task((0.3, 0.2, 0.1), (0, 0, 0), 1.3, tr_a=2.0)
    g = gradient(t, ControlGrid(1.3, np.linspace(-1, 1, 16)))
    assert np.all(g == 0)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        t = random_task(rng)
        grid = ControlGrid(t.T, rng.normal(size=12))
        g = gradient(t, grid)
        fd = fd_gradient(t, grid)
        worst = max(worst, np.max(np.abs(g - fd)) / np.max(np.abs(fd)))
    assert worst <= 1e-6


def test_gradient_split_interval_consistency():
    # splitting every interval in two: the coarse entry is the mean of the halves
    rng = np.random.default_rng(6)
    t = random_task(rng, T=2.0)
    f = rng.normal(size=24)
    g = gradient(t, ControlGrid(t.T, f))
    g_fine = gradient(t, ControlGrid(t.T, np.repeat(f, 2)))
    assert np.allclose(g, 0.5 * (g_fine[0::2] + g_fine[1::2]), atol=1e-12)


def midpoint_sample(t, grid):
    """(v x r(t_mid)) . a~(t_mid) read off the nodes of the grid refined by two."""
    fine = ControlGrid(t.T, np.repeat(grid.f, 2))
    rots = rotation_matrix(propagate(t.system, fine).checkpoints)[1::2]
    final = rotation_matrix(propagate(t.system, fine).final)
    r = rots @ t.r0
    a_t = rots @ (final.T @ t.a)
    return np.einsum("ki,ki->k", np.cross(t.system.v_bloch, r), a_t)


def test_gradient_close_to_midpoint_sample():
    rng = np.random.default_rng(9)
    t = random_task(rng, T=2.0)
    errs = []
    for n in (32, 64, 128):
        grid = ControlGrid(t.T, 0.3 + np.zeros(n))
        errs.append(np.max(np.abs(gradient(t, grid) - midpoint_sample(t, grid))))
    assert errs[0] < 1e-2
    assert errs[1] / errs[0] < 0.3 and errs[2] / errs[1] < 0.3  # O(dt^2)


def test_objective_and_gradient_consistent():
    rng = np.random.default_rng(7)
    t = random_task(rng)
    grid = ControlGrid(t.T, rng.normal(size=30))
    j, g = objective_and_gradient(t, grid)
    assert j == pytest.approx(objective(t, grid), abs=1e-15)
    assert np.allclose(g, gradient(t, grid))


def test_trajectory_drift_closed_form():
    t = task((1, 0, 0), (1, 0, 0), 2.5)
    grid = t.zero_control(50)
    path = bloch_path(t, grid)
    tk = grid.nodes()
    assert np.allclose(path, np.c_[np.cos(2 * tk), np.sin(2 * tk), 0 * tk], atol=1e-13)
    traj = bloch_trajectory(t, grid)
    assert len(traj) == 51 and np.allclose(traj[-1], path[-1])


def test_trajectory_mixed_state_fixed():
    t = task((0, 0, 0), (1, 0, 0), 2.0)
    assert np.all(bloch_path(t, ControlGrid(2.0, np.ones(10))) == 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_trajectory_norm_conserved(seed):
    rng = np.random.default_rng(seed)
    t = random_task(rng)
    path = bloch_path(t, ControlGrid(t.T, rng.normal(scale=2, size=40)))
    assert np.max(np.abs(np.linalg.norm(path, axis=1) - np.linalg.norm(t.r0))) <= 1e-12


def test_refinement_exact_for_piecewise_constant():
    rng = np.random.default_rng(8)
    t = random_task(rng)
    f = rng.normal(size=16)
    j1 = objective(t, ControlGrid(t.T, f))
    j2 = objective(t, ControlGrid(t.T, np.repeat(f, 2)))
    assert abs(j1 - j2) <= 1e-13


def test_refinement_first_order_for_smooth_control():
    t = task((0, 1, 0), (SQ, SQ, 0), 2.0)

    def sampled(n):
        mid = (np.arange(n) + 0.5) * t.T / n
        return objective(t, ControlGrid(t.T, np.sin(3 * mid) + 0.5))

    ref = sampled(4096)
    e1, e2 = abs(sampled(32) - ref), abs(sampled(64) - ref)
    # midpoint sampling is at worst O(dt); the error must at least halve
    assert e2 < 0.6 * e1


def test_drift_rotation_matches_z_rotation():
    t = task((0.2, 0.5, 0.3), (1, 0, 0), 0.9)
    assert np.allclose(bloch_path(t, t.zero_control(9))[-1], z_rotation(1.8) @ t.r0, atol=1e-14)
