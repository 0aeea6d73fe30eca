"""Piecewise-constant propagation, objective and gradient for a driven qubit.

The controlled generator is ``H0 + f(t) V`` with ``U_0 = I`` and
``i dU/dt = H U``.  On each interval the control is constant and the
interval propagator is the exact SU(2) exponential, so grid-representable
controls are propagated without solver error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import CommutingSystem, InvalidGrid, InvalidTask, TimeMismatch
from .su2 import (
    STRUCT_TOL,
    BlochVector,
    Hermitian2,
    Unitary2,
    expi_batch,
    rotation_matrix,
)

TIME_RTOL = 1e-12


@dataclass(frozen=True)
class QubitSystem:
    h0: Hermitian2 = field(default_factory=lambda: Hermitian2(0.0, (0.0, 0.0, 1.0)))
    v: Hermitian2 = field(default_factory=lambda: Hermitian2(0.0, (1.0, 0.0, 0.0)))

    def __post_init__(self):
        cross = np.cross(self.h0.c.array(), self.v.c.array())
        if np.linalg.norm(cross) <= STRUCT_TOL:
            raise CommutingSystem("[H0, V] = 0: drift and coupling commute")

    @classmethod
    def eq2(cls, vx: float, vy: float) -> "QubitSystem":
        """``sigma_z + f(t) (vx sigma_x + vy sigma_y)``."""
        return cls(Hermitian2(0.0, (0.0, 0.0, 1.0)), Hermitian2(0.0, (vx, vy, 0.0)))

    @property
    def v_bloch(self) -> np.ndarray:
        """``Tr(V sigma) / 2``: the coupling's Pauli coefficients."""
        return self.v.c.array()

    @property
    def h0_bloch(self) -> np.ndarray:
        """``Tr(H0 sigma)``."""
        return self.h0.bloch()


@dataclass(frozen=True, eq=False)
class ControlGrid:
    """Uniform grid on ``[0, T]`` with one control value per interval."""

    T: float
    f: np.ndarray

    def __post_init__(self):
        f = np.array(self.f, dtype=float).reshape(-1)
        if not (np.isfinite(self.T) and self.T > 0):
            raise InvalidGrid(f"final time must be positive, got {self.T}")
        if f.size < 1:
            raise InvalidGrid("grid needs at least one interval")
        if not np.all(np.isfinite(f)):
            raise InvalidGrid("control values must be finite")
        f.setflags(write=False)
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "f", f)

    @classmethod
    def zeros(cls, T: float, n: int) -> "ControlGrid":
        return cls(T, np.zeros(n))

    @property
    def n(self) -> int:
        return self.f.size

    @property
    def dt(self) -> float:
        return self.T / self.n

    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n + 1)

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dt

    def with_values(self, f) -> "ControlGrid":
        return ControlGrid(self.T, f)

    def reversed(self) -> "ControlGrid":
        """Same control read backwards in time, ``f(T - t)``."""
        return ControlGrid(self.T, self.f[::-1])


@dataclass(frozen=True)
class ControlTask:
    system: QubitSystem
    rho0: Hermitian2
    obs: Hermitian2
    T: float

    def __post_init__(self):
        if abs(self.rho0.c0 - 0.5) > STRUCT_TOL:
            raise InvalidTask(f"rho0 must have unit trace, got {self.rho0.trace()}")
        if self.rho0.c.norm() > 0.5 * (1 + STRUCT_TOL):
            raise InvalidTask("rho0 has eigenvalues outside [0, 1]")
        if not (np.isfinite(self.T) and self.T > 0):
            raise InvalidTask(f"final time must be positive, got {self.T}")

    @classmethod
    def from_bloch(cls, vx, vy, r0, a, tr_a, T) -> "ControlTask":
        return cls(
            QubitSystem.eq2(vx, vy),
            Hermitian2.density(r0),
            Hermitian2.from_bloch(tr_a, a),
            T,
        )

    @property
    def r0(self) -> np.ndarray:
        return self.rho0.bloch()

    @property
    def a(self) -> np.ndarray:
        return self.obs.bloch()

    @property
    def tr_a(self) -> float:
        return self.obs.trace()

    def with_T(self, T: float) -> "ControlTask":
        return ControlTask(self.system, self.rho0, self.obs, T)

    def zero_control(self, n: int) -> ControlGrid:
        return ControlGrid.zeros(self.T, n)


class Propagation(NamedTuple):
    final: Unitary2
    checkpoints: np.ndarray  # (n + 1, 2, 2); checkpoints[k] = U(t_k)


def check_time(task: ControlTask, grid: ControlGrid):
    if abs(grid.T - task.T) > TIME_RTOL * max(1.0, task.T):
        raise TimeMismatch(f"grid T={grid.T} differs from task T={task.T}")


def step_unitaries(system: QubitSystem, grid: ControlGrid) -> np.ndarray:
    c0 = system.h0.c0 + grid.f * system.v.c0
    c = system.h0.c.array() + grid.f[:, None] * system.v.c.array()
    return expi_batch(c0, c, grid.dt)


def prefix_products(steps: np.ndarray) -> np.ndarray:
    """``out[k] = steps[k] @ ... @ steps[0]`` by log2(n) doubling passes."""
    out = np.array(steps, copy=True)
    d = 1
    while d < len(out):
        out[d:] = out[d:] @ out[:-d]
        d *= 2
    return out


def propagate(system: QubitSystem, grid: ControlGrid) -> Propagation:
    cum = prefix_products(step_unitaries(system, grid))
    checkpoints = np.concatenate([np.eye(2, dtype=complex)[None], cum])
    return Propagation(Unitary2(checkpoints[-1]), checkpoints)


def _expectation(task: ControlTask, bloch_final: np.ndarray) -> float:
    return 0.5 * (task.tr_a + float(task.a @ bloch_final))


def objective(task: ControlTask, grid: ControlGrid) -> float:
    """``Tr(U_T rho0 U_T^dag A)``."""
    check_time(task, grid)
    final = propagate(task.system, grid).final
    return _expectation(task, rotation_matrix(final) @ task.r0)


def bloch_trajectory(task: ControlTask, grid: ControlGrid) -> list[BlochVector]:
    return [BlochVector.of(r) for r in bloch_path(task, grid)]


def bloch_path(task: ControlTask, grid: ControlGrid) -> np.ndarray:
    """Bloch vectors of rho(t_k) at all grid nodes as an ``(n + 1, 3)`` array."""
    check_time(task, grid)
    rots = rotation_matrix(propagate(task.system, grid).checkpoints)
    return rots @ task.r0


def _interval_coupling_integral(system: QubitSystem, grid: ControlGrid) -> np.ndarray:
    """Per interval, ``int_0^dt R_k(-s) v ds`` with ``R_k(s)`` the Bloch rotation
    generated by ``H0 + f_k V`` (rate ``2|omega_k|``)."""
    v = system.v_bloch
    omega = system.h0.c.array() + grid.f[:, None] * v
    mag = np.linalg.norm(omega, axis=1)
    safe = np.where(mag > 0, mag, 1.0)
    axis = np.where(mag[:, None] > 0, omega / safe[:, None], 0.0)
    dt = grid.dt
    theta = 2.0 * mag * dt
    v_par = (axis @ v)[:, None] * axis
    v_perp = v - v_par
    sin_term = dt * np.sinc(theta / np.pi)
    # (1 - cos theta) / (2 |omega|), finite at omega = 0
    cos_term = dt * np.sin(theta / 2) * np.sinc(theta / (2 * np.pi))
    return v_par * dt + v_perp * sin_term[:, None] - np.cross(axis, v) * cos_term[:, None]


def objective_and_gradient(task: ControlTask, grid: ControlGrid) -> tuple[float, np.ndarray]:
    """Objective and functional derivative from a single propagation."""
    check_time(task, grid)
    rots = rotation_matrix(propagate(task.system, grid).checkpoints)
    final = rots[-1]
    r = rots[:-1] @ task.r0
    # a~(t_k) = Bloch(U_k U_T^dag A U_T U_k^dag)
    a_back = rots[:-1] @ (final.T @ task.a)
    m = _interval_coupling_integral(task.system, grid)
    g = np.einsum("ki,ki->k", m, np.cross(r, a_back)) / grid.dt
    return _expectation(task, final @ task.r0), g


def gradient(task: ControlTask, grid: ControlGrid) -> np.ndarray:
    """Functional derivative ``dJ/df(t)`` on the grid.

    Entry ``k`` is ``(dJ/df_k) / dt``, the exact derivative of the discretized
    objective divided by the interval length, i.e. the interval average of
    ``(v x r(t)) . a~(t)``.  It equals the midpoint sample to ``O(dt^2)``.
    """
    return objective_and_gradient(task, grid)[1]


def grid_norm(g: np.ndarray, dt: float) -> float:
    """L2 norm of a grid function, ``sqrt(sum g_k^2 dt)``."""
    return float(np.sqrt(np.sum(np.square(g)) * dt))


def global_max_value(task: ControlTask) -> float:
    """Maximum of ``Tr(U rho0 U^dag A)`` over all unitaries."""
    return float(0.5 * (task.tr_a + np.linalg.norm(task.a) * np.linalg.norm(task.r0)))


def global_min_value(task: ControlTask) -> float:
    return float(0.5 * (task.tr_a - np.linalg.norm(task.a) * np.linalg.norm(task.r0)))
