"""Gradient ascent on the control grid and seeded multistart surveys."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import (
    ControlGrid,
    ControlTask,
    check_time,
    global_max_value,
    grid_norm,
    objective_and_gradient,
)

STEP_FLOOR = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 5000
    grad_tol: float = 1e-7
    init_step: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    restarts: int = 20
    seed: int = 0
    init_amplitude: float = 2.0
    # None means max(1e-6, 1e-3 * |J_global|)
    global_threshold: Optional[float] = None

    def __post_init__(self):
        for name in ("max_iters", "grad_tol", "init_step", "restarts", "init_amplitude"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("backtrack_factor", "armijo_c"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.global_threshold is not None and self.global_threshold < 0:
            raise ValueError("global_threshold must be non-negative")

    def threshold(self, J_global: float) -> float:
        if self.global_threshold is not None:
            return self.global_threshold
        return max(1e-6, 1e-3 * abs(J_global))


@dataclass
class RunReport:
    J_final: float
    J_trace: list[float]
    grad_norm_final: float
    iterations: int
    converged: bool
    classified_as: str
    control_final: ControlGrid = field(repr=False)
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "J_final": self.J_final,
            "grad_norm_final": self.grad_norm_final,
            "iterations": self.iterations,
            "converged": self.converged,
            "classified_as": self.classified_as,
        }


@dataclass
class Survey:
    runs: list[RunReport]
    fraction_global: float
    best_J: float
    worst_converged_J: Optional[float]
    J_global: float

    def to_dict(self) -> dict:
        return {
            "fraction_global": self.fraction_global,
            "best_J": self.best_J,
            "worst_converged_J": self.worst_converged_J,
            "J_global": self.J_global,
            "seeds": [r.seed for r in self.runs],
            "J_final": [r.J_final for r in self.runs],
            "runs": [r.to_dict() for r in self.runs],
        }


def gradient_ascent(task: ControlTask, init: ControlGrid, cfg: OptimizerConfig) -> RunReport:
    """Steepest ascent ``f <- f + step * g`` with Armijo backtracking.

    The ascent direction is the sampled functional derivative, so the
    directional derivative along it is ``||g||^2`` in the grid L2 product.
    After an accepted step the trial step is enlarged by ``1/backtrack_factor``.
    """
    check_time(task, init)
    dt = init.dt
    f = np.array(init.f)
    J, g = objective_and_gradient(task, init)
    trace = [J]
    step = cfg.init_step
    converged = stalled = False
    it = 0
    gnorm = grid_norm(g, dt)
    while it < cfg.max_iters:
        if gnorm <= cfg.grad_tol:
            converged = True
            break
        slope = gnorm**2
        while True:
            trial = init.with_values(f + step * g)
            J_new, g_new = objective_and_gradient(task, trial)
            if J_new >= J + cfg.armijo_c * step * slope:
                break
            step *= cfg.backtrack_factor
            if step < STEP_FLOOR:
                stalled = True
                break
        if stalled:
            break
        f, J, g = np.array(trial.f), J_new, g_new
        gnorm = grid_norm(g, dt)
        trace.append(J)
        step /= cfg.backtrack_factor
        it += 1
    else:
        converged = gnorm <= cfg.grad_tol

    J_global = global_max_value(task)
    if J >= J_global - cfg.threshold(J_global):
        label = "global"
    elif converged:
        label = "trap"
    else:
        label = "undecided"
    return RunReport(J, trace, gnorm, it, converged, label, init.with_values(f))


def random_control(T: float, n: int, amplitude: float, seed: int) -> ControlGrid:
    """I.i.d. uniform values on ``[-amplitude, amplitude]`` from a Philox stream keyed by ``seed``."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    return ControlGrid(T, rng.uniform(-amplitude, amplitude, size=n))


def worker_count() -> int:
    """Parallelism cap from ``QLANDSCAPE_THREADS`` (0 = all cores, unset = serial)."""
    raw = os.environ.get("QLANDSCAPE_THREADS", "1").strip() or "1"
    k = int(raw)
    if k < 0:
        raise ValueError("QLANDSCAPE_THREADS must be >= 0")
    return k if k > 0 else (os.cpu_count() or 1)


def _run_seed(args) -> RunReport:
    task, cfg, n, seed = args
    rep = gradient_ascent(task, random_control(task.T, n, cfg.init_amplitude, seed), cfg)
    rep.seed = seed
    return rep


def multistart(task: ControlTask, cfg: OptimizerConfig, n: int) -> Survey:
    jobs = [(task, cfg, n, cfg.seed + i) for i in range(cfg.restarts)]
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            runs = list(pool.map(_run_seed, jobs))
    else:
        runs = [_run_seed(j) for j in jobs]
    runs.sort(key=lambda r: r.seed)
    return summarize(task, runs)


def summarize(task: ControlTask, runs: list[RunReport]) -> Survey:
    finals = [r.J_final for r in runs]
    converged = [r.J_final for r in runs if r.converged]
    n_global = sum(r.classified_as == "global" for r in runs)
    return Survey(
        runs=runs,
        fraction_global=n_global / len(runs),
        best_J=max(finals),
        worst_converged_J=min(converged) if converged else None,
        J_global=global_max_value(task),
    )
