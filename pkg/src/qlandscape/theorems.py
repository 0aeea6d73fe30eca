"""Hypothesis and conclusion checkers for the three landscape theorems.

* T1: threshold time ``T0`` above which every maximum is global.
* T2: sufficient conditions for the zero control to be a trap at short times.
* T3: for ``T > pi/2`` the zero control is never a trap (saddle certificate).

Strict inequalities are open conditions, so a comparison that falls inside
a relative margin of ``1e-10`` is reported as inconclusive (``None``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import ControlTask
from .errors import DegenerateDrift, NonTracelessV, TimeTooShort, ZeroCoupling
from .landscape import MIRROR, COPLANAR_TOL, classify_critical_point
from .su2 import Hermitian2

STRICT_MARGIN = 1e-10
NOT_A_TRAP = {"saddle", "global_max", "global_min", "not_critical", "objective_constant"}


@dataclass
class Hypothesis:
    name: str
    value: float
    holds: Optional[bool]


@dataclass
class TheoremReport:
    theorem_id: str
    hypotheses: list[Hypothesis]
    conclusion: str
    numbers: dict = field(default_factory=dict)
    verdict: Optional[str] = None

    @property
    def holds(self) -> bool:
        return all(h.holds is True for h in self.hypotheses)

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "hypotheses": [
                {"name": h.name, "value": float(h.value), "holds": h.holds} for h in self.hypotheses
            ],
            "holds": self.holds,
            "conclusion": self.conclusion,
            "numbers": {k: (None if v is None else float(v)) for k, v in self.numbers.items()},
            "verdict": self.verdict,
        }


def strictly_greater(lhs: float, rhs: float, scale: float) -> Optional[bool]:
    """``lhs > rhs``, or None when the two sides agree to ``1e-10 * scale``."""
    margin = STRICT_MARGIN * scale
    if lhs - rhs > margin:
        return True
    if rhs - lhs > margin:
        return False
    return None


def theorem1_threshold(h0: Hermitian2, v: Hermitian2) -> tuple[float, float]:
    """``(f0, T0)`` with ``f0 = -Tr(H0 V)/Tr(V^2)`` and
    ``T0 = pi / ||H0 - Tr(H0)/2 + f0 V||`` (spectral norm)."""
    if abs(v.trace()) > 1e-12:
        raise NonTracelessV(f"Tr V = {v.trace()}")
    vc = v.c.array()
    vv = float(vc @ vc)
    if vv == 0:
        raise ZeroCoupling("coupling V vanishes")
    hc = h0.c.array()
    # Tr(H0 V) = 2 h.v and Tr(V^2) = 2 |v|^2 for traceless V
    f0 = -float(hc @ vc) / vv + 0.0  # no signed zero
    norm = float(np.linalg.norm(hc + f0 * vc))
    if norm == 0:
        raise DegenerateDrift("shifted generator vanishes; T0 is unbounded")
    return f0, np.pi / norm


def theorem1_report(task: ControlTask) -> TheoremReport:
    sys = task.system
    try:
        f0, T0 = theorem1_threshold(sys.h0, sys.v)
    except NonTracelessV:
        traceless = Hypothesis("trace_V_zero", sys.v.trace(), False)
        return TheoremReport("T1", [traceless], "theorem inapplicable: V is not traceless")
    except DegenerateDrift:
        return TheoremReport(
            "T1", [Hypothesis("trace_V_zero", 0.0, True), Hypothesis("T_ge_T0", task.T, False)],
            "T0 unbounded: theorem gives no threshold", {"f0": None, "T0": None})
    hyps = [
        Hypothesis("trace_V_zero", sys.v.trace(), True),
        Hypothesis("T_ge_T0", task.T - T0, bool(task.T >= T0)),
    ]
    if all(h.holds for h in hyps):
        conclusion = "all maxima of the objective are global"
    else:
        conclusion = "T < T0: theorem inapplicable at this T"
    return TheoremReport("T1", hyps, conclusion, {"f0": f0, "T0": T0, "T": task.T})


def theorem2_conditions(r0, a, v, h0, T: float) -> TheoremReport:
    """Evaluate the short-time trap hypotheses for vectors given in the kernel frame.

    ``cond1``: ``[(v x r0)_z cos 2T + (v . r0) sin 2T] (v x a)_z > 0``
    ``cond2``: ``(r0 x a)_z cos 2T < (r0 . a) sin 2T``
    plus coplanarity of ``r0, a, v`` in the plane orthogonal to ``h0``.
    """
    r0, a, v, h0 = (np.asarray(x, dtype=float) for x in (r0, a, v, h0))
    c, s = np.cos(2 * T), np.sin(2 * T)
    ez = h0 / np.linalg.norm(h0)
    cross_z = lambda x, y: float(np.cross(x, y) @ ez)  # noqa: E731
    first = cross_z(v, r0) * c + float(v @ r0) * s
    cond1 = first * cross_z(v, a)
    cond2_lhs = cross_z(r0, a) * c
    cond2_rhs = float(r0 @ a) * s
    off_plane = max(abs(float(x @ ez)) for x in (r0, a, v))
    nv, nr, na = (float(np.linalg.norm(x)) for x in (v, r0, a))
    hyps = [
        Hypothesis("cond1", cond1, strictly_greater(cond1, 0.0, nv * nr * nv * na)),
        Hypothesis("cond2", cond2_rhs - cond2_lhs, strictly_greater(cond2_rhs, cond2_lhs, nr * na)),
        Hypothesis("coplanar", off_plane, off_plane <= COPLANAR_TOL),
    ]
    if all(h.holds is True for h in hyps):
        conclusion = "trap hypotheses hold at this T"
    elif any(h.holds is None for h in hyps):
        conclusion = "boundary: inconclusive"
    else:
        conclusion = "trap hypotheses fail at this T"
    numbers = {"cond1_lhs": cond1, "cond2_lhs": cond2_lhs, "cond2_rhs": cond2_rhs, "T": T}
    return TheoremReport("T2", hyps, conclusion, numbers)


def theorem2_report(task: ControlTask) -> TheoremReport:
    """Theorem 2 hypotheses for a task, after mapping its vectors into the kernel frame."""
    sys = task.system
    return theorem2_conditions(
        MIRROR * task.r0, MIRROR * task.a, MIRROR * sys.v_bloch, MIRROR * sys.h0_bloch, task.T)


def theorem3_certificate(task: ControlTask, n: int = 256, tol: float = 1e-10) -> TheoremReport:
    if task.T <= np.pi / 2:
        raise TimeTooShort(f"T={task.T} <= pi/2")
    rep = classify_critical_point(task, n=n, tol=tol)
    not_trap = rep.verdict in NOT_A_TRAP
    hyps = [
        Hypothesis("T_gt_half_pi", task.T - np.pi / 2, True),
        Hypothesis("zero_control_not_trap", 0.0 if not_trap else 1.0, not_trap),
    ]
    if not_trap:
        conclusion = f"f=0 is not a trap: {rep.verdict}"
    else:
        conclusion = f"VIOLATION: classified {rep.verdict} above pi/2"
    numbers = {
        "lambda1": rep.lambda1, "lambda2": rep.lambda2,
        "form1": rep.form1, "form2": rep.form2,
        "min_eig": rep.min_eig, "max_eig": rep.max_eig,
        "J0": rep.J0, "J_global": rep.J_global,
    }
    return TheoremReport("T3", hyps, conclusion, numbers, verdict=rep.verdict)


def theorem3_report(task: ControlTask, n: int = 256, tol: float = 1e-10) -> TheoremReport:
    try:
        return theorem3_certificate(task, n, tol)
    except TimeTooShort:
        hyp = Hypothesis("T_gt_half_pi", task.T - np.pi / 2, False)
        return TheoremReport("T3", [hyp], "TimeTooShort: theorem inapplicable", {"T": task.T})


def check_all(task: ControlTask, n: int = 256, tol: float = 1e-10) -> list[TheoremReport]:
    return [theorem1_report(task), theorem2_report(task), theorem3_report(task, n, tol)]
