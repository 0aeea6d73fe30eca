"""Hessian kernel of the objective at the zero control and critical-point classification.

Kernel frame
------------
The closed-form kernel is written for vectors in a reference frame that is
the mirror image (``y -> -y``) of the Bloch frame used by
:mod:`qlandscape.dynamics`, with kernel time running backwards from the
final time (``tau = T - t``).  In that frame the drift precesses clockwise,
and the kernel below reproduces the true second variation exactly:

    d^2/dh^2 J[h g]  =  8 * quadratic_form(spec, g reversed in time)

:func:`build_kernel_spec` performs the frame change; everything else in
this module works purely on :class:`HessianKernelSpec` data.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import (
    ControlGrid,
    ControlTask,
    global_max_value,
    global_min_value,
    gradient,
    grid_norm,
    objective,
)
from .errors import (
    BumpOutOfWindow,
    EpsNotOnGrid,
    NotCoplanar,
    OutOfDomain,
    TimeMismatch,
    UnsupportedSystem,
    ZeroInPlaneVector,
)
from .linalg import jacobi_eigvalsh
from .su2 import BlochVector, conjugate_bloch, expi

COPLANAR_TOL = 1e-10
MIRROR = np.array([1.0, -1.0, 1.0])
# d^2 J / dh^2 along a direction equals this multiple of the kernel quadratic form
SECOND_VARIATION_FACTOR = 8.0
LAMBDA_GRID_POINTS = 1000

VERDICTS = (
    "saddle",
    "trap_candidate_max",
    "trap_candidate_min",
    "global_max",
    "global_min",
    "not_critical",
    "objective_constant",
)


@dataclass(frozen=True)
class HessianKernelSpec:
    T: float
    v2: float
    phi: float
    r: BlochVector
    a: BlochVector
    phi1: float
    phi2: float
    r_mag: float
    a_mag: float

    @classmethod
    def from_vectors(cls, T, v, r, a) -> "HessianKernelSpec":
        """Assemble kernel data from in-plane vectors already in the kernel frame."""
        v, r, a = (np.asarray(x, dtype=float) for x in (v, r, a))
        if abs(r[2]) > COPLANAR_TOL or abs(a[2]) > COPLANAR_TOL:
            raise NotCoplanar("kernel vectors must lie in the xy-plane")
        return cls(
            T=float(T),
            v2=float(v @ v),
            phi=float(np.arctan2(v[1], v[0])),
            r=BlochVector.of(r),
            a=BlochVector.of(a),
            phi1=float(np.arctan2(r[1], r[0])),
            phi2=float(np.arctan2(a[1], a[0])),
            r_mag=float(np.hypot(r[0], r[1])),
            a_mag=float(np.hypot(a[0], a[1])),
        )

    def scale(self) -> float:
        return self.v2 / 4.0 * self.r_mag * self.a_mag * self.T

    def eig_tol(self) -> float:
        return 1e-8 * self.scale()


def _require_eq2(task: ControlTask):
    h = task.system.h0.c.array()
    v = task.system.v.c.array()
    if not (np.allclose(h, (0.0, 0.0, 1.0), atol=1e-12) and abs(v[2]) <= 1e-12):
        raise UnsupportedSystem("kernel requires drift sigma_z and coupling in the xy-plane")


def is_coplanar(task: ControlTask, tol: float = COPLANAR_TOL) -> bool:
    h0 = task.system.h0_bloch
    h0 = h0 / np.linalg.norm(h0)
    return all(abs(x @ h0) <= tol for x in (task.r0, task.a, task.system.v_bloch))


def drift_final_bloch(task: ControlTask) -> np.ndarray:
    """Bloch vector of rho0 after drift-only evolution to ``T``."""
    u = expi(task.system.h0, task.T)
    return np.asarray(conjugate_bloch(u, task.r0))


def build_kernel_spec(task: ControlTask) -> HessianKernelSpec:
    _require_eq2(task)
    if not is_coplanar(task):
        raise NotCoplanar("r0, a and v must all be orthogonal to h0")
    r = drift_final_bloch(task)
    spec = HessianKernelSpec.from_vectors(
        task.T,
        MIRROR * task.system.v_bloch,
        MIRROR * r,
        MIRROR * task.a,
    )
    if spec.r_mag == 0 or spec.a_mag == 0:
        raise ZeroInPlaneVector("in-plane state or observable vector vanishes; angles undefined")
    return spec


def rt_profile(t, phi):
    t = np.asarray(t, dtype=float)
    out = np.stack([np.sin(2 * t - phi), np.cos(2 * t - phi), np.zeros_like(t)], axis=-1)
    return out


def _projections(spec: HessianKernelSpec, t):
    prof = rt_profile(t, spec.phi)
    return prof @ spec.r.array(), prof @ spec.a.array()


def _check_domain(spec: HessianKernelSpec, *times):
    slack = 1e-12 * max(1.0, spec.T)
    for t in times:
        t = np.asarray(t)
        if np.any(t < -slack) or np.any(t > spec.T + slack):
            raise OutOfDomain(f"time outside [0, {spec.T}]")


def kernel_eval(spec: HessianKernelSpec, t2, t1):
    """``-(v^2/4) (r . r_max(t1,t2)) (a . r_min(t1,t2))``."""
    _check_domain(spec, t2, t1)
    hi = np.maximum(t2, t1)
    lo = np.minimum(t2, t1)
    r_hi, _ = _projections(spec, hi)
    _, a_lo = _projections(spec, lo)
    return -spec.v2 / 4.0 * r_hi * a_lo


def eq5_closed(phi, phi1, phi2, r_mag, a_mag, lam):
    """Closed trigonometric form of ``(r . r_lam)(a . r_lam)``; broadcasts over all arguments."""
    return 0.5 * r_mag * a_mag * (np.cos(phi1 - phi2) - np.cos(4 * lam - 2 * phi + phi1 + phi2))


def eq5_dot(phi, r, a, lam):
    """``(r . r_lam)(a . r_lam)`` from explicit dot products; ``r``, ``a`` have shape ``(..., 3)``."""
    prof = rt_profile(lam, phi)
    return np.sum(prof * r, axis=-1) * np.sum(prof * a, axis=-1)


def eq5_product(spec: HessianKernelSpec, lam):
    """``(r . r_lam)(a . r_lam)`` through its closed trigonometric form."""
    _check_domain(spec, lam)
    lam = np.asarray(lam, dtype=float)
    return eq5_closed(spec.phi, spec.phi1, spec.phi2, spec.r_mag, spec.a_mag, lam)


def eq5_direct(spec: HessianKernelSpec, lam):
    _check_domain(spec, lam)
    return eq5_dot(spec.phi, spec.r.array(), spec.a.array(), lam)


def bump_grid(T: float, n: int) -> ControlGrid:
    """Zero control on ``100 * ceil(n / 100)`` intervals, so ``T/100`` is grid-aligned."""
    return ControlGrid.zeros(T, 100 * max(1, int(np.ceil(n / 100))))


def default_eps(grid: ControlGrid) -> float:
    """``max(dt, T/100)`` rounded up to a whole number of intervals."""
    k = max(1, int(np.ceil(grid.n / 100 - 1e-9)))
    return k * grid.dt


def bump_control(lam: float, eps: float, grid: ControlGrid) -> ControlGrid:
    dt = grid.dt
    width = eps / dt
    k = int(round(width))
    if k < 1 or abs(width - k) > 1e-9 * max(1.0, width):
        raise EpsNotOnGrid(f"eps={eps} is not a positive multiple of dt={dt}")
    if not (eps < grid.T and eps / 2 < lam < grid.T - eps / 2):
        raise BumpOutOfWindow(f"lambda={lam} outside ({eps / 2}, {grid.T - eps / 2})")
    # k consecutive intervals whose union is closest to being centred on lam
    start = int(round(lam / dt - k / 2))
    start = min(max(start, 0), grid.n - k)
    f = np.zeros(grid.n)
    f[start:start + k] = 1.0 / (k * dt)
    return grid.with_values(f)


def trapezoid_weights(n: int, T: float) -> np.ndarray:
    w = np.full(n + 1, T / n)
    w[[0, -1]] *= 0.5
    return w


def kernel_matrix(spec: HessianKernelSpec, t: np.ndarray) -> np.ndarray:
    r_p, a_p = _projections(spec, t)
    i = np.arange(len(t))
    hi = np.maximum.outer(i, i)
    lo = np.minimum.outer(i, i)
    return -spec.v2 / 4.0 * r_p[hi] * a_p[lo]


def quadratic_form(spec: HessianKernelSpec, f: ControlGrid) -> float:
    """``int int K(t2, t1) f(t1) f(t2) dt1 dt2`` for a piecewise-constant ``f``.

    Integrated exactly: with ``r . r_t = |r| sin(2t + al)`` and
    ``a . r_t = |a| sin(2t + be)`` every interval-pair integral has a closed form.
    """
    if abs(f.T - spec.T) > 1e-12 * max(1.0, spec.T):
        raise TimeMismatch(f"control T={f.T} differs from kernel T={spec.T}")
    if not np.any(f.f):
        return 0.0
    al = spec.phi1 - spec.phi
    be = spec.phi2 - spec.phi
    h = f.dt
    s = np.arange(f.n) * h
    # interval integrals of sin(2t + c)
    P = spec.r_mag * 0.5 * (np.cos(2 * s + al) - np.cos(2 * (s + h) + al))
    Q = spec.a_mag * 0.5 * (np.cos(2 * s + be) - np.cos(2 * (s + h) + be))
    fq = f.f * Q
    below = np.cumsum(fq) - fq
    strict = np.sum(f.f * P * below)
    # int_s^{s+h} p(t2) int_s^{t2} q(t1) dt1 dt2
    first = np.cos(2 * s + be) * 0.5 * (np.cos(2 * s + al) - np.cos(2 * (s + h) + al))
    second = 0.5 * ((np.cos(4 * s + al + be) - np.cos(4 * (s + h) + al + be)) / 4 + h * np.sin(al - be))
    tri = 0.5 * spec.r_mag * spec.a_mag * (first - second)
    diag = np.sum(f.f**2 * tri)
    return float(-spec.v2 / 4.0 * 2 * (strict + diag))


def nystrom_matrix(spec: HessianKernelSpec, n: int) -> np.ndarray:
    t = np.linspace(0.0, spec.T, n + 1)
    sw = np.sqrt(trapezoid_weights(n, spec.T))
    return sw[:, None] * kernel_matrix(spec, t) * sw[None, :]


def hessian_spectrum(spec: HessianKernelSpec, n: int, method: str = "lapack") -> np.ndarray:
    """Sorted eigenvalues of the trapezoidal Nystrom discretization on ``n`` intervals."""
    if n < 8:
        raise ValueError("Nystrom grid needs n >= 8")
    m = nystrom_matrix(spec, n)
    if method == "lapack":
        return np.linalg.eigvalsh(m)
    if method == "jacobi":
        return jacobi_eigvalsh(m)
    raise ValueError(f"unknown eigenvalue method {method!r}")


def lambda_candidates(spec: HessianKernelSpec, lo: float, hi: float) -> np.ndarray:
    """Uniform search grid on ``[lo, hi]`` plus the stationary points of the
    closed-form product inside it."""
    grid = np.linspace(lo, hi, LAMBDA_GRID_POINTS)
    psi = -2 * spec.phi + spec.phi1 + spec.phi2
    k = np.arange(np.floor((4 * lo + psi) / np.pi) - 1, np.ceil((4 * hi + psi) / np.pi) + 2)
    stationary = (k * np.pi - psi) / 4
    stationary = stationary[(stationary >= lo) & (stationary <= hi)]
    return np.concatenate([grid, stationary])


def find_opposite_bumps(spec: HessianKernelSpec, eps: float) -> tuple[Optional[float], Optional[float]]:
    """Bump centres where the product is negative (``lambda1``) and positive (``lambda2``).

    The search covers ``[0, min(T, pi/2)]`` trimmed to the bump admissibility
    window; among candidates of the right sign the largest magnitude wins.
    """
    margin = 1e-9 * spec.T
    lo = eps / 2 + margin
    # one full period of the product (pi/2 in lambda) when the window allows it
    hi = min(np.pi / 2 + eps / 2, spec.T - eps / 2 - margin)
    if hi <= lo:
        return None, None
    lam = lambda_candidates(spec, lo, hi)
    prod = eq5_product(spec, lam)
    thresh = 1e-12 * spec.r_mag * spec.a_mag
    lam1 = lam2 = None
    if np.any(prod < -thresh):
        lam1 = float(lam[np.argmin(prod)])
    if np.any(prod > thresh):
        lam2 = float(lam[np.argmax(prod)])
    return lam1, lam2


@dataclass
class CriticalPointReport:
    verdict: str
    grad_norm: float
    J0: float
    J_global: float
    min_eig: Optional[float] = None
    max_eig: Optional[float] = None
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    form1: Optional[float] = None
    form2: Optional[float] = None
    eps: Optional[float] = None
    certificate: Optional[str] = None
    eig_tol: Optional[float] = None
    spectrum: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "verdict", "grad_norm", "min_eig", "max_eig", "lambda1", "lambda2",
            "J0", "J_global", "form1", "form2", "eps", "certificate", "eig_tol",
        )}
        return {k: (float(v) if isinstance(v, (np.floating,)) else v) for k, v in out.items()}


def _parallel_sign(task: ControlTask, r_final: np.ndarray, tol: float) -> int:
    """+1 / -1 if the evolved state is parallel / antiparallel to the observable."""
    a = task.a
    na, nr = np.linalg.norm(a), np.linalg.norm(r_final)
    cos = float(a @ r_final) / (na * nr)
    if cos >= 1 - tol:
        return 1
    if cos <= -1 + tol:
        return -1
    return 0


def classify_critical_point(task: ControlTask, n: int = 256, tol: float = 1e-10,
                            eps: Optional[float] = None, method: str = "lapack") -> CriticalPointReport:
    """Classify the zero control as saddle, trap candidate, global extremum, or not critical."""
    grid = task.zero_control(n)
    g = gradient(task, grid)
    gnorm = grid_norm(g, grid.dt)
    J0 = objective(task, grid)
    Jg = global_max_value(task)
    report = CriticalPointReport("not_critical", gnorm, J0, Jg)
    if np.linalg.norm(task.a) <= tol or np.linalg.norm(task.r0) <= tol:
        report.verdict = "objective_constant"
        return report
    if gnorm > tol:
        return report

    r_final = drift_final_bloch(task)
    branch = _parallel_sign(task, r_final, tol)
    if branch:
        report.verdict = "global_max" if branch > 0 else "global_min"
        report.J0 = float(0.5 * (task.tr_a + branch * np.linalg.norm(task.a) * np.linalg.norm(r_final)))
        return report
    try:
        spec = build_kernel_spec(task)
    except NotCoplanar:
        return report
    except ZeroInPlaneVector:
        report.verdict = "objective_constant"
        return report

    spec_tol = spec.eig_tol()
    eig = hessian_spectrum(spec, n, method=method)
    report.spectrum = eig
    report.min_eig, report.max_eig = float(eig[0]), float(eig[-1])
    report.eig_tol = spec_tol

    bgrid = bump_grid(task.T, n)
    eps = default_eps(bgrid) if eps is None else eps
    report.eps = eps
    lam1, lam2 = find_opposite_bumps(spec, eps)
    indefinite = report.min_eig < -spec_tol and report.max_eig > spec_tol
    if lam1 is not None and lam2 is not None:
        report.lambda1, report.lambda2 = lam1, lam2
        report.form1 = quadratic_form(spec, bump_control(lam1, eps, bgrid))
        report.form2 = quadratic_form(spec, bump_control(lam2, eps, bgrid))
    if indefinite:
        report.verdict = "saddle"
        bumps_ok = report.form1 is not None and report.form1 > 0 > report.form2
        report.certificate = "bump" if bumps_ok else "spectrum"
    elif report.max_eig <= spec_tol:
        report.verdict = "trap_candidate_max"
    else:
        report.verdict = "trap_candidate_min"
    return report
