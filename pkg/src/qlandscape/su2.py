"""Exact 2x2 Hermitian / unitary algebra in Pauli coordinates.

A Hermitian operator is stored as ``M = c0 * I + c . sigma``; a density
matrix with Bloch vector ``r`` therefore has ``c0 = 1/2`` and ``c = r / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonHermitianInput, NonUnitary

STRUCT_TOL = 1e-12
ROUNDTRIP_TOL = 1e-14

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float

    @classmethod
    def of(cls, values) -> "BlochVector":
        arr = np.asarray(values, dtype=float).reshape(3)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite Bloch vector {arr}")
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array()))


@dataclass(frozen=True)
class Hermitian2:
    """``c0 * I + c . sigma``; Hermiticity is structural."""

    c0: float
    c: BlochVector

    def __post_init__(self):
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "c", BlochVector.of(self.c))
        if not np.isfinite(self.c0):
            raise ValueError("non-finite identity coefficient")

    @classmethod
    def from_bloch(cls, trace: float, bloch) -> "Hermitian2":
        """Operator with ``Tr M = trace`` and ``Tr(M sigma) = bloch``."""
        return cls(trace / 2.0, np.asarray(bloch, dtype=float) / 2.0)

    @classmethod
    def density(cls, r) -> "Hermitian2":
        return cls.from_bloch(1.0, r)

    def trace(self) -> float:
        return 2.0 * self.c0

    def bloch(self) -> np.ndarray:
        """``Tr(M sigma)``."""
        return 2.0 * self.c.array()

    def matrix(self) -> np.ndarray:
        return pauli_compose(self)

    def eigvals(self) -> tuple[float, float]:
        m = self.c.norm()
        return self.c0 - m, self.c0 + m

    def shifted(self, c: float) -> "Hermitian2":
        return Hermitian2(self.c0 + c, self.c)


@dataclass(frozen=True, eq=False)
class Unitary2:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=complex).reshape(2, 2)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        if unitarity_error(m) > STRUCT_TOL:
            raise NonUnitary(f"U^dag U deviates from I by {unitarity_error(m):.3e}")

    def __matmul__(self, other: "Unitary2") -> "Unitary2":
        return Unitary2(self.m @ other.m)

    def dag(self) -> "Unitary2":
        return Unitary2(self.m.conj().T)

    def det(self) -> complex:
        return complex(np.linalg.det(self.m))


def unitarity_error(m: np.ndarray) -> float:
    """Max-entry deviation of ``U^dag U`` from the identity (batched over leading axes)."""
    m = np.asarray(m)
    prod = np.conj(np.swapaxes(m, -1, -2)) @ m
    return float(np.max(np.abs(prod - IDENTITY)))


def pauli_decompose(m) -> Hermitian2:
    m = np.asarray(m, dtype=complex).reshape(2, 2)
    dev = np.max(np.abs(m - m.conj().T))
    if dev > STRUCT_TOL:
        raise NonHermitianInput(f"Hermiticity deviation {dev:.3e}")
    c0 = np.trace(m).real / 2.0
    c = np.einsum("kij,ji->k", PAULI, m).real / 2.0
    return Hermitian2(c0, c)


def pauli_compose(h: Hermitian2) -> np.ndarray:
    return h.c0 * IDENTITY + np.einsum("k,kij->ij", h.c.array(), PAULI)


def expi_batch(c0, c, dt) -> np.ndarray:
    """``exp(-i (c0 I + c . sigma) dt)`` for stacks of generators.

    ``c0`` has shape ``(...)``, ``c`` shape ``(..., 3)``; returns ``(..., 2, 2)``.
    """
    c0 = np.asarray(c0, dtype=float)
    c = np.asarray(c, dtype=float)
    dt = np.asarray(dt, dtype=float)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(c0)) and np.all(np.isfinite(dt))):
        raise ValueError("non-finite generator or time step")
    mag = np.linalg.norm(c, axis=-1)
    theta = mag * dt
    # sin(theta)/|c| written through sinc so the |c| = 0 limit is exact
    s = dt * np.sinc(theta / np.pi)
    cos = np.cos(theta)
    phase = np.exp(-1j * c0 * dt)
    nsig = np.einsum("...k,kij->...ij", c, PAULI)
    out = cos[..., None, None] * IDENTITY - 1j * s[..., None, None] * nsig
    return phase[..., None, None] * out


def expi(h: Hermitian2, dt: float) -> Unitary2:
    return Unitary2(expi_batch(h.c0, h.c.array(), dt))


def rotation_matrix(u) -> np.ndarray:
    """SO(3) matrix ``R`` with ``Bloch(U rho U^dag) = R @ Bloch(rho)``; batched."""
    m = u.m if isinstance(u, Unitary2) else np.asarray(u)
    # column j is Bloch(U sigma_j U^dag); R_ij = Tr(sigma_i U sigma_j U^dag) / 2
    udag = np.conj(np.swapaxes(m, -1, -2))
    cols = (m[..., None, :, :] @ PAULI) @ udag[..., None, :, :]
    rot = np.empty(m.shape[:-2] + (3, 3))
    rot[..., 0, :] = cols[..., 0, 1].real + cols[..., 1, 0].real
    rot[..., 1, :] = cols[..., 1, 0].imag - cols[..., 0, 1].imag
    rot[..., 2, :] = cols[..., 0, 0].real - cols[..., 1, 1].real
    return 0.5 * rot


def conjugate_bloch(u, r) -> BlochVector:
    return BlochVector.of(rotation_matrix(u) @ np.asarray(r, dtype=float))


def z_rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
