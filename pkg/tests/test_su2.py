import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qlandscape.errors import NonHermitianInput, NonUnitary
from qlandscape.su2 import (
    IDENTITY,
    PAULI,
    SIGMA_X,
    SIGMA_Z,
    Hermitian2,
    Unitary2,
    conjugate_bloch,
    expi,
    pauli_compose,
    pauli_decompose,
    rotation_matrix,
    unitarity_error,
    z_rotation,
)

finite = st.floats(-5, 5, allow_nan=False)
vec3 = st.tuples(finite, finite, finite)


def random_unitary(rng):
    h = Hermitian2(rng.normal(), rng.normal(size=3))
    return expm(-1j * h.matrix() * rng.uniform(0, 3))


def dense_bloch(u, r):
    """Oracle: conjugate the dense density matrix and read off Pauli coefficients."""
    rho = 0.5 * (IDENTITY + np.einsum("k,kij->ij", r, PAULI))
    out = u @ rho @ u.conj().T
    return np.array([np.trace(out @ s).real for s in PAULI])


def test_decompose_basis_elements():
    h = pauli_decompose(SIGMA_Z)
    assert h.c0 == 0 and tuple(h.c) == (0, 0, 1)
    h = pauli_decompose(IDENTITY)
    assert h.c0 == 1 and tuple(h.c) == (0, 0, 0)
    h = pauli_decompose((IDENTITY + SIGMA_X) / 2)
    assert h.c0 == 0.5 and tuple(h.c) == (0.5, 0, 0)


def test_decompose_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        pauli_decompose([[0, 1], [0, 0]])


def test_trace_identities():
    h = Hermitian2(0.3, (1.0, -2.0, 0.5))
    m = h.matrix()
    assert np.isclose(np.trace(m).real, 2 * h.c0)
    assert np.allclose([np.trace(m @ s).real for s in PAULI], 2 * h.c.array())
    lo, hi = h.eigvals()
    assert np.allclose(np.linalg.eigvalsh(m), [lo, hi])


@settings(max_examples=200)
@given(finite, vec3)
def test_roundtrip(c0, c):
    m = pauli_compose(Hermitian2(c0, c))
    assert np.max(np.abs(pauli_compose(pauli_decompose(m)) - m)) <= 1e-14 * max(1, np.abs(m).max())


def test_expi_examples():
    z = Hermitian2(0, (0, 0, 1))
    assert np.allclose(expi(z, np.pi).m, -IDENTITY, atol=1e-15)
    assert np.array_equal(expi(z, 0.0).m, IDENTITY)
    x = Hermitian2(0, (1, 0, 0))
    assert np.allclose(expi(x, np.pi / 2).m, -1j * SIGMA_X, atol=1e-15)


def test_expi_zero_vector_is_phase():
    u = expi(Hermitian2(0.7, (0, 0, 0)), 2.0)
    assert np.allclose(u.m, np.exp(-1.4j) * IDENTITY, atol=1e-15)


@settings(max_examples=100)
@given(finite, vec3, st.floats(-3, 3))
def test_expi_matches_expm(c0, c, dt):
    h = Hermitian2(c0, c)
    assert np.allclose(expi(h, dt).m, expm(-1j * h.matrix() * dt), atol=1e-12)


@settings(max_examples=100)
@given(vec3, st.floats(-2, 2), st.floats(-2, 2))
def test_expi_semigroup(c, t1, t2):
    h = Hermitian2(0.0, c)
    lhs = (expi(h, t1) @ expi(h, t2)).m
    assert np.allclose(lhs, expi(h, t1 + t2).m, atol=1e-12)


def test_unitary_validation():
    with pytest.raises(NonUnitary):
        Unitary2(2 * IDENTITY)
    u = Unitary2(SIGMA_X)
    assert abs(abs(u.det()) - 1) < 1e-12
    assert np.allclose((u @ u.dag()).m, IDENTITY)


def test_conjugate_bloch_examples():
    assert np.allclose(conjugate_bloch(Unitary2(IDENTITY), (0.3, -0.2, 0.1)), (0.3, -0.2, 0.1))
    z = Hermitian2(0, (0, 0, 1))
    t = 0.37
    assert np.allclose(conjugate_bloch(expi(z, t), (1, 0, 0)), (np.cos(2 * t), np.sin(2 * t), 0), atol=1e-15)
    assert np.allclose(conjugate_bloch(expi(z, np.pi / 2), (0, 1, 0)), (0, -1, 0), atol=1e-15)


def test_conjugate_bloch_against_dense_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        u = random_unitary(rng)
        r = rng.normal(size=3)
        assert np.allclose(conjugate_bloch(u, r), dense_bloch(u, r), atol=1e-12)


def test_conjugate_bloch_preserves_norm():
    rng = np.random.default_rng(2)
    h = rng.normal(size=(10_000, 3))
    from qlandscape.su2 import expi_batch
    us = expi_batch(rng.normal(size=10_000), h, rng.uniform(0, 4, size=10_000))
    r = rng.normal(size=(10_000, 3))
    out = np.einsum("kij,kj->ki", rotation_matrix(us), r)
    assert np.max(np.abs(np.linalg.norm(out, axis=1) - np.linalg.norm(r, axis=1))) <= 1e-12 * 10
    assert unitarity_error(us) <= 1e-12


@settings(max_examples=100)
@given(st.floats(-10, 10), vec3)
def test_z_precession_rate_two(t, r):
    z = Hermitian2(0.0, (0, 0, 1))
    assert np.allclose(conjugate_bloch(expi(z, t), r), z_rotation(2 * t) @ np.array(r), atol=1e-12 * 10)
