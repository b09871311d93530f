import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmetropolis.hamiltonians import X, Z, build_heisenberg_pair
from qmetropolis.linalg import (
    NotHermitian,
    eig_hermitian,
    expm_hermitian_phase,
    group_levels,
    is_projector,
    is_unitary,
    kron,
    op_norm,
    phase_distance,
    random_density,
    random_hermitian,
    random_projector,
    random_unitary,
    trace_norm,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_eig_pauli_z():
    h = eig_hermitian(Z)
    assert np.allclose(h.eigenvalues, [-1, 1])
    assert np.allclose(np.abs(h.eigenvectors[:, 0]), [0, 1])


def test_eig_pauli_x():
    h = eig_hermitian(X)
    assert np.allclose(h.eigenvalues, [-1, 1])
    minus = np.array([1, -1]) / np.sqrt(2)
    assert abs(abs(np.vdot(minus, h.eigenvectors[:, 0])) - 1) < 1e-12


def test_eig_heisenberg_pair():
    h = eig_hermitian(build_heisenberg_pair().to_matrix())
    assert np.allclose(h.eigenvalues, [0, 0, 0, 2], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(np.diag(kron(Z, Z)), [1, -1, -1, 1])
    xzx = kron(X, Z, X)
    assert xzx.shape == (8, 8)
    assert np.allclose(xzx, np.kron(np.kron(X, Z), X))


def test_kron_index_rule(rng):
    a = rng.standard_normal((2, 3))
    b = rng.standard_normal((4, 5))
    k = kron(a, b)
    assert k[1 * 4 + 2, 2 * 5 + 3] == pytest.approx(a[1, 2] * b[2, 3])


def test_expm_identity_and_swap():
    h2 = build_heisenberg_pair().eigensystem()
    assert np.allclose(expm_hermitian_phase(h2, 0.0), np.eye(4))
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert phase_distance(expm_hermitian_phase(h2, np.pi / 2), swap) < 1e-12


def test_trace_norm_examples(rng):
    rho = random_density(4, rng)
    assert trace_norm(rho) == pytest.approx(1.0)
    assert trace_norm(rho - rho) == 0.0
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)


def test_group_levels_tolerance():
    labels, values = group_levels([0.0, 1e-12, 1.0, 1.0 + 5e-10, 2.0])
    assert list(labels) == [0, 0, 1, 1, 2]
    assert len(values) == 3


def test_phase_distance_ignores_global_phase(rng):
    u = random_unitary(4, rng)
    assert phase_distance(u, np.exp(0.73j) * u) < 1e-12
    assert phase_distance(u, -u) < 1e-12
    assert phase_distance(u, random_unitary(4, rng)) > 0.1


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d=st.integers(1, 8))
def test_reconstruction_property(seed, d):
    rng = np.random.default_rng(seed)
    m = random_hermitian(d, rng)
    h = eig_hermitian(m)
    assert op_norm(h.reconstruct() - m) <= 1e-10 * max(1.0, op_norm(m))
    assert is_unitary(h.eigenvectors)
    assert np.all(np.diff(h.eigenvalues) >= 0)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, s=st.floats(-5, 5), t=st.floats(-5, 5))
def test_expm_group_property(seed, s, t):
    h = eig_hermitian(random_hermitian(4, np.random.default_rng(seed)))
    lhs = expm_hermitian_phase(h, s) @ expm_hermitian_phase(h, t)
    assert op_norm(lhs - expm_hermitian_phase(h, s + t)) < 1e-10
    assert is_unitary(expm_hermitian_phase(h, t), 1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_trace_norm_is_a_norm(seed):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(3, rng), random_hermitian(3, rng)
    assert trace_norm(a) >= 0
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12
    assert trace_norm(a) == pytest.approx(np.sum(np.abs(np.linalg.eigvalsh(a))))


@settings(max_examples=20, deadline=None)
@given(seed=seeds, d=st.integers(2, 8), data=st.data())
def test_random_projector_is_projector(seed, d, data):
    k = data.draw(st.integers(0, d))
    p = random_projector(d, k, np.random.default_rng(seed))
    assert is_projector(p)
    assert np.trace(p).real == pytest.approx(k)
