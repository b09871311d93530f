import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmetropolis.hamiltonians import (
    PAULI,
    ExactModeIncommensurate,
    PauliHamiltonian,
    PauliString,
    PERescaling,
    X,
    Y,
    Z,
    build_heisenberg_pair,
    build_xx_chain,
    circuit_unitary,
    decompose_string_exponential,
    embed_operator,
    fermion_creation_ops,
    jordan_wigner_hopping,
    log_star,
    rescale_for_pe,
    trotter_cost_estimate,
)
from qmetropolis.linalg import (
    eig_hermitian,
    expm_hermitian_phase,
    is_hermitian,
    kron,
    op_norm,
    phase_distance,
)


def string_exp(s: PauliString, eps: float) -> np.ndarray:
    return expm_hermitian_phase(eig_hermitian(s.to_matrix()), eps)


# ---------------------------------------------------------------------------
# builders


def test_xx_chain_two_sites_spectrum():
    h = build_xx_chain(2, 0.0).eigensystem()
    assert np.allclose(h.eigenvalues, [-2, 0, 0, 2])


def test_xx_chain_large_field_ground_state():
    h = build_xx_chain(2, 50.0).eigensystem()
    assert abs(h.eigenvectors[3, 0]) == pytest.approx(1.0, abs=1e-3)


def test_xx_chain_term_count_and_boundary():
    ham = build_xx_chain(3, 0.5)
    assert len(ham.terms) == 7
    assert ham.boundary == "open"
    assert len(build_xx_chain(3, 0.5, periodic=True).terms) == 9
    with pytest.raises(ValueError):
        build_xx_chain(1, 0.5)


def test_heisenberg_pair():
    ham = build_heisenberg_pair()
    h = ham.eigensystem()
    assert np.allclose(h.eigenvalues, [0, 0, 0, 2], atol=1e-12)
    triplet = h.eigenvectors[:, :3]
    for basis_state in (0, 3):
        e = np.zeros(4)
        e[basis_state] = 1
        assert np.linalg.norm(triplet.conj().T @ e) == pytest.approx(1.0)
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert phase_distance(expm_hermitian_phase(h, np.pi / 2), swap) < 1e-12


@pytest.mark.parametrize("ham", [build_xx_chain(4, 0.3), build_heisenberg_pair(), build_xx_chain(3, 1.0, True)])
def test_builders_hermitian(ham):
    assert is_hermitian(ham.to_matrix(), 1e-12)
    assert ham.to_matrix().shape == (ham.dim, ham.dim)


def test_json_roundtrip(tmp_path):
    ham = build_xx_chain(3, 0.5)
    path = tmp_path / "h.json"
    ham.save(path)
    back = PauliHamiltonian.load(path)
    assert np.allclose(back.to_matrix(), ham.to_matrix())
    data = ham.to_dict()
    assert set(data) >= {"n", "terms", "offset"}
    assert set(data["terms"][0]) == {"coeff", "letters"}


def test_pauli_string_validation():
    with pytest.raises(ValueError):
        PauliString(1.0, "XQ")
    with pytest.raises(ValueError):
        PauliString(float("nan"), "X")


# ---------------------------------------------------------------------------
# Jordan-Wigner


def test_hopping_adjacent():
    terms = jordan_wigner_hopping(1, 2, 0.8, 4)
    assert [t.letters for t in terms] == ["IXXI", "IYYI"]
    assert all(t.coefficient == pytest.approx(0.4) for t in terms)


def test_hopping_with_chain():
    terms = jordan_wigner_hopping(0, 2, 1.0, 3)
    assert [t.letters for t in terms] == ["XZX", "YZY"]


def test_hopping_errors():
    with pytest.raises(ValueError):
        jordan_wigner_hopping(1, 1, 1.0, 3)
    with pytest.raises(ValueError):
        jordan_wigner_hopping(0, 3, 1.0, 3)


def test_creation_operators_obey_car():
    c = fermion_creation_ops(3)
    eye = np.eye(8)
    for a in range(3):
        for b in range(3):
            anti = c[a].conj().T @ c[b] + c[b] @ c[a].conj().T
            assert op_norm(anti - (eye if a == b else 0)) < 1e-12
            assert op_norm(c[a] @ c[b] + c[b] @ c[a]) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hopping_matches_fermion_oracle(n):
    c = fermion_creation_ops(n)
    for i in range(n):
        for j in range(i + 1, n):
            mat = sum(t.to_matrix() for t in jordan_wigner_hopping(i, j, 1.3, n))
            t = c[i] @ c[j].conj().T
            assert op_norm(mat + 1.3 * (t + t.conj().T)) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hopping_conserves_parity(n):
    parity = kron(*([Z] * n))
    for i in range(n):
        for j in range(i + 1, n):
            mat = sum(t.to_matrix() for t in jordan_wigner_hopping(i, j, 1.0, n))
            assert op_norm(mat @ parity - parity @ mat) < 1e-12


# ---------------------------------------------------------------------------
# string exponentials


@pytest.mark.parametrize("eps", [0.1, 0.7, math.pi / 3])
def test_xzx_decomposition(eps):
    s = PauliString(1.0, "XZX")
    u = circuit_unitary(decompose_string_exponential(s, eps), 3)
    assert phase_distance(u, string_exp(s, eps)) < 1e-10


def test_decomposition_edge_cases():
    s = PauliString(1.0, "XZX")
    assert phase_distance(circuit_unitary(decompose_string_exponential(s, 0.0), 3), np.eye(8)) < 1e-12
    gates = decompose_string_exponential(PauliString(1.0, "Z"), 0.4)
    assert len(gates) == 1 and gates[0].pauli == "Z"
    with pytest.raises(ValueError):
        decompose_string_exponential(PauliString(1.0, "II"), 0.4)


@settings(max_examples=100, deadline=None)
@given(
    letters=st.lists(st.sampled_from("IXYZ"), min_size=1, max_size=4).filter(lambda x: set(x) != {"I"}),
    eps=st.floats(-math.pi, math.pi, allow_nan=False),
    coeff=st.floats(-2, 2).filter(lambda c: abs(c) > 1e-3),
)
def test_decomposition_property(letters, eps, coeff):
    s = PauliString(coeff, "".join(letters))
    u = circuit_unitary(decompose_string_exponential(s, eps), len(letters))
    assert phase_distance(u, string_exp(s, eps)) < 1e-10


def test_embed_operator_orders_sites(rng):
    a = PAULI["X"]
    b = PAULI["Y"]
    assert np.allclose(embed_operator(np.kron(a, b), (2, 0), 3), kron(b, np.eye(2), a))


# ---------------------------------------------------------------------------
# cost model and rescaling


def test_trotter_cost_monotone():
    base = trotter_cost_estimate(4, 1.0, 2, 1e-3)
    assert trotter_cost_estimate(4, 2.0, 2, 1e-3) > 2 * base
    assert trotter_cost_estimate(4, 1.0, 2, 1e-4) > base
    with pytest.raises(ValueError):
        trotter_cost_estimate(4, 1.0, 2, 0.0)


def test_log_star():
    assert log_star(2) == 1
    assert log_star(16) == 3
    small = trotter_cost_estimate(3, 1.0, 2, 0.1)
    assert small == pytest.approx(9 * 1.0 * 2 * 9 ** math.sqrt(math.log2(90)))


def test_rescale_h2_exact():
    resc = rescale_for_pe(build_heisenberg_pair(), 1, mode="exact")
    assert resc.tau == pytest.approx(math.pi / 2)
    assert list(resc.exact_bins([0.0, 0.0, 0.0, 2.0])) == [0, 0, 0, 1]


def test_rescale_generic_in_range():
    ham = build_xx_chain(4, 0.5)
    resc = rescale_for_pe(ham, 3)
    ph = resc.phase(ham.eigensystem().eigenvalues)
    assert ph.min() >= -1e-12 and ph.max() <= 2 ** 3 - 1 + 1e-9


def test_rescale_exact_incommensurate():
    with pytest.raises(ExactModeIncommensurate):
        rescale_for_pe(build_xx_chain(3, 0.5), 4, mode="exact")


def test_rescaling_overflow_rejected():
    with pytest.raises(ValueError):
        rescale_for_pe(build_heisenberg_pair(), 1, t=4 * math.pi)
    with pytest.raises(ValueError):
        PERescaling(1.0, 0.0, 0)


def test_pauli_matrices():
    assert np.allclose(X @ Y, 1j * Z)
