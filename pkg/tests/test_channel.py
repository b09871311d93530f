import json
import math

import numpy as np
import pytest

from qmetropolis.channel import (
    DimensionCap,
    assemble_channel,
    channel_report,
    channel_spectrum,
    contraction_and_error_bound,
    db_fixed_point_lemma_check,
    detailed_balance_residual,
    gibbs_state,
    gibbs_weights,
    primitivity_check,
    reject_coefficients,
)
from qmetropolis.hamiltonians import PERescaling, X, Z, rescale_for_pe
from qmetropolis.linalg import eig_hermitian, random_hermitian, random_unitary, trace_norm
from qmetropolis.phase_estimation import PEModel
from qmetropolis.walk import MetropolisConfig, UpdateSet, classical_reduction, local_pauli_update_set

LEVELS = PEModel("exact", None)


def z_config(beta, **kw):
    h = eig_hermitian(Z)
    cfg = MetropolisConfig(beta, PEModel("exact", PERescaling(math.pi, 1.0, 1)), UpdateSet.uniform([X]), **kw)
    return h, cfg


def realistic_qubit(beta, r=2):
    h = eig_hermitian(0.5 * Z + 0.3 * X)
    cfg = MetropolisConfig(beta, PEModel("realistic", rescale_for_pe(h, r)), UpdateSet.uniform([X]))
    return h, cfg


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 2.0])
def test_h2_channel_basic_properties(h2, h2_config, beta):
    so = assemble_channel(h2, h2_config(beta))
    assert np.abs(so.trace_deficit()).max() < 1e-12
    assert np.linalg.eigvalsh(so.choi()).min() > -1e-12
    rho_g = gibbs_state(h2, beta)
    assert trace_norm(so.apply(rho_g) - rho_g) < 1e-12
    res, n = detailed_balance_residual(so, h2.eigenvectors, gibbs_weights(h2, beta))
    assert res < 1e-12 and n == 4 ** 4
    assert db_fixed_point_lemma_check(so, h2.eigenvectors, gibbs_weights(h2, beta))


def test_h2_infinite_temperature_fixed_point(h2, h2_config):
    spec = channel_spectrum(assemble_channel(h2, h2_config(0.0)))
    assert spec.unique
    assert np.allclose(spec.fixed_point, np.eye(4) / 4, atol=1e-10)


def test_h2_primitive_at_finite_beta(h2, h2_config):
    so = assemble_channel(h2, h2_config(1.0))
    assert primitivity_check(so) is not None
    assert channel_spectrum(so).gap > 0


def test_identity_update_dephases(h2, h2_exact):
    cfg = MetropolisConfig(1.0, h2_exact, UpdateSet.uniform([np.eye(4)]))
    so = assemble_channel(h2, cfg)
    spec = channel_spectrum(so)
    # every operator block diagonal in the two bins is fixed: 9 + 1 unit eigenvalues
    assert np.sum(np.abs(spec.eigenvalues - 1) < 1e-10) == 10
    assert not spec.unique
    assert primitivity_check(so, m_max=5) is None


def test_two_level_gap_closed_form():
    h, cfg = z_config(1.0)
    tm = classical_reduction(h, cfg)
    so = assemble_channel(h, cfg)
    s01, s10 = tm.S[0, 1], tm.S[1, 0]
    assert channel_spectrum(so).gap == pytest.approx(1 - abs(1 - s01 - s10), abs=1e-12)


@pytest.mark.parametrize("beta", [0.3, 1.5])
def test_spectrum_real_and_matches_classical(rng, beta):
    h = eig_hermitian(random_hermitian(4, rng))
    cfg = MetropolisConfig(beta, LEVELS, local_pauli_update_set(2))
    so = assemble_channel(h, cfg)
    spec = channel_spectrum(so)
    assert np.abs(spec.eigenvalues.imag).max() < 1e-10
    assert spec.gap == pytest.approx(classical_reduction(h, cfg).gap(), abs=1e-10)
    levels = channel_spectrum(assemble_channel(h, cfg, form="levels"))
    assert levels.gap == pytest.approx(spec.gap, abs=1e-10)


@pytest.mark.parametrize("beta", [0.5, 2.0])
def test_exact_and_register_methods_agree(beta):
    h, cfg = realistic_qubit(beta)
    a = assemble_channel(h, cfg, method="register")
    hz, cfg2 = z_config(beta)
    b = assemble_channel(hz, cfg2, method="exact")
    c = assemble_channel(hz, cfg2, method="register")
    assert np.abs(b.matrix - c.matrix).max() < 1e-12
    assert np.abs(a.trace_deficit()).max() < 1e-10


@pytest.mark.parametrize("maker", [z_config, realistic_qubit])
def test_closed_form_matches_propagation(maker):
    # brute-force propagation through the measurement sequence, tiny case only
    h, cfg = maker(0.8)
    n_max = 12
    closed = assemble_channel(h, cfg, n_max=n_max)
    brute = assemble_channel(h, cfg, n_max=n_max, method="propagate")
    assert np.abs(closed.matrix - brute.matrix).max() < 1e-10


def test_truncated_reject_sum_reports_tail():
    h, cfg = realistic_qubit(1.0)
    full = assemble_channel(h, cfg)
    short = assemble_channel(h, cfg, n_max=2)
    longer = assemble_channel(h, cfg, n_max=20)
    assert full.truncation_tail == 0.0
    assert short.truncation_tail >= longer.truncation_tail >= 0
    assert np.abs(longer.matrix - full.matrix).max() <= 2 * longer.truncation_tail + 1e-12


def test_reject_coefficients_limits():
    d = np.array([0.0, 0.5, 1.0])
    inf = reject_coefficients(d, None)
    assert np.allclose(reject_coefficients(d, 400), inf)
    assert inf[0, 0] == 1.0 and inf[2, 2] == 0.0


def test_dimension_cap(rng):
    h = eig_hermitian(random_hermitian(4, rng))
    cfg = MetropolisConfig(1.0, LEVELS, local_pauli_update_set(2))
    with pytest.raises(DimensionCap):
        assemble_channel(h, cfg, dim_cap=2)
    so = assemble_channel(h, cfg, form="levels", dim_cap=2)
    assert so.matrix is None and so.levels is not None


def test_asymmetric_updates_break_detailed_balance():
    h = eig_hermitian(np.diag([0.0, 1.0, 2.0, 3.0]))
    shift = np.roll(np.eye(4), 1, axis=0)
    beta = 0.5
    p = gibbs_weights(h, beta)
    one_way = MetropolisConfig(beta, LEVELS, UpdateSet([shift], [1.0], check_symmetric=False))
    both = MetropolisConfig(beta, LEVELS, UpdateSet.uniform([shift, shift.T]))
    assert detailed_balance_residual(assemble_channel(h, one_way), h.eigenvectors, p)[0] > 0.1
    assert detailed_balance_residual(assemble_channel(h, both), h.eigenvectors, p)[0] < 1e-12


def test_gibbs_weights_zero_temperature(h2):
    assert np.allclose(gibbs_weights(h2, math.inf), [1 / 3, 1 / 3, 1 / 3, 0])
    assert np.allclose(gibbs_weights(h2, 0.0), 0.25)


def test_contraction_bound_realistic():
    h, cfg = realistic_qubit(1.0, r=3)
    so = assemble_channel(h, cfg)
    rho_g = gibbs_state(h, 1.0)
    out = contraction_and_error_bound(so, rho_g, rng=np.random.default_rng(0))
    sigma = channel_spectrum(so).fixed_point
    assert 0 <= out["eta1"] < 1
    assert trace_norm(sigma - rho_g) <= out["eps_star_bound"] + 1e-9


def test_channel_report_json(h2, h2_config):
    so = assemble_channel(h2, h2_config(math.inf))
    rep = json.loads(channel_report(so, h2, math.inf).to_json())
    assert rep["beta"] == "inf"
    assert rep["d"] == 4
    assert rep["gibbs_distance"] < 1e-8


def test_channel_in_random_basis(rng):
    # same walk, Hamiltonian rotated by a random unitary: channel conjugates
    h0 = eig_hermitian(np.diag([0.0, 0.4, 1.1, 2.0]))
    u = random_unitary(4, rng)
    h1 = eig_hermitian(u @ np.diag([0.0, 0.4, 1.1, 2.0]) @ u.conj().T)
    ups0 = local_pauli_update_set(2)
    ups1 = UpdateSet.uniform([u @ c @ u.conj().T for c in ups0.ops])
    s0 = channel_spectrum(assemble_channel(h0, MetropolisConfig(1.0, LEVELS, ups0)))
    s1 = channel_spectrum(assemble_channel(h1, MetropolisConfig(1.0, LEVELS, ups1)))
    assert s0.gap == pytest.approx(s1.gap, abs=1e-10)
    assert np.allclose(u @ s0.fixed_point @ u.conj().T, s1.fixed_point, atol=1e-10)
