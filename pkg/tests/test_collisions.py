import math

import numpy as np
import pytest

from mixent import (
    CollisionSpec,
    InvalidStateError,
    UnitaryOperator,
    apply_unitary,
    collision_energy_transfer,
    commutator_norm,
    gibbs_state,
    random_haar_unitary,
    random_hermitian,
    relative_entropy,
    reservoir_hamiltonian,
    run_collision_sequence,
    thermo_entropy_production,
    von_neumann_entropy,
)
from mixent.collisions import LEDGER_CSV_HEADER
from mixent.errors import CapExceededError
from conftest import seeded_density

QUBIT_DELTA_E = (1.0 - math.exp(-1.0)) / (1.0 + math.exp(-1.0))  # p0 - p1 at beta=1


def test_energy_transfer_identity_unitary(qubit_h):
    rho = gibbs_state(qubit_h, 1.0)
    assert collision_energy_transfer(rho, UnitaryOperator(np.eye(2)), qubit_h) == 0.0


def test_energy_transfer_commuting_unitary(qubit_h):
    # U diagonal in H's eigenbasis conserves energy exactly
    rho = gibbs_state(qubit_h, 1.0)
    u = UnitaryOperator(np.diag([1.0, np.exp(1j * 0.7)]))
    assert abs(collision_energy_transfer(rho, u, qubit_h)) < 1e-15
    assert commutator_norm(u, qubit_h) < 1e-15


def test_energy_transfer_qubit_exchange(qubit_h, exchange_u):
    # oracle: Delta E = p0 - p1, and beta*Delta E = S[sigma|rho] since
    # ln(rho_0/rho_1) = beta * (E_1 - E_0) = 1
    rho = gibbs_state(qubit_h, 1.0)
    de = collision_energy_transfer(rho, exchange_u, qubit_h)
    assert de == pytest.approx(QUBIT_DELTA_E, abs=1e-14)
    assert round(de, 4) == 0.4621
    s_rel = relative_entropy(apply_unitary(rho, exchange_u), rho)
    assert 1.0 * de == pytest.approx(s_rel, rel=1e-12)


def test_thermo_entropy_production_identity_unitary(qubit_h):
    rho = gibbs_state(qubit_h, 1.0)
    assert thermo_entropy_production(rho, UnitaryOperator(np.eye(2)), qubit_h, 1.0) == 0.0


def test_thermo_entropy_production_qubit(qubit_h, exchange_u):
    rho = gibbs_state(qubit_h, 1.0)
    val = thermo_entropy_production(rho, exchange_u, qubit_h, 1.0)
    assert val == pytest.approx(QUBIT_DELTA_E, abs=1e-14)


def test_thermo_entropy_production_random_instance():
    # d = 4, beta = 0.5, Haar U: beta*DeltaE must equal S[sigma|rho] to 1e-9
    h = random_hermitian(11, 4)
    beta = 0.5
    rho = gibbs_state(h, beta)
    u = random_haar_unitary(11, 4)
    val = thermo_entropy_production(rho, u, h, beta)
    s_rel = relative_entropy(apply_unitary(rho, u), rho)
    assert val == pytest.approx(s_rel, rel=1e-9)


def test_thermo_entropy_production_rejects_non_gibbs(qubit_h, exchange_u):
    not_gibbs = seeded_density(5, 2, beta=2.0)
    with pytest.raises(InvalidStateError):
        thermo_entropy_production(not_gibbs, exchange_u, qubit_h, 1.0)


def test_thermo_entropy_production_rejects_nonpositive_beta(qubit_h, exchange_u):
    rho = gibbs_state(qubit_h, 0.0)
    with pytest.raises(ValueError):
        thermo_entropy_production(rho, exchange_u, qubit_h, 0.0)


def test_dissipation_positivity_and_identity_seeded():
    # Gibbs + Haar with a genuinely non-commuting U: Delta E > 0 and
    # beta * Delta E = S[sigma|rho] to 1e-9 relative
    for seed in range(100):
        d = 2 + seed % 5
        beta = 0.2 + 0.1 * (seed % 9)
        h = random_hermitian(seed, d)
        u = random_haar_unitary(5000 + seed, d)
        rho = gibbs_state(h, beta)
        sigma = apply_unitary(rho, u)
        if commutator_norm(u, h) <= 1e-6:
            continue
        if np.max(np.abs(sigma.entries - rho.entries)) <= 1e-8:
            continue
        de = collision_energy_transfer(rho, u, h)
        assert de > 0.0
        assert beta * de == pytest.approx(relative_entropy(sigma, rho), rel=1e-9)


# ---------------------------------------------------------------------------
# collision sequences
# ---------------------------------------------------------------------------

def test_spec_validation(qubit_h, exchange_u):
    with pytest.raises(ValueError):
        CollisionSpec(h=qubit_h, beta=1.0, u=exchange_u, collisions=5, reservoir_size=3)
    with pytest.raises(ValueError):
        CollisionSpec(h=qubit_h, beta=1.0, u=exchange_u, collisions=-1, reservoir_size=3)


def test_sequence_zero_collisions(qubit_h, exchange_u):
    spec = CollisionSpec(h=qubit_h, beta=1.0, u=exchange_u, collisions=0, reservoir_size=8)
    ledger = run_collision_sequence(spec)
    assert ledger.rows == ()
    assert ledger.reservoir_s_info == 8 * von_neumann_entropy(gibbs_state(qubit_h, 1.0))


def test_sequence_identity_unitary(qubit_h):
    spec = CollisionSpec(
        h=qubit_h, beta=1.0, u=UnitaryOperator(np.eye(2)), collisions=4, reservoir_size=6
    )
    ledger = run_collision_sequence(spec)
    assert all(r.delta_e == 0.0 for r in ledger.rows)
    assert all(r.cum_dirr_s == 0.0 for r in ledger.rows)


def test_sequence_qubit_cumulative(qubit_h, exchange_u):
    spec = CollisionSpec(h=qubit_h, beta=1.0, u=exchange_u, collisions=3, reservoir_size=5)
    ledger = run_collision_sequence(spec)
    assert len(ledger.rows) == 3
    assert ledger.rows[-1].cum_dirr_s == pytest.approx(3 * QUBIT_DELTA_E, abs=1e-14)
    assert round(ledger.rows[-1].cum_dirr_s, 4) == 1.3864
    # cumulative columns are built by multiplication: exact to 0 ulp
    for r in ledger.rows:
        assert r.cum_delta_e == r.index * ledger.delta_e
        assert r.cum_dirr_s == r.index * ledger.dirr_s


def test_sequence_entropy_column_constant_zero_ulp():
    for seed in (0, 1, 2):
        d = 2 + seed
        h = random_hermitian(seed, d)
        u = random_haar_unitary(100 + seed, d)
        spec = CollisionSpec(h=h, beta=0.7, u=u, collisions=6, reservoir_size=9)
        ledger = run_collision_sequence(spec)
        column = {r.reservoir_s_info for r in ledger.rows}
        assert column == {ledger.reservoir_s_info}
        assert ledger.reservoir_s_info == 9 * ledger.s_rho


def test_sequence_identity_residual_small(qubit_h, exchange_u):
    spec = CollisionSpec(h=qubit_h, beta=1.0, u=exchange_u, collisions=2, reservoir_size=4)
    ledger = run_collision_sequence(spec)
    assert ledger.identity_residual < 1e-9
    assert ledger.commutator_fro > 1e-6


def test_sequence_degenerate_betas(qubit_h):
    # beta <= 0 is legal: the identity beta*DeltaE = S[sigma|rho] holds for
    # any finite beta, only the positivity of DeltaE needs beta > 0
    u = random_haar_unitary(3, 2)
    for beta in (-1.5, 0.0):
        spec = CollisionSpec(h=qubit_h, beta=beta, u=u, collisions=2, reservoir_size=4)
        ledger = run_collision_sequence(spec)
        assert ledger.identity_residual < 1e-9
        assert ledger.dirr_s >= 0.0
    assert run_collision_sequence(
        CollisionSpec(h=qubit_h, beta=-1.5, u=u, collisions=1, reservoir_size=2)
    ).delta_e < 0.0


def test_ledger_csv_format(qubit_h, exchange_u):
    spec = CollisionSpec(h=qubit_h, beta=1.0, u=exchange_u, collisions=2, reservoir_size=4)
    csv_text = run_collision_sequence(spec).to_csv()
    lines = csv_text.strip().split("\n")
    assert lines[0] == LEDGER_CSV_HEADER
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "1"
    assert float(first[1]) == pytest.approx(QUBIT_DELTA_E, abs=1e-14)


# ---------------------------------------------------------------------------
# reservoir Hamiltonian
# ---------------------------------------------------------------------------

def test_reservoir_hamiltonian_single_copy(qubit_h):
    h_r = reservoir_hamiltonian(qubit_h, 1)
    assert np.array_equal(h_r.entries, qubit_h.entries)


def test_reservoir_hamiltonian_two_qubits(qubit_h):
    h_r = reservoir_hamiltonian(qubit_h, 2)
    assert np.allclose(h_r.entries, np.diag([0.0, 1.0, 1.0, 2.0]), atol=1e-15)


def test_reservoir_hamiltonian_trace_identity():
    # oracle: tr(H_R) = N * d^(N-1) * tr(H)
    for d, seed in ((2, 0), (3, 1)):
        h = random_hermitian(seed, d)
        h_r = reservoir_hamiltonian(h, 3)
        expected = 3 * d**2 * np.trace(h.entries)
        assert np.trace(h_r.entries) == pytest.approx(expected, abs=1e-10)


def test_reservoir_hamiltonian_permutation_invariant(qubit_h):
    h_r = reservoir_hamiltonian(qubit_h, 3).entries
    t = h_r.reshape((2,) * 6)
    swapped = t.transpose((1, 0, 2, 4, 3, 5)).reshape(8, 8)
    assert np.array_equal(swapped, h_r)


def test_reservoir_hamiltonian_cap(qubit_h):
    with pytest.raises(CapExceededError):
        reservoir_hamiltonian(qubit_h, 13)  # 2^13 > 4096
