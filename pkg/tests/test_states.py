import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixent import (
    ClassicalDistribution,
    DensityOperator,
    HermitianOperator,
    InfiniteRelativeEntropyError,
    InvalidStateError,
    DimensionMismatchError,
    InverseTemperature,
    UnitaryOperator,
    apply_unitary,
    energy_mean,
    gibbs_state,
    random_haar_unitary,
    random_hermitian,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)
from conftest import seeded_density


def probability_vectors(max_dim=6):
    return (
        st.lists(st.floats(0.01, 1.0), min_size=2, max_size=max_dim)
        .map(lambda w: np.array(w) / np.sum(w))
    )


# ---------------------------------------------------------------------------
# type invariants
# ---------------------------------------------------------------------------

def test_hermitian_rejects_non_hermitian():
    with pytest.raises(InvalidStateError):
        HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_density_rejects_bad_trace():
    with pytest.raises(InvalidStateError):
        DensityOperator(np.diag([0.6, 0.6]).astype(complex))


def test_density_rejects_negative_eigenvalue():
    with pytest.raises(InvalidStateError):
        DensityOperator(np.diag([1.1, -0.1]).astype(complex))


def test_density_clamps_rounding_noise():
    rho = DensityOperator(np.diag([1.0 + 5e-11, -5e-11]).astype(complex))
    eigs = rho.eigenvalues()
    assert eigs.min() == 0.0


def test_unitary_rejects_non_unitary():
    with pytest.raises(InvalidStateError):
        UnitaryOperator(np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_inverse_temperature_must_be_finite():
    with pytest.raises(ValueError):
        InverseTemperature(math.inf)
    with pytest.raises(ValueError):
        InverseTemperature(math.nan)
    assert InverseTemperature(-2.0).flagged_nonpositive
    assert not InverseTemperature(0.5).flagged_nonpositive


def test_distribution_invariants():
    with pytest.raises(InvalidStateError):
        ClassicalDistribution([0.5, 0.6])
    with pytest.raises(InvalidStateError):
        ClassicalDistribution([1.2, -0.2])


# ---------------------------------------------------------------------------
# gibbs_state
# ---------------------------------------------------------------------------

def test_gibbs_zero_hamiltonian_is_maximally_mixed():
    h = HermitianOperator(np.zeros((2, 2)))
    for beta in (-3.0, 0.0, 1.0, 17.0):
        rho = gibbs_state(h, beta)
        assert np.allclose(rho.entries, np.eye(2) / 2, atol=1e-15)


def test_gibbs_beta_zero_is_maximally_mixed():
    rho = gibbs_state(random_hermitian(3, 3), 0.0)
    assert np.allclose(rho.entries, np.eye(3) / 3, atol=1e-15)


def test_gibbs_qubit_example(qubit_h):
    # oracle: direct evaluation e^{-beta E}/Z with Z = 1 + e^{-1}
    z = 1.0 + math.exp(-1.0)
    expected = np.diag([1.0 / z, math.exp(-1.0) / z])
    rho = gibbs_state(qubit_h, 1.0)
    assert np.allclose(rho.entries, expected, atol=1e-15)
    assert round(rho.entries[0, 0].real, 4) == 0.7311
    assert round(rho.entries[1, 1].real, 4) == 0.2689


def test_gibbs_rejects_nonfinite_beta(qubit_h):
    with pytest.raises(ValueError):
        gibbs_state(qubit_h, math.inf)


def test_gibbs_positive_spectrum_at_extreme_beta():
    # |beta| * spectral range = 500 must still give strictly positive eigenvalues
    h = HermitianOperator(np.diag([0.0, 0.4, 1.0]))
    for beta in (500.0, -500.0):
        eigs = gibbs_state(h, beta).eigenvalues()
        assert np.all(eigs > 0.0)


# ---------------------------------------------------------------------------
# apply_unitary
# ---------------------------------------------------------------------------

def test_apply_unitary_identity(qubit_h):
    rho = gibbs_state(qubit_h, 1.0)
    out = apply_unitary(rho, UnitaryOperator(np.eye(2)))
    assert np.array_equal(out.entries, rho.entries)


def test_apply_unitary_maximally_mixed_invariant():
    rho = DensityOperator(np.eye(3).astype(complex) / 3)
    u = random_haar_unitary(11, 3)
    out = apply_unitary(rho, u)
    assert np.allclose(out.entries, rho.entries, atol=1e-15)


def test_apply_unitary_exchange(qubit_h, exchange_u):
    rho = gibbs_state(qubit_h, 1.0)
    # oracle: direct matrix product
    expected = exchange_u.entries @ rho.entries @ exchange_u.entries.conj().T
    out = apply_unitary(rho, exchange_u)
    assert np.allclose(out.entries, expected, atol=1e-15)
    assert np.allclose(np.diag(out.entries), np.diag(rho.entries)[::-1], atol=1e-15)


def test_apply_unitary_dim_mismatch(exchange_u):
    rho = DensityOperator(np.eye(3).astype(complex) / 3)
    with pytest.raises(DimensionMismatchError):
        apply_unitary(rho, exchange_u)


def test_unitary_invariance_of_entropy():
    # 200 seeded (rho, U) pairs with d <= 8
    for i in range(200):
        d = 2 + i % 7
        rho = seeded_density(i, d)
        u = random_haar_unitary(1000 + i, d)
        assert abs(von_neumann_entropy(apply_unitary(rho, u)) - von_neumann_entropy(rho)) < 1e-10


# ---------------------------------------------------------------------------
# entropies
# ---------------------------------------------------------------------------

def test_von_neumann_pure_state():
    assert von_neumann_entropy(DensityOperator(np.diag([1.0, 0.0]).astype(complex))) == 0.0


def test_von_neumann_maximally_mixed():
    for d in (2, 3, 5):
        rho = DensityOperator(np.eye(d).astype(complex) / d)
        assert von_neumann_entropy(rho) == pytest.approx(math.log(d), abs=1e-12)


def test_von_neumann_derived_value():
    # oracle: -sum p ln p directly
    expected = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    rho = DensityOperator(np.diag([0.75, 0.25]).astype(complex))
    assert von_neumann_entropy(rho) == pytest.approx(expected, abs=1e-14)
    assert round(von_neumann_entropy(rho), 4) == 0.5623


def test_shannon_examples():
    assert shannon_entropy(ClassicalDistribution([1.0, 0.0])) == 0.0
    assert shannon_entropy(ClassicalDistribution([0.5, 0.5])) == pytest.approx(
        math.log(2), abs=1e-14
    )
    assert shannon_entropy(ClassicalDistribution([0.75, 0.25])) == pytest.approx(
        0.5623351446188083, abs=1e-14
    )


def test_shannon_equals_von_neumann_on_spectrum():
    for seed in range(20):
        d = 2 + seed % 5
        rho = seeded_density(seed, d)
        spectrum = ClassicalDistribution(rho.eigenvalues() / rho.eigenvalues().sum())
        assert shannon_entropy(spectrum) == pytest.approx(
            von_neumann_entropy(rho), abs=1e-12
        )


@given(probability_vectors())
def test_shannon_entropy_bounds(p):
    s = shannon_entropy(ClassicalDistribution(p))
    assert -1e-12 <= s <= math.log(len(p)) + 1e-12


# ---------------------------------------------------------------------------
# relative entropy
# ---------------------------------------------------------------------------

def test_relative_entropy_identical_states():
    for seed in range(5):
        rho = seeded_density(seed, 3)
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)


def test_relative_entropy_pure_vs_mixed():
    sigma = DensityOperator(np.diag([1.0, 0.0]).astype(complex))
    rho = DensityOperator(np.eye(2).astype(complex) / 2)
    assert relative_entropy(sigma, rho) == pytest.approx(math.log(2), abs=1e-14)


def test_relative_entropy_classical_example():
    # oracle: direct sum sigma_a ln(sigma_a/rho_a) = 0.5 ln 3
    sigma = DensityOperator(np.diag([0.25, 0.75]).astype(complex))
    rho = DensityOperator(np.diag([0.75, 0.25]).astype(complex))
    assert relative_entropy(sigma, rho) == pytest.approx(0.5 * math.log(3), abs=1e-14)


def test_relative_entropy_singular_rho_raises():
    sigma = DensityOperator(np.eye(2).astype(complex) / 2)
    rho = DensityOperator(np.diag([1.0, 0.0]).astype(complex))
    with pytest.raises(InfiniteRelativeEntropyError):
        relative_entropy(sigma, rho)


def test_relative_entropy_singular_rho_ok_when_supported():
    pure = DensityOperator(np.diag([1.0, 0.0]).astype(complex))
    assert relative_entropy(pure, pure) == pytest.approx(0.0, abs=1e-12)


def test_klein_inequality_seeded_pairs():
    # >= 0 always; == 0 (to 1e-10) iff the states coincide elementwise to 1e-8
    for seed in range(50):
        d = 2 + seed % 4
        sigma = seeded_density(seed, d, beta=0.8)
        rho = seeded_density(seed + 999, d, beta=1.3)
        val = relative_entropy(sigma, rho)
        maxdiff = float(np.max(np.abs(sigma.entries - rho.entries)))
        assert val >= 0.0
        assert (val < 1e-10) == (maxdiff < 1e-8)
    rho = seeded_density(7, 4)
    assert relative_entropy(rho, rho) < 1e-10


# ---------------------------------------------------------------------------
# energy mean
# ---------------------------------------------------------------------------

def test_energy_mean_uniform(qubit_h):
    rho = DensityOperator(np.eye(2).astype(complex) / 2)
    assert energy_mean(rho, qubit_h) == pytest.approx(0.5, abs=1e-15)


def test_energy_mean_zero_hamiltonian():
    rho = seeded_density(3, 4)
    h = HermitianOperator(np.zeros((4, 4)))
    assert energy_mean(rho, h) == 0.0


def test_energy_mean_gibbs_qubit(qubit_h):
    rho = gibbs_state(qubit_h, 1.0)
    z = 1.0 + math.exp(-1.0)
    assert energy_mean(rho, qubit_h) == pytest.approx(math.exp(-1.0) / z, abs=1e-14)


def test_energy_mean_dim_mismatch(qubit_h):
    rho = DensityOperator(np.eye(3).astype(complex) / 3)
    with pytest.raises(DimensionMismatchError):
        energy_mean(rho, qubit_h)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------

def test_random_hermitian_deterministic():
    a = random_hermitian(12, 4)
    b = random_hermitian(12, 4)
    assert np.array_equal(a.entries, b.entries)


def test_random_hermitian_real_eigenvalues():
    h = random_hermitian(7, 4)
    eigs = np.linalg.eigvals(h.entries)  # general solver, no hermiticity assumed
    assert np.max(np.abs(eigs.imag)) < 1e-12


def test_random_haar_unitary_is_unitary():
    for seed in (0, 5, 9):
        u = random_haar_unitary(seed, 5)
        assert np.max(np.abs(u.entries.conj().T @ u.entries - np.eye(5))) < 1e-12


def test_random_haar_unitary_deterministic():
    assert np.array_equal(random_haar_unitary(4, 3).entries, random_haar_unitary(4, 3).entries)


def test_random_generators_reject_small_dims():
    with pytest.raises(ValueError):
        random_hermitian(0, 1)
    with pytest.raises(ValueError):
        random_haar_unitary(0, 1)
