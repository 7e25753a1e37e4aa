import numpy as np
import pytest

from mixent import (
    DensityOperator,
    HermitianOperator,
    UnitaryOperator,
    gibbs_state,
    random_hermitian,
)


@pytest.fixture
def qubit_h() -> HermitianOperator:
    return HermitianOperator(np.diag([0.0, 1.0]))


@pytest.fixture
def exchange_u() -> UnitaryOperator:
    return UnitaryOperator(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))


def seeded_density(seed: int, d: int, beta: float = 1.0) -> DensityOperator:
    """Full-rank random state: the Gibbs state of a seeded random Hamiltonian."""
    return gibbs_state(random_hermitian(seed, d), beta)
