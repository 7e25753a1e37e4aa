"""Sequential unitary collisions of reservoir molecules with an external field.

Each collision conjugates one fresh molecule's Gibbs state rho by U. The mean
energy transfer Delta E = tr(sigma H) - tr(rho H) obeys the exact identity
beta * Delta E = S[sigma|rho], and the reservoir's informatic entropy is
untouched by the unitary collisions themselves.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceededError, DimensionMismatchError, InvalidStateError
from .states import (
    DensityOperator,
    HermitianOperator,
    UnitaryOperator,
    apply_unitary,
    beta_value,
    energy_mean,
    gibbs_state,
    relative_entropy,
    von_neumann_entropy,
)

DENSE_DIM_CAP = 4096
# thermo_entropy_production verifies its Gibbs precondition to this tolerance
GIBBS_CHECK_TOL = 1e-8

LEDGER_CSV_HEADER = "collision_index,delta_E,cum_delta_E,dirr_S,cum_dirr_S,reservoir_S_info"


@dataclass(frozen=True)
class CollisionSpec:
    """A reservoir run: n molecules at (H, beta), k of them collide via U."""

    h: HermitianOperator
    beta: float
    u: UnitaryOperator
    collisions: int
    reservoir_size: int

    def __post_init__(self):
        object.__setattr__(self, "beta", beta_value(self.beta))
        if self.h.dim != self.u.dim:
            raise DimensionMismatchError(
                f"H is {self.h.dim}-dimensional but U is {self.u.dim}-dimensional"
            )
        if self.collisions < 0:
            raise ValueError(f"need collisions >= 0, got {self.collisions}")
        if self.reservoir_size < 1:
            raise ValueError(f"need reservoir_size >= 1, got {self.reservoir_size}")
        if self.collisions > self.reservoir_size:
            raise ValueError(
                f"collisions {self.collisions} exceed reservoir size {self.reservoir_size}"
            )


@dataclass(frozen=True)
class LedgerRow:
    index: int
    delta_e: float
    cum_delta_e: float
    dirr_s: float
    cum_dirr_s: float
    reservoir_s_info: float


@dataclass(frozen=True)
class CollisionLedger:
    """Per-collision energy/entropy bookkeeping for one collision sequence.

    Collisions are i.i.d. in this model, so cumulative columns are exact
    integer multiples of the per-collision values, and the informatic entropy
    column is the constant n*S[rho] (each collision swaps one S[rho] for one
    S[sigma] = S[rho]).
    """

    reservoir_size: int
    collisions: int
    beta: float
    delta_e: float
    dirr_s: float
    s_rho: float
    s_sigma: float
    s_rel: float
    identity_residual: float
    commutator_fro: float
    rows: tuple = field(default_factory=tuple)

    @property
    def reservoir_s_info(self) -> float:
        return self.reservoir_size * self.s_rho

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(LEDGER_CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(
                f"{r.index},{r.delta_e!r},{r.cum_delta_e!r},"
                f"{r.dirr_s!r},{r.cum_dirr_s!r},{r.reservoir_s_info!r}\n"
            )
        return buf.getvalue()


def commutator_norm(u: UnitaryOperator, h: HermitianOperator) -> float:
    """Frobenius norm of [U, H]; zero means energy-conserving collisions."""
    c = u.entries @ h.entries - h.entries @ u.entries
    return float(np.linalg.norm(c))


def collision_energy_transfer(
    rho: DensityOperator, u: UnitaryOperator, h: HermitianOperator
) -> float:
    """Mean energy transfer tr(sigma H) - tr(rho H) with sigma = U rho U†.

    Strictly positive for a Gibbs state at beta > 0 whenever sigma != rho,
    where it equals S[sigma|rho] / beta.
    """
    sigma = apply_unitary(rho, u)
    return energy_mean(sigma, h) - energy_mean(rho, h)


def gibbs_deviation(rho: DensityOperator, h: HermitianOperator, beta) -> float:
    """Max elementwise distance of rho from gibbs_state(h, beta)."""
    ref = gibbs_state(h, beta)
    return float(np.max(np.abs(rho.entries - ref.entries)))


def thermo_entropy_production(
    rho: DensityOperator, u: UnitaryOperator, h: HermitianOperator, beta
) -> float:
    """Thermodynamic entropy production beta * Delta E per collision, in nats.

    Requires rho to actually be the Gibbs state of (H, beta) with beta > 0;
    the result is cross-checked against relative_entropy(U rho U†, rho) to
    1e-9 relative, which is the identity log rho = -beta H - log Z makes exact.
    """
    b = beta_value(beta)
    if b <= 0.0:
        raise ValueError(f"thermodynamic entropy production needs beta > 0, got {b}")
    dev = gibbs_deviation(rho, h, b)
    if dev > GIBBS_CHECK_TOL:
        raise InvalidStateError(
            f"rho deviates from gibbs_state(H, beta) by {dev:.3e} (> {GIBBS_CHECK_TOL})"
        )
    production = b * collision_energy_transfer(rho, u, h)
    s_rel = relative_entropy(apply_unitary(rho, u), rho)
    if abs(production - s_rel) > 1e-9 * max(1e-30, abs(s_rel)) + 1e-12:
        raise InvalidStateError(
            f"beta*DeltaE = {production!r} disagrees with S[sigma|rho] = {s_rel!r}"
        )
    return production


def run_collision_sequence(spec: CollisionSpec) -> CollisionLedger:
    """Evaluate k i.i.d. collisions and assemble the bookkeeping ledger.

    The reservoir is tracked as molecule counts (k sigma, n-k rho), never as a
    d^n matrix. Cumulative columns are built by multiplication, so additivity
    holds to 0 ulp, and the informatic entropy column is the constant n*S[rho].
    """
    rho = gibbs_state(spec.h, spec.beta)
    sigma = apply_unitary(rho, spec.u)

    delta_e = energy_mean(sigma, spec.h) - energy_mean(rho, spec.h)
    dirr_s = spec.beta * delta_e
    s_rho = von_neumann_entropy(rho)
    s_sigma = von_neumann_entropy(sigma)
    if abs(s_sigma - s_rho) > 1e-10:
        raise InvalidStateError(
            f"unitary collision changed the single-molecule entropy by {s_sigma - s_rho}"
        )
    s_rel = relative_entropy(sigma, rho)
    # scaled residual: relative at O(1) magnitudes, absolute when the
    # entropy production vanishes (beta = 0 or commuting U)
    residual = abs(dirr_s - s_rel) / (1.0 + abs(s_rel))

    s_info = spec.reservoir_size * s_rho
    rows = tuple(
        LedgerRow(
            index=i,
            delta_e=delta_e,
            cum_delta_e=i * delta_e,
            dirr_s=dirr_s,
            cum_dirr_s=i * dirr_s,
            reservoir_s_info=s_info,
        )
        for i in range(1, spec.collisions + 1)
    )
    return CollisionLedger(
        reservoir_size=spec.reservoir_size,
        collisions=spec.collisions,
        beta=spec.beta,
        delta_e=delta_e,
        dirr_s=dirr_s,
        s_rho=s_rho,
        s_sigma=s_sigma,
        s_rel=s_rel,
        identity_residual=residual,
        commutator_fro=commutator_norm(spec.u, spec.h),
        rows=rows,
    )


def reservoir_hamiltonian(
    h: HermitianOperator, n: int, dense_cap: int = DENSE_DIM_CAP
) -> HermitianOperator:
    """Sum of single-molecule Hamiltonians on (C^d)^{tensor n}.

    Dimension d^n must stay within dense_cap; the result is permutation
    invariant by construction.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    d = h.dim
    dim = d**n
    if dim > dense_cap:
        raise CapExceededError(
            f"reservoir dimension {d}^{n} = {dim} exceeds dense cap {dense_cap}"
        )
    total = np.zeros((dim, dim), dtype=complex)
    for k in range(n):
        term = np.kron(
            np.kron(np.eye(d**k), h.entries), np.eye(d ** (n - k - 1))
        )
        total += term
    return HermitianOperator(total)
