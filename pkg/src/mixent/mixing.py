"""The graceful mixing map: symmetrized states and the entropy of mixing.

One sigma-molecule loses its identity among n rho-molecules:

    R = (1/(n+1)) * sum_k  rho^k (x) sigma (x) rho^(n-k)

and the entropy of mixing S_mix = S[R] - n S[rho] - S[sigma] is computed by
two independent routes (dense eigensolve; exact type-class enumeration for
commuting states) so each can serve as the other's oracle. The conjectured
n -> infinity limit is the relative entropy S[sigma|rho].
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import (
    CapExceededError,
    DimensionMismatchError,
    InvalidStateError,
)
from .collisions import reservoir_hamiltonian
from .states import (
    ClassicalDistribution,
    DensityOperator,
    HermitianOperator,
    clamp_spectrum,
    entropy_of_spectrum,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)

DENSE_DIM_CAP = 4096
TWIRL_FACTORIAL_CAP = 8      # N! permutations enumerated explicitly
TYPE_CLASS_BUDGET = 5_000_000
COMMUTE_TOL = 1e-10
NORMALIZATION_TOL = 1e-9
# rho eigenvalues closer than this are one degenerate block when
# simultaneously diagonalizing a commuting pair
DEGENERACY_GAP = 1e-8

SWEEP_CSV_HEADER = "n,method,S_mix_nats,S_rel_nats,gap_nats,wall_time_ms"

StateLike = Union[DensityOperator, ClassicalDistribution]


@dataclass(frozen=True)
class MixingRecord:
    """One (n, S_mix) sample of the convergence study.

    gap = S_rel - S_mix is stored signed so its sign structure stays visible.
    """

    n: int
    s_mix: float
    s_rel: float
    gap: float
    method: str
    wall_time_ms: float = 0.0

    def csv_row(self) -> str:
        return (
            f"{self.n},{self.method},{self.s_mix!r},{self.s_rel!r},"
            f"{self.gap!r},{self.wall_time_ms!r}"
        )


@dataclass(frozen=True)
class TypeClassSpectrum:
    """Spectrum of a classical symmetrized mixture, one entry per type class.

    counts[t] is the symbol-count vector of type t (rows sum to n_total);
    log_q[t] the log-eigenvalue shared by every string of that type (-inf for
    eigenvalue 0); log_mult[t] the log of the multinomial multiplicity.
    """

    dim: int
    n_total: int
    counts: np.ndarray
    log_q: np.ndarray
    log_mult: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.exp(self.log_q)

    def exact_multiplicities(self) -> list:
        """Exact integer multiplicities (big ints; intended for small N)."""
        mults = []
        for row in self.counts:
            m = math.factorial(self.n_total)
            for c in row:
                m //= math.factorial(int(c))
            mults.append(m)
        return mults

    def total_weight(self) -> float:
        """sum over types of multiplicity * eigenvalue; must be 1."""
        finite = np.isfinite(self.log_q)
        return math.fsum(np.exp(self.log_mult[finite] + self.log_q[finite]))

    def entropy(self) -> float:
        """S[R] = -sum_m mult(m) q(m) ln q(m), in nats."""
        finite = np.isfinite(self.log_q)
        lq = self.log_q[finite]
        terms = -np.exp(self.log_mult[finite] + lq) * lq
        return math.fsum(terms)

    def validate(self):
        if np.any(self.counts.sum(axis=1) != self.n_total):
            raise InvalidStateError("type vector does not sum to the system count")
        total = self.total_weight()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidStateError(
                f"type-class spectrum sums to {total!r}, not 1 to {NORMALIZATION_TOL}"
            )


@dataclass(frozen=True)
class SymmetrizedMixture:
    """Symmetrized mixture of one (or more) sigma among rho factors.

    Exactly one representation is populated: a dense d^N x d^N matrix, or a
    classical type-class spectrum.
    """

    dim: int
    n_total: int
    matrix: Optional[np.ndarray] = None
    spectrum: Optional[TypeClassSpectrum] = None

    def __post_init__(self):
        if (self.matrix is None) == (self.spectrum is None):
            raise ValueError("exactly one of matrix/spectrum must be set")

    def entropy(self) -> float:
        if self.spectrum is not None:
            return self.spectrum.entropy()
        return dense_state_entropy(self.matrix)

    def validate(self, perm_tol: float = 1e-10):
        """Enforce the representation invariants (meant for moderate sizes)."""
        if self.spectrum is not None:
            self.spectrum.validate()
            return
        DensityOperator(self.matrix)  # hermitian, unit trace, PSD
        t = _as_tensor(self.matrix, self.dim, self.n_total)
        for k in range(self.n_total - 1):
            swapped = _transposition_conjugate(t, k, k + 1, self.n_total)
            dev = float(np.max(np.abs(swapped - t)))
            if dev > perm_tol:
                raise InvalidStateError(
                    f"not permutation invariant: swap ({k},{k + 1}) moves it by {dev}"
                )


@dataclass(frozen=True)
class ExtrapolationSummary:
    """Best-fit decay model S_mix(n) = limit - a * f(n) over the sweep tail."""

    model: str
    a: float
    limit: float
    residual: float
    final_gap: float

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "a": self.a,
            "limit": self.limit,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class GracefulReport:
    """Residuals certifying the mixing map conserves energy and free dynamics."""

    energy_residual: float
    commutation_residual: float


def dense_state_entropy(matrix: np.ndarray) -> float:
    """Entropy of a dense state via full eigendecomposition, in nats."""
    if np.all(matrix.imag == 0.0):
        eigs = np.linalg.eigvalsh(matrix.real)
    else:
        eigs = np.linalg.eigvalsh(matrix)
    return entropy_of_spectrum(clamp_spectrum(eigs))


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _check_dense_cap(d: int, n_total: int, dense_cap: int) -> int:
    dim = d**n_total
    if dim > dense_cap:
        raise CapExceededError(
            f"dense dimension {d}^{n_total} = {dim} exceeds cap {dense_cap}"
        )
    return dim


def symmetrized_state_dense(
    sigma: DensityOperator,
    rho: DensityOperator,
    n: int,
    dense_cap: int = DENSE_DIM_CAP,
) -> SymmetrizedMixture:
    """Dense R = (1/(n+1)) sum_k rho^k (x) sigma (x) rho^(n-k)."""
    if sigma.dim != rho.dim:
        raise DimensionMismatchError(f"dims {sigma.dim} vs {rho.dim}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    d = sigma.dim
    n_total = n + 1
    dim = _check_dense_cap(d, n_total, dense_cap)

    # prefix[k] = rho^{(x)k}; the suffix is prefix[n-k], so one table serves both
    prefix = [np.eye(1, dtype=complex)]
    for _ in range(n):
        prefix.append(np.kron(prefix[-1], rho.entries))
    acc = np.zeros((dim, dim), dtype=complex)
    for k in range(n_total):
        acc += np.kron(np.kron(prefix[k], sigma.entries), prefix[n - k])
    acc /= n_total
    return SymmetrizedMixture(dim=d, n_total=n_total, matrix=acc)


def _type_count_matrix(n_total: int, d: int, budget: int) -> np.ndarray:
    """All count vectors (m_1..m_d) with sum n_total, as an int array."""
    num_types = math.comb(n_total + d - 1, d - 1)
    if num_types > budget:
        raise CapExceededError(
            f"{num_types} type classes exceed the enumeration budget {budget}"
        )
    if d == 1:
        return np.array([[n_total]], dtype=np.int64)
    if d == 2:
        first = np.arange(n_total + 1, dtype=np.int64)
        return np.stack([first, n_total - first], axis=1)
    # stars and bars: counts are the gaps between bar positions
    bars = np.array(
        list(itertools.combinations(range(n_total + d - 1), d - 1)), dtype=np.int64
    )
    counts = np.empty((num_types, d), dtype=np.int64)
    counts[:, 0] = bars[:, 0]
    counts[:, 1:-1] = np.diff(bars, axis=1) - 1
    counts[:, -1] = n_total + d - 2 - bars[:, -1]
    return counts


def _require_full_support(rho: ClassicalDistribution):
    if np.any(rho.p <= 0.0):
        raise InvalidStateError("rho must have full support (all rho_a > 0)")


def type_class_spectrum(
    sigma: ClassicalDistribution,
    rho: ClassicalDistribution,
    n_total: int,
    budget: int = TYPE_CLASS_BUDGET,
) -> TypeClassSpectrum:
    """Exact spectrum of the classical symmetrized mixture of one sigma.

    A string of type m carries the eigenvalue

        q(m) = (prod_a rho_a^{m_a}) * (1/N) * sum_a m_a sigma_a / rho_a

    with multiplicity N!/prod m_a!. Everything is kept in the log domain and
    the normalization sum mult*q = 1 is verified before the spectrum is used.
    """
    if sigma.dim != rho.dim:
        raise DimensionMismatchError(f"dims {sigma.dim} vs {rho.dim}")
    _require_full_support(rho)
    if n_total < 2:
        raise ValueError(f"need at least 2 systems, got {n_total}")
    counts = _type_count_matrix(n_total, sigma.dim, budget)
    log_rho = np.log(rho.p)
    ratios = sigma.p / rho.p

    log_mult = gammaln(n_total + 1) - gammaln(counts + 1).sum(axis=1)
    ratio_mean = counts @ ratios / n_total
    with np.errstate(divide="ignore"):
        log_q = counts @ log_rho + np.log(ratio_mean)

    spec = TypeClassSpectrum(
        dim=sigma.dim,
        n_total=n_total,
        counts=counts,
        log_q=log_q,
        log_mult=log_mult,
    )
    spec.validate()
    return spec


def _record(n, s_mix, s_rel, method, wall_ms=0.0) -> MixingRecord:
    return MixingRecord(
        n=n,
        s_mix=s_mix,
        s_rel=s_rel,
        gap=s_rel - s_mix,
        method=method,
        wall_time_ms=wall_ms,
    )


def classical_mixing_entropy_exact(
    sigma: ClassicalDistribution,
    rho: ClassicalDistribution,
    n: int,
    budget: int = TYPE_CLASS_BUDGET,
) -> MixingRecord:
    """Exact S_mix[sigma|rho; n] for commuting (diagonal) states."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    spec = type_class_spectrum(sigma, rho, n + 1, budget=budget)
    mixture = SymmetrizedMixture(dim=sigma.dim, n_total=n + 1, spectrum=spec)
    s_mix = mixture.entropy() - n * shannon_entropy(rho) - shannon_entropy(sigma)
    s_rel = relative_entropy(sigma.as_density(), rho.as_density())
    return _record(n, s_mix, s_rel, "classical-exact")


def _log_esp(ratios: np.ndarray, multiplicities: np.ndarray, k: int) -> float:
    """log of the elementary symmetric polynomial e_k over a multiset.

    The multiset holds ratios[a] repeated multiplicities[a] times; e_k is the
    coefficient of x^k in prod_a (1 + ratios[a] x)^{m_a}, built by truncated
    polynomial products. Ratios are rescaled by their maximum so the DP stays
    in range.
    """
    scale = float(ratios.max())
    if scale == 0.0:
        return -math.inf
    scaled = ratios / scale
    poly = np.zeros(k + 1)
    poly[0] = 1.0
    for a, m in enumerate(multiplicities):
        m = int(m)
        if m == 0:
            continue
        top = min(m, k)
        factor = np.array(
            [math.comb(m, j) * scaled[a] ** j for j in range(top + 1)]
        )
        poly = np.convolve(poly, factor)[: k + 1]
    if not math.isfinite(poly[k]):
        # coefficients are bounded by C(N, k), so this only trips when the
        # placement count itself leaves the double range
        raise CapExceededError(
            f"elementary symmetric polynomial e_{k} overflows float range"
        )
    if poly[k] <= 0.0:
        return -math.inf
    return k * math.log(scale) + math.log(poly[k])


def classical_mixing_entropy_multi(
    sigma: ClassicalDistribution,
    rho: ClassicalDistribution,
    n_total: int,
    m_sigma: int,
    budget: int = TYPE_CLASS_BUDGET,
) -> MixingRecord:
    """Exact mixing entropy with m_sigma sigma-factors spread over n_total slots.

    The mixture is uniform over all C(N, m_sigma) placements; a string of type
    m carries q(m) = (prod rho_a^{m_a}) * e_{m_sigma}(ratio multiset)/C(N, m_sigma).
    The record's S_rel column holds the implied reference m_sigma * S[sigma|rho]
    (reported, not asserted).
    """
    if not 1 <= m_sigma <= n_total:
        raise ValueError(f"need 1 <= m_sigma <= {n_total}, got {m_sigma}")
    if sigma.dim != rho.dim:
        raise DimensionMismatchError(f"dims {sigma.dim} vs {rho.dim}")
    _require_full_support(rho)
    counts = _type_count_matrix(n_total, sigma.dim, budget)
    log_rho = np.log(rho.p)
    ratios = sigma.p / rho.p
    log_choose = gammaln(n_total + 1) - gammaln(m_sigma + 1) - gammaln(n_total - m_sigma + 1)

    log_mult = gammaln(n_total + 1) - gammaln(counts + 1).sum(axis=1)
    log_q = np.empty(len(counts))
    for t, row in enumerate(counts):
        log_q[t] = row @ log_rho + _log_esp(ratios, row, m_sigma) - log_choose

    spec = TypeClassSpectrum(
        dim=sigma.dim,
        n_total=n_total,
        counts=counts,
        log_q=log_q,
        log_mult=log_mult,
    )
    spec.validate()
    mixture = SymmetrizedMixture(dim=sigma.dim, n_total=n_total, spectrum=spec)
    s_mix = (
        mixture.entropy()
        - (n_total - m_sigma) * shannon_entropy(rho)
        - m_sigma * shannon_entropy(sigma)
    )
    s_rel = m_sigma * relative_entropy(sigma.as_density(), rho.as_density())
    return _record(n_total - m_sigma, s_mix, s_rel, f"classical-multi(m_sigma={m_sigma})")


def _as_tensor(x: np.ndarray, d: int, n_total: int) -> np.ndarray:
    return np.asarray(x).reshape((d,) * (2 * n_total))


def _permutation_conjugate(t: np.ndarray, perm, n_total: int) -> np.ndarray:
    """Conjugate the matrix-as-tensor t by the subsystem permutation perm."""
    axes = tuple(perm) + tuple(n_total + p for p in perm)
    return t.transpose(axes)


def _transposition_conjugate(t: np.ndarray, i: int, j: int, n_total: int) -> np.ndarray:
    perm = list(range(n_total))
    perm[i], perm[j] = perm[j], perm[i]
    return _permutation_conjugate(t, perm, n_total)


def _infer_local_dim(dim: int, n_total: int) -> int:
    d = round(dim ** (1.0 / n_total))
    for cand in (d - 1, d, d + 1):
        if cand >= 1 and cand**n_total == dim:
            return cand
    raise ValueError(f"matrix dimension {dim} is not a perfect {n_total}-th power")


def permutation_twirl_dense(
    x: np.ndarray, n_total: int, dense_cap: int = DENSE_DIM_CAP
) -> np.ndarray:
    """(1/N!) sum_pi P_pi X P_pi† over all N! subsystem permutations."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    if n_total > TWIRL_FACTORIAL_CAP:
        raise CapExceededError(
            f"twirl over {n_total}! permutations exceeds cap {TWIRL_FACTORIAL_CAP}!"
        )
    if x.shape[0] > dense_cap:
        raise CapExceededError(
            f"dense dimension {x.shape[0]} exceeds cap {dense_cap}"
        )
    d = _infer_local_dim(x.shape[0], n_total)
    t = _as_tensor(x, d, n_total)
    acc = np.zeros_like(t)
    count = 0
    for perm in itertools.permutations(range(n_total)):
        acc += _permutation_conjugate(t, perm, n_total)
        count += 1
    return (acc / count).reshape(x.shape)


def graceful_checks(
    sigma: DensityOperator,
    rho: DensityOperator,
    n: int,
    h: HermitianOperator,
    dense_cap: int = DENSE_DIM_CAP,
) -> GracefulReport:
    """Check the mixing map conserves energy and commutes with free dynamics.

    energy_residual = |tr(H_R R) - tr(H_R sigma(x)rho^n)| and
    commutation_residual = max |M[H_R, X] - [H_R, M X]|; both vanish because
    H_R is permutation invariant and M is a permutation average.
    """
    if not (sigma.dim == rho.dim == h.dim):
        raise DimensionMismatchError(
            f"dims sigma {sigma.dim}, rho {rho.dim}, H {h.dim} differ"
        )
    n_total = n + 1
    product = kron_all([sigma.entries] + [rho.entries] * n)
    r_matrix = symmetrized_state_dense(sigma, rho, n, dense_cap=dense_cap).matrix
    h_r = reservoir_hamiltonian(h, n_total, dense_cap=dense_cap).entries

    energy_residual = abs(
        np.trace(h_r @ r_matrix) - np.trace(h_r @ product)
    )

    twirled_x = permutation_twirl_dense(product, n_total, dense_cap=dense_cap)
    comm = h_r @ product - product @ h_r
    lhs = permutation_twirl_dense(comm, n_total, dense_cap=dense_cap)
    rhs = h_r @ twirled_x - twirled_x @ h_r
    commutation_residual = float(np.max(np.abs(lhs - rhs)))
    return GracefulReport(
        energy_residual=float(energy_residual),
        commutation_residual=commutation_residual,
    )


def _commutator_max(sigma: DensityOperator, rho: DensityOperator) -> float:
    c = sigma.entries @ rho.entries - rho.entries @ sigma.entries
    return float(np.max(np.abs(c)))


def simultaneous_classical_pair(
    sigma: DensityOperator,
    rho: DensityOperator,
    tol: float = COMMUTE_TOL,
) -> tuple:
    """Diagonalize a commuting pair in a joint eigenbasis.

    Returns (sigma_dist, rho_dist) as classical distributions. Degenerate
    rho-eigenvalue blocks are resolved by diagonalizing sigma within each
    block, so degeneracy in rho is handled exactly.
    """
    if sigma.dim != rho.dim:
        raise DimensionMismatchError(f"dims {sigma.dim} vs {rho.dim}")
    if _commutator_max(sigma, rho) > tol:
        raise InvalidStateError(
            f"[sigma, rho] exceeds {tol}: states do not commute"
        )
    rho_eigs, basis = np.linalg.eigh(rho.entries)
    sigma_in_basis = basis.conj().T @ sigma.entries @ basis

    sigma_probs = np.empty(sigma.dim)
    start = 0
    for stop in range(1, sigma.dim + 1):
        if stop < sigma.dim and rho_eigs[stop] - rho_eigs[stop - 1] < DEGENERACY_GAP:
            continue
        block = sigma_in_basis[start:stop, start:stop]
        if stop - start == 1:
            sigma_probs[start] = block[0, 0].real
        else:
            sigma_probs[start:stop] = np.linalg.eigvalsh(block)
        start = stop

    return (
        ClassicalDistribution(clamp_spectrum(sigma_probs)),
        ClassicalDistribution(clamp_spectrum(rho_eigs)),
    )


def _coerce_states(sigma: StateLike, rho: StateLike) -> tuple:
    s = sigma.as_density() if isinstance(sigma, ClassicalDistribution) else sigma
    r = rho.as_density() if isinstance(rho, ClassicalDistribution) else rho
    return s, r


def mixing_entropy(
    sigma: StateLike,
    rho: StateLike,
    n: int,
    method: str = "auto",
    dense_cap: int = DENSE_DIM_CAP,
    budget: int = TYPE_CLASS_BUDGET,
) -> MixingRecord:
    """S_mix[sigma|rho; n] = S[R] - n S[rho] - S[sigma], in nats.

    method 'dense' eigensolves the full d^(n+1) matrix; 'classical-exact'
    requires commuting states and enumerates type classes; 'auto' picks
    classical-exact when the states commute, else dense.
    """
    sigma_op, rho_op = _coerce_states(sigma, rho)
    if method not in ("dense", "classical-exact", "auto"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = (
            "classical-exact"
            if _commutator_max(sigma_op, rho_op) <= COMMUTE_TOL
            else "dense"
        )
    if method == "classical-exact":
        sigma_dist, rho_dist = simultaneous_classical_pair(sigma_op, rho_op)
        return classical_mixing_entropy_exact(sigma_dist, rho_dist, n, budget=budget)

    mixture = symmetrized_state_dense(sigma_op, rho_op, n, dense_cap=dense_cap)
    s_mix = (
        mixture.entropy()
        - n * von_neumann_entropy(rho_op)
        - von_neumann_entropy(sigma_op)
    )
    s_rel = relative_entropy(sigma_op, rho_op)
    return _record(n, s_mix, s_rel, "dense")


DECAY_MODELS = {
    "1/n": lambda n: 1.0 / n,
    "log(n)/n": lambda n: math.log(n) / n if n > 1 else 0.0,
}


def _fit_tail(records: Sequence[MixingRecord]) -> ExtrapolationSummary:
    """Least-squares fit of S_mix(n) = limit - a f(n) on the largest-n half."""
    ordered = sorted(records, key=lambda r: r.n)
    tail = ordered[-max(3, (len(ordered) + 1) // 2):]
    ns = np.array([r.n for r in tail], dtype=float)
    values = np.array([r.s_mix for r in tail])

    best = None
    for name, f in DECAY_MODELS.items():
        design = np.stack([np.ones_like(ns), -np.array([f(n) for n in ns])], axis=1)
        coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
        limit, a = float(coeffs[0]), float(coeffs[1])
        resid = float(np.sqrt(np.mean((design @ coeffs - values) ** 2)))
        if best is None or resid < best.residual:
            best = ExtrapolationSummary(
                model=name,
                a=a,
                limit=limit,
                residual=resid,
                final_gap=ordered[-1].gap,
            )
    return best


def convergence_sweep(
    sigma: StateLike,
    rho: StateLike,
    n_list: Sequence[int],
    method: str = "auto",
    dense_cap: int = DENSE_DIM_CAP,
    budget: int = TYPE_CLASS_BUDGET,
) -> tuple:
    """One MixingRecord per n plus a fitted extrapolation to n -> infinity.

    The decay model f(n) is chosen from {1/n, log(n)/n} by least squares on
    the largest half of the sweep; the choice is reported, never assumed.
    """
    if len(n_list) < 3:
        raise ValueError("extrapolation needs at least 3 sweep points")
    records = []
    for n in sorted(n_list):
        t0 = time.perf_counter()
        rec = mixing_entropy(
            sigma, rho, n, method=method, dense_cap=dense_cap, budget=budget
        )
        wall_ms = (time.perf_counter() - t0) * 1e3
        records.append(
            MixingRecord(
                n=rec.n,
                s_mix=rec.s_mix,
                s_rel=rec.s_rel,
                gap=rec.gap,
                method=rec.method,
                wall_time_ms=wall_ms,
            )
        )
    return records, _fit_tail(records)


def records_to_csv(records: Sequence[MixingRecord]) -> str:
    lines = [SWEEP_CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"
