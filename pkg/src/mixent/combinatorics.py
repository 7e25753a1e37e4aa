"""Typical-string counting, the insertion factor, and the averaged entropy increase.

Numerically verifies the classical chain: multinomial string counting gives the
Shannon entropy per symbol, inserting one extra symbol multiplies the count by
(n+1)/(n rho_a + 1) -> 1/rho_a, and averaging the log-increase over sigma gives
exactly the classical relative entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfiniteRelativeEntropyError
from .states import ClassicalDistribution, shannon_entropy


@dataclass(frozen=True)
class TypeVector:
    """Symbol counts m_1..m_d of a length-N string over a d-letter alphabet."""

    counts: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.counts)
        if len(c) == 0 or any(x < 0 for x in c):
            raise ValueError(f"invalid type vector {self.counts}")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def dim(self) -> int:
        return len(self.counts)


def log_multinomial(m: TypeVector) -> float:
    """ln(N! / prod m_a!) via log-gamma, in nats."""
    n = m.total
    return math.lgamma(n + 1) - math.fsum(math.lgamma(x + 1) for x in m.counts)


def round_counts(dist: ClassicalDistribution, n: int) -> TypeVector:
    """Largest-remainder rounding of n*p_a to a type vector summing to n.

    Deterministic: leftover units go to the largest fractional remainders,
    ties broken by lower index.
    """
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    raw = n * dist.p
    floors = np.floor(raw).astype(int)
    leftover = n - int(floors.sum())
    remainders = raw - floors
    order = np.lexsort((np.arange(dist.dim), -remainders))
    for idx in order[:leftover]:
        floors[idx] += 1
    return TypeVector(tuple(int(x) for x in floors))


@dataclass(frozen=True)
class TypicalityCheck:
    """Per-symbol multinomial entropy of the rounded typical class vs S[rho]."""

    n: int
    lhs_per_symbol: float
    s_rho: float
    deficit: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "lhs_per_symbol": self.lhs_per_symbol,
            "S_rho": self.s_rho,
            "deficit": self.deficit,
        }


def typicality_entropy_check(rho: ClassicalDistribution, n: int) -> TypicalityCheck:
    """Compare ln(multinomial of rounded counts)/n against S[rho].

    The deficit S[rho] - lhs is positive and O(ln n / n): the typical class
    alone already counts ~ e^{n S[rho]} strings.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    counts = round_counts(rho, n)
    lhs = log_multinomial(counts) / n
    s_rho = shannon_entropy(rho)
    return TypicalityCheck(n=n, lhs_per_symbol=lhs, s_rho=s_rho, deficit=s_rho - lhs)


@dataclass(frozen=True)
class InsertionFactor:
    """Count growth from inserting one symbol a into a typical string."""

    exact: float
    limit: float
    rel_err: float


def insertion_factor(n: int, rho_a: float) -> InsertionFactor:
    """Exact factor (n+1)/(round(n rho_a) + 1) against its large-n limit 1/rho_a."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not 0.0 < rho_a <= 1.0:
        raise InfiniteRelativeEntropyError(
            f"insertion factor diverges for rho_a = {rho_a}"
        )
    m = round(n * rho_a)
    exact = (n + 1) / (m + 1)
    limit = 1.0 / rho_a
    return InsertionFactor(exact=exact, limit=limit, rel_err=abs(exact - limit) * rho_a)


def classical_mixing_increase_formula(
    sigma: ClassicalDistribution, rho: ClassicalDistribution
) -> float:
    """Average entropy increase -sum_a sigma_a ln rho_a - S[sigma], in nats.

    This is the classical relative entropy S[sigma|rho]; it must match the
    operator-level relative entropy on diagonal embeddings to 1e-12.
    """
    if sigma.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {sigma.dim} vs {rho.dim}")
    support = sigma.p > 0.0
    if np.any(rho.p[support] <= 0.0):
        raise InfiniteRelativeEntropyError(
            "support of sigma is not contained in support of rho"
        )
    cross = -math.fsum(sigma.p[support] * np.log(rho.p[support]))
    return cross - shannon_entropy(sigma)
