"""
Hilbert-Schmidt constants of the weighted embeddings and their second quantizations.

For weights (a_n) the embedding T_{q,p}: K_q -> K_p has singular values a_n^{-(q-p)/2},
so ||T_{q,p}||_HS^2 = sum_n a_n^{-(q-p)}. Its second quantization acts on the word basis
diagonally and ||Gamma(T_{q,p})||_HS^2 = sum over all words of b_w^{-(q-p)}
= 1 / (1 - ||T_{q,p}||_HS^2) whenever the right side is finite. That constant, B_{q-p},
bounds the Wick product in both orders.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from config import Config
from exceptions import DomainError, Divergent, NotContractive
from freeword import KONDRATIEV, WeightSequence, power_tail_sum
from series import NcSeries, norm_p, wick_mul

logger = logging.getLogger(__name__)

Lambdas = Union[Mapping[int, float], Callable[[int], float]]


@dataclass(frozen=True)
class EmbeddingSpec:
    """The embedding T_{q,p}: K_q -> K_p for weights a, q > p."""

    a: WeightSequence
    q: int
    p: int

    def __post_init__(self):
        if self.q <= self.p:
            raise DomainError(f"embedding needs q > p, got q={self.q}, p={self.p}")

    @classmethod
    def from_kondratiev(cls, q: int, p: int) -> "EmbeddingSpec":
        return cls(a=KONDRATIEV, q=q, p=p)

    @property
    def gap(self) -> int:
        return self.q - self.p

    def singular_value(self, n: int) -> float:
        return math.exp(-self.gap / 2.0 * self.a.log_a(n))


ZETA_TAIL_TOL = 1e-13


def zeta_terms(s: float, requested: int) -> int:
    """
    Smallest N >= requested whose next Euler-Maclaurin term
    s(s+1)(s+2)(s+3)(s+4) N^{-s-5} / 30240 is below ZETA_TAIL_TOL.
    """
    rising = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0)
    needed = math.ceil((rising / (30240.0 * ZETA_TAIL_TOL)) ** (1.0 / (s + 5.0)))
    return max(requested, needed, 1)


def zeta(s: float, n_terms: Optional[int] = None) -> float:
    """Riemann zeta for real s > 1: direct sum of n_terms terms plus Euler-Maclaurin tail."""
    if s < 1.0 + 1e-9:
        raise DomainError(f"zeta(s) needs s > 1, got {s}")
    requested = Config.ZETA_TERMS if n_terms is None else n_terms
    n = zeta_terms(s, requested)
    if n != requested:
        logger.debug(f"zeta({s}): raising direct terms from {requested} to {n} to keep the tail error below {ZETA_TAIL_TOL}")
    head = math.fsum(float(k) ** (-s) for k in range(1, n + 1))
    return head + power_tail_sum(n, s)


def letter_sum_kondratiev(s: float) -> float:
    """sum_n (2n)^{-s} = 2^{-s} zeta(s)."""
    if s <= 1:
        raise Divergent(f"sum of (2n)^-{s} diverges")
    return 2.0 ** (-s) * zeta(s)


def _letter_sum(a: WeightSequence, s: float) -> float:
    if s <= a.summable_above:
        raise Divergent(f"sum of a_n^-{s} diverges for weights {a.name}")
    if a is KONDRATIEV:
        return letter_sum_kondratiev(s)
    return a.letter_sum(s)


def hs_norm_embedding(spec: EmbeddingSpec) -> float:
    """||T_{q,p}||_HS = sqrt(sum_n a_n^{-(q-p)})."""
    return math.sqrt(_letter_sum(spec.a, spec.gap))


def vage_constant(spec: EmbeddingSpec) -> float:
    """B_{q-p} = ||Gamma(T_{q,p})||_HS = (1 - ||T_{q,p}||_HS^2)^{-1/2}."""
    try:
        t = hs_norm_embedding(spec) ** 2
    except Divergent as exc:
        raise NotContractive(f"T_{{q,p}} is not Hilbert-Schmidt for q-p={spec.gap}") from exc
    if t >= 1.0:
        raise NotContractive(f"||T_{{q,p}}||_HS^2 = {t} >= 1 for q-p={spec.gap}")
    constant = 1.0 / math.sqrt(1.0 - t)
    logger.debug(f"B_{spec.gap} = {constant:.15g} for weights {spec.a.name}")
    return constant


def monoid_weight_sum(a: WeightSequence, s: int, max_len: int) -> float:
    """sum over words of length <= max_len of b_w^{-s}, i.e. sum_{n<=L} t^n with t = sum_i a_i^{-s}."""
    t = _letter_sum(a, s)
    if t >= 1.0:
        raise Divergent(f"letter sum {t} >= 1: the monoid sum diverges")
    return math.fsum(t**n for n in range(max_len + 1))


def vage_tail_bound(t: float, max_len: int) -> float:
    """sum_{n > max_len} t^n."""
    if not 0.0 <= t < 1.0:
        raise Divergent(f"geometric ratio {t} outside [0, 1)")
    return t ** (max_len + 1) / (1.0 - t)


def truncated_weight_sum(a: WeightSequence, s: float, max_letter: int, max_len: int) -> float:
    """sum of b_w^{-s} over words with letters <= max_letter and length <= max_len."""
    t = math.fsum(math.exp(-s * a.log_a(i)) for i in range(1, max_letter + 1))
    return math.fsum(t**n for n in range(max_len + 1))


def _lambda(lambdas: Lambdas, letter: int) -> float:
    value = lambdas(letter) if callable(lambdas) else lambdas.get(letter, 0.0)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"singular value lambda_{letter} = {value} outside [0, 1]")
    return float(value)


def second_quantization_image(lambdas: Lambdas, w: Sequence[int]) -> float:
    """lambda^w = prod over the letters of w of lambda_letter: the diagonal entry of Gamma(T) at e_w."""
    return math.prod(_lambda(lambdas, letter) for letter in w)


def second_quantization_apply(lambdas: Lambdas, f: NcSeries) -> NcSeries:
    """Gamma(T) f = sum_w lambda^w f_w e_w."""
    return NcSeries._closed(
        {w: c * second_quantization_image(lambdas, w) for w, c in f._terms.items()}, f.trunc
    )


def second_quantization_hs_norm(values: Iterable[float]) -> float:
    """||Gamma(T)||_HS = (1 - sum lambda_n^2)^{-1/2} for singular values lambda_n."""
    t = math.fsum(v * v for v in values)
    if t >= 1.0:
        raise NotContractive(f"||T||_HS^2 = {t} >= 1: Gamma(T) is not Hilbert-Schmidt")
    return 1.0 / math.sqrt(1.0 - t)


def graded_hs_sum(values: Iterable[float], max_len: int) -> float:
    """sum_{n <= max_len} ||T||_HS^{2n}."""
    t = math.fsum(v * v for v in values)
    return math.fsum(t**n for n in range(max_len + 1))


@dataclass(frozen=True)
class VageAudit:
    left_ratio: float
    right_ratio: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.left_ratio <= self.bound and self.right_ratio <= self.bound


def vage_bound(f: NcSeries, g: NcSeries, p: int, q: int, a: WeightSequence = KONDRATIEV) -> VageAudit:
    """
    Ratios ||f(x)g||_q / (||f||_p ||g||_q) and ||g(x)f||_q / (||f||_p ||g||_q) against B_{q-p}.
    """
    if q - p < a.index_d:
        raise DomainError(f"the product bound needs q >= p + {a.index_d}, got p={p}, q={q}")
    bound = vage_constant(EmbeddingSpec(a=a, q=q, p=p))
    denominator = norm_p(f, p, a) * norm_p(g, q, a)
    if denominator == 0.0:
        return VageAudit(0.0, 0.0, bound)
    left = norm_p(wick_mul(f, g), q, a) / denominator
    right = norm_p(wick_mul(g, f), q, a) / denominator
    return VageAudit(left, right, bound)
