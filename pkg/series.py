"""
Sparse truncated elements of the non-commutative Kondratiev space.

An NcSeries is a finitely supported map word -> complex coefficient together with a
TruncationPolicy. Every closed operation is exact on words of length <= max_len and
drops longer words: word length is additive under concatenation, so the degree <= L
part of a product only depends on the degree <= L parts of its factors.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from exceptions import DomainError, TermLimitExceeded, TruncationViolation, WeightOverflow
from freeword import KONDRATIEV, LOG_FLOAT_MAX, WeightSequence, Word, graded_key, log_weight

logger = logging.getLogger(__name__)

Terms = Dict[Tuple[int, ...], complex]


@dataclass(frozen=True)
class TruncationPolicy:
    """Maximum word length, optional maximum letter and term count, pruning threshold."""

    max_len: int
    max_letter: Optional[int] = None
    drop_tol: float = 0.0
    max_terms: Optional[int] = None

    def __post_init__(self):
        if self.max_len < 0:
            raise DomainError(f"max_len must be >= 0, got {self.max_len}")
        if self.max_letter is not None and self.max_letter < 1:
            raise DomainError(f"max_letter must be >= 1, got {self.max_letter}")
        if self.drop_tol < 0:
            raise DomainError(f"drop_tol must be >= 0, got {self.drop_tol}")
        if self.max_terms is not None and self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")

    def admits(self, word: Sequence[int]) -> bool:
        if len(word) > self.max_len:
            return False
        return self.max_letter is None or not word or max(word) <= self.max_letter

    def coarsen(self, other: "TruncationPolicy") -> "TruncationPolicy":
        """The coarser of two policies: every bound takes the tighter value."""
        if other == self:
            return self
        return TruncationPolicy(
            max_len=min(self.max_len, other.max_len),
            max_letter=_min_optional(self.max_letter, other.max_letter),
            drop_tol=max(self.drop_tol, other.drop_tol),
            max_terms=_min_optional(self.max_terms, other.max_terms),
        )


def _min_optional(x: Optional[int], y: Optional[int]) -> Optional[int]:
    if x is None:
        return y
    if y is None:
        return x
    return min(x, y)


class NcSeries:
    """Immutable sparse series sum_w f_w e_w; zero coefficients are never stored."""

    __slots__ = ("_terms", "trunc")

    def __init__(self, terms: Terms, trunc: TruncationPolicy):
        # Callers hand over ownership of `terms`; use from_terms for untrusted input.
        self._terms = terms
        self.trunc = trunc

    @classmethod
    def _closed(cls, terms: Terms, trunc: TruncationPolicy, check_letters: bool = False) -> "NcSeries":
        """Prune, optionally drop words with out-of-range letters, enforce the term cap."""
        tol = trunc.drop_tol
        if tol > 0:
            kept = {w: c for w, c in terms.items() if abs(c) >= tol}
        else:
            kept = {w: c for w, c in terms.items() if c != 0}
        if check_letters and trunc.max_letter is not None:
            kept = {w: c for w, c in kept.items() if not w or max(w) <= trunc.max_letter}
        if trunc.max_terms is not None and len(kept) > trunc.max_terms:
            raise TermLimitExceeded(f"{len(kept)} terms exceed the cap of {trunc.max_terms}")
        return cls(kept, trunc)

    # Construction

    @classmethod
    def from_terms(
        cls,
        pairs: Iterable[Tuple[Sequence[int], complex]],
        trunc: TruncationPolicy,
        strict: bool = True,
    ) -> "NcSeries":
        """Sum coefficients of repeated words; reject (strict) or drop words outside trunc."""
        terms: Terms = {}
        dropped = 0
        for letters, coeff in pairs:
            word = tuple(Word(letters))
            if not trunc.admits(word):
                if strict:
                    raise TruncationViolation(
                        f"word {list(word)} violates truncation max_len={trunc.max_len}, "
                        f"max_letter={trunc.max_letter}"
                    )
                dropped += 1
                continue
            terms[word] = terms.get(word, 0j) + complex(coeff)
        if dropped:
            logger.debug(f"Dropped {dropped} words outside the truncation")
        return cls._closed(terms, trunc)

    @classmethod
    def zero(cls, trunc: TruncationPolicy) -> "NcSeries":
        return cls({}, trunc)

    @classmethod
    def unit(cls, trunc: TruncationPolicy) -> "NcSeries":
        return cls.constant(1.0, trunc)

    @classmethod
    def constant(cls, c: complex, trunc: TruncationPolicy) -> "NcSeries":
        return cls._closed({(): complex(c)}, trunc)

    @classmethod
    def basis(cls, word: Sequence[int], trunc: TruncationPolicy, coeff: complex = 1.0) -> "NcSeries":
        """coeff * e_word."""
        return cls.from_terms([(word, coeff)], trunc)

    # Access

    def coeff(self, word: Sequence[int]) -> complex:
        return self._terms.get(tuple(word), 0j)

    def items(self) -> List[Tuple[Word, complex]]:
        """Terms in graded lexicographic order."""
        return [(Word._trusted(w), self._terms[w]) for w in sorted(self._terms, key=graded_key)]

    def support(self) -> List[Word]:
        return [w for w, _ in self.items()]

    def max_length(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def letters(self) -> List[int]:
        return sorted({letter for w in self._terms for letter in w})

    def is_zero(self) -> bool:
        return not self._terms

    def modulus(self) -> "NcSeries":
        """Series of coefficient moduli |f_w|."""
        return NcSeries({w: complex(abs(c)) for w, c in self._terms.items()}, self.trunc)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Tuple[Word, complex]]:
        return iter(self.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, NcSeries):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    def __repr__(self) -> str:
        shown = ", ".join(f"{list(w)}: {c:.6g}" for w, c in self.items()[:8])
        more = "" if len(self) <= 8 else f", ... ({len(self)} terms)"
        return f"NcSeries({{{shown}{more}}}, max_len={self.trunc.max_len})"

    # Operators

    def __add__(self, other: "NcSeries") -> "NcSeries":
        return add(self, other)

    def __sub__(self, other: "NcSeries") -> "NcSeries":
        return sub(self, other)

    def __neg__(self) -> "NcSeries":
        return scale(-1.0, self)

    def __rmul__(self, c: complex) -> "NcSeries":
        if isinstance(c, NcSeries):
            return NotImplemented
        return scale(c, self)

    def __mul__(self, c: complex) -> "NcSeries":
        if isinstance(c, NcSeries):
            return NotImplemented
        return scale(c, self)

    def __matmul__(self, other: "NcSeries") -> "NcSeries":
        return wick_mul(self, other)


def retruncate(f: NcSeries, trunc: TruncationPolicy) -> NcSeries:
    """Keep only the words admitted by trunc."""
    return NcSeries._closed({w: c for w, c in f._terms.items() if trunc.admits(w)}, trunc)


def add(f: NcSeries, g: NcSeries) -> NcSeries:
    trunc = f.trunc.coarsen(g.trunc)
    terms: Terms = {}
    for source in (f, g):
        for w, c in source._terms.items():
            if len(w) <= trunc.max_len:
                terms[w] = terms.get(w, 0j) + c
    return NcSeries._closed(terms, trunc, check_letters=True)


def sub(f: NcSeries, g: NcSeries) -> NcSeries:
    return add(f, scale(-1.0, g))


def scale(c: complex, f: NcSeries) -> NcSeries:
    c = complex(c)
    return NcSeries._closed({w: c * v for w, v in f._terms.items()}, f.trunc)


def wick_mul(f: NcSeries, g: NcSeries, deterministic: bool = False) -> NcSeries:
    """
    (f (x) g)_gamma = sum over gamma = beta delta of f_beta g_delta.

    Visits term pairs and emits concatenations; words longer than the result's
    max_len are discarded. In deterministic mode pairs are visited in graded order.
    """
    trunc = f.trunc.coarsen(g.trunc)
    max_len = trunc.max_len
    left = sorted(f._terms.items(), key=lambda t: graded_key(t[0])) if deterministic else f._terms.items()
    buckets: List[List[Tuple[Tuple[int, ...], complex]]] = [[] for _ in range(max_len + 1)]
    right = sorted(g._terms.items(), key=lambda t: graded_key(t[0])) if deterministic else g._terms.items()
    for w, c in right:
        if len(w) <= max_len:
            buckets[len(w)].append((w, c))

    out: Terms = {}
    for beta, fb in left:
        room = max_len - len(beta)
        if room < 0:
            continue
        for length in range(room + 1):
            for delta, gd in buckets[length]:
                key = beta + delta
                out[key] = out.get(key, 0j) + fb * gd
    check_letters = trunc.max_letter is not None and (
        f.trunc.max_letter != trunc.max_letter or g.trunc.max_letter != trunc.max_letter
    )
    return NcSeries._closed(out, trunc, check_letters=check_letters)


def expectation(f: NcSeries) -> complex:
    """Generalized expectation E[f]: the empty-word coefficient."""
    return f._terms.get((), 0j)


def norm_p(f: NcSeries, p: int, a: WeightSequence = KONDRATIEV) -> float:
    """
    ||f||_p = sqrt(sum_w |f_w|^2 weight(w)^{-p}).

    Positive p is the distribution side (weights damp long words), negative p the
    test-function side; p = 0 is the plain l2 norm. Evaluated as a log-sum-exp.
    """
    if not f._terms:
        return 0.0
    exponents = [2.0 * math.log(abs(c)) - p * log_weight(w, a) for w, c in f._terms.items()]
    top = max(exponents)
    log_sq = top + math.log(math.fsum(math.exp(e - top) for e in exponents))
    log_norm = 0.5 * log_sq
    if log_norm > LOG_FLOAT_MAX:
        raise WeightOverflow(f"||f||_{p} is not representable (log-norm {log_norm:.1f})")
    return math.exp(log_norm)


def allclose(f: NcSeries, g: NcSeries, atol: Optional[float] = None, rtol: Optional[float] = None) -> bool:
    """Coefficient-wise |x-y| <= atol + rtol*max(|x|,|y|) over the union of supports."""
    atol = Config.ATOL if atol is None else atol
    rtol = Config.RTOL if rtol is None else rtol
    for w in set(f._terms) | set(g._terms):
        x = f._terms.get(w, 0j)
        y = g._terms.get(w, 0j)
        if abs(x - y) > atol + rtol * max(abs(x), abs(y)):
            return False
    return True


def max_coeff_error(f: NcSeries, g: NcSeries, scale_by: Optional[NcSeries] = None) -> float:
    """
    max_w |f_w - g_w| / max(1, s_w) where s_w comes from scale_by (default max(|f_w|,|g_w|)).
    """
    worst = 0.0
    for w in set(f._terms) | set(g._terms):
        x = f._terms.get(w, 0j)
        y = g._terms.get(w, 0j)
        s = abs(scale_by._terms.get(w, 0j)) if scale_by is not None else max(abs(x), abs(y))
        worst = max(worst, abs(x - y) / max(1.0, s))
    return worst


def random_series(
    rng: np.random.Generator,
    trunc: TruncationPolicy,
    max_terms: int = 12,
    max_letter: Optional[int] = None,
    constant: Optional[complex] = None,
) -> NcSeries:
    """
    Random sparse series: term count uniform in 1..max_terms, word length uniform in
    0..max_len, letters uniform in 1..max_letter, standard complex Gaussian coefficients.
    If constant is given, the empty-word coefficient is overwritten with it.
    """
    letter_cap = max_letter or trunc.max_letter or Config.MAX_LETTER
    n_terms = int(rng.integers(1, max_terms + 1))
    pairs = []
    for _ in range(n_terms):
        length = int(rng.integers(0, trunc.max_len + 1))
        word = tuple(int(x) for x in rng.integers(1, letter_cap + 1, size=length))
        re, im = rng.standard_normal(2) / math.sqrt(2.0)
        pairs.append((word, complex(re, im)))
    f = NcSeries.from_terms(pairs, trunc)
    if constant is None:
        return f
    terms = dict(f._terms)
    terms[()] = complex(constant)
    return NcSeries._closed(terms, trunc)


def white_noise_blowup_demo(n: int) -> List[float]:
    """
    ||iota(f_N) (x) iota(g_N)||_0 for N = 1..n, where iota places an l2 sequence on the
    words z_1^k and f_k = g_k = k^{-1/2} / log(k+1).

    The sequence is square-summable but its self-convolution is not (its entries decay
    like 1/log^2), so the white-noise norms of the products grow without bound.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    coefficients = [1.0 / (math.sqrt(k) * math.log(k + 1.0)) for k in range(1, n + 1)]
    norms = []
    for size in range(1, n + 1):
        trunc = TruncationPolicy(max_len=2 * size, max_letter=1)
        embedded = NcSeries.from_terms([((1,) * k, coefficients[k - 1]) for k in range(1, size + 1)], trunc)
        norms.append(norm_p(wick_mul(embedded, embedded), 0))
    logger.debug(f"Blow-up demo final norm {norms[-1]:.6g} after {n} truncations")
    return norms
