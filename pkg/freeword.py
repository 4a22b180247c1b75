"""
Free monoid of words over the positive integers.

A word z_{i1} z_{i2} ... z_{im} is stored flat as its letter sequence (i1, ..., im);
the empty sequence is the monoid unit. Weight sequences (a_i) assign every letter a
real number a_i >= 1 and extend multiplicatively to words.
"""

import logging
import math
import operator
import sys
from dataclasses import dataclass, field
from itertools import groupby, product
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from exceptions import DomainError, Divergent, NotAPrefix, WeightOverflow

logger = logging.getLogger(__name__)

MAX_LETTER_VALUE = 2**32 - 1
LOG_FLOAT_MAX = math.log(sys.float_info.max)
LOG_FLOAT_MIN = math.log(sys.float_info.min)


class Word(tuple):
    """Immutable letter sequence; equal to any tuple with the same letters."""

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        checked = []
        for letter in letters:
            if isinstance(letter, bool):
                raise DomainError(f"letter must be an integer, got {letter!r}")
            try:
                value = operator.index(letter)
            except TypeError:
                raise DomainError(f"letter must be an integer, got {letter!r}") from None
            if value < 1 or value > MAX_LETTER_VALUE:
                raise DomainError(f"letter {value} outside 1..{MAX_LETTER_VALUE}")
            checked.append(value)
        return tuple.__new__(cls, checked)

    @classmethod
    def _trusted(cls, letters: Tuple[int, ...]) -> "Word":
        return tuple.__new__(cls, letters)

    @classmethod
    def from_run_length(cls, runs: Iterable[Tuple[int, int]]) -> "Word":
        """Build z_{i1}^{a1} z_{i2}^{a2} ... from (letter, exponent) pairs."""
        letters: List[int] = []
        for letter, exponent in runs:
            if exponent < 0:
                raise DomainError(f"negative exponent {exponent} for letter {letter}")
            letters.extend([letter] * exponent)
        return cls(letters)

    @property
    def letters(self) -> Tuple[int, ...]:
        return tuple(self)

    @property
    def length(self) -> int:
        return len(self)

    def run_length(self) -> List[Tuple[int, int]]:
        """Maximal runs of equal letters as (letter, exponent) pairs."""
        return [(letter, len(list(run))) for letter, run in groupby(self)]

    def to_list(self) -> List[int]:
        return list(self)

    def __repr__(self) -> str:
        return f"Word({list(self)})"


EMPTY = Word()


def graded_key(w: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    """Sort key: length first, then lexicographic on letters."""
    return (len(w), tuple(w))


def concat(u: Sequence[int], v: Sequence[int]) -> Word:
    return Word._trusted(tuple(u) + tuple(v))


def is_prefix(beta: Sequence[int], alpha: Sequence[int]) -> bool:
    """True iff beta is an initial segment of alpha (beta <= alpha in the prefix order)."""
    n = len(beta)
    return n <= len(alpha) and tuple(alpha[:n]) == tuple(beta)


def left_quotient(beta: Sequence[int], alpha: Sequence[int]) -> Word:
    """The unique gamma with alpha = beta gamma."""
    if not is_prefix(beta, alpha):
        raise NotAPrefix(f"{list(beta)} is not a prefix of {list(alpha)}")
    return Word._trusted(tuple(alpha[len(beta):]))


def factorizations(gamma: Sequence[int]) -> List[Tuple[Word, Word]]:
    """All (beta, delta) with beta delta = gamma, ordered by len(beta)."""
    letters = tuple(gamma)
    return [
        (Word._trusted(letters[:k]), Word._trusted(letters[k:]))
        for k in range(len(letters) + 1)
    ]


def enumerate_words(max_letter: int, max_len: int) -> Iterator[Word]:
    """Every word over {1..max_letter} of length <= max_len, in graded order."""
    if max_letter < 1 or max_len < 0:
        return
    alphabet = range(1, max_letter + 1)
    for length in range(max_len + 1):
        for letters in product(alphabet, repeat=length):
            yield Word._trusted(letters)


def power_tail_sum(n: int, s: float) -> float:
    """
    Euler-Maclaurin estimate of sum_{k>n} k^{-s} for s > 1, n >= 1.

    Carried through the n^{-s-3} correction; the next omitted term is of order
    s(s+1)(s+2)(s+3)(s+4) n^{-s-5} / 30240.
    """
    if n < 1:
        raise DomainError(f"tail start must be >= 1, got {n}")
    if s <= 1:
        raise Divergent(f"sum of k^-s diverges for s={s}")
    nf = float(n)
    return (
        nf ** (1.0 - s) / (s - 1.0)
        - 0.5 * nf ** (-s)
        + s * nf ** (-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf ** (-s - 3.0) / 720.0
    )


@dataclass(frozen=True)
class WeightSequence:
    """
    Letter weights a_i >= 1 with a declared nuclearity index d, sum_i a_i^{-d} < 1.

    tail_sum_fn(n, s) returns sum_{i>n} a_i^{-s}; without it letter sums are plain
    partial sums. summable_above is the exponent threshold past which
    sum_i a_i^{-s} converges. log_weight_fn, when given, returns log a_i without
    forming a_i, so fast-growing weights never overflow. Weights are taken as
    nondecreasing: partial sums stop at the first letter whose term underflows.
    """

    weight_fn: Callable[[int], float]
    index_d: int
    tail_sum_fn: Optional[Callable[[int, float], float]] = None
    summable_above: float = 0.0
    name: str = "custom"
    partial_terms: int = 1000
    log_weight_fn: Optional[Callable[[int], float]] = None
    _log_cache: Dict[int, float] = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.index_d < 1:
            raise DomainError(f"index_d must be a positive integer, got {self.index_d}")
        self.check_index()

    @classmethod
    def kondratiev(cls) -> "WeightSequence":
        """a_i = 2i, d = 2."""
        return cls(
            weight_fn=lambda i: 2.0 * i,
            index_d=2,
            tail_sum_fn=lambda n, s: 2.0 ** (-s) * power_tail_sum(n, s),
            summable_above=1.0,
            name="kondratiev",
            log_weight_fn=lambda i: math.log(2.0 * i),
        )

    @classmethod
    def geometric(cls, base: float, index_d: int = 1) -> "WeightSequence":
        """a_i = base^i."""
        if base <= 1:
            raise DomainError(f"geometric weights need base > 1, got {base}")
        log_base = math.log(base)
        return cls(
            weight_fn=lambda i: math.exp(i * log_base),
            index_d=index_d,
            tail_sum_fn=lambda n, s: math.exp(-(n + 1) * s * log_base) / -math.expm1(-s * log_base),
            summable_above=0.0,
            name=f"geometric({base})",
            log_weight_fn=lambda i: i * log_base,
        )

    @classmethod
    def power(cls, scale: float, exponent: float, index_d: int) -> "WeightSequence":
        """a_i = scale * i^exponent."""
        if scale < 1 or exponent <= 0:
            raise DomainError(f"power weights need scale >= 1 and exponent > 0, got {scale}, {exponent}")
        return cls(
            weight_fn=lambda i: scale * float(i) ** exponent,
            index_d=index_d,
            tail_sum_fn=lambda n, s: scale ** (-s) * power_tail_sum(n, s * exponent),
            summable_above=1.0 / exponent,
            name=f"power({scale}, {exponent})",
            log_weight_fn=lambda i: math.log(scale) + exponent * math.log(i),
        )

    def a(self, i: int) -> float:
        if i < 1:
            raise DomainError(f"letters start at 1, got {i}")
        try:
            value = float(self.weight_fn(i))
        except OverflowError as exc:
            raise WeightOverflow(f"weight a_{i} overflows for weights {self.name}; use log_a") from exc
        if math.isinf(value):
            raise WeightOverflow(f"weight a_{i} overflows for weights {self.name}; use log_a")
        if not value >= 1.0:
            raise DomainError(f"weight a_{i} = {value} is below 1")
        return value

    def log_a(self, i: int) -> float:
        cached = self._log_cache.get(i)
        if cached is None:
            if self.log_weight_fn is None:
                cached = math.log(self.a(i))
            else:
                if i < 1:
                    raise DomainError(f"letters start at 1, got {i}")
                cached = float(self.log_weight_fn(i))
                if not cached >= 0.0:
                    raise DomainError(f"weight a_{i} = exp({cached}) is below 1")
            self._log_cache[i] = cached
        return cached

    def letter_sum(self, s: float) -> float:
        """sum_i a_i^{-s}."""
        if s <= self.summable_above:
            raise Divergent(f"sum of a_i^-{s} diverges for weights {self.name}")
        terms = []
        n = 0
        for i in range(1, self.partial_terms + 1):
            exponent = -s * self.log_a(i)
            if exponent < LOG_FLOAT_MIN:
                break
            terms.append(math.exp(exponent))
            n = i
        head = math.fsum(terms)
        if self.tail_sum_fn is None:
            logger.warning(f"No tail bound declared for weights {self.name}; using {n} partial terms")
            return head
        return head + self.tail_sum_fn(n, s)

    def check_index(self) -> float:
        total = self.letter_sum(self.index_d)
        if not total < 1.0:
            raise DomainError(
                f"declared index d={self.index_d} fails: sum a_i^-d = {total} >= 1 for weights {self.name}"
            )
        return total

    def smallest_index(self, max_d: int = 64) -> int:
        """Smallest integer d with sum_i a_i^{-d} < 1 (needs a declared tail)."""
        if self.tail_sum_fn is None:
            raise DomainError("index search needs a declared letter-tail bound")
        for d in range(1, max_d + 1):
            if d <= self.summable_above:
                continue
            if self.letter_sum(d) < 1.0:
                return d
        raise Divergent(f"no index d <= {max_d} for weights {self.name}")


KONDRATIEV = WeightSequence.kondratiev()


def log_weight(w: Sequence[int], a: WeightSequence = KONDRATIEV) -> float:
    """log of prod_l a_l over the letters of w."""
    return math.fsum(a.log_a(letter) for letter in w)


def weight(w: Sequence[int], a: WeightSequence = KONDRATIEV) -> float:
    """prod_l a_l over all letters of w (with multiplicity); 1 for the empty word."""
    value = math.prod(a.a(letter) for letter in w)
    if math.isinf(value):
        raise WeightOverflow(f"weight of a length-{len(w)} word overflows; use log_weight")
    return value
