"""
Wick calculus on truncated series: powers, power series, inverses, spectrum and the
letter derivations D_m.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from config import Config
from exceptions import DomainError, NotInvertible, RadiusViolation
from quantization import EmbeddingSpec, vage_constant
from series import NcSeries, Terms, expectation, norm_p, scale, wick_mul

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PowerSeriesSpec:
    """phi(z) = sum_{n<=K} phi_n z^n with declared radius of absolute convergence (None = entire)."""

    coeffs: Tuple[complex, ...]
    radius: Optional[float] = None

    def __post_init__(self):
        if not self.coeffs:
            raise DomainError("a power series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if self.radius is not None and not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius}")

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> "PowerSeriesSpec":
        return cls(coeffs=tuple(coeffs), radius=None)

    @classmethod
    def exponential(cls, K: int) -> "PowerSeriesSpec":
        return cls(coeffs=tuple(1.0 / math.factorial(n) for n in range(K + 1)), radius=None)

    @classmethod
    def geometric(cls, K: int) -> "PowerSeriesSpec":
        """1/(1-z), radius 1."""
        return cls(coeffs=(1.0,) * (K + 1), radius=1.0)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, z: complex) -> complex:
        total = 0j
        for c in reversed(self.coeffs):
            total = total * z + c
        return total


def _b2() -> float:
    return vage_constant(EmbeddingSpec.from_kondratiev(q=2, p=0))


def wick_pow(f: NcSeries, n: int, deterministic: bool = False) -> NcSeries:
    """n-fold Wick product of f with itself; f^0 is the unit."""
    if n < 0:
        raise DomainError(f"Wick power needs n >= 0, got {n}")
    result = NcSeries.unit(f.trunc)
    if n > f.trunc.max_len and expectation(f) == 0:
        # every term of f^n has length >= n
        return NcSeries.zero(f.trunc)
    base = f
    while n:
        if n & 1:
            result = wick_mul(result, base, deterministic)
        n >>= 1
        if n:
            base = wick_mul(base, base, deterministic)
    return result


def series_tail_indicator(phi: PowerSeriesSpec, c: complex) -> float:
    """|phi_K| |c|^K: size of the last retained scalar term."""
    return abs(phi.coeffs[-1]) * abs(c) ** phi.degree


def apply_series(phi: PowerSeriesSpec, f: NcSeries, force: bool = False, deterministic: bool = False) -> NcSeries:
    """
    phi(f) = sum_n phi_n f^n.

    With c = E[f] and f = c + g, E[g] = 0, the unit is central so
    f^n = sum_j C(n, j) c^{n-j} g^j, and g^j vanishes for j > max_len. The result is
    sum_{j<=L} psi_j g^j with psi_j = sum_{n=j}^{K} phi_n C(n, j) c^{n-j}, exact on every
    retained word for the declared coefficients.
    """
    c = expectation(f)
    if phi.radius is not None:
        limit = phi.radius / _b2()
        if not abs(c) < limit:
            message = f"|E[f]| = {abs(c):.6g} is not below R/B_2 = {limit:.6g}"
            if not force:
                raise RadiusViolation(message)
            logger.warning(f"{message}; continuing because the radius check was overridden")

    g = f - NcSeries.constant(c, f.trunc)
    top = min(f.trunc.max_len, phi.degree)
    psi = []
    for j in range(top + 1):
        psi.append(sum(phi.coeffs[n] * math.comb(n, j) * c ** (n - j) for n in range(j, phi.degree + 1)))
    logger.debug(f"apply_series: {top + 1} graded terms, scalar tail indicator {series_tail_indicator(phi, c):.3g}")

    result = NcSeries.zero(f.trunc)
    power = NcSeries.unit(f.trunc)
    for j in range(top + 1):
        if psi[j] != 0:
            result = result + scale(psi[j], power)
        if j < top:
            power = wick_mul(power, g, deterministic)
            if power.is_zero():
                break
    return result


def is_invertible(f: NcSeries, zero_tol: Optional[float] = None) -> bool:
    tol = Config.ZERO_EXPECTATION_TOL if zero_tol is None else zero_tol
    return abs(expectation(f)) >= tol


def wick_inverse(f: NcSeries, zero_tol: Optional[float] = None, deterministic: bool = False) -> NcSeries:
    """
    Two-sided Wick inverse E[f]^{-1} sum_{n<=L} (1 - f/E[f])^n.

    h = 1 - f/E[f] has zero expectation, so h^n lives on words of length >= n and the
    Neumann series stops at n = max_len.
    """
    c = expectation(f)
    if not is_invertible(f, zero_tol):
        raise NotInvertible(f"E[f] = {c} is zero: f has no Wick inverse")
    unit = NcSeries.unit(f.trunc)
    h = unit - scale(1.0 / c, f)
    total = unit
    term = unit
    for n in range(1, f.trunc.max_len + 1):
        term = wick_mul(term, h, deterministic)
        if term.is_zero():
            break
        total = total + term
    logger.debug(f"Wick inverse with {len(total)} terms")
    return scale(1.0 / c, total)


def spectrum(f: NcSeries) -> complex:
    """The spectrum of f is the singleton {E[f]}: f - lambda is invertible iff lambda != E[f]."""
    return expectation(f)


def derivation(m: int, f: NcSeries) -> NcSeries:
    """
    D_m e_w = sum over positions k with w_k = m of e_{w without position k}.

    A run z_m^a contributes a identical deletions, matching the run-length form
    with multiplier a.
    """
    if m < 1:
        raise DomainError(f"derivation index must be >= 1, got {m}")
    out: Terms = {}
    for w, c in f._terms.items():
        for k, letter in enumerate(w):
            if letter == m:
                key = w[:k] + w[k + 1:]
                out[key] = out.get(key, 0j) + c
    return NcSeries._closed(out, f.trunc)


def derivation_bound_check(m: int, f: NcSeries, p: int, q: int) -> Tuple[float, float]:
    """(||D_m f||_q^2, (2m)^p ||f||_p^2) for the Kondratiev weights; the first never exceeds the second."""
    if q < p + 3:
        raise DomainError(f"the derivation bound needs q >= p + 3, got p={p}, q={q}")
    lhs = norm_p(derivation(m, f), q) ** 2
    rhs = (2.0 * m) ** p * norm_p(f, p) ** 2
    return lhs, rhs


def power_bound_check(f: NcSeries, n: int, p: int) -> Tuple[float, float]:
    """(||f^n||_{p+2}, B_2^n ||f||_p^n)."""
    lhs = norm_p(wick_pow(f, n), p + 2)
    rhs = (_b2() * norm_p(f, p)) ** n
    return lhs, rhs
