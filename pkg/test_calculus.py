import logging
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from calculus import (
    PowerSeriesSpec,
    apply_series,
    derivation,
    derivation_bound_check,
    is_invertible,
    power_bound_check,
    series_tail_indicator,
    spectrum,
    wick_inverse,
    wick_pow,
)
from conftest import series
from exceptions import DomainError, NotInvertible, RadiusViolation
from freeword import Word, enumerate_words
from series import NcSeries, TruncationPolicy, allclose, expectation, max_coeff_error, random_series, retruncate, wick_mul

L5 = TruncationPolicy(max_len=5)


def run_length_derivation(m: int, f: NcSeries) -> NcSeries:
    """D_m through the run-length form: a run z_m^a yields a times the word with that run shortened."""
    out = {}
    for w, c in f._terms.items():
        runs = Word(w).run_length()
        for j, (letter, exponent) in enumerate(runs):
            if letter == m:
                shortened = runs[:j] + [(letter, exponent - 1)] + runs[j + 1:]
                key = tuple(Word.from_run_length(shortened))
                out[key] = out.get(key, 0j) + exponent * c
    return NcSeries._closed(out, f.trunc)


def test_wick_pow_examples():
    f = NcSeries.from_terms([([], 2), ([1], 1)], L5)
    assert wick_pow(f, 0) == NcSeries.unit(L5)
    assert wick_pow(NcSeries.basis([1], L5), 3) == NcSeries.basis([1, 1, 1], L5)
    assert wick_pow(NcSeries.basis([1], L5), 6).is_zero()
    assert wick_pow(f, 3) == wick_mul(wick_mul(f, f), f)
    with pytest.raises(DomainError):
        wick_pow(f, -1)


def test_power_series_spec():
    assert PowerSeriesSpec.exponential(3).coeffs == (1, 1, 0.5, 1 / 6)
    assert PowerSeriesSpec.geometric(2).radius == 1.0
    assert PowerSeriesSpec.polynomial([1, 2]).evaluate(3) == 7
    with pytest.raises(DomainError):
        PowerSeriesSpec(coeffs=(1,), radius=0.0)
    with pytest.raises(DomainError):
        PowerSeriesSpec(coeffs=())
    assert series_tail_indicator(PowerSeriesSpec.polynomial([1, 0, 3]), 2) == 12


def test_apply_square():
    f = NcSeries.from_terms([([], 1), ([1], 1)], L5)
    result = apply_series(PowerSeriesSpec.polynomial([0, 0, 1]), f)
    assert result == NcSeries.from_terms([([], 1), ([1], 2), ([1, 1], 1)], L5)


def test_apply_exponential_of_nilpotent():
    result = apply_series(PowerSeriesSpec.exponential(20), NcSeries.basis([1], L5))
    expected = NcSeries.from_terms([((1,) * n, 1 / math.factorial(n)) for n in range(6)], L5)
    assert allclose(result, expected, atol=1e-15, rtol=1e-15)


def test_apply_exponential_of_constant():
    result = apply_series(PowerSeriesSpec.exponential(30), NcSeries.constant(0.5, L5))
    assert expectation(result) == pytest.approx(math.exp(0.5), rel=1e-14)
    assert len(result) == 1


def test_apply_radius_violation(caplog):
    f = NcSeries.from_terms([([], 2), ([1], 1)], L5)
    with pytest.raises(RadiusViolation):
        apply_series(PowerSeriesSpec.geometric(10), f)
    with caplog.at_level(logging.WARNING):
        forced = apply_series(PowerSeriesSpec.geometric(10), f, force=True)
    assert "overridden" in caplog.text
    assert expectation(forced) == sum(2**n for n in range(11))
    # R / B_2 is about 0.767
    apply_series(PowerSeriesSpec.geometric(10), NcSeries.constant(0.7, L5))
    with pytest.raises(RadiusViolation):
        apply_series(PowerSeriesSpec.geometric(10), NcSeries.constant(0.8, L5))


def test_apply_geometric_matches_inverse(rng):
    trunc = TruncationPolicy(max_len=5, max_letter=4)
    for _ in range(50):
        f = random_series(rng, trunc, constant=0.0)
        via_series = apply_series(PowerSeriesSpec.geometric(8), f)
        via_inverse = wick_inverse(NcSeries.unit(trunc) - f)
        assert allclose(via_series, via_inverse, atol=1e-9, rtol=1e-9)


def test_apply_matches_direct_power_sum(rng):
    trunc = TruncationPolicy(max_len=4, max_letter=3)
    phi = PowerSeriesSpec.polynomial([0.5, -1.0, 0.25j, 2.0, 0.1])
    for _ in range(50):
        f = random_series(rng, trunc, constant=complex(rng.standard_normal(), rng.standard_normal()))
        direct = NcSeries.zero(trunc)
        for n, c in enumerate(phi.coeffs):
            direct = direct + c * wick_pow(f, n)
        shifted = apply_series(phi, f)
        assert max_coeff_error(shifted, direct) <= 1e-10


def test_inverse_examples():
    one = NcSeries.unit(L5)
    assert wick_inverse(one) == one
    c = 0.5
    f = NcSeries.from_terms([([], 1), ([1], -c)], L5)
    expected = NcSeries.from_terms([((1,) * n, c**n) for n in range(6)], L5)
    assert allclose(wick_inverse(f), expected)
    with pytest.raises(NotInvertible):
        wick_inverse(NcSeries.basis([1], L5))
    assert not is_invertible(NcSeries.basis([1], L5))
    assert is_invertible(NcSeries.constant(1e-3, L5))


def test_inversion_is_exact_on_random_series(rng):
    for trial in range(500):
        trunc = TruncationPolicy(max_len=int(rng.integers(1, 7)), max_letter=8)
        modulus = 10.0 ** rng.uniform(-1.0, 1.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        f = random_series(rng, trunc, constant=modulus * complex(math.cos(phase), math.sin(phase)))
        g = wick_inverse(f)
        one = NcSeries.unit(trunc)
        assert max_coeff_error(wick_mul(f, g), one, scale_by=wick_mul(f.modulus(), g.modulus())) <= 1e-10, trial
        assert max_coeff_error(wick_mul(g, f), one, scale_by=wick_mul(g.modulus(), f.modulus())) <= 1e-10, trial


def test_neumann_terms_are_graded(rng):
    trunc = TruncationPolicy(max_len=5, max_letter=3)
    for _ in range(50):
        f = random_series(rng, trunc, constant=2.0)
        h = NcSeries.unit(trunc) - (1 / expectation(f)) * f
        for n in range(1, 6):
            assert all(len(w) >= n for w in wick_pow(h, n).support())


def test_spectrum_examples():
    f = NcSeries.from_terms([([], 3), ([2], 1)], L5)
    assert spectrum(f) == 3
    with pytest.raises(NotInvertible):
        wick_inverse(f - NcSeries.constant(3, L5))
    wick_inverse(f - NcSeries.constant(2.9, L5))


def test_spectrum_dichotomy(rng):
    trunc = TruncationPolicy(max_len=4, max_letter=4)
    for _ in range(200):
        f = random_series(rng, trunc)
        lam = spectrum(f)
        with pytest.raises(NotInvertible):
            wick_inverse(f - NcSeries.constant(lam, trunc))
        for k in range(8):
            offset = 10.0 ** rng.uniform(-3, 1) * complex(math.cos(k), math.sin(k))
            wick_inverse(f - NcSeries.constant(lam + offset, trunc))


def test_derivation_examples():
    assert derivation(1, NcSeries.basis([1, 2, 1], L5)) == NcSeries.from_terms([([2, 1], 1), ([1, 2], 1)], L5)
    assert derivation(1, NcSeries.basis([1, 1], L5)) == NcSeries.basis([1], L5, coeff=2)
    assert derivation(3, NcSeries.basis([1, 2], L5)).is_zero()
    with pytest.raises(DomainError):
        derivation(0, NcSeries.unit(L5))


def test_derivation_matches_run_length_form():
    for w in enumerate_words(3, 5):
        f = NcSeries.basis(w, L5)
        for m in (1, 2, 3):
            d = derivation(m, f)
            assert d == run_length_derivation(m, f), (w, m)
            assert all(len(v) == len(w) - 1 for v in d.support())


def test_derivations_commute():
    for w in enumerate_words(3, 5):
        f = NcSeries.basis(w, L5)
        for m in (1, 2, 3):
            for l in (1, 2, 3):
                assert derivation(m, derivation(l, f)) == derivation(l, derivation(m, f))


@given(series(), series(), st.integers(1, 3))
def test_leibniz_rule_exact(f, g, m):
    # products drop words longer than L, so the rule holds up to length L - 1
    below = TruncationPolicy(max_len=f.trunc.max_len - 1)
    lhs = retruncate(derivation(m, f @ g), below)
    rhs = retruncate(derivation(m, f) @ g + f @ derivation(m, g), below)
    assert lhs == rhs


def test_leibniz_rule_on_random_pairs(rng, trunc6):
    for _ in range(500):
        f = random_series(rng, trunc6)
        g = random_series(rng, trunc6)
        m = int(rng.integers(1, 6))
        below = TruncationPolicy(max_len=trunc6.max_len - 1, max_letter=8)
        lhs = retruncate(derivation(m, wick_mul(f, g)), below)
        rhs = retruncate(wick_mul(derivation(m, f), g) + wick_mul(f, derivation(m, g)), below)
        assert max_coeff_error(lhs, rhs) <= 1e-10


def test_derivation_bound_examples():
    assert derivation_bound_check(2, NcSeries.unit(L5), 1, 4) == (0.0, 4.0)
    lhs, rhs = derivation_bound_check(1, NcSeries.basis([1], L5), 0, 3)
    assert lhs == pytest.approx(1.0)
    assert rhs == pytest.approx(1.0)
    with pytest.raises(DomainError):
        derivation_bound_check(1, NcSeries.unit(L5), 0, 2)


@pytest.mark.parametrize("p,q", [(0, 3), (1, 4)])
def test_derivation_bound_on_random_series(rng, trunc6, p, q):
    for _ in range(500):
        f = random_series(rng, trunc6)
        m = int(rng.integers(1, 6))
        lhs, rhs = derivation_bound_check(m, f, p, q)
        assert lhs <= rhs * (1 + 1e-12)


def test_power_bound_on_random_series(rng):
    trunc = TruncationPolicy(max_len=4, max_letter=4)
    for _ in range(500):
        f = random_series(rng, trunc, max_terms=8)
        n = int(rng.integers(0, 7))
        p = int(rng.integers(0, 2))
        lhs, rhs = power_bound_check(f, n, p)
        assert lhs <= rhs * (1 + 1e-12)
