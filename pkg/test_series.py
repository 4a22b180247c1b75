import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given

from conftest import SMALL_TRUNC, series
from exceptions import DomainError, TermLimitExceeded, TruncationViolation
from freeword import factorizations
from series import (
    NcSeries,
    TruncationPolicy,
    add,
    allclose,
    expectation,
    norm_p,
    random_series,
    retruncate,
    scale,
    white_noise_blowup_demo,
    wick_mul,
)

L3 = TruncationPolicy(max_len=3)


def oracle_product(f: NcSeries, g: NcSeries, max_len: int) -> dict:
    """Sum f_beta g_delta over every factorization of every candidate word."""
    candidates = {b + d for b in f._terms for d in g._terms if len(b) + len(d) <= max_len}
    out = {}
    for gamma in candidates:
        total = 0j
        for beta, delta in factorizations(gamma):
            total += f.coeff(beta) * g.coeff(delta)
        if total != 0:
            out[gamma] = total
    return out


def abelianize(f: NcSeries) -> dict:
    out = Counter()
    for w, c in f._terms.items():
        out[tuple(sorted(w))] += c
    return {k: v for k, v in out.items() if v != 0}


def commutative_product(x: dict, y: dict, max_len: int) -> dict:
    out = Counter()
    for a, c in x.items():
        for b, d in y.items():
            if len(a) + len(b) <= max_len:
                out[tuple(sorted(a + b))] += c * d
    return {k: v for k, v in out.items() if v != 0}


def test_from_terms_merges_and_validates():
    f = NcSeries.from_terms([([1], 1 + 0j), ([1], 2 + 0j)], L3)
    assert f.coeff([1]) == 3
    assert len(f) == 1
    assert NcSeries.from_terms([], L3).is_zero()
    with pytest.raises(TruncationViolation):
        NcSeries.from_terms([([1, 1, 1, 1], 1)], L3)
    lenient = NcSeries.from_terms([([1, 1, 1, 1], 1), ([2], 5)], L3, strict=False)
    assert lenient.items() == [((2,), 5)]


def test_max_letter_is_enforced():
    trunc = TruncationPolicy(max_len=3, max_letter=2)
    with pytest.raises(TruncationViolation):
        NcSeries.basis([3], trunc)
    wide = NcSeries.basis([3], L3)
    assert add(wide, NcSeries.basis([1], trunc)).items() == [((1,), 1)]


def test_add_and_scale_examples():
    f = NcSeries.from_terms([([], 2), ([1, 2], 1j)], L3)
    assert add(f, NcSeries.zero(L3)) == f
    assert scale(0, f).is_zero()
    assert add(f, scale(-1, f)).is_zero()
    assert (f - f).is_zero()
    assert -f == scale(-1, f)
    assert 2 * f == f * 2 == add(f, f)


def test_wick_product_examples():
    e1 = NcSeries.basis([1], L3)
    e2 = NcSeries.basis([2], L3)
    assert e1 @ e2 == NcSeries.basis([1, 2], L3)
    assert e2 @ e1 == NcSeries.basis([2, 1], L3)
    assert e1 @ e2 != e2 @ e1

    f = NcSeries.unit(L3) + e1
    assert f @ f == NcSeries.from_terms([([], 1), ([1], 2), ([1, 1], 1)], L3)


def test_wick_product_drops_long_words():
    f = NcSeries.basis([1, 2], L3)
    assert (f @ f).is_zero()
    short = TruncationPolicy(max_len=2)
    assert wick_mul(NcSeries.basis([1], L3), NcSeries.basis([2], short)).trunc == short


def test_norm_examples():
    assert norm_p(NcSeries.unit(L3), 5) == 1.0
    assert norm_p(NcSeries.unit(L3), -5) == 1.0
    e12 = NcSeries.basis([1, 2], L3)
    # weight([1, 2]) = 8, so ||e||_p^2 = 8^{-p}
    assert norm_p(e12, 2) == pytest.approx(1.0 / 8.0, rel=1e-14)
    assert norm_p(e12, 1) == pytest.approx(math.sqrt(1.0 / 8.0), rel=1e-14)
    assert norm_p(e12, -1) == pytest.approx(math.sqrt(8.0), rel=1e-14)
    assert norm_p(NcSeries.from_terms([([1], 1), ([2], 1)], L3), 0) == pytest.approx(math.sqrt(2.0))
    assert norm_p(NcSeries.zero(L3), 3) == 0.0


def test_norm_is_computed_in_log_space():
    trunc = TruncationPolicy(max_len=400)
    f = NcSeries.basis([1000] * 400, trunc, coeff=1.0)
    assert norm_p(f, 4) < 1e-300
    small = NcSeries.basis([1000] * 400, trunc, coeff=1e-300)
    assert norm_p(small, 0) == pytest.approx(1e-300)


def test_expectation_examples():
    assert expectation(NcSeries.unit(L3)) == 1
    assert expectation(NcSeries.basis([1], L3)) == 0


@given(series(), series())
def test_expectation_is_a_homomorphism(f, g):
    assert expectation(f @ g) == expectation(f) * expectation(g)
    assert expectation(f + g) == expectation(f) + expectation(g)


@given(series(), series(), series())
def test_wick_product_is_associative(f, g, h):
    assert (f @ g) @ h == f @ (g @ h)


@given(series())
def test_unit_is_two_sided(f):
    one = NcSeries.unit(SMALL_TRUNC)
    assert one @ f == f
    assert f @ one == f


@given(series(), series())
def test_wick_product_matches_factorization_oracle(f, g):
    assert (f @ g)._terms == oracle_product(f, g, SMALL_TRUNC.max_len)


@given(series(), series())
def test_abelianization_is_a_homomorphism(f, g):
    assert abelianize(f @ g) == commutative_product(abelianize(f), abelianize(g), SMALL_TRUNC.max_len)


def test_oracle_on_random_gaussian_pairs(rng, trunc6):
    for _ in range(1000):
        f = random_series(rng, trunc6)
        g = random_series(rng, trunc6)
        expected = NcSeries(oracle_product(f, g, trunc6.max_len), trunc6)
        assert allclose(wick_mul(f, g), expected, atol=1e-12, rtol=1e-12)


def test_deterministic_mode_agrees(rng, trunc6):
    f = random_series(rng, trunc6)
    g = random_series(rng, trunc6)
    assert allclose(wick_mul(f, g, deterministic=True), wick_mul(f, g))
    assert wick_mul(f, g, deterministic=True) == wick_mul(f, g, deterministic=True)


def test_norm_is_monotone_in_p(rng, trunc6):
    for _ in range(200):
        f = random_series(rng, trunc6)
        norms = [norm_p(f, p) for p in range(-2, 6)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))
        assert abs(expectation(f)) <= norms[-1] * (1 + 1e-12)


def test_vanishing_expectation_decay(rng, trunc6):
    for _ in range(200):
        f = random_series(rng, trunc6, constant=0.0)
        if f.is_zero():
            continue
        assert expectation(f) == 0
        base = norm_p(f, 0)
        norms = [norm_p(f, q) for q in range(0, 12)]
        assert all(b < a for a, b in zip(norms, norms[1:]))
        # every nonempty word has weight >= 2
        assert all(n <= 2.0 ** (-q / 2.0) * base * (1 + 1e-12) for q, n in enumerate(norms))


def test_random_series_respects_truncation(rng, trunc6):
    for _ in range(50):
        f = random_series(rng, trunc6, constant=2.5)
        assert expectation(f) == 2.5
        assert f.max_length() <= trunc6.max_len
        assert all(letter <= 8 for letter in f.letters())
        assert 1 <= len(f) <= 13


def test_retruncate_and_items_order():
    f = NcSeries.from_terms([([2, 1], 1), ([1], 2), ([], 3), ([1, 1, 1], 4)], L3)
    assert [list(w) for w in f.support()] == [[], [1], [2, 1], [1, 1, 1]]
    short = retruncate(f, TruncationPolicy(max_len=1))
    assert short.support() == [(), (1,)]


def test_drop_tol_and_term_cap():
    pruned = TruncationPolicy(max_len=3, drop_tol=1e-6)
    f = NcSeries.from_terms([([1], 1e-8), ([2], 1.0)], pruned)
    assert f.support() == [(2,)]
    capped = TruncationPolicy(max_len=3, max_terms=2)
    g = NcSeries.from_terms([([], 1), ([1], 1)], capped)
    with pytest.raises(TermLimitExceeded):
        g @ g


def test_policy_validation():
    with pytest.raises(DomainError):
        TruncationPolicy(max_len=-1)
    with pytest.raises(DomainError):
        TruncationPolicy(max_len=2, max_letter=0)
    coarse = TruncationPolicy(max_len=5, max_letter=4).coarsen(TruncationPolicy(max_len=3))
    assert coarse == TruncationPolicy(max_len=3, max_letter=4)


def test_blowup_demo_grows():
    assert len(white_noise_blowup_demo(1)) == 1
    assert white_noise_blowup_demo(1)[0] > 0
    first, second = white_noise_blowup_demo(2)
    assert second > first
    norms = white_noise_blowup_demo(50)
    assert all(b > a for a, b in zip(norms, norms[1:]))
    assert norms[-1] > 1.5 * norms[0]
    with pytest.raises(DomainError):
        white_noise_blowup_demo(0)


def test_blowup_demo_first_value():
    # N = 1: f_1^2 on the word z_1^2 with f_1 = 1 / log 2
    assert white_noise_blowup_demo(1)[0] == pytest.approx(1.0 / math.log(2.0) ** 2)


def test_scalar_series_multiply_like_numbers():
    values = np.array([1.5 - 2j, 0.25j])
    f = NcSeries.constant(values[0], L3)
    g = NcSeries.constant(values[1], L3)
    assert expectation(f @ g) == values[0] * values[1]
