"""Shared fixtures and hypothesis strategies."""

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from freeword import Word
from series import NcSeries, TruncationPolicy

settings.register_profile("nck", deadline=None, max_examples=100)
settings.load_profile("nck")

SMALL_TRUNC = TruncationPolicy(max_len=4)

letters = st.integers(min_value=1, max_value=3)
words = st.lists(letters, max_size=4).map(Word)

# Gaussian integers keep sums and products exact in floating point.
int_coeffs = st.builds(complex, st.integers(-5, 5), st.integers(-5, 5))


@st.composite
def series(draw, trunc: TruncationPolicy = SMALL_TRUNC, max_size: int = 6, constant=None):
    terms = draw(st.dictionaries(st.lists(letters, max_size=trunc.max_len).map(tuple), int_coeffs, max_size=max_size))
    if constant is not None:
        terms[()] = complex(constant)
    return NcSeries.from_terms(terms.items(), trunc)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def trunc6():
    return TruncationPolicy(max_len=6, max_letter=8)
