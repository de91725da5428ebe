import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal.errors import ArgumentError, DomainError
from extremal.logdim import (
    LogDim,
    LogDimArray,
    dominance_bound,
    dominance_fraction,
    dominance_fraction_rows,
    extremal_amplitude_log2,
    log2_sum_exp2,
    logdim_sum,
    nat_to_log2,
    years_to_seconds,
)

mpmath.mp.dps = 60

log2s = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
small_log2s = st.floats(min_value=-60, max_value=60, allow_nan=False, allow_infinity=False)


def mp_log2_sum(xs):
    return float(mpmath.log(mpmath.fsum(mpmath.power(2, mpmath.mpf(x)) for x in xs), 2))


@pytest.mark.parametrize("xs, expected", [
    ([3.0, 3.0], 4.0),
    ([1e12, 0.0], 1e12),
    ([5.0, 4.0, 3.0], math.log2(56)),
])
def test_sum_examples(xs, expected):
    assert logdim_sum(xs).log2_value == pytest.approx(expected, rel=1e-15)


def test_sum_example_value():
    assert logdim_sum([5, 4, 3]).log2_value == pytest.approx(5.807354922057604, abs=1e-12)


def test_sum_of_zeros_and_empty():
    assert logdim_sum([]).is_zero
    assert logdim_sum([LogDim.zero(), LogDim.zero()]).is_zero
    assert logdim_sum([LogDim.zero(), LogDim(3.0)]).log2_value == 3.0


@settings(max_examples=200, deadline=None)
@given(st.lists(small_log2s, min_size=1, max_size=30))
def test_sum_matches_exact_rational(xs):
    # integers in log2 make 2**x exact; use the rational sum as the oracle
    ints = [int(round(x)) for x in xs]
    exact = sum(Fraction(2) ** k for k in ints)
    expected = math.log2(exact.numerator) - math.log2(exact.denominator)
    assert logdim_sum(ints).log2_value == pytest.approx(expected, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(log2s, min_size=1, max_size=30))
def test_sum_matches_mpmath(xs):
    assert logdim_sum(xs).log2_value == pytest.approx(mp_log2_sum(xs), rel=1e-14, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.lists(small_log2s, min_size=1, max_size=20))
def test_sum_matches_direct_when_representable(xs):
    direct = math.log2(math.fsum(2.0**x for x in xs))
    assert logdim_sum(xs).log2_value == pytest.approx(direct, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(log2s, min_size=1, max_size=25), st.randoms(use_true_random=False))
def test_sum_permutation_invariant(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert logdim_sum(xs) == logdim_sum(ys)


@settings(max_examples=100, deadline=None)
@given(st.lists(log2s, min_size=1, max_size=25))
def test_sum_bounds(xs):
    # max <= log2 sum <= max + log2 n
    total = logdim_sum(xs).log2_value
    top = max(xs)
    assert top <= total <= top + math.log2(len(xs)) + 1e-9 * max(1.0, abs(top))


@settings(max_examples=100, deadline=None)
@given(st.lists(log2s, min_size=2, max_size=30))
def test_vector_sum_agrees(xs):
    assert log2_sum_exp2(xs) == pytest.approx(logdim_sum(xs).log2_value, rel=1e-13, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(log2s, log2s)
def test_ordering_matches_mpmath(a, b):
    # enough digits to resolve exponent differences down to the smallest subnormal
    with mpmath.workdps(400):
        expected = mpmath.power(2, mpmath.mpf(a)) < mpmath.power(2, mpmath.mpf(b))
    assert (LogDim(a) < LogDim(b)) == expected


def test_arithmetic():
    a, b = LogDim(10.0), LogDim(3.0)
    assert (a * b).log2_value == 13.0
    assert (a / b).log2_value == 7.0
    assert (LogDim(3.0) + LogDim(3.0)).log2_value == 4.0
    assert LogDim.from_value(8.0).log2_value == 3.0
    assert LogDim.from_value(0.0).is_zero
    assert LogDim.from_ln(math.log(2) * 5).log2_value == pytest.approx(5.0, rel=1e-15)
    assert LogDim(2000.0).magnitude() == math.inf
    assert LogDim(-3.0).magnitude() == 0.125
    with pytest.raises(ZeroDivisionError):
        a / LogDim.zero()
    with pytest.raises(DomainError):
        LogDim.from_value(-1.0)
    with pytest.raises(DomainError):
        LogDim(math.nan)


def test_logdim_array():
    arr = LogDimArray([1.0, 5.0, -math.inf, 3.0])
    assert len(arr) == 4
    assert arr.max() == LogDim(5.0)
    assert arr[2].is_zero
    assert list(arr.sorted_desc().log2) == [5.0, 3.0, 1.0, -math.inf]
    with pytest.raises(ValueError):
        arr.log2[0] = 2.0


def test_dominance_fraction_example():
    # (2^7 + 2^5) / 2^10 = 0.15625
    frac = dominance_fraction([10.0, 7.0, 5.0])
    assert frac.log2_value == pytest.approx(math.log2(0.15625), rel=1e-15)
    assert frac.log2_value == pytest.approx(-2.678071905112638, abs=1e-12)
    assert dominance_bound([10.0, 7.0, 5.0]).log2_value == -2.0


def test_dominance_fraction_tie_is_one():
    assert dominance_fraction([4.0, 4.0]).log2_value == 0.0


def test_dominance_fraction_rejects():
    with pytest.raises(ArgumentError):
        dominance_fraction([1.0, 2.0])
    with pytest.raises(ArgumentError):
        dominance_fraction([1.0])


@settings(max_examples=300, deadline=None)
@given(st.lists(log2s, min_size=2, max_size=40))
def test_dominance_fraction_bound_and_oracle(xs):
    bits = sorted(xs, reverse=True)
    frac = dominance_fraction(bits).log2_value
    assert frac <= dominance_bound(bits).log2_value
    expected = float(mpmath.log(mpmath.fsum(mpmath.power(2, mpmath.mpf(x) - mpmath.mpf(bits[0]))
                                            for x in bits[1:]), 2))
    assert frac == pytest.approx(expected, rel=1e-13, abs=1e-10)


def test_dominance_rows_agree(gen):
    x = gen.normal(0, 20, size=(50, 17))
    rows = dominance_fraction_rows(x)
    single = [dominance_fraction(np.sort(r)[::-1]).log2_value for r in x]
    np.testing.assert_allclose(rows, single, rtol=1e-12, atol=1e-12)


def test_nat_to_log2():
    assert nat_to_log2(-1e34).log2_value == pytest.approx(-1e34 / math.log(2), rel=1e-15)


def test_amplitude_example():
    seconds = years_to_seconds(100)
    assert seconds == 3_153_600_000.0
    amp = extremal_amplitude_log2(300, seconds, 2)
    assert amp.log2_value == pytest.approx(-9.4608e11, rel=1e-12)
    assert -1.05e12 <= amp.log2_value <= -0.9e12
    assert amp > nat_to_log2(-1e34)
    assert extremal_amplitude_log2(1, 1, 4).log2_value == -2.0
    with pytest.raises(DomainError):
        extremal_amplitude_log2(0, 1)
    with pytest.raises(DomainError):
        extremal_amplitude_log2(1, 1, 1)
