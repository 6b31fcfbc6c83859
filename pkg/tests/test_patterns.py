import itertools
import math

import numpy as np
import pytest

from gtkernels import patterns
from gtkernels.errors import ValidationError


def test_spectrum_validation():
    with pytest.raises(ValidationError):
        patterns.spectrum([])
    with pytest.raises(ValidationError):
        patterns.spectrum([0.0, 1.0])  # increasing
    with pytest.raises(ValidationError):
        patterns.spectrum([1.0, 1.0])  # tie
    with pytest.raises(ValidationError):
        patterns.spectrum([1.0, 0.0], lo=0.5)  # bounds exclude a value
    s = patterns.spectrum([2.0, 1.0, -1.0])
    assert s.n == 3
    assert s.lo == -1.0 and s.hi == 2.0
    assert s.min_gap == pytest.approx(1.0)


def test_gt_pattern_interlacing_checks():
    good = patterns.GTPattern(levels=(np.array([1.0]), np.array([2.0, 0.0])))
    assert patterns.check_symmetric_interlacing(good)
    bad = patterns.GTPattern(levels=(np.array([3.0]), np.array([2.0, 0.0])))
    assert not patterns.check_symmetric_interlacing(bad)
    # a tolerance forgives a tie created by rounding
    tied = patterns.GTPattern(levels=(np.array([2.0 + 1e-12]), np.array([2.0, 0.0])))
    assert not patterns.check_symmetric_interlacing(tied)
    assert patterns.check_symmetric_interlacing(tied, atol=1e-10)


def test_warren_indicator_known_pairs():
    assert patterns.warren_indicator([0.0], [1.0]) == 1
    assert patterns.warren_indicator([2.0, 0.0], [3.0, 1.0]) == 1
    assert patterns.warren_indicator([2.0, 0.0], [5.0, 4.0]) == 0


def test_warren_indicator_matches_interlacing():
    # equal-length vectors; interlaced means z'_1 > z_1 > z'_2 > z_2 > ...
    rng = np.random.default_rng(11)
    hits = 0
    for _ in range(300):
        n = int(rng.integers(1, 5))
        z_next = np.sort(rng.uniform(-1, 1, n))[::-1]
        z = np.sort(rng.uniform(-1, 1, n))[::-1]
        inter = all(z_next[i] > z[i] for i in range(n)) and all(
            z[i] > z_next[i + 1] for i in range(n - 1)
        )
        hits += inter
        assert patterns.warren_indicator(z, z_next) == (1 if inter else 0)
    assert hits > 10  # the positive branch was actually exercised


def test_elem_sym_matches_brute_force():
    rng = np.random.default_rng(12)
    for _ in range(40):
        vals = rng.uniform(-2, 2, 6)
        es = patterns.elem_sym_all(vals)
        for k in range(7):
            brute = sum(
                math.prod(c) for c in itertools.combinations(vals, k)
            ) if k else 1.0
            assert es[k] == pytest.approx(brute, rel=1e-10, abs=1e-10)
            assert patterns.elem_sym(vals, k) == pytest.approx(brute, rel=1e-10, abs=1e-10)


def test_vandermonde_matches_product():
    y = np.array([3.0, 1.5, -0.5])
    want = math.prod(
        y[i] - y[j] for i in range(3) for j in range(i + 1, 3)
    )
    assert patterns.vandermonde(y) == pytest.approx(want, rel=1e-12)
    ls = patterns.vandermonde_logsigned(y)
    assert ls.value() == pytest.approx(want, rel=1e-12)
