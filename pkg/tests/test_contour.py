import numpy as np
import pytest

from gtkernels import kernels
from gtkernels.contour import kernel_contour
from gtkernels.errors import NumericalError, ValidationError


def _random_spectrum(rng, n, lo=-1.0, hi=1.0, min_gap=1e-3):
    while True:
        x = np.sort(rng.uniform(lo, hi, n))[::-1].copy()
        if n == 1 or np.min(-np.diff(x)) > min_gap:
            return x


def test_contour_matches_exact_oracle():
    # the contour representation is an algorithmically independent route;
    # the roundoff plateau for crowded pole layouts sits above 1e-9, so the
    # sweep asks for 1e-7 and verifies 1e-6 (the equivalence bar)
    rng = np.random.default_rng(200)
    checked = 0
    for _ in range(60):
        n = int(rng.integers(2, 13))
        x = _random_spectrum(rng, n)
        r = int(rng.integers(1, n))
        u = float(rng.uniform(-1.2, 1.2))
        v = float(rng.uniform(-1.2, 1.2))
        if np.min(np.abs(x - u)) < 1e-4:
            continue
        got = kernel_contour(x, r, u, v, tol=1e-7)
        want = float(kernels.kernel_fixed_top_exact(x, r, r, u, v))
        assert abs(got - want) <= 1e-6 * max(1.0, abs(want))
        checked += 1
    assert checked >= 40


def test_contour_diagonal():
    rng = np.random.default_rng(201)
    for _ in range(10):
        n = int(rng.integers(3, 10))
        x = _random_spectrum(rng, n)
        r = int(rng.integers(1, n))
        u = float(rng.uniform(x.min(), x.max()))
        if np.min(np.abs(x - u)) < 1e-4:
            continue
        got = kernel_contour(x, r, u, u, tol=1e-7)
        want = float(kernels.kernel_fixed_top_exact(x, r, r, u, u))
        assert abs(got - want) <= 1e-6 * max(1.0, abs(want))


def test_contour_handles_clustered_poles():
    # equal-level evaluation on a two-cluster spectrum, where the direct
    # formula loses hundreds of digits; the contour route stays in doubles
    sep = 2.0**-37
    x = np.array([1.0 + 3 * sep, 1.0 + 2 * sep, 1.0 + sep, 1.0, 3 * sep, 2 * sep, sep, 0.0])
    got = kernel_contour(x, 4, 0.5, 0.55)
    want = float(kernels.kernel_fixed_top_exact(x, 4, 4, 0.5, 0.55))
    assert got == pytest.approx(want, rel=1e-9)


def test_contour_invalid_inputs():
    x = np.array([1.0, 0.0, -1.0])
    with pytest.raises(ValidationError):
        kernel_contour(x, 3, 0.5, 0.5)  # r = n not allowed
    with pytest.raises(ValidationError):
        kernel_contour(x, 1, 0.5, 0.5, tol=0.0)
    with pytest.raises(ValidationError):
        kernel_contour(x, 1, 0.5, 0.5, nodes=0)


def test_contour_separation_failure_near_atom():
    # u sitting essentially on an atom leaves no room to separate the pole
    # groups between the two circles
    x = np.array([0.9, 0.3, -0.4])
    with pytest.raises(NumericalError):
        kernel_contour(x, 2, 0.3 + 1e-12, 0.2)
