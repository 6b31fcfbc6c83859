import math

import numpy as np
import pytest
from scipy import integrate

from gtkernels import gue
from gtkernels.errors import ValidationError


def test_hermite_low_degrees():
    # monic (probabilists') family: He_2 = x^2 - 1, He_3 = x^3 - 3x, He_4 = x^4 - 6x^2 + 3
    for x in (-1.7, 0.0, 0.4, 2.3):
        assert gue.hermite(0, x) == 1.0
        assert gue.hermite(1, x) == x
        assert gue.hermite(2, x) == pytest.approx(x * x - 1.0, rel=1e-14)
        assert gue.hermite(3, x) == pytest.approx(x**3 - 3 * x, rel=1e-13)
        assert gue.hermite(4, x) == pytest.approx(x**4 - 6 * x * x + 3.0, rel=1e-13)


def test_hermite_orthogonality_quadrature():
    # int He_i He_j e^{-x^2/2} dx = sqrt(2 pi) i! delta_ij
    for i, j in [(0, 0), (1, 1), (3, 3), (2, 4), (1, 2), (5, 5)]:
        got, _ = integrate.quad(
            lambda x: gue.hermite(i, x) * gue.hermite(j, x) * math.exp(-x * x / 2.0),
            -12.0,
            12.0,
        )
        want = math.sqrt(2 * math.pi) * math.factorial(i) if i == j else 0.0
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_hermite_basis_norms():
    basis = gue.HermiteBasis(8)
    for j in range(9):
        assert basis.norm_sq(j) == pytest.approx(
            math.sqrt(2 * math.pi) * math.factorial(j), rel=1e-14
        )
    vals = basis.all_values(0.7)
    assert vals[2] == pytest.approx(0.7**2 - 1.0, rel=1e-14)


def test_incomplete_moment_closed_forms():
    # J_0(u) = sqrt(pi/2) erfc(u / sqrt 2); J_1(u) = e^{-u^2/2} - u J_0(u)
    for u in (-2.0, -0.3, 0.0, 0.8, 3.5):
        j0 = gue.incomplete_moment(0, u).value
        j1 = gue.incomplete_moment(1, u).value
        assert j0 == pytest.approx(math.sqrt(math.pi / 2) * math.erfc(u / math.sqrt(2)), rel=1e-13)
        assert j1 == pytest.approx(math.exp(-u * u / 2) - u * j0, rel=1e-11, abs=1e-300)


def test_incomplete_moments_match_quadrature():
    # J_k(u) = int_u^inf (x-u)^k / k! e^{-x^2/2} dx, independent adaptive oracle
    for u in (-1.5, 0.0, 1.2, 4.0):
        moms = gue.incomplete_moments(12, u)
        for k in (2, 5, 9, 12):
            want, _ = integrate.quad(
                lambda x: (x - u) ** k / math.factorial(k) * math.exp(-x * x / 2.0),
                u,
                u + 40.0,
            )
            assert moms[k] == pytest.approx(want, rel=1e-9)


def test_level_kernel_christoffel_darboux():
    # K_n(u, v) = sqrt(n) (phi_n(u) phi_{n-1}(v) - phi_{n-1}(u) phi_n(v)) / (u - v)
    basis = gue.HermiteBasis(16)

    def phi(j, x):
        return basis.normalized(x)[j]

    rng = np.random.default_rng(300)
    for n in (2, 5, 12):
        for _ in range(10):
            u, v = rng.normal(size=2)
            if abs(u - v) < 1e-3:
                continue
            want = math.sqrt(n) * (phi(n, u) * phi(n - 1, v) - phi(n - 1, u) * phi(n, v)) / (u - v)
            assert gue.gue_level_kernel(n, u, v) == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_level_kernel_diagonal_and_arrays():
    g = np.linspace(-2, 2, 9)
    mat = gue.gue_level_kernel(4, g[:, None], g[None, :])
    assert mat.shape == (9, 9)
    for i, u in enumerate(g):
        assert mat[i, i] == pytest.approx(gue.gue_level_kernel(4, float(u), float(u)), rel=1e-13)
    # diagonal integrates to n (particle count); trapezoid on a wide grid
    wide = np.linspace(-9, 9, 4001)
    diag = gue.gue_level_kernel(4, wide, wide)
    assert np.trapezoid(diag, wide) == pytest.approx(4.0, abs=1e-6)


def test_minor_kernel_collapses_to_level_kernel():
    grid = np.linspace(-2.0, 2.0, 9)
    for n in (2, 5, 9):
        for r in range(1, n + 1):
            worst = 0.0
            for u in grid:
                for v in grid:
                    a = gue.gue_minor_kernel(n, r, float(u), r, float(v))
                    b = gue.gue_level_kernel(r, float(u), float(v))
                    worst = max(worst, abs(a - b))
            assert worst < 1e-10


def test_independent_route_matches_up_to_gauge():
    # the orthogonal-expansion route equals the direct formula times
    # exp((v^2 - u^2)/4); comparison done in the direct gauge
    rng = np.random.default_rng(301)
    for n in (3, 6, 10):
        for _ in range(20):
            r = int(rng.integers(1, n))  # expansion route needs r <= n-1
            s = int(rng.integers(1, n + 1))
            u, v = rng.normal(scale=1.2, size=2)
            direct = gue.gue_minor_kernel(n, r, float(u), s, float(v))
            alt = gue.uie_minor_kernel_gue(n, r, s, float(u), float(v))
            gauged = math.exp((u * u - v * v) / 4.0) * alt
            assert gauged == pytest.approx(direct, rel=1e-11, abs=1e-12)


def test_two_point_determinants_gauge_invariant():
    # dets of [[K(p1,p1), K(p1,p2)], [K(p2,p1), K(p2,p2)]] agree across routes
    rng = np.random.default_rng(302)
    n = 7
    for _ in range(15):
        r = int(rng.integers(1, n))
        s = int(rng.integers(1, n))
        u, v = rng.normal(size=2)

        def det2(k):
            return k(r, u, r, u) * k(s, v, s, v) - k(r, u, s, v) * k(s, v, r, u)

        d_direct = det2(lambda a, x, b, y: gue.gue_minor_kernel(n, a, x, b, y))
        d_alt = det2(lambda a, x, b, y: gue.uie_minor_kernel_gue(n, a, b, x, y))
        assert d_alt == pytest.approx(d_direct, rel=1e-9, abs=1e-11)


def test_bulk_scaling_approaches_sine():
    # (pi / sqrt n) K_n(pi u / sqrt n, pi v / sqrt n) -> sin(pi (v-u)) / (pi (v-u))
    grid = np.linspace(-1.0, 1.0, 21)
    last = None
    for n in (4, 16, 64):
        scale = math.pi / math.sqrt(n)
        sup = 0.0
        for u in grid:
            for v in grid:
                got = scale * gue.gue_level_kernel(n, scale * u, scale * v)
                d = v - u
                want = 1.0 if abs(d) < 1e-12 else math.sin(math.pi * d) / (math.pi * d)
                sup = max(sup, abs(got - want))
        if last is not None:
            assert sup < last
        last = sup
    assert last < 0.05


def test_gue_validation():
    with pytest.raises(ValidationError):
        gue.gue_level_kernel(0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        gue.gue_minor_kernel(4, 5, 0.0, 1, 0.0)
    with pytest.raises(ValidationError):
        gue.uie_minor_kernel_gue(4, 4, 1, 0.0, 0.0)  # expansion route needs r < n
    with pytest.raises(ValidationError):
        gue.incomplete_moment(-1, 0.0)
