import math

import numpy as np
import pytest

from gtkernels import families, measures, saddle
from gtkernels.errors import OutsideBulk, PointMass, ValidationError


def test_solve_matches_semicircle_closed_form():
    fam = families.SemicircleFamily()
    m = fam.measure()
    for alpha in (0.25, 0.5, 0.75):
        lo, hi = fam.intervals(alpha)[0]
        for c in np.linspace(lo + 1e-3, hi - 1e-3, 20):
            got = saddle.solve_saddle(m, alpha, float(c))
            want = fam.root(alpha, float(c))
            assert abs(got.w - want) < 1e-11
            assert abs(got.rho - fam.density(alpha, float(c))) < 1e-11


def test_solve_matches_two_atom_closed_form():
    for beta in (0.3, 0.5, 0.8):
        fam = families.TwoAtomFamily(beta)
        m = fam.measure()
        for alpha in (0.3, 0.5, 0.7):
            lo, hi = fam.intervals(alpha)[0]
            for c in np.linspace(lo + 1e-3, hi - 1e-3, 15):
                got = saddle.solve_saddle(m, alpha, float(c))
                want = fam.root(alpha, float(c))
                assert abs(got.w - want) < 1e-11


def test_solve_matches_three_atom_closed_form():
    fam = families.ThreeAtomFamily()
    m = fam.measure()
    for alpha in (0.5, 2.0 / 3.0, 0.8):
        for lo, hi in fam.intervals(alpha):
            for c in np.linspace(lo + 1e-3, hi - 1e-3, 10):
                got = saddle.solve_saddle(m, alpha, float(c))
                want = fam.root(alpha, float(c))
                assert abs(got.w - want) < 1e-10


def test_saddle_residual_and_gauge():
    m = measures.atomic([0.0, 1.0], [0.5, 0.5])
    s = saddle.solve_saddle(m, 0.5, 0.5)
    assert s.residual < 1e-12
    # symmetric configuration: purely imaginary root, unit gauge
    assert abs(s.w.real) < 1e-12
    assert s.gauge == pytest.approx(1.0, abs=1e-10)
    assert s.rho == pytest.approx(1.0 / math.pi, rel=1e-10)
    # gauge = exp(-pi Re(w) / Im(w)) at an asymmetric point
    s2 = saddle.solve_saddle(m, 0.5, 0.3)
    assert s2.gauge == pytest.approx(math.exp(-math.pi * s2.w.real / s2.w.imag), rel=1e-12)


def test_outside_bulk_returns_none():
    m = measures.semicircle()
    assert saddle.solve_saddle(m, 0.25, 1.5) is None  # |c| > 2 sqrt(0.25) = 1
    assert saddle.solve_saddle(m, 0.25, -3.0) is None
    fam = families.SemicircleFamily()
    with pytest.raises(OutsideBulk):
        fam.root(0.25, 1.5)


def test_point_mass_rejected():
    with pytest.raises(PointMass):
        saddle.solve_saddle(measures.atomic([0.5], [1.0]), 0.5, 0.5)


def test_alpha_validation():
    m = measures.semicircle()
    with pytest.raises(ValidationError):
        saddle.solve_saddle(m, 1.5, 0.0)
    with pytest.raises(ValidationError):
        saddle.solve_saddle(m, 0.0, 0.0)


def test_scan_bulk_semicircle_interval():
    fam = families.SemicircleFamily()
    grid = np.arange(-1.5, 1.5 + 1e-9, 1e-3)
    ivs = saddle.scan_bulk(fam.measure(), 0.25, grid)
    assert len(ivs) == 1
    lo, hi = ivs[0]
    assert abs(lo - (-1.0)) <= 2e-3
    assert abs(hi - 1.0) <= 2e-3


def test_scan_bulk_three_atom_topology():
    fam = families.ThreeAtomFamily()
    m = fam.measure()
    grid = np.arange(-1.6, 1.6 + 1e-9, 1e-3)
    for alpha in (0.5, 2.0 / 3.0, 0.8):
        want = fam.intervals(alpha)
        got = saddle.scan_bulk(m, alpha, grid)
        assert len(got) == len(want)
        for (glo, ghi), (wlo, whi) in zip(got, want):
            assert abs(glo - wlo) <= 2e-3
            assert abs(ghi - whi) <= 2e-3


def test_atomic_part_two_atom():
    # beta = 0.9, alpha = 0.5: the atom at 1 keeps excess mass 0.9 - (1 - 0.5) = 0.4
    m = measures.atomic([0.0, 1.0], [0.1, 0.9])
    rep = saddle.atomic_part(m, 0.5)
    assert rep.positions == (1.0,)
    assert rep.masses[0] == pytest.approx(0.4, abs=1e-14)
    # balanced atoms dissolve entirely
    rep2 = saddle.atomic_part(measures.atomic([0.0, 1.0], [0.5, 0.5]), 0.5)
    assert rep2.positions == ()


def test_mass_audit_families():
    for m, alpha in [
        (measures.semicircle(), 0.25),
        (measures.atomic([0.0, 1.0], [0.5, 0.5]), 0.5),
        (measures.atomic([-1.0, 0.0, 1.0], [1 / 3, 1 / 3, 1 / 3]), 2.0 / 3.0),
    ]:
        audit = saddle.mass_audit(m, alpha)
        assert abs(audit.value - alpha) < 1e-5
        assert audit.value == pytest.approx(audit.interval_mass + audit.atom_mass, abs=1e-14)


def test_boundary_transform_value():
    m = measures.atomic([0.0, 1.0], [0.5, 0.5])
    s = saddle.solve_saddle(m, 0.5, 0.5)
    g = saddle.boundary_transform(s)
    assert g == pytest.approx(1.0j, abs=1e-10)  # (1-alpha)/conj(0.5i) = i
    assert g.imag > 0
    assert g.imag / math.pi == pytest.approx(s.rho, abs=1e-12)
    # subordination: G(c + (1-alpha)/g) == g for the input measure
    back = measures.cauchy_transform(m, s.c + (1.0 - s.alpha) / g)
    assert abs(back - g) < 1e-10

    s2 = saddle.solve_saddle(measures.semicircle(), 0.25, 0.0)
    g2 = saddle.boundary_transform(s2)
    assert g2 == pytest.approx(0.5j, abs=1e-10)
    assert g2.imag / math.pi == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-12)
