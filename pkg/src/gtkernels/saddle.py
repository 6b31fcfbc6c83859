"""Saddle analysis of the bulk scaling limit.

Everything here revolves around one equation in the complex variable w:

    w * G(w + c) = 1 - alpha,        G = Cauchy transform of the measure.

For c in the open bulk set the equation has exactly one root in the upper
half-plane. That root fixes the local particle density

    rho(c) = -((1 - alpha) / pi) * Im(1 / w)

and the exponential tilt constant exp(pi * Re(1/w) / Im(1/w)) that appears
in the scaled kernel. The solver clears the equation to a degree-n
polynomial for atomic measures, but evaluates the polynomial's log
derivative in rational form (pole sums), never through monomial
coefficients, so clustered spectra stay well conditioned.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import measures
from .errors import (
    MultipleUpperRoots,
    NumericalError,
    PointMass,
    QuadratureNonConvergence,
    ValidationError,
)
from .families import SemicircleFamily
from .numerics import aberth_roots, gl_rule

_IM_THRESHOLD = 1e-9
_POLISH_TARGET = 1e-12


@dataclass(frozen=True)
class Saddle:
    """Upper-half-plane root with its derived quantities.

    rho is the bulk density at c (per unit length), gauge the exponential
    tilt constant, residual the absolute defect |w G(w+c) - (1-alpha)|.
    """

    w: complex
    alpha: float
    c: float
    rho: float
    gauge: float
    residual: float


@dataclass(frozen=True)
class AtomReport:
    """Atoms of the level-fraction limit measure: positions and masses."""

    positions: tuple
    masses: tuple


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")


def make_saddle(m: measures.Measure, alpha: float, c: float, w: complex) -> Saddle:
    """Assemble a Saddle from a root, recomputing density, gauge, residual."""
    w = complex(w)
    if w.imag <= 0:
        raise NumericalError(f"saddle root must have positive imaginary part, got {w}")
    norm = abs(w) ** 2
    rho = (1.0 - alpha) * w.imag / (math.pi * norm)
    try:
        gauge = math.exp(-math.pi * w.real / w.imag)
    except OverflowError:
        gauge = math.inf  # near-real root at a bulk edge; the tilt degenerates
    residual = abs(w * measures.cauchy_transform(m, w + c) - (1.0 - alpha))
    return Saddle(w=w, alpha=alpha, c=c, rho=rho, gauge=gauge, residual=residual)


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------


def _newton_polish(m: measures.Measure, alpha: float, c: float, w: complex, max_iter=80):
    """Damped Newton on h(w) = w G(w+c) - (1-alpha); returns (w, |h(w)|)."""
    target = 1.0 - alpha

    def h_and_deriv(z):
        g = measures.cauchy_transform(m, z + c)
        gp = measures.cauchy_transform_deriv(m, z + c)
        return z * g - target, g + z * gp

    try:
        h, _ = h_and_deriv(w)
    except NumericalError:
        return w, math.inf
    for _ in range(max_iter):
        if abs(h) < 1e-15:
            break
        _, hp = h_and_deriv(w)
        if hp == 0:
            break
        step = h / hp
        improved = False
        for _ in range(50):
            cand = w - step
            try:
                h_new, _ = h_and_deriv(cand)
            except NumericalError:
                step *= 0.5
                continue
            if abs(h_new) < abs(h):
                w, h = cand, h_new
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return w, abs(h)


def _aberth_logderiv(m: measures.Measure, alpha: float, c: float):
    """z -> P'(z)/P(z) for the cleared polynomial, in pole-sum form."""
    poles = m.atoms - c
    wts = m.weights / m.mass if m.mass != 1.0 else m.weights
    target = 1.0 - alpha

    def logderiv(z):
        z = np.asarray(z, dtype=complex)
        d = z[:, None] - poles[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / d
            gsum = (wts[None, :] * inv).sum(axis=1)
            gder = -(wts[None, :] * inv * inv).sum(axis=1)
            pole_part = inv.sum(axis=1)
            g = z * gsum - target
            correction = (gsum + z * gder) / g
        return pole_part + correction

    return logderiv


def _coefficient_roots(m: measures.Measure, alpha: float, c: float):
    """Companion-matrix fallback: monomial coefficients, numpy roots."""
    poles = m.atoms - c
    wts = m.weights
    full = np.array([1.0])
    for p in poles:
        full = np.convolve(full, [1.0, -p])
    coeffs = -(1.0 - alpha) * full
    acc = np.zeros(len(poles) + 1)
    for j, p in enumerate(poles):
        part = np.array([1.0])
        for i, q in enumerate(poles):
            if i != j:
                part = np.convolve(part, [1.0, -q])
        # multiply by w and weight, align degrees
        term = np.concatenate([wts[j] * part, [0.0]])
        acc[-term.size :] += term
    coeffs = coeffs + acc
    return np.roots(coeffs)


def _solve_atomic(m: measures.Measure, alpha: float, c: float):
    n = m.n_atoms
    poles = np.sort(m.atoms - c)
    span = max(poles[-1] - poles[0], 1.0)
    inits = []
    for k in range(n - 1):
        gap = poles[k + 1] - poles[k]
        mid = 0.5 * (poles[k] + poles[k + 1])
        sign = 1.0 if k % 2 == 0 else -1.0
        inits.append(complex(mid, sign * max(0.25 * gap, 1e-3 * span)))
    inits.append(complex(0.5 * (poles[0] + poles[-1]), span))
    roots, converged = aberth_roots(_aberth_logderiv(m, alpha, c), np.array(inits))
    if not converged and n <= 40:
        roots = _coefficient_roots(m, alpha, c)
    cands = [z if z.imag > 0 else z.conjugate() for z in roots if abs(z.imag) > _IM_THRESHOLD]
    polished = []
    for z in cands:
        w, resid = _newton_polish(m, alpha, c, z)
        if w.imag > _IM_THRESHOLD and resid < _POLISH_TARGET:
            polished.append(w)
    # collapse duplicates (conjugate partners land on the same point)
    unique = []
    for w in polished:
        if all(abs(w - u) > 1e-7 * (1.0 + abs(w)) for u in unique):
            unique.append(w)
    if not unique:
        return None
    if len(unique) > 1:
        raise MultipleUpperRoots(
            f"{len(unique)} upper-half-plane roots at c = {c}: {unique}"
        )
    return unique[0]


def solve_saddle(m: measures.Measure, alpha: float, c: float):
    """Unique upper-half-plane root of w G(w+c) = 1 - alpha, or None.

    None means the equation has only real roots at this c, i.e. c lies
    outside the bulk set. Raises MultipleUpperRoots if polishing leaves more
    than one distinct upper root (numerical degeneracy near an edge) and
    PointMass for a single-atom measure, for which the analysis is void.
    """
    _check_alpha(alpha)
    c = float(c)
    if m.kind == "atomic":
        if m.n_atoms == 1:
            raise PointMass("saddle analysis requires a measure that is not a point mass")
        w = _solve_atomic(m, alpha, c)
        if w is None:
            return None
        return make_saddle(m, alpha, c, w)
    family = SemicircleFamily()
    if not family.contains(alpha, c):
        return None
    w, resid = _newton_polish(m, alpha, c, family.root(alpha, c))
    if w.imag <= _IM_THRESHOLD or resid >= _POLISH_TARGET:
        return None
    return make_saddle(m, alpha, c, w)


def closed_form_saddle(family, alpha: float, c: float) -> Saddle:
    """Saddle from a family's explicit radical formula (the oracle path)."""
    _check_alpha(alpha)
    w = family.root(alpha, c)
    return make_saddle(family.measure(), alpha, c, w)


# ---------------------------------------------------------------------------
# bulk scan, atoms, mass audit
# ---------------------------------------------------------------------------


def _solves(m: measures.Measure, alpha: float, c: float) -> bool:
    try:
        return solve_saddle(m, alpha, c) is not None
    except MultipleUpperRoots as exc:
        warnings.warn(f"multiple upper roots at c = {c}: {exc}", stacklevel=2)
        return False


def scan_bulk(m: measures.Measure, alpha: float, grid):
    """Maximal runs of grid points where the saddle equation has a root.

    Returns a list of (lo, hi) pairs, each spanning from the last failing
    grid point before a run to the first failing point after it (clamped to
    the grid ends). Grid must be ascending and inside the support.
    """
    _check_alpha(alpha)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return []
    ok = np.array([_solves(m, alpha, float(g)) for g in grid])
    intervals = []
    i = 0
    while i < grid.size:
        if ok[i]:
            j = i
            while j + 1 < grid.size and ok[j + 1]:
                j += 1
            lo = grid[i - 1] if i > 0 else grid[i]
            hi = grid[j + 1] if j + 1 < grid.size else grid[j]
            intervals.append((float(lo), float(hi)))
            i = j + 1
        else:
            i += 1
    return intervals


def atomic_part(m: measures.Measure, alpha: float) -> AtomReport:
    """Atoms of the level-fraction limit measure.

    An atom of the input with weight above 1 - alpha survives with the
    excess as its mass; everything else dissolves into the bulk.
    """
    _check_alpha(alpha)
    if m.kind != "atomic":
        return AtomReport(positions=(), masses=())
    keep = m.weights > (1.0 - alpha)
    positions = tuple(float(x) for x in m.atoms[keep])
    masses = tuple(float(w - (1.0 - alpha)) for w in m.weights[keep])
    return AtomReport(positions=positions, masses=masses)


def boundary_transform(s: Saddle) -> complex:
    """Boundary value of the limit measure's Cauchy transform at c.

    Equals (1 - alpha) / conj(w); its imaginary part over pi reproduces the
    bulk density, and it satisfies the subordination identity
    G(c + (1 - alpha)/value) == value for the input measure's transform G.
    """
    return (1.0 - s.alpha) / s.w.conjugate()


def _refine_edge(m, alpha, c_ok, c_fail, steps=48):
    for _ in range(steps):
        mid = 0.5 * (c_ok + c_fail)
        if mid == c_ok or mid == c_fail:
            break
        if _solves(m, alpha, mid):
            c_ok = mid
        else:
            c_fail = mid
    return 0.5 * (c_ok + c_fail)


@dataclass(frozen=True)
class MassAudit:
    """Total recovered mass with its quadrature tolerance and breakdown."""

    value: float
    tolerance: float
    interval_mass: float
    atom_mass: float
    intervals: tuple


def _split_at_atoms(m, lo, hi):
    """Subintervals of (lo, hi) cut at interior atoms of the input measure.

    An atom whose weight is at (or numerically near) the dissolution
    threshold leaves a near-singular density spike at its position; cutting
    there turns the spike into an edge, which the cosine substitution in
    `_interval_mass` absorbs.
    """
    cuts = [lo]
    if m.kind == "atomic":
        span = hi - lo
        cuts += [float(a) for a in m.atoms if lo + 1e-12 * span < a < hi - 1e-12 * span]
    cuts.append(hi)
    return list(zip(cuts[:-1], cuts[1:]))


def _interval_mass(m, alpha, lo, hi, order, panels):
    """Integral of the bulk density over (lo, hi).

    The substitution c = mid + half*cos(theta) absorbs the inverse square
    root edge behavior of the density, leaving a smooth integrand in theta.
    """
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes, weights = gl_rule(order)
    total = 0.0
    edges = np.linspace(0.0, math.pi, panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        th = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        c_vals = mid + half * np.cos(th)
        dens = np.empty_like(c_vals)
        for k, cv in enumerate(c_vals):
            s = solve_saddle(m, alpha, float(cv))
            dens[k] = s.rho if s is not None else 0.0
        integrand = dens * half * np.sin(th)
        total += 0.5 * (b - a) * float(np.dot(weights, integrand))
    return total


def mass_audit(m: measures.Measure, alpha: float, quad_points: int = 400) -> MassAudit:
    """Recover alpha as bulk integral plus surviving atom masses.

    Scans for the bulk intervals, refines each endpoint by bisection (the
    density can vanish like a square root there, so endpoint placement
    matters more than panel count), integrates the density over each
    interval, and adds the atom report. The tolerance field is the
    disagreement between two panel resolutions.
    """
    _check_alpha(alpha)
    if quad_points < 100:
        raise ValidationError("quad_points must be at least 100")
    pad = 1e-6 * (m.support_hi - m.support_lo)
    grid = np.linspace(m.support_lo + pad, m.support_hi - pad, 2401)
    ok = np.array([_solves(m, alpha, float(g)) for g in grid])
    intervals = []
    i = 0
    while i < grid.size:
        if ok[i]:
            j = i
            while j + 1 < grid.size and ok[j + 1]:
                j += 1
            # bisect each edge; runs touching the grid ends refine out to the
            # support bound so no square-root tail mass is dropped
            fail_lo = grid[i - 1] if i > 0 else m.support_lo
            fail_hi = grid[j + 1] if j + 1 < grid.size else m.support_hi
            lo = _refine_edge(m, alpha, grid[i], fail_lo)
            hi = _refine_edge(m, alpha, grid[j], fail_hi)
            intervals.append((float(lo), float(hi)))
            i = j + 1
        else:
            i += 1
    order = 24
    panels = max(2, quad_points // (2 * order))
    pieces = [p for lo, hi in intervals for p in _split_at_atoms(m, lo, hi)]
    coarse = sum(_interval_mass(m, alpha, lo, hi, order, panels) for lo, hi in pieces)
    fine = sum(_interval_mass(m, alpha, lo, hi, order, 2 * panels) for lo, hi in pieces)
    tolerance = abs(fine - coarse)
    if tolerance > 1e-5:
        raise QuadratureNonConvergence(
            f"panel refinement moved the mass integral by {tolerance:.3e}"
        )
    atom_mass = float(sum(atomic_part(m, alpha).masses))
    return MassAudit(
        value=fine + atom_mass,
        tolerance=tolerance,
        interval_mass=fine,
        atom_mass=atom_mass,
        intervals=tuple(intervals),
    )
