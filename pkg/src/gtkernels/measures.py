"""Probability measures on a real interval: atomic laws and the semicircle.

These are the two inputs every other module consumes. Atomic measures carry
explicit atoms and weights; the semicircle law (support [-2, 2], density
sqrt(4 - x^2) / (2 pi)) is handled through closed forms. General measures
enter only by atomic discretization (`quantile_spectrum`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import EmptySpectrum, PoleProximity, ValidationError

_ATOL = 1e-12


@dataclass(frozen=True)
class Measure:
    """An atomic or semicircle measure with total mass `mass`.

    kind is "atomic" or "semicircle". For atomic measures `atoms` is strictly
    ascending and `weights` is positive with sum equal to `mass`. Support
    bounds [support_lo, support_hi] contain all atoms; the semicircle is
    always mass 1 on [-2, 2].
    """

    kind: str
    atoms: np.ndarray = field(default_factory=lambda: np.empty(0))
    weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    mass: float = 1.0
    support_lo: float = -2.0
    support_hi: float = 2.0

    def __post_init__(self):
        if self.kind not in ("atomic", "semicircle"):
            raise ValidationError(f"unknown measure kind {self.kind!r}")
        if self.kind == "atomic":
            atoms = np.asarray(self.atoms, dtype=float)
            weights = np.asarray(self.weights, dtype=float)
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "weights", weights)
            if atoms.size == 0:
                raise ValidationError("atomic measure needs at least one atom")
            if atoms.size != weights.size:
                raise ValidationError("atoms and weights differ in length")
            if not np.all(np.diff(atoms) > 0):
                raise ValidationError("atoms must be strictly ascending")
            if not np.all(weights > 0):
                raise ValidationError("weights must be positive")
            if abs(float(weights.sum()) - self.mass) > _ATOL:
                raise ValidationError("weights do not sum to the total mass")
            if self.support_lo > atoms[0] or self.support_hi < atoms[-1]:
                raise ValidationError("support bounds do not contain the atoms")
        else:
            object.__setattr__(self, "atoms", np.empty(0))
            object.__setattr__(self, "weights", np.empty(0))
            object.__setattr__(self, "mass", 1.0)
            object.__setattr__(self, "support_lo", -2.0)
            object.__setattr__(self, "support_hi", 2.0)

    @property
    def n_atoms(self) -> int:
        return int(self.atoms.size)


def atomic(atoms, weights, support=None) -> Measure:
    """Atomic measure; support defaults to the atom hull."""
    atoms = np.asarray(atoms, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if support is None:
        support = (float(atoms.min()), float(atoms.max()))
    return Measure(
        kind="atomic",
        atoms=atoms,
        weights=weights,
        mass=float(weights.sum()),
        support_lo=float(support[0]),
        support_hi=float(support[1]),
    )


def semicircle() -> Measure:
    return Measure(kind="semicircle")


# ---------------------------------------------------------------------------
# transforms and densities
# ---------------------------------------------------------------------------


def cauchy_transform(m: Measure, w: complex) -> complex:
    """G(w) = integral of 1/(w - x) against the measure.

    Analytic off the support; maps the upper half-plane into the lower one.
    For the semicircle the closed form (w - w*sqrt(1 - 4/w^2)) / 2 is used;
    the principal square root of 1 - 4/w^2 picks the branch with G ~ 1/w at
    infinity on both sides of the support.
    """
    w = complex(w)
    if m.kind == "atomic":
        dist = np.abs(w - m.atoms)
        if dist.min() < _ATOL:
            raise PoleProximity(f"w = {w} is within {_ATOL} of an atom")
        return complex(np.sum(m.weights / (w - m.atoms)))
    if w.imag == 0.0 and -2.0 - _ATOL < w.real < 2.0 + _ATOL:
        raise PoleProximity(f"w = {w} is on (or within {_ATOL} of) the support cut")
    return (w - w * np.sqrt(1.0 - 4.0 / (w * w))) / 2.0


def cauchy_transform_deriv(m: Measure, w: complex) -> complex:
    """G'(w); same branch conventions as cauchy_transform."""
    w = complex(w)
    if m.kind == "atomic":
        dist = np.abs(w - m.atoms)
        if dist.min() < _ATOL:
            raise PoleProximity(f"w = {w} is within {_ATOL} of an atom")
        return complex(-np.sum(m.weights / (w - m.atoms) ** 2))
    if w.imag == 0.0 and -2.0 - _ATOL < w.real < 2.0 + _ATOL:
        raise PoleProximity(f"w = {w} is on (or within {_ATOL} of) the support cut")
    # G solves G^2 - w G + 1 = 0, so G' = G / (2 G - w) on the same branch.
    g = (w - w * np.sqrt(1.0 - 4.0 / (w * w))) / 2.0
    return g / (2.0 * g - w)


def semicircle_density(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < 2.0, np.sqrt(np.maximum(0.0, 4.0 - x * x)) / (2.0 * math.pi), 0.0)


def semicircle_cdf(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    inner = 0.5 + xc * np.sqrt(4.0 - xc * xc) / (4.0 * math.pi) + np.arcsin(xc / 2.0) / math.pi
    return np.where(x <= -2.0, 0.0, np.where(x >= 2.0, 1.0, inner))


def cdf(m: Measure, x) -> np.ndarray:
    """Cumulative distribution function F(x) = measure of (-inf, x]."""
    x = np.asarray(x, dtype=float)
    if m.kind == "semicircle":
        return semicircle_cdf(x)
    cum = np.concatenate([[0.0], np.cumsum(m.weights)])
    idx = np.searchsorted(m.atoms, x, side="right")
    return cum[idx]


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------


def from_spectrum(x) -> Measure:
    """Equal-weight atomic measure at the points of a decreasing spectrum."""
    vals = np.asarray(getattr(x, "values", x), dtype=float)
    if vals.size == 0:
        raise EmptySpectrum("cannot build a measure from an empty spectrum")
    if vals.size > 1 and not np.all(np.diff(vals) < 0):
        raise ValidationError("spectrum must be strictly decreasing")
    asc = vals[::-1].copy()
    n = asc.size
    return atomic(asc, np.full(n, 1.0 / n))


def _semicircle_quantile(p: float) -> float:
    if p <= 0.0:
        return -2.0
    if p >= 1.0:
        return 2.0
    return brentq(lambda t: float(semicircle_cdf(t)) - p, -2.0, 2.0, xtol=1e-14)


def quantile_spectrum(m: Measure, n: int) -> np.ndarray:
    """Deterministic n-point discretization, returned strictly decreasing.

    Point i (1-based, decreasing output) sits at the (n - i + 1/2)/n quantile
    of the measure. Coincident quantiles (atoms) are spread symmetrically by
    eps * rank with eps = (support width) * 1e-9 / n, which keeps the output
    strictly decreasing and inside the support while leaving the weak limit
    untouched.
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    probs = (n - np.arange(1, n + 1) + 0.5) / n  # decreasing
    if m.kind == "semicircle":
        return np.array([_semicircle_quantile(p) for p in probs])
    cum = np.cumsum(m.weights) / m.mass
    idx = np.searchsorted(cum, probs, side="left")
    idx = np.minimum(idx, m.n_atoms - 1)
    raw = m.atoms[idx]
    eps = (m.support_hi - m.support_lo) * 1e-9 / n
    out = raw.astype(float).copy()
    i = 0
    while i < n:
        j = i
        while j + 1 < n and raw[j + 1] == raw[i]:
            j += 1
        run = j - i + 1
        if run > 1:
            # symmetric spread, decreasing within the run; runs at a support
            # edge shift inward so the output stays within [lo, hi]
            ranks = np.arange(run)
            half = eps * (run - 1) / 2.0
            center = raw[i]
            if center - half < m.support_lo:
                center = raw[i] + half
            elif center + half > m.support_hi:
                center = raw[i] - half
            out[i : j + 1] = center + eps * ((run - 1) / 2.0 - ranks)
        i = j + 1
    if not np.all(np.diff(out) < 0):
        raise ValidationError("quantile spread failed to produce strict descent")
    return out


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------


def measure_to_json(m: Measure) -> str:
    if m.kind == "semicircle":
        return json.dumps({"kind": "semicircle"})
    return json.dumps(
        {
            "kind": "atomic",
            "atoms": list(map(float, m.atoms)),
            "weights": list(map(float, m.weights)),
            "support": [float(m.support_lo), float(m.support_hi)],
        }
    )


def measure_from_json(text: str) -> Measure:
    data = json.loads(text)
    kind = data.get("kind")
    if kind == "semicircle":
        return semicircle()
    if kind == "atomic":
        return atomic(data["atoms"], data["weights"], support=data.get("support"))
    raise ValidationError(f"unknown measure kind {kind!r}")


def load_measure(path: str) -> Measure:
    with open(path, "r", encoding="utf-8") as fh:
        return measure_from_json(fh.read())
