"""Closed forms for three example measures.

For each family the saddle equation  w * G(w + c) = 1 - alpha  reduces to a
polynomial of degree <= 3 in Y = w + c and is solved here by radicals,
independently of the iterative solver, together with the exact interval(s)
of bulk points c where the root is non-real. These closed forms are the
quantitative ground truth the solver is tested against.

Families:
  * semicircle law;
  * two atoms, (1-beta) at 0 and beta at 1;
  * three equal atoms at -1, 0, 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import measures
from .errors import OutsideBulk, ValidationError


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")


@dataclass(frozen=True)
class SemicircleFamily:
    """Semicircle measure; bulk interval (-2 sqrt(alpha), 2 sqrt(alpha))."""

    def measure(self) -> measures.Measure:
        return measures.semicircle()

    def intervals(self, alpha: float):
        _check_alpha(alpha)
        e = 2.0 * math.sqrt(alpha)
        return [(-e, e)]

    def contains(self, alpha: float, c: float) -> bool:
        _check_alpha(alpha)
        return c * c < 4.0 * alpha

    def root(self, alpha: float, c: float) -> complex:
        """Upper-half-plane solution w = (1-alpha)(c + i sqrt(4 alpha - c^2)) / (2 alpha)."""
        if not self.contains(alpha, c):
            raise OutsideBulk(f"c = {c} outside (-2 sqrt(alpha), 2 sqrt(alpha))")
        return (1.0 - alpha) * complex(c, math.sqrt(4.0 * alpha - c * c)) / (2.0 * alpha)

    def density(self, alpha: float, c: float) -> float:
        """Bulk density sqrt(alpha) * rho_semicircle(c / sqrt(alpha))."""
        if not self.contains(alpha, c):
            return 0.0
        s = math.sqrt(alpha)
        return s * float(measures.semicircle_density(c / s))


@dataclass(frozen=True)
class TwoAtomFamily:
    """Measure (1-beta) delta_0 + beta delta_1.

    In Y = w + c the saddle equation is the quadratic
        alpha Y^2 + (beta - alpha - c) Y + c (1 - beta) = 0,
    whose discriminant factors as (c - lo)(c - hi) with
        lo, hi = (sqrt((1-alpha) beta) -+ sqrt(alpha (1-beta)))^2.
    """

    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValidationError(f"beta must be in (0, 1), got {self.beta}")

    def measure(self) -> measures.Measure:
        return measures.atomic([0.0, 1.0], [1.0 - self.beta, self.beta])

    def endpoints(self, alpha: float):
        _check_alpha(alpha)
        p = math.sqrt((1.0 - alpha) * self.beta)
        q = math.sqrt(alpha * (1.0 - self.beta))
        return (p - q) ** 2, (p + q) ** 2

    def intervals(self, alpha: float):
        lo, hi = self.endpoints(alpha)
        return [(lo, hi)]

    def contains(self, alpha: float, c: float) -> bool:
        lo, hi = self.endpoints(alpha)
        return lo < c < hi

    def root(self, alpha: float, c: float) -> complex:
        if not self.contains(alpha, c):
            raise OutsideBulk(f"c = {c} outside the bulk interval {self.endpoints(alpha)}")
        lo, hi = self.endpoints(alpha)
        im = math.sqrt((c - lo) * (hi - c))
        y = complex(c + alpha - self.beta, im) / (2.0 * alpha)
        return y - c

    def density(self, alpha: float, c: float) -> float:
        """Bulk density sqrt((c - lo)(hi - c)) / (2 pi c (1 - c))."""
        if not self.contains(alpha, c):
            return 0.0
        lo, hi = self.endpoints(alpha)
        return math.sqrt((c - lo) * (hi - c)) / (2.0 * math.pi * c * (1.0 - c))


@dataclass(frozen=True)
class ThreeAtomFamily:
    """Equal atoms at -1, 0, 1.

    In Y = w + c the saddle equation is the cubic
        alpha Y^3 - c Y^2 + (2/3 - alpha) Y + c/3 = 0,
    solved by the trigonometric/Cardano method. Membership depends on c^2
    only: the root is non-real exactly when c^2 lies in (max(lo, 0), hi)
    with lo, hi given by `endpoint_squares`; for alpha < 2/3 that is one
    interval around 0, for alpha >= 2/3 two intervals, 0 excluded.
    """

    def measure(self) -> measures.Measure:
        return measures.atomic([-1.0, 0.0, 1.0], [1 / 3, 1 / 3, 1 / 3])

    def endpoint_squares(self, alpha: float):
        _check_alpha(alpha)
        t = 2.0 / 3.0 - alpha
        g = 3.0 * alpha * alpha + 6.0 * t * alpha - t * t
        disc = g * g + (64.0 / 3.0) * t ** 3 * alpha
        r = math.sqrt(disc)
        return 0.375 * (g - r), 0.375 * (g + r)

    def intervals(self, alpha: float):
        lo, hi = self.endpoint_squares(alpha)
        if lo <= 0.0:
            return [(-math.sqrt(hi), math.sqrt(hi))]
        return [(-math.sqrt(hi), -math.sqrt(lo)), (math.sqrt(lo), math.sqrt(hi))]

    def contains(self, alpha: float, c: float) -> bool:
        lo, hi = self.endpoint_squares(alpha)
        return max(lo, 0.0) < c * c < hi

    def root(self, alpha: float, c: float) -> complex:
        if not self.contains(alpha, c):
            raise OutsideBulk(f"c = {c} outside the bulk interval(s) at alpha = {alpha}")
        # depressed cubic t^3 + p t + q via Y = t + c / (3 alpha)
        a, b, d, e = alpha, -c, 2.0 / 3.0 - alpha, c / 3.0
        p = (3.0 * a * d - b * b) / (3.0 * a * a)
        q = (2.0 * b ** 3 - 9.0 * a * b * d + 27.0 * a * a * e) / (27.0 * a ** 3)
        disc = 0.25 * q * q + p ** 3 / 27.0
        if disc <= 0.0:
            raise OutsideBulk(f"cubic has three real roots at c = {c}")
        s = math.sqrt(disc)
        # pick the cube-root branch where -q/2 and +-s add instead of
        # cancel (near p = 0 the other branch loses half the digits)
        big = -0.5 * q - s if q > 0.0 else -0.5 * q + s
        u = math.copysign(abs(big) ** (1.0 / 3.0), big)
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        t_upper = complex(-0.5 * (u + v), 0.5 * math.sqrt(3.0) * abs(u - v))
        y = t_upper + b / (-3.0 * a)
        return y - c


def closed_form_families():
    """The canonical trio of closed-form families, keyed by plain names."""
    return {
        "semicircle": SemicircleFamily(),
        "two_atom_half": TwoAtomFamily(0.5),
        "three_atom": ThreeAtomFamily(),
    }
