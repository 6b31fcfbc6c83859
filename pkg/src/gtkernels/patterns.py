"""Triangular interlaced arrays and small combinatorial primitives.

A depth-n pattern stores one vector per level, level r holding r entries in
decreasing order. Consecutive levels interlace: weakly for eigenvalue minor
data, strictly-then-weakly for the particle coordinates the kernels use.
Also here: the order-indicator determinant characterizing interlacing, the
Vandermonde product, and elementary symmetric polynomials evaluated through
coefficient convolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .numerics import LogSigned, bareiss_det, dd_add, dd_mul


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Strictly decreasing top-row vector with interval bounds [lo, hi]."""

    values: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.size == 0:
            raise ValidationError("spectrum must be non-empty")
        if vals.size > 1 and not np.all(np.diff(vals) < 0):
            raise ValidationError("spectrum must be strictly decreasing")
        if self.lo > vals[-1] or self.hi < vals[0]:
            raise ValidationError("bounds do not contain the spectrum")

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def min_gap(self) -> float:
        if self.n < 2:
            return math.inf
        return float(np.min(-np.diff(self.values)))


def spectrum(values, lo=None, hi=None) -> Spectrum:
    """Build a Spectrum; bounds default to the value hull."""
    if isinstance(values, Spectrum):
        return values
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValidationError("spectrum must be non-empty")
    if lo is None:
        lo = float(vals.min())
    if hi is None:
        hi = float(vals.max())
    return Spectrum(values=vals, lo=float(lo), hi=float(hi))


@dataclass(frozen=True, eq=False)
class GTPattern:
    """Interlaced triangular array; levels[r-1] has exactly r entries."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(np.asarray(lv, dtype=float) for lv in self.levels)
        object.__setattr__(self, "levels", levels)
        if len(levels) == 0:
            raise ValidationError("pattern needs at least one level")
        for r, lv in enumerate(levels, start=1):
            if lv.size != r:
                raise ValidationError(f"level {r} has {lv.size} entries, expected {r}")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def to_json(self) -> str:
        return json.dumps([list(map(float, lv)) for lv in self.levels])

    @staticmethod
    def from_json(text: str) -> "GTPattern":
        return GTPattern(tuple(json.loads(text)))


def check_symmetric_interlacing(p: GTPattern, atol: float = 0.0) -> bool:
    """Weak interlacing between every pair of consecutive levels.

    Level r+1 entries b and level r entries a must satisfy
    b_1 >= a_1 >= b_2 >= a_2 >= ... >= b_{r+1}.  A nonzero ``atol``
    allows violations up to that size (floating-point eigensolver slack).
    """
    for a, b in zip(p.levels[:-1], p.levels[1:]):
        if not (np.all(b[:-1] >= a - atol) and np.all(a >= b[1:] - atol)):
            return False
    return True


def check_asymmetric_interlacing(p: GTPattern) -> bool:
    """Strict on the upper side, weak on the lower: b_k > a_k >= b_{k+1}."""
    for a, b in zip(p.levels[:-1], p.levels[1:]):
        if not (np.all(b[:-1] > a) and np.all(a >= b[1:])):
            return False
    return True


def warren_indicator(z, z_next) -> int:
    """Determinant of the pairwise order indicators, 1 iff interlaced.

    Both vectors are sorted decreasing; entry (j, k) is 1 when the k-th entry
    of the longer-by-convention vector exceeds the j-th entry of the other.
    Comparisons are strict, so ties give 0. Evaluated exactly (integer
    elimination), hence the return value is a genuine integer.
    """
    a = np.sort(np.asarray(z, dtype=float))[::-1]
    b = np.sort(np.asarray(z_next, dtype=float))[::-1]
    if a.size != b.size:
        raise ValidationError("warren_indicator expects equal lengths")
    mat = (b[None, :] > a[:, None]).astype(int)
    return int(bareiss_det([[Fraction(int(v)) for v in row] for row in mat]))


def vandermonde(y) -> float:
    """Product of y_i - y_j over i < j (empty product is 1)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    out = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            out *= y[i] - y[j]
    return out


def vandermonde_logsigned(y) -> LogSigned:
    """Same product as `vandermonde` in overflow-free form."""
    y = np.asarray(y, dtype=float)
    acc = LogSigned(1, 0.0)
    n = y.size
    for i in range(n):
        for j in range(i + 1, n):
            acc = acc * LogSigned.of(float(y[i] - y[j]))
    return acc


def elem_sym_all(values, kmax=None):
    """e_0 .. e_kmax of the input values by coefficient convolution.

    The running coefficients are kept in double-double precision, so the
    returned floats absorb the mixed-sign cancellation that plain double
    accumulation would leak. e_k = 0 for k > len(values).
    """
    vals = np.asarray(values, dtype=float)
    n = vals.size
    if kmax is None:
        kmax = n
    kmax = int(kmax)
    hi = np.zeros(kmax + 1)
    lo = np.zeros(kmax + 1)
    hi[0] = 1.0
    top = 0
    for v in vals:
        top = min(top + 1, kmax)
        if top == 0:
            continue
        # coeff[k] += v * coeff[k-1]; the right side reads pre-update values
        ph, pl = dd_mul(hi[:top].copy(), lo[:top].copy(), float(v), 0.0)
        sh, sl = dd_add(hi[1 : top + 1], lo[1 : top + 1], ph, pl)
        hi[1 : top + 1], lo[1 : top + 1] = sh, sl
    return hi + lo


def elem_sym(values, k: int) -> float:
    """Elementary symmetric polynomial e_k; 0 beyond the input length."""
    if k < 0:
        raise ValidationError("k must be non-negative")
    vals = np.asarray(values, dtype=float)
    if k > vals.size:
        return 0.0
    return float(elem_sym_all(vals, kmax=k)[k])
