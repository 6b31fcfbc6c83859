"""Low-level numerical toolkit.

Contents: signed log-magnitude scalars (`LogSigned`), a signed log-sum-exp
with a cancellation monitor, vectorized double-double (~31 digit) arithmetic,
an Aberth-Ehrlich root finder driven by a caller-supplied log-derivative,
Gauss-Legendre panel quadrature, a Kahan-style complex log1p, and a
fraction-free Bareiss determinant for exact entries.

Everything here is pure and allocation-light; the heavier policy decisions
(which precision to use when) live with the callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonConvergence

EPS = np.finfo(float).eps
_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


# ---------------------------------------------------------------------------
# signed log-magnitude arithmetic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogSigned:
    """A real number stored as sign and natural log of magnitude.

    Multiplication is exact in this representation up to rounding of the log
    sum, which makes it the right carrier for long products of factors with
    wildly different scales. Zero is sign 0 with logmag -inf.
    """

    sign: int
    logmag: float

    @staticmethod
    def of(x: float) -> "LogSigned":
        if x == 0.0:
            return LogSigned(0, -math.inf)
        return LogSigned(1 if x > 0 else -1, math.log(abs(x)))

    def __mul__(self, other: "LogSigned") -> "LogSigned":
        return LogSigned(self.sign * other.sign, self.logmag + other.logmag)

    def __truediv__(self, other: "LogSigned") -> "LogSigned":
        return LogSigned(self.sign * other.sign, self.logmag - other.logmag)

    def pow_int(self, k: int) -> "LogSigned":
        if self.sign == 0:
            return LogSigned(0, -math.inf) if k > 0 else LogSigned(1, 0.0)
        sign = self.sign if k % 2 else 1
        return LogSigned(sign, k * self.logmag)

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.logmag)
        except OverflowError:
            return self.sign * math.inf


def signed_logsumexp(signs, logmags):
    """Sum of sign_i * exp(logmag_i) with a cancellation report.

    Returns ``(total, cancellation_digits, scale)`` where ``total`` is the
    float sum, ``cancellation_digits`` estimates how many decimal digits were
    lost to cancellation (log10 of the ratio sum-of-magnitudes / magnitude of
    the sum), and ``scale`` is the log of the largest term. The summation
    itself is exactly rounded (math.fsum), so the monitor measures intrinsic
    cancellation of the data, not of the algorithm.
    """
    signs = np.asarray(signs, dtype=float)
    logmags = np.asarray(logmags, dtype=float)
    live = logmags > -math.inf
    if not live.any():
        return 0.0, 0.0, -math.inf
    signs, logmags = signs[live], logmags[live]
    m = float(logmags.max())
    scaled = np.exp(logmags - m)
    total = math.fsum(signs * scaled)
    gross = math.fsum(scaled)
    if total == 0.0:
        digits = math.log10(gross / EPS) if gross > 0 else 0.0
    else:
        digits = max(0.0, math.log10(gross / abs(total)))
    try:
        value = total * math.exp(m)
    except OverflowError:
        value = math.copysign(math.inf, total) if total != 0.0 else 0.0
    return value, digits, m


# ---------------------------------------------------------------------------
# double-double arithmetic (vectorized error-free transforms)
# ---------------------------------------------------------------------------


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(xh, xl, yh, yl):
    s, e = two_sum(xh, yh)
    e = e + (xl + yl)
    hi = s + e
    lo = e - (hi - s)
    return hi, lo


def dd_neg(xh, xl):
    return -xh, -xl


def dd_sub(xh, xl, yh, yl):
    return dd_add(xh, xl, -yh, -yl)


def dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    hi = p + e
    lo = e - (hi - p)
    return hi, lo


def dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    ph, pl = dd_mul(q1, np.zeros_like(q1) if np.ndim(q1) else 0.0, yh, yl)
    rh, rl = dd_sub(xh, xl, ph, pl)
    q2 = (rh + rl) / yh
    hi = q1 + q2
    lo = q2 - (hi - q1)
    return hi, lo


def dd_from_float(x):
    x = np.asarray(x, dtype=float)
    return x.copy(), np.zeros_like(x)


# ---------------------------------------------------------------------------
# complex helpers
# ---------------------------------------------------------------------------


def clog1p(z):
    """log(1 + z) for complex z, accurate for small |z| (Kahan's trick)."""
    z = np.asarray(z, dtype=complex)
    u = 1.0 + z
    out = np.log(np.where(u == 0.0, 1.0, u))
    # For u != 1 rescale by the exactly-representable increment u - 1.
    d = u - 1.0
    safe = (d != 0.0) & (u != 0.0)
    out = np.where(safe, out * np.where(safe, z, 1.0) / np.where(safe, d, 1.0), out)
    out = np.where(u == 0.0, complex(-math.inf, 0.0), out)
    out = np.where(d == 0.0, z, out)
    return out


# ---------------------------------------------------------------------------
# Aberth-Ehrlich simultaneous root iteration
# ---------------------------------------------------------------------------


def aberth_roots(logderiv, inits, tol=1e-13, max_iter=120):
    """Find all roots of a polynomial given only z -> P'(z)/P(z).

    The caller supplies the log-derivative in whatever stable form it has
    (typically a pole sum plus a rational correction, never monomial
    coefficients). ``inits`` must be pairwise distinct and not equal to any
    root of P' that is not a root of P.

    Returns ``(roots, converged)``; ``converged`` is False only if the
    iteration stagnated above tolerance for some root. Tolerances are
    relative to 1 + |root|.
    """
    z = np.asarray(inits, dtype=complex).copy()
    n = z.size
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        ld = logderiv(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(ld != 0, 1.0 / ld, 0.0)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            repulse = (1.0 / diff).sum(axis=1) - 1.0 / np.diag(diff)
        denom = 1.0 - newton * repulse
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.abs(denom) > 1e-300, newton / denom, newton)
        step = np.where(done, 0.0, step)
        z_new = z - step
        moved = np.abs(step)
        done |= moved <= tol * (1.0 + np.abs(z_new))
        z = z_new
        if done.all():
            return z, True
    return z, bool(done.all())


# ---------------------------------------------------------------------------
# Gauss-Legendre panel quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def gl_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def gl_panel(f, a: float, b: float, order: int) -> float:
    """Integral of a scalar-or-vectorized f over [a, b], one panel."""
    x, w = gl_rule(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = f(mid + half * x)
    return half * float(np.dot(w, np.asarray(vals, dtype=float)))


def gl_intervals(f, breakpoints, order: int) -> float:
    """Panel-per-interval Gauss-Legendre over consecutive breakpoints."""
    total = 0.0
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        if b > a:
            total += gl_panel(f, a, b, order)
    return total


# ---------------------------------------------------------------------------
# exact determinant (fraction-free Bareiss)
# ---------------------------------------------------------------------------


def bareiss_det(rows):
    """Determinant of a square matrix of exact entries (int/Fraction/mpq).

    Fraction-free elimination; every intermediate division is exact, so the
    result is exact for exact inputs. Also fine for small float matrices.
    """
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0 * m[0][0]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]
