"""Direct evaluation of the fixed-top-row minor-process kernel.

The kernel K((r,u),(s,v)) of the eigenvalue minor process with a frozen top
row x_1 > ... > x_n is a signed sum over the atoms x_j:

    sum_j [v<=u<x_j] - [v>u>x_j] of

        (x_j - u)^(n-r-1)        (n-s)! * e_{s-1}({v - x_i}_{i != j})
        -----------------   *    ------------------------------------
           (n-r-1)!                   prod_{i != j} (x_j - x_i)

where e_k is the elementary symmetric polynomial. Terms are assembled in
signed-log form and combined with exactly-rounded summation; a cancellation
monitor decides when to escalate to double-double arithmetic, the contour
integral route, or arbitrary precision. An exact-rational twin of the
evaluator serves as the correctness oracle for small n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import (
    AtomCollision,
    LevelOutOfRange,
    QuadratureNonConvergence,
    SizeGuard,
    ValidationError,
)
from .numerics import dd_add, dd_div, dd_mul, gl_rule, signed_logsumexp, two_sum
from .patterns import Spectrum, spectrum

try:  # pragma: no cover - exercised only when gmpy2 is installed
    from gmpy2 import mpq as _rational
except ImportError:  # pragma: no cover
    _rational = Fraction

ATOM_TOL = 1e-14

# Escalation thresholds for the automatic precision ladder, in decimal
# digits of observed cancellation. Plain doubles keep ~15.9 digits, and
# each of the n terms carries O(n) rounding steps of its own, so a
# 5.5-digit loss still leaves < 1e-9 relative accuracy up to n ~ 100;
# double-double keeps ~31 digits, so a 13-digit loss leaves ~1e-17.
_FLOAT_CANCEL_LIMIT = 5.5
# The float cancellation monitor saturates once the net sum drops to the
# rounding noise of the gross magnitude (about 16 digits), so observed
# losses are only trustworthy below this; beyond it the true cancellation
# is unknown and only self-verifying precision escalation is safe.
_DD_CANCEL_LIMIT = 13.0
_DD_LOG_LIMIT = 290.0  # keep exp(maxlog) clear of float overflow


@dataclass(frozen=True)
class KernelPoint:
    """A (level, position) point of the minor process."""

    level: int
    position: float


def _as_point(p) -> KernelPoint:
    if isinstance(p, KernelPoint):
        return p
    level, position = p
    return KernelPoint(int(level), float(position))


def _check_levels(n: int, r: int, s: int):
    if not 1 <= r <= n - 1:
        raise LevelOutOfRange(f"first level must lie in 1..{n - 1}, got {r}")
    if not 1 <= s <= n:
        raise LevelOutOfRange(f"second level must lie in 1..{n}, got {s}")


def _check_atom_distance(x: np.ndarray, u: float):
    d = np.abs(x - u)
    j = int(np.argmin(d))
    if d[j] < ATOM_TOL:
        raise AtomCollision(
            f"first position {u!r} coincides with atom {j + 1} at {x[j]!r}"
        )


@lru_cache(maxsize=64)
def _diff_tables(spec: Spectrum):
    """Log-magnitudes and signs of prod_{i != j} (x_j - x_i).

    For a strictly decreasing spectrum the product over i != j has exactly
    j - 1 negative factors (1-indexed j), so its sign is (-1)^(j-1).
    """
    x = spec.values
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    logprod = np.log(np.abs(diff)).sum(axis=1)
    signs = np.where(np.arange(spec.n) % 2 == 0, 1.0, -1.0)
    return logprod, signs


@lru_cache(maxsize=256)
def _esym_tables(spec: Spectrum, s: int, v: float):
    """e_{s-1}({v - x_i}_{i != j}) for every j, with magnitude bounds.

    Prefix/suffix coefficient passes over prod (1 + (v - x_i) T), truncated
    at degree s - 1, give all leave-one-out values in O(n*s). The parallel
    ``gross`` pass accumulates absolute values and bounds how much
    cancellation the signed pass may have absorbed.
    """
    x = spec.values
    n = spec.n
    k = s - 1
    y = v - x
    ay = np.abs(y)

    pref = np.zeros((n + 1, k + 1))
    pgross = np.zeros((n + 1, k + 1))
    pref[0, 0] = pgross[0, 0] = 1.0
    for i in range(n):
        pref[i + 1] = pref[i]
        pref[i + 1, 1:] += y[i] * pref[i, :-1]
        pgross[i + 1] = pgross[i]
        pgross[i + 1, 1:] += ay[i] * pgross[i, :-1]

    suf = np.zeros((n + 1, k + 1))
    sgross = np.zeros((n + 1, k + 1))
    suf[n, 0] = sgross[n, 0] = 1.0
    for i in range(n - 1, -1, -1):
        suf[i] = suf[i + 1]
        suf[i, 1:] += y[i] * suf[i + 1, :-1]
        sgross[i] = sgross[i + 1]
        sgross[i, 1:] += ay[i] * sgross[i + 1, :-1]

    # e_j = sum_a pref[j][a] * suf[j+1][k-a]
    e = (pref[:n, :] * suf[1:, ::-1]).sum(axis=1)
    gross = (pgross[:n, :] * sgross[1:, ::-1]).sum(axis=1)
    return e, gross


def _branch_mask(x: np.ndarray, u: float, v: float):
    """Indicator structure: which atoms contribute and with which sign."""
    if v <= u:
        return x > u, 1.0
    return x < u, -1.0


def _structural_zero(mask: np.ndarray, r: int, s: int) -> bool:
    """Certify an exactly-zero kernel value without summing anything.

    When every atom passes the indicator, the sum is the (n-1)-th divided
    difference of a polynomial of degree (n-r-1) + (s-1): each term's
    elementary symmetric factor over the other atoms expands into a degree
    s-1 polynomial of its own atom. Divided differences of that order
    annihilate all degrees up to n-2, i.e. exactly when s <= r.
    """
    return bool(mask.all()) and s <= r


def _kernel_float(spec: Spectrum, r: int, s: int, u: float, v: float):
    """Plain-double evaluation with a cancellation estimate.

    Returns ``(value, cancel_digits, maxlog)`` where ``cancel_digits``
    bounds the decimal digits lost to cancellation (including inside the
    elementary symmetric values) and ``maxlog`` is the largest term
    log-magnitude seen (overflow proxy).
    """
    x = spec.values
    n = spec.n
    m = n - r - 1
    mask, ind_sign = _branch_mask(x, u, v)
    if not mask.any():
        return 0.0, 0.0, -math.inf

    e, gross = _esym_tables(spec, s, float(v))
    logprod, psigns = _diff_tables(spec)

    d = x - u
    with np.errstate(divide="ignore"):
        base = (
            m * np.log(np.abs(d))
            + math.lgamma(n - s + 1)
            - math.lgamma(n - r)
            - logprod
        )
        le = np.log(np.abs(e))
        lg = np.log(np.maximum(gross, 1e-300))
    dsign = np.where(d >= 0, 1.0, -1.0) ** m if m % 2 else np.ones(n)
    tsign = ind_sign * dsign * psigns * np.sign(e)

    value, _, _ = signed_logsumexp(tsign[mask], (base + le)[mask])

    glog = (base + lg)[mask]
    gm = float(glog.max())
    gtotal = gm + math.log(math.fsum(np.exp(glog - gm)))
    if not math.isfinite(value) or value == 0.0:
        cancel = math.inf
    else:
        cancel = max(0.0, (gtotal - math.log(abs(value))) / math.log(10.0))
    return value, cancel, gtotal


def _dd_esym_tables(spec: Spectrum, s: int, v: float):
    """Double-double twin of :func:`_esym_tables` (values only)."""
    x = spec.values
    n = spec.n
    k = s - 1
    # exact double-double differences: feeding the once-rounded float
    # v - x would cap every downstream digit count at plain double
    yh, yl = two_sum(v, -x)

    ph = np.zeros((n + 1, k + 1))
    pl = np.zeros((n + 1, k + 1))
    ph[0, 0] = 1.0
    for i in range(n):
        ph[i + 1], pl[i + 1] = ph[i], pl[i]
        th, tl = dd_mul(ph[i, :-1], pl[i, :-1], float(yh[i]), float(yl[i]))
        ph[i + 1, 1:], pl[i + 1, 1:] = dd_add(ph[i, 1:], pl[i, 1:], th, tl)

    sh = np.zeros((n + 1, k + 1))
    sl = np.zeros((n + 1, k + 1))
    sh[n, 0] = 1.0
    for i in range(n - 1, -1, -1):
        sh[i], sl[i] = sh[i + 1], sl[i + 1]
        th, tl = dd_mul(sh[i + 1, :-1], sl[i + 1, :-1], float(yh[i]), float(yl[i]))
        sh[i, 1:], sl[i, 1:] = dd_add(sh[i + 1, 1:], sl[i + 1, 1:], th, tl)

    eh = np.zeros(n)
    el = np.zeros(n)
    for a in range(k + 1):
        th, tl = dd_mul(ph[:n, a], pl[:n, a], sh[1:, k - a], sl[1:, k - a])
        eh, el = dd_add(eh, el, th, tl)
    return eh, el


def _balanced_product(eh: float, el: float, numerators, denominators):
    """Multiply a double-double seed by num/den factor pairs without overflow.

    Factors are positive double-double (hi, lo) pairs, consumed
    largest-first, always steering the running magnitude back toward 1,
    so intermediate values stay representable whenever the final value is.
    """
    nums = sorted(numerators, key=lambda f: f[0], reverse=True)
    dens = sorted(denominators, key=lambda f: f[0], reverse=True)
    i = j = 0
    while i < len(nums) or j < len(dens):
        if j < len(dens) and (abs(eh) >= 1.0 or i == len(nums)):
            dh, dl = dens[j]
            j += 1
            eh, el = dd_div(eh, el, dh, dl)
        else:
            fh, fl = nums[i]
            i += 1
            eh, el = dd_mul(eh, el, fh, fl)
    return eh, el


def _kernel_dd(spec: Spectrum, r: int, s: int, u: float, v: float) -> float:
    """Double-double evaluation (~31 significant digits end to end)."""
    x = spec.values
    n = spec.n
    m = n - r - 1
    mask, ind_sign = _branch_mask(x, u, v)
    if not mask.any():
        return 0.0

    eh, el = _dd_esym_tables(spec, s, float(v))
    fs = n - s
    th = 0.0
    tl = 0.0
    for j in np.nonzero(mask)[0]:
        dh, dl = two_sum(float(x[j]), -u)
        ad = (dh, dl) if dh >= 0.0 else (-dh, -dl)
        numerators = [ad] * m + [(float(t), 0.0) for t in range(2, fs + 1)]
        denominators = []
        for i in range(n):
            if i != j:
                gh, gl = two_sum(float(x[j]), -float(x[i]))
                denominators.append((gh, gl) if gh >= 0.0 else (-gh, -gl))
        denominators += [(float(t), 0.0) for t in range(2, m + 1)]
        sign = ind_sign * (1.0 if dh >= 0 or m % 2 == 0 else -1.0)
        sign *= 1.0 if j % 2 == 0 else -1.0
        vh, vl = _balanced_product(eh[j], el[j], numerators, denominators)
        th, tl = dd_add(th, tl, sign * vh, sign * vl)
    return float(th + tl)


def _kernel_mp(spec: Spectrum, r: int, s: int, u: float, v: float, dps: int) -> float:
    """Arbitrary-precision evaluation; last rung of the ladder.

    The float cancellation monitor saturates near 16 digits, so the true
    cancellation may be far larger than any a-priori estimate (clustered
    atoms can lose hundreds of digits).  Each pass therefore measures the
    cancellation it actually met -- gross magnitude of the terms against
    the net sum -- and re-runs at higher precision until the working
    precision clears the measured loss by a safe margin.
    """
    import mpmath as mp

    from .errors import NumericalError

    x_raw = spec.values
    n = spec.n
    m = n - r - 1
    k = s - 1
    mask, ind_sign = _branch_mask(spec.values, u, v)
    active = np.nonzero(mask)[0]
    if active.size == 0:
        return 0.0
    floor_hits = 0
    while True:
        with mp.workdps(dps):
            x = [mp.mpf(float(t)) for t in x_raw]
            uu, vv = mp.mpf(u), mp.mpf(v)
            y = [vv - t for t in x]
            const = mp.factorial(n - s) / mp.factorial(m)
            total = mp.mpf(0)
            gross = mp.mpf(0)
            for j in active:
                coeff = [mp.mpf(1)] + [mp.mpf(0)] * k
                top = 0
                for i in range(n):
                    if i == j:
                        continue
                    top = min(top + 1, k)
                    for a in range(top, 0, -1):
                        coeff[a] += y[i] * coeff[a - 1]
                prod = mp.mpf(1)
                for i in range(n):
                    if i != j:
                        prod *= x[j] - x[i]
                term = (x[j] - uu) ** m * coeff[k] / prod
                total += term
                gross += abs(term)
            if gross == 0:
                return 0.0
            if total != 0:
                measured = float(mp.log10(gross / abs(total)))
                if measured + 25.0 <= dps:
                    return float(ind_sign * const * total)
                needed = int(measured) + 40
            else:
                measured = float("inf")
                needed = 4 * dps
            # An identically-zero sum (the alternating structure annihilates
            # low-degree polynomials) leaves the net at the rounding floor of
            # every precision; two consecutive floor sits at increasing
            # precision pin the value below ~1e-50 * gross, i.e. zero.
            if measured >= dps - 8.0:
                floor_hits += 1
                if floor_hits >= 2 and dps >= 60:
                    return 0.0
            else:
                floor_hits = 0
        if dps >= 20000:
            raise NumericalError(
                f"kernel cancellation exceeds {dps} working digits at "
                f"(r={r}, s={s}, u={u!r}, v={v!r})"
            )
        dps = min(20000, max(needed, 2 * dps))


def kernel_fixed_top(spec, r: int, s: int, u: float, v: float, mode: str = "auto") -> float:
    """Evaluate the fixed-top-row kernel K((r,u),(s,v)).

    Parameters
    ----------
    spec : Spectrum or array_like
        Strictly decreasing top row.
    r, s : int
        Levels; r in 1..n-1, s in 1..n.
    u, v : float
        Positions. ``u`` must stay at least 1e-14 away from every atom.
    mode : {"auto", "float", "dd", "mp", "contour"}
        "auto" starts from plain doubles and escalates (contour route at
        equal levels, then double-double, then arbitrary precision) when
        the cancellation monitor reports too many digits lost.

    Returns
    -------
    float
        Kernel value in the default gauge of the direct formula.
    """
    spec = spectrum(spec)
    n = spec.n
    _check_levels(n, r, s)
    u, v = float(u), float(v)
    _check_atom_distance(spec.values, u)

    if mode == "float":
        return _kernel_float(spec, r, s, u, v)[0]
    if mode == "dd":
        return _kernel_dd(spec, r, s, u, v)
    if mode == "mp":
        return _kernel_mp(spec, r, s, u, v, dps=60)
    if mode == "contour":
        from .contour import kernel_contour

        if r != s:
            raise ValidationError("contour route requires equal levels")
        return kernel_contour(spec, r, u, v)
    if mode != "auto":
        raise ValidationError(f"unknown kernel mode {mode!r}")

    mask, _ = _branch_mask(spec.values, u, v)
    if not mask.any() or _structural_zero(mask, r, s):
        return 0.0
    value, cancel, maxlog = _kernel_float(spec, r, s, u, v)
    if cancel <= _FLOAT_CANCEL_LIMIT and math.isfinite(value):
        return value
    if r == s:
        from .contour import _kernel_contour_with_error
        from .errors import NumericalError

        try:
            cval, cerr = _kernel_contour_with_error(
                spec, r, u, v, tol=1e-13, plateau_exit=True
            )
            # accept when the a-posteriori estimate pins the value to
            # ~1e-11 relative; a result at its own noise floor must be
            # escalated to a self-verifying rung instead. Past the
            # overflow regime (maxlog) the direct sum needs hundreds of
            # working digits, so there the quadrature's own roundoff
            # plateau is accepted as the best available answer whenever
            # it certifies ~1e-9 on the kernel's O(1) scale; forcing mp
            # certainty at that depth is what the explicit "mp" mode is
            # for.
            if cerr <= 1e-11 * abs(cval) or (
                maxlog >= _DD_LOG_LIMIT and cerr <= 1e-9 * max(1.0, abs(cval))
            ):
                return cval
        except NumericalError:
            pass  # fall through to the slow rungs
    if cancel <= _DD_CANCEL_LIMIT and maxlog < _DD_LOG_LIMIT:
        return _kernel_dd(spec, r, s, u, v)
    dps = 40 if not math.isfinite(cancel) else int(cancel) + 40
    return _kernel_mp(spec, r, s, u, v, dps=min(dps, 2000))


def _to_rational(value):
    if isinstance(value, (int, Fraction, str)):
        return _rational(value)
    if isinstance(value, float):
        return _rational(Fraction(value))
    return _rational(value)


def kernel_fixed_top_exact(values, r: int, s: int, u, v) -> Fraction:
    """Exact-rational kernel evaluation (correctness oracle).

    Uses a full leave-one-out coefficient convolution per atom, which is
    algorithmically independent of the prefix/suffix route taken by the
    float path. Inputs may be ints, Fractions, strings, or exactly
    representable floats.

    Raises
    ------
    SizeGuard
        If the spectrum has more than 16 atoms.
    """
    xs = [_to_rational(t) for t in values]
    n = len(xs)
    if n > 16:
        raise SizeGuard("exact kernel oracle is limited to n <= 16")
    if any(xs[i] <= xs[i + 1] for i in range(n - 1)):
        raise ValidationError("spectrum must be strictly decreasing")
    _check_levels(n, r, s)
    uu, vv = _to_rational(u), _to_rational(v)
    if any(t == uu for t in xs):
        raise AtomCollision("first position coincides with an atom")

    m = n - r - 1
    k = s - 1
    if vv <= uu:
        active = [j for j in range(n) if xs[j] > uu]
        ind = 1
    else:
        active = [j for j in range(n) if xs[j] < uu]
        ind = -1

    fs_fact = math.factorial(n - s)
    m_fact = math.factorial(m)
    total = _rational(0)
    for j in active:
        coeff = [_rational(1)] + [_rational(0)] * k
        top = 0
        for i in range(n):
            if i == j:
                continue
            top = min(top + 1, k)
            yi = vv - xs[i]
            for a in range(top, 0, -1):
                coeff[a] += yi * coeff[a - 1]
        prod = _rational(1)
        for i in range(n):
            if i != j:
                prod *= xs[j] - xs[i]
        total += (xs[j] - uu) ** m * coeff[k] / prod
    total = ind * fs_fact * total / m_fact
    return Fraction(int(total.numerator), int(total.denominator))


def correlation_det(spec, points, mode: str = "auto") -> float:
    """Determinant of the kernel matrix over a list of points.

    ``points`` is a sequence of ``KernelPoint`` or ``(level, position)``
    pairs, at most 8 of them. The m-point correlation function of the
    process is exactly this determinant.
    """
    pts = [_as_point(p) for p in points]
    if len(pts) > 8:
        raise SizeGuard("correlation determinant is limited to 8 points")
    if not pts:
        return 1.0
    spec = spectrum(spec)
    mat = np.empty((len(pts), len(pts)))
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            mat[i, j] = kernel_fixed_top(
                spec, a.level, b.level, a.position, b.position, mode=mode
            )
    return float(np.linalg.det(mat))


def level_mass(spec, r: int, quad_points: int = 400) -> float:
    """Integral of the diagonal kernel over level ``r``.

    The diagonal u -> K((r,u),(r,u)) is piecewise polynomial with kinks at
    the atoms, so the integral is computed atom-interval by atom-interval
    with Gauss-Legendre panels and verified at a higher order. The result
    equals the particle count r up to quadrature error.
    """
    spec = spectrum(spec)
    n = spec.n
    _check_levels(n, r, r)
    breaks = sorted({spec.lo, spec.hi, *map(float, spec.values)})
    breaks = [b for b in breaks if spec.lo <= b <= spec.hi]

    def diag(us):
        return [kernel_fixed_top(spec, r, r, t, t) for t in np.atleast_1d(us)]

    pieces = max(1, len(breaks) - 1)
    order = max(8, n // 2 + 2, quad_points // pieces)
    order = min(order, 96)

    def integrate(q):
        total = 0.0
        x, w = gl_rule(q)
        for a, b in zip(breaks[:-1], breaks[1:]):
            if b <= a:
                continue
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            vals = diag(mid + half * x)
            total += half * float(np.dot(w, vals))
        return total

    coarse = integrate(order)
    fine = integrate(order + 6)
    if abs(fine - coarse) > 1e-8 * max(1.0, abs(fine)):
        raise QuadratureNonConvergence(
            f"level mass quadrature disagreement {abs(fine - coarse):.3e}"
        )
    return fine
