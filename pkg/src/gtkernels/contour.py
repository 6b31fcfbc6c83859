"""Contour-integral route for the equal-level kernel.

K((r,u),(r,v)) admits a double contour representation: an outer circle
around the origin in w and an inner circle in z that encloses exactly the
shifted atoms selected by the indicator branch of the direct formula
(atoms above u when v <= u, atoms below u when v > u, with opposite
orientations). The integrand separates as

    F(w, z) = sum_j A_j(w) * B_j(z)

    A_j(w) = prod_{i != j} (w + v - x_i) / w^(n-r+1)
    B_j(z) = D(z) * (v - x_j) / ((z + v - x_j) * prod_i (z + v - x_i))

where D(z) = ((z + v - u)^(n-r) - z^(n-r)) / (v - u) is a divided
difference (its u = v limit is (n-r) z^(n-r-1)). Both circles are sampled
with periodic trapezoid rules, which converge geometrically for analytic
integrands; the node count doubles until two successive values agree.

This route is the workhorse for large n at equal levels: its cost is
O(n * M) with no catastrophic cancellation, where the direct sum can lose
hundreds of digits.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    ContourSeparationFailure,
    LevelOutOfRange,
    NonConvergence,
    ValidationError,
)
from .numerics import clog1p
from .patterns import spectrum

_MAX_NODES = 2**16
_PROBES = 32


def _cexpm1(w: np.ndarray) -> np.ndarray:
    """exp(w) - 1 for complex w, accurate near w = 0."""
    x, y = w.real, w.imag
    return (np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2) + 1j * (
        np.exp(x) * np.sin(y)
    )


def _log_divided_difference(z: np.ndarray, delta: float, k: int) -> np.ndarray:
    """log of ((z + delta)^k - z^k) / delta, elementwise.

    Evaluated through k*log1p(delta/z) so that the two powers are never
    formed separately: the expm1 branch keeps full accuracy when they
    nearly cancel, and the dominant-power branch avoids overflow when they
    differ by hundreds of orders of magnitude.
    """
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        if abs(delta) < 1e-12:
            return math.log(k) + (k - 1) * np.log(z)
        ld = np.log(complex(delta))
        logz = np.log(z)
        s = clog1p(delta / z)
        ks = k * s
        dominant = k * (logz + s) - ld
        moderate = ks.real < 600.0
        safe_ks = np.where(moderate, ks, 0.0)
        out = np.where(
            moderate, k * logz + np.log(_cexpm1(safe_ks)) - ld, dominant
        )
        # z == 0 is regular: D(0) = delta^(k-1)
        out = np.where(z == 0.0, (k - 1) * np.log(complex(delta)), out)
    return out


def _circle_nodes(center: float, radius: float, m: int):
    theta = 2.0 * math.pi * (np.arange(m) + 0.5) / m
    return center + radius * np.exp(1j * theta)


def _z_probe_spread(x, v, q, delta, k, center, radius):
    """Conditioning score of a candidate z-circle.

    The integral value does not depend on the (valid) circle, so the score
    tracks what the trapezoid rule pays on it: the worst log-magnitude of
    the weighted integrand |(z - c) * B_j(z)| (cancellation), plus a node
    budget penalty proportional to radius over nearest-pole distance (the
    trapezoid error decays like (1 + d/R)^-M). The two real crossings are
    probed explicitly; they are the closest circle points to every real
    pole, so spikes cannot hide between probe angles.
    """
    z = np.concatenate(
        [
            _circle_nodes(center, radius, _PROBES),
            [center - radius + 0.0j, center + radius + 0.0j],
        ]
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        p = _log_divided_difference(z, delta, k).real + math.log(radius)
        best = np.full(z.size, -math.inf)
        for j in range(x.size):
            t = np.abs(z - q[j])
            lvx = math.log(abs(v - x[j])) if v != x[j] else -math.inf
            p -= np.log(t)
            np.maximum(best, lvx - np.log(t), out=best)
        p += best
    d_min = float(np.min(np.abs(np.abs(q - center) - radius)))
    if d_min <= 0 or not np.isfinite(p).any():
        return math.inf
    peak = float(np.max(p[np.isfinite(p)]))
    return peak + (radius / d_min) / 50.0


def _w_probe_spread(x, v, npow, radius):
    """Worst log-magnitude of |w * A_j(w)| around a candidate w-circle.

    The w-integrand is a finite Laurent polynomial, integrated exactly by
    any trapezoid rule with more than n + 1 nodes, so only cancellation
    (the peak magnitude) matters here.
    """
    w = _circle_nodes(0.0, radius, _PROBES)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = (1.0 - npow) * math.log(radius) * np.ones(_PROBES)
        worst = np.full(_PROBES, math.inf)
        for j in range(x.size):
            t = np.abs(w + (v - x[j]))
            p += np.log(t)
            np.minimum(worst, np.log(t), out=worst)
        p -= worst
    if not np.isfinite(p).all():
        return math.inf
    return float(np.max(p))


def _select_z_circle(x, u, v, q, enclosed_mask, delta, k):
    """Pick crossing points (t1, t2) separating the two pole groups.

    Candidate circles cross the real axis once inside the gap straddling
    u - v and once beyond the far end of the enclosed group; the candidate
    with the flattest probe profile wins.
    """
    n = x.size
    inside = q[enclosed_mask]
    outside = q[~enclosed_mask]
    t0 = u - v
    lo_out = outside[outside < t0]
    hi_out = outside[outside > t0]
    gap_lo = float(lo_out.max()) if lo_out.size else -math.inf
    gap_hi = float(hi_out.min()) if hi_out.size else math.inf

    inner = [t0]
    if math.isfinite(gap_lo) and math.isfinite(gap_hi):
        width = gap_hi - gap_lo
        inner += [gap_lo + f * width for f in (0.5, 0.25, 0.75)]

    top_group = inside.min() > t0 if inside.size else True
    if top_group:
        far_edge = float(inside.max())
        direction = 1.0
    else:
        far_edge = float(inside.min())
        direction = -1.0
    scale = max(abs(far_edge - t0), float(np.ptp(q)) * 0.25, 1e-6)
    fars = [far_edge + direction * f * scale for f in (0.25, 0.5, 1.0, 2.0, 4.0)]

    best = None
    for ti in inner:
        for tf in fars:
            t1, t2 = (ti, tf) if top_group else (tf, ti)
            if t2 - t1 <= 0:
                continue
            sel = (q > t1) & (q < t2)
            if not np.array_equal(sel, enclosed_mask):
                continue
            center, radius = 0.5 * (t1 + t2), 0.5 * (t2 - t1)
            score = _z_probe_spread(x, v, q, delta, k, center, radius)
            if best is None or score < best[0]:
                best = (score, center, radius)
    if best is None:
        raise ContourSeparationFailure(
            f"no circle separates the pole groups around u - v = {t0!r} "
            f"(gap ({gap_lo!r}, {gap_hi!r}))"
        )
    return best[1], best[2]


def _select_w_radius(x, v, npow, span, hint):
    cands = []
    if hint is not None and hint > 0:
        cands.append(float(hint))
    nz = np.abs(x - v)
    nz = nz[nz > 0]
    if nz.size:
        cands.append(0.5 * float(nz.min()))
    cands += [f * span for f in (0.02, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0)]

    scored = [(_w_probe_spread(x, v, npow, r), r) for r in cands if r > 0]
    scored = [t for t in scored if math.isfinite(t[0])]
    if not scored:
        return 0.1 * span
    best_score, best_r = min(scored)
    for f in (0.7, 0.85, 1.2, 1.4):
        r = best_r * f
        sc = _w_probe_spread(x, v, npow, r)
        if sc < best_score:
            best_score, best_r = sc, r
    return best_r


def _evaluate(x, v, q, delta, k, npow, wr, zc, zr, m_nodes, sigma):
    """One trapezoid evaluation of the double integral with M nodes each."""
    n = x.size
    w = _circle_nodes(0.0, wr, m_nodes)
    z = _circle_nodes(zc, zr, m_nodes)

    with np.errstate(divide="ignore", invalid="ignore"):
        base_w = -npow * np.log(w)
        dmin_w = np.full(m_nodes, math.inf)
        for j in range(n):
            t = w + (v - x[j])
            base_w += np.log(t)
            np.minimum(dmin_w, np.abs(t), out=dmin_w)
        cw = float(np.max(base_w.real - np.log(dmin_w)))

        log_dd = _log_divided_difference(z, delta, k)
        tz = np.zeros(m_nodes, dtype=complex)
        bmax = np.full(m_nodes, -math.inf)
        lvx = np.log((v - x).astype(complex))  # -inf when v hits an atom
        for j in range(n):
            t = z - q[j]
            tz += np.log(t)
            np.maximum(bmax, lvx[j].real - np.log(np.abs(t)), out=bmax)
        cz = float(np.max(log_dd.real - tz.real + bmax))

        acc = 0.0 + 0.0j
        for j in range(n):
            log_a = base_w - np.log(w + (v - x[j]))
            sw = np.sum(w * np.exp(log_a - cw))
            log_b = log_dd + lvx[j] - np.log(z - q[j]) - tz
            sz = np.sum((z - zc) * np.exp(log_b - cz))
            acc += sw * sz

    re = acc.real
    if re == 0.0 or not math.isfinite(re):
        return 0.0 if re == 0.0 else math.nan
    expo = cw + cz + math.log(abs(re)) - 2.0 * math.log(m_nodes)
    if expo > 700.0:
        return math.inf
    return -sigma * math.copysign(math.exp(expo), re)


def kernel_contour(
    spec,
    r: int,
    u: float,
    v: float,
    nodes: int = 64,
    tol: float = 1e-9,
    gap_tol: float = None,
    w_radius_hint: float = None,
) -> float:
    """Equal-level kernel K((r,u),(r,v)) by double contour quadrature.

    Parameters
    ----------
    spec : Spectrum or array_like
        Strictly decreasing top row.
    r : int
        Level, 1 <= r <= n-1.
    u, v : float
        Positions; u must be separated from every atom by more than
        ``gap_tol`` (default 1e-8 times the bound width).
    nodes : int
        Starting trapezoid node count per circle.
    tol : float
        Agreement threshold between successive node-doubled values.
    w_radius_hint : float, optional
        Radius suggestion for the outer circle (e.g. a saddle modulus).

    Raises
    ------
    ContourSeparationFailure
        If u is too close to an atom for the pole groups to be separated.
    NonConvergence
        If doubling exceeds 2**16 nodes without agreement.
    """
    return _kernel_contour_with_error(spec, r, u, v, nodes, tol, gap_tol, w_radius_hint)[0]


def _kernel_contour_with_error(
    spec,
    r: int,
    u: float,
    v: float,
    nodes: int = 64,
    tol: float = 1e-9,
    gap_tol: float = None,
    w_radius_hint: float = None,
    plateau_exit: bool = False,
):
    """kernel_contour plus the last node-doubling delta as an error estimate.

    The estimate is 0.0 for the exact no-enclosed-poles zeros; otherwise it
    is a plain a-posteriori bound and says nothing about a systematic
    roundoff plateau wider than itself.

    With plateau_exit, stop doubling once successive deltas are both deep
    (below 1e-9 of the value scale) and no longer shrinking: the trapezoid
    error squares at each doubling for analytic integrands, so a delta
    ratio above 1/4 down there is roundoff, not residual quadrature error.
    The returned estimate then covers the plateau; the caller decides
    whether that is good enough instead of this loop raising NonConvergence.
    """
    spec = spectrum(spec)
    x = spec.values
    n = spec.n
    if not 1 <= r <= n - 1:
        raise LevelOutOfRange(f"level must lie in 1..{n - 1}, got {r}")
    if not tol > 0.0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if int(nodes) < 1:
        raise ValidationError(f"nodes must be at least 1, got {nodes}")
    u, v = float(u), float(v)
    span = max(spec.hi - spec.lo, float(x[0] - x[-1]), 1e-12)
    if gap_tol is None:
        gap_tol = 1e-8 * span
    dmin = float(np.min(np.abs(x - u)))
    if dmin <= gap_tol:
        raise ContourSeparationFailure(
            f"u = {u!r} is within {dmin:.3e} of an atom; separation needs "
            f"more than gap_tol = {gap_tol:.3e}"
        )

    q = x - v
    above = x > u
    if v <= u:
        if not above.any():
            return 0.0, 0.0
        enclosed = above
        sigma = -1.0
    else:
        if above.all():
            return 0.0, 0.0
        enclosed = ~above
        sigma = 1.0

    delta = v - u
    k = n - r
    npow = n - r + 1
    zc, zr = _select_z_circle(x, u, v, q, enclosed, delta, k)
    wr = _select_w_radius(x, v, npow, span, w_radius_hint)

    m = max(8, int(nodes), n + 2)
    prev = None
    prev_err = math.inf
    while m <= _MAX_NODES:
        val = _evaluate(x, v, q, delta, k, npow, wr, zc, zr, m, sigma)
        if prev is not None and math.isfinite(val):
            err = abs(val - prev)
            if err <= tol * max(1.0, abs(val)):
                return val, err
            if (
                plateau_exit
                and err >= 0.25 * prev_err
                and err <= 1e-9 * max(1.0, abs(val))
            ):
                return val, max(err, prev_err)
            prev_err = err
        else:
            prev_err = math.inf
        prev = val if math.isfinite(val) else None
        m *= 2
    raise NonConvergence(
        f"contour quadrature did not stabilize below {_MAX_NODES} nodes"
    )
