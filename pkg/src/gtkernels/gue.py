"""Gaussian-ensemble level and corner-process kernels.

Everything here is built from the monic Hermite polynomials He_j for the
weight exp(-x^2/2):

    He_0 = 1,  He_1 = x,  He_{j+1}(x) = x He_j(x) - j He_{j-1}(x),

which satisfy int He_i He_j e^{-x^2/2} dx = sqrt(2 pi) i! delta_ij.  The
level kernel uses the numerically safe normalized (oscillator) recurrence

    phi_0(x) = (2 pi)^{-1/4} e^{-x^2/4},
    phi_{j+1}(x) = (x phi_j(x) - sqrt(j) phi_{j-1}(x)) / sqrt(j + 1),

so that phi_j = He_j e^{-x^2/4} / sqrt(sqrt(2 pi) j!) stays O(1) in the
bulk even for degrees in the hundreds.

Two independent evaluation routes are provided for the corner (minor)
process kernel:

* ``gue_minor_kernel`` -- a finite double-indexed sum over Hermite values
  at u and v plus, above the diagonal levels, one-sided Gaussian moment
  integrals at u;
* ``uie_minor_kernel_gue`` -- the orthogonal-polynomial route: derivatives
  of He_j at v paired with one-sided moments of He_j e^{-x^2/2} around u,
  carrying a different exponential weight.

They agree up to the gauge factor exp((v^2 - u^2)/4), which cancels in
every correlation determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .errors import LevelOutOfRange, QuadratureNonConvergence, ValidationError
from .numerics import gl_intervals

SQRT_2PI = math.sqrt(2.0 * math.pi)

__all__ = [
    "SQRT_2PI",
    "HermiteBasis",
    "IncompleteMoment",
    "hermite",
    "hermite_all",
    "incomplete_moment",
    "incomplete_moments",
    "gue_level_kernel",
    "gue_minor_kernel",
    "uie_minor_kernel_gue",
]


def hermite_all(max_degree: int, x):
    """Monic Hermite values He_0(x)..He_max_degree(x).

    Parameters
    ----------
    max_degree : int
        Highest degree to evaluate (>= 0).
    x : float or ndarray
        Evaluation point(s).

    Returns
    -------
    ndarray of shape (max_degree + 1,) + shape(x).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((max_degree + 1,) + x.shape, dtype=float)
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = x
    for j in range(1, max_degree):
        out[j + 1] = x * out[j] - j * out[j - 1]
    return out


def hermite(j: int, x):
    """Monic Hermite polynomial He_j evaluated at x."""
    if j < 0:
        raise ValidationError(f"degree must be nonnegative, got {j}")
    vals = hermite_all(j, x)
    out = vals[j]
    return float(out) if np.ndim(x) == 0 else out


def _phi_all(max_degree: int, x):
    """Normalized oscillator values phi_0(x)..phi_max_degree(x)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((max_degree + 1,) + x.shape, dtype=float)
    out[0] = (2.0 * math.pi) ** -0.25 * np.exp(-0.25 * x * x)
    if max_degree >= 1:
        out[1] = x * out[0]
    for j in range(1, max_degree):
        out[j + 1] = (x * out[j] - math.sqrt(j) * out[j - 1]) / math.sqrt(j + 1)
    return out


@dataclass(frozen=True)
class HermiteBasis:
    """Monic Hermite family He_0..He_max_degree with its norm table.

    The squared norms are sqrt(2 pi) j!; ``sqrt_cache`` holds the
    square roots used by the normalized recurrence.
    """

    max_degree: int
    sqrt_cache: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValidationError("max_degree must be nonnegative")
        object.__setattr__(
            self, "sqrt_cache", np.sqrt(np.arange(self.max_degree + 2, dtype=float))
        )

    def value(self, j: int, x):
        """He_j(x) for j <= max_degree."""
        if not 0 <= j <= self.max_degree:
            raise ValidationError(f"degree must lie in 0..{self.max_degree}, got {j}")
        return hermite(j, x)

    def norm_sq(self, j: int) -> float:
        """int He_j(x)^2 e^{-x^2/2} dx = sqrt(2 pi) j!."""
        if not 0 <= j <= self.max_degree:
            raise ValidationError(f"degree must lie in 0..{self.max_degree}, got {j}")
        return SQRT_2PI * math.factorial(j)

    def all_values(self, x):
        """He_0(x)..He_max_degree(x) as a stacked array."""
        return hermite_all(self.max_degree, x)

    def normalized(self, x):
        """Orthonormal oscillator values phi_0(x)..phi_max_degree(x)."""
        return _phi_all(self.max_degree, x)


# ---------------------------------------------------------------------------
# One-sided Gaussian moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IncompleteMoment:
    """I_k(u) = int_u^inf (x-u)^k / k! e^{-x^2/2} dx (always positive)."""

    k: int
    u: float
    value: float


# Estimated relative error above which the forward recurrence for the raw
# moments J_k is abandoned for direct quadrature (u large and positive is
# the unstable direction: the recurrence J_{k+1} = k J_{k-1} - u J_k then
# subtracts nearly equal terms).
_RECURRENCE_RELERR = 1e-11
_EPS = float(np.finfo(float).eps)


def _moment_quadrature(k: int, u: float) -> float:
    """J_k(u) = int_0^inf t^k e^{-(t+u)^2/2} dt by scaled panels.

    The log-integrand g(t) = k log t - (t+u)^2/2 peaks at
    t* = (-u + sqrt(u^2 + 4k))/2 with curvature scale
    sigma = (1 + k/t*^2)^{-1/2}; panels cover t* +- 12 sigma and the
    result is assembled as e^{g(t*)} * int e^{g - g(t*)}.
    """
    if k == 0:
        return math.sqrt(math.pi / 2.0) * float(erfc(u / math.sqrt(2.0)))
    tstar = 0.5 * (-u + math.sqrt(u * u + 4.0 * k))
    sigma = 1.0 / math.sqrt(1.0 + k / (tstar * tstar))
    gmax = k * math.log(tstar) - 0.5 * (tstar + u) ** 2

    def scaled(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0.0
        tp = t[pos]
        out[pos] = np.exp(k * np.log(tp) - 0.5 * (tp + u) ** 2 - gmax)
        return out

    pts = sorted(
        {0.0}
        | {max(0.0, tstar + c * sigma) for c in (-12.0, -6.0, -2.0, 0.0, 2.0, 6.0, 12.0, 20.0)}
    )
    coarse = gl_intervals(scaled, pts, 48)
    fine = gl_intervals(scaled, pts, 64)
    if abs(fine - coarse) > 1e-11 * max(1.0, abs(fine)):
        raise QuadratureNonConvergence(
            f"one-sided Gaussian moment k={k}, u={u!r} did not stabilize"
        )
    return math.exp(gmax) * fine


def _raw_moments(kmax: int, u: float) -> np.ndarray:
    """J_0..J_kmax with J_k = int_u^inf (x-u)^k e^{-x^2/2} dx.

    Forward recurrence J_{k+1} = k J_{k-1} - u J_k with a running error
    bound E_{k+1} = k E_{k-1} + |u| E_k + eps (k J_{k-1} + |u| J_k);
    entries whose bound exceeds _RECURRENCE_RELERR relatively are
    recomputed by quadrature (and then reseed the bound).
    """
    j0 = math.sqrt(math.pi / 2.0) * float(erfc(u / math.sqrt(2.0)))
    out = np.empty(kmax + 1)
    out[0] = j0
    if kmax == 0:
        return out
    g = math.exp(-0.5 * u * u)
    out[1] = g - u * j0
    err = [_EPS * j0, _EPS * (g + abs(u) * j0)]
    for k in range(1, kmax):
        val = k * out[k - 1] - u * out[k]
        bound = k * err[k - 1] + abs(u) * err[k] + _EPS * (
            k * abs(out[k - 1]) + abs(u) * abs(out[k])
        )
        if not val > 0.0 or bound > _RECURRENCE_RELERR * val:
            val = _moment_quadrature(k + 1, u)
            bound = 1e-13 * val
        out[k + 1] = val
        err.append(bound)
    return out


def incomplete_moments(kmax: int, u: float) -> np.ndarray:
    """I_0(u)..I_kmax(u) with I_k = J_k / k!."""
    raw = _raw_moments(kmax, u)
    fact = np.cumprod(np.concatenate([[1.0], np.arange(1.0, kmax + 1.0)]))
    return raw / fact


def incomplete_moment(k: int, u: float) -> IncompleteMoment:
    """One-sided normalized Gaussian moment I_k(u)."""
    if k < 0:
        raise ValidationError(f"moment order must be nonnegative, got {k}")
    return IncompleteMoment(k, float(u), float(incomplete_moments(k, u)[k]))


# ---------------------------------------------------------------------------
# Level kernel
# ---------------------------------------------------------------------------


def gue_level_kernel(n: int, u, v):
    """Level kernel sum_{i<n} He_i(u) He_i(v) e^{-(u^2+v^2)/4} / (sqrt(2 pi) i!).

    Evaluated through the orthonormal oscillator recurrence, so it is
    safe for n in the hundreds.  u and v may be arrays (broadcast
    elementwise after alignment).
    """
    if n < 1:
        raise LevelOutOfRange(f"matrix size must be >= 1, got {n}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    pu = _phi_all(n - 1, u)
    pv = pu if v is u or (u.shape == v.shape and np.array_equal(u, v)) else _phi_all(n - 1, v)
    out = np.einsum("i...,i...->...", pu, pv)
    return float(out) if out.ndim == 0 else out


def _check_levels(n: int, r: int, s: int, r_max: int):
    if n < 1:
        raise LevelOutOfRange(f"matrix size must be >= 1, got {n}")
    if not 1 <= r <= r_max:
        raise LevelOutOfRange(f"row level must lie in 1..{r_max}, got {r}")
    if not 1 <= s <= n:
        raise LevelOutOfRange(f"column level must lie in 1..{n}, got {s}")


# ---------------------------------------------------------------------------
# Corner (minor) process kernel: double-sum route
# ---------------------------------------------------------------------------


def gue_minor_kernel(n: int, r: int, u: float, s: int, v: float) -> float:
    """Corner-process kernel at ((r, u), (s, v)) for an n x n Gaussian matrix.

    Two-part finite sum: a diagonal-type part

        sum_{i=-min(r,s)}^{-1} He_{i+r}(u) He_{i+s}(v)
            e^{-(u^2+v^2)/4} / (sqrt(2 pi) (i+s)!)

    plus, when s > r, the one-sided correction

        e^{(u^2-v^2)/4} ( sum_{k=0}^{s-r-1} He_k(v) I_{s-r-1-k}(u)
            / (sqrt(2 pi) k!)  -  1_{v>u} (v-u)^{s-r-1} / (s-r-1)! ).

    At r == s this collapses to ``gue_level_kernel(r, u, v)``.
    """
    _check_levels(n, r, s, n)
    u = float(u)
    v = float(v)
    m = min(r, s)
    he_u = hermite_all(r - 1, u)
    he_v = hermite_all(s - 1, v)
    weight = math.exp(-0.25 * (u * u + v * v))
    total = 0.0
    for i in range(-m, 0):
        total += (
            he_u[i + r]
            * he_v[i + s]
            * weight
            / (SQRT_2PI * math.factorial(i + s))
        )
    if s > r:
        d = s - r
        mom = incomplete_moments(d - 1, u)
        corr = 0.0
        for k in range(d):
            corr += he_v[k] * mom[d - 1 - k] / (SQRT_2PI * math.factorial(k))
        if v > u:
            corr -= (v - u) ** (d - 1) / math.factorial(d - 1)
        total += math.exp(0.25 * (u * u - v * v)) * corr
    return total


# ---------------------------------------------------------------------------
# Corner (minor) process kernel: orthogonal-polynomial route
# ---------------------------------------------------------------------------


def uie_minor_kernel_gue(n: int, r: int, s: int, u: float, v: float) -> float:
    """Corner-process kernel by the orthogonal-polynomial route.

    Evaluates

        sum_{j=n-s}^{n-1} (He_j)^{(n-s)}(v) / (sqrt(2 pi) j!) *
            ( 1_{v<=u} R_j(u) - 1_{v>u} L_j(u) ),

    where, with m = n - r - 1,

        R_j(u) = int_u^inf  (x-u)^m / m! He_j(x) e^{-x^2/2} dx,
        L_j(u) = int_{-inf}^u (x-u)^m / m! He_j(x) e^{-x^2/2} dx,

    both reduced in closed form by repeated integration by parts:

        R_j = I_{m-j}(u)                    for j <= m,
        R_j = He_{j-m-1}(u) e^{-u^2/2}      for j >  m,
        L_j = (-1)^{m-j} I_{m-j}(-u)        for j <= m,
        L_j = -He_{j-m-1}(u) e^{-u^2/2}     for j >  m.

    Matches ``gue_minor_kernel`` up to the gauge factor
    exp((v^2 - u^2)/4), which cancels in correlation determinants.
    """
    _check_levels(n, r, s, n - 1)
    u = float(u)
    v = float(v)
    m = n - r - 1
    he_v = hermite_all(s - 1, v)
    top = max(n - 1 - m - 1, -1)
    he_u = hermite_all(top, u) if top >= 0 else None
    gauss_u = math.exp(-0.5 * u * u)
    right = v <= u
    mom = None
    if m >= n - s:
        mom = incomplete_moments(m - (n - s), u if right else -u)
    total = 0.0
    for j in range(n - s, n):
        jj = j - n + s  # derivative order n-s drops He_j to degree jj
        if j <= m:
            side = mom[m - j] if right else -((-1.0) ** (m - j)) * mom[m - j]
        else:
            # R_j and -L_j coincide here: both equal He_{j-m-1}(u) e^{-u^2/2}
            side = he_u[j - m - 1] * gauss_u
        total += he_v[jj] * side / (SQRT_2PI * math.factorial(jj))
    return total
