"""Monte Carlo sampling of eigenvalue corner processes with box-count checks.

A sample is the triangular array of eigenvalues of the top-left r x r
corners (r = 1..n) of a random Hermitian matrix, either

* ``FixedSpectrum``:  U diag(x) U* with U Haar-distributed unitary, or
* ``GUESource``:      a Gaussian Hermitian matrix (unit-variance diagonal,
  half-variance real/imaginary off-diagonal parts).

Corner eigenvalues of consecutive sizes interlace, so each sample is a
valid triangular pattern.  ``estimate_boxes`` turns a batch into empirical
first and second moments of box counts, and ``verify_determinantal``
compares those against quadrature of the predicted correlation kernel,
reporting z-scores.

Generation is deterministic for a given seed: the seed expands into one
child stream per fixed-size chunk of samples, and every reduction is
ordered, so identical seeds give bit-identical batches regardless of how
many chunks run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    LevelOutOfRange,
    NonConvergence,
    NonHermitian,
    OverlappingBoxes,
    ValidationError,
)
from .gue import gue_level_kernel, gue_minor_kernel
from .kernels import kernel_fixed_top
from .numerics import gl_rule
from .patterns import GTPattern, Spectrum, spectrum

__all__ = [
    "FixedSpectrum",
    "GUESource",
    "SampleBatch",
    "BoxEstimate",
    "BoxCheck",
    "DeterminantalReport",
    "sample_haar_unitary",
    "sample_gue",
    "hermitian_eigs",
    "sample_minor_process",
    "sample_fixed_batch",
    "sample_gue_batch",
    "estimate_boxes",
    "verify_determinantal",
    "save_batch",
    "load_batch",
]

_CHUNK = 4096
# Slack for eigensolver output: interlacing and top-level identity are
# asserted up to this absolute tolerance.
_EIG_ATOL = 1e-10
_TOP_ATOL = 1e-9


@dataclass(frozen=True)
class FixedSpectrum:
    """Sample source: Haar-rotated fixed spectrum U diag(x) U*."""

    spectrum: Spectrum


@dataclass(frozen=True)
class GUESource:
    """Sample source: Gaussian Hermitian matrix of size n."""

    n: int


def _as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.default_rng(stream)


# ---------------------------------------------------------------------------
# Matrix samplers
# ---------------------------------------------------------------------------


def _haar_batch(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """Stack of Haar unitaries: QR of complex Ginibre with the R-diagonal
    phases divided out (the phase fix makes the factorization unique and
    the resulting distribution exactly Haar)."""
    z = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
    z /= math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1).copy()
    d /= np.abs(d)
    return q * d[:, None, :]


def sample_haar_unitary(n: int, stream) -> np.ndarray:
    """One Haar-distributed n x n unitary matrix.

    ``stream`` is a numpy Generator or anything accepted as a seed.
    """
    if n < 1:
        raise ValidationError(f"matrix size must be >= 1, got {n}")
    return _haar_batch(_as_generator(stream), n, 1)[0]


def _gue_batch(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    a = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
    return 0.5 * (a + a.conj().transpose(0, 2, 1))


def sample_gue(n: int, stream) -> np.ndarray:
    """One Gaussian Hermitian matrix: unit-variance diagonal, real and
    imaginary off-diagonal parts of variance one half."""
    if n < 1:
        raise ValidationError(f"matrix size must be >= 1, got {n}")
    return _gue_batch(_as_generator(stream), n, 1)[0]


def hermitian_eigs(h) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix, residual-checked.

    Requires max|H - H*| < 1e-12; each eigenpair must satisfy
    ||H q - lambda q|| < 1e-10 ||H||.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    if float(np.max(np.abs(h - h.conj().T))) >= 1e-12:
        raise NonHermitian("matrix is not Hermitian to 1e-12")
    try:
        w, q = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NonConvergence(f"eigensolver failed: {exc}") from exc
    scale = max(float(np.max(np.abs(w))), 1e-300)
    resid = np.linalg.norm(h @ q - q * w[None, :], axis=0)
    if float(np.max(resid)) > 1e-10 * scale:
        raise NonConvergence(
            f"eigenpair residual {float(np.max(resid)):.3e} exceeds 1e-10 * ||H||"
        )
    return w


def _corner_levels(a: np.ndarray, n: int) -> list:
    """Descending corner eigenvalues per level for a stack of matrices."""
    return [np.linalg.eigvalsh(a[:, :r, :r])[:, ::-1] for r in range(1, n + 1)]


def sample_minor_process(x, stream) -> GTPattern:
    """One triangular sample: corner eigenvalues of U diag(x) U*."""
    spc = spectrum(x)
    n = spc.n
    u = sample_haar_unitary(n, stream)
    a = (u * spc.values) @ u.conj().T
    levels = []
    for r in range(1, n):
        levels.append(hermitian_eigs(a[:r, :r])[::-1])
    levels.append(hermitian_eigs(a)[::-1])
    if float(np.max(np.abs(levels[-1] - spc.values))) > _TOP_ATOL:
        raise NonConvergence("top-level eigenvalues do not match the spectrum")
    return GTPattern(tuple(levels))


# ---------------------------------------------------------------------------
# Batches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleBatch:
    """Columnar batch of triangular samples.

    ``levels[r-1]`` is a (size, r) array of descending level-r values;
    ``pattern(i)`` materializes sample i as a GTPattern.  Every sample
    satisfies weak interlacing (within eigensolver slack 1e-10) and, for
    fixed-spectrum sources, reproduces the spectrum on the top level
    within 1e-9.
    """

    n: int
    seed: int
    size: int
    source: object
    levels: tuple

    def pattern(self, i: int) -> GTPattern:
        return GTPattern(tuple(lv[i] for lv in self.levels))

    def patterns(self):
        return (self.pattern(i) for i in range(self.size))


def _check_interlacing_block(levels: list, start: int) -> None:
    for a, b in zip(levels[:-1], levels[1:]):
        ok = np.all(b[:, :-1] >= a - _EIG_ATOL, axis=1) & np.all(
            a >= b[:, 1:] - _EIG_ATOL, axis=1
        )
        if not ok.all():
            bad = int(np.argmin(ok))
            raise NonConvergence(
                f"sample {start + bad} violates interlacing beyond {_EIG_ATOL}"
            )


def _build_batch(n: int, size: int, seed: int, source, body) -> SampleBatch:
    if size < 1:
        raise ValidationError(f"batch size must be >= 1, got {size}")
    out = [np.empty((size, r)) for r in range(1, n + 1)]
    children = np.random.SeedSequence(seed).spawn((size + _CHUNK - 1) // _CHUNK)
    start = 0
    for child in children:
        count = min(_CHUNK, size - start)
        rng = np.random.default_rng(child)
        a = body(rng, count)
        levels = _corner_levels(a, n)
        _check_interlacing_block(levels, start)
        for r in range(n):
            out[r][start : start + count] = levels[r]
        start += count
    for arr in out:
        arr.flags.writeable = False
    return SampleBatch(n=n, seed=int(seed), size=size, source=source, levels=tuple(out))


def sample_fixed_batch(x, size: int, seed: int) -> SampleBatch:
    """Batch of corner-process samples for a Haar-rotated fixed spectrum."""
    spc = spectrum(x)
    n = spc.n

    def body(rng, count):
        u = _haar_batch(rng, n, count)
        return (u * spc.values) @ u.conj().transpose(0, 2, 1)

    batch = _build_batch(n, size, seed, FixedSpectrum(spc), body)
    dev = float(np.max(np.abs(batch.levels[-1] - spc.values)))
    if dev > _TOP_ATOL:
        raise NonConvergence(
            f"top-level eigenvalues deviate from the spectrum by {dev:.3e}"
        )
    return batch


def sample_gue_batch(n: int, size: int, seed: int) -> SampleBatch:
    """Batch of corner-process samples for Gaussian Hermitian matrices."""
    if n < 1:
        raise ValidationError(f"matrix size must be >= 1, got {n}")
    return _build_batch(n, size, seed, GUESource(n), lambda rng, c: _gue_batch(rng, n, c))


def save_batch(batch: SampleBatch, path: str) -> None:
    """JSON dump with header (n, seed, size, source) and per-level arrays."""
    if isinstance(batch.source, FixedSpectrum):
        src = {
            "kind": "fixed",
            "values": [float(t) for t in batch.source.spectrum.values],
            "lo": float(batch.source.spectrum.lo),
            "hi": float(batch.source.spectrum.hi),
        }
    else:
        src = {"kind": "gue", "n": batch.source.n}
    doc = {
        "n": batch.n,
        "seed": batch.seed,
        "size": batch.size,
        "source": src,
        "levels": [[list(map(float, row)) for row in lv] for lv in batch.levels],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_batch(path: str) -> SampleBatch:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc["source"]["kind"] == "fixed":
        src = FixedSpectrum(
            spectrum(doc["source"]["values"], doc["source"]["lo"], doc["source"]["hi"])
        )
    else:
        src = GUESource(doc["source"]["n"])
    levels = tuple(np.asarray(lv, dtype=float) for lv in doc["levels"])
    for arr in levels:
        arr.flags.writeable = False
    return SampleBatch(
        n=doc["n"], seed=doc["seed"], size=doc["size"], source=src, levels=levels
    )


# ---------------------------------------------------------------------------
# Box statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxEstimate:
    """Empirical box-count moments: per-box means and per-pair products."""

    boxes: tuple
    size: int
    m1: np.ndarray
    m1_se: np.ndarray
    pairs: tuple
    m2: np.ndarray
    m2_se: np.ndarray


def _validate_boxes(n: int, boxes) -> tuple:
    clean = []
    for box in boxes:
        q, lo, hi = box
        q = int(q)
        lo, hi = float(lo), float(hi)
        if not 1 <= q <= n:
            raise LevelOutOfRange(f"box level must lie in 1..{n}, got {q}")
        if not lo < hi:
            raise ValidationError(f"box needs lo < hi, got ({lo}, {hi})")
        clean.append((q, lo, hi))
    for i in range(len(clean)):
        for j in range(i + 1, len(clean)):
            qi, li, hi_ = clean[i]
            qj, lj, hj = clean[j]
            if qi == qj and min(hi_, hj) > max(li, lj):
                raise OverlappingBoxes(
                    f"boxes {i} and {j} overlap on level {qi}: "
                    f"({li}, {hi_}) vs ({lj}, {hj})"
                )
    return tuple(clean)


def estimate_boxes(batch: SampleBatch, boxes) -> BoxEstimate:
    """Empirical first and second box-count moments with standard errors.

    Boxes are (level, lo, hi) triples, pairwise disjoint; counts use the
    closed interval.  m2 entries are mean products over all box pairs
    (i < j), the empirical two-point correlation masses.
    """
    clean = _validate_boxes(batch.n, boxes)
    size = batch.size
    counts = np.empty((size, len(clean)))
    for idx, (q, lo, hi) in enumerate(clean):
        lv = batch.levels[q - 1]
        counts[:, idx] = np.sum((lv >= lo) & (lv <= hi), axis=1)
    m1 = counts.mean(axis=0)
    m1_se = counts.std(axis=0, ddof=1) / math.sqrt(size)
    pairs = tuple(
        (i, j) for i in range(len(clean)) for j in range(i + 1, len(clean))
    )
    if pairs:
        prods = np.stack([counts[:, i] * counts[:, j] for i, j in pairs], axis=1)
        m2 = prods.mean(axis=0)
        m2_se = prods.std(axis=0, ddof=1) / math.sqrt(size)
    else:
        m2 = np.empty(0)
        m2_se = np.empty(0)
    return BoxEstimate(
        boxes=clean, size=size, m1=m1, m1_se=m1_se, pairs=pairs, m2=m2, m2_se=m2_se
    )


# ---------------------------------------------------------------------------
# Kernel verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxCheck:
    """One empirical-vs-model comparison ('m1' for a box, 'm2' for a pair)."""

    kind: str
    label: str
    empirical: float
    se: float
    model: float
    z: float
    ok: bool


@dataclass(frozen=True)
class DeterminantalReport:
    checks: tuple
    z_threshold: float

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)


def _fixed_kernel_fns(spc: Spectrum):
    atoms = spc.values

    def kdiag(q, us):
        return np.array([kernel_fixed_top(spc, q, q, float(t), float(t)) for t in us])

    def kcross(q1, u, q2, w):
        return kernel_fixed_top(spc, q1, q2, float(u), float(w))

    return kdiag, kcross, atoms


def _gue_kernel_fns(n: int):
    def kdiag(q, us):
        us = np.asarray(us, dtype=float)
        return gue_level_kernel(q, us, us)

    def kcross(q1, u, q2, w):
        return gue_minor_kernel(n, q1, float(u), q2, float(w))

    return kdiag, kcross, np.empty(0)


def _box_nodes(lo: float, hi: float, atoms: np.ndarray, order: int):
    """Gauss-Legendre nodes/weights over [lo, hi], split at interior atoms
    (the diagonal kernel has kinks there)."""
    cuts = [lo] + [float(t) for t in np.sort(atoms[(atoms > lo) & (atoms < hi)])] + [hi]
    base_x, base_w = gl_rule(order)
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        xs.append(mid + half * base_x)
        ws.append(half * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def _zscore(empirical: float, se: float, model: float) -> float:
    if se > 0.0:
        return (empirical - model) / se
    return 0.0 if abs(empirical - model) <= 1e-8 * max(1.0, abs(model)) else math.inf


def verify_determinantal(
    batch: SampleBatch,
    spec=None,
    boxes=(),
    z_threshold: float = 4.0,
    quad_order: int = 40,
) -> DeterminantalReport:
    """Compare empirical box moments against kernel quadrature.

    m1 of a level-q box is checked against the integral of the diagonal
    kernel over the box; m2 of a disjoint pair against the double integral
    of the 2x2 correlation determinant.  Box levels must be <= n-1 (the
    top level is deterministic for fixed spectra).  Checks with |z| above
    ``z_threshold`` are flagged.  The report also re-verifies interlacing
    across the whole batch and records the surviving fraction.
    """
    est = estimate_boxes(batch, boxes)
    if isinstance(batch.source, FixedSpectrum):
        spc = batch.source.spectrum if spec is None else spectrum(spec)
        if not np.array_equal(spc.values, batch.source.spectrum.values):
            raise ValidationError("given spectrum does not match the batch source")
        kdiag, kcross, atoms = _fixed_kernel_fns(spc)
    else:
        kdiag, kcross, atoms = _gue_kernel_fns(batch.n)
    for q, _, _ in est.boxes:
        if q > batch.n - 1:
            raise LevelOutOfRange(
                f"verification boxes must sit on levels 1..{batch.n - 1}, got {q}"
            )

    nodes = {}
    for idx, (q, lo, hi) in enumerate(est.boxes):
        nodes[idx] = _box_nodes(lo, hi, atoms, quad_order)

    checks = []
    for idx, (q, lo, hi) in enumerate(est.boxes):
        xs, ws = nodes[idx]
        model = float(np.dot(ws, kdiag(q, xs)))
        z = _zscore(float(est.m1[idx]), float(est.m1_se[idx]), model)
        checks.append(
            BoxCheck(
                kind="m1",
                label=f"level {q} [{lo:g}, {hi:g}]",
                empirical=float(est.m1[idx]),
                se=float(est.m1_se[idx]),
                model=model,
                z=z,
                ok=abs(z) <= z_threshold,
            )
        )
    for pidx, (i, j) in enumerate(est.pairs):
        qi, li, hi_ = est.boxes[i]
        qj, lj, hj = est.boxes[j]
        xi, wi = nodes[i]
        xj, wj = nodes[j]
        di = kdiag(qi, xi)
        dj = kdiag(qj, xj)
        cross = np.empty((xi.size, xj.size))
        for a, ua in enumerate(xi):
            for b, wb in enumerate(xj):
                cross[a, b] = kcross(qi, ua, qj, wb) * kcross(qj, wb, qi, ua)
        det2 = di[:, None] * dj[None, :] - cross
        model = float(wi @ det2 @ wj)
        z = _zscore(float(est.m2[pidx]), float(est.m2_se[pidx]), model)
        checks.append(
            BoxCheck(
                kind="m2",
                label=f"level {qi} [{li:g}, {hi_:g}] x level {qj} [{lj:g}, {hj:g}]",
                empirical=float(est.m2[pidx]),
                se=float(est.m2_se[pidx]),
                model=model,
                z=z,
                ok=abs(z) <= z_threshold,
            )
        )
    good = batch.size
    for r in range(1, batch.n):
        a = batch.levels[r - 1]
        b = batch.levels[r]
        bad = ~(
            np.all(b[:, :-1] >= a - _EIG_ATOL, axis=1)
            & np.all(a >= b[:, 1:] - _EIG_ATOL, axis=1)
        )
        good -= int(np.count_nonzero(bad))
        if bad.any():
            break
    fraction = good / batch.size
    checks.append(
        BoxCheck(
            kind="interlacing",
            label=f"all {batch.n} levels, {batch.size} samples",
            empirical=fraction,
            se=0.0,
            model=1.0,
            z=0.0 if fraction == 1.0 else math.inf,
            ok=fraction == 1.0,
        )
    )
    return DeterminantalReport(checks=tuple(checks), z_threshold=z_threshold)
