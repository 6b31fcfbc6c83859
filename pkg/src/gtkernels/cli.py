"""Command-line front-end: batch runs with reproducible CSV/JSON output.

Every output file starts with a single JSON header line (verbatim config
echo, library version, seed, and a timestamp unless --deterministic is
set), followed by CSV rows. Exit codes: 0 success, 2 validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys

import numpy as np

from . import __version__, measures
from .errors import NumericalError, ValidationError
from .gue import gue_minor_kernel, uie_minor_kernel_gue
from .kernels import kernel_fixed_top
from .montecarlo import load_batch, sample_fixed_batch, verify_determinantal
from .patterns import spectrum
from .saddle import solve_saddle
from .sine import scaling_window, sine_sup_error

_EXIT_OK = 0
_EXIT_VALIDATION = 2
_EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    """17-significant-digit formatting; round-trips every double."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        x = 0.0  # normalize negative zero
    return f"{x:.17g}"


def _parse_floats(text: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise ValidationError(f"expected at least one number in {text!r}")
    return vals


def _parse_ints(text: str) -> list:
    vals = _parse_floats(text)
    out = []
    for v in vals:
        if v != int(v):
            raise ValidationError(f"expected integers, got {text!r}")
        out.append(int(v))
    return out


def _load_spectrum(args):
    if getattr(args, "spectrum", None):
        return spectrum(_parse_floats(args.spectrum))
    path = getattr(args, "spectrum_file", None)
    if not path:
        raise ValidationError("provide --spectrum or --spectrum-file")
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        values = data.get("spectrum", data.get("values"))
        lo = data.get("lo")
        hi = data.get("hi")
    else:
        values, lo, hi = data, None, None
    if values is None:
        raise ValidationError(f"no spectrum values found in {path!r}")
    return spectrum(values, lo=lo, hi=hi)


class _Output:
    """Header-line-then-CSV writer for a file path or stdout."""

    def __init__(self, path, header: dict):
        self.path = path
        self.lines = [json.dumps(header, sort_keys=True)]

    def row(self, *cells):
        self.lines.append(",".join(_fmt(c) if not isinstance(c, str) else c for c in cells))

    def flush(self):
        text = "\n".join(self.lines) + "\n"
        if self.path and self.path != "-":
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _header(args, seed=None) -> dict:
    # `out`/`details` name the destination, not the computation — leaving
    # them out keeps identical configs byte-identical wherever they land
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "out", "details") and v is not None
    }
    head = {
        "command": args.command,
        "config": config,
        "version": __version__,
        "seed": seed,
    }
    if not args.deterministic:
        head["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return head


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("GTK_THREADS", "")
        try:
            n = int(env) if env else 1
        except ValueError as exc:
            raise ValidationError(f"GTK_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ValidationError("thread count must be at least 1")
    return n


def _cmd_saddle(args) -> int:
    m = measures.load_measure(args.measure)
    if args.c is not None:
        cs = _parse_floats(args.c)
    elif args.c_grid is not None:
        lo, hi, count = args.c_grid.split(":")
        cs = list(np.linspace(float(lo), float(hi), int(count)))
    else:
        raise ValidationError("provide --c or --c-grid lo:hi:count")
    out = _Output(args.out, _header(args))
    out.row("c", "status", "re_w", "im_w", "rho", "gauge", "residual")
    for c in cs:
        s = solve_saddle(m, args.alpha, c)
        if s is None:
            out.row(c, "NOT-IN-A_ALPHA", math.nan, math.nan, math.nan, math.nan, math.nan)
        else:
            out.row(c, "OK", s.w.real, s.w.imag, s.rho, s.gauge, s.residual)
    out.flush()
    return _EXIT_OK


def _cmd_kernel(args) -> int:
    spec = _load_spectrum(args)
    us = _parse_floats(args.u)
    vs = _parse_floats(args.v)
    out = _Output(args.out, _header(args))
    out.row("r", "s", "u", "v", "value")
    for u in us:
        for v in vs:
            out.row(args.r, args.s, u, v, kernel_fixed_top(spec, args.r, args.s, u, v, mode=args.mode))
    out.flush()
    return _EXIT_OK


def _cmd_sine_scan(args) -> int:
    m = measures.load_measure(args.measure)
    window = scaling_window(
        m,
        args.alpha,
        args.c,
        _parse_ints(args.n),
        grid_points=args.grid_points,
        half_width=args.half_width,
        use_limit_saddle=args.limit_saddle,
    )
    result = sine_sup_error(window, threads=_threads(args))
    out = _Output(args.out, _header(args))
    out.row("n", "q", "alpha_n", "status", "sup_error", "diag_error", "det2_error", "density_error")
    for r in result.rows:
        out.row(r.n, r.q, r.alpha_n, r.status, r.sup_error, r.diag_error, r.det2_error, r.density_error)
    out.flush()
    if args.details:
        det = _Output(args.details, _header(args))
        det.row("n", "u", "v", "scaled", "sine", "abs_err")
        for row in result.detail_rows():
            det.row(*row)
        det.flush()
    return _EXIT_OK


def _default_boxes(spec, q: int, count: int = 6):
    lo = float(spec.values.min())
    hi = float(spec.values.max())
    pad = 0.05 * (hi - lo)
    edges = np.linspace(lo + pad, hi - pad, count + 1)
    return [(q, float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]


def _parse_boxes(text: str):
    boxes = []
    for part in text.split(","):
        fields = part.split(":")
        if len(fields) != 3:
            raise ValidationError(f"box must be level:lo:hi, got {part!r}")
        boxes.append((int(fields[0]), float(fields[1]), float(fields[2])))
    return boxes


def _cmd_mc_verify(args) -> int:
    if args.batch:
        batch = load_batch(args.batch)
        spec = None
    else:
        spec = _load_spectrum(args)
        batch = sample_fixed_batch(spec, args.samples, seed=args.seed)
    if args.boxes:
        boxes = _parse_boxes(args.boxes)
    else:
        base = spec if spec is not None else spectrum(batch.levels[-1][0])
        boxes = _default_boxes(base, args.q)
    report = verify_determinantal(
        batch, spec=spec, boxes=boxes, z_threshold=args.z_threshold, quad_order=args.quad_order
    )
    out = _Output(args.out, _header(args, seed=args.seed))
    out.row("kind", "label", "empirical", "se", "model", "z", "ok")
    for chk in report.checks:
        out.row(chk.kind, chk.label, chk.empirical, chk.se, chk.model, chk.z, chk.ok)
    out.row("summary", "all_ok", math.nan, math.nan, math.nan, math.nan, report.all_ok)
    out.flush()
    return _EXIT_OK


def _cmd_gue(args) -> int:
    us = _parse_floats(args.u)
    vs = _parse_floats(args.v)
    out = _Output(args.out, _header(args))
    out.row("r", "s", "u", "v", "direct", "alt_route", "rel_gap")
    for u in us:
        for v in vs:
            direct = gue_minor_kernel(args.n, args.r, u, args.s, v)
            alt = math.exp((u * u - v * v) / 4.0) * uie_minor_kernel_gue(args.n, args.r, args.s, u, v)
            gap = abs(direct - alt) / max(1.0, abs(direct))
            out.row(args.r, args.s, u, v, direct, alt, gap)
    out.flush()
    return _EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtkernels",
        description="Determinantal minor-process kernels: saddle scans, kernel tables, "
        "sine-limit sweeps, Monte Carlo verification, and Gaussian-ensemble checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="-", help="output path (default stdout)")
        p.add_argument(
            "--deterministic",
            action="store_true",
            help="suppress the timestamp so identical configs give identical bytes",
        )
        p.add_argument("--threads", type=int, default=None, help="worker cap (env GTK_THREADS)")

    p = sub.add_parser("saddle", help="scan the centering saddle over bulk points")
    p.add_argument("--measure", required=True, help="measure JSON path")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c", help="comma-separated bulk points")
    p.add_argument("--c-grid", help="lo:hi:count grid of bulk points")
    common(p)
    p.set_defaults(func=_cmd_saddle)

    p = sub.add_parser("kernel", help="evaluate the fixed-top-row kernel")
    p.add_argument("--spectrum", help="comma-separated decreasing top row")
    p.add_argument("--spectrum-file", help="JSON file with the top row")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--u", required=True, help="comma-separated positions")
    p.add_argument("--v", required=True, help="comma-separated positions")
    p.add_argument("--mode", default="auto", choices=["auto", "float", "dd", "mp", "contour"])
    common(p)
    p.set_defaults(func=_cmd_kernel)

    p = sub.add_parser("sine-scan", help="sup-distance to the sine kernel along a size ladder")
    p.add_argument("--measure", required=True, help="measure JSON path")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--n", required=True, help="comma-separated ascending sizes")
    p.add_argument("--grid-points", type=int, default=21)
    p.add_argument("--half-width", type=float, default=1.0)
    p.add_argument("--limit-saddle", action="store_true", help="center with the limit-measure saddle")
    p.add_argument("--details", help="also write per-grid-point rows to this path")
    common(p)
    p.set_defaults(func=_cmd_sine_scan)

    p = sub.add_parser("mc-verify", help="Monte Carlo box statistics against kernel predictions")
    p.add_argument("--spectrum", help="comma-separated decreasing top row")
    p.add_argument("--spectrum-file", help="JSON file with the top row")
    p.add_argument("--batch", help="reuse a saved sample batch instead of sampling")
    p.add_argument("--q", type=int, required=True, help="level for the default boxes")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boxes", help="comma-separated level:lo:hi triples")
    p.add_argument("--z-threshold", type=float, default=4.0)
    p.add_argument("--quad-order", type=int, default=40)
    common(p)
    p.set_defaults(func=_cmd_mc_verify)

    p = sub.add_parser("gue", help="Gaussian-ensemble minor kernel via two independent routes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--u", required=True, help="comma-separated positions")
    p.add_argument("--v", required=True, help="comma-separated positions")
    common(p)
    p.set_defaults(func=_cmd_gue)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the message; normalize its code
        return _EXIT_VALIDATION if exc.code not in (0, None) else _EXIT_OK
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except OSError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
