"""Determinantal correlation kernels for eigenvalue minor processes.

The package evaluates the correlation kernel of the interlacing point
process formed by the eigenvalues of the principal corners of a
Hermitian matrix with a fixed top row, together with the saddle-point
machinery of its bulk scaling limit (sine-kernel universality), an
independent Gaussian-ensemble specialization, and Monte Carlo
verification of the determinantal structure.
"""

__version__ = "0.1.0"

from . import (
    contour,
    errors,
    families,
    gue,
    kernels,
    measures,
    montecarlo,
    numerics,
    patterns,
    saddle,
    sine,
)
from .errors import (
    AtomCollision,
    ContourSeparationFailure,
    EmptySpectrum,
    GTKernelsError,
    LevelOutOfRange,
    MultipleUpperRoots,
    NonConvergence,
    NonHermitian,
    NumericalError,
    OutsideBulk,
    OverlappingBoxes,
    PointMass,
    PoleProximity,
    QuadratureNonConvergence,
    SizeGuard,
    ValidationError,
)
from .kernels import (
    correlation_det,
    kernel_fixed_top,
    kernel_fixed_top_exact,
    level_mass,
)
from .contour import kernel_contour
from .measures import (
    Measure,
    atomic,
    cauchy_transform,
    from_spectrum,
    load_measure,
    quantile_spectrum,
    semicircle,
)
from .patterns import (
    GTPattern,
    Spectrum,
    check_asymmetric_interlacing,
    check_symmetric_interlacing,
    spectrum,
)
from .saddle import (
    MassAudit,
    Saddle,
    closed_form_saddle,
    mass_audit,
    scan_bulk,
    solve_saddle,
)
from .families import SemicircleFamily, ThreeAtomFamily, TwoAtomFamily, closed_form_families
from .gue import gue_level_kernel, gue_minor_kernel, uie_minor_kernel_gue
from .montecarlo import (
    DeterminantalReport,
    FixedSpectrum,
    GUESource,
    SampleBatch,
    sample_fixed_batch,
    sample_gue_batch,
    verify_determinantal,
)
from .sine import ScalingWindow, scaled_kernel, scaling_window, sine_kernel, sine_sup_error

__all__ = [
    "__version__",
    "contour",
    "errors",
    "families",
    "gue",
    "kernels",
    "measures",
    "montecarlo",
    "numerics",
    "patterns",
    "saddle",
    "sine",
    "AtomCollision",
    "ContourSeparationFailure",
    "EmptySpectrum",
    "GTKernelsError",
    "LevelOutOfRange",
    "MultipleUpperRoots",
    "NonConvergence",
    "NonHermitian",
    "NumericalError",
    "OutsideBulk",
    "OverlappingBoxes",
    "PointMass",
    "PoleProximity",
    "QuadratureNonConvergence",
    "SizeGuard",
    "ValidationError",
    "correlation_det",
    "kernel_fixed_top",
    "kernel_fixed_top_exact",
    "kernel_contour",
    "level_mass",
    "Measure",
    "atomic",
    "cauchy_transform",
    "from_spectrum",
    "load_measure",
    "quantile_spectrum",
    "semicircle",
    "GTPattern",
    "Spectrum",
    "check_asymmetric_interlacing",
    "check_symmetric_interlacing",
    "spectrum",
    "MassAudit",
    "Saddle",
    "closed_form_saddle",
    "mass_audit",
    "scan_bulk",
    "solve_saddle",
    "SemicircleFamily",
    "ThreeAtomFamily",
    "TwoAtomFamily",
    "closed_form_families",
    "gue_level_kernel",
    "gue_minor_kernel",
    "uie_minor_kernel_gue",
    "DeterminantalReport",
    "FixedSpectrum",
    "GUESource",
    "SampleBatch",
    "sample_fixed_batch",
    "sample_gue_batch",
    "verify_determinantal",
    "ScalingWindow",
    "scaled_kernel",
    "scaling_window",
    "sine_kernel",
    "sine_sup_error",
]
