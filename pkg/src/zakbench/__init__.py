"""Zak-domain analysis of Gabor systems on rational lattices.

The package turns finitely supported windows into their Zak transforms,
assembles the matrix fields whose singular values give frame/Riesz bounds,
tests membership of time-frequency shifts in the least-squares sense, and
certifies obstructions via quasiperiodicity products and winding numbers.
Windows with exact rational amplitudes carry an exact arithmetic layer so
that structural identities verify to zero rather than to rounding noise.
"""

from ._threads import apply_thread_cap as _apply_thread_cap

_apply_thread_cap()

from .exact import Amp, amp, amp_to_complex, dense_from_exact, exact_from_real
from .zak_core import (
    GridAlignmentError,
    PhaseError,
    ResolutionError,
    SampledWindow,
    SpreadResult,
    TimeFrequencyShift,
    ZakDiagnostics,
    ZakError,
    ZakGrid,
    dump_zak_csv,
    feichtinger_norm_estimate,
    same_signal,
    synthesize_grid,
    tf_shift,
    time_frequency_spread,
    validate_zak,
    window_from_exact,
    write_grid_csv,
    zak,
    zak_invert,
    zak_lookup,
)
from .gabor_analysis import (
    CoefficientTable,
    DivisibilityCertificate,
    HGrid,
    InvarianceCertificates,
    InvarianceReport,
    RankDeficiencyError,
    RationalLattice,
    SpectralBounds,
    ZZField,
    coefficients_from_h,
    divisibility_certificate,
    dual_field,
    h_product_check,
    invariance_test,
    reconstruct_from_coefficients,
    riesz_bounds,
    winding_numbers,
    zz_field,
)
from .constructions import (
    SQPSpec,
    SqpDefects,
    WindowSpec,
    boundary_smoothness_defect,
    breakpoint_divisor,
    bspline_value,
    construct_from_sqp,
    corrected_multiplier,
    dilate_normalize,
    example1_corrected,
    example1_corrected_spec,
    example1_corrected_sqp_spec,
    example1_spec,
    example1_window,
    example2_sqp_spec,
    example2_u,
    example2_v,
    example2_window,
    indicator_spec,
    measured_support,
    membership_residual_oracle,
    piecewise_window,
    realize,
    sqp_check,
    standard_window,
    trivial_sqp_spec,
)

__version__ = "0.1.0"

__all__ = [
    "Amp",
    "amp",
    "amp_to_complex",
    "dense_from_exact",
    "exact_from_real",
    "GridAlignmentError",
    "PhaseError",
    "ResolutionError",
    "SampledWindow",
    "SpreadResult",
    "TimeFrequencyShift",
    "ZakDiagnostics",
    "ZakError",
    "ZakGrid",
    "dump_zak_csv",
    "feichtinger_norm_estimate",
    "same_signal",
    "synthesize_grid",
    "tf_shift",
    "time_frequency_spread",
    "validate_zak",
    "window_from_exact",
    "write_grid_csv",
    "zak",
    "zak_invert",
    "zak_lookup",
    "CoefficientTable",
    "DivisibilityCertificate",
    "HGrid",
    "InvarianceCertificates",
    "InvarianceReport",
    "RankDeficiencyError",
    "RationalLattice",
    "SpectralBounds",
    "ZZField",
    "coefficients_from_h",
    "divisibility_certificate",
    "dual_field",
    "h_product_check",
    "invariance_test",
    "reconstruct_from_coefficients",
    "riesz_bounds",
    "winding_numbers",
    "zz_field",
    "SQPSpec",
    "SqpDefects",
    "WindowSpec",
    "boundary_smoothness_defect",
    "breakpoint_divisor",
    "bspline_value",
    "construct_from_sqp",
    "corrected_multiplier",
    "dilate_normalize",
    "example1_corrected",
    "example1_corrected_spec",
    "example1_corrected_sqp_spec",
    "example1_spec",
    "example1_window",
    "example2_sqp_spec",
    "example2_u",
    "example2_v",
    "example2_window",
    "indicator_spec",
    "measured_support",
    "membership_residual_oracle",
    "piecewise_window",
    "realize",
    "sqp_check",
    "standard_window",
    "trivial_sqp_spec",
    "__version__",
]
