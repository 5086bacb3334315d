"""Squeezed-state quadrature key distribution simulator.

Thin python surface over the C++ core: Gaussian state preparation and
measurement statistics, lossy/amplified channel maps, the estimator budget
algebra, tap-attack figures of merit, and a full-session runner.
"""

from ._sqkd import (
    EstimatorKind,
    GaussianMode,
    Quadrature,
    TwoModeGaussianState,
    __version__,
    amplified_link,
    apply_beam_splitter,
    bin_probability,
    condition_on_homodyne,
    damped_pdf_via_characteristic,
    embed_with_vacuum,
    estimator_stats,
    gain_window,
    loss_budget,
    loss_evolve,
    psa_amplify,
    quadrature_pdf,
    run_session,
    sample_homodyne,
    squeezed_state,
    tap_attack_analysis,
    uncertainty_product,
)

__all__ = [
    "EstimatorKind",
    "GaussianMode",
    "Quadrature",
    "TwoModeGaussianState",
    "__version__",
    "amplified_link",
    "apply_beam_splitter",
    "bin_probability",
    "condition_on_homodyne",
    "damped_pdf_via_characteristic",
    "embed_with_vacuum",
    "estimator_stats",
    "gain_window",
    "loss_budget",
    "loss_evolve",
    "psa_amplify",
    "quadrature_pdf",
    "run_session",
    "sample_homodyne",
    "squeezed_state",
    "tap_attack_analysis",
    "uncertainty_product",
]
