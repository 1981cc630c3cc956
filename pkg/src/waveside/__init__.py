"""waveside: one-sided recovery of a 1D wave medium.

Forward side: a Sturm-Liouville eigensolver, transmutation-kernel
construction of the probing initial condition, and modal synthesis of the
boundary trace.  Inverse side: harmonic retrieval of the spectral data from
one trace, asymptotic recovery of the domain length and boundary constant,
Gelfand-Levitan reconstruction of the potential, and the far-end profile
from eigenvalues alone.
"""

from .model import (
    ROBIN, DIRICHLET,
    CHANNEL_U0, CHANNEL_UX0, CHANNEL_UL,
    Scenario, KnownPrefix, Trace, SpectralData,
    ValidationError, ExtractionError, ConvergenceError,
    validate_scenario, known_prefix_of, measurement_channel,
)
from .sturm import (
    IvpSolution, EigenResult,
    solve_ivp, eigenvalues, spectrum, norming_constant, fourier_coefficient,
)
from .transmute import (
    TransmutationKernel, InitialCondition,
    compute_kernel, kernel_identity_residual, build_g, b_closed_form,
)
from .synth import (
    ModalCoefficients, synthesize_trace, field_at, laplace_of_trace,
)
from .modes import (
    ModeEstimate, ModeDetector,
    detect_modes, spectral_data_from_modes, resolvability_report,
)
from .reconstruct import (
    GlResult, estimate_length, estimate_a1, recover_H, gl_reconstruct,
)
from .endpoint import BoundaryFunction, phi, phi_prime, far_end_profile
from .pipeline import TraceReconstructor, ReconstructionReport

__version__ = "0.1.0"

__all__ = [
    "ROBIN", "DIRICHLET", "CHANNEL_U0", "CHANNEL_UX0", "CHANNEL_UL",
    "Scenario", "KnownPrefix", "Trace", "SpectralData",
    "ValidationError", "ExtractionError", "ConvergenceError",
    "validate_scenario", "known_prefix_of", "measurement_channel",
    "IvpSolution", "EigenResult", "solve_ivp", "eigenvalues", "spectrum",
    "norming_constant", "fourier_coefficient",
    "TransmutationKernel", "InitialCondition", "compute_kernel",
    "kernel_identity_residual", "build_g", "b_closed_form",
    "ModalCoefficients", "synthesize_trace", "field_at", "laplace_of_trace",
    "ModeEstimate", "ModeDetector", "detect_modes",
    "spectral_data_from_modes", "resolvability_report",
    "GlResult", "estimate_length", "estimate_a1", "recover_H",
    "gl_reconstruct",
    "BoundaryFunction", "phi", "phi_prime", "far_end_profile",
    "TraceReconstructor", "ReconstructionReport",
]
