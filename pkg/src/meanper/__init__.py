"""Extension of solutions of convolution equations f * T = 0 by spectral synthesis."""

from .coeff import (
    CoefficientTable,
    ExponentialSum,
    Sampled,
    a_sequence,
    build_kernel,
    decay_report,
    extract_coefficients,
    interpolating_entire,
    sigma,
)
from .convolver import Convolver, fourier, fourier_closed_form, fourier_derivative
from .quad import cumulative_weighted, gauss_legendre, integrate_weighted
from .spectrum import Spectrum, SpectralPoint, build_spectrum, multiplicity, predict_zeros, refine_zero
from .synth import (
    ExtensionRequest,
    b_weight,
    convergence_functional,
    e_monomial,
    extend,
    lemma_gate,
    residual,
    smoothness_budget,
    synthesize,
    theorem_budget,
)

__version__ = "0.1.0"
