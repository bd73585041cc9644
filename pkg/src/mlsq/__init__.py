"""Numerical verification of multilinear Littlewood-Paley square function bounds.

Submodules: :mod:`exponents` (exact exponent geometry), :mod:`grid` (torus
sampling and norms), :mod:`kernels` (kernel families and block constants),
:mod:`convolve` (multilinear convolution and Young checks), :mod:`sqfn`
(square function, majorant, chain quantities) and :mod:`harness`.
"""

from .exponents import Exponent, dual, holder_exponent, young_exponent
from .grid import SampledFunction, TorusGrid, lp_norm, weak_lp_norm
from .kernels import BUMP, CUBE_INDICATOR, GAUSSIAN, POWER_TAIL, b_constant
from .convolve import ThetaVector, mconv, mconv_spectral, young_check
from .sqfn import cube_majorant, square_function, square_function_exact, square_function_truncated

__version__ = "0.1.0"
