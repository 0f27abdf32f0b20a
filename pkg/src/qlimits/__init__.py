"""Random shift and impulse channels on discretised pure states.

Seeded Monte-Carlo checks of strong-law, central-limit, L1 and functional
limit behaviour for compositions of i.i.d. random unitary channels.
"""

from .channels import compose_shifts, conjugation_residual, impulse, shift
from .density import (
    FiniteMatrix,
    KernelPoint,
    Multiplication,
    PureDensity,
    RankOne,
    apply_operator,
    fourier_kernel_at,
    kernel_at,
    projector,
    trace_distance_pure,
    trace_functional,
)
from .kernels import BACKEND
from .lattice import (
    FREQUENCY,
    POSITION,
    GridSpec,
    WaveFunction,
    fourier,
    frequency_axis,
    gaussian_packet,
    inner,
    inverse_fourier,
    norm,
    normalize,
    position_axis,
)

__version__ = "0.1.0"
