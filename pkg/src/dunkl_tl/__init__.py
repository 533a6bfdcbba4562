"""Dunkl harmonic analysis on truncated grids.

Littlewood-Paley coefficients built from the Dunkl-Poisson semigroup,
Triebel-Lizorkin type norms, and a discrete Calderon analysis/synthesis
codec with numerical checks of the associated estimates.
"""

from .reflection import (
    DunklStructure,
    ReflectionGroup,
    RootSystem,
    ball_volume,
    dunkl_metric,
    generate_group,
    homogeneous_dimension,
    preset,
    weight,
)
from .grid import GridSpec, WeightedGrid, build_grid, integrate, lp_norm, make_test_function
from .dunkl_operator import (
    KernelOperator,
    SemigroupFamily,
    SpectralDecomposition,
    assemble_dunkl_laplacian,
    heat_kernel,
    poisson_kernel,
    spectral_decompose,
)
from .hankel import hankel_reference
from .littlewood_paley import (
    LPSystem,
    ScaleWindow,
    TLParams,
    analyze,
    cmo_norm,
    f_infty_infty_norm,
    f_infty_p_norm,
    q_function,
    tl_norm,
    validate_params,
)
from .frame import (
    FrameReport,
    NeumannConfig,
    build_operators,
    codec_roundtrip,
    contraction_estimate,
    invert_tm,
    reconstruct,
    synthesize,
)
from .pipeline import Setting

__version__ = "0.1.0"
