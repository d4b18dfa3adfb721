"""Direct deconvolution with symmetric filters.

A finite symmetric filter factors into elementary ``[1, p, 1]`` filters.
Factors with ``|p| > 2`` have exact, exponentially decaying inverses; the
others have bounded pseudo-inverses and a two-dimensional kernel, which is
removed by projection at the cost of resolution.
"""

from .charpoly import (
    Decomposition,
    ElementaryFactor,
    Filter,
    QPolynomial,
    char_polynomial,
    decompose,
    decomposition_from_params,
    find_factor_params,
    reconvolve,
    reduce_to_q,
)
from .deconv1d import (
    DeconvOptions,
    DeconvReport,
    Deconvolver,
    build_inverse,
    deconvolve,
    project_out_kernel,
    resolution_report,
)
from .elementary import (
    FactorClass,
    InverseFilter,
    KernelBasis,
    classify,
    invert_elementary,
    invert_pair,
    kernel_basis,
    pseudo_inverse,
    transfer_matrix,
)
from .exceptions import (
    DegenerateBasisError,
    FiltinvError,
    InputError,
    NotInvertibleError,
    NotSeparableError,
    NumericalError,
    RootFindingError,
    TrivialKernelError,
    UseKernelPathError,
)
from .rl_baseline import Comparison, RLOptions, compare_methods, richardson_lucy
from .separable2d import (
    Kernel2D,
    SeparableDeconvolver,
    SeparableFactors,
    blur2d,
    deconvolve2d,
    inverse_kernel2d,
    separate,
)
from .signal import BoundaryPolicy, Image, Sequence, apply_filter, centered, convolve, extend, rms, unitary

__version__ = "0.1.0"
