"""deltalap: point-interaction Laplacian toolkit on periodic grids.

Green functions and coupling constants in closed form, the rank-one
perturbed resolvent and its fractional calculus, perturbed Sobolev norms,
regular/singular decompositions, and linear/nonlinear Schrodinger
propagation with dispersive and Strichartz measurements.
"""

from .errors import (
    AccuracyWarning,
    AdmissibilityError,
    BranchCutError,
    ConditioningError,
    DomainError,
    InsufficientWindowError,
    PoleError,
    QuadratureDivergenceError,
    QuadratureError,
    ResolutionWarning,
    SingularityError,
    TruncationWarning,
)
from .specfun import (
    EULER_GAMMA,
    SpectralConstants,
    bessel_k,
    c_of_omega,
    e_alpha,
    frac_green_closed,
    frac_green_constant,
    green,
    green_fourier,
)
from .grid import (
    Field,
    GridSpec,
    apply_multiplier,
    load_field,
    lp_norm,
    point_eval_zero,
    sample_green,
    save_field,
)
from .quadrature import QuadratureScheme, integrate_halfline
from .freeop import free_frac, free_resolvent, hsp_norm, komatsu_free_check
from .pointop import (
    Decomposition,
    PointInteraction,
    apply_op,
    b_omega,
    c_s_functional,
    decompose,
    frac_neg,
    frac_pos,
    hspa_norm,
    project_ac,
    resolvent_alpha,
    resolvent_alpha_decomposed,
)
from .dynamics import (
    DuhamelResult,
    EvolutionTrace,
    NlsProblem,
    dispersive_decay_fit,
    duhamel_solve,
    mass_energy,
    nls_strang_step,
    nls_strang_evolve,
    nonlinear_estimate_ratio,
    propagate_linear,
    reflection_horizon,
    strichartz_ratio,
)

__version__ = "0.1.0"
