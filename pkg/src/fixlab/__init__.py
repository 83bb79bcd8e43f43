"""Fixed-point laboratory: eta-ary Picard iteration, Kannan/Fisher-type
contraction functionals, sampled contraction checks and a Volterra solver."""

from .checker import (
    BanachC, CheckReport, FisherC, Functional, GenC, GenH, GenL, KannanC, SamplerConfig,
    check_inequality, estimate_constant, evaluate_samples, rhs_bound,
)
from .errors import (
    DivergenceError, DomainError, ExprSyntaxError, FixlabError, InvalidInputError,
    NonFiniteError, UnboundVariableError,
)
from .expr import compile_expr, evaluate, free_vars, parse, tokenize
from .functionals import (
    FKind, GeraghtyFn, MixWeights, Operator, banach_B, fisher_F, geraghty_eval, kannan_K,
    mix_L, mix_M, mix_Mprime,
)
from .metric import HatTuple, Interval, SpaceDescriptor, distance, hat_embed, hat_project
from .picard import (
    ConvergenceReport, fixed_point_residual, picard_run, picard_step, uniqueness_probe,
)
from .volterra import (
    GridFunction, Kernel, VolterraProblem, VolterraReport, apply_T, bielecki_distance,
    check_kernel_condition, choose_m, solve, trapezoid_cumulative,
)

__version__ = "0.1.0"
