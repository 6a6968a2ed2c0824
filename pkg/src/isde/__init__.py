"""Interpolating-SDE schedules, analytic scores, reverse-time samplers, and
reproducible numerical studies.

The forward model is the linear SDE dx = gamma(t)(y - x) dt + g(t) dw with
Gaussian perturbation kernel N((1-k)x0 + k y, sigma_t^2 I); five schedule
families are built by :func:`make_sde`. Reverse-time sampling runs the family
dx = [gamma(y - x) - ((1+kappa^2)/2) g^2 s] dt + kappa g dw_bar with either an
exponential integrator (:func:`isde_solve`, order 1 or 2) or classical
baselines, against analytic score models for delta, Gaussian, and mixture
priors. The harness turns configs into CSV studies; the ``isde`` console
script exposes them as subcommands.
"""

from .errors import (
    ConfigError,
    DivergenceError,
    IsdeError,
    ParameterError,
    QuadratureDomainError,
    QuadratureError,
    QuadratureToleranceError,
    ScheduleConsistencyError,
    ShapeError,
    SingularityError,
    StiffnessError,
)
from .quadrature import QuadResult, integrate, signed_integrate
from .sde_core import (
    GaussianKernel,
    InterpolatingSde,
    SdeKind,
    SdeParams,
    diffusion_from_variance,
    drift,
    gamma_from_k,
    k_from_gamma,
    make_sde,
    mean_evolution,
    perturbation_kernel,
    psi,
    sample_forward,
    variance_from_diffusion,
)
from .score import (
    DeltaPrior,
    GaussianPrior,
    MixturePrior,
    ScoreModel,
    analytic_score,
    analytic_score_model,
    dsm_loss_mc,
    eps_adapter,
    eps_loss_mc,
    marginal_moments,
    score_from_eps,
)
from .solvers import (
    SolveOutput,
    SolverSpec,
    TimeGrid,
    euler_maruyama,
    isde_solve,
    ito_increment,
    linear_step,
    nfe_per_step,
    omega_weight,
    pc_sampler,
    reverse_init,
    rk2_midpoint,
    rk45_adaptive,
    run_solver,
)
from .harness import (
    ExperimentConfig,
    SolverEntry,
    StudyResult,
    STUDIES,
    config_from_dict,
    convergence_study,
    kappa_sweep,
    marginal_check,
    nfe_sweep,
    reference_solution,
    simulate_forward,
    solve_study,
    verify_weights,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DivergenceError",
    "IsdeError",
    "ParameterError",
    "QuadratureDomainError",
    "QuadratureError",
    "QuadratureToleranceError",
    "ScheduleConsistencyError",
    "ShapeError",
    "SingularityError",
    "StiffnessError",
    "QuadResult",
    "integrate",
    "signed_integrate",
    "GaussianKernel",
    "InterpolatingSde",
    "SdeKind",
    "SdeParams",
    "diffusion_from_variance",
    "drift",
    "gamma_from_k",
    "k_from_gamma",
    "make_sde",
    "mean_evolution",
    "perturbation_kernel",
    "psi",
    "sample_forward",
    "variance_from_diffusion",
    "DeltaPrior",
    "GaussianPrior",
    "MixturePrior",
    "ScoreModel",
    "analytic_score",
    "analytic_score_model",
    "dsm_loss_mc",
    "eps_adapter",
    "eps_loss_mc",
    "marginal_moments",
    "score_from_eps",
    "SolveOutput",
    "SolverSpec",
    "TimeGrid",
    "euler_maruyama",
    "isde_solve",
    "ito_increment",
    "linear_step",
    "nfe_per_step",
    "omega_weight",
    "pc_sampler",
    "reverse_init",
    "rk2_midpoint",
    "rk45_adaptive",
    "run_solver",
    "ExperimentConfig",
    "SolverEntry",
    "StudyResult",
    "STUDIES",
    "config_from_dict",
    "convergence_study",
    "kappa_sweep",
    "marginal_check",
    "nfe_sweep",
    "reference_solution",
    "simulate_forward",
    "solve_study",
    "verify_weights",
    "__version__",
]
