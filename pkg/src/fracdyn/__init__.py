"""Generalized fractional stochastic, fuzzy and hybrid dynamics."""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .errors import (
    ConfigError,
    DomainError,
    FracDynError,
    MetricError,
    NonFiniteError,
    SingularityError,
)
from .kernel import (
    Affine,
    Constant,
    KernelSpec,
    Logistic,
    SingularityPolicy,
    h_correction,
    kernel_value,
    validate_grid,
)
from .processes import GridSpec, fractional_process, sample_liu, sample_wiener
from .integrate import euler_hybrid, fractional_integral, stock_model_fuzzy, stock_model_stochastic
from .mechanics import euler_mechanics, hamiltonian_rhs, hp_rhs, metric_rhs, pendulum_preset
