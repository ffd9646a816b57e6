"""Generalized fractional kernel and its logarithmic time derivative.

For an order function ``alpha(z)``, discount rate ``rho`` and observed
time ``t`` the kernel weight at intrinsic time ``s`` is::

    g_t(s) = exp((alpha(s-t) - 1) * ln|t-s| - rho * (s-t)) / Gamma(alpha(s-t))

and the drift correction entering the Hamilton-Pontryagin momentum balance
is::

    h(s, t) = alpha'(s-t) ln|t-s| + (alpha(s-t) - 1)/(s-t) + rho
              - psi(alpha(s-t)) alpha'(s-t)

where ``psi`` is the digamma function (``dGamma(alpha)/ds`` is expanded
with the chain rule). Differentiating ``ln g`` directly flips the sign of
the ``rho`` term; ``KernelSpec.h_convention`` picks between the two.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._backend import core
from .errors import ConfigError, DomainError

__all__ = [
    "AlphaFunction",
    "Constant",
    "Affine",
    "Logistic",
    "KernelSpec",
    "SingularityPolicy",
    "ERROR",
    "CLAMP",
    "kernel_value",
    "kernel_values",
    "log_kernel_values",
    "h_correction",
    "h_values",
    "validate_grid",
    "alpha_from_dict",
]

ERROR = "error"
CLAMP = "clamp"
H_CONVENTIONS = ("paper", "log_derivative")


class AlphaFunction:
    """Parametric C1 order function with an analytic derivative.

    Subclasses set ``kind`` (the integer tag understood by the cores) and
    implement ``params`` as a 4-tuple.
    """

    kind = -1
    family = ""

    @property
    def params(self):
        raise NotImplementedError

    def value(self, z):
        v, _ = core.alpha_eval(self.kind, self.params, np.atleast_1d(np.asarray(z, float)))
        return v if np.ndim(z) else float(v[0])

    def derivative(self, z):
        _, d = core.alpha_eval(self.kind, self.params, np.atleast_1d(np.asarray(z, float)))
        return d if np.ndim(z) else float(d[0])

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(AlphaFunction):
    a: float

    kind = 0
    family = "constant"

    @property
    def params(self):
        return (float(self.a), 0.0, 0.0, 1.0)

    def to_dict(self):
        return {"family": self.family, "a": self.a}


@dataclass(frozen=True)
class Affine(AlphaFunction):
    """``alpha(z) = a0 + a1 * z``."""

    a0: float
    a1: float

    kind = 1
    family = "affine"

    @property
    def params(self):
        return (float(self.a0), float(self.a1), 0.0, 1.0)

    def to_dict(self):
        return {"family": self.family, "a0": self.a0, "a1": self.a1}


@dataclass(frozen=True)
class Logistic(AlphaFunction):
    """``alpha(z) = lo + (hi - lo) / (1 + exp(-(z - center) / width))``."""

    lo: float
    hi: float
    center: float = 0.0
    width: float = 1.0

    kind = 2
    family = "logistic"

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError(f"logistic width must be positive, got {self.width!r}")

    @property
    def params(self):
        return (float(self.lo), float(self.hi), float(self.center), float(self.width))

    def to_dict(self):
        return {
            "family": self.family,
            "lo": self.lo,
            "hi": self.hi,
            "center": self.center,
            "width": self.width,
        }


_FAMILIES = {"constant": Constant, "affine": Affine, "logistic": Logistic}


def alpha_from_dict(d, field_name="alpha"):
    """Build an order function from its serialized form."""
    if not isinstance(d, dict) or "family" not in d:
        raise ConfigError("expected a mapping with a 'family' key", field=field_name)
    family = d["family"]
    cls = _FAMILIES.get(family)
    if cls is None:
        raise ConfigError(
            f"unknown family {family!r} (expected one of {sorted(_FAMILIES)})",
            field=f"{field_name}.family",
        )
    kwargs = {k: v for k, v in d.items() if k != "family"}
    try:
        return cls(**{k: float(v) for k, v in kwargs.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field=field_name) from None


@dataclass(frozen=True)
class SingularityPolicy:
    """What to do when ``|s - t| < epsilon``.

    ``mode="error"`` raises :class:`SingularityError`; ``mode="clamp"``
    replaces the offset by ``+-epsilon`` (negative when ``s == t``).
    """

    epsilon: float = 1e-8
    mode: str = ERROR

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.mode not in (ERROR, CLAMP):
            raise DomainError(f"unknown singularity mode {self.mode!r}")

    @property
    def clamp(self):
        return self.mode == CLAMP


DEFAULT_POLICY = SingularityPolicy()


@dataclass(frozen=True)
class KernelSpec:
    alpha: AlphaFunction
    rho: float = 0.0
    observed_time: float = 0.0
    h_convention: str = "paper"

    def __post_init__(self):
        if not self.rho >= 0:
            raise DomainError(f"rho must be >= 0, got {self.rho!r}")
        if not math.isfinite(self.observed_time):
            raise DomainError("observed_time must be finite")
        if self.h_convention not in H_CONVENTIONS:
            raise DomainError(f"unknown h_convention {self.h_convention!r}")

    def at(self, observed_time):
        """Same kernel observed at a different time."""
        return KernelSpec(self.alpha, self.rho, float(observed_time), self.h_convention)

    @property
    def is_classical(self):
        return isinstance(self.alpha, Constant) and self.alpha.a == 1.0 and self.rho == 0.0

    def to_dict(self):
        return {
            "alpha": self.alpha.to_dict(),
            "rho": self.rho,
            "observed_time": self.observed_time,
            "h_convention": self.h_convention,
        }


def _args(spec, policy):
    policy = policy or DEFAULT_POLICY
    return spec.alpha.kind, spec.alpha.params, float(spec.rho), float(spec.observed_time), policy


def kernel_values(spec, s, policy=None):
    """Vectorized kernel weights ``g_t(s)`` for an array of ``s``."""
    kind, params, rho, t, policy = _args(spec, policy)
    return core.kernel_weights(kind, params, rho, t, np.asarray(s, float), policy.epsilon, policy.clamp)


def log_kernel_values(spec, s, policy=None):
    kind, params, rho, t, policy = _args(spec, policy)
    return core.log_kernel(kind, params, rho, t, np.asarray(s, float), policy.epsilon, policy.clamp)


def kernel_value(spec, s, policy=None):
    """Kernel weight ``g_t(s)`` at a single intrinsic time.

    Raises
    ------
    SingularityError
        If ``|s - t| < epsilon`` and the policy mode is ``"error"``.
    DomainError
        If the order function leaves ``(0, 1]`` at ``s - t``.
    """
    return float(kernel_values(spec, np.array([float(s)]), policy)[0])


def h_values(spec, s, policy=None):
    kind, params, rho, t, policy = _args(spec, policy)
    return core.h_values(
        kind, params, rho, t, np.asarray(s, float), policy.epsilon, policy.clamp,
        spec.h_convention == "log_derivative",
    )


def h_correction(spec, s, policy=None):
    """Drift correction ``h(s, t)`` at a single intrinsic time."""
    return float(h_values(spec, np.array([float(s)]), policy)[0])


def validate_grid(spec, grid, policy=None):
    """Indices of grid nodes inside the epsilon ball around the observed time.

    ``grid`` may be a :class:`~fracdyn.processes.GridSpec` or an array of
    nodes. An empty list means the grid is safe.
    """
    policy = policy or DEFAULT_POLICY
    nodes = grid.nodes if hasattr(grid, "nodes") else np.asarray(grid, float)
    return [int(i) for i in np.flatnonzero(np.abs(nodes - spec.observed_time) < policy.epsilon)]


def check_alpha_range(alpha, z):
    """Raise :class:`DomainError` unless ``alpha(z)`` lies in ``(0, 1]`` for all ``z``."""
    v = np.atleast_1d(alpha.value(np.atleast_1d(np.asarray(z, float))))
    bad = np.flatnonzero(~((v > 0.0) & (v <= 1.0)))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"order value {float(v[i])!r} outside (0, 1] at z={float(np.ravel(z)[i])!r}")
