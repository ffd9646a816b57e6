"""Sample paths of Wiener and Liu processes and their fractional transforms.

Wiener increments come from numpy's ``PCG64`` bit generator seeded with the
caller's integer, pushed through ``Generator.standard_normal`` (ziggurat)
and scaled by ``sqrt(K)``. A Liu path is one point of the credibility
space: at credibility level ``c`` every increment is the ``c``-quantile of a
normal fuzzy variable with expected value ``e K`` and scale ``sigma K``,
so the path is deterministic and linear in time.
"""

from dataclasses import dataclass, field
import io
import math

import numpy as np

from ._backend import core
from .errors import DomainError
from .kernel import DEFAULT_POLICY

__all__ = [
    "GridSpec",
    "WienerPath",
    "LiuPath",
    "FractionalProcessSample",
    "sample_wiener",
    "sample_liu",
    "credibility_level",
    "z_from_credibility",
    "fractional_process",
    "fractional_terminal",
    "path_to_csv",
    "format_float",
]

_SQRT6_OVER_PI = math.sqrt(6.0) / math.pi


def format_float(x):
    """17 significant digits, the interchange precision for every CSV."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class GridSpec:
    t0: float
    T: float
    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not (math.isfinite(self.t0) and math.isfinite(self.T)) or not self.T > self.t0:
            raise DomainError(f"need finite t0 < T, got t0={self.t0!r}, T={self.T!r}")

    @property
    def step(self):
        return (self.T - self.t0) / self.N

    @property
    def nodes(self):
        """``s_n = t0 + n K`` for ``n = 0..N``."""
        return self.t0 + np.arange(self.N + 1) * self.step

    def to_dict(self):
        return {"t0": self.t0, "T": self.T, "N": int(self.N)}


@dataclass(frozen=True, eq=False)
class WienerPath:
    grid: GridSpec
    increments: np.ndarray
    seed: int

    @property
    def values(self):
        return np.concatenate(([0.0], np.cumsum(self.increments)))


@dataclass(frozen=True, eq=False)
class LiuPath:
    grid: GridSpec
    z: float
    e: float
    sigma: float
    increments: np.ndarray

    @property
    def credibility(self):
        return credibility_level(self.z, self.sigma)

    @property
    def values(self):
        return np.concatenate(([0.0], np.cumsum(self.increments)))


@dataclass(frozen=True, eq=False)
class FractionalProcessSample:
    kernel: object
    path: object
    values: np.ndarray


def sample_wiener(grid, seed):
    """Draw ``N`` iid ``Normal(0, K)`` increments, reproducible under ``seed``."""
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    incr = rng.standard_normal(grid.N) * math.sqrt(grid.step)
    incr.setflags(write=False)
    return WienerPath(grid, incr, int(seed))


def credibility_level(z, sigma=1.0):
    """Credibility level ``1 / (1 + exp(-pi z / (sigma sqrt 6)))`` of the fuzzy seed ``z``."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    x = math.pi * z / (sigma * math.sqrt(6.0))
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def z_from_credibility(c, sigma=1.0):
    """Inverse of :func:`credibility_level`."""
    if not 0.0 < c < 1.0:
        raise DomainError(f"credibility level must lie in (0, 1), got {c!r}")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    return sigma * _SQRT6_OVER_PI * math.log(c / (1.0 - c))


def sample_liu(grid, z, e=0.0, sigma=1.0):
    """Deterministic Liu path at the credibility level fixed by ``z``.

    Each increment is ``e K + sigma K (sqrt6/pi) logit(c)``; the logit is
    taken from ``z`` directly so large ``|z|`` does not saturate ``c``.
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    K = grid.step
    logit = math.pi * z / (sigma * math.sqrt(6.0))
    dl = e * K + sigma * K * _SQRT6_OVER_PI * logit
    incr = np.full(grid.N, dl)
    incr.setflags(write=False)
    return LiuPath(grid, float(z), float(e), float(sigma), incr)


def fractional_process(kernel, path, policy=None):
    """Fractional transform of a sampled path, evaluated at every grid node.

    ``values[n] = sum_{k<n} g_{s_n}(s_k) * dpath_k``: left-endpoint sums
    with the observed time set to the evaluation node. ``O(N^2)``.
    """
    policy = policy or DEFAULT_POLICY
    alpha = kernel.alpha
    vals = core.fractional_sums(
        alpha.kind, alpha.params, float(kernel.rho), path.grid.nodes,
        np.asarray(path.increments, float), policy.epsilon, policy.clamp,
    )
    return FractionalProcessSample(kernel, path, vals)


def fractional_terminal(kernel, path, policy=None):
    """Value of the fractional process at the grid end ``T`` only (``O(N)``)."""
    from .kernel import kernel_values

    s = path.grid.nodes
    w = kernel_values(kernel.at(s[-1]), s[:-1], policy)
    return float(np.dot(w, path.increments))


def path_to_csv(path, values=None, fh=None):
    """Write ``n,s,increment,value`` rows; returns the text when ``fh`` is None.

    Row ``n`` carries the increment that ends at node ``n`` (zero on row 0).

    ``values`` defaults to the cumulative path; pass a fractional sample's
    values to export ``J`` or ``K`` instead.
    """
    own = fh is None
    fh = io.StringIO() if own else fh
    vals = path.values if values is None else values
    s = path.grid.nodes
    fh.write("n,s,increment,value\n")
    for n in range(path.grid.N + 1):
        inc = path.increments[n - 1] if n > 0 else 0.0
        fh.write(f"{n},{format_float(s[n])},{format_float(inc)},{format_float(vals[n])}\n")
    return fh.getvalue() if own else None
