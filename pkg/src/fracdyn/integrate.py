"""Fractional quadrature and fixed-step Euler integration of hybrid equations.

The hybrid equation

    dx = a(s, x) g^alpha_t(s) ds + b(s, x) g^beta_t(s) dW(s) + c(s, x) g^gamma_t(s) dL(s)

is advanced with left-endpoint (Ito) evaluation. By default the observed
time ``t`` stays fixed while ``s`` marches across the grid; with
``volterra=True`` every step re-weights the whole history with ``t`` set
to the current node, at ``O(N^2)`` cost.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import io
import math

import numpy as np

from . import special
from .errors import DomainError, NonFiniteError
from .kernel import DEFAULT_POLICY, Constant, KernelSpec, kernel_values
from .processes import GridSpec, LiuPath, WienerPath, format_float

__all__ = [
    "CoefficientField",
    "HybridSystem",
    "Trajectory",
    "constant_field",
    "linear_field",
    "zero_field",
    "fractional_integral",
    "euler_hybrid",
    "stock_model_stochastic",
    "stock_model_fuzzy",
    "run_ensemble",
    "summary_csv",
]


@dataclass(frozen=True)
class CoefficientField:
    """A deterministic vector field ``(s, x) -> R^n``."""

    dimension: int
    fn: object
    name: str = ""

    def evaluate(self, s, x):
        return np.asarray(self.fn(s, x), dtype=float).reshape(self.dimension)

    __call__ = evaluate


def zero_field(dimension):
    z = np.zeros(dimension)
    return CoefficientField(dimension, lambda s, x: z, "zero")


def constant_field(values):
    v = np.atleast_1d(np.asarray(values, dtype=float))
    return CoefficientField(v.size, lambda s, x: v, "constant")


def linear_field(matrix, offset=None):
    """``x -> offset + matrix @ x``."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    c = np.zeros(m.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    return CoefficientField(m.shape[0], lambda s, x: c + m @ x, "linear")


@dataclass(frozen=True)
class HybridSystem:
    drift: CoefficientField
    diffusion: CoefficientField
    fuzzy: CoefficientField
    kernel_alpha: KernelSpec
    kernel_beta: KernelSpec
    kernel_gamma: KernelSpec
    x0: np.ndarray
    name: str = "hybrid"

    def __post_init__(self):
        dims = {self.drift.dimension, self.diffusion.dimension, self.fuzzy.dimension}
        if len(dims) != 1:
            raise DomainError(f"coefficient fields disagree on dimension: {sorted(dims)}")
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.size != self.dimension:
            raise DomainError(f"x0 has {x0.size} entries, system dimension is {self.dimension}")
        object.__setattr__(self, "x0", x0)

    @property
    def dimension(self):
        return self.drift.dimension


@dataclass(eq=False)
class Trajectory:
    grid: GridSpec
    states: np.ndarray
    provenance: dict = field(default_factory=dict)
    labels: tuple = ()

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim == 1:
            self.states = self.states[:, None]
        if not self.labels:
            n = self.states.shape[1]
            self.labels = tuple(f"x_{i + 1}" for i in range(n))

    @property
    def terminal(self):
        return self.states[-1]

    @property
    def times(self):
        return self.grid.nodes[: self.states.shape[0]]

    def column(self, label):
        return self.states[:, self.labels.index(label)]

    def to_csv(self, fh=None):
        """``n,s,<labels>`` rows at 17 significant digits."""
        own = fh is None
        fh = io.StringIO() if own else fh
        fh.write(",".join(("n", "s") + tuple(self.labels)) + "\n")
        s = self.times
        for n, row in enumerate(self.states):
            fh.write(",".join([str(n), format_float(s[n])] + [format_float(v) for v in row]) + "\n")
        return fh.getvalue() if own else None


def _endpoint_weight(a, rho, width):
    """``int_0^width u^(a-1) exp(rho u) du / Gamma(a)`` by its power series."""
    total = 0.0
    term = 1.0  # (rho width)^m / m!
    m = 0
    while True:
        contrib = term * width**a / (m + a)
        total += contrib
        m += 1
        term *= rho * width / m
        if abs(contrib) <= 1e-17 * abs(total) or m > 200:
            break
    return total / special.gamma(a)


def fractional_integral(kernel, f, grid, policy=None):
    """Generalized fractional integral of ``f`` over ``[t0, t]``.

    The grid must end at the kernel's observed time. Nodes ``s_0..s_{N-2}``
    enter a left-endpoint Riemann sum. For a constant order the last cell,
    which touches the weak singularity, is integrated exactly against the
    kernel with ``f`` frozen at its left node; otherwise the plain
    left-endpoint term is kept.

    Raises
    ------
    NonFiniteError
        If ``f`` returns NaN or Inf at any node.
    """
    policy = policy or DEFAULT_POLICY
    t = kernel.observed_time
    if abs(grid.T - t) > 1e-12 * max(1.0, abs(t)):
        raise DomainError(f"grid must end at the observed time {t!r}, got T={grid.T!r}")
    K = grid.step
    s = grid.nodes[:-1]
    fv = np.array([f(si) for si in s], dtype=float)
    bad = np.flatnonzero(~np.isfinite(fv))
    if bad.size:
        raise NonFiniteError(f"integrand is not finite at s={s[bad[0]]!r}", step=int(bad[0]))
    if isinstance(kernel.alpha, Constant):
        w = kernel_values(kernel, s[:-1], policy) * K if s.size > 1 else np.zeros(0)
        head = float(np.dot(fv[:-1], w))
        return head + fv[-1] * _endpoint_weight(kernel.alpha.a, kernel.rho, K)
    w = kernel_values(kernel, s, policy)
    return float(np.dot(fv, w)) * K


def _zero_wiener(grid):
    return WienerPath(grid, np.zeros(grid.N), -1)


def _zero_liu(grid):
    return LiuPath(grid, 0.0, 0.0, 1.0, np.zeros(grid.N))


def _check_paths(grid, *paths):
    for p in paths:
        if p.grid != grid:
            raise DomainError(f"path grid {p.grid} does not match integration grid {grid}")


def euler_hybrid(system, grid, wiener=None, liu=None, policy=None, volterra=False):
    """Integrate a :class:`HybridSystem` with the fixed-step Euler scheme.

    ``x_{n+1} = x_n + a g^alpha(s_n) K + b g^beta(s_n) dW_n + c g^gamma(s_n) dL_n``

    Missing paths are treated as identically zero. With ``volterra=True``
    the observed time of each kernel is replaced by the node being computed
    and the whole history is re-weighted every step.

    Raises
    ------
    NonFiniteError
        At the first non-finite state; ``partial`` holds the truncated
        trajectory and ``step`` the offending index.
    """
    policy = policy or DEFAULT_POLICY
    wiener = wiener if wiener is not None else _zero_wiener(grid)
    liu = liu if liu is not None else _zero_liu(grid)
    _check_paths(grid, wiener, liu)
    provenance = {
        "seed": wiener.seed,
        "z": liu.z,
        "system": system.name,
        "scheme": "euler-volterra" if volterra else "euler-fixed-t",
    }
    if volterra:
        states, bad = _euler_volterra(system, grid, wiener, liu, policy)
    else:
        states, bad = _euler_fixed(system, grid, wiener, liu, policy)
    traj = Trajectory(grid, states, provenance)
    if bad >= 0:
        raise NonFiniteError(f"non-finite state at step {bad}", step=bad, partial=traj)
    return traj


def _euler_fixed(system, grid, wiener, liu, policy):
    s = grid.nodes
    K = grid.step
    ga = kernel_values(system.kernel_alpha, s[:-1], policy)
    gb = kernel_values(system.kernel_beta, s[:-1], policy)
    gc = kernel_values(system.kernel_gamma, s[:-1], policy)
    dW = wiener.increments
    dL = liu.increments
    a, b, c = system.drift.evaluate, system.diffusion.evaluate, system.fuzzy.evaluate
    states = np.empty((grid.N + 1, system.dimension))
    x = system.x0.copy()
    states[0] = x
    for n in range(grid.N):
        sn = s[n]
        x = x + a(sn, x) * ga[n] * K + b(sn, x) * gb[n] * dW[n] + c(sn, x) * gc[n] * dL[n]
        if not np.all(np.isfinite(x)):
            return states[: n + 1], n + 1
        states[n + 1] = x
    return states, -1


def _euler_volterra(system, grid, wiener, liu, policy):
    s = grid.nodes
    K = grid.step
    dim = system.dimension
    dW = wiener.increments
    dL = liu.increments
    # per-node contributions before kernel weighting
    ca = np.empty((grid.N, dim))
    cb = np.empty((grid.N, dim))
    cc = np.empty((grid.N, dim))
    states = np.empty((grid.N + 1, dim))
    x0 = system.x0.copy()
    states[0] = x0
    x = x0
    for n in range(grid.N):
        sn = s[n]
        ca[n] = system.drift.evaluate(sn, x) * K
        cb[n] = system.diffusion.evaluate(sn, x) * dW[n]
        cc[n] = system.fuzzy.evaluate(sn, x) * dL[n]
        t_next = s[n + 1]
        hist = s[: n + 1]
        wa = kernel_values(system.kernel_alpha.at(t_next), hist, policy)
        wb = kernel_values(system.kernel_beta.at(t_next), hist, policy)
        wc = kernel_values(system.kernel_gamma.at(t_next), hist, policy)
        x = x0 + wa @ ca[: n + 1] + wb @ cb[: n + 1] + wc @ cc[: n + 1]
        if not np.all(np.isfinite(x)):
            return states[: n + 1], n + 1
        states[n + 1] = x
    return states, -1


def _as_function(f):
    if callable(f):
        return f
    value = float(f)
    return lambda s: value


def stock_model_stochastic(mu, sigma, alpha1, x0, grid, seed, policy=None,
                           observed_time=None, volterra=False):
    """Fractional Black-Scholes model driven by a Wiener path.

    Drift ``mu(s) x`` with constant order ``alpha1``; diffusion
    ``sigma(s) x`` against ``dW`` with order ``(1 + alpha1) / 2``; no Liu
    channel. ``mu`` and ``sigma`` may be callables of ``s`` or constants.
    The observed time defaults to the grid end.
    """
    if not 0.0 < alpha1 <= 1.0:
        raise DomainError(f"alpha1 must lie in (0, 1], got {alpha1!r}")
    mu_f, sig_f = _as_function(mu), _as_function(sigma)
    t = grid.T if observed_time is None else observed_time
    system = HybridSystem(
        drift=CoefficientField(1, lambda s, x: mu_f(s) * x, "mu*x"),
        diffusion=CoefficientField(1, lambda s, x: sig_f(s) * x, "sigma*x"),
        fuzzy=zero_field(1),
        kernel_alpha=KernelSpec(Constant(alpha1), 0.0, t),
        kernel_beta=KernelSpec(Constant((1.0 + alpha1) / 2.0), 0.0, t),
        kernel_gamma=KernelSpec(Constant(1.0), 0.0, t),
        x0=[x0],
        name="stock_stochastic",
    )
    from .processes import sample_wiener

    return euler_hybrid(system, grid, sample_wiener(grid, seed), None, policy, volterra)


def stock_model_fuzzy(mu, sigma, beta1, x0, grid, z, e=0.0, sigma_liu=1.0,
                      policy=None, observed_time=None, volterra=False):
    """Fuzzy stock model: ordinary drift ``mu(s) x`` plus ``sigma(s) x`` against
    a Liu path through a constant order ``beta1`` kernel."""
    if not 0.0 < beta1 <= 1.0:
        raise DomainError(f"beta1 must lie in (0, 1], got {beta1!r}")
    mu_f, sig_f = _as_function(mu), _as_function(sigma)
    t = grid.T if observed_time is None else observed_time
    system = HybridSystem(
        drift=CoefficientField(1, lambda s, x: mu_f(s) * x, "mu*x"),
        diffusion=zero_field(1),
        fuzzy=CoefficientField(1, lambda s, x: sig_f(s) * x, "sigma*x"),
        kernel_alpha=KernelSpec(Constant(1.0), 0.0, t),
        kernel_beta=KernelSpec(Constant(1.0), 0.0, t),
        kernel_gamma=KernelSpec(Constant(beta1), 0.0, t),
        x0=[x0],
        name="stock_fuzzy",
    )
    from .processes import sample_liu

    return euler_hybrid(system, grid, None, sample_liu(grid, z, e, sigma_liu), policy, volterra)


def run_ensemble(fn, keys, workers=1):
    """Evaluate ``fn(key)`` for every key; returns ``[(key, result), ...]`` in key order.

    ``workers > 1`` uses a process pool, so ``fn`` must be picklable. The
    returned list does not depend on scheduling order.
    """
    keys = list(keys)
    if workers <= 1 or len(keys) <= 1:
        return [(k, fn(k)) for k in keys]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(fn, keys))
    return list(zip(keys, results))


def summary_csv(rows, labels, key_name="seed_or_z", fh=None):
    """Ensemble summary: one row per member, sorted by key, terminal state columns."""
    own = fh is None
    fh = io.StringIO() if own else fh
    fh.write(",".join((key_name,) + tuple(labels)) + "\n")
    for key, terminal in sorted(rows, key=lambda r: r[0]):
        fh.write(",".join([format_float(key) if isinstance(key, float) else str(key)]
                          + [format_float(v) for v in np.atleast_1d(terminal)]) + "\n")
    return fh.getvalue() if own else None
