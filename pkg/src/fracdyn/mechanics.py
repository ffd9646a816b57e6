"""Fractional hybrid Hamilton-Pontryagin dynamics and its Euler scheme.

For a Lagrangian ``L(q, v) = |v|^2 / 2 - V(q)`` perturbed by ``gamma1(q) dW``
and ``gamma2(q) dL`` the momentum balance is

    dp = (dL/dq - p h(s, t)) ds + grad gamma1 dW + grad gamma2 dL

with ``dq = v ds`` and ``p = dL/dv``. Metric Lagrangians ``g_ij v^i v^j / 2``
are handled in velocity form (Christoffel symbols) or momentum form.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._backend import core
from .errors import DomainError, MetricError, NonFiniteError
from .integrate import Trajectory
from .kernel import DEFAULT_POLICY, h_correction, h_values
from .processes import LiuPath, WienerPath

__all__ = [
    "PotentialSystem",
    "MetricSystem",
    "HPState",
    "RHS",
    "hp_rhs",
    "hamiltonian_rhs",
    "metric_rhs",
    "pendulum_preset",
    "harmonic_preset",
    "free_preset",
    "euclidean_metric",
    "polar_metric",
    "christoffel_fd",
    "euler_mechanics",
]


def _zeros_like_q(q):
    return np.zeros_like(np.asarray(q, dtype=float))


def _zero_scalar(q):
    return 0.0


@dataclass(frozen=True)
class PotentialSystem:
    """Unit-mass system with potential ``V`` and noise potentials ``gamma1``, ``gamma2``."""

    dimension: int
    V: object
    gradV: object
    gamma1: object = _zero_scalar
    grad_gamma1: object = _zeros_like_q
    gamma2: object = _zero_scalar
    grad_gamma2: object = _zeros_like_q
    name: str = "potential"
    preset: str = ""
    params: dict = field(default_factory=dict)

    def lagrangian(self, q, v):
        v = np.asarray(v, dtype=float)
        return 0.5 * float(v @ v) - self.V(q)

    def hamiltonian(self, q, p):
        p = np.asarray(p, dtype=float)
        return 0.5 * float(p @ p) + self.V(q)


@dataclass(frozen=True)
class MetricSystem:
    """Free motion in a coordinate metric ``g_ij(q)`` with optional noise potentials.

    ``christoffel`` may return ``Gamma[i, j, k]`` analytically; otherwise
    central differences of the metric with step ``fd_step`` are used.
    """

    dimension: int
    metric: object
    christoffel: object = None
    fd_step: float = 1e-5
    grad_gamma1: object = _zeros_like_q
    grad_gamma2: object = _zeros_like_q
    name: str = "metric"

    def g(self, q):
        g = np.asarray(self.metric(np.asarray(q, dtype=float)), dtype=float)
        g = g.reshape(self.dimension, self.dimension)
        if not np.allclose(g, g.T, rtol=1e-12, atol=1e-14):
            raise MetricError(f"metric is not symmetric at q={q!r}")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise MetricError(f"metric is not positive definite at q={q!r}") from None
        return g

    def dg(self, q):
        """``dg[l, i, j] = d g_ij / d q^l`` by central differences."""
        q = np.asarray(q, dtype=float)
        n, hstep = self.dimension, self.fd_step
        out = np.empty((n, n, n))
        for l in range(n):
            e = np.zeros(n)
            e[l] = hstep
            out[l] = (self.g(q + e) - self.g(q - e)) / (2.0 * hstep)
        return 0.5 * (out + out.transpose(0, 2, 1))

    def gamma(self, q):
        """Christoffel symbols ``Gamma[i, j, k]`` (upper index first)."""
        if self.christoffel is not None:
            return np.asarray(self.christoffel(np.asarray(q, dtype=float)), dtype=float)
        return christoffel_fd(self, q)


def christoffel_fd(system, q):
    """Christoffel symbols from finite differences of the metric, symmetrized in j, k."""
    ginv = np.linalg.inv(system.g(q))
    dg = system.dg(q)  # dg[l, i, j] = d_l g_ij
    # lowered: G[l, j, k] = (d_j g_lk + d_k g_lj - d_l g_jk) / 2
    lowered = 0.5 * (
        dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    )
    gam = np.einsum("il,ljk->ijk", ginv, lowered)
    return 0.5 * (gam + gam.transpose(0, 2, 1))


@dataclass
class HPState:
    q: np.ndarray
    v: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.v = np.atleast_1d(np.asarray(self.v, dtype=float))
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))


@dataclass(frozen=True)
class RHS:
    """Right-hand side split by driver: ``dx = drift ds + dW_coeff dW + dL_coeff dL``.

    ``dq`` is the configuration rate; ``drift``, ``dW`` and ``dL`` are the
    coefficients of the momentum (or velocity) equation.
    """

    dq: np.ndarray
    drift: np.ndarray
    dW: np.ndarray
    dL: np.ndarray


def _vec(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _hp_coeffs(system, q, v, p, h, verbatim=False):
    dLdq = -_vec(system.gradV(q))
    return RHS(
        dq=v.copy(),
        drift=dLdq - (h if verbatim else p * h),
        dW=_vec(system.grad_gamma1(q)),
        dL=_vec(system.grad_gamma2(q)),
    )


def _hamiltonian_coeffs(system, q, p, h, verbatim=False):
    dHdq = _vec(system.gradV(q))
    return RHS(
        dq=p.copy(),
        drift=-dHdq - (h if verbatim else p * h),
        dW=_vec(system.grad_gamma1(q)),
        dL=_vec(system.grad_gamma2(q)),
    )


def hp_rhs(system, state, s, kernel, policy=None):
    """Coefficients of the fractional hybrid HP equations at ``(state, s)``.

    ``dq = v ds``; ``dp = (dL/dq - p h) ds + grad gamma1 dW + grad gamma2 dL``.
    """
    h = h_correction(kernel, s, policy)
    return _hp_coeffs(system, state.q, state.v, state.p, h)


def hamiltonian_rhs(system, q, p, s, kernel, policy=None):
    """Coefficients of the fractional hybrid Hamiltonian (Langevin) equations.

    With ``H = |p|^2/2 + V``: ``dq = p ds`` and
    ``dp = (-grad V - p h) ds + grad gamma1 dW + grad gamma2 dL``.
    """
    h = h_correction(kernel, s, policy)
    return _hamiltonian_coeffs(system, _vec(q), _vec(p), h)


def metric_rhs(system, q, v_or_p, s, kernel, policy=None, form="velocity"):
    """Coefficients for a metric Lagrangian.

    ``form="velocity"``:
        ``dv^i = -(Gamma^i_jk v^j v^k - h v^i) ds + g^ij d_j gamma1 dW + g^ij d_j gamma2 dL``
    ``form="momentum"``:
        ``dq^i = g^ij p_j``, ``dp_i = (d_i g_kl p^k p^l / 2 - h p_i) ds + d_i gamma1 dW + d_i gamma2 dL``
        with ``p^k = g^kj p_j``.
    """
    if form not in ("velocity", "momentum"):
        raise DomainError(f"form must be 'velocity' or 'momentum', got {form!r}")
    h = h_correction(kernel, s, policy)
    return _metric_coeffs(system, _vec(q), _vec(v_or_p), h, form)


def pendulum_preset(alpha1, alpha2):
    """``V = cos q``, ``gamma1 = alpha1 sin q``, ``gamma2 = alpha2 q^2 / 2`` in one dimension."""
    a1, a2 = float(alpha1), float(alpha2)
    return PotentialSystem(
        dimension=1,
        V=lambda q: float(np.cos(_vec(q)[0])),
        gradV=lambda q: -np.sin(_vec(q)),
        gamma1=lambda q: a1 * float(np.sin(_vec(q)[0])),
        grad_gamma1=lambda q: a1 * np.cos(_vec(q)),
        gamma2=lambda q: 0.5 * a2 * float(_vec(q)[0]) ** 2,
        grad_gamma2=lambda q: a2 * _vec(q),
        name="pendulum",
        preset="pendulum",
        params={"alpha1": a1, "alpha2": a2},
    )


def harmonic_preset(dimension=1, omega=1.0, alpha1=0.0, alpha2=0.0):
    """``V = omega^2 |q|^2 / 2`` with linear noise potentials ``alpha1 sum q``, ``alpha2 |q|^2/2``."""
    w2 = float(omega) ** 2
    a1, a2 = float(alpha1), float(alpha2)
    return PotentialSystem(
        dimension=dimension,
        V=lambda q: 0.5 * w2 * float(_vec(q) @ _vec(q)),
        gradV=lambda q: w2 * _vec(q),
        gamma1=lambda q: a1 * float(np.sum(_vec(q))),
        grad_gamma1=lambda q: np.full(dimension, a1),
        gamma2=lambda q: 0.5 * a2 * float(_vec(q) @ _vec(q)),
        grad_gamma2=lambda q: a2 * _vec(q),
        name="harmonic",
        preset="harmonic",
        params={"omega": float(omega), "alpha1": a1, "alpha2": a2},
    )


def free_preset(dimension=1):
    return PotentialSystem(
        dimension=dimension,
        V=lambda q: 0.0,
        gradV=lambda q: np.zeros(dimension),
        name="free",
        preset="free",
    )


def euclidean_metric(dimension):
    eye = np.eye(dimension)
    return MetricSystem(
        dimension,
        metric=lambda q: eye,
        christoffel=lambda q: np.zeros((dimension, dimension, dimension)),
        name="euclidean",
    )


def _polar_christoffel(q):
    r = q[0]
    gam = np.zeros((2, 2, 2))
    gam[0, 1, 1] = -r
    gam[1, 0, 1] = gam[1, 1, 0] = 1.0 / r
    return gam


def polar_metric(analytic=True):
    """Plane in polar coordinates ``(r, theta)``: ``g = diag(1, r^2)``."""
    return MetricSystem(
        2,
        metric=lambda q: np.diag([1.0, q[0] ** 2]),
        christoffel=_polar_christoffel if analytic else None,
        name="polar",
    )


def _initial_qp(initial):
    if isinstance(initial, HPState):
        return initial.q.copy(), initial.p.copy()
    q, p = initial
    return _vec(q).copy(), _vec(p).copy()


def euler_mechanics(system, initial, grid, kernel, wiener=None, liu=None, policy=None,
                    scheme="proportional", form="momentum", equations="hamiltonian"):
    """First-order Euler scheme for the fractional hybrid Hamiltonian equations.

    ``q_{n+1} = q_n + K dq(q_n, p_n)``,
    ``p_{n+1} = p_n + K drift + dW_coeff dW_n + dL_coeff dL_n``,
    with ``h`` evaluated at ``(s_n, t)`` for the kernel's fixed observed
    time. ``scheme="proportional"`` (default) damps with ``-h p``; ``scheme="verbatim"`` uses ``-h`` without the factor ``p``
    (potential systems only). ``equations="hp"`` steps the HP form with the
    Legendre map ``v = p`` applied after every step; the result equals the
    Hamiltonian form. For a :class:`MetricSystem` the state is ``(q, p)``
    in momentum form or ``(q, v)`` in velocity form.

    The pendulum preset in Hamiltonian form runs through the compiled core.

    Raises
    ------
    NonFiniteError
        At the first non-finite state, with ``partial`` set.
    """
    if scheme not in ("proportional", "verbatim"):
        raise DomainError(f"scheme must be 'proportional' or 'verbatim', got {scheme!r}")
    if equations not in ("hamiltonian", "hp"):
        raise DomainError(f"equations must be 'hamiltonian' or 'hp', got {equations!r}")
    policy = policy or DEFAULT_POLICY
    if wiener is None:
        wiener = WienerPath(grid, np.zeros(grid.N), -1)
    if liu is None:
        liu = LiuPath(grid, 0.0, 0.0, 1.0, np.zeros(grid.N))
    for path in (wiener, liu):
        if path.grid != grid:
            raise DomainError(f"path grid {path.grid} does not match integration grid {grid}")
    q0, p0 = _initial_qp(initial)
    if not (np.all(np.isfinite(q0)) and np.all(np.isfinite(p0))):
        raise DomainError("initial state must be finite")
    s = grid.nodes
    K = grid.step
    h = h_values(kernel, s[:-1], policy)
    dW, dL = wiener.increments, liu.increments
    n = system.dimension
    labels = ("q", "p") if n == 1 else tuple(f"q_{i + 1}" for i in range(n)) + tuple(
        f"p_{i + 1}" for i in range(n)
    )
    if isinstance(system, MetricSystem) and form == "velocity":
        labels = ("q", "v") if n == 1 else labels[:n] + tuple(f"v_{i + 1}" for i in range(n))
    provenance = {"seed": wiener.seed, "z": liu.z, "system": system.name, "scheme": scheme}

    fast = isinstance(system, PotentialSystem) and system.preset == "pendulum"
    if fast and equations == "hamiltonian":
        q, p, bad = core.pendulum_euler(
            float(q0[0]), float(p0[0]), K, h, system.params["alpha1"],
            system.params["alpha2"], dW, dL, scheme == "verbatim",
        )
        states = np.column_stack([q, p])
    else:
        states, bad = _euler_generic(system, q0, p0, K, h, dW, dL, scheme, form, equations)
    if bad >= 0:
        traj = Trajectory(grid, states[: bad + 1], provenance, labels)
        raise NonFiniteError(f"non-finite state at step {bad}", step=bad, partial=traj)
    return Trajectory(grid, states, provenance, labels)


def _euler_generic(system, q0, p0, K, h, dW, dL, scheme, form, equations):
    n_steps = len(dW)
    dim = system.dimension
    states = np.empty((n_steps + 1, 2 * dim))
    q, p = q0, p0
    states[0, :dim] = q
    states[0, dim:] = p
    metric = isinstance(system, MetricSystem)
    verbatim = scheme == "verbatim"
    for n in range(n_steps):
        if metric:
            rhs = _metric_coeffs(system, q, p, h[n], form)
        elif equations == "hp":
            rhs = _hp_coeffs(system, q, p, p, h[n], verbatim)
        else:
            rhs = _hamiltonian_coeffs(system, q, p, h[n], verbatim)
        q_next = q + K * rhs.dq
        p_next = p + K * rhs.drift + rhs.dW * dW[n] + rhs.dL * dL[n]
        states[n + 1, :dim] = q_next
        states[n + 1, dim:] = p_next
        if not (np.all(np.isfinite(q_next)) and np.all(np.isfinite(p_next))):
            return states, n + 1
        q, p = q_next, p_next
    return states, -1


def _metric_coeffs(system, q, x, h, form):
    g = system.g(q)
    ginv = np.linalg.inv(g)
    dg1 = _vec(system.grad_gamma1(q))
    dg2 = _vec(system.grad_gamma2(q))
    if form == "velocity":
        geo = np.einsum("ijk,j,k->i", system.gamma(q), x, x)
        return RHS(x, -(geo - h * x), ginv @ dg1, ginv @ dg2)
    p_up = ginv @ x
    quad = 0.5 * np.einsum("ikl,k,l->i", system.dg(q), p_up, p_up)
    return RHS(p_up, quad - h * x, dg1, dg2)
