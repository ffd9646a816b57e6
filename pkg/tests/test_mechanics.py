import math

import numpy as np
import pytest

from fracdyn.errors import MetricError, NonFiniteError, SingularityError
from fracdyn.kernel import Constant, KernelSpec, SingularityPolicy
from fracdyn.mechanics import (
    HPState,
    MetricSystem,
    PotentialSystem,
    christoffel_fd,
    euclidean_metric,
    euler_mechanics,
    free_preset,
    hamiltonian_rhs,
    harmonic_preset,
    hp_rhs,
    metric_rhs,
    pendulum_preset,
    polar_metric,
)
from fracdyn.processes import GridSpec, sample_liu, sample_wiener

CLASSICAL = KernelSpec(Constant(1.0), 0.0, 0.8)
FRACTIONAL = KernelSpec(Constant(0.6), 0.0, 0.8)


def central(f, x, h=1e-6):
    x = np.atleast_1d(np.asarray(x, float))
    out = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out.append((f(x + e) - f(x - e)) / (2 * h))
    return np.array(out)


class TestHP:
    def test_free_particle(self):
        st = HPState([0.3], [1.5], [1.5])
        rhs = hp_rhs(free_preset(), st, 0.3, CLASSICAL)
        assert rhs.drift[0] == 0.0
        assert rhs.dq[0] == 1.5

    def test_constant_order_drift(self):
        sys_ = harmonic_preset()
        st = HPState([0.7], [0.2], [0.2])
        a, s, t = 0.6, 0.3, 0.8
        rhs = hp_rhs(sys_, st, s, KernelSpec(Constant(a), 0.0, t))
        assert rhs.drift[0] == pytest.approx(-0.7 - 0.2 * (a - 1) / (s - t), rel=1e-15)

    def test_pendulum_at_origin(self):
        sys_ = pendulum_preset(0.1, 0.3)
        rhs = hp_rhs(sys_, HPState([0.0], [0.0], [0.0]), 0.3, CLASSICAL)
        assert rhs.drift[0] == 0.0
        assert rhs.dW[0] == 0.1
        assert rhs.dL[0] == 0.0


class TestHamiltonian:
    def test_matches_hp_after_legendre(self, rng):
        sys_ = pendulum_preset(0.1, 0.3)
        for _ in range(200):
            q, p = rng.uniform(-4, 4, 2)
            s = rng.uniform(0, 2)
            if abs(s - 0.8) < 1e-3:
                continue
            a = hp_rhs(sys_, HPState([q], [p], [p]), s, FRACTIONAL)
            b = hamiltonian_rhs(sys_, [q], [p], s, FRACTIONAL)
            for f in ("dq", "drift", "dW", "dL"):
                assert np.max(np.abs(getattr(a, f) - getattr(b, f))) < 1e-14

    def test_harmonic_field(self):
        rhs = hamiltonian_rhs(harmonic_preset(), [0.4], [-1.1], 0.2, CLASSICAL)
        assert rhs.dq[0] == -1.1 and rhs.drift[0] == -0.4

    def test_h_term_isolation(self):
        rhs = hamiltonian_rhs(free_preset(), [0.0], [2.5], 0.4, FRACTIONAL)
        assert rhs.drift[0] == pytest.approx(-2.5, rel=1e-15)


class TestPresets:
    def test_pendulum_values(self):
        sys_ = pendulum_preset(0.1, 0.3)
        assert sys_.gradV([0.0])[0] == 0.0
        assert sys_.grad_gamma1([0.0])[0] == 0.1
        assert sys_.grad_gamma2([3.0])[0] == pytest.approx(0.9)

    @pytest.mark.parametrize("sys_", [pendulum_preset(0.1, 0.3), harmonic_preset(2, 1.3, 0.2, 0.4), free_preset(3)],
                             ids=lambda s: s.name)
    def test_gradients_match_finite_differences(self, sys_, rng):
        for _ in range(20):
            q = rng.uniform(-2, 2, sys_.dimension)
            for scalar, grad in ((sys_.V, sys_.gradV), (sys_.gamma1, sys_.grad_gamma1), (sys_.gamma2, sys_.grad_gamma2)):
                fd = central(scalar, q)
                an = np.atleast_1d(grad(q))
                assert np.allclose(fd, an, rtol=1e-6, atol=1e-8)


class TestMetric:
    def test_euclidean_free_motion(self):
        rhs = metric_rhs(euclidean_metric(3), [1, 2, 3], [0.5, -1, 2], 0.1, CLASSICAL)
        assert np.all(rhs.drift == 0) and np.all(rhs.dq == [0.5, -1, 2])

    def test_one_dimensional_momentum_form_is_free_particle(self):
        m = euclidean_metric(1)
        a = metric_rhs(m, [0.3], [1.7], 0.5, FRACTIONAL, form="momentum")
        b = hamiltonian_rhs(free_preset(), [0.3], [1.7], 0.5, FRACTIONAL)
        assert np.allclose(a.dq, b.dq) and np.allclose(a.drift, b.drift, rtol=1e-14)

    def test_polar_geodesic_drift(self):
        for analytic in (True, False):
            rhs = metric_rhs(polar_metric(analytic), [2.0, 0.3], [0.0, 1.0], 0.1, CLASSICAL)
            assert rhs.drift[0] == pytest.approx(2.0, rel=1e-8)
            assert rhs.drift[1] == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("metric", [polar_metric(), euclidean_metric(2)], ids=lambda m: m.name)
    def test_fd_christoffel_agrees(self, metric, rng):
        for _ in range(100):
            q = np.array([rng.uniform(0.5, 3.0), rng.uniform(-3, 3)])
            assert np.max(np.abs(christoffel_fd(metric, q) - metric.gamma(q))) < 1e-5

    def test_christoffel_symmetric(self):
        gam = christoffel_fd(polar_metric(), np.array([1.3, 0.2]))
        assert np.allclose(gam, gam.transpose(0, 2, 1))

    def test_momentum_form_consistent_with_velocity_form(self, rng):
        # classical kernel: d(g v)/ds from the velocity equation must equal the momentum drift
        m = polar_metric()
        for _ in range(20):
            q = np.array([rng.uniform(0.5, 3.0), rng.uniform(-3, 3)])
            v = rng.normal(size=2)
            g = m.g(q)
            p = g @ v
            vel = metric_rhs(m, q, v, 0.1, CLASSICAL, form="velocity")
            mom = metric_rhs(m, q, p, 0.1, CLASSICAL, form="momentum")
            dg_ds = np.einsum("lij,l->ij", m.dg(q), v)
            assert np.allclose(dg_ds @ v + g @ vel.drift, mom.drift, atol=1e-8)
            assert np.allclose(mom.dq, v)

    def test_noise_raised_in_velocity_form(self):
        m = MetricSystem(2, metric=lambda q: np.diag([2.0, 4.0]),
                         grad_gamma1=lambda q: np.array([1.0, 1.0]))
        rhs = metric_rhs(m, [0, 0], [0, 0], 0.1, CLASSICAL, form="velocity")
        assert np.allclose(rhs.dW, [0.5, 0.25])
        rhs = metric_rhs(m, [0, 0], [0, 0], 0.1, CLASSICAL, form="momentum")
        assert np.allclose(rhs.dW, [1.0, 1.0])

    def test_not_positive_definite(self):
        m = MetricSystem(2, metric=lambda q: np.diag([1.0, -1.0]))
        with pytest.raises(MetricError):
            metric_rhs(m, [0, 0], [1, 0], 0.1, CLASSICAL)


class TestEulerMechanics:
    def test_harmonic_oscillator(self):
        grid = GridSpec(0.0, 1.0, 2**16)
        traj = euler_mechanics(harmonic_preset(), ([1.0], [0.0]), grid, CLASSICAL)
        assert abs(traj.column("q")[-1] - math.cos(1.0)) < 1e-2
        # explicit Euler on the oscillator: energy grows by exactly (1 + K^2) per step
        energy = 0.5 * (traj.states[:, 0] ** 2 + traj.states[:, 1] ** 2)
        assert energy[-1] == pytest.approx(0.5 * (1 + grid.step**2) ** grid.N, rel=1e-10)

    def test_free_particle_conserves_momentum(self):
        grid = GridSpec(0.0, 2.0, 500)
        traj = euler_mechanics(free_preset(), ([0.0], [0.37]), grid, KernelSpec(Constant(1.0), 0.0, 5.0),
                               sample_wiener(grid, 1), sample_liu(grid, 2.0))
        assert np.all(traj.column("p") == 0.37)

    def test_paper_parameters_finite(self):
        grid = GridSpec(0.0, 1.5, 1000)
        traj = euler_mechanics(pendulum_preset(0.1, 0.3), ([1.0], [0.0]), grid, FRACTIONAL,
                               sample_wiener(grid, 13), sample_liu(grid, 15.0))
        assert traj.states.shape == (1001, 2)
        assert np.all(np.isfinite(traj.states))
        assert traj.to_csv().startswith("n,s,q,p\n")

    def test_wiener_channel_off(self):
        grid = GridSpec(0.0, 1.5, 1000)
        liu = sample_liu(grid, 15.0)
        runs = {euler_mechanics(pendulum_preset(0.0, 0.3), ([1.0], [0.0]), grid, FRACTIONAL,
                                sample_wiener(grid, seed), liu).states.tobytes() for seed in range(5)}
        assert len(runs) == 1

    def test_liu_channel_off(self):
        grid = GridSpec(0.0, 1.5, 1000)
        w = sample_wiener(grid, 3)
        runs = {euler_mechanics(pendulum_preset(0.1, 0.0), ([1.0], [0.0]), grid, FRACTIONAL,
                                w, sample_liu(grid, z)).states.tobytes() for z in (-3.0, 0.0, 15.0)}
        assert len(runs) == 1

    @pytest.mark.parametrize("scheme", ["proportional", "verbatim"])
    def test_pendulum_matches_hand_loop(self, scheme):
        grid = GridSpec(0.0, 1.5, 301)
        w, l = sample_wiener(grid, 21), sample_liu(grid, 15.0)
        traj = euler_mechanics(pendulum_preset(0.1, 0.3), ([1.0], [0.0]), grid, FRACTIONAL, w, l, scheme=scheme)
        q, p, K = 1.0, 0.0, grid.step
        for n in range(grid.N):
            s = n * K
            h = (0.6 - 1.0) / (s - 0.8)
            corr = h if scheme == "verbatim" else h * p
            q, p = (q + K * p,
                    p + K * (math.sin(q) - corr) + 0.1 * math.cos(q) * w.increments[n] + 0.3 * q * l.increments[n])
        assert traj.states[-1] == pytest.approx([q, p], rel=1e-11)

    def test_fast_path_matches_generic(self):
        grid = GridSpec(0.0, 1.5, 1000)
        w, l = sample_wiener(grid, 2), sample_liu(grid, 15.0)
        sys_ = pendulum_preset(0.1, 0.3)
        fast = euler_mechanics(sys_, ([1.0], [0.0]), grid, FRACTIONAL, w, l)
        slow = euler_mechanics(sys_, HPState([1.0], [0.0], [0.0]), grid, FRACTIONAL, w, l, equations="hp")
        np.testing.assert_allclose(fast.states, slow.states, rtol=1e-11)

    def test_metric_momentum_run(self):
        grid = GridSpec(0.0, 1.0, 200)
        traj = euler_mechanics(polar_metric(), ([1.0, 0.0], [0.0, 1.0]), grid, KernelSpec(Constant(1.0), 0.0, 5.0))
        assert traj.labels == ("q_1", "q_2", "p_1", "p_2")
        # angular momentum p_theta is conserved by the free polar flow
        assert np.allclose(traj.column("p_2"), 1.0)

    def test_non_finite(self):
        sys_ = PotentialSystem(1, V=lambda q: 0.0, gradV=lambda q: -np.exp(np.exp(np.asarray(q) * 10)))
        grid = GridSpec(0.0, 1.0, 100)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(NonFiniteError) as info:
                euler_mechanics(sys_, ([1.0], [0.0]), grid, KernelSpec(Constant(1.0), 0.0, 5.0))
        assert info.value.step >= 1

    def test_singular_grid(self):
        grid = GridSpec(0.0, 1.0, 10)
        with pytest.raises(SingularityError):
            euler_mechanics(pendulum_preset(0.1, 0.3), ([1.0], [0.0]), grid, FRACTIONAL)
        traj = euler_mechanics(pendulum_preset(0.1, 0.3), ([1.0], [0.0]), grid, FRACTIONAL,
                               policy=SingularityPolicy(1e-3, "clamp"))
        assert np.all(np.isfinite(traj.states))
