import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracdyn.errors import ConfigError, DomainError, SingularityError
from fracdyn.kernel import (
    Affine,
    Constant,
    KernelSpec,
    Logistic,
    SingularityPolicy,
    alpha_from_dict,
    h_correction,
    h_values,
    kernel_value,
    kernel_values,
    validate_grid,
)
from fracdyn.processes import GridSpec


def mp_log_kernel(alpha, rho, t, s):
    """Independent ln g in mpmath arithmetic at the caller's precision."""
    s, t = mpmath.mpf(s), mpmath.mpf(t)
    z = s - t
    a = mpmath.mpf(alpha.a) if isinstance(alpha, Constant) else None
    if isinstance(alpha, Affine):
        a = alpha.a0 + alpha.a1 * z
    elif isinstance(alpha, Logistic):
        a = alpha.lo + (alpha.hi - alpha.lo) / (1 + mpmath.exp(-(z - alpha.center) / alpha.width))
    return (a - 1) * mpmath.log(abs(t - s)) - rho * z - mpmath.loggamma(a)


def mp_dlog_kernel(alpha, rho, t, s):
    with mpmath.workdps(40):
        return float(mpmath.diff(lambda x: mp_log_kernel(alpha, rho, t, x), s))


ALPHAS = [Constant(0.5), Constant(1.0), Affine(0.6, 0.1), Logistic(0.3, 0.95, -0.2, 0.5)]


class TestAlphaFunction:
    @pytest.mark.parametrize("alpha", ALPHAS, ids=repr)
    def test_derivative_matches_finite_difference(self, alpha):
        for z in np.linspace(-1.0, 1.0, 41):
            fd = (alpha.value(z + 1e-6) - alpha.value(z - 1e-6)) / 2e-6
            assert abs(fd - alpha.derivative(z)) < 1e-6

    @pytest.mark.parametrize("alpha", ALPHAS, ids=repr)
    def test_round_trip(self, alpha):
        assert alpha_from_dict(alpha.to_dict()) == alpha

    def test_unknown_family(self):
        with pytest.raises(ConfigError, match="family"):
            alpha_from_dict({"family": "spline"})

    def test_logistic_width_positive(self):
        with pytest.raises(DomainError):
            Logistic(0.1, 0.9, 0.0, 0.0)


class TestKernelValue:
    def test_classical_is_one(self):
        spec = KernelSpec(Constant(1.0), 0.0, 0.8)
        assert kernel_value(spec, 0.3) == 1.0

    def test_constant_half(self):
        spec = KernelSpec(Constant(0.5), 0.0, 1.0)
        # (0.25)^(-1/2) / Gamma(1/2) = 2/sqrt(pi), 40-digit mpmath value
        assert kernel_value(spec, 0.75) == pytest.approx(1.1283791670955126, rel=1e-14)

    def test_singular_point_raises(self):
        spec = KernelSpec(Constant(0.6), 0.0, 0.8)
        with pytest.raises(SingularityError):
            kernel_value(spec, 0.8 - 1e-10)

    def test_clamp_substitutes_epsilon(self):
        spec = KernelSpec(Constant(0.6), 0.0, 0.8)
        policy = SingularityPolicy(1e-8, "clamp")
        expected = (1e-8) ** (-0.4) / math.gamma(0.6)
        assert kernel_value(spec, 0.8, policy) == pytest.approx(expected, rel=1e-13)

    def test_order_out_of_range(self):
        spec = KernelSpec(Affine(0.6, 1.0), 0.0, 0.0)
        with pytest.raises(DomainError):
            kernel_value(spec, 0.5)  # alpha = 1.1
        with pytest.raises(DomainError):
            kernel_value(spec, -0.7)  # alpha = -0.1

    def test_spec_invariants(self):
        with pytest.raises(DomainError):
            KernelSpec(Constant(0.5), -0.1, 0.0)
        with pytest.raises(DomainError):
            KernelSpec(Constant(0.5), 0.0, float("inf"))
        with pytest.raises(DomainError):
            SingularityPolicy(0.0)

    @pytest.mark.parametrize("alpha", ALPHAS, ids=repr)
    def test_matches_mpmath(self, alpha):
        for rho in (0.0, 0.2):
            spec = KernelSpec(alpha, rho, 0.8)
            for s in (-0.5, 0.1, 0.79, 0.81, 1.3):
                with mpmath.workdps(40):
                    ref = float(mpmath.exp(mp_log_kernel(alpha, rho, 0.8, s)))
                assert kernel_value(spec, s) == pytest.approx(ref, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(
        st.sampled_from([Constant(0.3), Constant(0.9), Affine(0.6, 0.05)]),
        st.floats(0.0, 1.0),
        st.floats(-2.0, 2.0),
        st.floats(0.01, 2.0),
        st.floats(-3.0, 3.0),
    )
    def test_positive_and_shift_invariant(self, alpha, rho, t, gap, shift):
        s = t - gap
        a = kernel_value(KernelSpec(alpha, rho, t), s)
        b = kernel_value(KernelSpec(alpha, rho, t + shift), s + shift)
        assert a > 0
        # floating-point shifts perturb s - t by a few ulps of |t|; scale accordingly
        tol = 1e-14 + 1e-15 * (abs(t) + abs(shift) + 1.0) / gap * abs(a)
        assert abs(a - b) <= max(tol, 1e-14 * abs(a))


class TestHCorrection:
    def test_classical_zero(self):
        assert h_correction(KernelSpec(Constant(1.0), 0.0, 0.8), 0.3) == 0.0

    @pytest.mark.parametrize("a", [0.2, 0.6, 0.95])
    @pytest.mark.parametrize("convention", ["paper", "log_derivative"])
    def test_constant_order_reduction(self, a, convention):
        spec = KernelSpec(Constant(a), 0.0, 0.8, convention)
        for s in (0.1, 0.4, 0.79, 1.2):
            assert h_correction(spec, s) == (a - 1.0) / (s - 0.8)

    def test_affine_log_derivative_matches_mpmath_derivative(self):
        alpha = Affine(0.6, 0.1)
        spec = KernelSpec(alpha, 0.2, 0.8, "log_derivative")
        ref = mp_dlog_kernel(alpha, 0.2, 0.8, 0.5)
        assert h_correction(spec, 0.5) == pytest.approx(ref, abs=1e-12)

    def test_paper_convention_flips_rho(self):
        alpha = Affine(0.6, 0.1)
        paper = h_correction(KernelSpec(alpha, 0.2, 0.8, "paper"), 0.5)
        logd = h_correction(KernelSpec(alpha, 0.2, 0.8, "log_derivative"), 0.5)
        assert paper - logd == pytest.approx(0.4, abs=1e-14)

    @pytest.mark.parametrize("alpha", ALPHAS, ids=repr)
    def test_log_derivative_finite_difference(self, alpha):
        spec = KernelSpec(alpha, 0.3, 0.8, "log_derivative")
        s = np.array([-0.4, 0.2, 0.75, 0.85, 1.5])
        lg = lambda x: np.log(kernel_values(spec, x))
        fd = (lg(s + 1e-6) - lg(s - 1e-6)) / 2e-6
        assert np.max(np.abs(h_values(spec, s) - fd)) < 1e-5


class TestValidateGrid:
    def test_t_hit(self):
        assert validate_grid(KernelSpec(Constant(0.5), 0.0, 0.5), np.array([0, 0.25, 0.5, 0.75, 1.0])) == [2]

    def test_t_outside(self):
        assert validate_grid(KernelSpec(Constant(0.5), 0.0, 10.0), GridSpec(0.0, 1.0, 10)) == []

    def test_tenth_grid(self):
        spec = KernelSpec(Constant(0.6), 0.0, 0.8)
        grid = GridSpec(0.0, 1.0, 10)
        expected = [8] if abs(grid.nodes[8] - 0.8) < 1e-8 else []
        assert validate_grid(spec, grid) == expected == [8]
