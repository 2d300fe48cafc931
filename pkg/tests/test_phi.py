import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phipart.errors import BadRange, NegativeRatio, NoSolution, RegularizationViolation
from phipart.phi import (
    CHI_SQUARED,
    FAMILIES,
    HELLINGER,
    KL,
    TOTAL_VARIATION,
    PhiFamily,
    _kl_k0_tabulated,
    check_regularization,
    get_family,
    inverse_k2,
    k12,
    k_triple,
    phi_eval,
)

BUILTINS = list(FAMILIES.values())


class TestPhiEval:
    def test_kl(self):
        assert phi_eval(KL, 1.0) == 0.0
        assert phi_eval(KL, 0.0) == 0.0
        assert phi_eval(KL, 2.0) == pytest.approx(2 * math.log(2))

    def test_hellinger(self):
        assert phi_eval(HELLINGER, 4.0) == pytest.approx(1.0)

    def test_zero_extension(self):
        assert phi_eval(TOTAL_VARIATION, 0.0) == 0.5
        assert phi_eval(HELLINGER, 0.0) == 1.0
        assert phi_eval(CHI_SQUARED, 0.0) == 1.0

    @pytest.mark.parametrize("fam", BUILTINS, ids=lambda f: f.name)
    def test_phi_of_one(self, fam):
        assert fam.phi_of_one == 0.0

    def test_negative(self):
        with pytest.raises(NegativeRatio):
            phi_eval(KL, -0.1)

    @pytest.mark.parametrize("fam", BUILTINS, ids=lambda f: f.name)
    def test_zero_extension_is_continuous(self, fam):
        assert phi_eval(fam, 1e-14) == pytest.approx(fam.phi_at_zero, abs=1e-6)


class TestKTriple:
    def test_kl_row(self):
        k = k_triple(KL, 0.01, 2.0)
        assert k.K0 == pytest.approx(2 * math.log(2))
        assert k.K1 == pytest.approx(math.log(100) + 1)
        assert k.K2 == pytest.approx(0.02 * math.log(100))
        assert k.K == k.K1

    def test_tv_k1(self):
        for eps, L in [(0.01, 0.5), (0.1, 1.0), (0.3, 0.9)]:
            assert k_triple(TOTAL_VARIATION, eps, L).K1 == 0.5

    def test_chi2_k2(self):
        assert k_triple(CHI_SQUARED, 0.1, 3.0).K2 == pytest.approx(0.2)

    def test_bad_range(self):
        with pytest.raises(BadRange):
            k_triple(KL, 2.0, 1.0)


class TestInverseK2:
    def test_tv(self):
        assert inverse_k2(TOTAL_VARIATION, 0.05) == pytest.approx(0.1, rel=1e-11)

    def test_chi2(self):
        assert inverse_k2(CHI_SQUARED, 0.2) == pytest.approx(0.1, rel=1e-11)

    def test_kl_against_forward_map(self):
        target = KL.k2(0.01)
        assert inverse_k2(KL, target) == pytest.approx(0.01, rel=1e-10)

    def test_hellinger(self):
        assert inverse_k2(HELLINGER, 1.0) == pytest.approx(0.25, rel=1e-11)

    def test_kl_clamped_to_inverse_e(self):
        assert inverse_k2(KL, 5.0) == pytest.approx(math.exp(-1))

    def test_no_solution(self):
        with pytest.raises(NoSolution):
            inverse_k2(TOTAL_VARIATION, 0.0)

    @pytest.mark.parametrize("fam", BUILTINS, ids=lambda f: f.name)
    @pytest.mark.parametrize("t", [1e-6, 1e-3, 0.05, 0.3])
    def test_right_inverse(self, fam, t):
        e = inverse_k2(fam, t)
        assert fam.k2(e) <= t
        if e < fam.eps_max:
            assert fam.k2(e * (1 + 1e-9)) > t

    def test_k12_composes_k1_with_inverse_k2(self):
        # Hellinger: k2(e) = 2 sqrt(e) = 0.1  =>  e = 0.0025
        assert k12(HELLINGER, 0.1, 3.0) == pytest.approx(HELLINGER.k1(0.0025, 3.0), rel=1e-9)


class TestRegularization:
    @pytest.mark.parametrize("fam", BUILTINS, ids=lambda f: f.name)
    def test_builtins_pass_grid(self, fam):
        assert check_regularization(fam, [1e-3, 0.01, 0.1, 0.3], [0.5, 1, 2, 5], grid=2000) == []

    def test_tabulated_kl_k0_misses_interior_maximum(self):
        # |L log L| < 1/e = max |s log s| on [0, 1]
        assert _kl_k0_tabulated(1.0) < math.exp(-1)
        assert KL.k0(1.0) == pytest.approx(math.exp(-1))
        assert KL.k0(2.0) == pytest.approx(_kl_k0_tabulated(2.0))

    def test_custom_registration_rejects_bad_k0(self):
        with pytest.raises(RegularizationViolation):
            PhiFamily.custom(
                "bad", lambda t: (t - 1.0) ** 2, k0=lambda L: 0.1, k1=CHI_SQUARED.k1, k2=CHI_SQUARED.k2
            )

    def test_custom_registration_accepts_valid(self):
        fam = PhiFamily.custom(
            "chi2copy", lambda t: (t - 1.0) ** 2, k0=CHI_SQUARED.k0, k1=CHI_SQUARED.k1, k2=CHI_SQUARED.k2
        )
        assert fam.phi_at_zero == pytest.approx(1.0)
        assert phi_eval(fam, 3.0) == 4.0

    def test_get_family(self):
        assert get_family("KL") is KL
        assert get_family("total_variation") is TOTAL_VARIATION
        with pytest.raises(BadRange):
            get_family("renyi")


@settings(max_examples=200, deadline=None)
@given(
    name=st.sampled_from(sorted(FAMILIES)),
    eps=st.floats(1e-3, 0.3),
    L=st.floats(0.5, 5.0),
    u=st.floats(0, 1),
    v=st.floats(0, 1),
)
def test_mixed_point_bound(name, eps, L, u, v):
    fam = FAMILIES[name]
    s1 = u * eps
    s2 = eps + v * (L - eps)
    lhs = abs(phi_eval(fam, s2) - phi_eval(fam, s1))
    assert lhs <= fam.k1(eps, L) * abs(s2 - s1) + 2 * fam.k2(eps) + 1e-12


@settings(max_examples=200, deadline=None)
@given(name=st.sampled_from(sorted(FAMILIES)), a=st.floats(0, 20), b=st.floats(0, 20), lam=st.floats(0, 1))
def test_convexity(name, a, b, lam):
    fam = FAMILIES[name]
    mix = phi_eval(fam, lam * a + (1 - lam) * b)
    assert mix <= lam * phi_eval(fam, a) + (1 - lam) * phi_eval(fam, b) + 1e-9 * (1 + a + b) ** 2


def test_derivatives_match_finite_differences():
    s = np.linspace(0.05, 5, 200)
    h = 1e-6
    for fam in BUILTINS:
        if fam is TOTAL_VARIATION:
            s_ = s[np.abs(s - 1) > 1e-3]
        else:
            s_ = s
        fd = (phi_eval(fam, s_ + h) - phi_eval(fam, s_ - h)) / (2 * h)
        np.testing.assert_allclose(fam.dphi(s_), fd, atol=1e-5)
