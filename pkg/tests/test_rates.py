"""Closed-form rate calculator tests.

Every formula is cross-checked against the independent Fraction
implementations in reference.py, and the headline values are frozen as
exact rationals."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mipsim import (
    DeltaOutOfRange,
    DomainError,
    EmptyWindow,
    RateQuery,
    best_alpha,
    sobolev_rate_exponent,
    theoretical_rate,
    theoretical_rate_singular,
)

import reference

INF = math.inf


def rate(d, alpha, zeta=Fraction(1), r=INF):
    return theoretical_rate(RateQuery(d, alpha, zeta, r))


class TestStandardRate:
    def test_headline_value(self):
        rho, admissible = rate(2, Fraction(1, 6))
        assert rho == Fraction(1, 6)
        assert isinstance(rho, Fraction)
        assert admissible

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_best_alpha_sup_norm(self, d):
        got = best_alpha(d, 1, INF)
        assert got.alpha_star == Fraction(1, 2 * (d + 1))
        assert got.rho_star == Fraction(1, 2 * (d + 1))

    def test_matches_reference_formula(self):
        for d in (1, 2, 3):
            for r in (Fraction(1), Fraction(2), Fraction(7, 2), INF):
                for alpha in (Fraction(1, 10), Fraction(1, 4), Fraction(2, 3)):
                    for zeta in (Fraction(1, 2), Fraction(1)):
                        got = theoretical_rate(RateQuery(d, alpha, zeta, r))
                        want_rho, want_adm = reference.rho_standard(d, alpha, zeta, r)
                        assert got.rho == want_rho
                        assert got.admissible == want_adm

    def test_optimum_on_rational_grid(self):
        # d = 1, zeta = 1, r = inf: the balance point 1/4 lies on the
        # grid i/1000 and is the unique maximizer there
        star = best_alpha(1, 1, INF)
        assert star.alpha_star == Fraction(1, 4)
        for i in range(1, 1000):
            alpha = Fraction(i, 1000)
            rho, _ = rate(1, alpha)
            if alpha == star.alpha_star:
                assert rho == star.rho_star
            else:
                assert rho < star.rho_star

    def test_kappa_clips_at_zero(self):
        # r < 2 gives no integrability penalty: rate matches r = 2
        assert rate(2, Fraction(1, 8), r=Fraction(3, 2)) == rate(2, Fraction(1, 8), r=2)

    def test_inadmissible_above_window(self):
        rho, admissible = rate(2, Fraction(1, 2))  # window is (0, 1/4) at r = inf
        assert not admissible
        assert rho < 0

    def test_zero_alpha_inadmissible(self):
        rho, admissible = rate(2, 0)
        assert rho == 0
        assert not admissible

    def test_float_inputs_stay_float(self):
        rho, admissible = rate(2, 0.125)
        assert isinstance(rho, float)
        assert rho == pytest.approx(0.125)
        assert admissible


class TestSingularRate:
    def test_matches_reference_formula(self):
        for d in (2, 3):
            for alpha in (Fraction(1, 12), Fraction(1, 8), Fraction(1, 5)):
                q = RateQuery(d, alpha, Fraction(1), INF,
                              beta=Fraction(1, 2), r_tilde=Fraction(4 * d))
                got = theoretical_rate_singular(q)
                want_rho, want_adm = reference.rho_singular(
                    d, alpha, Fraction(1), Fraction(1, 2), Fraction(4 * d)
                )
                assert got.rho == want_rho
                assert got.admissible == want_adm

    def test_needs_beta_and_r_tilde(self):
        with pytest.raises(DomainError):
            theoretical_rate_singular(RateQuery(2, Fraction(1, 8), 1, INF))

    def test_best_alpha(self):
        got = best_alpha(2, 1, singular=True, beta=Fraction(1, 10), r_tilde=100)
        assert got.alpha_star == Fraction(1, 6)
        assert got.rho_star == Fraction(1, 6)
        assert got.alpha_star == reference.alpha_star_singular(2, Fraction(1))

    def test_empty_window(self):
        # low regularity pushes the balance point above the (small)
        # singular admissibility window
        with pytest.raises(EmptyWindow):
            best_alpha(2, Fraction(1, 10), singular=True,
                       beta=Fraction(9, 10), r_tilde=10)

    def test_window_narrower_than_standard(self):
        # same alpha, same d: the singular class admits strictly fewer
        # scalings because of the 2 beta + kappa_{r_tilde} penalty
        alpha = Fraction(2, 9)
        std = rate(2, alpha)
        sing = theoretical_rate_singular(
            RateQuery(2, alpha, 1, INF, beta=Fraction(1, 2), r_tilde=8)
        )
        assert std.admissible and not sing.admissible


class TestBestAlphaValidation:
    def test_standard_needs_r(self):
        with pytest.raises(DomainError):
            best_alpha(2, 1)

    def test_singular_needs_beta(self):
        with pytest.raises(DomainError):
            best_alpha(2, 1, singular=True)

    def test_bad_dimension(self):
        with pytest.raises(DomainError):
            best_alpha(0, 1, INF)

    def test_bad_zeta(self):
        with pytest.raises(DomainError):
            best_alpha(2, 0, INF)
        with pytest.raises(DomainError):
            best_alpha(2, 2, INF)


class TestSobolevExponent:
    def test_frozen_rational_value(self):
        got = sobolev_rate_exponent(Fraction(9, 10), 10, Fraction(1, 10), d=2)
        assert got.gamma == Fraction(89, 99)
        assert got.factor == Fraction(890, 891)
        assert got.holder is True

    def test_matches_reference_formula(self):
        for beta in (Fraction(1, 4), Fraction(3, 5)):
            for r_tilde in (Fraction(3), Fraction(12)):
                for delta in (Fraction(1, 10), Fraction(1, 2)):
                    got = sobolev_rate_exponent(beta, r_tilde, delta)
                    assert got.gamma == reference.gamma_sobolev(beta, r_tilde, delta)

    def test_factor_below_one(self):
        got = sobolev_rate_exponent(Fraction(1, 2), 5, Fraction(1, 4))
        assert 0 < got.factor < 1
        assert got.gamma == got.factor * Fraction(1, 2)

    def test_holder_flag_requires_dimension(self):
        got = sobolev_rate_exponent(Fraction(1, 2), 5, Fraction(1, 4))
        assert got.holder is None

    def test_holder_false_in_high_dimension(self):
        got = sobolev_rate_exponent(Fraction(1, 2), 5, Fraction(1, 4), d=4)
        assert got.holder is False

    def test_delta_out_of_range(self):
        for delta in (0, 1, Fraction(3, 2), -Fraction(1, 2)):
            with pytest.raises(DeltaOutOfRange):
                sobolev_rate_exponent(Fraction(1, 2), 5, delta)

    def test_r_tilde_must_exceed_one_plus_delta(self):
        with pytest.raises(DomainError):
            sobolev_rate_exponent(Fraction(1, 2), Fraction(5, 4), Fraction(1, 2))

    def test_infinite_r_tilde_rejected(self):
        with pytest.raises(DomainError):
            sobolev_rate_exponent(Fraction(1, 2), INF, Fraction(1, 4))


class TestRateQueryValidation:
    def test_bad_dimension(self):
        with pytest.raises(DomainError):
            RateQuery(0, Fraction(1, 4), 1, 2)

    def test_negative_alpha(self):
        with pytest.raises(DomainError):
            RateQuery(2, -Fraction(1, 4), 1, 2)

    def test_infinite_alpha(self):
        with pytest.raises(DomainError):
            RateQuery(2, INF, 1, 2)

    def test_zeta_out_of_range(self):
        for zeta in (0, Fraction(3, 2)):
            with pytest.raises(DomainError):
                RateQuery(2, Fraction(1, 4), zeta, 2)

    def test_r_below_one(self):
        with pytest.raises(DomainError):
            RateQuery(2, Fraction(1, 4), 1, Fraction(1, 2))

    def test_r_tilde_must_exceed_d(self):
        with pytest.raises(DomainError):
            RateQuery(2, Fraction(1, 4), 1, 2, beta=Fraction(1, 2), r_tilde=2)

    def test_beta_out_of_range(self):
        with pytest.raises(DomainError):
            RateQuery(2, Fraction(1, 4), 1, 2, beta=Fraction(3, 2), r_tilde=8)

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            RateQuery(2, math.nan, 1, 2)


alphas = st.fractions(min_value=0, max_value=2, max_denominator=64)
zetas = st.fractions(min_value=Fraction(1, 64), max_value=1, max_denominator=64)
rs = st.one_of(st.just(INF), st.fractions(min_value=1, max_value=64, max_denominator=8))
dims = st.integers(min_value=1, max_value=4)


class TestRateProperties:
    @settings(max_examples=200, deadline=None)
    @given(d=dims, alpha=alphas, zeta=zetas, r=rs)
    def test_rho_is_min_of_branches(self, d, alpha, zeta, r):
        rho, _ = theoretical_rate(RateQuery(d, alpha, zeta, r))
        kappa = reference.kappa(d, r)
        assert rho <= alpha * zeta
        assert rho <= Fraction(1, 2) * (1 - alpha * (d + kappa))
        assert rho == min(alpha * zeta, Fraction(1, 2) * (1 - alpha * (d + kappa)))

    @settings(max_examples=200, deadline=None)
    @given(d=dims, alpha=alphas, zeta=zetas, r=rs)
    def test_admissible_iff_positive_rate(self, d, alpha, zeta, r):
        rho, admissible = theoretical_rate(RateQuery(d, alpha, zeta, r))
        assert admissible == (rho > 0)

    @settings(max_examples=200, deadline=None)
    @given(d=dims, alpha=alphas, zeta=zetas, r=rs)
    def test_exact_in_exact_out(self, d, alpha, zeta, r):
        rho, _ = theoretical_rate(RateQuery(d, alpha, zeta, r))
        assert isinstance(rho, Fraction)

    @settings(max_examples=100, deadline=None)
    @given(d=dims, alpha=alphas, zeta=zetas, r=rs)
    def test_best_alpha_dominates(self, d, alpha, zeta, r):
        star = best_alpha(d, zeta, r)
        rho, _ = theoretical_rate(RateQuery(d, alpha, zeta, r))
        assert rho <= star.rho_star

    @settings(max_examples=100, deadline=None)
    @given(d=dims, alpha=alphas, zeta=zetas,
           beta=st.fractions(min_value=Fraction(1, 32), max_value=Fraction(31, 32), max_denominator=32))
    def test_singular_rate_never_beats_standard_envelope(self, d, alpha, zeta, beta):
        # rho_tilde = min(alpha zeta, 1/2 - alpha d) <= min(alpha zeta,
        # (1 - alpha d)/2) = standard rho at r = 2 (kappa = 0)
        q = RateQuery(d, alpha, zeta, INF, beta=beta, r_tilde=4 * d + 1)
        sing, _ = theoretical_rate_singular(q)
        std, _ = theoretical_rate(RateQuery(d, alpha, zeta, 2))
        assert sing <= std
