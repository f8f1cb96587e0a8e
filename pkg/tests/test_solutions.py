"""Solution families against 20-digit reference constants, parameter guards,
and the implicit-curve cross-checks.

Reference values were computed independently (mpmath, 50-digit working
precision) from the gamma-ratio closed forms and frozen here.
"""

import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fraclie import solutions
from fraclie.catalog import generators, invariance_surface_residual, optimal_system
from fraclie.errors import (
    DomainError,
    HypothesisViolated,
    NonMonotone,
    NonrealRoot,
    QuadratureFailure,
    SingularParameter,
)
from fraclie.numeric_verify import GridSpec
from fraclie.solutions import (
    DEFAULT_PARAMS,
    FAMILY_IDS,
    ImplicitCurve,
    Lemma2Solution,
    SolutionFamily,
    build_family,
    family_5_1,
    family_5_4,
    family_5_5,
    family_19,
    family_20_implicit,
    family_21,
    family_22,
    lemma2_solve,
    sign_flip,
)
from fraclie.symbolic_core import AlphaParameter, ExponentExpr

# -- frozen reference constants (20 digits) ---------------------------------

A_19 = 0.72110037658417837671          # m=2, k=1, α=1/3
B_19 = 0.30615512760618780514
A_19_NEG = 8.0                         # m=−1/3, k=1, α=1/2
B_19_NEG = -5.3173615527165480819      # = −3·√π
A_21 = 0.054063854861094044716         # m=1/2, k=1, α=1/5
B_21 = 0.012098840203906370955
SLOPE_22 = 0.44311346272637900682      # Γ(3/2)/2   (k=1, c₁=1, α=1/2)
PREFACTOR_22 = 0.39269908169872415481  # π/8
C_51_THIRD = 1.9783642596467901076     # Γ(1/3)/Γ(2/3)
PRINTED_51_THIRD = 0.37328217390739522833  # 1/Γ(1/3)
C_51_HALF = 1.7724538509055160273      # Γ(1/2)/Γ(1) = √π
PRINTED_51_HALF = 0.56418958354775628695   # 1/Γ(1/2)
SLOPE_55 = -2.6789385347077476337      # −3·Γ(4/3)  (a=1, k=1, α=1/3)
PREFACTOR_55 = -0.14151167009078992511

# (m, α, (a₁,a₂,b₁,b₂), c₁, c₂)
LEMMA_TUPLES = [
    (F(2), F(1, 3), (3, 3, 1, 3), 0.72110037658417837671, 0.30615512760618780514),
    (F(1), F(1, 4), (1, 1, 1, 1), 0.94937048621163327799, 1.3127274936234578522),
    (F(-2), F(1, 2), (1, 1, 1, 1), 1.3915788418568703011, 1.3724098985970879367),
    (F(3), F(1, 3), (1, 1, 1, 1), 0.90000390979003791023, 1.0907473689123309663),
    (F(-1, 3), F(1, 2), (1, 1, 1, 1), 6.0858061945018457051, 4.0450539844910401126),
]


def invariance_of(family) -> float:
    """Max invariance-surface residual of a family against its generating
    optimal-system element, analytic derivative path."""
    elements = {e.id: e for e in optimal_system(family.case, family.alpha)}
    element = elements[family.generator_id]
    params = dict(family.generator_params) if family.generator_params else None
    coords = element.element(element.coerce_params(params))
    field = generators(family.case, family.alpha).algebra().field_of(coords)
    report = invariance_surface_residual(
        field, family.u_fn(), family.v_fn(), family.reference_grid,
        alpha=family.alpha,
    )
    assert report.path == "analytic"
    return report.max_residual


# ---------------------------------------------------------------------------
# sign-checked real powers
# ---------------------------------------------------------------------------


class TestRealPowerRoot:
    def test_positive_base(self):
        assert solutions._real_power_root(8.0, F(2, 3)) == pytest.approx(4.0, rel=1e-15)

    def test_negative_base_odd_root(self):
        assert solutions._real_power_root(-8.0, F(1, 3)) == pytest.approx(-2.0, rel=1e-15)
        assert solutions._real_power_root(-8.0, F(2, 3)) == pytest.approx(4.0, rel=1e-15)
        assert solutions._real_power_root(-32.0, F(-3, 5)) == pytest.approx(-0.125, rel=1e-15)

    def test_negative_base_even_root(self):
        with pytest.raises(NonrealRoot):
            solutions._real_power_root(-2.0, F(1, 4))

    def test_zero_base(self):
        assert solutions._real_power_root(0.0, F(1, 2)) == 0.0
        with pytest.raises(DomainError):
            solutions._real_power_root(0.0, F(-1, 2))

    @given(
        base=st.floats(min_value=1e-3, max_value=1e3),
        num=st.integers(-9, 9).filter(lambda n: n != 0),
        den=st.integers(1, 9),
    )
    @settings(max_examples=40, deadline=None)
    def test_log_consistency_on_positive_bases(self, base, num, den):
        e = F(num, den)
        value = solutions._real_power_root(base, e)
        assert math.log(value) == pytest.approx(float(e) * math.log(base), abs=1e-9)


# ---------------------------------------------------------------------------
# the solvability lemma
# ---------------------------------------------------------------------------


class TestLemma2:
    @pytest.mark.parametrize("m, alpha, coeffs, c1, c2", LEMMA_TUPLES)
    def test_frozen_tuples(self, m, alpha, coeffs, c1, c2):
        sol = lemma2_solve(m, alpha, *coeffs)
        assert sol.c1 == pytest.approx(c1, rel=1e-13)
        assert sol.c2 == pytest.approx(c2, rel=1e-13)
        r1, r2 = sol.ode_residuals()
        assert abs(r1) <= 1e-10 and abs(r2) <= 1e-10

    def test_exact_exponents(self):
        sol = lemma2_solve(F(2), F(1, 3), 3, 3, 1, 3)
        assert sol.lambda1 == ExponentExpr.of(0, F(-1, 2))
        assert sol.lambda2 == ExponentExpr.of(0, F(-3, 2))
        assert sol.lambda1_value == F(-1, 6)
        assert sol.lambda2_value == F(-1, 2)
        assert sol.lambda1_value > -1 and sol.lambda2_value > -1

    def test_hypothesis_band_rejected(self):
        # 0 < m ≤ α/(1−α) keeps neither branch of the hypothesis.
        with pytest.raises(HypothesisViolated):
            lemma2_solve(F(1, 4), F(1, 2), 1, 1, 1, 1)
        with pytest.raises(HypothesisViolated):
            lemma2_solve(0, F(1, 2), 1, 1, 1, 1)

    def test_excluded_m_rejected(self):
        # m = α/(1−2α) merges the two scaling symmetries.
        with pytest.raises(HypothesisViolated):
            lemma2_solve(F(1), F(1, 3), 1, 1, 1, 1)

    def test_alpha_half_has_no_excluded_m(self):
        # α = 1/2 puts a zero in the denominator of α/(1−2α); the guard
        # treats that as "no excluded m" and every admissible m passes.
        sol = lemma2_solve(F(-1, 3), F(1, 2), 1, 1, 1, 1)
        assert sol.c1 == pytest.approx(6.0858061945018457051, rel=1e-13)

    def test_degenerate_coefficient_combinations(self):
        with pytest.raises(HypothesisViolated, match="a₁"):
            lemma2_solve(F(2), F(1, 3), 1, 2, 1, 1)  # m·a₁ = (m+1)·a₂·α
        with pytest.raises(HypothesisViolated, match="b₁"):
            lemma2_solve(F(2), F(1, 3), 3, 3, 1, 6)  # m·b₁ = b₂·α

    def test_nonreal_root(self):
        # A*·B* < 0 flips the radicand sign; 1/(2m) = 1/4 has even order.
        with pytest.raises(NonrealRoot):
            lemma2_solve(F(2), F(1, 3), 3, 3, -1, 0)

    def test_negative_radicand_with_odd_root_is_real(self):
        # At m=3/2, α=1/2 the Γ(1−(2m+1)α/m) head is Γ(−1/3) < 0, so the
        # radicand is negative; 2m = 3 in lowest terms gives a real cube root.
        sol = lemma2_solve(F(3, 2), F(1, 2), 1, 0, 1, 0)
        assert sol.c1 < 0
        r1, r2 = sol.ode_residuals()
        assert abs(r1) <= 1e-10 and abs(r2) <= 1e-10

    def test_evaluators(self):
        sol = lemma2_solve(F(2), F(1, 3), 3, 3, 1, 3)
        z = 2.0
        assert sol.phi(z) == pytest.approx(sol.c1 * z ** float(F(-1, 6)), rel=1e-15)
        assert sol.psi(z) == pytest.approx(sol.c2 * z ** float(F(-1, 2)), rel=1e-15)
        with pytest.raises(DomainError):
            sol.phi(0.0)
        fn = sol.phi_fn()
        h = 1e-6
        fd = (fn(z + h) - fn(z - h)) / (2 * h)
        assert fn.dx(z) == pytest.approx(fd, rel=1e-8)

    @given(
        m=st.sampled_from([F(-3), F(-2), F(-2, 5), F(-1, 3), F(2), F(3), F(5, 2)]),
        alpha=st.sampled_from([F(1, 4), F(1, 3), F(2, 5), F(1, 2)]),
        a1=st.integers(-3, 3),
        a2=st.integers(-3, 3),
        b1=st.integers(-3, 3),
        b2=st.integers(-3, 3),
    )
    @settings(max_examples=60, deadline=None)
    def test_property_zero_residual_when_admissible(self, m, alpha, a1, a2, b1, b2):
        assume(m < 0 or m > alpha / (1 - alpha))
        assume(alpha == F(1, 2) or m != alpha / (1 - 2 * alpha))
        assume(m * a1 - (m + 1) * a2 * alpha != 0)
        assume(m * b1 - b2 * alpha != 0)
        try:
            sol = lemma2_solve(m, alpha, a1, a2, b1, b2)
        except NonrealRoot:
            assume(False)
        r1, r2 = sol.ode_residuals()
        scale = 1.0 + abs(sol.c1) + abs(sol.c2)
        assert abs(r1) <= 1e-10 * scale and abs(r2) <= 1e-10 * scale
        assert sol.lambda1_value > -1 and sol.lambda2_value > -1


# ---------------------------------------------------------------------------
# family 5.1
# ---------------------------------------------------------------------------


class TestFamily51:
    def test_computed_coefficient(self):
        fam = family_5_1(1, 1, 1, F(1, 3))
        assert fam.parameters["coefficient"] == pytest.approx(C_51_THIRD, rel=1e-14)
        assert fam.parameters["printed_coefficient"] == pytest.approx(
            PRINTED_51_THIRD, rel=1e-14)
        fam_half = family_5_1(1, 1, 1, F(1, 2))
        assert fam_half.parameters["coefficient"] == pytest.approx(C_51_HALF, rel=1e-14)
        assert fam_half.parameters["printed_coefficient"] == pytest.approx(
            PRINTED_51_HALF, rel=1e-14)

    def test_values(self):
        fam = family_5_1(1, 2.0, 3.0, F(1, 2))
        x, t = 1.5, 4.0
        assert fam.u(x, t) == pytest.approx(C_51_HALF + 2.0 * t ** -0.5, rel=1e-14)
        assert fam.v(x, t) == pytest.approx((3.0 + x) * t ** -0.5, rel=1e-14)

    def test_kernel_only_when_a_zero(self):
        fam = family_5_1(0, 2.0, 3.0, F(1, 2))
        assert fam.parameters["coefficient"] == 0.0
        assert len(fam.u_terms) == 1
        assert fam.u(0.3, 2.0) == fam.u(-5.0, 2.0)  # x-independent

    def test_invariance_against_generator(self):
        assert invariance_of(family_5_1(1, 1, 1, F(1, 2))) <= 1e-12

    def test_zero_solution(self):
        fam = family_5_1(0, 0.0, 0.0, F(1, 2))
        assert fam.u(1.0, 1.0) == 0.0 and fam.v(1.0, 1.0) == 0.0


# ---------------------------------------------------------------------------
# families 19 and 21
# ---------------------------------------------------------------------------


class TestFamily19:
    def test_frozen_coefficients(self):
        fam = family_19(2, 1, F(1, 3))
        assert fam.parameters["A"] == pytest.approx(A_19, rel=1e-13)
        assert fam.parameters["B"] == pytest.approx(B_19, rel=1e-13)

    def test_polynomial_instance(self):
        # m=−1/3, α=1/2 gives u = 8·x⁻³·t^{3/2}, v = −3√π·x⁻²·t exactly.
        fam = family_19(F(-1, 3), 1, F(1, 2))
        assert fam.parameters["A"] == pytest.approx(A_19_NEG, rel=1e-13)
        assert fam.parameters["B"] == pytest.approx(-3.0 * math.sqrt(math.pi), rel=1e-13)
        x, t = 2.0, 1.5
        assert fam.u(x, t) == pytest.approx(8.0 * x ** -3 * t ** 1.5, rel=1e-13)
        assert fam.v(x, t) == pytest.approx(B_19_NEG * x ** -2 * t, rel=1e-13)

    def test_nonreal_root_at_half(self):
        # m=2, α=1/2 makes the radicand −1/3 with a fourth root.
        with pytest.raises(NonrealRoot):
            family_19(2, 1, F(1, 2))

    def test_gamma_pole_flagged(self):
        with pytest.raises(SingularParameter, match="Gamma"):
            family_19(1, 1, F(1, 3))

    def test_singular_m_values(self):
        with pytest.raises(SingularParameter):
            family_19(-1, 1, F(1, 3))
        with pytest.raises(SingularParameter):
            family_19(F(-1, 2), 1, F(1, 3))

    def test_hypothesis_band_rejected(self):
        with pytest.raises(HypothesisViolated):
            family_19(F(1, 4), 1, F(1, 2))

    def test_domain(self):
        fam = family_19(2, 1, F(1, 3))
        with pytest.raises(DomainError):
            fam.u(-1.0, 1.0)
        with pytest.raises(DomainError):
            fam.u(1.0, 0.0)

    def test_case_metadata(self):
        fam = family_19(2, 1, F(1, 3))
        assert fam.case.kind == "power-law"
        assert fam.case.m == F(2) and fam.case.k == F(1)

    def test_invariance_against_generator(self):
        assert invariance_of(family_19(2, 1, F(1, 3))) <= 1e-12


class TestFamily21:
    def test_frozen_reference(self):
        fam = family_21(F(1, 2), 1, F(1, 5), 1.0)
        assert fam.parameters["A"] == pytest.approx(A_21, rel=1e-13)
        assert fam.parameters["B"] == pytest.approx(B_21, rel=1e-13)

    def test_zero_shift_matches_family_19(self):
        base = family_19(2, 1, F(1, 3))
        shifted = family_21(2, 1, F(1, 3), 0.0)
        for x in (0.5, 1.0, 2.5):
            for t in (0.5, 1.0, 2.0):
                assert shifted.u(x, t) == pytest.approx(base.u(x, t), rel=1e-14)
                assert shifted.v(x, t) == pytest.approx(base.v(x, t), rel=1e-14)

    def test_shift_translates(self):
        base = family_19(F(1, 2), 1, F(1, 5))
        shifted = family_21(F(1, 2), 1, F(1, 5), 1.0)
        assert shifted.u(2.0, 1.0) == pytest.approx(base.u(1.0, 1.0), rel=1e-14)

    def test_half_alpha_parameters_violate_hypothesis(self):
        # m = 1/2 needs m > α/(1−α); at α = 1/2 that bound is 1.
        with pytest.raises(HypothesisViolated):
            family_21(F(1, 2), 1, F(1, 2), 0.0)

    def test_invariance_against_generator(self):
        assert invariance_of(family_21(F(1, 2), 1, F(1, 5), 1.0)) <= 1e-12


# ---------------------------------------------------------------------------
# family 22
# ---------------------------------------------------------------------------


class TestFamily22:
    def test_frozen_coefficients(self):
        fam = family_22(1, F(1, 2), 1.0, 0.0)
        assert fam.parameters["tan_slope"] == pytest.approx(SLOPE_22, rel=1e-14)
        assert fam.parameters["u_prefactor"] == pytest.approx(PREFACTOR_22, rel=1e-14)

    def test_values(self):
        fam = family_22(1, F(1, 2), 1.0, 0.0)
        x, t = 1.2, 2.0
        tn = math.tan(SLOPE_22 * x)
        assert fam.u(x, t) == pytest.approx(PREFACTOR_22 * t * (tn * tn + 1), rel=1e-13)
        assert fam.v(x, t) == pytest.approx(math.sqrt(t) * tn, rel=1e-13)

    def test_tangent_pole_guard(self):
        fam = family_22(1, F(1, 2), 1.0, 0.0)
        pole = (math.pi / 2.0) / SLOPE_22
        with pytest.raises(DomainError):
            fam.u(pole, 1.0)

    def test_vanishing_c1_limit(self):
        x, t = 0.7, 1.3
        for c1 in (1e-2, 1e-4, 1e-6):
            fam = family_22(1, F(1, 2), c1, 0.0)
            assert abs(fam.u(x, t)) <= 2.0 * c1
            assert abs(fam.v(x, t)) <= 2.0 * math.sqrt(c1)

    def test_nonpositive_c1_rejected(self):
        with pytest.raises(DomainError):
            family_22(1, F(1, 2), 0.0, 0.0)
        with pytest.raises(DomainError):
            family_22(1, F(1, 2), -1.0, 0.0)

    def test_invariance_against_generator(self):
        assert invariance_of(family_22(1, F(1, 2), 1.0, 0.0)) <= 1e-12


# ---------------------------------------------------------------------------
# families 5.4 and 5.5 (degenerate branch)
# ---------------------------------------------------------------------------


class TestFamily54:
    def test_values(self):
        fam = family_5_4(1, -1, 2.0, F(1, 3))
        x, t = 1.5, 2.0
        assert fam.u(x, t) == pytest.approx(C_51_THIRD * t ** (-1.0 / 3.0), rel=1e-13)
        assert fam.v(x, t) == pytest.approx((-2.0 + x) * t ** (-2.0 / 3.0), rel=1e-13)
        assert fam.parameters["m"] == F(1)  # α/(1−2α) at α = 1/3

    def test_alpha_half_rejected(self):
        with pytest.raises(DomainError):
            family_5_4(1, 1, 1.0, F(1, 2))

    def test_sign_parameters_validated(self):
        with pytest.raises(DomainError):
            family_5_4(2, 1, 1.0, F(1, 3))

    def test_flux_identically_zero(self):
        # u is x-independent, so b²(u)·u_x ≡ 0 even where u < 0 would make
        # the fractional power of b² undefined.
        fam = family_5_4(-1, 1, 1.0, F(1, 3))
        assert fam.u(1.0, 2.0) < 0
        assert fam.rhs2(1.0, 2.0) == 0.0
        assert fam.rhs2_dx(1.0, 2.0) == 0.0

    def test_invariance_against_generator(self):
        assert invariance_of(family_5_4(1, 1, 1.0, F(1, 3))) <= 1e-12


class TestFamily55:
    def test_frozen_coefficients(self):
        fam = family_5_5(1, 5.0, 1.0, 1, F(1, 3))
        assert fam.parameters["base_slope"] == pytest.approx(SLOPE_55, rel=1e-14)
        assert fam.parameters["psi_prefactor"] == pytest.approx(PREFACTOR_55, rel=1e-14)

    def test_monomial_structure(self):
        fam = family_5_5(1, 5.0, 1.0, 1, F(1, 3))
        assert fam.has_monomial_u()
        assert not fam.has_monomial_v()  # the t^{α−1}·ln t piece

    def test_value_at_unit_time(self):
        # At t = 1 the ln t piece vanishes and the powers of t are 1.
        fam = family_5_5(1, 5.0, 2.0, 1, F(1, 3))
        x = 1.0
        base = 5.0 + SLOPE_55 * x
        assert fam.u(x, 1.0) == pytest.approx(base ** (1.0 / 3.0), rel=1e-13)
        assert fam.v(x, 1.0) == pytest.approx(
            PREFACTOR_55 * base ** (4.0 / 3.0) + 2.0, rel=1e-13)

    def test_log_time_slope(self):
        fam = family_5_5(1, 5.0, 1.0, 1, F(1, 3))
        x, t = 1.0, 1.7
        h = 1e-6
        fd = (fam.v(x, t + h) - fam.v(x, t - h)) / (2 * h)
        assert fam.dv_dt(x, t) == pytest.approx(fd, rel=1e-8)

    def test_base_positivity(self):
        fam = family_5_5(1, 5.0, 1.0, 1, F(1, 3))
        bad_x = 3.0  # base = 5 − 3Γ(4/3)·3 < 0
        assert not fam.domain(bad_x, 1.0)
        with pytest.raises(DomainError):
            fam.u(bad_x, 1.0)

    def test_parameter_guards(self):
        with pytest.raises(DomainError):
            family_5_5(1, 5.0, 1.0, 1, F(1, 2))  # α = 1/2
        with pytest.raises(DomainError):
            family_5_5(0, 5.0, 1.0, 1, F(1, 3))  # a ∉ {1, −1}
        with pytest.raises(DomainError):
            family_5_5(1, 5.0, 1.0, 0, F(1, 3))  # k = 0

    def test_invariance_against_generator(self):
        assert invariance_of(family_5_5(1, 5.0, 1.0, 1, F(1, 3))) <= 1e-12


# ---------------------------------------------------------------------------
# family 20 — the implicit curve
# ---------------------------------------------------------------------------


class TestImplicitCurve:
    def test_zero_c1_matches_family_21(self):
        curve = family_20_implicit(2, 1, F(1, 3), 0.0, 0.0, psi_range=(0.0, 3.0))
        fam = family_21(2, 1, F(1, 3), 0.0)
        lo, hi = curve.x_range()
        a_coef, b_coef = fam.parameters["A"], fam.parameters["B"]
        for x in np.linspace(lo + 0.15 * (hi - lo), hi - 0.05 * (hi - lo), 11):
            assert curve.phi_of_x(x) == pytest.approx(a_coef * x ** 0.5, abs=1e-6)
            assert curve.psi_of_x(x) == pytest.approx(b_coef * x ** 1.5, abs=1e-6)

    def test_printed_cross_check_parameters_are_nonreal(self):
        # The quoted c₁=0 cross-check at m=2, α=1/2 hits a negative radicand
        # under an even root; the α=1/3 check above is the working variant.
        with pytest.raises(NonrealRoot):
            family_20_implicit(2, 1, F(1, 2), 0.0, 0.0, psi_range=(0.0, 3.0))

    def test_half_m_matches_family_22(self):
        curve = family_20_implicit(F(-1, 2), 1, F(1, 2), 1.0, 0.0,
                                   psi_range=(-2.0, 2.0))
        lo, hi = curve.x_range()
        for x in np.linspace(lo + 0.05, hi - 0.05, 11):
            assert curve.psi_of_x(x) == pytest.approx(math.tan(SLOPE_22 * x), abs=1e-6)
            assert curve.phi_of_x(x) == pytest.approx(
                PREFACTOR_22 * (math.tan(SLOPE_22 * x) ** 2 + 1), abs=1e-6)

    def test_solution_components(self):
        curve = family_20_implicit(F(-1, 2), 1, F(1, 2), 1.0, 0.0,
                                   psi_range=(-2.0, 2.0))
        x, t = 0.8, 2.0
        # u = t^{−α/m}·φ = t·φ and v = t^{−(m+1)α/m}·ψ = √t·ψ at m=−1/2, α=1/2
        assert curve.u(x, t) == pytest.approx(t * curve.phi_of_x(x), rel=1e-13)
        assert curve.v(x, t) == pytest.approx(math.sqrt(t) * curve.psi_of_x(x), rel=1e-13)

    def test_degenerate_range(self):
        curve = family_20_implicit(2, 1, F(1, 3), 0.5, 3.25, psi0=1.0,
                                   psi_range=(1.0, 1.0))
        assert curve.degenerate
        assert curve.x_of_psi(1.0) == 3.25
        assert curve.psi_of_x(3.25) == 1.0
        with pytest.raises(DomainError):
            curve.psi_of_x(2.0)

    def test_degenerate_range_must_anchor_at_psi0(self):
        with pytest.raises(DomainError):
            family_20_implicit(2, 1, F(1, 3), 0.5, 3.25, psi0=0.0,
                               psi_range=(1.0, 1.0))

    def test_decreasing_branch_inverts(self):
        # m=1/2, α=3/10 puts a negative gamma value in the x-coefficient
        # under an odd root, so x(ψ) decreases; inversion must still work.
        curve = family_20_implicit(F(1, 2), 1, F(3, 10), 1.0, 0.0,
                                   psi_range=(-1.0, 1.0))
        assert curve.x_coefficient < 0
        assert np.all(np.diff(curve.xs) < 0)
        for psi in (-0.6, 0.0, 0.7):
            assert curve.psi_of_x(curve.x_of_psi(psi)) == pytest.approx(psi, abs=1e-9)

    def test_divergent_integrand_reports_quadrature_failure(self):
        # c₁ = 0 with −1 < m < 0 makes the integrand θ^{−1/(m+1)} divergent.
        with pytest.raises(QuadratureFailure):
            family_20_implicit(F(-1, 3), 1, F(1, 2), 0.0, 0.0, psi_range=(0.0, 1.0))

    def test_non_monotone_table_rejected(self):
        with pytest.raises(NonMonotone):
            ImplicitCurve(
                m=F(2), k=F(1), alpha=AlphaParameter(F(1, 3)),
                c1=0.0, c2=0.0, psi0=0.0,
                x_coefficient=1.0, phi_coefficient=1.0, root_exponent=F(1, 6),
                psis=np.array([0.0, 1.0, 2.0]), xs=np.array([0.0, 1.0, 0.5]),
            )

    def test_unordered_range_rejected(self):
        with pytest.raises(DomainError):
            family_20_implicit(2, 1, F(1, 3), 0.0, 0.0, psi_range=(2.0, 1.0))

    def test_out_of_range_inversion_rejected(self):
        curve = family_20_implicit(2, 1, F(1, 3), 0.0, 0.0, psi_range=(0.0, 2.0))
        lo, hi = curve.x_range()
        with pytest.raises(DomainError):
            curve.psi_of_x(hi + 1.0)


# ---------------------------------------------------------------------------
# sign flip
# ---------------------------------------------------------------------------


class TestSignFlip:
    def test_flip_negates_components(self):
        fam = family_19(2, 1, F(1, 3))
        flipped = sign_flip(fam)
        assert flipped.flipped
        for x, t in ((1.2, 0.7), (1.9, 1.8)):
            assert flipped.u(x, t) == -fam.u(x, t)
            assert flipped.v(x, t) == -fam.v(x, t)

    def test_flip_negates_second_equation_rhs(self):
        fam = family_21(F(1, 2), 1, F(1, 5), 0.0)
        flipped = sign_flip(fam)
        x, t = 1.4, 1.1
        assert flipped.rhs2(x, t) == pytest.approx(-fam.rhs2(x, t), rel=1e-13)
        assert flipped.rhs2_dx(x, t) == pytest.approx(-fam.rhs2_dx(x, t), rel=1e-13)

    def test_double_flip_is_identity(self):
        fam = family_22(1, F(1, 2), 1.0, 0.0)
        twice = sign_flip(sign_flip(fam))
        assert not twice.flipped
        for x, t in ((0.5, 0.8), (1.8, 1.9)):
            assert twice.u(x, t) == fam.u(x, t)
            assert twice.v(x, t) == fam.v(x, t)
            assert twice.rhs2(x, t) == pytest.approx(fam.rhs2(x, t), rel=1e-13)

    def test_zero_solution_flips_to_itself(self):
        fam = sign_flip(family_5_1(0, 0.0, 0.0, F(1, 2)))
        assert fam.u(1.0, 1.0) == 0.0 and fam.v(1.0, 1.0) == 0.0

    def test_flipped_family_keeps_its_generator(self):
        assert invariance_of(sign_flip(family_19(2, 1, F(1, 3)))) <= 1e-12


# ---------------------------------------------------------------------------
# registry / addressability
# ---------------------------------------------------------------------------


class TestRegistry:
    def test_ids(self):
        assert FAMILY_IDS == ("5.1", "19", "20", "21", "22", "5.4", "5.5", "lemma2")

    @pytest.mark.parametrize("fid", FAMILY_IDS)
    def test_defaults_build(self, fid):
        built = build_family(fid)
        if fid == "20":
            assert isinstance(built, ImplicitCurve)
        elif fid == "lemma2":
            assert isinstance(built, Lemma2Solution)
        else:
            assert isinstance(built, SolutionFamily)
            assert built.id == fid

    def test_unknown_id(self):
        with pytest.raises(DomainError):
            build_family("23")

    def test_unknown_parameter(self):
        with pytest.raises(DomainError):
            build_family("19", q=3)

    def test_override_parameters(self):
        fam = build_family("19", m=F(-1, 3), alpha=F(1, 2))
        assert fam.parameters["A"] == pytest.approx(A_19_NEG, rel=1e-13)


# ---------------------------------------------------------------------------
# evaluator derivative attributes (analytic vs finite differences)
# ---------------------------------------------------------------------------


def _families_for_derivative_check():
    return [
        family_19(2, 1, F(1, 3)),
        family_22(1, F(1, 2), 1.0, 0.0),
        family_5_5(1, 5.0, 1.0, 1, F(1, 3)),
    ]


@pytest.mark.parametrize("family", _families_for_derivative_check(),
                         ids=lambda f: f.id)
def test_analytic_derivatives_match_finite_differences(family):
    grid = family.reference_grid
    x = 0.5 * (grid.x0 + grid.x1)
    t = 1.3
    h = 1e-6
    for fn in (family.u_fn(), family.v_fn()):
        fd_x = (fn(x + h, t) - fn(x - h, t)) / (2 * h)
        fd_t = (fn(x, t + h) - fn(x, t - h)) / (2 * h)
        assert fn.dx(x, t) == pytest.approx(fd_x, rel=1e-6, abs=1e-9)
        assert fn.dt(x, t) == pytest.approx(fd_t, rel=1e-6, abs=1e-9)


def test_second_x_derivative_matches_finite_differences():
    family = family_22(1, F(1, 2), 1.0, 0.0)
    x, t = 1.1, 1.0
    h = 1e-4
    fd = (family.du_dx(x + h, t) - family.du_dx(x - h, t)) / (2 * h)
    assert family.du_dxx(x, t) == pytest.approx(fd, rel=1e-6)
