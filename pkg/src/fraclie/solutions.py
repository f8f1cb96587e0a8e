"""Closed-form solution families of the fractional system, and the
power-law solvability lemma that generates the explicit ones.

Every family is packaged as exact monomial-in-t structure: a sum of terms
``coeff(x) · t^e`` (optionally carrying a ``ln t`` factor) with the exact
rational exponent ``e`` kept as a :class:`~fractions.Fraction`.  That lets
residual checks run through the exact power rule wherever possible, and
tells the quadrature oracle the precise left-endpoint singularity exponent
where it is not (the ``ln t`` offset in ``family_5_5``'s second component).

Real powers of possibly-negative radicands follow the denominator-parity
rule: an exponent p/q in lowest terms with even q demands a positive base
(:class:`~fraclie.errors.NonrealRoot` otherwise), while odd q takes the
real q-th root and applies the sign of the numerator's parity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .catalog import ClassificationCase
from .errors import (
    DomainError,
    HypothesisViolated,
    NonMonotone,
    NonrealRoot,
    PoleError,
    QuadratureFailure,
    SingularParameter,
)
from .numeric_verify import GridSpec
from .symbolic_core import AlphaParameter, ExponentExpr, gamma_fraction

__all__ = [
    "FamilyTerm",
    "SolutionFamily",
    "Lemma2Solution",
    "ImplicitCurve",
    "lemma2_solve",
    "family_5_1",
    "family_19",
    "family_20_implicit",
    "family_21",
    "family_22",
    "family_5_4",
    "family_5_5",
    "sign_flip",
    "FAMILY_IDS",
    "DEFAULT_PARAMS",
    "build_family",
]


# ---------------------------------------------------------------------------
# Exact-parameter coercion and sign-aware real powers
# ---------------------------------------------------------------------------


def _fr(value, name: str) -> Fraction:
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a rational number, got {value!r}") from exc


def _alpha_param(alpha) -> AlphaParameter:
    if isinstance(alpha, AlphaParameter):
        a = alpha
    elif isinstance(alpha, str):
        a = AlphaParameter.parse(alpha)
    else:
        a = AlphaParameter(Fraction(alpha))
    if not (0 < a.value < 1):
        raise DomainError(f"the solution families require 0 < α < 1, got {a.value}")
    return a


def _real_power_root(base: float, exponent, what: str = "radicand") -> float:
    """base**exponent over the reals, with the parity rules documented in the
    module docstring.  ``exponent`` is reduced to lowest terms by Fraction."""
    exponent = Fraction(exponent)
    base = float(base)
    if exponent == 0:
        return 1.0
    if base > 0.0:
        return base ** float(exponent)
    if base == 0.0:
        if exponent > 0:
            return 0.0
        raise DomainError(f"{what} is zero and the exponent {exponent} is not positive")
    if exponent.denominator % 2 == 0:
        raise NonrealRoot(
            f"{what} = {base:.12g} is negative but the exponent {exponent} "
            f"has even root order {exponent.denominator}"
        )
    magnitude = (-base) ** float(exponent)
    sign = -1.0 if exponent.numerator % 2 else 1.0
    return sign * magnitude


def _gamma_or_singular(arg: Fraction, label: str) -> float:
    try:
        return gamma_fraction(arg)
    except PoleError as exc:
        raise SingularParameter(
            f"Gamma({label}) = Gamma({arg}) sits on a pole of the gamma function"
        ) from exc


# ---------------------------------------------------------------------------
# The power-law solvability lemma
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lemma2Solution:
    """Power-law pair φ(z) = c₁·z^{λ₁}, ψ(z) = c₂·z^{λ₂} solving

        D^α φ = a₁ ψ + a₂ z ψ′,      D^α ψ = φ^{2m} (b₁ φ + b₂ z φ′),

    with λ₁ = −α/m and λ₂ = −(m+1)α/m, both exact in α."""

    m: Fraction
    alpha: AlphaParameter
    a1: Fraction
    a2: Fraction
    b1: Fraction
    b2: Fraction
    lambda1: ExponentExpr
    lambda2: ExponentExpr
    c1: float
    c2: float
    gamma_ratio_1: float  # Γ(1−α/m) / Γ(1−(m+1)α/m)
    gamma_ratio_2: float  # Γ(1−(m+1)α/m) / Γ(1−(2m+1)α/m)
    radicand: float       # c₁^{2m}

    @property
    def lambda1_value(self) -> Fraction:
        return self.lambda1.evaluate(self.alpha.value)

    @property
    def lambda2_value(self) -> Fraction:
        return self.lambda2.evaluate(self.alpha.value)

    def phi(self, z: float) -> float:
        if z <= 0:
            raise DomainError(f"φ is defined for z > 0, got z = {z}")
        return self.c1 * z ** float(self.lambda1_value)

    def psi(self, z: float) -> float:
        if z <= 0:
            raise DomainError(f"ψ is defined for z > 0, got z = {z}")
        return self.c2 * z ** float(self.lambda2_value)

    def phi_fn(self) -> Callable[[float], float]:
        l1 = float(self.lambda1_value)
        c1 = self.c1
        fn = lambda z: c1 * z ** l1  # noqa: E731
        fn.dx = lambda z: c1 * l1 * z ** (l1 - 1.0)
        fn.monomial = (c1, self.lambda1_value)
        return fn

    def psi_fn(self) -> Callable[[float], float]:
        l2 = float(self.lambda2_value)
        c2 = self.c2
        fn = lambda z: c2 * z ** l2  # noqa: E731
        fn.dx = lambda z: c2 * l2 * z ** (l2 - 1.0)
        fn.monomial = (c2, self.lambda2_value)
        return fn

    def ode_residuals(self) -> Tuple[float, float]:
        """Coefficient residuals of the two equations, evaluated through the
        exact power rule.  Both sides of each equation carry the same exact
        power of z, so a zero coefficient residual is a pointwise identity."""
        a = self.alpha.value
        l1, l2 = self.lambda1_value, self.lambda2_value
        lhs1 = self.c1 * gamma_fraction(l1 + 1) / gamma_fraction(l1 + 1 - a)
        rhs1 = self.c2 * float(self.a1 + self.a2 * l2)
        lhs2 = self.c2 * gamma_fraction(l2 + 1) / gamma_fraction(l2 + 1 - a)
        rhs2 = _real_power_root(self.c1, 2 * self.m + 1, "c₁^(2m+1)") * float(
            self.b1 + self.b2 * l1
        )
        return (lhs1 - rhs1, lhs2 - rhs2)

    def to_dict(self) -> dict:
        return {
            "m": str(self.m),
            "alpha": str(self.alpha),
            "a1": str(self.a1),
            "a2": str(self.a2),
            "b1": str(self.b1),
            "b2": str(self.b2),
            "lambda1": str(self.lambda1),
            "lambda2": str(self.lambda2),
            "c1": self.c1,
            "c2": self.c2,
        }


def lemma2_solve(m, alpha, a1, a2, b1, b2) -> Lemma2Solution:
    """Solve the coupled power-law system for (c₁, c₂) with the exponents
    pinned to λ₁ = −α/m, λ₂ = −(m+1)α/m.

    Admissibility, checked in order:
      1. m < 0 or m > α/(1−α)              (keeps both exponents above −1);
      2. m ≠ α/(1−2α)                      (skipped at α = 1/2: no excluded m);
      3. m·a₁ − (m+1)·a₂·α ≠ 0  and  m·b₁ − b₂·α ≠ 0;
      4. none of 1−α/m, 1−(m+1)α/m, 1−(2m+1)α/m on a gamma pole;
      5. the 2m-th root of the c₁ radicand is real.
    """
    mf = _fr(m, "m")
    al = _alpha_param(alpha)
    a = al.value
    a1f, a2f = _fr(a1, "a1"), _fr(a2, "a2")
    b1f, b2f = _fr(b1, "b1"), _fr(b2, "b2")

    if mf == 0 or not (mf < 0 or mf > a / (1 - a)):
        raise HypothesisViolated(
            f"m must satisfy m < 0 or m > α/(1−α) = {a / (1 - a)}; got m = {mf}"
        )
    if a != Fraction(1, 2) and mf == a / (1 - 2 * a):
        raise HypothesisViolated(
            f"m = α/(1−2α) = {mf} is excluded (the two scaling symmetries merge)"
        )
    astar = mf * a1f - (mf + 1) * a2f * a
    if astar == 0:
        raise HypothesisViolated("m·a₁ − (m+1)·a₂·α must be nonzero")
    bstar = mf * b1f - b2f * a
    if bstar == 0:
        raise HypothesisViolated("m·b₁ − b₂·α must be nonzero")

    g0 = _gamma_or_singular(1 - a / mf, "1 − α/m")
    g1 = _gamma_or_singular(1 - (mf + 1) * a / mf, "1 − (m+1)α/m")
    g2 = _gamma_or_singular(1 - (2 * mf + 1) * a / mf, "1 − (2m+1)α/m")
    big_g1 = g0 / g1
    big_g2 = g1 / g2

    radicand = float(mf * mf) * big_g1 * big_g2 / (float(astar) * float(bstar))
    c1 = _real_power_root(radicand, Fraction(1, 1) / (2 * mf), "c₁^(2m)")
    c2 = float(mf) * c1 * big_g1 / float(astar)

    return Lemma2Solution(
        m=mf,
        alpha=al,
        a1=a1f,
        a2=a2f,
        b1=b1f,
        b2=b2f,
        lambda1=ExponentExpr.of(0, Fraction(-1, 1) / mf),
        lambda2=ExponentExpr.of(0, -(mf + 1) / mf),
        c1=c1,
        c2=c2,
        gamma_ratio_1=big_g1,
        gamma_ratio_2=big_g2,
        radicand=radicand,
    )


# ---------------------------------------------------------------------------
# Solution families: exact monomial-in-t structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyTerm:
    """One additive piece coeff(x)·t^e of a solution component, optionally
    carrying a ln t factor.  The x-closures are analytic (coefficient, first
    and second x-derivatives), so residual and invariance checks never need
    finite differences in x."""

    t_exponent: Fraction
    x_coefficient: Callable[[float], float]
    x_derivative: Callable[[float], float]
    x_second: Callable[[float], float]
    log_factor: bool = False

    def value(self, x: float, t: float) -> float:
        out = self.x_coefficient(x) * t ** float(self.t_exponent)
        if self.log_factor:
            out *= math.log(t)
        return out

    def x_slope(self, x: float, t: float) -> float:
        out = self.x_derivative(x) * t ** float(self.t_exponent)
        if self.log_factor:
            out *= math.log(t)
        return out

    def x_curvature(self, x: float, t: float) -> float:
        out = self.x_second(x) * t ** float(self.t_exponent)
        if self.log_factor:
            out *= math.log(t)
        return out

    def t_slope(self, x: float, t: float) -> float:
        e = float(self.t_exponent)
        if self.log_factor:
            return self.x_coefficient(x) * t ** (e - 1.0) * (e * math.log(t) + 1.0)
        return self.x_coefficient(x) * e * t ** (e - 1.0)


@dataclass(frozen=True)
class SolutionFamily:
    """A closed-form pair (u, v) solving D^α u = v_x, D^α v = s·b²(u)·u_x.

    ``rhs_sign`` is the constant s (a hook for sign-changed systems; the
    sign-flip transform instead composes b² with negation, which is the
    same thing only when b² is odd)."""

    id: str
    parameters: Mapping[str, object]
    alpha: AlphaParameter
    case: ClassificationCase
    u_terms: Tuple[FamilyTerm, ...]
    v_terms: Tuple[FamilyTerm, ...]
    b_squared: Callable[[float], float]
    b_squared_prime: Callable[[float], float]
    b_squared_text: str
    domain: Callable[[float, float], bool]
    rhs_sign: int = 1
    flux: Optional[Callable[[float, float], float]] = None
    flux_dx: Optional[Callable[[float, float], float]] = None
    generator_id: Optional[str] = None
    generator_params: Optional[Mapping[str, object]] = None
    reference_grid: Optional[GridSpec] = None
    flipped: bool = False
    notes: Tuple[str, ...] = ()

    # -- evaluation ---------------------------------------------------------

    def _check(self, x: float, t: float) -> None:
        if t <= 0:
            raise DomainError(f"family {self.id} requires t > 0, got t = {t}")
        if not self.domain(x, t):
            raise DomainError(f"({x}, {t}) lies outside the domain of family {self.id}")

    def u(self, x: float, t: float) -> float:
        self._check(x, t)
        return sum(term.value(x, t) for term in self.u_terms)

    def v(self, x: float, t: float) -> float:
        self._check(x, t)
        return sum(term.value(x, t) for term in self.v_terms)

    def du_dx(self, x: float, t: float) -> float:
        self._check(x, t)
        return sum(term.x_slope(x, t) for term in self.u_terms)

    def du_dxx(self, x: float, t: float) -> float:
        self._check(x, t)
        return sum(term.x_curvature(x, t) for term in self.u_terms)

    def du_dt(self, x: float, t: float) -> float:
        self._check(x, t)
        return sum(term.t_slope(x, t) for term in self.u_terms)

    def dv_dx(self, x: float, t: float) -> float:
        self._check(x, t)
        return sum(term.x_slope(x, t) for term in self.v_terms)

    def dv_dt(self, x: float, t: float) -> float:
        self._check(x, t)
        return sum(term.t_slope(x, t) for term in self.v_terms)

    def u_fn(self) -> Callable[[float, float], float]:
        fn = lambda x, t: self.u(x, t)  # noqa: E731
        fn.dx = lambda x, t: self.du_dx(x, t)
        fn.dt = lambda x, t: self.du_dt(x, t)
        return fn

    def v_fn(self) -> Callable[[float, float], float]:
        fn = lambda x, t: self.v(x, t)  # noqa: E731
        fn.dx = lambda x, t: self.dv_dx(x, t)
        fn.dt = lambda x, t: self.dv_dt(x, t)
        return fn

    # -- structure queries ---------------------------------------------------

    def has_monomial_u(self) -> bool:
        return all(not term.log_factor for term in self.u_terms)

    def has_monomial_v(self) -> bool:
        return all(not term.log_factor for term in self.v_terms)

    def singular_hint_u(self) -> float:
        if not self.u_terms:
            return 0.0
        return float(min(term.t_exponent for term in self.u_terms))

    def singular_hint_v(self) -> float:
        if not self.v_terms:
            return 0.0
        return float(min(term.t_exponent for term in self.v_terms))

    # -- right-hand side of the second equation ------------------------------

    def rhs2(self, x: float, t: float) -> float:
        """s·b²(u)·u_x at (x, t), honouring any closed-form override."""
        if self.flux is not None:
            return self.flux(x, t)
        return self.rhs_sign * self.b_squared(self.u(x, t)) * self.du_dx(x, t)

    def rhs2_dx(self, x: float, t: float) -> float:
        """∂/∂x of rhs2 — analytic via b²′, for the sequential-equation check."""
        if self.flux_dx is not None:
            return self.flux_dx(x, t)
        uval = self.u(x, t)
        ux = self.du_dx(x, t)
        uxx = self.du_dxx(x, t)
        return self.rhs_sign * (
            self.b_squared_prime(uval) * ux * ux + self.b_squared(uval) * uxx
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "parameters": {k: str(v) for k, v in self.parameters.items()},
            "alpha": str(self.alpha),
            "b_squared": self.b_squared_text,
            "rhs_sign": self.rhs_sign,
            "generator": self.generator_id,
            "flipped": self.flipped,
            "notes": list(self.notes),
        }


def _power_law_b2(k: Fraction, m: Fraction):
    """k²·w^{2m} and its derivative, sign-aware in w."""
    k2 = float(k) * float(k)
    two_m = 2 * m

    def b2(w: float) -> float:
        return k2 * _real_power_root(w, two_m, "u^(2m)")

    def b2_prime(w: float) -> float:
        return k2 * float(two_m) * _real_power_root(w, two_m - 1, "u^(2m−1)")

    return b2, b2_prime, f"k²·u^(2m) with k = {k}, m = {m}"


# ---------------------------------------------------------------------------
# family 5.1 — generic b(u): kernel modes plus one driven mode
# ---------------------------------------------------------------------------


def family_5_1(a, c1, c2, alpha) -> SolutionFamily:
    """u = C·t^(2α−1) + c₁·t^(α−1),  v = (c₂ + a·x)·t^(α−1), with the driven
    coefficient C computed from the power rule:  D^α(C·t^(2α−1)) = a·t^(α−1)
    forces C = a·Γ(α)/Γ(2α)."""
    al = _alpha_param(alpha)
    av = al.value
    af_ = _fr(a, "a")
    c1f, c2f = float(c1), float(c2)

    coefficient = float(af_) * gamma_fraction(av) / gamma_fraction(2 * av)
    printed = float(af_) / gamma_fraction(av)  # see note below

    u_terms = []
    if coefficient != 0.0:
        u_terms.append(
            FamilyTerm(2 * av - 1, lambda x, c=coefficient: c, lambda x: 0.0, lambda x: 0.0)
        )
    if c1f != 0.0:
        u_terms.append(
            FamilyTerm(av - 1, lambda x, c=c1f: c, lambda x: 0.0, lambda x: 0.0)
        )
    v_terms = (
        FamilyTerm(
            av - 1,
            lambda x, c=c2f, s=float(af_): c + s * x,
            lambda x, s=float(af_): s,
            lambda x: 0.0,
        ),
    )

    return SolutionFamily(
        id="5.1",
        parameters={"a": af_, "c1": c1f, "c2": c2f, "alpha": av,
                    "coefficient": coefficient, "printed_coefficient": printed},
        alpha=al,
        case=ClassificationCase.generic(),
        u_terms=tuple(u_terms),
        v_terms=v_terms,
        b_squared=lambda w: 1.0,
        b_squared_prime=lambda w: 0.0,
        b_squared_text="arbitrary (u_x ≡ 0, so b² never enters)",
        domain=lambda x, t: t > 0,
        generator_id="Case1-U1",
        generator_params={"a": af_},
        reference_grid=GridSpec(0.5, 2.0, 9, 0.5, 2.0, 9),
        notes=(
            "coefficient of t^(2α−1) is a·Γ(α)/Γ(2α), derived from the power "
            "rule; the widely reprinted a/Γ(α) does not satisfy D^α(u) = v_x "
            "and is echoed in parameters['printed_coefficient'] for comparison",
        ),
    )


# ---------------------------------------------------------------------------
# families 19 / 21 — explicit power-law pairs from the lemma
# ---------------------------------------------------------------------------


def _power_pair_coefficients(mf: Fraction, kf: Fraction, al: AlphaParameter):
    """Leading coefficients (A, B) of u = A·x^(1/m)·t^(−α/m),
    v = B·x^((m+1)/m)·t^(−(m+1)α/m), via the lemma applied to the reduced
    system D^αφ = ((m+1)/m)ψ, D^αψ = (k²/m)φ^(2m+1)."""
    if mf in (Fraction(-1), Fraction(-1, 2)):
        raise SingularParameter(
            f"m = {mf} makes the explicit coefficients singular "
            "(a factor (m+1)·(2m+1) vanishes)"
        )
    a = al.value
    if mf == 0 or not (mf < 0 or mf > a / (1 - a)):
        raise HypothesisViolated(
            f"m must satisfy m < 0 or m > α/(1−α) = {a / (1 - a)}; got m = {mf}"
        )
    # Scan the gamma arguments as they appear in the printed coefficients.
    # This fires on the excluded value m = α/(1−2α) too (there the third
    # argument is a nonpositive integer), so it must run before the lemma.
    for coefficient, label in ((Fraction(1), "−α/m"),
                               (mf + 1, "−(m+1)α/m"),
                               (2 * mf + 1, "−(2m+1)α/m")):
        _gamma_or_singular(-coefficient * a / mf, label)
    lemma = lemma2_solve(mf, al, (mf + 1) / mf, 0, kf * kf / mf, 0)
    return lemma.c1, lemma.c2, lemma


def _power_pair_family(fid: str, mf: Fraction, kf: Fraction, al: AlphaParameter,
                       shift: float, generator_id: str,
                       generator_params: Mapping[str, object],
                       extra_params: Mapping[str, object]) -> SolutionFamily:
    big_a, big_b, lemma = _power_pair_coefficients(mf, kf, al)
    e_u = lemma.lambda1_value      # −α/m
    e_v = lemma.lambda2_value      # −(m+1)α/m
    p_u = float(Fraction(1, 1) / mf)
    p_v = float((mf + 1) / mf)

    def u_coeff(x, A=big_a, p=p_u, s=shift):
        return A * (x - s) ** p

    def u_dx(x, A=big_a, p=p_u, s=shift):
        return A * p * (x - s) ** (p - 1.0)

    def u_dxx(x, A=big_a, p=p_u, s=shift):
        return A * p * (p - 1.0) * (x - s) ** (p - 2.0)

    def v_coeff(x, B=big_b, p=p_v, s=shift):
        return B * (x - s) ** p

    def v_dx(x, B=big_b, p=p_v, s=shift):
        return B * p * (x - s) ** (p - 1.0)

    def v_dxx(x, B=big_b, p=p_v, s=shift):
        return B * p * (p - 1.0) * (x - s) ** (p - 2.0)

    b2, b2p, b2_text = _power_law_b2(kf, mf)
    params = {"m": mf, "k": kf, "alpha": al.value, "A": big_a, "B": big_b}
    params.update(extra_params)

    return SolutionFamily(
        id=fid,
        parameters=params,
        alpha=al,
        case=ClassificationCase.power_law(kf, mf),
        u_terms=(FamilyTerm(e_u, u_coeff, u_dx, u_dxx),),
        v_terms=(FamilyTerm(e_v, v_coeff, v_dx, v_dxx),),
        b_squared=b2,
        b_squared_prime=b2p,
        b_squared_text=b2_text,
        domain=lambda x, t, s=shift: x > s and t > 0,
        generator_id=generator_id,
        generator_params=generator_params,
        reference_grid=GridSpec(shift + 1.0, shift + 2.0, 9, 0.5, 2.0, 9),
    )


def family_19(m, k, alpha) -> SolutionFamily:
    """u = A·x^(1/m)·t^(−α/m),  v = B·x^((m+1)/m)·t^(−(m+1)α/m)."""
    mf = _fr(m, "m")
    kf = _fr(k, "k")
    al = _alpha_param(alpha)
    return _power_pair_family("19", mf, kf, al, 0.0, "Case2.1-U4", {"a": 1}, {})


def family_21(m, k, alpha, c2) -> SolutionFamily:
    """family_19 with x replaced by x − c₂ (the integration constant of the
    implicit curve at c₁ = 0)."""
    mf = _fr(m, "m")
    kf = _fr(k, "k")
    al = _alpha_param(alpha)
    shift = float(c2)
    return _power_pair_family("21", mf, kf, al, shift, "Case2.1-U5", {},
                              {"c2": shift})


# ---------------------------------------------------------------------------
# family 22 — m = −1/2: tangent profile in x, exact monomials in t
# ---------------------------------------------------------------------------


def family_22(k, alpha, c1, c2) -> SolutionFamily:
    """m = −1/2 branch of the implicit curve integrated in closed form:

        u = c₁Γ(1+α)²/(2k²Γ(1+2α)) · t^(2α) · (tan²(W·(x−c₂)) + 1),
        v = √c₁ · t^α · tan(W·(x−c₂)),        W = √c₁·Γ(1+α)/(2k²).
    """
    kf = _fr(k, "k")
    al = _alpha_param(alpha)
    av = al.value
    c1f, c2f = float(c1), float(c2)
    if c1f <= 0:
        raise DomainError(f"family 22 requires c₁ > 0, got {c1f}")

    k2 = float(kf) * float(kf)
    g_a1 = gamma_fraction(1 + av)       # Γ(1+α)
    g_2a1 = gamma_fraction(1 + 2 * av)  # Γ(1+2α)
    root_c1 = math.sqrt(c1f)
    slope = root_c1 * g_a1 / (2.0 * k2)           # W
    prefactor = c1f * g_a1 * g_a1 / (2.0 * k2 * g_2a1)

    def _tan(x):
        arg = slope * (x - c2f)
        c = math.cos(arg)
        if abs(c) < 1e-10:
            raise DomainError(
                f"x = {x} is too close to a tangent pole of family 22"
            )
        return math.sin(arg) / c

    def u_coeff(x):
        tn = _tan(x)
        return prefactor * (tn * tn + 1.0)

    def u_dx(x):
        tn = _tan(x)
        sec2 = tn * tn + 1.0
        return prefactor * 2.0 * slope * sec2 * tn

    def u_dxx(x):
        tn = _tan(x)
        sec2 = tn * tn + 1.0
        return prefactor * 2.0 * slope * slope * sec2 * (sec2 + 2.0 * tn * tn)

    def v_coeff(x):
        return root_c1 * _tan(x)

    def v_dx(x):
        tn = _tan(x)
        return root_c1 * slope * (tn * tn + 1.0)

    def v_dxx(x):
        tn = _tan(x)
        return root_c1 * 2.0 * slope * slope * (tn * tn + 1.0) * tn

    m_half = Fraction(-1, 2)
    b2, b2p, b2_text = _power_law_b2(kf, m_half)

    def in_domain(x, t):
        return t > 0 and abs(math.cos(slope * (x - c2f))) > 1e-10

    half_branch = (math.pi / 2.0) / slope
    return SolutionFamily(
        id="22",
        parameters={"k": kf, "alpha": av, "c1": c1f, "c2": c2f,
                    "tan_slope": slope, "u_prefactor": prefactor},
        alpha=al,
        case=ClassificationCase.power_law(kf, m_half),
        u_terms=(FamilyTerm(2 * av, u_coeff, u_dx, u_dxx),),
        v_terms=(FamilyTerm(av, v_coeff, v_dx, v_dxx),),
        b_squared=b2,
        b_squared_prime=b2p,
        b_squared_text=b2_text,
        domain=in_domain,
        generator_id="Case2.1-U5",
        generator_params={},
        reference_grid=GridSpec(c2f + 0.05 * half_branch, c2f + 0.70 * half_branch,
                                9, 0.5, 2.0, 9),
    )


# ---------------------------------------------------------------------------
# families 5.4 / 5.5 — the degenerate branch m = α/(1−2α)
# ---------------------------------------------------------------------------


def _degenerate_m(av: Fraction) -> Fraction:
    if av == Fraction(1, 2):
        raise DomainError("the degenerate branch m = α/(1−2α) requires α ≠ 1/2")
    return av / (1 - 2 * av)


def family_5_4(a1, a2, c, alpha) -> SolutionFamily:
    """u = a₁·Γ(α)/Γ(2α)·t^(2α−1),  v = (a₂·c + a₁·x)·t^(α−1)."""
    al = _alpha_param(alpha)
    av = al.value
    mf = _degenerate_m(av)
    a1f, a2f = _fr(a1, "a1"), _fr(a2, "a2")
    if a1f not in (1, -1) or a2f not in (1, -1):
        raise DomainError(f"family 5.4 takes a₁, a₂ ∈ {{1, −1}}, got ({a1f}, {a2f})")
    cf = float(c)

    coefficient = float(a1f) * gamma_fraction(av) / gamma_fraction(2 * av)
    b2, b2p, b2_text = _power_law_b2(Fraction(1), mf)

    return SolutionFamily(
        id="5.4",
        parameters={"a1": a1f, "a2": a2f, "c": cf, "alpha": av, "m": mf,
                    "coefficient": coefficient},
        alpha=al,
        case=ClassificationCase.degenerate(Fraction(1), al),
        u_terms=(
            FamilyTerm(2 * av - 1, lambda x, co=coefficient: co,
                       lambda x: 0.0, lambda x: 0.0),
        ),
        v_terms=(
            FamilyTerm(
                av - 1,
                lambda x, c0=float(a2f) * cf, s=float(a1f): c0 + s * x,
                lambda x, s=float(a1f): s,
                lambda x: 0.0,
            ),
        ),
        b_squared=b2,
        b_squared_prime=b2p,
        b_squared_text=b2_text + " (scale-free here: u_x ≡ 0)",
        domain=lambda x, t: t > 0,
        # u is x-independent, so b²(u)·u_x vanishes identically even where
        # u < 0 would make the fractional power itself undefined.
        flux=lambda x, t: 0.0,
        flux_dx=lambda x, t: 0.0,
        generator_id="Case2.2-U2",
        generator_params={"a1": a1f, "a2": a2f},
        reference_grid=GridSpec(0.5, 2.0, 9, 0.5, 2.0, 9),
    )


def family_5_5(a, c1, c2, k, alpha) -> SolutionFamily:
    """With P(x) = c₁ + a·Γ(α+1)/(k²(2α−1))·x (required positive):

        u = P(x)^(1−2α) · t^(2α−1),
        v = [ k²(2α−1)Γ(2α)/(2a(1−α)Γ(α)Γ(α+1)) · P(x)^(2(1−α)) + c₂ ] · t^(α−1)
            − a·α · t^(α−1) · ln t.
    """
    al = _alpha_param(alpha)
    av = al.value
    mf = _degenerate_m(av)
    af_ = _fr(a, "a")
    if af_ not in (1, -1):
        raise DomainError(f"family 5.5 takes a ∈ {{1, −1}}, got {af_}")
    kf = _fr(k, "k")
    if kf == 0:
        raise DomainError("family 5.5 requires k ≠ 0")
    c1f, c2f = float(c1), float(c2)

    k2 = float(kf) * float(kf)
    g_a = gamma_fraction(av)          # Γ(α)
    g_a1 = gamma_fraction(av + 1)     # Γ(α+1)
    g_2a = gamma_fraction(2 * av)     # Γ(2α)
    two_am1 = float(2 * av - 1)
    base_slope = float(af_) * g_a1 / (k2 * two_am1)
    psi_prefactor = (k2 * two_am1 * g_2a) / (
        2.0 * float(af_) * float(1 - av) * g_a * g_a1
    )

    e_u = 1 - 2 * av       # exact Fraction exponent of P
    e_v = 2 * (1 - av)

    def base(x):
        b = c1f + base_slope * x
        if b <= 0:
            raise DomainError(
                f"family 5.5 needs a positive power base; "
                f"P({x}) = {b:.6g} ≤ 0"
            )
        return b

    fu, fv = float(e_u), float(e_v)

    def u_coeff(x):
        return base(x) ** fu

    def u_dx(x):
        return fu * base_slope * base(x) ** (fu - 1.0)

    def u_dxx(x):
        return fu * (fu - 1.0) * base_slope * base_slope * base(x) ** (fu - 2.0)

    def v_coeff(x):
        return psi_prefactor * base(x) ** fv + c2f

    def v_dx(x):
        return psi_prefactor * fv * base_slope * base(x) ** (fv - 1.0)

    def v_dxx(x):
        return psi_prefactor * fv * (fv - 1.0) * base_slope ** 2 * base(x) ** (fv - 2.0)

    log_coefficient = -float(af_) * float(av)
    b2, b2p, b2_text = _power_law_b2(kf, mf)

    def in_domain(x, t):
        return t > 0 and (c1f + base_slope * x) > 0

    # x-window where the power base stays positive, one unit wide, starting
    # a tenth past the sign change.
    crossing = -c1f / base_slope
    if base_slope < 0:
        x_lo, x_hi = crossing - 1.1, crossing - 0.1
    else:
        x_lo, x_hi = crossing + 0.1, crossing + 1.1

    return SolutionFamily(
        id="5.5",
        parameters={"a": af_, "c1": c1f, "c2": c2f, "k": kf, "alpha": av,
                    "m": mf, "base_slope": base_slope,
                    "psi_prefactor": psi_prefactor},
        alpha=al,
        case=ClassificationCase.degenerate(kf, al),
        u_terms=(FamilyTerm(2 * av - 1, u_coeff, u_dx, u_dxx),),
        v_terms=(
            FamilyTerm(av - 1, v_coeff, v_dx, v_dxx),
            FamilyTerm(av - 1, lambda x, c=log_coefficient: c,
                       lambda x: 0.0, lambda x: 0.0, log_factor=True),
        ),
        b_squared=b2,
        b_squared_prime=b2p,
        b_squared_text=b2_text,
        domain=in_domain,
        generator_id="Case2.2-U4",
        generator_params={"a": af_},
        reference_grid=GridSpec(x_lo, x_hi, 9, 0.5, 2.0, 9),
        notes=("v carries a t^(α−1)·ln t piece, so its fractional derivative "
               "has no exact monomial path; checks fall back to quadrature",),
    )


# ---------------------------------------------------------------------------
# family 20 — the implicit curve x(ψ), φ(ψ)
# ---------------------------------------------------------------------------


@dataclass
class ImplicitCurve:
    """Tabulated implicit solution x(ψ) = X·∫_{ψ₀}^{ψ} (θ²+c₁)^{−1/(2m+2)} dθ + c₂
    with the profile φ(ψ) = (F·(ψ²+c₁))^{1/(2m+2)}, plus a strictly monotone
    interpolant inverting x ↦ ψ.  The full solution is
    u = t^(−α/m)·φ(ψ(x)), v = t^(−(m+1)α/m)·ψ(x)."""

    m: Fraction
    k: Fraction
    alpha: AlphaParameter
    c1: float
    c2: float
    psi0: float
    x_coefficient: float     # X above
    phi_coefficient: float   # F above
    root_exponent: Fraction  # 1/(2m+2)
    psis: np.ndarray
    xs: np.ndarray

    def __post_init__(self) -> None:
        self.degenerate = bool(self.psis.size == 1)
        if self.degenerate:
            self._forward = None
            self._inverse = None
            return
        diffs = np.diff(self.xs)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise NonMonotone(
                "x(ψ) is not strictly monotone on the sampled range; "
                "the curve cannot be inverted"
            )
        psis, xs = self.psis, self.xs
        if diffs[0] < 0:
            psis, xs = psis[::-1], xs[::-1]
        self._forward = PchipInterpolator(self.psis, self.xs)
        self._inverse = PchipInterpolator(xs, psis)

    # -- curve evaluation -----------------------------------------------------

    def _integrand(self, theta: float) -> float:
        return _real_power_root(theta * theta + self.c1, -self.root_exponent,
                                "θ² + c₁")

    def x_of_psi(self, psi: float) -> float:
        if self.degenerate:
            return self.c2
        return float(self._forward(psi))

    def psi_of_x(self, x: float) -> float:
        if self.degenerate:
            if not math.isclose(x, self.c2, rel_tol=0.0, abs_tol=1e-12):
                raise DomainError(
                    f"the degenerate curve only passes through x = {self.c2}"
                )
            return self.psi0
        lo, hi = float(np.min(self.xs)), float(np.max(self.xs))
        if not (lo <= x <= hi):
            raise DomainError(f"x = {x} outside the tabulated range [{lo}, {hi}]")
        return float(self._inverse(x))

    def psi_of_x_prime(self, x: float) -> float:
        """dψ/dx = 1 / (X·integrand(ψ)) — exact, not interpolated."""
        psi = self.psi_of_x(x)
        return 1.0 / (self.x_coefficient * self._integrand(psi))

    def phi_of_psi(self, psi: float) -> float:
        return _real_power_root(self.phi_coefficient * (psi * psi + self.c1),
                                self.root_exponent, "F·(ψ² + c₁)")

    def phi_of_psi_prime(self, psi: float) -> float:
        re = self.root_exponent
        inner = self.phi_coefficient * (psi * psi + self.c1)
        return (float(re) * _real_power_root(inner, re - 1, "F·(ψ² + c₁)")
                * self.phi_coefficient * 2.0 * psi)

    def phi_of_x(self, x: float) -> float:
        return self.phi_of_psi(self.psi_of_x(x))

    def phi_of_x_prime(self, x: float) -> float:
        psi = self.psi_of_x(x)
        return self.phi_of_psi_prime(psi) / (self.x_coefficient * self._integrand(psi))

    # -- solution components ---------------------------------------------------

    def u(self, x: float, t: float) -> float:
        if t <= 0:
            raise DomainError(f"t must be positive, got {t}")
        return t ** float(-self.alpha.value / self.m) * self.phi_of_x(x)

    def v(self, x: float, t: float) -> float:
        if t <= 0:
            raise DomainError(f"t must be positive, got {t}")
        return (t ** float(-(self.m + 1) * self.alpha.value / self.m)
                * self.psi_of_x(x))

    def phi_fn(self) -> Callable[[float], float]:
        fn = lambda x: self.phi_of_x(x)  # noqa: E731
        fn.dx = lambda x: self.phi_of_x_prime(x)
        return fn

    def psi_fn(self) -> Callable[[float], float]:
        fn = lambda x: self.psi_of_x(x)  # noqa: E731
        fn.dx = lambda x: self.psi_of_x_prime(x)
        return fn

    def x_range(self) -> Tuple[float, float]:
        return float(np.min(self.xs)), float(np.max(self.xs))

    def to_dict(self) -> dict:
        return {
            "m": str(self.m),
            "k": str(self.k),
            "alpha": str(self.alpha),
            "c1": self.c1,
            "c2": self.c2,
            "psi0": self.psi0,
            "samples": int(self.psis.size),
            "x_range": list(self.x_range()) if not self.degenerate else [self.c2, self.c2],
        }


def family_20_implicit(m, k, alpha, c1, c2, psi0=0.0, psi_range=None,
                       samples: int = 257) -> ImplicitCurve:
    """Tabulate the implicit curve by adaptive quadrature of the x-integral
    and invert it with a monotone interpolant.

    A degenerate range (lo == hi == ψ₀) collapses to the single point
    x = c₂.  Quadrature trouble raises QuadratureFailure; a non-monotone
    table raises NonMonotone; negative even-order radicands raise
    NonrealRoot."""
    mf = _fr(m, "m")
    kf = _fr(k, "k")
    al = _alpha_param(alpha)
    a = al.value
    c1f, c2f, psi0f = float(c1), float(c2), float(psi0)

    if mf == Fraction(-1):
        raise SingularParameter("m = −1 makes the root order 2m+2 vanish")
    if mf == 0 or not (mf < 0 or mf > a / (1 - a)):
        raise HypothesisViolated(
            f"m must satisfy m < 0 or m > α/(1−α) = {a / (1 - a)}; got m = {mf}"
        )

    g0 = _gamma_or_singular(1 - a / mf, "1 − α/m")
    g1 = _gamma_or_singular(1 - (mf + 1) * a / mf, "1 − (m+1)α/m")
    g2 = _gamma_or_singular(1 - (2 * mf + 1) * a / mf, "1 − (2m+1)α/m")

    root_exponent = Fraction(1, 1) / (2 * mf + 2)
    k2 = float(kf) * float(kf)
    q_value = (k2 * _real_power_root(g1, 2 * mf, "Γ(1−(m+1)α/m)^(2m)") * g2
               / (float(mf + 1) * _real_power_root(g0, 2 * mf + 1,
                                                   "Γ(1−α/m)^(2m+1)")))
    x_coefficient = _real_power_root(q_value, root_exponent, "x-integral radicand")
    phi_coefficient = float(mf + 1) * g1 * g1 / (k2 * g0 * g2)

    if psi_range is None:
        psi_range = (psi0f, psi0f + 2.0)
    lo, hi = float(psi_range[0]), float(psi_range[1])
    if lo > hi:
        raise DomainError(f"ψ-range must be ordered, got ({lo}, {hi})")

    if lo == hi:
        if lo != psi0f:
            raise DomainError(
                "a degenerate ψ-range must sit at ψ₀ (the anchor of the integral)"
            )
        return ImplicitCurve(
            m=mf, k=kf, alpha=al, c1=c1f, c2=c2f, psi0=psi0f,
            x_coefficient=x_coefficient, phi_coefficient=phi_coefficient,
            root_exponent=root_exponent,
            psis=np.array([psi0f]), xs=np.array([c2f]),
        )

    if samples < 3:
        raise DomainError("at least 3 ψ-samples are required")

    def integrand(theta: float) -> float:
        return _real_power_root(theta * theta + c1f, -root_exponent, "θ² + c₁")

    def safe_quad(a_, b_) -> float:
        if a_ == b_:
            return 0.0
        interior = [0.0] if (c1f == 0.0 and a_ < 0.0 < b_) else None
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(integrand, a_, b_, points=interior,
                                          limit=200, epsabs=1e-13, epsrel=1e-12)
            except integrate.IntegrationWarning as exc:
                raise QuadratureFailure(
                    f"the x-integral over ({a_}, {b_}) did not converge: {exc}"
                ) from exc
        if abs(err) > 1e-9 * (1.0 + abs(val)):
            raise QuadratureFailure(
                f"the x-integral over ({a_}, {b_}) reports error {err:.3e}"
            )
        return val

    psis = np.linspace(lo, hi, samples)
    xs = np.empty_like(psis)
    xs[0] = x_coefficient * safe_quad(psi0f, float(psis[0])) + c2f
    for i in range(1, samples):
        xs[i] = xs[i - 1] + x_coefficient * safe_quad(float(psis[i - 1]),
                                                      float(psis[i]))

    return ImplicitCurve(
        m=mf, k=kf, alpha=al, c1=c1f, c2=c2f, psi0=psi0f,
        x_coefficient=x_coefficient, phi_coefficient=phi_coefficient,
        root_exponent=root_exponent, psis=psis, xs=xs,
    )


# ---------------------------------------------------------------------------
# sign flip — the (u, v) ↦ (−u, −v) companion solution
# ---------------------------------------------------------------------------


def sign_flip(family: SolutionFamily) -> SolutionFamily:
    """Return the family for (−u, −v).  The first equation is untouched;
    the second becomes D^α v = s·b²(−u)·u_x, i.e. the flipped family solves
    the system with b² composed with negation (for odd b², the sign-changed
    system — e.g. the transonic right-hand side −u·u_x)."""

    def flip_term(term: FamilyTerm) -> FamilyTerm:
        return FamilyTerm(
            term.t_exponent,
            lambda x, f=term.x_coefficient: -f(x),
            lambda x, f=term.x_derivative: -f(x),
            lambda x, f=term.x_second: -f(x),
            term.log_factor,
        )

    old_b2 = family.b_squared
    old_b2p = family.b_squared_prime
    old_flux = family.flux
    old_flux_dx = family.flux_dx
    return replace(
        family,
        u_terms=tuple(flip_term(t) for t in family.u_terms),
        v_terms=tuple(flip_term(t) for t in family.v_terms),
        b_squared=lambda w: old_b2(-w),
        b_squared_prime=lambda w: -old_b2p(-w),
        b_squared_text=f"({family.b_squared_text}) composed with u ↦ −u",
        flux=None if old_flux is None else (lambda x, t: -old_flux(x, t)),
        flux_dx=None if old_flux_dx is None else (lambda x, t: -old_flux_dx(x, t)),
        flipped=not family.flipped,
    )


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


FAMILY_IDS = ("5.1", "19", "20", "21", "22", "5.4", "5.5", "lemma2")

DEFAULT_PARAMS = {
    "5.1": {"a": 1, "c1": 1, "c2": 1, "alpha": Fraction(1, 2)},
    "19": {"m": 2, "k": 1, "alpha": Fraction(1, 3)},
    "20": {"m": 2, "k": 1, "alpha": Fraction(1, 3), "c1": 0.0, "c2": 0.0,
           "psi0": 0.0, "psi_range": (0.0, 3.0)},
    "21": {"m": Fraction(1, 2), "k": 1, "alpha": Fraction(1, 5), "c2": 1.0},
    "22": {"k": 1, "alpha": Fraction(1, 2), "c1": 1.0, "c2": 0.0},
    "5.4": {"a1": 1, "a2": 1, "c": 1, "alpha": Fraction(1, 3)},
    "5.5": {"a": 1, "c1": 5.0, "c2": 1.0, "k": 1, "alpha": Fraction(1, 3)},
    "lemma2": {"m": 2, "alpha": Fraction(1, 3), "a1": 3, "a2": 3, "b1": 1, "b2": 3},
}

_BUILDERS = {
    "5.1": family_5_1,
    "19": family_19,
    "20": family_20_implicit,
    "21": family_21,
    "22": family_22,
    "5.4": family_5_4,
    "5.5": family_5_5,
    "lemma2": lemma2_solve,
}


def build_family(family_id: str, **params):
    """Build a family by id string, filling unspecified parameters from
    DEFAULT_PARAMS.  Returns a SolutionFamily, ImplicitCurve ('20') or
    Lemma2Solution ('lemma2')."""
    if family_id not in _BUILDERS:
        raise DomainError(
            f"unknown family id {family_id!r}; valid ids: {', '.join(FAMILY_IDS)}"
        )
    merged = dict(DEFAULT_PARAMS[family_id])
    unknown = set(params) - set(merged)
    if unknown:
        raise DomainError(
            f"family {family_id} does not take parameters {sorted(unknown)}"
        )
    merged.update(params)
    return _BUILDERS[family_id](**merged)
