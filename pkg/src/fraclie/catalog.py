"""The executable catalog: classification cases, symmetry generators, kernel
solutions, adapted bases, one-dimensional optimal systems, similarity
reductions, and the invariance-surface check.

Everything here is data transcribed into closures and exact coordinates; the
verification logic lives in :mod:`fraclie.numeric_verify` and the solution
families in :mod:`fraclie.solutions`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import (
    DegenerateDenominator,
    DomainError,
    InvalidCase,
    Unsupported,
)
from .lie_engine import (
    AlgebraElement,
    LieAlgebra,
    VectorField,
    structure_constants,
)
from .numeric_verify import GridSpec, ResidualReport, residual_report_from_samples
from .symbolic_core import (
    AlphaParameter,
    ExponentExpr,
    MonomialSum,
    ScalarExpr,
    evaluate as ms_evaluate,
)

GENERIC = "generic"
POWER_LAW = "power-law"
REGULAR = "regular"
DEGENERATE = "degenerate"


def _fr(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Classification cases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassificationCase:
    """b(u) arbitrary (generic) or b(u) = k·u^m (power law), the latter split
    into the regular branch Δ = 2mα+α−m ≠ 0 and the degenerate branch
    m = α/(1−2α) (which forces α ≠ 1/2)."""

    kind: str
    k: Optional[Fraction] = None
    m: Optional[Fraction] = None
    subcase: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in (GENERIC, POWER_LAW):
            raise InvalidCase(f"unknown case kind {self.kind!r}")
        if self.kind == GENERIC:
            if self.k is not None or self.m is not None or self.subcase is not None:
                raise InvalidCase("generic case carries no power-law data")
            return
        if self.k is None or self.m is None:
            raise InvalidCase("power-law case requires both k and m")
        object.__setattr__(self, "k", _fr(self.k))
        object.__setattr__(self, "m", _fr(self.m))
        if self.k == 0 or self.m == 0:
            raise InvalidCase("power law b(u) = k·u^m requires k ≠ 0 and m ≠ 0")
        if self.subcase not in (REGULAR, DEGENERATE):
            raise InvalidCase(f"power-law subcase must be regular or degenerate, got {self.subcase!r}")

    @classmethod
    def generic(cls) -> "ClassificationCase":
        return cls(kind=GENERIC)

    @classmethod
    def power_law(cls, k, m, subcase: str = REGULAR) -> "ClassificationCase":
        return cls(kind=POWER_LAW, k=_fr(k), m=_fr(m), subcase=subcase)

    @classmethod
    def degenerate(cls, k, alpha: AlphaParameter) -> "ClassificationCase":
        a = alpha.value
        if a == Fraction(1, 2):
            raise InvalidCase("degenerate branch m = α/(1−2α) requires α ≠ 1/2")
        return cls(kind=POWER_LAW, k=_fr(k), m=a / (1 - 2 * a), subcase=DEGENERATE)

    def delta_at(self, alpha: AlphaParameter) -> Fraction:
        """Δ = 2mα + α − m, the branch discriminant."""
        if self.kind != POWER_LAW:
            raise InvalidCase("Δ is defined for power-law cases only")
        a = alpha.value
        return 2 * self.m * a + a - self.m

    def is_degenerate_at(self, alpha: AlphaParameter) -> bool:
        return self.kind == POWER_LAW and self.delta_at(alpha) == 0

    def label(self) -> str:
        if self.kind == GENERIC:
            return "Case1"
        return "Case2.2" if self.subcase == DEGENERATE else "Case2.1"

    def describe(self) -> str:
        if self.kind == GENERIC:
            return "b(u) arbitrary"
        tag = "degenerate: m = alpha/(1-2*alpha)" if self.subcase == DEGENERATE else "regular: 2*m*alpha + alpha - m != 0"
        return f"b(u) = k*u^m with k = {_frac_str(self.k)}, m = {_frac_str(self.m)} ({tag})"


# ---------------------------------------------------------------------------
# Symmetry generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryRecord:
    """The point-symmetry generators of the system for one case and order."""

    case: ClassificationCase
    alpha: AlphaParameter
    generators: tuple  # ((name, VectorField), ...)

    def named(self, name: str) -> VectorField:
        for n, f in self.generators:
            if n == name:
                return f
        raise KeyError(name)

    def algebra(self) -> LieAlgebra:
        return structure_constants(self.generators)


def generators(case: ClassificationCase, alpha: AlphaParameter) -> SymmetryRecord:
    """X₁ = ∂x, X₂ = t^{α−1}∂v, X₃ = x∂x + (t/α)∂t, and for a power law also
    X₄ = x∂x + (u/m)∂u + ((m+1)/m)v∂v."""
    x1 = VectorField.of(xi=MonomialSum.constant(1))
    x2 = VectorField.of(phi=MonomialSum.term(1, t=ExponentExpr.of(-1, 1)))
    x3 = VectorField.of(
        xi=MonomialSum.variable("x"),
        tau=MonomialSum.term(ScalarExpr.from_polys((1,), (0, 1)), t=ExponentExpr.of(1)),
    )
    fields = [("X1", x1), ("X2", x2), ("X3", x3)]
    if case.kind == POWER_LAW:
        m = case.m
        if case.k == 0 or m == 0:  # defensive; the constructor already rejects
            raise InvalidCase("power law requires k ≠ 0 and m ≠ 0")
        x4 = VectorField.of(
            xi=MonomialSum.variable("x"),
            mu=MonomialSum.term(ScalarExpr.of(1, m), u=ExponentExpr.of(1)),
            phi=MonomialSum.term(ScalarExpr.of(m + 1, m), v=ExponentExpr.of(1)),
        )
        fields.append(("X4", x4))
    return SymmetryRecord(case=case, alpha=alpha, generators=tuple(fields))


# ---------------------------------------------------------------------------
# Kernel of the RL derivative
# ---------------------------------------------------------------------------


def kernel_exponent_in_domain(alpha: AlphaParameter, j: int) -> bool:
    """Whether the kernel exponent α−j stays above the p > −1 boundary of the
    RL power rule.  For the admissible range n−1 < α < n with 1 ≤ j ≤ n this
    is always true (α−j ≥ α−n > −1), so the out-of-domain flag exists but
    cannot fire; it is kept because the boundary is a real feature of the
    operator and the check documents why the basis is safe."""
    return alpha.value - j > -1


def kernel_solutions(alpha: AlphaParameter, n: int) -> list:
    """The kernel basis {t^{α−1}, …, t^{α−n}} of D^α for n−1 < α < n.

    Every member is annihilated exactly by :func:`rl_derivative_t` (the gamma
    denominator sits on a pole)."""
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    a = alpha.value
    if not (n - 1 < a < n):
        raise DomainError(f"order n = {n} is inconsistent with α = {a} (need n−1 < α < n)")
    out = []
    for j in range(1, n + 1):
        if not kernel_exponent_in_domain(alpha, j):  # pragma: no cover - unreachable
            raise DomainError(f"kernel exponent α−{j} ≤ −1 is out of the power-rule domain")
        out.append(MonomialSum.term(1, t=ExponentExpr.of(-j, 1)))
    return out


# ---------------------------------------------------------------------------
# Adapted bases
# ---------------------------------------------------------------------------


def basis_change(subcase: str, record: SymmetryRecord) -> LieAlgebra:
    """The adapted Y-basis for a power-law record.

    Regular branch (Δ ≠ 0): Y₁ = −((m+1)α/Δ)X₃ − (m(α−1)/Δ)X₄, Y₂ = −X₁,
    Y₃ = (mα/Δ)(X₃−X₄), Y₄ = −X₂; the algebra splits as span{Y₁,Y₂} ⊕
    span{Y₃,Y₄}.

    Degenerate branch (m = α/(1−2α)): Y₁ = X₁, Y₂ = X₂, Y₃ = X₄, Y₄ = X₄−X₃,
    with X₄'s coefficients rewritten through the degeneracy identity as
    (1−2α)/α and (1−α)/α so the structure constants come out as identities
    in α (they agree with the record's rational-m coefficients at this α).
    """
    if record.case.kind != POWER_LAW:
        raise InvalidCase("basis_change applies to power-law records")
    m = record.case.m
    alpha = record.alpha

    if subcase == REGULAR:
        if record.case.delta_at(alpha) == 0:
            raise DegenerateDenominator(
                f"2mα+α−m = 0 at α = {alpha}, m = {_frac_str(m)}: the regular basis is undefined"
            )
        x1, x2, x3, x4 = (record.named(f"X{i}") for i in (1, 2, 3, 4))
        delta = ScalarExpr.from_polys((-m, 2 * m + 1))
        y1 = x3.scaled(ScalarExpr.from_polys((0, -(m + 1))) / delta) + x4.scaled(
            ScalarExpr.from_polys((m, -m)) / delta
        )
        y2 = x1.scaled(ScalarExpr.of(-1))
        y3 = (x3 + x4.scaled(ScalarExpr.of(-1))).scaled(ScalarExpr.from_polys((0, m)) / delta)
        y4 = x2.scaled(ScalarExpr.of(-1))
        return structure_constants([("Y1", y1), ("Y2", y2), ("Y3", y3), ("Y4", y4)])

    if subcase == DEGENERATE:
        a = alpha.value
        if a == Fraction(1, 2):
            raise InvalidCase("degenerate branch requires α ≠ 1/2")
        if m != a / (1 - 2 * a):
            raise InvalidCase(
                f"record has m = {_frac_str(m)} but the degenerate branch at α = {a} "
                f"needs m = {_frac_str(a / (1 - 2 * a))}"
            )
        x1, x2, x3 = (record.named(f"X{i}") for i in (1, 2, 3))
        x4 = VectorField.of(
            xi=MonomialSum.variable("x"),
            mu=MonomialSum.term(ScalarExpr.from_polys((1, -2), (0, 1)), u=ExponentExpr.of(1)),
            phi=MonomialSum.term(ScalarExpr.from_polys((1, -1), (0, 1)), v=ExponentExpr.of(1)),
        )
        y4 = x4 + x3.scaled(ScalarExpr.of(-1))
        return structure_constants([("Y1", x1), ("Y2", x2), ("Y3", x4), ("Y4", y4)])

    raise InvalidCase(f"subcase must be {REGULAR!r} or {DEGENERATE!r}, got {subcase!r}")


# ---------------------------------------------------------------------------
# Optimal systems
# ---------------------------------------------------------------------------


@dataclass
class OptimalSystemElement:
    """One parameterized element of a one-dimensional optimal system, with
    coordinates over the X-basis."""

    id: str
    label: str
    case: ClassificationCase
    alpha: AlphaParameter
    param_names: tuple
    param_domain: str
    coords_fn: Callable[[Mapping[str, Fraction]], tuple]
    discrete_choices: Optional[tuple] = None  # tuple of dicts, or None for continuous
    param_validator: Optional[Callable[[Mapping[str, Fraction]], bool]] = None
    validity_note: str = ""
    validity: Callable[[AlphaParameter, Optional[Fraction]], bool] = lambda alpha, m: True

    def default_params(self) -> dict:
        if self.discrete_choices:
            return dict(self.discrete_choices[0])
        return {name: Fraction(1) for name in self.param_names}

    def coerce_params(self, params: Optional[Mapping]) -> dict:
        if params is None:
            return self.default_params()
        if set(params) != set(self.param_names):
            raise DomainError(
                f"{self.id} takes parameters {sorted(self.param_names)}, got {sorted(params)}"
            )
        got = {name: _fr(params[name]) for name in self.param_names}
        if self.discrete_choices is not None and got not in [dict(c) for c in self.discrete_choices]:
            raise DomainError(
                f"{self.id} restricts parameters to {self.param_domain}, got {got}"
            )
        if self.param_validator is not None and not self.param_validator(got):
            raise DomainError(f"{self.id} parameters {got} violate {self.param_domain}")
        return got

    def element(self, params: Optional[Mapping] = None) -> AlgebraElement:
        return AlgebraElement(self.coords_fn(self.coerce_params(params)))


def _s(v) -> ScalarExpr:
    return v if isinstance(v, ScalarExpr) else ScalarExpr.of(_fr(v))


def optimal_system(case: ClassificationCase, alpha: AlphaParameter) -> list:
    """The one-dimensional optimal system for the case: 3 elements for the
    generic case, 6 for the regular power law, 5 for the degenerate one.

    The element coordinates are polynomial in (α, m), so the lists exist even
    when the branch discriminant vanishes; consistency of (α, m) with the
    chosen branch is checked where it actually matters (the Δ-divisions in
    basis_change and in the Case-2.1 U₃ reduction) and at the CLI boundary.
    """
    if not Fraction(0) < alpha.value < Fraction(1):
        raise DomainError("the similarity catalog is stated for 0 < α < 1")
    lab = case.label()

    def mk(label, param_names, domain, coords_fn, **kw):
        return OptimalSystemElement(
            id=f"{lab}-{label}",
            label=label,
            case=case,
            alpha=alpha,
            param_names=param_names,
            param_domain=domain,
            coords_fn=coords_fn,
            **kw,
        )

    three = ({"a": Fraction(0)}, {"a": Fraction(1)}, {"a": Fraction(-1)})
    pm = ({"a": Fraction(1)}, {"a": Fraction(-1)})

    if case.kind == GENERIC:
        return [
            mk("U1", ("a",), "a in {0, 1, -1}",
               lambda p: (_s(1), _s(p["a"]), _s(0)), discrete_choices=three),
            mk("U2", (), "", lambda p: (_s(0), _s(0), _s(1))),
            mk("U3", (), "", lambda p: (_s(0), _s(1), _s(0))),
        ]

    m = case.m
    if case.subcase == REGULAR:
        # U₃ carries the α-dependent coefficients −(m+1)α and −m(α−1)
        x3_coeff = ScalarExpr.from_polys((0, -(m + 1)))
        x4_coeff = ScalarExpr.from_polys((m, -m))
        return [
            mk("U1", ("a",), "a in {0, 1, -1}",
               lambda p: (_s(-1), _s(-p["a"]), _s(0), _s(0)), discrete_choices=three),
            mk("U2", ("a",), "a in {1, -1}",
               lambda p: (_s(-1), _s(0), _s(p["a"]), _s(-p["a"])), discrete_choices=pm),
            mk("U3", ("a",), "a in {1, -1}",
               lambda p: (_s(0), _s(-p["a"]), x3_coeff, x4_coeff), discrete_choices=pm),
            mk("U4", ("a",), "a in R",
               lambda p: (_s(0), _s(0), _s(p["a"] - 1), _s(-p["a"]))),
            mk("U5", (), "", lambda p: (_s(0), _s(0), _s(1), _s(-1)),
               validity=lambda al, mm: mm < 0 or mm > al.value / (1 - al.value),
               validity_note="invariant solutions require m < 0 or m > alpha/(1-alpha)"),
            mk("U6", (), "", lambda p: (_s(0), _s(-1), _s(0), _s(0))),
        ]

    # degenerate branch
    return [
        mk("U1", ("a",), "a in {0, 1, -1}",
           lambda p: (_s(1), _s(p["a"]), _s(0), _s(0)), discrete_choices=three),
        mk("U2", ("a1", "a2"), "a1 in R, a2 in {1, -1}",
           lambda p: (_s(1), _s(p["a1"]), _s(-p["a2"]), _s(p["a2"])),
           param_validator=lambda p: p["a2"] in (1, -1)),
        mk("U3", ("a",), "a in R",
           lambda p: (_s(0), _s(0), _s(1 - p["a"]), _s(p["a"]))),
        mk("U4", ("a",), "a in {0, 1, -1}",
           lambda p: (_s(0), _s(p["a"]), _s(-1), _s(1)), discrete_choices=three),
        mk("U5", (), "", lambda p: (_s(0), _s(1), _s(0), _s(0))),
    ]


# ---------------------------------------------------------------------------
# Similarity reductions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoInvariantSolutions:
    """Returned (never raised) for elements admitting no invariant solutions."""

    element_id: str
    note: str = "There are no invariant solutions."

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class ReducedEquation:
    """One equation of a reduced system, as closures over the point values.

    ``fractional`` names the unknown whose z-fractional derivative forms the
    left side ("phi"/"psi"), or is None for classical first-order equations;
    ``lhs``/``rhs`` receive (z, vals) where vals carries phi, psi, dphi,
    dpsi, Dphi, Dpsi, and b2.
    """

    text: str
    lhs: Callable
    rhs: Callable
    fractional: Optional[str] = None


@dataclass(frozen=True)
class ReducedSystem:
    kind: str  # "fractional" | "classical"
    equations: tuple
    note: str = ""


@dataclass
class SimilarityReduction:
    """A similarity form u = P_u(x,t)·φ(z) + O_u(x,t), v = P_v(x,t)·ψ(z) +
    O_v(x,t) together with its reduced system.

    The additive offsets carry the inhomogeneous pieces (the a·x·t^{α−1} and
    logarithmic terms); the prefactor/offset split is what the z-dependence
    check and the residual machinery consume.
    """

    element_id: str
    params: dict
    alpha: AlphaParameter
    case: ClassificationCase
    z_str: str
    u_str: str
    v_str: str
    z_fn: Callable[[float, float], float]
    u_prefactor: Callable[[float, float], float]
    u_offset: Callable[[float, float], float]
    v_prefactor: Callable[[float, float], float]
    v_offset: Callable[[float, float], float]
    reduced: ReducedSystem
    validity_note: str = ""
    valid: bool = True
    domain_note: str = ""

    def build_solution(self, phi: Callable, psi: Callable):
        def u_fn(x, t):
            return self.u_prefactor(x, t) * phi(self.z_fn(x, t)) + self.u_offset(x, t)

        def v_fn(x, t):
            return self.v_prefactor(x, t) * psi(self.z_fn(x, t)) + self.v_offset(x, t)

        return u_fn, v_fn


def _zero_fn(x, t):
    return 0.0


def _one_fn(x, t):
    return 1.0


def _u1_reduction(element, params, af) -> SimilarityReduction:
    a = params["a"]
    av = float(a)

    eq1 = ReducedEquation(
        text=f"D^alpha phi = {_frac_str(a)}*z^(alpha-1)",
        lhs=lambda z, vals: vals["Dphi"],
        rhs=lambda z, vals: av * z ** (af - 1.0),
        fractional="phi",
    )
    eq2 = ReducedEquation(
        text="D^alpha psi = 0",
        lhs=lambda z, vals: vals["Dpsi"],
        rhs=lambda z, vals: 0.0,
        fractional="psi",
    )
    return SimilarityReduction(
        element_id=element.id,
        params=params,
        alpha=element.alpha,
        case=element.case,
        z_str="z = t",
        u_str="u = phi(t)",
        v_str=f"v = psi(t) + {_frac_str(a)}*x*t^(alpha-1)",
        z_fn=lambda x, t: t,
        u_prefactor=_one_fn,
        u_offset=_zero_fn,
        v_prefactor=_one_fn,
        v_offset=lambda x, t: av * x * t ** (af - 1.0),
        reduced=ReducedSystem(kind="fractional", equations=(eq1, eq2)),
    )


def _power_b2(case: ClassificationCase):
    kf = float(case.k)
    two_m = 2.0 * float(case.m)

    def b2(w):
        return kf * kf * w ** two_m

    return b2


def similarity_reduction(
    element: OptimalSystemElement, params: Optional[Mapping] = None
) -> Union[SimilarityReduction, NoInvariantSolutions]:
    """The similarity variable, invariant form, and reduced system for one
    optimal-system element (or NoInvariantSolutions where none exist)."""
    params = element.coerce_params(params)
    alpha = element.alpha
    af = float(alpha)
    a_exact = alpha.value
    case = element.case
    eid = element.id

    if eid.endswith("U3") and case.kind == GENERIC:
        return NoInvariantSolutions(element_id=eid)
    if eid == "Case2.1-U6" or eid == "Case2.2-U5":
        return NoInvariantSolutions(element_id=eid)

    if eid.endswith("U1"):
        return _u1_reduction(element, params, af)

    if eid == "Case1-U2":
        inv_alpha = 1.0 / af
        eq1 = ReducedEquation(
            text="D^alpha phi = -(1/alpha)*z*psi'",
            lhs=lambda z, vals: vals["Dphi"],
            rhs=lambda z, vals: -inv_alpha * z * vals["dpsi"],
            fractional="phi",
        )
        eq2 = ReducedEquation(
            text="D^alpha psi = -(1/alpha)*z*b^2(phi)*phi'",
            lhs=lambda z, vals: vals["Dpsi"],
            rhs=lambda z, vals: -inv_alpha * z * vals["b2"](vals["phi"]) * vals["dphi"],
            fractional="psi",
        )
        e_z = -1 / a_exact
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str=f"z = t*x^({_frac_str(e_z)})",
            u_str="u = phi(z)",
            v_str="v = psi(z)",
            z_fn=lambda x, t: t * x ** float(e_z),
            u_prefactor=_one_fn,
            u_offset=_zero_fn,
            v_prefactor=_one_fn,
            v_offset=_zero_fn,
            reduced=ReducedSystem(
                kind="fractional",
                equations=(eq1, eq2),
                note="b(u) stays generic here; supply b2 to evaluate residuals",
            ),
            domain_note="x > 0",
        )

    m = case.m
    k2 = float(case.k) ** 2
    mf = float(m)

    if eid == "Case2.1-U2":
        a = params["a"]
        av = float(a)
        c1 = (mf + 1.0) / mf
        eq1 = ReducedEquation(
            text="D^alpha phi = (m+1)/m*psi + (1/alpha)*z*psi'",
            lhs=lambda z, vals: vals["Dphi"],
            rhs=lambda z, vals: c1 * vals["psi"] + z * vals["dpsi"] / af,
            fractional="phi",
        )
        eq2 = ReducedEquation(
            text="D^alpha psi = k^2*phi^(2m)*((1/m)*phi + (1/alpha)*z*phi')",
            lhs=lambda z, vals: vals["Dpsi"],
            rhs=lambda z, vals: k2
            * vals["phi"] ** (2.0 * mf)
            * (vals["phi"] / mf + z * vals["dphi"] / af),
            fractional="psi",
        )
        ax = a / a_exact
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str=f"z = t*exp(({_frac_str(ax)})*x)",
            u_str=f"u = exp(({_frac_str(a / m)})*x)*phi(z)",
            v_str=f"v = {_frac_str(a)}*exp(({_frac_str((m + 1) * a / m)})*x)*psi(z)",
            z_fn=lambda x, t: t * math.exp(float(ax) * x),
            u_prefactor=lambda x, t: math.exp(float(a / m) * x),
            u_offset=_zero_fn,
            v_prefactor=lambda x, t: av * math.exp(float((m + 1) * a / m) * x),
            v_offset=_zero_fn,
            reduced=ReducedSystem(kind="fractional", equations=(eq1, eq2)),
        )

    if eid == "Case2.1-U3":
        a = params["a"]
        av = float(a)
        delta = case.delta_at(alpha)
        if delta == 0:
            raise DegenerateDenominator(
                "the Case-2.1 U3 similarity form divides by 2mα+α−m, which "
                f"vanishes at α = {alpha}, m = {_frac_str(m)}"
            )
        df = float(delta)
        cu = (a_exact - 1) / delta
        cv = (m + 1) * (a_exact - 1) / delta
        ez = -(m + 1) / delta
        eq1 = ReducedEquation(
            text="D^alpha phi = (m+1)/Delta*((alpha-1)*psi - z*psi') + a/Delta*z^(alpha-1)",
            lhs=lambda z, vals: vals["Dphi"],
            rhs=lambda z, vals: (mf + 1.0) / df * ((af - 1.0) * vals["psi"] - z * vals["dpsi"])
            + av / df * z ** (af - 1.0),
            fractional="phi",
        )
        eq2 = ReducedEquation(
            text="D^alpha psi = k^2/Delta*phi^(2m)*((alpha-1)*phi - (m+1)*z*phi')",
            lhs=lambda z, vals: vals["Dpsi"],
            rhs=lambda z, vals: k2 / df
            * vals["phi"] ** (2.0 * mf)
            * ((af - 1.0) * vals["phi"] - (mf + 1.0) * z * vals["dphi"]),
            fractional="psi",
        )
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str=f"z = t*x^({_frac_str(ez)})",
            u_str=f"u = x^({_frac_str(cu)})*phi(z)",
            v_str=(
                f"v = x^({_frac_str(cv)})*psi(z) + ({_frac_str(a / delta)})*t^(alpha-1)*ln(x)"
            ),
            z_fn=lambda x, t: t * x ** float(ez),
            u_prefactor=lambda x, t: x ** float(cu),
            u_offset=_zero_fn,
            v_prefactor=lambda x, t: x ** float(cv),
            v_offset=lambda x, t: float(a / delta) * t ** (af - 1.0) * math.log(x),
            reduced=ReducedSystem(kind="fractional", equations=(eq1, eq2)),
            domain_note="x > 0",
        )

    if eid == "Case2.1-U4":
        a = params["a"]
        av = float(a)
        ez = (a - 1) / a_exact
        cu = a / m
        cv = (m + 1) * a / m
        eq1 = ReducedEquation(
            text="D^alpha phi = (m+1)*a/m*psi + (a-1)/alpha*z*psi'",
            lhs=lambda z, vals: vals["Dphi"],
            rhs=lambda z, vals: (mf + 1.0) * av / mf * vals["psi"]
            + (av - 1.0) / af * z * vals["dpsi"],
            fractional="phi",
        )
        eq2 = ReducedEquation(
            text="D^alpha psi = k^2*phi^(2m)*(a/m*phi + (a-1)/alpha*z*phi')",
            lhs=lambda z, vals: vals["Dpsi"],
            rhs=lambda z, vals: k2
            * vals["phi"] ** (2.0 * mf)
            * (av / mf * vals["phi"] + (av - 1.0) / af * z * vals["dphi"]),
            fractional="psi",
        )
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str=f"z = t*x^({_frac_str(ez)})",
            u_str=f"u = x^({_frac_str(cu)})*phi(z)",
            v_str=f"v = x^({_frac_str(cv)})*psi(z)",
            z_fn=lambda x, t: t * x ** float(ez),
            u_prefactor=lambda x, t: x ** float(cu),
            u_offset=_zero_fn,
            v_prefactor=lambda x, t: x ** float(cv),
            v_offset=_zero_fn,
            reduced=ReducedSystem(kind="fractional", equations=(eq1, eq2)),
            domain_note="x > 0",
        )

    if eid == "Case2.1-U5":
        from .symbolic_core import gamma_fraction  # local: poles surface lazily

        et_u = -a_exact / m
        et_v = -(m + 1) * a_exact / m
        valid = m < 0 or m > a_exact / (1 - a_exact)

        def g1():
            return gamma_fraction(1 - a_exact / m) / gamma_fraction(1 - (m + 1) * a_exact / m)

        def g2():
            return gamma_fraction(1 - (m + 1) * a_exact / m) / gamma_fraction(
                1 - (2 * m + 1) * a_exact / m
            )

        eq1 = ReducedEquation(
            text="psi' = Gamma(1-alpha/m)/Gamma(1-(m+1)alpha/m)*phi",
            lhs=lambda z, vals: vals["dpsi"],
            rhs=lambda z, vals: g1() * vals["phi"],
        )
        eq2 = ReducedEquation(
            text="k^2*phi^(2m)*phi' = Gamma(1-(m+1)alpha/m)/Gamma(1-(2m+1)alpha/m)*psi",
            lhs=lambda z, vals: k2 * vals["phi"] ** (2.0 * mf) * vals["dphi"],
            rhs=lambda z, vals: g2() * vals["psi"],
        )
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str="z = x",
            u_str=f"u = t^({_frac_str(et_u)})*phi(x)",
            v_str=f"v = t^({_frac_str(et_v)})*psi(x)",
            z_fn=lambda x, t: x,
            u_prefactor=lambda x, t: t ** float(et_u),
            u_offset=_zero_fn,
            v_prefactor=lambda x, t: t ** float(et_v),
            v_offset=_zero_fn,
            reduced=ReducedSystem(kind="classical", equations=(eq1, eq2)),
            validity_note="m < 0 or m > alpha/(1-alpha)",
            valid=valid,
        )

    if eid.startswith("Case2.2"):
        if a_exact == Fraction(1, 2):
            raise InvalidCase("the degenerate-branch reductions require α ≠ 1/2")
        if m != a_exact / (1 - 2 * a_exact):
            raise InvalidCase(
                f"the degenerate-branch reductions at α = {a_exact} presuppose "
                f"m = {_frac_str(a_exact / (1 - 2 * a_exact))}, got m = {_frac_str(m)}"
            )

    if eid == "Case2.2-U2":
        a1, a2 = params["a1"], params["a2"]
        a1v, a2v = float(a1), float(a2)
        two_m = 2.0 * af / (1.0 - 2.0 * af)
        eq1 = ReducedEquation(
            text="D^alpha phi = (1/alpha)*((1-alpha)*psi + z*psi') + a1*z^(alpha-1)",
            lhs=lambda z, vals: vals["Dphi"],
            rhs=lambda z, vals: ((1.0 - af) * vals["psi"] + z * vals["dpsi"]) / af
            + a1v * z ** (af - 1.0),
            fractional="phi",
        )
        eq2 = ReducedEquation(
            text="D^alpha psi = k^2/alpha*phi^(2alpha/(1-2alpha))*((1-2alpha)*phi + z*phi')",
            lhs=lambda z, vals: vals["Dpsi"],
            rhs=lambda z, vals: k2 / af
            * vals["phi"] ** two_m
            * ((1.0 - 2.0 * af) * vals["phi"] + z * vals["dphi"]),
            fractional="psi",
        )
        ez = a2 / a_exact
        cu = a2 * (1 - 2 * a_exact) / a_exact
        cv = a2 * (1 - a_exact) / a_exact
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str=f"z = t*exp(({_frac_str(ez)})*x)",
            u_str=f"u = exp(({_frac_str(cu)})*x)*phi(z)",
            v_str=(
                f"v = {_frac_str(a2)}*exp(({_frac_str(cv)})*x)*psi(z) "
                f"+ {_frac_str(a1)}*x*t^(alpha-1)"
            ),
            z_fn=lambda x, t: t * math.exp(float(ez) * x),
            u_prefactor=lambda x, t: math.exp(float(cu) * x),
            u_offset=_zero_fn,
            v_prefactor=lambda x, t: a2v * math.exp(float(cv) * x),
            v_offset=lambda x, t: a1v * x * t ** (af - 1.0),
            reduced=ReducedSystem(kind="fractional", equations=(eq1, eq2)),
        )

    if eid == "Case2.2-U3":
        a = params["a"]
        av = float(a)
        two_m = 2.0 * af / (1.0 - 2.0 * af)
        eq1 = ReducedEquation(
            text="D^alpha phi = (1/alpha)*(a*(1-alpha)*psi + (a-1)*z*psi')",
            lhs=lambda z, vals: vals["Dphi"],
            rhs=lambda z, vals: (av * (1.0 - af) * vals["psi"] + (av - 1.0) * z * vals["dpsi"]) / af,
            fractional="phi",
        )
        eq2 = ReducedEquation(
            text="D^alpha psi = k^2/alpha*phi^(2alpha/(1-2alpha))*(a*(1-2alpha)*phi + (a-1)*z*phi')",
            lhs=lambda z, vals: vals["Dpsi"],
            rhs=lambda z, vals: k2 / af
            * vals["phi"] ** two_m
            * (av * (1.0 - 2.0 * af) * vals["phi"] + (av - 1.0) * z * vals["dphi"]),
            fractional="psi",
        )
        ez = (a - 1) / a_exact
        cu = a * (1 - 2 * a_exact) / a_exact
        cv = a * (1 - a_exact) / a_exact
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str=f"z = t*x^({_frac_str(ez)})",
            u_str=f"u = x^({_frac_str(cu)})*phi(z)",
            v_str=f"v = x^({_frac_str(cv)})*psi(z)",
            z_fn=lambda x, t: t * x ** float(ez),
            u_prefactor=lambda x, t: x ** float(cu),
            u_offset=_zero_fn,
            v_prefactor=lambda x, t: x ** float(cv),
            v_offset=_zero_fn,
            reduced=ReducedSystem(kind="fractional", equations=(eq1, eq2)),
            domain_note="x > 0",
        )

    if eid == "Case2.2-U4":
        from .symbolic_core import gamma_fraction

        a = params["a"]
        av = float(a)
        two_m = 2.0 * af / (1.0 - 2.0 * af)
        ratio = gamma_fraction(2 * a_exact) / gamma_fraction(a_exact)
        rhs2_const = -av * gamma_fraction(a_exact + 1)
        eq1 = ReducedEquation(
            text="psi' = Gamma(2*alpha)/Gamma(alpha)*phi",
            lhs=lambda z, vals: vals["dpsi"],
            rhs=lambda z, vals: ratio * vals["phi"],
        )
        eq2 = ReducedEquation(
            text="k^2*phi^(2alpha/(1-2alpha))*phi' = -a*Gamma(alpha+1)",
            lhs=lambda z, vals: k2 * vals["phi"] ** two_m * vals["dphi"],
            rhs=lambda z, vals: rhs2_const,
        )
        return SimilarityReduction(
            element_id=eid,
            params=params,
            alpha=alpha,
            case=case,
            z_str="z = x",
            u_str="u = t^(2*alpha-1)*phi(x)",
            v_str=f"v = t^(alpha-1)*psi(x) - {_frac_str(a)}*alpha*t^(alpha-1)*ln(t)",
            z_fn=lambda x, t: x,
            u_prefactor=lambda x, t: t ** (2.0 * af - 1.0),
            u_offset=_zero_fn,
            v_prefactor=lambda x, t: t ** (af - 1.0),
            v_offset=lambda x, t: -av * af * t ** (af - 1.0) * math.log(t),
            reduced=ReducedSystem(kind="classical", equations=(eq1, eq2)),
        )

    raise Unsupported(f"no similarity reduction wired for {eid}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Invariance-surface residual
# ---------------------------------------------------------------------------


def _partial(fn: Callable, x: float, t: float, which: str) -> float:
    """Richardson-extrapolated central difference in one slot."""
    if which == "x":
        h = 1e-5 * max(1.0, abs(x))
        d1 = (fn(x + h, t) - fn(x - h, t)) / (2 * h)
        d2 = (fn(x + h / 2, t) - fn(x - h / 2, t)) / h
    else:
        h = 1e-5 * max(1.0, abs(t))
        d1 = (fn(x, t + h) - fn(x, t - h)) / (2 * h)
        d2 = (fn(x, t + h / 2) - fn(x, t - h / 2)) / h
    return (4 * d2 - d1) / 3


def invariance_surface_residual(
    x_field: VectorField,
    u_fn: Callable,
    v_fn: Callable,
    grid: GridSpec,
    alpha: AlphaParameter,
) -> ResidualReport:
    """Max/RMS of the invariance-surface conditions ξu_x + τu_t − μ and
    ξv_x + τv_t − φ over the grid.

    Partial derivatives use the solution's own ``dx``/``dt`` attributes when
    it exposes them, else Richardson-extrapolated central differences.
    """
    u_dx = getattr(u_fn, "dx", None)
    u_dt = getattr(u_fn, "dt", None)
    v_dx = getattr(v_fn, "dx", None)
    v_dt = getattr(v_fn, "dt", None)
    analytic = all(d is not None for d in (u_dx, u_dt, v_dx, v_dt))

    res1, res2 = [], []
    for t in grid.ts():
        for x in grid.xs():
            uval = u_fn(x, t)
            vval = v_fn(x, t)
            point = (x, t, uval, vval)
            xi = ms_evaluate(x_field.xi, alpha, point)
            tau = ms_evaluate(x_field.tau, alpha, point)
            mu = ms_evaluate(x_field.mu, alpha, point)
            phi = ms_evaluate(x_field.phi, alpha, point)
            ux = u_dx(x, t) if analytic else _partial(u_fn, x, t, "x")
            ut = u_dt(x, t) if analytic else _partial(u_fn, x, t, "t")
            vx = v_dx(x, t) if analytic else _partial(v_fn, x, t, "x")
            vt = v_dt(x, t) if analytic else _partial(v_fn, x, t, "t")
            res1.append(xi * ux + tau * ut - mu)
            res2.append(xi * vx + tau * vt - phi)

    import numpy as np

    return residual_report_from_samples(
        np.asarray(res1),
        np.asarray(res2),
        path="analytic" if analytic else "finite-difference",
        grid=grid.to_dict(),
        params={},
    )
