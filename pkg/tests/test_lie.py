"""Bracket algebra, structure constants, adjoint actions, and conjugation
equivalences, exercised on the three symmetry algebras of the system plus
randomized fields."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclie.errors import NotClosed, NotInSpan, Unsupported
from fraclie.lie_engine import (
    FREE,
    SYMBOLIC,
    AdjointClosedForm,
    AlgebraElement,
    EquivalenceResult,
    NoSolution,
    VectorField,
    ad_matrix,
    adjoint_action,
    bracket,
    decompose,
    direct_sum_check,
    element_str,
    equivalence_solve,
    evaluate_element,
    structure_constants,
)
from fraclie.symbolic_core import (
    AlphaParameter,
    ExponentExpr,
    Monomial,
    MonomialSum,
    ScalarExpr,
)

A13 = AlphaParameter(Fraction(1, 3))

ONE_MINUS_A_OVER_A = ScalarExpr.from_polys((1, -1), (0, 1))  # (1−α)/α


# ---------------------------------------------------------------------------
# The concrete symmetry algebras (independent transcriptions; the catalog
# module builds its own copies and the acceptance suite compares the two).
# ---------------------------------------------------------------------------


def x_fields(m=None):
    """X₁..X₃ (and X₄ when a power-law exponent m is given)."""
    x1 = VectorField.of(xi=MonomialSum.constant(1))
    x2 = VectorField.of(phi=MonomialSum.term(1, t=ExponentExpr.of(-1, 1)))
    x3 = VectorField.of(
        xi=MonomialSum.variable("x"),
        tau=MonomialSum.term(ScalarExpr.from_polys((1,), (0, 1)), t=ExponentExpr.of(1)),
    )
    if m is None:
        return [x1, x2, x3]
    m = Fraction(m)
    x4 = VectorField.of(
        xi=MonomialSum.variable("x"),
        mu=MonomialSum.term(ScalarExpr.of(1, m), u=ExponentExpr.of(1)),
        phi=MonomialSum.term(ScalarExpr.of((m + 1), m), v=ExponentExpr.of(1)),
    )
    return [x1, x2, x3, x4]


def algebra_case1():
    x1, x2, x3 = x_fields()
    return structure_constants([("X1", x1), ("X2", x2), ("X3", x3)])


def y_basis_21(m):
    """Adapted basis for the generic power law (Δ = (2m+1)α − m ≠ 0)."""
    m = Fraction(m)
    x1, x2, x3, x4 = x_fields(m)
    delta = ScalarExpr.from_polys((-m, 2 * m + 1))
    y1 = x3.scaled(ScalarExpr.from_polys((0, -(m + 1))) / delta) + x4.scaled(
        ScalarExpr.from_polys((m, -m)) / delta
    )
    y2 = x1.scaled(ScalarExpr.of(-1))
    y3 = (x3 + x4.scaled(ScalarExpr.of(-1))).scaled(ScalarExpr.from_polys((0, m)) / delta)
    y4 = x2.scaled(ScalarExpr.of(-1))
    return [("Y1", y1), ("Y2", y2), ("Y3", y3), ("Y4", y4)]


def y_basis_22():
    """Adapted basis at the degeneracy m = α/(1−2α): all coefficients stay
    rational in α."""
    x1, x2, x3 = x_fields()
    inv_m = ScalarExpr.from_polys((1, -2), (0, 1))        # 1/m = (1−2α)/α
    mp1_over_m = ScalarExpr.from_polys((1, -1), (0, 1))   # (m+1)/m = (1−α)/α
    x4 = VectorField.of(
        xi=MonomialSum.variable("x"),
        mu=MonomialSum.term(inv_m, u=ExponentExpr.of(1)),
        phi=MonomialSum.term(mp1_over_m, v=ExponentExpr.of(1)),
    )
    return [("Y1", x1), ("Y2", x2), ("Y3", x4), ("Y4", x4 + x3.scaled(ScalarExpr.of(-1)))]


# ---------------------------------------------------------------------------
# bracket / structure constants
# ---------------------------------------------------------------------------


def test_bracket_case1_commutators():
    x1, x2, x3 = x_fields()
    assert bracket(x1, x3) == x1
    assert bracket(x2, x3) == x2.scaled(ONE_MINUS_A_OVER_A)
    assert bracket(x1, x1).is_zero()
    assert bracket(x1, x2).is_zero()


def test_structure_constants_case1_table():
    alg = algebra_case1()
    c = alg.structure
    one, zero = ScalarExpr.of(1), ScalarExpr.of(0)
    assert c[0][2] == (one, zero, zero)                      # [X1,X3] = X1
    assert c[1][2] == (zero, ONE_MINUS_A_OVER_A, zero)       # [X2,X3] = (1−α)/α·X2
    assert c[0][1] == (zero, zero, zero)
    for i in range(3):
        assert all(e.is_zero() for e in c[i][i])


def test_decompose_examples():
    alg = algebra_case1()
    x1, x2, x3 = (alg.basis_field(i) for i in range(3))
    assert decompose(x1, alg).coordinates == (
        ScalarExpr.of(1), ScalarExpr.of(0), ScalarExpr.of(0)
    )
    z = bracket(x2, x3)
    assert decompose(z, alg).coordinates == (
        ScalarExpr.of(0), ONE_MINUS_A_OVER_A, ScalarExpr.of(0)
    )
    outside = VectorField.of(mu=MonomialSum.variable("x"))
    with pytest.raises(NotInSpan):
        decompose(outside, alg)


def test_structure_constants_not_closed():
    d_dx = VectorField.of(xi=MonomialSum.constant(1))
    x2_dx = VectorField.of(xi=MonomialSum.term(1, x=ExponentExpr.of(2)))
    with pytest.raises(NotClosed):
        structure_constants([d_dx, x2_dx])


@pytest.mark.parametrize("m", [Fraction(2), Fraction(-1, 3), Fraction(5, 7)])
def test_case_2_1_block_table(m):
    alg = structure_constants(y_basis_21(m))
    c = alg.structure
    # [Y1,Y2] = Y2 and [Y3,Y4] = Y4; everything across the blocks vanishes
    assert c[0][1] == (ScalarExpr.of(0), ScalarExpr.of(1), ScalarExpr.of(0), ScalarExpr.of(0))
    assert c[2][3] == (ScalarExpr.of(0), ScalarExpr.of(0), ScalarExpr.of(0), ScalarExpr.of(1))
    for i, j in ((0, 2), (0, 3), (1, 2), (1, 3)):
        assert all(e.is_zero() for e in c[i][j])
    assert direct_sum_check(alg, ({0, 1}, {2, 3}))
    assert not direct_sum_check(alg, ({0, 2}, {1, 3}))


def test_case_2_2_table():
    alg = structure_constants(y_basis_22())
    c = alg.structure
    zero, one = ScalarExpr.of(0), ScalarExpr.of(1)
    assert c[0][2] == (one, zero, zero, zero)                    # [Y1,Y3] = Y1
    assert c[1][2] == (zero, ONE_MINUS_A_OVER_A, zero, zero)     # [Y2,Y3] = (1−α)/α·Y2
    for j in range(4):
        assert all(e.is_zero() for e in c[3][j])                 # Y4 is central
    assert all(e.is_zero() for e in c[0][1])
    assert direct_sum_check(alg, ({0, 1, 2}, {3}))


def test_direct_sum_check_case1_false_and_validation():
    alg = algebra_case1()
    assert not direct_sum_check(alg, ({0}, {1, 2}))  # [X1,X3] = X1 crosses
    with pytest.raises(ValueError):
        direct_sum_check(alg, ({0, 1}, {1, 2}))
    with pytest.raises(ValueError):
        direct_sum_check(alg, ({0}, {1}))


# ---------------------------------------------------------------------------
# randomized bracket laws
# ---------------------------------------------------------------------------

small_fractions = st.fractions(
    min_value=Fraction(-2), max_value=Fraction(2), max_denominator=3
)
exponent_exprs = st.builds(
    ExponentExpr.of,
    st.fractions(min_value=Fraction(-1), max_value=Fraction(2), max_denominator=2),
    st.integers(min_value=0, max_value=1).map(Fraction),
)
coeffs = st.builds(ScalarExpr.of, small_fractions)
monomials = st.builds(Monomial, coeffs, st.tuples(*[exponent_exprs] * 4))
small_sums = st.lists(monomials, max_size=2).map(MonomialSum)
fields = st.builds(VectorField, small_sums, small_sums, small_sums, small_sums)


@given(fields, fields)
@settings(max_examples=30, deadline=None)
def test_bracket_antisymmetry_random(x, y):
    assert (bracket(x, y) + bracket(y, x)).is_zero()


@given(fields, fields, fields)
@settings(max_examples=20, deadline=None)
def test_bracket_bilinear_random(x, y, z):
    assert bracket(x + y, z) == bracket(x, z) + bracket(y, z)


@given(fields, fields, fields)
@settings(max_examples=15, deadline=None)
def test_bracket_jacobi_random(x, y, z):
    total = (
        bracket(x, bracket(y, z))
        + bracket(y, bracket(z, x))
        + bracket(z, bracket(x, y))
    )
    assert total.is_zero()


# ---------------------------------------------------------------------------
# ad_matrix / adjoint_action
# ---------------------------------------------------------------------------


def test_ad_matrix_case_2_2():
    alg = structure_constants(y_basis_22())
    m = ad_matrix(alg.basis_element(2), alg)  # ad_{Y₃}
    assert m[0][0] == ScalarExpr.of(-1)
    assert m[1][1] == -ONE_MINUS_A_OVER_A
    assert m[2][2].is_zero() and m[3][3].is_zero()
    for k in range(4):
        for j in range(4):
            if k != j:
                assert m[k][j].is_zero()
    assert all(e.is_zero() for row in ad_matrix(alg.basis_element(3), alg) for e in row)
    zero_el = alg.element((0, 0, 0, 0))
    assert all(e.is_zero() for row in ad_matrix(zero_el, alg) for e in row)


def test_adjoint_nilpotent_is_exact():
    alg = structure_constants(y_basis_21(Fraction(2)))
    # Ad(e^{εY₂})Y₁ = Y₁ + εY₂
    out = adjoint_action(alg.basis_element(1), alg.basis_element(0), Fraction(3, 4), alg)
    assert isinstance(out, AlgebraElement)
    assert out.coordinates == (
        ScalarExpr.of(1), ScalarExpr.of(3, 4), ScalarExpr.of(0), ScalarExpr.of(0)
    )
    closed = adjoint_action(alg.basis_element(1), alg.basis_element(0), SYMBOLIC, alg)
    assert isinstance(closed, AdjointClosedForm)
    c0, c1, rate = closed.entries[1]
    assert c0.is_zero() and c1.is_one() and rate.is_zero()
    assert closed.entries[0] == (ScalarExpr.of(1), ScalarExpr.of(0), ScalarExpr.of(0))


def test_adjoint_eigen_closed_form():
    alg = structure_constants(y_basis_22())
    closed = adjoint_action(alg.basis_element(2), alg.basis_element(0), SYMBOLIC, alg)
    # Ad(e^{εY₃})Y₁ = e^{ε}Y₁ (rate −1 means factor e^{−(−1)ε})
    assert closed.entries[0] == (ScalarExpr.of(1), ScalarExpr.of(0), ScalarExpr.of(-1))
    vals = closed.evaluate(0.3)
    assert vals[0] == pytest.approx(math.exp(0.3), rel=1e-12)
    assert vals[1] == vals[2] == vals[3] == 0.0

    closed2 = adjoint_action(alg.basis_element(2), alg.basis_element(1), SYMBOLIC, alg)
    vals2 = closed2.evaluate(0.5, A13)  # rate −(1−α)/α = −2 at α = 1/3
    assert vals2[1] == pytest.approx(math.e, rel=1e-12)


def test_adjoint_fixes_itself():
    alg = structure_constants(y_basis_22())
    y = alg.element((1, 0, 2, 0))
    out = adjoint_action(y, y, 0.7, alg, A13)
    assert evaluate_element(out, A13) == pytest.approx((1.0, 0.0, 2.0, 0.0))


def test_adjoint_roundtrip():
    alg = structure_constants(y_basis_22())
    y3 = alg.basis_element(2)
    z = alg.element((1, 2, 0, -1))
    fwd = adjoint_action(y3, z, 0.37, alg, A13)
    back = adjoint_action(y3, fwd, -0.37, alg, A13)
    assert evaluate_element(back, A13) == pytest.approx(
        evaluate_element(z, A13), abs=1e-12
    )


def test_adjoint_is_automorphism():
    alg = structure_constants(y_basis_22())
    y3 = alg.basis_element(2)
    z1 = alg.element((1, 1, 0, 0))
    z2 = alg.element((0, 1, 1, 0))
    eps = 0.41
    lhs_coords = alg.bracket_coords(
        adjoint_action(y3, z1, eps, alg, A13).coordinates,
        adjoint_action(y3, z2, eps, alg, A13).coordinates,
    )
    br = AlgebraElement(alg.bracket_coords(z1.coordinates, z2.coordinates))
    rhs = adjoint_action(y3, br, eps, alg, A13)
    lhs = evaluate_element(AlgebraElement(lhs_coords), A13)
    assert lhs == pytest.approx(evaluate_element(rhs, A13), abs=1e-10)


def test_adjoint_series_fallback():
    # affine algebra: [e1, e2] = e1; ad of e1+e2 on e2 terminates in no
    # closed-form bucket, so the scaled series must deliver
    # Ad(e^{ε(e1+e2)})e2 = e2 − (e^{ε} − 1)e1.
    e1 = VectorField.of(xi=MonomialSum.constant(1))
    e2 = VectorField.of(xi=MonomialSum.variable("x"))
    alg = structure_constants([("e1", e1), ("e2", e2)])
    y = alg.element((1, 1))
    z = alg.basis_element(1)
    out = adjoint_action(y, z, 0.37, alg)
    assert evaluate_element(out) == pytest.approx(
        (1.0 - math.exp(0.37), 1.0), abs=1e-12
    )
    with pytest.raises(Unsupported):
        adjoint_action(y, z, SYMBOLIC, alg)


# ---------------------------------------------------------------------------
# equivalence_solve
# ---------------------------------------------------------------------------


def test_equivalence_trivial_identity():
    alg = structure_constants(y_basis_21(Fraction(2)))
    src = alg.element((0, 1, 3, 0))
    res = equivalence_solve(src, src, alg.basis_element(0), alg)
    assert isinstance(res, EquivalenceResult)
    assert res.epsilon == pytest.approx(0.0, abs=1e-12)
    assert res.scale == pytest.approx(1.0)


def test_equivalence_normalizes_y3_coefficient():
    # Y₂ + κY₃ ~ Y₂ + sign(κ)Y₃ under Ad(e^{εY₁}), with scale |κ|
    alg = structure_constants(y_basis_21(Fraction(2)))
    src = alg.element((0, 1, 3, 0))
    res = equivalence_solve(src, alg.element((0, 1, 1, 0)), alg.basis_element(0), alg)
    assert isinstance(res, EquivalenceResult)
    assert res.scale == pytest.approx(3.0)
    assert res.epsilon == pytest.approx(-math.log(3.0))
    # the Y₂ coefficient can never flip sign along this orbit
    bad = equivalence_solve(src, alg.element((0, 1, -1, 0)), alg.basis_element(0), alg)
    assert isinstance(bad, NoSolution)


def test_equivalence_unreachable_coordinate():
    alg = structure_constants(y_basis_21(Fraction(2)))
    src = alg.element((0, 1, 3, 0))
    target = alg.element((1, 0, FREE, 0))
    res = equivalence_solve(src, target, alg.basis_element(0), alg)
    assert isinstance(res, NoSolution)
    assert "Y1" in res.reason


@pytest.mark.parametrize(
    "a,last,target_y2,expected_b",
    [
        (Fraction(2), 1, 1, 2.0),
        (Fraction(2), -1, 1, -2.0),
        (Fraction(-2), 1, -1, 2.0),
        (Fraction(-2), -1, -1, -2.0),
    ],
)
def test_equivalence_case_2_2_sign_variants(a, last, target_y2, expected_b):
    # At α = 1/3 the degeneracy exponent is m = α/(1−2α) = 1, so the filled
    # coefficient must be b = ±|a|^m = ±|a|.
    alg = structure_constants(y_basis_22())
    src = alg.element((1, a, 0, last))
    target = alg.element((1, target_y2, 0, FREE))
    res = equivalence_solve(src, target, alg.basis_element(2), alg, alpha=A13)
    assert isinstance(res, EquivalenceResult)
    expected_eps = (1.0 / 3.0) * math.log(abs(a)) / (2.0 / 3.0 - 1.0)
    assert res.epsilon == pytest.approx(expected_eps, rel=1e-12)
    assert res.scale > 0
    assert res.filled[3] == pytest.approx(expected_b, rel=1e-12)
    # re-apply the conjugation and confirm the scaled target is reproduced
    out = adjoint_action(alg.basis_element(2), src, res.epsilon, alg, A13)
    got = evaluate_element(out, A13)
    want = [res.scale * w for w in (1.0, float(target_y2), 0.0, expected_b)]
    assert got == pytest.approx(want, abs=1e-10)


# ---------------------------------------------------------------------------
# rendering / element utilities
# ---------------------------------------------------------------------------


def test_element_str():
    alg = structure_constants(y_basis_21(Fraction(2)))
    e = alg.element({"Y2": 1, "Y3": 3})
    assert element_str(alg, e) == "Y2 + 3·Y3"
    assert element_str(alg, alg.element((0, 0, 0, 0))) == "0"
    e2 = alg.element((1, -1, 0, 0))
    assert element_str(alg, e2) == "Y1 - Y2"


def test_element_validation():
    alg = algebra_case1()
    with pytest.raises(ValueError):
        alg.element((1, 2))
    with pytest.raises(Unsupported):
        alg.field_of(alg.element((1, FREE, 0)))


def test_field_of_roundtrip():
    alg = algebra_case1()
    e = alg.element((2, 0, 1))
    f = alg.field_of(e)
    assert decompose(f, alg).coordinates == e.coordinates
