"""End-to-end acceptance matrix.

Ten independent criteria, each of which checks one externally verifiable
claim bundle against a second route: hand-entered table transcriptions,
frozen 20-digit reference constants, closed-form twins with analytic
derivatives, or the singular-kernel quadrature oracle.  A criterion passes
only if every one of its checks passes, including the stated runtime
budgets where the claim carries one.

The expected tables and constants embedded here were entered by hand and
are deliberately *not* produced by the code under test, so a regression on
either side of a comparison is caught.
"""

from __future__ import annotations

import contextlib
import io
import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .catalog import (
    DEGENERATE,
    REGULAR,
    ClassificationCase,
    basis_change,
    generators,
    invariance_surface_residual,
    optimal_system,
    similarity_reduction,
)
from .errors import DomainError, NonrealRoot
from .lie_engine import (
    FREE,
    SYMBOLIC,
    AdjointClosedForm,
    AlgebraElement,
    EquivalenceResult,
    LieAlgebra,
    NoSolution,
    adjoint_action,
    element_str,
    equivalence_solve,
    evaluate_element,
)
from .numeric_verify import (
    GridSpec,
    QuadratureSpec,
    evolve,
    residual_system,
    rl_derivative_numeric,
    sequential_residual,
)
from .solutions import (
    family_5_1,
    family_5_4,
    family_5_5,
    family_19,
    family_20_implicit,
    family_21,
    family_22,
    lemma2_solve,
)
from .symbolic_core import (
    AlphaParameter,
    ScalarExpr,
    gamma_fraction,
    is_nonpositive_integer,
)

F = Fraction

__all__ = [
    "Check",
    "CriterionResult",
    "CRITERION_KEYS",
    "adjoint_mismatches",
    "build_case_algebra",
    "coefficient_note",
    "commutator_mismatches",
    "run_all",
]


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    """One atomic comparison inside a criterion."""

    label: str
    ok: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"label": self.label, "ok": self.ok, "detail": self.detail}


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one acceptance criterion: a list of checks plus timing."""

    index: int
    key: str
    title: str
    checks: tuple
    duration: float
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        good = sum(1 for c in self.checks if c.ok)
        return (
            f"criterion {self.index:>2} [{self.key}] {status} "
            f"({self.duration:.2f}s, {good}/{len(self.checks)} checks): {self.title}"
        )

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "key": self.key,
            "title": self.title,
            "passed": self.passed,
            "duration": self.duration,
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }


def _finish(
    index: int,
    key: str,
    title: str,
    checks: list,
    t0: float,
    budget: Optional[float] = None,
    notes: Sequence[str] = (),
) -> CriterionResult:
    elapsed = time.perf_counter() - t0
    if budget is not None:
        checks.append(
            Check(
                f"runtime {elapsed:.2f}s within the {budget:g}s budget",
                elapsed < budget,
            )
        )
    return CriterionResult(
        index=index,
        key=key,
        title=title,
        checks=tuple(checks),
        duration=elapsed,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Shared embedded expectations
# ---------------------------------------------------------------------------

_A13 = AlphaParameter(F(1, 3))
_S0 = ScalarExpr.of(0)
_S1 = ScalarExpr.of(1)

# (1−α)/α, the recurring α-dependent structure coefficient.
_K_ALPHA = ScalarExpr.from_polys((1, -1), (0, 1))

CASE_LABELS = ("1", "2.1", "2.2")


def build_case_algebra(case_label: str, alpha: AlphaParameter,
                       m=None, k=1) -> LieAlgebra:
    """The production algebra for one classification case: the raw X-basis
    for the generic case, the adapted Y-basis for the power-law branches."""
    if case_label == "1":
        return generators(ClassificationCase.generic(), alpha).algebra()
    if case_label == "2.1":
        if m is None:
            raise DomainError("the regular power-law branch needs m")
        case = ClassificationCase.power_law(k, m)
        return basis_change(REGULAR, generators(case, alpha))
    if case_label == "2.2":
        case = ClassificationCase.degenerate(k, alpha)
        return basis_change(DEGENERATE, generators(case, alpha))
    raise DomainError(f"unknown case label {case_label!r} (expected 1, 2.1 or 2.2)")


def _expected_structure(case_label: str) -> list:
    """Hand-entered commutator tables, dense c[i][j] coordinate tuples.

    Generic case (X₁, X₂, X₃): [X₁,X₃] = X₁, [X₂,X₃] = ((1−α)/α)·X₂.
    Regular branch (Y₁..Y₄):   [Y₁,Y₂] = Y₂, [Y₃,Y₄] = Y₄, blocks commute.
    Degenerate branch:         [Y₁,Y₃] = Y₁, [Y₂,Y₃] = ((1−α)/α)·Y₂,
                               Y₄ central.
    """
    if case_label == "1":
        n, upper = 3, {(0, 2): {0: _S1}, (1, 2): {1: _K_ALPHA}}
    elif case_label == "2.1":
        n, upper = 4, {(0, 1): {1: _S1}, (2, 3): {3: _S1}}
    elif case_label == "2.2":
        n, upper = 4, {(0, 2): {0: _S1}, (1, 2): {1: _K_ALPHA}}
    else:
        raise DomainError(f"unknown case label {case_label!r}")
    dense = [[[_S0] * n for _ in range(n)] for _ in range(n)]
    for (i, j), row in upper.items():
        for kk, coeff in row.items():
            dense[i][j][kk] = coeff
            dense[j][i][kk] = -coeff
    return dense


def _expected_adjoint(case_label: str) -> Optional[dict]:
    """Hand-entered adjoint tables as (i, j) → {k: (c0, c1, rate)} with the
    k-th coordinate of Ad(e^{εYᵢ})Yⱼ equal to (c0 + c1·ε)·e^{−rate·ε}.
    Rows not listed are the identity.  The generic case has no published
    adjoint table, so it returns None and the adjoint comparison is skipped.
    """
    if case_label == "2.1":
        return {
            (0, 1): {1: (_S1, _S0, _S1)},                      # e^{−ε}·Y₂
            (1, 0): {0: (_S1, _S0, _S0), 1: (_S0, _S1, _S0)},  # Y₁ + ε·Y₂
            (2, 3): {3: (_S1, _S0, _S1)},                      # e^{−ε}·Y₄
            (3, 2): {2: (_S1, _S0, _S0), 3: (_S0, _S1, _S0)},  # Y₃ + ε·Y₄
        }
    if case_label == "2.2":
        return {
            (0, 2): {2: (_S1, _S0, _S0), 0: (_S0, -_S1, _S0)},      # Y₃ − ε·Y₁
            (1, 2): {2: (_S1, _S0, _S0), 1: (_S0, -_K_ALPHA, _S0)},  # Y₃ − κε·Y₂
            (2, 0): {0: (_S1, _S0, -_S1)},                          # e^{ε}·Y₁
            (2, 1): {1: (_S1, _S0, -_K_ALPHA)},                     # e^{κε}·Y₂
        }
    return None


def _normalized_entries(form: AdjointClosedForm) -> tuple:
    """Collapse vanishing coordinates to the canonical (0, 0, 0) triple.

    The closed-form builder may attach a rate to a coordinate whose
    coefficients are both zero (harmless: the coordinate is identically
    zero); equality against the expected table must not depend on that.
    """
    out = []
    for c0, c1, rate in form.entries:
        if c0.is_zero() and c1.is_zero():
            out.append((_S0, _S0, _S0))
        else:
            out.append((c0, c1, rate))
    return tuple(out)


def commutator_mismatches(alg: LieAlgebra, case_label: str) -> list:
    """Exact (zero-tolerance) comparison of the algebra's structure constants
    against the embedded table; returns human-readable mismatch lines."""
    expected = _expected_structure(case_label)
    errs = []
    n = alg.dim
    if n != len(expected):
        return [f"dimension {n} != expected {len(expected)}"]
    for i in range(n):
        for j in range(n):
            got = tuple(alg.structure[i][j])
            want = tuple(expected[i][j])
            if got != want:
                errs.append(
                    f"[{alg.names[i]}, {alg.names[j]}]: computed "
                    f"{element_str(alg, AlgebraElement(got))}, expected "
                    f"{element_str(alg, AlgebraElement(want))}"
                )
    return errs


def adjoint_mismatches(alg: LieAlgebra, case_label: str) -> list:
    """Exact comparison of every Ad(e^{εYᵢ})Yⱼ closed form against the
    embedded adjoint table (empty list for the generic case)."""
    table = _expected_adjoint(case_label)
    if table is None:
        return []
    errs = []
    n = alg.dim
    for i in range(n):
        for j in range(n):
            form = adjoint_action(alg.basis_element(i), alg.basis_element(j),
                                  SYMBOLIC, alg)
            got = _normalized_entries(form)
            row = table.get((i, j), {j: (_S1, _S0, _S0)})
            want = tuple(row.get(kk, (_S0, _S0, _S0)) for kk in range(n))
            if got != want:
                shown = AdjointClosedForm(entries=want, names=alg.names)
                errs.append(
                    f"Ad(e^(ε·{alg.names[i]})) {alg.names[j]}: computed "
                    f"{form}, expected {shown}"
                )
    return errs


# ---------------------------------------------------------------------------
# Criterion 1 — commutator and adjoint tables, symbolic α, rational m
# ---------------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    """Structure constants and adjoint closed forms match the embedded
    tables exactly (symbolic in α, sampled over rational m), within 1s."""
    t0 = time.perf_counter()
    checks = []

    builds = [("1", _A13, None)]
    builds += [("2.1", _A13, mm) for mm in (F(2), F(-1, 3), F(5, 7))]
    builds += [("2.2", AlphaParameter(av), None)
               for av in (F(1, 3), F(1, 4), F(2, 5))]

    for label, alpha, mm in builds:
        alg = build_case_algebra(label, alpha, m=mm)
        tag = f"case {label}" + (f", m = {mm}" if mm is not None else "")
        if label == "2.2":
            tag += f", m = {alpha.value / (1 - 2 * alpha.value)} (α = {alpha})"
        errs = commutator_mismatches(alg, label)
        checks.append(Check(
            f"{tag}: commutator table matches symbolically in α",
            not errs, "; ".join(errs)))
        if label != "1":
            aerrs = adjoint_mismatches(alg, label)
            checks.append(Check(
                f"{tag}: adjoint table matches symbolically in α",
                not aerrs, "; ".join(aerrs)))

    return _finish(
        1, "tables",
        "commutator and adjoint tables reproduce the embedded transcriptions",
        checks, t0, budget=1.0,
    )


# ---------------------------------------------------------------------------
# Criterion 2 — exact power rule vs the singular-kernel quadrature
# ---------------------------------------------------------------------------

_PS = (F(-3, 4), F(-1, 2), F(-1, 4), F(1, 4), F(1, 2), F(1), F(3, 2), F(5, 2), F(3))
_ALPHAS = (F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4))
_TIMES = (0.5, 1.0, 2.0)


def _power_rule_value(p: Fraction, alpha: Fraction, t: float) -> float:
    """Independent closed form for the fractional derivative of t^p:
    Γ(p+1)/Γ(p+1−α)·t^{p−α}, exactly zero when the denominator sits on a
    gamma pole (p+1−α a nonpositive integer)."""
    den = p + 1 - alpha
    if is_nonpositive_integer(den):
        return 0.0
    return gamma_fraction(p + 1) / gamma_fraction(den) * t ** float(p - alpha)


def _compare_power_case(p: Fraction, alpha: Fraction, t: float):
    """(is_kernel, error) for one (p, α, t) comparison: relative error for
    nonvanishing values, absolute for kernel hits."""
    exact = _power_rule_value(p, alpha, t)
    numeric = rl_derivative_numeric(
        lambda s: s ** float(p), AlphaParameter(alpha), t,
        spec=QuadratureSpec(p=float(p)),
    )
    if exact == 0.0:
        return True, abs(numeric)
    return False, abs(numeric - exact) / abs(exact)


def criterion_2(seed: int = 0) -> CriterionResult:
    """The exact power rule and the quadrature oracle agree to 1e-6 relative
    over a 135-case matrix (1e-8 absolute on kernel hits), within 5s."""
    t0 = time.perf_counter()
    checks = []
    total = 0

    for alpha in _ALPHAS:
        worst_rel, worst_abs, kernel_hits = 0.0, 0.0, 0
        for p in _PS:
            for t in _TIMES:
                is_kernel, err = _compare_power_case(p, alpha, t)
                total += 1
                if is_kernel:
                    kernel_hits += 1
                    worst_abs = max(worst_abs, err)
                else:
                    worst_rel = max(worst_rel, err)
        ok = worst_rel <= 1e-6 and worst_abs <= 1e-8
        detail = f"max rel {worst_rel:.2e}"
        if kernel_hits:
            detail += f"; {kernel_hits} kernel hits, max abs {worst_abs:.2e}"
        checks.append(Check(
            f"α = {alpha}: {len(_PS) * len(_TIMES)} (p, t) cases agree "
            "(rel ≤ 1e-06, kernel abs ≤ 1e-08)", ok, detail))

    worst = 0.0
    for alpha in _ALPHAS:
        for t in _TIMES:
            is_kernel, err = _compare_power_case(alpha - 1, alpha, t)
            if not is_kernel:
                worst = math.inf
                break
            worst = max(worst, err)
    checks.append(Check(
        "kernel exponent p = α−1 is annihilated to ≤ 1e-08 abs at every (α, t)",
        worst <= 1e-8, f"max abs {worst:.2e}"))

    rng = random.Random(seed)
    worst_rel, worst_abs = 0.0, 0.0
    for _ in range(15):
        p = F(rng.randint(-3, 12), 4)
        alpha = rng.choice(_ALPHAS)
        t = rng.choice(_TIMES)
        is_kernel, err = _compare_power_case(p, alpha, t)
        if is_kernel:
            worst_abs = max(worst_abs, err)
        else:
            worst_rel = max(worst_rel, err)
    checks.append(Check(
        f"15 seeded random (p, α, t) draws agree (seed = {seed})",
        worst_rel <= 1e-6 and worst_abs <= 1e-8,
        f"max rel {worst_rel:.2e}, max kernel abs {worst_abs:.2e}"))

    checks.append(Check(
        "matrix covers at least 60 (p, α, t) triples", total >= 60,
        f"{total} triples"))

    return _finish(
        2, "power-rule",
        "exact power rule agrees with the singular-kernel quadrature",
        checks, t0, budget=5.0,
    )


# ---------------------------------------------------------------------------
# Criterion 3 — closed-form families satisfy the system
# ---------------------------------------------------------------------------


def criterion_3() -> CriterionResult:
    """Every closed-form family has vanishing whole-system residuals on its
    reference grid, and the implicit curve agrees with the two closed forms
    it degenerates to, all within 30s."""
    t0 = time.perf_counter()
    checks = []

    exact_cases = [
        ("5.1 (a=1, α=1/2)", family_5_1(1, 1, 1, F(1, 2))),
        ("5.1 (a=0, α=1/2)", family_5_1(0, 1.0, 1.0, F(1, 2))),
        ("19 (m=2, k=1, α=1/3)", family_19(2, 1, F(1, 3))),
        ("19 (m=-1/3, k=1, α=1/2)", family_19(F(-1, 3), 1, F(1, 2))),
        ("21 (m=1/2, k=1, α=1/5, c2=1)", family_21(F(1, 2), 1, F(1, 5), 1.0)),
        ("22 (k=1, α=1/2, c1=1)", family_22(1, F(1, 2), 1.0, 0.0)),
        ("5.4 (a1=a2=1, α=1/3)", family_5_4(1, 1, 1.0, F(1, 3))),
    ]
    for label, fam in exact_cases:
        report = residual_system(fam, fam.case)
        checks.append(Check(
            f"family {label}: max residual ≤ 1e-08 on the reference grid",
            report.max_residual <= 1e-8 and report.path == "exact-monomial",
            f"max {report.max_residual:.2e}, path {report.path}"))

    report = residual_system(family_5_5(1, 5.0, 1.0, 1, F(1, 3)),
                             family_5_5(1, 5.0, 1.0, 1, F(1, 3)).case)
    checks.append(Check(
        "family 5.5 (a=1, k=1, α=1/3): max residual ≤ 1e-05 via quadrature",
        report.max_residual <= 1e-5 and report.path == "quadrature",
        f"max {report.max_residual:.2e}, path {report.path}"))

    try:
        family_19(2, 1, F(1, 2))
        checks.append(Check(
            "quoted family-19 benchmark tuple (m=2, k=1, α=1/2) is nonreal",
            False, "construction unexpectedly succeeded"))
    except NonrealRoot as exc:
        checks.append(Check(
            "quoted family-19 benchmark tuple (m=2, k=1, α=1/2) is nonreal "
            "(documented substitute: m=-1/3)", True, str(exc)))

    # implicit curve vs closed form, power-pair limit (c1 = 0)
    curve = family_20_implicit(2, 1, F(1, 3), 0.0, 0.0, psi_range=(0.0, 3.0))
    fam = family_21(2, 1, F(1, 3), 0.0)
    lo, hi = curve.x_range()
    xs = np.linspace(lo + 0.15 * (hi - lo), hi - 0.05 * (hi - lo), 11)
    worst = max(
        max(abs(curve.u(x, 1.0) - fam.u(x, 1.0)) for x in xs),
        max(abs(curve.v(x, 1.0) - fam.v(x, 1.0)) for x in xs),
    )
    checks.append(Check(
        "curve 20 (m=2, α=1/3, c1=0) matches family 21 to ≤ 1e-06",
        worst <= 1e-6, f"max abs {worst:.2e} over {len(xs)} points"))

    # implicit curve vs closed form, tangent limit (m = −1/2)
    curve = family_20_implicit(F(-1, 2), 1, F(1, 2), 1.0, 0.0,
                               psi_range=(-2.0, 2.0))
    fam = family_22(1, F(1, 2), 1.0, 0.0)
    lo, hi = curve.x_range()
    xs = np.linspace(lo + 0.05, hi - 0.05, 11)
    worst = max(
        max(abs(curve.u(x, 1.0) - fam.u(x, 1.0)) for x in xs),
        max(abs(curve.v(x, 1.0) - fam.v(x, 1.0)) for x in xs),
    )
    checks.append(Check(
        "curve 20 (m=-1/2, α=1/2, c1=1) matches family 22 to ≤ 1e-06",
        worst <= 1e-6, f"max abs {worst:.2e} over {len(xs)} points"))

    return _finish(
        3, "residuals",
        "closed-form families satisfy the system on their reference grids",
        checks, t0, budget=30.0,
    )


# ---------------------------------------------------------------------------
# Criterion 4 — power-ansatz solvability
# ---------------------------------------------------------------------------

# (m, α, (a₁, a₂, b₁, b₂), frozen c₁, frozen c₂) — 20-digit references.
_LEMMA_TUPLES = (
    (F(2), F(1, 3), (3, 3, 1, 3),
     0.72110037658417837671, 0.30615512760618780514),
    (F(1), F(1, 4), (1, 1, 1, 1),
     0.94937048621163327799, 1.3127274936234578522),
    (F(-2), F(1, 2), (1, 1, 1, 1),
     1.3915788418568703011, 1.3724098985970879367),
    (F(3), F(1, 3), (1, 1, 1, 1),
     0.90000390979003791023, 1.0907473689123309663),
    (F(-1, 3), F(1, 2), (1, 1, 1, 1),
     6.0858061945018457051, 4.0450539844910401126),
)


def criterion_4() -> CriterionResult:
    """The power ansatz φ = c₁z^{λ₁}, ψ = c₂z^{λ₂} solves the coupled pair
    with λ₁ = −α/m and λ₂ = −(m+1)α/m exactly and residuals ≤ 1e-10, for at
    least five admissible coefficient tuples."""
    t0 = time.perf_counter()
    checks = []

    for m, alpha, coeffs, c1_ref, c2_ref in _LEMMA_TUPLES:
        a1, a2, b1, b2 = coeffs
        tag = f"(m={m}, α={alpha}, coefficients {coeffs})"
        sol = lemma2_solve(m, alpha, a1, a2, b1, b2)

        lam1, lam2 = sol.lambda1_value, sol.lambda2_value
        checks.append(Check(
            f"{tag}: λ₁ = −α/m and λ₂ = −(m+1)α/m exactly",
            lam1 == -alpha / m and lam2 == -(m + 1) * alpha / m,
            f"λ₁ = {lam1}, λ₂ = {lam2}"))
        checks.append(Check(
            f"{tag}: exponent compatibility λ₁−α = λ₂ and λ₂−α = (2m+1)λ₁",
            lam1 - alpha == lam2 and lam2 - alpha == (2 * m + 1) * lam1))

        rel1 = abs(sol.c1 - c1_ref) / abs(c1_ref)
        rel2 = abs(sol.c2 - c2_ref) / abs(c2_ref)
        checks.append(Check(
            f"{tag}: amplitudes match the frozen references to 1e-12",
            rel1 <= 1e-12 and rel2 <= 1e-12,
            f"rel errors {rel1:.2e}, {rel2:.2e}"))

        # independent coefficient residuals through the bare power rule
        g1 = math.gamma(float(lam1 + 1)) / math.gamma(float(lam1 + 1 - alpha))
        g2 = math.gamma(float(lam2 + 1)) / math.gamma(float(lam2 + 1 - alpha))
        r1 = sol.c1 * g1 - (a1 + a2 * float(lam2)) * sol.c2
        r2 = sol.c2 * g2 - (b1 + b2 * float(lam1)) * sol.c1 ** float(2 * m + 1)
        checks.append(Check(
            f"{tag}: independent coefficient residuals ≤ 1e-10",
            abs(r1) <= 1e-10 and abs(r2) <= 1e-10,
            f"|r₁| = {abs(r1):.2e}, |r₂| = {abs(r2):.2e}"))

        pr1, pr2 = sol.ode_residuals()
        checks.append(Check(
            f"{tag}: production residual route ≤ 1e-10",
            abs(pr1) <= 1e-10 and abs(pr2) <= 1e-10,
            f"|r₁| = {abs(pr1):.2e}, |r₂| = {abs(pr2):.2e}"))

    checks.append(Check(
        "at least five admissible tuples exercised",
        len(_LEMMA_TUPLES) >= 5, f"{len(_LEMMA_TUPLES)} tuples"))

    return _finish(
        4, "lemma2",
        "power-ansatz solvability: exact exponents, vanishing residuals",
        checks, t0,
    )


# ---------------------------------------------------------------------------
# Criterion 5 — invariance of each family under its generating element
# ---------------------------------------------------------------------------


def _generator_invariance(family):
    """Invariance-surface residual of a family against the optimal-system
    element recorded as its generator, analytic derivative path."""
    elements = {e.id: e for e in optimal_system(family.case, family.alpha)}
    element = elements[family.generator_id]
    params = dict(family.generator_params) if family.generator_params else None
    field = generators(family.case, family.alpha).algebra().field_of(
        element.element(params))
    return invariance_surface_residual(
        field, family.u_fn(), family.v_fn(), family.reference_grid,
        alpha=family.alpha)


def _curve_solution_fields(curve, m: Fraction, alpha: Fraction):
    """Analytic (x, t) fields u = t^{−α/m}φ(x), v = t^{−(m+1)α/m}ψ(x) built
    from an implicit-curve profile, with exact partial derivatives."""
    pu = float(-alpha / m)
    pv = float(-(m + 1) * alpha / m)

    def u(x, t):
        return t ** pu * curve.phi_of_x(x)

    def u_dx(x, t):
        return t ** pu * curve.phi_of_x_prime(x)

    def u_dt(x, t):
        return pu * t ** (pu - 1.0) * curve.phi_of_x(x)

    u.dx, u.dt = u_dx, u_dt

    def v(x, t):
        return t ** pv * curve.psi_of_x(x)

    def v_dx(x, t):
        return t ** pv * curve.psi_of_x_prime(x)

    def v_dt(x, t):
        return pv * t ** (pv - 1.0) * curve.psi_of_x(x)

    v.dx, v.dt = v_dx, v_dt
    return u, v


def criterion_5() -> CriterionResult:
    """Each catalog family is annihilated by its generating symmetry on its
    reference grid (analytic derivative path, residual ≤ 1e-8)."""
    t0 = time.perf_counter()
    checks = []

    families = [
        ("5.1 (a=1, α=1/2)", family_5_1(1, 1, 1, F(1, 2))),
        ("19 (m=2, k=1, α=1/3)", family_19(2, 1, F(1, 3))),
        ("21 (m=1/2, k=1, α=1/5, c2=1)", family_21(F(1, 2), 1, F(1, 5), 1.0)),
        ("22 (k=1, α=1/2, c1=1)", family_22(1, F(1, 2), 1.0, 0.0)),
        ("5.4 (a1=a2=1, α=1/3)", family_5_4(1, 1, 1.0, F(1, 3))),
        ("5.5 (a=1, k=1, α=1/3)", family_5_5(1, 5.0, 1.0, 1, F(1, 3))),
    ]
    for label, fam in families:
        report = _generator_invariance(fam)
        checks.append(Check(
            f"family {label} is invariant under {fam.generator_id} (≤ 1e-08)",
            report.path == "analytic" and report.max_residual <= 1e-8,
            f"max {report.max_residual:.2e}, path {report.path}"))

    # the implicit curve: u = t^{−α/m}φ(x), v = t^{−(m+1)α/m}ψ(x) under the
    # pure-scaling element X₃ − X₄
    m, alpha = F(2), F(1, 3)
    curve = family_20_implicit(m, 1, alpha, 0.0, 0.0, psi_range=(0.0, 3.0))
    case = ClassificationCase.power_law(1, m)
    elements = {e.label: e for e in optimal_system(case, AlphaParameter(alpha))}
    field = generators(case, AlphaParameter(alpha)).algebra().field_of(
        elements["U5"].element(None))
    u_fn, v_fn = _curve_solution_fields(curve, m, alpha)
    lo, hi = curve.x_range()
    grid = GridSpec(lo + 0.15 * (hi - lo), hi - 0.05 * (hi - lo), 10,
                    0.5, 2.0, 6)
    report = invariance_surface_residual(field, u_fn, v_fn, grid,
                                         alpha=AlphaParameter(alpha))
    checks.append(Check(
        "curve 20 (m=2, α=1/3) is invariant under Case2.1-U5 (≤ 1e-08)",
        report.path == "analytic" and report.max_residual <= 1e-8,
        f"max {report.max_residual:.2e}, path {report.path}"))

    return _finish(
        5, "invariance",
        "each family is invariant under its generating element",
        checks, t0,
    )


# ---------------------------------------------------------------------------
# Criterion 6 — adjoint equivalences reach their normal forms
# ---------------------------------------------------------------------------


def _reapply_error(alg: LieAlgebra, src: AlgebraElement, conj_index: int,
                   res: EquivalenceResult, want: Sequence[float],
                   alpha: AlphaParameter) -> float:
    """Re-apply the adjoint map at the solved ε and compare against
    scale·target coordinate by coordinate."""
    out = adjoint_action(alg.basis_element(conj_index), src, res.epsilon,
                         alg, alpha)
    got = evaluate_element(out, alpha)
    return max(abs(g - res.scale * w) for g, w in zip(got, want))


def criterion_6() -> CriterionResult:
    """The scaling-block normal forms are reached with concrete ε and scale,
    re-application errors ≤ 1e-10; the unreachable quoted form is shown to
    have no solution."""
    t0 = time.perf_counter()
    checks = []

    m = F(2)
    alpha = _A13
    case = ClassificationCase.power_law(1, m)
    alg = basis_change(REGULAR, generators(case, alpha))
    delta = case.delta_at(alpha)          # −1/3 at (m, α) = (2, 1/3)
    ma = m * alpha.value                  # 2/3

    # The quoted first normal form Y₁ + a·Y₃ needs a Y₁ component, but the
    # conjugations fixing the span of {Y₂, Y₃} can never produce one.
    kappa = delta / ma
    res = equivalence_solve(
        alg.element((0, 1, kappa, 0)), alg.element((1, 0, FREE, 0)),
        alg.basis_element(0), alg, alpha=alpha)
    checks.append(Check(
        "the quoted normal form Y₁ + a·Y₃ for Y₂ + (Δa/(mα))·Y₃ is unreachable "
        "(documented discrepancy)",
        isinstance(res, NoSolution),
        getattr(res, "reason", "unexpectedly solved")))

    # Reachable normal form: Y₂ + (Δa/(mα))·Y₃ ~ Y₂ + sign(Δa/(mα))·Y₃.
    for a in (F(1), F(-1)):
        kappa = delta / ma * a            # ∓1/2
        sign = 1 if kappa > 0 else -1
        src = alg.element((0, 1, kappa, 0))
        res = equivalence_solve(src, alg.element((0, 1, sign, 0)),
                                alg.basis_element(0), alg, alpha=alpha)
        ok = (
            isinstance(res, EquivalenceResult)
            and abs(res.epsilon - math.log(2.0)) <= 1e-12
            and abs(res.scale - 0.5) <= 1e-12
            and res.residual <= 1e-12
        )
        detail = (f"ε = {res.epsilon:.12f}, scale = {res.scale:.12f}"
                  if isinstance(res, EquivalenceResult) else res.reason)
        checks.append(Check(
            f"Y₂ + ({kappa})·Y₃ ~ Y₂ + ({sign})·Y₃ via Ad(e^(ε·Y₁)): "
            "ε = ln 2, scale = 1/2", ok, detail))
        if isinstance(res, EquivalenceResult):
            err = _reapply_error(alg, src, 0, res,
                                 (0.0, 1.0, float(sign), 0.0), alpha)
            checks.append(Check(
                f"re-applied map reproduces scale·target to ≤ 1e-10 (a = {a})",
                err <= 1e-10, f"max coordinate error {err:.2e}"))

    # Δ·Y₁ + a·Y₄ ~ Y₁ + a·sign(Δ)·Y₄ needs a negative scale at Δ < 0.
    for a in (F(1), F(-1)):
        src = alg.element((delta, 0, 0, a))
        target = alg.element((1, 0, 0, a * (1 if delta > 0 else -1)))
        blocked = equivalence_solve(src, target, alg.basis_element(2), alg,
                                    alpha=alpha)
        checks.append(Check(
            f"Δ·Y₁ + ({a})·Y₄: positive-scale matching fails at Δ = {delta} < 0",
            isinstance(blocked, NoSolution),
            getattr(blocked, "reason", "unexpectedly solved")))
        res = equivalence_solve(src, target, alg.basis_element(2), alg,
                                alpha=alpha, allow_negative_scale=True)
        ok = (
            isinstance(res, EquivalenceResult)
            and abs(res.epsilon - math.log(3.0)) <= 1e-12
            and abs(res.scale - float(delta)) <= 1e-12
            and res.residual <= 1e-12
        )
        detail = (f"ε = {res.epsilon:.12f}, scale = {res.scale:.12f}"
                  if isinstance(res, EquivalenceResult) else res.reason)
        checks.append(Check(
            f"Δ·Y₁ + ({a})·Y₄ ~ Y₁ + ({a * (1 if delta > 0 else -1)})·Y₄ "
            "via Ad(e^(ε·Y₃)): ε = ln 3, scale = Δ", ok, detail))
        if isinstance(res, EquivalenceResult):
            want = (1.0, 0.0, 0.0, float(a * (1 if delta > 0 else -1)))
            err = _reapply_error(alg, src, 2, res, want, alpha)
            checks.append(Check(
                f"re-applied map reproduces scale·target to ≤ 1e-10 "
                f"(Δ-branch, a = {a})", err <= 1e-10,
                f"max coordinate error {err:.2e}"))

    # Degenerate branch: Y₁ + a·Y₂ ± Y₄ ~ Y₁ ± Y₂ + b·Y₄ with the stated
    # sign of b, solved through the scaling conjugation Ad(e^(ε·Y₃)).
    alg22 = basis_change(DEGENERATE,
                         generators(ClassificationCase.degenerate(1, alpha),
                                    alpha))
    variants = (
        (F(2), 1, 1, 2.0), (F(2), -1, 1, -2.0),
        (F(-2), 1, -1, 2.0), (F(-2), -1, -1, -2.0),
    )
    for a, last, ty2, expected_b in variants:
        src = alg22.element((1, a, 0, last))
        res = equivalence_solve(src, alg22.element((1, ty2, 0, FREE)),
                                alg22.basis_element(2), alg22, alpha=alpha)
        got_b = res.filled.get(3) if isinstance(res, EquivalenceResult) else None
        ok = (
            isinstance(res, EquivalenceResult)
            and res.scale > 0
            and abs(res.epsilon + math.log(abs(float(a)))) <= 1e-12
            and got_b is not None
            and abs(got_b - expected_b) <= 1e-10
            and (got_b > 0) == (expected_b > 0)
        )
        detail = (f"ε = {res.epsilon:.12f}, scale = {res.scale:.12f}, "
                  f"b = {got_b}" if isinstance(res, EquivalenceResult)
                  else res.reason)
        checks.append(Check(
            f"Y₁ + ({a})·Y₂ + ({last})·Y₄ ~ Y₁ + ({ty2})·Y₂ + b·Y₄ with "
            f"b = {expected_b}", ok, detail))
        if isinstance(res, EquivalenceResult) and got_b is not None:
            want = (1.0, float(ty2), 0.0, got_b)
            err = _reapply_error(alg22, src, 2, res, want, alpha)
            checks.append(Check(
                f"re-applied map reproduces scale·target to ≤ 1e-10 "
                f"(a = {a}, {'+' if last > 0 else '-'}Y₄)", err <= 1e-10,
                f"max coordinate error {err:.2e}"))

    return _finish(
        6, "equivalences",
        "adjoint equivalences reach their stated normal forms",
        checks, t0,
    )


# ---------------------------------------------------------------------------
# Criterion 7 — the sequential consequence
# ---------------------------------------------------------------------------


def criterion_7() -> CriterionResult:
    """Applying the fractional derivative twice and substituting both
    equations leaves residuals ≤ 1e-8 for every family with monomial u."""
    t0 = time.perf_counter()
    checks = []
    families = [
        ("5.1 (a=1, α=1/2)", family_5_1(1, 1, 1, F(1, 2))),
        ("5.1 (a=0, α=1/2)", family_5_1(0, 1.0, 1.0, F(1, 2))),
        ("19 (m=2, k=1, α=1/3)", family_19(2, 1, F(1, 3))),
        ("19 (m=-1/3, k=1, α=1/2)", family_19(F(-1, 3), 1, F(1, 2))),
        ("21 (m=1/2, k=1, α=1/5, c2=1)", family_21(F(1, 2), 1, F(1, 5), 1.0)),
        ("22 (k=1, α=1/2, c1=1)", family_22(1, F(1, 2), 1.0, 0.0)),
        ("5.4 (a1=a2=1, α=1/3)", family_5_4(1, 1, 1.0, F(1, 3))),
        ("5.5 (a=1, k=1, α=1/3)", family_5_5(1, 5.0, 1.0, 1, F(1, 3))),
    ]
    for label, fam in families:
        report = sequential_residual(fam, fam.case)
        checks.append(Check(
            f"family {label}: sequential residual ≤ 1e-08 "
            "(exact monomial route)",
            report.path == "exact-monomial" and report.max_residual <= 1e-8,
            f"max {report.max_residual:.2e}, path {report.path}"))
    return _finish(
        7, "sequential",
        "the double-derivative consequence holds for monomial-u families",
        checks, t0,
    )


# ---------------------------------------------------------------------------
# Criterion 8 — branch-merge coincidences
# ---------------------------------------------------------------------------


def _smooth_phi(z: float) -> float:
    return 2.0 + math.sin(0.7 * z)


def _smooth_phi_prime(z: float) -> float:
    return 0.7 * math.cos(0.7 * z)


def _smooth_psi(z: float) -> float:
    return 1.5 + math.cos(0.4 * z)


def _smooth_psi_prime(z: float) -> float:
    return -0.4 * math.sin(0.4 * z)


_GRID10 = GridSpec(0.5, 2.0, 10, 0.5, 2.0, 10)


def _max_form_gap(fa, fb, grid: GridSpec) -> float:
    worst = 0.0
    for x in grid.xs():
        for t in grid.ts():
            worst = max(worst, abs(fa(x, t) - fb(x, t)))
    return worst


def _translation_form(a: Fraction):
    """u = φ(t), v = ψ(t) + a·x·t^{α−1} at α = 1/3, analytic derivatives."""
    av = float(a)

    def u(x, t):
        return _smooth_phi(t)

    u.dx = lambda x, t: 0.0
    u.dt = lambda x, t: _smooth_phi_prime(t)

    def v(x, t):
        return _smooth_psi(t) + av * x * t ** (-2.0 / 3.0)

    v.dx = lambda x, t: av * t ** (-2.0 / 3.0)
    v.dt = lambda x, t: (_smooth_psi_prime(t)
                         - (2.0 / 3.0) * av * x * t ** (-5.0 / 3.0))
    return u, v


def _scaling_form(a: Fraction):
    """u = x^a·φ(z), v = x^{2a}·ψ(z) with z = t·x^{3(a−1)} (α = 1/3, m = 1)."""
    av = float(a)
    ez = 3.0 * (av - 1.0)

    def u(x, t):
        return x ** av * _smooth_phi(t * x ** ez)

    def v(x, t):
        return x ** (2.0 * av) * _smooth_psi(t * x ** ez)

    return u, v


def _log_form():
    """u = t^{−1/3}·φ(x), v = t^{−2/3}·(ψ(x) − (1/3)·ln t), with analytic
    derivatives (α = 1/3, unit scaling parameter)."""

    def u(x, t):
        return t ** (-1.0 / 3.0) * _smooth_phi(x)

    u.dx = lambda x, t: t ** (-1.0 / 3.0) * _smooth_phi_prime(x)
    u.dt = lambda x, t: (-1.0 / 3.0) * t ** (-4.0 / 3.0) * _smooth_phi(x)

    def v(x, t):
        return t ** (-2.0 / 3.0) * (_smooth_psi(x) - math.log(t) / 3.0)

    v.dx = lambda x, t: t ** (-2.0 / 3.0) * _smooth_psi_prime(x)
    v.dt = lambda x, t: ((-2.0 / 3.0) * t ** (-5.0 / 3.0)
                         * (_smooth_psi(x) - math.log(t) / 3.0)
                         - t ** (-5.0 / 3.0) / 3.0)
    return u, v


def criterion_8() -> CriterionResult:
    """At the branch-merge point m = α/(1−2α) (α = 1/3 ⇒ m = 1), the three
    element coincidences across the two power-law branches are exact in
    coordinates and their similarity forms agree pointwise to 1e-10 on a
    10×10 grid."""
    t0 = time.perf_counter()
    checks = []

    alpha = _A13
    af = F(1, 3)
    case21 = ClassificationCase.power_law(1, 1)
    case22 = ClassificationCase.degenerate(1, alpha)
    e21 = {e.label: e for e in optimal_system(case21, alpha)}
    e22 = {e.label: e for e in optimal_system(case22, alpha)}
    alg21 = generators(case21, alpha).algebra()
    alg22 = generators(case22, alpha).algebra()

    # --- coincidence 1: the translation elements are opposite vectors ------
    for a in (F(0), F(1), F(-1)):
        c1 = e21["U1"].element({"a": a}).coordinates
        c2 = e22["U1"].element({"a": a}).coordinates
        checks.append(Check(
            f"U1 coincidence (a = {a}): coordinates are exact negatives",
            all((x + y).is_zero() for x, y in zip(c1, c2))))

        r21 = similarity_reduction(e21["U1"], {"a": a})
        r22 = similarity_reduction(e22["U1"], {"a": a})
        s21u, s21v = r21.build_solution(_smooth_phi, _smooth_psi)
        s22u, s22v = r22.build_solution(_smooth_phi, _smooth_psi)
        gap = max(_max_form_gap(s21u, s22u, _GRID10),
                  _max_form_gap(s21v, s22v, _GRID10))
        checks.append(Check(
            f"U1 coincidence (a = {a}): similarity forms agree to ≤ 1e-10",
            gap <= 1e-10, f"max gap {gap:.2e}"))

        u_tw, v_tw = _translation_form(a)
        twin_gap = max(_max_form_gap(s21u, u_tw, _GRID10),
                       _max_form_gap(s21v, v_tw, _GRID10))
        checks.append(Check(
            f"U1 coincidence (a = {a}): form matches the hand twin to ≤ 1e-12",
            twin_gap <= 1e-12, f"max gap {twin_gap:.2e}"))

        worst = 0.0
        for alg, elt in ((alg21, e21["U1"]), (alg22, e22["U1"])):
            fld = alg.field_of(elt.element({"a": a}))
            rep = invariance_surface_residual(fld, u_tw, v_tw, _GRID10,
                                              alpha=alpha)
            worst = max(worst, rep.max_residual)
        checks.append(Check(
            f"U1 coincidence (a = {a}): the shared form is invariant under "
            "both branch generators (≤ 1e-10)", worst <= 1e-10,
            f"max residual {worst:.2e}"))

    # --- coincidence 2: the free-scaling rays merge -------------------------
    u3 = [c.evaluate(af) for c in e21["U3"].element({"a": F(1)}).coordinates]
    ray = (F(0), F(-3, 2), F(-1), F(1))   # degenerate-branch formula at a = −3/2
    checks.append(Check(
        "U3/U4 coincidence: the regular-branch element equals (2/3)·(the "
        "degenerate-branch ray at a = -3/2) exactly",
        all(ci == F(2, 3) * ri for ci, ri in zip(u3, ray)),
        f"coordinates {[str(c) for c in u3]}"))

    gen = (F(0), F(2, 3), F(-2, 3), F(2, 3))  # regular-branch formula at a = −2/3
    u4 = [c.evaluate(af) for c in e22["U4"].element({"a": F(1)}).coordinates]
    checks.append(Check(
        "U3/U4 coincidence: the regular-branch ray at a = -2/3 equals "
        "(2/3)·(degenerate-branch U4 at a = 1) exactly",
        all(gi == F(2, 3) * ui for gi, ui in zip(gen, u4)),
        f"coordinates {[str(c) for c in u4]}"))

    red = similarity_reduction(e22["U4"], {"a": F(1)})
    su, sv = red.build_solution(_smooth_phi, _smooth_psi)
    u_tw, v_tw = _log_form()
    gap = max(_max_form_gap(su, u_tw, _GRID10),
              _max_form_gap(sv, v_tw, _GRID10))
    checks.append(Check(
        "U3/U4 coincidence: the logarithmic similarity form matches its "
        "hand twin to ≤ 1e-12", gap <= 1e-12, f"max gap {gap:.2e}"))

    worst = 0.0
    for fld in (alg21.field_of(alg21.element(gen)),
                alg22.field_of(e22["U4"].element({"a": F(1)}))):
        rep = invariance_surface_residual(fld, u_tw, v_tw, _GRID10,
                                          alpha=alpha)
        worst = max(worst, rep.max_residual)
    checks.append(Check(
        "U3/U4 coincidence: the logarithmic form is invariant under both "
        "branch generators on the merged ray (≤ 1e-10)", worst <= 1e-10,
        f"max residual {worst:.2e}"))

    # --- coincidence 3: the anisotropic-scaling families merge --------------
    for a in (F(3, 2), F(-1)):
        c1 = e21["U4"].element({"a": a}).coordinates
        c2 = e22["U3"].element({"a": a}).coordinates
        checks.append(Check(
            f"U4/U3 coincidence (a = {a}): coordinates are exact negatives",
            all((x + y).is_zero() for x, y in zip(c1, c2))))

        r21 = similarity_reduction(e21["U4"], {"a": a})
        r22 = similarity_reduction(e22["U3"], {"a": a})
        s21u, s21v = r21.build_solution(_smooth_phi, _smooth_psi)
        s22u, s22v = r22.build_solution(_smooth_phi, _smooth_psi)
        gap = max(_max_form_gap(s21u, s22u, _GRID10),
                  _max_form_gap(s21v, s22v, _GRID10))
        checks.append(Check(
            f"U4/U3 coincidence (a = {a}): similarity forms agree to ≤ 1e-10",
            gap <= 1e-10, f"max gap {gap:.2e}"))

        u_tw, v_tw = _scaling_form(a)
        twin_gap = max(_max_form_gap(s21u, u_tw, _GRID10),
                       _max_form_gap(s22v, v_tw, _GRID10))
        checks.append(Check(
            f"U4/U3 coincidence (a = {a}): forms match the hand twin to "
            "≤ 1e-12", twin_gap <= 1e-12, f"max gap {twin_gap:.2e}"))

    return _finish(
        8, "coincidences",
        "regular and degenerate branches coincide at the merge point",
        checks, t0,
    )


# ---------------------------------------------------------------------------
# Criterion 9 — convergence of the memory-aware stepper
# ---------------------------------------------------------------------------


def criterion_9() -> CriterionResult:
    """The time stepper converges on the closed-form benchmark: halving the
    step shrinks the error by ≥ 1.5×, and the finest error is ≤ 1e-2."""
    t0 = time.perf_counter()
    checks = []
    notes = []

    try:
        family_19(2, 1, F(1, 2))
        checks.append(Check(
            "quoted benchmark tuple (m=2, k=1, α=1/2) is nonreal",
            False, "construction unexpectedly succeeded"))
    except NonrealRoot as exc:
        checks.append(Check(
            "quoted benchmark tuple (m=2, k=1, α=1/2) is nonreal "
            "(documented substitute: m=-1/3, k=1, α=1/2)", True, str(exc)))

    fam = family_19(F(-1, 3), 1, F(1, 2))
    xs = np.linspace(1.0, 2.0, 41)
    ladder = (8, 16, 32, 64)
    errors = []
    for steps in ladder:
        res = evolve(fam.case, fam, 1.0, 2.0, steps, xs, estimate_order=False)
        errors.append(res.errors["max"])
    notes.append("error ladder: " + ", ".join(
        f"{steps} steps → {err:.3e}" for steps, err in zip(ladder, errors)))

    for (s0, e0), (s1, e1) in zip(zip(ladder, errors), zip(ladder[1:], errors[1:])):
        ratio = e0 / e1
        checks.append(Check(
            f"halving {s1}→ error shrinks ≥ 1.5× versus {s0} steps",
            ratio >= 1.5, f"ratio {ratio:.2f} ({e0:.3e} → {e1:.3e})"))
    checks.append(Check(
        f"finest run ({ladder[-1]} steps) has max relative error ≤ 1e-02",
        errors[-1] <= 1e-2, f"error {errors[-1]:.3e}"))

    return _finish(
        9, "stepper",
        "the memory-aware stepper converges on the closed-form benchmark",
        checks, t0, notes=notes,
    )


# ---------------------------------------------------------------------------
# Criterion 10 — the coefficient cross-check note
# ---------------------------------------------------------------------------

_COEFF_HALF = 1.7724538509055160273       # Γ(1/2)/Γ(1) = √π at a = 1
_PRINTED_HALF = 0.56418958354775628695    # 1/Γ(1/2)
_COEFF_THIRD = 1.9783642596467901076      # Γ(1/3)/Γ(2/3) at a = 1
_PRINTED_THIRD = 0.37328217390739522833   # 1/Γ(1/3)


def coefficient_note(family) -> dict:
    """The NOTE record for the linear-diffusion family: its t^{2α−1}
    coefficient as computed (a·Γ(α)/Γ(2α)) next to the printed variant
    (a/Γ(α)), both at the run's α.  The printed variant does not satisfy
    the first equation and is reported for comparison only."""
    computed = family.parameters["coefficient"]
    printed = family.parameters["printed_coefficient"]
    text = (
        f"NOTE: at alpha = {family.alpha}, the t^(2*alpha-1) coefficient in u "
        f"is a*Gamma(alpha)/Gamma(2*alpha) = {computed:.12g}; the printed "
        f"variant a/Gamma(alpha) = {printed:.12g} does not satisfy "
        "D^alpha(u) = v_x and is shown for comparison only."
    )
    return {
        "kind": "note",
        "id": "coefficient-5.1",
        "alpha": str(family.alpha),
        "computed": computed,
        "printed": printed,
        "text": text,
    }


def _verify_via_cli(argv: list) -> tuple:
    """Run the command-line verify in-process and return (exit code, JSON)."""
    from . import cli  # deferred: cli imports this module at top level

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    return code, json.loads(buf.getvalue())


def criterion_10() -> CriterionResult:
    """`verify --family 5.1` emits a NOTE record carrying both coefficient
    variants evaluated at the run's α."""
    t0 = time.perf_counter()
    checks = []

    runs = (
        ("1/2", _COEFF_HALF, _PRINTED_HALF),
        ("1/3", _COEFF_THIRD, _PRINTED_THIRD),
    )
    for alpha_text, coeff_ref, printed_ref in runs:
        code, payload = _verify_via_cli(
            ["verify", "--family", "5.1", "--a", "1", "--alpha", alpha_text])
        notes = [r for r in payload.get("records", ())
                 if r.get("kind") == "note" and r.get("id") == "coefficient-5.1"]
        ok_shape = (
            code == 0
            and payload.get("schema") == "fraclie-report/1"
            and len(notes) == 1
        )
        checks.append(Check(
            f"verify --family 5.1 --alpha {alpha_text} exits 0 with exactly "
            "one coefficient NOTE record", ok_shape,
            f"exit {code}, {len(notes)} note record(s)"))
        if not notes:
            continue
        note = notes[0]
        ok_values = (
            abs(note["computed"] - coeff_ref) <= 1e-12 * coeff_ref
            and abs(note["printed"] - printed_ref) <= 1e-12 * printed_ref
            and note.get("alpha") == alpha_text
            and "NOTE" in note.get("text", "")
            and f"{note['computed']:.12g}" in note["text"]
            and f"{note['printed']:.12g}" in note["text"]
        )
        checks.append(Check(
            f"NOTE at α = {alpha_text} carries a·Γ(α)/Γ(2α) = {coeff_ref:.12g} "
            f"and the printed a/Γ(α) = {printed_ref:.12g}", ok_values,
            note.get("text", "")))

    direct = coefficient_note(family_5_1(1, 1, 1, F(1, 2)))
    checks.append(Check(
        "the note helper and the frozen references agree at α = 1/2",
        abs(direct["computed"] - _COEFF_HALF) <= 1e-12 * _COEFF_HALF
        and abs(direct["printed"] - _PRINTED_HALF) <= 1e-12 * _PRINTED_HALF))

    return _finish(
        10, "note-5.1",
        "verify emits the coefficient cross-check note for family 5.1",
        checks, t0,
    )


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

_CRITERIA = (
    (1, criterion_1),
    (2, criterion_2),
    (3, criterion_3),
    (4, criterion_4),
    (5, criterion_5),
    (6, criterion_6),
    (7, criterion_7),
    (8, criterion_8),
    (9, criterion_9),
    (10, criterion_10),
)

CRITERION_KEYS = (
    "tables", "power-rule", "residuals", "lemma2", "invariance",
    "equivalences", "sequential", "coincidences", "stepper", "note-5.1",
)


def run_all(filter: Optional[str] = None, seed: int = 0) -> list:
    """Run the acceptance matrix (optionally only criteria whose key or
    index matches ``filter``) and return the CriterionResult list."""
    results = []
    for index, fn in _CRITERIA:
        key = CRITERION_KEYS[index - 1]
        if filter and filter not in key and filter != str(index):
            continue
        results.append(fn(seed) if fn is criterion_2 else fn())
    if filter and not results:
        raise DomainError(
            f"filter {filter!r} matches no criterion; keys are "
            f"{', '.join(CRITERION_KEYS)}")
    return results
