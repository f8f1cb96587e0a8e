"""Lie brackets, structure constants, adjoint actions, and conjugation
equivalences for finite-dimensional algebras of vector fields whose
coefficients are :class:`~fraclie.symbolic_core.MonomialSum` values.

Everything is exact in α.  Adjoint actions are produced in closed form
whenever the ad-matrix acts diagonally, nilpotently, or by an eigenvalue on
the element at hand (every algebra in the catalog falls in one of those
buckets); a scaled Taylor series is the numeric fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

from .errors import NotClosed, NotInSpan, Unsupported
from .symbolic_core import (
    VARIABLES,
    AlphaParameter,
    MonomialSum,
    ScalarExpr,
    add as ms_add,
    differentiate,
    multiply as ms_multiply,
)

_ZERO = ScalarExpr.of(0)
_ONE = ScalarExpr.of(1)


def _as_scalar(c) -> ScalarExpr:
    if isinstance(c, ScalarExpr):
        return c
    return ScalarExpr.of(Fraction(c))


# ---------------------------------------------------------------------------
# Vector fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    """First-order operator ξ∂x + τ∂t + μ∂u + φ∂v with MonomialSum
    coefficients (the infinitesimals of a point symmetry)."""

    xi: MonomialSum
    tau: MonomialSum
    mu: MonomialSum
    phi: MonomialSum

    @classmethod
    def zero(cls) -> "VectorField":
        z = MonomialSum.zero()
        return cls(z, z, z, z)

    @classmethod
    def of(cls, xi=None, tau=None, mu=None, phi=None) -> "VectorField":
        z = MonomialSum.zero()
        return cls(xi or z, tau or z, mu or z, phi or z)

    def components(self) -> Tuple[MonomialSum, MonomialSum, MonomialSum, MonomialSum]:
        return (self.xi, self.tau, self.mu, self.phi)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components())

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(ms_add(a, b) for a, b in zip(self.components(), other.components())))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scaled(ScalarExpr.of(-1))

    def scaled(self, c: ScalarExpr) -> "VectorField":
        return VectorField(*(comp.scaled(c) for comp in self.components()))

    def __str__(self) -> str:
        parts = []
        for comp, name in zip(self.components(), VARIABLES):
            if comp.is_zero():
                continue
            cs = str(comp)
            if cs == "1":
                parts.append(f"∂{name}")
            else:
                if len(comp.terms) > 1 or " " in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}·∂{name}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def bracket(x: VectorField, y: VectorField) -> VectorField:
    """Commutator [X, Y]: componentwise Σ_w (X_w ∂_w Y_k − Y_w ∂_w X_k)."""
    xc, yc = x.components(), y.components()
    out = []
    minus_one = ScalarExpr.of(-1)
    for k in range(4):
        acc = MonomialSum.zero()
        for w, name in enumerate(VARIABLES):
            acc = ms_add(acc, ms_multiply(xc[w], differentiate(yc[k], name)))
            acc = ms_add(acc, ms_multiply(yc[w], differentiate(xc[k], name)).scaled(minus_one))
        out.append(acc)
    return VectorField(*out)


# ---------------------------------------------------------------------------
# Algebra elements and exact decomposition over a basis
# ---------------------------------------------------------------------------


class _Free:
    """Sentinel for an unconstrained coordinate in an equivalence target."""

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "FREE"


FREE = _Free()


@dataclass(frozen=True)
class AlgebraElement:
    """Coordinates of an element over a LieAlgebra basis.  Entries are
    ScalarExpr, except in equivalence targets where FREE marks a slot the
    solver may fill."""

    coordinates: tuple

    def __post_init__(self) -> None:
        coords = tuple(
            c if (c is FREE or isinstance(c, ScalarExpr)) else _as_scalar(c)
            for c in self.coordinates
        )
        object.__setattr__(self, "coordinates", coords)

    def is_zero(self) -> bool:
        return all(c is not FREE and c.is_zero() for c in self.coordinates)

    def has_free(self) -> bool:
        return any(c is FREE for c in self.coordinates)

    def scaled(self, s: ScalarExpr) -> "AlgebraElement":
        return AlgebraElement(tuple(c if c is FREE else c * s for c in self.coordinates))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(
            tuple(a + b for a, b in zip(self.coordinates, other.coordinates))
        )


def _solve_exact(rows: list, ncols: int) -> Optional[list]:
    """Gauss–Jordan over ℚ(α) on [A | b] rows; returns a solution with free
    columns set to zero, or None if inconsistent."""
    rows = [list(r) for r in rows]
    pivot_of_col: dict = {}
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if not rows[i][col].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pval = rows[r][col]
        rows[r] = [e / pval for e in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [ei - f * pj for ei, pj in zip(rows[i], rows[r])]
        pivot_of_col[col] = r
        r += 1
    for row in rows:
        if all(e.is_zero() for e in row[:ncols]) and not row[ncols].is_zero():
            return None
    return [
        rows[pivot_of_col[c]][ncols] if c in pivot_of_col else _ZERO
        for c in range(ncols)
    ]


def _decompose_over_fields(z: VectorField, fields: Sequence[VectorField]) -> tuple:
    """Exact coordinates of z over the given fields by matching monomial
    supports; raises NotInSpan when impossible."""
    n = len(fields)
    support = {}
    for i, f in enumerate(list(fields) + [z]):
        for k, comp in enumerate(f.components()):
            for m in comp.terms:
                support.setdefault((k, m.merge_key()), [_ZERO] * (n + 1))
    for i, f in enumerate(list(fields) + [z]):
        for k, comp in enumerate(f.components()):
            for m in comp.terms:
                support[(k, m.merge_key())][i] = m.coeff
    rows = list(support.values())
    sol = _solve_exact(rows, n)
    if sol is not None:
        # reconstruct and verify — guards against rank-deficient bases
        recon = VectorField.zero()
        for c, f in zip(sol, fields):
            recon = recon + f.scaled(c)
        if all((a - b).is_zero() for a, b in zip(recon.components(), z.components())):
            return tuple(sol)
    raise NotInSpan(f"field {z} does not decompose over the given basis")


# ---------------------------------------------------------------------------
# LieAlgebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LieAlgebra:
    """An ordered basis of vector fields together with the exact structure
    constants c[i][j][k] defined by [Bᵢ, Bⱼ] = Σₖ c[i][j][k] Bₖ."""

    basis: tuple          # tuple[(name, VectorField), ...]
    structure: tuple      # c[i][j][k] as nested tuples of ScalarExpr

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def names(self) -> tuple:
        return tuple(name for name, _ in self.basis)

    def basis_field(self, i: int) -> VectorField:
        return self.basis[i][1]

    def element(self, coords: Union[Sequence, Mapping[str, object]]) -> AlgebraElement:
        if isinstance(coords, Mapping):
            vec = [_ZERO] * self.dim
            names = self.names
            for name, c in coords.items():
                vec[names.index(name)] = c if c is FREE else _as_scalar(c)
            return AlgebraElement(tuple(vec))
        coords = tuple(coords)
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(coords)}")
        return AlgebraElement(coords)

    def basis_element(self, i: int) -> AlgebraElement:
        return AlgebraElement(tuple(_ONE if j == i else _ZERO for j in range(self.dim)))

    def field_of(self, element: AlgebraElement) -> VectorField:
        out = VectorField.zero()
        for c, (_, f) in zip(element.coordinates, self.basis):
            if c is FREE:
                raise Unsupported("cannot realize an element with FREE slots as a field")
            out = out + f.scaled(c)
        return out

    def bracket_coords(self, y: Sequence[ScalarExpr], z: Sequence[ScalarExpr]) -> tuple:
        n = self.dim
        out = [_ZERO] * n
        for i in range(n):
            if y[i].is_zero():
                continue
            for j in range(n):
                if z[j].is_zero():
                    continue
                for k in range(n):
                    c = self.structure[i][j][k]
                    if not c.is_zero():
                        out[k] = out[k] + y[i] * z[j] * c
        return tuple(out)


def decompose(z: VectorField, algebra: LieAlgebra) -> AlgebraElement:
    """Exact coordinates of z over the algebra basis (NotInSpan if none)."""
    return AlgebraElement(_decompose_over_fields(z, [f for _, f in algebra.basis]))


def structure_constants(basis: Sequence) -> LieAlgebra:
    """Build a LieAlgebra from a closed basis, verifying antisymmetry and the
    Jacobi identity exactly before returning.

    ``basis`` is a list of VectorField or of (name, VectorField) pairs.
    """
    named = []
    for i, item in enumerate(basis):
        if isinstance(item, VectorField):
            named.append((f"e{i + 1}", item))
        else:
            name, f = item
            named.append((str(name), f))
    fields = [f for _, f in named]
    n = len(fields)

    c = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            br = bracket(fields[i], fields[j])
            try:
                c[i][j] = _decompose_over_fields(br, fields)
            except NotInSpan as exc:
                raise NotClosed(
                    f"[{named[i][0]}, {named[j][0]}] = {br} is outside the span of the basis"
                ) from exc

    for i in range(n):
        for j in range(n):
            for k in range(n):
                if not (c[i][j][k] + c[j][i][k]).is_zero():
                    raise NotClosed(
                        f"structure constants violate antisymmetry at ({i},{j},{k})"
                    )
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for nn in range(n):
                    s = _ZERO
                    for m in range(n):
                        s = s + c[j][k][m] * c[i][m][nn]
                        s = s + c[k][i][m] * c[j][m][nn]
                        s = s + c[i][j][m] * c[k][m][nn]
                    if not s.is_zero():
                        raise NotClosed(
                            f"structure constants violate the Jacobi identity at ({i},{j},{k},{nn})"
                        )

    structure = tuple(tuple(tuple(row) for row in plane) for plane in c)
    return LieAlgebra(basis=tuple(named), structure=structure)


def ad_matrix(y: AlgebraElement, algebra: LieAlgebra) -> tuple:
    """Matrix M of ad_Y in the basis: M·coords(Z) = coords([Y, Z])."""
    n = algebra.dim
    yc = y.coordinates
    m = [[_ZERO] * n for _ in range(n)]
    for k in range(n):
        for j in range(n):
            acc = _ZERO
            for i in range(n):
                c = algebra.structure[i][j][k]
                if not c.is_zero() and not yc[i].is_zero():
                    acc = acc + yc[i] * c
            m[k][j] = acc
    return tuple(tuple(row) for row in m)


def direct_sum_check(algebra: LieAlgebra, partition: Tuple[Iterable[int], Iterable[int]]) -> bool:
    """True iff the two index sets split the algebra into a direct sum:
    cross brackets vanish and each part is closed."""
    part_a, part_b = (frozenset(p) for p in partition)
    all_idx = frozenset(range(algebra.dim))
    if part_a & part_b or (part_a | part_b) != all_idx:
        raise ValueError("partition must cover all basis indices disjointly")
    c = algebra.structure
    for i in part_a:
        for j in part_b:
            if any(not c[i][j][k].is_zero() for k in range(algebra.dim)):
                return False
    for part, other in ((part_a, part_b), (part_b, part_a)):
        for i in part:
            for j in part:
                if any(not c[i][j][k].is_zero() for k in other):
                    return False
    return True


# ---------------------------------------------------------------------------
# Adjoint actions
# ---------------------------------------------------------------------------


class _Symbolic:
    """Sentinel ε: ask for the adjoint action as a closed form in ε."""

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "ε"


SYMBOLIC = _Symbolic()


@dataclass(frozen=True)
class AdjointClosedForm:
    """Result of Ad(e^{εY})Z as an explicit function of ε: the k-th
    coordinate is (c0ₖ + c1ₖ·ε)·e^{−λₖ·ε}."""

    entries: tuple  # tuple[(c0, c1, rate), ...] of ScalarExpr triples
    names: tuple

    def evaluate(self, eps: float, alpha: Optional[AlphaParameter] = None) -> tuple:
        out = []
        for c0, c1, rate in self.entries:
            if c0.is_zero() and c1.is_zero():
                out.append(0.0)
                continue
            v = _scalar_value(c0, alpha) + _scalar_value(c1, alpha) * eps
            r = 0.0 if rate.is_zero() else _scalar_value(rate, alpha)
            out.append(v * math.exp(-r * eps))
        return tuple(out)

    def __str__(self) -> str:
        parts = []
        for (c0, c1, rate), name in zip(self.entries, self.names):
            if c0.is_zero() and c1.is_zero():
                continue
            if c1.is_zero():
                poly = str(c0)
            elif c0.is_zero():
                poly = "ε" if c1.is_one() else f"({c1})·ε"
            else:
                poly = f"({c0} + ({c1})·ε)"
            if poly == "1":
                piece = ""
            else:
                piece = f"{poly}·" if ("+" not in poly or poly.startswith("(")) else f"({poly})·"
            if not rate.is_zero():
                rs = str(rate.__neg__())
                piece += f"e^(({rs})ε)·"
            parts.append(f"{piece}{name}")
        return " + ".join(parts) if parts else "0"


def _scalar_value(s: ScalarExpr, alpha: Optional[AlphaParameter]) -> float:
    if s.is_constant():
        q = s.constant_value()
        return q.numerator / q.denominator
    if alpha is None:
        raise Unsupported(f"scalar {s} depends on α; supply alpha")
    q = s.evaluate(alpha.value)
    return q.numerator / q.denominator


def _mat_vec(m: tuple, w: Sequence[ScalarExpr]) -> list:
    return [
        sum((m[k][j] * w[j] for j in range(len(w)) if not w[j].is_zero()), _ZERO)
        for k in range(len(m))
    ]


def _is_diagonal(m: tuple) -> bool:
    n = len(m)
    return all(m[k][j].is_zero() for k in range(n) for j in range(n) if k != j)


def adjoint_action(
    y: AlgebraElement,
    z: AlgebraElement,
    eps,
    algebra: LieAlgebra,
    alpha: Optional[AlphaParameter] = None,
):
    """Ad(e^{εY})Z = exp(−ε·ad_Y)Z.

    With ``eps=SYMBOLIC`` the result is an :class:`AdjointClosedForm`
    (available whenever ad_Y acts nilpotently, diagonally, or by an
    eigenvalue on Z — true throughout the catalog).  With numeric ε the
    result is an :class:`AlgebraElement`; exact when the series terminates,
    otherwise a scaled Taylor series evaluated to ~1e−12 (requires ``alpha``
    if the matrix depends on α).
    """
    m = ad_matrix(y, algebra)
    w = z.coordinates
    n = algebra.dim
    mw = _mat_vec(m, w)
    symbolic = eps is SYMBOLIC

    if all(e.is_zero() for e in mw):
        if symbolic:
            return AdjointClosedForm(
                entries=tuple((wk, _ZERO, _ZERO) for wk in w), names=algebra.names
            )
        return AlgebraElement(tuple(w))

    m2w = _mat_vec(m, mw)
    if all(e.is_zero() for e in m2w):
        if symbolic:
            return AdjointClosedForm(
                entries=tuple((wk, -mwk, _ZERO) for wk, mwk in zip(w, mw)),
                names=algebra.names,
            )
        e = ScalarExpr.of(Fraction(eps))
        return AlgebraElement(tuple(wk - e * mwk for wk, mwk in zip(w, mw)))

    entries = None
    if _is_diagonal(m):
        entries = tuple((w[k], _ZERO, m[k][k]) for k in range(n))
    else:
        pivot = next((k for k in range(n) if not w[k].is_zero()), None)
        if pivot is not None:
            lam = mw[pivot] / w[pivot]
            if all((mw[k] - lam * w[k]).is_zero() for k in range(n)):
                entries = tuple((w[k], _ZERO, lam) for k in range(n))

    if entries is not None:
        if symbolic:
            return AdjointClosedForm(entries=entries, names=algebra.names)
        coords = []
        for c0, _, rate in entries:
            if c0.is_zero() or rate.is_zero():
                coords.append(c0)
            else:
                factor = math.exp(-_scalar_value(rate, alpha) * float(eps))
                coords.append(c0 * ScalarExpr.of(Fraction(factor)))
        return AlgebraElement(tuple(coords))

    if symbolic:
        raise Unsupported("no closed form: ad_Y is neither nilpotent on Z, diagonal, nor an eigen-action")

    # numeric fallback: scaled Taylor series for exp(−ε·M)·w
    mat = [[_scalar_value(m[k][j], alpha) for j in range(n)] for k in range(n)]
    vec = [_scalar_value(wk, alpha) for wk in w]
    norm = max(sum(abs(e) for e in row) for row in mat) * abs(float(eps))
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    scale = -float(eps) / (2 ** squarings)
    exp_m = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    term = [row[:] for row in exp_m]
    k = 1
    while True:
        term = [
            [sum(term[i][l] * mat[l][j] * scale / k for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
        exp_m = [[exp_m[i][j] + term[i][j] for j in range(n)] for i in range(n)]
        if max(abs(e) for row in term for e in row) < 1e-18 or k > 60:
            break
        k += 1
    for _ in range(squarings):
        exp_m = [
            [sum(exp_m[i][l] * exp_m[l][j] for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
    out = [sum(exp_m[i][j] * vec[j] for j in range(n)) for i in range(n)]
    return AlgebraElement(tuple(ScalarExpr.of(Fraction(v)) for v in out))


def evaluate_element(e: AlgebraElement, alpha: Optional[AlphaParameter] = None) -> tuple:
    """Coordinates as floats (α-dependent entries need ``alpha``)."""
    return tuple(_scalar_value(c, alpha) for c in e.coordinates)


def element_str(algebra: LieAlgebra, e: AlgebraElement) -> str:
    parts = []
    for c, name in zip(e.coordinates, algebra.names):
        if c is FREE:
            parts.append(f"b·{name}")
            continue
        if c.is_zero():
            continue
        cs = str(c)
        if cs == "1":
            parts.append(name)
        elif cs == "-1":
            parts.append(f"-{name}")
        else:
            if " " in cs or "/" in cs:
                cs = f"({cs})"
            parts.append(f"{cs}·{name}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


# ---------------------------------------------------------------------------
# Conjugation equivalences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoSolution:
    """Returned (never raised) when no conjugation parameter exists."""

    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class EquivalenceResult:
    """A solved conjugation Ad(e^{ε·conjugator})·source = scale·target.

    ``filled`` holds the values assigned to FREE slots of the target;
    ``achieved`` are the float coordinates of the conjugated source.
    """

    epsilon: float
    scale: float
    filled: dict
    achieved: tuple
    residual: float

    def __bool__(self) -> bool:
        return True


def equivalence_solve(
    source: AlgebraElement,
    target: AlgebraElement,
    conjugator: AlgebraElement,
    algebra: LieAlgebra,
    alpha: Optional[AlphaParameter] = None,
    allow_negative_scale: bool = False,
):
    """Solve Ad(e^{ε·conjugator})(source) = scale·target for ε and scale > 0
    (scale < 0 only when explicitly allowed, which marks a subalgebra-level
    rather than direction-preserving equivalence).

    Target coordinates may be FREE; those slots are filled from the solved
    conjugation and reported in the result.  Returns
    :class:`EquivalenceResult` or :class:`NoSolution` (a value, not an
    exception: unreachable targets are a legitimate answer).
    """
    closed = adjoint_action(conjugator, source, SYMBOLIC, algebra)
    if not isinstance(closed, AdjointClosedForm):  # pragma: no cover - defensive
        raise Unsupported("conjugator action yielded no closed form")

    n = algebra.dim
    c0 = [_scalar_value(e[0], alpha) for e in closed.entries]
    c1 = [_scalar_value(e[1], alpha) for e in closed.entries]
    lam = [_scalar_value(e[2], alpha) for e in closed.entries]
    free_idx = [k for k in range(n) if target.coordinates[k] is FREE]
    constrained = [k for k in range(n) if target.coordinates[k] is not FREE]
    g = {k: _scalar_value(target.coordinates[k], alpha) for k in constrained}

    tol = 1e-12

    def f_of(k: int, eps: float) -> float:
        return (c0[k] + c1[k] * eps) * math.exp(-lam[k] * eps)

    # classify the constrained coordinates
    scale_pins = []       # s = c0/g from ε-invariant coordinates
    linear_eqs = []       # (c0 + c1·ε) = s·g
    exp_eqs = []          # c0·e^{−λε} = s·g
    for k in constrained:
        gk = g[k]
        inv = abs(c1[k]) < tol and abs(lam[k]) < tol
        if inv:
            if abs(gk) < tol:
                if abs(c0[k]) > tol:
                    return NoSolution(
                        f"coordinate {algebra.names[k]} is conjugation-invariant and nonzero "
                        f"but the target needs it to vanish"
                    )
                continue
            if abs(c0[k]) < tol:
                return NoSolution(
                    f"target has {algebra.names[k]} but the conjugated source never does"
                )
            scale_pins.append(c0[k] / gk)
        elif abs(lam[k]) < tol:
            if abs(gk) < tol and abs(c1[k]) < tol:
                if abs(c0[k]) > tol:
                    return NoSolution(f"coordinate {algebra.names[k]} cannot vanish")
                continue
            linear_eqs.append(k)
        else:
            if abs(c0[k]) < tol and abs(c1[k]) < tol:
                if abs(gk) > tol:
                    return NoSolution(
                        f"target has {algebra.names[k]} but the conjugated source never does"
                    )
                continue
            if abs(c1[k]) > tol:
                return NoSolution("mixed polynomial-exponential coordinate; not closed-form solvable")
            exp_eqs.append(k)

    scale = None
    if scale_pins:
        scale = scale_pins[0]
        for s2 in scale_pins[1:]:
            if abs(s2 - scale) > 1e-10 * (1 + abs(scale)):
                return NoSolution("inconsistent scale requirements across invariant coordinates")

    eps_candidates = []
    if scale is not None:
        for k in linear_eqs:
            eps_candidates.append((scale * g[k] - c0[k]) / c1[k])
        for k in exp_eqs:
            ratio = scale * g[k] / c0[k]
            if ratio <= 0:
                return NoSolution(
                    f"coordinate {algebra.names[k]} would need e^(−λε) = {ratio:.3g} ≤ 0"
                )
            eps_candidates.append(-math.log(ratio) / lam[k])
    else:
        # no invariant coordinate pins the scale: use ratios of exponential
        # coordinates with distinct rates
        solved = False
        for a_i in range(len(exp_eqs)):
            for b_i in range(a_i + 1, len(exp_eqs)):
                ka, kb = exp_eqs[a_i], exp_eqs[b_i]
                if abs(lam[ka] - lam[kb]) < tol:
                    continue
                r = (g[ka] * c0[kb]) / (g[kb] * c0[ka])
                if r <= 0:
                    return NoSolution("sign obstruction in exponential coordinate ratio")
                eps_candidates.append(math.log(r) / (lam[kb] - lam[ka]))
                solved = True
                break
            if solved:
                break
        if not solved:
            if exp_eqs:
                # one-parameter family; take ε = 0 and let the scale absorb it
                eps_candidates.append(0.0)
            elif linear_eqs:
                return NoSolution("scale is undetermined by the constrained coordinates")

    eps = eps_candidates[0] if eps_candidates else 0.0
    for e2 in eps_candidates[1:]:
        if abs(e2 - eps) > 1e-10 * (1 + abs(eps)):
            return NoSolution("constrained coordinates demand incompatible ε values")

    if scale is None:
        pin = next((k for k in exp_eqs + linear_eqs if abs(g[k]) > tol), None)
        if pin is None:
            scale = 1.0
        else:
            scale = f_of(pin, eps) / g[pin]

    if scale <= 0 and not allow_negative_scale:
        return NoSolution(f"requires scale {scale:.6g} ≤ 0")
    if scale == 0:
        return NoSolution("degenerate zero scale")

    achieved = tuple(f_of(k, eps) for k in range(n))
    residual = 0.0
    for k in constrained:
        residual = max(residual, abs(achieved[k] - scale * g[k]))
    if residual > 1e-10 * (1 + abs(scale)):
        return NoSolution(f"constraints are inconsistent (best residual {residual:.3e})")

    filled = {k: achieved[k] / scale for k in free_idx}
    return EquivalenceResult(
        epsilon=eps, scale=scale, filled=filled, achieved=achieved, residual=residual
    )
