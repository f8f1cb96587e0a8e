"""Exact arithmetic for α-parametric monomial sums and the fractional power rule.

The objects here form the substrate for everything else in fraclie:

* :class:`ScalarExpr` — a ratio of polynomials in the fractional order α with
  exact rational coefficients, kept in a canonical form so that structural
  equality is mathematical equality.
* :class:`ExponentExpr` — an exponent affine in α, i.e. a + b·α.
* :class:`Monomial` / :class:`MonomialSum` — finite sums of terms
  c(α) · γ · x^e₁ t^e₂ u^e₃ v^e₄, where γ is an optional ratio of gamma values
  produced by the fractional power rule and evaluated lazily.
* :func:`rl_derivative_t` — the Riemann–Liouville power rule
  D^α t^p = Γ(p+1)/Γ(p+1−α) · t^{p−α} (p > −1), with exact annihilation when
  Γ(p+1−α) sits on a pole (this is what makes t^{α−1} a kernel element).

All values are immutable; all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import DomainError, PoleError, UndefinedDerivative, UnsupportedOperand

RationalLike = Union[int, Fraction]

VARIABLES = ("x", "t", "u", "v")
_VAR_INDEX = {name: i for i, name in enumerate(VARIABLES)}


# ---------------------------------------------------------------------------
# Gamma function (Lanczos approximation, g = 7, 9 coefficients)
# ---------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Γ(x) for real non-pole x, accurate to better than 1e−12 relative.

    Uses the Lanczos series for x ≥ 0.5 and the reflection formula
    Γ(x)Γ(1−x) = π/sin(πx) below.  Poles (x a nonpositive integer) raise
    :class:`PoleError`; fraclie treats those symbolically (term annihilation
    in the power rule), never numerically.
    """
    if x <= 0.0 and float(x).is_integer():
        raise PoleError(f"gamma evaluated at nonpositive integer {x}")
    if x < 0.5:
        # Reflection.  sinpi is computed from the fractional part to keep
        # accuracy for large negative x (not that fraclie ever needs those).
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def _sinpi(x: float) -> float:
    # sin(πx) = (−1)^⌊x⌋ · sin(π·frac(x)), computed from the reduced argument
    # for accuracy; exact zeros never reach here because integer x is rejected
    # by the pole guard.
    fl = math.floor(x)
    r = x - fl
    s = math.sin(math.pi * r) if r <= 0.5 else math.sin(math.pi * (1.0 - r))
    return -s if (int(fl) & 1) else s


def is_nonpositive_integer(q: Fraction) -> bool:
    """True iff q ∈ {0, −1, −2, …} — i.e. Γ(q) is a pole."""
    return q.denominator == 1 and q <= 0


def gamma_fraction(q: Fraction) -> float:
    """Γ(q) for an exact rational argument; poles raise :class:`PoleError`."""
    if is_nonpositive_integer(q):
        raise PoleError(f"gamma evaluated at nonpositive integer {q}")
    return gamma(q.numerator / q.denominator)


# ---------------------------------------------------------------------------
# Polynomials in α over ℚ (internal helpers for ScalarExpr)
# ---------------------------------------------------------------------------
# A polynomial is a tuple of Fractions, lowest degree first, with no trailing
# zeros; the zero polynomial is the empty tuple.

Poly = tuple  # tuple[Fraction, ...]


def _ptrim(c: Sequence[Fraction]) -> Poly:
    n = len(c)
    while n and c[n - 1] == 0:
        n -= 1
    return tuple(c[:n])


def _padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return _ptrim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def _pneg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def _pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _ptrim(out)


def _pscale(p: Poly, s: Fraction) -> Poly:
    if s == 0:
        return ()
    return tuple(c * s for c in p)


def _pdivmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    rem = list(p)
    qlead = q[-1]
    while len(rem) >= len(q) and _ptrim(rem):
        rem = list(_ptrim(rem))
        if len(rem) < len(q):
            break
        k = len(rem) - len(q)
        f = rem[-1] / qlead
        quot[k] = f
        for i, c in enumerate(q):
            rem[k + i] -= f * c
        rem.pop()
    return _ptrim(quot), _ptrim(rem)


def _pmonic(p: Poly) -> Poly:
    return _pscale(p, 1 / p[-1]) if p else ()


def _pgcd(p: Poly, q: Poly) -> Poly:
    a, b = _ptrim(p), _ptrim(q)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, _pmonic(r)
    return _pmonic(a) if a else (Fraction(1),)


def _peval(p: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_str(p: Poly, var: str = "α") -> str:
    if not p:
        return "0"
    parts = []
    for i, c in enumerate(p):
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            pw = var if i == 1 else f"{var}^{i}"
            if c == 1:
                term = pw
            elif c == -1:
                term = f"-{pw}"
            else:
                term = f"{c}{pw}"
            parts.append(term)
    out = parts[0]
    for term in parts[1:]:
        out += f" - {term[1:]}" if term.startswith("-") else f" + {term}"
    return out


# ---------------------------------------------------------------------------
# ScalarExpr — the coefficient field ℚ(α)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarExpr:
    """A ratio of polynomials in α with exact rational coefficients.

    Canonical form: numerator and denominator share no common factor and the
    denominator is monic (leading coefficient 1 > 0), so structural equality
    is mathematical equality and instances hash consistently.

    Construct via :meth:`of`, :meth:`alpha`, or arithmetic on those.
    """

    num: Poly
    den: Poly

    # -- construction -------------------------------------------------------

    @staticmethod
    def _canonical(num: Sequence[Fraction], den: Sequence[Fraction]) -> "ScalarExpr":
        num, den = _ptrim(num), _ptrim(den)
        if not den:
            raise ZeroDivisionError("ScalarExpr with zero denominator")
        if not num:
            return ScalarExpr((), (Fraction(1),))
        g = _pgcd(num, den)
        if len(g) > 1:
            num, _ = _pdivmod(num, g)
            den, _ = _pdivmod(den, g)
        lead = den[-1]
        if lead != 1:
            num = _pscale(num, 1 / lead)
            den = _pscale(den, 1 / lead)
        return ScalarExpr(num, den)

    @classmethod
    def of(cls, value: RationalLike, den: RationalLike = 1) -> "ScalarExpr":
        q = Fraction(value) / Fraction(den)
        if q == 0:
            return _SCALAR_ZERO
        return cls._canonical((q,), (Fraction(1),))

    @classmethod
    def alpha(cls) -> "ScalarExpr":
        return cls._canonical((Fraction(0), Fraction(1)), (Fraction(1),))

    @classmethod
    def from_polys(cls, num: Iterable[RationalLike], den: Iterable[RationalLike] = (1,)) -> "ScalarExpr":
        return cls._canonical(tuple(Fraction(c) for c in num), tuple(Fraction(c) for c in den))

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == (Fraction(1),) and self.den == (Fraction(1),)

    def is_constant(self) -> bool:
        return len(self.num) <= 1 and self.den == (Fraction(1),)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self.num[0] if self.num else Fraction(0)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "ScalarExpr") -> "ScalarExpr":
        return ScalarExpr._canonical(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    def __sub__(self, other: "ScalarExpr") -> "ScalarExpr":
        return self + (-other)

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr(_pneg(self.num), self.den)

    def __mul__(self, other: "ScalarExpr") -> "ScalarExpr":
        return ScalarExpr._canonical(_pmul(self.num, other.num), _pmul(self.den, other.den))

    def __truediv__(self, other: "ScalarExpr") -> "ScalarExpr":
        if other.is_zero():
            raise ZeroDivisionError("division by zero ScalarExpr")
        return ScalarExpr._canonical(_pmul(self.num, other.den), _pmul(self.den, other.num))

    # -- evaluation & rendering --------------------------------------------

    def evaluate(self, alpha: Fraction) -> Fraction:
        """Exact value at a rational α; raises :class:`PoleError` at a pole."""
        d = _peval(self.den, alpha)
        if d == 0:
            raise PoleError(f"scalar {self} has a pole at α = {alpha}")
        return _peval(self.num, alpha) / d

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        ns = _poly_str(self.num)
        if self.den == (Fraction(1),):
            return ns
        ds = _poly_str(self.den)
        if len(self.num) > 1 or (self.num and self.num[0] < 0):
            ns = f"({ns})"
        if len(self.den) > 1:
            ds = f"({ds})"
        return f"{ns}/{ds}"


_SCALAR_ZERO = ScalarExpr((), (Fraction(1),))
_SCALAR_ONE = ScalarExpr((Fraction(1),), (Fraction(1),))


def scalar(value: RationalLike, den: RationalLike = 1) -> ScalarExpr:
    """Shorthand for :meth:`ScalarExpr.of`."""
    return ScalarExpr.of(value, den)


ALPHA = ScalarExpr.alpha()


# ---------------------------------------------------------------------------
# AlphaParameter
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaParameter:
    """The fractional order α as an exact positive non-integer rational.

    The similarity/optimal-system catalog additionally restricts to 0 < α < 1;
    that check lives with the catalog, not here (the kernel basis t^{α−1}, …,
    t^{α−n} is meaningful for any positive non-integer α).
    """

    value: Fraction

    def __post_init__(self) -> None:
        v = Fraction(self.value)
        object.__setattr__(self, "value", v)
        if v <= 0:
            raise DomainError(f"α must be positive, got {v}")
        if v.denominator == 1:
            raise DomainError(f"α must not be an integer, got {v}")

    @classmethod
    def parse(cls, text: str) -> "AlphaParameter":
        """Parse an exact rational string 'p/q' (or 'p').  Decimals are
        rejected on purpose: pole and exponent-boundary decisions must be
        exact."""
        s = text.strip()
        try:
            if "/" in s:
                p, q = s.split("/")
                v = Fraction(int(p), int(q))
            else:
                v = Fraction(int(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"α must be an exact rational like 1/2, got {text!r}") from exc
        return cls(v)

    def __float__(self) -> float:
        return self.value.numerator / self.value.denominator

    def __str__(self) -> str:
        return str(self.value)


# ---------------------------------------------------------------------------
# ExponentExpr — exponents affine in α
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentExpr:
    """An exponent a + b·α with exact rational a, b; equality componentwise."""

    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def of(cls, a: RationalLike = 0, b: RationalLike = 0) -> "ExponentExpr":
        return cls(Fraction(a), Fraction(b))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __add__(self, other: "ExponentExpr") -> "ExponentExpr":
        return ExponentExpr(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "ExponentExpr") -> "ExponentExpr":
        return ExponentExpr(self.a - other.a, self.b - other.b)

    def evaluate(self, alpha: Fraction) -> Fraction:
        return self.a + self.b * alpha

    def as_scalar(self) -> ScalarExpr:
        return ScalarExpr.from_polys((self.a, self.b))

    def sort_key(self) -> tuple:
        return (self.a, self.b)

    def __str__(self) -> str:
        return _poly_str((self.a, self.b))


E_ZERO = ExponentExpr(Fraction(0), Fraction(0))


# ---------------------------------------------------------------------------
# GammaRatio — lazily evaluated Γ-value ratios attached by the power rule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaRatio:
    """A product Γ(t₁)…Γ(t_j) / Γ(b₁)…Γ(b_k) with exact rational arguments.

    Arguments equal between numerator and denominator are cancelled on
    construction, so the identity ratio is ((), ()).  The numeric value is
    computed lazily from the Lanczos gamma; callers guarantee no argument is
    a pole (the power rule drops annihilated terms before building a ratio).
    """

    tops: tuple
    bots: tuple

    @classmethod
    def of(cls, tops: Iterable[RationalLike] = (), bots: Iterable[RationalLike] = ()) -> "GammaRatio":
        t = [Fraction(v) for v in tops]
        b = [Fraction(v) for v in bots]
        # cancel common arguments (multiset intersection)
        for v in list(t):
            if v in b:
                t.remove(v)
                b.remove(v)
        return cls(tuple(sorted(t)), tuple(sorted(b)))

    @classmethod
    def one(cls) -> "GammaRatio":
        return _GAMMA_ONE

    def is_one(self) -> bool:
        return not self.tops and not self.bots

    def __mul__(self, other: "GammaRatio") -> "GammaRatio":
        return GammaRatio.of(self.tops + other.tops, self.bots + other.bots)

    def value(self) -> float:
        out = 1.0
        for q in self.tops:
            out *= gamma_fraction(q)
        for q in self.bots:
            out /= gamma_fraction(q)
        return out

    def sort_key(self) -> tuple:
        return (self.tops, self.bots)

    def __str__(self) -> str:
        if self.is_one():
            return "1"
        ts = "·".join(f"Γ({q})" for q in self.tops) or "1"
        bs = "·".join(f"Γ({q})" for q in self.bots)
        return f"{ts}/{bs}" if bs else ts


_GAMMA_ONE = GammaRatio((), ())


# ---------------------------------------------------------------------------
# Monomial / MonomialSum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    """coeff(α) · γ · x^e₀ t^e₁ u^e₂ v^e₃ with ExponentExpr exponents."""

    coeff: ScalarExpr
    exps: tuple  # tuple[ExponentExpr, ExponentExpr, ExponentExpr, ExponentExpr]
    gamma: GammaRatio = _GAMMA_ONE

    @classmethod
    def zero(cls) -> "Monomial":
        return cls(_SCALAR_ZERO, (E_ZERO, E_ZERO, E_ZERO, E_ZERO))

    def merge_key(self) -> tuple:
        return (tuple(e.sort_key() for e in self.exps), self.gamma.sort_key())

    def __str__(self) -> str:
        parts = []
        if not self.coeff.is_one() or (self.gamma.is_one() and all(e.is_zero() for e in self.exps)):
            cs = str(self.coeff)
            parts.append(f"({cs})" if "/" in cs or " " in cs else cs)
        if not self.gamma.is_one():
            parts.append(f"[{self.gamma}]")
        for name, e in zip(VARIABLES, self.exps):
            if e.is_zero():
                continue
            es = str(e)
            parts.append(f"{name}^({es})" if (" " in es or "/" in es or es.startswith("-")) else f"{name}^{es}")
        return "·".join(parts) if parts else "1"


class MonomialSum:
    """A finite, canonically ordered sum of :class:`Monomial` terms.

    Terms are merged on construction: monomials sharing both the exponent
    vector and the gamma annotation add their coefficients, and zero terms
    are dropped.  Structural equality of two sums is therefore equality of
    the functions they denote (for gamma-free sums; gamma-bearing terms are
    equal when produced by the same power-rule applications).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Monomial] = ()):
        merged: dict = {}
        for m in terms:
            if m.coeff.is_zero():
                continue
            key = m.merge_key()
            if key in merged:
                merged[key] = Monomial(merged[key].coeff + m.coeff, m.exps, m.gamma)
            else:
                merged[key] = m
        kept = [m for m in merged.values() if not m.coeff.is_zero()]
        kept.sort(key=Monomial.merge_key)
        self.terms = tuple(kept)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "MonomialSum":
        return cls(())

    @classmethod
    def constant(cls, c: Union[RationalLike, ScalarExpr]) -> "MonomialSum":
        ce = c if isinstance(c, ScalarExpr) else ScalarExpr.of(c)
        return cls((Monomial(ce, (E_ZERO, E_ZERO, E_ZERO, E_ZERO)),))

    @classmethod
    def term(
        cls,
        coeff: Union[RationalLike, ScalarExpr] = 1,
        x: ExponentExpr = E_ZERO,
        t: ExponentExpr = E_ZERO,
        u: ExponentExpr = E_ZERO,
        v: ExponentExpr = E_ZERO,
        gamma_ratio: GammaRatio = _GAMMA_ONE,
    ) -> "MonomialSum":
        ce = coeff if isinstance(coeff, ScalarExpr) else ScalarExpr.of(coeff)
        return cls((Monomial(ce, (x, t, u, v), gamma_ratio),))

    @classmethod
    def variable(cls, name: str) -> "MonomialSum":
        exps = [E_ZERO] * 4
        exps[_VAR_INDEX[name]] = ExponentExpr.of(1)
        return cls((Monomial(_SCALAR_ONE, tuple(exps)),))

    # -- predicates / dunder ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, MonomialSum) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __add__(self, other: "MonomialSum") -> "MonomialSum":
        return add(self, other)

    def __sub__(self, other: "MonomialSum") -> "MonomialSum":
        return add(self, other.scaled(ScalarExpr.of(-1)))

    def __mul__(self, other: "MonomialSum") -> "MonomialSum":
        return multiply(self, other)

    def scaled(self, c: ScalarExpr) -> "MonomialSum":
        return MonomialSum(Monomial(m.coeff * c, m.exps, m.gamma) for m in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(m) for m in self.terms)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def add(f: MonomialSum, g: MonomialSum) -> MonomialSum:
    """Pointwise sum with canonical merging."""
    return MonomialSum(f.terms + g.terms)


def multiply(f: MonomialSum, g: MonomialSum) -> MonomialSum:
    """Distributive product: exponents add componentwise, coefficients
    multiply in ℚ(α), gamma annotations multiply as value ratios."""
    out = []
    for a in f.terms:
        for b in g.terms:
            out.append(
                Monomial(
                    a.coeff * b.coeff,
                    tuple(ea + eb for ea, eb in zip(a.exps, b.exps)),
                    a.gamma * b.gamma,
                )
            )
    return MonomialSum(out)


def differentiate(f: MonomialSum, var: str) -> MonomialSum:
    """Classical partial derivative: term-by-term power rule in one variable.

    The old exponent a + b·α folds into the coefficient as a ScalarExpr, so
    the result stays exact and symbolic in α.
    """
    idx = _VAR_INDEX[var]
    out = []
    for m in f.terms:
        e = m.exps[idx]
        if e.is_zero():
            continue
        new_exps = list(m.exps)
        new_exps[idx] = ExponentExpr(e.a - 1, e.b)
        out.append(Monomial(m.coeff * e.as_scalar(), tuple(new_exps), m.gamma))
    return MonomialSum(out)


def _pow_real(base: float, expo: Fraction, what: str) -> float:
    """base^expo over the reals with exact domain decisions."""
    if base > 0.0:
        if expo == 0:
            return 1.0
        return math.exp((expo.numerator / expo.denominator) * math.log(base))
    if base == 0.0:
        if expo > 0 and expo.denominator == 1:
            return 0.0
        raise DomainError(f"0^{expo} for {what}: nonpositive or fractional exponent at zero base")
    # negative base: integer exponents only
    if expo.denominator == 1:
        return base ** int(expo)
    raise DomainError(f"negative base {base} with non-integer exponent {expo} for {what}")


def evaluate(f: MonomialSum, alpha: AlphaParameter, point: Sequence[float]) -> float:
    """Evaluate at exact α and a real point (x, t, u, v).

    Raises :class:`DomainError` for nonpositive bases under fractional or
    negative exponents and :class:`PoleError` if a coefficient's denominator
    vanishes at this α.
    """
    a = alpha.value
    total = 0.0
    for m in f.terms:
        val = float(m.coeff.evaluate(a))
        if not m.gamma.is_one():
            val *= m.gamma.value()
        for name, e, base in zip(VARIABLES, m.exps, point):
            expo = e.evaluate(a)
            if expo == 0:
                continue
            val *= _pow_real(float(base), expo, name)
        total += val
    return total


def rl_derivative_t(f: MonomialSum, alpha: AlphaParameter) -> MonomialSum:
    """Riemann–Liouville derivative in t of order α, term by term.

    c · x^e t^p  ↦  c · Γ(p+1)/Γ(p+1−α) · x^e t^{p−α}, with p evaluated
    exactly at the given α.  When p+1−α is a nonpositive integer the gamma
    pole annihilates the term exactly (this is why c·t^{α−1} is in the
    kernel).  Exponents in the result stay symbolic: (a, b) ↦ (a, b−1).

    Raises :class:`UndefinedDerivative` when some t-exponent has p ≤ −1 (the
    memory integral diverges) and :class:`UnsupportedOperand` if u or v
    appears — this operator differentiates in t only.
    """
    a = alpha.value
    out = []
    for m in f.terms:
        if not m.exps[2].is_zero() or not m.exps[3].is_zero():
            raise UnsupportedOperand("rl_derivative_t applies to functions of x and t only")
        p = m.exps[1].evaluate(a)
        if p <= -1:
            raise UndefinedDerivative(f"D^α t^p undefined for p = {p} ≤ −1")
        q = p + 1 - a
        if is_nonpositive_integer(q):
            continue  # Γ(q) pole ⇒ the term is exactly zero
        e_t = m.exps[1]
        new_exps = (m.exps[0], ExponentExpr(e_t.a, e_t.b - 1), E_ZERO, E_ZERO)
        out.append(Monomial(m.coeff, new_exps, m.gamma * GammaRatio.of((p + 1,), (q,))))
    return MonomialSum(out)
