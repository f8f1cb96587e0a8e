"""Error taxonomy shared by all fraclie modules.

Every exception below derives from :class:`FraclieError` so callers (and the
CLI) can distinguish "the input is outside the mathematical domain" from
genuine bugs.  Verification *failures* (a residual exceeding its tolerance)
are never exceptions — they are reported through result records.
"""


class FraclieError(Exception):
    """Base class for all domain/usage errors raised by fraclie."""


class DomainError(FraclieError):
    """A numeric evaluation left the real domain (e.g. negative base with
    fractional exponent, nonpositive t, tangent pole)."""


class PoleError(FraclieError):
    """An exact scalar (rational function of α, or a gamma ratio) was
    evaluated at a pole."""


class UndefinedDerivative(FraclieError):
    """Riemann–Liouville derivative requested for a power t^p with p ≤ −1,
    where the defining memory integral diverges."""


class UnsupportedOperand(FraclieError):
    """The exact fractional power rule was applied to an expression carrying
    u- or v-dependence (it differentiates in t only)."""


class NotInSpan(FraclieError):
    """A vector field could not be decomposed exactly over the given basis."""


class NotClosed(FraclieError):
    """A bracket of basis fields left the span of the basis, so the fields do
    not generate a finite-dimensional Lie algebra over the scalar field."""


class InvalidCase(FraclieError):
    """Classification-case parameters violate their constraints (k=0, m=0,
    α outside (0,1) where required, …)."""


class DegenerateDenominator(FraclieError):
    """The regular-case basis change was requested at 2mα+α−m = 0, where its
    denominators vanish."""


class HypothesisViolated(FraclieError):
    """A closed-form construction was requested outside its stated parameter
    hypothesis; the message names the failed inequality."""


class NonrealRoot(FraclieError):
    """An even real root of a negative radicand was requested.  fraclie works
    over the reals and never takes complex branches."""


class SingularParameter(FraclieError):
    """A gamma factor in a closed-form coefficient sits exactly on a pole
    (nonpositive-integer argument); the message names the argument."""


class NonMonotone(FraclieError):
    """The implicit curve x(ψ) failed strict monotonicity on the tabulated
    range and therefore cannot be inverted."""


class QuadratureFailure(FraclieError):
    """Successive quadrature refinements disagreed beyond the target
    tolerance."""


class Unsupported(FraclieError):
    """The requested check has no evaluation path for this input (e.g. the
    sequential residual for a family whose u is not a monomial in t)."""


class Instability(FraclieError):
    """The time-stepper's solution norm blew up (exceeded 10⁶ × initial)."""
