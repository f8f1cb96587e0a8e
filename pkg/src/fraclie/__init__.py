"""fraclie — symbolic-numeric toolkit for a time-fractional nonlinear
evolution system ∂ᵅu/∂tᵅ = v_x, ∂ᵅv/∂tᵅ = b²(u)u_x.

Subpackages:

* :mod:`fraclie.symbolic_core` — exact α-parametric monomial sums, the
  Riemann–Liouville power rule, and the Lanczos gamma function.
* :mod:`fraclie.lie_engine` — Lie brackets, structure constants, adjoint
  actions, and subalgebra-equivalence solving.
* :mod:`fraclie.catalog` — the group classification, optimal systems, and
  similarity reductions as executable data.
* :mod:`fraclie.solutions` — the closed-form invariant-solution families.
* :mod:`fraclie.numeric_verify` — singular-kernel quadrature oracle, PDE/ODE
  residual reports, and a memory-aware time-stepper.
* :mod:`fraclie.cli` — the `fraclie` command-line front door.
"""

__version__ = "0.1.0"
