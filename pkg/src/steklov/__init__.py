"""Steklov spectra of planar domains, regularized zeta values and the zeta-decreasing flow."""
from .harmonics import ConformalFactor, TrigPolynomial, normalize, unit_factor
from .dtn import spectrum
from .zeta import zeta_diff, kogan_zeta_minus1, zeta_invariant_algebraic
from .flow import integrate, quadratic_form_B

__all__ = [
    "ConformalFactor", "TrigPolynomial", "normalize", "unit_factor", "spectrum",
    "zeta_diff", "kogan_zeta_minus1", "zeta_invariant_algebraic", "integrate", "quadratic_form_B",
]
