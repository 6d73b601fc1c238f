"""Riemann zeta on the real line, with the pole at s = 1 raised as an error."""
from __future__ import annotations

import scipy.special

from .errors import PoleAtOne


def riemann_zeta(s: float) -> float:
    s = float(s)
    if s == 1.0:
        raise PoleAtOne("Riemann zeta has a pole at s = 1")
    return float(scipy.special.zeta(s))
