"""Seeded test inputs: random smooth factors and conformally trivial ones."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .harmonics import ConformalFactor, TrigPolynomial, normalize


@dataclass(frozen=True)
class FixtureConfig:
    """Random factor 1 + sum_j c_j e^{ijt} + c.c. with |c_j| ~ amplitude * decay^(j-1)."""

    min_degree: int = 2
    max_degree: int = 6
    amplitude: tuple = (0.02, 0.05)
    decay: float = 0.5


def random_factor(seed: int, degree: int | None = None, config: FixtureConfig = FixtureConfig()) -> ConformalFactor:
    rng = np.random.default_rng(seed)
    d = degree if degree is not None else int(rng.integers(config.min_degree, config.max_degree + 1))
    eps = rng.uniform(*config.amplitude)
    c = np.zeros(d + 1, dtype=complex)
    c[0] = 1.0
    phases = rng.uniform(0, 2 * np.pi, d)
    radii = rng.uniform(0.5, 1.0, d)
    c[1:] = eps * radii * config.decay ** np.arange(d) * np.exp(1j * phases)
    return normalize(TrigPolynomial.from_coeffs(c))


def trivial_factor(eps: float = 0.3, phase: float = 0.0) -> ConformalFactor:
    """Normalized multiple of 1 + eps cos(t + phase); Mobius-equivalent to 1."""
    if not 0 <= eps < 1:
        raise ValueError("need 0 <= eps < 1")
    return normalize(TrigPolynomial.from_coeffs([1.0, 0.5 * eps * np.exp(1j * phase)]))


def random_factors(count: int, start: int = 0, **kw) -> list[ConformalFactor]:
    return [random_factor(start + i, **kw) for i in range(count)]


def trivial_factors() -> list[ConformalFactor]:
    return [trivial_factor(e, p) for e, p in [(0.1, 0.0), (0.3, 0.0), (0.3, 1.1), (0.5, 2.5)]]


def fixture_set(count: int = 20, start: int = 0) -> list[tuple[str, ConformalFactor, bool]]:
    """(label, factor, conformally_trivial) triples used across the test suite."""
    out = [(f"random-{start + i}", a, False) for i, a in enumerate(random_factors(count, start))]
    out += [(f"trivial-{i}", a, True) for i, a in enumerate(trivial_factors())]
    return out
