"""Named identity checks shared by the ``check`` command and the test suite.

Each check returns a ``CheckResult`` with the observed residual and the
threshold it is held to.  ``CheckContext.fault`` lets tests corrupt one
ingredient and confirm that the corresponding check notices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dtn, zeta
from .fixtures import random_factor, trivial_factors
from .flow import quadratic_form_B
from .harmonics import TrigPolynomial, hilbert_H


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    threshold: float
    detail: str = ""


@dataclass
class CheckContext:
    seed: int = 0
    truncation: int = 32
    fixtures: int = 5
    fault: str | None = None

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def lambda_matrix(self) -> np.ndarray:
        lam = dtn.lambda_matrix(self.truncation).entries.copy()
        if self.fault == "lambda":
            n = self.truncation
            lam[n + 3, n + 3] += 1e-3
        return lam

    def factors(self):
        return [random_factor(self.seed * 1000 + i) for i in range(self.fixtures)]


def random_trig(rng: np.random.Generator, degree: int) -> TrigPolynomial:
    c = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    c[0] = c[0].real
    return TrigPolynomial.from_coeffs(c / np.arange(1, degree + 2))


def _result(name, residual, threshold, detail=""):
    return CheckResult(name, bool(residual < threshold), float(residual), threshold, detail)


def check_product_formula(ctx: CheckContext) -> CheckResult:
    """H(uv + Hu Hv) = u Hv + v Hu."""
    rng = ctx.rng(1)
    worst = 0.0
    for _ in range(10):
        u = random_trig(rng, int(rng.integers(1, 11)))
        v = random_trig(rng, int(rng.integers(1, 11)))
        lhs = hilbert_H(u * v + hilbert_H(u) * hilbert_H(v))
        rhs = u * hilbert_H(v) + v * hilbert_H(u)
        worst = max(worst, float(np.max(np.abs((lhs - rhs).samples(64)))))
    return _result("product_formula", worst, 1e-10)


def _mult(f: TrigPolynomial, N: int) -> np.ndarray:
    return dtn.mult_operator(f, N).entries


def check_hilbert_commutator(ctx: CheckContext) -> CheckResult:
    """[H, M_{Hf}] = H [H, M_f] + F_0 M_f - f_0 F_0 on the interior block."""
    N = ctx.truncation
    rng = ctx.rng(2)
    h = dtn.h_matrix(N).entries
    f0 = dtn.averaging_matrix(N).entries
    worst = 0.0
    for _ in range(5):
        d = int(rng.integers(1, 7))
        f = random_trig(rng, d)
        mf, mhf = _mult(f, N), _mult(hilbert_H(f), N)
        lhs = h @ mhf - mhf @ h
        rhs = h @ (h @ mf - mf @ h) + f0 @ mf - f.coefficient(0) * f0
        sl = slice(d, 2 * N + 1 - d)
        worst = max(worst, float(np.max(np.abs((lhs - rhs)[sl, sl]))))
    return _result("hilbert_commutator", worst, 1e-9)


def check_dtn_commutator(ctx: CheckContext) -> CheckResult:
    """Lambda [H, M_{Hf}] Lambda = Lambda M_f Lambda - D M_f D on the interior block."""
    N = ctx.truncation
    rng = ctx.rng(3)
    lam = ctx.lambda_matrix()
    h = dtn.h_matrix(N).entries
    dm = dtn.d_matrix(N).entries
    worst = 0.0
    for _ in range(5):
        d = int(rng.integers(1, 7))
        f = random_trig(rng, d)
        mf, mhf = _mult(f, N), _mult(hilbert_H(f), N)
        lhs = lam @ (h @ mhf - mhf @ h) @ lam
        rhs = lam @ mf @ lam - dm @ mf @ dm
        sl = slice(d, 2 * N + 1 - d)
        worst = max(worst, float(np.max(np.abs((lhs - rhs)[sl, sl]))))
    return _result("dtn_commutator", worst, 1e-9)


def check_quadratic_form(ctx: CheckContext) -> CheckResult:
    """B(1 + cos t) = -1 - cos t, and the fast form agrees with the definition."""
    b = TrigPolynomial.from_coeffs([1.0, 0.5])
    pinned = float(np.max(np.abs(quadratic_form_B(b).full - np.array([-0.5, -1.0, -0.5]))))
    rng = ctx.rng(4)
    for _ in range(5):
        quadratic_form_B(random_trig(rng, int(rng.integers(1, 7))), check=True)
    return _result("quadratic_form", pinned, 1e-14)


def check_kogan(ctx: CheckContext) -> CheckResult:
    """Spectral zeta(-1) against the closed-form integral."""
    worst = 0.0
    for a in ctx.factors() + trivial_factors():
        spectral = zeta.zeta_diff(a, -1.0, 2 * ctx.truncation).zeta_a
        worst = max(worst, abs(spectral - zeta.kogan_zeta_minus1(a)))
    return _result("kogan_vs_spectral", worst, 1e-5)


def check_invariants(ctx: CheckContext) -> CheckResult:
    """Spectral zeta(-2m) against the algebraic formula, m = 1, 2, degree <= 4."""
    worst = 0.0
    for i in range(ctx.fixtures):
        a = random_factor(ctx.seed * 1000 + i, degree=1 + i % 4)
        for m in (1, 2):
            spectral = zeta.zeta_diff(a, -2.0 * m, 2 * ctx.truncation).zeta_a
            worst = max(worst, abs(spectral - zeta.zeta_invariant_algebraic(a, m)))
    return _result("algebraic_vs_spectral", worst, 1e-5)


def check_trace_signs(ctx: CheckContext) -> CheckResult:
    """trace_functional >= 0 for s > 0, <= 0 for s < 0, ~0 on trivial factors."""
    worst = 0.0
    for a in ctx.factors():
        for s in (0.5, 1.0, 2.0, 3.0):
            worst = max(worst, -zeta.trace_functional(a, s, 2 * ctx.truncation))
        for s in (-3.0, -2.0, -1.0, -0.5):
            worst = max(worst, zeta.trace_functional(a, s, 2 * ctx.truncation))
    trivial = max(abs(zeta.trace_functional(a, s, 2 * ctx.truncation))
                  for a in trivial_factors() for s in (-2.0, 2.0))
    passed = worst <= 1e-8 and trivial < 1e-7
    return CheckResult("trace_signs", passed, max(worst, trivial), 1e-8,
                       f"sign violation {worst:.2e}, trivial magnitude {trivial:.2e}")


def check_unit_spectrum(ctx: CheckContext) -> CheckResult:
    """a = 1 has eigenvalues 0, 1, 1, 2, 2, ..."""
    from .harmonics import unit_factor

    spec = dtn.spectrum(unit_factor(), ctx.truncation)
    return _result("unit_spectrum", float(np.max(np.abs(spec.eigenvalues - spec.integer_targets))), 1e-10)


REGISTRY: dict[str, Callable[[CheckContext], CheckResult]] = {
    "product_formula": check_product_formula,
    "hilbert_commutator": check_hilbert_commutator,
    "dtn_commutator": check_dtn_commutator,
    "quadratic_form": check_quadratic_form,
    "unit_spectrum": check_unit_spectrum,
    "kogan_vs_spectral": check_kogan,
    "algebraic_vs_spectral": check_invariants,
    "trace_signs": check_trace_signs,
}


def run_checks(ctx: CheckContext | None = None, names=None) -> list[CheckResult]:
    ctx = ctx or CheckContext()
    return [REGISTRY[n](ctx) for n in (names or REGISTRY)]
