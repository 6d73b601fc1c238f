"""Regularized Steklov zeta values, invariants and variation formulas."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from . import dtn
from .errors import ComplexityLimit, MeanNotZero, QuadratureBudget
from .harmonics import ConformalFactor, TrigPolynomial, default_grid, real_derivative
from .riemann import riemann_zeta

DEFAULT_N = 64
ALGEBRAIC_BUDGET = 2_000_000


@dataclass(frozen=True)
class ZetaValue:
    s: float
    diff: float
    zeta_a: float | None
    tail_estimate: float


def _pair_terms(lam: np.ndarray, n: np.ndarray, s: float) -> np.ndarray:
    """lam^{-s} - n^{-s} without cancellation when lam is close to n."""
    return n ** (-s) * np.expm1(-s * np.log1p((lam - n) / n))


def zeta_diff(a: ConformalFactor, s: float, N: int = DEFAULT_N) -> ZetaValue:
    """zeta_a(s) - 2 zeta_R(s) summed over the trusted eigenvalues."""
    spec = dtn.spectrum(a, N)
    K = spec.trust_horizon
    lam = spec.eigenvalues[1:K + 1]
    n = spec.integer_targets[1:K + 1].astype(float)
    terms = _pair_terms(lam, n, float(s))
    diff = math.fsum(terms)
    zeta_a = None if s == 1 else diff + 2 * riemann_zeta(s)
    return ZetaValue(float(s), diff, zeta_a, float(abs(terms[-1])) if terms.size else 0.0)


def kogan_zeta_minus1(a: ConformalFactor, grid_size: int | None = None) -> float:
    """zeta_a(-1) = (1/12 pi) * integral((a')^2 / a - a)."""
    m = grid_size or 2 * default_grid(a.degree)
    vals = a.series.samples(m)
    da = real_derivative(a.series).samples(m)
    return float(np.mean(da ** 2 / vals - vals) / 6.0)


def _tuples(d: int, length: int):
    """All (j_1..j_length) with |j_i| <= d, as an int array."""
    base = np.arange(-d, d + 1)
    grids = np.meshgrid(*([base] * length), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def zeta_invariant_algebraic(a: ConformalFactor | TrigPolynomial, m: int,
                             budget: int = ALGEBRAIC_BUDGET, chunk: int = 200_000) -> float:
    """zeta_a(-2m) from the finite Fourier-coefficient formula.

    Sum over j_1 + ... + j_{2m} = 0 of N_j * a_{j_1}...a_{j_{2m}}, where
    N_j = sum_n (|f(n)| - f(n)) and f(n) = n (n + j_1) ... (n + j_1 + ... + j_{2m-1}).
    f is negative only between its extreme roots -max(S) and -min(S).
    """
    series = a.series if isinstance(a, ConformalFactor) else a
    if m < 1:
        raise ValueError("m must be a positive integer")
    d = series.degree
    if d == 0:
        return 0.0
    free = 2 * m - 1
    count = (2 * d + 1) ** free
    if count > budget:
        raise ComplexityLimit(f"{count} index tuples exceed budget {budget}")
    coef = series.full
    tuples = _tuples(d, free)
    last = -tuples.sum(axis=1)
    keep = np.abs(last) <= d
    tuples = np.concatenate([tuples[keep], last[keep, None]], axis=1)
    # partial sums S_0 = 0, S_1 = j_1, ..., S_{2m-1}
    partial = np.concatenate([np.zeros((len(tuples), 1), dtype=np.int64), np.cumsum(tuples[:, :-1], axis=1)], axis=1)
    span = free * d
    ns = np.arange(-span, span + 1, dtype=np.int64)
    total = 0j
    for lo in range(0, len(tuples), chunk):
        p = partial[lo:lo + chunk]
        f = np.ones((len(p), ns.size), dtype=np.int64)
        for r in range(p.shape[1]):
            f *= ns[None, :] + p[:, r:r + 1]
        weight = (np.abs(f) - f).sum(axis=1)
        nz = weight != 0
        if not nz.any():
            continue
        prod = np.prod(coef[tuples[lo:lo + chunk][nz] + d], axis=1)
        total += np.dot(weight[nz].astype(float), prod)
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        warnings.warn(f"algebraic invariant has imaginary part {total.imag:.2e}", stacklevel=2)
    return float(total.real)


# -- trace functionals --------------------------------------------------------

def trace_terms(a: ConformalFactor, s: float, N: int = DEFAULT_N) -> np.ndarray:
    """Per-eigenvector terms mu_k^{s-1} <(Lambda_a^2 - D_a^2) Psi_k, Psi_k>, k <= K."""
    spec = dtn.spectrum(a, N)
    K = spec.trust_horizon
    low, core = dtn.commutator_core(a.series)
    rows = np.arange(-N, N + 1)
    msq = dtn._toeplitz(dtn.sqrt_series(a, N).full, rows, low)
    u = msq.conj().T @ spec.eigenvectors[:, :K + 1]
    quad = np.einsum("ik,ij,jk->k", u.conj(), core, u).real
    return spec.shifted()[:K + 1] ** (s - 1) * quad


def trace_functional(a: ConformalFactor, s: float, N: int = DEFAULT_N) -> float:
    """Tr[(Lambda_a + P_0)^{s-1} (Lambda_a^2 - D_a^2)] over the trusted range."""
    return math.fsum(trace_terms(a, s, N))


def first_variation_flow(a: ConformalFactor, s: float, N: int = DEFAULT_N) -> float:
    """d/dtau zeta along the flow direction: s * Tr[(Lambda_a+P_0)^{-s-1} (Lambda_a^2 - D_a^2)]."""
    return s * trace_functional(a, -s, N)


def commutator_hilbert(g: TrigPolynomial) -> tuple[np.ndarray, np.ndarray]:
    """Finite matrix of [H, g] on |k| <= deg g: (sgn j - sgn l) g_{j-l}."""
    d = g.degree
    k = np.arange(-d, d + 1)
    sg = np.sign(k)
    return k, dtn._toeplitz(g.full, k, k) * (sg[:, None] - sg[None, :])


def first_variation_general(a: ConformalFactor, g: TrigPolynomial, s: float, N: int = DEFAULT_N) -> float:
    """-i s Tr[(Lambda_a+P_0)^{1-s} (I - P_0) a^{-1/2} [H, g] a^{-1/2}]."""
    if abs(g.coefficient(0)) > 1e-12:
        raise MeanNotZero(f"g has mean {g.coefficient(0):.3e}")
    spec = dtn.spectrum(a, N)
    K = spec.trust_horizon
    if g.degree == 0:
        return 0.0
    low, comm = commutator_hilbert(g)
    rows = np.arange(-N, N + 1)
    mis = dtn._toeplitz(dtn.inv_sqrt_series(a, N).full, rows, low)
    w = mis.conj().T @ spec.eigenvectors[:, 1:K + 1]
    quad = np.einsum("ik,ij,jk->k", w.conj(), comm, w)
    trace = np.sum(spec.eigenvalues[1:K + 1] ** (1 - s) * quad)
    value = -1j * s * trace
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        warnings.warn(f"first variation has imaginary part {value.imag:.2e}", stacklevel=2)
    return float(value.real)


def second_variation_at_one(beta: TrigPolynomial, s: float) -> float:
    """Second tau-derivative of zeta at a = 1 along a variation with derivative beta.

    The first double sum skips n = p; those pairs belong to the second sum.
    """
    if abs(beta.coefficient(0)) > 1e-12:
        raise MeanNotZero("beta must have zero mean")
    d = beta.degree
    first = 0.0
    for n, p in itertools.product(range(1, d + 1), repeat=2):
        if n == p or n + p > d:
            continue
        first += p * n * (n ** (-s) - p ** (-s)) / (p * p - n * n) * abs(beta.coefficient(n + p)) ** 2
    second = sum(n ** (-s) * abs(beta.coefficient(2 * n)) ** 2 for n in range(1, d // 2 + 1))
    return 4 * s * first + 2 * s * s * second


# -- complex powers via the resolvent ----------------------------------------

def gamma_factor(z: float) -> float:
    """1 / integral_0^inf lam^{-z} (1 + lam)^{-1} d lam = sin(pi z) / pi."""
    return math.sin(math.pi * z) / math.pi


def _resolvent_integral(A: np.ndarray, z: float, points: int, scale: float) -> np.ndarray:
    # alpha + beta = -1 makes scipy divide 0/0 in a branch it then discards
    with np.errstate(divide="ignore", invalid="ignore"):
        x, w = scipy.special.roots_jacobi(points, z - 1.0, -z)
    t = 0.5 * (1.0 + x)
    eye = np.eye(A.shape[0])
    acc = np.zeros_like(A, dtype=complex)
    for ti, wi in zip(t, w):
        acc += wi * np.linalg.inv((1.0 - ti) * A + scale * ti * eye)
    return scale ** (1.0 - z) * acc


def power_via_resolvent(a: ConformalFactor, z: float, N: int = DEFAULT_N, points: int = 200,
                        tol: float | None = None, scale: float | None = None) -> dtn.TruncatedOperator:
    """(Lambda_a + P_0)^{-2z} = gamma(z) * integral_0^inf lam^{-z} (Lambda_a^2 + P_0 + lam)^{-1} d lam.

    The half line is mapped to (0, 1) by lam = c t / (1 - t); the Jacobi
    weight t^{-z} (1 - t)^{z-1} absorbs both endpoint singularities.  The
    scale c defaults to the square root of a Gershgorin bound on the
    spectrum, which balances the nearest resolvent poles at both ends.
    """
    if not 0 < z < 1:
        raise ValueError("z must lie in (0, 1)")
    L = dtn.lambda_a(a, N).entries
    A = L @ L + dtn.p0_matrix(a, N).entries
    A = 0.5 * (A + A.conj().T)
    c = scale or math.sqrt(max(float(np.max(np.sum(np.abs(A), axis=1))), 1.0))
    out = gamma_factor(z) * _resolvent_integral(A, z, points, c)
    info = {"points": points, "scale": c}
    if tol is not None:
        coarse = gamma_factor(z) * _resolvent_integral(A, z, max(points // 2, 1), c)
        err = float(np.max(np.abs(out - coarse)))
        info["error_estimate"] = err
        if err > tol:
            raise QuadratureBudget(f"estimated error {err:.2e} > {tol:.1e} at {points} points")
    return dtn.TruncatedOperator(N, out, True, info)


def power_via_eigen(a: ConformalFactor, p: float, N: int = DEFAULT_N) -> dtn.TruncatedOperator:
    """(Lambda_a + P_0)^p from the eigendecomposition."""
    return dtn.TruncatedOperator(N, dtn.spectrum(a, N).shifted_power(p), True)


# -- compact-set monitors -------------------------------------------------------

@dataclass(frozen=True)
class CompactSetSnapshot:
    hat_b0: float
    zeta_minus1: float
    z_minus_2m: tuple = field(default_factory=tuple)

    def as_vector(self) -> np.ndarray:
        return np.array([self.hat_b0, self.zeta_minus1, *self.z_minus_2m])

    def to_json(self) -> dict:
        return {"hat_b0": self.hat_b0, "zeta_minus1": self.zeta_minus1, "z_minus_2m": list(self.z_minus_2m)}


def compact_set_snapshot(a: ConformalFactor, M: int = 2, budget: int = ALGEBRAIC_BUDGET) -> CompactSetSnapshot:
    zs = tuple(zeta_invariant_algebraic(a, m, budget) for m in range(1, M + 1))
    return CompactSetSnapshot(a.series.mean, kogan_zeta_minus1(a), zs)


def zeta_sweep(a: ConformalFactor, s_values, N: int = DEFAULT_N) -> list[ZetaValue]:
    return [zeta_diff(a, s, N) for s in s_values]


def eigen_power_error(a: ConformalFactor, z: float, N: int, points: int) -> float:
    """Max-entry gap between the resolvent and eigendecomposition routes."""
    res = power_via_resolvent(a, z, N, points).entries
    ref = power_via_eigen(a, -2 * z, N).entries
    return float(np.max(np.abs(res - ref)))


__all__ = [
    "ZetaValue", "CompactSetSnapshot", "riemann_zeta", "zeta_diff", "kogan_zeta_minus1",
    "zeta_invariant_algebraic", "trace_functional", "trace_terms", "first_variation_flow",
    "first_variation_general", "second_variation_at_one", "gamma_factor", "power_via_resolvent",
    "power_via_eigen", "compact_set_snapshot", "zeta_sweep", "eigen_power_error",
]
