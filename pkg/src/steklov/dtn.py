"""Truncated matrices for Lambda, D, H, multiplication operators and Lambda_a.

All matrices act on the modes k = -N..N in the orthonormal basis
e_k = (2 pi)^{-1/2} exp(i k t); mode k sits at row/column k + N.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import EigensolveFailure
from .harmonics import ConformalFactor, TrigPolynomial, next_pow2, power

SYMMETRY_TOL = 1e-9
KERNEL_SNAP_ANGLE = 1e-4


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    truncation: int
    entries: np.ndarray
    hermitian: bool = False
    info: dict = field(default_factory=dict)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1)

    def index(self, k: int) -> int:
        return k + self.truncation

    def interior(self, margin: int) -> slice:
        """Index slice of modes |k| <= N - margin."""
        m = max(self.truncation - margin, 0)
        return slice(self.truncation - m, self.truncation + m + 1)

    def block(self, margin: int) -> np.ndarray:
        s = self.interior(margin)
        return self.entries[s, s]

    def __matmul__(self, other):
        if isinstance(other, TruncatedOperator):
            return TruncatedOperator(self.truncation, self.entries @ other.entries)
        return self.entries @ other

    def __add__(self, other):
        return TruncatedOperator(self.truncation, self.entries + other.entries)

    def __sub__(self, other):
        return TruncatedOperator(self.truncation, self.entries - other.entries)

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(self.truncation, self.entries.conj().T, self.hermitian)

    def hermitian_defect(self) -> float:
        e = self.entries
        scale = max(np.max(np.abs(e)), 1e-300)
        return float(np.max(np.abs(e - e.conj().T)) / scale)

    def to_json(self) -> dict:
        return {
            "truncation": self.truncation,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.entries],
        }


def _toeplitz(coeffs_full: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """entries[i, j] = c_{rows[i] - cols[j]} for a two-sided coefficient array."""
    n = (coeffs_full.size - 1) // 2
    diff = rows[:, None] - cols[None, :]
    out = np.zeros(diff.shape, dtype=complex)
    inside = np.abs(diff) <= n
    out[inside] = coeffs_full[diff[inside] + n]
    return out


def mult_operator(f: TrigPolynomial, N: int) -> TruncatedOperator:
    """Toeplitz matrix of multiplication by f."""
    if f.degree > 2 * N:
        warnings.warn(f"modes of f above 2N={2 * N} do not enter the window", stacklevel=2)
    k = np.arange(-N, N + 1)
    return TruncatedOperator(N, _toeplitz(f.full, k, k), f.is_real())


def _diag(N: int, symbol) -> TruncatedOperator:
    k = np.arange(-N, N + 1)
    return TruncatedOperator(N, np.diag(symbol(k).astype(complex)), True)


def lambda_matrix(N: int) -> TruncatedOperator:
    return _diag(N, np.abs)


def d_matrix(N: int) -> TruncatedOperator:
    return _diag(N, lambda k: k)


def h_matrix(N: int) -> TruncatedOperator:
    return _diag(N, np.sign)


def averaging_matrix(N: int) -> TruncatedOperator:
    """F_0: u -> (mean of u) * 1, i.e. the projector onto e_0."""
    e = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
    e[N, N] = 1.0
    return TruncatedOperator(N, e, True)


# -- factor dependent pieces (memoized per factor content and N) -----------

_cache: dict = {}
_cache_lock = threading.Lock()
_CACHE_SIZE = 64


def _memo(kind: str, a: ConformalFactor, N: int, build):
    key = (kind, a.key(), N)
    hit = _cache.get(key)
    if hit is not None:
        return hit
    value = build()
    with _cache_lock:
        if len(_cache) >= _CACHE_SIZE:
            _cache.pop(next(iter(_cache)))
        _cache.setdefault(key, value)
    return value


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()


def sqrt_series(a: ConformalFactor, N: int) -> TrigPolynomial:
    """a^{1/2} truncated to degree 2N (enough for every (k - l) in the window)."""
    return _memo("sqrt", a, N, lambda: _quiet_power(a.series, 0.5, 2 * N))


def inv_sqrt_series(a: ConformalFactor, N: int) -> TrigPolynomial:
    return _memo("isqrt", a, N, lambda: _quiet_power(a.series, -0.5, 2 * N))


def _quiet_power(f, p, degree):
    # high-degree tails of a^{+-1/2} are legitimately tiny; no warning spam
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        grid = next_pow2(max(8 * degree, 4 * (f.degree + degree), 256))
        return power(f, p, degree, grid)


def _sandwich(a: ConformalFactor, N: int, symbol) -> np.ndarray:
    """Compression to |k| <= N of a^{1/2} S a^{1/2} for a diagonal symbol S.

    The inner sum runs over all modes reachable through a^{1/2} (|m| <= 3N),
    so the result is the exact compression for the degree-2N root.
    """
    s = sqrt_series(a, N)
    rows = np.arange(-N, N + 1)
    inner = np.arange(-3 * N, 3 * N + 1)
    m = _toeplitz(s.full, rows, inner)
    return (m * symbol(inner)) @ m.conj().T


def _symmetrized(N: int, raw: np.ndarray) -> TruncatedOperator:
    sym = 0.5 * (raw + raw.conj().T)
    scale = max(float(np.max(np.abs(sym))), 1e-300)
    defect = float(np.max(np.abs(raw - sym)) / scale)
    if defect > SYMMETRY_TOL:
        raise EigensolveFailure(f"symmetrization defect {defect:.2e} too large")
    return TruncatedOperator(N, sym, True, {"symmetrization_defect": defect})


def lambda_a(a: ConformalFactor, N: int) -> TruncatedOperator:
    """Lambda_a = a^{1/2} Lambda a^{1/2}."""
    return _memo("lambda_a", a, N, lambda: _symmetrized(N, _sandwich(a, N, np.abs)))


def d_a(a: ConformalFactor, N: int) -> TruncatedOperator:
    """D_a = a^{1/2} D a^{1/2}."""
    return _memo("d_a", a, N, lambda: _symmetrized(N, _sandwich(a, N, lambda k: k.astype(float))))


def kernel_vector(a: ConformalFactor, N: int) -> np.ndarray:
    """Unit coordinate vector of a^{-1/2} (the kernel of Lambda_a)."""
    v = inv_sqrt_series(a, N).padded(N)
    return v / np.linalg.norm(v)


def p0_matrix(a: ConformalFactor, N: int) -> TruncatedOperator:
    """Orthogonal projector onto span{a^{-1/2}}."""
    v = kernel_vector(a, N)
    p = np.outer(v, v.conj())
    return TruncatedOperator(N, p, True, {"idempotency": float(np.max(np.abs(p @ p - p)))})


def commutator_core(f: TrigPolynomial) -> tuple[np.ndarray, np.ndarray]:
    """Finite matrix of Lambda f Lambda - D f D on the modes |k| <= deg f.

    Entries (|k||l| - k l) f_{k-l} vanish unless k l < 0, and then
    |k - l| <= deg f forces |k|, |l| <= deg f.
    """
    d = f.degree
    k = np.arange(-d, d + 1)
    t = _toeplitz(f.full, k, k) * (np.abs(np.outer(k, k)) - np.outer(k, k))
    return k, t


def smoothing_difference(a: ConformalFactor, N: int) -> TruncatedOperator:
    """Lambda_a^2 - D_a^2 = a^{1/2} (Lambda a Lambda - D a D) a^{1/2}."""
    def build():
        low, core = commutator_core(a.series)
        s = sqrt_series(a, N)
        rows = np.arange(-N, N + 1)
        m = _toeplitz(s.full, rows, low)
        ent = m @ core @ m.conj().T
        ent = 0.5 * (ent + ent.conj().T)
        ring = np.maximum(np.abs(rows)[:, None], np.abs(rows)[None, :])
        decay = np.array([np.max(np.abs(ent[ring == r])) for r in range(N + 1)])
        return TruncatedOperator(N, ent, True, {"ring_max": decay})
    return _memo("delta", a, N, build)


# -- spectra ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SteklovSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    trust_horizon: int
    truncation: int
    kernel_angle: float = 0.0

    @property
    def integer_targets(self) -> np.ndarray:
        k = np.arange(self.eigenvalues.size)
        return (k + 1) // 2

    def shifted(self) -> np.ndarray:
        """Eigenvalues of Lambda_a + P_0 (kernel mode lifted to 1)."""
        mu = self.eigenvalues.copy()
        mu[0] = 1.0
        return mu

    def shifted_power(self, p: float) -> np.ndarray:
        """(Lambda_a + P_0)^p by functional calculus."""
        v = self.eigenvectors
        return (v * self.shifted() ** p) @ v.conj().T

    def orthonormality_residual(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))

    def to_csv_rows(self):
        for k, lam in enumerate(self.eigenvalues):
            n = (k + 1) // 2
            yield k, float(lam), n, float(lam - n)


def spectrum(a: ConformalFactor, N: int, trust_horizon: int | None = None) -> SteklovSpectrum:
    """Hermitian eigendecomposition of the truncated Lambda_a."""
    horizon = N // 2 if trust_horizon is None else trust_horizon

    def build():
        mat = lambda_a(a, N).entries
        try:
            lam, vec = scipy.linalg.eigh(mat)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigensolveFailure(str(exc)) from exc
        v0 = kernel_vector(a, N)
        i0 = int(np.argmin(np.abs(lam)))
        overlap = min(abs(np.vdot(v0, vec[:, i0])), 1.0)
        angle = math.acos(overlap)
        if angle < KERNEL_SNAP_ANGLE:
            lam[i0] = 0.0
            vec[:, i0] = v0
            rest = np.delete(np.arange(lam.size), i0)
            w = vec[:, rest] - np.outer(v0, v0.conj() @ vec[:, rest])
            # Loewdin orthonormalization keeps each vector closest to its original
            u, _, vh = np.linalg.svd(w, full_matrices=False)
            vec[:, rest] = u @ vh
        else:
            warnings.warn(f"kernel eigenvector off by {angle:.2e} rad; not snapped", stacklevel=3)
        lam = np.where((lam < 0) & (lam >= -1e-10), 0.0, lam)
        order = np.argsort(lam, kind="stable")
        return SteklovSpectrum(lam[order], vec[:, order], horizon, N, angle)

    return _memo(f"spectrum{horizon}", a, N, build)


# -- explicit eigenbasis of D_a ---------------------------------------------

@dataclass(frozen=True, eq=False)
class DaEigenbasis:
    """phi_n = (2 pi)^{-1/2} a^{-1/2} exp(i n Theta), Theta(t) = int_0^t 1/a."""

    factor: ConformalFactor
    truncation: int
    grid_size: int
    theta_phase: np.ndarray
    inv_mean: float
    sqrt_a: np.ndarray

    @property
    def grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.grid_size) / self.grid_size

    def periodicity_residual(self, n: int) -> float:
        """|phi_n(2 pi) - phi_n(0)| relative, caused only by the normalization residual."""
        return abs(np.expm1(1j * n * 2 * np.pi * (self.inv_mean - 1.0)))

    def rotated(self, n: int) -> np.ndarray:
        """a^{1/2} phi_n on the grid = (2 pi)^{-1/2} exp(i n Theta)."""
        return np.exp(1j * n * self.theta_phase) / math.sqrt(2 * math.pi)

    def samples(self, n: int) -> np.ndarray:
        return self.rotated(n) / self.sqrt_a

    def coords(self, n: int, N: int | None = None) -> np.ndarray:
        """Coordinates of phi_n in the e_k basis, modes |k| <= N."""
        N = self.truncation if N is None else N
        spec = np.fft.fft(self.samples(n)) / self.grid_size
        k = np.arange(-N, N + 1)
        return math.sqrt(2 * math.pi) * spec[k % self.grid_size]

    def inner(self, n: int, m: int) -> complex:
        return complex(2 * np.pi * np.mean(self.samples(n) * np.conj(self.samples(m))))

    def d_a_residual(self, n: int) -> float:
        """Grid sup-norm of D_a phi_n - n phi_n."""
        u = self.rotated(n)
        k = np.fft.fftfreq(self.grid_size, 1.0 / self.grid_size)
        du = np.fft.ifft(k * np.fft.fft(u))
        return float(np.max(np.abs(self.sqrt_a * du - n * self.samples(n))))

    def lambda_a_rayleigh(self, n: int) -> float:
        """<Lambda_a phi_n, phi_n> = <Lambda g, g> with g = a^{1/2} phi_n."""
        spec = np.fft.fft(self.rotated(n)) / self.grid_size
        k = np.fft.fftfreq(self.grid_size, 1.0 / self.grid_size)
        return float(2 * np.pi * np.sum(np.abs(k) * np.abs(spec) ** 2))


def da_eigenbasis(a: ConformalFactor, N: int, grid_size: int | None = None) -> DaEigenbasis:
    m = next_pow2(grid_size or max(16 * N, 8 * a.degree, 256))
    vals = a.series.samples(m)
    if vals.min() <= 0:
        from .errors import NonPositiveSample
        raise NonPositiveSample("factor is not positive on the eigenbasis grid")
    r = np.fft.fft(1.0 / vals) / m
    k = np.fft.fftfreq(m, 1.0 / m)
    r0 = r[0].real
    t = 2 * np.pi * np.arange(m) / m
    coef = np.zeros(m, dtype=complex)
    nz = (k != 0) & (np.abs(k) < m // 2)
    coef[nz] = r[nz] / (1j * k[nz])
    periodic = (np.fft.ifft(coef) * m).real - coef.sum().real
    phase = r0 * t + periodic
    return DaEigenbasis(a, N, m, phase, float(r0), np.sqrt(vals))


def eigen_alignment_residual(a: ConformalFactor, N: int, k: int,
                             spec: SteklovSpectrum | None = None,
                             basis: DaEigenbasis | None = None) -> float:
    """Distance of Psi_k from span{phi_n, phi_-n}, n = floor((k+1)/2)."""
    spec = spec or spectrum(a, N)
    basis = basis or da_eigenbasis(a, N)
    n = (k + 1) // 2
    cols = [basis.coords(n, N)] if n == 0 else [basis.coords(n, N), basis.coords(-n, N)]
    q, _ = np.linalg.qr(np.column_stack(cols))
    psi = spec.eigenvectors[:, k]
    return float(np.linalg.norm(psi - q @ (q.conj().T @ psi)))
