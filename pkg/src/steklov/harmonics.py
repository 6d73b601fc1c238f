"""Finite Fourier algebra on the unit circle.

Functions on the circle are stored as trigonometric polynomials
``f(t) = sum_{|k| <= N} c_k exp(i k t)``.  The coefficient array is kept
two-sided (index ``k + N``) so that non-real intermediates such as ``D f``
or ``H f`` fit the same type; real functions satisfy ``c_{-k} = conj(c_k)``.

Nonlinear operations (reciprocal, powers, composition) go through uniform
grids ``t_j = 2 pi j / M`` and always take an explicit output degree.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AliasingRisk,
    DegenerateMap,
    InputError,
    NonPositiveSample,
    NormalizationError,
)

TAIL_WARN = 1e-10
POSITIVITY_MARGIN = 1e-9
NORMALIZATION_TOL = 1e-8


class TruncationWarning(UserWarning):
    """Emitted when the tail of a truncated series carries visible mass."""


def next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 1).bit_length()


def default_grid(degree: int) -> int:
    """Power-of-two grid, 8x oversampled, never below 64 points."""
    return max(64, next_pow2(8 * max(int(degree), 1)))


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    full: np.ndarray

    def __post_init__(self):
        arr = np.array(self.full, dtype=complex)
        if arr.ndim != 1 or arr.size % 2 != 1:
            raise ValueError("two-sided coefficient array must have odd length")
        arr.setflags(write=False)
        object.__setattr__(self, "full", arr)

    # -- construction -------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs: Sequence[complex]) -> "TrigPolynomial":
        """Real function from one-sided coefficients c_0..c_N."""
        c = np.asarray(coeffs, dtype=complex)
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if abs(c[0].imag) > 1e-14 * max(1.0, abs(c[0])):
            raise InputError("c_0 of a real function must be real")
        c = c.copy()
        c[0] = c[0].real
        return cls(np.concatenate([np.conj(c[:0:-1]), c]))

    @classmethod
    def constant(cls, value: float) -> "TrigPolynomial":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def cos(cls, k: int, amplitude: float = 1.0) -> "TrigPolynomial":
        c = np.zeros(k + 1, dtype=complex)
        c[k] += amplitude / 2 if k else amplitude
        return cls.from_coeffs(c)

    @classmethod
    def sin(cls, k: int, amplitude: float = 1.0) -> "TrigPolynomial":
        c = np.zeros(k + 1, dtype=complex)
        if k:
            c[k] = amplitude / 2j
        return cls.from_coeffs(c)

    @classmethod
    def mode(cls, k: int, amplitude: complex = 1.0) -> "TrigPolynomial":
        """Single complex exponential amplitude * exp(i k t) (not real)."""
        n = abs(k)
        arr = np.zeros(2 * n + 1, dtype=complex)
        arr[k + n] = amplitude
        return cls(arr)

    @classmethod
    def from_samples(cls, values, degree: int) -> "TrigPolynomial":
        """Truncated Fourier series of uniform samples on [0, 2 pi)."""
        values = np.asarray(values)
        m = values.size
        if 2 * degree + 1 > m:
            raise AliasingRisk(f"{m} samples cannot resolve degree {degree}")
        spec = np.fft.fft(values) / m
        ks = np.arange(-degree, degree + 1)
        out = spec[ks % m]
        if np.isrealobj(values):
            out = 0.5 * (out + np.conj(out[::-1]))
        return cls(out)

    # -- basic views ---------------------------------------------------
    @property
    def degree(self) -> int:
        return (self.full.size - 1) // 2

    @property
    def coeffs(self) -> np.ndarray:
        """One-sided coefficients c_0..c_N."""
        return self.full[self.degree:]

    def coefficient(self, k: int) -> complex:
        n = self.degree
        return complex(self.full[k + n]) if abs(k) <= n else 0j

    @property
    def mean(self) -> float:
        return float(self.full[self.degree].real)

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.full))))
        return bool(np.max(np.abs(self.full - np.conj(self.full[::-1]))) <= tol * scale)

    def padded(self, degree: int) -> np.ndarray:
        """Two-sided coefficients on [-degree, degree] (zero-padded or cut)."""
        n = self.degree
        out = np.zeros(2 * degree + 1, dtype=complex)
        m = min(n, degree)
        out[degree - m:degree + m + 1] = self.full[n - m:n + m + 1]
        return out

    def truncate(self, degree: int) -> "TrigPolynomial":
        return TrigPolynomial(self.padded(degree))

    def trimmed(self, tol: float = 0.0) -> "TrigPolynomial":
        """Drop top modes whose magnitude is <= tol."""
        n = self.degree
        mags = np.abs(self.full)
        while n > 0 and max(mags[self.degree - n], mags[self.degree + n]) <= tol:
            n -= 1
        return self.truncate(n)

    def conj(self) -> "TrigPolynomial":
        return TrigPolynomial(np.conj(self.full[::-1]))

    def samples(self, grid_size: int) -> np.ndarray:
        """Values at t_j = 2 pi j / M; real array when the function is real."""
        m = int(grid_size)
        n = self.degree
        if 2 * n + 1 > m:
            raise AliasingRisk(f"grid of {m} points cannot hold degree {n}")
        buf = np.zeros(m, dtype=complex)
        ks = np.arange(-n, n + 1)
        np.add.at(buf, ks % m, self.full)
        vals = np.fft.ifft(buf) * m
        if self.is_real():
            return vals.real
        return vals

    def __call__(self, theta):
        return evaluate(self, theta)

    # -- arithmetic ----------------------------------------------------
    def _binary(self, other, sign):
        if isinstance(other, TrigPolynomial):
            n = max(self.degree, other.degree)
            return TrigPolynomial(self.padded(n) + sign * other.padded(n))
        arr = self.full.copy()
        arr[self.degree] += sign * other
        return TrigPolynomial(arr)

    def __add__(self, other):
        return self._binary(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, -1)

    def __rsub__(self, other):
        return (-self)._binary(other, 1)

    def __neg__(self):
        return TrigPolynomial(-self.full)

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            return multiply(self, other)
        return TrigPolynomial(self.full * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TrigPolynomial(self.full / scalar)

    def __repr__(self):
        return f"TrigPolynomial(degree={self.degree}, coeffs={np.round(self.coeffs, 12).tolist()})"


def allclose(f: TrigPolynomial, g: TrigPolynomial, atol: float = 1e-12) -> bool:
    n = max(f.degree, g.degree)
    return bool(np.max(np.abs(f.padded(n) - g.padded(n))) <= atol)


def tail_mass(f: TrigPolynomial) -> float:
    """l2 mass of the top 10% of modes relative to the total l2 mass."""
    n = f.degree
    if n == 0:
        return 0.0
    ks = np.abs(np.arange(-n, n + 1))
    cut = max(1, int(math.ceil(0.1 * n)))
    total = np.linalg.norm(f.full)
    if total == 0:
        return 0.0
    return float(np.linalg.norm(f.full[ks > n - cut]) / total)


def _check_tail(f: TrigPolynomial, what: str) -> TrigPolynomial:
    mass = tail_mass(f)
    if mass > TAIL_WARN:
        warnings.warn(f"{what}: tail mass {mass:.2e} at degree {f.degree}", TruncationWarning, stacklevel=3)
    return f


# -- linear operations -------------------------------------------------

def evaluate(f: TrigPolynomial, theta):
    """Point evaluation; real output when f is real."""
    th = np.asarray(theta, dtype=float)
    ks = np.arange(-f.degree, f.degree + 1)
    vals = np.exp(1j * np.multiply.outer(th, ks)) @ f.full
    if f.is_real():
        scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 1.0)
        if np.max(np.abs(vals.imag), initial=0.0) > 1e-12 * scale:
            raise ArithmeticError("real series evaluated to a complex value")
        vals = vals.real
    return vals if th.ndim else vals.item()


def multiply(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    """Exact product; degree adds."""
    return TrigPolynomial(np.convolve(f.full, g.full))


def _multiplier(f: TrigPolynomial, symbol) -> TrigPolynomial:
    ks = np.arange(-f.degree, f.degree + 1)
    return TrigPolynomial(f.full * symbol(ks))


def derivative_D(f: TrigPolynomial) -> TrigPolynomial:
    """D = -i d/dt, i.e. c_k -> k c_k."""
    return _multiplier(f, lambda k: k)


def real_derivative(f: TrigPolynomial) -> TrigPolynomial:
    """d/dt = i D."""
    return _multiplier(f, lambda k: 1j * k)


def lambda_op(f: TrigPolynomial) -> TrigPolynomial:
    """Dirichlet-to-Neumann map of the unit disk: c_k -> |k| c_k."""
    return _multiplier(f, np.abs)


def hilbert_H(f: TrigPolynomial) -> TrigPolynomial:
    """c_k -> sgn(k) c_k, constants are annihilated."""
    return _multiplier(f, np.sign)


def mean_integral(f: TrigPolynomial) -> float:
    """Integral of f over [0, 2 pi]."""
    return 2 * math.pi * f.mean


# -- grid based nonlinear operations ------------------------------------

def _positive_samples(f: TrigPolynomial, grid_size: int) -> np.ndarray:
    vals = f.samples(grid_size)
    if np.iscomplexobj(vals):
        raise InputError("expected a real function")
    margin = POSITIVITY_MARGIN * float(np.max(np.abs(vals)))
    if vals.min() <= margin:
        raise NonPositiveSample(f"minimum sample {vals.min():.3e} is not positive")
    return vals


def power(f: TrigPolynomial, exponent: float, output_degree: int, grid_size: int | None = None) -> TrigPolynomial:
    """Pointwise f**exponent of a positive f, truncated to output_degree."""
    m = grid_size or next_pow2(4 * (f.degree + output_degree) + 1)
    if m < 4 * (f.degree + output_degree):
        raise AliasingRisk(f"grid {m} < 4*(deg f + output degree)")
    vals = _positive_samples(f, m)
    out = TrigPolynomial.from_samples(vals ** exponent, output_degree)
    return _check_tail(out, f"power {exponent}")


def reciprocal(f: TrigPolynomial, grid_size: int, output_degree: int) -> TrigPolynomial:
    """1/f by grid sampling, truncated to output_degree."""
    if grid_size < 4 * (f.degree + output_degree):
        raise AliasingRisk(f"grid {grid_size} < 4*(deg f + output degree)")
    return power(f, -1.0, output_degree, grid_size)


# -- conformal factors --------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConformalFactor:
    """Positive real series with (1/2 pi) * integral(1/a) = 1."""

    series: TrigPolynomial
    grid_size: int
    min_value: float
    residual: float
    tolerance: float = NORMALIZATION_TOL
    scale: float = 1.0

    @classmethod
    def validate(cls, series: TrigPolynomial, grid_size: int | None = None,
                 tolerance: float = NORMALIZATION_TOL, scale: float = 1.0) -> "ConformalFactor":
        if not series.is_real():
            raise InputError("conformal factor must be a real function")
        m = grid_size or default_grid(series.degree)
        vals = _positive_samples(series, m)
        residual = abs(float(np.mean(1.0 / vals)) - 1.0)
        if residual > tolerance:
            raise NormalizationError(f"normalization residual {residual:.3e} exceeds {tolerance:.1e}")
        return cls(series, m, float(vals.min()), residual, tolerance, scale)

    @property
    def degree(self) -> int:
        return self.series.degree

    def samples(self, grid_size: int | None = None) -> np.ndarray:
        return self.series.samples(grid_size or self.grid_size)

    def key(self) -> bytes:
        return self.series.full.tobytes()


def unit_factor() -> ConformalFactor:
    return ConformalFactor.validate(TrigPolynomial.constant(1.0))


def normalization_constant(f: TrigPolynomial, grid_size: int | None = None) -> float:
    """c = (1/2 pi) * integral(1/f), so that c*f is normalized."""
    m = grid_size or default_grid(f.degree)
    return float(np.mean(1.0 / _positive_samples(f, m)))


def normalize(f: TrigPolynomial, grid_size: int | None = None,
              tolerance: float = NORMALIZATION_TOL) -> ConformalFactor:
    """Rescale a positive f to satisfy the normalization condition."""
    m = grid_size or default_grid(f.degree)
    c = normalization_constant(f, m)
    series = f * c
    arr = series.full.copy()
    arr[series.degree] = arr[series.degree].real
    return ConformalFactor.validate(TrigPolynomial(arr), m, tolerance, scale=c)


@dataclass(frozen=True)
class MobiusParameter:
    """Disk automorphism z -> (z - w)/(1 - conj(w) z), optionally preceded by z -> conj(z)."""

    w: complex
    orientation: int = 1

    def __post_init__(self):
        if not abs(self.w) < 1:
            raise ValueError("Mobius parameter must satisfy |w| < 1")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def boundary_angle(self, theta: np.ndarray) -> np.ndarray:
        z = np.exp(1j * self.orientation * theta)
        return np.angle((z - self.w) / (1 - np.conj(self.w) * z))

    def boundary_speed(self, theta: np.ndarray) -> np.ndarray:
        """|d psi / d theta| = |Psi'(z)| on the circle."""
        z = np.exp(1j * self.orientation * theta)
        return (1 - abs(self.w) ** 2) / np.abs(1 - np.conj(self.w) * z) ** 2


def mobius_reparameterize(a: ConformalFactor, m: MobiusParameter, output_degree: int,
                          grid_size: int | None = None) -> ConformalFactor:
    """Conformally equivalent factor b = |psi'|^{-1} (a o psi)."""
    size = grid_size or max(default_grid(output_degree), 4 * (a.degree + output_degree))
    size = next_pow2(size)
    theta = 2 * np.pi * np.arange(size) / size
    vals = evaluate(a.series, m.boundary_angle(theta)) / m.boundary_speed(theta)
    if vals.min() <= 0:
        raise NonPositiveSample("reparameterized factor is not positive")
    b = _check_tail(TrigPolynomial.from_samples(vals, output_degree), "mobius_reparameterize")
    return ConformalFactor.validate(b, size, a.tolerance)


def factor_from_conformal_map(map_coeffs: Sequence[complex], output_degree: int,
                              grid_size: int | None = None, tol: float = 1e-8) -> ConformalFactor:
    """Normalized a = |Phi'(e^{it})|^{-1} for a polynomial map Phi(z) = sum c_j z^j."""
    c = np.asarray(map_coeffs, dtype=complex)
    if c.size < 2:
        raise DegenerateMap("constant map")
    size = next_pow2(grid_size or max(default_grid(output_degree), 16 * c.size))
    theta = 2 * np.pi * np.arange(size) / size
    z = np.exp(1j * theta)
    dphi = np.polynomial.polynomial.polyval(z, c[1:] * np.arange(1, c.size))
    mag = np.abs(dphi)
    if mag.min() <= tol * mag.max():
        raise DegenerateMap(f"min |Phi'| on the circle is {mag.min():.3e}")
    phase = np.unwrap(np.angle(np.append(dphi, dphi[0])))
    winding = round((phase[-1] - phase[0]) / (2 * np.pi))
    if winding != 0:
        raise DegenerateMap(f"Phi' has {winding} zero(s) inside the disk")
    f = _check_tail(TrigPolynomial.from_samples(1.0 / mag, output_degree), "factor_from_conformal_map")
    return normalize(f, size)


# -- serialization --------------------------------------------------------

def to_json(f: TrigPolynomial) -> dict:
    return {
        "degree": f.degree,
        "coefficients": [[float(c.real), float(c.imag)] for c in f.coeffs],
    }


def from_json(obj: dict, degree: int | None = None) -> TrigPolynomial:
    """Accepts the coefficient encoding or the grid-sample encoding."""
    if "coefficients" in obj:
        pairs = obj["coefficients"]
        try:
            coeffs = [complex(float(re), float(im)) for re, im in pairs]
        except (TypeError, ValueError) as exc:
            raise InputError("coefficients must be [re, im] pairs") from exc
        if "degree" in obj and int(obj["degree"]) != len(coeffs) - 1:
            raise InputError("degree does not match number of coefficients")
        if coeffs and coeffs[0].imag != 0:
            raise InputError("im_0 must be 0")
        return TrigPolynomial.from_coeffs(coeffs)
    if "samples" in obj:
        vals = np.asarray(obj["samples"], dtype=float)
        if vals.ndim != 1 or vals.size < 3:
            raise InputError("samples must be a flat list of at least 3 values")
        deg = degree if degree is not None else (vals.size - 1) // 2
        deg = min(deg, (vals.size - 1) // 2)
        return TrigPolynomial.from_samples(vals, deg)
    raise InputError("expected 'coefficients' or 'samples'")
