"""Truncated Fourier expansions of target interference amplitudes.

The pattern produced by an N-photon projector is ``|sum_k b_k exp(i k phi)|^2``,
so the coefficient ``b_k`` is the Fourier coefficient of the target amplitude at
frequency ``k - N/2``. Index ``N/2`` is the zero-frequency (DC) term.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "CoefficientVector",
    "TargetKind",
    "TargetAmplitude",
    "SmoothingMode",
    "rect_coefficients",
    "saw_sqrt_coefficients",
    "noon_coefficients",
    "coefficients_from_samples",
    "apply_smoothing",
    "fresnel_sine",
    "builtin_coefficients",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CoefficientVector:
    """State coefficients ``b_0 .. b_N`` of a two-mode N-photon projector.

    ``b_n = c_n / sqrt(n! (N-n)!)`` where ``c_n`` are the Fock-basis amplitudes.
    """

    N: int
    b: np.ndarray

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise InvalidInputError(f"photon number must be a non-negative integer, got {self.N!r}")
        b = np.array(self.b, dtype=complex).reshape(-1)
        if b.size != self.N + 1:
            raise InvalidInputError(f"expected {self.N + 1} coefficients for N={self.N}, got {b.size}")
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("coefficients must be finite")
        if not np.any(b != 0):
            raise InvalidInputError("coefficients must not all be zero")
        b.setflags(write=False)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "b", b)

    @property
    def frequencies(self) -> np.ndarray:
        """Fourier frequency carried by each index, measured from the middle."""
        return np.arange(self.N + 1) - self.N / 2.0

    @property
    def c(self) -> np.ndarray:
        """Fock-basis amplitudes ``c_n = b_n sqrt(n! (N-n)!)``."""
        n = np.arange(self.N + 1)
        logf = np.array([math.lgamma(k + 1) + math.lgamma(self.N - k + 1) for k in n])
        return self.b * np.exp(0.5 * logf)

    def __len__(self):
        return self.N + 1


class TargetKind(enum.Enum):
    RECT = "rect"
    SAW_SQRT = "saw"
    NOON = "noon"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class TargetAmplitude:
    kind: TargetKind
    samples: Optional[Tuple[np.ndarray, np.ndarray]] = None  # (phi, g)

    @classmethod
    def sampled(cls, phi: Sequence[float], g: Sequence[complex]) -> "TargetAmplitude":
        phi = np.asarray(phi, dtype=float)
        g = np.asarray(g, dtype=complex)
        if phi.ndim != 1 or phi.shape != g.shape:
            raise InvalidInputError("phi and g must be 1-D arrays of equal length")
        if phi.size and (phi[0] < 0 or phi[-1] >= TWO_PI):
            raise InvalidInputError("sample phases must lie in [0, 2*pi)")
        if np.any(np.diff(phi) <= 0):
            raise InvalidInputError("sample phases must be strictly increasing")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(g))):
            raise InvalidInputError("samples must be finite")
        return cls(TargetKind.SAMPLED, (phi, g))


class SmoothingMode(enum.Enum):
    NONE = "none"
    LANCZOS = "lanczos"
    CESARO = "cesaro"


def _require_even(N) -> int:
    if int(N) != N or N < 2 or int(N) % 2:
        raise InvalidInputError(f"even N required (N >= 2), got {N!r}")
    return int(N)


def rect_coefficients(N: int) -> CoefficientVector:
    """Coefficients of the 2pi-periodic rectangle that is 0 on |phi| <= pi/2 and 1 elsewhere."""
    N = _require_even(N)
    n = np.arange(-(N // 2), N // 2 + 1)
    b = np.empty(N + 1)
    nz = n != 0
    b[nz] = -np.sin(n[nz] * math.pi / 2) / (n[nz] * math.pi)
    b[~nz] = 0.5
    # sin(k*pi) is not exactly zero in floating point
    b[nz & (n % 2 == 0)] = 0.0
    return CoefficientVector(N, b)


def saw_sqrt_coefficients(N: int) -> CoefficientVector:
    """Coefficients of the amplitude ``|phi/pi|^(1/2)`` on (-pi, pi).

    For frequency ``n != 0`` the coefficient is
    ``-S(sqrt(2|n|)) / (sqrt(2) pi |n|^(3/2))`` with ``S`` the Fresnel sine
    integral; the DC term is 2/3.
    """
    N = _require_even(N)
    b = np.empty(N + 1)
    for k in range(N + 1):
        n = abs(k - N // 2)
        if n == 0:
            b[k] = 2.0 / 3.0
        else:
            b[k] = -fresnel_sine(math.sqrt(2 * n)) / (math.sqrt(2) * math.pi * n**1.5)
    return CoefficientVector(N, b)


def noon_coefficients(N: int) -> CoefficientVector:
    """Unnormalized NOON projector ``|N,0> - |0,N>``: ``b_0 = 1``, ``b_N = -1``."""
    if int(N) != N or N < 1:
        raise InvalidInputError(f"NOON state needs N >= 1, got {N!r}")
    N = int(N)
    b = np.zeros(N + 1)
    b[0] = 1.0
    b[N] = -1.0
    return CoefficientVector(N, b)


def coefficients_from_samples(target: TargetAmplitude, N: int) -> CoefficientVector:
    """Expand a sampled periodic amplitude with the periodic trapezoidal rule.

    ``b_k = (1/2pi) * integral g(phi) exp(-i (k - N/2) phi) dphi`` over one period.
    Non-uniform grids are allowed; the segment from the last sample back to
    the first (shifted by 2pi) closes the period.
    """
    if target.kind is not TargetKind.SAMPLED or target.samples is None:
        raise InvalidInputError("coefficients_from_samples needs a Sampled target")
    if int(N) != N or N < 1:
        raise InvalidInputError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    phi, g = target.samples
    if phi.size < 4 * (N + 1):
        raise InvalidInputError(
            f"need at least {4 * (N + 1)} samples for order N={N}, got {phi.size}"
        )
    # compare the wrap-around step with the steps next to it
    jump = abs(g[0] - g[-1])
    edge = max(abs(g[1] - g[0]), abs(g[-1] - g[-2]))
    scale = max(float(np.max(np.abs(g))), 1e-300)
    if jump > 1e-6 * scale and jump > 10.0 * edge:
        warnings.warn(
            f"sampled target does not look periodic: |g(0) - g(2pi-)| = {jump:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )

    phi_c = np.append(phi, phi[0] + TWO_PI)
    g_c = np.append(g, g[0])
    h = np.diff(phi_c)
    # trapezoid weights for the closed loop
    w = np.zeros(phi.size)
    w += 0.5 * h
    w += 0.5 * np.roll(h, 1)
    freqs = np.arange(N + 1) - N / 2.0
    kernel = np.exp(-1j * np.outer(freqs, phi_c[:-1]))
    b = kernel @ (w * g_c[:-1]) / TWO_PI
    return CoefficientVector(N, b)


def apply_smoothing(coeffs: CoefficientVector, mode: SmoothingMode) -> CoefficientVector:
    """Damp high frequencies with Lanczos sigma factors or Cesaro (Fejer) weights."""
    mode = SmoothingMode(mode)
    if mode is SmoothingMode.NONE:
        return coeffs
    n = coeffs.frequencies
    m = coeffs.N / 2.0 + 1.0
    if mode is SmoothingMode.LANCZOS:
        w = np.sinc(n / m)
    else:
        w = 1.0 - np.abs(n) / m
    return CoefficientVector(coeffs.N, coeffs.b * w)


def builtin_coefficients(kind, N: int) -> CoefficientVector:
    kind = TargetKind(kind)
    if kind is TargetKind.RECT:
        return rect_coefficients(N)
    if kind is TargetKind.SAW_SQRT:
        return saw_sqrt_coefficients(N)
    if kind is TargetKind.NOON:
        return noon_coefficients(N)
    raise InvalidInputError("sampled targets need samples; use coefficients_from_samples")


# ---------------------------------------------------------------------------
# Fresnel sine integral S(x) = int_0^x sin(pi t^2 / 2) dt

_SERIES_MAX = 2.0
_ASYMPTOTIC_MIN = 5.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _fresnel_series(x: float) -> float:
    # sum_k (-1)^k (pi/2)^(2k+1) x^(4k+3) / ((2k+1)! (4k+3))
    a = (math.pi / 2) * x**3
    q = (math.pi / 2) ** 2 * x**4
    total = a / 3.0
    k = 0
    while True:
        a *= -q / ((2 * k + 2) * (2 * k + 3))
        k += 1
        term = a / (4 * k + 3)
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300):
            return total


def _fresnel_asymptotic(x: float) -> float:
    # S = 1/2 - f cos(pi x^2/2) - g sin(pi x^2/2), auxiliary functions
    # expanded in 1/(pi x^2)^2 and truncated at the smallest term
    u = 1.0 / (math.pi * x * x) ** 2
    f_sum, g_sum = 1.0, 1.0
    f_term, g_term = 1.0, 1.0
    prev_f, prev_g = math.inf, math.inf
    m = 0
    while True:
        m += 1
        f_next = -f_term * (4 * m - 3) * (4 * m - 1) * u
        g_next = -g_term * (4 * m - 1) * (4 * m + 1) * u
        if abs(f_next) >= prev_f or abs(g_next) >= prev_g or abs(f_next) < 1e-18:
            break
        prev_f, prev_g = abs(f_next), abs(g_next)
        f_term, g_term = f_next, g_next
        f_sum += f_term
        g_sum += g_term
    f = f_sum / (math.pi * x)
    g = g_sum / (math.pi**2 * x**3)
    arg = 0.5 * math.pi * x * x
    return 0.5 - f * math.cos(arg) - g * math.sin(arg)


def _integrate_sin_chirp(a: float, b: float) -> float:
    # composite Gauss-Legendre, panels short against the local oscillation
    panels = max(1, int(math.ceil((b - a) * b * 4)))
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    t = mid + half * _GL_NODES[None, :]
    return float(np.sum(half * _GL_WEIGHTS[None, :] * np.sin(0.5 * math.pi * t * t)))


def fresnel_sine(x: float) -> float:
    """Fresnel sine integral ``S(x) = int_0^x sin(pi t^2/2) dt`` for ``x >= 0``."""
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise InvalidInputError(f"fresnel_sine needs a finite x >= 0, got {x!r}")
    if x <= _SERIES_MAX:
        return _fresnel_series(x) if x > 0 else 0.0
    if x >= _ASYMPTOTIC_MIN:
        return _fresnel_asymptotic(x)
    return _fresnel_series(_SERIES_MAX) + _integrate_sin_chirp(_SERIES_MAX, x)
