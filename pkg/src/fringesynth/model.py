"""Ideal interference patterns for coherent-state input.

Two equivalent evaluations are provided: the direct truncated series
``alpha^(2N) exp(-2 alpha^2) |sum b_n exp(i n phi)|^2`` and the product of the
N independent single-projector probabilities. They agree up to a constant.
Both are accumulated in log space because ``alpha^(2N)`` underflows quickly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .compiler import RootSet
from .errors import InvalidInputError
from .fourier import CoefficientVector

__all__ = [
    "DEFAULT_ALPHA",
    "SourceConfig",
    "PhaseGrid",
    "Pattern",
    "ideal_pattern",
    "single_projector_probability",
    "orthogonal_projector_probability",
    "product_pattern",
]

DEFAULT_ALPHA = 0.3

# values are rescaled by a power of ten when their logs leave this band
_LOG10_SAFE = 280.0


@dataclass(frozen=True)
class SourceConfig:
    """Coherent input ``|alpha, alpha>`` (real alpha) measured with an N-photon projector."""

    N: int
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidInputError(f"alpha must be finite and positive, got {self.alpha!r}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidInputError(f"N must be a positive integer, got {self.N!r}")

    @property
    def alpha_per_path(self) -> float:
        return self.alpha / math.sqrt(self.N)


@dataclass(frozen=True)
class PhaseGrid:
    phis: np.ndarray

    def __post_init__(self):
        phis = np.array(self.phis, dtype=float).reshape(-1)
        if phis.size == 0:
            raise InvalidInputError("phase grid is empty")
        if not np.all(np.isfinite(phis)):
            raise InvalidInputError("phase grid contains non-finite values")
        if np.any(np.diff(phis) <= 0):
            raise InvalidInputError("phase grid must be strictly increasing")
        phis.setflags(write=False)
        object.__setattr__(self, "phis", phis)

    @classmethod
    def uniform(cls, points: int, start: float = 0.0, stop: float = 2 * math.pi, endpoint: bool = False):
        if int(points) != points or points <= 0:
            raise InvalidInputError(f"grid needs a positive number of points, got {points!r}")
        return cls(np.linspace(start, stop, int(points), endpoint=endpoint))

    def __len__(self):
        return self.phis.size

    def is_full_period(self) -> bool:
        """True for a uniform grid covering exactly one 2pi period without repeating the endpoint."""
        if self.phis.size < 3:
            return False
        steps = np.diff(self.phis)
        step = steps.mean()
        uniform = np.allclose(steps, step, rtol=1e-9, atol=1e-12)
        return bool(uniform and abs(self.phis[-1] - self.phis[0] + step - 2 * math.pi) < 1e-9)


@dataclass
class Pattern:
    """Sampled P(phi) or multiplied counts.

    The represented quantity is ``values * 10**log10_scale``; the scale is
    non-zero only when the raw numbers would leave the float range (large N).
    ``phi_actual`` holds the realized phases when they differ from the
    requested grid (quantized wedge steps), and ``zero_count`` flags points
    where some projector registered no counts.
    """

    grid: PhaseGrid
    values: np.ndarray
    sigma: Optional[np.ndarray] = None
    log10_scale: float = 0.0
    phi_actual: Optional[np.ndarray] = None
    zero_count: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.grid)
        if self.values.shape != (n,):
            raise InvalidInputError(f"pattern has {self.values.size} values for {n} grid points")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise InvalidInputError("pattern values must be finite and non-negative")
        for name in ("sigma", "phi_actual", "zero_count"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=bool if name == "zero_count" else float)
                if arr.shape != (n,):
                    raise InvalidInputError(f"{name} length does not match the grid")
                setattr(self, name, arr)

    @property
    def phases(self) -> np.ndarray:
        """Phases at which the values were realized."""
        return self.phi_actual if self.phi_actual is not None else self.grid.phis

    def scaled(self, factor: float) -> "Pattern":
        sigma = None if self.sigma is None else self.sigma * factor
        return Pattern(self.grid, self.values * factor, sigma, self.log10_scale, self.phi_actual, self.zero_count)


def _from_log(grid: PhaseGrid, logp: np.ndarray) -> Pattern:
    # natural-log values, -inf allowed for exact zeros
    finite = logp[np.isfinite(logp)]
    shift = 0.0
    if finite.size:
        top = float(finite.max()) / math.log(10)
        if abs(top) > _LOG10_SAFE:
            shift = float(math.floor(top))
    values = np.exp(logp - shift * math.log(10))
    return Pattern(grid, values, log10_scale=shift)


def _log_abs2(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.real(x * np.conj(x)))


def ideal_pattern(coeffs: CoefficientVector, grid: PhaseGrid, src: SourceConfig) -> Pattern:
    """Direct form: ``alpha^(2N) exp(-2 alpha^2) |sum_n b_n exp(i n phi)|^2``."""
    if coeffs.N != src.N:
        raise InvalidInputError(f"coefficients have N={coeffs.N} but the source expects N={src.N}")
    series = np.polyval(coeffs.b[::-1], np.exp(1j * grid.phis))
    logp = 2 * src.N * math.log(src.alpha) - 2 * src.alpha**2 + _log_abs2(series)
    return _from_log(grid, logp)


def _log_single(root: complex, phi: np.ndarray, src: SourceConfig, orthogonal: bool) -> np.ndarray:
    a = src.alpha_per_path
    base = 2 * math.log(a) - 2 * a * a
    phi = np.asarray(phi, dtype=float)
    if np.isinf(root):
        # vertical projector and its horizontal complement carry no phi dependence
        return np.full(phi.shape, base)
    z = complex(root)
    lognorm = -math.log1p(abs(z) ** 2)
    u = np.exp(1j * phi)
    overlap = (z.conjugate() * u + 1.0) if orthogonal else (u - z)
    return base + lognorm + _log_abs2(overlap)


def single_projector_probability(root, phi, src: SourceConfig):
    """Click probability of one projector fed with ``|alpha/sqrt(N), alpha/sqrt(N)>``.

    ``N_n^2 a^2 exp(-2 a^2) |exp(i phi) - z_n|^2`` with ``a = alpha/sqrt(N)``;
    a root at infinity gives the phi-independent ``a^2 exp(-2 a^2)``.
    """
    out = np.exp(_log_single(root, phi, src, orthogonal=False))
    return float(out) if out.ndim == 0 else out


def orthogonal_projector_probability(root, phi, src: SourceConfig):
    """Same as :func:`single_projector_probability` for the blocked polarization."""
    out = np.exp(_log_single(root, phi, src, orthogonal=True))
    return float(out) if out.ndim == 0 else out


def product_pattern(rootset: RootSet, grid: PhaseGrid, src: SourceConfig) -> Pattern:
    """Pointwise product of the N single-projector probabilities."""
    if rootset.N != src.N:
        raise InvalidInputError(f"root set has N={rootset.N} but the source expects N={src.N}")
    logp = np.zeros(len(grid))
    for z in rootset.all_roots():
        logp += _log_single(z, grid.phis, src, orthogonal=False)
    return _from_log(grid, logp)
