"""Factor a coefficient vector into single-photon projectors and back.

A projector with coefficients ``b`` factors as ``b_N * prod(z - z_n)``; each root
``z_n`` is one single-photon projector ``(a^+ - z_n b^+)|0,0>``, realized by a
birefringent phase ``theta_n = -Arg(z_n)`` followed by a polarizer at
``rho_n = arctan|z_n|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .fourier import CoefficientVector

__all__ = [
    "ROOT_AT_INFINITY",
    "RootSet",
    "ProjectorSetting",
    "factor_state",
    "expand_roots",
    "compile_settings",
    "settings_to_root",
    "root_residuals",
    "canonical_order",
    "rootset_from_settings",
]

#: Marker for a root at infinity: a projector onto the vertical mode alone.
ROOT_AT_INFINITY = complex(math.inf, 0.0)

RESIDUAL_TOL = 1e-10
_MAX_POLISH = 8


@dataclass(frozen=True)
class RootSet:
    leading: complex
    roots: np.ndarray
    roots_at_infinity: int = 0

    def __post_init__(self):
        roots = np.array(self.roots, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(roots)):
            raise InvalidInputError("finite roots only; count roots at infinity separately")
        if self.roots_at_infinity < 0:
            raise InvalidInputError("roots_at_infinity must be >= 0")
        if self.leading == 0 or not cmath.isfinite(self.leading):
            raise InvalidInputError("leading coefficient must be finite and nonzero")
        roots.setflags(write=False)
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "leading", complex(self.leading))
        object.__setattr__(self, "roots_at_infinity", int(self.roots_at_infinity))

    @property
    def N(self) -> int:
        return self.roots.size + self.roots_at_infinity

    def all_roots(self) -> np.ndarray:
        """Finite roots followed by one ``ROOT_AT_INFINITY`` per degree deficiency."""
        return np.concatenate([self.roots, np.full(self.roots_at_infinity, ROOT_AT_INFINITY)])


@dataclass(frozen=True)
class ProjectorSetting:
    theta_deg: float
    rho_deg: float
    norm: float


def canonical_order(roots: np.ndarray) -> np.ndarray:
    """Sort by ascending real part, then ascending imaginary part."""
    roots = np.asarray(roots, dtype=complex)
    return roots[np.lexsort((roots.imag, roots.real))]


def _backward_error(q: np.ndarray, z):
    # |q(z)| / sum |q_k| |z|^k  with q ascending; vectorized over z
    desc = q[::-1]
    z = np.asarray(z, dtype=complex)
    val = np.abs(np.polyval(desc, z))
    scale = np.polyval(np.abs(desc), np.abs(z))
    with np.errstate(invalid="ignore", divide="ignore"):
        err = np.where(scale > 0, val / scale, 0.0)
    return err if err.ndim else float(err)


def root_residuals(coeffs: CoefficientVector, roots) -> np.ndarray:
    """Relative backward error ``|p(z)| / sum_k |b_k| |z|^k`` of each root."""
    q = np.asarray(coeffs.b, dtype=complex)
    return np.atleast_1d(_backward_error(q, np.asarray(roots, dtype=complex)))


def _polish(q: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Newton steps on every root, each kept only while it lowers the residual."""
    desc = q[::-1]
    ddesc = np.polyder(desc)
    z = np.array(z, dtype=complex)
    err = _backward_error(q, z)
    active = err > 0
    for _ in range(_MAX_POLISH):
        if not active.any():
            break
        d = np.polyval(ddesc, z[active])
        ok = d != 0
        cand = z[active].copy()
        cand[ok] -= np.polyval(desc, cand[ok]) / d[ok]
        cand_err = _backward_error(q, cand)
        better = ok & (cand_err < err[active])
        idx = np.flatnonzero(active)
        z[idx[better]] = cand[better]
        err[idx[better]] = cand_err[better]
        active[idx[~better]] = False
    return z


def _companion_roots(q: np.ndarray) -> np.ndarray:
    d = q.size - 1
    if d == 1:
        return np.array([-q[0] / q[1]])
    comp = np.zeros((d, d), dtype=complex)
    comp[np.arange(1, d), np.arange(d - 1)] = 1.0
    comp[:, -1] = -q[:-1] / q[-1]
    # LAPACK geev balances the matrix before the QR iteration
    return np.linalg.eigvals(comp)


def _pair_conjugates(roots: np.ndarray) -> np.ndarray:
    tol = 1e-8 * np.maximum(1.0, np.abs(roots))
    real = np.abs(roots.imag) <= tol
    upper = roots[~real & (roots.imag > 0)]
    lower = list(roots[~real & (roots.imag < 0)])
    if len(upper) != len(lower):
        return roots
    out = [complex(z.real, 0.0) for z in roots[real]]
    for z in upper:
        j = int(np.argmin([abs(z - w.conjugate()) for w in lower]))
        w = lower.pop(j)
        m = 0.5 * (z + w.conjugate())
        out.extend([m, m.conjugate()])
    return np.array(out, dtype=complex)


def factor_state(coeffs: CoefficientVector, tol: float = RESIDUAL_TOL) -> RootSet:
    """Find the N roots of ``sum_n b_n z^n``.

    Vanishing top coefficients become roots at infinity and vanishing bottom
    coefficients exact roots at zero. The rest comes from the eigenvalues of
    the companion matrix, Newton-polished. Real coefficient vectors give a
    root multiset that is exactly closed under conjugation.
    """
    b = np.asarray(coeffs.b, dtype=complex)
    nz = np.flatnonzero(b)
    if nz.size == 0:
        raise InvalidInputError("cannot factor the zero polynomial")
    low, top = int(nz[0]), int(nz[-1])
    q = b[low : top + 1]
    if q.size > 1:
        found = _polish(q, _companion_roots(q))
        if np.all(b.imag == 0):
            found = _pair_conjugates(found)
        worst = float(np.max(_backward_error(q, found)))
        if not worst < tol:
            raise ConvergenceError(f"root polishing did not reach tolerance {tol:g}", worst)
    else:
        found = np.array([], dtype=complex)
    roots = np.concatenate([np.zeros(low, dtype=complex), found])
    return RootSet(leading=b[top], roots=canonical_order(roots), roots_at_infinity=coeffs.N - top)


def expand_roots(rootset: RootSet) -> CoefficientVector:
    """Coefficients of ``leading * prod(z - z_n)``, zero-padded for roots at infinity.

    The product is sampled at the roots of unity and transformed back with an
    FFT. Sequential convolution would pass through intermediate polynomials
    with huge, cancelling coefficients once N reaches a few tens.
    """
    roots = rootset.roots
    d = roots.size
    omega = np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
    big = np.abs(roots) > 1.0
    # (w - z) = -z (1 - w/z) keeps every factor O(1) for large roots
    scale = rootset.leading * np.prod(-roots[big])
    values = np.full(d + 1, scale, dtype=complex)
    for z in roots[big]:
        values *= 1.0 - omega / z
    for z in roots[~big]:
        values *= omega - z
    b = np.zeros(rootset.N + 1, dtype=complex)
    b[: d + 1] = np.fft.fft(values) / (d + 1)
    return CoefficientVector(rootset.N, b)


def _theta_deg(z: complex) -> float:
    theta = -math.degrees(cmath.phase(z))
    if theta <= -180.0:
        theta += 360.0
    return theta + 0.0  # no negative zero


def compile_settings(rootset: RootSet) -> List[ProjectorSetting]:
    out = []
    for z in rootset.roots:
        r = abs(z)
        out.append(
            ProjectorSetting(
                theta_deg=_theta_deg(z),
                rho_deg=math.degrees(math.atan(r)),
                norm=1.0 / math.sqrt(1.0 + r * r),
            )
        )
    out.extend(ProjectorSetting(0.0, 90.0, 1.0) for _ in range(rootset.roots_at_infinity))
    return out


def settings_to_root(setting: ProjectorSetting) -> complex:
    """Invert a projector setting: ``z = tan(rho) exp(-i theta)``."""
    rho = setting.rho_deg
    if not (0.0 <= rho <= 90.0):
        raise InvalidInputError(f"polarizer angle must lie in [0, 90] degrees, got {rho!r}")
    if rho == 90.0:
        return ROOT_AT_INFINITY
    return math.tan(math.radians(rho)) * cmath.exp(-1j * math.radians(setting.theta_deg))


def rootset_from_settings(settings, leading: complex = 1.0) -> RootSet:
    finite, n_inf = [], 0
    for s in settings:
        z = settings_to_root(s)
        if cmath.isinf(z):
            n_inf += 1
        else:
            finite.append(z)
    return RootSet(leading=leading, roots=np.array(finite, dtype=complex), roots_at_infinity=n_inf)
