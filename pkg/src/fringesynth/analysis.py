"""Fringe visibility, period, amplitude fit and Gibbs overshoot of sampled patterns.

Extrema are located on the sampled points themselves, never interpolated, so
an undersampled pattern reports the reduced visibility a measurement would.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import InsufficientFringesError, InvalidInputError
from .model import Pattern

__all__ = [
    "VisibilityReport",
    "FitResult",
    "local_extrema",
    "visibility",
    "fit_amplitude",
    "fringe_period",
    "gibbs_overshoot",
    "plateau_value",
    "phases_per_fringe",
]


@dataclass
class VisibilityReport:
    fringes: List[Tuple[float, float, float]] = field(default_factory=list)  # (phi_min, phi_max, v)
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    v_mean: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "fringes": [{"phi_min": a, "phi_max": b, "visibility": v} for a, b, v in self.fringes],
            "v_min": self.v_min,
            "v_max": self.v_max,
            "v_mean": self.v_mean,
            "n_fringes": len(self.fringes),
        }


@dataclass(frozen=True)
class FitResult:
    """``measured ~= amplitude * model``.

    ``residual_rms`` is in the units of ``measured.values``; ``log10_scale``
    carries the ratio of the two patterns' power-of-ten scales.
    """

    amplitude: float
    residual_rms: float
    log10_scale: float = 0.0


def _peaks(x: np.ndarray, prominence: float) -> np.ndarray:
    # deferred: scipy.signal dominates start-up time of the command-line tool
    from scipy.signal import find_peaks

    kw = {"prominence": prominence} if prominence > 0 else {}
    idx, _ = find_peaks(x, **kw)
    return idx


def local_extrema(values, min_prominence: float = 0.0):
    """Indices of interior local maxima and minima.

    Flat extrema collapse to their middle sample; the first and last samples
    are never extrema. ``min_prominence`` is a fraction of the value range.
    """
    x = np.asarray(values, dtype=float)
    prom = min_prominence * float(np.ptp(x)) if x.size else 0.0
    if min_prominence > 0 and prom == 0:
        return np.array([], dtype=int), np.array([], dtype=int)
    return _peaks(x, prom), _peaks(-x, prom)


def _alternating(x: np.ndarray, maxima: np.ndarray, minima: np.ndarray):
    # merge into index order; of two neighbours of the same kind keep the more extreme
    events = sorted([(int(i), 1) for i in maxima] + [(int(i), -1) for i in minima])
    out: List[Tuple[int, int]] = []
    for i, kind in events:
        if out and out[-1][1] == kind:
            j = out[-1][0]
            if (kind == 1 and x[i] > x[j]) or (kind == -1 and x[i] < x[j]):
                out[-1] = (i, kind)
            continue
        out.append((i, kind))
    return out


def visibility(pattern: Pattern, min_prominence: float = 0.0) -> VisibilityReport:
    """Visibility ``(max - min)/(max + min)`` of every adjacent local minimum/maximum pair."""
    x = pattern.values
    if x.size < 3:
        raise InvalidInputError("visibility needs at least 3 samples")
    phi = pattern.phases
    maxima, minima = local_extrema(x, min_prominence)
    seq = _alternating(x, maxima, minima)
    fringes = []
    for (i, ki), (j, kj) in zip(seq, seq[1:]):
        imax, imin = (i, j) if ki == 1 else (j, i)
        hi, lo = x[imax], x[imin]
        v = (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0
        fringes.append((float(phi[imin]), float(phi[imax]), float(min(max(v, 0.0), 1.0))))
    report = VisibilityReport(fringes)
    if fringes:
        vs = np.array([f[2] for f in fringes])
        report.v_min = float(vs.min())
        report.v_max = float(vs.max())
        report.v_mean = float(min(max(vs.mean(), report.v_min), report.v_max))
    return report


def fit_amplitude(measured: Pattern, model: Pattern) -> FitResult:
    """Least-squares scale through the origin: ``A = sum(m*y) / sum(m*m)``."""
    if len(measured.grid) != len(model.grid) or not np.allclose(
        measured.grid.phis, model.grid.phis, rtol=0, atol=1e-12
    ):
        raise InvalidInputError("measured and model patterns must share the same grid")
    m, y = model.values, measured.values
    mm = float(np.dot(m, m))
    if mm == 0:
        raise InvalidInputError("model pattern is identically zero")
    a = float(np.dot(m, y)) / mm
    resid = float(np.sqrt(np.mean((y - a * m) ** 2)))
    return FitResult(a, resid, measured.log10_scale - model.log10_scale)


def _fringe_maxima(x: np.ndarray, hysteresis: float, circular: bool) -> np.ndarray:
    # Schmitt trigger: a fringe is an excursion from below the lower level to
    # above the upper one; its maximum is the largest sample of the excursion
    lo = x.min() + hysteresis * np.ptp(x)
    hi = x.max() - hysteresis * np.ptp(x)
    if not hi > lo:
        return np.array([], dtype=int)
    n = x.size
    offset = int(np.argmin(x)) if circular else 0
    order = (np.arange(n) + offset) % n
    peaks = []
    high = not circular and x[0] >= hi
    touches_edge = high
    best = order[0]
    for k in order:
        if high:
            if x[k] <= lo:
                if not touches_edge:
                    peaks.append(best)
                high = touches_edge = False
            elif x[k] > x[best]:
                best = k
        elif x[k] >= hi:
            high, best = True, k
    if high and circular:
        peaks.append(best)
    return np.sort(np.array(peaks, dtype=int))


def fringe_period(pattern: Pattern, hysteresis: float = 0.25) -> float:
    """Mean spacing of the fringe maxima, in radians.

    A fringe is one excursion of the pattern from below ``min + h*range`` to
    above ``max - h*range`` (``h = hysteresis``), so Gibbs ripple and noise
    on top of a fringe do not count as extra fringes. On a grid spanning
    exactly one period the pattern is treated as circular and the period is
    2pi divided by the fringe count; otherwise excursions cut by the grid
    ends are dropped and the spacing of the remaining maxima is averaged.
    """
    x = pattern.values
    if pattern.grid.is_full_period() and pattern.phi_actual is None:
        count = _fringe_maxima(x, hysteresis, circular=True).size
        if count == 0:
            raise InsufficientFringesError("insufficient fringes: no maxima found")
        return 2 * math.pi / count
    idx = _fringe_maxima(x, hysteresis, circular=False)
    if idx.size < 2:
        raise InsufficientFringesError(f"insufficient fringes: found {idx.size} maxima, need 2")
    return float(np.mean(np.diff(pattern.phases[idx])))


def plateau_value(pattern: Pattern, phi: float = math.pi) -> float:
    """Pattern value at the sample nearest ``phi`` (the flat-region midpoint for Rect)."""
    i = int(np.argmin(np.abs(pattern.phases - phi)))
    return float(pattern.values[i])


def gibbs_overshoot(pattern: Pattern, plateau: float) -> float:
    """Relative overshoot ``(max - plateau) / plateau``."""
    if not plateau > 0:
        raise InvalidInputError("plateau must be positive")
    return (float(np.max(pattern.values)) - plateau) / plateau


def phases_per_fringe(pattern: Pattern, period: float) -> float:
    """Average number of distinct realized phases falling in one fringe period."""
    distinct = np.unique(pattern.phases)
    if distinct.size < 2:
        return float(distinct.size)
    span = distinct[-1] - distinct[0]
    return period * (distinct.size - 1) / span
