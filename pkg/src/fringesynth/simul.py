"""Monte-Carlo model of the sequential single-projector counting experiment.

Each projector is measured on its own: the phase wedge is stepped across the
grid and clicks are counted for one gate time at every step. The counts of
all projectors at the same phase are multiplied afterwards.

Randomness comes from counter-based Philox streams keyed by
``(seed, domain, projector, grid index)``, so every (projector, phase) cell is
reproducible on its own and results do not depend on evaluation order.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from .compiler import RootSet
from .errors import InvalidInputError
from .model import (
    Pattern,
    PhaseGrid,
    SourceConfig,
    orthogonal_projector_probability,
    single_projector_probability,
)

__all__ = [
    "WedgeCalibration",
    "DEFAULT_WEDGE",
    "wedge_phase",
    "NoiseConfig",
    "CountRecord",
    "simulate_counts",
    "multiply_counts",
    "efficiency_drift_std",
    "dead_time_rate",
    "projector_efficiencies",
]


@dataclass(frozen=True)
class WedgeCalibration:
    translation_per_2pi_m: float = 0.215e-3
    step_m: float = 1e-6

    @property
    def phase_quantum(self) -> float:
        return wedge_phase(1, self)


DEFAULT_WEDGE = WedgeCalibration()


def wedge_phase(step_count: int, calib: WedgeCalibration = DEFAULT_WEDGE) -> float:
    """Differential phase imparted after ``step_count`` stage steps."""
    return 2 * math.pi * (step_count * calib.step_m) / calib.translation_per_2pi_m


DRIFT_MODELS = ("independent", "random_walk")


@dataclass(frozen=True)
class NoiseConfig:
    """Bench parameters of the counting experiment.

    ``peak_rate_hz`` is the photon rate reaching the detector at the brightest
    point of the sweep, before the detector efficiency. ``eta_rel_std`` is the
    relative spread of the per-projector efficiency; in ``random_walk`` mode it
    is the step size per ``inter_projector_s`` interval instead.
    """

    peak_rate_hz: float = 5.2e6
    gate_s: float = 1.0
    dead_time_s: float = 45e-9
    dark_rate_hz: float = 2.0
    eta_mean: float = 0.2
    eta_rel_std: float = 0.01
    extinction_db: float = 43.0
    phase_quantum_rad: float = DEFAULT_WEDGE.phase_quantum
    inter_projector_s: float = 480.0
    seed: int = 0
    drift_model: str = "independent"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("peak_rate_hz", "gate_s", "dead_time_s", "dark_rate_hz", "eta_rel_std",
                     "phase_quantum_rad", "inter_projector_s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise InvalidInputError(f"{name} must be a finite number >= 0, got {v!r}")
        if not (isinstance(self.eta_mean, (int, float)) and 0 < self.eta_mean <= 1):
            raise InvalidInputError(f"eta_mean must lie in (0, 1], got {self.eta_mean!r}")
        if not (isinstance(self.extinction_db, (int, float)) and self.extinction_db >= 0):
            raise InvalidInputError(f"extinction_db must be >= 0, got {self.extinction_db!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise InvalidInputError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if self.drift_model not in DRIFT_MODELS:
            raise InvalidInputError(f"drift_model must be one of {DRIFT_MODELS}, got {self.drift_model!r}")

    @property
    def leakage(self) -> float:
        """Power fraction of the blocked polarization that leaks through the polarizer."""
        return 10.0 ** (-self.extinction_db / 10.0)

    def replace(self, **changes) -> "NoiseConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown noise config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def noiseless(cls, **changes) -> "NoiseConfig":
        base = dict(dead_time_s=0.0, dark_rate_hz=0.0, eta_rel_std=0.0, extinction_db=math.inf,
                    phase_quantum_rad=0.0)
        base.update(changes)
        return cls(**base)


@dataclass(frozen=True)
class CountRecord:
    projector_index: int
    phi_requested: float
    phi_actual: float
    counts: int


# stream domains for the Philox key
_DOMAIN_COUNTS = 0
_DOMAIN_EFFICIENCY = 1


def _stream(seed: int, domain: int, projector: int, index: int) -> np.random.Generator:
    if not (0 <= projector < 2**30 and 0 <= index < 2**31):
        raise InvalidInputError("projector or grid index out of range for the RNG key")
    key = np.array([seed, (domain << 62) | (projector << 31) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def quantize_phase(phi, quantum: float):
    if quantum <= 0:
        return np.asarray(phi, dtype=float)
    return np.round(np.asarray(phi, dtype=float) / quantum) * quantum


def dead_time_rate(rate, dead_time_s: float):
    """Non-paralyzable dead time: observed rate ``r / (1 + r*tau)``."""
    rate = np.asarray(rate, dtype=float)
    return rate / (1.0 + rate * dead_time_s)


def projector_efficiencies(n_projectors: int, cfg: NoiseConfig) -> np.ndarray:
    """Detector efficiency in force while each projector is measured, within (0, 1]."""
    g = np.array([_stream(cfg.seed, _DOMAIN_EFFICIENCY, n, 0).standard_normal() for n in range(n_projectors)])
    if cfg.drift_model == "random_walk":
        g = np.cumsum(g)
    eta = cfg.eta_mean * (1.0 + cfg.eta_rel_std * g)
    return np.clip(eta, np.finfo(float).tiny, 1.0)


def simulate_counts(rootset: RootSet, grid: PhaseGrid, src: SourceConfig, cfg: NoiseConfig) -> List[CountRecord]:
    """Simulate the per-projector click counts over the phase sweep.

    Per (projector, phase) cell: quantize the phase to the wedge step, mix in
    the leaked orthogonal polarization, scale so the brightest cell of the
    whole run sees ``peak_rate_hz``, apply the projector's efficiency, the
    dead time and the dark counts, and draw Poisson counts for one gate.
    """
    cfg.validate()
    if rootset.N != src.N:
        raise InvalidInputError(f"root set has N={rootset.N} but the source expects N={src.N}")
    phi_req = grid.phis
    phi_act = quantize_phase(phi_req, cfg.phase_quantum_rad)
    eps = cfg.leakage
    roots = rootset.all_roots()
    probs = np.empty((roots.size, phi_req.size))
    for n, z in enumerate(roots):
        p = single_projector_probability(z, phi_act, src)
        if eps > 0:
            p = (1.0 - eps) * p + eps * orthogonal_projector_probability(z, phi_act, src)
        probs[n] = p
    top = probs.max()
    rate = cfg.peak_rate_hz * probs / top if top > 0 else np.zeros_like(probs)
    rate *= projector_efficiencies(roots.size, cfg)[:, None]
    rate = dead_time_rate(rate, cfg.dead_time_s) + cfg.dark_rate_hz
    mean = rate * cfg.gate_s

    records = []
    for n in range(roots.size):
        for i in range(phi_req.size):
            k = int(_stream(cfg.seed, _DOMAIN_COUNTS, n, i).poisson(mean[n, i]))
            records.append(CountRecord(n, float(phi_req[i]), float(phi_act[i]), k))
    return records


def multiply_counts(records: Iterable[CountRecord]) -> Pattern:
    """Multiply the counts of all projectors at each phase.

    ``sigma = value * sqrt(sum 1/counts)`` (independent Poisson counts, first
    order). A zero count makes the product zero; its sigma term then uses a
    count of 1 and the point is flagged in ``zero_count``.
    """
    by_phi = {}
    actual = {}
    for r in records:
        cell = by_phi.setdefault(r.phi_requested, {})
        if r.projector_index in cell:
            raise InvalidInputError(
                f"duplicate record for projector {r.projector_index} at phi={r.phi_requested!r}"
            )
        cell[r.projector_index] = r.counts
        actual.setdefault(r.phi_requested, r.phi_actual)
    if not by_phi:
        raise InvalidInputError("no count records")
    phis = sorted(by_phi)
    projectors = sorted(by_phi[phis[0]])
    for phi in phis:
        if sorted(by_phi[phi]) != projectors:
            missing = set(projectors) ^ set(by_phi[phi])
            raise InvalidInputError(f"projectors {sorted(missing)} missing or extra at phi={phi!r}")
    counts = np.array([[by_phi[phi][n] for n in projectors] for phi in phis], dtype=float)
    if np.any(counts < 0):
        raise InvalidInputError("negative counts")

    zero = np.any(counts == 0, axis=1)
    floored = np.maximum(counts, 1.0)
    rel = np.sqrt(np.sum(1.0 / floored, axis=1))
    with np.errstate(divide="ignore"):
        log10v = np.sum(np.log10(counts), axis=1)
    finite = log10v[np.isfinite(log10v)]
    shift = float(math.floor(finite.max())) if finite.size and finite.max() > 300 else 0.0
    if shift:
        values = np.where(zero, 0.0, 10.0 ** (log10v - shift))
    else:
        values = np.prod(counts, axis=1)
    sigma = np.where(zero, 10.0 ** (np.sum(np.log10(floored), axis=1) - shift), values) * rel
    grid = PhaseGrid(np.array(phis))
    return Pattern(
        grid,
        values,
        sigma=sigma,
        log10_scale=shift,
        phi_actual=np.array([actual[p] for p in phis]),
        zero_count=zero,
    )


def efficiency_drift_std(pattern_value: float, N: int, eta_rel_std: float) -> float:
    """Expected spread of a multiplied pattern value from uncorrelated efficiency drift."""
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    return math.sqrt(N) * pattern_value * eta_rel_std
