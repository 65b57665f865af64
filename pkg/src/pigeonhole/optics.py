"""Linear-optics model of the parity-check experiment.

Photons are polarization qubits held in a density matrix. A PBS parity check
keeps the two-fold coincidence branch (both transmitted or both reflected),
damps the HH<->VV coherence of the interfered pair by the HOM visibility and
imprints the reflection phase on the VV branch. Detection rotates each photon
with wave plates and projects onto H/V. Event counts are multinomial draws
from numpy's PCG64 seeded by the caller.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .quantum import ATOL, DimensionError, basis_ket, basis_labels, parity_projector

PAPER_INPUT_FIDELITY = 0.992
SAME_SOURCE_VISIBILITY = 0.989
CROSS_SOURCE_VISIBILITY = 0.90

BASIS_SYMBOLS = {"HV": ("H", "V"), "DA": ("D", "A"), "RL": ("R", "L")}


class OpticsConfigError(ValueError):
    pass


class ZeroTraceError(ValueError):
    pass


def _pure_density(label: str) -> np.ndarray:
    amps = basis_ket(label).amps
    return np.outer(amps, amps.conj())


@dataclass(frozen=True)
class DensityState:
    """Possibly sub-normalized density matrix; the trace deficit is the
    probability of the discarded (non-coincidence) events."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        if self.trace > 1 + 1e-12:
            raise ValueError(f"trace {self.trace} exceeds 1")

    @property
    def dims(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def annihilated(self) -> bool:
        return self.trace <= ATOL

    def normalized(self) -> "DensityState":
        if self.annihilated:
            raise ZeroTraceError("no events survive post-selection")
        return DensityState(self.matrix / self.trace)


def prepare_input(fidelity: float = 1.0, label: str = "+++") -> DensityState:
    """Product input mixed with white noise: ``f |psi><psi| + (1 - f) I / d``."""
    if not 0.0 <= fidelity <= 1.0:
        raise OpticsConfigError(f"fidelity must lie in [0, 1], got {fidelity}")
    pure = _pure_density(label)
    d = pure.shape[0]
    return DensityState(fidelity * pure + (1 - fidelity) * np.eye(d) / d)


@dataclass(frozen=True)
class PBSElement:
    qubits: tuple
    reflection_phase: float = 0.0
    visibility: float = 1.0

    def __post_init__(self):
        i, j = self.qubits
        if i == j:
            raise OpticsConfigError("a PBS interferes two distinct photons")
        if not 0.0 <= self.visibility <= 1.0:
            raise OpticsConfigError(f"visibility must lie in [0, 1], got {self.visibility}")
        if not math.isfinite(self.reflection_phase):
            raise OpticsConfigError("reflection phase must be finite")
        object.__setattr__(self, "qubits", (int(i), int(j)))


def apply_pbs_parity(rho: DensityState, el: PBSElement) -> DensityState:
    n = rho.dims
    i, j = el.qubits
    proj = parity_projector(i, j, n).entries.real
    out = proj @ rho.matrix @ proj
    # label every basis state by its (i, j) pair value: 0 for HH, 1 for VV
    idx = np.arange(2**n)
    vv = (idx >> (n - i)) & 1
    mismatch = vv[:, None] != vv[None, :]
    out = np.where(mismatch, el.visibility * out, out)
    phase = np.exp(2j * el.reflection_phase * vv)
    out = phase[:, None] * out * phase.conj()[None, :]
    return DensityState(out)


def apply_circuit(rho: DensityState, elements: Sequence[PBSElement]) -> DensityState:
    for el in elements:
        rho = apply_pbs_parity(rho, el)
    return rho


def waveplate(retardance: float, angle: float) -> np.ndarray:
    """Jones matrix of a retarder with its fast axis at ``angle`` radians from H."""
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([1.0, np.exp(1j * retardance)]) @ rot.T


HWP = math.pi
QWP = math.pi / 2
# Wave plate before an H/V PBS that maps the first basis state onto H.
_ANALYZERS = {
    "HV": np.eye(2, dtype=complex),
    "DA": waveplate(HWP, math.pi / 8),
    "RL": waveplate(QWP, math.pi / 4),
}


@dataclass(frozen=True)
class DetectionSetting:
    bases: tuple

    def __post_init__(self):
        bases = tuple(self.bases)
        for b in bases:
            if b not in BASIS_SYMBOLS:
                raise OpticsConfigError(f"unknown detection basis {b!r}")
        if not bases:
            raise OpticsConfigError("detection needs at least one photon")
        object.__setattr__(self, "bases", bases)

    @classmethod
    def uniform(cls, basis: str, n: int = 3) -> "DetectionSetting":
        return cls((basis,) * n)

    @property
    def patterns(self) -> list[str]:
        import itertools

        return ["".join(p) for p in itertools.product(*(BASIS_SYMBOLS[b] for b in self.bases))]

    def analyzer(self) -> np.ndarray:
        u = np.ones((1, 1), dtype=complex)
        for b in self.bases:
            u = np.kron(u, _ANALYZERS[b])
        return u


def outcome_distribution(rho: DensityState, setting: DetectionSetting) -> np.ndarray:
    """Conditional outcome probabilities in ``setting.patterns`` order."""
    if len(setting.bases) != rho.dims:
        raise DimensionError(f"{len(setting.bases)} detection bases for {rho.dims} photons")
    if rho.annihilated:
        raise ZeroTraceError("no events survive post-selection")
    u = setting.analyzer()
    probs = np.einsum("ij,jk,ik->i", u, rho.matrix, u.conj()).real / rho.trace
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def ghz_rrr_probability(v: float, net_phase: float) -> float:
    """P(RRR) for ``(|HHH><HHH| + |VVV><VVV| + v e^{i t}|VVV><HHH| + h.c.)/2``."""
    if not 0.0 <= v <= 1.0:
        raise OpticsConfigError(f"coherence must lie in [0, 1], got {v}")
    return (1.0 - v * math.sin(net_phase)) / 8.0


def pair_rrr_probability(v: float, reflection_phase: float) -> float:
    """P(RRR) after a single PBS on photons 1 and 2 of |+++>."""
    return (1.0 - v * math.cos(2 * reflection_phase)) / 8.0


def two_body_circuit(visibility: float = 1.0, phase: float = 0.0) -> list[PBSElement]:
    """One PBS on photons 1 and 2; ``phase`` is the net VV-branch phase."""
    return [PBSElement((1, 2), phase / 2, visibility)]


def three_body_circuit(
    visibility: float = 1.0, phase: float = 0.0, first_visibility: float = 1.0
) -> list[PBSElement]:
    """PBS on (1, 2) then (2, 3). ``phase`` is the net phase of |VVV> relative to
    |HHH> and is carried by the second PBS; the net HHH<->VVV coherence is
    ``first_visibility * visibility``."""
    return [
        PBSElement((1, 2), 0.0, first_visibility),
        PBSElement((2, 3), phase / 2, visibility),
    ]


@dataclass(frozen=True)
class HomCurve:
    delays: tuple
    coincidence_rates: tuple
    visibility: float
    baseline: float
    coherence_time: float

    def __post_init__(self):
        if any(r < 0 for r in self.coincidence_rates):
            raise ValueError("coincidence rates must be non-negative")

    csv_header = ("delay", "coincidence_rate")

    def csv_rows(self) -> list[list]:
        return [[d, r] for d, r in zip(self.delays, self.coincidence_rates)]

    def to_json_dict(self) -> dict:
        return {
            "visibility": self.visibility,
            "baseline": self.baseline,
            "coherence_time": self.coherence_time,
            "delays": list(self.delays),
            "coincidence_rates": list(self.coincidence_rates),
        }


def _dip(tau, baseline, visibility, width):
    return baseline * (1.0 - visibility * np.exp(-(tau**2) / (2 * width**2)))


def fit_hom_dip(delays: Sequence[float], rates: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares Gaussian dip fit; returns (visibility, baseline, coherence_time)."""
    tau = np.asarray(delays, dtype=float)
    y = np.asarray(rates, dtype=float)
    base0 = float(y.max())
    if base0 <= 0:
        return 0.0, 0.0, 1.0
    vis0 = float((y.max() - y.min()) / y.max())
    near = tau[y <= y.min() + 0.5 * (y.max() - y.min())] if vis0 > 0 else tau
    width0 = max(float(np.ptp(near)) / 2.355, float(np.min(np.diff(np.sort(tau))))) if near.size > 1 else 1.0
    fit = least_squares(
        lambda p: _dip(tau, *p) - y,
        x0=[base0, vis0, width0],
        bounds=([0.0, 0.0, 1e-12], [np.inf, 1.0, np.inf]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    baseline, visibility, width = fit.x
    return float(visibility), float(baseline), float(width)


def hom_dip(
    delay_points: Sequence[float],
    visibility: float,
    coherence_time: float = 1.0,
    baseline: float = 1.0,
) -> HomCurve:
    if not 0.0 <= visibility <= 1.0:
        raise OpticsConfigError(f"visibility must lie in [0, 1], got {visibility}")
    if not coherence_time > 0:
        raise OpticsConfigError("coherence time must be positive")
    tau = np.asarray(delay_points, dtype=float)
    rates = _dip(tau, baseline, visibility, coherence_time)
    vis, base, width = fit_hom_dip(tau, rates)
    if visibility == 0.0:
        width = coherence_time
    return HomCurve(tuple(tau.tolist()), tuple(rates.tolist()), vis, base, width)


@dataclass(frozen=True)
class EventRecord:
    setting: Optional[DetectionSetting]
    counts: tuple
    total: int
    seed: int
    model_probs: tuple
    patterns: tuple = field(default=())

    def __post_init__(self):
        if sum(self.counts) != self.total:
            raise ValueError("counts do not add up to the total")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")
        if abs(sum(self.model_probs) - 1.0) > 1e-12:
            raise ValueError("model probabilities do not sum to 1")
        if not self.patterns:
            n = int(round(math.log2(len(self.counts))))
            pats = self.setting.patterns if self.setting else basis_labels(n, ("0", "1"))
            object.__setattr__(self, "patterns", tuple(pats))

    def count(self, pattern: str) -> int:
        return self.counts[self.patterns.index(pattern)]

    csv_header = ("pattern", "model_prob", "count")

    def csv_rows(self) -> list[list]:
        return [[p, q, c] for p, q, c in zip(self.patterns, self.model_probs, self.counts)]

    def to_json_dict(self) -> dict:
        return {
            "setting": list(self.setting.bases) if self.setting else None,
            "seed": self.seed,
            "total": self.total,
            "patterns": list(self.patterns),
            "counts": list(self.counts),
            "model_probs": list(self.model_probs),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "EventRecord":
        setting = DetectionSetting(tuple(d["setting"])) if d.get("setting") else None
        return cls(
            setting,
            tuple(d["counts"]),
            int(d["total"]),
            int(d["seed"]),
            tuple(d["model_probs"]),
            tuple(d["patterns"]),
        )


def _validate_probs(probs: Sequence[float]) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probabilities must be a non-empty 1-d list")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()}, not 1")
    return p / p.sum()


def sample_events(
    probs: Sequence[float],
    total: int,
    seed: int,
    setting: Optional[DetectionSetting] = None,
) -> EventRecord:
    """Multinomial draw of ``total`` events, fully determined by ``seed``."""
    p = _validate_probs(probs)
    if total < 1:
        raise ValueError("total must be at least 1")
    counts = np.random.default_rng(seed).multinomial(int(total), p)
    return EventRecord(setting, tuple(int(c) for c in counts), int(total), int(seed), tuple(p.tolist()))


def sample_batches(
    probs: Sequence[float],
    total: int,
    seed: int,
    n_batches: int,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Counts for ``n_batches`` independent runs, shape (n_batches, len(probs)).

    Batch ``b`` draws from the stream seeded by ``(seed, b)``, so the result
    does not depend on ``workers``.
    """
    p = _validate_probs(probs)

    def run(b):
        return np.random.default_rng([seed, b]).multinomial(int(total), p)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, range(n_batches)))
    else:
        rows = [run(b) for b in range(n_batches)]
    return np.array(rows)


def estimate_ratio(rec: EventRecord, target_pattern: str) -> tuple[float, float]:
    """Observed fraction of ``target_pattern`` with a binomial standard error.

    The fraction is floored at ``1/total`` inside the error formula so that a
    zero count does not report zero uncertainty.
    """
    n = rec.total
    est = rec.count(target_pattern) / n
    p = max(est, 1.0 / n)
    return est, math.sqrt(p * (1.0 - p) / n)


def format_uncertainty(value: float, err: float) -> str:
    """Render ``value(err)`` with one significant digit of uncertainty.

    >>> format_uncertainty(0.23351, 0.01246)
    '0.23(1)'
    """
    if not err > 0:
        return repr(value)
    exp = math.floor(math.log10(err))
    digit = int(math.floor(err / 10**exp + 0.5))
    if digit == 10:
        digit, exp = 1, exp + 1
    if exp < 0:
        return f"{value:.{-exp}f}({digit})"
    step = 10**exp
    return f"{round(value / step) * step:.0f}({digit * step})"
