"""Variable-strength pointer measurement of the pair-parity sum.

A single Gaussian pointer on a periodic grid is coupled to the qubits through
``H = A (x) F`` where ``A`` is a sum of commuting projectors and ``F`` generates
translations. Because ``A`` and ``F`` act on different factors the joint
propagator splits into ``sum_s P_s (x) exp(-i lam s F)`` over the eigenvalues
``s`` of ``A``, so each eigen-branch of the system only translates its copy of
the pointer by ``lam * s``. That is exact, no Trotter or Taylor step involved.

Translations are done spectrally, so a wavefunction leaving one edge of the
grid reappears at the other. :class:`GridOverflowError` is raised before that
can contaminate results.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ensemble import Ensemble, expansion_coefficients
from .quantum import (
    ATOL,
    DimensionError,
    Ket,
    Operator,
    UndefinedStateError,
    apply,
    ghz_projector,
    pair_parity_sum,
    parity_projector,
    qubit_pairs,
)

DEFAULT_SIGMA = 1.0
DEFAULT_NPOINTS = 1024
DEFAULT_SPACING = DEFAULT_SIGMA / 20
WEAK_REGIME = 0.1  # lam / sigma below which the coupling is called weak
OVERFLOW_PROB = 1e-6
GUARD_WIDTHS = 3.0
SPAN_WIDTHS = 6.0
DEFAULT_LAMBDAS = tuple(float(v) for v in np.linspace(1e-3, 1e-1, 12))


class GridOverflowError(RuntimeError):
    def __init__(self, message: str, lam: Optional[float] = None):
        super().__init__(message)
        self.lam = lam


class MeterConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MeterGrid:
    npoints: int = DEFAULT_NPOINTS
    spacing: float = DEFAULT_SPACING
    origin: float = 0.0

    def __post_init__(self):
        if self.npoints < 16 or self.npoints % 2:
            raise MeterConfigError(f"npoints must be even and >= 16, got {self.npoints}")
        if not self.spacing > 0:
            raise MeterConfigError(f"grid spacing must be positive, got {self.spacing}")

    @property
    def positions(self) -> np.ndarray:
        return self.origin + (np.arange(self.npoints) - self.npoints // 2) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.npoints, d=self.spacing)

    @property
    def half_width(self) -> float:
        return self.npoints // 2 * self.spacing

    @property
    def max_wavenumber(self) -> float:
        return math.pi / self.spacing


@dataclass(frozen=True)
class MeterState:
    grid: MeterGrid
    amps: np.ndarray
    sigma: float
    normalized: bool = False

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (self.grid.npoints,):
            raise DimensionError(f"expected {self.grid.npoints} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        if self.normalized and abs(self.norm2 - 1.0) > 1e-9:
            raise ValueError(f"meter flagged normalized has norm^2 {self.norm2}")

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) * self.grid.spacing)


class DisplacementGenerator:
    """The pointer generator ``F`` (wavenumber operator), applied spectrally.

    ``translate(amps, lam)`` is ``exp(-i lam F)`` and moves a wavefunction by
    ``+lam``; the grid is periodic.
    """

    def __init__(self, grid: MeterGrid):
        self.grid = grid
        self.k = grid.wavenumbers

    def translate(self, amps: np.ndarray, shift: float) -> np.ndarray:
        if shift == 0:
            return np.array(amps, dtype=complex)
        return np.fft.ifft(np.fft.fft(amps) * np.exp(-1j * shift * self.k))

    def apply(self, amps: np.ndarray, power: int = 1) -> np.ndarray:
        """F^power acting on ``amps``."""
        return np.fft.ifft(np.fft.fft(amps) * self.k**power)

    def expectation(self, amps: np.ndarray, power: int = 1) -> float:
        """<F^power> for a normalized state."""
        val = np.vdot(amps, self.apply(amps, power)) * self.grid.spacing
        return float(val.real)

    def matrix(self) -> np.ndarray:
        n = self.grid.npoints
        return np.array([self.apply(col) for col in np.eye(n)]).T


def displacement_generator(grid: MeterGrid) -> DisplacementGenerator:
    return DisplacementGenerator(grid)


def gaussian_meter(grid: Optional[MeterGrid] = None, sigma: float = DEFAULT_SIGMA) -> MeterState:
    """Normalized Gaussian pointer with position variance ``sigma**2``."""
    grid = grid or MeterGrid()
    if sigma < 3 * grid.spacing:
        raise MeterConfigError(
            f"sigma={sigma} is not resolved by spacing {grid.spacing} (need sigma >= 3*spacing)"
        )
    if grid.half_width < SPAN_WIDTHS * sigma:
        raise MeterConfigError(
            f"grid half-width {grid.half_width} is narrower than {SPAN_WIDTHS:g} sigma"
        )
    x = grid.positions - grid.origin
    amps = np.exp(-(x**2) / (4 * sigma**2))
    amps = amps / np.sqrt(np.sum(amps**2) * grid.spacing)
    return MeterState(grid, amps, sigma, normalized=True)


def default_meter() -> MeterState:
    return gaussian_meter(MeterGrid(), DEFAULT_SIGMA)


def pointer_mean(meter: MeterState) -> float:
    weight = np.abs(meter.amps) ** 2
    total = weight.sum()
    if total <= 0:
        raise UndefinedStateError("pointer mean of a zero-norm meter state")
    return float(np.sum(meter.grid.positions * weight) / total)


@dataclass(frozen=True)
class CouplingConfig:
    lam: float
    observables: tuple = field(default_factory=lambda: tuple(
        parity_projector(i, j, 3) for i, j in qubit_pairs(3)
    ))

    def __post_init__(self):
        if not self.lam >= 0:
            raise MeterConfigError(f"coupling strength must be >= 0, got {self.lam}")
        obs = tuple(self.observables)
        object.__setattr__(self, "observables", obs)
        if not obs:
            raise MeterConfigError("at least one observable is required")
        dims = {o.dims for o in obs}
        if len(dims) != 1:
            raise MeterConfigError(f"observables act on different qubit counts {sorted(dims)}")
        for o in obs:
            if not o.projector:
                raise MeterConfigError("coupled observables must be projectors")
        for a in range(len(obs)):
            for b in range(a + 1, len(obs)):
                if not obs[a].commutes_with(obs[b]):
                    raise MeterConfigError(f"observables {a} and {b} do not commute")

    @property
    def dims(self) -> int:
        return self.observables[0].dims

    @property
    def system_operator(self) -> Operator:
        return Operator(sum(o.entries for o in self.observables))

    def with_lambda(self, lam: float) -> "CouplingConfig":
        return CouplingConfig(lam, self.observables)


def _eigen_branches(system: Operator) -> list[tuple[float, np.ndarray]]:
    """(eigenvalue, projector) pairs of a Hermitian system operator."""
    m = system.entries
    if np.max(np.abs(m - np.diag(np.diag(m)))) <= ATOL:
        vals = np.diag(m).real
        vecs = np.eye(len(vals))
    else:
        vals, vecs = np.linalg.eigh(m)
    branches: dict[float, np.ndarray] = {}
    for val, vec in zip(vals, vecs.T):
        key = round(float(val), 9)
        proj = np.outer(vec, vec.conj())
        branches[key] = branches.get(key, 0) + proj
    return sorted(branches.items())


def _check_overflow(amps: np.ndarray, meter: MeterState, lam: float, shift: float):
    grid = meter.grid
    x = grid.positions
    guard = GUARD_WIDTHS * meter.sigma
    band = (x < x[0] + guard) | (x > x[-1] - guard)
    prob = np.sum(np.abs(amps[band]) ** 2) * grid.spacing
    if prob > OVERFLOW_PROB:
        raise GridOverflowError(
            f"lambda={lam:g} shifts the pointer by {shift:g}, leaving probability {prob:.2e} "
            f"within {GUARD_WIDTHS:g} sigma of the grid edge",
            lam=lam,
        )


def _branch_copies(pre: Ket, meter: MeterState, cfg: CouplingConfig, lam: float):
    """Yield (projector, translated pointer) per eigen-branch of the coupling."""
    if pre.dims != cfg.dims:
        raise DimensionError(f"{pre.dims}-qubit state coupled through {cfg.dims}-qubit observables")
    gen = DisplacementGenerator(meter.grid)
    for s, proj in _eigen_branches(cfg.system_operator):
        weight = np.vdot(pre.amps, proj @ pre.amps).real
        if weight <= ATOL**2:
            continue
        moved = gen.translate(meter.amps, lam * s)
        _check_overflow(moved, meter, lam, lam * s)
        yield proj, moved


def evolve_joint(pre: Ket, meter: MeterState, cfg: CouplingConfig) -> np.ndarray:
    """System-pointer wavefunction after the coupling, shape (2^n, npoints)."""
    joint = np.zeros((2**pre.dims, meter.grid.npoints), dtype=complex)
    for proj, moved in _branch_copies(pre, meter, cfg, cfg.lam):
        joint += np.outer(proj @ pre.amps, moved)
    return joint


def _postselected_amps(e: Ensemble, meter: MeterState, cfg: CouplingConfig, lam: float) -> np.ndarray:
    out = np.zeros(meter.grid.npoints, dtype=complex)
    for proj, moved in _branch_copies(e.pre, meter, cfg, lam):
        out += np.vdot(e.post.amps, proj @ e.pre.amps) * moved
    return out


def evolve_and_postselect(
    e: Ensemble, meter: MeterState, cfg: CouplingConfig
) -> tuple[MeterState, float]:
    """Unnormalized pointer state ``<phi| exp(-i lam H) |psi> |meter>``.

    Returns the pointer state and its squared norm, which is the probability
    that post-selection succeeds at this coupling strength.
    """
    amps = _postselected_amps(e, meter, cfg, cfg.lam)
    state = MeterState(meter.grid, amps, meter.sigma)
    return state, state.norm2


@dataclass(frozen=True)
class ShiftReport:
    """Result of a coupling-strength sweep.

    ``shift_fit`` and ``prob_fit`` are ascending cubic coefficients for the
    post-selected pointer mean and the post-selection probability. The
    per-order summaries are

    * ``fit0``: zero-coupling post-selection probability, ``|c0|^2``;
    * ``fit1``: linear pointer shift per unit ``lam``, ``Re(c1/c0)``;
    * ``fit2``: quadratic change of the post-selection probability, which is
      where ``c2`` enters. The quadratic term of the pointer mean vanishes
      identically for a real symmetric pointer, so it carries no information.
    """

    lambdas: tuple
    mean_shifts: tuple
    success_probs: tuple
    shift_fit: tuple
    prob_fit: tuple
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        n = len(self.lambdas)
        if n < 4 or len(self.mean_shifts) != n or len(self.success_probs) != n:
            raise ValueError("sweep lists must have equal length >= 4")

    @property
    def fit0(self) -> float:
        return self.prob_fit[0]

    @property
    def fit1(self) -> float:
        return self.shift_fit[1]

    @property
    def fit2(self) -> float:
        return self.prob_fit[2]

    @property
    def weak(self) -> bool:
        return max(self.lambdas) <= WEAK_REGIME * self.sigma

    def csv_rows(self) -> list[list]:
        return [
            [lam, m, p] for lam, m, p in zip(self.lambdas, self.mean_shifts, self.success_probs)
        ]

    csv_header = ("lambda", "mean_shift", "success_prob")

    def fits_dict(self) -> dict:
        return {
            "fit0": self.fit0,
            "fit1": self.fit1,
            "fit2": self.fit2,
            "shift_fit": list(self.shift_fit),
            "prob_fit": list(self.prob_fit),
            "sigma": self.sigma,
            "weak_regime": self.weak,
        }

    def to_json_dict(self) -> dict:
        d = self.fits_dict()
        d["rows"] = [dict(zip(self.csv_header, row)) for row in self.csv_rows()]
        return d


def max_safe_lambda(meter: MeterState, max_eigenvalue: float = 3.0) -> float:
    """Largest lam keeping the shifted pointer ``SPAN_WIDTHS`` sigma inside the grid."""
    return (meter.grid.half_width - SPAN_WIDTHS * meter.sigma) / max_eigenvalue


def lambda_sweep(
    e: Ensemble,
    meter: MeterState,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    observables: Optional[Sequence[Operator]] = None,
    workers: Optional[int] = None,
) -> ShiftReport:
    lambdas = [float(v) for v in lambdas]
    if len(lambdas) < 4:
        raise MeterConfigError("a sweep needs at least 4 coupling strengths")
    cfg = CouplingConfig(0.0) if observables is None else CouplingConfig(0.0, tuple(observables))
    top = float(np.max(np.abs(np.linalg.eigvalsh(cfg.system_operator.entries))))
    bound = max_safe_lambda(meter, top)
    for lam in lambdas:
        if lam > bound:
            raise GridOverflowError(
                f"lambda={lam:g} exceeds the grid safety bound {bound:.4g}", lam=lam
            )

    def run(lam):
        state, prob = evolve_and_postselect(e, meter, cfg.with_lambda(lam))
        return pointer_mean(state), prob

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, lambdas))
    else:
        results = [run(lam) for lam in lambdas]
    means = [r[0] for r in results]
    probs = [r[1] for r in results]
    poly = np.polynomial.polynomial.polyfit
    return ShiftReport(
        tuple(lambdas),
        tuple(means),
        tuple(probs),
        tuple(float(c) for c in poly(lambdas, means, 3)),
        tuple(float(c) for c in poly(lambdas, probs, 3)),
        sigma=meter.sigma,
    )


def predicted_orders(e: Ensemble, meter: MeterState) -> dict:
    """Analytic values of fit0, fit1, fit2 from the expansion coefficients."""
    rep = expansion_coefficients(e, f_max=meter.grid.max_wavenumber)
    f2 = DisplacementGenerator(meter.grid).expectation(meter.amps, 2)
    return {
        "fit0": abs(rep.c0) ** 2,
        "fit1": (rep.c1 / rep.c0).real if abs(rep.c0) > 0 else float("nan"),
        "fit2": (abs(rep.c1) ** 2 - (rep.c0.conjugate() * rep.c2).real) * f2,
    }


def truncated_meter(e: Ensemble, meter: MeterState, lam: float) -> np.ndarray:
    """Second-order expansion ``c0 phi - i lam c1 F phi - lam^2/2 c2 F^2 phi``."""
    rep = expansion_coefficients(e, f_max=meter.grid.max_wavenumber)
    gen = DisplacementGenerator(meter.grid)
    phi = meter.amps
    return (
        rep.c0 * phi
        - 1j * lam * rep.c1 * gen.apply(phi, 1)
        - 0.5 * lam**2 * rep.c2 * gen.apply(phi, 2)
    )


def truncation_residuals(e: Ensemble, meter: MeterState, lambdas: Sequence[float]) -> np.ndarray:
    """L2 distance between exact and second-order post-selected pointer states."""
    cfg = CouplingConfig(0.0)
    out = []
    for lam in lambdas:
        exact = _postselected_amps(e, meter, cfg, lam)
        diff = exact - truncated_meter(e, meter, lam)
        out.append(np.sqrt(np.sum(np.abs(diff) ** 2) * meter.grid.spacing))
    return np.array(out)


def residual_exponent(
    e: Ensemble, meter: MeterState, lambdas: Optional[Sequence[float]] = None
) -> float:
    """Log-log slope of the truncation residual; 3 when the expansion is right."""
    if lambdas is None:
        lambdas = np.geomspace(1e-3, 1e-1, 9) * meter.sigma
    res = truncation_residuals(e, meter, lambdas)
    slope, _ = np.polyfit(np.log(lambdas), np.log(res), 1)
    return float(slope)


def finite_difference_orders(
    e: Ensemble, meter: MeterState, h: float = 1e-3
) -> tuple[complex, complex]:
    """Recover (c1, c2) from central differences of the exact pointer state.

    The derivatives are projected onto ``F phi`` and ``F^2 phi``, which is
    where the first- and second-order terms of the expansion live.
    """
    cfg = CouplingConfig(0.0)
    gen = DisplacementGenerator(meter.grid)
    plus = _postselected_amps(e, meter, cfg, h)
    zero = _postselected_amps(e, meter, cfg, 0.0)
    minus = _postselected_amps(e, meter, cfg, -h)
    d1 = (plus - minus) / (2 * h)
    d2 = (plus - 2 * zero + minus) / h**2
    f1 = gen.apply(meter.amps, 1)
    f2 = gen.apply(meter.amps, 2)
    c1 = 1j * np.vdot(f1, d1) / np.vdot(f1, f1)
    c2 = -np.vdot(f2, d2) / np.vdot(f2, f2)
    return complex(c1), complex(c2)


def backaction_state(e: Ensemble, order: int) -> Ket:
    """Normalized system state left by the order-1 or order-2 coupling term."""
    if e.dims != 3:
        raise DimensionError("back-action states are defined for three qubits")
    if order == 1:
        op = pair_parity_sum(3)
    elif order == 2:
        op = ghz_projector(3)
    else:
        raise ValueError(f"order must be 1 or 2, got {order}")
    return apply(op, e.pre).normalize()
