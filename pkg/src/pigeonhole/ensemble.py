"""Pre- and post-selected ensembles: overlaps, weak values, transition ratios.

The coupling expansion here is the order-by-order form of
``<phi| exp(-i lam H) |psi>`` with ``H = (S_12 + S_23 + S_31) (x) F``; the
second-order coefficient relies on ``(sum S_ij)^2 = sum S_ij + 6 S_123``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum import (
    ATOL,
    DimensionError,
    Ket,
    Operator,
    apply,
    basis_ket,
    ghz_projector,
    identity,
    inner,
    matrix_element,
    pair_parity_sum,
)

OVERLAP_FLOOR = 1e-12
# Default meter grid spacing (sigma / 20 with sigma = 1); bounds |F| by pi / spacing.
DEFAULT_F_MAX = math.pi / 0.05
TRUNCATION_FRACTION = 1e-3


class UndefinedWeakValueError(ZeroDivisionError):
    pass


class UndefinedRatioError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class Ensemble:
    pre: Ket
    post: Ket

    def __post_init__(self):
        for name in ("pre", "post"):
            ket = getattr(self, name)
            if abs(ket.norm2 - 1.0) > ATOL:
                raise ValueError(f"{name}-selected state is not normalized (norm^2={ket.norm2})")
        if self.pre.dims != self.post.dims:
            raise DimensionError(
                f"pre has {self.pre.dims} qubits but post has {self.post.dims}"
            )

    @property
    def dims(self) -> int:
        return self.pre.dims

    @property
    def overlap(self) -> complex:
        """<post|pre>."""
        return inner(self.post, self.pre)

    @classmethod
    def from_labels(cls, pre: str, post: str) -> "Ensemble":
        return cls(basis_ket(pre), basis_ket(post))


def paper_ensemble() -> Ensemble:
    """|+++> prepared, |RRR> post-selected."""
    return Ensemble.from_labels("+++", "RRR")


def success_probability(e: Ensemble) -> float:
    return abs(e.overlap) ** 2


def weak_value(obs: Operator, e: Ensemble) -> complex:
    c0 = e.overlap
    if abs(c0) < OVERLAP_FLOOR:
        raise UndefinedWeakValueError(
            f"pre- and post-selected states are orthogonal (|<phi|psi>| = {abs(c0):.3g})"
        )
    return matrix_element(e.post, obs, e.pre) / c0


def transition_ratio(obs: Operator, e: Ensemble) -> float:
    """|<phi|A|psi>|^2 / ||A|psi>||^2.

    For a projector A this is the probability that post-selection succeeds
    given that the projection onto A succeeded.
    """
    image = apply(obs, e.pre)
    if image.norm2 <= ATOL**2:
        raise UndefinedRatioError("observable annihilates the pre-selected state")
    return abs(inner(e.post, image)) ** 2 / image.norm2


def overlap_normalized_ratio(obs: Operator, e: Ensemble) -> float:
    """|<phi|A|psi>|^2 / |<phi|psi>|^2, i.e. the squared modulus of the weak value."""
    return abs(weak_value(obs, e)) ** 2


@dataclass(frozen=True)
class ExpansionReport:
    c0: complex
    c1: complex
    c2: complex
    lambda_validity: float

    def __post_init__(self):
        for name in ("c0", "c1", "c2"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")

    def to_json_dict(self) -> dict:
        pair = lambda z: [float(z.real), float(z.imag)]
        return {
            "c0": pair(self.c0),
            "c1": pair(self.c1),
            "c2": pair(self.c2),
            "lambda_validity": float(self.lambda_validity),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExpansionReport":
        z = lambda p: complex(p[0], p[1])
        return cls(z(d["c0"]), z(d["c1"]), z(d["c2"]), float(d["lambda_validity"]))


def expansion_coefficients(e: Ensemble, f_max: float = DEFAULT_F_MAX) -> ExpansionReport:
    """Zeroth, first and second order amplitudes of the post-selected meter.

    ``lambda_validity`` is where the crude cubic remainder bound
    ``(3 f_max lam)^3 / 6`` reaches ``1e-3 |c0|``; ``f_max`` bounds the
    pointer generator on the grid in use.
    """
    if e.dims != 3:
        raise DimensionError(f"expansion needs a 3-qubit ensemble, got {e.dims}")
    pair_sum = pair_parity_sum(3)
    c0 = e.overlap
    c1 = matrix_element(e.post, pair_sum, e.pre)
    c2 = matrix_element(e.post, pair_sum + 6.0 * ghz_projector(3), e.pre)
    h_norm = 3.0 * f_max
    lam = (6.0 * TRUNCATION_FRACTION * abs(c0)) ** (1.0 / 3.0) / h_norm
    return ExpansionReport(c0, c1, c2, lam)


def verify_second_order_identity(n: int = 3, drop_ghz_term: bool = False) -> tuple[bool, float]:
    """Check ``(sum S_ij)^2 - sum S_ij - 6 S_123 == 0`` entrywise.

    ``drop_ghz_term`` omits the ``6 S_123`` piece, which must then fail; it
    exists to prove the check has teeth.
    """
    if n != 3:
        raise ValueError("the 6 S_123 identity holds for three qubits only")
    s = pair_parity_sum(n)
    diff = s @ s - s
    if not drop_ghz_term:
        diff = diff - 6.0 * ghz_projector(n)
    residual = float(np.max(np.abs(diff.entries)))
    return residual <= ATOL, residual


def identity_for(e: Ensemble) -> Operator:
    return identity(e.dims)
