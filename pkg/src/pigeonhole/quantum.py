"""Dense state and operator algebra for a handful of polarization qubits.

Basis ordering is fixed: H is 0, V is 1, and qubit 1 is the most significant
bit, so ``|HV>`` is index 1 and ``|VH>`` is index 2. Qubit indices in the
public API are 1-based to match the usual S_12 / S_123 labelling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

ATOL = 1e-12
MAX_QUBITS = 4

_SQ2 = 1.0 / np.sqrt(2.0)
SINGLE_QUBIT_STATES = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([_SQ2, _SQ2], dtype=complex),
    "-": np.array([_SQ2, -_SQ2], dtype=complex),
    "R": np.array([_SQ2, 1j * _SQ2], dtype=complex),
    "L": np.array([_SQ2, -1j * _SQ2], dtype=complex),
}


class InvalidLabelError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class UndefinedStateError(ValueError):
    """Raised when a zero vector is asked to behave like a physical state."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _num_qubits(size: int) -> int:
    n = int(round(np.log2(size))) if size > 0 else -1
    if n < 1 or 2**n != size:
        raise DimensionError(f"length {size} is not a power of two >= 2")
    return n


@dataclass(frozen=True)
class Ket:
    """Amplitude vector over the n-qubit H/V basis.

    ``normalized`` is a claim checked at construction. Projector images are
    built with ``normalized=False`` and expose their squared norm via
    :attr:`norm2`.
    """

    amps: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amps))
        object.__setattr__(self, "amps", amps)
        n = _num_qubits(amps.size)
        if n > MAX_QUBITS:
            raise DimensionError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
        if self.normalized and abs(self.norm2 - 1.0) > ATOL:
            raise ValueError(f"ket flagged normalized has squared norm {self.norm2!r}")

    @property
    def dims(self) -> int:
        return _num_qubits(self.amps.size)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalize(self) -> "Ket":
        nrm2 = self.norm2
        if nrm2 <= ATOL**2:
            raise UndefinedStateError("cannot normalize a zero vector")
        return Ket(self.amps / np.sqrt(nrm2), normalized=True)

    def __iter__(self):
        return iter(self.amps)

    def __len__(self):
        return self.amps.size


@dataclass(frozen=True)
class Operator:
    """Dense 2^n x 2^n matrix; ``projector=True`` is verified on construction."""

    entries: np.ndarray
    projector: bool = False

    def __post_init__(self):
        m = _frozen(self.entries)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        _num_qubits(m.shape[0])
        if self.projector:
            if np.max(np.abs(m @ m - m)) > ATOL or np.max(np.abs(m - m.conj().T)) > ATOL:
                raise ValueError("matrix flagged as projector is not idempotent and Hermitian")

    @property
    def dims(self) -> int:
        return _num_qubits(self.entries.shape[0])

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.entries))

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.dims != self.dims:
            raise DimensionError(f"operators act on {self.dims} and {other.dims} qubits")
        return None

    def __matmul__(self, other):
        if isinstance(other, Ket):
            return apply(self, other)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.entries @ other.entries)

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.entries + other.entries)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.entries - other.entries)

    def __mul__(self, scalar):
        if isinstance(scalar, (Ket, Operator)):
            return NotImplemented
        return Operator(scalar * self.entries)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.entries)

    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, projector=self.projector)

    def commutes_with(self, other: "Operator", atol: float = ATOL) -> bool:
        self._check(other)
        a, b = self.entries, other.entries
        return bool(np.max(np.abs(a @ b - b @ a)) <= atol)


@dataclass(frozen=True)
class BipartitionCut:
    """Split of qubits ``1..n`` into two non-empty complementary sets."""

    left: frozenset
    right: frozenset

    def __post_init__(self):
        left, right = frozenset(self.left), frozenset(self.right)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        if not left or not right:
            raise ValueError("both sides of a cut must be non-empty")
        if left & right:
            raise ValueError(f"qubits {sorted(left & right)} appear on both sides")
        if left | right != frozenset(range(1, self.n + 1)):
            raise ValueError("cut sides must cover qubits 1..n exactly")

    @property
    def n(self) -> int:
        return len(self.left) + len(self.right)

    @classmethod
    def from_left(cls, left: Iterable[int], n: int) -> "BipartitionCut":
        left = frozenset(left)
        return cls(left, frozenset(range(1, n + 1)) - left)

    def __str__(self):
        fmt = lambda s: "{" + ",".join(map(str, sorted(s))) + "}"
        return f"{fmt(self.left)}|{fmt(self.right)}"


def single_qubit_cuts(n: int) -> list[BipartitionCut]:
    return [BipartitionCut.from_left({k}, n) for k in range(1, n + 1)]


def basis_ket(label: str) -> Ket:
    """Product state from a per-qubit label over ``H V + - R L``.

    >>> basis_ket("+").amps.round(6)
    array([0.707107+0.j, 0.707107+0.j])
    """
    if not label:
        raise InvalidLabelError("label must name at least one qubit")
    vec = np.ones(1, dtype=complex)
    for pos, sym in enumerate(label, start=1):
        try:
            vec = np.kron(vec, SINGLE_QUBIT_STATES[sym])
        except KeyError:
            raise InvalidLabelError(
                f"unknown polarization symbol {sym!r} at position {pos} of {label!r}; "
                f"expected one of {''.join(SINGLE_QUBIT_STATES)}"
            ) from None
    return Ket(vec, normalized=True)


def identity(n: int) -> Operator:
    return Operator(np.eye(2**n), projector=True)


def tensor(a: Union[Ket, Operator], b: Union[Ket, Operator]) -> Union[Ket, Operator]:
    """Kronecker product with the qubits of ``a`` first."""
    if isinstance(a, Ket) and isinstance(b, Ket):
        return Ket(np.kron(a.amps, b.amps), normalized=a.normalized and b.normalized)
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(np.kron(a.entries, b.entries), projector=a.projector and b.projector)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def inner(a: Ket, b: Ket) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.dims != b.dims:
        raise DimensionError(f"inner product of {a.dims}- and {b.dims}-qubit kets")
    return complex(np.vdot(a.amps, b.amps))


def apply(op: Operator, ket: Ket) -> Ket:
    """Unnormalized image ``op|ket>``; read its squared norm off ``.norm2``."""
    if op.dims != ket.dims:
        raise DimensionError(f"{op.dims}-qubit operator applied to {ket.dims}-qubit ket")
    return Ket(op.entries @ ket.amps)


def matrix_element(bra: Ket, op: Operator, ket: Ket) -> complex:
    return inner(bra, apply(op, ket))


def _basis_bits(n: int) -> np.ndarray:
    """(2^n, n) array of basis-state bits, qubit 1 in column 0."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=int)


def parity_projector(i: int, j: int, n: int) -> Operator:
    """S_ij: projector onto basis states where qubits i and j agree."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"qubit indices ({i}, {j}) out of range for n={n}")
    if i == j:
        raise ValueError("parity check needs two distinct qubits")
    if i > j:
        i, j = j, i
    bits = _basis_bits(n)
    diag = (bits[:, i - 1] == bits[:, j - 1]).astype(float)
    return Operator(np.diag(diag), projector=True)


def ghz_projector(n: int) -> Operator:
    """Projector onto span{|H...H>, |V...V>}."""
    if n < 2:
        raise ValueError("GHZ projector needs at least two qubits")
    diag = np.zeros(2**n)
    diag[0] = diag[-1] = 1.0
    return Operator(np.diag(diag), projector=True)


def qubit_pairs(n: int) -> list[tuple[int, int]]:
    """Cyclic pair order used in the pigeonhole sums: (1,2), (2,3), (3,1) for n=3."""
    if n == 2:
        return [(1, 2)]
    return [(k, k % n + 1) for k in range(1, n + 1)]


def pair_parity_sum(n: int = 3) -> Operator:
    """Sum of S_ij over all pairs: the system part of the meter coupling."""
    total = np.zeros((2**n, 2**n), dtype=complex)
    for i, j in qubit_pairs(n):
        total += parity_projector(i, j, n).entries
    return Operator(total)


def schmidt_coefficients(state: Ket, cut: BipartitionCut) -> np.ndarray:
    """Singular values of the amplitude matrix reshaped across ``cut``."""
    n = state.dims
    if cut.n != n:
        raise DimensionError(f"cut over {cut.n} qubits applied to a {n}-qubit state")
    if state.norm2 <= ATOL**2:
        raise UndefinedStateError("Schmidt decomposition of a zero vector is undefined")
    left = sorted(q - 1 for q in cut.left)
    right = sorted(q - 1 for q in cut.right)
    tensor_amps = state.amps.reshape((2,) * n).transpose(left + right)
    mat = tensor_amps.reshape(2 ** len(left), 2 ** len(right))
    return np.linalg.svd(mat, compute_uv=False)


def schmidt_rank(state: Ket, cut: BipartitionCut, tol: float = 1e-9) -> int:
    """Count singular values above ``tol`` times the largest one."""
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    s = schmidt_coefficients(state, cut)
    return int(np.sum(s > tol * s[0]))


def basis_labels(n: int, symbols: Sequence[str] = ("H", "V")) -> list[str]:
    return ["".join(p) for p in itertools.product(symbols, repeat=n)]
