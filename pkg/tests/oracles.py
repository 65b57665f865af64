"""Brute-force reference computations that avoid the package's code paths.

Everything here works per basis configuration with explicit loops and
single-qubit inner products; no Kronecker products, FFTs or SVDs.
"""

import cmath
import itertools
import math

S = 1 / math.sqrt(2)
KETS = {
    "H": (1, 0),
    "V": (0, 1),
    "+": (S, S),
    "-": (S, -S),
    "R": (S, 1j * S),
    "L": (S, -1j * S),
}


def amplitude(post, pre, keep=lambda bits: True):
    """<post| P |pre> where P projects onto basis configs satisfying ``keep``."""
    total = 0j
    for bits in itertools.product((0, 1), repeat=len(pre)):
        if not keep(bits):
            continue
        term = 1 + 0j
        for q, b in enumerate(bits):
            term *= KETS[post[q]][b].conjugate() * KETS[pre[q]][b]
        total += term
    return total


def projected_norm2(pre, keep):
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(pre)):
        if keep(bits):
            p = 1.0
            for q, b in enumerate(bits):
                p *= abs(KETS[pre[q]][b]) ** 2
            total += p
    return total


def pair_equal(i, j):
    return lambda bits: bits[i - 1] == bits[j - 1]


def all_equal(bits):
    return len(set(bits)) == 1


def parity_count(bits):
    """Number of matching pairs among (1,2), (2,3), (3,1)."""
    return sum(bits[a] == bits[b] for a, b in ((0, 1), (1, 2), (2, 0)))


def reduced_rank(amps, n, keep_qubits, tol=1e-9):
    """Rank of the reduced density matrix on ``keep_qubits`` via explicit partial trace."""
    keep = sorted(q - 1 for q in keep_qubits)
    rest = [q for q in range(n) if q not in keep]
    dim = 2 ** len(keep)
    rho = [[0j] * dim for _ in range(dim)]
    for a in itertools.product((0, 1), repeat=len(keep)):
        for b in itertools.product((0, 1), repeat=len(keep)):
            acc = 0j
            for r in itertools.product((0, 1), repeat=len(rest)):
                ia = _index(n, keep, a, rest, r)
                ib = _index(n, keep, b, rest, r)
                acc += amps[ia] * amps[ib].conjugate()
            rho[_int(a)][_int(b)] = acc
    # Gram-Schmidt on columns to count rank
    basis = []
    scale = max(abs(rho[k][k]) for k in range(dim))
    for col in range(dim):
        v = [rho[row][col] for row in range(dim)]
        for u in basis:
            c = sum(x.conjugate() * y for x, y in zip(u, v))
            v = [y - c * x for x, y in zip(u, v)]
        nrm = math.sqrt(sum(abs(y) ** 2 for y in v))
        if nrm > tol * scale:
            basis.append([y / nrm for y in v])
    return len(basis)


def _int(bits):
    out = 0
    for b in bits:
        out = 2 * out + b
    return out


def _index(n, keep, a, rest, r):
    bits = [0] * n
    for q, b in zip(keep, a):
        bits[q] = b
    for q, b in zip(rest, r):
        bits[q] = b
    return _int(bits)


def gaussian(x, center, sigma):
    return (2 * math.pi * sigma**2) ** -0.25 * math.exp(-((x - center) ** 2) / (4 * sigma**2))


def postselected_pointer(post, pre, lam, xs, sigma=1.0):
    """Exact post-selected pointer from analytic Gaussians shifted per basis config."""
    out = [0j] * len(xs)
    for bits in itertools.product((0, 1), repeat=3):
        w = amplitude(post, pre, lambda b, bits=bits: b == bits)
        s = parity_count(bits)
        for k, x in enumerate(xs):
            out[k] += w * gaussian(x, lam * s, sigma)
    return out


def pointer_moments(amps, xs, dx):
    norm = sum(abs(a) ** 2 for a in amps) * dx
    mean = sum(x * abs(a) ** 2 for x, a in zip(xs, amps)) * dx / norm
    return norm, mean


def rrr_from_mixture(v, theta, n=3):
    """P(RRR) of (1-v) * dephased + v * coherent (HH..H + e^{i theta} VV..V)/sqrt2."""
    r_h = KETS["R"][0].conjugate()
    r_v = KETS["R"][1].conjugate()
    a = r_h**n / math.sqrt(2)
    b = r_v**n * cmath.exp(1j * theta) / math.sqrt(2)
    coherent = abs(a + b) ** 2
    dephased = abs(a) ** 2 + abs(b) ** 2
    return v * coherent + (1 - v) * dephased
