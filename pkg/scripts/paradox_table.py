"""Weak values and transition ratios of the parity observables for one ensemble.

    python scripts/paradox_table.py [PRE] [POST]
"""

import sys

from pigeonhole.ensemble import Ensemble, transition_ratio, weak_value, success_probability
from pigeonhole.quantum import ghz_projector, parity_projector, qubit_pairs


def main(pre="+++", post="RRR"):
    e = Ensemble.from_labels(pre, post)
    print(f"pre {pre}  post {post}  P(post) = {success_probability(e):.6f}")
    ops = {f"S{i}{j}": parity_projector(i, j, 3) for i, j in qubit_pairs(3)}
    ops["S123"] = ghz_projector(3)
    print(f"{'obs':6}{'weak value':>24}{'ratio':>12}")
    for name, op in ops.items():
        w = weak_value(op, e)
        w = complex(round(w.real, 12) + 0.0, round(w.imag, 12) + 0.0)
        print(f"{name:6}{w.real:>12.6f}{w.imag:>+11.6f}j{transition_ratio(op, e):>12.6f}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
