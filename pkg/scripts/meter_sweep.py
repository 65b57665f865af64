"""Pointer shift and post-selection rate against coupling strength.

Prints the sweep, the fitted orders next to their predictions, and the
exponent of the exact-vs-truncated residual.
"""

import argparse

import numpy as np

from pigeonhole.ensemble import Ensemble
from pigeonhole.meter import default_meter, lambda_sweep, predicted_orders, residual_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pre", default="+++")
    ap.add_argument("--post", default="RRR")
    ap.add_argument("--lam-max", type=float, default=0.1)
    ap.add_argument("--points", type=int, default=12)
    args = ap.parse_args()

    e = Ensemble.from_labels(args.pre, args.post)
    meter = default_meter()
    rep = lambda_sweep(e, meter, np.linspace(1e-3, args.lam_max, args.points), workers=4)
    print(f"{'lambda':>10}{'mean shift':>16}{'P(post)':>14}")
    for lam, shift, prob in rep.csv_rows():
        print(f"{lam:>10.4f}{shift:>16.3e}{prob:>14.8f}")
    pred = predicted_orders(e, meter)
    for key in ("fit0", "fit1", "fit2"):
        print(f"{key}: fitted {getattr(rep, key):+.6f}  predicted {pred[key]:+.6f}")
    print(f"truncation residual exponent {residual_exponent(e, meter):.3f}")


if __name__ == "__main__":
    main()
