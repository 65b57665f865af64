"""Distribution of RRR counts behind one PBS across many seeded runs."""

import argparse

import numpy as np

from pigeonhole.optics import (
    DetectionSetting,
    apply_circuit,
    outcome_distribution,
    prepare_input,
    sample_batches,
    two_body_circuit,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--visibility", type=float, default=0.978)
    ap.add_argument("--total", type=int, default=1105)
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rl = DetectionSetting.uniform("RL")
    probs = outcome_distribution(apply_circuit(prepare_input(), two_body_circuit(args.visibility)), rl)
    idx = rl.patterns.index("RRR")
    counts = sample_batches(probs, args.total, args.seed, args.runs, workers=4)[:, idx]
    print(f"P(RRR) = {probs[idx]:.6f}, expected count {probs[idx] * args.total:.3f}")
    print(f"mean {counts.mean():.3f}  std {counts.std():.3f}  over {args.runs} runs")
    values, freq = np.unique(counts, return_counts=True)
    for v, f in zip(values, freq):
        print(f"{v:>3} {'#' * max(1, round(60 * f / freq.max()))}")


if __name__ == "__main__":
    main()
