#!/usr/bin/env python3
"""Classification comparison table: supervised, reward-visible bandit, and
feedback-only joint learning on the same digit environment.

Defaults reproduce the desk-scale protocol (blob digits, 60000 training
samples, seeds 0..8) and print a median/mean table. Point --mnist-images /
--mnist-labels at IDX files to run on real digits instead.
"""
import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from igl.cli import ExperimentConfig, run_experiment  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=60000)
    ap.add_argument("--seeds", default="0,1,2,3,4,5,6,7,8")
    ap.add_argument("--out", default="runs/classification")
    ap.add_argument("--mnist-images", default=None)
    ap.add_argument("--mnist-labels", default=None)
    ap.add_argument("--mnist-eval-images", default=None)
    ap.add_argument("--mnist-eval-labels", default=None)
    args = ap.parse_args()

    seeds = tuple(int(s) for s in args.seeds.split(","))
    use_mnist = args.mnist_images is not None and args.mnist_labels is not None
    base = dict(
        env="mnist" if use_mnist else "blob",
        seeds=seeds,
        samples=args.samples,
        mnist_images=args.mnist_images,
        mnist_labels=args.mnist_labels,
        mnist_eval_images=args.mnist_eval_images,
        mnist_eval_labels=args.mnist_eval_labels,
    )

    print(f"{'algo':<10} {'median':>8} {'mean':>8} {'std':>8}  per-seed")
    medians = {}
    for algo in ("sup", "cb", "igl-batch"):
        cfg = ExperimentConfig(algo=algo, out_dir=os.path.join(args.out, algo), **base)
        manifest, _ = run_experiment(cfg)
        accs = [r["accuracy"] for r in manifest.rows if r.get("accuracy") is not None]
        for row in manifest.rows:
            if row.get("error"):
                print(f"  seed {row['seed']} failed: {row['error']}", file=sys.stderr)
        med = float(np.median(accs))
        medians[algo] = med
        per_seed = " ".join(f"{a:.2f}" for a in accs)
        print(
            f"{algo:<10} {med:>8.2f} {manifest.mean_accuracy:>8.2f} "
            f"{manifest.std_accuracy:>8.2f}  {per_seed}"
        )
    ordered = medians["sup"] >= medians["cb"] >= medians["igl-batch"]
    print(f"median ordering sup >= cb >= igl-batch: {ordered}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
