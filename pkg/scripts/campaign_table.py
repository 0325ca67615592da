"""Run a verification campaign and tabulate verdicts per check family.

    python3 scripts/campaign_table.py --trials 200 --alpha random --seed 1
"""

import argparse
import math

from robinpolar.campaign import run_campaign
from robinpolar.config import ExperimentConfig

VERDICTS = ("holds", "holds_with_equality", "violated", "not_applicable")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-cells", type=int, default=64)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--alpha", default="random")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--b-stride", type=int, default=8)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    alpha = None if args.alpha == "random" else float(args.alpha)
    cfg = ExperimentConfig(n_cells=args.n_cells, trials=args.trials, alpha=alpha, seed=args.seed,
                           b_stride=args.b_stride, workers=args.workers)
    result = run_campaign(cfg)
    s = result.summary
    width = max(len(k) for k in s["by_check"])
    print(f"{'check':<{width}} " + " ".join(f"{v:>20}" for v in VERDICTS))
    for name, counts in s["by_check"].items():
        print(f"{name:<{width}} " + " ".join(f"{counts.get(v, 0):>20}" for v in VERDICTS))
    mv = s["max_violation"]
    print(f"\ntotal {s['total']}, equality mismatches {s['equality_mismatches']}, "
          f"max violation {mv if math.isfinite(mv) else 'n/a'}")
    raise SystemExit(0 if result.ok else 1)


if __name__ == "__main__":
    main()
