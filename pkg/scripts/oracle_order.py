"""Gap between the exact solver and the finite-difference oracle under refinement.

Prints one row per refinement with the max-norm gap and the ratio to the
previous row, for three source families: per-cell uniform, the block sources
used by campaigns, and sources that vanish in the two wall cells. The last
family is reproduced to rounding by the oracle.

    python3 scripts/oracle_order.py --n-cells 64 --sources 50
"""

import argparse

import numpy as np

from robinpolar.campaign import trial_rng
from robinpolar.grid import Grid, GridFunction
from robinpolar.robin import RobinParams, solve, solve_fd_oracle
from robinpolar.sources import random_piecewise


def families(n, count, seed):
    g = Grid(n)
    for t in range(count):
        rng = trial_rng(seed, t)
        uniform = GridFunction(g, rng.random(n))
        blocks = random_piecewise(rng, g, 6)
        interior = rng.random(n)
        interior[[0, -1]] = 0.0
        yield {"uniform": uniform, "blocks": blocks, "zero_walls": GridFunction(g, interior)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-cells", type=int, default=64)
    ap.add_argument("--sources", type=int, default=50)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--refinements", default="2,4,8,16")
    args = ap.parse_args()

    params = RobinParams(args.alpha)
    rs = [int(r) for r in args.refinements.split(",")]
    gaps = {}
    for batch in families(args.n_cells, args.sources, args.seed):
        for name, f in batch.items():
            u = solve(params, f)
            row = [u.max_gap(solve_fd_oracle(params, f, r)) for r in rs]
            gaps.setdefault(name, []).append(row)

    print(f"n_cells={args.n_cells} alpha={args.alpha} sources={args.sources}")
    for name, rows in gaps.items():
        a = np.array(rows)
        batch = a.max(axis=0)
        print(f"\n{name}")
        print(f"{'r':>4} {'max gap':>12} {'batch ratio':>12} {'per-source ratio range':>26}")
        for j, r in enumerate(rs):
            if j == 0:
                print(f"{r:>4} {batch[j]:12.3e}")
                continue
            per = a[:, j - 1] / np.maximum(a[:, j], np.finfo(float).tiny)
            print(f"{r:>4} {batch[j]:12.3e} {batch[j - 1] / batch[j]:12.4f} "
                  f"{per.min():12.4f} .. {per.max():<12.4f}")


if __name__ == "__main__":
    main()
