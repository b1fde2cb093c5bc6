"""Finite-difference error against the exact derivatives as the step shrinks.

Central differences are second order, so each halving should cut the error by
about 4 until rounding takes over.

    python scripts/richardson_study.py --n 2 --k 3
"""

import argparse

import numpy as np

from ppmc.geometry import EmbeddingSpec, first_fundamental, second_fundamental
from ppmc.oracle import OracleConfig, fd_curve_derivative, random_frame, reference_vector, relative_error
from ppmc.reduced import delta_derive

GRIDS = {
    1: first_fundamental,
    2: second_fundamental,
    3: lambda k: delta_derive(second_fundamental(k)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--levels", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = EmbeddingSpec(args.n, ((args.k, 1),))
    frame = random_frame(args.n, np.random.default_rng(args.seed))
    cfg = OracleConfig()
    for order, grid in GRIDS.items():
        exact = reference_vector(spec, grid, frame)
        print(f"order {order}")
        prev = None
        for level in range(args.levels):
            h = cfg.step(order) * 4 / 2**level
            err = relative_error(spec, fd_curve_derivative(spec, frame, order, cfg, h=h), exact)
            ratio = f"{prev / err:6.2f}" if prev else "     -"
            print(f"  h={h:.3e}  rel err {err:.3e}  ratio {ratio}")
            prev = err


if __name__ == "__main__":
    main()
