"""Exact sweep of the normal residual of (nabla alpha11)(v, v) over n and k.

    python scripts/theorem_sweep.py --n-max 3 --k-max 10
"""

import argparse
import time

from ppmc.geometry import nabla_alpha11_perp
from ppmc.reduced import norm_sq_reduced


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--k-max", type=int, default=10)
    args = ap.parse_args()

    start = time.perf_counter()
    print(f"{'n':>2} {'k':>3} {'zero':>5} {'|res|^2':>14}  (1,0) entry")
    for n in range(1, args.n_max + 1):
        for k in range(1, args.k_max + 1):
            res = nabla_alpha11_perp(k, n)
            print(f"{n:>2} {k:>3} {str(res.is_zero()):>5} {str(norm_sq_reduced(res, n)):>14}  {res[(1, 0)].re}")
    print(f"elapsed {time.perf_counter() - start:.3f}s")


if __name__ == "__main__":
    main()
