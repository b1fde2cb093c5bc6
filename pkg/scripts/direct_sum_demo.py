"""Residuals of a direct sum a_1 Phi_1 + a_2 Phi_2 + ..., block by block.

    python scripts/direct_sum_demo.py --n 1 --terms 1:1,2:1
"""

import argparse

import numpy as np

from ppmc.geometry import EmbeddingSpec
from ppmc.oracle import direct_sum_residuals, norm, random_frame


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--terms", default="1:1,2:1")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = EmbeddingSpec.parse_terms(args.n, args.terms)
    frame = random_frame(spec.n, np.random.default_rng(args.seed))
    res = direct_sum_residuals(spec, frame)
    print(f"concatenated residual norm {norm(spec, res.concatenated):.6e}")
    for (k, a), comp, alone in zip(spec.terms, res.components, res.standalone):
        single = EmbeddingSpec(spec.n, ((k, a),))
        diff = norm(single, comp - alone)
        print(f"k={k} a_k={a}: block {norm(single, comp):.6e}, standalone {norm(single, alone):.6e}, diff {diff:.1e}")


if __name__ == "__main__":
    main()
