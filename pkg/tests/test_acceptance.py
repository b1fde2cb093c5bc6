"""Exit criteria. Each criterion records one PASS/FAIL line, printed in the
terminal summary (and by ``python tests/test_acceptance.py``)."""

import time

import numpy as np
import pytest

from ppmc.bipoly import Frame, dim_vk, embed_reduced, inner_l2, orbit_singular_values
from ppmc.geometry import (
    EmbeddingSpec,
    closed_alpha11,
    closed_nabla_literal,
    first_fundamental,
    nabla_alpha11_literal,
    nabla_alpha11_perp,
    second_fundamental,
    split_sff,
)
from ppmc.oracle import (
    OracleConfig,
    check_equivariance,
    direct_sum_residuals,
    fd_curve_derivative,
    norm,
    orbit_norm_spread,
    random_frame,
    reference_vector,
    relative_error,
)
from ppmc.reduced import (
    J_MINUS,
    J_PLUS,
    S_MINUS,
    Operator,
    ReducedPoly,
    apply_isotropy,
    delta_derive,
    inner_reduced,
    project_eigen,
)

RESULTS: dict[int, str] = {}


def record(num: int, ok: bool, detail: str):
    RESULTS[num] = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}"
    print(RESULTS[num])
    assert ok, detail


def _literal_nabla_by_hand(k: int) -> ReducedPoly:
    """Second derivation route: expand the displayed sum term by term with products."""
    xx = ReducedPoly(1, {(0, 0): 1})
    if k < 2:
        return ReducedPoly.zero(k)
    # 2k(k-1)(k-2)(x x̄)^(k-3) (x x̄ x̄ v v v̄ + x x x̄ v v̄ v̄) -> (2,1), (1,2) at bidegree k
    first = ReducedPoly.zero(k)
    if k >= 3:
        first = (xx ** (k - 3) * ReducedPoly(3, {(2, 1): 1, (1, 2): 1})).scale(2 * k * (k - 1) * (k - 2))
    second = (xx ** (k - 2) * ReducedPoly(2, {(1, 2): 1, (2, 1): 1, (0, 1): -1, (1, 0): -1})).scale(4 * k * (k - 1))
    return first + second


def test_criterion_1_theorem_exact():
    start = time.perf_counter()
    bad = []
    for n in (1, 2, 3):
        for k in range(1, 9):
            if nabla_alpha11_perp(k, n).is_zero() != (k == 1):
                bad.append(f"perp n={n} k={k}")
    for k in range(1, 9):
        derived = nabla_alpha11_literal(k)
        if not (derived == closed_nabla_literal(k) == _literal_nabla_by_hand(k)):
            bad.append(f"literal grid k={k}: {derived!r}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 1.0
    record(1, ok, f"nabla_perp = 0 iff k = 1 for n<=3, k<=8; literal grid exact; {elapsed:.3f}s" + (f"; {bad}" if bad else ""))


def test_criterion_2_alpha11():
    bad = [k for k in range(1, 9) if split_sff(k).alpha11 != closed_alpha11(k)]
    k1 = split_sff(1).alpha11 == split_sff(1).alpha == ReducedPoly(1, {(1, 1): 2, (0, 0): -2})
    record(2, not bad and k1, f"alpha11 = {{(1,1): 2k^2, (0,0): -2k}} for k<=8, k=1 coincides with alpha: {k1}")


def test_criterion_3_parity():
    bad = []
    for k in range(1, 9):
        alpha = second_fundamental(k)
        if apply_isotropy(alpha, Operator.SYMMETRY_S) != alpha:
            bad.append(f"alpha k={k}")
        d = delta_derive(split_sff(k).alpha11)
        if apply_isotropy(d, Operator.SYMMETRY_S) != -d:
            bad.append(f"delta alpha11 k={k}")
    record(3, not bad, "alpha is s-fixed, delta(alpha11) is s-negated, k<=8" + (f"; {bad}" if bad else ""))


def test_criterion_4_type_split():
    bad = []
    for k in range(1, 9):
        alpha = second_fundamental(k)
        plus, minus = project_eigen(alpha, J_PLUS), project_eigen(alpha, J_MINUS)
        balanced = {ab for ab in alpha.support() if ab[0] == ab[1]}
        unbalanced = {ab for ab in alpha.support() if abs(ab[0] - ab[1]) == 2}
        if plus + minus != alpha or plus.support() != balanced or minus.support() != unbalanced:
            bad.append(k)
    record(4, not bad, "j-projections of alpha sum to alpha; (1,1) part = balanced terms, (2,0)+(0,2) = v v / v̄ v̄ terms")


@pytest.mark.parametrize("n,k", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_criterion_5_orbit_rank(n, k):
    m2 = dim_vk(n, k)
    s = orbit_singular_values(n, k, 3 * m2, seed=2024)
    rank = int(np.sum(s > 1e-8 * s[0]))
    gap = s[m2 - 1] / max(s[m2], 1e-300)
    ok = rank == m2 and gap >= 1e6
    line = f"orbit rank n={n},k={k}: {rank} (want {m2}), gap {gap:.1e}"
    RESULTS.setdefault(5, "")
    prev = RESULTS[5].split(": ", 1)[1] + "; " if RESULTS[5] else ""
    status_ok = ok and (not RESULTS[5] or RESULTS[5].startswith("[PASS]"))
    RESULTS[5] = f"[{'PASS' if status_ok else 'FAIL'}] criterion 5: {prev}{line}"
    print(RESULTS[5])
    assert ok, line


def _third(k):
    return delta_derive(second_fundamental(k))


def test_criterion_6_oracle_agreement():
    cfg = OracleConfig()
    rng = np.random.default_rng(6)
    worst = {1: 0.0, 2: 0.0, 3: 0.0}
    worst_ratio = np.inf
    for n in (1, 2):
        frame = random_frame(n, rng)
        for k in range(1, 5):
            spec = EmbeddingSpec(n, ((k, 1),))
            for order, grid in ((1, first_fundamental), (2, second_fundamental), (3, _third)):
                exact = reference_vector(spec, grid, frame)
                h = cfg.step(order)
                e1 = relative_error(spec, fd_curve_derivative(spec, frame, order, cfg, h=h), exact)
                e2 = relative_error(spec, fd_curve_derivative(spec, frame, order, cfg, h=h / 2), exact)
                worst[order] = max(worst[order], e1)
                worst_ratio = min(worst_ratio, e1 / e2)
    ok = all(worst[o] < cfg.tol(o) for o in (1, 2, 3)) and worst_ratio >= 3
    record(6, ok, f"max rel err {worst[1]:.1e}/{worst[2]:.1e}/{worst[3]:.1e} (tol 1e-7/1e-5/1e-3), "
                  f"min halving ratio {worst_ratio:.2f}")


def test_criterion_7_equivariance():
    dev = max(check_equivariance(EmbeddingSpec(n, ((k, 1),)), 50, seed=7) for n in (1, 2) for k in (1, 2, 3))
    spread = max(orbit_norm_spread(EmbeddingSpec(n, ((k, 1),)), 50, seed=7) for n in (1, 2) for k in (1, 2, 3))
    record(7, dev < 1e-10 and spread < 1e-10, f"equivariance dev {dev:.1e}, orbit-norm spread {spread:.1e} (< 1e-10)")


def test_criterion_8_direct_sum():
    spec = EmbeddingSpec(1, ((1, 1), (2, 1)))
    frame = random_frame(1, np.random.default_rng(8))
    res = direct_sum_residuals(spec, frame)
    s1, s2 = EmbeddingSpec(1, ((1, 1),)), EmbeddingSpec(1, ((2, 1),))
    alpha_scale = norm(s1, reference_vector(s1, second_fundamental, frame))
    concat = norm(spec, res.concatenated)
    comp1 = norm(s1, res.components[0])
    rel2 = relative_error(s2, res.components[1], res.standalone[1])
    ok = concat > 1e-3 and comp1 < 1e-6 * alpha_scale and rel2 < 1e-3
    record(8, ok, f"concatenated residual {concat:.3f} (nonzero), k=1 component {comp1:.1e}, "
                  f"k=2 component vs standalone rel {rel2:.1e}")


def test_criterion_9_orthogonality():
    bad = []
    for n in (1, 2, 3):
        frame = Frame.standard(n)
        for k in range(1, 7):
            alpha = split_sff(k).alpha
            odd = project_eigen(delta_derive(split_sff(k).alpha11), S_MINUS)
            if inner_l2(embed_reduced(alpha, frame), embed_reduced(odd, frame)) != 0 or inner_reduced(alpha, odd, n) != 0:
                bad.append((n, k))
    record(9, not bad, "exact L2 pairing <alpha, odd part of delta(alpha11)> = 0 for n<=3, k<=6")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
