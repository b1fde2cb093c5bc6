"""Invariant suite behind ``ppmc selftest``.

Each check returns a :class:`CheckResult`; nothing raises on failure so the
whole suite always runs and reports every broken invariant with a witness.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable


from .bipoly import Frame, dim_vk, embed_reduced, inner_l2, orbit_rank
from .gaussian import GaussianRational
from .geometry import (
    EmbeddingSpec,
    closed_alpha,
    closed_alpha11,
    closed_nabla_literal,
    nabla_alpha11_literal,
    nabla_alpha11_perp,
    second_fundamental,
    second_fundamental_rotated,
    split_sff,
)
from .oracle import OracleConfig, oracle_checks
from .reduced import (
    J_MINUS,
    J_PLUS,
    S_MINUS,
    S_PLUS,
    EigenLabel,
    Operator,
    ReducedPoly,
    apply_isotropy,
    delta_derive,
    inner_reduced,
    project_eigen,
    project_normal_reduced,
)


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    witness: str = ""

    def to_json(self) -> dict:
        return {"module": self.module, "name": self.name, "pass": self.passed, "witness": self.witness}


def random_grid(k: int, rnd: random.Random, real: bool = False, lo: int = -3, hi: int = 3) -> ReducedPoly:
    g = {}
    for a in range(k + 1):
        for b in range(k + 1):
            g[(a, b)] = GaussianRational(Fraction(rnd.randint(lo, hi), rnd.randint(1, 3)),
                                         Fraction(rnd.randint(lo, hi), rnd.randint(1, 3)))
    p = ReducedPoly(k, g)
    if real:
        p = (p + p.conjugate()).scale(Fraction(1, 2))
    return p


def _first_mismatch(pairs: Iterable[tuple[object, object, object]]) -> str:
    for label, got, want in pairs:
        if got != want:
            return f"{label}: got {got!r}, want {want!r}"
    return ""


def _check(module: str, name: str, fn: Callable[[], str]) -> CheckResult:
    try:
        witness = fn()
    except Exception as exc:  # a crashing invariant is a failed invariant
        return CheckResult(module, name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(module, name, not witness, witness)


def reduced_checks(ks: list[int], seed: int) -> list[CheckResult]:
    rnd = random.Random(seed)
    grids = [random_grid(k, rnd) for k in ks for _ in range(3)]
    reals = [random_grid(k, rnd, real=True) for k in ks for _ in range(2)]

    def leibniz():
        for p in grids[:6]:
            q = random_grid(1, rnd)
            lhs = delta_derive(p * q)
            rhs = delta_derive(p) * q + p * delta_derive(q)
            if lhs != rhs:
                return f"k={p.k}"
        return ""

    def involutions():
        for p in grids:
            s = Operator.SYMMETRY_S
            if apply_isotropy(apply_isotropy(p, s), s) != p:
                return f"s not an involution at k={p.k}"
            jj = apply_isotropy(apply_isotropy(p, Operator.ROOT_J), Operator.ROOT_J)
            if jj != apply_isotropy(p, s):
                return f"j^2 != s at k={p.k}"
        return ""

    def resolution():
        j_labels = [EigenLabel(Operator.ROOT_J, GaussianRational(*ev)) for ev in ((1, 0), (0, 1), (-1, 0), (0, -1))]
        for p in grids:
            if project_eigen(p, S_PLUS) + project_eigen(p, S_MINUS) != p:
                return f"s-projections do not sum to p, k={p.k}"
            total = ReducedPoly.zero(p.k)
            for lab in j_labels:
                total = total + project_eigen(p, lab)
                if project_eigen(project_eigen(p, lab), lab) != project_eigen(p, lab):
                    return f"projection {lab} not idempotent"
            if total != p:
                return f"j-projections do not sum to p, k={p.k}"
        return ""

    def parity():
        for p in grids:
            even, odd = project_eigen(p, S_PLUS), project_eigen(p, S_MINUS)
            if not project_eigen(delta_derive(even), S_PLUS).is_zero():
                return f"delta(s-even) has an even part, k={p.k}"
            if not project_eigen(delta_derive(odd), S_MINUS).is_zero():
                return f"delta(s-odd) has an odd part, k={p.k}"
        return ""

    def reality():
        for p in reals:
            for q in (delta_derive(p), apply_isotropy(p, Operator.SYMMETRY_S), project_eigen(p, S_MINUS),
                      project_eigen(p, J_PLUS), project_eigen(p, J_MINUS)):
                if not q.is_real():
                    return f"reality lost at k={p.k}"
        return ""

    def normal_projection():
        for p in grids:
            if p.k == 0:
                continue
            for n in (1, 2):
                q = project_normal_reduced(p, n)
                if project_normal_reduced(q, n) != q:
                    return f"not idempotent, k={p.k}, n={n}"
                for ab in ((1, 0), (0, 1)):
                    if inner_reduced(ReducedPoly.monomial(p.k, *ab), q, n) != 0:
                        return f"output not orthogonal to tangent monomial {ab}"
        return ""

    return [
        _check("reduced-symbolic", "derivation_leibniz", leibniz),
        _check("reduced-symbolic", "involution_laws", involutions),
        _check("reduced-symbolic", "resolution_of_identity", resolution),
        _check("reduced-symbolic", "parity_alternation", parity),
        _check("reduced-symbolic", "conjugation_symmetry", reality),
        _check("reduced-symbolic", "normal_projection_idempotent_orthogonal", normal_projection),
    ]


def geometry_checks(ns: list[int], ks: list[int]) -> list[CheckResult]:
    def closed_forms():
        rows = []
        for k in ks:
            split = split_sff(k)
            rows += [
                (f"alpha k={k}", split.alpha, closed_alpha(k)),
                (f"alpha11 k={k}", split.alpha11, closed_alpha11(k)),
                (f"nabla_literal k={k}", nabla_alpha11_literal(k), closed_nabla_literal(k)),
            ]
        return _first_mismatch(rows)

    def alpha_parity():
        for k in ks:
            alpha = second_fundamental(k)
            if apply_isotropy(alpha, Operator.SYMMETRY_S) != alpha:
                return f"alpha not s-even at k={k}"
            d = delta_derive(split_sff(k).alpha11)
            if apply_isotropy(d, Operator.SYMMETRY_S) != -d:
                return f"delta(alpha11) not s-odd at k={k}"
        return ""

    def mean_curvature():
        for k in ks:
            half = (second_fundamental(k) + second_fundamental_rotated(k)).scale(Fraction(1, 2))
            if half != split_sff(k).alpha11:
                return f"k={k}: {half!r} != {split_sff(k).alpha11!r}"
        return ""

    def theorem():
        for n in ns:
            for k in ks:
                zero = nabla_alpha11_perp(k, n).is_zero()
                if zero != (k == 1):
                    return f"n={n}, k={k}: residual_zero={zero}"
                if nabla_alpha11_literal(k).is_zero() != (k == 1):
                    return f"n={n}, k={k}: literal residual disagrees"
        return ""

    def tangential_difference():
        for n in ns:
            for k in ks:
                diff = nabla_alpha11_perp(k, n) - nabla_alpha11_literal(k)
                if not diff.support() <= {(1, 0), (0, 1)}:
                    return f"n={n}, k={k}: difference has support {sorted(diff.support())}"
        return ""

    def orthogonality():
        for n in ns:
            frame = Frame.standard(n)
            for k in ks:
                alpha = split_sff(k).alpha
                odd = project_eigen(delta_derive(split_sff(k).alpha11), S_MINUS)
                if inner_reduced(alpha, odd, n) != 0:
                    return f"reduced pairing nonzero at n={n}, k={k}"
                if inner_l2(embed_reduced(alpha, frame), embed_reduced(odd, frame)) != 0:
                    return f"embedded pairing nonzero at n={n}, k={k}"
        return ""

    return [
        _check("geometry-engine", "closed_form_grids", closed_forms),
        _check("geometry-engine", "alpha_parity", alpha_parity),
        _check("geometry-engine", "mean_curvature_identity", mean_curvature),
        _check("geometry-engine", "theorem_residual_zero_iff_k1", theorem),
        _check("geometry-engine", "literal_vs_perp_tangential", tangential_difference),
        _check("geometry-engine", "alpha_perp_to_nabla", orthogonality),
    ]


def bipoly_checks(seed: int) -> list[CheckResult]:
    out = []
    for n, k in ((1, 1), (1, 2), (2, 1), (2, 2)):
        want = dim_vk(n, k)

        def rank(n=n, k=k, want=want):
            got = orbit_rank(n, k, 3 * want, seed)
            return "" if got == want else f"rank {got}, want {want}"

        out.append(_check("bipoly-full", f"orbit_rank_n{n}_k{k}", rank))
    return out


def oracle_suite(ns: list[int], ks: list[int], config: OracleConfig) -> list[CheckResult]:
    out = []
    for n in ns:
        for k in ks:
            if k > 6 or n > 3:
                continue
            spec = EmbeddingSpec(n, ((k, 1),))
            for c in oracle_checks(spec, config):
                out.append(CheckResult("numeric-oracle", f"{c.name}_n{n}_k{k}", c.passed,
                                       "" if c.passed else f"value {c.value:.3e} >= tol {c.tolerance:.0e}"))
    return out


def run_selftest(ns: list[int], ks: list[int], seed: int = 0, oracle: bool = True) -> list[CheckResult]:
    results = reduced_checks(ks, seed) + geometry_checks(ns, ks) + bipoly_checks(seed)
    if oracle:
        results += oracle_suite(ns, ks, OracleConfig(seed=seed, sample_count=10))
    return results
