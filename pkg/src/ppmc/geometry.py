"""Second fundamental form and pluri-mean curvature of the embeddings Phi_k.

Everything here is exact. The orbit map of f_k sends the point [x] to
``(x x̄)^k``; differentiating along great circles with :func:`delta_derive`
yields the tangent vector, the second fundamental form and the derivative of
its (1,1)-part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .gaussian import I
from .reduced import (
    J_MINUS,
    J_PLUS,
    S_MINUS,
    VVBAR,
    XXBAR,
    ReducedPoly,
    delta_derive,
    norm_sq_reduced,
    project_eigen,
    project_normal_reduced,
)

INNER_PRODUCT_LABEL = "L2-sphere-normalized"


def _require_k(k: int):
    if k < 1:
        raise ValueError("k must be at least 1; Phi_0 is constant and not an embedding")


def phi_reduced(k: int) -> ReducedPoly:
    _require_k(k)
    return ReducedPoly.monomial(k, 0, 0)


def first_fundamental(k: int) -> ReducedPoly:
    """dPhi(v) = delta (x x̄)^k."""
    return delta_derive(phi_reduced(k))


def second_fundamental(k: int) -> ReducedPoly:
    """alpha(v, v) = delta^2 (x x̄)^k.

    The result is s-even, hence already normal: no tangential part to remove.
    """
    return delta_derive(first_fundamental(k))


def second_fundamental_rotated(k: int) -> ReducedPoly:
    """alpha(Jv, Jv), rederived with the great circle through the direction iv."""
    return delta_derive(delta_derive(phi_reduced(k), phase=I), phase=I)


@dataclass(frozen=True)
class SffSplit:
    alpha: ReducedPoly
    alpha11: ReducedPoly
    alpha20plus02: ReducedPoly


def split_sff(k: int) -> SffSplit:
    alpha = second_fundamental(k)
    return SffSplit(alpha, project_eigen(alpha, J_PLUS), project_eigen(alpha, J_MINUS))


def xi_leibniz_terms(k: int) -> list[ReducedPoly]:
    """delta(xi) for xi = alpha11(v, v), split into its four Leibniz summands.

    xi is written as 2k(k-1)(x x̄)^(k-2) * (x x̄ v v̄) + 2k (x x̄)^(k-1) * (-x x̄ + v v̄)
    and delta is applied to one factor at a time. Summands that vanish for k = 1
    (negative powers of x x̄) are returned as zero grids.
    """
    _require_k(k)
    c1 = 2 * k * (k - 1)
    c2 = 2 * k
    mixed = XXBAR * VVBAR
    tail = VVBAR - XXBAR
    zero = ReducedPoly.zero(k)
    terms = []
    if k >= 2:
        terms.append(delta_derive(XXBAR ** (k - 2)) * mixed * c1)
        terms.append(XXBAR ** (k - 2) * delta_derive(mixed) * c1)
    else:
        terms += [zero, zero]
    terms.append(delta_derive(XXBAR ** (k - 1)) * tail * c2)
    terms.append(XXBAR ** (k - 1) * delta_derive(tail) * c2)
    return terms


def _is_multiple_of(p: ReducedPoly, q: ReducedPoly) -> bool:
    pivot = next(iter(q.items()), None)
    if pivot is None:
        return p.is_zero()
    ab, c = pivot
    return p == q.scale(p[ab] / c)


def nabla_alpha11_literal(k: int) -> ReducedPoly:
    """The s-odd part of delta(xi) with the Leibniz summands proportional to dPhi(v) dropped.

    This is the literal closed form 2k²(k-1) on (2,1), (1,2) and -4k(k-1) on
    (1,0), (0,1): the summand -4 dPhi(v), produced by differentiating the last
    factor, is discarded as tangential while the other tangential-direction
    monomials are kept.
    """
    v_hat = first_fundamental(k)
    kept = [t for t in xi_leibniz_terms(k) if t.is_zero() or not _is_multiple_of(t, v_hat)]
    total = ReducedPoly.zero(k)
    for t in kept:
        total = total + t
    return project_eigen(total, S_MINUS)


def delta_xi_odd(k: int) -> ReducedPoly:
    """Full E_-(s) component of delta(alpha11(v, v)), no tangential subtraction."""
    return project_eigen(delta_derive(split_sff(k).alpha11), S_MINUS)


def nabla_alpha11_perp(k: int, n: int) -> ReducedPoly:
    """Normal projection of delta(alpha11(v, v)): the covariant derivative
    (nabla_v alpha11)(v, v) along the geodesic with parallel velocity v."""
    _require_k(k)
    return project_normal_reduced(delta_xi_odd(k), n)


# closed forms, used as a second route in tests and in the table command
def closed_alpha(k: int) -> ReducedPoly:
    grid = {(1, 1): 2 * k * k, (0, 0): -2 * k}
    if k >= 2:
        grid[(2, 0)] = grid[(0, 2)] = k * (k - 1)
    return ReducedPoly(k, grid)


def closed_alpha11(k: int) -> ReducedPoly:
    return ReducedPoly(k, {(1, 1): 2 * k * k, (0, 0): -2 * k})


def closed_nabla_literal(k: int) -> ReducedPoly:
    if k < 2:
        return ReducedPoly.zero(k)
    c21 = 2 * k * k * (k - 1)
    c10 = -4 * k * (k - 1)
    return ReducedPoly(k, {(2, 1): c21, (1, 2): c21, (1, 0): c10, (0, 1): c10})


@dataclass(frozen=True)
class EmbeddingSpec:
    """The direct sum of a_k Phi_k over the listed terms."""

    n: int
    terms: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        terms = tuple((int(k), Fraction(a)) for k, a in self.terms)
        if not terms:
            raise ValueError("an embedding needs at least one term")
        ks = [k for k, _ in terms]
        if len(set(ks)) != len(ks):
            raise ValueError("k values must be distinct")
        for k, a in terms:
            _require_k(k)
            if a == 0:
                raise ValueError("coefficients a_k must be nonzero")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def parse_terms(cls, n: int, text: str) -> "EmbeddingSpec":
        """Parse ``"k:a_k,k:a_k"``, e.g. ``"1:3/2,2:-1"``."""
        terms = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            k, _, a = chunk.partition(":")
            terms.append((int(k), Fraction(a) if a else Fraction(1)))
        return cls(n, tuple(terms))

    def to_json(self) -> dict:
        return {"n": self.n, "terms": [{"k": k, "a_k": _frac_str(a)} for k, a in self.terms]}


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class TermRecord:
    k: int
    a_k: Fraction
    alpha: ReducedPoly
    alpha11: ReducedPoly
    nabla_literal: ReducedPoly
    nabla_perp: ReducedPoly
    residual_zero: bool
    residual_norm_sq: Fraction

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "a_k": _frac_str(self.a_k),
            "alpha": self.alpha.serialize(),
            "alpha11": self.alpha11.serialize(),
            "nabla_paper": self.nabla_literal.serialize(),
            "nabla_perp": self.nabla_perp.serialize(),
            "residual_zero": self.residual_zero,
            "residual_norm": float(self.residual_norm_sq) ** 0.5,
            "residual_norm_sq": _frac_str(self.residual_norm_sq),
        }


@dataclass(frozen=True)
class PpmcReport:
    spec: EmbeddingSpec
    terms: tuple[TermRecord, ...]
    verdict: str
    inner_product: str = INNER_PRODUCT_LABEL
    version: str = __version__
    oracle: list = field(default_factory=list, compare=False)

    def to_json(self) -> dict:
        out = {
            "spec": self.spec.to_json(),
            "innerProduct": self.inner_product,
            "terms": [t.to_json() for t in self.terms],
            "verdict": self.verdict,
            "version": self.version,
        }
        if self.oracle:
            out["oracle"] = list(self.oracle)
        return out


def term_record(n: int, k: int, a_k) -> TermRecord:
    a = Fraction(a_k)
    split = split_sff(k)
    perp = nabla_alpha11_perp(k, n).scale(a)
    return TermRecord(
        k=k,
        a_k=a,
        alpha=split.alpha.scale(a),
        alpha11=split.alpha11.scale(a),
        nabla_literal=nabla_alpha11_literal(k).scale(a),
        nabla_perp=perp,
        residual_zero=perp.is_zero(),
        residual_norm_sq=norm_sq_reduced(perp, n),
    )


def ppmc_verdict(spec: EmbeddingSpec, map_fn=map) -> PpmcReport:
    """ppmc iff every summand a_k Phi_k has vanishing normal residual.

    A direct sum is ppmc only if each summand is, so the summands are checked
    separately. ``map_fn`` lets the caller evaluate the terms concurrently; the
    output order always follows ``spec.terms``.
    """
    records = tuple(map_fn(lambda t: term_record(spec.n, t[0], t[1]), spec.terms))
    verdict = "ppmc" if all(r.residual_zero for r in records) else "not_ppmc"
    return PpmcReport(spec=spec, terms=records, verdict=verdict)


def expected_verdict(spec: EmbeddingSpec) -> str:
    return "ppmc" if all(k == 1 for k, _ in spec.terms) else "not_ppmc"
