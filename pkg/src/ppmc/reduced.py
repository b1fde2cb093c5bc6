"""Exact algebra in the four commuting symbols x, v, x̄, v̄.

A :class:`ReducedPoly` of bidegree ``k`` is a (k+1)x(k+1) grid; entry ``(a, b)``
multiplies the monomial ``x^(k-a) v^a x̄^(k-b) v̄^b``. Here ``x`` is the linear
functional of a base point and ``v`` that of a unit tangent direction, and
``delta`` is the derivative along the great circle ``cos t x + sin t v``.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .gaussian import ONE, ZERO, GaussianRational, I

# Sign of the rule delta(v) = sign * x. Flipping it is the selftest's injected fault.
_DELTA_V_SIGN: contextvars.ContextVar[int] = contextvars.ContextVar("delta_v_sign", default=-1)


@contextlib.contextmanager
def injected_fault():
    """Within this block the derivation uses the wrong rule delta(v) = +x."""
    token = _DELTA_V_SIGN.set(1)
    try:
        yield
    finally:
        _DELTA_V_SIGN.reset(token)


class Operator(enum.Enum):
    SYMMETRY_S = "symmetry_s"
    ROOT_J = "root_j"


_EIGENVALUES = {
    GaussianRational(1): 0,
    GaussianRational(0, 1): 1,
    GaussianRational(-1): 2,
    GaussianRational(0, -1): 3,
}


@dataclass(frozen=True)
class EigenLabel:
    operator: Operator
    eigenvalue: GaussianRational

    def __post_init__(self):
        ev = GaussianRational.coerce(self.eigenvalue)
        object.__setattr__(self, "eigenvalue", ev)
        object.__setattr__(self, "operator", Operator(self.operator))
        if ev not in _EIGENVALUES:
            raise ValueError(f"eigenvalue must be one of ±1, ±i, got {ev!r}")
        if self.operator is Operator.SYMMETRY_S and ev.im != 0:
            raise ValueError("the symmetry s only has eigenvalues ±1")

    @property
    def power_of_i(self) -> int:
        return _EIGENVALUES[self.eigenvalue]


S_PLUS = EigenLabel(Operator.SYMMETRY_S, GaussianRational(1))
S_MINUS = EigenLabel(Operator.SYMMETRY_S, GaussianRational(-1))
J_PLUS = EigenLabel(Operator.ROOT_J, GaussianRational(1))
J_MINUS = EigenLabel(Operator.ROOT_J, GaussianRational(-1))


class ReducedPoly:
    """Immutable bidegree-(k, k) polynomial in x, v, x̄, v̄ with exact coefficients."""

    __slots__ = ("k", "coeffs")

    def __init__(self, k: int, coeffs=None):
        if k < 0:
            raise ValueError("bidegree must be non-negative")
        grid = [[ZERO] * (k + 1) for _ in range(k + 1)]
        if coeffs is None:
            pass
        elif isinstance(coeffs, dict):
            for (a, b), c in coeffs.items():
                if not (0 <= a <= k and 0 <= b <= k):
                    raise ValueError(f"index {(a, b)} outside 0..{k}")
                grid[a][b] = grid[a][b] + GaussianRational.coerce(c)
        else:
            rows = list(coeffs)
            if len(rows) != k + 1 or any(len(r) != k + 1 for r in rows):
                raise ValueError(f"grid must be {k + 1}x{k + 1}")
            grid = [[GaussianRational.coerce(c) for c in r] for r in rows]
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "coeffs", tuple(tuple(r) for r in grid))

    def __setattr__(self, name, value):
        raise AttributeError("ReducedPoly is immutable")

    @classmethod
    def zero(cls, k: int) -> "ReducedPoly":
        return cls(k)

    @classmethod
    def monomial(cls, k: int, a: int, b: int, coeff=1) -> "ReducedPoly":
        return cls(k, {(a, b): coeff})

    def __getitem__(self, ab):
        a, b = ab
        return self.coeffs[a][b]

    def items(self):
        """Nonzero entries as ``((a, b), coeff)`` in row-major order."""
        for a, row in enumerate(self.coeffs):
            for b, c in enumerate(row):
                if c:
                    yield (a, b), c

    def support(self) -> set[tuple[int, int]]:
        return {ab for ab, _ in self.items()}

    def as_dict(self) -> dict[tuple[int, int], GaussianRational]:
        return dict(self.items())

    def is_zero(self) -> bool:
        return not any(True for _ in self.items())

    def is_real(self) -> bool:
        """True iff the function is real valued: coeffs[b][a] == conj(coeffs[a][b])."""
        k = self.k
        return all(
            self.coeffs[b][a] == self.coeffs[a][b].conjugate()
            for a in range(k + 1)
            for b in range(k + 1)
        )

    def conjugate(self) -> "ReducedPoly":
        k = self.k
        return ReducedPoly(k, [[self.coeffs[b][a].conjugate() for b in range(k + 1)] for a in range(k + 1)])

    # ring operations
    def __add__(self, other):
        if not isinstance(other, ReducedPoly):
            return NotImplemented
        if other.k != self.k:
            raise ValueError(f"cannot add bidegree {self.k} and {other.k}")
        return ReducedPoly(
            self.k, [[p + q for p, q in zip(r1, r2)] for r1, r2 in zip(self.coeffs, other.coeffs)]
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, ReducedPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "ReducedPoly":
        c = GaussianRational.coerce(c)
        return ReducedPoly(self.k, [[c * e for e in r] for r in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, ReducedPoly):
            return multiply(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not polynomials")
        result = ReducedPoly(0, {(0, 0): 1})
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, ReducedPoly):
            return NotImplemented
        return self.k == other.k and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.k, self.coeffs))

    def __repr__(self):
        terms = ", ".join(f"{ab}: {_short(c)}" for ab, c in self.items())
        return f"ReducedPoly(k={self.k}, {{{terms}}})"

    def serialize(self) -> list[list[str]]:
        """Nested lists of ``"num/den+num/den i"`` strings, rows indexed by a."""
        return [[c.serialize() for c in row] for row in self.coeffs]

    @classmethod
    def deserialize(cls, rows: list[list[str]]) -> "ReducedPoly":
        return cls(len(rows) - 1, [[GaussianRational.parse(s) for s in r] for r in rows])


def _short(c: GaussianRational) -> str:
    if c.im == 0:
        return str(c.re)
    return f"{c.re}{'+' if c.im >= 0 else '-'}{abs(c.im)}i"


def multiply(p: ReducedPoly, q: ReducedPoly) -> ReducedPoly:
    k = p.k + q.k
    out = [[ZERO] * (k + 1) for _ in range(k + 1)]
    for (a1, b1), c1 in p.items():
        for (a2, b2), c2 in q.items():
            out[a1 + a2][b1 + b2] = out[a1 + a2][b1 + b2] + c1 * c2
    return ReducedPoly(k, out)


# The basic symbols as bidegree-1 grids (or their products).
XXBAR = ReducedPoly(1, {(0, 0): 1})
VXBAR = ReducedPoly(1, {(1, 0): 1})
XVBAR = ReducedPoly(1, {(0, 1): 1})
VVBAR = ReducedPoly(1, {(1, 1): 1})


def delta_derive(p: ReducedPoly, phase=ONE) -> ReducedPoly:
    """Great-circle derivation along ``cos t x + sin t (phase v)`` for unit ``phase``.

    With ``phase = 1`` this is delta x = v, delta v = -x and the conjugate rules.
    A general unit phase ``λ`` gives delta x = λv, delta v = -λ̄x, so ``phase = i``
    differentiates along the J-rotated direction.
    """
    lam = GaussianRational.coerce(phase)
    if lam.abs2() != 1:
        raise ValueError("phase must have modulus one")
    lam_bar = lam.conjugate()
    sign = _DELTA_V_SIGN.get()
    k = p.k
    out = [[ZERO] * (k + 1) for _ in range(k + 1)]
    for (a, b), c in p.items():
        if a < k:
            out[a + 1][b] += c * (k - a) * lam
        if a > 0:
            out[a - 1][b] += c * a * sign * lam_bar
        if b < k:
            out[a][b + 1] += c * (k - b) * lam_bar
        if b > 0:
            out[a][b - 1] += c * b * sign * lam
    return ReducedPoly(k, out)


def _isotropy_factor(operator: Operator, a: int, b: int) -> GaussianRational:
    if operator is Operator.SYMMETRY_S:
        return GaussianRational(-1 if (a + b) % 2 else 1)
    return I ** ((a - b) % 4)


def apply_isotropy(p: ReducedPoly, operator) -> ReducedPoly:
    """Substitute v -> -v (``symmetry_s``) or v -> iv, v̄ -> -iv̄ (``root_j``)."""
    operator = Operator(operator)
    return ReducedPoly(p.k, {ab: c * _isotropy_factor(operator, *ab) for ab, c in p.items()})


def project_eigen(p: ReducedPoly, label: EigenLabel) -> ReducedPoly:
    if label.operator is Operator.SYMMETRY_S:
        parity = 0 if label.eigenvalue == 1 else 1
        return ReducedPoly(p.k, {(a, b): c for (a, b), c in p.items() if (a + b) % 2 == parity})
    target = label.power_of_i
    return ReducedPoly(p.k, {(a, b): c for (a, b), c in p.items() if (a - b) % 4 == target})


def grid_indices(k: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(k + 1) for b in range(k + 1)]


@lru_cache(maxsize=None)
def _gram_cached(n: int, k: int) -> tuple[tuple[Fraction, ...], ...]:
    idx = grid_indices(k)
    denom = factorial(n + 2 * k)
    nf = factorial(n)
    rows = []
    for a, b in idx:
        row = []
        for a2, b2 in idx:
            if a - b != a2 - b2:
                row.append(Fraction(0))
            else:
                m = b + a2
                row.append(Fraction(nf * factorial(m) * factorial(2 * k - m), denom))
        rows.append(tuple(row))
    return tuple(rows)


def reduced_gram(n: int, k: int) -> tuple[tuple[Fraction, ...], ...]:
    """L² Gram matrix of the grid monomials on the unit sphere of C^(n+1).

    Rows and columns follow :func:`grid_indices`. The monomials are realised with
    x = z_(n+1) and v = z_1, and the measure is normalised to total mass one.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if k < 0:
        raise ValueError("k must be non-negative")
    return _gram_cached(n, k)


def gram_entry(n: int, k: int, ab: tuple[int, int], ab2: tuple[int, int]) -> Fraction:
    (a, b), (a2, b2) = ab, ab2
    if a - b != a2 - b2:
        return Fraction(0)
    m = b + a2
    return Fraction(factorial(n) * factorial(m) * factorial(2 * k - m), factorial(n + 2 * k))


def inner_reduced(p: ReducedPoly, q: ReducedPoly, n: int) -> GaussianRational:
    """Hermitian L² product <p, q>, conjugate-linear in ``p``."""
    if p.k != q.k:
        raise ValueError("bidegree mismatch")
    if n < 1:
        raise ValueError("n must be at least 1")
    total = ZERO
    for ab, c1 in p.items():
        for ab2, c2 in q.items():
            g = gram_entry(n, p.k, ab, ab2)
            if g:
                total += c1.conjugate() * c2 * g
    return total


def norm_sq_reduced(p: ReducedPoly, n: int) -> Fraction:
    val = inner_reduced(p, p, n)
    assert val.im == 0
    return val.re


TANGENT_MONOMIALS = ((1, 0), (0, 1))


def project_normal_reduced(p: ReducedPoly, n: int) -> ReducedPoly:
    """Remove the L²-orthogonal projection onto the complex span of the tangent
    monomials (1, 0) and (0, 1), i.e. onto span{dΦ(v), dΦ(iv)}.

    Tangent directions outside span{v, iv} carry a different torus weight from every
    grid monomial, so they are orthogonal already.
    """
    k = p.k
    if k == 0:
        raise ValueError("k = 0 has no tangent space (the map is constant)")
    basis = [ReducedPoly.monomial(k, *ab) for ab in TANGENT_MONOMIALS]
    g = [[inner_reduced(s, t, n) for t in basis] for s in basis]
    rhs = [inner_reduced(s, p, n) for s in basis]
    det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
    c0 = (rhs[0] * g[1][1] - g[0][1] * rhs[1]) / det
    c1 = (g[0][0] * rhs[1] - g[1][0] * rhs[0]) / det
    return p - basis[0].scale(c0) - basis[1].scale(c1)
