"""Bihomogeneous polynomials of bidegree (k, k) on C^(n+1).

This is the full coordinate model of the representation space V_k: a sparse map
``(mu, nu) -> coefficient`` for the monomial ``z^mu conj(z)^nu``. Coefficients are
either exact :class:`GaussianRational` values (``mode="exact"``) or Python
complex numbers (``mode="numeric"``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial, prod
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse
from scipy.stats import unitary_group

from .gaussian import ONE, ZERO, GaussianRational, is_exact
from .reduced import ReducedPoly

MultiIndex = tuple[int, ...]

UNITARY_TOL = 1e-12


@lru_cache(maxsize=None)
def multi_indices(n: int, k: int) -> tuple[MultiIndex, ...]:
    """All exponent vectors of length n+1 and total degree k, in a fixed order."""
    out = []
    for combo in combinations_with_replacement(range(n + 1), k):
        e = [0] * (n + 1)
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return tuple(sorted(out, reverse=True))


def dim_vk(n: int, k: int) -> int:
    """Real dimension of V_k, i.e. binomial(n+k, n) squared."""
    return comb(n + k, n) ** 2


def multinomial(mu: MultiIndex) -> int:
    return factorial(sum(mu)) // prod(factorial(m) for m in mu)


def mi_factorial(mu: MultiIndex) -> int:
    return prod(factorial(m) for m in mu)


def _conj(c):
    return c.conjugate()


def _zero_like(mode: str):
    return ZERO if mode == "exact" else 0j


def _mode_of(values) -> str:
    return "exact" if all(is_exact(v) for v in values) else "numeric"


def _to_mode(c, mode: str):
    if mode == "exact":
        return GaussianRational.coerce(c)
    return complex(c)


@dataclass(frozen=True)
class BiPoly:
    n: int
    k: int
    coeffs: Mapping[tuple[MultiIndex, MultiIndex], object]
    mode: str = "numeric"

    def __post_init__(self):
        if self.mode not in ("exact", "numeric"):
            raise ValueError(f"unknown mode {self.mode!r}")
        clean = {}
        for (mu, nu), c in self.coeffs.items():
            mu, nu = tuple(mu), tuple(nu)
            if len(mu) != self.n + 1 or len(nu) != self.n + 1:
                raise ValueError("multi-index length must be n+1")
            if sum(mu) != self.k or sum(nu) != self.k:
                raise ValueError(f"monomial {(mu, nu)} is not of bidegree ({self.k}, {self.k})")
            c = _to_mode(c, self.mode)
            if c != 0:
                clean[(mu, nu)] = c
        object.__setattr__(self, "coeffs", clean)

    def __getitem__(self, key):
        return self.coeffs.get(key, _zero_like(self.mode))

    def _check_compatible(self, other: "BiPoly"):
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError(f"(n, k) mismatch: {(self.n, self.k)} vs {(other.n, other.k)}")

    def _join_mode(self, other: "BiPoly") -> str:
        return "exact" if self.mode == other.mode == "exact" else "numeric"

    def __add__(self, other: "BiPoly") -> "BiPoly":
        self._check_compatible(other)
        mode = self._join_mode(other)
        out = {key: _to_mode(c, mode) for key, c in self.coeffs.items()}
        for key, c in other.coeffs.items():
            out[key] = out.get(key, _zero_like(mode)) + _to_mode(c, mode)
        return BiPoly(self.n, self.k, out, mode)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "BiPoly":
        mode = self.mode if is_exact(s) else "numeric"
        if mode == "numeric":
            return BiPoly(self.n, self.k, {k_: complex(c) * complex(s) for k_, c in self.coeffs.items()}, mode)
        s = GaussianRational.coerce(s)
        return BiPoly(self.n, self.k, {k_: c * s for k_, c in self.coeffs.items()}, mode)

    def __mul__(self, other):
        if not isinstance(other, BiPoly):
            return self.scale(other)
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        mode = self._join_mode(other)
        out = {}
        for (m1, n1), c1 in self.coeffs.items():
            for (m2, n2), c2 in other.coeffs.items():
                key = (_add_mi(m1, m2), _add_mi(n1, n2))
                term = c1 * c2 if mode == "exact" else complex(c1) * complex(c2)
                out[key] = out.get(key, _zero_like(mode)) + term
        return BiPoly(self.n, self.k + other.k, out, mode)

    __rmul__ = scale

    def conjugate(self) -> "BiPoly":
        """The complex-conjugate function: swaps mu and nu and conjugates coefficients."""
        return BiPoly(self.n, self.k, {(nu, mu): _conj(c) for (mu, nu), c in self.coeffs.items()}, self.mode)

    def is_real(self, tol: float = 0.0) -> bool:
        keys = set(self.coeffs) | {(nu, mu) for mu, nu in self.coeffs}
        for mu, nu in keys:
            d = self[(nu, mu)] - _conj(self[(mu, nu)])
            if self.mode == "exact":
                if d != 0:
                    return False
            elif abs(complex(d)) > tol:
                return False
        return True

    def evaluate(self, z) -> complex:
        z = np.asarray(z, dtype=complex)
        zb = z.conj()
        return complex(
            sum(complex(c) * np.prod(z**np.array(mu)) * np.prod(zb**np.array(nu)) for (mu, nu), c in self.coeffs.items())
        )

    def to_numeric(self) -> "BiPoly":
        return BiPoly(self.n, self.k, {key: complex(c) for key, c in self.coeffs.items()}, "numeric")

    def to_vector(self) -> np.ndarray:
        """Dense complex coefficient vector in :func:`basis_pairs` order."""
        index = _pair_index(self.n, self.k)
        vec = np.zeros(len(index), dtype=complex)
        for key, c in self.coeffs.items():
            vec[index[key]] = complex(c)
        return vec

    @classmethod
    def from_vector(cls, n: int, k: int, vec) -> "BiPoly":
        pairs = basis_pairs(n, k)
        return cls(n, k, {pairs[i]: complex(c) for i, c in enumerate(vec) if c != 0}, "numeric")

    def to_json(self) -> dict:
        terms = []
        for (mu, nu), c in sorted(self.coeffs.items()):
            if self.mode == "exact":
                re, im = f"{c.re.numerator}/{c.re.denominator}", f"{c.im.numerator}/{c.im.denominator}"
            else:
                re, im = complex(c).real, complex(c).imag
            terms.append({"mu": list(mu), "nu": list(nu), "re": re, "im": im})
        return {"n": self.n, "k": self.k, "mode": self.mode, "terms": terms}

    @classmethod
    def from_json(cls, data) -> "BiPoly":
        if isinstance(data, str):
            data = json.loads(data)
        coeffs = {}
        for t in data["terms"]:
            key = (tuple(t["mu"]), tuple(t["nu"]))
            if data["mode"] == "exact":
                coeffs[key] = GaussianRational(Fraction(t["re"]), Fraction(t["im"]))
            else:
                coeffs[key] = complex(t["re"], t["im"])
        return cls(data["n"], data["k"], coeffs, data["mode"])


def _add_mi(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def basis_pairs(n: int, k: int) -> tuple[tuple[MultiIndex, MultiIndex], ...]:
    mis = multi_indices(n, k)
    return tuple((mu, nu) for mu in mis for nu in mis)


@lru_cache(maxsize=None)
def _pair_index(n: int, k: int) -> dict:
    return {pair: i for i, pair in enumerate(basis_pairs(n, k))}


# --- holomorphic expansions -------------------------------------------------

def _holo_power_product(forms: Sequence[Sequence], exps: Sequence[int], n: int, mode: str) -> dict:
    """Coefficients of prod_i (forms[i] . z)^exps[i] as a map multi-index -> coefficient."""
    one = ONE if mode == "exact" else 1 + 0j
    poly = {(0,) * (n + 1): one}
    for form, e in zip(forms, exps):
        for _ in range(e):
            nxt = {}
            for mi, c in poly.items():
                for j, a in enumerate(form):
                    if a == 0:
                        continue
                    new = mi[:j] + (mi[j] + 1,) + mi[j + 1 :]
                    nxt[new] = nxt.get(new, _zero_like(mode)) + c * a
            poly = nxt
    return poly


def _vector_mode(*vectors) -> str:
    return _mode_of([c for v in vectors for c in v])


def _as_scalars(vec, mode: str) -> list:
    if mode == "exact":
        return [GaussianRational.coerce(c) for c in vec]
    return [complex(c) for c in np.asarray(vec, dtype=complex)]


def _norm2(vec, mode: str):
    if mode == "exact":
        return sum((c.abs2() for c in vec), Fraction(0))
    return float(sum(abs(c) ** 2 for c in vec))


def expand_phi(v, k: int) -> BiPoly:
    """Multinomial expansion of the height function z -> |v* z|^(2k)."""
    if k < 1:
        raise ValueError("k must be at least 1 (k = 0 is constant)")
    mode = _vector_mode(v)
    vs = _as_scalars(v, mode)
    n = len(vs) - 1
    nrm = _norm2(vs, mode)
    if (mode == "exact" and nrm != 1) or (mode == "numeric" and abs(nrm - 1) > UNITARY_TOL * 10):
        raise ValueError("v must be a unit vector")
    # (v* z)^k = sum_mu k!/mu! conj(v)^mu z^mu
    holo = {}
    for mu in multi_indices(n, k):
        c = ONE if mode == "exact" else 1 + 0j
        for vi, m in zip(vs, mu):
            c = c * _conj(vi) ** m
        holo[mu] = c * multinomial(mu)
    coeffs = {(mu, nu): holo[mu] * _conj(holo[nu]) for mu in holo for nu in holo}
    return BiPoly(n, k, coeffs, mode)


def phi_vector(v: np.ndarray, k: int) -> np.ndarray:
    """Fast numeric coefficient vector of :func:`expand_phi` (no unit-norm check)."""
    v = np.asarray(v, dtype=complex)
    n = len(v) - 1
    mis = multi_indices(n, k)
    expo = np.array(mis)
    mult = np.array([multinomial(mu) for mu in mis], dtype=float)
    h = mult * np.prod(np.conj(v)[None, :] ** expo, axis=1)
    return np.outer(h, np.conj(h)).ravel()


# --- group action -----------------------------------------------------------

def _check_unitary(g, mode: str, n1: int):
    if mode == "exact":
        for i in range(n1):
            for j in range(n1):
                s = sum((_conj(g[r][i]) * g[r][j] for r in range(n1)), ZERO)
                if s != (1 if i == j else 0):
                    raise ValueError("matrix is not unitary")
    else:
        ga = np.asarray(g, dtype=complex)
        if ga.shape != (n1, n1) or np.max(np.abs(ga.conj().T @ ga - np.eye(n1))) > UNITARY_TOL:
            raise ValueError("matrix is not unitary to 1e-12")


def group_act(g, p: BiPoly) -> BiPoly:
    """rho_k(g) p: the polynomial z -> p(g* z) = p(g^{-1} z)."""
    n1 = p.n + 1
    rows = [list(r) for r in (g.tolist() if isinstance(g, np.ndarray) else g)]
    if len(rows) != n1:
        raise ValueError("matrix size does not match n+1")
    mode = "exact" if p.mode == "exact" and _mode_of([c for r in rows for c in r]) == "exact" else "numeric"
    g_s = [_as_scalars(r, mode) for r in rows]
    _check_unitary(g_s, mode, n1)
    # i-th coordinate of g* z is sum_j conj(g[j][i]) z_j
    forms = [[_conj(g_s[j][i]) for j in range(n1)] for i in range(n1)]
    holo_cache: dict = {}

    def holo(mu):
        if mu not in holo_cache:
            holo_cache[mu] = _holo_power_product(forms, mu, p.n, mode)
        return holo_cache[mu]

    out: dict = {}
    for (mu, nu), c in p.coeffs.items():
        c = c if mode == "exact" else complex(c)
        hm, hn = holo(mu), holo(nu)
        for m2, a in hm.items():
            ca = c * a
            for n2, b in hn.items():
                key = (m2, n2)
                out[key] = out.get(key, _zero_like(mode)) + ca * _conj(b)
    return BiPoly(p.n, p.k, out, mode)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


# --- inner product ----------------------------------------------------------

def _monomial_integral(n: int, k: int, exps: MultiIndex, exact: bool):
    num = factorial(n) * mi_factorial(exps)
    den = factorial(n + 2 * k)
    return Fraction(num, den) if exact else num / den


def inner_l2(p: BiPoly, q: BiPoly):
    """<p, q> = average over the unit sphere of conj(p) q, conjugate-linear in ``p``."""
    p._check_compatible(q)
    n, k = p.n, p.k
    exact = p.mode == q.mode == "exact"
    by_weight: dict = {}
    for (mu, nu), c in q.coeffs.items():
        by_weight.setdefault(tuple(a - b for a, b in zip(mu, nu)), []).append((mu, nu, c))
    total = ZERO if exact else 0j
    for (mu, nu), c in p.coeffs.items():
        w = tuple(a - b for a, b in zip(mu, nu))
        cc = _conj(c) if exact else complex(c).conjugate()
        for mu2, nu2, c2 in by_weight.get(w, ()):
            integ = _monomial_integral(n, k, _add_mi(nu, mu2), exact)
            total = total + cc * (c2 if exact else complex(c2)) * integ
    return total


@lru_cache(maxsize=None)
def gram_sparse(n: int, k: int) -> scipy.sparse.csr_matrix:
    """Numeric L² Gram matrix on :func:`basis_pairs`, sparse by torus weight."""
    pairs = basis_pairs(n, k)
    groups: dict = {}
    for i, (mu, nu) in enumerate(pairs):
        groups.setdefault(tuple(a - b for a, b in zip(mu, nu)), []).append(i)
    rows, cols, vals = [], [], []
    for idx in groups.values():
        for i in idx:
            nu = pairs[i][1]
            for j in idx:
                mu2 = pairs[j][0]
                rows.append(i)
                cols.append(j)
                vals.append(_monomial_integral(n, k, _add_mi(nu, mu2), False))
    size = len(pairs)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))


def inner_vectors(n: int, k: int, p: np.ndarray, q: np.ndarray) -> complex:
    return complex(np.conj(p) @ (gram_sparse(n, k) @ q))


# --- frames and reduced embedding ------------------------------------------

@dataclass(frozen=True)
class Frame:
    """Orthonormal pair (u, w) in C^(n+1): base point x = u* and direction v = w*."""

    n: int
    u: tuple = field(repr=True)
    w: tuple = field(repr=True)

    def __post_init__(self):
        u, w = list(self.u), list(self.w)
        if len(u) != self.n + 1 or len(w) != self.n + 1:
            raise ValueError("frame vectors must have length n+1")
        mode = _vector_mode(u, w)
        us, ws = _as_scalars(u, mode), _as_scalars(w, mode)
        uw = sum((_conj(a) * b for a, b in zip(us, ws)), ZERO if mode == "exact" else 0j)
        if mode == "exact":
            if _norm2(us, mode) != 1 or _norm2(ws, mode) != 1 or uw != 0:
                raise ValueError("frame is not orthonormal")
        elif (
            abs(_norm2(us, mode) - 1) > 1e-12
            or abs(_norm2(ws, mode) - 1) > 1e-12
            or abs(uw) > 1e-12
        ):
            raise ValueError("frame is not orthonormal to 1e-12")
        object.__setattr__(self, "u", tuple(us))
        object.__setattr__(self, "w", tuple(ws))

    @property
    def mode(self) -> str:
        return _vector_mode(self.u, self.w)

    @classmethod
    def standard(cls, n: int) -> "Frame":
        """u = e_(n+1), w = e_1 with exact entries."""
        u = [0] * (n + 1)
        w = [0] * (n + 1)
        u[n] = 1
        w[0] = 1
        return cls(n, tuple(u), tuple(w))


def embed_reduced(p: ReducedPoly, frame: Frame) -> BiPoly:
    """Substitute x = u* z, v = w* z (and conjugates) into a reduced grid."""
    k, n = p.k, frame.n
    mode = "exact" if frame.mode == "exact" else "numeric"
    xs = [_conj(c) for c in frame.u]
    vs = [_conj(c) for c in frame.w]
    hol = [_holo_power_product([xs, vs], [k - a, a], n, mode) for a in range(k + 1)]
    out: dict = {}
    for (a, b), c in p.items():
        c = c if mode == "exact" else complex(c)
        for mu, ha in hol[a].items():
            cha = c * ha
            for nu, hb in hol[b].items():
                key = (mu, nu)
                out[key] = out.get(key, _zero_like(mode)) + cha * _conj(hb)
    return BiPoly(n, k, out, mode)


# --- orbit span --------------------------------------------------------------

def fundamental_function(n: int, k: int) -> BiPoly:
    """f_k = |z_(n+1)|^(2k)."""
    e = [0] * (n + 1)
    e[n] = 1
    return expand_phi(e, k)


def _real_rows(vectors: np.ndarray) -> np.ndarray:
    return np.hstack([vectors.real, vectors.imag])


def orbit_singular_values(n: int, k: int, sample_count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    fk = fundamental_function(n, k)
    rows = [group_act(haar_unitary(n + 1, rng), fk).to_vector() for _ in range(sample_count)]
    return np.linalg.svd(_real_rows(np.array(rows)), compute_uv=False)


def orbit_rank(n: int, k: int, sample_count: int, seed: int, rel_tol: float = 1e-8) -> int:
    """Real rank of {rho_k(g) f_k} over Haar-random unitaries g."""
    s = orbit_singular_values(n, k, sample_count, seed)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))
