"""Floating-point cross-checks in the full coefficient model of V_k.

Nothing in here reads the reduced engine's grids: every quantity is obtained by
finite differences of ``t -> Phi(curve(t))`` with Phi expanded in monomials
z^mu conj(z)^nu, and normal projections use the numeric L² Gram matrix. Tests
compare these vectors against the exact grids pushed through
:func:`ppmc.bipoly.embed_reduced`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .bipoly import (
    Frame,
    embed_reduced,
    expand_phi,
    gram_sparse,
    group_act,
    haar_unitary,
    phi_vector,
)
from .geometry import EmbeddingSpec
from .reduced import ReducedPoly

MIN_STEP = 1e-12


@dataclass(frozen=True)
class OracleConfig:
    h1: float = 1e-4
    h2: float = 1e-3
    h3: float = 1e-2
    tol_rel1: float = 1e-7
    tol_rel2: float = 1e-5
    tol_rel3: float = 1e-3
    seed: int = 0
    sample_count: int = 50

    def __post_init__(self):
        if min(self.h1, self.h2, self.h3) <= 0:
            raise ValueError("finite-difference steps must be positive")
        if not 0 < self.tol_rel1 <= self.tol_rel2 <= self.tol_rel3:
            raise ValueError("tolerances must be positive and increase with derivative order")

    def step(self, order: int) -> float:
        return {1: self.h1, 2: self.h2, 3: self.h3}[order]

    def tol(self, order: int) -> float:
        return {1: self.tol_rel1, 2: self.tol_rel2, 3: self.tol_rel3}[order]


# --- ambient space V = sum of V_k ----------------------------------------------------

def embedding_vector(spec: EmbeddingSpec, x: np.ndarray) -> np.ndarray:
    """Concatenated coefficient vector of sum_k a_k |x* z|^(2k)."""
    return np.concatenate([float(a) * phi_vector(x, k) for k, a in spec.terms])


def _blocks(spec: EmbeddingSpec) -> list[slice]:
    out, start = [], 0
    for k, _ in spec.terms:
        size = gram_sparse(spec.n, k).shape[0]
        out.append(slice(start, start + size))
        start += size
    return out


def inner(spec: EmbeddingSpec, p: np.ndarray, q: np.ndarray) -> complex:
    total = 0j
    for (k, _), sl in zip(spec.terms, _blocks(spec)):
        total += np.conj(p[sl]) @ (gram_sparse(spec.n, k) @ q[sl])
    return complex(total)


def norm(spec: EmbeddingSpec, p: np.ndarray) -> float:
    return float(np.sqrt(max(inner(spec, p, p).real, 0.0)))


def reference_vector(spec: EmbeddingSpec, grid: Callable[[int], ReducedPoly], frame: Frame) -> np.ndarray:
    """Exact grids ``a_k * grid(k)`` substituted into ``frame``, as one numeric vector."""
    return np.concatenate(
        [float(a) * embed_reduced(grid(k), frame).to_vector() for k, a in spec.terms]
    )


def relative_error(spec: EmbeddingSpec, approx: np.ndarray, exact: np.ndarray, scale: float | None = None) -> float:
    s = norm(spec, exact) if scale is None else scale
    return norm(spec, approx - exact) / s


# --- finite differences -------------------------------------------------------------

def _curve(u: np.ndarray, w: np.ndarray, t: float) -> np.ndarray:
    return np.cos(t) * u + np.sin(t) * w


def _central(f: Callable[[float], np.ndarray], order: int, h: float) -> np.ndarray:
    if h < MIN_STEP:
        raise ValueError(f"step {h} below {MIN_STEP}")
    if order == 1:
        return (f(h) - f(-h)) / (2 * h)
    if order == 2:
        return (f(h) - 2 * f(0.0) + f(-h)) / h**2
    if order == 3:
        return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)
    raise ValueError("order must be 1, 2 or 3")


def _frame_arrays(frame: Frame) -> tuple[np.ndarray, np.ndarray]:
    return np.array(frame.u, dtype=complex), np.array(frame.w, dtype=complex)


def fd_curve_derivative(
    spec: EmbeddingSpec, frame: Frame, order: int, config: OracleConfig = OracleConfig(), h: float | None = None
) -> np.ndarray:
    """d^order/dt^order of Phi(cos t u + sin t w) at t = 0 by central differences."""
    u, w = _frame_arrays(frame)
    step = config.step(order) if h is None else h
    return _central(lambda t: embedding_vector(spec, _curve(u, w, t)), order, step)


def horizontal_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the complex orthogonal complement of u."""
    n1 = len(u)
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n1, dtype=complex)]))
    return q[:, 1:n1]


def tangent_basis(spec: EmbeddingSpec, u: np.ndarray, config: OracleConfig = OracleConfig()) -> np.ndarray:
    """Rows dPhi(w_j), dPhi(i w_j) for an orthonormal basis w_j of u-perp (2n rows)."""
    rows = []
    for w in horizontal_basis(u).T:
        for d in (w, 1j * w):
            rows.append(_central(lambda t: embedding_vector(spec, _curve(u, d, t)), 1, config.h1))
    return np.array(rows)


@dataclass(frozen=True)
class Projection:
    normal: np.ndarray
    tangential: np.ndarray
    condition: float


def normal_project(spec: EmbeddingSpec, u: np.ndarray, vec: np.ndarray, config: OracleConfig = OracleConfig(),
                   basis: np.ndarray | None = None) -> Projection:
    """Real-orthogonal projection of ``vec`` onto the normal space at [u]."""
    t = tangent_basis(spec, u, config) if basis is None else basis
    gram = np.array([[inner(spec, a, b).real for b in t] for a in t])
    rhs = np.array([inner(spec, a, vec).real for a in t])
    coef = scipy.linalg.solve(gram, rhs, assume_a="sym")
    tangential = coef @ t
    return Projection(vec - tangential, tangential, float(np.linalg.cond(gram)))


def fd_alpha(spec: EmbeddingSpec, u: np.ndarray, w: np.ndarray, config: OracleConfig = OracleConfig()) -> np.ndarray:
    """alpha(w, w) at [u] for a unit horizontal w: normal part of the second derivative."""
    second = _central(lambda t: embedding_vector(spec, _curve(u, w, t)), 2, config.h2)
    return normal_project(spec, u, second, config).normal


def _require_horizontal(u: np.ndarray, d: np.ndarray):
    if abs(np.vdot(u, d)) > 1e-12:
        raise ValueError("direction is not horizontal (complex-orthogonal to u)")


def fd_alpha_polarized(spec: EmbeddingSpec, frame: Frame, second_direction, config: OracleConfig = OracleConfig()
                       ) -> np.ndarray:
    """alpha(v, w) = (alpha(v+w, v+w) - alpha(v-w, v-w)) / 4 with v = frame.w."""
    u, v = _frame_arrays(frame)
    w = np.asarray(second_direction, dtype=complex)
    _require_horizontal(u, w)

    def quad(y):
        r = np.linalg.norm(y)
        if r == 0:
            return 0.0
        return r**2 * fd_alpha(spec, u, y / r, config)

    return (quad(v + w) - quad(v - w)) / 4


def fd_alpha11(spec: EmbeddingSpec, u: np.ndarray, w: np.ndarray, config: OracleConfig = OracleConfig()) -> np.ndarray:
    """(alpha(w, w) + alpha(iw, iw)) / 2 at [u]."""
    return (fd_alpha(spec, u, w, config) + fd_alpha(spec, u, 1j * w, config)) / 2


def fd_nabla_alpha11_raw(spec: EmbeddingSpec, frame: Frame, config: OracleConfig = OracleConfig()) -> np.ndarray:
    """d/dt alpha11(v(t), v(t)) along the geodesic, v(t) the parallel velocity; unprojected."""
    u, w = _frame_arrays(frame)

    def xi(t):
        return fd_alpha11(spec, _curve(u, w, t), _curve(w, -u, t), config)

    return _central(xi, 1, config.h3)


def fd_nabla_alpha11_diagonal(spec: EmbeddingSpec, frame: Frame, config: OracleConfig = OracleConfig()) -> np.ndarray:
    """(nabla_v alpha11)(v, v) at [u]: normal part of :func:`fd_nabla_alpha11_raw`."""
    u, _ = _frame_arrays(frame)
    return normal_project(spec, u, fd_nabla_alpha11_raw(spec, frame, config), config).normal


@dataclass(frozen=True)
class DirectSumResiduals:
    concatenated: np.ndarray
    components: list[np.ndarray]
    standalone: list[np.ndarray]


def direct_sum_residuals(spec: EmbeddingSpec, frame: Frame, config: OracleConfig = OracleConfig()) -> DirectSumResiduals:
    """Residual of the concatenated embedding and its per-factor pieces.

    ``components[i]`` is the i-th block of the concatenated residual, projected
    normally inside its own factor a_k Phi_k; ``standalone[i]`` is the residual of
    that factor computed on its own.
    """
    u, _ = _frame_arrays(frame)
    total = fd_nabla_alpha11_diagonal(spec, frame, config)
    components, standalone = [], []
    for (k, a), sl in zip(spec.terms, _blocks(spec)):
        single = EmbeddingSpec(spec.n, ((k, a),))
        components.append(normal_project(single, u, total[sl], config).normal)
        standalone.append(fd_nabla_alpha11_diagonal(single, frame, config))
    return DirectSumResiduals(total, components, standalone)


# --- equivariance ----------------------------------------------------------------------

def _random_unit(rng: np.random.Generator, n1: int) -> np.ndarray:
    z = rng.normal(size=n1) + 1j * rng.normal(size=n1)
    return z / np.linalg.norm(z)


def check_equivariance(spec: EmbeddingSpec, sample_count: int, seed: int) -> float:
    """max over random (g, x) of || rho(g) Phi(x) - Phi(g x) || in L²."""
    rng = np.random.default_rng(seed)
    n1 = spec.n + 1
    worst = 0.0
    for _ in range(sample_count):
        g = haar_unitary(n1, rng)
        x = _random_unit(rng, n1)
        left = np.concatenate([float(a) * group_act(g, expand_phi(x, k)).to_vector() for k, a in spec.terms])
        right = embedding_vector(spec, g @ x)
        worst = max(worst, norm(spec, left - right))
    return worst


def orbit_norm_spread(spec: EmbeddingSpec, sample_count: int, seed: int) -> float:
    """max - min of ||Phi(x)|| over random unit x; zero since the orbit lies in a sphere."""
    rng = np.random.default_rng(seed)
    norms = [norm(spec, embedding_vector(spec, _random_unit(rng, spec.n + 1))) for _ in range(sample_count)]
    return max(norms) - min(norms)


# --- report section ---------------------------------------------------------------------

@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value < self.tolerance)

    def to_json(self) -> dict:
        return {"name": self.name, "value": float(f"{self.value:.6e}"), "tolerance": self.tolerance, "pass": self.passed}


def random_frame(n: int, rng: np.random.Generator) -> Frame:
    u = _random_unit(rng, n + 1)
    w = horizontal_basis(u) @ _random_unit(rng, n)
    return Frame(n, tuple(u), tuple(w))


def oracle_checks(spec: EmbeddingSpec, config: OracleConfig = OracleConfig()) -> list[OracleCheck]:
    """FD-versus-exact agreement at a seeded random frame, plus equivariance."""
    from .geometry import first_fundamental, nabla_alpha11_perp, second_fundamental

    rng = np.random.default_rng(config.seed)
    frame = random_frame(spec.n, rng)
    checks = []
    for order, grid in ((1, first_fundamental), (2, second_fundamental)):
        approx = fd_curve_derivative(spec, frame, order, config)
        exact = reference_vector(spec, grid, frame)
        checks.append(OracleCheck(f"fd_order{order}_vs_exact", relative_error(spec, approx, exact), config.tol(order)))
    nabla = fd_nabla_alpha11_diagonal(spec, frame, config)
    if len(spec.terms) == 1:
        exact = reference_vector(spec, lambda k: nabla_alpha11_perp(k, spec.n), frame)
        alpha = reference_vector(spec, second_fundamental, frame)
        scale = max(norm(spec, exact), norm(spec, alpha))
        checks.append(OracleCheck("fd_nabla_alpha11_vs_exact", relative_error(spec, nabla, exact, scale), config.tol_rel3))
    checks.append(OracleCheck("equivariance_max_deviation", check_equivariance(spec, config.sample_count, config.seed), 1e-10))
    checks.append(OracleCheck("orbit_norm_spread", orbit_norm_spread(spec, config.sample_count, config.seed), 1e-10))
    return checks
