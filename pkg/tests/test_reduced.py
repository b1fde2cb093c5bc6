from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from ppmc.gaussian import GaussianRational, I
from ppmc.reduced import (
    J_MINUS,
    J_PLUS,
    S_MINUS,
    S_PLUS,
    VVBAR,
    VXBAR,
    XVBAR,
    XXBAR,
    EigenLabel,
    Operator,
    ReducedPoly,
    apply_isotropy,
    delta_derive,
    grid_indices,
    inner_reduced,
    project_eigen,
    project_normal_reduced,
    reduced_gram,
)

from conftest import grids

S, J = Operator.SYMMETRY_S, Operator.ROOT_J
J_LABELS = [EigenLabel(J, GaussianRational(*ev)) for ev in ((1, 0), (0, 1), (-1, 0), (0, -1))]


# ring operations

def test_multiply_powers_of_xxbar():
    assert XXBAR * XXBAR == ReducedPoly(2, {(0, 0): 1})


def test_add_tangent_monomials():
    assert VXBAR + XVBAR == ReducedPoly(1, {(1, 0): 1, (0, 1): 1})


def test_v_hat_from_products():
    for k in range(1, 6):
        v_hat = (XXBAR ** (k - 1) * (VXBAR + XVBAR)).scale(k)
        assert v_hat == ReducedPoly(k, {(1, 0): k, (0, 1): k})


def test_add_rejects_bidegree_mismatch():
    with pytest.raises(ValueError):
        XXBAR + (XXBAR * XXBAR)


def test_index_out_of_range():
    with pytest.raises(ValueError):
        ReducedPoly(1, {(2, 0): 1})


# derivation

def test_delta_xxbar():
    assert delta_derive(XXBAR) == VXBAR + XVBAR


def test_delta_tangent():
    assert delta_derive(VXBAR + XVBAR) == (VVBAR - XXBAR).scale(2)


def test_delta_kills_constants():
    assert delta_derive(ReducedPoly(0, {(0, 0): 7})).is_zero()


@given(grids(max_k=3), grids(max_k=2))
def test_leibniz(p, q):
    assert delta_derive(p * q) == delta_derive(p) * q + p * delta_derive(q)


@given(grids(max_k=3))
def test_delta_preserves_bidegree(p):
    assert delta_derive(p).k == p.k


@given(grids(max_k=4, real=True))
def test_delta_preserves_reality(p):
    assert p.is_real()
    assert delta_derive(p).is_real()


@given(grids(max_k=4))
def test_parity_alternation(p):
    even, odd = project_eigen(p, S_PLUS), project_eigen(p, S_MINUS)
    assert project_eigen(delta_derive(even), S_PLUS).is_zero()
    assert project_eigen(delta_derive(odd), S_MINUS).is_zero()


def test_rotated_derivation_rejects_non_unit_phase():
    with pytest.raises(ValueError):
        delta_derive(XXBAR, phase=2)


# isotropy

def test_symmetry_fixes_mixed_term():
    p = ReducedPoly(2, {(1, 1): 1})
    assert apply_isotropy(p, S) == p


def test_root_j_on_vv_term():
    p = ReducedPoly(2, {(2, 0): 1})
    assert apply_isotropy(p, J) == p.scale(-1)


def test_root_j_on_single_v():
    p = ReducedPoly(2, {(1, 0): 1})
    assert apply_isotropy(p, J) == p.scale(I)


@given(grids(max_k=4))
def test_involution_laws(p):
    assert apply_isotropy(apply_isotropy(p, S), S) == p
    assert apply_isotropy(apply_isotropy(p, J), J) == apply_isotropy(p, S)


@given(grids(max_k=4, real=True))
def test_isotropy_preserves_reality(p):
    assert apply_isotropy(p, S).is_real()
    for lab in (S_PLUS, S_MINUS, J_PLUS, J_MINUS):
        assert project_eigen(p, lab).is_real()


# eigenprojections

def test_project_alpha_keeps_balanced_terms():
    alpha = ReducedPoly(2, {(2, 0): 2, (0, 2): 2, (1, 1): 8, (0, 0): -4})
    assert project_eigen(alpha, J_PLUS) == ReducedPoly(2, {(1, 1): 8, (0, 0): -4})


def test_tangent_vector_is_s_odd():
    v_hat = ReducedPoly(3, {(1, 0): 3, (0, 1): 3})
    assert project_eigen(v_hat, S_PLUS).is_zero()


def test_eigenvalue_rule_beyond_v_degree_three():
    # v^4 x̄^4 is not balanced, yet i^4 = 1 puts it in the +1 eigenspace of j
    p = ReducedPoly(4, {(4, 0): 1})
    assert project_eigen(p, J_PLUS) == p


def test_label_validation():
    with pytest.raises(ValueError):
        EigenLabel(S, GaussianRational(0, 1))
    with pytest.raises(ValueError):
        EigenLabel(J, GaussianRational(2))


@given(grids(max_k=5))
def test_resolution_of_identity(p):
    assert project_eigen(p, S_PLUS) + project_eigen(p, S_MINUS) == p
    total = ReducedPoly.zero(p.k)
    for lab in J_LABELS:
        q = project_eigen(p, lab)
        assert project_eigen(q, lab) == q
        for other in J_LABELS:
            if other != lab:
                assert project_eigen(q, other).is_zero()
        assert apply_isotropy(q, J) == q.scale(lab.eigenvalue)
        total = total + q
    assert total == p


# Gram matrix

def _sphere_moment_n1(p: int, q: int) -> float:
    """Average of |z1|^(2p) |z2|^(2q) over S^3 via Hopf coordinates."""
    val, _ = quad(lambda th: 2 * np.cos(th) ** (2 * p + 1) * np.sin(th) ** (2 * q + 1), 0, np.pi / 2)
    return val


@lru_cache(maxsize=None)
def _sphere_sample_moduli(n: int, samples=400_000, seed=7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(samples, n + 1)) + 1j * rng.normal(size=(samples, n + 1))
    return np.abs(z / np.linalg.norm(z, axis=1, keepdims=True)) ** 2


def _sphere_moment_mc(n: int, exps) -> float:
    r = _sphere_sample_moduli(n)
    return float(np.mean(np.prod(r ** np.array(exps), axis=1)))


def _entry(n, k, ab, ab2):
    idx = grid_indices(k)
    return reduced_gram(n, k)[idx.index(ab)][idx.index(ab2)]


def test_gram_diagonal_n1_k1():
    # |x|^4 with x = z_2: quadrature gives 1/3
    assert abs(_sphere_moment_n1(0, 2) - 1 / 3) < 1e-12
    assert _entry(1, 1, (0, 0), (0, 0)) == Fraction(1, 3)


def test_gram_weight_orthogonality():
    assert _entry(1, 1, (1, 0), (0, 1)) == 0


def test_gram_coupling_n1_k2():
    # <x v x̄², v² x̄ v̄> = avg |v|^4 |x|^4; quadrature gives 1/30
    assert abs(_sphere_moment_n1(2, 2) - 1 / 30) < 1e-12
    assert _entry(1, 2, (1, 0), (2, 1)) == Fraction(1, 30)


@pytest.mark.parametrize("n,k", [(1, 2), (2, 1), (2, 2), (3, 2)])
def test_gram_against_monte_carlo(n, k):
    for ab in grid_indices(k):
        for ab2 in grid_indices(k):
            if ab[0] - ab[1] != ab2[0] - ab2[1]:
                continue
            m = ab[1] + ab2[0]
            exps = [0] * (n + 1)
            exps[0], exps[n] = m, 2 * k - m
            assert abs(float(_entry(n, k, ab, ab2)) - _sphere_moment_mc(n, exps)) < 5e-3


@pytest.mark.parametrize("n,k", [(1, 1), (1, 3), (2, 2), (3, 4)])
def test_gram_hermitian_positive_definite(n, k):
    g = np.array(reduced_gram(n, k), dtype=float)
    assert np.array_equal(g, g.T)
    assert np.linalg.eigvalsh(g).min() > 0


def test_gram_rejects_n0():
    with pytest.raises(ValueError):
        reduced_gram(0, 1)


# normal projection

@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_v_hat_projects_to_zero(n, k):
    v_hat = ReducedPoly(k, {(1, 0): k, (0, 1): k})
    assert project_normal_reduced(v_hat, n).is_zero()


@pytest.mark.parametrize("k", [1, 2, 4])
def test_position_is_normal(k):
    phi = ReducedPoly.monomial(k, 0, 0)
    assert project_normal_reduced(phi, 2) == phi


def test_normal_projection_of_delta_xi_k2():
    # odd part of delta(xi) at k = 2; <m10, m21> / <m10, m10> = (1/30) / (1/20)
    dxi = ReducedPoly(2, {(2, 1): 8, (1, 2): 8, (1, 0): -16, (0, 1): -16})
    g = reduced_gram(1, 2)
    idx = grid_indices(2)
    ratio = g[idx.index((1, 0))][idx.index((2, 1))] / g[idx.index((1, 0))][idx.index((1, 0))]
    assert ratio == Fraction(2, 3)
    expected = ReducedPoly(2, {(2, 1): 8, (1, 2): 8, (1, 0): -8 * ratio, (0, 1): -8 * ratio})
    assert project_normal_reduced(dxi, 1) == expected
    assert expected[(2, 1)] != 0


def test_normal_projection_rejects_k0():
    with pytest.raises(ValueError):
        project_normal_reduced(ReducedPoly(0, {(0, 0): 1}), 1)


@given(grids(max_k=4).filter(lambda p: p.k >= 1), st.integers(1, 3))
def test_normal_projection_idempotent_and_orthogonal(p, n):
    q = project_normal_reduced(p, n)
    assert project_normal_reduced(q, n) == q
    for ab in ((1, 0), (0, 1)):
        assert inner_reduced(ReducedPoly.monomial(p.k, *ab), q, n) == 0


# serialization

@given(grids(max_k=3))
def test_grid_serialization_roundtrip(p):
    assert ReducedPoly.deserialize(p.serialize()) == p


def test_grid_serialization_row_major():
    rows = ReducedPoly(1, {(1, 0): Fraction(1, 2)}).serialize()
    assert rows == [["0/1+0/1i", "0/1+0/1i"], ["1/2+0/1i", "0/1+0/1i"]]
