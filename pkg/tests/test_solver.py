from itertools import permutations

import numpy as np
import pytest

from qrv.errors import SolverStall
from qrv.solver import (HullProjection, LpInfeasible, LpOptimal, LpProblem,
                        LpUnbounded, SdpBlock, SdpProblem, embed_hermitian,
                        herm_to_vec, hermitian_basis, lp_solve,
                        nearest_point_in_hull, sdp_solve, svec,
                        unembed_hermitian, unsvec, vec_to_herm)


def test_lp_trivial_optimal():
    res = lp_solve(LpProblem(c=[1.0], A=[[1.0]], b=[1.0]))
    assert isinstance(res, LpOptimal)
    assert np.isclose(res.x[0], 1.0)
    assert np.isclose(res.value, 1.0)


def test_lp_infeasible_by_hand():
    # x1 + x2 = 1 and x1 - x2 = 3 force x2 = -1 < 0
    res = lp_solve(LpProblem(c=[0.0, 0.0], A=[[1.0, 1.0], [1.0, -1.0]],
                             b=[1.0, 3.0]))
    assert isinstance(res, LpInfeasible)
    A = np.array([[1.0, 1.0], [1.0, -1.0]])
    assert (A.T @ res.farkas).max() <= 1e-8
    assert np.array([1.0, 3.0]) @ res.farkas > 1e-8


def test_lp_unbounded_returns_ray():
    res = lp_solve(LpProblem(c=[-1.0, 0.0], A=[[0.0, 1.0]], b=[1.0]))
    assert isinstance(res, LpUnbounded)
    assert np.allclose(np.array([[0.0, 1.0]]) @ res.ray, 0.0, atol=1e-8)
    assert np.array([-1.0, 0.0]) @ res.ray < 0


def _doubly_stochastic_rows(m):
    rows, rhs = [], []
    for i in range(m):
        r = np.zeros(m * m)
        r[i * m:(i + 1) * m] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for j in range(m):
        r = np.zeros(m * m)
        r[j::m] = 1.0
        rows.append(r)
        rhs.append(1.0)
    return np.array(rows), np.array(rhs)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_birkhoff_vertex_lp_matches_assignment_brute_force(m):
    rng = np.random.default_rng(m)
    C = rng.normal(size=(m, m))
    A, b = _doubly_stochastic_rows(m)
    res = lp_solve(LpProblem(c=-C.ravel(), A=A, b=b))
    assert isinstance(res, LpOptimal)
    best = max(sum(C[i, sigma[i]] for i in range(m))
               for sigma in permutations(range(m)))
    assert np.isclose(-res.value, best, atol=1e-8)


def test_lp_duality_gap_on_500_random_feasible():
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = int(rng.integers(2, 61))
        k = int(rng.integers(1, min(n, 12)))
        A = rng.normal(size=(k, n))
        x0 = rng.uniform(0.1, 1.0, size=n)
        b = A @ x0
        c = rng.normal(size=n) + 2.0  # keep most instances bounded
        res = lp_solve(LpProblem(c=c, A=A, b=b))
        if isinstance(res, LpOptimal):
            assert abs(c @ res.x - b @ res.dual) <= 1e-8 * (1 + abs(res.value)) * (
                1 + np.abs(A).max())
        else:
            assert isinstance(res, LpUnbounded)


def test_svec_roundtrip_and_isometry():
    rng = np.random.default_rng(8)
    M = rng.normal(size=(4, 4))
    M = (M + M.T) / 2
    N = rng.normal(size=(4, 4))
    N = (N + N.T) / 2
    assert np.allclose(unsvec(svec(M), 4), M)
    assert np.isclose(svec(M) @ svec(N), np.trace(M @ N))


def test_embedding_identities():
    rng = np.random.default_rng(9)
    G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A = (G + G.conj().T) / 2
    H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    B = (H + H.conj().T) / 2
    assert np.isclose(np.trace(embed_hermitian(A) @ embed_hermitian(B)),
                      2 * np.trace(A @ B).real)
    assert np.allclose(unembed_hermitian(embed_hermitian(A)), A)
    v = herm_to_vec(A)
    assert np.allclose(vec_to_herm(v, 3), A)
    assert np.isclose(v @ herm_to_vec(B), np.trace(A @ B).real)
    assert np.isclose(np.linalg.norm(v), np.linalg.norm(A, "fro"))


def test_sdp_lambda_max_trivial():
    C = np.diag([3.0, -1.0])
    sol = sdp_solve(SdpProblem(c=[1.0], blocks=[
        SdpBlock(F0=-C, terms={0: np.eye(2)})]))
    assert abs(sol.value - 3.0) <= 1e-8
    assert sol.gap <= 1e-6
    S = sol.block_duals[0]
    assert np.isclose(np.trace(S).real, 1.0, atol=1e-7)


def test_sdp_nine_example_value():
    basis = hermitian_basis(2)
    R0 = np.array([[4.0, 4.0], [4.0, 4.0]], dtype=complex)
    R1 = np.diag([3.0, -3.0]).astype(complex)
    nb = 4
    c = np.zeros(1 + nb)
    c[0] = 1.0
    obj = {0: np.eye(2, dtype=complex)}
    for i in range(nb):
        obj[1 + i] = -2.0 * basis[i]
    blocks = [
        SdpBlock(F0=-(R0 + R1), terms=obj),
        SdpBlock(F0=np.zeros((2, 2), dtype=complex),
                 terms={1 + i: basis[i] for i in range(nb)}),
        SdpBlock(F0=R1, terms={1 + i: basis[i] for i in range(nb)}),
    ]
    sol = sdp_solve(SdpProblem(c=c, blocks=blocks))
    assert abs(sol.value - 9.0) <= 1e-6


def test_sdp_equality_and_nonneg_support():
    # max tr(S C) over states S: classic lambda_max program
    C = np.array([[1.0, 2.0], [2.0, 1.0]])
    basis = hermitian_basis(2)
    c = np.array([-np.trace(B @ C).real for B in basis])
    A_eq = np.array([[np.trace(B).real for B in basis]])
    sol = sdp_solve(SdpProblem(
        c=c, blocks=[SdpBlock(F0=np.zeros((2, 2)), terms=dict(enumerate(basis)))],
        A_eq=A_eq, b_eq=[1.0]))
    assert abs(-sol.value - 3.0) <= 1e-7


def test_sdp_feasibility_joe_verducci_level_one():
    # F_S = diag(1,4) lies in conv{diag(1,2), diag(3,4)} minus the PSD cone:
    # lam = (0,1) and P = diag(2,0) witness it by hand
    G = [np.diag([1.0, 2.0]), np.diag([3.0, 4.0])]
    FS = np.diag([1.0, 4.0])
    c = np.zeros(3)
    c[0] = 1.0
    terms = {0: np.eye(2, dtype=complex), 1: G[0].astype(complex),
             2: G[1].astype(complex)}
    A_eq = np.array([[0.0, 1.0, 1.0]])
    sol = sdp_solve(SdpProblem(c=c, blocks=[SdpBlock(F0=-FS.astype(complex),
                                                     terms=terms)],
                               A_eq=A_eq, b_eq=[1.0], nonneg=(1, 2)))
    assert sol.value <= 1e-7


def test_sdp_monotone_under_constraint_addition():
    rng = np.random.default_rng(10)
    one = np.ones((1, 1))
    for _ in range(20):
        d = 3
        G = rng.normal(size=(d, d))
        C = (G + G.T) / 2
        H = rng.normal(size=(d, d))
        H = (H + H.T) / 2
        blocks = [
            SdpBlock(F0=-C, terms={0: np.eye(d), 1: H}),
            SdpBlock(F0=one, terms={1: -one}),   # z1 <= 1
            SdpBlock(F0=one, terms={1: one}),    # z1 >= -1
        ]
        sol1 = sdp_solve(SdpProblem(c=[1.0, 0.1], blocks=blocks), tol=1e-5)
        sol2 = sdp_solve(SdpProblem(c=[1.0, 0.1], blocks=blocks, nonneg=(1,)),
                         tol=1e-5)
        assert sol2.value >= sol1.value - 1e-6 * (1 + abs(sol1.value))


def test_sdp_stall_carries_partial_certificate():
    C = np.diag([3.0, -1.0])
    with pytest.raises(SolverStall) as exc_info:
        sdp_solve(SdpProblem(c=[1.0], blocks=[
            SdpBlock(F0=-C, terms={0: np.eye(2)})]), tol=1e-16)
    assert exc_info.value.certificate is not None
    assert abs(exc_info.value.certificate.value - 3.0) <= 1e-6


def test_hull_projection_inside_and_outside():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    inside = nearest_point_in_hull(pts, np.array([0.2, 0.2]))
    assert isinstance(inside, HullProjection)
    assert inside.distance <= 1e-7
    outside = nearest_point_in_hull(pts, np.array([1.0, 1.0]))
    assert np.isclose(outside.distance, np.sqrt(2) / 2, atol=1e-7)
    assert np.allclose(outside.direction, [np.sqrt(2) / 2, np.sqrt(2) / 2],
                       atol=1e-6)
