import numpy as np
import pytest

from qrv import linalg
from qrv.errors import NotSelfAdjoint, SpaceMismatch
from qrv.l1 import SeparatingFunctional
from qrv.majorize import (apply_bistochastic, implication_suite,
                          komiya_separate, majorizes, majorizes_b,
                          majorizes_s, majorizes_t, psi_phi, sample_states,
                          scalarize_classical)
from qrv.measure import (BistochasticMatrix, FiniteMeasureSpace,
                         classical_majorizes)
from qrv.povm import QuantumRandomVariable
from qrv.worked_examples import joe_verducci_instance, malamud_instance


def random_ds(rng, space, n_mix=6):
    m = space.m
    W = np.zeros((m, m))
    for w in rng.dirichlet(np.ones(n_mix)):
        P = np.zeros((m, m))
        P[np.arange(m), rng.permutation(m)] = 1.0
        W += w * P
    return BistochasticMatrix(space, W)


def random_sa_qrv(rng, atoms, d):
    vals = rng.normal(size=(len(atoms), d, d))
    vals = (vals + vals.transpose(0, 2, 1)) / 2
    return QuantumRandomVariable(atoms, vals.astype(complex))


# --- entrywise action -----------------------------------------------------------

def test_apply_identity():
    space = FiniteMeasureSpace.uniform(3, 1.0)
    rng = np.random.default_rng(0)
    f = random_sa_qrv(rng, space.atoms, 2)
    B = BistochasticMatrix.identity(space)
    assert np.allclose(apply_bistochastic(B, f).values, f.values)


def test_apply_averaging_gives_constant_mean():
    space = FiniteMeasureSpace(["a", "b"], [0.25, 0.75])
    f = QuantumRandomVariable(space.atoms, np.array(
        [np.diag([4.0, 0.0]), np.diag([0.0, 4.0])], dtype=complex))
    B = BistochasticMatrix.averaging(space)
    out = apply_bistochastic(B, f)
    mean = 0.25 * f.values[0] + 0.75 * f.values[1]
    for A in out.values:
        assert np.allclose(A, mean)


def test_apply_checks_space():
    space = FiniteMeasureSpace.uniform(2, 1.0)
    other = FiniteMeasureSpace(["p", "q"], [0.5, 0.5])
    f = QuantumRandomVariable(other.atoms, np.zeros((2, 2, 2)))
    with pytest.raises(SpaceMismatch):
        apply_bistochastic(BistochasticMatrix.identity(space), f)


def test_apply_preserves_positivity_and_identity():
    rng = np.random.default_rng(1)
    space = FiniteMeasureSpace.uniform(4, 1.0)
    B = random_ds(rng, space)
    vals = np.array([(lambda G: G @ G.conj().T)(
        rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        for _ in range(4)])
    out = apply_bistochastic(B, QuantumRandomVariable(space.atoms, vals))
    assert all(linalg.is_psd(linalg.hermitian_part(A)) for A in out.values)
    ident = QuantumRandomVariable.constant(space.atoms, np.eye(2))
    assert np.allclose(apply_bistochastic(B, ident).values, ident.values)


# --- order b ---------------------------------------------------------------------

def test_b_reflexive():
    space, f, _ = joe_verducci_instance()
    cert = majorizes_b(f, f, space)
    assert cert.holds
    assert isinstance(cert.witness, BistochasticMatrix)


def test_b_constant_average():
    space = FiniteMeasureSpace.uniform(3, 1.0)
    rng = np.random.default_rng(2)
    g = random_sa_qrv(rng, space.atoms, 2)
    mean = g.values.mean(axis=0)
    f = QuantumRandomVariable(space.atoms, np.array([mean] * 3))
    assert majorizes_b(f, g, space).holds


def test_b_completeness_on_constructed_positives():
    rng = np.random.default_rng(3)
    space = FiniteMeasureSpace.uniform(4, 1.0)
    for _ in range(20):
        g = random_sa_qrv(rng, space.atoms, 3)
        B = random_ds(rng, space)
        f = apply_bistochastic(B, g)
        assert majorizes_b(f, g, space).holds


def test_b_malamud_fails_with_verified_farkas():
    space, f, g = malamud_instance()
    cert = majorizes_b(f, g, space)
    assert cert.verdict == "fails"
    y, A, b = cert.farkas["y"], cert.farkas["A"], cert.farkas["b"]
    assert (A.T @ y).max() <= 1e-8 * (1 + np.abs(A).max())
    assert b @ y > 1e-8


def test_b_requires_self_adjoint():
    space = FiniteMeasureSpace.uniform(2, 1.0)
    f = QuantumRandomVariable(space.atoms, np.array(
        [[[0.0, 1.0], [0.0, 0.0]]] * 2, dtype=complex))
    with pytest.raises(NotSelfAdjoint):
        majorizes_b(f, f, space)


# --- order t ---------------------------------------------------------------------

def test_t_reflexive():
    space, f, _ = joe_verducci_instance()
    assert majorizes_t(f, f, space).holds


def test_t_joe_verducci_fails_with_canonical_refuter():
    space, f, g = joe_verducci_instance()
    cert = majorizes_t(f, g, space)
    assert cert.verdict == "fails"
    target = np.diag([1.0, -1.0]) / np.sqrt(2.0)
    assert min(linalg.operator_norm(cert.refuter - target),
               linalg.operator_norm(cert.refuter + target)) <= 1e-6
    # the refuting direction re-verifies against the classical order
    ft = scalarize_classical(f, cert.refuter, space)
    gt = scalarize_classical(g, cert.refuter, space)
    assert not classical_majorizes(ft, gt)
    assert cert.margin >= 0.9
    assert abs(np.linalg.norm(cert.refuter, "fro") - 1.0) <= 1e-9


def test_t_malamud_holds_with_full_containment():
    space, f, g = malamud_instance()
    cert = majorizes_t(f, g, space)
    assert cert.holds
    assert len(cert.containment) == 2 ** 4 - 2


def test_t_exact_agrees_with_ten_thousand_direction_sampler():
    from qrv.majorize import _batch_refute, sample_hermitian_directions

    rng = np.random.default_rng(4)
    space = FiniteMeasureSpace.uniform(3, 1.0)
    checked_holds = checked_fails = 0
    for _ in range(30):
        g = random_sa_qrv(rng, space.atoms, 2)
        if checked_holds < 10:
            B = random_ds(rng, space)
            f = apply_bistochastic(B, g)
        else:
            f = random_sa_qrv(rng, space.atoms, 2)
        cert = majorizes_t(f, g, space)
        directions = sample_hermitian_directions(2, 10_000, rng)
        violating = _batch_refute(f, g, space, directions)
        if cert.holds:
            # the sampler must never refute a "holds" verdict
            confirmed = [
                i for i in violating
                if not classical_majorizes(
                    scalarize_classical(f, directions[i], space),
                    scalarize_classical(g, directions[i], space))
            ]
            checked_holds += 1
            assert not confirmed
        else:
            checked_fails += 1
            ft = scalarize_classical(f, cert.refuter, space)
            gt = scalarize_classical(g, cert.refuter, space)
            assert not classical_majorizes(ft, gt)
    assert checked_holds >= 10 and checked_fails >= 5


def test_t_nonuniform_masses_sampling_mode():
    space = FiniteMeasureSpace(["a", "b"], [0.25, 0.75])
    rng = np.random.default_rng(5)
    g = random_sa_qrv(rng, space.atoms, 2)
    cert = majorizes_t(g, g, space)
    # reflexive pair: the sampler cannot refute, so the verdict stays honest
    assert cert.verdict == "undecided-sampled"
    f = QuantumRandomVariable(space.atoms, g.values + np.eye(2))
    cert2 = majorizes_t(f, g, space, n_samples=500)
    assert cert2.verdict == "fails"


# --- order s ---------------------------------------------------------------------

def test_s_joe_verducci_holds_exact_and_sampled():
    space, f, g = joe_verducci_instance()
    cert = majorizes_s(f, g, space, n_samples=10_000, seed=11)
    assert cert.holds
    assert cert.sampler["violations"] == 0
    assert len(cert.containment) == 2 ** 2 - 2


def test_s_fails_with_state_refuter():
    space = FiniteMeasureSpace.uniform(2, 1.0)
    f = QuantumRandomVariable(space.atoms, np.array(
        [np.diag([4.0, 0.0]), np.diag([0.0, 0.0])], dtype=complex))
    g = QuantumRandomVariable(space.atoms, np.array(
        [np.diag([2.0, 0.0]), np.diag([2.0, 0.0])], dtype=complex))
    cert = majorizes_s(f, g, space, n_samples=500)
    assert cert.verdict == "fails"
    s = cert.refuter
    assert linalg.is_psd(linalg.hermitian_part(s))
    assert np.isclose(np.trace(s).real, 1.0, atol=1e-8)
    fs = scalarize_classical(f, s, space)
    gs = scalarize_classical(g, s, space)
    assert not classical_majorizes(fs, gs)


def test_s_weaker_than_t_on_joe_verducci():
    space, f, g = joe_verducci_instance()
    assert majorizes_t(f, g, space).verdict == "fails"
    assert majorizes_s(f, g, space, n_samples=2000).verdict == "holds"


def test_implication_chain_malamud_and_joe_verducci():
    space, f, g = joe_verducci_instance()
    rep = implication_suite(f, g, space, n_samples=2000)
    assert (rep["b"].verdict, rep["t"].verdict, rep["s"].verdict) == (
        "fails", "fails", "holds")
    assert rep["chain_ok"]
    space, f, g = malamud_instance()
    rep = implication_suite(f, g, space, n_samples=2000)
    assert (rep["b"].verdict, rep["t"].verdict, rep["s"].verdict) == (
        "fails", "holds", "holds")
    assert rep["chain_ok"]


def test_implication_chain_on_random_pairs():
    rng = np.random.default_rng(6)
    for trial in range(25):
        m, d = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        space = FiniteMeasureSpace.uniform(m, 1.0)
        g = random_sa_qrv(rng, space.atoms, d)
        if trial % 2:
            f = apply_bistochastic(random_ds(rng, space), g)
        else:
            f = random_sa_qrv(rng, space.atoms, d)
        rep = implication_suite(f, g, space, n_samples=300)
        assert rep["chain_ok"]
        assert rep["s"].verdict != "flagged"


def test_majorizes_dispatch():
    space, f, g = joe_verducci_instance()
    assert majorizes(f, g, space, "B").verdict == "fails"
    with pytest.raises(ValueError):
        majorizes(f, g, space, "x")


# --- separation machinery ---------------------------------------------------------

def test_psi_phi_zero_functional():
    space = FiniteMeasureSpace.uniform(3, 1.0)
    rng = np.random.default_rng(7)
    h = random_sa_qrv(rng, space.atoms, 2)
    phi = SeparatingFunctional(space, np.zeros((3, 2, 2), dtype=complex))
    assert psi_phi(phi, h, space) == 0.0


def test_psi_phi_single_atom_is_plain_evaluation():
    space = FiniteMeasureSpace(["only"], [2.0])
    rng = np.random.default_rng(8)
    h = random_sa_qrv(rng, space.atoms, 2)
    W = random_sa_qrv(rng, space.atoms, 2).values
    phi = SeparatingFunctional(space, W)
    assert np.isclose(psi_phi(phi, h, space), np.real(phi(h.values)))


def test_psi_phi_two_atom_closed_form():
    # over B = [[b, 1-b], [1-b, b]] the objective is linear in b, so the
    # optimum is max(C00 + C11, C01 + C10)
    space = FiniteMeasureSpace.uniform(2, 1.0)
    rng = np.random.default_rng(9)
    h = random_sa_qrv(rng, space.atoms, 2)
    W = random_sa_qrv(rng, space.atoms, 2).values
    phi = SeparatingFunctional(space, W)
    C = np.einsum("i,iab,jba->ij", space.masses, W, h.values).real
    expected = max(C[0, 0] + C[1, 1], C[0, 1] + C[1, 0])
    assert np.isclose(psi_phi(phi, h, space), expected, atol=1e-10)


def test_psi_phi_uniform_assignment_matches_lp():
    from qrv.solver import LpOptimal, LpProblem, lp_solve

    rng = np.random.default_rng(10)
    space = FiniteMeasureSpace.uniform(3, 1.0)
    h = random_sa_qrv(rng, space.atoms, 2)
    W = random_sa_qrv(rng, space.atoms, 2).values
    phi = SeparatingFunctional(space, W)
    fast = psi_phi(phi, h, space)
    C = np.einsum("i,iab,jba->ij", space.masses, W, h.values).real
    m = 3
    rows, rhs = [], []
    for i in range(m):
        r = np.zeros(m * m)
        r[i * m:(i + 1) * m] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for j in range(m):
        r = np.zeros(m * m)
        r[j::m] = space.masses
        rows.append(r)
        rhs.append(space.masses[j])
    res = lp_solve(LpProblem(c=-C.ravel(), A=np.array(rows), b=np.array(rhs)))
    assert isinstance(res, LpOptimal)
    assert np.isclose(fast, -res.value, atol=1e-8)


def test_psi_phi_permutation_invariant():
    rng = np.random.default_rng(11)
    space = FiniteMeasureSpace.uniform(4, 1.0)
    h = random_sa_qrv(rng, space.atoms, 2)
    W = random_sa_qrv(rng, space.atoms, 2).values
    phi = SeparatingFunctional(space, W)
    base = psi_phi(phi, h, space)
    for _ in range(5):
        sigma = rng.permutation(4)
        permuted = QuantumRandomVariable(space.atoms, h.values[sigma])
        assert np.isclose(psi_phi(phi, permuted, space), base, atol=1e-9)


def test_komiya_positive_returns_none_and_inequalities_hold():
    rng = np.random.default_rng(12)
    space = FiniteMeasureSpace.uniform(3, 1.0)
    g = random_sa_qrv(rng, space.atoms, 2)
    f = apply_bistochastic(random_ds(rng, space), g)
    assert komiya_separate(f, g, space) is None
    for _ in range(50):
        W = random_sa_qrv(rng, space.atoms, 2).values
        phi = SeparatingFunctional(space, W)
        assert psi_phi(phi, f, space) <= psi_phi(phi, g, space) + 1e-8


def test_komiya_malamud_separation():
    space, f, g = malamud_instance()
    sep = komiya_separate(f, g, space)
    assert sep is not None
    assert sep.margin >= 1e-6
    assert np.isclose(sep.value_f - sep.value_psi_g, sep.margin)


def test_komiya_scalar_three_atom_margin():
    space = FiniteMeasureSpace.uniform(3, 1.0)
    f = QuantumRandomVariable(space.atoms,
                              np.array([[[2.0]], [[0.0]], [[1.0]]],
                                       dtype=complex))
    g = QuantumRandomVariable(space.atoms,
                              np.array([[[1.0]], [[1.0]], [[1.0]]],
                                       dtype=complex))
    sep = komiya_separate(f, g, space)
    assert sep is not None
    assert sep.margin >= (2.0 - 1.0) / 2.0


def test_sample_states_are_states():
    rng = np.random.default_rng(13)
    states = sample_states(3, 50, rng)
    for s in states:
        assert linalg.is_psd(linalg.hermitian_part(s))
        assert np.isclose(np.trace(s).real, 1.0, atol=1e-12)
