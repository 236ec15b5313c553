"""Seeded random-instance generators and the property suites.

Every suite derives one child generator per trial from ``(seed, trial)``
so trials are independent and the whole report is reproducible (and, if
ever needed, shardable by trial index).  Inequalities that involve a
certified seminorm value are tested with the certificate's own gap added
to the allowed slack: the certified value brackets the true seminorm, so
a reported violation is a genuine one.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .l1 import (SeparatingFunctional, bracket, bracket_separation_witness,
                 l1_lower_states, l1_seminorm, mult_operator,
                 mult_operator_conjugated, mult_scalar)
from .majorize import apply_bistochastic, komiya_separate, majorizes_b, psi_phi
from .measure import (BistochasticMatrix, ClassicalFunction,
                      FiniteMeasureSpace, bistochastic_witness,
                      birkhoff_decompose, classical_majorizes,
                      convex_function_test)
from .povm import Povm, QuantumRandomVariable, integrate, linf_norm

REL_SLACK = 1e-7


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def random_complex_matrix(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_hermitian(rng, d):
    G = random_complex_matrix(rng, d)
    return linalg.hermitian_part(G)


def random_psd(rng, d, rank=None):
    rank = rank or d
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    return linalg.hermitian_part(G @ G.conj().T)


def random_state(rng, d, full_rank=True):
    rho = random_psd(rng, d)
    if full_rank:
        rho = rho + 0.05 * np.eye(d)
    return linalg.hermitian_part(rho / np.trace(rho).real)


def random_povm(rng, m, d):
    """Random full-rank effects (a POVM need not be normalized)."""
    effects = np.array([random_psd(rng, d) + 0.05 * np.eye(d)
                        for _ in range(m)])
    return Povm([str(i) for i in range(m)], effects / d)


def random_qrv(rng, m, d, self_adjoint=False):
    vals = np.array([random_hermitian(rng, d) if self_adjoint
                     else random_complex_matrix(rng, d) for _ in range(m)])
    return QuantumRandomVariable([str(i) for i in range(m)], vals)


def random_uniform_bistochastic(rng, space, n_mix=6):
    m = space.m
    W = np.zeros((m, m))
    for w in rng.dirichlet(np.ones(n_mix)):
        P = np.zeros((m, m))
        P[np.arange(m), rng.permutation(m)] = 1.0
        W += w * P
    return BistochasticMatrix(space, W)


def random_functional(rng, space, d):
    W = np.array([random_hermitian(rng, d) for _ in range(space.m)])
    return SeparatingFunctional(space, W)


# ---------------------------------------------------------------------------
# reporting plumbing
# ---------------------------------------------------------------------------

class _Stats:
    def __init__(self):
        self.checks = {}

    def record(self, name, violation, scale):
        """violation <= 0 passes; anything above REL_SLACK * scale counts."""
        rel = float(violation) / float(scale)
        st = self.checks.setdefault(
            name, {"n": 0, "violations": 0, "worst_rel": -np.inf})
        st["n"] += 1
        if rel > REL_SLACK:
            st["violations"] += 1
        st["worst_rel"] = max(st["worst_rel"], rel)

    def equal(self, name, a, b, scale, extra_slack=0.0):
        self.record(name, abs(a - b) - extra_slack, scale)

    def leq(self, name, lhs, rhs, scale, extra_slack=0.0):
        self.record(name, lhs - rhs - extra_slack, scale)

    def report(self, **header):
        total = sum(st["violations"] for st in self.checks.values())
        checks = {
            name: {"n": st["n"], "violations": st["violations"],
                   "worst_rel": (None if st["worst_rel"] == -np.inf
                                 else st["worst_rel"])}
            for name, st in sorted(self.checks.items())
        }
        return dict(header, checks=checks, total_violations=total)


def _trial_rng(seed, trial):
    return np.random.default_rng([seed, trial])


# ---------------------------------------------------------------------------
# the lemma suite (norm and multiplier inequalities)
# ---------------------------------------------------------------------------

def lemma_suite(seed=42, trials=200, d_max=4, m_max=6, tol=1e-6):
    """Random-instance checks of the seminorm, bracket, multiplier and
    bistochastic inequalities.  Zero violations expected."""
    stats = _Stats()
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        d = int(rng.integers(2, d_max + 1))
        m = int(rng.integers(2, m_max + 1))
        _lemma_trial_general(stats, rng, m, d, tol)
        _lemma_trial_classical(stats, rng, m, d, tol)
    return stats.report(suite="lemmas", seed=seed, trials=trials,
                        d_max=d_max, m_max=m_max, tol=tol)


def _lemma_trial_general(stats, rng, m, d, tol):
    """Checks against a random POVM with full-rank effects."""
    nu = random_povm(rng, m, d)
    deriv = nu.derivative()
    w = deriv.masses
    f = random_qrv(rng, m, d)
    f_sa = random_qrv(rng, m, d, self_adjoint=True)
    norm_scale = 1.0 + max(linalg.operator_norm(A) for A in f.values)

    cert = l1_seminorm(f, nu, tol=tol)
    cert_sa = l1_seminorm(f_sa, nu, tol=tol)

    # integral bound through the derivative (general form), then both
    # specializations of the comparison argument
    int_norm = linalg.operator_norm(integrate(f, nu))
    rhs = sum(linalg.operator_norm(A) * linalg.operator_norm(D) * wx
              for A, D, wx in zip(f.values, deriv.matrices, w))
    stats.leq("integral_vs_derivative_sum", int_norm, rhs, 1.0 + rhs)

    sa_int = linalg.operator_norm(integrate(f_sa, nu))
    norms_fn = QuantumRandomVariable(f.atoms, np.array(
        [linalg.operator_norm(A) * np.eye(d, dtype=complex)
         for A in f_sa.values]))
    bound_sa = linalg.operator_norm(integrate(norms_fn, nu))
    stats.leq("selfadjoint_integral_vs_norm_integral", sa_int, bound_sa,
              1.0 + bound_sa)

    # entrywise sandwich in dimension d
    abs_entry_fn = QuantumRandomVariable(f.atoms, np.array(
        [np.abs(A).sum() * np.eye(d, dtype=complex) for A in f.values]))
    mid = linalg.operator_norm(integrate(abs_entry_fn, nu))
    norms_f = QuantumRandomVariable(f.atoms, np.array(
        [linalg.operator_norm(A) * np.eye(d, dtype=complex) for A in f.values]))
    lo = linalg.operator_norm(integrate(norms_f, nu))
    stats.leq("entrywise_sandwich_lower", lo, mid, 1.0 + mid)
    stats.leq("entrywise_sandwich_upper", mid, d * d * lo, 1.0 + d * d * lo)

    # scalarized lower bound: int |f_s| dnu_rho <= ||f||_1
    states = [random_state(rng, d) for _ in range(4)]
    states.append(np.eye(d, dtype=complex) / d)
    lower = l1_lower_states(f, nu, states)
    stats.leq("state_scalarization_lower_bound", lower, cert.value,
              1.0 + cert.value, extra_slack=cert.gap)

    # finite comparability chain for self-adjoint f (invertible derivative)
    abs_int = linalg.operator_norm(integrate(f_sa.pointwise_abs(), nu))
    stats.leq("chain_int_leq_seminorm", sa_int, cert_sa.value,
              1.0 + cert_sa.value, extra_slack=cert_sa.gap)
    stats.leq("chain_seminorm_leq_absint", cert_sa.value, abs_int,
              1.0 + abs_int, extra_slack=cert_sa.gap)
    stats.leq("chain_absint_leq_normint", abs_int, bound_sa, 1.0 + bound_sa)
    if deriv.invertible:
        cond = deriv.sup_norm() * deriv.inv_sup_norm()
        stats.leq("chain_normint_leq_conditioned_seminorm", bound_sa,
                  d * cond * cert_sa.value, 1.0 + d * cond * cert_sa.value,
                  extra_slack=d * cond * cert_sa.gap)

    # seminorm axioms
    cert_adj = l1_seminorm(f.adjoint(), nu, tol=tol)
    stats.equal("adjoint_invariance", cert.value, cert_adj.value,
                1.0 + cert.value, extra_slack=cert.gap + cert_adj.gap)
    # the functional is R-homogeneous and invariant under multiplication
    # by i (the scalar restriction is |Re| + |Im|, not the modulus)
    c = float(rng.normal())
    cert_c = l1_seminorm(c * f, nu, tol=tol)
    stats.equal("real_homogeneity", cert_c.value, abs(c) * cert.value,
                1.0 + cert_c.value,
                extra_slack=cert_c.gap + abs(c) * cert.gap)
    cert_i = l1_seminorm(1j * f, nu, tol=tol)
    stats.equal("quarter_turn_invariance", cert_i.value, cert.value,
                1.0 + cert.value, extra_slack=cert_i.gap + cert.gap)
    h = random_qrv(rng, m, d)
    cert_h = l1_seminorm(h, nu, tol=tol)
    cert_sum = l1_seminorm(f + h, nu, tol=tol)
    stats.leq("triangle_inequality", cert_sum.dual_lower_bound,
              cert.value + cert_h.value, 1.0 + cert.value + cert_h.value)

    # essential boundedness embedding: ||g||_1 <= 2 ||g||_inf ||nu(X)||
    g_b = random_qrv(rng, m, d)
    cert_g = l1_seminorm(g_b, nu, tol=tol)
    emb = 2 * linf_norm(g_b, w) * linalg.operator_norm(nu.total())
    stats.leq("linf_embedding", cert_g.dual_lower_bound, emb, 1.0 + emb)

    # scalar multiplier and bracket bounds
    gs = ClassicalFunction(FiniteMeasureSpace(nu.atoms, w),
                           rng.normal(size=m) + 1j * rng.normal(size=m))
    g_inf = float(np.abs(gs.values).max())
    cert_fg = l1_seminorm(mult_scalar(f, gs), nu, tol=tol)
    stats.leq("scalar_multiplier_bound", cert_fg.dual_lower_bound,
              2 * cert.value * g_inf, 1.0 + 2 * cert.value * g_inf,
              extra_slack=2 * cert.gap * g_inf)
    br = linalg.operator_norm(bracket(f, gs, nu))
    stats.leq("bracket_cauchy_schwarz", br, 4 * cert.value * g_inf,
              1.0 + 4 * cert.value * g_inf, extra_slack=4 * cert.gap * g_inf)

    # conjugated operator multiplier (general nu, invertible derivative)
    if deriv.invertible:
        A = random_complex_matrix(rng, d)
        fA = mult_operator_conjugated(A, f, nu)
        cert_fA = l1_seminorm(fA, nu, tol=tol)
        bound = 4 * (1 + linalg.operator_norm(A) ** 2) * cert.value
        stats.leq("conjugated_multiplier_bound", cert_fA.dual_lower_bound,
                  bound, 1.0 + bound,
                  extra_slack=4 * (1 + linalg.operator_norm(A) ** 2) * cert.gap)

        # conjugation identity: ||f||_{1,nu} = ||D^1/2 f D^1/2||_{1,nu_rho I}
        sandwiched = QuantumRandomVariable(f.atoms, np.array(
            [R @ A2 @ R for R, A2 in zip(deriv.sqrts, f.values)]))
        nu_classical = Povm.classical(FiniteMeasureSpace(nu.atoms, w), d)
        cert_cl = l1_seminorm(sandwiched, nu_classical, tol=tol)
        stats.equal("conjugation_identity", cert.value, cert_cl.value,
                    1.0 + cert.value, extra_slack=cert.gap + cert_cl.gap)

    # positivity detection and bracket separation
    if cert.value > 10 * tol * norm_scale:
        witness = bracket_separation_witness(f, nu)
        found = witness is not None and abs(witness[2]) > 0
        stats.record("bracket_separating_family", 0.0 if found else 1.0, 1.0)


def _lemma_trial_classical(stats, rng, m, d, tol):
    """Checks needing the classical context nu = mu I."""
    space = FiniteMeasureSpace.uniform(m, float(rng.uniform(0.5, 2.0)))
    nu = Povm.classical(space, d)
    f = random_qrv(rng, m, d)
    cert = l1_seminorm(f, nu, tol=tol)

    # classical-measure form of the integral bound
    int_norm = linalg.operator_norm(integrate(f, nu))
    rhs = sum(linalg.operator_norm(A) * mu
              for A, mu in zip(f.values, space.masses))
    stats.leq("integral_vs_classical_sum", int_norm, rhs, 1.0 + rhs)

    # plain operator multiplier bound for nu = mu I
    A = random_complex_matrix(rng, d)
    bound = 4 * (1 + linalg.operator_norm(A) ** 2) * cert.value
    for side in ("left", "right"):
        cert_Af = l1_seminorm(mult_operator(A, f, side), nu, tol=tol)
        stats.leq(f"operator_multiplier_bound_{side}",
                  cert_Af.dual_lower_bound, bound, 1.0 + bound,
                  extra_slack=4 * (1 + linalg.operator_norm(A) ** 2) * cert.gap)

    # bistochastic operators: self-adjointness, contractivity, modularity
    B = random_uniform_bistochastic(rng, space)
    Bf = apply_bistochastic(B, f)
    adj_err = max(linalg.operator_norm(X) for X in
                  (apply_bistochastic(B, f.adjoint()) - Bf.adjoint()).values)
    stats.record("bistochastic_selfadjoint", adj_err - 1e-10, 1.0)

    cert_Bf = l1_seminorm(Bf, nu, tol=tol)
    stats.leq("bistochastic_1_contractive", cert_Bf.dual_lower_bound,
              cert.value, 1.0 + cert.value, extra_slack=cert.gap)

    f_sa = random_qrv(rng, m, d, self_adjoint=True)
    Bf_sa = apply_bistochastic(B, f_sa)
    stats.leq("bistochastic_inf_contractive", linf_norm(Bf_sa),
              linf_norm(f_sa), 1.0 + linf_norm(f_sa))

    # unitality and integral preservation of the entrywise action
    ident = QuantumRandomVariable.constant(space.atoms, np.eye(d, dtype=complex))
    unital_err = max(linalg.operator_norm(X) for X in
                     (apply_bistochastic(B, ident) - ident).values)
    stats.record("bistochastic_unital", unital_err - 1e-10, 1.0)
    pres_err = linalg.operator_norm(integrate(Bf, nu) - integrate(f, nu))
    stats.record("bistochastic_integral_preserving", pres_err - 1e-9,
                 1.0 + linalg.operator_norm(integrate(f, nu)))

    # bracket modularity <B(hA), gI> = <B(h), g> A
    h = ClassicalFunction(space, rng.normal(size=m) + 1j * rng.normal(size=m))
    A2 = random_complex_matrix(rng, d)
    g2 = ClassicalFunction(space, rng.normal(size=m) + 1j * rng.normal(size=m))
    hA = QuantumRandomVariable(space.atoms, h.values[:, None, None] * A2)
    lhs = bracket(apply_bistochastic(B, hA), g2, nu)
    Bh = B.apply(h.values)
    scalar = complex(np.sum(Bh * g2.values * space.masses))
    rhs_mat = scalar * A2
    stats.record("bracket_modularity",
                 linalg.operator_norm(lhs - rhs_mat) - 1e-8,
                 1.0 + linalg.operator_norm(rhs_mat))


# ---------------------------------------------------------------------------
# discrete majorization equivalence (classical theorem at finite scale)
# ---------------------------------------------------------------------------

def equivalence_suite(seed=42, trials=200, m_max=8):
    """Partial-sum check == LP witness == hinge-family test, no disagreements."""
    stats = _Stats()
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        m = int(rng.integers(2, m_max + 1))
        space = FiniteMeasureSpace.uniform(m, 1.0)
        g = ClassicalFunction(space, rng.normal(size=m) * 3.0)
        mode = trial % 3
        if mode == 0:
            f = ClassicalFunction(space, rng.normal(size=m) * 3.0)
        elif mode == 1:
            B = random_uniform_bistochastic(rng, space)
            f = ClassicalFunction(space, B.apply(g.values))
        else:
            v = rng.normal(size=m) * 3.0
            v += (g.values.real.mean() - v.mean())  # equal integrals
            f = ClassicalFunction(space, v)
        by_sums = classical_majorizes(f, g)
        by_lp = isinstance(bistochastic_witness(f, g), BistochasticMatrix)
        by_hinge = convex_function_test(f, g)
        agree = by_sums == by_lp == by_hinge
        stats.record("three_way_agreement", 0.0 if agree else 1.0, 1.0)
        if mode == 1:
            stats.record("constructed_positive_detected",
                         0.0 if by_sums else 1.0, 1.0)
    return stats.report(suite="equivalence", seed=seed, trials=trials,
                        m_max=m_max)


def birkhoff_suite(seed=42, trials=50, m=5, n_mix=10):
    """Random doubly stochastic matrices decompose and reconstruct."""
    stats = _Stats()
    max_terms = (m - 1) ** 2 + 1
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        space = FiniteMeasureSpace.uniform(m, 1.0)
        B = random_uniform_bistochastic(rng, space, n_mix=n_mix)
        terms = birkhoff_decompose(B)
        recon = np.zeros((m, m))
        for wgt, perm in terms:
            recon[np.arange(m), perm] += wgt
        stats.record("term_count_bound", len(terms) - max_terms, 1.0)
        stats.record("reconstruction",
                     float(np.abs(recon - B.matrix).max()) - 1e-8, 1.0)
        stats.equal("weight_sum", sum(wg for wg, _ in terms), 1.0, 1.0,
                    extra_slack=1e-9)
    return stats.report(suite="birkhoff", seed=seed, trials=trials, m=m)


def komiya_suite(seed=42, positives=100, negatives=50, functionals=50,
                 m=4, d=2):
    """Forward and converse of the separation theorem on random instances."""
    stats = _Stats()
    space = FiniteMeasureSpace.uniform(m, 1.0)
    for trial in range(positives):
        rng = _trial_rng(seed, trial)
        g = random_qrv(rng, m, d, self_adjoint=True)
        B = random_uniform_bistochastic(rng, space)
        f = apply_bistochastic(B, g)
        for j in range(functionals):
            phi = random_functional(_trial_rng(seed, 10_000 + trial * 1000 + j),
                                    space, d)
            vf = psi_phi(phi, f, space)
            vg = psi_phi(phi, g, space)
            stats.leq("forward_psi_inequality", vf, vg, 1.0 + abs(vg),
                      extra_slack=1e-8)
        stats.record("constructed_positive_has_witness",
                     0.0 if majorizes_b(f, g, space).holds else 1.0, 1.0)
    found = 0
    for trial in range(negatives):
        rng = _trial_rng(seed, 500_000 + trial)
        g = random_qrv(rng, m, d, self_adjoint=True)
        f = random_qrv(rng, m, d, self_adjoint=True)
        if majorizes_b(f, g, space).holds:
            continue
        sep = komiya_separate(f, g, space)
        ok = sep is not None and sep.margin > 0
        found += 1
        stats.record("converse_separation_found", 0.0 if ok else 1.0, 1.0)
    stats.record("negative_instances_generated",
                 1.0 if found == 0 else 0.0, 1.0)
    return stats.report(suite="komiya", seed=seed, positives=positives,
                        negatives=negatives, functionals=functionals)


def rho_invariance_suite(seed=42, trials=20, n_rho=20, d_max=4, m_max=6):
    """POVM integration does not depend on the chosen full-rank state."""
    stats = _Stats()
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        d = int(rng.integers(2, d_max + 1))
        m = int(rng.integers(2, m_max + 1))
        nu = random_povm(rng, m, d)
        f = random_qrv(rng, m, d)
        base = integrate(f, nu)
        scale = 1.0 + linalg.operator_norm(base)
        for _ in range(n_rho):
            rho = random_state(rng, d)
            other = integrate(f, nu, rho)
            stats.record("integration_rho_invariance",
                         linalg.operator_norm(other - base) - 1e-9, scale)
    return stats.report(suite="rho-invariance", seed=seed, trials=trials,
                        n_rho=n_rho)


def property_suite(seed=42, trials=200):
    """The full battery; deterministic given the seed."""
    scaled = max(1, trials)
    reports = [
        lemma_suite(seed=seed, trials=scaled),
        equivalence_suite(seed=seed, trials=scaled),
        birkhoff_suite(seed=seed, trials=max(1, scaled // 4)),
        komiya_suite(seed=seed, positives=max(1, scaled // 2),
                     negatives=max(1, scaled // 4),
                     functionals=max(1, scaled // 4)),
        rho_invariance_suite(seed=seed, trials=max(1, scaled // 10)),
    ]
    total = sum(r["total_violations"] for r in reports)
    return {"seed": seed, "trials": trials,
            "suites": {r["suite"]: r for r in reports},
            "total_violations": total}
