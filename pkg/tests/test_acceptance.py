"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance below is pinned, nothing is deferred.
"""

import time

import numpy as np

from qrv import linalg
from qrv.l1 import l1_seminorm, l1_upper_abs
from qrv.majorize import (komiya_separate, majorizes_b, majorizes_s,
                          majorizes_t, scalarize_classical)
from qrv.measure import classical_majorizes
from qrv.povm import QuantumRandomVariable, integrate, swap_multiplier_truncation
from qrv.suite import (birkhoff_suite, equivalence_suite, komiya_suite,
                       lemma_suite, rho_invariance_suite)
from qrv.worked_examples import (joe_verducci_instance, malamud_instance,
                                 nine_eleven_instance)


def report(criterion, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion} failed: {detail}"


def test_criterion_1_nine_vs_eleven_seminorm():
    start = time.monotonic()
    nu, f = nine_eleven_instance()
    int_norm = linalg.operator_norm(integrate(f, nu))
    abs_norm = l1_upper_abs(f, nu)
    cert = l1_seminorm(f, nu, tol=1e-6)
    verified = cert.verify(f, nu)["ok"]
    # the explicit decomposition f1(1) = [[4,-2],[-2,1]], f2(1) = [[1,-2],[-2,4]]
    f1_1 = np.array([[4.0, -2.0], [-2.0, 1.0]])
    f2_1 = np.array([[1.0, -2.0], [-2.0, 4.0]])
    decomposition_feasible = (
        linalg.is_psd(f1_1) and linalg.is_psd(f2_1)
        and np.allclose(f1_1 - f2_1, np.diag([3.0, -3.0]))
        and np.isclose(linalg.operator_norm(f.values[0] + f1_1 + f2_1), 9.0)
    )
    elapsed = time.monotonic() - start
    ok = (abs(int_norm - 9.0) <= 1e-9 and abs(abs_norm - 11.0) <= 1e-9
          and abs(cert.value - 9.0) <= 1e-6 and verified
          and decomposition_feasible and elapsed < 1.0)
    report("criterion-1 nine-vs-eleven",
           ok, f"int={int_norm:.12f} abs={abs_norm:.12f} "
               f"seminorm={cert.value:.9f} gap={cert.gap:.2e} "
               f"runtime={elapsed:.2f}s")


def test_criterion_2_triangle_counterexample():
    A = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    B = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    sum_norm = linalg.operator_norm(A + B)
    abs_sum = linalg.operator_norm(
        linalg.psd_sqrt(A.conj().T @ A) + linalg.psd_sqrt(B.conj().T @ B))
    ok = (abs(sum_norm - np.sqrt(2.0)) <= 1e-12
          and abs(abs_sum - 1.0) <= 1e-12
          and 2 * sum_norm > 2 * abs_sum)
    report("criterion-2 triangle-counterexample", ok,
           f"||A+B||={sum_norm:.15f} |||A|+|B|||={abs_sum:.15f}")


def test_criterion_3_joe_verducci():
    start = time.monotonic()
    space, f, g = joe_verducci_instance()
    cs = majorizes_s(f, g, space, n_samples=10_000, seed=42)
    ct = majorizes_t(f, g, space)
    cb = majorizes_b(f, g, space)
    refuter_ok = False
    if ct.refuter is not None:
        ft = scalarize_classical(f, ct.refuter, space)
        gt = scalarize_classical(g, ct.refuter, space)
        refuter_ok = not classical_majorizes(ft, gt)
    elapsed = time.monotonic() - start
    ok = (cs.verdict == "holds" and cs.sampler["violations"] == 0
          and ct.verdict == "fails" and refuter_ok and ct.margin >= 0.9
          and cb.verdict == "fails" and elapsed < 5.0)
    report("criterion-3 joe-verducci", ok,
           f"s={cs.verdict} (sampled {cs.sampler['n']}) t={ct.verdict} "
           f"margin={ct.margin:.4f} b={cb.verdict} runtime={elapsed:.2f}s")


def test_criterion_4_malamud():
    space, f, g = malamud_instance()
    ct = majorizes_t(f, g, space)
    containment_ok = (ct.verdict == "holds"
                      and len(ct.containment) == 2 ** 4 - 2
                      and sorted({rec["k"] for rec in ct.containment}) == [1, 2, 3])
    cb = majorizes_b(f, g, space)
    farkas_ok = False
    if cb.farkas is not None:
        y, A, b = cb.farkas["y"], cb.farkas["A"], cb.farkas["b"]
        farkas_ok = ((A.T @ y).max() <= 1e-8 * (1 + np.abs(A).max())
                     and b @ y > 1e-8)
    sep = komiya_separate(f, g, space)
    sep_ok = sep is not None and sep.margin >= 1e-6
    ok = containment_ok and cb.verdict == "fails" and farkas_ok and sep_ok
    report("criterion-4 malamud", ok,
           f"t={ct.verdict} ({len(ct.containment)} containments) "
           f"b={cb.verdict} farkas_margin={cb.margin:.4f} "
           f"separation_margin={sep.margin if sep else float('nan'):.4f}")


def test_criterion_5_lemma_suite():
    start = time.monotonic()
    result = lemma_suite(seed=42, trials=200, d_max=4, m_max=6, tol=1e-6)
    elapsed = time.monotonic() - start
    worst = max(v["worst_rel"] for v in result["checks"].values())
    ok = result["total_violations"] == 0 and elapsed < 180.0
    report("criterion-5 lemma-suite", ok,
           f"{result['trials']} trials, {len(result['checks'])} checks, "
           f"violations={result['total_violations']} worst_rel={worst:.2e} "
           f"runtime={elapsed:.1f}s")


def test_criterion_6_discrete_equivalence():
    result = equivalence_suite(seed=42, trials=200, m_max=8)
    ok = result["total_violations"] == 0
    report("criterion-6 theorem-equivalence", ok,
           f"200 pairs, disagreements={result['total_violations']}")


def test_criterion_7_birkhoff():
    result = birkhoff_suite(seed=42, trials=50, m=5, n_mix=10)
    ok = result["total_violations"] == 0
    report("criterion-7 birkhoff", ok,
           f"50 matrices, violations={result['total_violations']}")


def test_criterion_8_komiya_forward_and_converse():
    result = komiya_suite(seed=42, positives=100, negatives=50,
                          functionals=50, m=4, d=2)
    ok = result["total_violations"] == 0
    n_forward = result["checks"]["forward_psi_inequality"]["n"]
    report("criterion-8 komiya", ok,
           f"{n_forward} forward inequalities, "
           f"violations={result['total_violations']}")


def test_criterion_9_rho_invariance():
    result = rho_invariance_suite(seed=42, trials=20, n_rho=20)
    ok = result["total_violations"] == 0
    report("criterion-9 rho-invariance", ok,
           f"20 instances x 20 states, violations={result['total_violations']}")


def test_criterion_10_divergence_trends():
    values = []
    f_norms = []
    for depth in range(2, 13):
        nu, f, u = swap_multiplier_truncation(depth)
        conj = QuantumRandomVariable(
            f.atoms, np.array([u @ A @ u for A in f.values]))
        values.append(l1_seminorm(conj, nu, tol=1e-6).value)
        f_norms.append(l1_seminorm(f, nu, tol=1e-6).value)
    increasing = all(b > a for a, b in zip(values, values[1:]))
    bounded = max(f_norms) <= 1.0 + np.sqrt(2.0) + 1e-9
    ok = increasing and values[-1] > 10.0 and bounded
    report("criterion-10 divergence-trends", ok,
           f"conjugated norms {values[0]:.3f}..{values[-1]:.3f} increasing, "
           f"max ||f||_1={max(f_norms):.4f} <= 1+sqrt(2)")
