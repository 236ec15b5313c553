"""Canonical worked examples with their expected values.

Each example returns a list of named checks ``(name, got, expect, tol)``
evaluated against known closed-form answers: the 9-vs-11 seminorm
instance, the triangle-inequality counterexample for the pointwise
absolute value, the Joe-Verducci and Malamud majorization pairs, and the
two divergence trends obtained by truncating the infinite-dimensional
phenomena at finite depth.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .l1 import l1_seminorm, l1_upper_abs
from .majorize import komiya_separate, majorizes_b, majorizes_s, majorizes_t
from .measure import FiniteMeasureSpace
from .povm import (Povm, QuantumRandomVariable, dyadic_identity_truncation,
                   integrate, swap_multiplier_truncation)


def nine_eleven_instance():
    """Two atoms, effects I_2, f(0) = [[4,4],[4,4]], f(1) = diag(3,-3)."""
    atoms = ("0", "1")
    nu = Povm(atoms, np.array([np.eye(2), np.eye(2)], dtype=complex))
    f = QuantumRandomVariable(atoms, np.array(
        [[[4.0, 4.0], [4.0, 4.0]], [[3.0, 0.0], [0.0, -3.0]]], dtype=complex))
    return nu, f


def joe_verducci_instance():
    """Two uniform atoms; f = {diag(1,4), diag(3,2)}, g = {diag(1,2), diag(3,4)}."""
    space = FiniteMeasureSpace.uniform(2, 1.0)
    f = QuantumRandomVariable(space.atoms, np.array(
        [np.diag([1.0, 4.0]), np.diag([3.0, 2.0])], dtype=complex))
    g = QuantumRandomVariable(space.atoms, np.array(
        [np.diag([1.0, 2.0]), np.diag([3.0, 4.0])], dtype=complex))
    return space, f, g


def malamud_instance():
    """Four uniform atoms; f majorized in the t-order by g but with no witness."""
    space = FiniteMeasureSpace.uniform(4, 1.0)
    f = QuantumRandomVariable(space.atoms, np.array(
        [np.diag([12.0, 12.0]), np.diag([12.0, 12.0]),
         np.diag([5.0, 3.0]), np.diag([3.0, 5.0])], dtype=complex))
    g = QuantumRandomVariable(space.atoms, np.array(
        [np.diag([8.0, 16.0]), np.diag([16.0, 8.0]),
         np.diag([0.0, 0.0]), np.diag([8.0, 8.0])], dtype=complex))
    return space, f, g


def _check(name, got, expect, tol):
    if isinstance(expect, bool):
        ok = bool(got) == expect
    else:
        ok = abs(float(got) - float(expect)) <= tol
    return {"name": name, "got": got, "expect": expect, "tol": tol,
            "pass": bool(ok)}


def example_nine_eleven():
    nu, f = nine_eleven_instance()
    checks = []
    total = integrate(f, nu)
    checks.append(_check("integral_norm", linalg.operator_norm(total), 9.0, 1e-9))
    checks.append(_check("abs_integral_norm", l1_upper_abs(f, nu), 11.0, 1e-9))
    cert = l1_seminorm(f, nu, tol=1e-6)
    checks.append(_check("seminorm_value", cert.value, 9.0, 1e-6))
    checks.append(_check("certificate_ok", cert.verify(f, nu)["ok"], True, 0))
    # the explicit decomposition with f2(1) = [[1,-2],[-2,4]] is feasible
    # and achieves the optimum
    p1 = np.array([[1.0, -2.0], [-2.0, 4.0]], dtype=complex)
    R1 = np.diag([3.0, -3.0]).astype(complex)
    feasible = linalg.is_psd(p1) and linalg.is_psd(p1 + R1)
    achieved = linalg.operator_norm(
        f.values[0] + (R1 + 2 * p1)) if feasible else np.inf
    checks.append(_check("explicit_decomposition_feasible", feasible, True, 0))
    checks.append(_check("explicit_decomposition_value", achieved, 9.0, 1e-12))
    return checks


def example_triangle_abs():
    A = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    B = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    absA = linalg.positive_parts(linalg.hermitian_part(A))[2]
    # |B| = sqrt(B* B)
    absB = linalg.psd_sqrt(B.conj().T @ B)
    checks = [
        _check("norm_sum", linalg.operator_norm(A + B), np.sqrt(2.0), 1e-12),
        _check("norm_abs_sum", linalg.operator_norm(absA + absB), 1.0, 1e-12),
        _check("triangle_violated",
               linalg.operator_norm(A + B) > linalg.operator_norm(absA + absB),
               True, 0),
    ]
    return checks


def example_joe_verducci(n_samples=10_000, seed=42):
    space, f, g = joe_verducci_instance()
    cs = majorizes_s(f, g, space, n_samples=n_samples, seed=seed)
    ct = majorizes_t(f, g, space)
    cb = majorizes_b(f, g, space)
    checks = [
        _check("order_s_holds", cs.verdict == "holds", True, 0),
        _check("sampler_violations", (cs.sampler or {}).get("violations", -1), 0, 0),
        _check("order_t_fails", ct.verdict == "fails", True, 0),
        _check("order_t_margin_at_least", ct.margin >= 0.9, True, 0),
        _check("order_b_fails", cb.verdict == "fails", True, 0),
    ]
    if ct.refuter is not None:
        # the canonical refuting direction is diag(1,-1)/sqrt(2) up to sign
        target = np.diag([1.0, -1.0]) / np.sqrt(2.0)
        dist = min(linalg.operator_norm(ct.refuter - target),
                   linalg.operator_norm(ct.refuter + target))
        checks.append(_check("refuter_direction", dist, 0.0, 1e-6))
    return checks


def example_malamud():
    space, f, g = malamud_instance()
    ct = majorizes_t(f, g, space)
    cb = majorizes_b(f, g, space)
    checks = [
        _check("order_t_holds", ct.verdict == "holds", True, 0),
        _check("containment_count", len(ct.containment), 14, 0),
        _check("order_b_fails", cb.verdict == "fails", True, 0),
    ]
    if cb.farkas is not None:
        y, A, b = cb.farkas["y"], cb.farkas["A"], cb.farkas["b"]
        cone_resid = float((A.T @ y).max(initial=0.0))
        checks.append(_check("farkas_cone_residual", cone_resid, 0.0, 1e-8))
        checks.append(_check("farkas_separation", float(b @ y) > 1e-8, True, 0))
    sep = komiya_separate(f, g, space)
    checks.append(_check("separation_found", sep is not None, True, 0))
    if sep is not None:
        checks.append(_check("separation_margin", sep.margin >= 1e-6, True, 0))
    return checks


def example_dyadic_trace(depth=8):
    checks = []
    prev = None
    for k in range(2, depth + 1):
        nu, f = dyadic_identity_truncation(k)
        total = integrate(f, nu)
        bound = linalg.operator_norm(integrate(
            QuantumRandomVariable(f.atoms, np.array(
                [linalg.operator_norm(A) * np.eye(k, dtype=complex)
                 for A in f.values])), nu))
        if k == depth:
            checks.append(_check("integral_is_identity",
                                 linalg.operator_norm(total - np.eye(k)),
                                 0.0, 1e-12))
        checks.append(_check(f"norm_bound_depth_{k}", bound, float(k), 1e-9))
        if prev is not None and bound <= prev:
            checks.append(_check(f"strictly_increasing_at_{k}", False, True, 0))
        prev = bound
    return checks


def example_swap_multiplier(max_depth=12):
    checks = []
    prev = None
    const_bound = 1.0 + np.sqrt(2.0) + 1e-9
    for k in range(2, max_depth + 1):
        nu, f, u = swap_multiplier_truncation(k)
        cert_f = l1_seminorm(f, nu, tol=1e-6)
        conj = QuantumRandomVariable(f.atoms, np.array(
            [u @ A @ u for A in f.values]))
        cert_c = l1_seminorm(conj, nu, tol=1e-6)
        if cert_f.value > const_bound:
            checks.append(_check(f"f_norm_bounded_at_{k}", cert_f.value,
                                 0.0, const_bound))
        if prev is not None and cert_c.value <= prev + 1e-9:
            checks.append(_check(f"conjugated_increasing_at_{k}", False, True, 0))
        checks.append(_check(f"conjugated_norm_depth_{k}", cert_c.value,
                             float(k), 1e-6))
        prev = cert_c.value
    checks.append(_check("diverges_past_ten", prev > 10.0, True, 0))
    return checks


EXAMPLES = {
    "nine-eleven": example_nine_eleven,
    "triangle-abs": example_triangle_abs,
    "joe-verducci": example_joe_verducci,
    "malamud": example_malamud,
    "dyadic-trace": example_dyadic_trace,
    "swap-multiplier": example_swap_multiplier,
}


def run_examples(only=None):
    """Run the named examples (all by default); returns (report, all_pass)."""
    names = [only] if only else list(EXAMPLES)
    report = {}
    all_pass = True
    for name in names:
        if name not in EXAMPLES:
            raise KeyError(f"unknown example {name!r}; "
                           f"known: {', '.join(sorted(EXAMPLES))}")
        checks = EXAMPLES[name]()
        ok = all(c["pass"] for c in checks)
        all_pass = all_pass and ok
        report[name] = {"pass": ok, "checks": checks}
    return report, all_pass
