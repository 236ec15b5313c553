"""Independent re-verification of serialized certificate documents.

Every checker recomputes the claimed facts from the problem data embedded
in the document using eigenvalue computations and explicit arithmetic;
no optimizer is re-run except for the separation margin, which needs one
assignment/LP evaluation of the sup over bistochastic operators.
"""

from __future__ import annotations

import numpy as np

from . import linalg, serialize
from .errors import QrvError
from .l1 import L1Certificate, SeparatingFunctional
from .majorize import (_entrywise_lp, apply_bistochastic, psi_phi,
                       scalarize_classical)
from .measure import BistochasticMatrix, classical_majorizes
from .povm import integrate

WITNESS_TOL = 1e-8


def _report(ok, kind, **details):
    return dict({"ok": bool(ok), "kind": kind}, **details)


def _verify_l1(doc):
    nu = serialize.povm_from_json(doc["problem"]["povm"])
    f = serialize.qrv_from_json(doc["problem"]["qrv"])
    res = doc["result"]
    cert = L1Certificate(
        value=float(res["value"]),
        decomposition=tuple(
            np.array([serialize.json_to_matrix(A) for A in part])
            for part in res["decomposition"]
        ),
        dual_lower_bound=float(res["dual_lower_bound"]),
        gap=float(res["gap"]),
        dual_state=serialize.json_to_matrix(res["dual_state"]),
        dual_mult_re=np.array([serialize.json_to_matrix(A)
                               for A in res["dual_mult_re"]]),
        dual_mult_im=np.array([serialize.json_to_matrix(A)
                               for A in res["dual_mult_im"]]),
        tol=float(doc["problem"].get("tol", 1e-6)),
    )
    rep = cert.verify(f, nu)
    return _report(rep.pop("ok"), "l1", **rep)


def _load_majorize_problem(doc):
    f = serialize.qrv_from_json(doc["problem"]["f"])
    g = serialize.qrv_from_json(doc["problem"]["g"])
    space = serialize.space_from_json(doc["problem"]["space"])
    return f, g, space


def _subset_sum(values, subset):
    return values[list(subset)].sum(axis=0)


def _verify_majorize(doc):
    f, g, space = _load_majorize_problem(doc)
    order = doc["order"]
    res = doc["result"]
    verdict = res["verdict"]
    scale = 1.0 + max(linalg.operator_norm(A) for A in g.values)

    if verdict == "holds" and order == "b":
        B = BistochasticMatrix(space, np.array(res["witness"], dtype=float))
        resid = max(linalg.operator_norm(A)
                    for A in (apply_bistochastic(B, g) - f).values)
        return _report(resid <= WITNESS_TOL * scale, "majorize", order=order,
                       verdict=verdict, witness_residual=resid)

    if verdict == "fails" and order == "b":
        lp = _entrywise_lp(f, g, space)
        y = np.array(res["farkas_y"], dtype=float)
        cone = float((lp.A.T @ y).max(initial=0.0))
        sep = float(lp.b @ y)
        ok = cone <= WITNESS_TOL * (1.0 + np.abs(lp.A).max()) and sep > WITNESS_TOL
        return _report(ok, "majorize", order=order, verdict=verdict,
                       farkas_cone_residual=cone, farkas_separation=sep)

    if verdict == "holds" and order in ("t", "s"):
        m = f.m
        expected = 2 ** m - 2
        records = res.get("containment", [])
        total_err = linalg.operator_norm(f.values.sum(axis=0)
                                         - g.values.sum(axis=0))
        ok = total_err <= 1e-8 * scale and len(records) == expected
        worst = 0.0
        from itertools import combinations

        for rec in records:
            k = rec["k"]
            lam = np.array(rec["weights"], dtype=float)
            subsets = list(combinations(range(m), k))
            G_sums = np.array([_subset_sum(g.values, s) for s in subsets])
            FS = _subset_sum(f.values, tuple(rec["subset"]))
            mix = np.tensordot(lam, G_sums, axes=(0, 0))
            if lam.min(initial=0.0) < -1e-9 or abs(lam.sum() - 1.0) > 1e-8:
                ok = False
            if order == "t":
                err = linalg.operator_norm(mix - FS)
            else:
                err = max(0.0, -linalg.lambda_min(
                    linalg.hermitian_part(mix - FS)))
            worst = max(worst, err)
        ok = ok and worst <= 1e-6 * scale
        return _report(ok, "majorize", order=order, verdict=verdict,
                       containment_records=len(records),
                       worst_containment_residual=worst,
                       totals_residual=total_err)

    if verdict == "fails" and order in ("t", "s"):
        t = serialize.json_to_matrix(res["refuter"])
        if order == "s":
            trace_err = abs(np.trace(t).real - 1.0)
            if not linalg.is_psd(linalg.hermitian_part(t)) or trace_err > 1e-8:
                return _report(False, "majorize", order=order, verdict=verdict,
                               reason="refuter is not a state")
        ft = scalarize_classical(f, t, space)
        gt = scalarize_classical(g, t, space)
        refutes = not classical_majorizes(ft, gt)
        return _report(refutes, "majorize", order=order, verdict=verdict,
                       refuter_margin=float(res.get("margin", 0.0)))

    if verdict == "undecided-sampled":
        return _report(True, "majorize", order=order, verdict=verdict,
                       note="sampling found no refuter; no claim to verify")

    return _report(False, "majorize", order=order, verdict=verdict,
                   reason=f"unverifiable verdict {verdict!r}")


def _verify_separate(doc):
    f, g, space = _load_majorize_problem(doc)
    res = doc["result"]
    W = np.array([serialize.json_to_matrix(Wx) for Wx in res["weights"]])
    phi = SeparatingFunctional(space, W)
    value_f = float(np.real(phi(f.values)))
    value_psi = psi_phi(phi, g, space)
    margin = value_f - value_psi
    claimed = float(res["margin"])
    ok = margin > WITNESS_TOL and margin >= claimed - 1e-6 * (1.0 + abs(claimed))
    return _report(ok, "separate", margin_recomputed=margin,
                   margin_claimed=claimed)


def _verify_integral(doc):
    nu = serialize.povm_from_json(doc["problem"]["povm"])
    f = serialize.qrv_from_json(doc["problem"]["qrv"])
    res = doc["result"]
    M = integrate(f, nu)
    err = linalg.operator_norm(M - serialize.json_to_matrix(res["matrix"]))
    norm_err = abs(linalg.operator_norm(M) - float(res["norm"]))
    scale = 1.0 + linalg.operator_norm(M)
    ok = err <= 1e-9 * scale and norm_err <= 1e-9 * scale
    return _report(ok, "integral", matrix_residual=err, norm_residual=norm_err)


_CHECKERS = {
    "l1": _verify_l1,
    "majorize": _verify_majorize,
    "separate": _verify_separate,
    "integral": _verify_integral,
}


def verify_document(doc: dict) -> dict:
    """Re-verify a certificate document; returns a report with ``ok``."""
    kind = doc.get("kind")
    if kind not in _CHECKERS:
        raise QrvError(f"unknown certificate kind {kind!r}")
    return _CHECKERS[kind](doc)
