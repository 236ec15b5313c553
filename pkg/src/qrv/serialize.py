"""JSON interchange for spaces, POVMs, functions and certificates.

Conventions: complex scalars are two-element arrays [re, im]; matrices
are row-major nested arrays of such pairs; real vectors and real
matrices (masses, bistochastic witnesses) are plain numbers.  Dumps are
sorted and indented so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import QrvError
from .measure import BistochasticMatrix, ClassicalFunction, FiniteMeasureSpace
from .povm import Povm, QuantumRandomVariable


def complex_to_json(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def json_to_complex(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise QrvError(f"expected [re, im], got {obj!r}")


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in M]


def json_to_matrix(obj) -> np.ndarray:
    rows = [[json_to_complex(z) for z in row] for row in obj]
    return np.array(rows, dtype=complex)


def real_array_to_json(v) -> list:
    return np.asarray(v, dtype=float).tolist()


def space_to_json(space: FiniteMeasureSpace) -> dict:
    return {"atoms": list(space.atoms), "masses": real_array_to_json(space.masses)}


def space_from_json(obj) -> FiniteMeasureSpace:
    return FiniteMeasureSpace(obj["atoms"], obj["masses"])


def classical_fn_to_json(f: ClassicalFunction) -> dict:
    return {"space": space_to_json(f.space),
            "values": [complex_to_json(z) for z in f.values]}


def classical_fn_from_json(obj, space: FiniteMeasureSpace | None = None):
    space = space if space is not None else space_from_json(obj["space"])
    return ClassicalFunction(space, [json_to_complex(z) for z in obj["values"]])


def povm_to_json(nu: Povm) -> dict:
    return {
        "space": {"atoms": list(nu.atoms)},
        "dim": nu.dim,
        "effects": {a: matrix_to_json(Q) for a, Q in zip(nu.atoms, nu.effects)},
    }


def povm_from_json(obj) -> Povm:
    atoms = [str(a) for a in obj["space"]["atoms"]]
    missing = [a for a in atoms if a not in obj["effects"]]
    if missing:
        raise QrvError(f"POVM file lacks effects for atoms {missing}")
    effects = np.array([json_to_matrix(obj["effects"][a]) for a in atoms])
    dim = int(obj.get("dim", effects.shape[1]))
    if dim != effects.shape[1]:
        raise QrvError(f"declared dim {dim} does not match matrices "
                       f"of size {effects.shape[1]}")
    return Povm(atoms, effects)


def qrv_to_json(f: QuantumRandomVariable) -> dict:
    return {
        "space": {"atoms": list(f.atoms)},
        "dim": f.dim,
        "values": {a: matrix_to_json(A) for a, A in zip(f.atoms, f.values)},
    }


def qrv_from_json(obj) -> QuantumRandomVariable:
    atoms = [str(a) for a in obj["space"]["atoms"]]
    missing = [a for a in atoms if a not in obj["values"]]
    if missing:
        raise QrvError(f"QRV file lacks values for atoms {missing}")
    values = np.array([json_to_matrix(obj["values"][a]) for a in atoms])
    dim = int(obj.get("dim", values.shape[1]))
    if dim != values.shape[1]:
        raise QrvError(f"declared dim {dim} does not match matrices "
                       f"of size {values.shape[1]}")
    return QuantumRandomVariable(atoms, values)


def bistochastic_to_json(B: BistochasticMatrix) -> dict:
    return {"space": space_to_json(B.space),
            "matrix": [real_array_to_json(r) for r in B.matrix]}


def bistochastic_from_json(obj) -> BistochasticMatrix:
    return BistochasticMatrix(space_from_json(obj["space"]),
                              np.array(obj["matrix"], dtype=float))


# ---------------------------------------------------------------------------
# certificate documents (self-contained: problem data embedded)
# ---------------------------------------------------------------------------

def l1_certificate_to_json(cert, f: QuantumRandomVariable, nu: Povm) -> dict:
    f1, f2, f3, f4 = cert.decomposition
    return {
        "kind": "l1",
        "problem": {"povm": povm_to_json(nu), "qrv": qrv_to_json(f),
                    "tol": cert.tol},
        "result": {
            "value": cert.value,
            "dual_lower_bound": cert.dual_lower_bound,
            "gap": cert.gap,
            "decomposition": [
                [matrix_to_json(A) for A in part] for part in (f1, f2, f3, f4)
            ],
            "dual_state": matrix_to_json(cert.dual_state),
            "dual_mult_re": [matrix_to_json(A) for A in cert.dual_mult_re],
            "dual_mult_im": [matrix_to_json(A) for A in cert.dual_mult_im],
        },
    }


def majorization_certificate_to_json(cert, f, g,
                                     space: FiniteMeasureSpace) -> dict:
    result = {"verdict": cert.verdict, "margin": cert.margin,
              "residuals": {k: float(v) for k, v in cert.residuals.items()}}
    if cert.witness is not None:
        result["witness"] = [real_array_to_json(r) for r in cert.witness.matrix]
    if cert.farkas is not None:
        result["farkas_y"] = real_array_to_json(cert.farkas["y"])
        result["farkas_margin"] = cert.farkas["margin"]
    if cert.containment:
        result["containment"] = [
            {"k": rec["k"], "subset": list(rec["subset"]),
             "weights": real_array_to_json(rec["weights"])}
            for rec in cert.containment
        ]
    if cert.refuter is not None:
        result["refuter"] = matrix_to_json(cert.refuter)
        if cert.refuter_subset is not None:
            k, subset = cert.refuter_subset
            result["refuter_subset"] = {"k": k, "subset": list(subset)}
    if cert.sampler is not None:
        result["sampler"] = cert.sampler
    return {
        "kind": "majorize",
        "order": cert.order,
        "problem": {"f": qrv_to_json(f), "g": qrv_to_json(g),
                    "space": space_to_json(space)},
        "result": result,
    }


def separation_to_json(sep, f, g, space: FiniteMeasureSpace) -> dict:
    return {
        "kind": "separate",
        "problem": {"f": qrv_to_json(f), "g": qrv_to_json(g),
                    "space": space_to_json(space)},
        "result": {
            "weights": [matrix_to_json(W) for W in sep.functional.weights],
            "margin": sep.margin,
            "value_f": sep.value_f,
            "value_psi_g": sep.value_psi_g,
        },
    }


def integral_to_json(matrix, norm: float, nu: Povm,
                     f: QuantumRandomVariable) -> dict:
    return {
        "kind": "integral",
        "problem": {"povm": povm_to_json(nu), "qrv": qrv_to_json(f)},
        "result": {"matrix": matrix_to_json(matrix), "norm": float(norm)},
    }


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def dump(doc, path):
    with open(path, "w") as fh:
        fh.write(dumps(doc))


def load(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
