"""Command-line surface.

Verbs: integrate, rn, norm1, bracket, majorize, separate, paper-examples,
property-suite, verify.  All inputs and outputs are JSON (complex scalars
as [re, im], matrices row-major); identical inputs and seeds produce
byte-identical output.  Exit codes: 0 success, 2 validation error,
3 solver stall, 4 expected-value mismatch (worked examples or property
violations, and failed certificate re-verification).

Set QRV_LOG=debug|info|warning to control logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import linalg, serialize
from .errors import QrvError, SolverStall
from .l1 import bracket, l1_seminorm
from .majorize import komiya_separate, majorizes
from .povm import integrate, rn_derivative
from .suite import property_suite
from .verify import verify_document
from .worked_examples import EXAMPLES, run_examples

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STALL = 3
EXIT_MISMATCH = 4


def _setup_logging():
    level = os.environ.get("QRV_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s %(message)s")


def _emit(doc, path=None):
    text = serialize.dumps(doc)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _load_state(path, dim):
    if path is None:
        return linalg.maximally_mixed(dim)
    doc = serialize.load(path)
    matrix = doc["matrix"] if isinstance(doc, dict) and "matrix" in doc else doc
    return linalg.as_state(serialize.json_to_matrix(matrix))


def cmd_integrate(args) -> int:
    nu = serialize.povm_from_json(serialize.load(args.povm))
    f = serialize.qrv_from_json(serialize.load(args.qrv))
    rho = _load_state(args.rho, nu.dim)
    M = integrate(f, nu, rho)
    doc = serialize.integral_to_json(M, linalg.operator_norm(M), nu, f)
    _emit(doc, args.out or args.certificate)
    return EXIT_OK


def cmd_rn(args) -> int:
    nu = serialize.povm_from_json(serialize.load(args.povm))
    rho = _load_state(args.rho, nu.dim)
    deriv = rn_derivative(nu, rho)
    doc = {
        "kind": "rn-derivative",
        "problem": {"povm": serialize.povm_to_json(nu),
                    "rho": serialize.matrix_to_json(rho)},
        "result": {
            "masses": serialize.real_array_to_json(deriv.masses),
            "matrices": {a: serialize.matrix_to_json(D)
                         for a, D in zip(nu.atoms, deriv.matrices)},
            "invertible": deriv.invertible,
        },
    }
    _emit(doc, args.out or args.certificate)
    return EXIT_OK


def cmd_norm1(args) -> int:
    nu = serialize.povm_from_json(serialize.load(args.povm))
    f = serialize.qrv_from_json(serialize.load(args.qrv))
    try:
        cert = l1_seminorm(f, nu, tol=args.tol)
    except SolverStall as exc:
        if exc.certificate is None:
            raise
        # emit the best certificate with its honest gap, then signal the stall
        doc = serialize.l1_certificate_to_json(exc.certificate, f, nu)
        _emit(doc, args.out or args.certificate)
        sys.stderr.write(f"solver stall: {exc}\n")
        return EXIT_STALL
    doc = serialize.l1_certificate_to_json(cert, f, nu)
    _emit(doc, args.out or args.certificate)
    return EXIT_OK


def cmd_bracket(args) -> int:
    nu = serialize.povm_from_json(serialize.load(args.povm))
    f = serialize.qrv_from_json(serialize.load(args.qrv))
    gdoc = serialize.load(args.g)
    gv = np.array([serialize.json_to_complex(z) for z in gdoc["values"]])
    M = bracket(f, gv, nu)
    doc = {
        "kind": "bracket",
        "problem": {"povm": serialize.povm_to_json(nu),
                    "qrv": serialize.qrv_to_json(f),
                    "g": [serialize.complex_to_json(z) for z in gv]},
        "result": {"matrix": serialize.matrix_to_json(M),
                   "norm": linalg.operator_norm(M)},
    }
    _emit(doc, args.out or args.certificate)
    return EXIT_OK


def cmd_majorize(args) -> int:
    f = serialize.qrv_from_json(serialize.load(args.f))
    g = serialize.qrv_from_json(serialize.load(args.g))
    space = serialize.space_from_json(serialize.load(args.space))
    kwargs = {}
    if args.order in ("t", "s"):
        kwargs = {"seed": args.seed, "max_atoms": args.max_atoms}
        if args.samples:
            kwargs["n_samples"] = args.samples
    cert = majorizes(f, g, space, args.order, **kwargs)
    doc = serialize.majorization_certificate_to_json(cert, f, g, space)
    _emit(doc, args.certificate or args.out)
    return EXIT_OK


def cmd_separate(args) -> int:
    f = serialize.qrv_from_json(serialize.load(args.f))
    g = serialize.qrv_from_json(serialize.load(args.g))
    space = serialize.space_from_json(serialize.load(args.space))
    sep = komiya_separate(f, g, space)
    if sep is None:
        doc = {
            "kind": "separate",
            "problem": {"f": serialize.qrv_to_json(f),
                        "g": serialize.qrv_to_json(g),
                        "space": serialize.space_to_json(space)},
            "result": {"separating": False,
                       "note": "a bistochastic witness maps g to f"},
        }
    else:
        doc = serialize.separation_to_json(sep, f, g, space)
    _emit(doc, args.certificate or args.out)
    return EXIT_OK


def cmd_paper_examples(args) -> int:
    if args.list:
        for name in EXAMPLES:
            sys.stdout.write(name + "\n")
        return EXIT_OK
    report, all_pass = run_examples(only=args.only)
    doc = {"kind": "worked-examples", "pass": all_pass, "examples": report}
    _emit(doc, args.out or args.certificate)
    for name, rep in report.items():
        status = "PASS" if rep["pass"] else "FAIL"
        sys.stderr.write(f"[{status}] {name}\n")
    return EXIT_OK if all_pass else EXIT_MISMATCH


def cmd_property_suite(args) -> int:
    if args.trials == 0:
        doc = {"kind": "property-suite", "seed": args.seed, "trials": 0,
               "suites": {}, "total_violations": 0}
        _emit(doc, args.out or args.certificate)
        return EXIT_OK
    report = property_suite(seed=args.seed, trials=args.trials)
    doc = dict({"kind": "property-suite"}, **report)
    _emit(doc, args.out or args.certificate)
    return EXIT_OK if report["total_violations"] == 0 else EXIT_MISMATCH


def cmd_verify(args) -> int:
    doc = serialize.load(args.certificate)
    report = verify_document(doc)
    _emit(report, args.out)
    return EXIT_OK if report["ok"] else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrv",
        description=("POVM integration, operator-valued L1 seminorms and "
                     "certified majorization on finite atomic spaces"),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, povm=False, qrv=False, fg=False):
        if povm:
            p.add_argument("--povm", required=True, help="POVM JSON file")
        if qrv:
            p.add_argument("--qrv", required=True, help="QRV JSON file")
        if fg:
            p.add_argument("--f", required=True, help="left QRV JSON file")
            p.add_argument("--g", required=True, help="right QRV JSON file")
            p.add_argument("--space", required=True,
                           help="measure space JSON file")
        p.add_argument("--rho", help="state JSON file (default: I/d)")
        p.add_argument("--tol", type=float, default=1e-6,
                       help="certificate gap tolerance")
        p.add_argument("--seed", type=int, default=42, help="RNG seed")
        p.add_argument("--certificate", help="write the certificate here")
        p.add_argument("--out", help="write the output document here")

    p = sub.add_parser("integrate", help="integrate a QRV against a POVM")
    common(p, povm=True, qrv=True)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("rn", help="operator-valued derivative of a POVM")
    common(p, povm=True)
    p.set_defaults(func=cmd_rn)

    p = sub.add_parser("norm1", help="L1 seminorm with certificate")
    common(p, povm=True, qrv=True)
    p.set_defaults(func=cmd_norm1)

    p = sub.add_parser("bracket", help="pairing <f, g I> for scalar g")
    common(p, povm=True, qrv=True)
    p.add_argument("--g", required=True,
                   help='scalar function JSON file {"values": [[re,im],..]}')
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("majorize", help="run one majorization order")
    common(p, fg=True)
    p.add_argument("--order", required=True, choices=["b", "t", "s"])
    p.add_argument("--samples", type=int, default=0,
                   help="override the sampler size")
    p.add_argument("--max-atoms", type=int, default=12,
                   help="subset enumeration cap")
    p.set_defaults(func=cmd_majorize)

    p = sub.add_parser("separate", help="separating functional if no witness")
    common(p, fg=True)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("paper-examples",
                       help="reproduce the canonical worked examples")
    common(p)
    p.add_argument("--list", action="store_true", help="list example names")
    p.add_argument("--only", help="run a single example")
    p.set_defaults(func=cmd_paper_examples)

    p = sub.add_parser("property-suite", help="seeded random property checks")
    common(p)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_property_suite)

    p = sub.add_parser("verify", help="re-verify a certificate document")
    p.add_argument("--certificate", required=True)
    p.add_argument("--out", help="write the verification report here")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverStall as exc:
        sys.stderr.write(f"solver stall: {exc}\n")
        return EXIT_STALL
    except (QrvError, FileNotFoundError, json.JSONDecodeError, KeyError,
            ValueError) as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
