"""The L1 seminorm on operator-valued functions, with certificates.

The seminorm of f is the infimum of  || integral (f1+f2+f3+f4) dnu ||
over decompositions f = f1 - f2 + i(f3 - f4) into four pointwise-PSD
summands.  Writing R = Re f, J = Im f (Hermitian parts), every
decomposition has f1 = R + p, f2 = p, f3 = J + q, f4 = q with p, q >= 0
and p + R >= 0, q + J >= 0, so the infimum is the SDP

    minimize lambda_max( sum_x K_x (R_x + 2 p_x + J_x + 2 q_x) K_x )

over Hermitian p_x, q_x, where K_x = nu_rho(x)^{1/2} D(x)^{1/2} is the
square root of the effect at x.  The Lagrangian dual optimizes a state S
and contraction multipliers; for a fixed S the best multipliers have the
closed form U_x = T^{1/2} sign(T^{1/2} R_x T^{1/2}) T^{1/2} with
T_x = K_x S K_x, giving the verified lower bound

    sum_x  tr|T_x^{1/2} R_x T_x^{1/2}| + tr|T_x^{1/2} J_x T_x^{1/2}|.

Certificates carry the decomposition, the dual state and multipliers,
and re-verify with eigenvalue computations alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimMismatch, MatrixNotPsd, NotSelfAdjoint, SolverStall
from .measure import ClassicalFunction, FiniteMeasureSpace
from .povm import (Povm, QuantumRandomVariable, _check_povm_qrv, integrate,
                   linf_norm)
from .solver import (SdpBlock, SdpProblem, hermitian_basis, sdp_solve)

log = logging.getLogger("qrv.l1")

DEFAULT_GAP_TOL = 1e-6
RECON_TOL = 1e-8
VALUE_TOL = 1e-9


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class L1Certificate:
    """Verified two-sided certificate for one seminorm evaluation.

    ``value`` is the norm of the integral of the feasible decomposition
    f1..f4 (an upper bound on the seminorm); ``dual_lower_bound`` is the
    value of the verified dual certificate (S, U, V).  The seminorm lies
    in [dual_lower_bound, value] and gap = value - dual_lower_bound.
    """

    value: float
    decomposition: tuple  # (f1, f2, f3, f4), each (m, d, d)
    dual_lower_bound: float
    gap: float
    dual_state: np.ndarray        # S >= 0, tr S = 1
    dual_mult_re: np.ndarray      # U_x with T_x +- U_x >= 0
    dual_mult_im: np.ndarray      # V_x with T_x +- V_x >= 0
    tol: float

    @property
    def null_within_tol(self) -> bool:
        """Whether the value is indistinguishable from the seminorm kernel."""
        return self.value <= self.tol

    def verify(self, f: QuantumRandomVariable, nu: Povm,
               tol: float = RECON_TOL) -> dict:
        """Re-check every invariant with independent arithmetic.

        Returns a report dict with a boolean ``ok`` plus the individual
        residuals; no solver output is trusted.
        """
        f1, f2, f3, f4 = [np.asarray(p) for p in self.decomposition]
        scale = 1.0 + max(linf_norm(f), 1.0)
        recon = f1 - f2 + 1j * (f3 - f4)
        recon_err = float(np.abs(recon - f.values).max())
        psd_ok = all(
            linalg.is_psd(linalg.hermitian_part(part[x]))
            for part in (f1, f2, f3, f4) for x in range(f.m)
        )
        total = integrate(
            QuantumRandomVariable(f.atoms, f1 + f2 + f3 + f4), nu
        )
        value_err = abs(linalg.operator_norm(total) - self.value)
        # dual side: S is a state and T_x +- U_x, T_x +- V_x are PSD
        S = linalg.hermitian_part(self.dual_state)
        dual_ok = linalg.is_psd(S) and abs(np.trace(S).real - 1.0) <= 1e-9
        roots = [linalg.psd_sqrt(linalg.hermitian_part(Q)) for Q in nu.effects]
        Rv, Jv = f.hermitian_decomposition()
        bound = 0.0
        for x in range(f.m):
            T = linalg.hermitian_part(roots[x] @ S @ roots[x])
            for M in (self.dual_mult_re[x], self.dual_mult_im[x]):
                M = linalg.hermitian_part(M)
                dual_ok = dual_ok and linalg.is_psd(T - M) and linalg.is_psd(T + M)
            bound += float(np.trace(self.dual_mult_re[x] @ Rv[x]).real)
            bound += float(np.trace(self.dual_mult_im[x] @ Jv[x]).real)
        bound_err = abs(bound - self.dual_lower_bound)
        ok = (recon_err <= tol * scale and psd_ok
              and value_err <= max(VALUE_TOL * scale, 1e-12)
              and dual_ok and bound_err <= 1e-8 * scale
              and self.dual_lower_bound <= self.value + 1e-12 * scale
              and self.gap <= self.tol * (1.0 + abs(self.value)) + 1e-12)
        return {
            "ok": bool(ok),
            "reconstruction": recon_err,
            "decomposition_psd": bool(psd_ok),
            "value_residual": value_err,
            "dual_feasible": bool(dual_ok),
            "dual_bound_residual": bound_err,
            "gap": self.gap,
        }


@dataclass(frozen=True, eq=False)
class SeparatingFunctional:
    """phi(h) = sum_x mu(x) tr(W(x) h(x)) with Hermitian weights W."""

    space: FiniteMeasureSpace
    weights: np.ndarray  # (m, d, d) Hermitian

    def __call__(self, values: np.ndarray) -> complex:
        acc = 0.0 + 0.0j
        for mu, W, h in zip(self.space.masses, self.weights, values):
            acc += mu * np.trace(W @ h)
        return complex(acc)


# ---------------------------------------------------------------------------
# seminorm SDP
# ---------------------------------------------------------------------------

def _sqrt_with_sign_mult(T, A):
    """Closed-form  max tr(M A)  over Hermitian M with -T <= M <= T.

    Returns ``(tr|T^{1/2} A T^{1/2}|, M*)`` where the maximizer is
    M* = T^{1/2} sign(T^{1/2} A T^{1/2}) T^{1/2}.
    """
    lamT, VT = np.linalg.eigh(linalg.hermitian_part(T))
    Th = (VT * np.sqrt(np.clip(lamT, 0.0, None))) @ VT.conj().T
    Z = linalg.hermitian_part(Th @ A @ Th)
    lam, V = np.linalg.eigh(Z)
    W = (V * np.sign(lam)) @ V.conj().T
    M = linalg.hermitian_part(Th @ W @ Th)
    return float(np.abs(lam).sum()), M


def _dual_bound_for_state(S, roots, Rv, Jv):
    """Best verified lower bound achievable with dual state S."""
    S = linalg.psd_project(S)
    tr = np.trace(S).real
    if tr <= 0.0:
        return -np.inf, S, None, None
    S = S / tr
    total = 0.0
    Us, Vs = [], []
    for K, R, J in zip(roots, Rv, Jv):
        T = linalg.hermitian_part(K @ S @ K)
        vr, U = _sqrt_with_sign_mult(T, R)
        vi, V = _sqrt_with_sign_mult(T, J)
        total += vr + vi
        Us.append(U)
        Vs.append(V)
    return total, S, np.array(Us), np.array(Vs)


def _state_candidates(M, solver_dual):
    """Dual-state seeds: the solver multiplier and top-eigenspace states."""
    cands = []
    if solver_dual is not None:
        cands.append(solver_dual)
    lam, V = np.linalg.eigh(linalg.hermitian_part(M))
    v = V[:, -1]
    cands.append(np.outer(v, v.conj()))
    near = lam >= lam[-1] - 1e-8 * (1.0 + abs(lam[-1]))
    if near.sum() > 1:
        Vt = V[:, near]
        cands.append((Vt @ Vt.conj().T) / near.sum())
    return cands


def _assemble_primal(roots, Rv, Jv, need_p, need_q, d, m):
    """SDP data for  min lambda_max(sum K(R+2p+J+2q)K)  s.t. feasibility."""
    basis = hermitian_basis(d)
    nb = d * d
    var_index = {}
    n = 1
    for x in range(m):
        if need_p[x]:
            var_index[("p", x)] = n
            n += nb
        if need_q[x]:
            var_index[("q", x)] = n
            n += nb
    c = np.zeros(n)
    c[0] = 1.0

    obj_terms = {0: np.eye(d, dtype=complex)}
    F0 = -sum(linalg.hermitian_part(K @ (R + J) @ K)
              for K, R, J in zip(roots, Rv, Jv))
    blocks = []
    for x in range(m):
        for kind, base in (("p", Rv[x]), ("q", Jv[x])):
            if not (need_p[x] if kind == "p" else need_q[x]):
                continue
            i0 = var_index[(kind, x)]
            for i, B in enumerate(basis):
                obj_terms[i0 + i] = -2.0 * linalg.hermitian_part(
                    roots[x] @ B @ roots[x]
                )
            blocks.append(SdpBlock(
                F0=np.zeros((d, d), dtype=complex),
                terms={i0 + i: basis[i] for i in range(nb)},
            ))
            blocks.append(SdpBlock(
                F0=np.array(base, dtype=complex),
                terms={i0 + i: basis[i] for i in range(nb)},
            ))
    blocks.insert(0, SdpBlock(F0=F0, terms=obj_terms))
    return SdpProblem(c=c, blocks=blocks), var_index, basis


def _assemble_dual(roots, Rv, Jv, d, m):
    """SDP data for  max sum_x tr(U_x R_x) + tr(V_x J_x)  over dual states."""
    basis = hermitian_basis(d)
    nb = d * d
    nS = nb
    n = nS + 2 * m * nb
    c = np.zeros(n)
    blocks = [SdpBlock(F0=np.zeros((d, d), dtype=complex),
                       terms={i: basis[i] for i in range(nb)})]
    for x in range(m):
        KBK = [linalg.hermitian_part(roots[x] @ B @ roots[x]) for B in basis]
        for which, data in ((0, Rv[x]), (1, Jv[x])):
            i0 = nS + (2 * x + which) * nb
            for i, B in enumerate(basis):
                c[i0 + i] = -float(np.trace(B @ data).real)
            for sign in (+1.0, -1.0):
                terms = {i: KBK[i] for i in range(nb)}
                terms.update({i0 + i: sign * basis[i] for i in range(nb)})
                blocks.append(SdpBlock(
                    F0=np.zeros((d, d), dtype=complex), terms=terms))
    A_eq = np.zeros((1, n))
    for i, B in enumerate(basis):
        A_eq[0, i] = np.trace(B).real
    return SdpProblem(c=c, blocks=blocks, A_eq=A_eq, b_eq=[1.0]), basis


def _coords_to_matrix(z, i0, basis):
    d = basis[0].shape[0]
    H = np.zeros((d, d), dtype=complex)
    for i, B in enumerate(basis):
        H = H + z[i0 + i] * B
    return linalg.hermitian_part(H)


def _repair_feasible(p, base):
    """Shift p by a small multiple of I so p >= 0 and p + base >= 0."""
    p = linalg.psd_project(p)
    delta = max(0.0, -linalg.lambda_min(linalg.hermitian_part(p + base)))
    if delta > 0.0:
        p = p + (delta + 1e-15) * np.eye(p.shape[0])
    return p


def effect_roots(nu: Povm) -> list[np.ndarray]:
    """Square roots of the effects: K_x with K_x h K_x the integrand at x."""
    return [linalg.psd_sqrt(Q) for Q in nu.effects]


def l1_seminorm(f: QuantumRandomVariable, nu: Povm,
                tol: float = DEFAULT_GAP_TOL, rho=None) -> L1Certificate:
    """Seminorm of f against nu with a verified two-sided certificate.

    Raises :class:`SolverStall` carrying the best certificate when the
    primal/dual gap cannot be pushed below ``tol`` (relative).
    """
    _check_povm_qrv(nu, f)
    d, m = f.dim, f.m
    roots = effect_roots(nu)
    Rv, Jv = f.hermitian_decomposition()
    scale = 1.0 + max(linalg.operator_norm(A) for A in f.values)

    lam_R = [linalg.lambda_min(R) for R in Rv]
    lam_J = [linalg.lambda_min(J) for J in Jv]
    need_p = [lm < -1e-14 * scale for lm in lam_R]
    need_q = [lm < -1e-14 * scale for lm in lam_J]

    # precondition: the functional is positively homogeneous in f and in nu,
    # so the solver sees unit-scale data and the certificate is assembled on
    # the original data afterwards
    s_f = max(max(linalg.operator_norm(A) for A in f.values), 1e-30)
    s_q = max(max(linalg.operator_norm(K) for K in roots), 1e-30)
    roots_s = [K / s_q for K in roots]
    Rv_s, Jv_s = Rv / s_f, Jv / s_f

    solver_dual = None
    if any(need_p) or any(need_q):
        problem, var_index, basis = _assemble_primal(
            roots_s, Rv_s, Jv_s, need_p, need_q, d, m)
        try:
            sol = sdp_solve(problem, tol=max(tol, 1e-6))
        except SolverStall as exc:
            if exc.certificate is None:
                raise
            sol = exc.certificate
        ps = [
            _repair_feasible(
                s_f * _coords_to_matrix(sol.z, var_index[("p", x)], basis),
                Rv[x]) if need_p[x] else np.zeros((d, d), dtype=complex)
            for x in range(m)
        ]
        qs = [
            _repair_feasible(
                s_f * _coords_to_matrix(sol.z, var_index[("q", x)], basis),
                Jv[x]) if need_q[x] else np.zeros((d, d), dtype=complex)
            for x in range(m)
        ]
        solver_dual = sol.block_duals[0]
    else:
        # f is pointwise PSD: the trivial decomposition is optimal
        ps = [_repair_feasible(np.zeros((d, d), dtype=complex), Rv[x])
              for x in range(m)]
        qs = [np.zeros((d, d), dtype=complex) for _ in range(m)]

    def finish(ps, qs, solver_dual):
        M = sum(
            linalg.hermitian_part(K @ (R + 2 * p + J + 2 * q) @ K)
            for K, R, J, p, q in zip(roots, Rv, Jv, ps, qs)
        )
        value = linalg.operator_norm(M)
        best = (-np.inf, None, None, None)
        for cand in _state_candidates(M, solver_dual):
            got = _dual_bound_for_state(cand, roots, Rv, Jv)
            if got[0] > best[0]:
                best = got
        dlb, S, Us, Vs = best
        dlb = min(dlb, value)  # roundoff guard; closed form cannot exceed value
        f1 = np.array([R + p for R, p in zip(Rv, ps)])
        f2 = np.array(ps)
        f3 = np.array([J + q for J, q in zip(Jv, qs)])
        f4 = np.array(qs)
        return L1Certificate(
            value=value, decomposition=(f1, f2, f3, f4),
            dual_lower_bound=dlb, gap=value - dlb,
            dual_state=S, dual_mult_re=Us, dual_mult_im=Vs, tol=tol,
        )

    cert = finish(ps, qs, solver_dual)
    if cert.gap <= tol * (1.0 + abs(cert.value)):
        return cert

    # retry: solve the dual SDP explicitly for a better dual state
    log.debug("seminorm gap %.3e too large; solving explicit dual", cert.gap)
    dual_problem, basis = _assemble_dual(roots_s, Rv_s, Jv_s, d, m)
    try:
        dsol = sdp_solve(dual_problem, tol=max(tol, 1e-6))
    except SolverStall as exc:
        dsol = exc.certificate
    if dsol is not None:
        S_raw = _coords_to_matrix(dsol.z, 0, basis)
        cert2 = finish(ps, qs, S_raw)
        if cert2.dual_lower_bound > cert.dual_lower_bound:
            cert = cert2
    if cert.gap <= tol * (1.0 + abs(cert.value)):
        return cert
    raise SolverStall(
        f"seminorm gap {cert.gap:.3e} above tolerance {tol:.1e}",
        certificate=cert,
    )


def l1_value(f: QuantumRandomVariable, nu: Povm,
             tol: float = DEFAULT_GAP_TOL) -> float:
    """Shorthand for the certified seminorm value."""
    return l1_seminorm(f, nu, tol=tol).value


# ---------------------------------------------------------------------------
# bounds, bracket and multipliers
# ---------------------------------------------------------------------------

def l1_upper_abs(f: QuantumRandomVariable, nu: Povm) -> float:
    """|| integral |f| dnu ||, an upper bound for self-adjoint f."""
    if not f.is_self_adjoint():
        raise NotSelfAdjoint("pointwise absolute value needs Hermitian values")
    return linalg.operator_norm(integrate(f.pointwise_abs(), nu))


def l1_lower_states(f: QuantumRandomVariable, nu: Povm, states,
                    rho=None) -> float:
    """max over supplied states s of  integral |f_s| dnu_rho  (lower bound)."""
    from .povm import scalarize

    best = 0.0
    for s in states:
        fs = scalarize(f, nu, s, rho)
        best = max(best, float(np.sum(np.abs(fs.values) * fs.space.masses)))
    return best


def bracket(f: QuantumRandomVariable, g, nu: Povm) -> np.ndarray:
    """The natural pairing <f, g I> = integral f g dnu for scalar g."""
    gv = g.values if isinstance(g, ClassicalFunction) else np.asarray(g, dtype=complex)
    if gv.shape != (f.m,):
        raise DimMismatch(f"expected {f.m} scalar values, got {gv.shape}")
    scaled = QuantumRandomVariable(f.atoms, f.values * gv[:, None, None])
    return integrate(scaled, nu)


def mult_scalar(f: QuantumRandomVariable, g) -> QuantumRandomVariable:
    """Pointwise product f(x) g(x) for scalar g."""
    gv = g.values if isinstance(g, ClassicalFunction) else np.asarray(g, dtype=complex)
    if gv.shape != (f.m,):
        raise DimMismatch(f"expected {f.m} scalar values, got {gv.shape}")
    return QuantumRandomVariable(f.atoms, f.values * gv[:, None, None])


def mult_operator(A, f: QuantumRandomVariable, side: str = "left") -> QuantumRandomVariable:
    """Pointwise A f(x) or f(x) A."""
    A = linalg.as_operator(A)
    if A.shape[0] != f.dim:
        raise DimMismatch("operator dimension does not match QRV")
    if side == "left":
        vals = np.einsum("ab,xbc->xac", A, f.values)
    elif side == "right":
        vals = np.einsum("xab,bc->xac", f.values, A)
    else:
        raise ValueError("side must be 'left' or 'right'")
    return QuantumRandomVariable(f.atoms, vals)


def mult_operator_conjugated(A, f: QuantumRandomVariable, nu: Povm,
                             side: str = "left", rho=None) -> QuantumRandomVariable:
    """Derivative-conjugated multiplier D^{-1/2} A D^{1/2} f (or mirrored).

    Defined only when the derivative is invertible on every atom; the
    1-norm of the result is bounded by 4 (1 + ||A||^2) ||f||_1.
    """
    _check_povm_qrv(nu, f)
    A = linalg.as_operator(A)
    deriv = nu.derivative(rho)
    if not deriv.invertible:
        raise MatrixNotPsd("conjugated multiplier needs an invertible derivative")
    out = []
    for x in range(f.m):
        R, Rinv = deriv.sqrts[x], deriv.inv_sqrts[x]
        if side == "left":
            out.append(Rinv @ A @ R @ f.values[x])
        else:
            out.append(f.values[x] @ R @ A @ Rinv)
    return QuantumRandomVariable(f.atoms, np.array(out))


@dataclass(frozen=True, eq=False)
class PositivityWitness:
    """Atom indicator and unit vector exhibiting a non-PSD bracket."""

    atom: str
    vector: np.ndarray
    bracket_value: np.ndarray


def detect_positive(f: QuantumRandomVariable, nu: Povm):
    """Positivity of f in the seminorm sense, with a witness on failure.

    f >= 0 holds iff every sandwiched value K_x f(x) K_x is PSD (with
    invertible derivatives this is pointwise positivity).  When it fails
    the witness pairs g = chi_atom with an eigenvector showing that the
    bracket <f, g I> is not PSD.
    """
    _check_povm_qrv(nu, f)
    roots = effect_roots(nu)
    for x in range(f.m):
        Zfull = roots[x] @ f.values[x] @ roots[x]
        not_hermitian = not linalg.is_hermitian(Zfull, 1e-9)
        lam, V = np.linalg.eigh(linalg.hermitian_part(Zfull))
        negative = lam[0] < -linalg.PSD_TOL * (1.0 + abs(lam[-1]) + abs(lam[0]))
        if not_hermitian or negative:
            return False, PositivityWitness(
                atom=f.atoms[x], vector=V[:, 0], bracket_value=Zfull)
    return True, None


def bracket_separation_witness(f: QuantumRandomVariable, nu: Povm,
                               tol: float = 1e-9):
    """Find (s, g) with tr(s <f, g I>) != 0 for any f away from the kernel.

    Searches indicator multipliers g = chi_atom and states s built from
    the singular vectors of the sandwiched values.  Returns
    ``(s, atom_label, pairing)`` or ``None`` when f is in the kernel.
    """
    _check_povm_qrv(nu, f)
    roots = effect_roots(nu)
    best = None
    for x in range(f.m):
        Z = roots[x] @ f.values[x] @ roots[x]
        U, sv, Vh = np.linalg.svd(Z)
        if sv.size == 0 or sv[0] <= tol:
            continue
        # s = (u + v)(u + v)^*/n maximises |tr(s Z)| up to constants
        for s_vec in (Vh[0].conj() + U[:, 0], Vh[0].conj(), U[:, 0]):
            nrm = np.linalg.norm(s_vec)
            if nrm <= tol:
                continue
            s = np.outer(s_vec, s_vec.conj()) / nrm ** 2
            pairing = complex(np.trace(s @ Z))
            if abs(pairing) > tol and (best is None or abs(pairing) > abs(best[2])):
                best = (s, f.atoms[x], pairing)
    return best
