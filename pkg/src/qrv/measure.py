"""Finite atomic measure spaces and classical majorization machinery.

Atoms only: a measure space is a list of labelled atoms with strictly
positive masses, functions are one value per atom, and the distribution
function / decreasing rearrangement / majorization comparisons of the
continuous theory reduce to exact piecewise-linear computations on step
functions.  Majorization witnesses (a bistochastic matrix, or a Farkas
vector proving none exists) come from the LP engine and are re-verified
before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (ComplexValued, MassMismatch, NotDoublyStochastic,
                     NotUniform, SpaceMismatch)
from .solver import LpInfeasible, LpOptimal, LpProblem, lp_solve

REAL_TOL = 1e-12
SUM_TOL = 1e-9
WITNESS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    """Atomic measure space: unique labels with strictly positive masses."""

    atoms: tuple
    masses: np.ndarray

    def __init__(self, atoms, masses):
        atoms = tuple(str(a) for a in atoms)
        masses = np.asarray(masses, dtype=float)
        if len(atoms) != masses.size:
            raise ValueError("label count and mass count differ")
        if len(set(atoms)) != len(atoms):
            raise ValueError("atom labels must be unique")
        if masses.size == 0:
            raise ValueError("a measure space needs at least one atom")
        if not np.all(np.isfinite(masses)) or np.any(masses <= 0.0):
            raise ValueError("all masses must be finite and strictly positive")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", masses)

    @property
    def m(self) -> int:
        return len(self.atoms)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def is_uniform(self) -> bool:
        return bool(np.ptp(self.masses) <= SUM_TOL * (1.0 + self.masses.max()))

    @staticmethod
    def uniform(m: int, total: float = 1.0, labels=None) -> "FiniteMeasureSpace":
        labels = labels if labels is not None else [str(i) for i in range(m)]
        return FiniteMeasureSpace(labels, np.full(m, total / m))

    def same_atoms(self, other: "FiniteMeasureSpace") -> bool:
        return self.atoms == other.atoms and np.allclose(
            self.masses, other.masses, rtol=0.0, atol=SUM_TOL
        )


@dataclass(frozen=True, eq=False)
class ClassicalFunction:
    """One scalar value per atom of a finite measure space."""

    space: FiniteMeasureSpace
    values: np.ndarray

    def __init__(self, space, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != (space.m,):
            raise ValueError(f"expected {space.m} values, got shape {values.shape}")
        if not (np.all(np.isfinite(values.real)) and np.all(np.isfinite(values.imag))):
            raise ValueError("function values contain NaN or Inf")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", values)

    def real_values(self, tol: float = REAL_TOL) -> np.ndarray:
        if np.abs(self.values.imag).max(initial=0.0) > tol:
            raise ComplexValued("function has a non-negligible imaginary part")
        return self.values.real.copy()

    def integral(self) -> complex:
        return complex(np.sum(self.values * self.space.masses))


def distribution_function(f: ClassicalFunction, s: float) -> float:
    """mu({x : f(x) > s}) for a real-valued step function."""
    vals = f.real_values()
    return float(f.space.masses[vals > s].sum())


def decreasing_rearrangement(f: ClassicalFunction):
    """Step-function rearrangement of f on [0, mu(X)].

    Returns ``(widths, values)`` with the atom values sorted in descending
    order and their masses as widths.  Ties keep the original atom order
    (the result is the same step function either way).
    """
    vals = f.real_values()
    order = np.argsort(-vals, kind="stable")
    return f.space.masses[order].copy(), vals[order]


def rearrangement_cumulative(widths, values):
    """Breakpoints and cumulative integrals of a rearrangement step function."""
    t = np.concatenate([[0.0], np.cumsum(widths)])
    F = np.concatenate([[0.0], np.cumsum(widths * values)])
    return t, F


def classical_majorizes(f: ClassicalFunction, g: ClassicalFunction,
                        tol: float = SUM_TOL) -> bool:
    """Strong spectral order: f is majorized by g.

    True iff the cumulative integrals of the decreasing rearrangements
    satisfy F(t) <= G(t) at every breakpoint of either step function and
    the total integrals agree.  The spaces may differ as long as the
    total masses match.
    """
    a1, a2 = f.space.total_mass, g.space.total_mass
    if abs(a1 - a2) > tol * (1.0 + max(a1, a2)):
        raise MassMismatch(f"total masses differ: {a1} vs {a2}")
    tf, Ff = rearrangement_cumulative(*decreasing_rearrangement(f))
    tg, Fg = rearrangement_cumulative(*decreasing_rearrangement(g))
    scale = 1.0 + max(np.abs(Ff).max(), np.abs(Fg).max())
    if abs(Ff[-1] - Fg[-1]) > tol * scale:
        return False
    # both cumulatives are piecewise linear; comparing on the merged
    # breakpoints decides the inequality everywhere
    ts = np.unique(np.concatenate([tf, tg]))
    Fi = np.interp(ts, tf, Ff)
    Gi = np.interp(ts, tg, Fg)
    return bool(np.all(Fi <= Gi + tol * scale))


def majorization_margin(f: ClassicalFunction, g: ClassicalFunction) -> float:
    """Largest violation of the partial-sum inequalities, per unit mass.

    Positive iff the partial-integral comparison fails somewhere; used to
    quantify how strongly a refuting direction separates f from g.
    """
    tf, Ff = rearrangement_cumulative(*decreasing_rearrangement(f))
    tg, Fg = rearrangement_cumulative(*decreasing_rearrangement(g))
    ts = np.unique(np.concatenate([tf[1:], tg[1:]]))
    Fi = np.interp(ts, tf, Ff)
    Gi = np.interp(ts, tg, Fg)
    return float(((Fi - Gi) / ts).max())


@dataclass(frozen=True, eq=False)
class BistochasticMatrix:
    """Entrywise-nonnegative matrix with B1 = 1 and mu^T B = mu^T."""

    space: FiniteMeasureSpace
    matrix: np.ndarray

    def __init__(self, space, matrix):
        B = np.asarray(matrix, dtype=float)
        m = space.m
        if B.shape != (m, m):
            raise NotDoublyStochastic(f"expected a {m}x{m} matrix, got {B.shape}")
        if B.min(initial=0.0) < -1e-12:
            raise NotDoublyStochastic(f"negative entry {B.min():.2e}")
        row = np.abs(B.sum(axis=1) - 1.0).max(initial=0.0)
        if row > SUM_TOL:
            raise NotDoublyStochastic(f"row sums off by {row:.2e}")
        mu = space.masses
        col = np.abs(mu @ B - mu).max(initial=0.0)
        if col > SUM_TOL * (1.0 + mu.max()):
            raise NotDoublyStochastic(f"mass preservation off by {col:.2e}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", B)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Act on a classical function: (Bf)(i) = sum_j B_ij f(j)."""
        return self.matrix @ np.asarray(values)

    @staticmethod
    def identity(space) -> "BistochasticMatrix":
        return BistochasticMatrix(space, np.eye(space.m))

    @staticmethod
    def averaging(space) -> "BistochasticMatrix":
        """Rank-one projection onto the mu-average."""
        mu = space.masses / space.total_mass
        return BistochasticMatrix(space, np.tile(mu, (space.m, 1)))


@dataclass(frozen=True, eq=False)
class FarkasCertificate:
    """Dual vector proving Ax = b, x >= 0 infeasible: A^T y <= 0, b @ y > 0."""

    y: np.ndarray
    A: np.ndarray
    b: np.ndarray
    margin: float

    def verify(self, tol: float = WITNESS_TOL) -> bool:
        scale = 1.0 + max(np.abs(self.A).max(initial=0.0),
                          np.abs(self.b).max(initial=0.0))
        ok_cone = (self.A.T @ self.y).max(initial=0.0) <= tol * scale
        return bool(ok_cone and self.b @ self.y > tol)


def _witness_lp(f: ClassicalFunction, g: ClassicalFunction) -> LpProblem:
    """Feasibility LP for a bistochastic B with Bg = f on a common space."""
    m = f.space.m
    mu = f.space.masses
    gv, fv = g.values, f.values
    complex_data = (np.abs(gv.imag).max(initial=0.0) > REAL_TOL
                    or np.abs(fv.imag).max(initial=0.0) > REAL_TOL)
    rows, rhs = [], []
    for i in range(m):  # B 1 = 1
        r = np.zeros(m * m)
        r[i * m:(i + 1) * m] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for j in range(m):  # mu^T B = mu^T
        r = np.zeros(m * m)
        r[j::m] = mu
        rows.append(r)
        rhs.append(mu[j])
    for i in range(m):  # (Bg)(i) = f(i)
        r = np.zeros(m * m)
        r[i * m:(i + 1) * m] = gv.real
        rows.append(r)
        rhs.append(fv[i].real)
        if complex_data:
            r = np.zeros(m * m)
            r[i * m:(i + 1) * m] = gv.imag
            rows.append(r)
            rhs.append(fv[i].imag)
    return LpProblem(c=np.zeros(m * m), A=np.array(rows), b=np.array(rhs))


def bistochastic_witness(f: ClassicalFunction, g: ClassicalFunction):
    """Find B bistochastic with Bg = f, or certify that none exists.

    Returns a :class:`BistochasticMatrix` (any feasible witness) or a
    :class:`FarkasCertificate`.  Both are re-verified independently.
    """
    if not f.space.same_atoms(g.space):
        raise SpaceMismatch("witness search requires a common space")
    m = f.space.m
    lp = _witness_lp(f, g)
    res = lp_solve(lp)
    if isinstance(res, LpOptimal):
        B = BistochasticMatrix(f.space, np.clip(res.x.reshape(m, m), 0.0, None))
        resid = np.abs(B.apply(g.values) - f.values).max(initial=0.0)
        if resid > WITNESS_TOL * (1.0 + np.abs(f.values).max(initial=0.0)):
            raise NotDoublyStochastic(f"witness residual {resid:.2e}")
        return B
    if isinstance(res, LpInfeasible):
        y = res.farkas
        return FarkasCertificate(y=y, A=lp.A, b=lp.b, margin=float(lp.b @ y))
    raise NotDoublyStochastic("witness LP unbounded; constraint assembly broken")


def birkhoff_decompose(B: BistochasticMatrix, tol: float = WITNESS_TOL):
    """Birkhoff--von Neumann decomposition of a doubly stochastic matrix.

    Requires uniform masses.  Returns ``[(weight, permutation_array)]``
    with positive weights summing to one, at most (m-1)^2 + 1 terms, and
    reconstruction residual at most ``tol``.
    """
    if not B.space.is_uniform:
        raise NotUniform("Birkhoff decomposition needs equal atom masses")
    m = B.space.m
    R = B.matrix.copy()
    R[R < 1e-15] = 0.0
    terms = []
    max_terms = (m - 1) ** 2 + 1
    for _ in range(max_terms + m * m):
        level = R.max(initial=0.0)
        if level <= 1e-12:
            break
        # max-product perfect matching on the support picks a permutation
        with np.errstate(divide="ignore"):
            cost = -np.log(np.where(R > 0.0, R, 1e-300))
        rows, cols = linear_sum_assignment(cost)
        w = float(R[rows, cols].min())
        if w <= 1e-13:
            raise NotDoublyStochastic(
                "support admits no positive permutation; matrix is not "
                "doubly stochastic within tolerance"
            )
        perm = np.empty(m, dtype=int)
        perm[rows] = cols
        terms.append((w, perm))
        R[rows, cols] -= w
        R[R < 1e-13] = 0.0
    weights = np.array([w for w, _ in terms])
    recon = np.zeros((m, m))
    for w, perm in terms:
        recon[np.arange(m), perm] += w
    if abs(weights.sum() - 1.0) > SUM_TOL or len(terms) > max_terms:
        raise NotDoublyStochastic(
            f"decomposition failed: {len(terms)} terms, weight sum "
            f"{weights.sum():.12f}"
        )
    resid = np.abs(recon - B.matrix).max(initial=0.0)
    if resid > tol:
        raise NotDoublyStochastic(f"reconstruction residual {resid:.2e}")
    return terms


def hinge_family(f: ClassicalFunction, g: ClassicalFunction):
    """Convex functions generating the majorization order for step functions.

    Hinges t -> max(t - c, 0) at every value of f and g, plus +-identity
    (the identities enforce equality of the total integrals).
    """
    cs = np.unique(np.concatenate([f.real_values(), g.real_values()]))
    family = [lambda t, c=c: np.maximum(t - c, 0.0) for c in cs]
    family.append(lambda t: t)
    family.append(lambda t: -t)
    return family


def convex_function_test(f: ClassicalFunction, g: ClassicalFunction,
                         psi_family=None, tol: float = SUM_TOL) -> bool:
    """Check int psi(f) dmu <= int psi(g) dmu for a family of convex psi."""
    if psi_family is None:
        psi_family = hinge_family(f, g)
    fv, gv = f.real_values(), g.real_values()
    mf, mg = f.space.masses, g.space.masses
    scale = 1.0 + max(np.abs(fv).max(), np.abs(gv).max()) * max(
        f.space.total_mass, g.space.total_mass
    )
    for psi in psi_family:
        lhs = float(np.sum(psi(fv) * mf))
        rhs = float(np.sum(psi(gv) * mg))
        if lhs > rhs + tol * scale:
            return False
    return True
