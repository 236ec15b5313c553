"""POVMs on atomic spaces, induced measures, operator-valued derivatives,
quantum random variables, scalarization and POVM-integration.

A POVM here is one PSD effect per atom; the measure of a subset is the
sum of its effects.  For a full-rank state rho the induced scalar
measure is nu_rho(x) = tr(rho Q_x) and the operator-valued derivative is
D(x) = Q_x / nu_rho(x).  Integration of an operator-valued function f is

    integral f dnu = sum_x nu_rho(x) * D(x)^{1/2} f(x) D(x)^{1/2},

which is independent of the chosen full-rank rho (the weights cancel).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (DimMismatch, FullRankRequired, InconsistentNullSet,
                     MatrixNotPsd, SpaceMismatch)
from .measure import ClassicalFunction, FiniteMeasureSpace

ZERO_EFFECT_TOL = 1e-14
ZERO_MASS_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive operator-valued measure on labelled atoms.

    Atoms whose effect is (numerically) the zero operator are dropped at
    construction; the atom masses are always derived from an induced
    measure, never stored.
    """

    atoms: tuple
    effects: np.ndarray  # (m, d, d), each Hermitian PSD

    def __init__(self, atoms, effects, psd_tol: float = linalg.PSD_TOL):
        atoms = tuple(str(a) for a in atoms)
        effects = np.asarray(effects, dtype=complex)
        if effects.ndim != 3 or effects.shape[1] != effects.shape[2]:
            raise DimMismatch(f"effects must be (m, d, d), got {effects.shape}")
        if len(atoms) != effects.shape[0]:
            raise DimMismatch("atom count and effect count differ")
        if len(set(atoms)) != len(atoms):
            raise ValueError("atom labels must be unique")
        scale = 1.0 + max(
            (linalg.operator_norm(Q) for Q in effects), default=0.0
        )
        keep, kept_effects = [], []
        for a, Q in zip(atoms, effects):
            if linalg.operator_norm(Q) <= ZERO_EFFECT_TOL * scale:
                continue
            Q = linalg.as_hermitian(Q)
            if not linalg.is_psd(Q, psd_tol):
                raise MatrixNotPsd(f"effect at atom {a!r} is not PSD")
            keep.append(a)
            kept_effects.append(Q)
        if not keep:
            raise ValueError("POVM has no nonzero effect")
        object.__setattr__(self, "atoms", tuple(keep))
        object.__setattr__(self, "effects", np.array(kept_effects))
        object.__setattr__(self, "_default_deriv", None)

    @property
    def m(self) -> int:
        return len(self.atoms)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def total(self) -> np.ndarray:
        """nu(X), the sum of all effects."""
        return linalg.hermitian_part(self.effects.sum(axis=0))

    @property
    def is_probability_measure(self) -> bool:
        """True when nu(X) = I (normalized POVM)."""
        return bool(
            linalg.operator_norm(self.total() - np.eye(self.dim)) <= 1e-9
        )

    @property
    def is_classical(self) -> bool:
        """True when every effect is a positive multiple of the identity."""
        d = self.dim
        for Q in self.effects:
            mu = np.trace(Q).real / d
            if linalg.operator_norm(Q - mu * np.eye(d)) > 1e-12 * (1.0 + mu):
                return False
        return True

    @staticmethod
    def classical(space: FiniteMeasureSpace, dim: int) -> "Povm":
        """The POVM mu * I attached to a classical measure space."""
        eye = np.eye(dim, dtype=complex)
        return Povm(space.atoms, np.array([mu * eye for mu in space.masses]))

    def classical_masses(self) -> np.ndarray:
        """Masses mu(x) for a classical POVM mu * I."""
        if not self.is_classical:
            raise MatrixNotPsd("POVM is not of the form mu * I")
        return np.array([np.trace(Q).real / self.dim for Q in self.effects])

    def derivative(self, rho=None) -> "RnDerivative":
        """Radon-Nikodym derivative w.r.t. the measure induced by rho.

        With no argument the maximally mixed state is used and the result
        is cached on the POVM.
        """
        if rho is None:
            cached = object.__getattribute__(self, "_default_deriv")
            if cached is None:
                cached = rn_derivative(self, linalg.maximally_mixed(self.dim))
                object.__setattr__(self, "_default_deriv", cached)
            return cached
        return rn_derivative(self, rho)


@dataclass(frozen=True, eq=False)
class QuantumRandomVariable:
    """Operator-valued function on atoms: one d x d matrix per atom."""

    atoms: tuple
    values: np.ndarray  # (m, d, d)

    def __init__(self, atoms, values):
        atoms = tuple(str(a) for a in atoms)
        values = np.asarray(values, dtype=complex)
        if values.ndim != 3 or values.shape[1] != values.shape[2]:
            raise DimMismatch(f"values must be (m, d, d), got {values.shape}")
        if len(atoms) != values.shape[0]:
            raise DimMismatch("atom count and value count differ")
        if not (np.all(np.isfinite(values.real)) and np.all(np.isfinite(values.imag))):
            raise ValueError("values contain NaN or Inf")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return len(self.atoms)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def adjoint(self) -> "QuantumRandomVariable":
        return QuantumRandomVariable(self.atoms, self.values.conj().transpose(0, 2, 1))

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        return all(linalg.is_hermitian(A, tol) for A in self.values)

    def hermitian_decomposition(self):
        """Pointwise (Re f, Im_h f) with f = Re f + i Im_h f, both Hermitian."""
        adjv = self.values.conj().transpose(0, 2, 1)
        re = (self.values + adjv) / 2
        im = (self.values - adjv) / 2j
        return re, im

    def pointwise_abs(self) -> "QuantumRandomVariable":
        vals = np.array([linalg.positive_parts(linalg.as_hermitian(A))[2]
                         for A in self.values])
        return QuantumRandomVariable(self.atoms, vals)

    @staticmethod
    def constant(atoms, A) -> "QuantumRandomVariable":
        A = linalg.as_operator(A)
        return QuantumRandomVariable(atoms, np.array([A] * len(atoms)))

    @staticmethod
    def indicator(atoms, subset, dim: int) -> "QuantumRandomVariable":
        """chi_E * I for a subset E of atom labels."""
        subset = {str(a) for a in subset}
        eye = np.eye(dim, dtype=complex)
        vals = [eye if str(a) in subset else np.zeros_like(eye) for a in atoms]
        return QuantumRandomVariable(atoms, np.array(vals))

    def __add__(self, other):
        _check_same_atoms(self, other)
        return QuantumRandomVariable(self.atoms, self.values + other.values)

    def __sub__(self, other):
        _check_same_atoms(self, other)
        return QuantumRandomVariable(self.atoms, self.values - other.values)

    def __mul__(self, c):
        return QuantumRandomVariable(self.atoms, self.values * complex(c))

    __rmul__ = __mul__


def _check_same_atoms(a, b):
    if a.atoms != b.atoms:
        raise SpaceMismatch("objects live over different atoms")


def _check_povm_qrv(nu: Povm, f: QuantumRandomVariable):
    if nu.atoms != f.atoms:
        raise SpaceMismatch("QRV and POVM live over different atoms")
    if nu.dim != f.dim:
        raise DimMismatch(f"dimension mismatch: POVM {nu.dim}, QRV {f.dim}")


@dataclass(frozen=True, eq=False)
class RnDerivative:
    """Cached operator-valued derivative data for one (nu, rho) pair."""

    rho: np.ndarray
    masses: np.ndarray        # nu_rho per atom, all > 0
    matrices: np.ndarray      # D(x) = Q_x / nu_rho(x)
    sqrts: np.ndarray         # D(x)^{1/2}
    inv_sqrts: np.ndarray | None  # D(x)^{-1/2} when every D(x) is invertible

    @property
    def invertible(self) -> bool:
        return self.inv_sqrts is not None

    def sup_norm(self) -> float:
        """ess-sup of ||D(x)||."""
        return max(linalg.operator_norm(D) for D in self.matrices)

    def inv_sup_norm(self) -> float:
        if not self.invertible:
            raise MatrixNotPsd("derivative is not invertible on every atom")
        return max(linalg.operator_norm(S @ S) for S in self.inv_sqrts)


def induced_measure(nu: Povm, rho, full_rank: bool | None = None) -> np.ndarray:
    """Masses of the induced measure nu_rho(x) = tr(rho Q_x).

    ``full_rank=True`` asserts the state is full-rank (raising
    :class:`FullRankRequired` otherwise); with ``None`` it is detected.
    A vanishing mass on an atom with a nonzero effect contradicts mutual
    absolute continuity for full-rank states and raises
    :class:`InconsistentNullSet`.
    """
    rho = linalg.as_state(rho)
    if rho.shape[0] != nu.dim:
        raise DimMismatch("state dimension does not match POVM")
    if full_rank is None:
        full_rank = linalg.is_full_rank_state(rho)
    elif full_rank and not linalg.is_full_rank_state(rho):
        raise FullRankRequired("state declared full-rank is singular")
    masses = np.array([np.trace(rho @ Q).real for Q in nu.effects])
    if full_rank:
        scale = 1.0 + masses.max(initial=0.0)
        bad = masses <= ZERO_MASS_TOL * scale
        if np.any(bad):
            raise InconsistentNullSet(
                f"full-rank state induces zero mass on atoms "
                f"{[nu.atoms[i] for i in np.flatnonzero(bad)]}"
            )
    return np.clip(masses, 0.0, None)


def induced_space(nu: Povm, rho=None) -> FiniteMeasureSpace:
    """The induced measure as a measure space (full-rank rho required)."""
    rho = linalg.maximally_mixed(nu.dim) if rho is None else rho
    masses = induced_measure(nu, linalg.require_full_rank_state(rho),
                             full_rank=True)
    return FiniteMeasureSpace(nu.atoms, masses)


def rn_derivative(nu: Povm, rho) -> RnDerivative:
    """D(x) = Q_x / nu_rho(x) with cached square roots."""
    rho = linalg.require_full_rank_state(rho)
    masses = induced_measure(nu, rho, full_rank=True)
    matrices = np.array([Q / w for Q, w in zip(nu.effects, masses)])
    sqrts = np.array([linalg.psd_sqrt(D) for D in matrices])
    inv = None
    lam_mins = [linalg.lambda_min(D) for D in matrices]
    if min(lam_mins) > 1e-12 * (1.0 + max(map(abs, lam_mins))):
        inv = np.array([np.linalg.inv(S) for S in sqrts])
    return RnDerivative(rho=rho, masses=masses, matrices=matrices,
                        sqrts=sqrts, inv_sqrts=inv)


def scalarize(f: QuantumRandomVariable, nu: Povm, s, rho=None) -> ClassicalFunction:
    """f_s(x) = tr(s D(x)^{1/2} f(x) D(x)^{1/2}) over the induced space."""
    _check_povm_qrv(nu, f)
    s = linalg.as_state(s)
    deriv = nu.derivative(rho)
    vals = np.array([
        np.trace(s @ (R @ A @ R)) for R, A in zip(deriv.sqrts, f.values)
    ])
    return ClassicalFunction(FiniteMeasureSpace(nu.atoms, deriv.masses), vals)


def integrate(f: QuantumRandomVariable, nu: Povm, rho=None) -> np.ndarray:
    """The POVM integral of f against nu (independent of the full-rank rho)."""
    _check_povm_qrv(nu, f)
    deriv = nu.derivative(rho)
    total = np.zeros((nu.dim, nu.dim), dtype=complex)
    for w, R, A in zip(deriv.masses, deriv.sqrts, f.values):
        total += w * (R @ A @ R)
    return total


def linf_norm(f: QuantumRandomVariable, masses=None) -> float:
    """Essential supremum of ||f(x)||; zero-mass atoms are ignored."""
    if masses is None:
        keep = range(f.m)
    else:
        masses = np.asarray(masses, dtype=float)
        scale = 1.0 + masses.max(initial=0.0)
        keep = [i for i in range(f.m) if masses[i] > ZERO_MASS_TOL * scale]
    return max((linalg.operator_norm(f.values[i]) for i in keep), default=0.0)


# ---------------------------------------------------------------------------
# Finite truncations of the two infinite-dimensional phenomena
# ---------------------------------------------------------------------------

def dyadic_space(depth: int) -> FiniteMeasureSpace:
    """Dyadic atoms i = 1..k of [0,1]: atom i is (2^-i, 2^-(i-1)] with mass 2^-i."""
    labels = [str(i) for i in range(1, depth + 1)]
    masses = np.array([2.0 ** -i for i in range(1, depth + 1)])
    return FiniteMeasureSpace(labels, masses)


def dyadic_identity_truncation(depth: int):
    """Depth-k truncation of the growing-dimension diagonal example.

    Returns ``(nu, f)`` with nu = mu * I on the dyadic atoms in dimension
    k and f(atom i) = 2^i e_ii.  The integral of f is the identity while
    the Bochner-style upper bound  || integral ||f(x)|| I dnu ||  equals
    the depth k, so it diverges as the truncation deepens.
    """
    space = dyadic_space(depth)
    nu = Povm.classical(space, depth)
    vals = np.zeros((depth, depth, depth), dtype=complex)
    for i in range(depth):
        vals[i, i, i] = 2.0 ** (i + 1)
    return nu, QuantumRandomVariable(space.atoms, vals)


def swap_multiplier_truncation(depth: int):
    """Depth-k truncation of the unbounded-multiplier example.

    Returns ``(nu, f, u)`` in dimension 2 on the dyadic atoms with
    nu(atom i) = diag(2^-i, 2^{i/2} * 2^-i), f(atom i) = 2^{i/2} e_11 and
    u the swap unitary.  The 1-norm of f stays below 1 + sqrt(2) at every
    depth while the 1-norm of u f u equals the depth k.
    """
    space = dyadic_space(depth)
    effects = np.zeros((depth, 2, 2), dtype=complex)
    vals = np.zeros((depth, 2, 2), dtype=complex)
    for idx in range(depth):
        i = idx + 1
        effects[idx] = np.diag([2.0 ** -i, 2.0 ** (i / 2.0) * 2.0 ** -i])
        vals[idx, 0, 0] = 2.0 ** (i / 2.0)
    u = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return (Povm(space.atoms, effects),
            QuantumRandomVariable(space.atoms, vals), u)
