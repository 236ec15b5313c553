"""Exception types shared across the package.

Validation failures raise a subclass of :class:`QrvError`; the CLI maps
them to exit code 2.  Solver stalls carry the best certificate found so
far and map to exit code 3.
"""


class QrvError(Exception):
    """Base class for all validation and domain errors."""


class DimMismatch(QrvError):
    """Operator dimensions do not match."""


class MatrixNotPsd(QrvError):
    """A matrix required to be positive semidefinite is not."""


class NotHermitian(QrvError):
    """A matrix required to be Hermitian is not."""


class NotSelfAdjoint(QrvError):
    """An operator-valued function required to be pointwise Hermitian is not."""


class ComplexValued(QrvError):
    """A function required to be real-valued has a non-negligible imaginary part."""


class MassMismatch(QrvError):
    """Total masses of two measure spaces differ."""


class SpaceMismatch(QrvError):
    """Two objects do not live over the same atomic space."""


class NotUniform(QrvError):
    """Atom masses are required to be equal but are not."""


class NotDoublyStochastic(QrvError):
    """Matrix fails the doubly stochastic invariants."""


class FullRankRequired(QrvError):
    """A full-rank state is required but the given one is singular."""


class InconsistentNullSet(QrvError):
    """An induced measure vanishes on an atom whose effect does not."""


class SolverStall(QrvError):
    """Optimizer hit its iteration cap before reaching the requested gap.

    The best certificate found (with its honest gap) is attached as
    ``certificate`` when available.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class CertificateInvalid(QrvError):
    """A certificate failed independent re-verification."""
