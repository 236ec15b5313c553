"""POVM integration, operator-valued L1 seminorms, and certified
majorization of quantum random variables on finite atomic spaces."""

from .errors import (CertificateInvalid, ComplexValued, DimMismatch,
                     FullRankRequired, InconsistentNullSet, MassMismatch,
                     MatrixNotPsd, NotDoublyStochastic, NotHermitian,
                     NotSelfAdjoint, NotUniform, QrvError, SolverStall,
                     SpaceMismatch)
from .l1 import (L1Certificate, SeparatingFunctional, bracket,
                 bracket_separation_witness, detect_positive, l1_lower_states,
                 l1_seminorm, l1_upper_abs, l1_value, mult_operator,
                 mult_operator_conjugated, mult_scalar)
from .linalg import (as_hermitian, as_operator, as_state, hermitian_eigen,
                     hermitian_part, is_psd, maximally_mixed, operator_norm,
                     positive_parts, psd_sqrt, trace_pairing)
from .majorize import (KomiyaSeparation, MajorizationCertificate,
                       apply_bistochastic, implication_suite, komiya_separate,
                       majorizes, majorizes_b, majorizes_s, majorizes_t,
                       psi_phi, scalarize_classical)
from .measure import (BistochasticMatrix, ClassicalFunction, FarkasCertificate,
                      FiniteMeasureSpace, bistochastic_witness,
                      birkhoff_decompose, classical_majorizes,
                      convex_function_test, decreasing_rearrangement,
                      distribution_function)
from .povm import (Povm, QuantumRandomVariable, RnDerivative,
                   dyadic_identity_truncation, induced_measure, induced_space,
                   integrate, linf_norm, rn_derivative, scalarize,
                   swap_multiplier_truncation)
from .solver import (LpInfeasible, LpOptimal, LpProblem, LpUnbounded,
                     SdpBlock, SdpProblem, lp_solve, sdp_solve)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
