"""d-tolerant compressed sensing with partially coherent sensing matrices."""
from .coherence import (
    CoherenceClass,
    CoherenceReport,
    GuaranteeReport,
    admissible_d_range,
    check_theorem2,
    check_trc_bruteforce,
    classify_coherence_functions,
    coherence,
    coherence_function,
    coherence_report,
    column_correlation,
    cumulative_d_coherence,
    d_coherence,
    welch_bound,
)
from .kernels import BACKEND
from .matrices import MatrixKind, MatrixSpec, SensingMatrix, build, column_normalize, dft_matrix
from .metrics import (
    SupportSet,
    d_closure,
    is_d_approximate_pair,
    is_d_spread,
    rho_2,
    rho_d,
    s_max,
)
from .recovery import RecoveryResult, dtomp, omp
from .signals import NoiseSpec, SparseSignal, generate_signal, measure

__version__ = "0.1.0"
