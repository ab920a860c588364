"""Multi-objective blind source separation for ion-selective electrode arrays."""

from .errors import (
    DataError,
    DegenerateChannelError,
    DegenerateDataError,
    DomainError,
    EvaluationError,
    ExponentOverflowError,
    NumericalError,
    PnlsepError,
)
from .mixing import MixingModel, SynthConfig, ne_mix, separate, synth_generate
from .objectives import (
    EvalConfig,
    EvaluatedCandidate,
    ObjectiveVector,
    evaluate_candidate,
    nernst_criterion,
    offdiag_criterion,
)
from .signals import (
    LaggedCovariance,
    SignalMatrix,
    SirReport,
    lagged_covariance,
    least_squares_gain,
    match_and_score,
    scale_correct,
    sir,
    symmetrize,
)
from .sobi import JointDiagResult, WhiteningResult, givens_joint_diag, sobi, whiten
from .spea2 import (
    Archive,
    Individual,
    Spea2Config,
    assign_fitness,
    binary_tournament,
    crossover,
    dominates,
    environmental_selection,
    mutate,
    nondominated_filter,
    run_mono,
    run_spea2,
)

__version__ = "0.1.0"
