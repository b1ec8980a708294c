"""Self-paced pixel weighting for NMF-based community detection on noisy graphs."""

from .errors import NumericalError, ParseError, SilencerError, ValidationError
from .factorization import (
    FactorPair,
    FactorStack,
    FitReport,
    SolverOptions,
    assign_communities,
    danmf_fit,
    dnmf_fit,
    nmf_fit,
    pretrain,
    reconstruction_errors,
    silencer_danmf_fit,
    silencer_nmf_fit,
)
from .graph import Graph, LayerConfig, Partition, laplacian, load_edge_list, load_labels
from .harness import ExperimentConfig, MethodConfig, ResultsTable, run_experiment
from .kernels import BACKEND
from .metrics import ari, modularity, nmi, pairwise_f1
from .noise import GaParams, NoiseSpec, greedy_modularity_partition, perturb_mixed, perturb_random, qattack
from .selfpace import PaceSchedule, regularizer_value, soft_weight, update_weights

__version__ = "0.1.0"
