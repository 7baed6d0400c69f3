"""Prototype selection for interpretable nearest-prototype classification."""

from .classify import ClassifierReport, Prediction, evaluate_classifier, predict
from .cover import (BallIncidence, LabeledDataset, PcscSubproblem, PrototypeProblem,
                    PrototypeSolution, build_incidence, decompose, decomposition_identity,
                    evaluate_solution, exact_objectives, make_problem)
from .dissim import (compute_dissimilarity, cross_dissimilarity, default_grid,
                     distance_quantiles, kernel_to_distance, rank_transform)
from .errors import InputError, ProtoselError, SolverError, StateError
from .greedy import GreedyStep, delta_objective, solve_greedy
from .lpround import (LinearProgramDense, LpSolution, RoundingOutcome, build_lp,
                      randomized_round, solve_lp, solve_lp_rounding)
from .oracle import OracleResult, solve_exact
from .select import (CvReport, augment_candidates_kmeans, cross_validate, lloyd_kmeans,
                     make_folds, one_se_rule, solve)

__version__ = "0.1.0"
