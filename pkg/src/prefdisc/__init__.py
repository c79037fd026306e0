"""Softmax choice under deadlines: behavioral axioms, identification, and
drift-diffusion exploration with a softmax stationary law."""

__version__ = "0.1.0"

from .axioms import (DEFAULT_BANDS, AxiomReport, Bands, Witness, audit, check_choice_axiom,
                     check_consistency, check_decreasing_error_rate, check_positivity,
                     check_relative_invariance, fit_luce)
from .chain import (MarkovKernel, ReversibilityReport, RunTrace, Step, build_exploration,
                    check_reversibility, incumbent_matrix, run, stationary, stationary_oracle)
from .core import (ChoiceDistribution, EvidenceStats, RevealedRelations, SoftmaxParams,
                   TimeGrid, duality_inverse, duality_map, evidence_stats, limit_rule, log_odds,
                   relations_from_utility, revealed_relations, softmax_dist, softmax_prob,
                   stochastically_dominates, weight_matrix, weight_of_evidence)
from .dataset import (ChoiceDataset, dataset_from_dict, from_luce, from_softmax, load_dataset,
                      sample_dataset, save_dataset)
from .ddm import (DdmSpec, GibbsPrior, acceptance_prob, g_function, gibbs_posterior,
                  gibbs_prior_binary, is_transitive, prior_from_transitive_zeta,
                  sample_comparison, sample_comparisons, zeta_from_global_prior,
                  zeta_from_prior_binary)
from .errors import (ConvergenceError, DegenerateOddsError, IntransitiveError,
                     InvalidNeuralBiasError, MissingDataError, NotSoftmaxError, PrefdiscError,
                     RunawayError, SchemaError, UnsupportedSizeError)
from .experiments import (PipelineConfig, SimulationConfig, SimulationReport, pipeline, preset,
                          reproduce, simulate)
from .identify import (IdentifiedParams, cross_validate, find_anchor, identify,
                       params_equivalent)
