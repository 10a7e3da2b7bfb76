"""Design and evaluation toolkit for IRSA with K-packet multi-packet reception."""

__version__ = "0.1.0"

from .degree import (LAMBDA2, LAMBDA3, DegreeDistribution, EdgeView, derivative,
                     edge_perspective, evaluate, load_distribution, mean_degree,
                     save_distribution)
from .design import (A_STAR, DesignOutcome, SearchConfig, exponential_distribution, design,
                     load_bound, find_a_star, max_local_maximum, tilde_f,
                     tilde_f_prime_p)
from .energy import (PowerModel, coefficients, delta_ratio, efficiency, energy,
                     energy_sweep, optimal_L, table1)
from .evolution import (EvolutionParams, EvolutionTrace, FixedPointReport, de_step,
                        largest_root, residual, run_evolution, stop_function_k2,
                        threshold_search)
from .simulation import (FrameGraph, SimConfig, SimReport, plr_curve, run_trials,
                         sample_frame, sic_decode)
