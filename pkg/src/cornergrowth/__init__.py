"""Up-right path energies in random environments.

Exact lattice-path combinatorics (counting, inclusion probabilities,
uniform sampling), random weight environments, quenched central-limit
experiments, scaling diagnostics, and last-passage / polymer
comparators, with a CLI driver (``cornergrowth``).
"""

from .environment import (Environment, WeightDistribution, centered_exponential,
                          centered_geometric, centered_uniform, empirical_moments,
                          load_environment, rademacher, sample_environment,
                          save_environment, standard_normal, truncate)
from .errors import (CornerGrowthError, EnumerationCapError,
                     InfeasibleEnsembleError, ParameterError)
from .lpp import last_passage, log_partition, polymer_weights, typical_vs_max
from .paths import (AllPaths, CountTable, Forbidden, HoleSpec, PathEnsemble,
                    UpRightPath, Waypoints, build_counts, enumerate_paths,
                    hole_ensemble, inclusion_probability, path_energy,
                    sample_path)
from .qclt import (GaussDistance, QuenchedSample, convergence_experiment,
                   exact_quenched_law, gauss_distance, quenched_sample)
from .scaling import (Admissibility, ConcentrationBound, ConcentrationParams,
                      ScalingReport, compute_L, concentration_bound,
                      diagonal_maxima, fit_lambda, hole_inclusion_formula,
                      hypergeometric_mode, hypergeometric_probability,
                      qclt_admissibility)

__version__ = "0.1.0"
