"""Sparse regular-vine copula models via penalized regression paths.

The pipeline: put data on the z scale (`data`), order the variables and
select a structure matrix together with its per-cell penalty matrix
(`selection`), threshold the penalties into an independence pattern
(`thresholds`), fit pair copulas on the surviving edges (`estimation`),
and score or sample the fitted model. `dissmann` provides the greedy
spanning-tree baseline and `cli` the batch front-end.
"""

from .copulas import (DEFAULT_FAMILIES, FAMILIES, INDEPENDENCE, PairCopula,
                      PairCopulaFit, fit_pair, independence_test, kendall_tau,
                      sample_pair)
from .data import (Dataset, Scale, load_csv, to_pseudo_observations,
                   to_u_scale, to_z_scale)
from .dissmann import DissmannConfig, fit_dissmann
from .errors import (ContractError, DataError, NumericError, ParseError,
                     SparseVineError, StructureError)
from .estimation import (FittedVine, InformationCriteria, compute_loglik, fit,
                         information_criteria, simulate, truncate)
from .lasso import (CVResult, LassoProblem, RegularizationPath, cross_validate,
                    lambda_grid, path, solve)
from .rvine import (Edge, IndependencePattern, RVineMatrix, SemModel,
                    allowed_entries, blacklist, candidate_pool, edges_of_tree,
                    matrix_from_first_tree, matrix_from_trees, validate)
from .selection import (OrderingResult, PcfEvent, StructureResult,
                        assemble_sem, lasso_ordering, select_first_tree,
                        select_higher_trees, select_structure)
from .thresholds import (ThresholdSpec, adaptive_threshold,
                         apply_threshold, default_threshold_grid,
                         path_threshold_grid, single_threshold)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
