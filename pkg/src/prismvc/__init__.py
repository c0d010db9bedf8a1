"""Distance geometry over F_q^d: spheres, chain counts, prisms, bad sets,
VC dimension of sphere-intersection classifiers, and a PAC simulator.

All computations are exact (integer bitsets and rational arithmetic); bounds
that can genuinely fail at small scale are reported rather than asserted.
"""

__version__ = "0.1.0"

from .field import (FieldParams, Point, PointSet, all_points, distance, dot,
                    index_point, norm, point_add, point_index, point_sub,
                    reduce_point)
from .geometry import (AffineSubspace, Sphere, affine_rank,
                       affine_sphere_intersection, is_affinely_independent,
                       pole_bound_check, poles, slice_bound_check,
                       sphere_points, sphere_sizes, translate_pointset,
                       verify_sphere_size_bounds)
from .graph import (DistanceGraph, GammaCheck, PairPathCounts, build_graph,
                    gamma_bound_check, gamma_k, two_path_counts)
from .prism import (BadSetReport, Prism, PrismClass, bad_prism_census,
                    classify_prism, count_prisms_formula, enumerate_prisms,
                    find_bad_sets, affinely_nondegenerate_fraction,
                    greedy_independent_poles, prisms_admitting_no_bad_set)
from .vc import (AuditReport, Hypothesis, ShatterWitness, VcResult,
                 WitnessError, class_size, dichotomy_patterns, hypotheses,
                 is_shattered, membership_rows, pair_hypothesis,
                 shatter_witness, single_hypothesis, upper_bound_audit,
                 validate_witness, vc_dimension)
from .pac import (LearningTask, SweepResult, disagreement_count, draw_sample,
                  erm_learn, loss_ceiling, make_task, mc_loss_estimate,
                  sample_complexity_sweep, true_loss)
from .harness import (CheckResult, ExperimentConfig, ResultRecord,
                      load_pointset, resolve_pointset, run_command)
from .kernels import BACKEND, available_backends

__all__ = [name for name in dir() if not name.startswith("_")]
