"""Pareto frontiers, slope decompositions and singular value regions of dual norm pairs."""

from .core import (Decomposition, InputError, NormPair, NotTightError, ParetoError,
                   PreconditionError, SolverError, check_x2, gallery_ellipse_pair,
                   gallery_skew_pair, gsparse, inner, is_unitangent, slope_mu)
from .l1 import l1_frontier, l1_pair, l1_slope_decomposition, soft_threshold
from .matrix import (matrix_frontier, matrix_slope_decomposition, matrix_sv_region,
                     nuclear_spectral_pair, sv_hard_threshold, sv_soft_threshold, svd)
from .pareto import (ParetoCurve, SlopeDecomposition, SVRegion, TightnessReport,
                     area_checks, concat_curves, frontier, proj_y_radius, shrink,
                     slope_decomposition, solve_m2x, subfrontier, sv_region,
                     tightness_test)
from .quotient import (bpdn, dantzig, gsparse_2d, ista_proj, lasso, quotient_pair,
                       trend_filter_pair, tv2d_pair)
from .tensor import (dsvd_to_slope, ft_norms, ft_subfrontier, group_algebra_frontier,
                     known_tensors, spectral_norm, t_orthogonality_check)
from .tv1d import (diff, diff_adjoint, face_counts, signature_faces, taut_string,
                   tv_frontier, tv_pair, unitangent_from_signature)

__version__ = "0.1.0"
