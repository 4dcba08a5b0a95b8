"""Search with lackadaisical and Szegedy quantum walks on regular graphs.

Set ``LACKAWALK_BACKEND=numpy`` before import to bypass the numba kernels.
"""

from ._backend import BACKEND
from .classical import hitting_time_exact, hitting_time_monte_carlo, interpolated_matrix, lazy_matrix, walk_matrix
from .coined import CoinConfig, Walker, initial_state_lazy, step_L, step_Lhat, success_probability
from .graphs import (GraphError, GraphFamilySpec, MarkedInstance, RegularGraph, build_graph, complete,
                     complete_bipartite, cycle, hypercube, is_locally_arc_transitive, johnson, moebius_ladder,
                     paley, torus)
from .spectral import Spectrum, cotangent_qht_from_spectrum, discriminant, eigendecompose, interpolated_hitting_time
from .szegedy import EdgeSpace, FrameIsometries, InterpolatedWalks, lift_eigenpairs, theorem2_distances
from .verification import (ClaimReport, check_facts, check_invariance, check_lemma1, check_lemma2, check_lemma3,
                           check_theorem1, check_theorem2, search_experiment)

__version__ = "0.1.0"
