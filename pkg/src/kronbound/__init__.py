"""Exact border-rank lower bounds via Koszul flattenings, with the
supporting tensor catalog, Schur reduction, box-parameterized families,
symmetry checks, decompositions and exponent bounds."""

from .errors import *  # noqa: F401,F403
from .linalg import BACKEND, RankResult, certify_rank
from .tensor import LinearMap, Tensor, apply_maps, kron_power, kronecker, tensors_equal
from .catalog import build, build_projection
from .koszul import FlatteningCertificate, border_rank_lower_bound, flattening_matrix, power_border_rank_lower_bound
from .bounds import bini_omega, cw_power_lower_bound, omega_bound

__version__ = "0.1.0"
