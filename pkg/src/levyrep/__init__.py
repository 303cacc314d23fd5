"""Levy p-representations of finite-dimensional norms.

Build, convert and verify discrete representations ||x||^p = sum_j w_j |<x, v_j>|^p,
the equivalent isometric embeddings into l_p^N, and numerical certificates
that a given planar norm does or does not admit one.
"""

from .cosine2d import (
    InversionResult,
    MembershipReport,
    MultiplierTable,
    cos_p_multipliers,
    forward_cosine_transform,
    invert_cosine_transform,
    lp_membership_report,
)
from .cubature import (
    MomentSystem,
    NoRepresentationError,
    equiangular_rep,
    fit_weights_even_p,
    moment_system,
    moment_system_2d,
    residual_check,
)
from .embedding import EmbeddingMatrix, IsometryReport, embedding_to_rep, rep_to_embedding, verify_isometry
from .levy1_2d import (
    BoundaryFunction2D,
    DensitySignWarning,
    L1Report,
    detect_corner_atoms,
    l1_embeddability_report,
    levy1_density,
    reconstruct_boundary,
    spectral_second_derivative,
)
from .qstable import (
    LqVerification,
    SphereHistogram,
    StableSpec,
    p_projection_histogram,
    sample_stable,
    stable_abs_moment,
    stable_density_1d,
    verify_lq_levy_rep,
)
from .representation import (
    CircleDensity,
    DiscreteLevyRep,
    NormOracle,
    canonicalize,
    check_norm_axioms,
    euclidean_rep,
    eval_norm_density,
    eval_norm_discrete,
    lq_basis_rep,
    transform_rep,
)
from .sphere import CircleGrid, c_pn, circle_grid, cos_power_coefficients, random_unit_vectors

__version__ = "0.1.0"
