"""Khovanov-type homologies over GF(2), branched double cover arithmetic,
and surgery/L-space bookkeeping for link diagrams given as PD codes."""

from .branched import (
    FillingReport,
    GoeritzData,
    QACertificate,
    RankInequalityReport,
    goeritz,
    h1_sigma,
    link_det,
    oriented_resolution_filling,
    qa_certify,
    rank_inequality_check,
    verify_certificate,
)
from .complexes import (
    ChainMap,
    DoubleComplexF2,
    FilteredComplexF2,
    GradedComplexF2,
    SpectralPages,
    homology_ranks,
    is_quasi_isomorphism,
    mapping_cone,
    spectral_pages,
    total_complex,
)
from .corpus import (
    braid_closure,
    diagram_corpus,
    random_braid_diagram,
    random_compatible_marking,
    rational_link,
    small_knot,
)
from .diagram import (
    ArcMarking,
    Diagram,
    PlanarMap,
    ResolvedState,
    TwoFoldMarking,
    canonical_key,
    connect_sum,
    induce_marking,
    mirror,
    parse_pd,
    planar_map,
    resolve,
    simplify_greedy,
    smooth_crossing,
)
from .khovanov import (
    CubeComplex,
    ThetaModuleModel,
    build_cube,
    check_psi_naturality,
    edge_map,
    grading_tables,
    hd_homology,
    kh_complex,
    kh_ranks,
    khr_complex,
    khr_ranks,
    model_edge_map,
    psi_identification,
    state_sum_det,
    twisted_complex,
    twisted_total_ranks,
    weight_ss,
)
from .linalg import (
    AbelianGroup,
    MatF2,
    cokernel_group,
    det_bareiss,
    f2_kernel_basis,
    f2_rank,
    smith_normal_form,
)
from .rgraded import (
    DoubleConeVerdict,
    Interval,
    RGradedComplex,
    RGradedMap,
    check_double_mapping_cone,
)
from .surgery import (
    FramedLinkPresentation,
    LSpaceVerdict,
    PlumbingGraph,
    euler_char_si,
    large_surgery_family,
    plumbing_linking_matrix,
    plumbing_lspace_check,
    surgered_h1,
    triad_additivity_check,
)

__version__ = "0.1.0"
