"""Sampling spaces with the interpolation property on two-step nilpotent Lie groups."""
from .algebra import (
    AlgebraSpec,
    ConfigError,
    DetPolynomial,
    b_matrix,
    det_polynomial,
    faithful_rep,
    load_algebra,
    validate_condition,
)
from .group import GammaWindow, GroupElement, enumerate_gamma, inverse, multiply
from .presets import PRESETS, get_preset, preset_region
from .spectral import (
    LambdaGrid,
    LatticePartition,
    Region,
    check_congruence,
    in_E,
    make_grid,
    parse_region,
    partition_by_lattice,
    plancherel_measure,
)
from .tiling import PixelSet, check_lemma_bl, construct_tiling_set, verify_packing, verify_tiling
from .gabor import (
    GaborLattice,
    GridFunction,
    density_check,
    make_window,
    parseval_defect,
    rep_apply,
)
from .sampling import (
    SampleSet,
    SincFunction,
    SpectralField,
    build_phi,
    gram_matrix,
    probe_field,
    reconstruct,
    restriction_isometry_defect,
    sample,
    sequence_orthogonality_check,
    translate,
    wavelet_transform,
)

__version__ = "0.1.0"
