"""Detect localized edge eigenvectors from the growth of ``A^alpha e_k``."""

from .detect import Region, local_maxima, predict_threshold, superlevel_regions
from .generators import (
    PotentialSpec,
    TheoremSpec,
    random_band_matrix,
    random_potential,
    schrodinger_operator,
    theorem_test_matrix,
)
from .geometry import GridGeometry
from .landscape import Landscape, RandomSketch, landscape_exact, landscape_randomized, landscape_semigroup
from .operators import (
    BandedOperator,
    DenseOperator,
    FlippedOperator,
    LinearOperator,
    SpectralComposite,
    estimate_norm,
    flip_spectrum,
)
from .verify import (
    LocalizationProfile,
    LocalizationReport,
    Spectrum,
    check_proof_inequalities,
    check_theorem,
    eig_symmetric,
    fit_profile,
    lemma_montecarlo,
)
from .wannier import decay_metrics, project_dirac, theta_truncation_error

__version__ = "0.1.0"
