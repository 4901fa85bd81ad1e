"""Point-scatterer forward modelling and MUSIC localization from far-field data."""
from .errors import DomainError, InadmissibleWavenumberError, PointMusicError, ValidationError
from .forward import (
    Admissibility,
    FarFieldMatrix,
    InteractionMatrix,
    amplitude_matrix,
    born_far_field,
    build_interaction_matrix,
    check_admissible,
    factorization_residual,
    far_field_pattern,
    foldy_lax_coefficients,
    foldy_lax_strengths,
    foldy_lax_total_field,
    scattered_field,
    steering_matrix,
    synthesize_far_field,
    total_field,
)
from .imaging import (
    DEFAULT_REGION,
    Heatmap,
    LocalizationResult,
    Projector,
    RankPolicy,
    Region,
    extract_peaks,
    indicator,
    indicator_values,
    localization_error,
    localize,
    make_projector,
    match_points,
    peak_contrast,
    pseudo_inverse_projector,
    scan_grid,
    steering_vector,
    svd_range_projector,
)
from .noise import NoiseSpec, add_noise
from .wavecore import (
    Direction,
    DirectionSet,
    Point3,
    ScattererSet,
    WaveConfig,
    fundamental_solution,
    plane_wave,
    uniform_circle_directions,
)

__version__ = "0.1.0"
