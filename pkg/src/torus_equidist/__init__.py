"""Orbits of fractal measures under toral x m, x n maps.

Library + CLI for constructing self-similar and digit-product measures on
the 2-torus, generating exact or error-certified orbits under coordinate-
wise x m, x n maps, and testing equidistribution, dimension, and
zoom-spectrum behavior at desk scale.
"""

from .precision import (
    Ball,
    DigitString,
    InsufficientPrecision,
    ball_digits,
    rational_digits,
    suffix_point,
)
from .dynamics import (
    Orbit,
    OrbitSpec,
    TorusPoint,
    orbit_ball,
    orbit_digits,
    orbit_exact,
    tmap,
)
from .measures import (
    Bernoulli1D,
    IFSBranch,
    LineEmbedding,
    MixedBaseBernoulli,
    PlanarIFS,
    ProductBernoulli,
    analyze_rotations,
    cantor_lebesgue,
    diagonal_embedding,
    entropy_dimension,
    fourier_coeff,
    marginal,
    mixed_base_counterexample,
    product_from_marginals,
    sample,
    sample_cloud,
    spec_hash,
    validate_ssc,
)
from .independence import mult_indep_int, mult_indep_ratio, spectral_condition
from .equidist import (
    EmpiricalMeasure,
    EquidistReport,
    LambdaLambda,
    LambdaTimes,
    compare,
    star_discrepancy_grid,
    weyl_table,
)
from .geometry import (
    DimensionReport,
    Projection,
    conservation_report,
    estimate_dimension,
    project,
    search_projection_dimension_drop,
    slice_fiber,
)
from .scenery import observable_series, scenery_track, scenery_track_for_spec, spectrum_estimate

__version__ = "0.1.0"
