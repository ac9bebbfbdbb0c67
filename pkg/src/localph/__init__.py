"""Local persistent homology for singularity detection in point clouds."""

from ._accel import backend
from .geometry import (
    AnnulusQuery,
    GroundTruth,
    GroundTruthLabel,
    PointCloud,
    SpatialIndex,
    annulus_neighbors,
    build_spatial_index,
)
from .filtration import Filtration, build_rips_filtration, filtration_order
from .persistence import (
    Barcode,
    PersistenceInterval,
    betti_numbers_at_scale,
    bottleneck_distance,
    compute_barcode,
    count_long_bars,
    rips_barcode,
)

__version__ = "0.1.0"
