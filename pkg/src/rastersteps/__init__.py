"""Salient time-step selection and serving for raster time series."""

from .aggregation import AggregatedSeries, AggregationKind, aggregate, normalize_series, statistical_cost
from .cache import CacheKey, DerivedCache
from .embedding import EmbeddedPoint, project_2d, sample_for_display
from .errors import (
    BoundsError,
    ConstraintError,
    EmptyDataError,
    FormatError,
    InvalidCodeError,
    RasterStepsError,
)
from .features import (
    DescriptorConfig,
    LatentCode,
    cosine_similarity,
    load_latent_codes,
    pyramid_descriptor,
    structural_cost,
    structural_cost_matrix,
    write_latent_codes,
)
from .grids import (
    Dataset,
    FocusRange,
    GridFrame,
    NormStats,
    Region,
    SyntheticSpec,
    crop,
    export_stack,
    fill_nan,
    ingest_stack,
    normalize,
    synthesize,
)
from .pipeline import preload_order, run_selection, trend_series
from .reconstruct import EvalReport, evaluate, interpolate, psnr, rmse, ssim
from .selector import (
    SelectionParams,
    SelectionResult,
    arc_based_selection,
    brute_force_select,
    combined_cost,
    distance_cost,
    even_selection,
    select_salient,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
