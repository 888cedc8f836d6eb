"""k-visibility, k-cell decompositions and single-pursuer clearing plans in simple polygons."""

from .decomposition import (
    ON_SKELETON,
    CellDecomposition,
    PartitionSegment,
    PointOutside,
    build_decomposition,
    cell_adjacency,
    decomposition_stats,
    locate_cell,
    partition_segments,
)
from .geometry import (
    DegenerateIncidence,
    KShadowError,
    Orientation,
    Point,
    PointLocation,
    Segment,
    SimplePolygon,
    ValidationError,
    crossing_count,
    orientation,
    point,
    point_in_polygon,
    segment,
    segments_properly_cross,
    validate_polygon,
)
from .kvis import (
    InvalidK,
    SourceOutside,
    Tag,
    VisibilityRegion,
    WindowSegment,
    is_k_visible,
    k_visibility_region,
    oracle_is_k_visible,
    region_windows,
)
from .planner import (
    NoSolution,
    NotAdjacent,
    Plan,
    ReplayMismatch,
    SearchState,
    apply_transition,
    grid_replay,
    plan_clearing_path,
    replay_plan,
)
from .shadows import (
    AmbiguousMatching,
    EventKind,
    Shadow,
    ShadowEvent,
    ShadowKind,
    ShadowSignature,
    classify_shadow,
    diff_signatures,
    oracle_shadows_grid,
    shadow_signature,
    shadows_of,
    verify_cell_invariance,
)

__version__ = "0.1.0"
