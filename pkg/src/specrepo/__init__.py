"""Regionalised crowd-sourced spectrum repository and white-space toolkit."""

from .adapters import (
    CaptureHint,
    FormatError,
    InconsistencyError,
    RawCapture,
    TrackRangeError,
    detect_format,
    merge_location_track,
    parse_raw,
)
from .geo import (
    CondensationConfig,
    EARTH_RADIUS_M,
    InvalidZoneError,
    SpacingStats,
    TooFewSweepsError,
    condense,
    haversine_m,
    journey_length_km,
    point_in_zone,
    rezone,
    spacing_stats,
)
from .model import (
    Band,
    BoundingBox,
    DeviceProfile,
    GeoPoint,
    InvariantError,
    Journey,
    JourneyMetadata,
    PowerSweep,
    SchemaError,
    Violation,
    Zone,
    parse_journey,
    round_dbm,
    serialize_journey,
    validate_journey,
    validate_zone,
)
from .occupancy import (
    Channel,
    ChannelPlan,
    DegenerateBandError,
    EmptyChannelError,
    EmptyJourneyError,
    HeatCell,
    HeatmapGrid,
    OccupationReport,
    auto_threshold,
    channel_power,
    default_plan,
    heatmap,
    make_plan,
    occupation,
    occupation_curve,
    occupation_report,
    whitespace_ratio,
)
from .store import JourneyStore, QueryFilter, UnknownIdError, content_id

__version__ = "0.1.0"
