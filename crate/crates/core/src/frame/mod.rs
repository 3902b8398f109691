//! Thermal frames, operator parameter masks, ROI analytics and the
//! file-backed store behind the monitoring service.

pub mod api;
mod correct;
mod mask;
mod roi;
mod scene;
mod store;
mod thermal;

pub use correct::{correct_frame, corrected_frame_id, Corrector};
pub use mask::{MaskRegion, ParameterMask};
pub use roi::{
    bresenham, polygon_pixels, roi_pixels, roi_stats, Histogram, Percentiles, RoiGeometry, RoiKind, RoiStats,
    RoiSummary, HISTOGRAM_BINS,
};
pub use scene::{render_synthetic_frame, SceneSpec, TubeSpec};
pub use store::{validate_camera_id, FrameStore, TimeseriesPoint};
pub use thermal::{decode_payload, CorrectionMethod, FrameKind, FrameMeta, FramePayload, ThermalFrame};
