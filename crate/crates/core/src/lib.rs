//! Quaternion-valued adaptive signal processing.
//!
//! - [`quat`]: quaternion algebra, involutions and quaternion vectors.
//! - [`hrgrad`]: numeric gradient operators `∂f/∂q`, `∂f/∂q*` and their
//!   vector forms.
//! - [`adaptive`]: QLMS / AQLMS filters and multi-step prediction.
//! - [`signal`]: velocity series I/O, normalization and synthesis.
//! - [`beam`]: crossed-dipole array model and the QLMS beamformer.
//! - [`curve`]: learning curves and their CSV form.
//! - [`verify`]: randomized checks of the algebra, gradients and updates.

pub mod adaptive;
pub mod beam;
pub mod curve;
pub mod hrgrad;
pub mod quat;
pub mod signal;
pub mod verify;

pub use adaptive::{
    aqlms_step, qlms_step, run_prediction, FilterConfig, FilterError, FilterState, Mode,
    PredictionRun, StepRecord,
};
pub use beam::{
    array_response, beampattern, polarization_coherent, quaternion_steering, read_pattern_csv,
    relative_response_db, run_beamformer, simulate_snapshots, spatial_steering, write_pattern_csv,
    ArrayConfig, BeamError, BeamformRun, PatternPoint, PhiBranch, Scene, SourceDesc,
};
pub use curve::{CurveError, CurveRow, LearningCurve};
pub use hrgrad::{grad_q, grad_qstar, grad_w, grad_wstar, numeric_partials, FdConfig, GradError};
pub use quat::{
    components_from_involutions, conjugate, hamilton_product, involution, AlgebraError, Axis,
    QVector, Quaternion,
};
pub use signal::{
    load_series_csv, normalize_series, save_series_csv, synth_wind, QSeries, SignalError,
    SynthConfig,
};
pub use verify::CheckResult;
