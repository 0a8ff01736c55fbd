//! Shared fixtures for the criterion benches.

use quatsig_core::{ArrayConfig, QVector, Quaternion, Scene};

/// Deterministic, well-spread quaternion with components in `[-1, 1]`.
pub fn fixture_quat(n: usize) -> Quaternion {
    let t = n as f64;
    Quaternion::new(
        (0.37 * t + 0.1).sin(),
        (0.71 * t + 0.2).cos(),
        (1.13 * t + 0.3).sin(),
        (1.79 * t + 0.4).cos(),
    )
    .expect("finite")
}

pub fn fixture_vector(len: usize, offset: usize) -> QVector {
    QVector::new((0..len).map(|m| fixture_quat(m + offset)).collect()).expect("non-empty")
}

/// Ten-element array, broadside desired source, interferers at 30 and −20°.
pub fn reference_scene() -> Scene {
    let array = ArrayConfig::new(10, 0.5).expect("valid array");
    Scene::with_interferers(array, 0.0, &[30.0, -20.0], 20.0, 0.0, 0.0, 0.0, 1)
        .expect("valid scene")
}
