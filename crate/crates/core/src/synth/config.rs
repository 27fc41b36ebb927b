//! Synthetic sequence configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::objects::ObjectKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArticulationProfile {
    /// Radians.
    pub min: f64,
    pub max: f64,
    /// Frames between articulation keyframes; larger is smoother.
    pub smoothness: usize,
}

impl Default for ArticulationProfile {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 1.2,
            smoothness: 25,
        }
    }
}

/// Largest deviation of each degree of freedom from its base value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionAmplitudes {
    /// Meters, per axis.
    pub object_translation: f64,
    /// Radians, per axis-angle component.
    pub object_rotation: f64,
    pub hand_translation: f64,
    pub hand_global_rotation: f64,
    /// Radians, per component of each finger joint.
    pub hand_joint: f64,
    /// Shape coefficients are drawn once per sequence from `[-shape, shape]`.
    pub shape: f64,
}

impl Default for MotionAmplitudes {
    fn default() -> Self {
        Self {
            object_translation: 0.05,
            object_rotation: 0.3,
            hand_translation: 0.03,
            hand_global_rotation: 0.3,
            hand_joint: 0.3,
            shape: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerLayout {
    /// Dorsal markers per hand segment, 1 to 4.
    pub hand_per_segment: usize,
    /// Markers on each object part.
    pub object_per_part: usize,
}

impl Default for MarkerLayout {
    fn default() -> Self {
        Self {
            hand_per_segment: 3,
            object_per_part: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub frame_count: usize,
    pub fps: f64,
    /// Per-axis Gaussian marker noise, meters.
    pub marker_noise_sigma: f64,
    /// Probability that a marker is missing in a frame.
    pub dropout_rate: f64,
    /// Frames between motion keyframes.
    pub keyframe_interval: usize,
    pub articulation_profile: ArticulationProfile,
    pub motion_amplitudes: MotionAmplitudes,
    pub markers: MarkerLayout,
    pub object_kind: ObjectKind,
    pub object_resolution: usize,
    pub subject: String,
    pub sequence_id: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            frame_count: 100,
            fps: 30.0,
            marker_noise_sigma: 0.0005,
            dropout_rate: 0.05,
            keyframe_interval: 20,
            articulation_profile: ArticulationProfile::default(),
            motion_amplitudes: MotionAmplitudes::default(),
            markers: MarkerLayout::default(),
            object_kind: ObjectKind::BoxHinge,
            object_resolution: 4,
            subject: "s01".into(),
            sequence_id: "s01-box-0000".into(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.frame_count == 0 {
            return bad("frame_count must be at least 1".into());
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        if !(self.marker_noise_sigma >= 0.0) || !self.marker_noise_sigma.is_finite() {
            return bad(format!("marker_noise_sigma must be >= 0, got {}", self.marker_noise_sigma));
        }
        if !(0.0..=1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate must lie in [0, 1], got {}", self.dropout_rate));
        }
        if self.keyframe_interval == 0 || self.articulation_profile.smoothness == 0 {
            return bad("keyframe intervals must be at least 1 frame".into());
        }
        let a = &self.articulation_profile;
        if !(a.min <= a.max) || !a.min.is_finite() || !a.max.is_finite() {
            return bad(format!("articulation range [{}, {}] is invalid", a.min, a.max));
        }
        let m = &self.motion_amplitudes;
        let amps = [m.object_translation, m.object_rotation, m.hand_translation, m.hand_global_rotation, m.hand_joint, m.shape];
        if amps.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return bad("motion amplitudes must be finite and non-negative".into());
        }
        if !(1..=4).contains(&self.markers.hand_per_segment) {
            return bad(format!("hand_per_segment must be 1 to 4, got {}", self.markers.hand_per_segment));
        }
        if self.markers.object_per_part < 3 {
            return bad(format!("object_per_part must be at least 3, got {}", self.markers.object_per_part));
        }
        if self.object_resolution == 0 {
            return bad("object_resolution must be at least 1".into());
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_partial_json_fills_in() {
        SynthConfig::default().validate().unwrap();
        let c: SynthConfig = serde_json::from_str(r#"{"seed": 7, "articulation_profile": {"max": 0.5}}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.articulation_profile.max, 0.5);
        assert_eq!(c.frame_count, 100);
    }

    #[test]
    fn rejects_bad_values() {
        for json in [
            r#"{"dropout_rate": 1.5}"#,
            r#"{"marker_noise_sigma": -0.1}"#,
            r#"{"frame_count": 0}"#,
            r#"{"articulation_profile": {"min": 1.0, "max": 0.0}}"#,
        ] {
            let c: SynthConfig = serde_json::from_str(json).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{json}");
        }
        assert!(serde_json::from_str::<SynthConfig>(r#"{"sede": 1}"#).is_err());
    }
}
