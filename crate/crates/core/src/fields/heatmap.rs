//! Binary contact labels and their per-vertex frequency over frames.

use serde::{Deserialize, Serialize};

use super::field::{Entity, InteractionField};
use crate::error::{Error, Result};
use crate::Real;

/// Contact threshold, meters.
pub const DEFAULT_CONTACT_THRESHOLD: f64 = 0.005;

/// `distance <= threshold` per vertex.
pub fn contact_labels<T: Real>(field: &InteractionField<T>, threshold: T) -> Result<Vec<bool>> {
    if !(threshold >= T::zero()) {
        return Err(Error::Parameter(format!("contact threshold must be non-negative, got {threshold}")));
    }
    Ok(field.distances.iter().map(|&d| d <= threshold).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactHeatmap {
    pub entity: Entity,
    pub frame_count: usize,
    /// Per-vertex count of frames in contact.
    pub counts: Vec<usize>,
    pub frequencies: Vec<f64>,
}

impl ContactHeatmap {
    fn from_counts(entity: Entity, counts: Vec<usize>, frame_count: usize) -> Self {
        let frequencies = counts.iter().map(|&c| c as f64 / frame_count as f64).collect();
        Self {
            entity,
            frame_count,
            counts,
            frequencies,
        }
    }

    /// Heatmap over the union of both frame sets.
    pub fn merge(&self, other: &ContactHeatmap) -> Result<ContactHeatmap> {
        if self.entity != other.entity {
            return Err(Error::Parameter("cannot merge heatmaps of different entities".into()));
        }
        if self.counts.len() != other.counts.len() {
            return Err(Error::RaggedFrames {
                frame: self.frame_count,
                expected: self.counts.len(),
                got: other.counts.len(),
            });
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(Self::from_counts(self.entity, counts, self.frame_count + other.frame_count))
    }
}

pub fn aggregate_heatmap(entity: Entity, label_frames: &[Vec<bool>]) -> Result<ContactHeatmap> {
    let first = label_frames.first().ok_or(Error::EmptyFrames)?;
    let mut counts = vec![0usize; first.len()];
    for (f, labels) in label_frames.iter().enumerate() {
        if labels.len() != counts.len() {
            return Err(Error::RaggedFrames {
                frame: f,
                expected: counts.len(),
                got: labels.len(),
            });
        }
        for (c, &l) in counts.iter_mut().zip(labels) {
            *c += usize::from(l);
        }
    }
    Ok(ContactHeatmap::from_counts(entity, counts, label_frames.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(d: Vec<f64>) -> InteractionField<f64> {
        InteractionField::new(Entity::LeftHand, Entity::Object, 0.1, d).unwrap()
    }

    #[test]
    fn labels() {
        assert_eq!(contact_labels(&field(vec![0.001, 0.010]), 0.005).unwrap(), vec![true, false]);
        assert_eq!(contact_labels(&field(vec![0.001, 0.010]), 0.0).unwrap(), vec![false, false]);
        assert_eq!(contact_labels(&field(vec![0.0]), 0.0).unwrap(), vec![true]);
        assert!(contact_labels(&field(vec![0.0]), -1.0).is_err());
    }

    #[test]
    fn frequencies() {
        let frames: Vec<Vec<bool>> = (0..10).map(|i| vec![true, i < 3, false]).collect();
        let h = aggregate_heatmap(Entity::Object, &frames).unwrap();
        assert_eq!(h.frequencies, vec![1.0, 0.3, 0.0]);
        assert_eq!(h.frame_count, 10);
        assert!(matches!(aggregate_heatmap(Entity::Object, &[]), Err(Error::EmptyFrames)));
        assert!(matches!(
            aggregate_heatmap(Entity::Object, &[vec![true], vec![true, false]]),
            Err(Error::RaggedFrames { frame: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn labels_monotone_in_threshold(d in prop::collection::vec(0.0f64..0.1, 1..50), t1 in 0.0f64..0.1, t2 in 0.0f64..0.1) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let f = field(d);
            let a = contact_labels(&f, lo).unwrap();
            let b = contact_labels(&f, hi).unwrap();
            prop_assert!(a.iter().zip(&b).all(|(x, y)| !x || *y));
        }

        #[test]
        fn concatenation_is_weighted_average(
            a in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..20),
            b in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..20),
        ) {
            let ha = aggregate_heatmap(Entity::RightHand, &a).unwrap();
            let hb = aggregate_heatmap(Entity::RightHand, &b).unwrap();
            let all: Vec<Vec<bool>> = a.iter().chain(&b).cloned().collect();
            let hab = aggregate_heatmap(Entity::RightHand, &all).unwrap();
            prop_assert_eq!(&ha.merge(&hb).unwrap(), &hab);
            for v in 0..6 {
                let direct = all.iter().filter(|f| f[v]).count() as f64 / all.len() as f64;
                prop_assert_eq!(hab.frequencies[v], direct);
                let weighted = (ha.frequencies[v] * a.len() as f64 + hb.frequencies[v] * b.len() as f64) / all.len() as f64;
                prop_assert!((hab.frequencies[v] - weighted).abs() < 1e-12);
            }
        }
    }
}
