//! Split-level evaluation and report formatting.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::basic::{aae, mpjpe, mrrpe, pcd_counts, v2v};
use super::splits::{split, Protocol, SequenceMeta};
use crate::capture::FramePose;
use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::models::AssetBundle;
use crate::Real;

pub const FIELD_NAMES: [&str; 4] = ["l2o", "r2o", "o2l", "o2r"];

/// Everything the metrics read from one frame, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGeometry<T: Real> {
    /// 21 regressed joints per hand; joint 0 is the root.
    pub left_joints: Vec<Point3<T>>,
    pub right_joints: Vec<Point3<T>>,
    pub omega: T,
    /// Centroid of the posed bottom part.
    pub object_root: Point3<T>,
    pub top: Vec<Point3<T>>,
    pub bottom: Vec<Point3<T>>,
}

impl<T: Real> FrameGeometry<T> {
    pub fn from_pose(assets: &AssetBundle<T>, pose: &FramePose<T>) -> Result<Self> {
        let (bottom, top) = assets.object.pose(&pose.object)?;
        Ok(Self {
            left_joints: assets.left.posed_joints(&pose.left)?,
            right_joints: assets.right.posed_joints(&pose.right)?,
            omega: pose.object.omega,
            object_root: bottom.centroid(),
            top: top.vertices,
            bottom: bottom.vertices,
        })
    }
}

/// One (sequence, view) recording: per-frame geometry and optional fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecord<T: Real> {
    pub meta: SequenceMeta,
    pub frames: Vec<FrameGeometry<T>>,
    pub fields: Option<Vec<FieldSet<T>>>,
}

impl<T: Real> SequenceRecord<T> {
    pub fn from_poses(meta: SequenceMeta, assets: &AssetBundle<T>, poses: &[FramePose<T>], fields: Option<Vec<FieldSet<T>>>) -> Result<Self> {
        Ok(Self {
            meta,
            frames: poses.iter().map(|p| FrameGeometry::from_pose(assets, p)).collect::<Result<_>>()?,
            fields,
        })
    }
}

/// Table 2 columns: MPJPE (mm), MRRPE (mm), AAE (deg), V2V (mm).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub frames: usize,
    pub mpjpe_left: f64,
    pub mpjpe_right: f64,
    pub mrrpe_lr: f64,
    pub mrrpe_or: f64,
    pub aae: f64,
    pub v2v_top: f64,
    pub v2v_bottom: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcdPoint {
    pub alpha_mm: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub sequences: usize,
    #[serde(flatten)]
    pub overall: MetricRow,
    pub per_object: BTreeMap<String, MetricRow>,
    /// Keyed by field name (`l2o`, `r2o`, `o2l`, `o2r`); empty when predictions carry no fields.
    pub pcd_curves: BTreeMap<String, Vec<PcdPoint>>,
}

#[derive(Default, Clone, Copy)]
struct Sums {
    frames: usize,
    values: [f64; 7],
}

impl Sums {
    fn add(&mut self, values: [f64; 7]) {
        self.frames += 1;
        for (s, v) in self.values.iter_mut().zip(values) {
            *s += v;
        }
    }

    fn row(&self) -> MetricRow {
        let n = self.frames.max(1) as f64;
        let v = self.values.map(|s| s / n);
        MetricRow {
            frames: self.frames,
            mpjpe_left: v[0],
            mpjpe_right: v[1],
            mrrpe_lr: v[2],
            mrrpe_or: v[3],
            aae: v[4],
            v2v_top: v[5],
            v2v_bottom: v[6],
        }
    }
}

/// Per-frame metric values in [`MetricRow`] column order.
pub fn frame_metrics<T: Real>(pred: &FrameGeometry<T>, gt: &FrameGeometry<T>) -> Result<[f64; 7]> {
    let root = |j: &[Point3<T>]| j.first().copied().ok_or(Error::Dimension { what: "joints", expected: 21, got: 0 });
    let (l_gt, r_gt, l_pred, r_pred) = (root(&gt.left_joints)?, root(&gt.right_joints)?, root(&pred.left_joints)?, root(&pred.right_joints)?);
    Ok([
        mpjpe(&pred.left_joints, &gt.left_joints)?,
        mpjpe(&pred.right_joints, &gt.right_joints)?,
        mrrpe(&l_gt, &r_gt, &l_pred, &r_pred),
        mrrpe(&gt.object_root, &r_gt, &pred.object_root, &r_pred),
        aae(pred.omega, gt.omega),
        v2v(&pred.top, &gt.top, &pred.object_root, &gt.object_root)?,
        v2v(&pred.bottom, &gt.bottom, &pred.object_root, &gt.object_root)?,
    ])
}

/// Metrics over the protocol's test records, averaged uniformly over frames.
/// Predictions are matched to ground truth by sequence id and view.
pub fn evaluate_split<T: Real>(
    gt: &[SequenceRecord<T>],
    predictions: &[SequenceRecord<T>],
    protocol: Protocol,
    alphas_mm: &[f64],
) -> Result<EvalReport> {
    let metas: Vec<SequenceMeta> = gt.iter().map(|r| r.meta.clone()).collect();
    let assignment = split(protocol, &metas)?;
    if assignment.test.is_empty() {
        return Err(Error::Split(format!("protocol {protocol} leaves no test records")));
    }
    let by_key: HashMap<(&str, u32), &SequenceRecord<T>> = predictions
        .iter()
        .map(|p| ((p.meta.sequence_id.as_str(), p.meta.view), p))
        .collect();

    let mut missing = Vec::new();
    let mut pairs = Vec::with_capacity(assignment.test.len());
    for &i in &assignment.test {
        let g = &gt[i];
        let label = format!("{} view {}", g.meta.sequence_id, g.meta.view);
        match by_key.get(&(g.meta.sequence_id.as_str(), g.meta.view)) {
            None => missing.push(format!("{label}: all {} frames", g.frames.len())),
            Some(p) if p.frames.len() < g.frames.len() => {
                missing.push(format!("{label}: frames {}..{}", p.frames.len(), g.frames.len()));
            }
            Some(p) => pairs.push((g, *p)),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }

    let with_fields = pairs.iter().all(|(g, p)| g.fields.is_some() && p.fields.is_some());
    let mut overall = Sums::default();
    let mut per_object: BTreeMap<String, Sums> = BTreeMap::new();
    let mut pcd_hits = [vec![0usize; alphas_mm.len()], vec![0; alphas_mm.len()], vec![0; alphas_mm.len()], vec![0; alphas_mm.len()]];
    let mut pcd_total = [0usize; 4];
    for (g, p) in &pairs {
        let obj = per_object.entry(g.meta.object.clone()).or_default();
        for (fg, fp) in g.frames.iter().zip(&p.frames) {
            let values = frame_metrics(fp, fg)?;
            overall.add(values);
            obj.add(values);
        }
        if with_fields {
            let (gf, pf) = (g.fields.as_ref().unwrap(), p.fields.as_ref().unwrap());
            if pf.len() < gf.len() {
                return Err(Error::Coverage {
                    missing: vec![format!("{} view {}: field frames {}..{}", g.meta.sequence_id, g.meta.view, pf.len(), gf.len())],
                });
            }
            for (sg, sp) in gf.iter().zip(pf) {
                for (k, (a, b)) in sg.fields().iter().zip(sp.fields()).enumerate() {
                    let counts = pcd_counts(&b.distances, &a.distances, alphas_mm)?;
                    for (h, c) in pcd_hits[k].iter_mut().zip(counts) {
                        *h += c;
                    }
                    pcd_total[k] += a.len();
                }
            }
        }
    }

    let mut pcd_curves = BTreeMap::new();
    if with_fields {
        for k in 0..4 {
            let total = pcd_total[k].max(1) as f64;
            pcd_curves.insert(
                FIELD_NAMES[k].to_string(),
                alphas_mm
                    .iter()
                    .zip(&pcd_hits[k])
                    .map(|(&alpha_mm, &h)| PcdPoint {
                        alpha_mm,
                        fraction: h as f64 / total,
                    })
                    .collect(),
            );
        }
    }
    Ok(EvalReport {
        protocol,
        sequences: pairs.len(),
        overall: overall.row(),
        per_object: per_object.into_iter().map(|(k, s)| (k, s.row())).collect(),
        pcd_curves,
    })
}

impl EvalReport {
    /// Aligned text table in the layout of the paper's results table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>17} {:>17} {:>8} {:>17}",
            "", "frames", "MPJPE l/r [mm]", "MRRPE l>r/o>r", "AAE [deg]", "V2V top/bot [mm]"
        );
        let mut row = |name: &str, r: &MetricRow| {
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>8.2}/{:<8.2} {:>8.2}/{:<8.2} {:>8.2} {:>8.2}/{:<8.2}",
                name, r.frames, r.mpjpe_left, r.mpjpe_right, r.mrrpe_lr, r.mrrpe_or, r.aae, r.v2v_top, r.v2v_bottom
            );
        };
        row(&format!("{} all", self.protocol), &self.overall);
        for (name, r) in &self.per_object {
            row(name, r);
        }
        out
    }

    /// `field,alpha_mm,fraction` rows for every PCD curve.
    pub fn pcd_csv(&self) -> String {
        let mut out = String::from("field,alpha_mm,fraction\n");
        for (name, curve) in &self.pcd_curves {
            for p in curve {
                let _ = writeln!(out, "{name},{},{}", p.alpha_mm, p.fraction);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        let r = &self.overall;
        [r.mpjpe_left, r.mpjpe_right, r.mrrpe_lr, r.mrrpe_or, r.aae, r.v2v_top, r.v2v_bottom]
            .iter()
            .all(|&v| v == 0.0)
    }
}
