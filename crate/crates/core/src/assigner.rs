//! Anchor labeling: the fixed IoU-threshold rule and ATSS with a pluggable
//! proximity measure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::anchors::AnchorSet;
use crate::geometry::center_distance_sq;
use crate::maiou::{pairwise, GroundTruth, ProximityMatrix, ProximityMeasure};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "label", content = "gt")]
pub enum Label {
    Positive(usize),
    Negative,
    Ignore,
}

impl Label {
    pub fn class(self) -> LabelClass {
        match self {
            Label::Positive(_) => LabelClass::Positive,
            Label::Negative => LabelClass::Negative,
            Label::Ignore => LabelClass::Ignore,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    Positive,
    Negative,
    Ignore,
}

impl LabelClass {
    pub const ALL: [LabelClass; 3] = [Self::Positive, Self::Negative, Self::Ignore];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentResult {
    pub labels: Vec<Label>,
    pub positives_per_gt: Vec<usize>,
    /// Adaptive threshold per ground truth (ATSS only).
    pub thresholds: Option<Vec<f64>>,
}

impl AssignmentResult {
    fn from_labels(labels: Vec<Label>, num_gts: usize, thresholds: Option<Vec<f64>>) -> Self {
        let mut positives_per_gt = vec![0; num_gts];
        for label in &labels {
            if let Label::Positive(g) = label {
                positives_per_gt[*g] += 1;
            }
        }
        Self {
            labels,
            positives_per_gt,
            thresholds,
        }
    }

    pub fn count(&self, class: LabelClass) -> usize {
        self.labels.iter().filter(|l| l.class() == class).count()
    }
}

/// `tau_neg <= tau_pos`; positive at or above `tau_pos`, negative below
/// `tau_neg`, ignored in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedThresholds {
    tau_neg: f64,
    tau_pos: f64,
}

impl FixedThresholds {
    /// YOLACT's thresholds.
    pub const YOLACT: FixedThresholds = FixedThresholds {
        tau_neg: 0.4,
        tau_pos: 0.5,
    };

    pub fn new(tau_neg: f64, tau_pos: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau_neg) || !(0.0..=1.0).contains(&tau_pos) || tau_neg > tau_pos {
            return Err(Error::InvalidConfig(format!(
                "thresholds must satisfy 0 <= tau_neg <= tau_pos <= 1, got {tau_neg} and {tau_pos}"
            )));
        }
        Ok(Self { tau_neg, tau_pos })
    }

    pub fn tau_neg(&self) -> f64 {
        self.tau_neg
    }

    pub fn tau_pos(&self) -> f64 {
        self.tau_pos
    }
}

/// Labels each anchor by its best ground truth (lowest index on ties).
pub fn assign_fixed(prox: &ProximityMatrix, th: FixedThresholds) -> AssignmentResult {
    let labels = (0..prox.rows())
        .map(|i| {
            let Some((best, score)) = argmax(prox.row(i)) else {
                return Label::Negative;
            };
            if score >= th.tau_pos {
                Label::Positive(best)
            } else if score < th.tau_neg {
                Label::Negative
            } else {
                Label::Ignore
            }
        })
        .collect();
    AssignmentResult::from_labels(labels, prox.cols(), None)
}

fn argmax(row: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in row.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best
}

/// Candidates that survive ATSS filtering for one ground truth.
#[derive(Debug, Clone)]
struct GtSelection {
    threshold: f64,
    positives: Vec<(usize, f64)>,
}

/// ATSS: per level the `k` anchors closest to the ground-truth center are
/// candidates, the threshold is `mean + std` of their scores (population
/// std), and candidates at or above it whose centers are strictly inside
/// the box become positive. Anchors claimed by several ground truths go to
/// the highest score, then the lowest ground-truth index.
pub fn atss_assign(
    anchors: &AnchorSet,
    gts: &[GroundTruth],
    measure: ProximityMeasure,
    k: usize,
) -> Result<AssignmentResult> {
    if k == 0 {
        return Err(Error::InvalidConfig("ATSS k must be at least 1".into()));
    }
    let select = |gt: &GroundTruth| select_for_gt(anchors, gt, measure, k);
    #[cfg(feature = "parallel")]
    let selections: Vec<GtSelection> = {
        use rayon::prelude::*;
        gts.par_iter().map(select).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let selections: Vec<GtSelection> = gts.iter().map(select).collect();

    let mut best: Vec<Option<(usize, f64)>> = vec![None; anchors.len()];
    for (g, sel) in selections.iter().enumerate() {
        for &(anchor, score) in &sel.positives {
            let slot = &mut best[anchor];
            if slot.is_none_or(|(_, s)| score > s) {
                *slot = Some((g, score));
            }
        }
    }
    let labels = best
        .into_iter()
        .map(|b| b.map_or(Label::Negative, |(g, _)| Label::Positive(g)))
        .collect();
    let thresholds = selections.iter().map(|s| s.threshold).collect();
    Ok(AssignmentResult::from_labels(
        labels,
        gts.len(),
        Some(thresholds),
    ))
}

fn select_for_gt(
    anchors: &AnchorSet,
    gt: &GroundTruth,
    measure: ProximityMeasure,
    k: usize,
) -> GtSelection {
    let boxes = anchors.boxes();
    let mut candidates = Vec::new();
    for level in anchors.levels() {
        let mut by_distance: Vec<(f64, usize)> = (level.start..level.start + level.len)
            .map(|i| (center_distance_sq(&boxes[i], gt.bbox()), i))
            .collect();
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if by_distance.len() > k {
            by_distance.select_nth_unstable_by(k - 1, by_key);
            by_distance.truncate(k);
        }
        by_distance.sort_unstable_by(by_key);
        candidates.extend(by_distance.into_iter().map(|(_, i)| i));
    }

    let scores: Vec<f64> = candidates
        .iter()
        .map(|&i| measure.eval(&boxes[i], gt))
        .collect();
    let threshold = adaptive_threshold(&scores);
    let positives = candidates
        .into_iter()
        .zip(scores)
        .filter(|&(i, score)| {
            let (cx, cy) = boxes[i].center();
            score >= threshold && gt.bbox().contains_strict(cx, cy)
        })
        .collect();
    GtSelection {
        threshold,
        positives,
    }
}

/// `mean + population std`; `+inf` for no candidates.
pub fn adaptive_threshold(scores: &[f64]) -> f64 {
    if scores.is_empty() {
        return f64::INFINITY;
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    mean + var.sqrt()
}

/// One assigner configuration: rule, measure and parameters.
///
/// Parses from `fixed:<measure>[:<tau_neg>:<tau_pos>]` and
/// `atss:<measure>[:<k>]`, e.g. `fixed:iou:0.4:0.5` or `atss:maiou:9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AssignerSpec {
    Fixed {
        measure: ProximityMeasure,
        #[serde(default = "default_tau_neg")]
        tau_neg: f64,
        #[serde(default = "default_tau_pos")]
        tau_pos: f64,
    },
    Atss {
        measure: ProximityMeasure,
        #[serde(default = "default_k")]
        k: usize,
    },
}

fn default_tau_neg() -> f64 {
    FixedThresholds::YOLACT.tau_neg
}

fn default_tau_pos() -> f64 {
    FixedThresholds::YOLACT.tau_pos
}

fn default_k() -> usize {
    9
}

impl Default for AssignerSpec {
    fn default() -> Self {
        AssignerSpec::Atss {
            measure: ProximityMeasure::Maiou,
            k: default_k(),
        }
    }
}

impl AssignerSpec {
    pub fn measure(&self) -> ProximityMeasure {
        match *self {
            AssignerSpec::Fixed { measure, .. } | AssignerSpec::Atss { measure, .. } => measure,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AssignerSpec::Fixed {
                tau_neg, tau_pos, ..
            } => FixedThresholds::new(tau_neg, tau_pos).map(|_| ()),
            AssignerSpec::Atss { k: 0, .. } => {
                Err(Error::InvalidConfig("ATSS k must be at least 1".into()))
            }
            AssignerSpec::Atss { .. } => Ok(()),
        }
    }

    pub fn run(&self, anchors: &AnchorSet, gts: &[GroundTruth]) -> Result<AssignmentResult> {
        match *self {
            AssignerSpec::Fixed {
                measure,
                tau_neg,
                tau_pos,
            } => {
                let th = FixedThresholds::new(tau_neg, tau_pos)?;
                Ok(assign_fixed(&pairwise(anchors.boxes(), gts, measure), th))
            }
            AssignerSpec::Atss { measure, k } => atss_assign(anchors, gts, measure, k),
        }
    }
}

impl fmt::Display for AssignerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignerSpec::Fixed {
                measure,
                tau_neg,
                tau_pos,
            } => write!(f, "fixed:{measure}:{tau_neg}:{tau_pos}"),
            AssignerSpec::Atss { measure, k } => write!(f, "atss:{measure}:{k}"),
        }
    }
}

impl FromStr for AssignerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let usage = || {
            Error::InvalidConfig(format!(
                "bad assigner '{s}', expected fixed:<measure>[:<tau_neg>:<tau_pos>] or atss:<measure>[:<k>]"
            ))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            ["fixed", m] => AssignerSpec::Fixed {
                measure: m.parse()?,
                tau_neg: default_tau_neg(),
                tau_pos: default_tau_pos(),
            },
            ["fixed", m, neg, pos] => AssignerSpec::Fixed {
                measure: m.parse()?,
                tau_neg: neg.parse().map_err(|_| usage())?,
                tau_pos: pos.parse().map_err(|_| usage())?,
            },
            ["atss", m] => AssignerSpec::Atss {
                measure: m.parse()?,
                k: default_k(),
            },
            ["atss", m, k] => AssignerSpec::Atss {
                measure: m.parse()?,
                k: k.parse().map_err(|_| usage())?,
            },
            _ => return Err(usage()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Label transitions from one assignment to another.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    /// `counts[from][to]` indexed positive, negative, ignore.
    pub counts: [[usize; 3]; 3],
    /// Off-diagonal transitions with their anchor indices.
    pub transitions: Vec<Transition>,
    /// Positive in both but matched to different ground truths.
    pub reassigned: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub from: LabelClass,
    pub to: LabelClass,
    pub anchors: Vec<usize>,
}

impl DiffReport {
    pub fn count(&self, from: LabelClass, to: LabelClass) -> usize {
        self.counts[from.index()][to.index()]
    }

    pub fn anchors(&self, from: LabelClass, to: LabelClass) -> &[usize] {
        self.transitions
            .iter()
            .find(|t| t.from == from && t.to == to)
            .map_or(&[], |t| &t.anchors)
    }

    pub fn changed(&self) -> usize {
        self.transitions
            .iter()
            .map(|t| t.anchors.len())
            .sum::<usize>()
            + self.reassigned.len()
    }

    /// Adds another report's counts; anchor indices are offset by `offset`.
    pub fn merge(&mut self, other: &DiffReport, offset: usize) {
        for from in 0..3 {
            for to in 0..3 {
                self.counts[from][to] += other.counts[from][to];
            }
        }
        for t in &other.transitions {
            let shifted = t.anchors.iter().map(|a| a + offset);
            match self
                .transitions
                .iter_mut()
                .find(|s| s.from == t.from && s.to == t.to)
            {
                Some(s) => s.anchors.extend(shifted),
                None => self.transitions.push(Transition {
                    from: t.from,
                    to: t.to,
                    anchors: shifted.collect(),
                }),
            }
        }
        self.transitions
            .sort_by_key(|t| (t.from.index(), t.to.index()));
        self.reassigned
            .extend(other.reassigned.iter().map(|a| a + offset));
    }

    pub fn empty() -> Self {
        Self {
            counts: [[0; 3]; 3],
            transitions: Vec::new(),
            reassigned: Vec::new(),
        }
    }
}

pub fn assignment_diff(a: &AssignmentResult, b: &AssignmentResult) -> Result<DiffReport> {
    if a.labels.len() != b.labels.len() {
        return Err(Error::LengthMismatch {
            left: a.labels.len(),
            right: b.labels.len(),
        });
    }
    let mut report = DiffReport::empty();
    let mut buckets: [[Vec<usize>; 3]; 3] = Default::default();
    for (i, (&la, &lb)) in a.labels.iter().zip(&b.labels).enumerate() {
        let (from, to) = (la.class().index(), lb.class().index());
        report.counts[from][to] += 1;
        if from != to {
            buckets[from][to].push(i);
        } else if la != lb {
            report.reassigned.push(i);
        }
    }
    for from in LabelClass::ALL {
        for to in LabelClass::ALL {
            let anchors = std::mem::take(&mut buckets[from.index()][to.index()]);
            if !anchors.is_empty() {
                report.transitions.push(Transition { from, to, anchors });
            }
        }
    }
    Ok(report)
}
