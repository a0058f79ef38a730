//! Dataset statistics, assigner comparison and the maIoU timing benchmark.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::anchors::{self, AnchorConfig};
use crate::assigner::{assignment_diff, AssignerSpec, DiffReport, LabelClass};
use crate::dataset::Scene;
use crate::geometry::BBox;
use crate::maiou::{maiou_brute, maiou_fast, maiou_fast_counts, mob, GroundTruth};
use crate::raster::{rasterize_polygon, BinaryMask};
use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 20;

/// Uniform bins on `[0, 1]`; the value 1 falls into the last bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn unit(bins: usize) -> Self {
        assert!(bins > 0, "at least one bin");
        Self {
            edges: unit_edges(bins),
            counts: vec![0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, v: f64) {
        let i = unit_bin(v, self.bins());
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.bins(), other.bins());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{:.4},{:.4},{}", self.edges[i], self.edges[i + 1], c);
        }
        out
    }
}

/// Joint histogram over uniform `[0, 1]` bins on both axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram2D {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// Row-major: `counts[x_bin * y_bins + y_bin]`.
    pub counts: Vec<u64>,
}

impl Histogram2D {
    pub fn unit(x_bins: usize, y_bins: usize) -> Self {
        assert!(x_bins > 0 && y_bins > 0, "at least one bin per axis");
        Self {
            x_edges: unit_edges(x_bins),
            y_edges: unit_edges(y_bins),
            counts: vec![0; x_bins * y_bins],
        }
    }

    pub fn x_bins(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn y_bins(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn add(&mut self, x: f64, y: f64) {
        let (i, j) = (unit_bin(x, self.x_bins()), unit_bin(y, self.y_bins()));
        let yb = self.y_bins();
        self.counts[i * yb + j] += 1;
    }

    pub fn get(&self, x_bin: usize, y_bin: usize) -> u64 {
        self.counts[x_bin * self.y_bins() + y_bin]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &Histogram2D) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn to_csv(&self, x_name: &str, y_name: &str) -> String {
        let mut out = format!("{x_name}_lo,{x_name}_hi,{y_name}_lo,{y_name}_hi,count\n");
        for i in 0..self.x_bins() {
            for j in 0..self.y_bins() {
                let _ = writeln!(
                    out,
                    "{:.4},{:.4},{:.4},{:.4},{}",
                    self.x_edges[i],
                    self.x_edges[i + 1],
                    self.y_edges[j],
                    self.y_edges[j + 1],
                    self.get(i, j)
                );
            }
        }
        out
    }
}

fn unit_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

#[inline]
fn unit_bin(v: f64, bins: usize) -> usize {
    ((v.clamp(0.0, 1.0) * bins as f64).floor() as usize).min(bins - 1)
}

/// Distribution of ground-truth MOB ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MobStats {
    pub histogram: Histogram,
    pub total: u64,
    pub below_half: u64,
}

impl MobStats {
    pub fn new(bins: usize) -> Self {
        Self {
            histogram: Histogram::unit(bins),
            total: 0,
            below_half: 0,
        }
    }

    pub fn add_scene(&mut self, scene: &Scene) {
        for gt in &scene.gts {
            let v = mob(gt.bbox(), gt);
            self.histogram.add(v);
            self.total += 1;
            self.below_half += (v < 0.5) as u64;
        }
    }

    pub fn merge(&mut self, other: &MobStats) {
        self.histogram.merge(&other.histogram);
        self.total += other.total;
        self.below_half += other.below_half;
    }

    pub fn fraction_below_half(&self) -> f64 {
        self.below_half as f64 / self.total as f64
    }
}

pub fn mob_histogram(scenes: &[Scene], bins: usize) -> Result<MobStats> {
    let mut stats = MobStats::new(bins);
    for scene in scenes {
        stats.add_scene(scene);
    }
    if stats.total == 0 {
        return Err(Error::EmptyInput("no ground truths for the MOB histogram"));
    }
    Ok(stats)
}

/// Joint distribution of (IoU, maIoU) over anchor/ground-truth pairs.
///
/// IoU here is the pixel-domain IoU, so both axes share one discretization
/// and masks that fill their boxes land exactly on the diagonal. Pairs with
/// both measures zero are dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointStats {
    pub histogram: Histogram2D,
    pub pairs: u64,
    pub low_iou_high_maiou: u64,
    pub high_iou_low_maiou: u64,
}

impl JointStats {
    pub fn new(bins: usize) -> Self {
        Self {
            histogram: Histogram2D::unit(bins, bins),
            pairs: 0,
            low_iou_high_maiou: 0,
            high_iou_low_maiou: 0,
        }
    }

    pub fn add_pair(&mut self, iou: f64, maiou: f64) {
        if iou == 0.0 && maiou == 0.0 {
            return;
        }
        self.histogram.add(iou, maiou);
        self.pairs += 1;
        self.low_iou_high_maiou += (iou < 0.5 && maiou >= 0.5) as u64;
        self.high_iou_low_maiou += (iou >= 0.5 && maiou < 0.5) as u64;
    }

    pub fn add_scene(&mut self, scene: &Scene, cfg: &AnchorConfig) -> Result<()> {
        let anchors = anchors::generate(scene.height, scene.width, cfg)?;
        for gt in &scene.gts {
            for anchor in anchors.boxes() {
                let counts = maiou_fast_counts(anchor, gt);
                self.add_pair(counts.pixel_iou(), counts.value());
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &JointStats) {
        self.histogram.merge(&other.histogram);
        self.pairs += other.pairs;
        self.low_iou_high_maiou += other.low_iou_high_maiou;
        self.high_iou_low_maiou += other.high_iou_low_maiou;
    }
}

pub fn joint_histogram(scenes: &[Scene], cfg: &AnchorConfig, bins: usize) -> Result<JointStats> {
    cfg.validate()?;
    let per_scene = |scene: &Scene| -> Result<JointStats> {
        let mut s = JointStats::new(bins);
        s.add_scene(scene, cfg)?;
        Ok(s)
    };
    #[cfg(feature = "parallel")]
    let partials: Vec<Result<JointStats>> = {
        use rayon::prelude::*;
        scenes.par_iter().map(per_scene).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<JointStats>> = scenes.iter().map(per_scene).collect();

    let mut stats = JointStats::new(bins);
    for p in partials {
        stats.merge(&p?);
    }
    Ok(stats)
}

/// Label totals of one assigner over a set of scenes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecSummary {
    pub spec: String,
    pub positives: usize,
    pub negatives: usize,
    pub ignores: usize,
    pub gts: usize,
    /// number of positives -> number of ground truths with that many
    pub positives_per_gt: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffSummary {
    pub from_spec: usize,
    pub to_spec: usize,
    /// `counts[from][to]` indexed positive, negative, ignore.
    pub counts: [[usize; 3]; 3],
    pub reassigned: usize,
    pub changed: usize,
}

impl DiffSummary {
    pub fn count(&self, from: LabelClass, to: LabelClass) -> usize {
        let idx = |c: LabelClass| LabelClass::ALL.iter().position(|&x| x == c).unwrap();
        self.counts[idx(from)][idx(to)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub specs: Vec<SpecSummary>,
    pub diffs: Vec<DiffSummary>,
}

/// Runs every spec on every scene and diffs each pair of specs.
pub fn compare_assigners(
    scenes: &[Scene],
    cfg: &AnchorConfig,
    specs: &[AssignerSpec],
) -> Result<ComparisonReport> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one assigner spec is required".into(),
        ));
    }
    for spec in specs {
        spec.validate()?;
    }
    let mut summaries: Vec<SpecSummary> = specs
        .iter()
        .map(|s| SpecSummary {
            spec: s.to_string(),
            positives: 0,
            negatives: 0,
            ignores: 0,
            gts: 0,
            positives_per_gt: BTreeMap::new(),
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|a| (a + 1..specs.len()).map(move |b| (a, b)))
        .collect();
    let mut diffs: Vec<DiffReport> = pairs.iter().map(|_| DiffReport::empty()).collect();

    for scene in scenes {
        let anchors = anchors::generate(scene.height, scene.width, cfg)?;
        let results = specs
            .iter()
            .map(|s| s.run(&anchors, &scene.gts))
            .collect::<Result<Vec<_>>>()?;
        for (summary, r) in summaries.iter_mut().zip(&results) {
            summary.positives += r.count(LabelClass::Positive);
            summary.negatives += r.count(LabelClass::Negative);
            summary.ignores += r.count(LabelClass::Ignore);
            summary.gts += r.positives_per_gt.len();
            for &n in &r.positives_per_gt {
                *summary.positives_per_gt.entry(n).or_default() += 1;
            }
        }
        for (d, &(a, b)) in diffs.iter_mut().zip(&pairs) {
            d.merge(&assignment_diff(&results[a], &results[b])?, 0);
        }
    }

    let diffs = diffs
        .into_iter()
        .zip(&pairs)
        .map(|(d, &(a, b))| DiffSummary {
            from_spec: a,
            to_spec: b,
            counts: d.counts,
            reassigned: d.reassigned.len(),
            changed: d.changed(),
        })
        .collect();
    Ok(ComparisonReport {
        specs: summaries,
        diffs,
    })
}

/// One benchmark configuration: a square grid, anchors and ground truths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct BenchCase {
    pub grid: u32,
    pub anchors: usize,
    pub gts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub cases: Vec<BenchCase>,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            cases: vec![
                BenchCase {
                    grid: 8,
                    anchors: 1,
                    gts: 1,
                },
                BenchCase {
                    grid: 550,
                    anchors: 3208,
                    gts: 8,
                },
                BenchCase {
                    grid: 550,
                    anchors: 6416,
                    gts: 8,
                },
            ],
            repetitions: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub grid: u32,
    pub anchors: usize,
    pub gts: usize,
    pub repetitions: usize,
    /// Median seconds for brute-force maIoU over all pairs.
    pub brute_median_s: f64,
    /// Median seconds for integral-image builds plus fast maIoU.
    pub fast_median_s: f64,
    pub speedup: f64,
    /// Fewer than 5 repetitions.
    pub low_confidence: bool,
    /// Both paths produced bit-identical matrices on every run.
    pub matrices_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub note: &'static str,
}

pub const BENCH_NOTE: &str = "speedup covers the maIoU kernel alone (brute-force pixel counting vs integral image), \
not a whole training iteration; the acceptance floor for the kernel is 10x";

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>6} {:>8} {:>4} {:>5} {:>12} {:>12} {:>9}  {}\n",
            "grid", "anchors", "gts", "reps", "brute_ms", "fast_ms", "speedup", "flags"
        );
        for r in &self.rows {
            let mut flags = Vec::new();
            if r.low_confidence {
                flags.push("low-confidence");
            }
            if !r.matrices_match {
                flags.push("MISMATCH");
            }
            let _ = writeln!(
                out,
                "{:>6} {:>8} {:>4} {:>5} {:>12.3} {:>12.3} {:>9.1}  {}",
                r.grid,
                r.anchors,
                r.gts,
                r.repetitions,
                r.brute_median_s * 1e3,
                r.fast_median_s * 1e3,
                r.speedup,
                flags.join(",")
            );
        }
        out.push_str(self.note);
        out.push('\n');
        out
    }
}

/// Seeded synthetic scene: `gts` polygonal blobs and `anchors` boxes on a
/// `grid x grid` image.
pub fn synthetic_scene(case: &BenchCase, seed: u64) -> Result<(Vec<BBox>, Vec<GroundTruth>)> {
    if case.grid == 0 || case.anchors == 0 || case.gts == 0 {
        return Err(Error::InvalidConfig(format!(
            "bench case {case:?} must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = case.grid;
    let gf = g as f64;

    let mut gts = Vec::with_capacity(case.gts);
    let lo = (gf / 16.0).max(1.0);
    let hi = (gf / 4.0).max(lo + 1.0).min(gf);
    for _ in 0..case.gts {
        let w = rng.gen_range(lo..=hi);
        let h = rng.gen_range(lo..=hi);
        let x = rng.gen_range(0.0..=(gf - w).max(0.0));
        let y = rng.gen_range(0.0..=(gf - h).max(0.0));
        let bbox = BBox::new(x, y, x + w, y + h)?;
        let (cx, cy) = bbox.center();
        let vertices: Vec<(f64, f64)> = (0..24)
            .map(|i| {
                let t = i as f64 / 24.0 * std::f64::consts::TAU;
                let r = rng.gen_range(0.55..=1.0);
                (cx + r * w / 2.0 * t.cos(), cy + r * h / 2.0 * t.sin())
            })
            .collect();
        let mut mask = rasterize_polygon(&vertices, g, g)?;
        if mask.count_ones() == 0 {
            mask = BinaryMask::from_fn(g, g, |r, c| r == cy as u32 && c == cx as u32)?;
        }
        gts.push(GroundTruth::new(bbox, mask, 0)?);
    }

    let pool = anchors::generate(g, g, &AnchorConfig::default())?;
    let pool = pool.boxes();
    let mut boxes: Vec<BBox> = (0..case.anchors.min(pool.len()))
        .map(|i| pool[i * pool.len() / case.anchors.min(pool.len())])
        .collect();
    while boxes.len() < case.anchors {
        let side = rng.gen_range(1.0..=gf);
        let cx = rng.gen_range(0.0..gf);
        let cy = rng.gen_range(0.0..gf);
        boxes.push(BBox::from_center(cx, cy, side, side)?);
    }
    Ok((boxes, gts))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Times both maIoU paths, single-threaded, one warm-up run each followed
/// by `repetitions` measured runs.
pub fn bench_maiou(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.repetitions == 0 {
        return Err(Error::InvalidConfig(
            "bench repetitions must be at least 1".into(),
        ));
    }
    let mut rows = Vec::with_capacity(cfg.cases.len());
    for (i, case) in cfg.cases.iter().enumerate() {
        let (anchors, gts) = synthetic_scene(case, cfg.seed.wrapping_add(i as u64))?;
        let masks: Vec<(BBox, BinaryMask)> =
            gts.iter().map(|g| (*g.bbox(), g.mask().clone())).collect();

        let brute = || -> Vec<f64> {
            let mut out = Vec::with_capacity(anchors.len() * gts.len());
            for a in &anchors {
                for gt in &gts {
                    out.push(maiou_brute(a, gt));
                }
            }
            out
        };
        let fast = || -> Result<Vec<f64>> {
            let built = masks
                .iter()
                .map(|(b, m)| GroundTruth::new(*b, m.clone(), 0))
                .collect::<Result<Vec<_>>>()?;
            let mut out = Vec::with_capacity(anchors.len() * built.len());
            for a in &anchors {
                for gt in &built {
                    out.push(maiou_fast(a, gt));
                }
            }
            Ok(out)
        };

        let reference = brute();
        let mut matrices_match = reference == fast()?;
        let mut brute_times = Vec::with_capacity(cfg.repetitions);
        let mut fast_times = Vec::with_capacity(cfg.repetitions);
        for _ in 0..cfg.repetitions {
            let t = Instant::now();
            let b = std::hint::black_box(brute());
            brute_times.push(t.elapsed().as_secs_f64());
            let t = Instant::now();
            let f = std::hint::black_box(fast()?);
            fast_times.push(t.elapsed().as_secs_f64());
            matrices_match &= b == reference && f == reference;
        }
        let (brute_median_s, fast_median_s) = (median(brute_times), median(fast_times));
        rows.push(BenchRow {
            grid: case.grid,
            anchors: case.anchors,
            gts: case.gts,
            repetitions: cfg.repetitions,
            brute_median_s,
            fast_median_s,
            speedup: brute_median_s / fast_median_s.max(f64::MIN_POSITIVE),
            low_confidence: cfg.repetitions < 5,
            matrices_match,
        });
    }
    Ok(BenchReport {
        rows,
        note: BENCH_NOTE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene_with(gts: Vec<GroundTruth>, h: u32, w: u32) -> Scene {
        let ids = (0..gts.len() as u64).collect();
        Scene {
            image_id: 1,
            width: w,
            height: h,
            gts,
            annotation_ids: ids,
        }
    }

    fn rect_gt(x1: u32, y1: u32, x2: u32, y2: u32, mask_cols: u32, h: u32, w: u32) -> GroundTruth {
        let bbox = BBox::new(x1 as f64, y1 as f64, x2 as f64, y2 as f64).unwrap();
        let mask = BinaryMask::from_fn(h, w, |r, c| {
            r >= y1 && r < y2 && c >= x1 && c < x1 + mask_cols
        })
        .unwrap();
        GroundTruth::new(bbox, mask, 0).unwrap()
    }

    #[test]
    fn binning_edges() {
        let mut h = Histogram::unit(4);
        for v in [0.0, 0.2499, 0.25, 0.99, 1.0] {
            h.add(v);
        }
        assert_eq!(h.counts, vec![2, 1, 0, 2]);
        assert_eq!(h.edges, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(h.total(), 5);
    }

    #[test]
    fn mob_histogram_examples() {
        let full = scene_with(vec![rect_gt(0, 0, 8, 8, 8, 8, 8)], 8, 8);
        let stats = mob_histogram(std::slice::from_ref(&full), DEFAULT_BINS).unwrap();
        assert_eq!(stats.histogram.counts[DEFAULT_BINS - 1], 1);
        assert_eq!(stats.fraction_below_half(), 0.0);

        // MOB 0.25 and 0.75
        let two = scene_with(
            vec![rect_gt(0, 0, 8, 8, 2, 8, 8), rect_gt(0, 0, 8, 8, 6, 8, 8)],
            8,
            8,
        );
        let stats = mob_histogram(std::slice::from_ref(&two), 2).unwrap();
        assert_eq!(stats.histogram.counts, vec![1, 1]);
        assert_eq!(stats.fraction_below_half(), 0.5);

        assert!(matches!(mob_histogram(&[], 20), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn joint_half_mask_pairs() {
        let mut stats = JointStats::new(DEFAULT_BINS);
        let gt = rect_gt(0, 0, 10, 10, 5, 10, 10);
        for a in [
            BBox::new(0.0, 0.0, 5.0, 10.0).unwrap(),
            BBox::new(5.0, 0.0, 10.0, 10.0).unwrap(),
        ] {
            let c = maiou_fast_counts(&a, &gt);
            stats.add_pair(c.pixel_iou(), c.value());
        }
        assert_eq!(stats.pairs, 2);
        assert_eq!(stats.histogram.get(10, 19), 1);
        assert_eq!(stats.histogram.get(10, 0), 1);
        assert_eq!(stats.high_iou_low_maiou, 1);
        assert_eq!(stats.low_iou_high_maiou, 0);
    }

    #[test]
    fn joint_diagonal_when_masks_fill_boxes() {
        let gts = vec![
            rect_gt(3, 5, 40, 30, 37, 48, 64),
            rect_gt(20, 10, 60, 45, 40, 48, 64),
        ];
        let scene = scene_with(gts, 48, 64);
        let stats = joint_histogram(
            std::slice::from_ref(&scene),
            &AnchorConfig::default(),
            DEFAULT_BINS,
        )
        .unwrap();
        assert!(stats.pairs > 0);
        assert_eq!(stats.histogram.total(), stats.pairs);
        for i in 0..DEFAULT_BINS {
            for j in 0..DEFAULT_BINS {
                if i != j {
                    assert_eq!(stats.histogram.get(i, j), 0, "off-diagonal bin ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn compare_identical_specs_has_no_diffs() {
        let scene = scene_with(vec![rect_gt(3, 5, 40, 30, 10, 48, 64)], 48, 64);
        let spec = AssignerSpec::default();
        let r = compare_assigners(
            std::slice::from_ref(&scene),
            &AnchorConfig::default(),
            &[spec, spec],
        )
        .unwrap();
        assert_eq!(r.diffs.len(), 1);
        assert_eq!(r.diffs[0].changed, 0);
        assert_eq!(r.specs[0], r.specs[1]);
    }

    #[test]
    fn atss_k1_single_level_bounds_positives() {
        let scene = scene_with(
            vec![
                rect_gt(3, 5, 40, 30, 10, 48, 64),
                rect_gt(30, 20, 62, 46, 30, 48, 64),
            ],
            48,
            64,
        );
        let cfg = AnchorConfig {
            strides: vec![8],
            ..AnchorConfig::default()
        };
        let spec = AssignerSpec::Atss {
            measure: crate::ProximityMeasure::Maiou,
            k: 1,
        };
        let r = compare_assigners(std::slice::from_ref(&scene), &cfg, &[spec]).unwrap();
        assert!(r.specs[0].positives_per_gt.keys().all(|&n| n <= 1));
    }

    #[test]
    fn bench_smoke() {
        let cfg = BenchConfig {
            cases: vec![
                BenchCase {
                    grid: 8,
                    anchors: 1,
                    gts: 1,
                },
                BenchCase {
                    grid: 64,
                    anchors: 100,
                    gts: 3,
                },
            ],
            repetitions: 1,
            seed: 7,
        };
        let report = bench_maiou(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report
            .rows
            .iter()
            .all(|r| r.matrices_match && r.low_confidence));
        assert!(report.to_table().contains("low-confidence"));
        assert!(bench_maiou(&BenchConfig {
            repetitions: 0,
            ..cfg
        })
        .is_err());
    }

    #[test]
    fn synthetic_scene_is_seeded() {
        let case = BenchCase {
            grid: 100,
            anchors: 500,
            gts: 4,
        };
        let (a1, g1) = synthetic_scene(&case, 3).unwrap();
        let (a2, g2) = synthetic_scene(&case, 3).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(a1.len(), 500);
        assert!(g1
            .iter()
            .zip(&g2)
            .all(|(x, y)| x.mask() == y.mask() && x.bbox() == y.bbox()));
        assert!(g1.iter().all(|g| g.mask_count() > 0));
    }
}
