use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::{info, warn};
use maiou_core::analysis::{self, BenchCase, BenchReport, ComparisonReport, JointStats, MobStats};
use maiou_core::anchors;
use maiou_core::assigner::{AssignerSpec, LabelClass};
use maiou_core::dataset::{CocoInstances, LoadOptions, LoadWarnings, Scene};
use maiou_core::maiou::mob;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{usage, Analysis, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Runs `f` on a dedicated pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;
    Ok(pool.install(f))
}

pub fn default_comparison() -> Vec<AssignerSpec> {
    ["fixed:iou:0.4:0.5", "atss:iou:9", "atss:maiou:9"]
        .iter()
        .map(|s| s.parse().expect("built-in spec"))
        .collect()
}

/// Parses `GRIDxANCHORSxGTS`.
pub fn parse_bench_case(s: &str) -> Result<BenchCase, String> {
    let parts: Vec<&str> = s.split('x').collect();
    let bad = || format!("bad bench case '{s}', expected GRIDxANCHORSxGTS such as 550x6416x8");
    let [g, a, n] = parts.as_slice() else {
        return Err(bad());
    };
    let case = BenchCase {
        grid: g.parse().map_err(|_| bad())?,
        anchors: a.parse().map_err(|_| bad())?,
        gts: n.parse().map_err(|_| bad())?,
    };
    if case.grid == 0 || case.anchors == 0 || case.gts == 0 {
        return Err(bad());
    }
    Ok(case)
}

fn load_options(cfg: &RunConfig) -> LoadOptions {
    LoadOptions {
        include_crowd: cfg.include_crowd,
    }
}

fn open_dataset(cfg: &RunConfig) -> anyhow::Result<CocoInstances> {
    let path = cfg.dataset()?;
    let coco = CocoInstances::from_path(path)?;
    info!(
        "{}: {} images, {} annotations",
        path.display(),
        coco.images().len(),
        coco.annotation_count()
    );
    Ok(coco)
}

fn log_warnings(w: &LoadWarnings) {
    if w.skipped_crowd > 0 {
        info!("skipped {} crowd annotations", w.skipped_crowd);
    }
    if w.skipped_degenerate_boxes > 0 {
        warn!(
            "skipped {} annotations with empty boxes",
            w.skipped_degenerate_boxes
        );
    }
    if w.skipped_polygon_parts > 0 {
        warn!(
            "skipped {} malformed polygon parts",
            w.skipped_polygon_parts
        );
    }
    if w.empty_masks > 0 {
        warn!(
            "{} ground truths have no mask pixels inside their box",
            w.empty_masks
        );
    }
    if w.extent_mismatch > 0 {
        warn!("{} masks disagree with their boxes", w.extent_mismatch);
    }
}

/// Builds every scene in parallel, keeping image order.
pub fn load_scenes(cfg: &RunConfig) -> anyhow::Result<(Vec<Scene>, LoadWarnings)> {
    let coco = open_dataset(cfg)?;
    let opts = load_options(cfg);
    let built: Vec<_> = (0..coco.images().len())
        .into_par_iter()
        .map(|i| {
            let mut w = LoadWarnings::default();
            coco.build_scene(i, &opts, &mut w).map(|s| (s, w))
        })
        .collect();
    let mut warnings = LoadWarnings::default();
    let mut scenes = Vec::new();
    for item in built {
        let (scene, w) = item?;
        warnings.merge(&w);
        scenes.extend(scene);
    }
    log_warnings(&warnings);
    if scenes.is_empty() {
        return Err(maiou_core::Error::EmptyInput("no image has a usable annotation").into());
    }
    Ok((scenes, warnings))
}

fn write_outputs(dir: &Path, files: &[(&str, String)]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn to_json(value: &impl Serialize) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn run_config_json(cfg: &RunConfig, command: &str) -> anyhow::Result<String> {
    to_json(&json!({ "schema_version": SCHEMA_VERSION, "command": command, "config": cfg }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GtRecord {
    pub annotation_id: u64,
    pub category: u64,
    pub mob: f64,
    pub positives: usize,
    /// ATSS adaptive threshold; null for fixed thresholds or no candidates.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneRecord {
    pub image_id: u64,
    pub width: u32,
    pub height: u32,
    pub anchors: usize,
    pub positives: usize,
    pub negatives: usize,
    pub ignores: usize,
    pub gts: Vec<GtRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignTotals {
    pub scenes: usize,
    pub anchors: usize,
    pub positives: usize,
    pub negatives: usize,
    pub ignores: usize,
    pub gts: usize,
    pub gts_without_positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignerRun {
    pub spec: String,
    pub summary: AssignTotals,
    pub scenes: Vec<SceneRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignReport {
    pub schema_version: u32,
    pub dataset: PathBuf,
    pub assigners: Vec<AssignerRun>,
    pub warnings: LoadWarnings,
}

fn assign_scene(
    scene: &Scene,
    spec: &AssignerSpec,
    cfg: &RunConfig,
) -> maiou_core::Result<SceneRecord> {
    let set = anchors::generate(scene.height, scene.width, &cfg.anchors)?;
    let result = spec.run(&set, &scene.gts)?;
    let gts = scene
        .gts
        .iter()
        .enumerate()
        .map(|(g, gt)| GtRecord {
            annotation_id: scene.annotation_ids[g],
            category: gt.category(),
            mob: mob(gt.bbox(), gt),
            positives: result.positives_per_gt[g],
            threshold: result
                .thresholds
                .as_ref()
                .map(|t| t[g])
                .filter(|t| t.is_finite()),
        })
        .collect();
    Ok(SceneRecord {
        image_id: scene.image_id,
        width: scene.width,
        height: scene.height,
        anchors: set.len(),
        positives: result.count(LabelClass::Positive),
        negatives: result.count(LabelClass::Negative),
        ignores: result.count(LabelClass::Ignore),
        gts,
    })
}

pub fn compute_assign(cfg: &RunConfig) -> anyhow::Result<AssignReport> {
    let (scenes, warnings) = load_scenes(cfg)?;
    let mut runs = Vec::with_capacity(cfg.assigners.len());
    for spec in &cfg.assigners {
        let records = scenes
            .par_iter()
            .map(|s| assign_scene(s, spec, cfg))
            .collect::<maiou_core::Result<Vec<_>>>()?;
        let mut summary = AssignTotals {
            scenes: records.len(),
            anchors: 0,
            positives: 0,
            negatives: 0,
            ignores: 0,
            gts: 0,
            gts_without_positive: 0,
        };
        for r in &records {
            summary.anchors += r.anchors;
            summary.positives += r.positives;
            summary.negatives += r.negatives;
            summary.ignores += r.ignores;
            summary.gts += r.gts.len();
            summary.gts_without_positive += r.gts.iter().filter(|g| g.positives == 0).count();
        }
        runs.push(AssignerRun {
            spec: spec.to_string(),
            summary,
            scenes: records,
        });
    }
    Ok(AssignReport {
        schema_version: SCHEMA_VERSION,
        dataset: cfg.dataset()?.to_path_buf(),
        assigners: runs,
        warnings,
    })
}

pub fn assign_csv(report: &AssignReport) -> String {
    let mut out = String::from("spec,image_id,annotation_id,category,mob,positives,threshold\n");
    for run in &report.assigners {
        for scene in &run.scenes {
            for g in &scene.gts {
                let threshold = g.threshold.map(|t| format!("{t:.6}")).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.6},{},{}",
                    run.spec,
                    scene.image_id,
                    g.annotation_id,
                    g.category,
                    g.mob,
                    g.positives,
                    threshold
                );
            }
        }
    }
    out
}

pub fn assign_table(report: &AssignReport) -> String {
    let mut out = format!(
        "{:<22} {:>7} {:>9} {:>9} {:>9} {:>8} {:>6} {:>10}\n",
        "assigner", "scenes", "anchors", "positive", "negative", "ignore", "gts", "no-pos-gts"
    );
    for run in &report.assigners {
        let s = &run.summary;
        let _ = writeln!(
            out,
            "{:<22} {:>7} {:>9} {:>9} {:>9} {:>8} {:>6} {:>10}",
            run.spec,
            s.scenes,
            s.anchors,
            s.positives,
            s.negatives,
            s.ignores,
            s.gts,
            s.gts_without_positive
        );
    }
    out
}

pub fn cmd_assign(cfg: &RunConfig) -> anyhow::Result<()> {
    let report = compute_assign(cfg)?;
    write_outputs(
        &cfg.output,
        &[
            ("assignments.json", to_json(&report)?),
            ("assignments.csv", assign_csv(&report)),
            ("run_config.json", run_config_json(cfg, "assign")?),
        ],
    )?;
    print!("{}", assign_table(&report));
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub dataset: PathBuf,
    pub mob: Option<MobStats>,
    pub joint: Option<JointStats>,
    pub warnings: LoadWarnings,
}

impl StatsReport {
    pub fn to_json(&self) -> anyhow::Result<String> {
        let mob = self.mob.as_ref().map(|m| {
            json!({
                "ground_truths": m.total,
                "below_half": m.below_half,
                "fraction_below_half": m.fraction_below_half(),
                "counts": m.histogram.counts,
            })
        });
        let joint = self.joint.as_ref().map(|j| {
            json!({
                "pairs": j.pairs,
                "low_iou_high_maiou": j.low_iou_high_maiou,
                "high_iou_low_maiou": j.high_iou_low_maiou,
            })
        });
        to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "dataset": self.dataset,
            "mob": mob,
            "joint": joint,
            "warnings": self.warnings,
        }))
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if let Some(m) = &self.mob {
            let _ = writeln!(out, "ground truths        {:>10}", m.total);
            let _ = writeln!(out, "MOB < 0.5            {:>10}", m.below_half);
            let _ = writeln!(
                out,
                "fraction MOB < 0.5   {:>10.4}",
                m.fraction_below_half()
            );
        }
        if let Some(j) = &self.joint {
            let _ = writeln!(out, "anchor/gt pairs      {:>10}", j.pairs);
            let _ = writeln!(out, "IoU<0.5, maIoU>=0.5  {:>10}", j.low_iou_high_maiou);
            let _ = writeln!(out, "IoU>=0.5, maIoU<0.5  {:>10}", j.high_iou_low_maiou);
        }
        out
    }
}

/// Computes the requested statistics one image at a time, so only the
/// scenes in flight are held in memory.
pub fn compute_stats(cfg: &RunConfig) -> anyhow::Result<StatsReport> {
    let want_mob = cfg.analyses.contains(&Analysis::Mob);
    let want_joint = cfg.analyses.contains(&Analysis::Joint);
    if !want_mob && !want_joint {
        return Err(usage("no analysis selected; use --analysis mob,joint"));
    }
    let coco = open_dataset(cfg)?;
    let opts = load_options(cfg);

    type Partial = (MobStats, JointStats, LoadWarnings);
    let partials: Vec<maiou_core::Result<Partial>> = (0..coco.images().len())
        .into_par_iter()
        .map(|i| {
            let mut m = MobStats::new(cfg.bins);
            let mut j = JointStats::new(cfg.bins);
            let mut w = LoadWarnings::default();
            if let Some(scene) = coco.build_scene(i, &opts, &mut w)? {
                if want_mob {
                    m.add_scene(&scene);
                }
                if want_joint {
                    j.add_scene(&scene, &cfg.anchors)?;
                }
            }
            Ok((m, j, w))
        })
        .collect();

    let mut mob_stats = MobStats::new(cfg.bins);
    let mut joint_stats = JointStats::new(cfg.bins);
    let mut warnings = LoadWarnings::default();
    for p in partials {
        let (m, j, w) = p?;
        mob_stats.merge(&m);
        joint_stats.merge(&j);
        warnings.merge(&w);
    }
    log_warnings(&warnings);
    if want_mob && mob_stats.total == 0 {
        return Err(maiou_core::Error::EmptyInput("no ground truths for the MOB histogram").into());
    }
    Ok(StatsReport {
        dataset: cfg.dataset()?.to_path_buf(),
        mob: want_mob.then_some(mob_stats),
        joint: want_joint.then_some(joint_stats),
        warnings,
    })
}

pub fn stats_files(report: &StatsReport) -> anyhow::Result<Vec<(&'static str, String)>> {
    let mut files = vec![("stats.json", report.to_json()?)];
    if let Some(m) = &report.mob {
        files.push(("mob_histogram.csv", m.histogram.to_csv()));
    }
    if let Some(j) = &report.joint {
        files.push(("joint_histogram.csv", j.histogram.to_csv("iou", "maiou")));
    }
    Ok(files)
}

pub fn cmd_stats(cfg: &RunConfig) -> anyhow::Result<()> {
    let report = compute_stats(cfg)?;
    let mut files = stats_files(&report)?;
    files.push(("run_config.json", run_config_json(cfg, "stats")?));
    write_outputs(&cfg.output, &files)?;
    print!("{}", report.to_table());
    Ok(())
}

pub fn bench_csv(report: &BenchReport) -> String {
    let mut out =
        String::from("grid,anchors,gts,repetitions,brute_median_s,fast_median_s,speedup,low_confidence,matrices_match\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6e},{:.6e},{:.3},{},{}",
            r.grid,
            r.anchors,
            r.gts,
            r.repetitions,
            r.brute_median_s,
            r.fast_median_s,
            r.speedup,
            r.low_confidence,
            r.matrices_match
        );
    }
    out
}

pub fn cmd_bench(cfg: &RunConfig) -> anyhow::Result<()> {
    let report = analysis::bench_maiou(&cfg.bench).map_err(|e| match e {
        maiou_core::Error::InvalidConfig(msg) => usage(msg),
        other => other.into(),
    })?;
    for r in &report.rows {
        if r.low_confidence {
            warn!(
                "{}x{}x{}: {} repetition(s), timing is low-confidence",
                r.grid, r.anchors, r.gts, r.repetitions
            );
        }
    }
    write_outputs(
        &cfg.output,
        &[
            (
                "bench.json",
                to_json(
                    &json!({ "schema_version": SCHEMA_VERSION, "rows": report.rows, "note": report.note }),
                )?,
            ),
            ("bench.csv", bench_csv(&report)),
            ("run_config.json", run_config_json(cfg, "bench")?),
        ],
    )?;
    print!("{}", report.to_table());
    if report.rows.iter().any(|r| !r.matrices_match) {
        anyhow::bail!("fast and brute-force maIoU disagree");
    }
    Ok(())
}

pub fn compute_compare(cfg: &RunConfig) -> anyhow::Result<ComparisonReport> {
    if cfg.assigners.len() < 2 {
        return Err(usage(
            "compare needs at least two assigner specs; pass --spec twice or more",
        ));
    }
    let (scenes, _) = load_scenes(cfg)?;
    Ok(analysis::compare_assigners(
        &scenes,
        &cfg.anchors,
        &cfg.assigners,
    )?)
}

const CLASS_NAMES: [&str; 3] = ["pos", "neg", "ign"];

pub fn compare_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("from_spec,to_spec,from_label,to_label,anchors\n");
    for d in &report.diffs {
        for (i, from) in CLASS_NAMES.iter().enumerate() {
            for (j, to) in CLASS_NAMES.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    report.specs[d.from_spec].spec,
                    report.specs[d.to_spec].spec,
                    from,
                    to,
                    d.counts[i][j]
                );
            }
        }
    }
    out
}

pub fn compare_table(report: &ComparisonReport) -> String {
    let mut out = format!(
        "{:<22} {:>9} {:>9} {:>8} {:>6}\n",
        "assigner", "positive", "negative", "ignore", "gts"
    );
    for s in &report.specs {
        let _ = writeln!(
            out,
            "{:<22} {:>9} {:>9} {:>8} {:>6}",
            s.spec, s.positives, s.negatives, s.ignores, s.gts
        );
    }
    for d in &report.diffs {
        let _ = writeln!(
            out,
            "\n{} -> {}: {} changed, {} reassigned",
            report.specs[d.from_spec].spec, report.specs[d.to_spec].spec, d.changed, d.reassigned
        );
        let _ = writeln!(
            out,
            "{:>8} {:>9} {:>9} {:>9}",
            "from\\to", CLASS_NAMES[0], CLASS_NAMES[1], CLASS_NAMES[2]
        );
        for (i, name) in CLASS_NAMES.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>8} {:>9} {:>9} {:>9}",
                name, d.counts[i][0], d.counts[i][1], d.counts[i][2]
            );
        }
    }
    out
}

pub fn cmd_compare(cfg: &RunConfig) -> anyhow::Result<()> {
    let report = compute_compare(cfg)?;
    write_outputs(
        &cfg.output,
        &[
            (
                "compare.json",
                to_json(
                    &json!({ "schema_version": SCHEMA_VERSION, "specs": report.specs, "diffs": report.diffs }),
                )?,
            ),
            ("compare.csv", compare_csv(&report)),
            ("run_config.json", run_config_json(cfg, "compare")?),
        ],
    )?;
    print!("{}", compare_table(&report));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_case_parsing() {
        assert_eq!(
            parse_bench_case("550x6416x8").unwrap(),
            BenchCase {
                grid: 550,
                anchors: 6416,
                gts: 8
            }
        );
        assert!(parse_bench_case("550x6416").is_err());
        assert!(parse_bench_case("0x1x1").is_err());
        assert!(parse_bench_case("ax1x1").is_err());
    }

    #[test]
    fn default_comparison_specs() {
        let names: Vec<String> = default_comparison().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["fixed:iou:0.4:0.5", "atss:iou:9", "atss:maiou:9"]);
    }
}
