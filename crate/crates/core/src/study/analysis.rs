//! Descriptive analysis of study logs.
//!
//! Completion times are filtered on the log scale and reported on the
//! original scale. Other measures are filtered as recorded. Only measured
//! (large-graph) passes contribute.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::egoview::ViewCondition;
use crate::error::{Error, Result};
use crate::protocol::Instrument;
use crate::session::SessionEvent;
use crate::study::log::{EventLog, Stage};
use crate::tasks::TaskKind;

/// Smallest sample the outlier filter is applied to.
pub const MIN_FILTER_SAMPLES: usize = 4;
pub const IQR_FACTOR: f64 = 1.5;

/// Quantile by linear interpolation between order statistics
/// (position `q * (n - 1)` in the sorted sample).
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub kept: Vec<f64>,
    /// False when the sample was too small to filter.
    pub applied: bool,
}

/// Inclusive Tukey fences, or `None` when the sample is too small.
pub fn fences(samples: &[f64]) -> Option<(f64, f64)> {
    if samples.len() < MIN_FILTER_SAMPLES {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25)?;
    let q3 = quantile(&sorted, 0.75)?;
    let iqr = q3 - q1;
    Some((q1 - IQR_FACTOR * iqr, q3 + IQR_FACTOR * iqr))
}

/// Drops values outside `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`, keeping input order.
pub fn filter_outliers(samples: &[f64]) -> Filtered {
    match fences(samples) {
        None => Filtered { kept: samples.to_vec(), applied: false },
        Some((lo, hi)) => Filtered {
            kept: samples.iter().copied().filter(|&x| x >= lo && x <= hi).collect(),
            applied: true,
        },
    }
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation (`n - 1` denominator); zero for one value.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub kind: TaskKind,
    pub condition: ViewCondition,
    pub measure: String,
    pub count: usize,
    pub kept: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    /// Mean of the natural log of the kept values, for completion times.
    pub log_mean: Option<f64>,
    pub filter_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub log_transform_times: bool,
    pub outlier_rule: String,
    pub quartiles: String,
    pub stages: Vec<Stage>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            log_transform_times: true,
            outlier_rule: format!("outside [Q1 - {IQR_FACTOR} IQR, Q3 + {IQR_FACTOR} IQR], n >= {MIN_FILTER_SAMPLES}"),
            quartiles: "linear interpolation between order statistics".into(),
            stages: vec![Stage::Measured],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub logs_used: usize,
    pub rows: Vec<Aggregate>,
    pub warnings: Vec<String>,
}

type Key = (TaskKind, ViewCondition, String);

fn collect(log: &EventLog, samples: &mut BTreeMap<Key, Vec<f64>>) -> Result<()> {
    log.validate()?;
    if !log.records.iter().any(|r| r.kind == "study.end") {
        return Err(Error::Format("log has no study.end record".into()));
    }
    for (pass, records) in log.passes()? {
        if pass.stage != Stage::Measured {
            continue;
        }
        for r in records {
            if let SessionEvent::TaskEnd { result, .. } = r.event {
                let Some(kind) = result.kind else { continue };
                for (name, value) in result.measures() {
                    samples.entry((kind, pass.condition, name.to_owned())).or_default().push(value);
                }
            }
        }
    }
    Ok(())
}

fn aggregate(kind: TaskKind, condition: ViewCondition, measure: String, values: &[f64]) -> Aggregate {
    let is_time = measure == "completion_time";
    let (kept, applied, log_mean) = if is_time && values.iter().all(|&v| v > 0.0) {
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let bounds = fences(&logs);
        let inside = |l: f64| bounds.is_none_or(|(lo, hi)| l >= lo && l <= hi);
        let kept: Vec<f64> = values.iter().zip(&logs).filter(|(_, l)| inside(**l)).map(|(v, _)| *v).collect();
        let kept_logs: Vec<f64> = logs.iter().copied().filter(|l| inside(*l)).collect();
        (kept, bounds.is_some(), mean(&kept_logs))
    } else {
        let f = filter_outliers(values);
        (f.kept, f.applied, None)
    };
    let mut sorted = kept.clone();
    sorted.sort_by(f64::total_cmp);
    Aggregate {
        kind,
        condition,
        measure,
        count: values.len(),
        kept: kept.len(),
        mean: mean(&kept).unwrap_or(f64::NAN),
        median: quantile(&sorted, 0.5).unwrap_or(f64::NAN),
        sd: sample_sd(&kept).unwrap_or(f64::NAN),
        log_mean,
        filter_applied: applied,
    }
}

/// Aggregates measures per task kind, condition and measure. Incomplete
/// or corrupt logs are skipped with a warning; exact duplicates of an
/// already seen log are skipped as resubmissions.
pub fn analyze(logs: &[(String, EventLog)]) -> Result<AnalysisReport> {
    let mut samples: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut seen = BTreeSet::new();
    let mut used = 0;
    for (name, log) in logs {
        let fingerprint = serde_json::to_string(&log.records)?;
        if !seen.insert(fingerprint) {
            warnings.push(format!("{name}: duplicate of an earlier log, skipped"));
            continue;
        }
        let mut local = BTreeMap::new();
        match collect(log, &mut local) {
            Ok(()) => {
                used += 1;
                for (k, mut v) in local {
                    samples.entry(k).or_default().append(&mut v);
                }
            }
            Err(e) => warnings.push(format!("{name}: {e}")),
        }
    }
    if used == 0 {
        return Err(Error::Input(format!("no complete logs ({})", warnings.join("; "))));
    }
    let rows = samples
        .into_iter()
        .map(|((kind, condition, measure), values)| aggregate(kind, condition, measure, &values))
        .collect();
    Ok(AnalysisReport { config: AnalysisConfig::default(), logs_used: used, rows, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireRow {
    pub log: String,
    pub pass: Option<usize>,
    pub condition: Option<ViewCondition>,
    pub stage: Option<Stage>,
    pub instrument: Instrument,
    pub items: Vec<u32>,
}

/// Every questionnaire in `logs`, stored verbatim.
pub fn questionnaire_rows(logs: &[(String, EventLog)]) -> Result<Vec<QuestionnaireRow>> {
    let mut rows = Vec::new();
    for (name, log) in logs {
        for (pass, q) in log.questionnaires()? {
            rows.push(QuestionnaireRow {
                log: name.clone(),
                pass: pass.map(|p| p.pass),
                condition: q.condition.or(pass.map(|p| p.condition)),
                stage: pass.map(|p| p.stage),
                instrument: q.instrument,
                items: q.items,
            });
        }
    }
    Ok(rows)
}

pub fn write_questionnaire_csv<W: Write>(rows: &[QuestionnaireRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["log", "pass", "condition", "stage", "instrument", "items"])?;
    for r in rows {
        let items: Vec<String> = r.items.iter().map(u32::to_string).collect();
        out.write_record([
            r.log.clone(),
            r.pass.map(|p| p.to_string()).unwrap_or_default(),
            r.condition.map(|c| c.as_str().to_owned()).unwrap_or_default(),
            r.stage.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default(),
            r.instrument.as_str().to_owned(),
            items.join(" "),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `*.jsonl` files directly inside `dir`, sorted by name.
pub fn log_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn analyze_dir(dir: &Path) -> Result<AnalysisReport> {
    let files = log_files(dir)?;
    if files.is_empty() {
        return Err(Error::Input(format!("no logs found in {}", dir.display())));
    }
    let mut logs = Vec::new();
    let mut unreadable = Vec::new();
    for f in files {
        let name = f.display().to_string();
        match EventLog::read_jsonl(&f) {
            Ok(log) => logs.push((name, log)),
            Err(e) => unreadable.push(format!("{name}: {e}")),
        }
    }
    let mut report = analyze(&logs).map_err(|e| match e {
        Error::Input(m) if !unreadable.is_empty() => Error::Input(format!("{m}; {}", unreadable.join("; "))),
        other => other,
    })?;
    report.warnings.splice(0..0, unreadable);
    Ok(report)
}

impl AnalysisReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["kind", "condition", "measure", "count", "kept", "mean", "median", "sd", "log_mean"])?;
        for r in &self.rows {
            out.write_record([
                r.kind.code().to_owned(),
                r.condition.as_str().to_owned(),
                r.measure.clone(),
                r.count.to_string(),
                r.kept.to_string(),
                r.mean.to_string(),
                r.median.to_string(),
                r.sd.to_string(),
                r.log_mean.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn get(&self, kind: TaskKind, condition: ViewCondition, measure: &str) -> Option<&Aggregate> {
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.condition == condition && r.measure == measure)
    }
}
