//! Aggregation of run records into per-scheme summaries, CSV tables and
//! SVG figures.

mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use svg::render_figures;

use crate::error::{QaoaError, Result};
use crate::experiments::{format_layers, load_records, RunRecord, SchemeKind};

pub const RECORDS_CSV: &str = "records.csv";
pub const SUMMARY_CSV: &str = "summary.csv";

const RECORDS_HEADER: [&str; 10] = [
    "donor_seed",
    "acceptor_n",
    "acceptor_seed",
    "scheme",
    "free_layers",
    "r_initial",
    "r_final",
    "tau",
    "delta_r",
    "converged",
];

const SUMMARY_HEADER: [&str; 10] = [
    "scheme",
    "free_layers",
    "n_nodes",
    "n_instances",
    "mean_r",
    "std_r",
    "mean_tau",
    "std_tau",
    "mean_dr_over_tau",
    "std_dr_over_tau",
];

/// Statistics for one (scheme, free layers, node count) group. Standard
/// deviations are sample deviations (n - 1), zero for a single instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: SchemeKind,
    pub free_layers: Vec<usize>,
    pub n_nodes: usize,
    pub n_instances: usize,
    pub mean_r: f64,
    pub std_r: f64,
    pub mean_tau: f64,
    pub std_tau: f64,
    /// Mean of per-record `delta_r / tau` over records with `tau > 0`;
    /// `None` when the group has no such record.
    pub mean_dr_over_tau: Option<f64>,
    pub std_dr_over_tau: Option<f64>,
}

impl SchemeSummary {
    /// `"k_layer[1;2]"`, `"all_layer"`.
    pub fn label(&self) -> String {
        scheme_label(self.scheme, &self.free_layers)
    }
}

pub fn scheme_label(kind: SchemeKind, layers: &[usize]) -> String {
    match kind {
        SchemeKind::KLayer => format!("k_layer[{}]", format_layers(layers)),
        other => other.to_string(),
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups records by `(scheme, free_layers, acceptor_n)` in canonical order.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<SchemeSummary>> {
    if records.is_empty() {
        return Err(QaoaError::InvalidArgument("no records to aggregate".into()));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.key());

    let mut groups: BTreeMap<(SchemeKind, Vec<usize>, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in sorted {
        groups.entry((r.scheme, r.free_layers.clone(), r.acceptor_n)).or_default().push(r);
    }

    Ok(groups
        .into_iter()
        .map(|((scheme, free_layers, n_nodes), group)| {
            let rs: Vec<f64> = group.iter().map(|r| r.r_final).collect();
            let taus: Vec<f64> = group.iter().map(|r| r.tau as f64).collect();
            let ratios: Vec<f64> =
                group.iter().filter(|r| r.tau > 0).map(|r| r.delta_r / r.tau as f64).collect();
            let (mean_r, std_r) = mean_std(&rs);
            let (mean_tau, std_tau) = mean_std(&taus);
            let (mean_dr_over_tau, std_dr_over_tau) = if ratios.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&ratios);
                (Some(m), Some(s))
            };
            SchemeSummary {
                scheme,
                free_layers,
                n_nodes,
                n_instances: group.len(),
                mean_r,
                std_r,
                mean_tau,
                std_tau,
                mean_dr_over_tau,
                std_dr_over_tau,
            }
        })
        .collect())
}

/// Twelve significant digits, shortest form (`%.12g`).
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{}", trim_fraction(mantissa), exp)
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `records.csv` and `summary.csv` into `output_dir`, rows in
/// canonical key order.
pub fn write_csv(
    summaries: &[SchemeSummary],
    records: &[RunRecord],
    output_dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf)> {
    let dir = output_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| QaoaError::io(dir, e))?;

    let records_path = dir.join(RECORDS_CSV);
    let mut w = csv::Writer::from_path(&records_path)?;
    w.write_record(RECORDS_HEADER)?;
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.key());
    for r in sorted {
        w.write_record([
            r.donor_seed.to_string(),
            r.acceptor_n.to_string(),
            r.acceptor_seed.to_string(),
            r.scheme.to_string(),
            format_layers(&r.free_layers),
            format_sig12(r.r_initial),
            format_sig12(r.r_final),
            r.tau.to_string(),
            format_sig12(r.delta_r),
            r.converged.to_string(),
        ])?;
    }
    w.flush().map_err(|e| QaoaError::io(&records_path, e))?;

    let summary_path = dir.join(SUMMARY_CSV);
    let mut w = csv::Writer::from_path(&summary_path)?;
    w.write_record(SUMMARY_HEADER)?;
    let opt = |x: Option<f64>| x.map(format_sig12).unwrap_or_default();
    for s in summaries {
        w.write_record([
            s.scheme.to_string(),
            format_layers(&s.free_layers),
            s.n_nodes.to_string(),
            s.n_instances.to_string(),
            format_sig12(s.mean_r),
            format_sig12(s.std_r),
            format_sig12(s.mean_tau),
            format_sig12(s.std_tau),
            opt(s.mean_dr_over_tau),
            opt(s.std_dr_over_tau),
        ])?;
    }
    w.flush().map_err(|e| QaoaError::io(&summary_path, e))?;
    Ok((records_path, summary_path))
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RecordRow {
    pub donor_seed: u64,
    pub acceptor_n: usize,
    pub acceptor_seed: u64,
    pub scheme: SchemeKind,
    pub free_layers: String,
    pub r_initial: f64,
    pub r_final: f64,
    pub tau: usize,
    pub delta_r: f64,
    pub converged: bool,
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SummaryRow {
    pub scheme: SchemeKind,
    pub free_layers: String,
    pub n_nodes: usize,
    pub n_instances: usize,
    pub mean_r: f64,
    pub std_r: f64,
    pub mean_tau: f64,
    pub std_tau: f64,
    pub mean_dr_over_tau: Option<f64>,
    pub std_dr_over_tau: Option<f64>,
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<RecordRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug)]
pub struct ReportOutput {
    pub summaries: Vec<SchemeSummary>,
    pub records_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub figures: Vec<PathBuf>,
}

/// Reads `<run_dir>/records.jsonl` and writes tables and figures to `out_dir`.
pub fn report(run_dir: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<ReportOutput> {
    let records = load_records(run_dir)?;
    let summaries = aggregate(&records)?;
    let (records_csv, summary_csv) = write_csv(&summaries, &records, &out_dir)?;
    let figures = render_figures(&summaries, &records, &out_dir)?;
    Ok(ReportOutput { summaries, records_csv, summary_csv, figures })
}
