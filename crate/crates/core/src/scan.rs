//! Sweeps over `n` for synthetic degree-sequence families.
//!
//! * `regular`: `k_i = round(k_frac (n-1))` (or a fixed `k`), clamped to `[1, n-2]`.
//! * `linear_ramp`: `k_i` interpolates linearly between `round(k_min_frac (n-1))`
//!   and `round(k_max_frac (n-1))`.
//! * `dual_of_regular`: `n - 1 - k_i` of the regular family.
//! * `file_list`: one sequence per file; `n_list` is ignored.
//!
//! A sequence with an odd degree sum has the degree of its last node reduced
//! by one. Points that still fall outside `{1, ..., n-2}` or are not graphical
//! are skipped with a warning.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{fit, FitOptions};
use crate::degrees::{is_graphical, scale_parameter, DegreeSequence};
use crate::entropy::{assemble, exact_with_model, relative_entropy_asymptotic, relative_entropy_sparse_approx};
use crate::error::{Error, Result};
use crate::io::{csv_field, read_degree_file};

pub const SCAN_SCHEMA: &str = "ensemble-gap/scan/v1";

pub const CSV_HEADER: &str =
    "n,S_exact,S_asymptotic,S_sparse,alpha_n,s_alpha_exact,s_alpha_asymptotic,ratio,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Regular,
    #[value(alias = "linear_ramp")]
    LinearRamp,
    #[value(alias = "dual_of_regular")]
    DualOfRegular,
    #[value(alias = "file_list")]
    FileList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub family: Family,
    pub k_frac: f64,
    /// Fixed degree for the regular families; overrides `k_frac`.
    pub k: Option<usize>,
    pub k_min_frac: f64,
    pub k_max_frac: f64,
    pub n_list: Vec<usize>,
    pub files: Vec<PathBuf>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            family: Family::Regular,
            k_frac: 0.5,
            k: None,
            k_min_frac: 0.3,
            k_max_frac: 0.7,
            n_list: Vec::new(),
            files: Vec::new(),
        }
    }
}

fn frac_degree(frac: f64, n: usize) -> usize {
    (frac * (n as f64 - 1.0)).round().max(0.0) as usize
}

fn even_adjust(mut k: Vec<usize>) -> Vec<usize> {
    if k.iter().sum::<usize>() % 2 == 1 {
        if let Some(last) = k.last_mut() {
            log::warn!("odd degree sum; lowering last degree {last} by one");
            *last = last.saturating_sub(1);
        }
    }
    k
}

impl ScanSpec {
    /// Raw degrees for `n` (before validation).
    pub fn degrees_for(&self, n: usize) -> Vec<usize> {
        let clamp = |k: usize| k.clamp(1, n.saturating_sub(2).max(1));
        let regular = || {
            let k = clamp(self.k.unwrap_or_else(|| frac_degree(self.k_frac, n)));
            even_adjust(vec![k; n])
        };
        match self.family {
            Family::Regular => regular(),
            Family::DualOfRegular => regular().into_iter().map(|k| (n - 1).saturating_sub(k)).collect(),
            Family::LinearRamp => {
                let lo = frac_degree(self.k_min_frac, n) as f64;
                let hi = frac_degree(self.k_max_frac, n) as f64;
                let k = (0..n)
                    .map(|i| {
                        let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                        clamp((lo + (hi - lo) * t).round() as usize)
                    })
                    .collect();
                even_adjust(k)
            }
            Family::FileList => Vec::new(),
        }
    }

    /// Validated sequences in scan order.
    pub fn sequences(&self) -> Result<Vec<DegreeSequence>> {
        let raw: Vec<Vec<usize>> = match self.family {
            Family::FileList => {
                if self.files.is_empty() {
                    return Err(Error::Parse("file_list family needs at least one file".into()));
                }
                self.files.iter().map(|p| read_degree_file(p)).collect::<Result<_>>()?
            }
            _ => {
                if self.n_list.is_empty() {
                    return Err(Error::Parse("empty n list".into()));
                }
                self.n_list.iter().map(|&n| self.degrees_for(n)).collect()
            }
        };
        Ok(raw
            .into_iter()
            .filter_map(|k| match DegreeSequence::new(k.clone()) {
                Ok(d) if is_graphical(&d) => Some(d),
                Ok(_) => {
                    log::warn!("skipping non-graphical sequence {k:?}");
                    None
                }
                Err(e) => {
                    log::warn!("skipping {k:?}: {e}");
                    None
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub degrees: Vec<usize>,
    pub s_exact: Option<f64>,
    pub s_asymptotic: Option<f64>,
    pub s_sparse: Option<f64>,
    pub alpha_n: Option<f64>,
    pub s_alpha_exact: Option<f64>,
    pub s_alpha_asymptotic: Option<f64>,
    pub ratio: Option<f64>,
    pub status: String,
}

impl ScanRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            csv_field(self.s_exact),
            csv_field(self.s_asymptotic),
            csv_field(self.s_sparse),
            csv_field(self.alpha_n),
            csv_field(self.s_alpha_exact),
            csv_field(self.s_alpha_asymptotic),
            csv_field(self.ratio),
            self.status
        )
    }

    fn failed(d: &DegreeSequence, status: String) -> Self {
        Self {
            n: d.n(),
            degrees: d.degrees().to_vec(),
            s_exact: None,
            s_asymptotic: None,
            s_sparse: None,
            alpha_n: None,
            s_alpha_exact: None,
            s_alpha_asymptotic: None,
            ratio: None,
            status,
        }
    }
}

fn scan_one(d: &DegreeSequence, opts: &FitOptions, ceiling: usize) -> ScanRow {
    let model = match fit(d, opts) {
        Ok(m) => m,
        Err(e) => return ScanRow::failed(d, format!("fit_failed: {e}")),
    };
    let scale = match scale_parameter(d) {
        Ok(s) => s,
        Err(e) => return ScanRow::failed(d, format!("scale_failed: {e}")),
    };
    let mut status = Vec::new();
    let s_exact = if d.n() <= ceiling {
        exact_with_model(model.clone(), ceiling)
            .map_err(|e| status.push(format!("exact_failed: {e}")))
            .ok()
            .map(|e| e.value)
    } else {
        status.push("exact_skipped_ceiling".to_string());
        None
    };
    let s_asym = relative_entropy_asymptotic(&model)
        .map_err(|e| status.push(format!("asymptotic_failed: {e}")))
        .ok();
    let s_sparse = relative_entropy_sparse_approx(d).ok();
    if scale.alpha_n <= 0.0 {
        status.push("alpha_nonpositive".to_string());
    }
    let r = assemble(d, &model, &scale, s_exact, s_asym, s_sparse);
    ScanRow {
        n: r.n,
        degrees: r.degrees,
        s_exact: r.s_exact,
        s_asymptotic: r.s_asymptotic,
        s_sparse: r.s_sparse,
        alpha_n: Some(r.alpha_n),
        s_alpha_exact: r.s_alpha_exact,
        s_alpha_asymptotic: r.s_alpha_asymptotic,
        ratio: r.ratio_exact_over_asymptotic,
        status: if status.is_empty() { "ok".into() } else { status.join(";") },
    }
}

/// One row per accepted sequence, sorted by `n` (stable, so files of equal size
/// keep their input order) whatever order the workers finish in.
pub fn run_scan(spec: &ScanSpec, opts: &FitOptions, ceiling: usize) -> Result<Vec<ScanRow>> {
    let mut seqs = spec.sequences()?;
    seqs.sort_by_key(|d| d.n());
    Ok(seqs.par_iter().map(|d| scan_one(d, opts, ceiling)).collect())
}

pub fn rows_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_family_rounding() {
        let spec = ScanSpec {
            n_list: vec![6, 8, 10, 12],
            ..ScanSpec::default()
        };
        for n in [6usize, 8, 10, 12] {
            assert_eq!(spec.degrees_for(n), vec![n / 2; n]);
        }
        let spec = ScanSpec { k: Some(3), ..spec };
        assert_eq!(spec.degrees_for(9), vec![3, 3, 3, 3, 3, 3, 3, 3, 2]);
    }

    #[test]
    fn dual_and_ramp_families() {
        let spec = ScanSpec {
            family: Family::DualOfRegular,
            k: Some(2),
            ..ScanSpec::default()
        };
        assert_eq!(spec.degrees_for(10), vec![7; 10]);
        let spec = ScanSpec {
            family: Family::LinearRamp,
            k_min_frac: 0.0,
            k_max_frac: 1.0,
            ..ScanSpec::default()
        };
        let k = spec.degrees_for(6);
        assert_eq!(k.first(), Some(&1));
        assert!(k.iter().all(|&v| (1..=4).contains(&v)));
        assert_eq!(k.iter().sum::<usize>() % 2, 0);
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(matches!(run_scan(&ScanSpec::default(), &FitOptions::default(), 16), Err(Error::Parse(_))));
    }

    #[test]
    fn rows_sorted_by_n_and_invalid_skipped() {
        let spec = ScanSpec {
            n_list: vec![3, 10, 12, 8],
            ..ScanSpec::default()
        };
        let rows = run_scan(&spec, &FitOptions::default(), 16).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![8, 10, 12]);
        assert!(rows.iter().all(|r| r.status == "ok"), "{:?}", rows.iter().map(|r| &r.status).collect::<Vec<_>>());
        let csv = rows_to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn zero_scale_is_flagged() {
        // k(n-1-k) = n makes every scale term vanish.
        let spec = ScanSpec {
            n_list: vec![6],
            ..ScanSpec::default()
        };
        let rows = run_scan(&spec, &FitOptions::default(), 16).unwrap();
        assert_eq!(rows[0].status, "alpha_nonpositive");
        assert!(rows[0].s_exact.is_some());
    }

    #[test]
    fn beyond_ceiling_rows_carry_status() {
        let spec = ScanSpec {
            n_list: vec![20],
            k: Some(4),
            ..ScanSpec::default()
        };
        let rows = run_scan(&spec, &FitOptions::default(), 16).unwrap();
        assert_eq!(rows[0].status, "exact_skipped_ceiling");
        assert!(rows[0].s_exact.is_none() && rows[0].s_asymptotic.is_some());
    }
}
