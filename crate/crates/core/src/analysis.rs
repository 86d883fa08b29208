//! Post-processing of exported ensembles: ratios against a baseline,
//! similarity-quantile differences and denoised series.

use std::fmt::Write as _;

use crate::export::fmt_f64;
use crate::metrics::{ensemble_ratio, tv_denoise, EnsembleStats, RatioSeries};
use crate::sim::{TARGET_SIM_BOTTOM, TARGET_SIM_TOP};

pub const RATIO_HEADER: &str = "step,metric,ratio,std,n";
pub const QUANTILE_DIFF_HEADER: &str = "step,top_diff,bottom_diff";
pub const DENOISED_HEADER: &str = "step,metric,value";

/// Named statistics as read from a metric table.
pub type NamedStats = [(String, EnsembleStats)];

fn find<'a>(set: &'a NamedStats, name: &str) -> Option<&'a EnsembleStats> {
    set.iter().find(|(n, _)| n == name).map(|(_, s)| s)
}

/// Ratio series for every metric present in both sets. Metrics whose
/// baseline mean vanishes somewhere are returned in the second list with
/// the reason.
pub fn ratios(influenced: &NamedStats, baseline: &NamedStats) -> (Vec<(String, RatioSeries)>, Vec<(String, String)>) {
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for (name, inf) in influenced {
        let Some(base) = find(baseline, name) else {
            skipped.push((name.clone(), "missing from baseline".to_string()));
            continue;
        };
        match ensemble_ratio(inf, base) {
            Ok(r) => ok.push((name.clone(), r)),
            Err(e) => skipped.push((name.clone(), e.to_string())),
        }
    }
    (ok, skipped)
}

pub fn ratio_table(ratios: &[(String, RatioSeries)]) -> String {
    let mut out = format!("{RATIO_HEADER}\n");
    for (name, r) in ratios {
        for (t, v) in r.ratio.iter().enumerate() {
            let std = r.std.as_ref().map_or(String::new(), |s| fmt_f64(s[t]));
            let _ = writeln!(out, "{t},{name},{},{std},{}", fmt_f64(*v), r.n);
        }
    }
    out
}

/// Mean differences of target similarity to the initially most and least
/// similar topics, influenced minus baseline.
pub fn quantile_diffs(influenced: &NamedStats, baseline: &NamedStats) -> Option<Vec<(f64, f64)>> {
    let (it, ib) = (find(influenced, TARGET_SIM_TOP)?, find(influenced, TARGET_SIM_BOTTOM)?);
    let (bt, bb) = (find(baseline, TARGET_SIM_TOP)?, find(baseline, TARGET_SIM_BOTTOM)?);
    let steps = it.len().min(bt.len());
    Some(
        (0..steps)
            .map(|t| (it.mean[t] - bt.mean[t], ib.mean[t] - bb.mean[t]))
            .collect(),
    )
}

pub fn quantile_diff_table(diffs: &[(f64, f64)]) -> String {
    let mut out = format!("{QUANTILE_DIFF_HEADER}\n");
    for (t, (top, bottom)) in diffs.iter().enumerate() {
        let _ = writeln!(out, "{t},{},{}", fmt_f64(*top), fmt_f64(*bottom));
    }
    out
}

/// TV-denoised ensemble means of every metric.
pub fn denoised_table(stats: &NamedStats, lam: f64) -> String {
    let mut out = format!("{DENOISED_HEADER}\n");
    for (name, s) in stats {
        if s.is_empty() {
            continue;
        }
        for (t, v) in tv_denoise(&s.mean, lam).iter().enumerate() {
            let _ = writeln!(out, "{t},{name},{}", fmt_f64(*v));
        }
    }
    out
}
