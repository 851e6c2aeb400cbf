//! Summaries over result CSVs: per-(strategy, degree) medians across seeds
//! and pairwise error-ratio tables.

use pce_core::{PceError, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct ParsedRow {
    pub strategy: String,
    #[allow(dead_code)]
    pub seed: u64,
    pub degree_or_level: usize,
    pub n_samples: usize,
    pub l2_error: Option<f64>,
    pub mean_rel_error: Option<f64>,
    pub kappa_phi: Option<f64>,
    pub kappa_gs: Option<f64>,
    pub kappa_q: Option<f64>,
}

fn parse_opt(field: &str, lineno: usize, name: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|e| PceError::InvalidArgument(format!("line {lineno}: bad {name}: {e}")))
}

/// Split one CSV line, honoring double-quoted fields.
fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for ch in line.chars() {
        match ch {
            '"' => quoted = !quoted,
            ',' if !quoted => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

/// Parse a results CSV produced by `run`; errors carry the line number.
pub fn parse_results_csv(text: &str) -> Result<Vec<ParsedRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| PceError::InvalidArgument("line 1: empty results CSV".into()))?;
    let expected = crate::experiments::CSV_HEADER;
    if header != expected {
        return Err(PceError::InvalidArgument(format!(
            "line 1: unexpected header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = split_csv_line(line);
        if fields.len() != 12 {
            return Err(PceError::InvalidArgument(format!(
                "line {lineno}: expected 12 fields, got {}",
                fields.len()
            )));
        }
        rows.push(ParsedRow {
            strategy: fields[1].clone(),
            seed: fields[2].parse().map_err(|e| {
                PceError::InvalidArgument(format!("line {lineno}: bad seed: {e}"))
            })?,
            degree_or_level: fields[3].parse().map_err(|e| {
                PceError::InvalidArgument(format!("line {lineno}: bad degree: {e}"))
            })?,
            n_samples: fields[4].parse().map_err(|e| {
                PceError::InvalidArgument(format!("line {lineno}: bad n_samples: {e}"))
            })?,
            l2_error: parse_opt(&fields[5], lineno, "l2_error")?,
            mean_rel_error: parse_opt(&fields[6], lineno, "mean_rel_error")?,
            kappa_phi: parse_opt(&fields[7], lineno, "kappa_phi")?,
            kappa_gs: parse_opt(&fields[8], lineno, "kappa_gs")?,
            kappa_q: parse_opt(&fields[9], lineno, "kappa_q")?,
        });
    }
    Ok(rows)
}

/// Median of the present values; none when the list is empty.
pub fn median(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MedianEntry {
    pub strategy: String,
    pub degree_or_level: usize,
    pub n_samples: usize,
    pub trials: usize,
    pub l2_error: Option<f64>,
    pub mean_rel_error: Option<f64>,
    pub kappa_phi: Option<f64>,
    pub kappa_gs: Option<f64>,
    pub kappa_q: Option<f64>,
}

/// Per-(strategy, degree) medians over seeds, in deterministic order.
pub fn medians(rows: &[ParsedRow]) -> Vec<MedianEntry> {
    let mut groups: BTreeMap<(String, usize), Vec<&ParsedRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.strategy.clone(), row.degree_or_level))
            .or_default()
            .push(row);
    }
    groups
        .into_iter()
        .map(|((strategy, degree_or_level), group)| {
            let collect = |get: &dyn Fn(&ParsedRow) -> Option<f64>| {
                let mut values: Vec<f64> = group.iter().filter_map(|r| get(r)).collect();
                median(&mut values)
            };
            MedianEntry {
                strategy,
                degree_or_level,
                n_samples: group[0].n_samples,
                trials: group.len(),
                l2_error: collect(&|r| r.l2_error),
                mean_rel_error: collect(&|r| r.mean_rel_error),
                kappa_phi: collect(&|r| r.kappa_phi),
                kappa_gs: collect(&|r| r.kappa_gs),
                kappa_q: collect(&|r| r.kappa_q),
            }
        })
        .collect()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RatioEntry {
    pub degree_or_level: usize,
    pub numerator: String,
    pub denominator: String,
    pub ratio: f64,
}

/// Pairwise ratios of median l2 errors at matching degrees.
pub fn error_ratios(entries: &[MedianEntry]) -> Vec<RatioEntry> {
    let mut by_degree: BTreeMap<usize, Vec<&MedianEntry>> = BTreeMap::new();
    for e in entries {
        by_degree.entry(e.degree_or_level).or_default().push(e);
    }
    let mut out = Vec::new();
    for (&degree, group) in &by_degree {
        for a in group {
            for b in group {
                if a.strategy == b.strategy {
                    continue;
                }
                if let (Some(ea), Some(eb)) = (a.l2_error, b.l2_error) {
                    if eb > 0.0 {
                        out.push(RatioEntry {
                            degree_or_level: degree,
                            numerator: a.strategy.clone(),
                            denominator: b.strategy.clone(),
                            ratio: ea / eb,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Full report document.
pub fn report_json(rows: &[ParsedRow]) -> serde_json::Value {
    let med = medians(rows);
    let ratios = error_ratios(&med);
    serde_json::json!({
        "medians": med,
        "error_ratios": ratios,
    })
}
