//! Regression baselines: archived summary rows whose measured constants may
//! drift by at most [`DRIFT_GATE`] between runs.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};

use crate::output::SUMMARY_HEADER;

pub const DRIFT_GATE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct Drift {
    pub ineq_id: String,
    pub space: String,
    pub params_hash: String,
    pub baseline: Option<String>,
    pub measured: Option<String>,
    pub relative: Option<f64>,
}

impl Drift {
    pub fn describe(&self) -> String {
        match (&self.baseline, &self.measured) {
            (Some(b), Some(m)) => format!(
                "{} on {} [{}]: baseline {b}, measured {m}{}",
                self.ineq_id,
                self.space,
                self.params_hash,
                self.relative.map(|r| format!(" ({:+.1}%)", 100.0 * r)).unwrap_or_default()
            ),
            (Some(b), None) => format!("{} on {} [{}]: baseline {b} has no measured row", self.ineq_id, self.space, self.params_hash),
            (None, Some(m)) => format!("{} on {} [{}]: measured {m} has no baseline row", self.ineq_id, self.space, self.params_hash),
            (None, None) => unreachable!(),
        }
    }
}

type Key = (String, String, String, usize);

/// Measured rows keyed by id, space, params hash and occurrence.
fn measured(rows: &[[String; 7]]) -> BTreeMap<Key, String> {
    let mut seen: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for r in rows.iter().filter(|r| r[6] == "measured") {
        let k = (r[0].clone(), r[1].clone(), r[2].clone());
        let n = seen.entry(k.clone()).or_insert(0);
        out.insert((k.0, k.1, k.2, *n), r[4].clone());
        *n += 1;
    }
    out
}

pub fn read(path: &Path) -> Result<Vec<[String; 7]>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("reading baseline {}", path.display()))?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    anyhow::ensure!(header == SUMMARY_HEADER, "baseline {} has header {:?}", path.display(), header);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        anyhow::ensure!(rec.len() == 7, "baseline {} has a short row", path.display());
        rows.push(std::array::from_fn(|i| rec[i].to_string()));
    }
    Ok(rows)
}

fn relative(b: &str, m: &str) -> Option<f64> {
    let (b, m) = (b.parse::<f64>().ok()?, m.parse::<f64>().ok()?);
    if !(b.is_finite() && m.is_finite()) {
        return None;
    }
    Some(if b == 0.0 { if m == 0.0 { 0.0 } else { f64::INFINITY } } else { (m - b) / b.abs() })
}

/// Compares measured constants. Rows present on one side only count as
/// drift, so a changed configuration needs an explicit bless.
pub fn compare(baseline: &[[String; 7]], current: &[[String; 7]]) -> Vec<Drift> {
    let base = measured(baseline);
    let cur = measured(current);
    let mut out = Vec::new();
    let drift = |k: &Key, b: Option<&String>, m: Option<&String>, rel: Option<f64>| Drift {
        ineq_id: k.0.clone(),
        space: k.1.clone(),
        params_hash: k.2.clone(),
        baseline: b.cloned(),
        measured: m.cloned(),
        relative: rel,
    };
    for (k, m) in &cur {
        match base.get(k) {
            None => out.push(drift(k, None, Some(m), None)),
            Some(b) => match relative(b, m) {
                Some(r) if r.abs() <= DRIFT_GATE => {}
                Some(r) => out.push(drift(k, Some(b), Some(m), Some(r))),
                None if b == m => {}
                None => out.push(drift(k, Some(b), Some(m), None)),
            },
        }
    }
    for (k, b) in &base {
        if !cur.contains_key(k) {
            out.push(drift(k, Some(b), None, None));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, rhs: &str, status: &str) -> [String; 7] {
        [id, "flat", "abc", "1", rhs, "", status].map(str::to_string)
    }

    #[test]
    fn gate_is_ten_percent() {
        let base = vec![row("poincare", "1.0", "measured"), row("harnack_scaling", "0", "pass")];
        assert!(compare(&base, &[row("poincare", "1.09", "measured"), row("harnack_scaling", "5", "pass")]).is_empty());
        let d = compare(&base, &[row("poincare", "1.2", "measured")]);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].ineq_id, "poincare");
        assert!(d[0].describe().contains("poincare"));
    }

    #[test]
    fn missing_rows_drift() {
        let base = vec![row("poincare", "1.0", "measured")];
        assert_eq!(compare(&base, &[]).len(), 1);
        assert_eq!(compare(&[], &base).len(), 1);
        assert!(compare(&[row("x", "-inf", "measured")], &[row("x", "-inf", "measured")]).is_empty());
    }
}
