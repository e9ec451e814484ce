//! Output buffering, report serialisation and the run manifest. Every file is
//! assembled in memory and written by one writer at the end of a run.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use finsler_core::report::{InequalityReport, Status};
use sha2::{Digest, Sha256};

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of a report's parameters; keys are sorted, so it is stable.
pub fn params_hash(r: &InequalityReport) -> String {
    let text = serde_json::to_string(&r.params).expect("params serialise");
    hex_sha256(text.as_bytes())[..16].to_string()
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Measured => "measured",
    }
}

pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Default)]
pub struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_string(), bytes);
    }

    pub fn jsonl(&mut self, name: &str, reports: &[InequalityReport]) {
        let mut buf = Vec::new();
        for r in reports {
            serde_json::to_writer(&mut buf, r).expect("report serialises");
            buf.push(b'\n');
        }
        self.add(name, buf);
    }

    pub fn summary(&mut self, name: &str, reports: &[InequalityReport]) -> Result<()> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record(SUMMARY_HEADER)?;
        for r in reports {
            wr.write_record(summary_row(r))?;
        }
        self.add(name, wr.into_inner()?);
        Ok(())
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        self.files.iter().map(|(k, v)| (k.clone(), hex_sha256(v))).collect()
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub const SUMMARY_HEADER: [&str; 7] = ["ineq_id", "space", "params_hash", "lhs", "rhs", "margin", "status"];

pub fn summary_row(r: &InequalityReport) -> [String; 7] {
    [
        r.ineq_id.clone(),
        r.space.clone(),
        params_hash(r),
        fmt_num(r.lhs),
        fmt_num(r.rhs),
        r.margin.map(fmt_num).unwrap_or_default(),
        status_name(r.status).to_string(),
    ]
}
