//! Versioned JSON reports.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "adscurv.report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Outcome of one check. `measured` and `tolerances` are JSON objects, so
/// keys come out sorted.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub check: String,
    pub anchor: &'static str,
    pub status: Status,
    pub measured: Value,
    pub tolerances: Value,
}

impl Report {
    pub fn new(check: impl Into<String>, anchor: &'static str, ok: bool, measured: Value, tolerances: Value) -> Self {
        Report { check: check.into(), anchor, status: Status::from_bool(ok), measured, tolerances }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSet {
    pub schema: &'static str,
    pub command: String,
    pub seed: u64,
    pub input_digest: String,
    pub config: Value,
    pub reports: Vec<Report>,
}

impl ReportSet {
    /// `inputs` are the raw bytes of input files, hashed after the config.
    pub fn new(command: &str, seed: u64, config: Value, inputs: &[Vec<u8>], reports: Vec<Report>) -> Self {
        let mut h = Sha256::new();
        h.update(config.to_string().as_bytes());
        for bytes in inputs {
            h.update(bytes);
        }
        let input_digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        ReportSet { schema: SCHEMA, command: command.into(), seed, input_digest, config, reports }
    }

    pub fn first_failure(&self) -> Option<&Report> {
        self.reports.iter().find(|r| !r.passed())
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        fs::write(dir.join("report.json"), text)
    }

    pub fn summary(&self) -> String {
        self.reports
            .iter()
            .map(|r| {
                let s = if r.passed() { "PASS" } else { "FAIL" };
                format!("{s}  {}  ({})\n", r.check, r.anchor)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_depends_on_config_and_inputs() {
        let a = ReportSet::new("x", 1, json!({"h": 0.1}), &[], vec![]);
        let b = ReportSet::new("x", 1, json!({"h": 0.2}), &[], vec![]);
        let c = ReportSet::new("x", 1, json!({"h": 0.1}), &[b"file".to_vec()], vec![]);
        assert_eq!(a.input_digest.len(), 64);
        assert_ne!(a.input_digest, b.input_digest);
        assert_ne!(a.input_digest, c.input_digest);
        assert_eq!(a.input_digest, ReportSet::new("x", 1, json!({"h": 0.1}), &[], vec![]).input_digest);
    }

    #[test]
    fn first_failure_is_named() {
        let r = vec![
            Report::new("a", "first", true, json!({}), json!({})),
            Report::new("b", "second", false, json!({}), json!({})),
            Report::new("c", "third", false, json!({}), json!({})),
        ];
        let set = ReportSet::new("x", 1, json!({}), &[], r);
        assert_eq!(set.first_failure().unwrap().check, "b");
        let v = serde_json::to_value(&set).unwrap();
        assert_eq!(v["reports"][1]["status"], "FAIL");
        assert_eq!(v["schema"], SCHEMA);
    }
}
