//! JSON reports, CSV tables and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gcmc_core::monotonicity::{ScanReport, SignFlag, SignReport};
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A finished command: what to print, what to save and whether anything was violated.
#[derive(Debug)]
pub struct Outcome {
    pub command: &'static str,
    pub text: String,
    pub config: Value,
    pub results: Value,
    pub csv: Option<String>,
    pub plots: Vec<(crate::plot::PlotKind, String)>,
    pub violation: bool,
}

impl Outcome {
    pub fn new(command: &'static str, text: String, config: Value, results: Value) -> Self {
        Self { command, text, config, results, csv: None, plots: Vec::new(), violation: false }
    }

    pub fn to_json(&self, timestamp: bool) -> Value {
        let mut root = Map::new();
        root.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
        root.insert("command".into(), json!(self.command));
        if timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            root.insert("generatedAtUnix".into(), json!(secs));
        }
        root.insert("config".into(), self.config.clone());
        root.insert("results".into(), self.results.clone());
        root.insert("violation".into(), json!(self.violation));
        Value::Object(root)
    }

    pub fn json_text(&self, timestamp: bool) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json(timestamp)).expect("json values serialize");
        s.push('\n');
        s
    }
}

/// Write through a sibling temporary file and rename over the target.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{} has no file name", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

pub fn flag_name(f: SignFlag) -> &'static str {
    match f {
        SignFlag::Ok => "ok",
        SignFlag::Unconverged => "unconverged",
        SignFlag::Unresolved => "unresolved",
    }
}

/// Columns `lambda,d,t,order,value,sign,flag`.
pub fn scan_csv(r: &ScanReport) -> String {
    let mut out = String::from("lambda,d,t,order,value,sign,flag\n");
    for row in &r.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.lambda,
            row.d,
            row.t,
            row.order,
            row.value,
            row.sign,
            flag_name(row.flag)
        ));
    }
    out
}

/// Sign tables in the scan column layout, with the mixture's `λ, d` left blank.
pub fn sign_reports_csv(reports: &[SignReport]) -> String {
    let mut out = String::from("lambda,d,t,order,value,sign,flag\n");
    for r in reports {
        for e in &r.entries {
            out.push_str(&format!(",,{},{},{},{},{}\n", r.t, e.order, e.value, e.sign, flag_name(e.flag)));
        }
    }
    out
}

pub fn sign_report_json(r: &SignReport) -> Value {
    json!({
        "t": r.t,
        "fisher": r.fisher,
        "zeroBand": r.zero_band,
        "entries": r.entries.iter().zip(&r.scales).map(|(e, s)| json!({
            "order": e.order,
            "value": e.value,
            "sign": e.sign,
            "expected": e.expected,
            "relative": e.relative,
            "scale": s,
            "flag": flag_name(e.flag),
            "richardson": e.richardson,
        })).collect::<Vec<_>>(),
    })
}

pub fn scan_json(r: &ScanReport) -> Value {
    let s = &r.summary;
    json!({
        "summary": {
            "points": s.points,
            "entries": s.entries,
            "violations": s.violations,
            "unconverged": s.unconverged,
            "unresolved": s.unresolved,
            "zeroBand": s.zero_band,
            "logConvexityChecked": s.log_convexity_checked,
            "logConvexityViolations": s.log_convexity_violations,
        },
        "violations": r.violations.iter().map(|v| json!({
            "lambda": v.lambda, "d": v.d, "t": v.t, "order": v.order, "value": v.value, "zeroBand": v.zero_band,
        })).collect::<Vec<_>>(),
        "logConvexityViolations": r.log_convexity_violations.iter().map(|v| json!({
            "lambda": v.lambda, "d": v.d, "t": v.t,
            "functionMargin": v.function_margin,
            "worstSequenceMargin": v.worst_sequence_margin,
            "worstIndex": v.worst_index,
        })).collect::<Vec<_>>(),
        "heatmap": r.heatmap.iter().map(|c| json!({
            "lambda": c.lambda, "d": c.d, "minMarginOverT": c.min_margin,
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        let leftovers: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn schema_and_timestamp() {
        let o = Outcome::new("seq", String::new(), json!({}), json!({"x": 1}));
        let v = o.to_json(false);
        assert_eq!(v["schemaVersion"], 1);
        assert!(v.get("generatedAtUnix").is_none());
        assert!(o.to_json(true).get("generatedAtUnix").is_some());
    }
}
