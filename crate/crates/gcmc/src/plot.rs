//! Plot-ready CSV files named `<kind>-<hash>.csv` and an optional matplotlib script.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gcmc_core::monotonicity::{FlowPoint, HeatmapCell, SignReport};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::report::write_atomic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlotKind {
    Flow,
    Heatmap,
    SignTable,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [PlotKind::Flow, PlotKind::Heatmap, PlotKind::SignTable];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Flow => "flow",
            PlotKind::Heatmap => "heatmap",
            PlotKind::SignTable => "sign-table",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlotKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        PlotKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            CliError::Validation(format!("unsupported plot kind `{s}`; known: flow, heatmap, sign-table"))
        })
    }
}

/// Columns `t,h,I,dI1..dIk`.
pub fn flow_csv(points: &[FlowPoint]) -> String {
    let k = points.iter().map(|p| p.derivatives.len()).max().unwrap_or(0);
    let mut out = String::from("t,h,I");
    for n in 1..=k {
        out.push_str(&format!(",dI{n}"));
    }
    out.push('\n');
    for p in points {
        out.push_str(&format!("{},{},{}", p.t, p.entropy, p.fisher));
        for d in &p.derivatives {
            out.push_str(&format!(",{d}"));
        }
        out.push('\n');
    }
    out
}

/// Columns `lambda,d,minMarginOverT`.
pub fn heatmap_csv(cells: &[HeatmapCell]) -> String {
    let mut out = String::from("lambda,d,minMarginOverT\n");
    for c in cells {
        out.push_str(&format!("{},{},{}\n", c.lambda, c.d, c.min_margin));
    }
    out
}

/// Columns `t,order,value,sign`.
pub fn sign_table_csv(reports: &[SignReport]) -> String {
    let mut out = String::from("t,order,value,sign\n");
    for r in reports {
        for e in &r.entries {
            out.push_str(&format!("{},{},{},{}\n", r.t, e.order, e.value, e.sign));
        }
    }
    out
}

pub fn file_name(kind: PlotKind, csv: &str) -> String {
    let digest = Sha256::digest(csv.as_bytes());
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    format!("{}-{hex}.csv", kind.name())
}

pub fn emit(dir: &Path, kind: PlotKind, csv: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(file_name(kind, csv));
    write_atomic(&path, csv.as_bytes())?;
    Ok(path)
}

/// A matplotlib script that reads only the named CSV files.
pub fn script(files: &[(PlotKind, String)]) -> String {
    let mut out = String::from(
        "import csv\nimport matplotlib.pyplot as plt\n\n\ndef load(name):\n    with open(name) as fh:\n        rows = list(csv.reader(fh))\n    return rows[0], [[float(x) for x in r] for r in rows[1:]]\n\n",
    );
    for (kind, name) in files {
        out.push_str(&format!("\nheader, rows = load({name:?})\nfig, ax = plt.subplots()\n"));
        match kind {
            PlotKind::Flow => out.push_str(
                "for j in range(1, len(header)):\n    ax.plot([r[0] for r in rows], [abs(r[j]) for r in rows], label=header[j])\nax.set_xscale('log')\nax.set_yscale('log')\nax.set_xlabel('t')\nax.legend()\n",
            ),
            PlotKind::Heatmap => out.push_str(
                "sc = ax.scatter([r[1] for r in rows], [r[0] for r in rows], c=[r[2] for r in rows], marker='s')\nfig.colorbar(sc, label='min margin over t')\nax.set_xlabel('d')\nax.set_ylabel('lambda')\n",
            ),
            PlotKind::SignTable => out.push_str(
                "for n in sorted({int(r[1]) for r in rows}):\n    sel = [r for r in rows if int(r[1]) == n]\n    ax.plot([r[0] for r in sel], [abs(r[2]) for r in sel], label=f'|d^{n} I|')\nax.set_xscale('log')\nax.set_yscale('log')\nax.set_xlabel('t')\nax.legend()\n",
            ),
        }
        out.push_str(&format!("fig.savefig({:?})\n", name.replace(".csv", ".png")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_content_addressed() {
        let a = file_name(PlotKind::Heatmap, "lambda,d,minMarginOverT\n");
        assert!(a.starts_with("heatmap-") && a.ends_with(".csv"));
        assert_eq!(a, file_name(PlotKind::Heatmap, "lambda,d,minMarginOverT\n"));
        assert_ne!(a, file_name(PlotKind::Heatmap, "other\n"));
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("sign-table".parse::<PlotKind>().unwrap(), PlotKind::SignTable);
        assert!("histogram".parse::<PlotKind>().is_err());
    }

    #[test]
    fn script_mentions_only_csvs() {
        let s = script(&[(PlotKind::Flow, "flow-abc.csv".into())]);
        assert!(s.contains("\"flow-abc.csv\""));
        assert!(!s.contains("http"));
    }
}
