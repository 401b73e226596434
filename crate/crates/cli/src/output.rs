//! Report files: per-identity JSON, a JSON and CSV summary, a markdown table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dynrefl::report::VerificationReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Record {
    pub index: usize,
    pub key: String,
    pub n: usize,
    pub sig: String,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub campaign: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub records: Vec<Record>,
}

impl Summary {
    pub fn new(campaign: &str, mut records: Vec<Record>) -> Self {
        for r in &mut records {
            r.report.millis = 0;
        }
        let passed = records.iter().filter(|r| r.report.pass).count();
        Self { campaign: campaign.into(), total: records.len(), passed, failed: records.len() - passed, records }
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' }).collect()
}

pub fn write_all(dir: &Path, summary: &Summary) -> std::io::Result<()> {
    let reports = dir.join("reports");
    fs::create_dir_all(&reports)?;
    for r in &summary.records {
        let name = format!("{:03}-{}-n{}.json", r.index, slug(&r.key), r.n);
        fs::write(reports.join(name), serde_json::to_string_pretty(r)? + "\n")?;
    }
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)? + "\n")?;
    write_csv(&dir.join("summary.csv"), summary)?;
    fs::write(dir.join("report.md"), markdown(std::slice::from_ref(summary)))?;
    Ok(())
}

fn write_csv(path: &Path, s: &Summary) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "key", "identity", "n", "sig", "mode", "seed", "pass", "anchor", "witness"])?;
    for r in &s.records {
        let rep = &r.report;
        let witness = rep
            .witness
            .as_ref()
            .map(|w| format!("{:?} {:?}: {}", w.row, w.col, w.residual))
            .unwrap_or_default();
        w.write_record([
            r.index.to_string(),
            r.key.clone(),
            rep.identity.clone(),
            r.n.to_string(),
            r.sig.clone(),
            rep.mode.clone(),
            rep.seed.map(|s| s.to_string()).unwrap_or_default(),
            rep.pass.to_string(),
            rep.anchor.clone(),
            witness,
        ])?;
    }
    w.flush()
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// Markdown aggregate over one or more summaries.
pub fn markdown(summaries: &[Summary]) -> String {
    let mut out = String::new();
    let total: usize = summaries.iter().map(|s| s.total).sum();
    let passed: usize = summaries.iter().map(|s| s.passed).sum();
    let _ = writeln!(out, "# Verification report\n");
    let _ = writeln!(out, "{passed} of {total} checks pass.\n");
    for s in summaries {
        let _ = writeln!(out, "## {}\n", s.campaign);
        let _ = writeln!(out, "| # | check | n | sig | mode | seed | result | anchor |");
        let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
        for r in &s.records {
            let rep = &r.report;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | `{}` |",
                r.index,
                cell(&r.key),
                r.n,
                r.sig,
                rep.mode,
                rep.seed.map(|x| x.to_string()).unwrap_or_else(|| "-".into()),
                if rep.pass { "pass" } else { "**FAIL**" },
                cell(&rep.anchor)
            );
        }
        let failures: Vec<&Record> = s.records.iter().filter(|r| !r.report.pass).collect();
        if !failures.is_empty() {
            let _ = writeln!(out, "\n### Failures\n");
            for r in failures {
                let w = r
                    .report
                    .witness
                    .as_ref()
                    .map(|w| format!("entry {:?}, {:?}: `{}`", w.row, w.col, cell(&w.residual)))
                    .unwrap_or_else(|| "no witness".into());
                let _ = writeln!(out, "- {} (n={}): {}", r.key, r.n, w);
            }
        }
        let noted: Vec<&Record> = s.records.iter().filter(|r| !r.report.notes.is_empty()).collect();
        if !noted.is_empty() {
            let _ = writeln!(out, "\n### Notes\n");
            for r in noted {
                for note in &r.report.notes {
                    let _ = writeln!(out, "- {} (n={}): {}", r.key, r.n, cell(note));
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynrefl::exactfield::CheckMode;

    fn rec(i: usize, pass: bool) -> Record {
        let mut r = VerificationReport::new("x|y", "a = b", CheckMode::random(3));
        r.millis = 12;
        if !pass {
            r = r.fail(None);
        }
        Record { index: i, key: "x".into(), n: 2, sig: "(1,1)".into(), report: r }
    }

    #[test]
    fn summary_counts_and_drops_timing() {
        let s = Summary::new("c", vec![rec(1, true), rec(2, false)]);
        assert_eq!((s.total, s.passed, s.failed), (2, 1, 1));
        assert!(s.records.iter().all(|r| r.report.millis == 0));
        let md = markdown(&[s]);
        assert!(md.contains("1 of 2 checks pass"));
        assert!(md.contains("**FAIL**"));
        assert!(md.contains("`a = b`"));
    }
}
