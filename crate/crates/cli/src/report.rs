//! Report emission: a human-readable summary on stdout, JSON reports and CSV
//! tables in the output directory, and the violation certificate on stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use laguerre_core::heat::BoundReport;
use laguerre_core::verify::CriterionReport;
use serde::Serialize;

pub const EXIT_VIOLATION: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

/// Evidence for a violated invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub claim_id: String,
    pub worst_point: String,
    /// measured value over its limit; above 1 (or infinite) means violated
    pub ratio: f64,
    pub measured: f64,
    pub limit: Option<f64>,
}

impl Certificate {
    pub fn from_criterion(r: &CriterionReport) -> Option<Self> {
        if r.pass {
            return None;
        }
        let row = r.rows.iter().find(|row| !row.pass);
        Some(match row {
            Some(row) => Certificate {
                claim_id: format!("criterion-{}", r.number),
                worst_point: row.label.clone(),
                ratio: row.limit.map_or(f64::INFINITY, |l| row.value / l),
                measured: row.value,
                limit: row.limit,
            },
            None => Certificate {
                claim_id: format!("criterion-{}", r.number),
                worst_point: "no checks ran".into(),
                ratio: f64::INFINITY,
                measured: f64::NAN,
                limit: None,
            },
        })
    }

    pub fn from_bound(b: &BoundReport) -> Option<Self> {
        if !b.violated {
            return None;
        }
        let worst = b.worst_point.as_ref().map_or("none".to_string(), |w| format!("t={} x={:?} y={:?}", w.t, w.x, w.y));
        Some(Certificate {
            claim_id: b.claim_id.clone(),
            worst_point: worst,
            ratio: b.best_constant,
            measured: b.ln_best_constant,
            limit: None,
        })
    }

    pub fn render(&self) -> String {
        format!("violation: claim {} at {} (ratio {:e}, measured {:e}, limit {:?})", self.claim_id, self.worst_point, self.ratio, self.measured, self.limit)
    }
}

#[derive(Clone, Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    certificates: &'a [Certificate],
    report: &'a T,
}

/// Everything a command produced.
pub struct Outcome {
    pub command: String,
    pub summary: String,
    pub json: serde_json::Value,
    pub tables: Vec<(String, Table)>,
    pub certificates: Vec<Certificate>,
}

impl Outcome {
    pub fn new<T: Serialize>(command: &str, summary: String, report: &T) -> Self {
        Self {
            command: command.into(),
            summary,
            json: serde_json::to_value(report).expect("reports serialize"),
            tables: Vec::new(),
            certificates: Vec::new(),
        }
    }

    pub fn table(mut self, name: &str, t: Table) -> Self {
        self.tables.push((name.into(), t));
        self
    }

    pub fn certify(mut self, c: impl IntoIterator<Item = Certificate>) -> Self {
        self.certificates.extend(c);
        self
    }

    pub fn exit_code(&self) -> u8 {
        if self.certificates.is_empty() {
            0
        } else {
            EXIT_VIOLATION
        }
    }

    pub fn json_text(&self) -> String {
        let env = Envelope { command: &self.command, certificates: &self.certificates, report: &self.json };
        serde_json::to_string_pretty(&env).expect("reports serialize") + "\n"
    }

    /// Writes `<command>.json` and one CSV per table into `dir`.
    pub fn write(&self, dir: &str) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = PathBuf::from(dir).join(format!("{}.json", self.command));
        fs::write(&path, self.json_text())?;
        written.push(path);
        for (name, t) in &self.tables {
            let path = PathBuf::from(dir).join(format!("{}-{name}.csv", self.command));
            fs::write(&path, t.to_csv())?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Small CSV table; floats are written with Rust's shortest round-trip format.
#[derive(Clone, Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| cells.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{}", line(&self.header));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
        out
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Criterion rows as a table.
pub fn criterion_table(r: &CriterionReport) -> Table {
    let mut t = Table::new(&["criterion", "label", "value", "limit", "pass"]);
    for row in &r.rows {
        t.push(vec![
            r.number.to_string(),
            row.label.clone(),
            format!("{:e}", row.value),
            row.limit.map_or(String::new(), |l| format!("{l:e}")),
            row.pass.to_string(),
        ]);
    }
    t
}

pub fn criterion_summary(r: &CriterionReport) -> String {
    let mut s = r.summary_line();
    for row in &r.rows {
        let limit = row.limit.map_or(String::new(), |l| format!(" < {l:e}"));
        let _ = write!(s, "\n  {:<5} {} = {:.3e}{limit}", if row.pass { "ok" } else { "FAIL" }, row.label, row.value);
    }
    s
}

pub fn bound_table(reports: &[BoundReport]) -> Table {
    let mut t = Table::new(&["claim_id", "best_c", "best_constant", "ln_best_constant", "violated", "worst_t", "worst_x", "worst_y"]);
    for b in reports {
        let (wt, wx, wy) = match &b.worst_point {
            Some(w) => (format!("{}", w.t), join(&w.x), join(&w.y)),
            None => Default::default(),
        };
        t.push(vec![
            b.claim_id.clone(),
            format!("{}", b.best_c),
            format!("{:e}", b.best_constant),
            format!("{}", b.ln_best_constant),
            b.violated.to_string(),
            wt,
            wx,
            wy,
        ]);
    }
    t
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}
