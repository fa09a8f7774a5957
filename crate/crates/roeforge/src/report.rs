//! Structured pass/fail reporting. Failures always carry enough data to
//! re-check the claim by hand: the measured value, the bound it was compared
//! against, and a witness where one exists.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported but never asserted: surveyed quantities, demonstrations,
    /// hypotheses that were not met.
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Named checks collected by one verifier run.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        VerificationReport {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn record(
        &mut self,
        name: impl Into<String>,
        ok: bool,
        measured: Option<f64>,
        bound: Option<f64>,
        witness: Option<String>,
    ) {
        self.entries.push(CheckEntry {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            measured,
            bound,
            witness,
        });
    }

    /// Asserts `measured <= bound` and records the outcome.
    pub fn assert_le(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        bound: f64,
        witness: Option<String>,
    ) -> bool {
        let ok = measured <= bound;
        self.record(name, ok, Some(measured), Some(bound), witness);
        ok
    }

    pub fn fail(
        &mut self,
        name: impl Into<String>,
        measured: Option<f64>,
        bound: Option<f64>,
        witness: Option<String>,
    ) {
        self.entries.push(CheckEntry {
            name: name.into(),
            status: CheckStatus::Fail,
            measured,
            bound,
            witness,
        });
    }

    pub fn info(&mut self, name: impl Into<String>, measured: Option<f64>, witness: Option<String>) {
        self.entries.push(CheckEntry {
            name: name.into(),
            status: CheckStatus::Info,
            measured,
            bound: None,
            witness,
        });
    }

    /// True when no entry failed; informational entries never fail a report.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == CheckStatus::Fail)
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        let prefix = other.name;
        for mut e in other.entries {
            e.name = format!("{prefix}.{}", e.name);
            self.entries.push(e);
        }
    }

    /// One line per entry, human-oriented.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let tag = match e.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Info => "INFO",
            };
            out.push_str(&format!("{tag} {}.{}", self.name, e.name));
            if let Some(m) = e.measured {
                out.push_str(&format!(" measured={m}"));
            }
            if let Some(b) = e.bound {
                out.push_str(&format!(" bound={b}"));
            }
            if let Some(w) = &e.witness {
                out.push_str(&format!(" [{w}]"));
            }
            out.push('\n');
        }
        out
    }
}
