//! Report schema. Two grades of check: `assert` items decide the exit code,
//! `report` items record absolute constants next to a reference value and
//! never fail a run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA: &str = "hn-audit/report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Assert,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Report,
}

/// How `measured` is compared with `reference` and `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// |measured - reference| <= tolerance
    Absolute,
    /// |measured - reference| <= tolerance |reference|
    Relative,
    /// measured <= tolerance
    AtMost,
    /// measured >= tolerance
    AtLeast,
    /// |measured - reference| <= tolerance * std_error
    Sigma,
    /// measured is 1 (true) or 0 (false)
    Holds,
    /// no comparison; the reference is informative
    None,
    /// the computation itself failed
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub grade: Grade,
    pub comparison: Comparison,
    pub status: Status,
    pub measured: Option<f64>,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub std_error: Option<f64>,
    pub note: Option<String>,
}

impl Check {
    fn asserted(name: &str, comparison: Comparison, measured: f64, reference: Option<f64>, tolerance: f64, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            grade: Grade::Assert,
            comparison,
            status: if ok && measured.is_finite() { Status::Pass } else { Status::Fail },
            measured: Some(measured),
            reference,
            tolerance: Some(tolerance),
            std_error: None,
            note: None,
        }
    }

    pub fn annotate(&mut self, text: impl Into<String>) {
        self.note = Some(text.into());
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Accumulates the checks of one campaign.
#[derive(Debug, Default)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn absolute(&mut self, name: &str, measured: f64, reference: f64, tol: f64) -> &mut Check {
        let ok = (measured - reference).abs() <= tol;
        self.push(Check::asserted(name, Comparison::Absolute, measured, Some(reference), tol, ok))
    }

    pub fn relative(&mut self, name: &str, measured: f64, reference: f64, tol: f64) -> &mut Check {
        let ok = (measured - reference).abs() <= tol * reference.abs();
        self.push(Check::asserted(name, Comparison::Relative, measured, Some(reference), tol, ok))
    }

    pub fn at_most(&mut self, name: &str, measured: f64, bound: f64) -> &mut Check {
        self.push(Check::asserted(name, Comparison::AtMost, measured, None, bound, measured <= bound))
    }

    pub fn at_least(&mut self, name: &str, measured: f64, bound: f64) -> &mut Check {
        self.push(Check::asserted(name, Comparison::AtLeast, measured, None, bound, measured >= bound))
    }

    pub fn sigma(&mut self, name: &str, measured: f64, reference: f64, std_error: f64, k: f64) -> &mut Check {
        let ok = (measured - reference).abs() <= k * std_error;
        let c = self.push(Check::asserted(name, Comparison::Sigma, measured, Some(reference), k, ok));
        c.std_error = Some(std_error);
        c
    }

    pub fn holds(&mut self, name: &str, ok: bool) -> &mut Check {
        self.push(Check::asserted(name, Comparison::Holds, if ok { 1.0 } else { 0.0 }, Some(1.0), 0.0, ok))
    }

    pub fn report(&mut self, name: &str, measured: f64, reference: Option<f64>) -> &mut Check {
        self.push(Check {
            name: name.to_string(),
            grade: Grade::Report,
            comparison: Comparison::None,
            status: Status::Report,
            measured: Some(measured),
            reference,
            tolerance: None,
            std_error: None,
            note: None,
        })
    }

    pub fn error(&mut self, name: &str, err: impl std::fmt::Display) -> &mut Check {
        self.push(Check {
            name: name.to_string(),
            grade: Grade::Assert,
            comparison: Comparison::Error,
            status: Status::Fail,
            measured: None,
            reference: None,
            tolerance: None,
            std_error: None,
            note: Some(err.to_string()),
        })
    }

    fn push(&mut self, c: Check) -> &mut Check {
        self.0.push(c);
        self.0.last_mut().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub name: String,
    pub status: Status,
    pub checks: Vec<Check>,
}

impl CampaignReport {
    pub fn new(name: &str, checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(Check::passed) { Status::Pass } else { Status::Fail };
        Self { name: name.to_string(), status, checks }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub mu: f64,
    pub quadrature: hn_hartree::QuadratureSpec,
    pub campaigns: Vec<String>,
    pub robin_csv: Option<String>,
}

impl ConfigEcho {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            n: cfg.params.n,
            mu: cfg.params.mu,
            quadrature: cfg.quadrature.clone(),
            campaigns: cfg.schedule().iter().map(|c| c.name().to_string()).collect(),
            robin_csv: cfg.robin_csv.as_ref().map(|p| p.display().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub asserts: usize,
    pub failed: usize,
    pub reported: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    pub seed: u64,
    pub config: ConfigEcho,
    pub campaigns: Vec<CampaignReport>,
    pub summary: Summary,
    /// Wall-clock seconds per campaign. The only non-deterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(cfg: &RunConfig, campaigns: Vec<CampaignReport>, timings: BTreeMap<String, f64>) -> Self {
        let checks = campaigns.iter().flat_map(|c| &c.checks);
        let asserts = checks.clone().filter(|c| c.grade == Grade::Assert).count();
        let failed = checks.clone().filter(|c| c.status == Status::Fail).count();
        let reported = checks.filter(|c| c.grade == Grade::Report).count();
        Self {
            schema: SCHEMA.to_string(),
            schema_version: SCHEMA_VERSION,
            seed: cfg.quadrature.seed,
            config: ConfigEcho::from_config(cfg),
            campaigns,
            summary: Summary { asserts, failed, reported },
            timings,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without timings; equal configurations give equal bodies.
    pub fn body_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timings");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn find(&self, campaign: &str, check: &str) -> Option<&Check> {
        self.campaigns.iter().find(|c| c.name == campaign)?.checks.iter().find(|c| c.name == check)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        let mut c = Checks::default();
        assert_eq!(c.absolute("a", 1.0, 1.0 + 1e-13, 1e-12).status, Status::Pass);
        assert_eq!(c.relative("b", 2.0, 1.0, 0.5).status, Status::Fail);
        assert_eq!(c.at_most("c", 0.01, 0.05).status, Status::Pass);
        assert_eq!(c.at_least("d", -1.0, 0.0).status, Status::Fail);
        assert_eq!(c.sigma("e", 1.0, 1.2, 0.1, 3.0).status, Status::Pass);
        assert_eq!(c.holds("f", false).status, Status::Fail);
        assert_eq!(c.report("g", 5.0, Some(4.0)).status, Status::Report);
        assert_eq!(c.relative("h", f64::NAN, 1.0, 1.0).status, Status::Fail);
        assert_eq!(c.error("i", "boom").note.as_deref(), Some("boom"));
    }

    #[test]
    fn report_grade_never_fails_a_campaign() {
        let mut c = Checks::default();
        c.report("x", 1e9, Some(0.0));
        c.holds("y", true);
        assert_eq!(CampaignReport::new("k", c.0).status, Status::Pass);
    }
}
