//! Verification campaigns over `hn-hartree`, their JSON report and CSV tables.

pub mod campaigns;
pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use campaigns::{run_campaign, Artifacts};
use config::RunConfig;
use report::{CampaignReport, Report};

pub use config::{Campaign, ConfigError, Overrides};

/// Exit statuses of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERT_FAILED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub artifacts: Artifacts,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_passed() {
            EXIT_OK
        } else {
            EXIT_ASSERT_FAILED
        }
    }
}

/// Campaigns run one after another; each parallelizes internally.
pub fn run(cfg: &RunConfig) -> RunOutput {
    let mut artifacts = Artifacts::default();
    let mut sections = Vec::new();
    let mut timings = BTreeMap::new();
    for c in cfg.schedule() {
        let start = Instant::now();
        let checks = run_campaign(c, cfg, &mut artifacts);
        timings.insert(c.name().to_string(), start.elapsed().as_secs_f64());
        sections.push(CampaignReport::new(c.name(), checks.0));
    }
    RunOutput { report: Report::new(cfg, sections, timings), artifacts }
}

pub fn write_outputs(out: &RunOutput, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), out.report.to_json() + "\n")?;
    write_kappa(&out.artifacts, &dir.join("kappa_table.csv"))?;
    write_decay(&out.artifacts, &dir.join("decay_fits.csv"))?;
    Ok(())
}

fn write_kappa(art: &Artifacts, path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "mu", "kappa_raw", "kappa_calibrated"])?;
    for r in &art.kappa_table {
        w.write_record([r.i.to_string(), r.j.to_string(), r.mu.to_string(), r.kappa_raw.to_string(), r.kappa_calibrated.to_string()])?;
    }
    w.flush()
}

fn write_decay(art: &Artifacts, path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["mu", "theta", "regime", "fitted", "predicted", "radius", "value"])?;
    for f in &art.decay_fits {
        let regime = serde_json::to_value(f.regime).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        for (r, v) in f.radii.iter().zip(&f.values) {
            w.write_record([
                f.mu.to_string(),
                f.theta.to_string(),
                regime.clone(),
                f.fitted.to_string(),
                f.predicted.to_string(),
                r.to_string(),
                v.to_string(),
            ])?;
        }
    }
    w.flush()
}
