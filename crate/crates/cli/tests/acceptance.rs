//! The ten acceptance criteria at their stated tolerances.
//!
//! Each criterion prints one `criterion N ... PASS|FAIL` line; the test
//! fails at the end if any of them failed, so the full list is always shown.

use hn_audit::config::{self, RunConfig};
use hn_audit::report::{Grade, Report};
use hn_audit::{run, Campaign, Overrides};
use hn_hartree::parallel::with_threads;

fn config(n: usize, mu: f64, campaigns: &[Campaign], samples: Option<usize>) -> RunConfig {
    let flags = Overrides { campaigns: campaigns.to_vec(), n: Some(n), mu: Some(mu), samples, ..Overrides::default() };
    config::from_str("", "acceptance", &flags).expect("acceptance config")
}

/// Every asserted check of `campaign` whose name satisfies `select`; at
/// least one must exist.
fn asserted(report: &Report, campaign: &str, select: impl Fn(&str) -> bool) -> (bool, String) {
    let Some(section) = report.campaigns.iter().find(|c| c.name == campaign) else {
        return (false, format!("campaign {campaign} missing"));
    };
    let picked: Vec<_> = section.checks.iter().filter(|c| c.grade == Grade::Assert && select(&c.name)).collect();
    let failed: Vec<_> = picked.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
    if picked.is_empty() {
        (false, format!("no {campaign} checks selected"))
    } else if failed.is_empty() {
        (true, format!("{} checks", picked.len()))
    } else {
        (false, format!("failed: {}", failed.join(", ")))
    }
}

fn measured(report: &Report, campaign: &str, check: &str) -> String {
    match report.find(campaign, check).and_then(|c| c.measured) {
        Some(v) => format!("{check}={v:.6e}"),
        None => format!("{check} missing"),
    }
}

struct Tally(Vec<(u32, bool)>);

impl Tally {
    fn record(&mut self, id: u32, title: &str, ok: bool, detail: &str) {
        println!("criterion {id:>2} {title:<40} {} ({detail})", if ok { "PASS" } else { "FAIL" });
        self.0.push((id, ok));
    }
}

#[test]
fn acceptance() {
    let mut tally = Tally(Vec::new());
    let base = run(&config(
        1,
        2.0,
        &[Campaign::Group, Campaign::Cayley, Campaign::Constants, Campaign::Spectral, Campaign::Bubble, Campaign::Pohozaev],
        Some(1_000_000),
    ))
    .report;

    let secs = base.timings["group"] + base.timings["cayley"];
    let (ok, detail) = asserted(&base, "group", |_| true);
    let (ok_c, detail_c) = asserted(&base, "cayley", |_| true);
    tally.record(1, "group and Cayley suite, 1e3 cases, <5s", ok && ok_c && secs < 5.0, &format!("{detail}; {detail_c}; {secs:.2}s"));

    let secs = base.timings["constants"];
    let (ok, detail) = asserted(&base, "constants", |_| true);
    tally.record(2, "Funk-Hecke constants, <1s", ok && secs < 1.0, &format!("{detail}; {secs:.3}s"));

    let (ok, detail) = asserted(&base, "spectral", |name| {
        ["mu1", "mu2", "mu3"].iter().any(|m| name.starts_with("funk_hecke_") && name.ends_with(m))
    });
    tally.record(3, "Funk-Hecke MC, 1e6 samples, 3 sigma", ok, &detail);

    let (ok, detail) = asserted(&base, "bubble", |name| name == "yamabe_ratio_spread");
    let ratio = measured(&base, "bubble", "yamabe_constant");
    tally.record(4, "Yamabe ratio constant to 1e-8", ok, &format!("{detail}; {ratio} against n^2=1 and 4n^2=4"));

    let (ok, detail) = asserted(&base, "bubble", |name| name.starts_with("el_"));
    tally.record(5, "Euler-Lagrange ratio and quadrature", ok, &detail);

    let (ok_a, detail_a) = asserted(&base, "spectral", |name| name == "kappa_ordering" || name == "kernel_multiplicity");
    let (ok_b, detail_b) = asserted(&base, "bubble", |name| name.starts_with("linearized_kernel"));
    tally.record(6, "spectral gap and linearized kernel", ok_a && ok_b, &format!("{detail_a}; {detail_b}"));

    let (ok, detail) = asserted(&base, "bubble", |name| name.starts_with("decay_slope_"));
    tally.record(7, "Riesz decay slopes within 0.05", ok, &detail);

    let (ok, detail) = asserted(&base, "pohozaev", |name| name.ends_with("_relative_residual"));
    tally.record(8, "Pohozaev balances within 5%", ok, &detail);

    let n2 = run(&config(2, 2.0, &[Campaign::Reduced], None)).report;
    let (ok, detail) = asserted(&n2, "reduced", |name| name.starts_with("state"));
    tally.record(9, "reduced energy scale at n=2", ok, &detail);

    // both the MC sampler and the reduced quadrature run through the parallel map
    let cfg = config(2, 2.0, &[Campaign::Spectral, Campaign::Reduced], Some(100_000));
    let one = with_threads(1, || run(&cfg).report.body_json());
    let four = with_threads(4, || run(&cfg).report.body_json());
    tally.record(10, "report identical across 1 and 4 threads", one == four, &format!("{} bytes", one.len()));

    let failed: Vec<u32> = tally.0.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
