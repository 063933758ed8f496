use std::fmt::Write as _;

use mqslab::metrics::{coherent_pointer_distance_closed, filtered_sweeps, DistanceModel, SweepOptions};
use mqslab::states::{self, amplified_pole_state};
use mqslab::{
    apply_loss, BasisLabel, DensityOperator, Error, Family, GainParams, LossParams, OfThreshold, Pole, TwoModeSpace,
};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::{fmt_sig, json_bytes, write_atomic};
use crate::run::ORIGIN_TOL;
use crate::Failure;

/// Largest change tolerated when the cutoff grows by five or the tail
/// tolerance is tightened.
pub const CONVERGENCE_TOL: f64 = 1e-6;
pub const CONVERGENCE_STEP: usize = 5;
pub const TIGHT_TAIL: f64 = 1e-10;
pub const REFERENCE_TOL: f64 = 1e-6;
pub const TRACE_TOL: f64 = 1e-12;
pub const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded observation that does not gate the exit code.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Default, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    fn push(
        &mut self,
        name: impl Into<String>,
        status: Status,
        value: Option<f64>,
        bound: Option<f64>,
        detail: impl Into<String>,
    ) {
        let check = Check {
            name: name.into(),
            status,
            value,
            bound,
            detail: detail.into(),
        };
        let tag = match check.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        println!("{tag} {}: {}", check.name, check.detail);
        self.checks.push(check);
    }

    /// Pass when `value <= bound`.
    fn below(&mut self, name: impl Into<String>, value: f64, bound: f64, what: &str) {
        let status = if value <= bound { Status::Pass } else { Status::Fail };
        self.push(
            name,
            status,
            Some(value),
            Some(bound),
            format!("{what} = {value:.3e} (bound {bound:.1e})"),
        );
    }

    fn truth(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.push(name, if ok { Status::Pass } else { Status::Fail }, None, None, detail);
    }

    fn error(&mut self, name: impl Into<String>, e: &Error) {
        self.push(name, Status::Fail, None, None, e.to_string());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,status,value,bound,detail\n");
        for c in &self.checks {
            let status = serde_json::to_value(c.status).unwrap();
            let _ = writeln!(
                out,
                "{},{},{},{},\"{}\"",
                c.name,
                status.as_str().unwrap(),
                c.value.map(fmt_sig).unwrap_or_default(),
                c.bound.map(fmt_sig).unwrap_or_default(),
                c.detail.replace('"', "\"\"")
            );
        }
        out
    }
}

pub fn run_validate(cfg: &RunConfig) -> Report {
    let mut report = Report {
        version: mqslab::VERSION,
        ..Default::default()
    };
    let opts = cfg.sweep_options();

    for &g in &cfg.g {
        gain_checks(&mut report, cfg, g, &opts);
    }
    if let Some(&g) = cfg.g.iter().min_by(|a, b| a.total_cmp(b)) {
        filter_checks(&mut report, cfg, g, &opts);
    }
    for &a in &cfg.alpha2 {
        coherent_checks(&mut report, a, &opts);
    }
    truncation_guard(&mut report);

    report.passed = report.checks.iter().all(|c| c.status != Status::Fail);
    report
}

pub fn write_report(cfg: &RunConfig, out: &std::path::Path, report: &Report) -> Result<std::path::PathBuf, Failure> {
    std::fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    match cfg.format {
        Format::Csv => write_atomic(&out.join("validate.csv"), report.to_csv().as_bytes()),
        Format::Json => {
            let doc = serde_json::json!({ "config": cfg, "report": report });
            write_atomic(&out.join("validate.json"), &json_bytes(&doc))
        }
    }
}

fn bumped(model: &DistanceModel, opts: &SweepOptions) -> SweepOptions {
    SweepOptions {
        cutoff: Some(model.cutoff() + CONVERGENCE_STEP),
        ..*opts
    }
}

fn gain_checks(report: &mut Report, cfg: &RunConfig, g: f64, opts: &SweepOptions) {
    let tag = format!("g={g}");
    let eq = match DistanceModel::new(Family::EquatorialMqs, g, opts) {
        Ok(m) => m,
        Err(e) => return report.error(format!("equatorial-build {tag}"), &e),
    };
    let pole = match DistanceModel::new(Family::PolePair, g, opts) {
        Ok(m) => m,
        Err(e) => return report.error(format!("pole-build {tag}"), &e),
    };
    let result: Result<(), Error> = (|| {
        for (name, m) in [("equatorial", &eq), ("pole", &pole)] {
            let d0 = m.at(0.0)?.value;
            report.below(
                format!("origin {name} {tag}"),
                (d0 - 1.0).abs(),
                ORIGIN_TOL,
                "|D(0) - 1|",
            );
        }

        let curve = eq.sweep(&cfg.grid.points(eq.mean_photons()))?;
        let worst = curve
            .values()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        report.below(
            format!("monotone equatorial {tag}"),
            worst.max(0.0),
            MONOTONE_TOL,
            "largest rise",
        );
        let n0 = pole.mean_photons();
        let coarse: Vec<f64> = (0..12).map(|i| n0 * i as f64 / 11.0).collect();
        let curve = pole.sweep(&coarse)?;
        let worst = curve
            .values()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        report.below(
            format!("monotone pole {tag}"),
            worst.max(0.0),
            MONOTONE_TOL,
            "largest rise",
        );

        let (p, e) = (pole.at(1.0)?.value, eq.at(1.0)?.value);
        report.truth(
            format!("pole-below-equatorial {tag}"),
            p < e,
            format!("x=1: pole {p:.6} vs equatorial {e:.6}"),
        );

        for (name, m, xs) in [
            ("equatorial", &eq, vec![1.0, 0.9 * eq.mean_photons()]),
            ("pole", &pole, vec![1.0]),
        ] {
            let wide = DistanceModel::new(m.family(), g, &bumped(m, opts))?;
            let mut worst: f64 = 0.0;
            for &x in &xs {
                worst = worst.max((m.at(x)?.value - wide.at(x)?.value).abs());
            }
            report.below(
                format!("convergence-cutoff {name} {tag}"),
                worst,
                CONVERGENCE_TOL,
                &format!("|ΔD| at cutoff {}+{CONVERGENCE_STEP}", m.cutoff()),
            );
        }

        if opts.cutoff.is_none() && opts.tail_tol > TIGHT_TAIL {
            let tight = SweepOptions {
                tail_tol: TIGHT_TAIL,
                cutoff: None,
            };
            for (name, m) in [("equatorial", &eq), ("pole", &pole)] {
                let t = DistanceModel::new(m.family(), g, &tight)?;
                report.truth(
                    format!("tail-cutoff-grows {name} {tag}"),
                    t.cutoff() >= m.cutoff(),
                    format!(
                        "cutoff {} at {:e}, {} at {TIGHT_TAIL:e}",
                        m.cutoff(),
                        opts.tail_tol,
                        t.cutoff()
                    ),
                );
                let d = (m.at(1.0)?.value - t.at(1.0)?.value).abs();
                report.below(
                    format!("convergence-tail {name} {tag}"),
                    d,
                    CONVERGENCE_TOL,
                    "|ΔD| at x=1",
                );
            }
        }

        let gain = GainParams::new(g)?;
        let space = TwoModeSpace::new(pole.cutoff(), BasisLabel::hv());
        let h = DensityOperator::from_pure(&amplified_pole_state(gain, Pole::H, &space, opts.tail_tol)?.normalized()?)?;
        let lossy = apply_loss(&h, LossParams::new(0.5)?)?;
        report.below(
            format!("loss-trace {tag}"),
            (lossy.trace() - 1.0).abs(),
            TRACE_TOL,
            "|Tr ρ - 1| at R=0.5",
        );
        let valid = lossy.validate();
        report.truth(
            format!("loss-density {tag}"),
            valid.is_ok(),
            valid
                .err()
                .map_or("hermitian, unit trace, positive".into(), |e| e.to_string()),
        );
        Ok(())
    })();
    if let Err(e) = result {
        report.error(format!("evaluation {tag}"), &e);
    }
}

fn filter_checks(report: &mut Report, cfg: &RunConfig, g: f64, opts: &SweepOptions) {
    let tag = format!("g={g}");
    let ks: Vec<OfThreshold> = cfg.k.iter().map(|&k| OfThreshold(k)).collect();
    let result: Result<(), Error> = (|| {
        let at_one = filtered_sweeps(g, &ks, &[0.0, 1.0], opts)?;
        let worst = at_one
            .iter()
            .map(|c| (c.samples[0].value - 1.0).abs())
            .fold(0.0, f64::max);
        report.below(format!("origin filtered {tag}"), worst, ORIGIN_TOL, "|D(0) - 1| over k");

        let d: Vec<f64> = at_one.iter().map(|c| c.samples[1].value).collect();
        let p: Vec<f64> = at_one
            .iter()
            .map(|c| c.samples[1].success_prob.unwrap_or(f64::NAN))
            .collect();
        let listing = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
        report.truth(
            format!("filter-rate-decreases {tag}"),
            p.windows(2).all(|w| w[1] < w[0]),
            format!("x=1 success probability over k: {}", listing(&p)),
        );
        let mut same_parity = true;
        for i in 0..ks.len() {
            for j in i + 1..ks.len() {
                if (ks[j].0 - ks[i].0) % 2 == 0 && d[j] < d[i] {
                    same_parity = false;
                }
            }
        }
        report.truth(
            format!("filter-distance-grows-within-parity {tag}"),
            same_parity,
            format!("x=1 D over k: {}", listing(&d)),
        );
        let all = d.windows(2).all(|w| w[1] >= w[0]);
        report.push(
            format!("filter-distance-order-all-k {tag}"),
            Status::Info,
            None,
            None,
            format!("D nondecreasing across consecutive k: {all}"),
        );

        let gain = GainParams::new(g)?;
        let cutoff = match opts.cutoff {
            Some(c) => c,
            None => states::equatorial_cutoff(gain, opts.tail_tol)?,
        };
        let wide = SweepOptions {
            cutoff: Some(cutoff + CONVERGENCE_STEP),
            ..*opts
        };
        let wider = filtered_sweeps(g, &ks, &[1.0], &wide)?;
        let worst = at_one
            .iter()
            .zip(&wider)
            .map(|(a, b)| (a.samples[1].value - b.samples[0].value).abs())
            .fold(0.0, f64::max);
        report.below(
            format!("convergence-cutoff filtered {tag}"),
            worst,
            CONVERGENCE_TOL,
            &format!("max |ΔD| over k at x=1, cutoff {cutoff}+{CONVERGENCE_STEP}"),
        );
        Ok(())
    })();
    if let Err(e) = result {
        report.error(format!("filtered {tag}"), &e);
    }
}

/// Even and odd cats after single-mode loss: `F = √(1−e^{−4R|α|²}) / √(1−e^{−4|α|²})`.
fn exact_cat_distance(alpha2: f64, r: f64) -> f64 {
    let f = (-(-4.0 * r * alpha2).exp_m1()).sqrt() / (-(-4.0 * alpha2).exp_m1()).sqrt();
    (1.0 - f.min(1.0)).sqrt()
}

fn coherent_checks(report: &mut Report, alpha2: f64, opts: &SweepOptions) {
    let tag = format!("a2={alpha2}");
    let result: Result<(), Error> = (|| {
        let cat = DistanceModel::new(Family::CoherentMqs, alpha2, opts)?;
        let pointer = DistanceModel::new(Family::CoherentPointer, alpha2, opts)?;
        let mut worst: f64 = 0.0;
        for r in [0.25, 0.5, 1.0] {
            worst = worst.max((cat.at_reflectivity(r)?.value - exact_cat_distance(alpha2, r)).abs());
        }
        report.below(
            format!("cat-exact {tag}"),
            worst,
            REFERENCE_TOL,
            "max |D - exact| at R in {0.25, 0.5, 1}",
        );
        let mut worst: f64 = 0.0;
        for r in [0.3, 0.9] {
            worst = worst.max((pointer.at_reflectivity(r)?.value - coherent_pointer_distance_closed(alpha2, r)).abs());
        }
        report.below(
            format!("pointer-closed-form {tag}"),
            worst,
            REFERENCE_TOL,
            "max |D - closed form| at R in {0.3, 0.9}",
        );
        for (name, m) in [("cat", &cat), ("pointer", &pointer)] {
            let wide = DistanceModel::new(m.family(), alpha2, &bumped(m, opts))?;
            let d = (m.at_reflectivity(0.5)?.value - wide.at_reflectivity(0.5)?.value).abs();
            report.below(
                format!("convergence-cutoff {name} {tag}"),
                d,
                CONVERGENCE_TOL,
                &format!("|ΔD| at R=0.5, cutoff {}+{CONVERGENCE_STEP}", m.cutoff()),
            );
        }
        Ok(())
    })();
    if let Err(e) = result {
        report.error(format!("coherent {tag}"), &e);
    }
}

/// A deliberately starved cutoff has to be refused, not silently used.
fn truncation_guard(report: &mut Report) {
    let starved = SweepOptions {
        cutoff: Some(3),
        ..Default::default()
    };
    let outcome = DistanceModel::new(Family::EquatorialMqs, 1.3, &starved);
    let detail = match &outcome {
        Err(e) => e.to_string(),
        Ok(_) => "cutoff 3 at g=1.3 was accepted".into(),
    };
    report.truth(
        "truncation-guard",
        matches!(outcome, Err(Error::Truncation { .. })),
        detail,
    );
}
