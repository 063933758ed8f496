use std::time::Instant;

use mqslab::metrics::{coherent_mqs_distance_closed, filtered_sweeps, DistanceModel};
use mqslab::{Family, OfThreshold, Sample};

use crate::config::{Command, RunConfig};
use crate::output::{curve_id, Table, Timing};
use crate::Failure;

/// Distance at zero loss for every emitted curve.
pub const ORIGIN_TOL: f64 = 1e-6;

pub struct Run {
    pub tables: Vec<Table>,
    pub timing: Timing,
}

struct Clock {
    start: Instant,
    entries: Vec<(String, f64)>,
}

impl Clock {
    fn new() -> Self {
        Self {
            start: Instant::now(),
            entries: Vec::new(),
        }
    }

    fn time<T>(&mut self, label: String, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        eprintln!("[mqslab] {label}: {secs:.2} s");
        self.entries.push((label, secs));
        out
    }

    fn finish(self) -> Timing {
        Timing {
            total_seconds: self.start.elapsed().as_secs_f64(),
            curves: self.entries,
        }
    }
}

pub fn run_figures(cfg: &RunConfig) -> Result<Run, Failure> {
    let mut clock = Clock::new();
    let mut tables = Vec::new();
    match cfg.command {
        Command::Fig2a => {
            for &g in &cfg.g {
                tables.push(model_curve(cfg, &mut clock, Family::EquatorialMqs, g)?);
            }
            references(cfg, &mut clock, &mut tables)?;
        }
        Command::Fig2b => {
            for &g in &cfg.g {
                tables.push(model_curve(cfg, &mut clock, Family::PolePair, g)?);
            }
            references(cfg, &mut clock, &mut tables)?;
        }
        Command::Fig3a => {
            for &g in &cfg.g {
                tables.push(model_curve(cfg, &mut clock, Family::EquatorialMqs, g)?);
                tables.extend(filtered(cfg, &mut clock, g)?);
            }
        }
        Command::Sweep => {
            let family = cfg.family.expect("sweep family checked in config");
            match family {
                Family::Filtered => {
                    for &g in &cfg.g {
                        tables.extend(filtered(cfg, &mut clock, g)?);
                    }
                }
                f if f.uses_gain() => {
                    for &g in &cfg.g {
                        tables.push(model_curve(cfg, &mut clock, f, g)?);
                    }
                }
                f => {
                    for &a in &cfg.alpha2 {
                        tables.push(model_curve(cfg, &mut clock, f, a)?);
                    }
                }
            }
        }
        Command::Validate => unreachable!("validate has its own entry point"),
    }
    Ok(Run {
        tables,
        timing: clock.finish(),
    })
}

/// Every curve except the coherent pointer pair must start from orthogonal
/// states.
pub fn check_origin(tables: &[Table]) -> Result<(), Failure> {
    for t in tables.iter().filter(|t| t.family != Family::CoherentPointer.name()) {
        if let Some(s) = t.samples.first().filter(|s| s.x == 0.0) {
            if (s.value - 1.0).abs() > ORIGIN_TOL {
                return Err(Failure::Numerical(format!(
                    "{}: D(0) = {} differs from 1 by more than {ORIGIN_TOL:e}",
                    t.id, s.value
                )));
            }
        }
    }
    Ok(())
}

fn model_curve(cfg: &RunConfig, clock: &mut Clock, family: Family, parameter: f64) -> Result<Table, Failure> {
    let label = curve_id(family.name(), family.uses_gain(), parameter, None);
    clock.time(label, || {
        let model = DistanceModel::new(family, parameter, &cfg.sweep_options())?;
        let grid = cfg.grid.points(model.mean_photons());
        Ok(Table::from_curve(model.sweep(&grid)?))
    })
}

fn filtered(cfg: &RunConfig, clock: &mut Clock, g: f64) -> Result<Vec<Table>, Failure> {
    let ks: Vec<OfThreshold> = cfg.k.iter().map(|&k| OfThreshold(k)).collect();
    let label = curve_id("filtered", true, g, None);
    clock.time(label, || {
        let n0 = mqslab::GainParams::new(g)?.mean_photons();
        let curves = filtered_sweeps(g, &ks, &cfg.grid.filtered_points(n0), &cfg.sweep_options())?;
        Ok(curves.into_iter().map(Table::from_curve).collect())
    })
}

/// Numeric and closed-form coherent cat curves for every configured `|α|²`.
fn references(cfg: &RunConfig, clock: &mut Clock, tables: &mut Vec<Table>) -> Result<(), Failure> {
    for &a in &cfg.alpha2 {
        tables.push(model_curve(cfg, clock, Family::CoherentMqs, a)?);
        tables.push(closed_curve(
            cfg,
            "coherent-mqs-closed",
            a,
            coherent_mqs_distance_closed,
        ));
    }
    Ok(())
}

pub fn closed_curve(cfg: &RunConfig, family: &str, alpha2: f64, f: fn(f64, f64) -> f64) -> Table {
    let samples = cfg
        .grid
        .points(alpha2)
        .into_iter()
        .map(|x| {
            let r = (x / alpha2).min(1.0);
            Sample {
                x,
                r,
                value: f(alpha2, r),
                success_prob: None,
                partner_success_prob: None,
            }
        })
        .collect();
    Table {
        id: curve_id(family, false, alpha2, None),
        family: family.to_string(),
        parameter: alpha2,
        threshold: None,
        cutoff: None,
        tail_tol: None,
        mean_photons: alpha2,
        samples,
    }
}
