use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use mqslab::metrics::default_x_grid;
use mqslab::Family;
use serde::Serialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Equatorial macro-qubit pair plus coherent references.
    Fig2a,
    /// Pole pair plus coherent references.
    Fig2b,
    /// Filtered equatorial pair for a list of thresholds.
    Fig3a,
    /// One family over the configured parameters.
    Sweep,
    /// Invariant and convergence report.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    /// Evenly spaced on `[0, x_max]`.
    Uniform,
    /// Evenly spaced, plus 20 points approaching total loss.
    Tail,
}

#[derive(Debug, Parser)]
#[command(
    name = "mqslab",
    version,
    about = "Bures-distance decay of amplified macro-qubits under photon loss"
)]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,

    /// Amplifier gain; repeat for several curves.
    #[arg(long = "g", value_name = "G", allow_negative_numbers = true)]
    pub g: Vec<f64>,

    /// Coherent amplitude |α|²; repeat for several reference curves.
    #[arg(long, value_name = "A2", allow_negative_numbers = true)]
    pub alpha2: Vec<f64>,

    /// Filter threshold; repeat for several curves.
    #[arg(long, value_name = "K")]
    pub k: Vec<u32>,

    /// Family for `sweep`: equatorial-mqs, pole-pair, coherent-pointer, coherent-mqs, filtered.
    #[arg(long)]
    pub family: Option<String>,

    /// Upper end of the evenly spaced part of the grid (clipped to ⟨n⟩₀,
    /// or to 0.9 ⟨n⟩₀ for filtered curves, which are always evenly spaced).
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,

    /// Number of evenly spaced grid points.
    #[arg(long)]
    pub x_count: Option<usize>,

    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,

    /// Fixed per-mode photon cutoff instead of the tail-driven choice.
    #[arg(long)]
    pub cutoff: Option<usize>,

    /// Largest discarded probability tolerated when truncating a state.
    #[arg(long, default_value_t = mqslab::states::DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,

    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub count: usize,
    pub x_max: f64,
    pub spacing: Spacing,
}

impl GridSpec {
    /// Grid for a curve whose abscissa ends at `mean_photons`.
    pub fn points(&self, mean_photons: f64) -> Vec<f64> {
        match self.spacing {
            Spacing::Tail => default_x_grid(mean_photons, self.count, Some(self.x_max)),
            Spacing::Uniform => self.uniform(self.x_max.min(mean_photons)),
        }
    }

    /// Grid for filtered curves: evenly spaced up to `FILTER_MAX_R · ⟨n⟩₀`
    /// at most, since total loss leaves nothing for the filter to select.
    pub fn filtered_points(&self, mean_photons: f64) -> Vec<f64> {
        self.uniform(self.x_max.min(FILTER_MAX_R * mean_photons))
    }

    fn uniform(&self, top: f64) -> Vec<f64> {
        (0..self.count)
            .map(|i| top * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

pub const FILTER_MAX_R: f64 = 0.9;

/// Everything that determines the emitted data. The output directory and
/// thread count are deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub g: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub k: Vec<u32>,
    pub grid: GridSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    pub tail_tol: f64,
    pub format: Format,
}

pub const G_RANGE: (f64, f64) = (0.0, 2.0);
pub const ALPHA2_RANGE: (f64, f64) = (0.0, 64.0);
pub const MAX_K: u32 = 40;
pub const MAX_X_COUNT: usize = 10_000;
pub const MAX_CUTOFF: usize = 400;
pub const TAIL_TOL_RANGE: (f64, f64) = (1e-15, 1e-2);

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self, Failure> {
        let family = args
            .family
            .as_deref()
            .map(|s| s.parse::<Family>().map_err(|e| Failure::Config(e.to_string())))
            .transpose()?;
        if args.command == Command::Sweep && family.is_none() {
            return Err(Failure::Config("sweep needs --family".into()));
        }
        if args.command != Command::Sweep && family.is_some() {
            return Err(Failure::Config("--family only applies to sweep".into()));
        }

        let default_g: &[f64] = match args.command {
            Command::Fig3a => &[0.8],
            Command::Validate => &[0.8, 1.1],
            _ => &[0.8, 1.1, 1.3],
        };
        let g = dedup(or_default(&args.g, default_g));
        let alpha2 = dedup(or_default(&args.alpha2, &[1.0, 4.0]));
        let mut k = or_default(&args.k, &[0, 1, 2, 3, 4, 5]);
        k.sort_unstable();
        k.dedup();

        let (count, x_max, spacing) = match args.command {
            Command::Fig3a => (16, 3.0, Spacing::Uniform),
            _ => (60, 4.0, Spacing::Tail),
        };
        let grid = GridSpec {
            count: args.x_count.unwrap_or(count),
            x_max: args.x_max.unwrap_or(x_max),
            spacing: args.spacing.unwrap_or(spacing),
        };

        let cfg = Self {
            command: args.command,
            family,
            g,
            alpha2,
            k,
            grid,
            cutoff: args.cutoff,
            tail_tol: args.tail_tol,
            format: args.format,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), Failure> {
        let bad = |msg: String| Err(Failure::Config(msg));
        for &g in &self.g {
            if !(g > G_RANGE.0 && g <= G_RANGE.1) {
                return bad(format!("gain {g} outside ({}, {}]", G_RANGE.0, G_RANGE.1));
            }
        }
        for &a in &self.alpha2 {
            if !(a > ALPHA2_RANGE.0 && a <= ALPHA2_RANGE.1) {
                return bad(format!("|α|² = {a} outside ({}, {}]", ALPHA2_RANGE.0, ALPHA2_RANGE.1));
            }
        }
        if let Some(&k) = self.k.iter().find(|&&k| k > MAX_K) {
            return bad(format!("threshold {k} above {MAX_K}"));
        }
        if !(2..=MAX_X_COUNT).contains(&self.grid.count) {
            return bad(format!("x-count {} outside [2, {MAX_X_COUNT}]", self.grid.count));
        }
        if !(self.grid.x_max > 0.0 && self.grid.x_max.is_finite()) {
            return bad(format!("x-max {} must be positive", self.grid.x_max));
        }
        if let Some(c) = self.cutoff {
            if !(1..=MAX_CUTOFF).contains(&c) {
                return bad(format!("cutoff {c} outside [1, {MAX_CUTOFF}]"));
            }
        }
        if !(self.tail_tol >= TAIL_TOL_RANGE.0 && self.tail_tol <= TAIL_TOL_RANGE.1) {
            return bad(format!(
                "tail tolerance {} outside [{:e}, {:e}]",
                self.tail_tol, TAIL_TOL_RANGE.0, TAIL_TOL_RANGE.1
            ));
        }
        Ok(())
    }

    pub fn sweep_options(&self) -> mqslab::metrics::SweepOptions {
        mqslab::metrics::SweepOptions {
            tail_tol: self.tail_tol,
            cutoff: self.cutoff,
        }
    }
}

fn or_default<T: Copy>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

fn dedup(mut v: Vec<f64>) -> Vec<f64> {
    let mut seen = Vec::with_capacity(v.len());
    v.retain(|x| {
        let fresh = !seen.contains(x);
        seen.push(*x);
        fresh
    });
    v
}
