//! As-manufactured tip pitch that reaches a target pitch under cruise load.
//!
//! The blade is pre-twisted linearly from the root (held at the design pitch)
//! to the tip. Each pass loads the pre-twisted blade, compares the loaded tip
//! pitch with the target and shifts the unloaded tip pitch by the difference.
//! How the response depends on the pre-twist is a modelling choice; see
//! [`ResponseModel`].

use std::fmt::Write as _;

use crate::blade::{tip_pitch_change_with, BladeModel, PitchMeasure};
use crate::error::{Error, Result};
use crate::fem::{element_pressure_load, Factorization, LoadCase};
use crate::laminate::Layup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseModel {
    /// Twist response independent of the pre-twist.
    Linear,
    /// Each element carries `P cos(tau)` with `tau` the local pre-twist
    /// relative to the root.
    #[default]
    PressureProjection,
}

/// First unloaded guess: reverse the cruise twist of the untwisted blade,
/// measured from the tip-marker deflections (reverse load) or from the tip
/// rotation dofs (reverse strain).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initialization {
    #[default]
    ReverseLoad,
    ReverseStrain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnloadedConfig {
    pub target_tip_pitch_deg: f64,
    pub root_pitch_deg: f64,
    pub tol_deg: f64,
    pub max_iterations: usize,
    pub model: ResponseModel,
    pub initialization: Initialization,
}

impl Default for UnloadedConfig {
    fn default() -> Self {
        UnloadedConfig {
            target_tip_pitch_deg: 16.0,
            root_pitch_deg: 16.0,
            tol_deg: 0.05,
            max_iterations: 20,
            model: ResponseModel::PressureProjection,
            initialization: Initialization::ReverseLoad,
        }
    }
}

impl UnloadedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_deg.is_finite() && self.tol_deg > 0.0) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tol_deg)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max iterations must be >= 1".into()));
        }
        if !(self.target_tip_pitch_deg.is_finite() && self.target_tip_pitch_deg != 0.0) {
            return Err(Error::Config("target tip pitch must be finite and non-zero".into()));
        }
        if !self.root_pitch_deg.is_finite() {
            return Err(Error::Config("root pitch must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub initial_tip_deg: f64,
    pub loaded_tip_deg: f64,
    pub pct_error: f64,
    pub adjustment_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str = "iter,initial_tip_deg,loaded_tip_deg,pct_error,adjustment_deg";

impl IterationTrace {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{TRACE_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{:.6},{:.6}",
                r.iteration, r.initial_tip_deg, r.loaded_tip_deg, r.pct_error, r.adjustment_deg
            );
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().unwrap_or("");
        if header.trim() != TRACE_HEADER {
            return Err(Error::Config(format!("trace header must be `{TRACE_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let bad = || Error::Config(format!("trace row {} is malformed: `{line}`", k + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad());
            rows.push(TraceRow {
                iteration: f[0].parse().map_err(|_| bad())?,
                initial_tip_deg: num(1)?,
                loaded_tip_deg: num(2)?,
                pct_error: num(3)?,
                adjustment_deg: num(4)?,
            });
        }
        Ok(IterationTrace { rows })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnloadedResult {
    pub unloaded_tip_pitch_deg: f64,
    pub trace: IterationTrace,
}

struct Loader<'a> {
    model: &'a BladeModel,
    factor: Factorization,
    pressure: f64,
    root_x: f64,
    tip_x: f64,
    centroids: Vec<f64>,
    root_pitch: f64,
    response: ResponseModel,
}

impl Loader<'_> {
    /// Cruise twist (deg) of a blade whose unloaded tip pitch is `tip_deg`.
    fn twist(&self, tip_deg: f64, measure: PitchMeasure) -> Result<f64> {
        let pressures: Vec<f64> = match self.response {
            ResponseModel::Linear => vec![self.pressure; self.centroids.len()],
            ResponseModel::PressureProjection => {
                let rel = (tip_deg - self.root_pitch).to_radians();
                self.centroids
                    .iter()
                    .map(|&x| {
                        let tau = rel * (x - self.root_x) / (self.tip_x - self.root_x);
                        self.pressure * tau.cos()
                    })
                    .collect()
            }
        };
        let field = self
            .factor
            .solve(&element_pressure_load(self.model.mesh(), &pressures))?;
        Ok(tip_pitch_change_with(self.model.mesh(), &field, measure)?.to_degrees())
    }
}

pub fn iterate_unloaded_shape(
    model: &BladeModel,
    layup: &Layup,
    cruise: &LoadCase,
    config: &UnloadedConfig,
) -> Result<UnloadedResult> {
    config.validate()?;
    let mesh = model.mesh();
    let tip = mesh.tip().expect("blade models carry tip markers");
    let root_x = mesh
        .clamped_nodes()
        .iter()
        .map(|&n| mesh.nodes()[n][0])
        .fold(f64::INFINITY, f64::min);
    let tip_x = 0.5 * (mesh.nodes()[tip.leading][0] + mesh.nodes()[tip.trailing][0]);
    if !(tip_x > root_x) {
        return Err(Error::Config("tip chord must lie outboard of the clamped root".into()));
    }
    let loader = Loader {
        model,
        factor: model.factorize(layup)?,
        pressure: cruise.pressure,
        root_x,
        tip_x,
        centroids: (0..mesh.element_count()).map(|e| mesh.element_centroid(e)[0]).collect(),
        root_pitch: config.root_pitch_deg,
        response: config.model,
    };

    let target = config.target_tip_pitch_deg;
    let measure = match config.initialization {
        Initialization::ReverseLoad => PitchMeasure::ChordDeflection,
        Initialization::ReverseStrain => PitchMeasure::RotationDofs,
    };
    let mut tip_deg = target - loader.twist(config.root_pitch_deg, measure)?;

    let mut trace = IterationTrace::default();
    for iteration in 1..=config.max_iterations {
        let loaded = tip_deg + loader.twist(tip_deg, PitchMeasure::ChordDeflection)?;
        let adjustment = target - loaded;
        trace.rows.push(TraceRow {
            iteration,
            initial_tip_deg: tip_deg,
            loaded_tip_deg: loaded,
            pct_error: adjustment / target * 100.0,
            adjustment_deg: adjustment,
        });
        if !adjustment.is_finite() {
            break;
        }
        if adjustment.abs() < config.tol_deg {
            return Ok(UnloadedResult {
                unloaded_tip_pitch_deg: tip_deg,
                trace,
            });
        }
        tip_deg += adjustment;
    }
    Err(Error::Divergence {
        iterations: trace.rows.len(),
        trace,
    })
}
