use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::SVector;

use super::domain::AngleDomain;
use super::engine::{run_ga, GaConfig, LayupProblem, OptimizationResult, Penalty};
use crate::error::{Error, Result};
use crate::fem::{element_dofs, element_strains, ElementGeometry, ELEMENT_DOFS};
use crate::laminate::ply_strains;

/// One row of a layer-count / layer-thickness comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessRow {
    /// Total ply count of the symmetric laminate (even).
    pub layers: usize,
    pub ply_thickness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessResult {
    pub row: ThicknessRow,
    pub total_thickness: f64,
    pub result: OptimizationResult,
}

/// Runs the optimizer once per row on otherwise identical problems.
pub fn thickness_study(
    base: &LayupProblem,
    rows: &[ThicknessRow],
    domain: &AngleDomain,
    config: &GaConfig,
) -> Result<Vec<ThicknessResult>> {
    rows.iter()
        .map(|row| {
            if row.layers == 0 || row.layers % 2 != 0 {
                return Err(Error::InvalidOptimizer(format!(
                    "a symmetric laminate needs an even, non-zero layer count, got {}",
                    row.layers
                )));
            }
            let problem = LayupProblem::new(
                base.model.clone(),
                base.material,
                row.ply_thickness,
                row.layers / 2,
                base.schedule.clone(),
            )?;
            let problem = match &base.penalty {
                Some(p) => problem.with_penalty(p.clone()),
                None => problem,
            };
            Ok(ThicknessResult {
                row: *row,
                total_thickness: row.layers as f64 * row.ply_thickness,
                result: run_ga(&problem, domain, config)?,
            })
        })
        .collect()
}

pub fn thickness_csv(results: &[ThicknessResult]) -> String {
    let mut s = String::from("layers,layer_thk_um,total_thk_mm,best_rad,layup_deg\n");
    for r in results {
        let _ = writeln!(
            s,
            "{},{:.1},{:.3},{:.9e},{}",
            r.row.layers,
            r.row.ply_thickness * 1e6,
            r.total_thickness * 1e3,
            r.result.best_objective,
            r.result.layup_string()
        );
    }
    s
}

/// Allowable strains in ply material axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainLimits {
    pub fiber: f64,
    pub transverse: f64,
    pub shear: f64,
}

/// Max-strain penalty evaluated at `pressure`: `scale * max(0, r - 1)` where
/// `r` is the largest strain-to-allowable ratio over all plies and elements.
pub fn max_strain_penalty(limits: StrainLimits, pressure: f64, scale: f64) -> Result<Penalty> {
    let allow = [limits.fiber, limits.transverse, limits.shear];
    if allow.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidOptimizer("strain limits must be > 0".into()));
    }
    Ok(Arc::new(move |model, layup, unit| {
        let mesh = model.mesh();
        let field = unit.field.as_slice();
        let mut worst: f64 = 0.0;
        for (e, conn) in mesh.elements().iter().enumerate() {
            let geom = ElementGeometry::new(mesh.element_coords(e))?;
            let dofs = element_dofs(conn);
            let d = SVector::<f64, ELEMENT_DOFS>::from_fn(|k, _| field[dofs[k]] * pressure);
            let (eps, kappa, _) = element_strains(&geom, &d)?;
            for faces in ply_strains(layup, &eps, &kappa) {
                for s in faces {
                    for k in 0..3 {
                        worst = worst.max(s[k].abs() / allow[k]);
                    }
                }
            }
        }
        Ok(scale * (worst - 1.0).max(0.0))
    }))
}
