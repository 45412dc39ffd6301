//! Run configuration in TOML.
//!
//! Units are SI except where a key says otherwise: angles are always degrees
//! (`*_deg`), schedule pressures are kPa (`*_kpa`). Relative mesh-file paths are
//! resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use shapeprop::blade::{PitchMeasure, PitchSchedule, ScheduleEntry};
use shapeprop::fem::{ElementOptions, LoadCase, ShearStabilization};
use shapeprop::ga::{AngleDomain, GaConfig, StrainLimits, ThicknessRow};
use shapeprop::laminate::{Layup, Material};
use shapeprop::mesh::{
    gen_blade_mesh, gen_rect_mesh_with, load_mesh, Diagonal, LoadOptions, Mesh, Outline, PlanformSpec,
};
use shapeprop::unloaded::{Initialization, ResponseModel, UnloadedConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layup: Option<LayupConfig>,
    #[serde(default)]
    pub load: LoadConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unloaded: Option<UnloadedSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_study: Option<ThicknessSection>,
    #[serde(default)]
    pub element: ElementSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalKind {
    #[default]
    Falling,
    Rising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlineKind {
    #[default]
    Symmetric,
    Skewed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshConfig {
    Rect(RectMesh),
    Blade(BladeMesh),
    File(FileMesh),
}

/// Cantilever plate clamped along `x = 0`; `nx`, `ny` count nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectMesh {
    pub length: f64,
    pub width: f64,
    pub nx: usize,
    pub ny: usize,
    #[serde(default)]
    pub diagonal: DiagonalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BladeMesh {
    pub diameter: f64,
    pub hub_diameter: f64,
    pub expanded_area_ratio: f64,
    pub blade_count: usize,
    pub elements: usize,
    #[serde(default)]
    pub outline: OutlineKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMesh {
    pub path: PathBuf,
    #[serde(default)]
    pub reorient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub e1: f64,
    pub e2: f64,
    pub g12: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g23: Option<f64>,
    pub nu12: f64,
    pub nu23: f64,
    pub ply_thickness: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        let m = Material::as4_3501_6();
        MaterialConfig {
            e1: m.e1,
            e2: m.e2,
            g12: m.g12,
            g23: m.g23,
            nu12: m.nu12,
            nu23: m.nu23,
            ply_thickness: m.ply_thickness,
        }
    }
}

fn yes() -> bool {
    true
}

/// Explicit stacking sequence; with `symmetric` the angles are the half stack
/// from the outer surface to the mid-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayupConfig {
    pub angles_deg: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ply_thickness: Option<f64>,
    #[serde(default = "yes")]
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub pressure: f64,
}

impl Default for LoadConfig {
    fn default() -> Self {
        LoadConfig { pressure: 100.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleRow {
    pub pressure_kpa: f64,
    pub delta_kpa: f64,
    pub pd_ratio: f64,
    pub phi_deg: f64,
    pub delta_phi_deg: f64,
    #[serde(default = "one")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub rows: Vec<ScheduleRow>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainConfig {
    #[default]
    Continuous,
    Integer,
    MultiplesOf(f64),
    Set(Vec<f64>),
}

impl DomainConfig {
    pub fn to_domain(&self) -> AngleDomain {
        match self {
            DomainConfig::Continuous => AngleDomain::Continuous,
            DomainConfig::Integer => AngleDomain::IntegerDegrees,
            DomainConfig::MultiplesOf(s) => AngleDomain::MultiplesOf(*s),
            DomainConfig::Set(v) => AngleDomain::FiniteSet(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrainPenaltyConfig {
    pub fiber: f64,
    pub transverse: f64,
    pub shear: f64,
    pub pressure_kpa: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub domain: DomainConfig,
    /// Total ply count of the symmetric laminate.
    pub layers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ply_thickness: Option<f64>,
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation_scale_deg: f64,
    pub elitism_count: usize,
    pub tournament_size: usize,
    pub seed: u64,
    pub stall_generations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strain_penalty: Option<StrainPenaltyConfig>,
}

impl Default for GaSection {
    fn default() -> Self {
        let g = GaConfig::default();
        GaSection {
            domain: DomainConfig::Continuous,
            layers: 40,
            ply_thickness: None,
            population_size: g.population_size,
            generations: g.generations,
            crossover_rate: g.crossover_rate,
            mutation_rate: g.mutation_rate,
            mutation_scale_deg: g.mutation_scale.to_degrees(),
            elitism_count: g.elitism_count,
            tournament_size: g.tournament_size,
            seed: g.rng_seed,
            stall_generations: g.stall_generations,
            strain_penalty: None,
        }
    }
}

impl GaSection {
    pub fn to_config(&self) -> GaConfig {
        GaConfig {
            population_size: self.population_size,
            generations: self.generations,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            mutation_scale: self.mutation_scale_deg.to_radians(),
            elitism_count: self.elitism_count,
            tournament_size: self.tournament_size,
            rng_seed: self.seed,
            stall_generations: self.stall_generations,
        }
    }

    pub fn strain_limits(&self) -> Option<(StrainLimits, f64, f64)> {
        self.strain_penalty.as_ref().map(|p| {
            (
                StrainLimits {
                    fiber: p.fiber,
                    transverse: p.transverse,
                    shear: p.shear,
                },
                p.pressure_kpa * 1e3,
                p.scale,
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    #[default]
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    ReverseLoad,
    ReverseStrain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnloadedSection {
    pub cruise_kpa: f64,
    pub target_tip_pitch_deg: f64,
    pub root_pitch_deg: f64,
    pub tol_deg: f64,
    pub max_iterations: usize,
    pub model: ModelKind,
    pub initialization: InitKind,
}

impl Default for UnloadedSection {
    fn default() -> Self {
        let c = UnloadedConfig::default();
        UnloadedSection {
            cruise_kpa: 250.0,
            target_tip_pitch_deg: c.target_tip_pitch_deg,
            root_pitch_deg: c.root_pitch_deg,
            tol_deg: c.tol_deg,
            max_iterations: c.max_iterations,
            model: ModelKind::Projection,
            initialization: InitKind::ReverseLoad,
        }
    }
}

impl UnloadedSection {
    pub fn to_config(&self) -> UnloadedConfig {
        UnloadedConfig {
            target_tip_pitch_deg: self.target_tip_pitch_deg,
            root_pitch_deg: self.root_pitch_deg,
            tol_deg: self.tol_deg,
            max_iterations: self.max_iterations,
            model: match self.model {
                ModelKind::Linear => ResponseModel::Linear,
                ModelKind::Projection => ResponseModel::PressureProjection,
            },
            initialization: match self.initialization {
                InitKind::ReverseLoad => Initialization::ReverseLoad,
                InitKind::ReverseStrain => Initialization::ReverseStrain,
            },
        }
    }

    pub fn cruise(&self) -> LoadCase {
        LoadCase::new("cruise", self.cruise_kpa * 1e3)
    }
}

/// Node arrays `[nx, ny]` swept over the rectangular plate of `[mesh]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub grids: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThicknessSection {
    pub rows: Vec<ThicknessRowConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThicknessRowConfig {
    pub layers: usize,
    pub ply_thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElementSection {
    /// Enables `h^2 / (h^2 + alpha t^2)` scaling of the shear stiffness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shear_stabilization_alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    #[default]
    Chord,
    Rotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub pitch_measure: MeasureKind,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            pitch_measure: MeasureKind::Chord,
        }
    }
}

impl OutputSection {
    pub fn measure(&self) -> PitchMeasure {
        match self.pitch_measure {
            MeasureKind::Chord => PitchMeasure::ChordDeflection,
            MeasureKind::Rotation => PitchMeasure::RotationDofs,
        }
    }
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {msg}"))
}

fn mesh_section<T: serde::de::DeserializeOwned>(body: toml::Table) -> Result<(), CliError> {
    serde_path_to_error::deserialize::<_, T>(body)
        .map(|_| ())
        .map_err(|e| invalid(&format!("mesh.{}", e.path()), e.into_inner().to_string().trim_end()))
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be a positive number, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Validation(e.message().to_string()))?;
        // the tagged mesh enum hides inner field paths, so check it on its own first
        if let Some(toml::Value::Table(mesh)) = table.get("mesh") {
            let mut body = mesh.clone();
            match body.remove("kind") {
                Some(toml::Value::String(kind)) => match kind.as_str() {
                    "rect" => mesh_section::<RectMesh>(body)?,
                    "blade" => mesh_section::<BladeMesh>(body)?,
                    "file" => mesh_section::<FileMesh>(body)?,
                    other => {
                        return Err(invalid(
                            "mesh.kind",
                            format!("expected `rect`, `blade` or `file`, got `{other}`"),
                        ))
                    }
                },
                _ => return Err(invalid("mesh.kind", "must be one of `rect`, `blade`, `file`")),
            }
        }
        serde_path_to_error::deserialize(table).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.into_inner().to_string();
            if path == "." {
                CliError::Validation(msg)
            } else {
                CliError::Validation(format!("{path}: {msg}"))
            }
        })
    }

    /// Reads a config file and resolves a relative mesh path against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let MeshConfig::File(FileMesh { path: mesh_path, .. }) = &mut cfg.mesh {
            if mesh_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *mesh_path = dir.join(&*mesh_path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks the sections every command relies on.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.mesh {
            MeshConfig::Rect(RectMesh {
                length, width, nx, ny, ..
            }) => {
                positive("mesh.length", *length)?;
                positive("mesh.width", *width)?;
                if *nx < 2 {
                    return Err(invalid("mesh.nx", "need at least 2 nodes"));
                }
                if *ny < 2 {
                    return Err(invalid("mesh.ny", "need at least 2 nodes"));
                }
            }
            MeshConfig::Blade(BladeMesh {
                diameter,
                hub_diameter,
                expanded_area_ratio,
                blade_count,
                elements,
                ..
            }) => {
                positive("mesh.diameter", *diameter)?;
                positive("mesh.hub_diameter", *hub_diameter)?;
                positive("mesh.expanded_area_ratio", *expanded_area_ratio)?;
                if *blade_count < 2 {
                    return Err(invalid("mesh.blade_count", "need at least 2 blades"));
                }
                if *elements < 8 {
                    return Err(invalid("mesh.elements", "need at least 8 elements"));
                }
            }
            MeshConfig::File(FileMesh { path, .. }) => {
                if path.as_os_str().is_empty() {
                    return Err(invalid("mesh.path", "must not be empty"));
                }
            }
        }
        self.material().map_err(|e| invalid("material", e))?;
        if let Some(l) = &self.layup {
            if l.angles_deg.is_empty() {
                return Err(invalid("layup.angles_deg", "needs at least one ply"));
            }
            if let Some((i, a)) = l.angles_deg.iter().enumerate().find(|(_, a)| !a.is_finite()) {
                return Err(invalid(
                    &format!("layup.angles_deg[{i}]"),
                    format!("not a finite angle: {a}"),
                ));
            }
            if let Some(t) = l.ply_thickness {
                positive("layup.ply_thickness", t)?;
            }
        }
        if !self.load.pressure.is_finite() {
            return Err(invalid("load.pressure", "must be finite"));
        }
        if let Some(s) = &self.schedule {
            for (i, r) in s.rows.iter().enumerate() {
                let p = format!("schedule.rows[{i}]");
                for (k, v) in [
                    ("pressure_kpa", r.pressure_kpa),
                    ("delta_kpa", r.delta_kpa),
                    ("pd_ratio", r.pd_ratio),
                    ("phi_deg", r.phi_deg),
                    ("delta_phi_deg", r.delta_phi_deg),
                ] {
                    if !v.is_finite() {
                        return Err(invalid(&format!("{p}.{k}"), "must be finite"));
                    }
                }
                if !(r.weight.is_finite() && r.weight >= 0.0) {
                    return Err(invalid(
                        &format!("{p}.weight"),
                        format!("must be >= 0, got {}", r.weight),
                    ));
                }
            }
            self.schedule_model().map_err(|e| invalid("schedule.rows", e))?;
        }
        let ga = &self.ga;
        if ga.layers == 0 || !ga.layers.is_multiple_of(2) {
            return Err(invalid(
                "ga.layers",
                format!("must be even and non-zero, got {}", ga.layers),
            ));
        }
        if let Some(t) = ga.ply_thickness {
            positive("ga.ply_thickness", t)?;
        }
        ga.to_config().validate().map_err(|e| invalid("ga", e))?;
        ga.domain.to_domain().validate().map_err(|e| invalid("ga.domain", e))?;
        if let Some(p) = &ga.strain_penalty {
            positive("ga.strain_penalty.fiber", p.fiber)?;
            positive("ga.strain_penalty.transverse", p.transverse)?;
            positive("ga.strain_penalty.shear", p.shear)?;
            positive("ga.strain_penalty.scale", p.scale)?;
        }
        if let Some(u) = &self.unloaded {
            if !u.cruise_kpa.is_finite() {
                return Err(invalid("unloaded.cruise_kpa", "must be finite"));
            }
            u.to_config().validate().map_err(|e| invalid("unloaded", e))?;
        }
        if let Some(c) = &self.converge {
            if c.grids.is_empty() {
                return Err(invalid("converge.grids", "needs at least one node array"));
            }
            for (i, g) in c.grids.iter().enumerate() {
                if g[0] < 2 || g[1] < 2 {
                    return Err(invalid(
                        &format!("converge.grids[{i}]"),
                        "need at least 2 nodes per direction",
                    ));
                }
            }
        }
        if let Some(t) = &self.thickness_study {
            if t.rows.is_empty() {
                return Err(invalid("thickness_study.rows", "needs at least one row"));
            }
            for (i, r) in t.rows.iter().enumerate() {
                if r.layers == 0 || r.layers % 2 != 0 {
                    return Err(invalid(
                        &format!("thickness_study.rows[{i}].layers"),
                        format!("must be even and non-zero, got {}", r.layers),
                    ));
                }
                positive(&format!("thickness_study.rows[{i}].ply_thickness"), r.ply_thickness)?;
            }
        }
        if let Some(a) = self.element.shear_stabilization_alpha {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid(
                    "element.shear_stabilization_alpha",
                    format!("must be >= 0, got {a}"),
                ));
            }
        }
        Ok(())
    }

    pub fn material(&self) -> shapeprop::Result<Material> {
        let m = &self.material;
        Material::new(m.e1, m.e2, m.g12, m.g23, m.nu12, m.nu23, m.ply_thickness)
    }

    pub fn build_mesh(&self) -> Result<Mesh, CliError> {
        let mesh = match &self.mesh {
            MeshConfig::Rect(RectMesh {
                length,
                width,
                nx,
                ny,
                diagonal,
            }) => {
                let d = match diagonal {
                    DiagonalKind::Falling => Diagonal::Falling,
                    DiagonalKind::Rising => Diagonal::Rising,
                };
                gen_rect_mesh_with(*length, *width, *nx, *ny, d).map_err(|e| invalid("mesh", e))?
            }
            MeshConfig::Blade(BladeMesh {
                diameter,
                hub_diameter,
                expanded_area_ratio,
                blade_count,
                elements,
                outline,
            }) => gen_blade_mesh(&PlanformSpec {
                diameter: *diameter,
                hub_diameter: *hub_diameter,
                expanded_area_ratio: *expanded_area_ratio,
                blade_count: *blade_count,
                target_element_count: *elements,
                outline: match outline {
                    OutlineKind::Symmetric => Outline::Symmetric,
                    OutlineKind::Skewed => Outline::Skewed,
                },
            })
            .map_err(|e| invalid("mesh", e))?,
            MeshConfig::File(FileMesh { path, reorient }) => load_mesh(path, LoadOptions { reorient: *reorient })
                .map_err(|e| invalid("mesh.path", format!("{}: {e}", path.display())))?,
        };
        if mesh.clamped_nodes().is_empty() {
            return Err(invalid("mesh", "no clamped nodes; the plate would be free to move"));
        }
        Ok(mesh)
    }

    pub fn element_options(&self) -> ElementOptions {
        ElementOptions {
            stabilization: self.element.shear_stabilization_alpha.map(|alpha| ShearStabilization {
                alpha,
                thickness: self.layup().ok().map(|l| l.total_thickness()).unwrap_or(0.0),
            }),
        }
    }

    pub fn layup(&self) -> Result<Layup, CliError> {
        let l = self
            .layup
            .as_ref()
            .ok_or_else(|| invalid("layup", "section is required"))?;
        let material = self.material().map_err(|e| invalid("material", e))?;
        let t = l.ply_thickness.unwrap_or(material.ply_thickness);
        Layup::from_degrees(&l.angles_deg, t, material, l.symmetric).map_err(|e| invalid("layup", e))
    }

    fn schedule_model(&self) -> shapeprop::Result<PitchSchedule> {
        let rows = self.schedule.as_ref().map(|s| s.rows.as_slice()).unwrap_or(&[]);
        PitchSchedule::new(
            rows.iter()
                .map(|r| ScheduleEntry {
                    weight: r.weight,
                    ..ScheduleEntry::from_table(r.pressure_kpa, r.delta_kpa, r.pd_ratio, r.phi_deg, r.delta_phi_deg)
                })
                .collect(),
        )
    }

    pub fn schedule(&self) -> Result<PitchSchedule, CliError> {
        if self.schedule.is_none() {
            return Err(invalid("schedule", "section is required"));
        }
        self.schedule_model().map_err(|e| invalid("schedule.rows", e))
    }

    pub fn ga_ply_thickness(&self) -> f64 {
        self.ga.ply_thickness.unwrap_or(self.material.ply_thickness)
    }

    pub fn thickness_rows(&self) -> Option<Vec<ThicknessRow>> {
        self.thickness_study.as_ref().map(|t| {
            t.rows
                .iter()
                .map(|r| ThicknessRow {
                    layers: r.layers,
                    ply_thickness: r.ply_thickness,
                })
                .collect()
        })
    }
}
