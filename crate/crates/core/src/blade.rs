//! Blade-level response: tip pitch change, rake and the pitch-response curve.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem::{pressure_load, DisplacementField, ElementOptions, Factorization, PlateSolver};
use crate::laminate::{build_stiffness, Layup};
use crate::mesh::{Mesh, TipMarkers};

/// How the tip pitch change is read off a displacement field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PitchMeasure {
    /// `atan2(w_LE - w_TE, chord)` from the tip-marker deflections.
    #[default]
    ChordDeflection,
    /// Mean chordwise slope `-theta . e` of the rotation dofs at the two tip
    /// markers, with `e` the unit vector from trailing to leading edge.
    RotationDofs,
}

fn markers(mesh: &Mesh) -> Result<TipMarkers> {
    mesh.tip()
        .ok_or_else(|| Error::Config("mesh has no tip leading/trailing-edge markers".into()))
}

fn chord_vector(mesh: &Mesh, tip: TipMarkers) -> ([f64; 2], f64) {
    let le = mesh.nodes()[tip.leading];
    let te = mesh.nodes()[tip.trailing];
    let d = [le[0] - te[0], le[1] - te[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    ([d[0] / len, d[1] / len], len)
}

/// Tip pitch change in radians; positive when the leading edge moves up
/// relative to the trailing edge.
pub fn tip_pitch_change(mesh: &Mesh, disp: &DisplacementField) -> Result<f64> {
    tip_pitch_change_with(mesh, disp, PitchMeasure::ChordDeflection)
}

pub fn tip_pitch_change_with(mesh: &Mesh, disp: &DisplacementField, measure: PitchMeasure) -> Result<f64> {
    let tip = markers(mesh)?;
    let (e, chord) = chord_vector(mesh, tip);
    Ok(match measure {
        PitchMeasure::ChordDeflection => (disp.w(tip.leading) - disp.w(tip.trailing)).atan2(chord),
        PitchMeasure::RotationDofs => {
            let slope = |n: usize| {
                let t = disp.rotation(n);
                -(t[0] * e[0] + t[1] * e[1])
            };
            (0.5 * (slope(tip.leading) + slope(tip.trailing))).atan()
        }
    })
}

/// Mean transverse deflection of the two tip markers.
pub fn rake_deflection(mesh: &Mesh, disp: &DisplacementField) -> Result<f64> {
    let tip = markers(mesh)?;
    Ok(0.5 * (disp.w(tip.leading) + disp.w(tip.trailing)))
}

/// One operating point of a pitch schedule. Pressures in Pa, angles in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry {
    pub pressure: f64,
    pub delta_pressure: f64,
    pub pd_ratio: f64,
    pub phi_required: f64,
    pub delta_phi_required: f64,
    pub weight: f64,
}

impl ScheduleEntry {
    /// Entry from a table row in kPa and degrees, with `delta_phi` taken
    /// relative to the cruise pitch.
    pub fn from_table(pressure_kpa: f64, delta_kpa: f64, pd_ratio: f64, phi_deg: f64, delta_phi_deg: f64) -> Self {
        ScheduleEntry {
            pressure: pressure_kpa * 1e3,
            delta_pressure: delta_kpa * 1e3,
            pd_ratio,
            phi_required: phi_deg.to_radians(),
            delta_phi_required: delta_phi_deg.to_radians(),
            weight: 1.0,
        }
    }
}

/// Required pitch per operating point with one cruise entry at `delta P = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchSchedule {
    entries: Vec<ScheduleEntry>,
    cruise_index: usize,
}

impl PitchSchedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Result<Self> {
        let cruise: Vec<usize> = entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.delta_pressure == 0.0)
            .map(|(i, _)| i)
            .collect();
        if cruise.len() != 1 {
            return Err(Error::Config(format!(
                "schedule needs exactly one cruise row with delta P = 0, found {}",
                cruise.len()
            )));
        }
        let cruise_index = cruise[0];
        if entries[cruise_index].delta_phi_required != 0.0 {
            return Err(Error::Config("cruise row must require delta phi = 0".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            let vals = [
                e.pressure,
                e.delta_pressure,
                e.pd_ratio,
                e.phi_required,
                e.delta_phi_required,
                e.weight,
            ];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("schedule row {i} has a non-finite value")));
            }
            if e.weight < 0.0 {
                return Err(Error::Config(format!(
                    "schedule row {i} has negative weight {}",
                    e.weight
                )));
            }
        }
        if entries.len() < 2 {
            return Err(Error::Config("schedule needs at least one off-design row".into()));
        }
        let off_weight: f64 = entries
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != cruise_index)
            .map(|(_, e)| e.weight)
            .sum();
        if !(off_weight > 0.0) {
            return Err(Error::Config("off-design weights must not all be zero".into()));
        }
        Ok(PitchSchedule { entries, cruise_index })
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn cruise_index(&self) -> usize {
        self.cruise_index
    }

    pub fn cruise(&self) -> &ScheduleEntry {
        &self.entries[self.cruise_index]
    }

    pub fn off_design(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.entries
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.cruise_index)
            .map(|(_, e)| e)
    }

    pub fn with_weight(&self, index: usize, weight: f64) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries
            .get_mut(index)
            .ok_or_else(|| Error::Config(format!("no schedule row {index}")))?
            .weight = weight;
        PitchSchedule::new(entries)
    }
}

/// Achieved response at one schedule entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchPoint {
    pub delta_pressure: f64,
    pub delta_phi: f64,
    pub rake: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchResponse {
    pub points: Vec<PitchPoint>,
    /// Least-squares twist per unit pressure through the origin (rad/Pa).
    pub slope: f64,
}

impl PitchResponse {
    fn from_points(mut points: Vec<PitchPoint>) -> Self {
        points.sort_by(|a, b| a.delta_pressure.total_cmp(&b.delta_pressure));
        let sxx: f64 = points.iter().map(|p| p.delta_pressure * p.delta_pressure).sum();
        let sxy: f64 = points.iter().map(|p| p.delta_pressure * p.delta_phi).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        PitchResponse { points, slope }
    }

    /// Coefficient of determination of the fit through the origin.
    pub fn r_squared(&self) -> f64 {
        let ss_tot: f64 = self.points.iter().map(|p| p.delta_phi * p.delta_phi).sum();
        let ss_res: f64 = self
            .points
            .iter()
            .map(|p| (p.delta_phi - self.slope * p.delta_pressure).powi(2))
            .sum();
        if ss_tot == 0.0 {
            1.0
        } else {
            1.0 - ss_res / ss_tot
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("deltaP_kPa,dphi_deg,rake_mm\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{:.6},{:.6},{:.6}",
                p.delta_pressure / 1e3,
                p.delta_phi.to_degrees(),
                p.rake * 1e3
            );
        }
        s
    }
}

/// Response of a blade under unit uniform pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitResponse {
    /// Linearized twist per pascal, `(w_LE - w_TE) / chord` (rad/Pa).
    pub twist_slope: f64,
    /// Rake per pascal (m/Pa).
    pub rake_slope: f64,
    pub field: DisplacementField,
}

/// A meshed blade with a reusable solver context.
#[derive(Debug, Clone)]
pub struct BladeModel {
    solver: PlateSolver,
    unit_load: Vec<f64>,
    chord: f64,
    tip: TipMarkers,
}

impl BladeModel {
    pub fn new(mesh: &Mesh, options: ElementOptions) -> Result<Self> {
        let tip = markers(mesh)?;
        let (_, chord) = chord_vector(mesh, tip);
        Ok(BladeModel {
            solver: PlateSolver::new(mesh, options)?,
            unit_load: pressure_load(mesh, 1.0),
            chord,
            tip,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.solver.mesh()
    }

    pub fn solver(&self) -> &PlateSolver {
        &self.solver
    }

    pub fn tip_chord(&self) -> f64 {
        self.chord
    }

    pub fn factorize(&self, layup: &Layup) -> Result<Factorization> {
        self.solver.factorize(&build_stiffness(layup)?)
    }

    pub fn unit_response(&self, layup: &Layup) -> Result<UnitResponse> {
        let field = self.factorize(layup)?.solve(&self.unit_load)?;
        Ok(UnitResponse {
            twist_slope: (field.w(self.tip.leading) - field.w(self.tip.trailing)) / self.chord,
            rake_slope: 0.5 * (field.w(self.tip.leading) + field.w(self.tip.trailing)),
            field,
        })
    }

    /// Pitch change and rake at every schedule entry. One solve at unit
    /// pressure is scaled to each `delta P`.
    pub fn response_curve(
        &self,
        layup: &Layup,
        schedule: &PitchSchedule,
        measure: PitchMeasure,
    ) -> Result<PitchResponse> {
        let unit = self.unit_response(layup)?;
        let points = schedule
            .entries()
            .iter()
            .map(|e| {
                let field = unit.field.scaled(e.delta_pressure);
                Ok(PitchPoint {
                    delta_pressure: e.delta_pressure,
                    delta_phi: tip_pitch_change_with(self.mesh(), &field, measure)?,
                    rake: rake_deflection(self.mesh(), &field)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PitchResponse::from_points(points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::Material;
    use crate::mesh::gen_rect_mesh;
    use approx::assert_relative_eq;

    fn schedule() -> PitchSchedule {
        PitchSchedule::new(vec![
            ScheduleEntry::from_table(180.0, -70.0, 0.7, 12.56, -3.44),
            ScheduleEntry::from_table(205.0, -45.0, 0.8, 14.3, -1.7),
            ScheduleEntry::from_table(250.0, 0.0, 0.9, 16.0, 0.0),
            ScheduleEntry::from_table(270.0, 20.0, 1.0, 17.66, 1.66),
            ScheduleEntry::from_table(300.0, 50.0, 1.1, 19.3, 3.3),
        ])
        .unwrap()
    }

    fn field_with(mesh: &Mesh, f: impl Fn(usize, [f64; 2]) -> [f64; 5]) -> DisplacementField {
        DisplacementField::new(mesh.nodes().iter().enumerate().flat_map(|(i, &p)| f(i, p)).collect())
    }

    #[test]
    fn zero_field() {
        let m = gen_rect_mesh(0.4, 0.2, 5, 3).unwrap();
        let z = DisplacementField::new(vec![0.0; m.node_count() * 5]);
        assert_eq!(tip_pitch_change(&m, &z).unwrap(), 0.0);
        assert_eq!(rake_deflection(&m, &z).unwrap(), 0.0);
    }

    #[test]
    fn forty_five_degree_twist() {
        let m = gen_rect_mesh(0.4, 0.2, 5, 3).unwrap();
        let tip = m.tip().unwrap();
        let chord = m.tip_chord().unwrap();
        let f = field_with(&m, |i, _| {
            let w = if i == tip.leading { chord } else { 0.0 };
            [0.0, 0.0, w, 0.0, 0.0]
        });
        assert_relative_eq!(tip_pitch_change(&m, &f).unwrap(), std::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn pure_twist_has_no_rake_and_translation_no_twist() {
        let m = gen_rect_mesh(0.4, 0.2, 5, 3).unwrap();
        let twist = field_with(&m, |_, p| [0.0, 0.0, 0.01 * (p[1] - 0.1), 0.0, -0.01]);
        assert!(rake_deflection(&m, &twist).unwrap().abs() < 1e-15);
        let a = tip_pitch_change_with(&m, &twist, PitchMeasure::RotationDofs).unwrap();
        let b = tip_pitch_change(&m, &twist).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        let shifted = field_with(&m, |_, p| [0.0, 0.0, 0.01 * (p[1] - 0.1) + 0.3, 0.0, -0.01]);
        assert_relative_eq!(tip_pitch_change(&m, &shifted).unwrap(), b, max_relative = 1e-12);
    }

    #[test]
    fn missing_markers_is_config_error() {
        let m = gen_rect_mesh(0.4, 0.2, 5, 3).unwrap();
        let clamped = m.clamped_nodes().to_vec();
        let bare = m.with_markers(clamped, None).unwrap();
        let z = DisplacementField::new(vec![0.0; bare.node_count() * 5]);
        assert!(matches!(tip_pitch_change(&bare, &z), Err(Error::Config(_))));
        assert!(BladeModel::new(&bare, ElementOptions::default()).is_err());
    }

    #[test]
    fn schedule_validation() {
        let s = schedule();
        assert_eq!(s.cruise_index(), 2);
        assert_eq!(s.off_design().count(), 4);
        let mut rows = s.entries().to_vec();
        rows[0].delta_pressure = 0.0;
        assert!(PitchSchedule::new(rows).is_err());
        assert!(s.with_weight(1, -1.0).is_err());
        assert!(PitchSchedule::new(vec![*s.cruise()]).is_err());
    }

    #[test]
    fn response_curve_is_scaled_unit_solve() {
        let m = gen_rect_mesh(0.4, 0.2, 11, 6).unwrap();
        let model = BladeModel::new(&m, ElementOptions::default()).unwrap();
        let lay = |deg: f64| Layup::from_degrees(&[deg, deg + 10.0], 2.5e-3, Material::as4_3501_6(), true).unwrap();
        let r = model
            .response_curve(&lay(30.0), &schedule(), PitchMeasure::ChordDeflection)
            .unwrap();
        assert!(r.r_squared() > 0.9999);
        assert!(r.points.windows(2).all(|w| w[0].delta_pressure <= w[1].delta_pressure));
        let cruise = r.points.iter().find(|p| p.delta_pressure == 0.0).unwrap();
        assert_eq!(cruise.delta_phi, 0.0);
        let unit = model.unit_response(&lay(30.0)).unwrap();
        for p in &r.points {
            assert_relative_eq!(
                p.delta_phi,
                (unit.twist_slope * p.delta_pressure).atan(),
                max_relative = 1e-12
            );
        }
        assert!(r.to_csv().starts_with("deltaP_kPa,dphi_deg,rake_mm\n"));
    }
}
