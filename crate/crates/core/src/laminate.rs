//! Classical lamination theory.
//!
//! Turns ply-level orthotropic constants and a stacking sequence into the
//! laminate constitutive blocks used by the plate element:
//!
//! ```text
//! [N]   [A B] [eps  ]
//! [M] = [B D] [kappa]        Q = E gamma,  E = kappa_s * sum(G_k (z_k - z_{k-1}))
//! ```
//!
//! Angles are radians internally, measured counter-clockwise from the x axis
//! toward y, and reduced into `[0, pi)`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Matrix6, Vector3};

use crate::error::{Error, Result};

/// Shear correction factor of first-order shear deformation theory.
pub const SHEAR_CORRECTION: f64 = 5.0 / 6.0;

/// Orthotropic lamina constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub e1: f64,
    pub e2: f64,
    pub g12: f64,
    /// Transverse shear modulus in the 2-3 plane. Derived from `e2` and `nu23`
    /// when absent.
    pub g23: Option<f64>,
    pub nu12: f64,
    pub nu23: f64,
    pub ply_thickness: f64,
}

impl Material {
    pub fn new(e1: f64, e2: f64, g12: f64, g23: Option<f64>, nu12: f64, nu23: f64, ply_thickness: f64) -> Result<Self> {
        let m = Material {
            e1,
            e2,
            g12,
            g23,
            nu12,
            nu23,
            ply_thickness,
        };
        m.validate()?;
        Ok(m)
    }

    /// AS4/3501-6 carbon/epoxy prepreg with a 125 um nominal ply.
    pub fn as4_3501_6() -> Self {
        Material {
            e1: 126.0e9,
            e2: 11.0e9,
            g12: 6.6e9,
            g23: None,
            nu12: 0.28,
            nu23: 0.4,
            ply_thickness: 125.0e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("e1", self.e1),
            ("e2", self.e2),
            ("g12", self.g12),
            ("ply_thickness", self.ply_thickness),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidMaterial(format!("{name} must be > 0, got {v}")));
            }
        }
        if let Some(g23) = self.g23 {
            if !(g23.is_finite() && g23 > 0.0) {
                return Err(Error::InvalidMaterial(format!("g23 must be > 0, got {g23}")));
            }
        } else if !(self.nu23 > -1.0 && self.nu23.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "nu23 = {} cannot produce a transverse shear modulus",
                self.nu23
            )));
        }
        if !(self.nu12 > 0.0 && self.nu12 < 0.5) {
            return Err(Error::InvalidMaterial(format!(
                "nu12 must lie in (0, 0.5), got {}",
                self.nu12
            )));
        }
        if self.denominator() <= 0.0 {
            return Err(Error::InvalidMaterial("1 - nu12*nu21 must be positive".into()));
        }
        Ok(())
    }

    pub fn nu21(&self) -> f64 {
        self.nu12 * self.e2 / self.e1
    }

    fn denominator(&self) -> f64 {
        1.0 - self.nu12 * self.nu21()
    }

    /// In-plane shear modulus in the 1-3 plane (transversely isotropic: equal to G12).
    pub fn g13(&self) -> f64 {
        self.g12
    }

    pub fn g23(&self) -> f64 {
        self.g23.unwrap_or_else(|| self.e2 / (2.0 * (1.0 + self.nu23)))
    }
}

/// Plane-stress reduced stiffness in material axes (Pa).
///
/// Accepts `nu12 = 0` (the decoupled limit) even though [`Material::validate`]
/// rejects it, so only the denominator is checked here.
pub fn reduced_stiffness(material: &Material) -> Result<Matrix3<f64>> {
    let den = 1.0 - material.nu12 * material.nu21();
    if !(den > 0.0) || !(material.e1 > 0.0) || !(material.e2 > 0.0) || !(material.g12 > 0.0) {
        return Err(Error::InvalidMaterial(format!(
            "non-physical constants (1 - nu12*nu21 = {den})"
        )));
    }
    let q11 = material.e1 / den;
    let q22 = material.e2 / den;
    let q12 = material.nu12 * material.e2 / den;
    Ok(Matrix3::new(
        q11,
        q12,
        0.0, //
        q12,
        q22,
        0.0, //
        0.0,
        0.0,
        material.g12,
    ))
}

/// Reduces an angle into `[0, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    // rem_euclid can return PI itself for tiny negative inputs
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Engineering-strain transformation from laminate axes to ply axes:
/// `eps_12 = T * eps_xy`.
fn strain_transform(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        c * c,
        s * s,
        c * s,
        s * s,
        c * c,
        -c * s,
        -2.0 * c * s,
        2.0 * c * s,
        c * c - s * s,
    )
}

/// Rotates a plane-stress stiffness by the fiber angle `theta`:
/// `Qbar = T^T Q T` with `T` the engineering-strain transformation.
pub fn rotate_stiffness(q: &Matrix3<f64>, theta: f64) -> Matrix3<f64> {
    let t = strain_transform(theta);
    let qbar = t.transpose() * q * t;
    // symmetrize away round-off
    (qbar + qbar.transpose()) * 0.5
}

/// Transverse shear stiffness `[[Q55, Q45], [Q45, Q44]]` acting on
/// `[gamma_xz, gamma_yz]`.
pub fn rotate_shear_stiffness(g13: f64, g23: f64, theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    let q55 = g13 * c * c + g23 * s * s;
    let q44 = g13 * s * s + g23 * c * c;
    let q45 = (g13 - g23) * c * s;
    Matrix2::new(q55, q45, q45, q44)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ply {
    /// Fiber angle in radians, in `[0, pi)`.
    pub angle: f64,
    pub thickness: f64,
    pub material: Material,
}

impl Ply {
    pub fn new(angle: f64, thickness: f64, material: Material) -> Self {
        Ply {
            angle: normalize_angle(angle),
            thickness,
            material,
        }
    }

    pub fn from_degrees(angle_deg: f64, thickness: f64, material: Material) -> Self {
        Ply::new(angle_deg.to_radians(), thickness, material)
    }
}

/// Stacking sequence, listed from the outer surface toward the mid-plane when
/// `symmetric` is set, or bottom-to-top otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Layup {
    plies: Vec<Ply>,
    symmetric: bool,
}

impl Layup {
    pub fn new(plies: Vec<Ply>, symmetric: bool) -> Result<Self> {
        if plies.is_empty() {
            return Err(Error::InvalidLayup("layup has no plies".into()));
        }
        for (i, p) in plies.iter().enumerate() {
            if !(p.thickness.is_finite() && p.thickness > 0.0) {
                return Err(Error::InvalidLayup(format!(
                    "ply {i} has non-positive thickness {}",
                    p.thickness
                )));
            }
            if !p.angle.is_finite() {
                return Err(Error::InvalidLayup(format!("ply {i} has non-finite angle")));
            }
            p.material.validate()?;
        }
        let plies = plies
            .into_iter()
            .map(|p| Ply {
                angle: normalize_angle(p.angle),
                ..p
            })
            .collect();
        Ok(Layup { plies, symmetric })
    }

    /// Uniform-thickness layup from a list of angles in degrees.
    pub fn from_degrees(angles_deg: &[f64], thickness: f64, material: Material, symmetric: bool) -> Result<Self> {
        let plies = angles_deg
            .iter()
            .map(|&a| Ply::from_degrees(a, thickness, material))
            .collect();
        Layup::new(plies, symmetric)
    }

    /// The plies as declared (the half stack for a symmetric layup).
    pub fn plies(&self) -> &[Ply] {
        &self.plies
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Full bottom-to-top stack. A symmetric layup is mirrored about the mid-plane.
    pub fn expanded(&self) -> Vec<Ply> {
        if self.symmetric {
            let mut full = self.plies.clone();
            full.extend(self.plies.iter().rev().copied());
            full
        } else {
            self.plies.clone()
        }
    }

    pub fn total_thickness(&self) -> f64 {
        self.expanded().iter().map(|p| p.thickness).sum()
    }

    /// Ply interface coordinates `z_0 < z_1 < ... < z_n`, referenced to the mid-plane.
    pub fn z_coordinates(&self) -> Vec<f64> {
        let full = self.expanded();
        let h: f64 = full.iter().map(|p| p.thickness).sum();
        let mut z = Vec::with_capacity(full.len() + 1);
        let mut acc = -0.5 * h;
        z.push(acc);
        for p in &full {
            acc += p.thickness;
            z.push(acc);
        }
        // pin the top surface exactly
        if let Some(last) = z.last_mut() {
            *last = 0.5 * h;
        }
        z
    }

    pub fn angles_degrees(&self) -> Vec<f64> {
        self.plies.iter().map(|p| p.angle.to_degrees()).collect()
    }

    /// Same sequence with every thickness multiplied by `factor`.
    pub fn scaled_thickness(&self, factor: f64) -> Result<Self> {
        let plies = self
            .plies
            .iter()
            .map(|p| Ply {
                thickness: p.thickness * factor,
                ..*p
            })
            .collect();
        Layup::new(plies, self.symmetric)
    }

    /// Mirror image about the x axis (every angle negated).
    pub fn mirrored(&self) -> Self {
        let plies = self
            .plies
            .iter()
            .map(|p| Ply {
                angle: normalize_angle(-p.angle),
                ..*p
            })
            .collect();
        Layup {
            plies,
            symmetric: self.symmetric,
        }
    }
}

/// Membrane, coupling, bending and transverse shear stiffness of a laminate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaminateStiffness {
    pub a_mat: Matrix3<f64>,
    pub b_mat: Matrix3<f64>,
    pub d_mat: Matrix3<f64>,
    pub e_mat: Matrix2<f64>,
}

impl LaminateStiffness {
    /// The 6x6 `[[A, B], [B, D]]` block matrix.
    pub fn abd(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.a_mat);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.b_mat);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&self.b_mat);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.d_mat);
        m
    }

    /// True when B is exactly zero, so membrane and bending decouple.
    pub fn is_uncoupled(&self) -> bool {
        self.b_mat.iter().all(|&v| v == 0.0)
    }
}

pub fn build_stiffness(layup: &Layup) -> Result<LaminateStiffness> {
    let full = layup.expanded();
    let z = layup.z_coordinates();
    let mut a = Matrix3::zeros();
    let mut b = Matrix3::zeros();
    let mut d = Matrix3::zeros();
    let mut e = Matrix2::zeros();
    for (k, ply) in full.iter().enumerate() {
        let (z0, z1) = (z[k], z[k + 1]);
        let qbar = rotate_stiffness(&reduced_stiffness(&ply.material)?, ply.angle);
        a += qbar * (z1 - z0);
        b += qbar * (0.5 * (z1 * z1 - z0 * z0));
        d += qbar * ((z1 * z1 * z1 - z0 * z0 * z0) / 3.0);
        let g = rotate_shear_stiffness(ply.material.g13(), ply.material.g23(), ply.angle);
        e += g * (z1 - z0);
    }
    e *= SHEAR_CORRECTION;
    if layup.is_symmetric() {
        // the quadratic sums cancel pairwise; drop the round-off residue
        b = Matrix3::zeros();
    }
    Ok(LaminateStiffness {
        a_mat: a,
        b_mat: b,
        d_mat: d,
        e_mat: e,
    })
}

/// Force and moment resultants together with the strains that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressResultantState {
    pub n_vec: Vector3<f64>,
    pub m_vec: Vector3<f64>,
    pub eps_vec: Vector3<f64>,
    pub kappa_vec: Vector3<f64>,
}

pub fn laminate_response(stiff: &LaminateStiffness, eps: &Vector3<f64>, kappa: &Vector3<f64>) -> StressResultantState {
    StressResultantState {
        n_vec: stiff.a_mat * eps + stiff.b_mat * kappa,
        m_vec: stiff.b_mat * eps + stiff.d_mat * kappa,
        eps_vec: *eps,
        kappa_vec: *kappa,
    }
}

/// Strains in each ply's material axes at its top and bottom faces
/// (bottom-to-top order of the expanded stack).
pub fn ply_strains(layup: &Layup, eps: &Vector3<f64>, kappa: &Vector3<f64>) -> Vec<[Vector3<f64>; 2]> {
    let full = layup.expanded();
    let z = layup.z_coordinates();
    full.iter()
        .enumerate()
        .map(|(k, ply)| {
            let t = strain_transform(ply.angle);
            [t * (eps + kappa * z[k]), t * (eps + kappa * z[k + 1])]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn as4() -> Material {
        Material::as4_3501_6()
    }

    #[test]
    fn reduced_stiffness_as4() {
        let q = reduced_stiffness(&as4()).unwrap();
        // hand evaluation: nu21 = 0.28*11/126, den = 1 - 0.28*nu21
        let den = 1.0 - 0.28 * (0.28 * 11.0 / 126.0);
        assert_relative_eq!(q[(0, 0)], 126.0e9 / den, max_relative = 1e-14);
        assert_relative_eq!(q[(0, 0)] / 1e9, 126.868, epsilon = 1e-3);
        assert_relative_eq!(q[(1, 1)] / 1e9, 11.0758, epsilon = 1e-3);
        assert_relative_eq!(q[(0, 1)] / 1e9, 3.1012, epsilon = 1e-3);
        assert_eq!(q[(2, 2)], 6.6e9);
        assert_eq!(q[(0, 2)], 0.0);
        assert_eq!(q[(1, 2)], 0.0);
        assert_eq!(q, q.transpose());
    }

    #[test]
    fn reduced_stiffness_isotropic_and_decoupled() {
        let (e, nu) = (70e9, 0.3);
        let iso = Material {
            e1: e,
            e2: e,
            g12: e / (2.0 * (1.0 + nu)),
            g23: None,
            nu12: nu,
            nu23: nu,
            ply_thickness: 1e-3,
        };
        let q = reduced_stiffness(&iso).unwrap();
        assert_relative_eq!(q[(0, 0)], q[(1, 1)]);
        assert_relative_eq!(q[(0, 1)], nu * q[(0, 0)], max_relative = 1e-14);

        let decoupled = Material { nu12: 0.0, ..as4() };
        let q = reduced_stiffness(&decoupled).unwrap();
        assert_eq!(q[(0, 1)], 0.0);
        assert_eq!(q[(0, 0)], decoupled.e1);
        assert_eq!(q[(1, 1)], decoupled.e2);
    }

    #[test]
    fn reduced_stiffness_rejects_nonphysical() {
        let bad = Material {
            e1: 1e9,
            e2: 100e9,
            nu12: 0.45,
            ..as4()
        };
        assert!(reduced_stiffness(&bad).is_err());
        assert!(Material::new(-1.0, 11e9, 6.6e9, None, 0.28, 0.4, 1e-4).is_err());
        assert!(Material::new(126e9, 11e9, 6.6e9, None, 0.6, 0.4, 1e-4).is_err());
    }

    #[test]
    fn rotation_special_angles() {
        let q = reduced_stiffness(&as4()).unwrap();
        let q0 = rotate_stiffness(&q, 0.0);
        assert_relative_eq!(q0, q, max_relative = 1e-14);

        let q90 = rotate_stiffness(&q, PI / 2.0);
        assert_relative_eq!(q90[(0, 0)], q[(1, 1)], max_relative = 1e-12);
        assert_relative_eq!(q90[(1, 1)], q[(0, 0)], max_relative = 1e-12);
        assert_relative_eq!(q90[(0, 1)], q[(0, 1)], max_relative = 1e-12);
        assert!(q90[(0, 2)].abs() < 1e-6 * q[(0, 0)]);
        assert!(q90[(1, 2)].abs() < 1e-6 * q[(0, 0)]);
    }

    #[test]
    fn rotation_45_coupling_terms_coincide() {
        let q = reduced_stiffness(&as4()).unwrap();
        let q45 = rotate_stiffness(&q, PI / 4.0);
        // closed form at 45 deg: Q16 = Q26 = (Q11 - Q22)/4
        let expected = (q[(0, 0)] - q[(1, 1)]) / 4.0;
        assert_relative_eq!(q45[(0, 2)], q45[(1, 2)], max_relative = 1e-12);
        assert_relative_eq!(q45[(0, 2)], expected, max_relative = 1e-12);
    }

    #[test]
    fn rotation_matches_closed_form_expansion() {
        let q = reduced_stiffness(&as4()).unwrap();
        let (q11, q22, q12, q66) = (q[(0, 0)], q[(1, 1)], q[(0, 1)], q[(2, 2)]);
        let th = 0.3_f64;
        let (s, c) = th.sin_cos();
        let qb = rotate_stiffness(&q, th);
        let qb11 = q11 * c.powi(4) + 2.0 * (q12 + 2.0 * q66) * s * s * c * c + q22 * s.powi(4);
        let qb16 = (q11 - q12 - 2.0 * q66) * s * c.powi(3) + (q12 - q22 + 2.0 * q66) * s.powi(3) * c;
        let qb66 = (q11 + q22 - 2.0 * q12 - 2.0 * q66) * s * s * c * c + q66 * (s.powi(4) + c.powi(4));
        assert_relative_eq!(qb[(0, 0)], qb11, max_relative = 1e-12);
        assert_relative_eq!(qb[(0, 2)], qb16, max_relative = 1e-12);
        assert_relative_eq!(qb[(2, 2)], qb66, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_layup_has_zero_coupling() {
        let l = Layup::from_degrees(&[10.0, 55.0, -30.0], 1e-4, as4(), true).unwrap();
        let s = build_stiffness(&l).unwrap();
        assert_eq!(s.b_mat, Matrix3::zeros());
        assert_eq!(l.expanded().len(), 6);
    }

    #[test]
    fn single_ply_bending() {
        let t = 2e-3;
        let l = Layup::from_degrees(&[0.0], t, as4(), false).unwrap();
        let s = build_stiffness(&l).unwrap();
        let q = reduced_stiffness(&as4()).unwrap();
        assert_relative_eq!(s.d_mat, q * (t * t * t / 12.0), max_relative = 1e-12);
        assert_relative_eq!(s.a_mat, q * t, max_relative = 1e-12);
        assert!(s.b_mat.norm() < 1e-9 * s.a_mat.norm());
    }

    #[test]
    fn forty_degree_plate_regression() {
        // 24 x 125 um plies at 40 deg (3 mm plate)
        let l = Layup::from_degrees(&[40.0; 24], 125e-6, as4(), false).unwrap();
        let s = build_stiffness(&l).unwrap();
        let q = rotate_stiffness(&reduced_stiffness(&as4()).unwrap(), 40f64.to_radians());
        let h: f64 = 3e-3;
        // all plies share one angle, so D = Qbar h^3 / 12
        assert_relative_eq!(s.d_mat, q * (h.powi(3) / 12.0), max_relative = 1e-10);
        assert!(s.d_mat[(0, 2)] > 0.0 && s.d_mat[(1, 2)] > 0.0);
        // frozen values (N m)
        assert_relative_eq!(s.d_mat[(0, 0)], 120.339_77, epsilon = 1e-4);
        assert_relative_eq!(s.d_mat[(0, 2)], 74.276_93, epsilon = 1e-4);
        assert_relative_eq!(s.d_mat[(1, 2)], 54.010_63, epsilon = 1e-4);
    }

    #[test]
    fn response_extracts_columns() {
        let l = Layup::from_degrees(&[40.0; 24], 125e-6, as4(), true).unwrap();
        let s = build_stiffness(&l).unwrap();
        let zero = laminate_response(&s, &Vector3::zeros(), &Vector3::zeros());
        assert_eq!(zero.n_vec, Vector3::zeros());
        assert_eq!(zero.m_vec, Vector3::zeros());

        let r = laminate_response(&s, &Vector3::zeros(), &Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(r.m_vec, s.d_mat.column(0).into_owned());

        let twist = laminate_response(&s, &Vector3::zeros(), &Vector3::new(0.0, 0.0, 0.7));
        assert_eq!(twist.n_vec, Vector3::zeros());
        assert_relative_eq!(twist.m_vec[0], s.d_mat[(0, 2)] * 0.7);
    }

    #[test]
    fn transverse_shear_block() {
        let l = Layup::from_degrees(&[0.0], 1e-3, as4(), false).unwrap();
        let s = build_stiffness(&l).unwrap();
        let g23 = 11e9 / (2.0 * 1.4);
        assert_relative_eq!(s.e_mat[(0, 0)], SHEAR_CORRECTION * 6.6e9 * 1e-3);
        assert_relative_eq!(s.e_mat[(1, 1)], SHEAR_CORRECTION * g23 * 1e-3);
        assert_eq!(s.e_mat[(0, 1)], 0.0);
    }

    #[test]
    fn angles_reduced_modulo_pi() {
        let p = Ply::from_degrees(-20.0, 1e-4, as4());
        assert_relative_eq!(p.angle.to_degrees(), 160.0, epsilon = 1e-12);
        let p = Ply::from_degrees(180.0, 1e-4, as4());
        assert_relative_eq!(p.angle, 0.0, epsilon = 1e-12);
        let p = Ply::from_degrees(106.4, 1e-4, as4());
        assert_relative_eq!(p.angle.to_degrees(), 106.4, epsilon = 1e-12);
    }

    #[test]
    fn invalid_layups() {
        assert!(Layup::new(vec![], true).is_err());
        let p = Ply::from_degrees(0.0, -1.0, as4());
        assert!(Layup::new(vec![p], false).is_err());
    }

    #[test]
    fn z_coordinates_are_centered() {
        let l = Layup::from_degrees(&[0.0, 45.0, 90.0], 1e-4, as4(), true).unwrap();
        let z = l.z_coordinates();
        assert_eq!(z.len(), 7);
        assert_relative_eq!(z[0], -z[6]);
        assert!(z.windows(2).all(|w| w[0] < w[1]));
        let full = l.expanded();
        let angles: Vec<f64> = full.iter().map(|p| p.angle).collect();
        let mut rev = angles.clone();
        rev.reverse();
        assert_eq!(angles, rev);
    }

    #[test]
    fn ply_strains_follow_curvature() {
        let l = Layup::from_degrees(&[0.0, 90.0], 1e-3, as4(), false).unwrap();
        let strains = ply_strains(&l, &Vector3::zeros(), &Vector3::new(2.0, 0.0, 0.0));
        // bottom face of the 0 deg ply at z = -1 mm
        assert_relative_eq!(strains[0][0][0], -2e-3, epsilon = 1e-15);
        // top face of the 90 deg ply: x strain appears along material axis 2
        assert_relative_eq!(strains[1][1][1], 2e-3, epsilon = 1e-15);
    }
}
