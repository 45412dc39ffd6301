//! Cell-based smoothed DSG3 triangle (CS-DSG3).
//!
//! Each 3-node triangle is split at its centroid `O` into three sub-triangles
//! `(O, n_i, n_{i+1})`. Strains are computed on every sub-triangle with the
//! discrete shear gap construction, the centroid dofs are eliminated as the
//! mean of the field-node dofs, and the three sub-triangle strain fields are
//! area-averaged over the element.
//!
//! Nodal dofs are ordered `[u, v, w, theta_x, theta_y]` with the kinematics
//!
//! ```text
//! eps   = [u,x ; v,y ; u,y + v,x]
//! kappa = [theta_x,x ; theta_y,y ; theta_x,y + theta_y,x]
//! gamma = [w,x + theta_x ; w,y + theta_y]
//! ```
//!
//! so in the thin limit `theta_x = -w,x` and `kappa_x = -w,xx`.

use nalgebra::{Matrix2, SMatrix, Vector2};

use crate::error::{Error, Result};
use crate::laminate::LaminateStiffness;
use crate::mesh::signed_double_area;

pub const DOFS_PER_NODE: usize = 5;
pub const ELEMENT_DOFS: usize = 3 * DOFS_PER_NODE;

pub type Strain3 = SMatrix<f64, 3, ELEMENT_DOFS>;
pub type Strain2 = SMatrix<f64, 2, ELEMENT_DOFS>;
pub type ElementMatrix = SMatrix<f64, ELEMENT_DOFS, ELEMENT_DOFS>;

const U: usize = 0;
const V: usize = 1;
const W: usize = 2;
const TX: usize = 3;
const TY: usize = 4;

/// Triangle geometry in the `(a, b, c, d)` edge-vector form:
/// `a = x2 - x1`, `b = y2 - y1`, `c = y3 - y1`, `d = x3 - x1`, so that the
/// signed area is `(a c - b d) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub nodes: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(nodes: [[f64; 2]; 3]) -> Result<Self> {
        let g = ElementGeometry { nodes };
        if !(g.area() > 0.0) {
            return Err(Error::SingularGeometry(format!(
                "triangle {:?} has non-positive area {}",
                nodes,
                g.area()
            )));
        }
        Ok(g)
    }

    pub fn a(&self) -> f64 {
        self.nodes[1][0] - self.nodes[0][0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[1][1] - self.nodes[0][1]
    }

    pub fn c(&self) -> f64 {
        self.nodes[2][1] - self.nodes[0][1]
    }

    pub fn d(&self) -> f64 {
        self.nodes[2][0] - self.nodes[0][0]
    }

    pub fn area(&self) -> f64 {
        0.5 * signed_double_area(self.nodes[0], self.nodes[1], self.nodes[2])
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = &self.nodes;
        [(n[0][0] + n[1][0] + n[2][0]) / 3.0, (n[0][1] + n[1][1] + n[2][1]) / 3.0]
    }

    pub fn longest_edge(&self) -> f64 {
        (0..3)
            .map(|k| {
                let (p, q) = (self.nodes[k], self.nodes[(k + 1) % 3]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Sub-triangle `(O, e1, e2)` with the element centroid as its first node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubTriangle {
    pub nodes: [[f64; 2]; 3],
    /// Local indices (0..3) of `e1` and `e2` within the parent element.
    pub field_nodes: [usize; 2],
}

impl SubTriangle {
    pub fn area(&self) -> f64 {
        0.5 * signed_double_area(self.nodes[0], self.nodes[1], self.nodes[2])
    }
}

/// Splits the element at its centroid into `(O, n1, n2)`, `(O, n2, n3)`, `(O, n3, n1)`.
pub fn subdivide(elem: &ElementGeometry) -> [SubTriangle; 3] {
    let o = elem.centroid();
    std::array::from_fn(|i| {
        let j = (i + 1) % 3;
        SubTriangle {
            nodes: [o, elem.nodes[i], elem.nodes[j]],
            field_nodes: [i, j],
        }
    })
}

/// DSG3 strain-displacement matrices of one triangle over its own three
/// nodes (15 columns, node-major).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dsg3Matrices {
    pub bp: Strain3,
    pub bb: Strain3,
    pub bs: Strain2,
}

pub fn dsg3_matrices(nodes: &[[f64; 2]; 3]) -> Result<Dsg3Matrices> {
    let g = ElementGeometry { nodes: *nodes };
    let (a, b, c, d) = (g.a(), g.b(), g.c(), g.d());
    let area = g.area();
    if !(area.abs() > 0.0) || !area.is_finite() {
        return Err(Error::SingularGeometry(format!("triangle {nodes:?} has zero area")));
    }
    let inv = 1.0 / (2.0 * area);
    // shape-function gradients
    let dx = [(b - c) * inv, c * inv, -b * inv];
    let dy = [(d - a) * inv, -d * inv, a * inv];

    let mut bp = Strain3::zeros();
    let mut bb = Strain3::zeros();
    for i in 0..3 {
        let o = DOFS_PER_NODE * i;
        bp[(0, o + U)] = dx[i];
        bp[(1, o + V)] = dy[i];
        bp[(2, o + U)] = dy[i];
        bp[(2, o + V)] = dx[i];

        bb[(0, o + TX)] = dx[i];
        bb[(1, o + TY)] = dy[i];
        bb[(2, o + TX)] = dy[i];
        bb[(2, o + TY)] = dx[i];
    }

    // shear gaps measured from node 1 along the edges 1-2 and 1-3
    let mut bs = Strain2::zeros();
    let (n1, n2, n3) = (0, DOFS_PER_NODE, 2 * DOFS_PER_NODE);
    let row_xz = [
        (n1 + W, b - c),
        (n1 + TX, area),
        (n2 + W, c),
        (n2 + TX, a * c / 2.0),
        (n2 + TY, b * c / 2.0),
        (n3 + W, -b),
        (n3 + TX, -b * d / 2.0),
        (n3 + TY, -b * c / 2.0),
    ];
    let row_yz = [
        (n1 + W, d - a),
        (n1 + TY, area),
        (n2 + W, -d),
        (n2 + TX, -a * d / 2.0),
        (n2 + TY, -b * d / 2.0),
        (n3 + W, a),
        (n3 + TX, a * d / 2.0),
        (n3 + TY, a * c / 2.0),
    ];
    for (col, v) in row_xz {
        bs[(0, col)] = v * inv;
    }
    for (col, v) in row_yz {
        bs[(1, col)] = v * inv;
    }
    Ok(Dsg3Matrices { bp, bb, bs })
}

/// Optional transverse-shear stabilization `h^2 / (h^2 + alpha t^2)` with `h`
/// the longest element edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearStabilization {
    pub alpha: f64,
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElementOptions {
    pub stabilization: Option<ShearStabilization>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedElementMatrices {
    pub bp: Strain3,
    pub bb: Strain3,
    pub bs: Strain2,
    pub k: ElementMatrix,
}

/// Maps a sub-triangle matrix over `(O, e1, e2)` onto the parent element's
/// nodes, eliminating the centroid dofs as the mean of the three field nodes.
fn condense_centroid<const R: usize>(
    sub: &SMatrix<f64, R, ELEMENT_DOFS>,
    field_nodes: [usize; 2],
) -> SMatrix<f64, R, ELEMENT_DOFS> {
    let mut out = SMatrix::<f64, R, ELEMENT_DOFS>::zeros();
    for r in 0..R {
        for k in 0..DOFS_PER_NODE {
            let centre = sub[(r, k)] / 3.0;
            for node in 0..3 {
                out[(r, DOFS_PER_NODE * node + k)] += centre;
            }
            out[(r, DOFS_PER_NODE * field_nodes[0] + k)] += sub[(r, DOFS_PER_NODE + k)];
            out[(r, DOFS_PER_NODE * field_nodes[1] + k)] += sub[(r, 2 * DOFS_PER_NODE + k)];
        }
    }
    out
}

/// Area-weighted smoothed strain matrices of one element.
pub fn smoothed_strain_matrices(elem: &ElementGeometry) -> Result<(Strain3, Strain3, Strain2)> {
    let area = elem.area();
    let mut bp = Strain3::zeros();
    let mut bb = Strain3::zeros();
    let mut bs = Strain2::zeros();
    for sub in subdivide(elem) {
        let m = dsg3_matrices(&sub.nodes)?;
        let w = sub.area() / area;
        bp += condense_centroid(&m.bp, sub.field_nodes) * w;
        bb += condense_centroid(&m.bb, sub.field_nodes) * w;
        bs += condense_centroid(&m.bs, sub.field_nodes) * w;
    }
    Ok((bp, bb, bs))
}

pub fn smooth_element(
    elem: &ElementGeometry,
    laminate: &LaminateStiffness,
    options: &ElementOptions,
) -> Result<SmoothedElementMatrices> {
    let (bp, bb, bs) = smoothed_strain_matrices(elem)?;
    let k = stiffness_from_strains(&bp, &bb, &bs, elem.area(), elem.longest_edge(), laminate, options);
    Ok(SmoothedElementMatrices { bp, bb, bs, k })
}

/// `K_e = A_e (Bp' A Bp + Bp' B Bb + Bb' B Bp + Bb' D Bb + Bs' E Bs)`.
pub fn stiffness_from_strains(
    bp: &Strain3,
    bb: &Strain3,
    bs: &Strain2,
    area: f64,
    longest_edge: f64,
    laminate: &LaminateStiffness,
    options: &ElementOptions,
) -> ElementMatrix {
    let mut e_mat: Matrix2<f64> = laminate.e_mat;
    if let Some(stab) = options.stabilization {
        let h2 = longest_edge * longest_edge;
        e_mat *= h2 / (h2 + stab.alpha * stab.thickness * stab.thickness);
    }
    let bpt = bp.transpose();
    let bbt = bb.transpose();
    let mut k: ElementMatrix = bpt * laminate.a_mat * bp + bbt * laminate.d_mat * bb;
    if !laminate.is_uncoupled() {
        let coupling = bpt * laminate.b_mat * bb;
        k += coupling + coupling.transpose();
    }
    k += bs.transpose() * e_mat * bs;
    k *= area;
    // exact symmetry regardless of round-off in the products
    (k + k.transpose()) * 0.5
}

/// Smoothed membrane strain, curvature and transverse shear strain of an
/// element for the given 15 nodal dofs.
pub fn element_strains(
    elem: &ElementGeometry,
    dofs: &SMatrix<f64, ELEMENT_DOFS, 1>,
) -> Result<(nalgebra::Vector3<f64>, nalgebra::Vector3<f64>, Vector2<f64>)> {
    let (bp, bb, bs) = smoothed_strain_matrices(elem)?;
    Ok((bp * dofs, bb * dofs, bs * dofs))
}
