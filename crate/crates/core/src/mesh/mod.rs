//! Three-node triangular meshes of flat plates and expanded blade outlines.

mod io;
mod planform;

use std::collections::HashMap;

pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh, LoadOptions};
pub use planform::{chord_shape, gen_blade_mesh, leading_fraction, Outline, PlanformSpec, TIP_STATION};

use crate::error::{Error, Result};

/// Leading- and trailing-edge nodes of the chord where tip pitch is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TipMarkers {
    pub leading: usize,
    pub trailing: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    clamped: Vec<usize>,
    tip: Option<TipMarkers>,
}

/// Twice the signed area of the triangle `(p0, p1, p2)`.
pub fn signed_double_area(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> f64 {
    (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])
}

impl Mesh {
    /// Builds a mesh, rejecting clockwise or degenerate elements.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        clamped: Vec<usize>,
        tip: Option<TipMarkers>,
    ) -> Result<Self> {
        Self::build(nodes, elements, clamped, tip, false)
    }

    /// Like [`Mesh::new`] but flips clockwise elements instead of rejecting them.
    pub fn new_reoriented(
        nodes: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        clamped: Vec<usize>,
        tip: Option<TipMarkers>,
    ) -> Result<Self> {
        Self::build(nodes, elements, clamped, tip, true)
    }

    fn build(
        nodes: Vec<[f64; 2]>,
        mut elements: Vec<[usize; 3]>,
        mut clamped: Vec<usize>,
        tip: Option<TipMarkers>,
        reorient: bool,
    ) -> Result<Self> {
        let n = nodes.len();
        if let Some(i) = nodes.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidMesh(format!("node {i} has non-finite coordinates")));
        }
        for (e, conn) in elements.iter_mut().enumerate() {
            if let Some(&bad) = conn.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} references node {bad} but the mesh has {n} nodes"
                )));
            }
            if conn[0] == conn[1] || conn[1] == conn[2] || conn[0] == conn[2] {
                return Err(Error::InvalidMesh(format!("element {e} repeats a node")));
            }
            let a2 = signed_double_area(nodes[conn[0]], nodes[conn[1]], nodes[conn[2]]);
            let scale = edge_scale(&nodes, conn);
            if a2.abs() <= 1e-14 * scale * scale {
                return Err(Error::InvalidMesh(format!("element {e} is degenerate")));
            }
            if a2 < 0.0 {
                if reorient {
                    conn.swap(1, 2);
                } else {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} is clockwise (nodes {} {} {})",
                        conn[0], conn[1], conn[2]
                    )));
                }
            }
        }
        if let Some(&bad) = clamped.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidMesh(format!(
                "clamped node {bad} out of range ({n} nodes)"
            )));
        }
        clamped.sort_unstable();
        clamped.dedup();
        if let Some(t) = tip {
            if t.leading >= n || t.trailing >= n {
                return Err(Error::InvalidMesh("tip marker out of range".into()));
            }
            if t.leading == t.trailing {
                return Err(Error::InvalidMesh("tip leading and trailing nodes coincide".into()));
            }
        }
        Ok(Mesh {
            nodes,
            elements,
            clamped,
            tip,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn clamped_nodes(&self) -> &[usize] {
        &self.clamped
    }

    pub fn tip(&self) -> Option<TipMarkers> {
        self.tip
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Distance between the tip markers.
    pub fn tip_chord(&self) -> Option<f64> {
        self.tip.map(|t| {
            let (a, b) = (self.nodes[t.leading], self.nodes[t.trailing]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 3] {
        let c = self.elements[e];
        [self.nodes[c[0]], self.nodes[c[1]], self.nodes[c[2]]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [p0, p1, p2] = self.element_coords(e);
        0.5 * signed_double_area(p0, p1, p2)
    }

    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        let [p0, p1, p2] = self.element_coords(e);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Replaces the clamped set and tip markers, re-running validation.
    pub fn with_markers(self, clamped: Vec<usize>, tip: Option<TipMarkers>) -> Result<Self> {
        Mesh::new(self.nodes, self.elements, clamped, tip)
    }

    /// Node-to-node adjacency through shared elements (sorted, no self loops).
    pub fn node_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for conn in &self.elements {
            for &a in conn {
                for &b in conn {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Structural checks applied to every generated mesh: positive areas, no
    /// coincident nodes, and a conforming, consistently oriented edge set
    /// (interior edges shared by exactly two triangles).
    pub fn check_quality(&self) -> Result<()> {
        for e in 0..self.elements.len() {
            if !(self.element_area(e) > 0.0) {
                return Err(Error::InvalidMesh(format!("element {e} has non-positive area")));
            }
        }
        let mut sorted: Vec<(usize, [f64; 2])> = self.nodes.iter().copied().enumerate().collect();
        sorted.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]));
        for i in 0..sorted.len() {
            for j in (i + 1)..sorted.len() {
                if sorted[j].1[0] - sorted[i].1[0] > 1e-12 {
                    break;
                }
                if (sorted[j].1[1] - sorted[i].1[1]).abs() <= 1e-12 {
                    return Err(Error::InvalidMesh(format!(
                        "nodes {} and {} coincide",
                        sorted[i].0, sorted[j].0
                    )));
                }
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, c) in self.elements.iter().enumerate() {
            for k in 0..3 {
                let key = (c[k], c[(k + 1) % 3]);
                if let Some(other) = directed.insert(key, e) {
                    return Err(Error::InvalidMesh(format!(
                        "edge {:?} traversed in the same direction by elements {other} and {e}",
                        key
                    )));
                }
            }
        }
        // hanging nodes: a boundary node strictly inside another boundary edge
        let boundary = self.boundary_edges();
        let mut bnodes: Vec<usize> = boundary.iter().flat_map(|&(a, b)| [a, b]).collect();
        bnodes.sort_unstable();
        bnodes.dedup();
        for &(a, b) in &boundary {
            let (pa, pb) = (self.nodes[a], self.nodes[b]);
            let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
            for &k in &bnodes {
                if k == a || k == b {
                    continue;
                }
                let pk = self.nodes[k];
                let t = ((pk[0] - pa[0]) * (pb[0] - pa[0]) + (pk[1] - pa[1]) * (pb[1] - pa[1])) / len2;
                let cross = signed_double_area(pa, pb, pk).abs() / len2.sqrt();
                if t > 1e-9 && t < 1.0 - 1e-9 && cross < 1e-12 {
                    return Err(Error::InvalidMesh(format!(
                        "node {k} hangs on boundary edge ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Undirected edges used by exactly one element.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for c in &self.elements {
            for k in 0..3 {
                let (a, b) = (c[k], c[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut edges: Vec<_> = count.into_iter().filter(|&(_, n)| n == 1).map(|(k, _)| k).collect();
        edges.sort_unstable();
        edges
    }
}

fn edge_scale(nodes: &[[f64; 2]], conn: &[usize; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let (a, b) = (nodes[conn[k]], nodes[conn[(k + 1) % 3]]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Direction of the diagonal splitting each grid cell into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Diagonal {
    /// From the cell's lower-left to its upper-right corner.
    Rising,
    /// From the cell's upper-left to its lower-right corner.
    #[default]
    Falling,
}

/// Structured `nx` x `ny` node grid over `[0, length] x [0, width]`, clamped
/// along `x = 0`. Tip markers sit at the two corners of the far edge, with the
/// leading edge on `y = width`.
pub fn gen_rect_mesh(length: f64, width: f64, nx: usize, ny: usize) -> Result<Mesh> {
    gen_rect_mesh_with(length, width, nx, ny, Diagonal::default())
}

pub fn gen_rect_mesh_with(length: f64, width: f64, nx: usize, ny: usize, diagonal: Diagonal) -> Result<Mesh> {
    if !(length > 0.0 && width > 0.0 && length.is_finite() && width.is_finite()) {
        return Err(Error::InvalidMesh(format!(
            "plate dimensions must be positive, got {length} x {width}"
        )));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidMesh(format!(
            "need at least 2 nodes per direction, got {nx} x {ny}"
        )));
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut nodes = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = if j == ny - 1 {
            width
        } else {
            width * j as f64 / (ny - 1) as f64
        };
        for i in 0..nx {
            let x = if i == nx - 1 {
                length
            } else {
                length * i as f64 / (nx - 1) as f64
            };
            nodes.push([x, y]);
        }
    }
    let mut elements = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (n00, n10, n01, n11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            match diagonal {
                Diagonal::Rising => {
                    elements.push([n00, n10, n11]);
                    elements.push([n00, n11, n01]);
                }
                Diagonal::Falling => {
                    elements.push([n00, n10, n01]);
                    elements.push([n10, n11, n01]);
                }
            }
        }
    }
    let clamped = (0..ny).map(|j| id(0, j)).collect();
    let tip = TipMarkers {
        leading: id(nx - 1, ny - 1),
        trailing: id(nx - 1, 0),
    };
    Mesh::new(nodes, elements, clamped, Some(tip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rect_counts() {
        let m = gen_rect_mesh(0.4, 0.2, 5, 5).unwrap();
        assert_eq!(m.node_count(), 25);
        assert_eq!(m.element_count(), 32);
        let m = gen_rect_mesh(0.4, 0.2, 80, 80).unwrap();
        assert_eq!(m.node_count(), 6400);
        assert_eq!(m.element_count(), 12482);
        assert_eq!(m.clamped_nodes().len(), 80);
        assert_relative_eq!(m.tip_chord().unwrap(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn rect_rejects_bad_input() {
        assert!(gen_rect_mesh(0.0, 0.2, 5, 5).is_err());
        assert!(gen_rect_mesh(0.4, -0.2, 5, 5).is_err());
        assert!(gen_rect_mesh(0.4, 0.2, 1, 5).is_err());
    }

    #[test]
    fn clockwise_rejected_unless_reoriented() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Mesh::new(nodes.clone(), vec![[0, 2, 1]], vec![0], None).is_err());
        let m = Mesh::new_reoriented(nodes, vec![[0, 2, 1]], vec![0], None).unwrap();
        assert!(m.element_area(0) > 0.0);
    }

    #[test]
    fn dangling_and_degenerate_rejected() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(Mesh::new(nodes.clone(), vec![[0, 1, 2]], vec![0], None).is_err());
        assert!(Mesh::new(nodes.clone(), vec![[0, 1, 9999]], vec![0], None).is_err());
        let tip = Some(TipMarkers {
            leading: 1,
            trailing: 1,
        });
        assert!(Mesh::new(nodes, vec![], vec![0], tip).is_err());
    }

    #[test]
    fn both_diagonals_tessellate() {
        for d in [Diagonal::Rising, Diagonal::Falling] {
            let m = gen_rect_mesh_with(0.4, 0.2, 7, 4, d).unwrap();
            m.check_quality().unwrap();
            assert_relative_eq!(m.total_area(), 0.08, max_relative = 1e-14);
            // perimeter edges only
            assert_eq!(m.boundary_edges().len(), 2 * (6 + 3));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn rect_grid_arithmetic(nx in 2usize..=100, ny in 2usize..=100,
                                l in 0.01f64..10.0, w in 0.01f64..10.0) {
            let m = gen_rect_mesh(l, w, nx, ny).unwrap();
            prop_assert_eq!(m.node_count(), nx * ny);
            prop_assert_eq!(m.element_count(), 2 * (nx - 1) * (ny - 1));
            prop_assert!((m.total_area() - l * w).abs() <= 1e-12 * l * w);
            prop_assert!(m.check_quality().is_ok());
            prop_assert_eq!(m.boundary_edges().len(), 2 * (nx - 1 + ny - 1));
        }
    }
}
