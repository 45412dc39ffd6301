//! Global stiffness assembly and pressure loads.

use rayon::prelude::*;

use super::element::{
    smoothed_strain_matrices, stiffness_from_strains, ElementGeometry, ElementOptions, Strain2, Strain3, DOFS_PER_NODE,
    ELEMENT_DOFS,
};
use crate::error::Result;
use crate::laminate::LaminateStiffness;
use crate::mesh::Mesh;

/// Symmetric matrix in compressed sparse row form with both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Sparsity pattern of the global stiffness with a scatter map from each
/// element matrix entry to its CSR slot.
#[derive(Debug, Clone)]
pub struct Assembler {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    slots: Vec<u32>,
    geometry: Vec<ElementGeometry>,
    strains: Vec<(Strain3, Strain3, Strain2)>,
}

impl Assembler {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let geometry = (0..mesh.element_count())
            .map(|e| ElementGeometry::new(mesh.element_coords(e)))
            .collect::<Result<Vec<_>>>()?;
        let strains = geometry
            .iter()
            .map(smoothed_strain_matrices)
            .collect::<Result<Vec<_>>>()?;

        let adj = mesh.node_adjacency();
        let n = mesh.node_count() * DOFS_PER_NODE;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (node, neighbours) in adj.iter().enumerate() {
            let mut cols: Vec<usize> = neighbours.iter().copied().chain([node]).collect();
            cols.sort_unstable();
            cols.dedup();
            for _ in 0..DOFS_PER_NODE {
                for &c in &cols {
                    col_idx.extend((0..DOFS_PER_NODE).map(|k| c * DOFS_PER_NODE + k));
                }
                row_ptr.push(col_idx.len());
            }
        }

        let mut slots = Vec::with_capacity(mesh.element_count() * ELEMENT_DOFS * ELEMENT_DOFS);
        for conn in mesh.elements() {
            let dofs = element_dofs(conn);
            for &gi in &dofs {
                let cols = &col_idx[row_ptr[gi]..row_ptr[gi + 1]];
                for &gj in &dofs {
                    let k = cols.binary_search(&gj).expect("pattern covers element");
                    slots.push((row_ptr[gi] + k) as u32);
                }
            }
        }
        Ok(Assembler {
            n,
            row_ptr,
            col_idx,
            slots,
            geometry,
            strains,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn pattern(&self) -> (&[usize], &[usize]) {
        (&self.row_ptr, &self.col_idx)
    }

    pub fn geometry(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    /// Assembles the global stiffness for a laminate applied to every element.
    /// Element matrices are formed in parallel and scattered in element order,
    /// so the result does not depend on the thread count.
    pub fn assemble(&self, laminate: &LaminateStiffness, options: &ElementOptions) -> Result<SparseSymMatrix> {
        let mats: Vec<_> = self
            .geometry
            .par_iter()
            .zip(&self.strains)
            .map(|(g, (bp, bb, bs))| stiffness_from_strains(bp, bb, bs, g.area(), g.longest_edge(), laminate, options))
            .collect();
        let mut values = vec![0.0; self.col_idx.len()];
        let per = ELEMENT_DOFS * ELEMENT_DOFS;
        for (e, k) in mats.iter().enumerate() {
            let slots = &self.slots[e * per..(e + 1) * per];
            for i in 0..ELEMENT_DOFS {
                for j in 0..ELEMENT_DOFS {
                    values[slots[i * ELEMENT_DOFS + j] as usize] += k[(i, j)];
                }
            }
        }
        Ok(SparseSymMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
        })
    }
}

pub fn element_dofs(conn: &[usize; 3]) -> [usize; ELEMENT_DOFS] {
    std::array::from_fn(|k| conn[k / DOFS_PER_NODE] * DOFS_PER_NODE + k % DOFS_PER_NODE)
}

pub fn assemble(mesh: &Mesh, laminate: &LaminateStiffness, options: &ElementOptions) -> Result<SparseSymMatrix> {
    Assembler::new(mesh)?.assemble(laminate, options)
}

/// Named uniform pressure load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCase {
    pub label: String,
    pub pressure: f64,
    pub weight: f64,
}

impl LoadCase {
    pub fn new(label: impl Into<String>, pressure: f64) -> Self {
        LoadCase {
            label: label.into(),
            pressure,
            weight: 1.0,
        }
    }
}

/// Consistent nodal forces of a uniform transverse pressure: each element
/// passes `P A_e / 3` to each of its nodes.
pub fn pressure_load(mesh: &Mesh, pressure: f64) -> Vec<f64> {
    let per_element = vec![pressure; mesh.element_count()];
    element_pressure_load(mesh, &per_element)
}

/// Nodal forces for a piecewise-constant pressure given per element.
pub fn element_pressure_load(mesh: &Mesh, pressures: &[f64]) -> Vec<f64> {
    assert_eq!(pressures.len(), mesh.element_count());
    let mut f = vec![0.0; mesh.node_count() * DOFS_PER_NODE];
    for (e, conn) in mesh.elements().iter().enumerate() {
        let share = pressures[e] * mesh.element_area(e) / 3.0;
        for &n in conn {
            f[n * DOFS_PER_NODE + 2] += share;
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::element::smooth_element;
    use crate::laminate::{build_stiffness, Layup, Material};
    use crate::mesh::gen_rect_mesh;
    use approx::assert_relative_eq;

    fn lam() -> LaminateStiffness {
        let l = Layup::from_degrees(&[40.0; 24], 125e-6, Material::as4_3501_6(), true).unwrap();
        build_stiffness(&l).unwrap()
    }

    #[test]
    fn total_load_equals_pressure_times_area() {
        let m = gen_rect_mesh(0.4, 0.2, 6, 4).unwrap();
        let f = pressure_load(&m, 100.0);
        let total: f64 = f.iter().skip(2).step_by(5).sum();
        assert_relative_eq!(total, 100.0 * 0.08, max_relative = 1e-12);
        assert!(f.iter().enumerate().all(|(i, v)| i % 5 == 2 || *v == 0.0));
    }

    #[test]
    fn assembled_matrix_is_symmetric() {
        let m = gen_rect_mesh(0.4, 0.2, 5, 4).unwrap();
        let k = assemble(&m, &lam(), &ElementOptions::default()).unwrap();
        let d = k.to_dense();
        let scale = d.abs().max();
        assert!((&d - d.transpose()).abs().max() <= 1e-14 * scale);
    }

    #[test]
    fn assembly_matches_dense_reference() {
        let m = gen_rect_mesh(0.3, 0.2, 3, 3).unwrap();
        let l = lam();
        let opts = ElementOptions::default();
        let k = assemble(&m, &l, &opts).unwrap().to_dense();
        let mut reference = nalgebra::DMatrix::zeros(k.nrows(), k.ncols());
        for (e, conn) in m.elements().iter().enumerate() {
            let g = ElementGeometry::new(m.element_coords(e)).unwrap();
            let ke = smooth_element(&g, &l, &opts).unwrap().k;
            let dofs = element_dofs(conn);
            for i in 0..ELEMENT_DOFS {
                for j in 0..ELEMENT_DOFS {
                    reference[(dofs[i], dofs[j])] += ke[(i, j)];
                }
            }
        }
        assert!((k - reference).abs().max() < 1e-9);
    }

    #[test]
    fn free_plate_rigid_modes() {
        let m = gen_rect_mesh(0.4, 0.2, 4, 3).unwrap();
        let k = assemble(&m, &lam(), &ElementOptions::default()).unwrap();
        let n = m.node_count();
        let scale = k.to_dense().abs().max();
        let mut modes: Vec<Vec<f64>> = Vec::new();
        for comp in 0..3 {
            let mut v = vec![0.0; 5 * n];
            for i in 0..n {
                v[5 * i + comp] = 1.0;
            }
            modes.push(v);
        }
        let mut rx = vec![0.0; 5 * n];
        let mut ry = vec![0.0; 5 * n];
        let mut rz = vec![0.0; 5 * n];
        for (i, p) in m.nodes().iter().enumerate() {
            rx[5 * i + 2] = p[0];
            rx[5 * i + 3] = -1.0;
            ry[5 * i + 2] = p[1];
            ry[5 * i + 4] = -1.0;
            rz[5 * i] = -p[1];
            rz[5 * i + 1] = p[0];
        }
        modes.extend([rx, ry, rz]);
        for v in modes {
            let r = k.mul_vec(&v);
            assert!(r.iter().all(|x| x.abs() < 1e-10 * scale));
        }
    }
}
