//! Envelope (skyline) Cholesky solver with reverse Cuthill-McKee node ordering.
//!
//! The ordering and the row envelope depend only on the mesh and the clamped
//! set, so they are computed once per [`PlateSolver`] and shared by every
//! factorization. Laminates without membrane-bending coupling are solved on
//! the `w, theta_x, theta_y` block alone; the membrane block is factored on
//! demand if a right-hand side has in-plane components.

use std::collections::VecDeque;
use std::sync::{Arc, OnceLock};

use super::assembly::{Assembler, SparseSymMatrix};
use super::element::{ElementOptions, DOFS_PER_NODE};
use crate::error::{Error, Result};
use crate::laminate::LaminateStiffness;
use crate::mesh::Mesh;

pub const DOF_NAMES: [&str; DOFS_PER_NODE] = ["u", "v", "w", "theta_x", "theta_y"];

const MEMBRANE: [usize; 2] = [0, 1];
const BENDING: [usize; 3] = [2, 3, 4];
const ALL: [usize; 5] = [0, 1, 2, 3, 4];
const NONE: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-12;

fn bfs_levels(adj: &[Vec<usize>], start: usize, done: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &u in levels.last().unwrap() {
            for &v in &adj[u] {
                if !seen[v] && !done[v] {
                    seen[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

/// Reverse Cuthill-McKee ordering of a graph given as adjacency lists, started
/// from a pseudo-peripheral node of each connected component.
pub fn rcm_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (adj[i].len(), i));
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);

    for &seed in &by_degree {
        if done[seed] {
            continue;
        }
        let mut root = seed;
        let mut levels = bfs_levels(adj, root, &done);
        loop {
            let candidate = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&i| (adj[i].len(), i))
                .unwrap();
            let trial = bfs_levels(adj, candidate, &done);
            if trial.len() > levels.len() {
                root = candidate;
                levels = trial;
            } else {
                break;
            }
        }

        let mut queue = VecDeque::from([root]);
        done[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&v| !done[v]).collect();
            nbrs.sort_by_key(|&v| (adj[v].len(), v));
            nbrs.dedup();
            for v in nbrs {
                done[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Profile (sum of row envelope widths) of a symmetric pattern under an ordering.
pub fn envelope_size(adj: &[Vec<usize>], order: &[usize]) -> usize {
    let mut pos = vec![0; order.len()];
    for (k, &n) in order.iter().enumerate() {
        pos[n] = k;
    }
    order
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let lo = adj[n].iter().map(|&m| pos[m]).min().unwrap_or(k).min(k);
            k - lo
        })
        .sum()
}

/// Equation numbering and row envelope for one block of dofs.
#[derive(Debug, Clone)]
struct Symbolic {
    eq_dof: Vec<usize>,
    dof_eq: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
}

impl Symbolic {
    fn new(node_order: &[usize], comps: &[usize], constrained: &[bool], pattern: (&[usize], &[usize])) -> Self {
        let n_dofs = constrained.len();
        let mut eq_dof = Vec::new();
        let mut dof_eq = vec![NONE; n_dofs];
        for &node in node_order {
            for &c in comps {
                let g = node * DOFS_PER_NODE + c;
                if !constrained[g] {
                    dof_eq[g] = eq_dof.len();
                    eq_dof.push(g);
                }
            }
        }
        let (row_ptr, col_idx) = pattern;
        let mut first = Vec::with_capacity(eq_dof.len());
        let mut offset = Vec::with_capacity(eq_dof.len() + 1);
        offset.push(0);
        for (i, &g) in eq_dof.iter().enumerate() {
            let lo = col_idx[row_ptr[g]..row_ptr[g + 1]]
                .iter()
                .map(|&c| dof_eq[c])
                .filter(|&j| j != NONE)
                .min()
                .unwrap_or(i)
                .min(i);
            first.push(lo);
            offset.push(offset[i] + i - lo + 1);
        }
        Symbolic {
            eq_dof,
            dof_eq,
            first,
            offset,
        }
    }

    fn len(&self) -> usize {
        self.eq_dof.len()
    }
}

#[derive(Debug, Clone)]
struct SkylineFactor {
    sym: Arc<Symbolic>,
    l: Vec<f64>,
}

fn describe_dof(g: usize) -> String {
    format!("node {} dof {}", g / DOFS_PER_NODE, DOF_NAMES[g % DOFS_PER_NODE])
}

impl SkylineFactor {
    fn factor(sym: Arc<Symbolic>, k: &SparseSymMatrix) -> std::result::Result<Self, String> {
        let n = sym.len();
        let mut l = vec![0.0; *sym.offset.last().unwrap()];
        for i in 0..n {
            let (cols, vals) = k.row(sym.eq_dof[i]);
            let base = sym.offset[i] - sym.first[i];
            for (&c, &v) in cols.iter().zip(vals) {
                let j = sym.dof_eq[c];
                if j != NONE && j <= i {
                    l[base + j] = v;
                }
            }
        }

        for i in 0..n {
            let fi = sym.first[i];
            let oi = sym.offset[i];
            for j in fi..i {
                let fj = sym.first[j];
                let oj = sym.offset[j];
                let k0 = fi.max(fj);
                let (head, row_i) = l.split_at_mut(oi);
                let row_j = &head[oj..oj + (j - fj + 1)];
                let dot: f64 = row_i[k0 - fi..j - fi]
                    .iter()
                    .zip(&row_j[k0 - fj..j - fj])
                    .map(|(a, b)| a * b)
                    .sum();
                row_i[j - fi] = (row_i[j - fi] - dot) / row_j[j - fj];
            }
            let row_i = &mut l[oi..oi + (i - fi + 1)];
            let diag = row_i[i - fi];
            let sq: f64 = row_i[..i - fi].iter().map(|a| a * a).sum();
            let d = diag - sq;
            if !(d > PIVOT_TOL * diag.abs()) || !d.is_finite() {
                return Err(format!(
                    "pivot {d:.3e} at {} (diagonal {diag:.3e}); the constrained system has an unrestrained rigid-body or zero-energy mode",
                    describe_dof(sym.eq_dof[i])
                ));
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(SkylineFactor { sym, l })
    }

    /// Solves for the block's dofs, writing them into `out` (global numbering).
    fn solve_into(&self, f: &[f64], out: &mut [f64]) {
        let sym = &self.sym;
        let n = sym.len();
        let mut y: Vec<f64> = sym.eq_dof.iter().map(|&g| f[g]).collect();
        for i in 0..n {
            let fi = sym.first[i];
            let row = &self.l[sym.offset[i]..sym.offset[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = sym.first[i];
            let row = &self.l[sym.offset[i]..sym.offset[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, a) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= a * xi;
            }
        }
        for (i, &g) in sym.eq_dof.iter().enumerate() {
            out[g] = y[i];
        }
    }
}

/// Nodal solution `[u, v, w, theta_x, theta_y]` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    values: Vec<f64>,
}

impl DisplacementField {
    pub fn new(values: Vec<f64>) -> Self {
        assert_eq!(values.len() % DOFS_PER_NODE, 0);
        DisplacementField { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / DOFS_PER_NODE
    }

    pub fn node(&self, i: usize) -> [f64; DOFS_PER_NODE] {
        std::array::from_fn(|k| self.values[i * DOFS_PER_NODE + k])
    }

    pub fn w(&self, i: usize) -> f64 {
        self.values[i * DOFS_PER_NODE + 2]
    }

    pub fn rotation(&self, i: usize) -> [f64; 2] {
        [self.values[i * DOFS_PER_NODE + 3], self.values[i * DOFS_PER_NODE + 4]]
    }

    pub fn max_abs_w(&self) -> f64 {
        (0..self.node_count()).map(|i| self.w(i).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DisplacementField {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Reusable solver for one mesh and clamped set.
#[derive(Debug, Clone)]
pub struct PlateSolver {
    mesh: Mesh,
    assembler: Assembler,
    options: ElementOptions,
    full: Arc<Symbolic>,
    bending: Arc<Symbolic>,
    membrane: Arc<Symbolic>,
}

impl PlateSolver {
    pub fn new(mesh: &Mesh, options: ElementOptions) -> Result<Self> {
        if mesh.clamped_nodes().is_empty() {
            return Err(Error::SingularSystem(
                "no clamped nodes: the translations u, v, w and the rotations about x, y and z are all unrestrained"
                    .into(),
            ));
        }
        let adj = mesh.node_adjacency();
        check_components(mesh, &adj)?;
        let assembler = Assembler::new(mesh)?;
        let order = rcm_order(&adj);
        let mut constrained = vec![false; assembler.dim()];
        for &n in mesh.clamped_nodes() {
            for k in 0..DOFS_PER_NODE {
                constrained[n * DOFS_PER_NODE + k] = true;
            }
        }
        let pattern = assembler.pattern();
        let full = Arc::new(Symbolic::new(&order, &ALL, &constrained, pattern));
        let bending = Arc::new(Symbolic::new(&order, &BENDING, &constrained, pattern));
        let membrane = Arc::new(Symbolic::new(&order, &MEMBRANE, &constrained, pattern));
        Ok(PlateSolver {
            mesh: mesh.clone(),
            assembler,
            options,
            full,
            bending,
            membrane,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn options(&self) -> &ElementOptions {
        &self.options
    }

    pub fn free_dof_count(&self) -> usize {
        self.full.len()
    }

    pub fn stiffness(&self, laminate: &LaminateStiffness) -> Result<SparseSymMatrix> {
        self.assembler.assemble(laminate, &self.options)
    }

    pub fn factorize(&self, laminate: &LaminateStiffness) -> Result<Factorization> {
        let k = self.stiffness(laminate)?;
        let kind = if laminate.is_uncoupled() {
            let bending = SkylineFactor::factor(self.bending.clone(), &k).map_err(Error::SingularSystem)?;
            FactorKind::Decoupled {
                bending,
                membrane_sym: self.membrane.clone(),
                membrane: OnceLock::new(),
            }
        } else {
            FactorKind::Coupled(SkylineFactor::factor(self.full.clone(), &k).map_err(Error::SingularSystem)?)
        };
        Ok(Factorization { k, kind })
    }

    pub fn solve(&self, laminate: &LaminateStiffness, f: &[f64]) -> Result<DisplacementField> {
        self.factorize(laminate)?.solve(f)
    }
}

fn check_components(mesh: &Mesh, adj: &[Vec<usize>]) -> Result<()> {
    let n = mesh.node_count();
    let mut comp = vec![NONE; n];
    let mut count = 0;
    for s in 0..n {
        if comp[s] != NONE {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = count;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == NONE {
                    comp[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    let mut held = vec![false; count];
    for &c in mesh.clamped_nodes() {
        held[comp[c]] = true;
    }
    if let Some(free) = held.iter().position(|h| !h) {
        let first = comp.iter().position(|&c| c == free).unwrap();
        return Err(Error::SingularSystem(format!(
            "the part of the mesh containing node {first} has no clamped node: all six rigid-body modes of that part are unrestrained"
        )));
    }
    Ok(())
}

#[derive(Debug)]
enum FactorKind {
    Coupled(SkylineFactor),
    Decoupled {
        bending: SkylineFactor,
        membrane_sym: Arc<Symbolic>,
        membrane: OnceLock<std::result::Result<SkylineFactor, String>>,
    },
}

/// Factored global stiffness, reusable for any number of load vectors.
#[derive(Debug)]
pub struct Factorization {
    k: SparseSymMatrix,
    kind: FactorKind,
}

impl Factorization {
    pub fn stiffness(&self) -> &SparseSymMatrix {
        &self.k
    }

    pub fn solve(&self, f: &[f64]) -> Result<DisplacementField> {
        if f.len() != self.k.dim() {
            return Err(Error::Config(format!(
                "load vector has {} entries, expected {}",
                f.len(),
                self.k.dim()
            )));
        }
        let mut out = vec![0.0; f.len()];
        match &self.kind {
            FactorKind::Coupled(factor) => factor.solve_into(f, &mut out),
            FactorKind::Decoupled {
                bending,
                membrane_sym,
                membrane,
            } => {
                bending.solve_into(f, &mut out);
                let in_plane = f.iter().enumerate().any(|(g, v)| g % DOFS_PER_NODE < 2 && *v != 0.0);
                if in_plane {
                    let factor = membrane
                        .get_or_init(|| SkylineFactor::factor(membrane_sym.clone(), &self.k))
                        .as_ref()
                        .map_err(|e| Error::SingularSystem(e.clone()))?;
                    factor.solve_into(f, &mut out);
                }
            }
        }
        Ok(DisplacementField::new(out))
    }
}
