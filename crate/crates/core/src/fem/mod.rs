//! Plate finite elements: CS-DSG3 element, assembly, solver and output.

mod assembly;
mod element;
mod solver;
mod vtk;

pub use assembly::{
    assemble, element_dofs, element_pressure_load, pressure_load, Assembler, LoadCase, SparseSymMatrix,
};
pub use element::{
    dsg3_matrices, element_strains, smooth_element, smoothed_strain_matrices, stiffness_from_strains, subdivide,
    Dsg3Matrices, ElementGeometry, ElementMatrix, ElementOptions, ShearStabilization, SmoothedElementMatrices, Strain2,
    Strain3, SubTriangle, DOFS_PER_NODE, ELEMENT_DOFS,
};
pub use solver::{envelope_size, rcm_order, DisplacementField, Factorization, PlateSolver, DOF_NAMES};
pub use vtk::{vtk_string, write_vtk};
