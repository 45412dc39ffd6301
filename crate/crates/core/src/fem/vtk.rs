//! Legacy ASCII VTK output of nodal results.

use std::fmt::Write as _;
use std::path::Path;

use super::solver::DisplacementField;
use crate::error::Result;
use crate::mesh::Mesh;

const FIELDS: [&str; 5] = ["u", "v", "w", "thetax", "thetay"];

pub fn vtk_string(mesh: &Mesh, field: &DisplacementField, title: &str) -> String {
    let mut s = String::new();
    let title = title.replace('\n', " ");
    let _ = writeln!(
        s,
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(s, "POINTS {} double", mesh.node_count());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let m = mesh.element_count();
    let _ = writeln!(s, "CELLS {} {}", m, 4 * m);
    for c in mesh.elements() {
        let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.node_count());
    for (k, name) in FIELDS.iter().enumerate() {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for i in 0..mesh.node_count() {
            let _ = writeln!(s, "{:e}", field.node(i)[k]);
        }
    }
    s
}

pub fn write_vtk(path: impl AsRef<Path>, mesh: &Mesh, field: &DisplacementField, title: &str) -> Result<()> {
    std::fs::write(path, vtk_string(mesh, field, title))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_rect_mesh;

    #[test]
    fn layout() {
        let m = gen_rect_mesh(1.0, 1.0, 2, 2).unwrap();
        let f = DisplacementField::new((0..20).map(|v| v as f64).collect());
        let s = vtk_string(&m, &f, "plate");
        assert!(s.starts_with("# vtk DataFile Version 3.0\nplate\nASCII\n"));
        assert!(s.contains("POINTS 4 double"));
        assert!(s.contains("CELLS 2 8"));
        for name in FIELDS {
            assert!(s.contains(&format!("SCALARS {name} double 1")));
        }
        let w_block = s.split("SCALARS w double 1\nLOOKUP_TABLE default\n").nth(1).unwrap();
        let first: f64 = w_block.lines().next().unwrap().parse().unwrap();
        assert_eq!(first, 2.0);
    }
}
