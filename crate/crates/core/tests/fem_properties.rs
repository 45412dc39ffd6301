use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use shapeprop::fem::{pressure_load, ElementOptions, PlateSolver, DOFS_PER_NODE};
use shapeprop::laminate::{build_stiffness, LaminateStiffness, Layup, Material};
use shapeprop::mesh::{gen_rect_mesh, gen_rect_mesh_with, Diagonal, Mesh};

fn isotropic(e: f64, nu: f64, t: f64) -> Material {
    Material::new(e, e, e / (2.0 * (1.0 + nu)), None, nu, nu, t).unwrap()
}

fn as4(angles: &[f64], symmetric: bool) -> LaminateStiffness {
    let l = Layup::from_degrees(angles, 125e-6, Material::as4_3501_6(), symmetric).unwrap();
    build_stiffness(&l).unwrap()
}

#[test]
fn thin_strip_matches_beam_theory() {
    let (length, width, t, e, p) = (1.0, 0.1, 1e-3, 200e9, 10.0);
    let lam = build_stiffness(&Layup::from_degrees(&[0.0], t, isotropic(e, 1e-3, t), false).unwrap()).unwrap();
    let mesh = gen_rect_mesh(length, width, 41, 9).unwrap();
    let s = PlateSolver::new(&mesh, ElementOptions::default()).unwrap();
    let u = s.solve(&lam, &pressure_load(&mesh, p)).unwrap();
    let tip: Vec<f64> = (0..mesh.node_count())
        .filter(|&i| mesh.nodes()[i][0] == length)
        .map(|i| u.w(i))
        .collect();
    let w_tip = tip.iter().sum::<f64>() / tip.len() as f64;
    let beam = p * length.powi(4) / (8.0 * e * t.powi(3) / 12.0);
    let rel = (w_tip - beam).abs() / beam;
    assert!(rel < 0.03, "tip {w_tip:e} vs beam {beam:e} ({:.2}%)", rel * 100.0);
}

/// Constant-curvature field with exact FSDT rotations and zero shear.
fn curvature_field(p: [f64; 2], k: [f64; 3]) -> [f64; 5] {
    let [x, y] = p;
    let w = -(0.5 * k[0] * x * x + 0.5 * k[1] * y * y + 0.5 * k[2] * x * y);
    let wx = -(k[0] * x + 0.5 * k[2] * y);
    let wy = -(k[1] * y + 0.5 * k[2] * x);
    [0.0, 0.0, w, -wx, -wy]
}

/// Solves the patch with every boundary node prescribed to the exact field and
/// returns the largest relative error at the free nodes.
fn patch_error(mesh: &Mesh, free_nodes: &[usize], lam: &LaminateStiffness, k: [f64; 3]) -> f64 {
    let stiff = shapeprop::fem::assemble(mesh, lam, &ElementOptions::default())
        .unwrap()
        .to_dense();
    let exact: Vec<f64> = mesh.nodes().iter().flat_map(|&p| curvature_field(p, k)).collect();
    let free: Vec<usize> = free_nodes
        .iter()
        .flat_map(|&n| (0..DOFS_PER_NODE).map(move |c| n * DOFS_PER_NODE + c))
        .collect();
    let fixed: Vec<usize> = (0..exact.len()).filter(|g| !free.contains(g)).collect();
    let kff = DMatrix::from_fn(free.len(), free.len(), |i, j| stiff[(free[i], free[j])]);
    let rhs = DVector::from_fn(free.len(), |i, _| {
        -fixed.iter().map(|&g| stiff[(free[i], g)] * exact[g]).sum::<f64>()
    });
    let x = kff.lu().solve(&rhs).unwrap();
    let scale = exact.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    free.iter()
        .enumerate()
        .map(|(i, &g)| (x[i] - exact[g]).abs() / scale)
        .fold(0.0, f64::max)
}

#[test]
fn two_element_patch_reproduces_constant_curvature() {
    // the equilibrium residual of the exact field vanishes on every dof
    let mesh = Mesh::new(
        vec![[0.0, 0.0], [0.3, 0.05], [0.35, 0.28], [-0.02, 0.25]],
        vec![[0, 1, 2], [0, 2, 3]],
        vec![0],
        None,
    )
    .unwrap();
    let lam = as4(&[40.0; 4], true);
    let stiff = shapeprop::fem::assemble(&mesh, &lam, &ElementOptions::default()).unwrap();
    let k = [0.7, -0.4, 0.25];
    let exact: Vec<f64> = mesh.nodes().iter().flat_map(|&p| curvature_field(p, k)).collect();
    let f = stiff.mul_vec(&exact);
    // consistent boundary moments only: no transverse force and no membrane force
    let m_scale = lam.d_mat.abs().max() * 0.7;
    for n in 0..mesh.node_count() {
        for c in [0, 1, 2] {
            assert!(
                f[n * 5 + c].abs() < 1e-10 * m_scale,
                "node {n} comp {c}: {}",
                f[n * 5 + c]
            );
        }
    }
    // the resultant boundary moment equals D kappa times the edge lengths
    let total: f64 = (0..4).map(|n| f[n * 5 + 3]).sum::<f64>();
    assert!(total.abs() < 1e-10 * m_scale);
}

#[test]
fn distorted_patch_with_interior_node_is_exact() {
    let nodes = vec![
        [0.0, 0.0],
        [0.5, 0.0],
        [1.0, 0.0],
        [0.0, 0.5],
        [0.62, 0.41],
        [1.0, 0.5],
        [0.0, 1.0],
        [0.5, 1.0],
        [1.0, 1.0],
    ];
    let elements = vec![
        [0, 1, 4],
        [0, 4, 3],
        [1, 2, 5],
        [1, 5, 4],
        [3, 4, 7],
        [3, 7, 6],
        [4, 5, 8],
        [4, 8, 7],
    ];
    let mesh = Mesh::new(nodes, elements, vec![0], None).unwrap();
    for lam in [as4(&[40.0; 4], true), as4(&[0.0, 90.0, 45.0], true)] {
        for k in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.3, -0.8, 0.5]] {
            let err = patch_error(&mesh, &[4], &lam, k);
            assert!(err < 1e-10, "kappa {k:?}: {err:e}");
        }
    }
}

#[test]
fn bend_twist_sign_flips_with_ply_angle() {
    // mirroring y -> W - y maps the falling-diagonal grid onto the rising one,
    // so +theta on one is the exact mirror image of -theta on the other
    let f_mesh = gen_rect_mesh_with(0.4, 0.2, 21, 11, Diagonal::Falling).unwrap();
    let r_mesh = gen_rect_mesh_with(0.4, 0.2, 21, 11, Diagonal::Rising).unwrap();
    let diff = |mesh: &Mesh, deg: f64| {
        let lam = build_stiffness(&Layup::from_degrees(&[deg], 3e-3, Material::as4_3501_6(), false).unwrap()).unwrap();
        let s = PlateSolver::new(mesh, ElementOptions::default()).unwrap();
        let u = s.solve(&lam, &pressure_load(mesh, 100.0)).unwrap();
        let tip = mesh.tip().unwrap();
        u.w(tip.leading) - u.w(tip.trailing)
    };
    let (plus, minus) = (diff(&f_mesh, 40.0), diff(&f_mesh, -40.0));
    assert!(plus.abs() > 1e-5, "{plus}");
    assert!(plus.signum() == -minus.signum());
    assert_relative_eq!(plus, -minus, max_relative = 0.05);
    assert_relative_eq!(plus, -diff(&r_mesh, -40.0), max_relative = 1e-9);
}

#[test]
fn zero_load_gives_zero_field() {
    let mesh = gen_rect_mesh(0.4, 0.2, 6, 4).unwrap();
    let s = PlateSolver::new(&mesh, ElementOptions::default()).unwrap();
    let u = s
        .solve(&as4(&[40.0; 4], true), &vec![0.0; mesh.node_count() * 5])
        .unwrap();
    assert!(u.as_slice().iter().all(|&v| v == 0.0));
}

fn perturbed_mesh(nx: usize, ny: usize, jitter: &[f64]) -> Mesh {
    let base = gen_rect_mesh(0.4, 0.2, nx, ny).unwrap();
    let hx = 0.4 / (nx - 1) as f64;
    let hy = 0.2 / (ny - 1) as f64;
    let nodes: Vec<[f64; 2]> = base
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let (i, j) = (k % nx, k / nx);
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                *p
            } else {
                [
                    p[0] + 0.2 * hx * jitter[2 * k % jitter.len()],
                    p[1] + 0.2 * hy * jitter[(2 * k + 1) % jitter.len()],
                ]
            }
        })
        .collect();
    Mesh::new(
        nodes,
        base.elements().to_vec(),
        base.clamped_nodes().to_vec(),
        base.tip(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn global_stiffness_is_symmetric(
        nx in 3usize..7,
        ny in 3usize..6,
        jitter in prop::collection::vec(-1.0f64..1.0, 16),
        angles in prop::collection::vec(-90.0f64..90.0, 1..4),
    ) {
        let mesh = perturbed_mesh(nx, ny, &jitter);
        let lam = as4(&angles, false);
        let k = shapeprop::fem::assemble(&mesh, &lam, &ElementOptions::default()).unwrap().to_dense();
        let scale = k.abs().max();
        prop_assert!((&k - k.transpose()).abs().max() <= 1e-14 * scale);
    }

    #[test]
    fn response_is_linear_in_pressure(alpha in -50.0f64..50.0, angles in prop::collection::vec(-90.0f64..90.0, 1..4)) {
        let mesh = gen_rect_mesh(0.4, 0.2, 7, 5).unwrap();
        let s = PlateSolver::new(&mesh, ElementOptions::default()).unwrap();
        let fac = s.factorize(&as4(&angles, true)).unwrap();
        let u1 = fac.solve(&pressure_load(&mesh, 100.0)).unwrap();
        let ua = fac.solve(&pressure_load(&mesh, 100.0 * alpha)).unwrap();
        let scale = u1.as_slice().iter().fold(0.0_f64, |a, b| a.max(b.abs())) * alpha.abs().max(1.0);
        for (a, b) in u1.as_slice().iter().zip(ua.as_slice()) {
            prop_assert!((alpha * a - b).abs() <= 1e-12 * scale);
        }
    }
}
