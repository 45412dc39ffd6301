use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use shapeprop::blade::{rake_deflection, tip_pitch_change_with, BladeModel};
use shapeprop::fem::{pressure_load, write_vtk, DisplacementField, PlateSolver};
use shapeprop::ga::{
    max_strain_penalty, oracle_optimum, run_ga, thickness_csv, thickness_study, LayupProblem, OptimizationResult,
};
use shapeprop::laminate::build_stiffness;
use shapeprop::mesh::{gen_rect_mesh_with, Diagonal, Mesh};
use shapeprop::unloaded::iterate_unloaded_shape;
use shapeprop::Error;

use crate::config::{DiagonalKind, MeshConfig, RectMesh, RunConfig};
use crate::CliError;

/// Human-readable report of a command plus the files it wrote.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }
}

fn prepare_out(cfg: &RunConfig, out: &mut Outcome) -> Result<PathBuf, CliError> {
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    out.write(&dir, "effective_config.toml", &cfg.to_toml())?;
    Ok(dir)
}

fn displacement_csv(mesh: &Mesh, field: &DisplacementField) -> String {
    let mut s = String::from("node,x,y,u,v,w,thetax,thetay\n");
    for (i, p) in mesh.nodes().iter().enumerate() {
        let d = field.node(i);
        let _ = writeln!(
            s,
            "{i},{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            p[0], p[1], d[0], d[1], d[2], d[3], d[4]
        );
    }
    s
}

fn solve_mesh(cfg: &RunConfig, mesh: &Mesh) -> Result<DisplacementField, CliError> {
    let layup = cfg.layup()?;
    let lam = build_stiffness(&layup)?;
    let solver = PlateSolver::new(mesh, cfg.element_options())?;
    Ok(solver.solve(&lam, &pressure_load(mesh, cfg.load.pressure))?)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mesh = cfg.build_mesh()?;
    let field = solve_mesh(cfg, &mesh)?;
    let mut out = Outcome::default();
    let dir = prepare_out(cfg, &mut out)?;
    out.line(format!(
        "nodes {}, elements {}, pressure {} Pa",
        mesh.node_count(),
        mesh.element_count(),
        cfg.load.pressure
    ));
    out.line(format!("max |w| = {:.4} mm", field.max_abs_w() * 1e3));
    if mesh.tip().is_some() {
        let dphi = tip_pitch_change_with(&mesh, &field, cfg.output.measure())?;
        let rake = rake_deflection(&mesh, &field)?;
        out.line(format!(
            "tip pitch change = {:.4} deg, rake = {:.4} mm",
            dphi.to_degrees(),
            rake * 1e3
        ));
    }
    out.write(&dir, "displacement.csv", &displacement_csv(&mesh, &field))?;
    let vtk = dir.join("displacement.vtk");
    write_vtk(&vtk, &mesh, &field, "shapeprop solve")?;
    out.files.push(vtk);
    Ok(out)
}

/// Max deflection (m) for each `[nx, ny]` node array of the rectangular plate.
pub fn convergence_rows(cfg: &RunConfig) -> Result<Vec<(usize, usize, f64)>, CliError> {
    let MeshConfig::Rect(RectMesh {
        length,
        width,
        diagonal,
        nx,
        ny,
    }) = &cfg.mesh
    else {
        return Err(CliError::Validation(
            "mesh.kind: convergence sweeps need a `rect` mesh".into(),
        ));
    };
    let grids = cfg
        .converge
        .as_ref()
        .map(|c| c.grids.clone())
        .unwrap_or_else(|| vec![[*nx, *ny]]);
    let d = match diagonal {
        DiagonalKind::Falling => Diagonal::Falling,
        DiagonalKind::Rising => Diagonal::Rising,
    };
    grids
        .iter()
        .map(|&[gx, gy]| {
            let mesh = gen_rect_mesh_with(*length, *width, gx, gy, d)?;
            Ok((gx, gy, solve_mesh(cfg, &mesh)?.max_abs_w()))
        })
        .collect()
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    cfg.build_mesh()?;
    let rows = convergence_rows(cfg)?;
    let mut out = Outcome::default();
    let dir = prepare_out(cfg, &mut out)?;
    let mut csv = String::from("nx,ny,max_w_mm\n");
    for (nx, ny, w) in &rows {
        let _ = writeln!(csv, "{nx},{ny},{:.6}", w * 1e3);
        out.line(format!("{nx:>4} x {ny:<4} max |w| = {:.4} mm", w * 1e3));
    }
    for pair in rows.windows(2) {
        if pair[1].2 < pair[0].2 {
            out.warnings.push(format!(
                "non-monotone convergence: {}x{} gives {:.4} mm, below {:.4} mm at {}x{}",
                pair[1].0,
                pair[1].1,
                pair[1].2 * 1e3,
                pair[0].2 * 1e3,
                pair[0].0,
                pair[0].1
            ));
        }
    }
    out.write(&dir, "convergence.csv", &csv)?;
    Ok(out)
}

fn blade_model(cfg: &RunConfig) -> Result<Arc<BladeModel>, CliError> {
    let mesh = cfg.build_mesh()?;
    if mesh.tip().is_none() {
        return Err(CliError::Validation(
            "mesh: tip leading/trailing-edge markers are required".into(),
        ));
    }
    Ok(Arc::new(BladeModel::new(&mesh, cfg.element_options())?))
}

fn layup_toml(result: &OptimizationResult, ply_thickness: f64) -> String {
    let angles: Vec<String> = result
        .best
        .genes
        .iter()
        .map(|g| format!("{}", g.to_degrees()))
        .collect();
    format!(
        "# {}\n[layup]\nangles_deg = [{}]\nply_thickness = {}\nsymmetric = true\n",
        result.layup_string(),
        angles.join(", "),
        ply_thickness
    )
}

pub fn cmd_optimize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let schedule = cfg.schedule()?;
    let model = blade_model(cfg)?;
    let material = cfg.material()?;
    let domain = cfg.ga.domain.to_domain();
    let ga = cfg.ga.to_config();
    let mut out = Outcome::default();
    let dir = prepare_out(cfg, &mut out)?;

    let oracle = oracle_optimum(&schedule)?;
    out.line(format!(
        "oracle lower bound f* = {:.6e} rad ({:.4} deg) at slope {:.5} deg/kPa",
        oracle.objective,
        oracle.objective.to_degrees(),
        (oracle.slope * 1e3).to_degrees()
    ));

    let mut problem = LayupProblem::new(
        model.clone(),
        material,
        cfg.ga_ply_thickness(),
        cfg.ga.layers / 2,
        schedule,
    )?;
    if let Some((limits, pressure, scale)) = cfg.ga.strain_limits() {
        problem = problem.with_penalty(max_strain_penalty(limits, pressure, scale)?);
    }

    let check = |out: &mut Outcome, label: &str, f: f64| {
        if f < oracle.objective - 1e-12 {
            out.warnings
                .push(format!("{label}: GA objective {f:.6e} lies below the oracle bound"));
        }
    };

    if let Some(rows) = cfg.thickness_rows() {
        let results = thickness_study(&problem, &rows, &domain, &ga)?;
        for r in &results {
            let label = format!("{}x{:.0}um", r.row.layers, r.row.ply_thickness * 1e6);
            out.line(format!(
                "{label:>10}  t = {:.3} mm  best f = {:.6e} rad ({:.3}x f*)  {}",
                r.total_thickness * 1e3,
                r.result.best_objective,
                r.result.best_objective / oracle.objective,
                r.result.layup_string()
            ));
            check(&mut out, &label, r.result.best_objective);
            out.write(&dir, &format!("history_{label}.csv"), &r.result.history_csv())?;
        }
        out.write(&dir, "thickness.csv", &thickness_csv(&results))?;
        return Ok(out);
    }

    let result = run_ga(&problem, &domain, &ga)?;
    check(&mut out, "ga", result.best_objective);
    out.line(format!(
        "GA best f = {:.6e} rad ({:.4} deg), {:.4}x f*, {} generations, {} evaluations",
        result.best_objective,
        result.best_objective.to_degrees(),
        result.best_objective / oracle.objective,
        result.history.len(),
        result.evaluations
    ));
    out.line(format!(
        "slope {:.5} deg/kPa, layup {}",
        (result.best_slope * 1e3).to_degrees(),
        result.layup_string()
    ));
    out.write(&dir, "history.csv", &result.history_csv())?;
    out.write(&dir, "best_layup.toml", &layup_toml(&result, problem.ply_thickness))?;
    let response = model.response_curve(&result.best_layup, &problem.schedule, cfg.output.measure())?;
    out.write(&dir, "response.csv", &response.to_csv())?;
    Ok(out)
}

pub fn cmd_unloaded(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let section = cfg
        .unloaded
        .clone()
        .ok_or_else(|| CliError::Validation("unloaded: section is required".into()))?;
    let layup = cfg.layup()?;
    let model = blade_model(cfg)?;
    let mut out = Outcome::default();
    let dir = prepare_out(cfg, &mut out)?;
    match iterate_unloaded_shape(&model, &layup, &section.cruise(), &section.to_config()) {
        Ok(r) => {
            for row in &r.trace.rows {
                out.line(format!(
                    "iter {}: unloaded {:.3} deg -> loaded {:.3} deg ({:+.3} %), adjust {:+.3} deg",
                    row.iteration, row.initial_tip_deg, row.loaded_tip_deg, row.pct_error, row.adjustment_deg
                ));
            }
            out.line(format!("unloaded tip pitch = {:.4} deg", r.unloaded_tip_pitch_deg));
            out.write(&dir, "unloaded_trace.csv", &r.trace.to_csv())?;
            Ok(out)
        }
        Err(Error::Divergence { iterations, trace }) => {
            out.write(&dir, "unloaded_trace.csv", &trace.to_csv())?;
            Err(CliError::Numerical(format!(
                "unloaded-shape iteration did not converge after {iterations} iterations; partial trace:\n{}",
                trace.to_csv()
            )))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_response(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let schedule = cfg.schedule()?;
    let layup = cfg.layup()?;
    let model = blade_model(cfg)?;
    let response = model.response_curve(&layup, &schedule, cfg.output.measure())?;
    let mut out = Outcome::default();
    let dir = prepare_out(cfg, &mut out)?;
    for p in &response.points {
        out.line(format!(
            "dP {:>7.1} kPa  dphi {:+.3} deg  rake {:+.3} mm",
            p.delta_pressure * 1e-3,
            p.delta_phi.to_degrees(),
            p.rake * 1e3
        ));
    }
    out.line(format!(
        "slope {:.5} deg/kPa, R^2 {:.6}",
        (response.slope * 1e3).to_degrees(),
        response.r_squared()
    ));
    out.write(&dir, "response.csv", &response.to_csv())?;
    Ok(out)
}
