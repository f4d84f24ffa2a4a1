//! Convergence study on the unit cube and its CSV output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manufactured::{ExactSolution, Manufactured, Variant};
use crate::assembly::quadrature::{quad_rule, RuleKind};
use crate::assembly::{assemble, solve, SolveReport, SolverKind};
use crate::dof_system::{apply_dirichlet, GlobalDofMap};
use crate::error::{Error, Result};
use crate::mesh::{generate_box, BoxBounds, TetMesh};
use crate::ref_element::{nodal_basis, TetGeometry, VecP1};
use crate::symtensor::{Material, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub nus: Vec<f64>,
    pub young: f64,
    pub levels: Vec<usize>,
    pub variant: Variant,
    pub out: Option<PathBuf>,
    pub solver_tol: f64,
    pub solver: SolverKind,
    /// directory for per-level matrix dumps
    pub export_matrix: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            nus: vec![0.3, 0.45, 0.49, 0.4999],
            young: 1.0,
            levels: vec![2, 4, 8, 16],
            variant: Variant::Paper,
            out: None,
            solver_tol: 1e-9,
            solver: SolverKind::Hybrid,
            export_matrix: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) || self.levels[0] == 0 {
            return Err(Error::InvalidConfig(format!("levels must be positive and increasing, got {:?}", self.levels)));
        }
        if self.nus.is_empty() {
            return Err(Error::InvalidConfig("at least one Poisson ratio is required".into()));
        }
        for &nu in &self.nus {
            Material::from_young_poisson(self.young, nu)?;
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("solver tolerance must be positive, got {}", self.solver_tol)));
        }
        Ok(())
    }
}

/// The four error quantities, in the order u, strain, sigma, div sigma.
pub type Errors = [f64; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub nu: f64,
    pub level: usize,
    pub h: f64,
    pub ndof_sigma: usize,
    pub ndof_u: usize,
    pub ndof_eta: usize,
    pub errors: Errors,
    pub norm_exact: f64,
    pub relative: Errors,
    /// experimental orders against the previous level
    pub eoc: Option<Errors>,
    pub solve: Option<SolveReport>,
    /// set when the level could not be computed
    pub failure: Option<String>,
}

/// Result of one solve on one mesh.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub mesh: TetMesh,
    pub map: GlobalDofMap,
    pub x: Vec<f64>,
    /// vertex values of the trace, Dirichlet data included
    pub trace_values: Vec<Vec3>,
    pub report: SolveReport,
}

pub fn solve_level(
    exact: &dyn ExactSolution,
    material: &Material,
    n: usize,
    solver: SolverKind,
    tol: f64,
    export_dir: Option<&Path>,
) -> Result<LevelSolution> {
    let mesh = generate_box(n, BoxBounds::unit())?;
    let map = GlobalDofMap::new(&mesh);
    let mut trace = apply_dirichlet(|x| exact.u(x), &mesh);
    let f = |x: &Vec3| exact.f(x, material);
    let system = assemble(&mesh, &map, material, &f, &trace)?;
    if let Some(dir) = export_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        system.export_coo(&dir.join(format!("K_n{n}.coo")))?;
        system.export_rhs(&dir.join(format!("b_n{n}.txt")))?;
    }
    let (x, report) = solve(&system, solver, tol)?;
    drop(system);
    trace.set_free(&map, &x[map.trace_offset()..]);
    Ok(LevelSolution { mesh, map, x, trace_values: trace.values, report })
}

/// ‖u − u_h‖, ‖ε(u) − ε(ũ_h)‖, ‖σ − σ_h‖, ‖div(σ − σ_h)‖ by the 14-point rule.
pub fn compute_errors(sol: &LevelSolution, exact: &dyn ExactSolution, material: &Material) -> Result<Errors> {
    let rule = quad_rule(RuleKind::Deg5Pt14);
    let mesh = &sol.mesh;
    let map = &sol.map;
    let sq: Vec<Errors> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let g = TetGeometry::new(mesh.tet(t))?;
            let set = nodal_basis(&g)?;
            let sigma_h = set.combine(&map.gather_stress(t, &sol.x));
            let div_h = sigma_h.divergence(&g.grads);
            let uo = map.u_offset() + map.u_range(t).start;
            let u_h = VecP1(std::array::from_fn(|a| Vec3::new(sol.x[uo + 3 * a], sol.x[uo + 3 * a + 1], sol.x[uo + 3 * a + 2])));
            let eps_h = VecP1(mesh.tets[t].map(|v| sol.trace_values[v])).sym_gradient(&g.grads);
            let mut e = [0.0; 4];
            for (b, w) in rule.iter() {
                let x = g.point(b);
                e[0] += w * (exact.u(&x) - u_h.eval(b)).norm_squared();
                e[1] += w * (exact.strain(&x) - eps_h).norm_sq();
                e[2] += w * (exact.sigma(&x, material) - sigma_h.eval(b)).norm_sq();
                e[3] += w * (exact.div_sigma(&x, material) - div_h.eval(b)).norm_squared();
            }
            Ok(e.map(|v| v * g.volume))
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; 4];
    for e in sq {
        for k in 0..4 {
            total[k] += e[k];
        }
    }
    Ok(total.map(f64::sqrt))
}

/// (‖u‖₁² + ‖σ‖²_div)^{1/2} on the unit cube by the 14-point rule on the n-mesh.
pub fn exact_norm(exact: &dyn ExactSolution, material: &Material, n: usize) -> Result<f64> {
    let mesh = generate_box(n, BoxBounds::unit())?;
    let rule = quad_rule(RuleKind::Deg5Pt14);
    let total: f64 = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let tet = mesh.tet(t);
            let vol = tet.signed_volume().abs();
            vol * rule
                .iter()
                .map(|(b, w)| {
                    let x = tet.point(b);
                    w * (exact.u(&x).norm_squared()
                        + exact.grad_u(&x).norm_squared()
                        + exact.sigma(&x, material).norm_sq()
                        + exact.div_sigma(&x, material).norm_squared())
                })
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    Ok(total.sqrt())
}

fn eoc(prev: &ErrorRecord, cur: &ErrorRecord) -> Errors {
    let r = (prev.h / cur.h).ln();
    std::array::from_fn(|k| (prev.errors[k] / cur.errors[k]).ln() / r)
}

/// Runs all levels for one material and exact solution.
pub fn run_levels(
    exact: &dyn ExactSolution,
    nu: f64,
    material: &Material,
    cfg: &StudyConfig,
) -> Result<Vec<ErrorRecord>> {
    let finest = *cfg.levels.last().expect("validated levels");
    let norm = exact_norm(exact, material, finest)?;
    let mut out: Vec<ErrorRecord> = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        let h = 3f64.sqrt() / n as f64;
        let dir = cfg.export_matrix.as_deref();
        let rec = match solve_level(exact, material, n, cfg.solver, cfg.solver_tol, dir)
            .and_then(|sol| compute_errors(&sol, exact, material).map(|e| (sol, e)))
        {
            Ok((sol, errors)) => {
                let mut r = ErrorRecord {
                    nu,
                    level: n,
                    h: sol.mesh.h,
                    ndof_sigma: sol.map.n_stress,
                    ndof_u: sol.map.n_u,
                    ndof_eta: sol.map.n_trace,
                    errors,
                    norm_exact: norm,
                    relative: errors.map(|e| e / norm),
                    eoc: None,
                    solve: Some(sol.report),
                    failure: None,
                };
                if let Some(prev) = out.last().filter(|p| p.failure.is_none()) {
                    r.eoc = Some(eoc(prev, &r));
                }
                log::info!("nu={nu} n={n}: errors {:?} eoc {:?}", r.relative, r.eoc);
                r
            }
            Err(e) => {
                log::error!("nu={nu} n={n} failed: {e}");
                ErrorRecord {
                    nu,
                    level: n,
                    h,
                    ndof_sigma: 0,
                    ndof_u: 0,
                    ndof_eta: 0,
                    errors: [f64::NAN; 4],
                    norm_exact: norm,
                    relative: [f64::NAN; 4],
                    eoc: None,
                    solve: None,
                    failure: Some(e.to_string()),
                }
            }
        };
        out.push(rec);
    }
    Ok(out)
}

/// The manufactured study for every Poisson ratio of the configuration.
pub fn run_convergence(cfg: &StudyConfig) -> Result<Vec<ErrorRecord>> {
    cfg.validate()?;
    let exact = Manufactured::new(cfg.variant);
    let mut all = Vec::new();
    for &nu in &cfg.nus {
        let material = Material::from_young_poisson(cfg.young, nu)?;
        all.extend(run_levels(&exact, nu, &material, cfg)?);
    }
    Ok(all)
}

pub const CSV_HEADER: [&str; 19] = [
    "nu",
    "level",
    "h",
    "ndof_sigma",
    "ndof_u",
    "ndof_eta",
    "err_u",
    "err_strain",
    "err_sigma",
    "err_divsigma",
    "norm_exact",
    "rel_u",
    "rel_strain",
    "rel_sigma",
    "rel_divsigma",
    "eoc_u",
    "eoc_strain",
    "eoc_sigma",
    "eoc_divsigma",
];

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_string(records: &[ErrorRecord]) -> String {
    let mut s = CSV_HEADER.join(",");
    s.push('\n');
    for r in records {
        let mut cols = vec![fmt(r.nu), r.level.to_string(), fmt(r.h)];
        cols.extend([r.ndof_sigma, r.ndof_u, r.ndof_eta].map(|v| v.to_string()));
        cols.extend(r.errors.map(fmt));
        cols.push(fmt(r.norm_exact));
        cols.extend(r.relative.map(fmt));
        match r.eoc {
            Some(e) => cols.extend(e.map(fmt)),
            None => cols.extend(std::iter::repeat_n(String::new(), 4)),
        }
        let _ = writeln!(s, "{}", cols.join(","));
    }
    s
}

pub fn emit_csv(records: &[ErrorRecord], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(records)).map_err(|e| Error::io(path, e))
}

/// Parses the numeric columns of an emitted CSV; blank cells become `None`.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<Option<f64>>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER.join(",") => {}
        _ => return Err(Error::Parse { line: 1, msg: "missing or unexpected CSV header".into() }),
    }
    lines
        .map(|(i, l)| {
            l.split(',')
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::Parse { line: i + 1, msg: format!("invalid number '{c}'") })
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::manufactured::Affine;
    use nalgebra::Matrix3;

    #[test]
    fn patch_test_is_exact() {
        let m = Material::from_young_poisson(1.0, 0.3).unwrap();
        let exact = Affine {
            a: Vec3::new(0.1, -0.2, 0.3),
            m: Matrix3::new(1.0, 0.2, -0.3, 0.5, -1.0, 0.1, 0.0, 0.4, 0.7),
        };
        let sol = solve_level(&exact, &m, 2, SolverKind::Hybrid, 1e-10, None).unwrap();
        let err = compute_errors(&sol, &exact, &m).unwrap();
        let norm = exact_norm(&exact, &m, 2).unwrap();
        for e in err {
            assert!(e / norm < 1e-8, "{err:?}");
        }
    }

    #[test]
    fn csv_round_trip_and_header() {
        assert_eq!(csv_string(&[]), CSV_HEADER.join(",") + "\n");
        let rec = ErrorRecord {
            nu: 0.3,
            level: 2,
            h: 0.866_025_403_784_438_6,
            ndof_sigma: 10,
            ndof_u: 20,
            ndof_eta: 3,
            errors: [0.1, 1.0 / 3.0, std::f64::consts::PI, 2e-300],
            norm_exact: 12.5,
            relative: [0.008, 0.1 / 7.0, 0.3, 1e-5],
            eoc: None,
            solve: None,
            failure: None,
        };
        let mut rec2 = rec.clone();
        rec2.level = 4;
        rec2.eoc = Some([1.0, 2.0, 0.999_999_999_999_999_9, 1.234_567_890_123_456_7]);
        let text = csv_string(&[rec.clone(), rec2.clone()]);
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].len(), 19);
        assert_eq!(rows[0][8], Some(rec.errors[2]));
        assert_eq!(rows[0][9], Some(rec.errors[3]));
        assert_eq!(rows[0][12], Some(rec.relative[1]));
        assert!(rows[0][15..].iter().all(|c| c.is_none()));
        let e = rec2.eoc.unwrap();
        for k in 0..4 {
            assert_eq!(rows[1][15 + k], Some(e[k]));
        }
        assert_eq!(rows[1][1], Some(4.0));
    }

    #[test]
    fn config_validation() {
        assert!(StudyConfig::default().validate().is_ok());
        let bad = StudyConfig { levels: vec![4, 2], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = StudyConfig { nus: vec![0.5], ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
