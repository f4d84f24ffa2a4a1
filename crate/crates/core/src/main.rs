use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nn_elast::assembly::SolverKind;
use nn_elast::dof_system::GlobalDofMap;
use nn_elast::harness::study::csv_string;
use nn_elast::harness::{emit_csv, run_convergence, run_suite, StudyConfig, Suite, Variant};
use nn_elast::mesh::{generate_box, BoxBounds};

#[derive(Parser)]
#[command(name = "nn-elast", version, about = "Mixed elasticity with normal-normal continuous stresses on tetrahedra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence study on the unit cube
    Study {
        /// Poisson ratio (repeatable)
        #[arg(long = "nu", default_values_t = [0.3, 0.45, 0.49, 0.4999])]
        nus: Vec<f64>,
        /// Young's modulus
        #[arg(long, default_value_t = 1.0)]
        young: f64,
        /// Subdivisions per axis, increasing
        #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8, 16])]
        levels: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Variant::Paper)]
        variant: Variant,
        /// CSV output path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the assembled matrix and right-hand side of each level here
        #[arg(long)]
        export_matrix: Option<PathBuf>,
        /// Bound on the relative residual of the linear solve
        #[arg(long, default_value_t = 1e-9)]
        solver_tol: f64,
        #[arg(long, value_enum, default_value_t = SolverKind::Hybrid)]
        solver: SolverKind,
    },
    /// Run a built-in verification suite, or all of them
    Verify {
        #[arg(value_enum)]
        suite: Option<Suite>,
    },
    /// Print size and quality of the n×n×n box mesh
    MeshInfo {
        #[arg(long)]
        n: usize,
    },
}

fn run(cli: Cli) -> nn_elast::Result<bool> {
    match cli.command {
        Command::Study { nus, young, levels, variant, out, export_matrix, solver_tol, solver } => {
            let cfg = StudyConfig { nus, young, levels, variant, out, solver_tol, solver, export_matrix };
            let records = run_convergence(&cfg)?;
            match &cfg.out {
                Some(path) => {
                    emit_csv(&records, path)?;
                    eprintln!("wrote {} records to {}", records.len(), path.display());
                }
                None => print!("{}", csv_string(&records)),
            }
            for r in records.iter().filter(|r| r.failure.is_some()) {
                eprintln!("nu = {} level {} failed: {}", r.nu, r.level, r.failure.as_deref().unwrap_or_default());
            }
            Ok(records.iter().all(|r| r.failure.is_none()))
        }
        Command::Verify { suite } => {
            let suites = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let mut all = true;
            for s in suites {
                let report = run_suite(s)?;
                println!("suite {s:?}");
                for l in &report.lines {
                    println!("  {l}");
                }
                println!("{}", if report.passed { "PASS" } else { "FAIL" });
                all &= report.passed;
            }
            Ok(all)
        }
        Command::MeshInfo { n } => {
            let mesh = generate_box(n, BoxBounds::unit())?;
            let q = mesh.quality();
            let map = GlobalDofMap::new(&mesh);
            println!("n = {n}");
            println!("vertices {}, tets {}, faces {} ({} interior, {} boundary)", q.n_vertices, q.n_tets, q.n_faces, q.n_interior_faces, q.n_boundary_faces);
            println!("h = {:.6} (min h_T {:.6}), max shape ratio {:.4}", mesh.h, q.min_h, q.max_shape_ratio);
            println!(
                "dofs: sigma {}, u {}, eta {}, total {}",
                map.n_stress,
                map.n_u,
                map.n_trace,
                map.total()
            );
            println!("topology hash {:016x}", mesh.topology_hash());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
