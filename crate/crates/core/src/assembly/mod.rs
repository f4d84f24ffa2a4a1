//! Element matrices, the global saddle-point system and its solution.
//!
//! The global matrix
//! ```text
//!     K = [ A   B   C ]      rhs = [ -C_D η_D ]
//!         [ Bᵀ  0   0 ]            [ -f       ]
//!         [ Cᵀ  0   0 ]            [  0       ]
//! ```
//! is kept element by element: each tet stores its dense blocks plus the
//! gather lists into the stress and trace blocks. The product `K x`, the
//! merged coordinate form and two solvers work from that representation.

mod hybrid;
pub mod quadrature;

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use faer::sparse::{SparseColMat, Triplet};
use faer::linalg::solvers::Solve;
use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;

use crate::dof_system::{GlobalDofMap, TraceField, N_U_DOFS};
use crate::error::{Error, Result};
use crate::mesh::TetMesh;
use crate::ref_element::poly::tables;
use crate::ref_element::{nodal_basis, StressShapeSet, TetGeometry, N_STRESS_DOFS};
use crate::symtensor::{compliance_product, sym_outer, Material, SymTensor, Vec3};
pub use hybrid::HybridSolver;
use quadrature::{quad_rule, RuleKind};

pub type Load<'a> = &'a (dyn Fn(&Vec3) -> Vec3 + Sync);

#[derive(Debug, Clone)]
pub struct ElementMatrices {
    /// ∫ Aφ_k : φ_l
    pub a: SMatrix<f64, 30, 30>,
    /// ∫ ψ_j · div φ_k
    pub b: SMatrix<f64, 30, 12>,
    /// −(∫ ε(w_j) : φ_k + ∫ w_j · div φ_k)
    pub c: SMatrix<f64, 30, 12>,
    /// ∫ f · ψ_j
    pub f: SVector<f64, 12>,
}

/// Bilinear form ⟨Aσ, τ⟩ on component arrays `[xx, yy, zz, xy, xz, yz]`.
fn compliance_metric(material: &Material) -> SMatrix<f64, 6, 6> {
    let unit = |p: usize| {
        let mut a = [0.0; 6];
        a[p] = 1.0;
        SymTensor::from_array(a)
    };
    SMatrix::from_fn(|p, q| compliance_product(unit(p), unit(q), material))
}

fn compliance_kron(material: &Material) -> SMatrix<f64, 60, 60> {
    let w = compliance_metric(material);
    let m = &tables().mass;
    SMatrix::from_fn(|r, c| m[r / 6][c / 6] * w[(r % 6, c % 6)])
}

/// ∫ λ_i λ_j / |T|
fn p1_mass(i: usize, j: usize) -> f64 {
    if i == j {
        0.1
    } else {
        0.05
    }
}

pub fn element_matrices(set: &StressShapeSet, material: &Material, f: Load) -> ElementMatrices {
    element_matrices_with(set, &compliance_kron(material), f)
}

fn element_matrices_with(set: &StressShapeSet, kron: &SMatrix<f64, 60, 60>, f: Load) -> ElementMatrices {
    let g = &set.geometry;
    let vol = g.volume;
    let v = SMatrix::<f64, 30, 60>::from_fn(|k, r| set.shapes[k].to_vec60()[r]);
    let a = vol * (v * kron * v.transpose());
    let a = 0.5 * (a + a.transpose());
    let mut b = SMatrix::<f64, 30, 12>::zeros();
    let mut c = SMatrix::<f64, 30, 12>::zeros();
    let eps: [SymTensor; 12] = std::array::from_fn(|j| sym_outer(&g.grads[j / 3], &Vec3::ith(j % 3, 1.0)));
    for k in 0..N_STRESS_DOFS {
        let div = &set.divergences[k];
        let mean = set.shapes[k].mean();
        for j in 0..N_U_DOFS {
            let (av, comp) = (j / 3, j % 3);
            let bkj = vol * (0..4).map(|i| div.0[i][comp] * p1_mass(i, av)).sum::<f64>();
            b[(k, j)] = bkj;
            c[(k, j)] = -(vol * eps[j].ddot(mean) + bkj);
        }
    }
    let mut fe = SVector::<f64, 12>::zeros();
    for (bary, w) in quad_rule(RuleKind::Deg2Pt4).iter() {
        let fx = f(&g.point(bary));
        for j in 0..N_U_DOFS {
            fe[j] += vol * w * fx[j % 3] * bary[j / 3];
        }
    }
    ElementMatrices { a, b, c, f: fe }
}

/// The assembled system in element-by-element form.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub n_stress: usize,
    pub n_u: usize,
    pub n_trace: usize,
    pub elements: Vec<ElementMatrices>,
    pub stress_gather: Vec<[usize; N_STRESS_DOFS]>,
    pub trace_gather: Vec<[Option<usize>; 12]>,
    /// prescribed lift values of Dirichlet components, per tet (zero where free)
    pub dirichlet_values: Vec<[f64; 12]>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: &'static str,
    pub dim: usize,
    /// ‖Kx − b‖ / ‖b‖ (0 when b = 0 and x = 0)
    pub relative_residual: f64,
    /// size of the factorized matrix and its stored nonzeros
    pub factor_dim: usize,
    pub factor_input_nnz: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverKind {
    /// sparse LU of the full saddle-point matrix
    Direct,
    /// static condensation to an SPD system in trace and face multipliers
    Hybrid,
}

impl SaddleSystem {
    pub fn dim(&self) -> usize {
        self.n_stress + self.n_u + self.n_trace
    }

    pub fn u_offset(&self) -> usize {
        self.n_stress
    }

    pub fn trace_offset(&self) -> usize {
        self.n_stress + self.n_u
    }

    /// y = K x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        let (uo, to) = (self.u_offset(), self.trace_offset());
        for (t, e) in self.elements.iter().enumerate() {
            let sg = &self.stress_gather[t];
            let s = SVector::<f64, 30>::from_fn(|k, _| x[sg[k]]);
            let u = SVector::<f64, 12>::from_fn(|j, _| x[uo + N_U_DOFS * t + j]);
            let w = SVector::<f64, 12>::from_fn(|j, _| self.trace_gather[t][j].map_or(0.0, |i| x[to + i]));
            let ys = e.a * s + e.b * u + e.c * w;
            for k in 0..N_STRESS_DOFS {
                y[sg[k]] += ys[k];
            }
            let yu = e.b.transpose() * s;
            let yw = e.c.transpose() * s;
            for j in 0..N_U_DOFS {
                y[uo + N_U_DOFS * t + j] += yu[j];
                if let Some(i) = self.trace_gather[t][j] {
                    y[to + i] += yw[j];
                }
            }
        }
        y
    }

    /// All element contributions as coordinate entries; duplicates are to be summed.
    pub fn triplets(&self) -> Vec<Triplet<usize, usize, f64>> {
        let mut out = Vec::with_capacity(self.elements.len() * (900 + 4 * 360));
        let (uo, to) = (self.u_offset(), self.trace_offset());
        for (t, e) in self.elements.iter().enumerate() {
            let sg = &self.stress_gather[t];
            for k in 0..N_STRESS_DOFS {
                for l in 0..N_STRESS_DOFS {
                    out.push(Triplet::new(sg[k], sg[l], e.a[(k, l)]));
                }
                for j in 0..N_U_DOFS {
                    let u = uo + N_U_DOFS * t + j;
                    if e.b[(k, j)] != 0.0 {
                        out.push(Triplet::new(sg[k], u, e.b[(k, j)]));
                        out.push(Triplet::new(u, sg[k], e.b[(k, j)]));
                    }
                    if let Some(i) = self.trace_gather[t][j] {
                        out.push(Triplet::new(sg[k], to + i, e.c[(k, j)]));
                        out.push(Triplet::new(to + i, sg[k], e.c[(k, j)]));
                    }
                }
            }
        }
        out
    }

    pub fn to_sparse(&self) -> Result<SparseColMat<usize, f64>> {
        let n = self.dim();
        SparseColMat::try_new_from_triplets(n, n, &self.triplets())
            .map_err(|e| Error::SolverBreakdown(format!("matrix creation failed: {e:?}")))
    }

    /// Merged entries `(row, col, value)` sorted by column, then row.
    pub fn merged_entries(&self) -> Result<Vec<(usize, usize, f64)>> {
        let k = self.to_sparse()?;
        let k = k.as_ref();
        let mut out = Vec::with_capacity(k.compute_nnz());
        for c in 0..k.ncols() {
            for (r, v) in k.row_idx_of_col(c).zip(k.val_of_col(c)) {
                out.push((r, c, *v));
            }
        }
        Ok(out)
    }

    /// max |K − Kᵀ| over all entries.
    pub fn max_asymmetry(&self) -> Result<f64> {
        let entries = self.merged_entries()?;
        let mut by_pos: Vec<((usize, usize), f64)> = entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();
        by_pos.sort_unstable_by_key(|p| p.0);
        let lookup = |r: usize, c: usize| {
            by_pos.binary_search_by_key(&(r, c), |p| p.0).map(|i| by_pos[i].1).unwrap_or(0.0)
        };
        Ok(entries.iter().map(|&(r, c, v)| (v - lookup(c, r)).abs()).fold(0.0, f64::max))
    }

    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let kx = self.matvec(x);
        let r: f64 = kx.iter().zip(&self.rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let b: f64 = self.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if b == 0.0 {
            r
        } else {
            r / b
        }
    }

    /// Coordinate text, one `row col value` line per merged nonzero (0-based).
    pub fn export_coo(&self, path: &Path) -> Result<()> {
        let entries = self.merged_entries()?;
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        for (r, c, v) in entries {
            writeln!(w, "{r} {c} {v:e}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn export_rhs(&self, path: &Path) -> Result<()> {
        let mut s = String::with_capacity(self.rhs.len() * 24);
        for v in &self.rhs {
            s.push_str(&format!("{v:e}\n"));
        }
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }
}

/// Assembles the saddle-point system with Dirichlet lift values from `trace`.
pub fn assemble(
    mesh: &TetMesh,
    map: &GlobalDofMap,
    material: &Material,
    f: Load,
    trace: &TraceField,
) -> Result<SaddleSystem> {
    let kron = compliance_kron(material);
    let elements: Vec<ElementMatrices> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let g = TetGeometry::new(mesh.tet(t))?;
            let set = nodal_basis(&g)?;
            Ok(element_matrices_with(&set, &kron, f))
        })
        .collect::<Result<_>>()?;
    let dirichlet_values: Vec<[f64; 12]> = (0..mesh.n_tets())
        .map(|t| {
            let vals = trace.element_values(mesh, t);
            std::array::from_fn(|j| if map.trace_gather[t][j].is_none() { vals[j / 3][j % 3] } else { 0.0 })
        })
        .collect();
    let mut rhs = vec![0.0; map.total()];
    for (t, e) in elements.iter().enumerate() {
        let cd = e.c * SVector::<f64, 12>::from_row_slice(&dirichlet_values[t]);
        for (k, &g) in map.stress_gather[t].iter().enumerate() {
            rhs[g] -= cd[k];
        }
        for j in 0..N_U_DOFS {
            rhs[map.u_offset() + N_U_DOFS * t + j] = -e.f[j];
        }
    }
    Ok(SaddleSystem {
        n_stress: map.n_stress,
        n_u: map.n_u,
        n_trace: map.n_trace,
        elements,
        stress_gather: map.stress_gather.clone(),
        trace_gather: map.trace_gather.clone(),
        dirichlet_values,
        rhs,
    })
}

/// Sparse LU solve of a general square system given as coordinate entries.
pub fn sparse_lu_solve(n: usize, entries: &[Triplet<usize, usize, f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let k = SparseColMat::try_new_from_triplets(n, n, entries)
        .map_err(|e| Error::SolverBreakdown(format!("matrix creation failed: {e:?}")))?;
    let lu = k.sp_lu().map_err(|e| Error::SolverBreakdown(format!("sparse LU failed: {e:?}")))?;
    let mut x = faer::Mat::from_fn(n, 1, |i, _| rhs[i]);
    lu.solve_in_place(x.as_mut());
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverBreakdown("non-finite solution from sparse LU".into()));
    }
    Ok(out)
}

const MAX_REFINEMENT_STEPS: usize = 5;

/// Solves `K x = rhs` and checks the relative residual against `tol`.
pub fn solve(system: &SaddleSystem, kind: SolverKind, tol: f64) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let (x, factor_dim, factor_input_nnz) = match kind {
        SolverKind::Direct => {
            let entries = system.triplets();
            let x = sparse_lu_solve(system.dim(), &entries, &system.rhs)?;
            (x, system.dim(), entries.len())
        }
        SolverKind::Hybrid => {
            let solver = HybridSolver::new(system)?;
            let mut x = solver.apply(&system.rhs)?;
            // iterative refinement on the original system; the condensed
            // factorization loses digits for nearly incompressible materials
            let mut res = system.relative_residual(&x);
            for _ in 0..MAX_REFINEMENT_STEPS {
                if res <= tol {
                    break;
                }
                let kx = system.matvec(&x);
                let r: Vec<f64> = system.rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
                let dx = solver.apply(&r)?;
                let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
                let cand_res = system.relative_residual(&cand);
                log::debug!("refinement: residual {res:.3e} -> {cand_res:.3e}");
                if !(cand_res < res) {
                    break;
                }
                x = cand;
                res = cand_res;
            }
            (x, solver.n_lambda, solver.nnz)
        }
    };
    let relative_residual = system.relative_residual(&x);
    let report = SolveReport {
        method: match kind {
            SolverKind::Direct => "sparse LU",
            SolverKind::Hybrid => "hybridized Cholesky",
        },
        dim: system.dim(),
        relative_residual,
        factor_dim,
        factor_input_nnz,
        seconds: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "{}: dim {} residual {:.3e} in {:.2}s",
        report.method,
        report.dim,
        report.relative_residual,
        report.seconds
    );
    if !(relative_residual <= tol) {
        return Err(Error::ToleranceNotReached { residual: relative_residual, tol });
    }
    Ok((x, report))
}
