//! Hybridized solve of the saddle-point system.
//!
//! Shared face DOFs are duplicated per element and glued by multipliers `μ`
//! (one per interior face DOF, `+1` on the first owner, `−1` on the second).
//! Each element then carries the dense 42×42 block `K_T = [[A, B], [Bᵀ, 0]]`
//! and couples to the global unknowns `λ = (η, μ)` only through its stress
//! rows `G_T = [C_free | H]`. Eliminating the element unknowns leaves
//! `Σ G_Tᵀ P_T G_T λ = Σ G_Tᵀ (K_T⁻¹ r_T)_σ − r_λ`, where `P_T` is the stress block of
//! `K_T⁻¹`. That matrix is symmetric positive definite and is factored by
//! sparse Cholesky.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;
use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use rayon::prelude::*;

use super::SaddleSystem;
use crate::dof_system::N_U_DOFS;
use crate::error::{Error, Result};
use crate::ref_element::{N_FACE_DOFS, N_STRESS_DOFS};

type Local = SMatrix<f64, 42, 42>;
/// multiplier index and sign of each local face DOF
type FaceMultipliers = [Option<(usize, f64)>; N_FACE_DOFS];

struct Coupling {
    /// global λ index and the column of G_T
    cols: Vec<(usize, DVector<f64>)>,
}

fn local_matrix(sys: &SaddleSystem, t: usize) -> Local {
    let e = &sys.elements[t];
    let mut k = Local::zeros();
    k.fixed_view_mut::<30, 30>(0, 0).copy_from(&e.a);
    k.fixed_view_mut::<30, 12>(0, 30).copy_from(&e.b);
    k.fixed_view_mut::<12, 30>(30, 0).copy_from(&e.b.transpose());
    k
}

/// Multiplier index and sign of every local face DOF.
fn face_multipliers(sys: &SaddleSystem) -> (Vec<FaceMultipliers>, usize) {
    let mut seen: Vec<u8> = vec![0; sys.n_stress];
    for g in &sys.stress_gather {
        for &i in &g[..N_FACE_DOFS] {
            seen[i] += 1;
        }
    }
    let mut index: Vec<Option<usize>> = vec![None; sys.n_stress];
    let mut first = vec![true; sys.n_stress];
    let mut n_mu = 0;
    let mut out = Vec::with_capacity(sys.stress_gather.len());
    for g in &sys.stress_gather {
        let mut loc = [None; N_FACE_DOFS];
        for (k, &i) in g[..N_FACE_DOFS].iter().enumerate() {
            if seen[i] < 2 {
                continue;
            }
            let m = *index[i].get_or_insert_with(|| {
                n_mu += 1;
                n_mu - 1
            });
            let sign = if first[i] { 1.0 } else { -1.0 };
            first[i] = false;
            loc[k] = Some((m, sign));
        }
        out.push(loc);
    }
    (out, n_mu)
}

fn coupling(sys: &SaddleSystem, t: usize, mu: &FaceMultipliers) -> Coupling {
    let e = &sys.elements[t];
    let mut cols = Vec::with_capacity(24);
    for j in 0..N_U_DOFS {
        if let Some(i) = sys.trace_gather[t][j] {
            cols.push((i, DVector::from_iterator(N_STRESS_DOFS, e.c.column(j).iter().copied())));
        }
    }
    for (k, m) in mu.iter().enumerate() {
        if let Some((m, sign)) = *m {
            let mut c = DVector::zeros(N_STRESS_DOFS);
            c[k] = sign;
            cols.push((sys.n_trace + m, c));
        }
    }
    Coupling { cols }
}

fn breakdown(t: usize) -> Error {
    Error::SolverBreakdown(format!("singular local saddle block on tet {t}"))
}

/// Factorized condensed system, reusable for several right-hand sides.
pub struct HybridSolver<'a> {
    sys: &'a SaddleSystem,
    mu: Vec<FaceMultipliers>,
    /// element that receives the residual of each global stress DOF
    stress_owner: Vec<usize>,
    llt: Option<Llt<usize, f64>>,
    pub n_lambda: usize,
    pub nnz: usize,
}

impl<'a> HybridSolver<'a> {
    pub fn new(sys: &'a SaddleSystem) -> Result<Self> {
        let (mu, n_mu) = face_multipliers(sys);
        let n_lambda = sys.n_trace + n_mu;
        let mut stress_owner = vec![usize::MAX; sys.n_stress];
        for (t, g) in sys.stress_gather.iter().enumerate() {
            for &i in g {
                if stress_owner[i] == usize::MAX {
                    stress_owner[i] = t;
                }
            }
        }
        let nt = sys.elements.len();
        let trips: Vec<Vec<Triplet<usize, usize, f64>>> = (0..nt)
            .into_par_iter()
            .map(|t| {
                let lu = local_matrix(sys, t).lu();
                let cp = coupling(sys, t, &mu[t]);
                let m = cp.cols.len();
                let mut g = DMatrix::zeros(42, m);
                for (c, (_, col)) in cp.cols.iter().enumerate() {
                    g.view_mut((0, c), (N_STRESS_DOFS, 1)).copy_from(col);
                }
                let kg = lu.solve(&g).ok_or_else(|| breakdown(t))?;
                let s = g.transpose() * kg;
                let mut trips = Vec::with_capacity(m * (m + 1) / 2);
                for a in 0..m {
                    for b in 0..m {
                        let (ia, ib) = (cp.cols[a].0, cp.cols[b].0);
                        if ia >= ib {
                            trips.push(Triplet::new(ia, ib, s[(a, b)]));
                        }
                    }
                }
                Ok(trips)
            })
            .collect::<Result<_>>()?;
        let mut llt = None;
        let mut nnz = 0;
        if n_lambda > 0 {
            let trips: Vec<_> = trips.into_iter().flatten().collect();
            let s = SparseColMat::try_new_from_triplets(n_lambda, n_lambda, &trips)
                .map_err(|e| Error::SolverBreakdown(format!("condensed matrix creation failed: {e:?}")))?;
            drop(trips);
            nnz = s.compute_nnz();
            llt = Some(
                s.sp_cholesky(Side::Lower)
                    .map_err(|e| Error::SolverBreakdown(format!("condensed matrix is not positive definite: {e:?}")))?,
            );
        }
        Ok(HybridSolver { sys, mu, stress_owner, llt, n_lambda, nnz })
    }

    fn local_rhs(&self, t: usize, r: &[f64]) -> SVector<f64, 42> {
        let sys = self.sys;
        let g = &sys.stress_gather[t];
        let uo = sys.u_offset() + N_U_DOFS * t;
        SVector::from_fn(|i, _| {
            if i < N_STRESS_DOFS {
                if self.stress_owner[g[i]] == t {
                    r[g[i]]
                } else {
                    0.0
                }
            } else {
                r[uo + i - N_STRESS_DOFS]
            }
        })
    }

    /// Solves `K x = r` for a global right-hand side.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let sys = self.sys;
        let nt = sys.elements.len();
        // condensed right-hand side Σ G_Tᵀ (K_T⁻¹ r_T)_σ − r_λ
        let parts: Vec<Vec<(usize, f64)>> = (0..nt)
            .into_par_iter()
            .map(|t| {
                let y = local_matrix(sys, t).lu().solve(&self.local_rhs(t, r)).ok_or_else(|| breakdown(t))?;
                let cp = coupling(sys, t, &self.mu[t]);
                Ok(cp.cols.iter().map(|(i, col)| (*i, col.dot(&y.fixed_rows::<30>(0)))).collect())
            })
            .collect::<Result<_>>()?;
        let mut lambda = vec![0.0; self.n_lambda];
        for (i, v) in parts.into_iter().flatten() {
            lambda[i] += v;
        }
        for (l, v) in lambda.iter_mut().zip(&r[sys.trace_offset()..]) {
            *l -= v;
        }
        if let Some(llt) = &self.llt {
            let mut x = faer::Mat::from_fn(self.n_lambda, 1, |i, _| lambda[i]);
            llt.solve_in_place(x.as_mut());
            lambda = (0..self.n_lambda).map(|i| x[(i, 0)]).collect();
        }

        // recover element unknowns: x_T = K_T⁻¹ (r_T − G_T λ)
        let parts: Vec<SVector<f64, 42>> = (0..nt)
            .into_par_iter()
            .map(|t| {
                let cp = coupling(sys, t, &self.mu[t]);
                let mut rt = self.local_rhs(t, r);
                for (i, col) in &cp.cols {
                    for k in 0..N_STRESS_DOFS {
                        rt[k] -= col[k] * lambda[*i];
                    }
                }
                local_matrix(sys, t).lu().solve(&rt).ok_or_else(|| breakdown(t))
            })
            .collect::<Result<_>>()?;

        let mut x = vec![0.0; sys.dim()];
        let mut count = vec![0u8; sys.n_stress];
        for (t, p) in parts.iter().enumerate() {
            for (k, &g) in sys.stress_gather[t].iter().enumerate() {
                x[g] += p[k];
                count[g] += 1;
            }
            for j in 0..N_U_DOFS {
                x[sys.u_offset() + N_U_DOFS * t + j] = p[N_STRESS_DOFS + j];
            }
        }
        for (v, &c) in x.iter_mut().zip(&count) {
            if c > 1 {
                *v /= c as f64;
            }
        }
        x[sys.trace_offset()..].copy_from_slice(&lambda[..sys.n_trace]);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverBreakdown("non-finite hybrid solution".into()));
        }
        Ok(x)
    }
}
