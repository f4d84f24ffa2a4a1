//! The 30-dimensional symmetric stress element with normal-normal continuous,
//! face-wise affine normal components.
//!
//! The element space is spanned by `T_i p` with `p` in
//! `P¹ ⊕ span{λ_iλ_{i+1}, λ_iλ_{i+2}, λ_iλ_{i+3}}` for the four constant tensors
//! `T_i` satisfying `n_j·T_i n_j = δ_ij`, plus the two constant tensors `T₅, T₆`
//! with vanishing normal-normal components on every face.
//!
//! Local degree-of-freedom order:
//! * `0..12`: face moments `|F_i|⟨n_i·τ n_i, λ_v⟩_{F_i}`, face `i` outer, face
//!   vertices `v` in ascending local index inner;
//! * `12..18`: volume moments `(τ, E_k)_T` against [`SymTensor::canonical_basis`];
//! * `18..30`: divergence moments `(div τ, λ_j e_d)_T`, index `18 + 3j + d`.

mod geometry;
pub mod poly;

pub use geometry::{face_vertices, Tet, TetGeometry};
use nalgebra::{DMatrix, SMatrix};
pub use poly::{TensorPoly, VecP1};

use crate::error::{Error, Result};
use crate::symtensor::{sym_outer, SymTensor, Vec3};
use poly::{pair_index, tables, N_MONO};

pub const N_STRESS_DOFS: usize = 30;
pub const N_FACE_DOFS: usize = 12;
pub const N_VOLUME_DOFS: usize = 6;
pub const N_DIV_DOFS: usize = 12;
pub const FIRST_VOLUME_DOF: usize = N_FACE_DOFS;
pub const FIRST_DIV_DOF: usize = N_FACE_DOFS + N_VOLUME_DOFS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofLabel {
    /// face index and local vertex index of the Lagrange weight
    Face { face: usize, vertex: usize },
    Volume { comp: usize },
    Divergence { vertex: usize, comp: usize },
}

pub fn dof_labels() -> [DofLabel; N_STRESS_DOFS] {
    std::array::from_fn(|k| {
        if k < FIRST_VOLUME_DOF {
            DofLabel::Face { face: k / 3, vertex: face_vertices(k / 3)[k % 3] }
        } else if k < FIRST_DIV_DOF {
            DofLabel::Volume { comp: k - FIRST_VOLUME_DOF }
        } else {
            let j = k - FIRST_DIV_DOF;
            DofLabel::Divergence { vertex: j / 3, comp: j % 3 }
        }
    })
}

/// The six constant tensors T₁…T₆.
#[derive(Debug, Clone, Copy)]
pub struct NNTensorBasis(pub [SymTensor; 6]);

pub fn build_nn_tensors(g: &TetGeometry) -> NNTensorBasis {
    let mut t = [SymTensor::ZERO; 6];
    for (i, ti) in t.iter_mut().enumerate().take(4) {
        let a = g.edges[(i + 1) % 4][(i + 2) % 4];
        let b = g.edges[(i + 1) % 4][(i + 3) % 4];
        let n = g.normals[i];
        *ti = (1.0 / (n.dot(&a) * n.dot(&b))) * sym_outer(&a, &b);
    }
    t[4] = sym_outer(&g.edges[0][1], &g.edges[2][3]);
    t[5] = sym_outer(&g.edges[0][2], &g.edges[1][3]);
    NNTensorBasis(t)
}

impl NNTensorBasis {
    /// Coordinates of `c` in {T₁…T₆}, with the residual of the 6x6 solve.
    pub fn coordinates(&self, c: SymTensor) -> Option<([f64; 6], f64)> {
        let m = SMatrix::<f64, 6, 6>::from_fn(|r, k| self.0[k].to_array()[r]);
        let rhs = SMatrix::<f64, 6, 1>::from_row_slice(&c.to_array());
        let x = m.lu().solve(&rhs)?;
        let res = (m * x - rhs).amax();
        Some((std::array::from_fn(|k| x[k]), res))
    }
}

/// Basis of the element space: 7 polynomials per `T_i` followed by `T₅, T₆`.
pub fn spanning_basis(nn: &NNTensorBasis) -> Vec<TensorPoly> {
    let mut out = Vec::with_capacity(N_STRESS_DOFS);
    for i in 0..4 {
        let t = nn.0[i];
        for k in 0..4 {
            out.push(TensorPoly::monomial(t, k));
        }
        for s in 1..4 {
            out.push(TensorPoly::monomial(t, pair_index(i, (i + s) % 4)));
        }
    }
    out.push(TensorPoly::constant(nn.0[4]));
    out.push(TensorPoly::constant(nn.0[5]));
    out
}

/// |F_i|⟨n_i·τ n_i, q⟩_{F_i} for q affine on the face with values `q` at the
/// face vertices (ascending local index).
pub fn face_moment(g: &TetGeometry, tau: &TensorPoly, face: usize, q: [f64; 3]) -> f64 {
    let t = tables();
    let n = g.normals[face];
    let fv = face_vertices(face);
    let mut s = 0.0;
    for a in 0..N_MONO {
        let nn = tau.coeffs[a].bilinear(&n, &n);
        if nn == 0.0 {
            continue;
        }
        let w: f64 = (0..3).map(|k| q[k] * t.face_p1[face][a][fv[k]]).sum();
        s += nn * w;
    }
    let area = g.face_areas[face];
    area * area * s
}

/// (τ, c)_T
pub fn tensor_moment(g: &TetGeometry, tau: &TensorPoly, c: SymTensor) -> f64 {
    g.volume * tau.mean().ddot(c)
}

/// (div τ, v)_T
pub fn div_moment(g: &TetGeometry, tau: &TensorPoly, v: &VecP1) -> f64 {
    g.volume * tau.divergence(&g.grads).l2_dot(v)
}

/// The 30 degrees of freedom of `tau`.
pub fn evaluate_dofs(g: &TetGeometry, tau: &TensorPoly) -> [f64; N_STRESS_DOFS] {
    let t = tables();
    let mut out = [0.0; N_STRESS_DOFS];
    for face in 0..4 {
        let n = g.normals[face];
        let fv = face_vertices(face);
        let area2 = g.face_areas[face] * g.face_areas[face];
        for a in 0..N_MONO {
            let nn = tau.coeffs[a].bilinear(&n, &n);
            if nn == 0.0 {
                continue;
            }
            for k in 0..3 {
                out[3 * face + k] += area2 * nn * t.face_p1[face][a][fv[k]];
            }
        }
    }
    let mean = tau.mean();
    for (k, e) in SymTensor::canonical_basis().iter().enumerate() {
        out[FIRST_VOLUME_DOF + k] = g.volume * mean.ddot(*e);
    }
    let div = tau.divergence(&g.grads);
    for j in 0..4 {
        for i in 0..4 {
            let m = if i == j { 0.1 } else { 0.05 } * g.volume;
            for d in 0..3 {
                out[FIRST_DIV_DOF + 3 * j + d] += m * div.0[i][d];
            }
        }
    }
    out
}

/// Matrix with entry (k, l) = dof_k(span_l).
pub fn dof_matrix(g: &TetGeometry, span: &[TensorPoly]) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(N_STRESS_DOFS, span.len());
    for (l, p) in span.iter().enumerate() {
        let col = evaluate_dofs(g, p);
        for k in 0..N_STRESS_DOFS {
            d[(k, l)] = col[k];
        }
    }
    d
}

/// Nodal (dual) basis of the element on one tetrahedron.
#[derive(Debug, Clone)]
pub struct StressShapeSet {
    pub geometry: TetGeometry,
    pub shapes: Vec<TensorPoly>,
    /// divergence of each shape
    pub divergences: Vec<VecP1>,
    pub labels: [DofLabel; N_STRESS_DOFS],
}

impl StressShapeSet {
    pub fn evaluate(&self, shape: usize, x: &Vec3) -> SymTensor {
        self.shapes[shape].eval(&self.geometry.barycentric(x))
    }

    pub fn divergence(&self, shape: usize, x: &Vec3) -> Vec3 {
        self.divergences[shape].eval(&self.geometry.barycentric(x))
    }

    /// Σ_k coeffs[k] φ_k
    pub fn combine(&self, coeffs: &[f64]) -> TensorPoly {
        self.shapes.iter().zip(coeffs).fold(TensorPoly::zero(), |acc, (s, &c)| acc + c * *s)
    }
}

pub fn nodal_basis(g: &TetGeometry) -> Result<StressShapeSet> {
    let nn = build_nn_tensors(g);
    let span = spanning_basis(&nn);
    let d = dof_matrix(g, &span);
    let lu = d.lu();
    let u = lu.u();
    let scale = u.amax();
    let pivot = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(pivot > 1e-13 * scale) {
        return Err(Error::SingularDofMatrix { pivot });
    }
    let dinv = lu.try_inverse().ok_or(Error::SingularDofMatrix { pivot })?;
    let shapes: Vec<TensorPoly> = (0..N_STRESS_DOFS)
        .map(|l| (0..N_STRESS_DOFS).fold(TensorPoly::zero(), |acc, m| acc + dinv[(m, l)] * span[m]))
        .collect();
    let divergences = shapes.iter().map(|s| s.divergence(&g.grads)).collect();
    Ok(StressShapeSet { geometry: g.clone(), shapes, divergences, labels: dof_labels() })
}

/// t_ij = T_i ñ_j
pub fn t_vectors(g: &TetGeometry, nn: &NNTensorBasis) -> [[Vec3; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| nn.0[i].mul_vec(&g.grads[j])))
}

/// The 12x12 matrix left after eliminating the scaled unknowns 2φ_i(x_i)
/// from the homogeneous divergence system, and its determinant.
///
/// Column blocks belong to φ_i, with the three unknowns φ_i(x_j), j ≠ i,
/// ascending; row blocks are the three components of div τ(x_k). Entry
/// blocks are `t_ii δ_jk + δ_ik (t_ij − t_ii)`.
pub fn reduced_matrix_12(g: &TetGeometry) -> (SMatrix<f64, 12, 12>, f64) {
    let nn = build_nn_tensors(g);
    let t = t_vectors(g, &nn);
    let mut m = SMatrix::<f64, 12, 12>::zeros();
    for k in 0..4 {
        for i in 0..4 {
            let others: Vec<usize> = (0..4).filter(|&j| j != i).collect();
            for (c, &j) in others.iter().enumerate() {
                let mut v = Vec3::zeros();
                if j == k {
                    v += t[i][i];
                }
                if i == k {
                    v += t[i][j] - t[i][i];
                }
                for r in 0..3 {
                    m[(3 * k + r, 3 * i + c)] = v[r];
                }
            }
        }
    }
    let det = m.determinant();
    (m, det)
}
