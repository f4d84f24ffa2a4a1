//! Affine maps between tetrahedra and the transformations that carry the
//! stress element and its degrees of freedom from one tetrahedron to another.
//!
//! Fields are stored over barycentric coordinates, which are invariant under
//! affine maps, so every push-forward acts on coefficients only.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::ref_element::{Tet, TensorPoly, VecP1};
use crate::symtensor::{SymTensor, Vec3};

/// x = a + B x̂
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: Vec3,
    pub b: Matrix3<f64>,
    pub j: f64,
    b_inv: Matrix3<f64>,
}

fn edge_matrix(t: &Tet) -> Matrix3<f64> {
    let [x1, x2, x3, x4] = t.0;
    Matrix3::from_columns(&[x2 - x1, x3 - x1, x4 - x1])
}

fn check(t: &Tet) -> Result<()> {
    let h = t.diameter();
    let threshold = 1e-14 * h.powi(3);
    let v = t.signed_volume().abs();
    if !(v >= threshold) || h == 0.0 {
        return Err(Error::DegenerateTet { volume: v, threshold });
    }
    Ok(())
}

/// The affine map sending the vertices of `reference` to those of `phys`, in order.
pub fn map_from_tets(reference: &Tet, phys: &Tet) -> Result<AffineMap> {
    check(reference)?;
    check(phys)?;
    let e_ref = edge_matrix(reference);
    let inv = e_ref.try_inverse().ok_or(Error::DegenerateTet { volume: 0.0, threshold: 0.0 })?;
    let b = edge_matrix(phys) * inv;
    let b_inv = b.try_inverse().ok_or(Error::DegenerateTet { volume: 0.0, threshold: 0.0 })?;
    let a = phys.0[0] - b * reference.0[0];
    Ok(AffineMap { a, b, j: b.determinant(), b_inv })
}

impl AffineMap {
    pub fn identity() -> Self {
        let i = Matrix3::identity();
        AffineMap { a: Vec3::zeros(), b: i, j: 1.0, b_inv: i }
    }

    pub fn b_inv(&self) -> &Matrix3<f64> {
        &self.b_inv
    }

    pub fn apply(&self, x_hat: &Vec3) -> Vec3 {
        self.a + self.b * x_hat
    }

    pub fn inverse_apply(&self, x: &Vec3) -> Vec3 {
        self.b_inv * (x - self.a)
    }
}

/// τ = B τ̂ Bᵀ / J²
pub fn push_stress_value(m: &AffineMap, t: SymTensor) -> SymTensor {
    (1.0 / (m.j * m.j)) * t.congruence(&m.b)
}

pub fn push_stress(m: &AffineMap, tau_hat: &TensorPoly) -> TensorPoly {
    tau_hat.map(|c| push_stress_value(m, c))
}

/// c = J B⁻ᵀ ĉ B⁻¹
pub fn push_constant_dual(m: &AffineMap, c_hat: SymTensor) -> SymTensor {
    m.j * c_hat.congruence(&m.b_inv.transpose())
}

/// v = J B⁻ᵀ v̂
pub fn push_vector_dual(m: &AffineMap, v_hat: &VecP1) -> VecP1 {
    let bt = m.b_inv.transpose();
    VecP1(v_hat.0.map(|v| m.j * (bt * v)))
}
