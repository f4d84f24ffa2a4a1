//! Small-dimension tensor algebra: vectors in 3-space, symmetric 3x3 tensors
//! and the isotropic material laws.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Symmetric 3x3 tensor stored by its six independent entries.
///
/// Off-diagonal entries are stored unscaled; `xy` is the (0,1) and (1,0) entry
/// of the full matrix. The Frobenius product accounts for the doubled
/// off-diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor { xx: 0.0, yy: 0.0, zz: 0.0, xy: 0.0, xz: 0.0, yz: 0.0 };

    pub const fn new(xx: f64, yy: f64, zz: f64, xy: f64, xz: f64, yz: f64) -> Self {
        Self { xx, yy, zz, xy, xz, yz }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, b, c, 0.0, 0.0, 0.0)
    }

    /// Component array in storage order (xx, yy, zz, xy, xz, yz).
    pub fn to_array(self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.xy, self.xz, self.yz]
    }

    pub fn from_array(c: [f64; 6]) -> Self {
        Self::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    /// Canonical basis of S in storage order: E_xx, E_yy, E_zz, e_x⊙e_y, e_x⊙e_z, e_y⊙e_z.
    pub fn canonical_basis() -> [SymTensor; 6] {
        let mut out = [SymTensor::ZERO; 6];
        for (k, t) in out.iter_mut().enumerate() {
            let mut c = [0.0; 6];
            c[k] = if k < 3 { 1.0 } else { 0.5 };
            *t = SymTensor::from_array(c);
        }
        out
    }

    pub fn to_matrix(self) -> Matrix3<f64> {
        Matrix3::new(
            self.xx, self.xy, self.xz, //
            self.xy, self.yy, self.yz, //
            self.xz, self.yz, self.zz,
        )
    }

    /// Symmetric part of an arbitrary 3x3 matrix.
    pub fn from_matrix_sym(m: &Matrix3<f64>) -> Self {
        Self::new(
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
        )
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn deviator(self) -> Self {
        let m = self.trace() / 3.0;
        Self { xx: self.xx - m, yy: self.yy - m, zz: self.zz - m, ..self }
    }

    /// Frobenius product τ:σ over all nine entries.
    pub fn ddot(self, o: SymTensor) -> f64 {
        self.xx * o.xx
            + self.yy * o.yy
            + self.zz * o.zz
            + 2.0 * (self.xy * o.xy + self.xz * o.xz + self.yz * o.yz)
    }

    pub fn norm_sq(self) -> f64 {
        self.ddot(self)
    }

    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(self, v: &Vec3) -> Vec3 {
        Vec3::new(
            self.xx * v.x + self.xy * v.y + self.xz * v.z,
            self.xy * v.x + self.yy * v.y + self.yz * v.z,
            self.xz * v.x + self.yz * v.y + self.zz * v.z,
        )
    }

    /// a · τ b
    pub fn bilinear(self, a: &Vec3, b: &Vec3) -> f64 {
        a.dot(&self.mul_vec(b))
    }

    /// B τ Bᵀ for a general matrix B.
    pub fn congruence(self, b: &Matrix3<f64>) -> Self {
        Self::from_matrix_sym(&(b * self.to_matrix() * b.transpose()))
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(self, o: SymTensor) -> SymTensor {
        SymTensor::new(
            self.xx + o.xx,
            self.yy + o.yy,
            self.zz + o.zz,
            self.xy + o.xy,
            self.xz + o.xz,
            self.yz + o.yz,
        )
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, o: SymTensor) {
        *self = *self + o;
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(self, o: SymTensor) -> SymTensor {
        self + (-o)
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        -1.0 * self
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    fn mul(self, t: SymTensor) -> SymTensor {
        SymTensor::new(
            self * t.xx,
            self * t.yy,
            self * t.zz,
            self * t.xy,
            self * t.xz,
            self * t.yz,
        )
    }
}

/// a⊙b = (abᵀ + baᵀ)/2
pub fn sym_outer(a: &Vec3, b: &Vec3) -> SymTensor {
    SymTensor::new(
        a.x * b.x,
        a.y * b.y,
        a.z * b.z,
        0.5 * (a.x * b.y + a.y * b.x),
        0.5 * (a.x * b.z + a.z * b.x),
        0.5 * (a.y * b.z + a.z * b.y),
    )
}

/// Isotropic linear elastic material given by its Lamé parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub mu: f64,
    pub lambda: f64,
}

impl Material {
    pub fn from_lame(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && lambda > 0.0 && mu.is_finite() && lambda.is_finite()) {
            return Err(Error::InvalidMaterial(format!("mu = {mu}, lambda = {lambda}")));
        }
        Ok(Self { mu, lambda })
    }

    /// Young's modulus and Poisson ratio, 0 < ν < 1/2.
    pub fn from_young_poisson(e: f64, nu: f64) -> Result<Self> {
        if !(e > 0.0 && nu > 0.0 && nu < 0.5) {
            return Err(Error::InvalidMaterial(format!("E = {e}, nu = {nu}")));
        }
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        Self::from_lame(mu, lambda)
    }

    /// Weight of the deviatoric part in the compliance form.
    pub fn dev_weight(&self) -> f64 {
        1.0 / (2.0 * self.mu)
    }

    /// Weight of the trace part: ⟨Aτ,τ⟩ = dev_weight |dev τ|² + trace_weight tr(τ)².
    pub fn trace_weight(&self) -> f64 {
        1.0 / (3.0 * (3.0 * self.lambda + 2.0 * self.mu))
    }
}

/// Compliance A = C⁻¹: dev(τ)/(2μ) + tr(τ) Id / (3(3λ+2μ)).
pub fn compliance_apply(t: SymTensor, m: &Material) -> SymTensor {
    m.dev_weight() * t.deviator() + (t.trace() * m.trace_weight()) * SymTensor::identity()
}

/// Elasticity C: 2με + λ tr(ε) Id.
pub fn stiffness_apply(e: SymTensor, m: &Material) -> SymTensor {
    (2.0 * m.mu) * e + (m.lambda * e.trace()) * SymTensor::identity()
}

/// ⟨Aτ, σ⟩ pointwise.
pub fn compliance_product(t: SymTensor, s: SymTensor, m: &Material) -> f64 {
    m.dev_weight() * t.deviator().ddot(s.deviator()) + m.trace_weight() * t.trace() * s.trace()
}
