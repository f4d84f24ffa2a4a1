//! Exact solutions: the trigonometric manufactured displacement on the unit
//! cube (as printed, and with the third component symmetrized) and affine
//! patch-test displacements.

use nalgebra::Matrix3;

use crate::symtensor::{stiffness_apply, Material, SymTensor, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Variant {
    /// u₃ = cos(3x₁)cos(3x₃)sin(3x₃)
    Paper,
    /// u₃ = cos(3x₁)cos(3x₂)sin(3x₃)
    Symmetrized,
}

/// Everything the study needs from an exact solution.
pub trait ExactSolution: Sync {
    fn u(&self, x: &Vec3) -> Vec3;
    /// ∇u, rows are components
    fn grad_u(&self, x: &Vec3) -> Matrix3<f64>;
    fn div_sigma(&self, x: &Vec3, m: &Material) -> Vec3;

    fn strain(&self, x: &Vec3) -> SymTensor {
        SymTensor::from_matrix_sym(&self.grad_u(x))
    }

    fn sigma(&self, x: &Vec3, m: &Material) -> SymTensor {
        stiffness_apply(self.strain(x), m)
    }

    /// f = −div σ
    fn f(&self, x: &Vec3, m: &Material) -> Vec3 {
        -self.div_sigma(x, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Factor {
    One,
    Sin,
    Cos,
    /// sin(kx)cos(kx)
    SinCos,
}

const K: f64 = 3.0;

impl Factor {
    /// value, first and second derivative
    fn eval(self, x: f64) -> [f64; 3] {
        let (s, c) = (K * x).sin_cos();
        match self {
            Factor::One => [1.0, 0.0, 0.0],
            Factor::Sin => [s, K * c, -K * K * s],
            Factor::Cos => [c, -K * s, -K * K * c],
            Factor::SinCos => {
                let (s2, c2) = (2.0 * K * x).sin_cos();
                [0.5 * s2, K * c2, -2.0 * K * K * s2]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub variant: Variant,
    factors: [[Factor; 3]; 3],
}

impl Manufactured {
    pub fn new(variant: Variant) -> Self {
        use Factor::*;
        let third = match variant {
            Variant::Paper => [Cos, One, SinCos],
            Variant::Symmetrized => [Cos, Cos, Sin],
        };
        Manufactured { variant, factors: [[Sin, Cos, Cos], [Cos, Sin, Cos], third] }
    }

    fn tables(&self, x: &Vec3) -> [[[f64; 3]; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|d| self.factors[i][d].eval(x[d])))
    }

    /// ∂_j ∂_k u_i
    fn hessian(t: &[[f64; 3]; 3], j: usize, k: usize) -> f64 {
        let mut order = [0usize; 3];
        order[j] += 1;
        order[k] += 1;
        (0..3).map(|d| t[d][order[d]]).product()
    }
}

impl ExactSolution for Manufactured {
    fn u(&self, x: &Vec3) -> Vec3 {
        let t = self.tables(x);
        Vec3::from_fn(|i, _| (0..3).map(|d| t[i][d][0]).product())
    }

    fn grad_u(&self, x: &Vec3) -> Matrix3<f64> {
        let t = self.tables(x);
        Matrix3::from_fn(|i, j| (0..3).map(|d| t[i][d][usize::from(d == j)]).product())
    }

    fn div_sigma(&self, x: &Vec3, m: &Material) -> Vec3 {
        let t = self.tables(x);
        // ∂_i div u
        let grad_div = Vec3::from_fn(|i, _| (0..3).map(|j| Self::hessian(&t[j], i, j)).sum());
        Vec3::from_fn(|i, _| {
            let lap: f64 = (0..3).map(|j| Self::hessian(&t[i], j, j)).sum();
            m.mu * (lap + grad_div[i]) + m.lambda * grad_div[i]
        })
    }
}

/// u = a + M x; σ is constant and f vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: Vec3,
    pub m: Matrix3<f64>,
}

impl ExactSolution for Affine {
    fn u(&self, x: &Vec3) -> Vec3 {
        self.a + self.m * x
    }

    fn grad_u(&self, _x: &Vec3) -> Matrix3<f64> {
        self.m
    }

    fn div_sigma(&self, _x: &Vec3, _m: &Material) -> Vec3 {
        Vec3::zeros()
    }
}
