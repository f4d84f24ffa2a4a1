//! Tensor- and vector-valued polynomials on a tetrahedron in barycentric form.
//!
//! Quadratic tensor fields are stored over the ten monomials
//! `λ₁, λ₂, λ₃, λ₄, λ₁λ₂, λ₁λ₃, λ₁λ₄, λ₂λ₃, λ₂λ₄, λ₃λ₄` (this spans P²
//! because Σλᵢ = 1). Affine vector fields are stored by their four vertex
//! values. Barycentric coordinates are invariant under affine maps, so
//! the same coefficient arrays describe a field on any tetrahedron.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

use crate::assembly::quadrature::{exact_simplex_integral, exact_triangle_integral};
use crate::symtensor::{SymTensor, Vec3};

pub const N_MONO: usize = 10;

/// Exponent vectors of the monomial basis.
pub const MONOMIALS: [[u32; 4]; N_MONO] = [
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 1, 1],
];

/// Index of the monomial λ_iλ_j (i ≠ j, 0-based) in [`MONOMIALS`].
pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 1) => 4,
        (0, 2) => 5,
        (0, 3) => 6,
        (1, 2) => 7,
        (1, 3) => 8,
        (2, 3) => 9,
        _ => panic!("invalid monomial pair ({i}, {j})"),
    }
}

fn add_exp(a: [u32; 4], b: [u32; 4]) -> [u32; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

fn unit_exp(i: usize) -> [u32; 4] {
    let mut e = [0; 4];
    e[i] = 1;
    e
}

/// Exact integral tables over the monomial basis, normalised by |T| or |F|.
pub struct MonomialTables {
    /// ∫ m_a / |T|
    pub int: [f64; N_MONO],
    /// ∫ m_a m_b / |T|
    pub mass: [[f64; N_MONO]; N_MONO],
    /// ∫ m_a λ_j / |T|
    pub p1: [[f64; 4]; N_MONO],
    /// ∫_{F_i} m_a λ_v / |F_i| (zero when m_a contains λ_i or v == i)
    pub face_p1: [[[f64; 4]; N_MONO]; 4],
}

fn face_integral(face: usize, e: [u32; 4]) -> f64 {
    if e[face] > 0 {
        return 0.0;
    }
    let mut r = [0; 3];
    let mut k = 0;
    for (v, &ev) in e.iter().enumerate() {
        if v != face {
            r[k] = ev;
            k += 1;
        }
    }
    exact_triangle_integral(r)
}

pub fn tables() -> &'static MonomialTables {
    static TABLES: OnceLock<MonomialTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut t = MonomialTables {
            int: [0.0; N_MONO],
            mass: [[0.0; N_MONO]; N_MONO],
            p1: [[0.0; 4]; N_MONO],
            face_p1: [[[0.0; 4]; N_MONO]; 4],
        };
        for a in 0..N_MONO {
            t.int[a] = exact_simplex_integral(MONOMIALS[a]);
            for b in 0..N_MONO {
                t.mass[a][b] = exact_simplex_integral(add_exp(MONOMIALS[a], MONOMIALS[b]));
            }
            for j in 0..4 {
                let e = add_exp(MONOMIALS[a], unit_exp(j));
                t.p1[a][j] = exact_simplex_integral(e);
                for f in 0..4 {
                    t.face_p1[f][a][j] = if j == f { 0.0 } else { face_integral(f, e) };
                }
            }
        }
        t
    })
}

pub fn eval_monomials(bary: &[f64; 4]) -> [f64; N_MONO] {
    let l = bary;
    [
        l[0],
        l[1],
        l[2],
        l[3],
        l[0] * l[1],
        l[0] * l[2],
        l[0] * l[3],
        l[1] * l[2],
        l[1] * l[3],
        l[2] * l[3],
    ]
}

/// Affine vector field given by its values at the four vertices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VecP1(pub [Vec3; 4]);

impl VecP1 {
    pub fn zero() -> Self {
        Self([Vec3::zeros(); 4])
    }

    pub fn constant(v: Vec3) -> Self {
        Self([v; 4])
    }

    /// Basis field λ_a e_c.
    pub fn basis(vertex: usize, comp: usize) -> Self {
        let mut out = Self::zero();
        out.0[vertex][comp] = 1.0;
        out
    }

    pub fn eval(&self, bary: &[f64; 4]) -> Vec3 {
        (0..4).fold(Vec3::zeros(), |acc, i| acc + bary[i] * self.0[i])
    }

    /// Jacobian ∇v (rows = components) given barycentric gradients.
    pub fn gradient(&self, grads: &[Vec3; 4]) -> nalgebra::Matrix3<f64> {
        (0..4).fold(nalgebra::Matrix3::zeros(), |acc, i| acc + self.0[i] * grads[i].transpose())
    }

    pub fn sym_gradient(&self, grads: &[Vec3; 4]) -> SymTensor {
        SymTensor::from_matrix_sym(&self.gradient(grads))
    }

    /// ∫_T v·w divided by |T|.
    pub fn l2_dot(&self, other: &VecP1) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let m = if i == j { 0.1 } else { 0.05 };
                s += m * self.0[i].dot(&other.0[j]);
            }
        }
        s
    }
}

impl Add for VecP1 {
    type Output = VecP1;
    fn add(self, o: VecP1) -> VecP1 {
        VecP1(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Mul<VecP1> for f64 {
    type Output = VecP1;
    fn mul(self, v: VecP1) -> VecP1 {
        VecP1(v.0.map(|x| self * x))
    }
}

/// Symmetric-tensor-valued polynomial of degree ≤ 2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TensorPoly {
    pub coeffs: [SymTensor; N_MONO],
}

impl TensorPoly {
    pub fn zero() -> Self {
        Self { coeffs: [SymTensor::ZERO; N_MONO] }
    }

    pub fn constant(t: SymTensor) -> Self {
        let mut p = Self::zero();
        for i in 0..4 {
            p.coeffs[i] = t;
        }
        p
    }

    /// t · m_a for a single monomial.
    pub fn monomial(t: SymTensor, mono: usize) -> Self {
        let mut p = Self::zero();
        p.coeffs[mono] = t;
        p
    }

    pub fn eval(&self, bary: &[f64; 4]) -> SymTensor {
        let m = eval_monomials(bary);
        self.coeffs.iter().zip(m).fold(SymTensor::ZERO, |acc, (c, v)| acc + v * *c)
    }

    /// Row-wise divergence, an affine vector field.
    pub fn divergence(&self, grads: &[Vec3; 4]) -> VecP1 {
        let mut out = VecP1::zero();
        for k in 0..4 {
            let v = self.coeffs[k].mul_vec(&grads[k]);
            for w in out.0.iter_mut() {
                *w += v;
            }
        }
        for k in 0..4 {
            for l in (k + 1)..4 {
                let c = self.coeffs[pair_index(k, l)];
                out.0[l] += c.mul_vec(&grads[k]);
                out.0[k] += c.mul_vec(&grads[l]);
            }
        }
        out
    }

    /// ∫_T τ divided by |T|.
    pub fn mean(&self) -> SymTensor {
        let t = tables();
        self.coeffs.iter().zip(t.int).fold(SymTensor::ZERO, |acc, (c, w)| acc + w * *c)
    }

    /// Apply a linear map to every coefficient tensor.
    pub fn map(&self, f: impl Fn(SymTensor) -> SymTensor) -> Self {
        Self { coeffs: self.coeffs.map(f) }
    }

    /// Coefficients flattened monomial-major, component-minor.
    pub fn to_vec60(&self) -> [f64; 60] {
        let mut out = [0.0; 60];
        for (a, c) in self.coeffs.iter().enumerate() {
            out[6 * a..6 * a + 6].copy_from_slice(&c.to_array());
        }
        out
    }

    pub fn from_vec60(v: &[f64]) -> Self {
        let mut p = Self::zero();
        for a in 0..N_MONO {
            p.coeffs[a] = SymTensor::from_array(std::array::from_fn(|k| v[6 * a + k]));
        }
        p
    }
}

impl Add for TensorPoly {
    type Output = TensorPoly;
    fn add(self, o: TensorPoly) -> TensorPoly {
        Self { coeffs: std::array::from_fn(|i| self.coeffs[i] + o.coeffs[i]) }
    }
}

impl Mul<TensorPoly> for f64 {
    type Output = TensorPoly;
    fn mul(self, p: TensorPoly) -> TensorPoly {
        p.map(|c| self * c)
    }
}
