//! The canonical interpolation onto the stress space and the element-wise L²
//! projection onto affine vector fields.

use nalgebra::Matrix4;
use rand::Rng;
use rayon::prelude::*;

use crate::assembly::quadrature::{quad_rule, triangle_rule_deg5, RuleKind};
use crate::dof_system::GlobalDofMap;
use crate::error::Result;
use crate::mesh::TetMesh;
use crate::ref_element::{
    nodal_basis, StressShapeSet, TensorPoly, TetGeometry, VecP1, N_FACE_DOFS,
};
use crate::symtensor::{SymTensor, Vec3};

/// A tensor field that may be discontinuous across elements; `t` names the
/// element the point is evaluated from.
pub trait TensorField: Sync {
    fn value(&self, t: usize, x: &Vec3) -> SymTensor;
    fn divergence(&self, t: usize, x: &Vec3) -> Vec3;
}

/// A globally smooth field given by closed forms for value and divergence.
pub struct SmoothField<F, G> {
    pub value: F,
    pub divergence: G,
}

impl<F, G> TensorField for SmoothField<F, G>
where
    F: Fn(&Vec3) -> SymTensor + Sync,
    G: Fn(&Vec3) -> Vec3 + Sync,
{
    fn value(&self, _t: usize, x: &Vec3) -> SymTensor {
        (self.value)(x)
    }

    fn divergence(&self, _t: usize, x: &Vec3) -> Vec3 {
        (self.divergence)(x)
    }
}

/// Symmetric tensor field with polynomial components in x, y, z.
#[derive(Debug, Clone)]
pub struct PolynomialTensorField {
    /// exponents of each monomial
    pub exponents: Vec<[u32; 3]>,
    /// component arrays `[xx, yy, zz, xy, xz, yz]` per monomial
    pub coeffs: Vec<[f64; 6]>,
}

impl PolynomialTensorField {
    /// All monomials of total degree ≤ `degree` with uniform random coefficients in [-1, 1].
    pub fn random(rng: &mut impl Rng, degree: u32) -> Self {
        let mut exponents = Vec::new();
        for a in 0..=degree {
            for b in 0..=degree - a {
                for c in 0..=degree - a - b {
                    exponents.push([a, b, c]);
                }
            }
        }
        let coeffs = exponents.iter().map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        Self { exponents, coeffs }
    }

    fn mono(e: [u32; 3], x: &Vec3) -> f64 {
        x.x.powi(e[0] as i32) * x.y.powi(e[1] as i32) * x.z.powi(e[2] as i32)
    }

    fn mono_grad(e: [u32; 3], x: &Vec3) -> Vec3 {
        Vec3::from_fn(|d, _| {
            if e[d] == 0 {
                return 0.0;
            }
            let mut f = e;
            f[d] -= 1;
            e[d] as f64 * Self::mono(f, x)
        })
    }

    pub fn eval(&self, x: &Vec3) -> SymTensor {
        self.exponents
            .iter()
            .zip(&self.coeffs)
            .fold(SymTensor::ZERO, |acc, (&e, c)| acc + Self::mono(e, x) * SymTensor::from_array(*c))
    }

    pub fn div(&self, x: &Vec3) -> Vec3 {
        self.exponents
            .iter()
            .zip(&self.coeffs)
            .fold(Vec3::zeros(), |acc, (&e, c)| acc + SymTensor::from_array(*c).mul_vec(&Self::mono_grad(e, x)))
    }
}

impl TensorField for PolynomialTensorField {
    fn value(&self, _t: usize, x: &Vec3) -> SymTensor {
        self.eval(x)
    }

    fn divergence(&self, _t: usize, x: &Vec3) -> Vec3 {
        self.div(x)
    }
}

/// Global stress coefficients together with the nodal bases used to read them.
#[derive(Debug, Clone)]
pub struct DiscreteStressField {
    pub coeffs: Vec<f64>,
    pub shapes: Vec<StressShapeSet>,
    pub gather: Vec<[usize; 30]>,
}

impl DiscreteStressField {
    pub fn new(mesh: &TetMesh, map: &GlobalDofMap, coeffs: Vec<f64>) -> Result<Self> {
        let shapes = nodal_bases(mesh)?;
        Ok(Self { coeffs, shapes, gather: map.stress_gather.clone() })
    }

    pub fn element_poly(&self, t: usize) -> TensorPoly {
        self.shapes[t].combine(&self.gather[t].map(|g| self.coeffs[g]))
    }

    pub fn element_divergence(&self, t: usize) -> VecP1 {
        self.element_poly(t).divergence(&self.shapes[t].geometry.grads)
    }
}

impl TensorField for DiscreteStressField {
    fn value(&self, t: usize, x: &Vec3) -> SymTensor {
        let g = &self.shapes[t].geometry;
        self.element_poly(t).eval(&g.barycentric(x))
    }

    fn divergence(&self, t: usize, x: &Vec3) -> Vec3 {
        let g = &self.shapes[t].geometry;
        self.element_divergence(t).eval(&g.barycentric(x))
    }
}

pub fn nodal_bases(mesh: &TetMesh) -> Result<Vec<StressShapeSet>> {
    (0..mesh.n_tets()).into_par_iter().map(|t| nodal_basis(&TetGeometry::new(mesh.tet(t))?)).collect()
}

/// L² projection of `v` onto affine fields on one element (degree-5 quadrature).
pub fn project_p1_element(g: &TetGeometry, v: &dyn Fn(&Vec3) -> Vec3) -> VecP1 {
    let mut rhs = [Vec3::zeros(); 4];
    for (b, w) in quad_rule(RuleKind::Deg5Pt14).iter() {
        let val = v(&g.point(b));
        for j in 0..4 {
            rhs[j] += w * b[j] * val;
        }
    }
    let m = Matrix4::from_fn(|i, j| if i == j { 0.1 } else { 0.05 });
    let inv = m.try_inverse().expect("P1 mass matrix");
    VecP1(std::array::from_fn(|i| (0..4).fold(Vec3::zeros(), |acc, j| acc + inv[(i, j)] * rhs[j])))
}

pub fn project_p1(mesh: &TetMesh, v: &(dyn Fn(&Vec3) -> Vec3 + Sync)) -> Result<Vec<VecP1>> {
    (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| Ok(project_p1_element(&TetGeometry::new(mesh.tet(t))?, v)))
        .collect()
}

/// |F|⟨n·τn, λ_v⟩_F for the three face vertices in the given order.
fn face_dofs(xs: [Vec3; 3], field: &dyn TensorField, t: usize) -> [f64; 3] {
    let cross = (xs[1] - xs[0]).cross(&(xs[2] - xs[0]));
    let area = 0.5 * cross.norm();
    let n = cross / cross.norm();
    let (pts, wts) = triangle_rule_deg5();
    let mut out = [0.0; 3];
    for (mu, w) in pts.iter().zip(&wts) {
        let x = mu[0] * xs[0] + mu[1] * xs[1] + mu[2] * xs[2];
        let nn = field.value(t, &x).bilinear(&n, &n);
        for k in 0..3 {
            out[k] += w * nn * mu[k];
        }
    }
    out.map(|v| area * area * v)
}

/// Evaluates all stress DOFs of `field`. Face DOFs are computed once per face
/// from its first owner.
pub fn interpolate_nn(field: &dyn TensorField, mesh: &TetMesh, map: &GlobalDofMap) -> Result<DiscreteStressField> {
    let mut coeffs = vec![0.0; map.n_stress];
    let faces: Vec<[f64; 3]> = mesh
        .faces
        .par_iter()
        .map(|f| face_dofs(f.vertices.map(|v| mesh.vertices[v]), field, f.owners[0].0))
        .collect();
    for (fi, d) in faces.iter().enumerate() {
        coeffs[3 * fi..3 * fi + 3].copy_from_slice(d);
    }
    let shapes = nodal_bases(mesh)?;
    let rule = quad_rule(RuleKind::Deg5Pt14);
    let interior: Vec<[f64; 18]> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let g = &shapes[t].geometry;
            let mut out = [0.0; 18];
            let basis = SymTensor::canonical_basis();
            for (b, w) in rule.iter() {
                let x = g.point(b);
                let tau = field.value(t, &x);
                let div = field.divergence(t, &x);
                for (k, e) in basis.iter().enumerate() {
                    out[k] += w * tau.ddot(*e);
                }
                for j in 0..4 {
                    for d in 0..3 {
                        out[6 + 3 * j + d] += w * div[d] * b[j];
                    }
                }
            }
            out.map(|v| g.volume * v)
        })
        .collect();
    for (t, vals) in interior.iter().enumerate() {
        for (m, v) in vals.iter().enumerate() {
            coeffs[map.stress_gather[t][N_FACE_DOFS + m]] = *v;
        }
    }
    Ok(DiscreteStressField { coeffs, shapes, gather: map.stress_gather.clone() })
}

/// max over elements of ‖div(I_nn τ) − Π¹ div τ‖_T
pub fn check_commuting(field: &dyn TensorField, mesh: &TetMesh, map: &GlobalDofMap) -> Result<f64> {
    let interp = interpolate_nn(field, mesh, map)?;
    let defects: Vec<f64> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let g = &interp.shapes[t].geometry;
            let lhs = interp.element_divergence(t);
            let rhs = project_p1_element(g, &|x| field.divergence(t, x));
            let d = lhs + (-1.0) * rhs;
            (g.volume * d.l2_dot(&d)).max(0.0).sqrt()
        })
        .collect();
    Ok(defects.into_iter().fold(0.0, f64::max))
}
