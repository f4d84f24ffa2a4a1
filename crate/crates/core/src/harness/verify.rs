//! Built-in verification suites run by `nn-elast verify <suite>`.

use nalgebra::Matrix3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::manufactured::Affine;
use super::study::{compute_errors, exact_norm, solve_level};
use crate::assembly::quadrature::{exact_simplex_integral, quad_rule, RuleKind};
use crate::assembly::SolverKind;
use crate::dof_system::GlobalDofMap;
use crate::error::Result;
use crate::geometry_map::{map_from_tets, push_constant_dual, push_stress, push_vector_dual};
use crate::interpolation::{check_commuting, PolynomialTensorField};
use crate::mesh::{generate_box, BoxBounds};
use crate::ref_element::{
    build_nn_tensors, div_moment, dof_matrix, face_moment, reduced_matrix_12, spanning_basis, tensor_moment,
    Tet, TetGeometry, TensorPoly, VecP1,
};
use crate::symtensor::{Material, SymTensor, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Unisolvence,
    Transform,
    Commuting,
    Patch,
    Quadrature,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Unisolvence, Suite::Transform, Suite::Commuting, Suite::Patch, Suite::Quadrature];
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub lines: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport { suite, passed: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{line} [{}]", if ok { "ok" } else { "FAIL" }));
    }
}

const SEED: u64 = 20_240_601;

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    match suite {
        Suite::Unisolvence => unisolvence(),
        Suite::Transform => transform(),
        Suite::Commuting => commuting(),
        Suite::Patch => patch(),
        Suite::Quadrature => quadrature(),
    }
}

/// Reduced determinant on the reference tet and the conditioning of the full
/// DOF matrix on random tets.
pub fn unisolvence() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Unisolvence);
    let (_, det) = reduced_matrix_12(&TetGeometry::new(Tet::reference())?);
    let expect = 2025.0 / 256.0;
    let rel = ((det - expect) / expect).abs();
    r.check(rel < 1e-10, format!("reference determinant {det:.15} (2025/256 = {expect}), relative error {rel:.2e}"));
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let g = TetGeometry::new(Tet::random(&mut rng, 20.0))?;
        let d = dof_matrix(&g, &spanning_basis(&build_nn_tensors(&g)));
        let sv = d.singular_values();
        worst = worst.min(sv.min() / sv.max());
    }
    r.check(worst > 1e-12, format!("100 random tets: smallest singular value ratio of the DOF matrix {worst:.3e}"));
    Ok(r)
}

fn random_sym(rng: &mut StdRng) -> SymTensor {
    SymTensor::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
}

/// Face, volume and divergence moments are unchanged by the element maps.
pub fn transform() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Transform);
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let reference = Tet::reference();
    let gr = TetGeometry::new(reference)?;
    let span = spanning_basis(&build_nn_tensors(&gr));
    let mut worst = [0.0f64; 3];
    for _ in 0..20 {
        let t = Tet::random(&mut rng, 20.0);
        let g = TetGeometry::new(t)?;
        let m = map_from_tets(&reference, &t)?;
        let tau_hat = span.iter().fold(TensorPoly::zero(), |acc, p| acc + rng.random_range(-1.0..1.0) * *p);
        let tau = push_stress(&m, &tau_hat);
        let scale = 1.0 + tau_hat.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
        for f in 0..4 {
            let q: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let d = face_moment(&g, &tau, f, q) - face_moment(&gr, &tau_hat, f, q);
            worst[0] = worst[0].max(d.abs() / scale);
        }
        let c_hat = random_sym(&mut rng);
        let d = tensor_moment(&g, &tau, push_constant_dual(&m, c_hat)) - tensor_moment(&gr, &tau_hat, c_hat);
        worst[1] = worst[1].max(d.abs() / scale);
        let v_hat = VecP1(std::array::from_fn(|_| {
            Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }));
        let d = div_moment(&g, &tau, &push_vector_dual(&m, &v_hat)) - div_moment(&gr, &tau_hat, &v_hat);
        worst[2] = worst[2].max(d.abs() / scale);
    }
    for (name, w) in ["face", "volume", "divergence"].iter().zip(worst) {
        r.check(w < 1e-10, format!("20 random (tet, shape) pairs: max {name} moment defect {w:.2e}"));
    }
    Ok(r)
}

/// div I_nn τ equals the P¹ projection of div τ on the n = 2 box mesh.
pub fn commuting() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Commuting);
    let mut rng = StdRng::seed_from_u64(SEED + 2);
    let mesh = generate_box(2, BoxBounds::unit())?;
    let map = GlobalDofMap::new(&mesh);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = PolynomialTensorField::random(&mut rng, 4);
        worst = worst.max(check_commuting(&p, &mesh, &map)?);
    }
    r.check(worst < 1e-9, format!("20 random degree-4 fields: max commuting defect {worst:.2e}"));
    Ok(r)
}

/// Affine displacement with f = 0 is reproduced exactly.
pub fn patch() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Patch);
    let mut rng = StdRng::seed_from_u64(SEED + 3);
    let exact = Affine {
        a: Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)),
        m: Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0)),
    };
    for nu in [0.3, 0.4999] {
        let material = Material::from_young_poisson(1.0, nu)?;
        let sol = solve_level(&exact, &material, 2, SolverKind::Hybrid, 1e-10, None)?;
        let err = compute_errors(&sol, &exact, &material)?;
        let norm = exact_norm(&exact, &material, 2)?;
        let rel = err.map(|e| e / norm);
        let ok = rel.iter().all(|&e| e < 1e-8);
        r.check(
            ok,
            format!(
                "nu = {nu}, n = 2: relative errors u {:.2e}, strain {:.2e}, sigma {:.2e}, div sigma {:.2e}",
                rel[0], rel[1], rel[2], rel[3]
            ),
        );
    }
    Ok(r)
}

/// Both tetrahedral rules integrate all monomials up to their degree exactly.
pub fn quadrature() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Quadrature);
    for kind in [RuleKind::Deg2Pt4, RuleKind::Deg5Pt14] {
        let rule = quad_rule(kind);
        let mut worst = 0.0f64;
        let d = rule.degree;
        for a in 0..=d {
            for b in 0..=d - a {
                for c in 0..=d - a - b {
                    for e in 0..=d - a - b - c {
                        let q: f64 = rule
                            .iter()
                            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32) * p[3].powi(e as i32))
                            .sum();
                        let exact = exact_simplex_integral([a, b, c, e]);
                        worst = worst.max((q - exact).abs() / exact);
                    }
                }
            }
        }
        r.check(worst < 1e-12, format!("{}-point rule, degree {d}: max relative error {worst:.2e}", rule.len()));
    }
    Ok(r)
}
