//! Exact integration of barycentric monomials and symmetric quadrature rules
//! on tetrahedra and triangles.

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ∫_T λ₁ᵃλ₂ᵇλ₃ᶜλ₄ᵈ dx divided by |T|, i.e. 3! a!b!c!d! / (a+b+c+d+3)!.
pub fn exact_simplex_integral(exponents: [u32; 4]) -> f64 {
    let total: u32 = exponents.iter().sum();
    let num: f64 = exponents.iter().map(|&e| factorial(e)).product();
    6.0 * num / factorial(total + 3)
}

/// ∫_F μ₁ᵃμ₂ᵇμ₃ᶜ ds divided by |F| for barycentric coordinates μ of a triangle.
pub fn exact_triangle_integral(exponents: [u32; 3]) -> f64 {
    let total: u32 = exponents.iter().sum();
    let num: f64 = exponents.iter().map(|&e| factorial(e)).product();
    2.0 * num / factorial(total + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// 4 points, exact for degree 2.
    Deg2Pt4,
    /// 14 points, exact for degree 5.
    Deg5Pt14,
}

/// Tetrahedral rule in barycentric coordinates; weights sum to one and are
/// scaled by |T| at use.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    pub degree: u32,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 4], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

fn orbit_a3(a: f64) -> Vec<[f64; 4]> {
    let b = 1.0 - 3.0 * a;
    vec![[b, a, a, a], [a, b, a, a], [a, a, b, a], [a, a, a, b]]
}

fn orbit_22(a: f64) -> Vec<[f64; 4]> {
    let b = 0.5 - a;
    vec![
        [a, a, b, b],
        [a, b, a, b],
        [a, b, b, a],
        [b, a, a, b],
        [b, a, b, a],
        [b, b, a, a],
    ]
}

pub fn quad_rule(kind: RuleKind) -> QuadratureRule {
    match kind {
        RuleKind::Deg2Pt4 => {
            let a = (5.0 - 5.0_f64.sqrt()) / 20.0;
            let points = orbit_a3(a);
            QuadratureRule { weights: vec![0.25; points.len()], points, degree: 2 }
        }
        RuleKind::Deg5Pt14 => {
            let mut points = Vec::with_capacity(14);
            let mut weights = Vec::with_capacity(14);
            let groups_a3 = [
                (0.310_885_919_263_300_6, 0.112_687_925_718_015_9),
                (0.092_735_250_310_891_2, 0.073_493_043_116_361_9),
            ];
            for (a, w) in groups_a3 {
                for p in orbit_a3(a) {
                    points.push(p);
                    weights.push(w);
                }
            }
            let (a, w) = (0.045_503_704_125_649_6, 0.042_546_020_777_081_5);
            for p in orbit_22(a) {
                points.push(p);
                weights.push(w);
            }
            QuadratureRule { points, weights, degree: 5 }
        }
    }
}

/// 7-point triangle rule exact for degree 5, barycentric points, weights sum to one.
pub fn triangle_rule_deg5() -> (Vec<[f64; 3]>, Vec<f64>) {
    let s15 = 15.0_f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    let mut pts = vec![[1.0 / 3.0; 3]];
    let mut wts = vec![9.0 / 40.0];
    for (a, w) in [(a1, w1), (a2, w2)] {
        let b = 1.0 - 2.0 * a;
        for p in [[b, a, a], [a, b, a], [a, a, b]] {
            pts.push(p);
            wts.push(w);
        }
    }
    (pts, wts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomials_up_to(deg: u32) -> Vec<[u32; 4]> {
        let mut out = Vec::new();
        for a in 0..=deg {
            for b in 0..=deg - a {
                for c in 0..=deg - a - b {
                    for d in 0..=deg - a - b - c {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    }

    fn apply(rule: &QuadratureRule, e: [u32; 4]) -> f64 {
        rule.iter()
            .map(|(p, w)| w * (0..4).map(|i| p[i].powi(e[i] as i32)).product::<f64>())
            .sum()
    }

    #[test]
    fn exact_formula_examples() {
        assert!((exact_simplex_integral([1, 1, 0, 0]) - 1.0 / 20.0).abs() < 1e-16);
        assert_eq!(exact_simplex_integral([0, 0, 0, 0]), 1.0);
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let mut a = [0; 4];
                a[i] += 2;
                let mut b = [0; 4];
                b[i] += 1;
                b[j] += 1;
                let ratio = exact_simplex_integral(a) / exact_simplex_integral(b);
                assert!((ratio - 2.0).abs() < 1e-14);
            }
        }
        assert!((exact_triangle_integral([1, 0, 0]) - 1.0 / 3.0).abs() < 1e-16);
        assert!((exact_triangle_integral([1, 1, 0]) - 1.0 / 12.0).abs() < 1e-16);
    }

    /// Independent oracle: collapsed (Duffy) tensor Gauss-Legendre rule,
    /// exact for polynomial degree <= 13.
    fn collapsed_gauss(e: [u32; 4]) -> f64 {
        // nodes/weights of 8-point Gauss-Legendre on [0,1]
        let x = [
            0.019_855_071_751_231_856,
            0.101_666_761_293_186_63,
            0.237_233_795_041_835_5,
            0.408_282_678_752_175_1,
            0.591_717_321_247_824_9,
            0.762_766_204_958_164_5,
            0.898_333_238_706_813_4,
            0.980_144_928_248_768_2,
        ];
        let w = [
            0.050_614_268_145_188_13,
            0.111_190_517_226_687_24,
            0.156_853_322_938_943_64,
            0.181_341_891_689_180_99,
            0.181_341_891_689_180_99,
            0.156_853_322_938_943_64,
            0.111_190_517_226_687_24,
            0.050_614_268_145_188_13,
        ];
        let mut s = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let (u, v, t): (f64, f64, f64) = (x[i], x[j], x[k]);
                    let px = u;
                    let py = (1.0 - u) * v;
                    let pz = (1.0 - u) * (1.0 - v) * t;
                    let jac = (1.0 - u).powi(2) * (1.0 - v);
                    let l: [f64; 4] = [1.0 - px - py - pz, px, py, pz];
                    let f: f64 = (0..4).map(|m| l[m].powi(e[m] as i32)).product();
                    s += w[i] * w[j] * w[k] * jac * f;
                }
            }
        }
        s * 6.0
    }

    #[test]
    fn exact_formula_matches_independent_quadrature() {
        for e in monomials_up_to(6) {
            let exact = exact_simplex_integral(e);
            assert!((exact - collapsed_gauss(e)).abs() < 1e-12 * exact.max(1e-3), "{e:?}");
        }
    }

    #[test]
    fn rules_reach_declared_degree() {
        for kind in [RuleKind::Deg2Pt4, RuleKind::Deg5Pt14] {
            let rule = quad_rule(kind);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for p in &rule.points {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
            for e in monomials_up_to(rule.degree) {
                let exact = exact_simplex_integral(e);
                let q = apply(&rule, e);
                assert!((q - exact).abs() <= 1e-12 * exact, "{kind:?} {e:?}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn rule_examples() {
        let r4 = quad_rule(RuleKind::Deg2Pt4);
        assert_eq!(r4.len(), 4);
        assert!((apply(&r4, [1, 1, 0, 0]) - 1.0 / 20.0).abs() < 1e-13);
        let r14 = quad_rule(RuleKind::Deg5Pt14);
        assert_eq!(r14.len(), 14);
        let e = [2, 2, 1, 0];
        assert!((apply(&r14, e) - exact_simplex_integral(e)).abs() < 1e-12);
        // degree 6 is not integrated exactly
        let e6 = [6, 0, 0, 0];
        assert!((apply(&r14, e6) - exact_simplex_integral(e6)).abs() > 1e-8);
    }

    #[test]
    fn triangle_rule_degree_five() {
        let (p, w) = triangle_rule_deg5();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for a in 0..=5u32 {
            for b in 0..=5 - a {
                for c in 0..=5 - a - b {
                    let q: f64 = p
                        .iter()
                        .zip(&w)
                        .map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32))
                        .sum();
                    let exact = exact_triangle_integral([a, b, c]);
                    assert!((q - exact).abs() < 1e-13 * exact.max(1e-3), "{a}{b}{c}");
                }
            }
        }
    }
}
