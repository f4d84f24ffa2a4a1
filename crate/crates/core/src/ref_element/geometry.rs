use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::symtensor::Vec3;

/// Tetrahedron by its vertices; face `i` is opposite vertex `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tet(pub [Vec3; 4]);

impl Tet {
    pub fn reference() -> Self {
        Tet([Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()])
    }

    /// Positively oriented tet with vertices in [-1,1]³ and diameter/inradius ≤ `max_ratio`
    /// (rejection sampling; a regular tet has ratio 2√6 ≈ 4.9).
    pub fn random(rng: &mut impl rand::Rng, max_ratio: f64) -> Self {
        loop {
            let mut t = Tet(std::array::from_fn(|_| {
                Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }));
            if t.signed_volume() < 0.0 {
                t.0.swap(2, 3);
            }
            if t.signed_volume() > 1e-3 && t.diameter() / t.inradius() <= max_ratio {
                return t;
            }
        }
    }

    pub fn signed_volume(&self) -> f64 {
        let [a, b, c, d] = self.0;
        (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
    }

    pub fn diameter(&self) -> f64 {
        let mut h: f64 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                h = h.max((self.0[i] - self.0[j]).norm());
            }
        }
        h
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let v = face_vertices(face);
        let p = self.0;
        0.5 * (p[v[1]] - p[v[0]]).cross(&(p[v[2]] - p[v[0]])).norm()
    }

    pub fn inradius(&self) -> f64 {
        let area: f64 = (0..4).map(|f| self.face_area(f)).sum();
        3.0 * self.signed_volume().abs() / area
    }

    pub fn point(&self, bary: &[f64; 4]) -> Vec3 {
        (0..4).fold(Vec3::zeros(), |acc, i| acc + bary[i] * self.0[i])
    }
}

/// Local vertices of face `i` in ascending order.
pub const fn face_vertices(face: usize) -> [usize; 3] {
    match face {
        0 => [1, 2, 3],
        1 => [0, 2, 3],
        2 => [0, 1, 3],
        _ => [0, 1, 2],
    }
}

/// Orientation of the edge vector shared by faces (i, j): `(tail, head)` local
/// vertex indices, e_{i,j} ∝ x_head − x_tail. On the unit reference
/// tetrahedron this reproduces e_{1,2} = (0,1,−1), e_{1,3} = (1,0,−1),
/// e_{1,4} = (1,−1,0), e_{2,3} = (0,0,1), e_{2,4} = (0,1,0), e_{3,4} = (1,0,0).
fn edge_orientation(i: usize, j: usize) -> (usize, usize) {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 1) => (3, 2),
        (0, 2) => (3, 1),
        (0, 3) => (2, 1),
        (1, 2) => (0, 3),
        (1, 3) => (0, 2),
        (2, 3) => (0, 1),
        _ => panic!("edge between faces {i} and {j}"),
    }
}

#[derive(Debug, Clone)]
pub struct TetGeometry {
    pub tet: Tet,
    /// ñ_i = ∇λ_i
    pub grads: [Vec3; 4],
    /// exterior unit normals
    pub normals: [Vec3; 4],
    pub face_areas: [f64; 4],
    pub volume: f64,
    /// unit edge vectors, `edges[i][j]` is generated by the edge shared by faces i and j
    pub edges: [[Vec3; 4]; 4],
    pub diameter: f64,
}

impl TetGeometry {
    pub fn new(tet: Tet) -> Result<Self> {
        let h = tet.diameter();
        let sv = tet.signed_volume();
        let threshold = 1e-14 * h.powi(3);
        if !(sv.abs() >= threshold) || h == 0.0 {
            return Err(Error::DegenerateTet { volume: sv.abs(), threshold });
        }
        let [x1, x2, x3, x4] = tet.0;
        let b = Matrix3::from_columns(&[x2 - x1, x3 - x1, x4 - x1]);
        let binv = b.try_inverse().ok_or(Error::DegenerateTet { volume: sv.abs(), threshold })?;
        let g2 = binv.row(0).transpose();
        let g3 = binv.row(1).transpose();
        let g4 = binv.row(2).transpose();
        let grads = [-(g2 + g3 + g4), g2, g3, g4];
        let normals = grads.map(|g| -g / g.norm());
        let volume = sv.abs();
        let face_areas = std::array::from_fn(|f| tet.face_area(f));
        let mut edges = [[Vec3::zeros(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let (t, hd) = edge_orientation(i, j);
                    let e = tet.0[hd] - tet.0[t];
                    edges[i][j] = e / e.norm();
                }
            }
        }
        Ok(Self { tet, grads, normals, face_areas, volume, edges, diameter: h })
    }

    pub fn barycentric(&self, x: &Vec3) -> [f64; 4] {
        let d = x - self.tet.0[0];
        let l2 = self.grads[1].dot(&d);
        let l3 = self.grads[2].dot(&d);
        let l4 = self.grads[3].dot(&d);
        [1.0 - l2 - l3 - l4, l2, l3, l4]
    }

    pub fn point(&self, bary: &[f64; 4]) -> Vec3 {
        self.tet.point(bary)
    }
}
