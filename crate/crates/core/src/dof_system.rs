//! Global numbering of stress, displacement and trace unknowns.
//!
//! Stress face DOFs are shared by the (at most two) tets of a face and are
//! numbered `3 f + k`, where `k` is the position of the weight vertex in the
//! face's sorted vertex triple. The remaining 18 stress DOFs, the 12
//! displacement DOFs and the trace lift are element local.

use crate::mesh::TetMesh;
use crate::ref_element::{face_vertices, VecP1, N_FACE_DOFS, N_STRESS_DOFS};
use crate::symtensor::Vec3;

pub const N_U_DOFS: usize = 12;
pub const N_INTERIOR_STRESS: usize = N_STRESS_DOFS - N_FACE_DOFS;

#[derive(Debug, Clone)]
pub struct GlobalDofMap {
    pub n_stress: usize,
    pub n_u: usize,
    pub n_trace: usize,
    /// global stress index of each local stress DOF
    pub stress_gather: Vec<[usize; N_STRESS_DOFS]>,
    /// trace unknown of each free vertex, `None` on the Dirichlet boundary
    pub trace_index: Vec<Option<usize>>,
    /// trace unknowns of the lift components `3 a + c` of each tet
    pub trace_gather: Vec<[Option<usize>; 12]>,
    n_face_dofs: usize,
}

impl GlobalDofMap {
    pub fn new(mesh: &TetMesh) -> Self {
        let nf = mesh.faces.len();
        let nt = mesh.n_tets();
        let n_face_dofs = 3 * nf;
        let mut stress_gather = Vec::with_capacity(nt);
        for (t, verts) in mesh.tets.iter().enumerate() {
            let mut g = [0usize; N_STRESS_DOFS];
            for lf in 0..4 {
                let f = &mesh.faces[mesh.tet_faces[t][lf]];
                for (k, &lv) in face_vertices(lf).iter().enumerate() {
                    let pos = f.vertices.iter().position(|&v| v == verts[lv]).expect("face vertex");
                    g[3 * lf + k] = 3 * mesh.tet_faces[t][lf] + pos;
                }
            }
            for m in 0..N_INTERIOR_STRESS {
                g[N_FACE_DOFS + m] = n_face_dofs + N_INTERIOR_STRESS * t + m;
            }
            stress_gather.push(g);
        }
        let mut trace_index = vec![None; mesh.vertices.len()];
        let mut n_free = 0;
        for (v, &b) in mesh.boundary_vertex.iter().enumerate() {
            if !b {
                trace_index[v] = Some(n_free);
                n_free += 1;
            }
        }
        let trace_gather = mesh
            .tets
            .iter()
            .map(|verts| std::array::from_fn(|i| trace_index[verts[i / 3]].map(|v| 3 * v + i % 3)))
            .collect();
        GlobalDofMap {
            n_stress: n_face_dofs + N_INTERIOR_STRESS * nt,
            n_u: N_U_DOFS * nt,
            n_trace: 3 * n_free,
            stress_gather,
            trace_index,
            trace_gather,
            n_face_dofs,
        }
    }

    pub fn n_face_dofs(&self) -> usize {
        self.n_face_dofs
    }

    pub fn u_offset(&self) -> usize {
        self.n_stress
    }

    pub fn trace_offset(&self) -> usize {
        self.n_stress + self.n_u
    }

    pub fn total(&self) -> usize {
        self.n_stress + self.n_u + self.n_trace
    }

    /// Block-local displacement indices `3 a + c` of tet `t`.
    pub fn u_range(&self, t: usize) -> std::ops::Range<usize> {
        N_U_DOFS * t..N_U_DOFS * (t + 1)
    }

    pub fn gather_stress(&self, t: usize, global: &[f64]) -> [f64; N_STRESS_DOFS] {
        self.stress_gather[t].map(|g| global[g])
    }
}

/// Vertex values of the lifted trace: prescribed on Dirichlet vertices, free elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceField {
    pub values: Vec<Vec3>,
    pub dirichlet: Vec<bool>,
}

impl TraceField {
    /// Writes the free trace unknowns into the field.
    pub fn set_free(&mut self, map: &GlobalDofMap, trace: &[f64]) {
        for (v, idx) in map.trace_index.iter().enumerate() {
            if let Some(i) = idx {
                self.values[v] = Vec3::new(trace[3 * i], trace[3 * i + 1], trace[3 * i + 2]);
            }
        }
    }

    pub fn element_values(&self, mesh: &TetMesh, t: usize) -> [Vec3; 4] {
        mesh.tets[t].map(|v| self.values[v])
    }
}

/// The affine field interpolating the four vertex values.
pub fn trace_lift(values: [Vec3; 4]) -> VecP1 {
    VecP1(values)
}

/// Boundary vertices take `g(x)`, interior ones start at zero.
pub fn apply_dirichlet(g: impl Fn(&Vec3) -> Vec3, mesh: &TetMesh) -> TraceField {
    let values = mesh
        .vertices
        .iter()
        .zip(&mesh.boundary_vertex)
        .map(|(x, &b)| if b { g(x) } else { Vec3::zeros() })
        .collect();
    TraceField { values, dirichlet: mesh.boundary_vertex.clone() }
}
