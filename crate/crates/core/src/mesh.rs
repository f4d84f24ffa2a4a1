//! Tetrahedral meshes: structured box meshes, face topology and a small ASCII
//! exchange format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ref_element::{face_vertices, Tet};
use crate::symtensor::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// global vertex ids, ascending
    pub vertices: [usize; 3],
    /// (tet, local face index); only the first `n_owners` entries are meaningful
    pub owners: [(usize, usize); 2],
    pub n_owners: usize,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.n_owners == 1
    }
}

#[derive(Debug, Clone)]
pub struct TetMesh {
    pub vertices: Vec<Vec3>,
    /// face `i` of each tet is opposite its local vertex `i`
    pub tets: Vec<[usize; 4]>,
    pub faces: Vec<Face>,
    /// global face id of each local face
    pub tet_faces: Vec<[usize; 4]>,
    pub boundary_vertex: Vec<bool>,
    /// h_T = diam(T)
    pub h_t: Vec<f64>,
    pub h: f64,
    /// orientation repairs made during construction
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQualityReport {
    pub min_h: f64,
    pub max_h: f64,
    /// max over tets of h_T / (2 inradius)
    pub max_shape_ratio: f64,
    pub n_tets: usize,
    pub n_faces: usize,
    pub n_vertices: usize,
    pub n_interior_faces: usize,
    pub n_boundary_faces: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoxBounds {
    pub fn unit() -> Self {
        BoxBounds { min: [0.0; 3], max: [1.0; 3] }
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|d| self.max[d] - self.min[d]).product()
    }
}

impl TetMesh {
    /// Builds the topology. Negatively oriented tets are repaired by swapping
    /// their last two vertices.
    pub fn new(vertices: Vec<Vec3>, mut tets: Vec<[usize; 4]>) -> Result<Self> {
        let mut warnings = Vec::new();
        let mut h_t = Vec::with_capacity(tets.len());
        for (k, t) in tets.iter_mut().enumerate() {
            for &v in t.iter() {
                if v >= vertices.len() {
                    return Err(Error::InvalidConfig(format!("tet {k} references vertex {v} of {}", vertices.len())));
                }
            }
            let tet = Tet(t.map(|v| vertices[v]));
            let h = tet.diameter();
            let vol = tet.signed_volume();
            let threshold = 1e-14 * h.powi(3);
            if !(vol.abs() >= threshold) || h == 0.0 {
                return Err(Error::DegenerateTet { volume: vol.abs(), threshold });
            }
            if vol < 0.0 {
                t.swap(2, 3);
                let msg = format!("tet {k} had negative orientation; swapped its last two vertices");
                log::warn!("{msg}");
                warnings.push(msg);
            }
            h_t.push(h);
        }
        let (faces, tet_faces) = extract_faces(&tets)?;
        let mut boundary_vertex = vec![false; vertices.len()];
        for f in faces.iter().filter(|f| f.is_boundary()) {
            for &v in &f.vertices {
                boundary_vertex[v] = true;
            }
        }
        let h = h_t.iter().cloned().fold(0.0, f64::max);
        Ok(TetMesh { vertices, tets, faces, tet_faces, boundary_vertex, h_t, h, warnings })
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn tet(&self, k: usize) -> Tet {
        Tet(self.tets[k].map(|v| self.vertices[v]))
    }

    pub fn quality(&self) -> MeshQualityReport {
        let mut max_ratio: f64 = 0.0;
        for k in 0..self.n_tets() {
            let t = self.tet(k);
            max_ratio = max_ratio.max(self.h_t[k] / (2.0 * t.inradius()));
        }
        let n_boundary = self.faces.iter().filter(|f| f.is_boundary()).count();
        MeshQualityReport {
            min_h: self.h_t.iter().cloned().fold(f64::INFINITY, f64::min),
            max_h: self.h,
            max_shape_ratio: max_ratio,
            n_tets: self.n_tets(),
            n_faces: self.faces.len(),
            n_vertices: self.vertices.len(),
            n_interior_faces: self.faces.len() - n_boundary,
            n_boundary_faces: n_boundary,
        }
    }

    /// Hash of the connectivity (tets and faces), independent of coordinates.
    pub fn topology_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.vertices.len().hash(&mut h);
        self.tets.hash(&mut h);
        for f in &self.faces {
            f.vertices.hash(&mut h);
            f.n_owners.hash(&mut h);
        }
        h.finish()
    }
}

/// Global faces keyed by sorted vertex triples.
pub fn extract_faces(tets: &[[usize; 4]]) -> Result<(Vec<Face>, Vec<[usize; 4]>)> {
    let mut index: HashMap<[usize; 3], usize> = HashMap::with_capacity(tets.len() * 2 + 4);
    let mut faces: Vec<Face> = Vec::new();
    let mut tet_faces = vec![[0usize; 4]; tets.len()];
    for (k, t) in tets.iter().enumerate() {
        for lf in 0..4 {
            let mut key = face_vertices(lf).map(|v| t[v]);
            key.sort_unstable();
            let id = *index.entry(key).or_insert_with(|| {
                faces.push(Face { vertices: key, owners: [(k, lf); 2], n_owners: 0 });
                faces.len() - 1
            });
            let f = &mut faces[id];
            if f.n_owners >= 2 {
                return Err(Error::NonConformingMesh { face: key, owners: f.n_owners + 1 });
            }
            f.owners[f.n_owners] = (k, lf);
            f.n_owners += 1;
            tet_faces[k][lf] = id;
        }
    }
    Ok((faces, tet_faces))
}

/// n³ cubes, each split into six tetrahedra around the main diagonal.
pub fn generate_box(n: usize, bounds: BoxBounds) -> Result<TetMesh> {
    if n == 0 {
        return Err(Error::InvalidConfig("box subdivision must be at least 1".into()));
    }
    let m = n + 1;
    let id = |i: usize, j: usize, k: usize| i + m * (j + m * k);
    let mut vertices = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let c = [i, j, k];
                vertices.push(Vec3::from_fn(|d, _| {
                    bounds.min[d] + (bounds.max[d] - bounds.min[d]) * c[d] as f64 / n as f64
                }));
            }
        }
    }
    // axis orders of the six monotone paths from (0,0,0) to (1,1,1), with parity
    const PERMS: [([usize; 3], bool); 6] = [
        ([0, 1, 2], false),
        ([0, 2, 1], true),
        ([1, 0, 2], true),
        ([1, 2, 0], false),
        ([2, 0, 1], false),
        ([2, 1, 0], true),
    ];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for (p, odd) in PERMS {
                    let mut c = [i, j, k];
                    let mut t = [id(c[0], c[1], c[2]); 4];
                    for (s, &axis) in p.iter().enumerate() {
                        c[axis] += 1;
                        t[s + 1] = id(c[0], c[1], c[2]);
                    }
                    if odd {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }
    TetMesh::new(vertices, tets)
}

pub fn export_ascii(mesh: &TetMesh, path: &Path) -> Result<()> {
    let mut s = String::new();
    s.push_str("tetmesh 1\n");
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?} {:?}", v.x, v.y, v.z);
    }
    let _ = writeln!(s, "tets {}", mesh.tets.len());
    for t in &mesh.tets {
        let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn import_ascii(path: &Path) -> Result<TetMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ascii(&text)
}

/// Parses the `tetmesh 1` format. Line numbers in errors are 1-based.
pub fn parse_ascii(text: &str) -> Result<TetMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let last_line = text.lines().count().max(1);
    let mut next = |what: &str| lines.next().ok_or(Error::Parse { line: last_line, msg: format!("expected {what}") });
    let err = |line: usize, msg: String| Error::Parse { line, msg };

    let (ln, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["tetmesh", "1"] {
        return Err(err(ln, format!("expected 'tetmesh 1', found '{header}'")));
    }
    let count = |ln: usize, l: &str, key: &str| -> Result<usize> {
        let parts: Vec<&str> = l.split_whitespace().collect();
        match parts.as_slice() {
            [k, n] if *k == key => n.parse().map_err(|_| err(ln, format!("invalid count '{n}'"))),
            _ => Err(err(ln, format!("expected '{key} <count>', found '{l}'"))),
        }
    };
    let (ln, l) = next("vertex count")?;
    let nv = count(ln, l, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex coordinates")?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(ln, format!("invalid coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if xs.len() != 3 {
            return Err(err(ln, format!("expected 3 coordinates, found {}", xs.len())));
        }
        vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
    }
    let (ln, l) = next("tet count")?;
    let nt = count(ln, l, "tets")?;
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = next("tet vertex ids")?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| err(ln, format!("invalid vertex id '{t}'"))))
            .collect::<Result<_>>()?;
        if ids.len() != 4 {
            return Err(err(ln, format!("expected 4 vertex ids, found {}", ids.len())));
        }
        if let Some(&bad) = ids.iter().find(|&&v| v >= nv) {
            return Err(err(ln, format!("vertex id {bad} out of range (have {nv})")));
        }
        tets.push([ids[0], ids[1], ids[2], ids[3]]);
    }
    if let Some((ln, l)) = lines.next() {
        return Err(err(ln, format!("unexpected trailing content '{l}'")));
    }
    TetMesh::new(vertices, tets)
}
