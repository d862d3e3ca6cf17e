//! Indexed triangle meshes with precomputed edge topology.

mod geometry;
mod io;
pub mod shapes;

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub use geometry::*;
pub use io::*;

/// An undirected edge. `v` is the traversal direction of `face`; the twin
/// face, if any, traverses it as `v[1] -> v[0]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub v: [usize; 2],
    pub face: usize,
    pub twin: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.twin.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Topology {
    pub edges: Vec<Edge>,
    /// Edge index of local edge `k` (from corner `k` to corner `k+1`).
    pub face_edges: Vec<[usize; 3]>,
    /// Face across local edge `k`.
    pub face_neighbors: Vec<[Option<usize>; 3]>,
    pub boundary_loops: Vec<Vec<usize>>,
    pub components: usize,
    pub n_vertices: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Sphere,
    Disk,
    Other,
}

impl Topology {
    fn build(n_vertices: usize, faces: &[[usize; 3]]) -> Result<Self> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * faces.len());
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * faces.len() / 2 + 1);
        let mut edges: Vec<Edge> = Vec::new();
        let mut face_edges = vec![[0usize; 3]; faces.len()];
        let mut face_neighbors = vec![[None; 3]; faces.len()];

        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if directed.insert((a, b), f).is_some() {
                    return Err(Error::NonManifold(a, b));
                }
                let key = (a.min(b), a.max(b));
                match undirected.get(&key) {
                    None => {
                        undirected.insert(key, edges.len());
                        face_edges[f][k] = edges.len();
                        edges.push(Edge { v: [a, b], face: f, twin: None });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.twin.is_some() || edge.v != [b, a] {
                            return Err(Error::NonManifold(a, b));
                        }
                        edge.twin = Some(f);
                        face_edges[f][k] = e;
                    }
                }
            }
        }
        for (f, fe) in face_edges.iter().enumerate() {
            for k in 0..3 {
                let e = &edges[fe[k]];
                face_neighbors[f][k] = if e.face == f { e.twin } else { Some(e.face) };
            }
        }

        check_vertex_fans(n_vertices, faces, &face_neighbors)?;
        let boundary_loops = trace_boundary(&edges)?;
        let components = count_components(n_vertices, &edges);
        Ok(Topology { edges, face_edges, face_neighbors, boundary_loops, components, n_vertices })
    }

    pub fn euler_characteristic(&self, n_faces: usize) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + n_faces as i64
    }
}

// Faces around each vertex must form a single fan.
fn check_vertex_fans(n: usize, faces: &[[usize; 3]], nbr: &[[Option<usize>; 3]]) -> Result<()> {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (f, tri) in faces.iter().enumerate() {
        for &v in tri {
            incident[v].push(f);
        }
    }
    let mut seen: HashMap<usize, bool> = HashMap::new();
    for (v, fs) in incident.iter().enumerate() {
        if fs.len() < 2 {
            continue;
        }
        seen.clear();
        for &f in fs {
            seen.insert(f, false);
        }
        let mut stack = vec![fs[0]];
        seen.insert(fs[0], true);
        let mut reached = 1;
        while let Some(f) = stack.pop() {
            for k in 0..3 {
                // only neighbors across edges touching v stay in the fan
                let tri = faces[f];
                if tri[k] != v && tri[(k + 1) % 3] != v {
                    continue;
                }
                if let Some(g) = nbr[f][k] {
                    if let Some(s) = seen.get_mut(&g) {
                        if !*s {
                            *s = true;
                            reached += 1;
                            stack.push(g);
                        }
                    }
                }
            }
        }
        if reached != fs.len() {
            return Err(Error::Topology(format!("non-manifold vertex {v}")));
        }
    }
    Ok(())
}

fn trace_boundary(edges: &[Edge]) -> Result<Vec<Vec<usize>>> {
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut starts: Vec<usize> = Vec::new();
    for e in edges.iter().filter(|e| e.is_boundary()) {
        if next.insert(e.v[0], e.v[1]).is_some() {
            return Err(Error::Topology(format!("non-manifold boundary vertex {}", e.v[0])));
        }
        starts.push(e.v[0]);
    }
    let mut loops = Vec::new();
    let mut used: HashMap<usize, bool> = HashMap::new();
    for s in starts {
        if used.contains_key(&s) {
            continue;
        }
        let mut lp = vec![s];
        used.insert(s, true);
        let mut cur = next[&s];
        while cur != s {
            lp.push(cur);
            used.insert(cur, true);
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::Topology("open boundary chain".into()))?;
        }
        loops.push(lp);
    }
    Ok(loops)
}

fn count_components(n: usize, edges: &[Edge]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for e in edges {
        let (a, b) = (find(&mut parent, e.v[0]), find(&mut parent, e.v[1]));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    positions: Vec<Vector3<f64>>,
    faces: Vec<[usize; 3]>,
    pub landmarks: Vec<usize>,
    topo: Arc<Topology>,
}

impl TriMesh {
    /// Validates indices and oriented edge-manifoldness.
    pub fn new(positions: Vec<Vector3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = positions.len();
        for (f, t) in faces.iter().enumerate() {
            if t.iter().any(|&v| v >= n) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidArgument(format!("face {f} has invalid indices {t:?}")));
            }
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidArgument("non-finite vertex position".into()));
        }
        let topo = Arc::new(Topology::build(n, &faces)?);
        Ok(TriMesh { positions, faces, landmarks: Vec::new(), topo })
    }

    /// Same connectivity, new vertex positions.
    pub fn with_positions(&self, positions: Vec<Vector3<f64>>) -> Self {
        assert_eq!(positions.len(), self.positions.len());
        TriMesh { positions, faces: self.faces.clone(), landmarks: self.landmarks.clone(), topo: self.topo.clone() }
    }

    pub fn with_landmarks(mut self, landmarks: Vec<usize>) -> Result<Self> {
        if let Some(&l) = landmarks.iter().find(|&&l| l >= self.positions.len()) {
            return Err(Error::InvalidArgument(format!("landmark {l} out of range")));
        }
        self.landmarks = landmarks;
        Ok(self)
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn edges(&self) -> &[Edge] {
        &self.topo.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.topo.edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.topo.euler_characteristic(self.faces.len())
    }

    pub fn kind(&self) -> MeshKind {
        let chi = self.euler_characteristic();
        let loops = self.topo.boundary_loops.len();
        match (self.topo.components, loops, chi) {
            (1, 0, 2) => MeshKind::Sphere,
            (1, 1, 1) => MeshKind::Disk,
            _ => MeshKind::Other,
        }
    }

    pub fn require_kind(&self, want: MeshKind) -> Result<()> {
        let got = self.kind();
        if got == want {
            return Ok(());
        }
        Err(Error::Topology(format!(
            "expected {want:?} topology, found chi = {}, {} boundary loop(s), {} component(s)",
            self.euler_characteristic(),
            self.topo.boundary_loops.len(),
            self.topo.components
        )))
    }

    /// Corner positions of face `f`.
    pub fn triangle(&self, f: usize) -> [Vector3<f64>; 3] {
        let t = self.faces[f];
        [self.positions[t[0]], self.positions[t[1]], self.positions[t[2]]]
    }

    /// Vector of `edge` in its stored direction.
    pub fn edge_vector(&self, e: usize) -> Vector3<f64> {
        let v = self.topo.edges[e].v;
        self.positions[v[1]] - self.positions[v[0]]
    }

    /// Same mesh with every face reversed.
    pub fn flipped(&self) -> Self {
        let faces = self.faces.iter().map(|t| [t[0], t[2], t[1]]).collect();
        let mut m = TriMesh::new(self.positions.clone(), faces).expect("reversal preserves validity");
        m.landmarks = self.landmarks.clone();
        m
    }
}
