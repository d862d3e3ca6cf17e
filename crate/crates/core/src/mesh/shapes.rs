//! Procedural test and domain meshes. All closed meshes have outward normals
//! and planar ones face +z.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;

use super::TriMesh;

fn build(p: Vec<Vector3<f64>>, f: Vec<[usize; 3]>) -> TriMesh {
    TriMesh::new(p, f).expect("procedural mesh is valid")
}

pub fn tetrahedron() -> TriMesh {
    let p = vec![
        Vector3::new(1.0, 1.0, 1.0),
        Vector3::new(1.0, -1.0, -1.0),
        Vector3::new(-1.0, 1.0, -1.0),
        Vector3::new(-1.0, -1.0, 1.0),
    ];
    let p = p.into_iter().map(|v| v / 3f64.sqrt()).collect();
    build(p, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
}

pub fn octahedron() -> TriMesh {
    let p = vec![
        Vector3::x(),
        -Vector3::x(),
        Vector3::y(),
        -Vector3::y(),
        Vector3::z(),
        -Vector3::z(),
    ];
    let f = vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
    build(p, f)
}

/// Unit cube centred at the origin, two triangles per side.
pub fn cube() -> TriMesh {
    let mut p = Vec::new();
    for i in 0..8 {
        p.push(Vector3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64) - Vector3::repeat(0.5));
    }
    let quads = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
    let f = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
    build(p, f)
}

fn icosahedron_raw() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let p: Vec<Vector3<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|a| Vector3::from(*a).normalize())
    .collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (p, f)
}

/// Icosahedron refined `k` times by 1-to-4 splits, re-normalizing each time.
pub fn icosphere(k: usize) -> TriMesh {
    let (mut p, mut f) = icosahedron_raw();
    for _ in 0..k {
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut nf = Vec::with_capacity(4 * f.len());
        for t in &f {
            let mut m = [0usize; 3];
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                m[i] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    p.push(((p[a] + p[b]) * 0.5).normalize());
                    p.len() - 1
                });
            }
            nf.push([t[0], m[0], m[2]]);
            nf.push([t[1], m[1], m[0]]);
            nf.push([t[2], m[2], m[1]]);
            nf.push([m[0], m[1], m[2]]);
        }
        f = nf;
    }
    build(p, f)
}

/// Geodesic sphere with each icosahedron edge split into `n` segments
/// (`10 n² + 2` vertices).
pub fn geodesic_sphere(n: usize) -> TriMesh {
    assert!(n >= 1);
    let (c, f) = icosahedron_raw();
    let mut index: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
    let mut p = Vec::new();
    let mut faces = Vec::new();
    for t in &f {
        let mut id = |i: usize, j: usize| -> usize {
            let w = [(t[0], n - i - j), (t[1], i), (t[2], j)];
            let mut key: Vec<(usize, usize)> = w.iter().copied().filter(|x| x.1 > 0).collect();
            key.sort();
            *index.entry(key).or_insert_with(|| {
                let q = (c[t[0]] * (n - i - j) as f64 + c[t[1]] * i as f64 + c[t[2]] * j as f64) / n as f64;
                p.push(q.normalize());
                p.len() - 1
            })
        };
        for j in 0..n {
            for i in 0..n - j {
                let a = id(i, j);
                let b = id(i + 1, j);
                let d = id(i, j + 1);
                faces.push([a, b, d]);
                if i + j + 1 < n {
                    let e = id(i + 1, j + 1);
                    faces.push([b, e, d]);
                }
            }
        }
    }
    build(p, faces)
}

/// Radial bumps `r = 1 + a sin(ωx) sin(ωy) sin(ωz)` on a sphere mesh.
pub fn bumpify(sphere: &TriMesh, amplitude: f64, freq: f64) -> TriMesh {
    let p = sphere
        .positions()
        .iter()
        .map(|v| {
            let u = v.normalize();
            u * (1.0 + amplitude * (freq * u.x).sin() * (freq * u.y).sin() * (freq * u.z).sin())
        })
        .collect();
    sphere.with_positions(p)
}

pub fn bumpy_sphere(level: usize, amplitude: f64, freq: f64) -> TriMesh {
    bumpify(&icosphere(level), amplitude, freq)
}

/// Joins two concentric rings (given by vertex ids and angles, increasing)
/// into a counter-clockwise strip.
fn stitch(inner: &[(usize, f64)], outer: &[(usize, f64)], faces: &mut Vec<[usize; 3]>) {
    let (ni, no) = (inner.len(), outer.len());
    let (mut a, mut b) = (0usize, 0usize);
    let ang = |ring: &[(usize, f64)], k: usize| ring[k % ring.len()].1 + TAU * (k / ring.len()) as f64;
    while a < ni || b < no {
        let advance_outer = a >= ni || (b < no && ang(outer, b + 1) <= ang(inner, a + 1));
        if advance_outer {
            faces.push([inner[a % ni].0, outer[b % no].0, outer[(b + 1) % no].0]);
            b += 1;
        } else {
            faces.push([inner[a % ni].0, outer[b % no].0, inner[(a + 1) % ni].0]);
            a += 1;
        }
    }
}

fn polar_disk(rings: usize) -> (Vec<(f64, f64)>, Vec<[usize; 3]>) {
    assert!(rings >= 1);
    let mut pts = vec![(0.0, 0.0)];
    let mut faces = Vec::new();
    let mut prev: Vec<(usize, f64)> = vec![(0, 0.0)];
    for r in 1..=rings {
        let n = 6 * r;
        let offset = if r % 2 == 0 { PI / n as f64 } else { 0.0 };
        let ring: Vec<(usize, f64)> = (0..n)
            .map(|k| {
                let th = offset + TAU * k as f64 / n as f64;
                pts.push((r as f64 / rings as f64, th));
                (pts.len() - 1, th)
            })
            .collect();
        if r == 1 {
            for k in 0..n {
                faces.push([0, ring[k].0, ring[(k + 1) % n].0]);
            }
        } else {
            stitch(&prev, &ring, &mut faces);
        }
        prev = ring;
    }
    (pts, faces)
}

/// Triangulated unit disk with `rings` concentric rings; boundary vertices
/// lie on the unit circle.
pub fn flat_disk(rings: usize) -> TriMesh {
    let (pts, faces) = polar_disk(rings);
    let p = pts.iter().map(|&(r, t)| Vector3::new(r * t.cos(), r * t.sin(), 0.0)).collect();
    build(p, faces)
}

/// Upper unit hemisphere with the same connectivity as [`flat_disk`].
pub fn hemisphere(rings: usize) -> TriMesh {
    let (pts, faces) = polar_disk(rings);
    let p = pts
        .iter()
        .map(|&(r, t)| {
            let phi = r * FRAC_PI_2;
            Vector3::new(phi.sin() * t.cos(), phi.sin() * t.sin(), phi.cos())
        })
        .collect();
    build(p, faces)
}

pub fn annulus(segments: usize, rings: usize) -> TriMesh {
    let mut p = Vec::new();
    for r in 0..=rings {
        let rad = 0.5 + 0.5 * r as f64 / rings as f64;
        for k in 0..segments {
            let t = TAU * k as f64 / segments as f64;
            p.push(Vector3::new(rad * t.cos(), rad * t.sin(), 0.0));
        }
    }
    let mut f = Vec::new();
    for r in 0..rings {
        for k in 0..segments {
            let a = r * segments + k;
            let b = r * segments + (k + 1) % segments;
            f.push([a, a + segments, b]);
            f.push([b, a + segments, b + segments]);
        }
    }
    build(p, f)
}

pub fn torus(n: usize, m: usize, big_r: f64, small_r: f64) -> TriMesh {
    let mut p = Vec::new();
    for i in 0..n {
        let u = TAU * i as f64 / n as f64;
        for j in 0..m {
            let v = TAU * j as f64 / m as f64;
            let rr = big_r + small_r * v.cos();
            p.push(Vector3::new(rr * u.cos(), rr * u.sin(), small_r * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % n) * m + (j % m);
    let mut f = Vec::new();
    for i in 0..n {
        for j in 0..m {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build(p, f)
}

/// `nx × ny` cells over `[0, w] × [0, h]` in the z = 0 plane.
pub fn flat_grid(nx: usize, ny: usize, w: f64, h: f64) -> TriMesh {
    let mut p = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            p.push(Vector3::new(w * i as f64 / nx as f64, h * j as f64 / ny as f64, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut f = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build(p, f)
}
