use super::*;
use crate::confmap::{disk_parameterize, sphere_parameterize};
use crate::mesh::shapes;
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(k: usize, g: usize) -> Domain {
    Domain::Sphere(SphericalDomain::new(k, g).unwrap())
}

#[test]
fn sphere_domain_sizes() {
    assert_eq!(SphericalDomain::new(0, 4).unwrap().n_faces(), 20);
    let d = SphericalDomain::new(2, 32).unwrap();
    assert_eq!(d.n_faces(), 320);
    assert_eq!(Domain::Sphere(d.clone()).dims(), vec![320, 32, 32, 2]);
    assert!(d.base.positions().iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
    assert!(d.samples().iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
    assert!(SphericalDomain::new(1, 1).is_err());
}

#[test]
fn patches_contain_their_faces() {
    let d = SphericalDomain::new(2, 8).unwrap();
    for f in 0..d.n_faces() {
        for v in d.base.triangle(f) {
            let (x, y) = d.gnomonic(f, &v).unwrap();
            assert!(x.abs() <= d.half_width && y.abs() <= d.half_width);
        }
        // the face's own centre is found as its container
        assert_eq!(d.containing_face(&d.frames[f].center), f);
    }
}

#[test]
fn domain_from_dims_round_trips() {
    for dom in [sphere(2, 8), Domain::Disk(DiskDomain::new(16).unwrap())] {
        let back = Domain::from_dims(dom.kind(), &dom.dims()).unwrap();
        assert_eq!(back.dims(), dom.dims());
    }
    assert!(Domain::from_dims(DomainKind::Sphere, &[321, 8, 8, 2]).is_err());
    assert!(Domain::from_dims(DomainKind::Disk, &[8, 9, 2]).is_err());
}

#[test]
fn disk_samples_cover_the_disk() {
    let d = DiskDomain::new(32).unwrap();
    let (pts, mask) = d.samples();
    assert_eq!(pts.len(), 32 * 32);
    assert!(mask.iter().all(|m| !m));
    assert!(pts.iter().all(|p| p.norm() <= 1.0));
    // pushing samples forward lands back on the lattice
    for (s, p) in pts.iter().enumerate() {
        let w = d.to_square(p);
        assert!((w.x - d.lattice(s % 32)).abs() < 1e-9 && (w.y - d.lattice(s / 32)).abs() < 1e-9);
    }
}

#[test]
fn density_examples() {
    let n_mesh = shapes::icosphere(3);
    let n = n_mesh.n_vertices() as f64;
    let p = sphere_parameterize(&n_mesh).unwrap();
    let d = extract_density(&p).unwrap();
    let expect = (n / (4.0 * std::f64::consts::PI)).ln();
    for v in &d {
        assert!((v - expect).abs() < 0.2 * expect.abs(), "{v} vs {expect}");
    }
    let va = mesh::vertex_areas(&p.param_mesh()).unwrap();
    let total: f64 = d.iter().zip(&va).map(|(x, a)| x.exp() * a).sum();
    assert_relative_eq!(total, n, max_relative = 1e-9);

    // doubling every parameter area
    let scaled = p.with_points(p.points.iter().map(|x| x * 2f64.sqrt()).collect());
    for (a, b) in extract_density(&scaled).unwrap().iter().zip(&d) {
        assert_relative_eq!(a - b, -(2f64.ln()), epsilon = 1e-12);
    }
}

#[test]
fn constant_fields_encode_to_constants() {
    let m = shapes::bumpy_sphere(2, 0.2, 3.0);
    let p = sphere_parameterize(&m).unwrap();
    let dom = sphere(1, 6);
    let h = vec![0.7; m.n_faces()];
    let d = vec![-1.25; m.n_vertices()];
    let t = encode_fields(&p, &h, &d, &dom, IdwOptions::default()).unwrap();
    assert!(t.channel(CHANNEL_H).all(|v| (v - 0.7).abs() < 1e-12));
    assert!(t.channel(CHANNEL_LOG_DENSITY).all(|v| (v + 1.25).abs() < 1e-12));
}

#[test]
fn round_sphere_has_constant_h_channel() {
    // h is a per-face half-density and also follows the face size, which
    // varies by ~13% across an icosphere; the exact case is the icosahedron
    let dom = sphere(1, 6);
    let cv = |t: &CurvatureTensor| {
        let n = t.n_samples() as f64;
        let mean = t.channel(CHANNEL_H).sum::<f64>() / n;
        (t.channel(CHANNEL_H).map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt() / mean
    };
    let m = shapes::icosphere(0);
    let t = encode(&m, &sphere_parameterize(&m).unwrap(), &dom, IdwOptions::default()).unwrap();
    assert!(cv(&t) < 1e-12);
    for k in [2, 3] {
        let m = shapes::icosphere(k);
        let t = encode(&m, &sphere_parameterize(&m).unwrap(), &dom, IdwOptions::default()).unwrap();
        assert!(cv(&t) < 0.05, "{}", cv(&t));
    }
}

#[test]
fn default_sphere_tensor_shape() {
    let m = shapes::icosphere(2);
    let p = sphere_parameterize(&m).unwrap();
    let t = encode(&m, &p, &sphere(2, 32), IdwOptions::default()).unwrap();
    assert_eq!(t.dims, vec![320, 32, 32, 2]);
    assert!(t.data.iter().all(|v| v.is_finite()));
}

#[test]
fn disk_encoding_shape() {
    let m = shapes::hemisphere(6);
    let p = disk_parameterize(&m).unwrap();
    let t = encode(&m, &p, &Domain::Disk(DiskDomain::new(64).unwrap()), IdwOptions::default()).unwrap();
    assert_eq!(t.dims, vec![64, 64, 2]);
    assert!(t.data.iter().all(|v| v.is_finite()));
}

#[test]
fn encode_rejects_bad_input() {
    let m = shapes::icosphere(1);
    let p = sphere_parameterize(&m).unwrap();
    let mut h = vec![0.0; m.n_faces()];
    h[3] = f64::NAN;
    let d = vec![0.0; m.n_vertices()];
    assert!(encode_fields(&p, &h, &d, &sphere(0, 4), IdwOptions::default()).is_err());
    let disk = Domain::Disk(DiskDomain::new(8).unwrap());
    assert!(encode(&m, &p, &disk, IdwOptions::default()).is_err());
    assert!(matches!(Idw::new(&[], IdwOptions::default()), Err(Error::EmptyPointSet)));
}

#[test]
fn encoding_ignores_face_order() {
    let m = shapes::bumpy_sphere(2, 0.2, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // jitter to avoid exact distance ties
    let m = m.with_positions(m.positions().iter().map(|p| p * (1.0 + 0.01 * rng.random::<f64>())).collect());
    let mut order: Vec<usize> = (0..m.n_faces()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let perm = TriMesh::new(m.positions().to_vec(), order.iter().map(|&f| m.faces()[f]).collect()).unwrap();
    let dom = sphere(1, 8);
    let pa = sphere_parameterize(&m).unwrap();
    let pb = Parameterization { kind: DomainKind::Sphere, points: pa.points.clone(), source: perm.clone() };
    let a = encode(&m, &pa, &dom, IdwOptions::default()).unwrap();
    let b = encode(&perm, &pb, &dom, IdwOptions::default()).unwrap();
    for (x, y) in a.data.iter().zip(&b.data) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn decode_examples() {
    let dom = sphere(1, 8);
    let t = CurvatureTensor::constant(&dom, 0.4, -2.0);
    let dec = Decoder::new(&t, IdwOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let p = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (h, d) = dec.sample(&p.normalize());
        assert_relative_eq!(h, 0.4, epsilon = 1e-14);
        assert_relative_eq!(d, -2.0, epsilon = 1e-14);
    }
    // exact grid samples return the stored value (patch corners reach into
    // neighbouring faces, which own those points)
    let t = tabulate(&dom, |p| (p.x, p.y * p.z));
    let dec = Decoder::new(&t, IdwOptions::default()).unwrap();
    if let Domain::Sphere(s) = &dom {
        let g2 = s.grid * s.grid;
        let mut checked = 0;
        for (k, p) in s.samples().iter().enumerate().step_by(7) {
            if s.containing_face(p) == k / g2 {
                assert_eq!(dec.sample(p), (t.value(k, 0), t.value(k, 1)));
                checked += 1;
            }
        }
        assert!(checked > 100);
    }
    let disk = Domain::Disk(DiskDomain::new(16).unwrap());
    let t = tabulate(&disk, |p| (p.x, p.y));
    let dec = Decoder::new(&t, IdwOptions::default()).unwrap();
    if let Domain::Disk(d) = &disk {
        for (k, p) in d.samples().0.iter().enumerate().step_by(7) {
            assert_eq!(dec.sample(p), (t.value(k, 0), t.value(k, 1)));
        }
    }
}

fn decode_error(dom: &Domain, f: impl Fn(&Vector3<f64>) -> f64 + Copy, queries: &[Vector3<f64>]) -> f64 {
    let t = tabulate(dom, |p| (f(p), 0.0));
    let dec = Decoder::new(&t, IdwOptions::default()).unwrap();
    queries.iter().map(|q| (dec.sample(q).0 - f(q)).abs()).fold(0.0, f64::max)
}

#[test]
fn decoding_converges_under_refinement() {
    let f = |p: &Vector3<f64>| (2.0 * p.x).sin() + p.y * p.z;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sq: Vec<Vector3<f64>> = (0..400)
        .map(|_| Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalize())
        .collect();
    let errs: Vec<f64> = [16, 32, 64].iter().map(|&g| decode_error(&sphere(1, g), f, &sq)).collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");

    let g = |p: &Vector3<f64>| (2.0 * p.x).cos() * p.y;
    let dq: Vec<Vector3<f64>> = (0..400)
        .map(|_| {
            let r: f64 = rng.random_range(0.0..0.95);
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            Vector3::new(r * t.cos(), r * t.sin(), 0.0)
        })
        .collect();
    let errs: Vec<f64> =
        [16, 32, 64].iter().map(|&n| decode_error(&Domain::Disk(DiskDomain::new(n).unwrap()), g, &dq)).collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn lerp_examples() {
    let dom = sphere(0, 4);
    let a = tabulate(&dom, |p| (p.x, p.y));
    let b = tabulate(&dom, |p| (p.z, 1.0));
    assert_eq!(lerp(&a, &b, 0.0).unwrap(), a);
    assert_eq!(lerp(&a, &b, 1.0).unwrap(), b);
    let ca = CurvatureTensor::constant(&dom, 1.0, 3.0);
    let cb = CurvatureTensor::constant(&dom, 2.0, -1.0);
    let mid = lerp(&ca, &cb, 0.5).unwrap();
    assert!(mid.channel(0).all(|v| v == 1.5) && mid.channel(1).all(|v| v == 1.0));
    let other = CurvatureTensor::constant(&sphere(1, 4), 0.0, 0.0);
    assert!(matches!(lerp(&a, &other, 0.5), Err(Error::DimMismatch(_))));
}

#[test]
fn density_scaling_examples() {
    let dom = sphere(0, 4);
    let t = tabulate(&dom, |p| (p.x + 2.0, p.y));
    assert_eq!(scale_density(&t, 1.0).unwrap(), t);
    let s = scale_density(&t, 4.0).unwrap();
    for (a, b) in s.channel(0).zip(t.channel(0)) {
        assert_eq!(a, b / 2.0);
    }
    for (a, b) in s.channel(1).zip(t.channel(1)) {
        assert_relative_eq!(a, b + 4f64.ln(), epsilon = 1e-15);
    }
    assert!(scale_density(&t, 0.0).is_err());
    assert!(scale_density(&t, -1.0).is_err());
}

#[test]
fn cbr_round_trip() {
    let dom = sphere(1, 4);
    let t = tabulate(&dom, |p| (p.x, p.y * 3.0));
    let bytes = to_cbr_bytes(&t);
    let back = from_cbr_bytes(&bytes).unwrap();
    assert_eq!(to_cbr_bytes(&back), bytes);
    for (a, b) in back.data.iter().zip(&t.data) {
        assert_eq!(*a, f64::from(*b as f32));
    }
    // values representable in f32 survive exactly
    assert_eq!(from_cbr_bytes(&to_cbr_bytes(&back)).unwrap(), back);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.cbr");
    write_cbr(&back, &path).unwrap();
    assert_eq!(read_cbr(&path).unwrap(), back);

    let mut masked = CurvatureTensor::constant(&Domain::Disk(DiskDomain::new(5).unwrap()), 0.5, 0.25);
    masked.mask = Some((0..25).map(|i| i % 3 == 0).collect());
    masked.affine = Some(ChannelAffine { scale: [2.0, 0.5], offset: [1.0, -1.0] });
    let back = from_cbr_bytes(&to_cbr_bytes(&masked)).unwrap();
    assert_eq!(back, masked);
}

#[test]
fn cbr_errors() {
    let t = CurvatureTensor::constant(&sphere(0, 2), 1.0, 2.0);
    let bytes = to_cbr_bytes(&t);
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(from_cbr_bytes(&bad), Err(Error::BadMagic)));
    assert!(matches!(from_cbr_bytes(b"CB"), Err(Error::BadMagic)));
    let mut v2 = bytes.clone();
    v2[4] = 2;
    assert!(matches!(from_cbr_bytes(&v2), Err(Error::UnsupportedVersion(2))));
    assert!(matches!(from_cbr_bytes(&bytes[..bytes.len() - 4]), Err(Error::Truncated { .. })));
    let mut long = bytes.clone();
    long.extend_from_slice(&[0; 4]);
    assert!(matches!(from_cbr_bytes(&long), Err(Error::Truncated { .. })));
    // huge dimensions
    let mut huge = bytes.clone();
    for k in 0..4 {
        huge[16 + 4 * k..20 + 4 * k].copy_from_slice(&u32::MAX.to_le_bytes());
    }
    assert!(matches!(from_cbr_bytes(&huge), Err(Error::DimOverflow)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn idw_is_a_convex_combination(vals in prop::collection::vec(-5.0f64..5.0, 30), q in prop::array::uniform3(-1.0f64..1.0)) {
        let pts: Vec<Vector3<f64>> = (0..30).map(|i| {
            let t = i as f64 * 0.7;
            Vector3::new(t.cos(), t.sin(), (i as f64 * 0.37).sin())
        }).collect();
        let idw = Idw::new(&pts, IdwOptions::default()).unwrap();
        let w = idw.weights(&Vector3::from(q));
        let total: f64 = w.iter().map(|x| x.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|x| x.1 >= 0.0));
        let v = idw.eval(&Vector3::from(q), &vals);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn density_scaling_inverts(m in 0.05f64..20.0) {
        let dom = sphere(0, 3);
        let t = tabulate(&dom, |p| (p.x + 0.3, p.z - 1.0));
        let back = scale_density(&scale_density(&t, m).unwrap(), 1.0 / m).unwrap();
        for (a, b) in back.data.iter().zip(&t.data) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
