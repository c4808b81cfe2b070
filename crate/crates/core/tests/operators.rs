use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trsw_core::mesh::{face_trace, face_trace_vector};
use trsw_core::operators::{
    boundary_integral_with, discrete_div, discrete_grad, inner_product, inner_product_vec,
    VectorField,
};
use trsw_core::{Mesh, ReferenceBasis, Vec3};

fn mesh(kind: u8, n: usize, p: usize) -> Mesh {
    let b = ReferenceBasis::new(p).unwrap();
    if kind == 0 {
        Mesh::cubed_sphere(n, 1.0 + n as f64, b).unwrap()
    } else {
        Mesh::periodic_plane(n, n + 1, 2.0, 1.5, b).unwrap()
    }
}

fn random_fields(mesh: &Mesh, seed: u64) -> (Vec<f64>, VectorField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi: Vec<f64> = (0..mesh.n_nodes())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let w: Vec<Vec3> = mesh
        .nodes()
        .iter()
        .map(|_| {
            Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    (phi, VectorField::from_cartesian(mesh, &w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn summation_by_parts(kind in 0u8..2, n in 1usize..4, p in 2usize..5, seed in any::<u64>()) {
        let mesh = mesh(kind, n, p);
        let (phi, w) = random_fields(&mesh, seed);
        let div = discrete_div(&mesh, &w);
        let grad = discrete_grad(&mesh, &phi);
        let npe = mesh.nodes_per_element();
        for e in 0..mesh.n_elements() {
            let a = inner_product(&mesh, &phi, &div, e);
            let b = inner_product_vec(&mesh, &grad, &w, e);
            let nodes = mesh.element_nodes(e);
            let c = boundary_integral_with(&mesh, e, |_, _, l, g| {
                let i = e * npe + l;
                phi[i] * nodes[l].to_cartesian(w.c1[i], w.c2[i]).dot(&g.normal)
            });
            let scale = a.abs() + b.abs() + c.abs();
            prop_assert!((a + b - c).abs() < 1e-12 * scale, "{} {} {}", a, b, c);
        }
    }

    #[test]
    fn continuous_fields_have_matching_traces(kind in 0u8..2, n in 1usize..4, p in 1usize..5) {
        let mesh = mesh(kind, n, p);
        let tau = std::f64::consts::TAU;
        let phi = if kind == 0 {
            mesh.sample(|x| (x.x * 1.3).sin() + x.y * x.z)
        } else {
            mesh.sample(|x| (tau * x.x / 2.0).sin() * (tau * x.y / 1.5).cos())
        };
        for (a, b) in face_trace(&mesh, &phi) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let w: Vec<Vec3> = mesh.nodes().iter().map(|m| m.k.cross(&Vec3::new(0.3, -0.2, 1.0))).collect();
        let w = VectorField::from_cartesian(&mesh, &w);
        for (a, b) in face_trace_vector(&mesh, &w.c1, &w.c2) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

/// Every element boundary node coincides with exactly one node of a neighbour,
/// found by brute-force search over all nodes.
#[test]
fn meshes_are_watertight() {
    for (kind, n) in [(0u8, 1usize), (0, 2), (0, 3), (1, 2), (1, 3)] {
        let mesh = mesh(kind, n, 3);
        let np = mesh.np();
        let npe = np * np;
        let nodes = mesh.nodes();
        let periodic = |d: Vec3| {
            if kind == 0 {
                d.norm()
            } else {
                let wrap = |v: f64, l: f64| (v - l * (v / l).round()).abs();
                Vec3::new(wrap(d.x, 2.0), wrap(d.y, 1.5), d.z).norm()
            }
        };
        for e in 0..mesh.n_elements() {
            for lf in trsw_core::mesh::LocalFace::ALL {
                for k in 1..np - 1 {
                    let x = nodes[e * npe + lf.node(k, np)].x;
                    let hits = (0..mesh.n_nodes())
                        .filter(|&i| i / npe != e && periodic(nodes[i].x - x) < 1e-10)
                        .count();
                    assert_eq!(hits, 1, "element {e} face {lf:?} node {k}");
                }
            }
        }
        for f in &mesh.faces {
            for k in 0..np {
                let a = nodes[f.minus.0 * npe + f.minus.1.node(k, np)].x;
                let b = nodes[f.plus.0 * npe + f.plus.1.node(f.orientation.map(k, np), np)].x;
                assert!(periodic(a - b) < 1e-10);
            }
        }
    }
}

#[test]
fn average_and_jump_algebra() {
    let mesh = mesh(0, 2, 3);
    let (phi, _) = random_fields(&mesh, 3);
    let psi: Vec<f64> = phi.iter().map(|v| v * v + 1.0).collect();
    let prod: Vec<f64> = phi.iter().zip(&psi).map(|(a, b)| a * b).collect();
    let tp = face_trace(&mesh, &phi);
    let tq = face_trace(&mesh, &psi);
    let tr = face_trace(&mesh, &prod);
    for ((a, b), c) in tp.iter().zip(&tq).zip(&tr) {
        let avg = |x: (f64, f64)| 0.5 * (x.0 + x.1);
        let jump = |x: (f64, f64)| x.1 - x.0;
        // [[a b]] = {{a}} [[b]] + [[a]] {{b}}
        let lhs = jump(*c);
        let rhs = avg(*a) * jump(*b) + jump(*a) * avg(*b);
        assert!((lhs - rhs).abs() < 1e-13 * (1.0 + lhs.abs()));
    }
}
