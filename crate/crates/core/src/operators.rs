//! Discrete curvilinear differential operators and quadrature inner products.
//!
//! All operators act element by element on nodal data. Vector fields are held
//! as covariant components `(w_1, w_2)`; the divergence raises them to
//! contravariant components pointwise before differentiating:
//!
//! ```text
//! div w      = (1/J) (d(J w^1)/dxi + d(J w^2)/deta)
//! grad phi   = dphi/dxi g^1 + dphi/deta g^2
//! k . curl w = (1/J) (dw_2/dxi - dw_1/deta)
//! curl(phi k) = (1/J) (dphi/deta g_1 - dphi/dxi g_2)
//! ```
//!
//! Together with the diagonal GLL mass `w_i w_j J` they satisfy, per element,
//! `<phi, div w> + <grad phi, w> = <phi w, n>` on the element boundary.

use rayon::prelude::*;

use crate::basis::ReferenceBasis;
use crate::mesh::{LocalFace, Mesh, Vec3};

/// Vector field in covariant components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

impl VectorField {
    pub fn zeros(n: usize) -> Self {
        Self {
            c1: vec![0.0; n],
            c2: vec![0.0; n],
        }
    }

    /// Covariant projection of a physical vector field.
    pub fn from_cartesian(mesh: &Mesh, w: &[Vec3]) -> Self {
        let (c1, c2) = mesh
            .nodes()
            .iter()
            .zip(w)
            .map(|(m, v)| m.to_covariant(v))
            .unzip();
        Self { c1, c2 }
    }

    pub fn to_cartesian(&self, mesh: &Mesh) -> Vec<Vec3> {
        mesh.nodes()
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_cartesian(self.c1[i], self.c2[i]))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.c1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }
}

/// `d f / d xi` at node `(i, j)` of one element's nodal block.
///
/// Written as `sum_k D_ik (f_k - f_i)` so that constants differentiate to
/// exactly zero.
#[inline]
pub fn d_xi(basis: &ReferenceBasis, f: &[f64], i: usize, j: usize) -> f64 {
    let np = basis.len();
    let row = &basis.diff_matrix()[i * np..(i + 1) * np];
    let fi = f[j * np + i];
    let mut acc = 0.0;
    for k in 0..np {
        if k != i {
            acc += row[k] * (f[j * np + k] - fi);
        }
    }
    acc
}

/// `d f / d eta` at node `(i, j)` of one element's nodal block.
#[inline]
pub fn d_eta(basis: &ReferenceBasis, f: &[f64], i: usize, j: usize) -> f64 {
    let np = basis.len();
    let row = &basis.diff_matrix()[j * np..(j + 1) * np];
    let fj = f[j * np + i];
    let mut acc = 0.0;
    for k in 0..np {
        if k != j {
            acc += row[k] * (f[k * np + i] - fj);
        }
    }
    acc
}

fn per_element<F>(mesh: &Mesh, out: &mut [f64], kernel: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let npe = mesh.nodes_per_element();
    out.par_chunks_mut(npe)
        .enumerate()
        .for_each(|(e, block)| kernel(e, block));
}

/// Discrete divergence of a covariant vector field.
pub fn discrete_div(mesh: &Mesh, w: &VectorField) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes()];
    discrete_div_into(mesh, &w.c1, &w.c2, &mut out);
    out
}

pub fn discrete_div_into(mesh: &Mesh, w1: &[f64], w2: &[f64], out: &mut [f64]) {
    let np = mesh.np();
    let npe = np * np;
    let basis = &mesh.basis;
    per_element(mesh, out, |e, block| {
        let nodes = mesh.element_nodes(e);
        let mut jw1 = vec![0.0; npe];
        let mut jw2 = vec![0.0; npe];
        for (l, m) in nodes.iter().enumerate() {
            let (a, b) = m.raise(w1[e * npe + l], w2[e * npe + l]);
            jw1[l] = m.jac * a;
            jw2[l] = m.jac * b;
        }
        for j in 0..np {
            for i in 0..np {
                let l = j * np + i;
                block[l] = (d_xi(basis, &jw1, i, j) + d_eta(basis, &jw2, i, j)) / nodes[l].jac;
            }
        }
    });
}

/// Discrete gradient; the result's covariant components are `(D_xi phi, D_eta phi)`.
pub fn discrete_grad(mesh: &Mesh, phi: &[f64]) -> VectorField {
    let mut g = VectorField::zeros(mesh.n_nodes());
    let np = mesh.np();
    let npe = np * np;
    let basis = &mesh.basis;
    g.c1.par_chunks_mut(npe)
        .zip(g.c2.par_chunks_mut(npe))
        .enumerate()
        .for_each(|(e, (c1, c2))| {
            let f = &phi[e * npe..(e + 1) * npe];
            for j in 0..np {
                for i in 0..np {
                    c1[j * np + i] = d_xi(basis, f, i, j);
                    c2[j * np + i] = d_eta(basis, f, i, j);
                }
            }
        });
    g
}

/// Normal component of the discrete curl, `k . curl w`.
pub fn discrete_curl_scalar(mesh: &Mesh, w: &VectorField) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes()];
    let np = mesh.np();
    let npe = np * np;
    let basis = &mesh.basis;
    per_element(mesh, &mut out, |e, block| {
        let nodes = mesh.element_nodes(e);
        let w1 = &w.c1[e * npe..(e + 1) * npe];
        let w2 = &w.c2[e * npe..(e + 1) * npe];
        for j in 0..np {
            for i in 0..np {
                let l = j * np + i;
                block[l] = (d_xi(basis, w2, i, j) - d_eta(basis, w1, i, j)) / nodes[l].jac;
            }
        }
    });
    out
}

/// Discrete `curl(phi k)` as a covariant vector field.
pub fn discrete_curl_k(mesh: &Mesh, phi: &[f64]) -> VectorField {
    let grad = discrete_grad(mesh, phi);
    let mut out = VectorField::zeros(mesh.n_nodes());
    for (idx, m) in mesh.nodes().iter().enumerate() {
        let v = (m.cov[0] * grad.c2[idx] - m.cov[1] * grad.c1[idx]) / m.jac;
        let (a, b) = m.to_covariant(&v);
        out.c1[idx] = a;
        out.c2[idx] = b;
    }
    out
}

/// Element inner product `sum w_i w_j J f g`.
pub fn inner_product(mesh: &Mesh, f: &[f64], g: &[f64], e: usize) -> f64 {
    let np = mesh.np();
    let npe = np * np;
    let w = mesh.basis.weights();
    mesh.element_nodes(e)
        .iter()
        .enumerate()
        .map(|(l, m)| w[l % np] * w[l / np] * m.jac * f[e * npe + l] * g[e * npe + l])
        .sum()
}

/// Element inner product of two covariant vector fields (Cartesian dot at nodes).
pub fn inner_product_vec(mesh: &Mesh, f: &VectorField, g: &VectorField, e: usize) -> f64 {
    let np = mesh.np();
    let npe = np * np;
    let w = mesh.basis.weights();
    mesh.element_nodes(e)
        .iter()
        .enumerate()
        .map(|(l, m)| {
            let idx = e * npe + l;
            let (a, b) = m.raise(g.c1[idx], g.c2[idx]);
            w[l % np] * w[l / np] * m.jac * (f.c1[idx] * a + f.c2[idx] * b)
        })
        .sum()
}

/// Global inner product, summed in element order.
pub fn global_inner(mesh: &Mesh, f: &[f64], g: &[f64]) -> f64 {
    (0..mesh.n_elements())
        .map(|e| inner_product(mesh, f, g, e))
        .sum()
}

/// Boundary quadrature `sum_faces sum_k w_k |g_t| v_k` of an integrand supplied
/// per face node. The closure receives the local face, the running index, the
/// element-local node index and the outward face geometry.
pub fn boundary_integral_with<F>(mesh: &Mesh, e: usize, mut integrand: F) -> f64
where
    F: FnMut(LocalFace, usize, usize, &crate::mesh::FaceNodeGeometry) -> f64,
{
    let np = mesh.np();
    let w = mesh.basis.weights();
    let mut acc = 0.0;
    for lf in LocalFace::ALL {
        for k in 0..np {
            let g = mesh.side_geometry(e, lf, k);
            acc += w[k] * g.scale * integrand(lf, k, lf.node(k, np), &g);
        }
    }
    acc
}

/// `<w, n>` over the boundary of element `e`, with `w` in covariant components.
pub fn boundary_integral(mesh: &Mesh, w: &VectorField, e: usize) -> f64 {
    let npe = mesh.nodes_per_element();
    let nodes = mesh.element_nodes(e);
    boundary_integral_with(mesh, e, |_, _, l, g| {
        let idx = e * npe + l;
        nodes[l].to_cartesian(w.c1[idx], w.c2[idx]).dot(&g.normal)
    })
}

/// Lift face data into the element under the diagonal mass matrix: adds
/// `|g_t| w_k v_k / (w_i w_j J)` to the boundary node of each face value.
///
/// `values` holds `p + 1` entries per face in the element's own running order,
/// faces in [`LocalFace::ALL`] order (`values[lf * (p + 1) + k]`). `block` is
/// the element's nodal block.
pub fn lift_face_term(mesh: &Mesh, e: usize, values: &[f64], block: &mut [f64]) {
    let np = mesh.np();
    let w0 = mesh.basis.weights()[0];
    let nodes = mesh.element_nodes(e);
    for lf in LocalFace::ALL {
        for k in 0..np {
            let l = lf.node(k, np);
            let s = mesh.side_geometry(e, lf, k).scale;
            block[l] += s * values[lf as usize * np + k] / (w0 * nodes[l].jac);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ReferenceBasis;

    fn plane(n: usize, p: usize) -> Mesh {
        Mesh::periodic_plane(n, n, 2.0, 3.0, ReferenceBasis::new(p).unwrap()).unwrap()
    }

    #[test]
    fn flat_divergence_of_x_is_one() {
        let m = plane(3, 3);
        let w = VectorField::from_cartesian(
            &m,
            &m.nodes()
                .iter()
                .map(|n| Vec3::new(n.x.x, 0.0, 0.0))
                .collect::<Vec<_>>(),
        );
        for v in discrete_div(&m, &w) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_gradient_and_curls() {
        let m = plane(2, 4);
        let x = m.sample(|p| p.x);
        let g = discrete_grad(&m, &x).to_cartesian(&m);
        for v in &g {
            assert!((v - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        }
        let ck = discrete_curl_k(&m, &x).to_cartesian(&m);
        for v in &ck {
            assert!((v - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-12);
        }
        let rot: Vec<Vec3> = m
            .nodes()
            .iter()
            .map(|n| Vec3::new(-n.x.y, n.x.x, 0.0))
            .collect();
        let rot = VectorField::from_cartesian(&m, &rot);
        for v in discrete_curl_scalar(&m, &rot) {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_are_annihilated_bitwise() {
        let m = Mesh::cubed_sphere(2, 6.4e6, ReferenceBasis::new(3).unwrap()).unwrap();
        let c = vec![1234.5678; m.n_nodes()];
        let g = discrete_grad(&m, &c);
        assert!(g.c1.iter().chain(&g.c2).all(|&v| v == 0.0));
        let ck = discrete_curl_k(&m, &c);
        assert!(ck.c1.iter().chain(&ck.c2).all(|&v| v == 0.0));
        let cov = VectorField {
            c1: vec![3.0; m.n_nodes()],
            c2: vec![-1.0; m.n_nodes()],
        };
        assert!(discrete_curl_scalar(&m, &cov).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let m = Mesh::cubed_sphere(2, 1.0, ReferenceBasis::new(4).unwrap()).unwrap();
        let phi = m.sample(|x| x.x * x.y + x.z.powi(3));
        let c = discrete_curl_scalar(&m, &discrete_grad(&m, &phi));
        let scale = m.nodes().iter().map(|n| 1.0 / n.jac).fold(0.0, f64::max);
        for v in c {
            assert!(v.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn plane_inner_product_of_ones() {
        let m = plane(3, 2);
        let one = vec![1.0; m.n_nodes()];
        assert!((global_inner(&m, &one, &one) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn constant_tangent_field_has_zero_flux_on_plane() {
        let m = plane(1, 3);
        let w = VectorField::from_cartesian(&m, &vec![Vec3::new(0.3, -1.7, 0.0); m.n_nodes()]);
        assert!(boundary_integral(&m, &w, 0).abs() < 1e-14);
    }

    #[test]
    fn lift_of_zero_is_zero() {
        let m = plane(2, 3);
        let mut block = vec![0.0; m.nodes_per_element()];
        lift_face_term(&m, 1, &vec![0.0; 4 * m.np()], &mut block);
        assert!(block.iter().all(|&v| v == 0.0));
    }
}
