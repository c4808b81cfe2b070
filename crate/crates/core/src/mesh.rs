//! Quadrilateral meshes of closed surfaces and their per-node metric terms.
//!
//! Two mesh kinds are supported: the equiangular cubed sphere and a flat
//! doubly-periodic rectangle. Every element maps from the reference square
//! `[-1, 1]^2`; node `(i, j)` of element `e` sits at `xi_i, eta_j` and is stored
//! at flat index `e * (p + 1)^2 + j * (p + 1) + i`.
//!
//! Face geometry (outward normal, edge tangent, edge length scale) is computed
//! once on the owning (minus) element. The neighbour sees the negated normal
//! and tangent, so `n+ = -n-` holds bitwise.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::basis::ReferenceBasis;
use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    CubedSphere {
        radius: f64,
        n: usize,
    },
    PeriodicPlane {
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
    },
}

/// Metric terms at one node.
#[derive(Debug, Clone, Copy)]
pub struct NodeMetric {
    /// Physical position.
    pub x: Vec3,
    /// Covariant basis `g_1 = dx/dxi`, `g_2 = dx/deta`.
    pub cov: [Vec3; 2],
    /// Contravariant basis `g^1`, `g^2`, tangent to the surface.
    pub con: [Vec3; 2],
    /// Area Jacobian `|g_1 x g_2|`.
    pub jac: f64,
    /// Unit surface normal.
    pub k: Vec3,
    /// Inverse of the metric tensor `G_ij = g_i . g_j`.
    pub metric_inv: [[f64; 2]; 2],
}

impl NodeMetric {
    fn from_covariant(x: Vec3, g1: Vec3, g2: Vec3) -> Self {
        let cross = g1.cross(&g2);
        let jac = cross.norm();
        let k = cross / jac;
        let (g11, g12, g22) = (g1.dot(&g1), g1.dot(&g2), g2.dot(&g2));
        let det = g11 * g22 - g12 * g12;
        let inv = [[g22 / det, -g12 / det], [-g12 / det, g11 / det]];
        let con1 = g1 * inv[0][0] + g2 * inv[0][1];
        let con2 = g1 * inv[1][0] + g2 * inv[1][1];
        Self {
            x,
            cov: [g1, g2],
            con: [con1, con2],
            jac,
            k,
            metric_inv: inv,
        }
    }

    /// Contravariant components from covariant ones.
    #[inline]
    pub fn raise(&self, w1: f64, w2: f64) -> (f64, f64) {
        let m = &self.metric_inv;
        (m[0][0] * w1 + m[0][1] * w2, m[1][0] * w1 + m[1][1] * w2)
    }

    /// Physical vector `w^1 g_1 + w^2 g_2` from covariant components.
    #[inline]
    pub fn to_cartesian(&self, w1: f64, w2: f64) -> Vec3 {
        let (c1, c2) = self.raise(w1, w2);
        self.cov[0] * c1 + self.cov[1] * c2
    }

    /// Covariant components `(w . g_1, w . g_2)`; the normal part of `w` drops out.
    #[inline]
    pub fn to_covariant(&self, w: &Vec3) -> (f64, f64) {
        (w.dot(&self.cov[0]), w.dot(&self.cov[1]))
    }
}

/// Local face numbering on the reference square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalFace {
    /// `xi = -1`
    West = 0,
    /// `xi = +1`
    East = 1,
    /// `eta = -1`
    South = 2,
    /// `eta = +1`
    North = 3,
}

impl LocalFace {
    pub const ALL: [LocalFace; 4] = [
        LocalFace::West,
        LocalFace::East,
        LocalFace::South,
        LocalFace::North,
    ];

    /// Element-local node index of the `k`-th node along this face.
    #[inline]
    pub fn node(self, k: usize, np: usize) -> usize {
        match self {
            LocalFace::West => k * np,
            LocalFace::East => k * np + np - 1,
            LocalFace::South => k,
            LocalFace::North => (np - 1) * np + k,
        }
    }

    /// Reference direction normal to the face (0 for xi, 1 for eta) and the
    /// sign of the outward direction.
    #[inline]
    pub fn normal_axis(self) -> (usize, f64) {
        match self {
            LocalFace::West => (0, -1.0),
            LocalFace::East => (0, 1.0),
            LocalFace::South => (1, -1.0),
            LocalFace::North => (1, 1.0),
        }
    }

    fn reference_point(self, s: f64) -> (f64, f64) {
        match self {
            LocalFace::West => (-1.0, s),
            LocalFace::East => (1.0, s),
            LocalFace::South => (s, -1.0),
            LocalFace::North => (s, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Aligned,
    Reversed,
}

impl Orientation {
    /// Plus-side running index matching minus-side index `k`.
    #[inline]
    pub fn map(self, k: usize, np: usize) -> usize {
        match self {
            Orientation::Aligned => k,
            Orientation::Reversed => np - 1 - k,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Face {
    pub minus: (usize, LocalFace),
    pub plus: (usize, LocalFace),
    pub orientation: Orientation,
}

/// Which face an element side belongs to, and on which side of it.
#[derive(Debug, Clone, Copy, Default)]
pub struct FaceRef {
    pub face: usize,
    pub is_plus: bool,
}

/// Shared geometry at one face quadrature node, as seen from the minus side.
#[derive(Debug, Clone, Copy)]
pub struct FaceNodeGeometry {
    pub normal: Vec3,
    /// `k x n`, the counter-clockwise boundary tangent seen from `k`.
    pub tangent: Vec3,
    /// Edge length scale `|g_t|`: `|g_2|` on xi-faces, `|g_1|` on eta-faces.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ElementInfo {
    /// Cube panel (0 for the plane).
    pub panel: usize,
    pub ia: usize,
    pub ib: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub kind: MeshKind,
    pub basis: ReferenceBasis,
    pub elements: Vec<ElementInfo>,
    pub faces: Vec<Face>,
    pub element_faces: Vec<[FaceRef; 4]>,
    nodes: Vec<NodeMetric>,
    face_nodes: Vec<FaceNodeGeometry>,
}

/// Cube panels as (centre axis, first tangent, second tangent), each
/// right-handed so that `g_1 x g_2` points away from the sphere centre.
const PANELS: [[[f64; 3]; 3]; 6] = [
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
    [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
    [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
    [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]],
    [[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
];

fn panel_axes(panel: usize) -> (Vec3, Vec3, Vec3) {
    let [c, e1, e2] = PANELS[panel];
    (Vec3::from(c), Vec3::from(e1), Vec3::from(e2))
}

/// Equiangular gnomonic map and its analytic differential.
///
/// Returns the point and `(dx/dalpha, dx/dbeta)` for panel angles `(alpha, beta)`.
fn equiangular_map(panel: usize, radius: f64, alpha: f64, beta: f64) -> (Vec3, Vec3, Vec3) {
    let (c, e1, e2) = panel_axes(panel);
    let (tx, ty) = (alpha.tan(), beta.tan());
    let p = c + e1 * tx + e2 * ty;
    let r2 = 1.0 + tx * tx + ty * ty;
    let r = r2.sqrt();
    let x = p * (radius / r);
    let sec2a = 1.0 + tx * tx;
    let sec2b = 1.0 + ty * ty;
    let dxa = (e1 - p * (tx / r2)) * (radius * sec2a / r);
    let dxb = (e2 - p * (ty / r2)) * (radius * sec2b / r);
    (x, dxa, dxb)
}

impl Mesh {
    /// Equiangular cubed sphere with `n x n` elements per panel.
    pub fn cubed_sphere(n: usize, radius: f64, basis: ReferenceBasis) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidMesh(format!(
                "elements per panel edge must be >= 1, got {n}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "radius must be positive, got {radius}"
            )));
        }
        let kind = MeshKind::CubedSphere { radius, n };
        let mut elements = Vec::with_capacity(6 * n * n);
        for panel in 0..6 {
            for ib in 0..n {
                for ia in 0..n {
                    elements.push(ElementInfo { panel, ia, ib });
                }
            }
        }
        let np = basis.len();
        let mut nodes = Vec::with_capacity(elements.len() * np * np);
        for el in &elements {
            for j in 0..np {
                for i in 0..np {
                    let (xi, eta) = (basis.nodes()[i], basis.nodes()[j]);
                    nodes.push(sphere_metric(kind, el, xi, eta));
                }
            }
        }
        let faces = match_faces(kind, &elements)?;
        Self::assemble(kind, basis, elements, faces, nodes)
    }

    /// Doubly periodic `[0, lx) x [0, ly)` rectangle split into `nx x ny` elements.
    pub fn periodic_plane(
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        basis: ReferenceBasis,
    ) -> Result<Self> {
        if nx < 1 || ny < 1 {
            return Err(Error::InvalidMesh(format!(
                "element counts must be >= 1, got {nx} x {ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "extents must be positive, got {lx} x {ly}"
            )));
        }
        let kind = MeshKind::PeriodicPlane { lx, ly, nx, ny };
        let elements: Vec<ElementInfo> = (0..ny)
            .flat_map(|ib| (0..nx).map(move |ia| ElementInfo { panel: 0, ia, ib }))
            .collect();
        let np = basis.len();
        let mut nodes = Vec::with_capacity(elements.len() * np * np);
        for el in &elements {
            for j in 0..np {
                for i in 0..np {
                    let (xi, eta) = (basis.nodes()[i], basis.nodes()[j]);
                    nodes.push(plane_metric(kind, el, xi, eta));
                }
            }
        }
        let mut faces = Vec::with_capacity(2 * elements.len());
        for ib in 0..ny {
            for ia in 0..nx {
                let e = ib * nx + ia;
                let east = ib * nx + (ia + 1) % nx;
                let north = ((ib + 1) % ny) * nx + ia;
                faces.push(Face {
                    minus: (e, LocalFace::East),
                    plus: (east, LocalFace::West),
                    orientation: Orientation::Aligned,
                });
                faces.push(Face {
                    minus: (e, LocalFace::North),
                    plus: (north, LocalFace::South),
                    orientation: Orientation::Aligned,
                });
            }
        }
        Self::assemble(kind, basis, elements, faces, nodes)
    }

    fn assemble(
        kind: MeshKind,
        basis: ReferenceBasis,
        elements: Vec<ElementInfo>,
        faces: Vec<Face>,
        nodes: Vec<NodeMetric>,
    ) -> Result<Self> {
        let np = basis.len();
        let npe = np * np;
        let mut element_faces = vec![[FaceRef::default(); 4]; elements.len()];
        let mut seen = vec![[false; 4]; elements.len()];
        for (fid, face) in faces.iter().enumerate() {
            for (side, is_plus) in [(face.minus, false), (face.plus, true)] {
                let slot = &mut seen[side.0][side.1 as usize];
                if *slot {
                    return Err(Error::InvalidMesh(format!(
                        "element {} face {:?} is shared twice",
                        side.0, side.1
                    )));
                }
                *slot = true;
                element_faces[side.0][side.1 as usize] = FaceRef { face: fid, is_plus };
            }
        }
        if let Some(e) = seen.iter().position(|s| s.iter().any(|&v| !v)) {
            return Err(Error::InvalidMesh(format!(
                "element {e} has an unmatched face"
            )));
        }

        let mut face_nodes = Vec::with_capacity(faces.len() * np);
        for face in &faces {
            let (e, lf) = face.minus;
            let (axis, sign) = lf.normal_axis();
            for k in 0..np {
                let m = &nodes[e * npe + lf.node(k, np)];
                let con = m.con[axis];
                let cn = con.norm();
                let normal = con * (sign / cn);
                face_nodes.push(FaceNodeGeometry {
                    normal,
                    tangent: m.k.cross(&normal),
                    scale: m.jac * cn,
                });
            }
        }

        Ok(Self {
            kind,
            basis,
            elements,
            faces,
            element_faces,
            nodes,
            face_nodes,
        })
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    /// Nodes per direction, `p + 1`.
    pub fn np(&self) -> usize {
        self.basis.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.np() * self.np()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeMetric] {
        &self.nodes
    }

    pub fn element_nodes(&self, e: usize) -> &[NodeMetric] {
        let npe = self.nodes_per_element();
        &self.nodes[e * npe..(e + 1) * npe]
    }

    /// Face geometry at the `p + 1` nodes of face `f`, minus-side ordering.
    pub fn face_geometry(&self, f: usize) -> &[FaceNodeGeometry] {
        let np = self.np();
        &self.face_nodes[f * np..(f + 1) * np]
    }

    /// Face geometry at the `k`-th node of side `lf` of element `e`, in that
    /// element's own running order and with its own outward orientation.
    #[inline]
    pub fn side_geometry(&self, e: usize, lf: LocalFace, k: usize) -> FaceNodeGeometry {
        let r = self.element_faces[e][lf as usize];
        let np = self.np();
        if r.is_plus {
            let face = &self.faces[r.face];
            let g = self.face_nodes[r.face * np + face.orientation.map(k, np)];
            FaceNodeGeometry {
                normal: -g.normal,
                tangent: -g.tangent,
                scale: g.scale,
            }
        } else {
            self.face_nodes[r.face * np + k]
        }
    }

    /// Quadrature mass `w_i w_j J` at every node.
    pub fn mass(&self) -> Vec<f64> {
        let np = self.np();
        let w = self.basis.weights();
        self.nodes
            .iter()
            .enumerate()
            .map(|(idx, m)| {
                let local = idx % (np * np);
                w[local % np] * w[local / np] * m.jac
            })
            .collect()
    }

    /// Shortest element edge length over the mesh, measured by GLL quadrature
    /// of the covariant edge length along each face.
    pub fn min_element_width(&self) -> f64 {
        let np = self.np();
        let w = self.basis.weights();
        let mut min = f64::INFINITY;
        for e in 0..self.n_elements() {
            let nodes = self.element_nodes(e);
            for lf in LocalFace::ALL {
                let (axis, _) = lf.normal_axis();
                let along = 1 - axis;
                let len: f64 = (0..np)
                    .map(|k| w[k] * nodes[lf.node(k, np)].cov[along].norm())
                    .sum();
                min = min.min(len);
            }
        }
        min
    }

    /// Evaluate a function of position at every node.
    pub fn sample<F: Fn(&Vec3) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|m| f(&m.x)).collect()
    }

    /// Plain-text header followed by little-endian `f64` node coordinates
    /// (x, y, z per node, element-major, node-row-major).
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "TRSW-MESH 1")?;
        match self.kind {
            MeshKind::CubedSphere { radius, n } => {
                writeln!(out, "kind cubed_sphere")?;
                writeln!(out, "n {n}")?;
                writeln!(out, "radius {radius:e}")?;
            }
            MeshKind::PeriodicPlane { lx, ly, nx, ny } => {
                writeln!(out, "kind periodic_plane")?;
                writeln!(out, "nx {nx}")?;
                writeln!(out, "ny {ny}")?;
                writeln!(out, "lx {lx:e}")?;
                writeln!(out, "ly {ly:e}")?;
            }
        }
        writeln!(out, "p {}", self.order())?;
        writeln!(out, "nodes {}", self.n_nodes())?;
        writeln!(out, "end")?;
        for m in &self.nodes {
            for c in m.x.iter() {
                out.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn write_dump_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(f))
    }
}

fn sphere_metric(kind: MeshKind, el: &ElementInfo, xi: f64, eta: f64) -> NodeMetric {
    let (x, g1, g2) = sphere_point(kind, el, xi, eta);
    NodeMetric::from_covariant(x, g1, g2)
}

fn sphere_point(kind: MeshKind, el: &ElementInfo, xi: f64, eta: f64) -> (Vec3, Vec3, Vec3) {
    let MeshKind::CubedSphere { radius, n } = kind else {
        unreachable!()
    };
    let delta = 2.0 * FRAC_PI_4 / n as f64;
    let edge = |k: usize| -FRAC_PI_4 + k as f64 * delta;
    let (a0, a1) = (edge(el.ia), edge(el.ia + 1));
    let (b0, b1) = (edge(el.ib), edge(el.ib + 1));
    let alpha = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * xi;
    let beta = 0.5 * (b0 + b1) + 0.5 * (b1 - b0) * eta;
    let (x, dxa, dxb) = equiangular_map(el.panel, radius, alpha, beta);
    (x, dxa * (0.5 * (a1 - a0)), dxb * (0.5 * (b1 - b0)))
}

fn plane_metric(kind: MeshKind, el: &ElementInfo, xi: f64, eta: f64) -> NodeMetric {
    let MeshKind::PeriodicPlane { lx, ly, nx, ny } = kind else {
        unreachable!()
    };
    let (hx, hy) = (lx / nx as f64, ly / ny as f64);
    let x = Vec3::new(
        hx * (el.ia as f64 + 0.5 * (xi + 1.0)),
        hy * (el.ib as f64 + 0.5 * (eta + 1.0)),
        0.0,
    );
    NodeMetric::from_covariant(
        x,
        Vec3::new(0.5 * hx, 0.0, 0.0),
        Vec3::new(0.0, 0.5 * hy, 0.0),
    )
}

/// Pair up element sides of the cubed sphere by the physical position of the
/// face midpoints, then fix orientation from the face start corners.
fn match_faces(kind: MeshKind, elements: &[ElementInfo]) -> Result<Vec<Face>> {
    let MeshKind::CubedSphere { radius, .. } = kind else {
        unreachable!()
    };
    let tol = 1e-9 * radius;
    let point = |e: usize, lf: LocalFace, s: f64| {
        let (xi, eta) = lf.reference_point(s);
        sphere_point(kind, &elements[e], xi, eta).0
    };
    let mut sides: Vec<(usize, LocalFace, Vec3)> = elements
        .iter()
        .enumerate()
        .flat_map(|(e, _)| LocalFace::ALL.into_iter().map(move |lf| (e, lf)))
        .map(|(e, lf)| (e, lf, point(e, lf, 0.0)))
        .collect();
    sides.sort_by(|a, b| a.2.x.total_cmp(&b.2.x));

    let mut used = vec![false; sides.len()];
    let mut faces = Vec::with_capacity(sides.len() / 2);
    for i in 0..sides.len() {
        if used[i] {
            continue;
        }
        let mut partner = None;
        for j in (i + 1)..sides.len() {
            if sides[j].2.x - sides[i].2.x > tol {
                break;
            }
            if !used[j] && (sides[j].2 - sides[i].2).norm() < tol {
                partner = Some(j);
                break;
            }
        }
        let j = partner.ok_or_else(|| {
            Error::InvalidMesh(format!(
                "no neighbour for element {} face {:?}",
                sides[i].0, sides[i].1
            ))
        })?;
        used[i] = true;
        used[j] = true;
        let (a, b) = ((sides[i].0, sides[i].1), (sides[j].0, sides[j].1));
        let (minus, plus) = if a < b { (a, b) } else { (b, a) };
        let start_minus = point(minus.0, minus.1, -1.0);
        let orientation = if (point(plus.0, plus.1, -1.0) - start_minus).norm() < tol {
            Orientation::Aligned
        } else if (point(plus.0, plus.1, 1.0) - start_minus).norm() < tol {
            Orientation::Reversed
        } else {
            return Err(Error::InvalidMesh(format!(
                "faces {minus:?} and {plus:?} share a midpoint but not corners"
            )));
        };
        faces.push(Face {
            minus,
            plus,
            orientation,
        });
    }
    faces.sort_by_key(|f| f.minus);
    Ok(faces)
}

/// Paired face traces of a scalar field, `(minus, plus)` per face node in
/// minus-side order.
pub fn face_trace(mesh: &Mesh, field: &[f64]) -> Vec<(f64, f64)> {
    let np = mesh.np();
    let npe = mesh.nodes_per_element();
    let mut out = Vec::with_capacity(mesh.faces.len() * np);
    for face in &mesh.faces {
        let (em, lm) = face.minus;
        let (ep, lp) = face.plus;
        for k in 0..np {
            let kp = face.orientation.map(k, np);
            out.push((
                field[em * npe + lm.node(k, np)],
                field[ep * npe + lp.node(kp, np)],
            ));
        }
    }
    out
}

/// Paired face traces of a vector field given by covariant components,
/// returned as physical Cartesian vectors.
pub fn face_trace_vector(mesh: &Mesh, w1: &[f64], w2: &[f64]) -> Vec<(Vec3, Vec3)> {
    let np = mesh.np();
    let npe = mesh.nodes_per_element();
    let nodes = mesh.nodes();
    let cart = |idx: usize| nodes[idx].to_cartesian(w1[idx], w2[idx]);
    let mut out = Vec::with_capacity(mesh.faces.len() * np);
    for face in &mesh.faces {
        let (em, lm) = face.minus;
        let (ep, lp) = face.plus;
        for k in 0..np {
            let kp = face.orientation.map(k, np);
            out.push((
                cart(em * npe + lm.node(k, np)),
                cart(ep * npe + lp.node(kp, np)),
            ));
        }
    }
    out
}

/// Latitude and longitude (radians) of a point on a sphere centred at the origin.
pub fn lat_lon(x: &Vec3) -> (f64, f64) {
    let r = x.norm();
    ((x.z / r).clamp(-1.0, 1.0).asin(), x.y.atan2(x.x))
}
