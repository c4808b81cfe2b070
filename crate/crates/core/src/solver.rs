//! Semi-discrete right-hand side of the thermal rotating shallow water system.
//!
//! Strong-form DG-SEM on the collocated GLL nodes:
//!
//! ```text
//! u_t  = -[w k x u + grad G + P] - lift(n (1/2 b_hat ({{h}} - h) + G_hat - G))
//! h_t  = -div F                  - lift((F_hat - F) . n)
//! hb_t = -Q                      - lift((B_hat - B) . n)
//! ```
//!
//! with `G = |u|^2/2 + hb/2`, `F = h u`, `B = hb u`. The pressure term `P` is
//! either the split `(b grad h + grad(hb) - h grad b)/4` or the plain
//! `b grad h / 2`; `Q` is either the split `(b div F + F . grad b + div B)/2`
//! or `div B`. The absolute vorticity `w` is diagnosed from the weak curl with
//! averaged tangential velocity on element boundaries, once per evaluation.
//!
//! Evaluation runs in three phases: nodal derived quantities, single-valued
//! interface fluxes per face node, then per-element volume terms and lifts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fluxes::{
    flux_buoyancy, flux_buoyancy_mass, flux_mass, flux_potential, FluxConfig, FluxParams,
};
use crate::mesh::{FaceNodeGeometry, LocalFace, Mesh, Vec3};
use crate::operators::{d_eta, d_xi};
use crate::state::{max_wave_speed, State, Tendency};

/// Coriolis parameter as a function of position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coriolis {
    None,
    Constant {
        f0: f64,
    },
    /// `f = 2 omega sin(latitude)` on a sphere centred at the origin.
    Rotating {
        omega: f64,
    },
}

impl Coriolis {
    pub const EARTH: Coriolis = Coriolis::Rotating { omega: 7.292e-5 };

    pub fn eval(&self, x: &Vec3) -> f64 {
        match *self {
            Coriolis::None => 0.0,
            Coriolis::Constant { f0 } => f0,
            Coriolis::Rotating { omega } => 2.0 * omega * x.z / x.norm(),
        }
    }
}

/// Which volume terms use the split forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Both splits: energy and entropy stable.
    Full,
    /// Split buoyancy divergence only: entropy stable, energy not controlled.
    EntropyOnly,
    /// No splitting: energy stable, entropy not controlled.
    EnergyOnly,
    /// Split pressure only: neither property holds.
    PressureOnly,
}

impl Variant {
    pub fn splits(self) -> (bool, bool) {
        match self {
            Variant::Full => (true, true),
            Variant::EntropyOnly => (false, true),
            Variant::EnergyOnly => (false, false),
            Variant::PressureOnly => (true, false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub split_pressure: bool,
    pub split_buoyancy: bool,
    pub flux: FluxConfig,
    pub coriolis: Coriolis,
    pub g: f64,
}

impl SchemeConfig {
    pub fn new(variant: Variant, flux: FluxConfig, coriolis: Coriolis, g: f64) -> Self {
        let (split_pressure, split_buoyancy) = variant.splits();
        Self {
            split_pressure,
            split_buoyancy,
            flux,
            coriolis,
            g,
        }
    }
}

/// Nodal quantities derived from the state.
struct Nodal {
    ucart: Vec<Vec3>,
    ucon: Vec<[f64; 2]>,
    b: Vec<f64>,
    pot: Vec<f64>,
    flux: Vec<Vec3>,
}

/// Single-valued interface data at one face node, oriented by the minus side.
#[derive(Debug, Clone, Copy, Default)]
struct FaceFlux {
    /// `F_hat . n-`
    fhat_n: f64,
    /// `B_hat . n-`
    bhat_n: f64,
    bhat: f64,
    hbar: f64,
    ghat: f64,
    /// `{{u}} . t-`
    ubar_t: f64,
}

impl FaceFlux {
    fn flipped(self) -> Self {
        Self {
            fhat_n: -self.fhat_n,
            bhat_n: -self.bhat_n,
            ubar_t: -self.ubar_t,
            ..self
        }
    }
}

pub struct Solver<'m> {
    mesh: &'m Mesh,
    scheme: SchemeConfig,
    coriolis: Vec<f64>,
}

struct Ctx<'a> {
    mesh: &'a Mesh,
    state: &'a State,
    nodal: &'a Nodal,
    faces: &'a [FaceFlux],
    coriolis: &'a [f64],
    scheme: &'a SchemeConfig,
}

impl<'m> Solver<'m> {
    pub fn new(mesh: &'m Mesh, scheme: SchemeConfig) -> Self {
        let coriolis = mesh.sample(|x| scheme.coriolis.eval(x));
        Self {
            mesh,
            scheme,
            coriolis,
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn coriolis_field(&self) -> &[f64] {
        &self.coriolis
    }

    /// Freeze the interface parameters for a step starting at `state`.
    pub fn flux_params(&self, state: &State) -> Result<FluxParams> {
        let c = if self.scheme.flux.needs_wave_speed() {
            max_wave_speed(self.mesh, state)?
        } else {
            0.0
        };
        Ok(self.scheme.flux.resolve(self.scheme.g, c))
    }

    fn nodal(&self, state: &State) -> Nodal {
        let n = state.len();
        let per_node: Vec<(Vec3, [f64; 2], f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let m = &self.mesh.nodes()[i];
                let (c1, c2) = m.raise(state.u1[i], state.u2[i]);
                let u = m.cov[0] * c1 + m.cov[1] * c2;
                let usq = c1 * state.u1[i] + c2 * state.u2[i];
                let b = state.hb[i] / state.h[i];
                let pot = 0.5 * usq + 0.5 * state.hb[i];
                (u, [c1, c2], b, pot)
            })
            .collect();
        let mut nodal = Nodal {
            ucart: Vec::with_capacity(n),
            ucon: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            pot: Vec::with_capacity(n),
            flux: Vec::with_capacity(n),
        };
        for (i, (u, c, b, pot)) in per_node.into_iter().enumerate() {
            nodal.flux.push(u * state.h[i]);
            nodal.ucart.push(u);
            nodal.ucon.push(c);
            nodal.b.push(b);
            nodal.pot.push(pot);
        }
        nodal
    }

    fn face_fluxes(&self, state: &State, nodal: &Nodal, params: &FluxParams) -> Vec<FaceFlux> {
        let mesh = self.mesh;
        let np = mesh.np();
        let npe = np * np;
        let mut out = vec![FaceFlux::default(); mesh.faces.len() * np];
        out.par_chunks_mut(np).enumerate().for_each(|(fid, chunk)| {
            let face = &mesh.faces[fid];
            let geom = mesh.face_geometry(fid);
            for (k, slot) in chunk.iter_mut().enumerate() {
                let im = face.minus.0 * npe + face.minus.1.node(k, np);
                let ip = face.plus.0 * npe + face.plus.1.node(face.orientation.map(k, np), np);
                let n = &geom[k].normal;
                let fhat = flux_mass(&nodal.flux[im], &nodal.flux[ip]);
                let fhat_n = fhat.dot(n);
                let bhat = flux_buoyancy(nodal.b[im], nodal.b[ip], fhat_n, params.beta);
                let bhat_n = flux_buoyancy_mass(bhat, &fhat).dot(n);
                let ghat = flux_potential(
                    nodal.pot[im],
                    nodal.pot[ip],
                    &nodal.flux[im],
                    &nodal.flux[ip],
                    &-n,
                    params.alpha,
                );
                let ubar = (nodal.ucart[im] + nodal.ucart[ip]) * 0.5;
                *slot = FaceFlux {
                    fhat_n,
                    bhat_n,
                    bhat,
                    hbar: 0.5 * (state.h[im] + state.h[ip]),
                    ghat,
                    ubar_t: ubar.dot(&geom[k].tangent),
                };
            }
        });
        out
    }

    fn with_ctx<R>(&self, state: &State, params: &FluxParams, f: impl FnOnce(&Ctx) -> R) -> R {
        let nodal = self.nodal(state);
        let faces = self.face_fluxes(state, &nodal, params);
        let ctx = Ctx {
            mesh: self.mesh,
            state,
            nodal: &nodal,
            faces: &faces,
            coriolis: &self.coriolis,
            scheme: &self.scheme,
        };
        f(&ctx)
    }

    /// Full tendency of all prognostic fields.
    pub fn rhs(&self, state: &State, params: &FluxParams) -> Tendency {
        self.rhs_with_vorticity(state, params).0
    }

    /// Tendency together with the absolute vorticity diagnosed on the way.
    pub fn rhs_with_vorticity(&self, state: &State, params: &FluxParams) -> (Tendency, Vec<f64>) {
        let npe = self.mesh.nodes_per_element();
        let mut t = Tendency::zeros(state.len());
        let mut omega = vec![0.0; state.len()];
        self.with_ctx(state, params, |ctx| {
            t.u1.par_chunks_mut(npe)
                .zip(t.u2.par_chunks_mut(npe))
                .zip(t.h.par_chunks_mut(npe))
                .zip(t.hb.par_chunks_mut(npe))
                .zip(omega.par_chunks_mut(npe))
                .enumerate()
                .for_each(|(e, ((((du1, du2), dh), dhb), w))| {
                    ctx.vorticity(e, w);
                    ctx.velocity(e, w, du1, du2);
                    ctx.depth(e, dh);
                    ctx.buoyancy(e, dhb);
                });
        });
        (t, omega)
    }

    /// Absolute vorticity from the weak curl definition.
    pub fn compute_vorticity(&self, state: &State) -> Vec<f64> {
        let npe = self.mesh.nodes_per_element();
        let mut omega = vec![0.0; state.len()];
        self.with_ctx(state, &FluxParams::CONSERVATIVE, |ctx| {
            omega
                .par_chunks_mut(npe)
                .enumerate()
                .for_each(|(e, w)| ctx.vorticity(e, w));
        });
        omega
    }

    pub fn rhs_depth(&self, state: &State, params: &FluxParams) -> Vec<f64> {
        let npe = self.mesh.nodes_per_element();
        let mut dh = vec![0.0; state.len()];
        self.with_ctx(state, params, |ctx| {
            dh.par_chunks_mut(npe)
                .enumerate()
                .for_each(|(e, out)| ctx.depth(e, out));
        });
        dh
    }

    pub fn rhs_buoyancy(&self, state: &State, params: &FluxParams) -> Vec<f64> {
        let npe = self.mesh.nodes_per_element();
        let mut dhb = vec![0.0; state.len()];
        self.with_ctx(state, params, |ctx| {
            dhb.par_chunks_mut(npe)
                .enumerate()
                .for_each(|(e, out)| ctx.buoyancy(e, out));
        });
        dhb
    }

    /// Covariant velocity tendency for a given absolute vorticity field.
    pub fn rhs_velocity(
        &self,
        state: &State,
        omega: &[f64],
        params: &FluxParams,
    ) -> (Vec<f64>, Vec<f64>) {
        let npe = self.mesh.nodes_per_element();
        let mut du1 = vec![0.0; state.len()];
        let mut du2 = vec![0.0; state.len()];
        self.with_ctx(state, params, |ctx| {
            du1.par_chunks_mut(npe)
                .zip(du2.par_chunks_mut(npe))
                .enumerate()
                .for_each(|(e, (a, b))| ctx.velocity(e, &omega[e * npe..(e + 1) * npe], a, b));
        });
        (du1, du2)
    }
}

impl Ctx<'_> {
    /// Interface data and outward geometry at node `k` of side `lf` of `e`.
    #[inline]
    fn side(&self, e: usize, lf: LocalFace, k: usize) -> (FaceFlux, FaceNodeGeometry) {
        let r = self.mesh.element_faces[e][lf as usize];
        let np = self.mesh.np();
        let geom = self.mesh.side_geometry(e, lf, k);
        if r.is_plus {
            let kk = self.mesh.faces[r.face].orientation.map(k, np);
            (self.faces[r.face * np + kk].flipped(), geom)
        } else {
            (self.faces[r.face * np + k], geom)
        }
    }

    /// Add `|g_t| v / (w_0 J)` at every boundary node, `v` from the closure.
    #[inline]
    fn lift<F>(&self, e: usize, out: &mut [f64], mut value: F)
    where
        F: FnMut(usize, &FaceFlux, &FaceNodeGeometry) -> f64,
    {
        let np = self.mesh.np();
        let w0 = self.mesh.basis.weights()[0];
        let nodes = self.mesh.element_nodes(e);
        for lf in LocalFace::ALL {
            for k in 0..np {
                let l = lf.node(k, np);
                let (ff, g) = self.side(e, lf, k);
                out[l] += g.scale * value(l, &ff, &g) / (w0 * nodes[l].jac);
            }
        }
    }

    fn block<'s>(&self, field: &'s [f64], e: usize) -> &'s [f64] {
        let npe = self.mesh.nodes_per_element();
        &field[e * npe..(e + 1) * npe]
    }

    /// `(1/J)(D_xi (J a w^1) + D_eta (J a w^2))` for a nodal weight `a`.
    fn weighted_div(&self, e: usize, weight: &[f64]) -> Vec<f64> {
        let np = self.mesh.np();
        let npe = np * np;
        let nodes = self.mesh.element_nodes(e);
        let mut j1 = vec![0.0; npe];
        let mut j2 = vec![0.0; npe];
        for l in 0..npe {
            let [c1, c2] = self.nodal.ucon[e * npe + l];
            j1[l] = nodes[l].jac * (weight[l] * c1);
            j2[l] = nodes[l].jac * (weight[l] * c2);
        }
        let basis = &self.mesh.basis;
        let mut out = vec![0.0; npe];
        for j in 0..np {
            for i in 0..np {
                let l = j * np + i;
                out[l] = (d_xi(basis, &j1, i, j) + d_eta(basis, &j2, i, j)) / nodes[l].jac;
            }
        }
        out
    }

    fn vorticity(&self, e: usize, out: &mut [f64]) {
        let np = self.mesh.np();
        let npe = np * np;
        let basis = &self.mesh.basis;
        let nodes = self.mesh.element_nodes(e);
        let u1 = self.block(&self.state.u1, e);
        let u2 = self.block(&self.state.u2, e);
        let f = self.block(self.coriolis, e);
        for j in 0..np {
            for i in 0..np {
                let l = j * np + i;
                out[l] = (d_xi(basis, u2, i, j) - d_eta(basis, u1, i, j)) / nodes[l].jac + f[l];
            }
        }
        let u = &self.nodal.ucart[e * npe..(e + 1) * npe];
        self.lift(e, out, |l, ff, g| ff.ubar_t - u[l].dot(&g.tangent));
    }

    fn depth(&self, e: usize, out: &mut [f64]) {
        let npe = self.mesh.nodes_per_element();
        let h = self.block(&self.state.h, e);
        let div_f = self.weighted_div(e, h);
        for l in 0..npe {
            out[l] = -div_f[l];
        }
        let u = &self.nodal.ucart[e * npe..(e + 1) * npe];
        self.lift(e, out, |l, ff, g| -(ff.fhat_n - h[l] * u[l].dot(&g.normal)));
    }

    fn buoyancy(&self, e: usize, out: &mut [f64]) {
        let np = self.mesh.np();
        let npe = np * np;
        let hb = self.block(&self.state.hb, e);
        let div_b = self.weighted_div(e, hb);
        if self.scheme.split_buoyancy {
            let h = self.block(&self.state.h, e);
            let b = self.block(&self.nodal.b, e);
            let div_f = self.weighted_div(e, h);
            let basis = &self.mesh.basis;
            for j in 0..np {
                for i in 0..np {
                    let l = j * np + i;
                    let [c1, c2] = self.nodal.ucon[e * npe + l];
                    let f_grad_b =
                        h[l] * c1 * d_xi(basis, b, i, j) + h[l] * c2 * d_eta(basis, b, i, j);
                    out[l] = -0.5 * (b[l] * div_f[l] + f_grad_b + div_b[l]);
                }
            }
        } else {
            for l in 0..npe {
                out[l] = -div_b[l];
            }
        }
        let u = &self.nodal.ucart[e * npe..(e + 1) * npe];
        self.lift(e, out, |l, ff, g| {
            -(ff.bhat_n - hb[l] * u[l].dot(&g.normal))
        });
    }

    fn velocity(&self, e: usize, omega: &[f64], du1: &mut [f64], du2: &mut [f64]) {
        let np = self.mesh.np();
        let npe = np * np;
        let basis = &self.mesh.basis;
        let nodes = self.mesh.element_nodes(e);
        let h = self.block(&self.state.h, e);
        let hb = self.block(&self.state.hb, e);
        let b = self.block(&self.nodal.b, e);
        let pot = self.block(&self.nodal.pot, e);
        let u = &self.nodal.ucart[e * npe..(e + 1) * npe];
        let split = self.scheme.split_pressure;

        for j in 0..np {
            for i in 0..np {
                let l = j * np + i;
                let m = &nodes[l];
                let rot = m.k.cross(&u[l]) * omega[l];
                let grad = |f: &[f64]| [d_xi(basis, f, i, j), d_eta(basis, f, i, j)];
                let dg = grad(pot);
                let dh = grad(h);
                let pressure = if split {
                    let dhb = grad(hb);
                    let db = grad(b);
                    [
                        0.25 * (b[l] * dh[0] + dhb[0] - h[l] * db[0]),
                        0.25 * (b[l] * dh[1] + dhb[1] - h[l] * db[1]),
                    ]
                } else {
                    [0.5 * b[l] * dh[0], 0.5 * b[l] * dh[1]]
                };
                du1[l] = -(rot.dot(&m.cov[0]) + dg[0] + pressure[0]);
                du2[l] = -(rot.dot(&m.cov[1]) + dg[1] + pressure[1]);
            }
        }

        let w0 = self.mesh.basis.weights()[0];
        for lf in LocalFace::ALL {
            for k in 0..np {
                let l = lf.node(k, np);
                let (ff, g) = self.side(e, lf, k);
                let jump = 0.5 * ff.bhat * (ff.hbar - h[l]) + (ff.ghat - pot[l]);
                let mag = g.scale * jump / (w0 * nodes[l].jac);
                du1[l] -= mag * g.normal.dot(&nodes[l].cov[0]);
                du2[l] -= mag * g.normal.dot(&nodes[l].cov[1]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ReferenceBasis;
    use crate::diagnostics::integrate;
    use crate::testcases::{random_state, rest_state};

    const G: f64 = 9.80616;

    fn sphere(n: usize) -> Mesh {
        Mesh::cubed_sphere(n, 6.37122e6, ReferenceBasis::new(3).unwrap()).unwrap()
    }

    fn scheme(variant: Variant, flux: FluxConfig) -> SchemeConfig {
        SchemeConfig::new(variant, flux, Coriolis::EARTH, G)
    }

    #[test]
    fn rest_state_has_zero_tendency() {
        let mesh = sphere(2);
        let s = rest_state(&mesh, 1e4, G);
        for v in [Variant::Full, Variant::EnergyOnly] {
            let solver = Solver::new(&mesh, scheme(v, FluxConfig::dissipative()));
            let p = solver.flux_params(&s).unwrap();
            let t = solver.rhs(&s, &p);
            for f in t.fields() {
                assert!(f.iter().all(|&x| x == 0.0));
            }
        }
    }

    #[test]
    fn vorticity_of_resting_fluid_is_planetary() {
        let mesh = sphere(2);
        let solver = Solver::new(&mesh, scheme(Variant::Full, FluxConfig::conservative()));
        let w = solver.compute_vorticity(&rest_state(&mesh, 1e4, G));
        assert_eq!(w, solver.coriolis_field());
    }

    #[test]
    fn solid_rotation_on_the_plane() {
        let (nx, l) = (4usize, 4.0);
        let mesh = Mesh::periodic_plane(nx, nx, l, l, ReferenceBasis::new(3).unwrap()).unwrap();
        let u: Vec<Vec3> = mesh
            .nodes()
            .iter()
            .map(|m| Vec3::new(-m.x.y, m.x.x, 0.0))
            .collect();
        let n = mesh.n_nodes();
        let s = State::from_cartesian(&mesh, &u, vec![1.0; n], vec![1.0; n]);
        let sc = SchemeConfig::new(
            Variant::Full,
            FluxConfig::conservative(),
            Coriolis::None,
            1.0,
        );
        let w = Solver::new(&mesh, sc).compute_vorticity(&s);
        let npe = mesh.nodes_per_element();
        // Elements away from the periodic seam see a continuous field.
        for info in mesh
            .elements
            .iter()
            .enumerate()
            .filter(|(_, i)| (1..nx - 1).contains(&i.ia) && (1..nx - 1).contains(&i.ib))
        {
            let e = info.0;
            for v in &w[e * npe..(e + 1) * npe] {
                assert!((v - 2.0).abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn unit_buoyancy_matches_depth_bitwise() {
        let mesh = sphere(2);
        let mut s = random_state(&mesh, 21, 1e4, G, 20.0);
        s.hb.clone_from(&s.h);
        for flux in [FluxConfig::conservative(), FluxConfig::dissipative()] {
            let solver = Solver::new(&mesh, scheme(Variant::Full, flux));
            let p = solver.flux_params(&s).unwrap();
            let t = solver.rhs(&s, &p);
            assert_eq!(t.h, t.hb);
        }
    }

    #[test]
    fn totals_of_tendencies_vanish() {
        let mesh = sphere(2);
        let s = random_state(&mesh, 4, 1e4, G, 20.0);
        for v in [
            Variant::Full,
            Variant::EntropyOnly,
            Variant::EnergyOnly,
            Variant::PressureOnly,
        ] {
            let solver = Solver::new(&mesh, scheme(v, FluxConfig::dissipative()));
            let p = solver.flux_params(&s).unwrap();
            let (t, w) = solver.rhs_with_vorticity(&s, &p);
            let scale_h: f64 = integrate(&mesh, &t.h.iter().map(|x| x.abs()).collect::<Vec<_>>());
            let scale_b: f64 = integrate(&mesh, &t.hb.iter().map(|x| x.abs()).collect::<Vec<_>>());
            assert!(integrate(&mesh, &t.h).abs() < 1e-12 * scale_h);
            assert!(integrate(&mesh, &t.hb).abs() < 1e-12 * scale_b);
            let f = integrate(&mesh, solver.coriolis_field());
            let wa = integrate(&mesh, &w.iter().map(|x| x.abs()).collect::<Vec<_>>());
            assert!((integrate(&mesh, &w) - f).abs() < 1e-11 * wa);
        }
    }

    #[test]
    fn split_methods_agree_with_full_rhs() {
        let mesh = sphere(1);
        let s = random_state(&mesh, 9, 1e4, G, 20.0);
        let solver = Solver::new(&mesh, scheme(Variant::Full, FluxConfig::dissipative()));
        let p = solver.flux_params(&s).unwrap();
        let (t, w) = solver.rhs_with_vorticity(&s, &p);
        assert_eq!(w, solver.compute_vorticity(&s));
        assert_eq!(t.h, solver.rhs_depth(&s, &p));
        assert_eq!(t.hb, solver.rhs_buoyancy(&s, &p));
        let (a, b) = solver.rhs_velocity(&s, &w, &p);
        assert_eq!((t.u1.clone(), t.u2.clone()), (a, b));
        assert_eq!(solver.rhs(&s, &p), t);
    }

    #[test]
    fn coriolis_does_no_work() {
        let mesh = sphere(1);
        let s = random_state(&mesh, 2, 1e4, G, 20.0);
        let solver = Solver::new(&mesh, scheme(Variant::Full, FluxConfig::conservative()));
        let nodes = mesh.nodes();
        let w = solver.compute_vorticity(&s);
        let zero_w = vec![0.0; w.len()];
        let (a1, a2) = solver.rhs_velocity(&s, &w, &FluxParams::CONSERVATIVE);
        let (b1, b2) = solver.rhs_velocity(&s, &zero_w, &FluxParams::CONSERVATIVE);
        let mut work = 0.0;
        let mut scale = 0.0;
        for i in 0..s.len() {
            let (c1, c2) = nodes[i].raise(s.u1[i], s.u2[i]);
            let x = s.h[i] * (c1 * (a1[i] - b1[i]) + c2 * (a2[i] - b2[i]));
            work += x;
            scale += x.abs() + s.h[i] * (c1 * a1[i]).abs();
            let pointwise = c1 * (a1[i] - b1[i]) + c2 * (a2[i] - b2[i]);
            let usq = c1 * s.u1[i] + c2 * s.u2[i];
            assert!(pointwise.abs() < 1e-12 * w[i].abs() * usq, "{pointwise}");
        }
        assert!(work.abs() < 1e-12 * scale);
    }
}
