//! Global invariants, semi-discrete rate probes and error norms.
//!
//! ```text
//! M = <1, h>        S = <1, hb>       W = <1, w>
//! E = <1, h|u|^2/2 + h hb/2>          Z = <1, (hb)^2 / 2h>
//! ```
//!
//! Sums run element by element and are combined in element order, so results
//! do not depend on the thread count.

use rayon::prelude::*;

use crate::mesh::{Mesh, Vec3};
use crate::solver::Solver;
use crate::state::{State, Tendency};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub buoyancy: f64,
    pub energy: f64,
    pub entropy: f64,
    pub vorticity: f64,
    /// `<1, |w|>`, the scale against which vorticity drift is measured.
    pub vorticity_abs: f64,
}

/// Relative changes `(X - X0) / |X0|` in the order M, S, E, Z, W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drifts {
    pub mass: f64,
    pub buoyancy: f64,
    pub energy: f64,
    pub entropy: f64,
    pub vorticity: f64,
}

impl Drifts {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.mass,
            self.buoyancy,
            self.energy,
            self.entropy,
            self.vorticity,
        ]
    }
}

impl DiagnosticsRecord {
    /// Drifts relative to `initial`. Total vorticity is normalised by the
    /// initial `<1, |w|>` since its own value vanishes on the sphere.
    pub fn drifts(&self, initial: &DiagnosticsRecord) -> Drifts {
        let rel = |x: f64, x0: f64| {
            if x0 == 0.0 {
                x - x0
            } else {
                (x - x0) / x0.abs()
            }
        };
        let w_scale = if initial.vorticity_abs > 0.0 {
            initial.vorticity_abs
        } else {
            1.0
        };
        Drifts {
            mass: rel(self.mass, initial.mass),
            buoyancy: rel(self.buoyancy, initial.buoyancy),
            energy: rel(self.energy, initial.energy),
            entropy: rel(self.entropy, initial.entropy),
            vorticity: (self.vorticity - initial.vorticity) / w_scale,
        }
    }
}

/// Sum `f(global node index, quadrature weight)` element by element.
fn quadrature_sum<F, const N: usize>(mesh: &Mesh, f: F) -> [f64; N]
where
    F: Fn(usize, f64) -> [f64; N] + Sync,
{
    let np = mesh.np();
    let npe = np * np;
    let w = mesh.basis.weights();
    let partial: Vec<[f64; N]> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let nodes = mesh.element_nodes(e);
            let mut acc = [0.0; N];
            for j in 0..np {
                for i in 0..np {
                    let l = j * np + i;
                    let v = f(e * npe + l, w[i] * w[j] * nodes[l].jac);
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += x;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; N];
    for p in partial {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    total
}

/// Global invariants of `state` at time `t`.
pub fn totals(solver: &Solver, state: &State, t: f64) -> DiagnosticsRecord {
    let mesh = solver.mesh();
    let omega = solver.compute_vorticity(state);
    let nodes = mesh.nodes();
    let [mass, buoyancy, energy, entropy, vorticity, vorticity_abs] =
        quadrature_sum(mesh, |i, wj| {
            let (h, hb) = (state.h[i], state.hb[i]);
            let (c1, c2) = nodes[i].raise(state.u1[i], state.u2[i]);
            let usq = c1 * state.u1[i] + c2 * state.u2[i];
            [
                wj * h,
                wj * hb,
                wj * (0.5 * h * usq + 0.5 * h * hb),
                wj * (0.5 * hb * hb / h),
                wj * omega[i],
                wj * omega[i].abs(),
            ]
        });
    DiagnosticsRecord {
        t,
        mass,
        buoyancy,
        energy,
        entropy,
        vorticity,
        vorticity_abs,
    }
}

/// Semi-discrete rates of entropy and energy implied by one tendency, with
/// the sums of absolute contributions as scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProbe {
    pub entropy_rate: f64,
    pub entropy_scale: f64,
    pub energy_rate: f64,
    pub energy_scale: f64,
}

/// `dZ/dt = <-b^2/2, dh> + <b, dhb>` and
/// `dE/dt = <F, du> + <G, dh> + <h/2, dhb>`.
pub fn rate_probe(mesh: &Mesh, state: &State, tend: &Tendency) -> RateProbe {
    let nodes = mesh.nodes();
    let [zr, zs, er, es] = quadrature_sum(mesh, |i, wj| {
        let (h, hb) = (state.h[i], state.hb[i]);
        let b = hb / h;
        let (c1, c2) = nodes[i].raise(state.u1[i], state.u2[i]);
        let usq = c1 * state.u1[i] + c2 * state.u2[i];
        let pot = 0.5 * usq + 0.5 * hb;
        let z = [-0.5 * b * b * tend.h[i], b * tend.hb[i]];
        let e = [
            h * c1 * tend.u1[i],
            h * c2 * tend.u2[i],
            pot * tend.h[i],
            0.5 * h * tend.hb[i],
        ];
        [
            wj * (z[0] + z[1]),
            wj * (z[0].abs() + z[1].abs()),
            wj * (e[0] + e[1] + e[2] + e[3]),
            wj * e.iter().map(|v| v.abs()).sum::<f64>(),
        ]
    });
    RateProbe {
        entropy_rate: zr,
        entropy_scale: zs,
        energy_rate: er,
        energy_scale: es,
    }
}

/// Total `<1, phi>`.
pub fn integrate(mesh: &Mesh, phi: &[f64]) -> f64 {
    quadrature_sum(mesh, |i, wj| [wj * phi[i]])[0]
}

/// L2 errors and reference norms per field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrors {
    pub h: f64,
    pub hb: f64,
    /// Error of the Cartesian velocity vector.
    pub u: f64,
    pub h_norm: f64,
    pub hb_norm: f64,
    pub u_norm: f64,
}

impl FieldErrors {
    pub fn rel_h(&self) -> f64 {
        self.h / self.h_norm
    }

    pub fn rel_hb(&self) -> f64 {
        self.hb / self.hb_norm
    }

    pub fn rel_u(&self) -> f64 {
        self.u / self.u_norm
    }
}

/// `sqrt(<phi - phi_ref, phi - phi_ref>)` per field; `reference` returns
/// `(u, h, hb)` at a point.
pub fn l2_error<F>(mesh: &Mesh, state: &State, reference: F) -> FieldErrors
where
    F: Fn(&Vec3) -> (Vec3, f64, f64) + Sync,
{
    let nodes = mesh.nodes();
    let [eh, ehb, eu, nh, nhb, nu] = quadrature_sum(mesh, |i, wj| {
        let m = &nodes[i];
        let (u_ref, h_ref, hb_ref) = reference(&m.x);
        let du = m.to_cartesian(state.u1[i], state.u2[i]) - u_ref;
        let dh = state.h[i] - h_ref;
        let dhb = state.hb[i] - hb_ref;
        [
            wj * dh * dh,
            wj * dhb * dhb,
            wj * du.norm_squared(),
            wj * h_ref * h_ref,
            wj * hb_ref * hb_ref,
            wj * u_ref.norm_squared(),
        ]
    });
    FieldErrors {
        h: eh.sqrt(),
        hb: ehb.sqrt(),
        u: eu.sqrt(),
        h_norm: nh.sqrt(),
        hb_norm: nhb.sqrt(),
        u_norm: nu.sqrt(),
    }
}

/// Least-squares slope of `log(error)` against `log(spacing)`.
pub fn convergence_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
