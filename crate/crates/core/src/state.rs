//! Prognostic fields.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Vec3};

/// Nodal prognostic variables: covariant velocity `(u_1, u_2)`, depth `h` and
/// mass-weighted buoyancy `hb`, each stored element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub h: Vec<f64>,
    pub hb: Vec<f64>,
}

/// Time derivatives of every [`State`] field, laid out identically.
pub type Tendency = State;

impl State {
    pub fn zeros(n: usize) -> Self {
        Self {
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            h: vec![0.0; n],
            hb: vec![0.0; n],
        }
    }

    /// Build from Cartesian velocities, projecting onto the covariant basis.
    pub fn from_cartesian(mesh: &Mesh, u: &[Vec3], h: Vec<f64>, hb: Vec<f64>) -> Self {
        let (u1, u2) = mesh
            .nodes()
            .iter()
            .zip(u)
            .map(|(m, v)| m.to_covariant(v))
            .unzip();
        Self { u1, u2, h, hb }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn fields(&self) -> [&[f64]; 4] {
        [&self.u1, &self.u2, &self.h, &self.hb]
    }

    pub fn fields_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.u1, &mut self.u2, &mut self.h, &mut self.hb]
    }

    pub fn velocity(&self, mesh: &Mesh) -> Vec<Vec3> {
        mesh.nodes()
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_cartesian(self.u1[i], self.u2[i]))
            .collect()
    }

    pub fn buoyancy(&self) -> Vec<f64> {
        self.h.iter().zip(&self.hb).map(|(h, hb)| hb / h).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.fields()
            .iter()
            .all(|f| f.iter().all(|v| v.is_finite()))
    }

    pub fn min_depth(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `self = base + c * (self + dt * r - base)`, one Shu-Osher stage
    /// written as an increment so that `r = 0` leaves `base` unchanged.
    pub fn stage_update(&mut self, base: &State, c: f64, dt: f64, r: &Tendency) {
        for ((dst, bs), rs) in self
            .fields_mut()
            .into_iter()
            .zip(base.fields())
            .zip(r.fields())
        {
            for ((d, &bv), &rv) in dst.iter_mut().zip(bs).zip(rs) {
                *d = bv + c * (*d + dt * rv - bv);
            }
        }
    }

    /// `x + dt * r`.
    pub fn euler(x: &State, dt: f64, r: &Tendency) -> State {
        let mut out = x.clone();
        for (dst, rs) in out.fields_mut().into_iter().zip(r.fields()) {
            for (d, &rv) in dst.iter_mut().zip(rs) {
                *d += dt * rv;
            }
        }
        out
    }

    /// Euclidean norm over all fields and nodes (unweighted).
    pub fn norm(&self) -> f64 {
        self.fields()
            .iter()
            .flat_map(|f| f.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Fastest gravity-wave signal speed `max(|u| + sqrt(h b))` over all nodes.
///
/// `h b` is the mass-weighted buoyancy itself.
pub fn max_wave_speed(mesh: &Mesh, state: &State) -> Result<f64> {
    let mut c = 0.0f64;
    for (i, m) in mesh.nodes().iter().enumerate() {
        let (h, hb) = (state.h[i], state.hb[i]);
        if !(h > 0.0) || !(hb > 0.0) {
            return Err(Error::InvalidState(format!(
                "non-positive depth or buoyancy at node {i}: h = {h}, hb = {hb}"
            )));
        }
        let speed = m.to_cartesian(state.u1[i], state.u2[i]).norm() + hb.sqrt();
        c = c.max(speed);
    }
    Ok(c)
}
