//! Three-stage strong-stability-preserving Runge-Kutta and CFL step control.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::solver::Solver;
use crate::state::{max_wave_speed, State, Tendency};

/// Shu-Osher coefficients `(a, c)` of `s_k = a s + c (s_{k-1} + dt R(s_{k-1}))`,
/// with `a = 1 - c`.
pub const SSP_RK3_STAGES: [(f64, f64); 3] = [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)];

/// One SSP-RK3 step. `rhs` is evaluated on each stage; `step` labels errors.
pub fn ssp_rk3_step<F>(state: &State, dt: f64, step: usize, mut rhs: F) -> Result<State>
where
    F: FnMut(&State) -> Result<Tendency>,
{
    let mut stage = state.clone();
    for (k, &(_, c)) in SSP_RK3_STAGES.iter().enumerate() {
        let r = rhs(&stage)?;
        stage.stage_update(state, c, dt, &r);
        if !stage.is_finite() {
            return Err(Error::BlowUp {
                step,
                reason: format!("non-finite values after stage {}", k + 1),
            });
        }
    }
    Ok(stage)
}

/// Advance `state` by one step of the full scheme: freeze the interface
/// parameters and the step size from the step's initial state, never stepping
/// past `max_dt`. Returns the new state and the step taken.
pub fn advance(
    solver: &Solver,
    controller: &StepController,
    state: &State,
    step: usize,
    max_dt: f64,
) -> Result<(State, f64)> {
    let params = solver.flux_params(state)?;
    let dt = controller.compute_dt(solver.mesh(), state)?.min(max_dt);
    let next = ssp_rk3_step(state, dt, step, |s| Ok(solver.rhs(s, &params)))?;
    let min_h = next.min_depth();
    if !(min_h > 0.0) {
        return Err(Error::BlowUp {
            step,
            reason: format!("depth became non-positive (min h = {min_h})"),
        });
    }
    Ok((next, dt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepController {
    pub cfl: f64,
    /// Mean nodal spacing along the shortest element edge, m.
    pub dx: f64,
    pub order: usize,
    pub fixed_dt: Option<f64>,
}

impl StepController {
    pub fn new(mesh: &Mesh, cfl: f64, fixed_dt: Option<f64>) -> Self {
        Self {
            cfl,
            dx: mesh.min_element_width() / mesh.order() as f64,
            order: mesh.order(),
            fixed_dt,
        }
    }

    /// `cfl * 4 dx / (c (2p + 1))` for wave speed `c`.
    pub fn dt_for_speed(&self, c: f64) -> Result<f64> {
        if let Some(dt) = self.fixed_dt {
            return Ok(dt);
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidState(format!(
                "wave speed must be positive, got {c}"
            )));
        }
        Ok(self.cfl * 4.0 * self.dx / (c * (2 * self.order + 1) as f64))
    }

    pub fn compute_dt(&self, mesh: &Mesh, state: &State) -> Result<f64> {
        match self.fixed_dt {
            Some(dt) => Ok(dt),
            None => self.dt_for_speed(max_wave_speed(mesh, state)?),
        }
    }
}
