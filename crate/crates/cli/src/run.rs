//! Time integration driver and the `run` command.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use trsw_core::diagnostics::{totals, DiagnosticsRecord, Drifts};
use trsw_core::testcases::{
    constant_b_init, galewsky_init, rest_state, williamson2_init, Galewsky,
};
use trsw_core::{advance, Mesh, ReferenceBasis, SchemeConfig, Solver, State, StepController};

use crate::config::{MeshConfig, RunConfig, SnapshotField, TestCaseConfig};
use crate::error::Result;
use crate::snapshot::Snapshot;

/// A solver, its step controller and the evolving state.
pub struct Simulation<'m> {
    pub solver: Solver<'m>,
    pub controller: StepController,
    pub state: State,
    pub t: f64,
    pub step: usize,
    pub initial: DiagnosticsRecord,
}

impl<'m> Simulation<'m> {
    pub fn new(
        mesh: &'m Mesh,
        scheme: SchemeConfig,
        controller: StepController,
        state: State,
    ) -> Self {
        let solver = Solver::new(mesh, scheme);
        let initial = totals(&solver, &state, 0.0);
        Self {
            solver,
            controller,
            state,
            t: 0.0,
            step: 0,
            initial,
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.solver.mesh()
    }

    /// Take one step, not going past `t_end`. Returns the step size.
    pub fn step(&mut self, t_end: f64) -> Result<f64> {
        let (next, dt) = advance(
            &self.solver,
            &self.controller,
            &self.state,
            self.step,
            t_end - self.t,
        )?;
        self.state = next;
        self.t += dt;
        self.step += 1;
        Ok(dt)
    }

    pub fn finished(&self, t_end: f64) -> bool {
        t_end - self.t <= 1e-9 * t_end.abs().max(1.0)
    }

    pub fn diagnostics(&self) -> DiagnosticsRecord {
        totals(&self.solver, &self.state, self.t)
    }

    pub fn drifts(&self) -> Drifts {
        self.diagnostics().drifts(&self.initial)
    }

    pub fn snapshot(&self, fields: &[SnapshotField]) -> Snapshot {
        let mesh = self.mesh();
        let s = &self.state;
        let needs_u = fields
            .iter()
            .any(|f| matches!(f, SnapshotField::Ux | SnapshotField::Uy | SnapshotField::Uz));
        let u = if needs_u {
            s.velocity(mesh)
        } else {
            Vec::new()
        };
        let needs_w = fields
            .iter()
            .any(|f| matches!(f, SnapshotField::Vorticity | SnapshotField::RelVorticity));
        let w = if needs_w {
            self.solver.compute_vorticity(s)
        } else {
            Vec::new()
        };
        let data = fields
            .iter()
            .map(|&f| {
                let v = match f {
                    SnapshotField::U1 => s.u1.clone(),
                    SnapshotField::U2 => s.u2.clone(),
                    SnapshotField::H => s.h.clone(),
                    SnapshotField::Hb => s.hb.clone(),
                    SnapshotField::B => s.buoyancy(),
                    SnapshotField::Vorticity => w.clone(),
                    SnapshotField::RelVorticity => w
                        .iter()
                        .zip(self.solver.coriolis_field())
                        .map(|(a, f)| a - f)
                        .collect(),
                    SnapshotField::Ux => u.iter().map(|v| v.x).collect(),
                    SnapshotField::Uy => u.iter().map(|v| v.y).collect(),
                    SnapshotField::Uz => u.iter().map(|v| v.z).collect(),
                };
                (f.name().to_string(), v)
            })
            .collect();
        Snapshot {
            kind: mesh.kind,
            order: mesh.order(),
            step: self.step as u64,
            t: self.t,
            fields: data,
        }
    }
}

pub fn build_mesh(cfg: &RunConfig) -> Result<Mesh> {
    Ok(match cfg.mesh {
        MeshConfig::CubedSphere { n, p } => {
            Mesh::cubed_sphere(n, cfg.planet.radius, ReferenceBasis::new(p)?)?
        }
        MeshConfig::PeriodicPlane { nx, ny, lx, ly, p } => {
            Mesh::periodic_plane(nx, ny, lx, ly, ReferenceBasis::new(p)?)?
        }
    })
}

pub fn initial_state(cfg: &RunConfig, mesh: &Mesh) -> Result<State> {
    let params = cfg.planet.params();
    Ok(match cfg.testcase {
        TestCaseConfig::Williamson2 => williamson2_init(mesh, &params),
        TestCaseConfig::Galewsky {
            perturbation,
            constant_b,
        } => {
            let case = Galewsky {
                form: perturbation,
                ..Galewsky::default()
            };
            let s = galewsky_init(mesh, &params, &case)?;
            if constant_b {
                constant_b_init(&s, params.g)
            } else {
                s
            }
        }
        TestCaseConfig::Rest { depth, b } => rest_state(mesh, depth, b.unwrap_or(params.g)),
    })
}

pub fn scheme(cfg: &RunConfig) -> SchemeConfig {
    SchemeConfig::new(
        cfg.scheme.variant,
        cfg.scheme.flux,
        cfg.coriolis(),
        cfg.planet.g,
    )
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub drifts: Drifts,
    pub wall: Duration,
    pub out_dir: PathBuf,
}

pub const CSV_HEADER: [&str; 13] = [
    "step",
    "t_seconds",
    "M",
    "S",
    "E",
    "Z",
    "W",
    "relM",
    "relS",
    "relE",
    "relZ",
    "relW",
    "dt",
];

/// Streams rows to `diagnostics.csv`.
pub struct DiagnosticsWriter {
    inner: csv::Writer<std::fs::File>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::Writer::from_path(path)?;
        inner.write_record(CSV_HEADER)?;
        Ok(Self { inner })
    }

    pub fn row(
        &mut self,
        step: usize,
        rec: &DiagnosticsRecord,
        initial: &DiagnosticsRecord,
        dt: f64,
    ) -> Result<()> {
        let d = rec.drifts(initial);
        let mut fields = vec![step.to_string()];
        fields.extend(
            [
                rec.t,
                rec.mass,
                rec.buoyancy,
                rec.energy,
                rec.entropy,
                rec.vorticity,
                d.mass,
                d.buoyancy,
                d.energy,
                d.entropy,
                d.vorticity,
                dt,
            ]
            .iter()
            .map(|v| format!("{v:e}")),
        );
        self.inner.write_record(&fields)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Run a configuration, writing all artifacts to `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let mesh = build_mesh(cfg)?;
    if cfg.output.write_mesh {
        mesh.write_dump_file(&out_dir.join("mesh.dump"))?;
    }
    let state = initial_state(cfg, &mesh)?;
    let controller = StepController::new(&mesh, cfg.time.cfl, cfg.time.fixed_dt);
    let mut sim = Simulation::new(&mesh, scheme(cfg), controller, state);
    let t_end = cfg.time.duration();
    let out = &cfg.output;

    let mut csv = DiagnosticsWriter::create(&out_dir.join("diagnostics.csv"))?;
    csv.row(0, &sim.initial, &sim.initial, 0.0)?;
    let write_snapshot = |sim: &Simulation| -> Result<()> {
        sim.snapshot(&out.snapshot_fields)
            .write_file(&out_dir.join(format!("snapshot_{:06}.dat", sim.step)))
    };
    write_snapshot(&sim)?;

    while !sim.finished(t_end) {
        let dt = match sim.step(t_end) {
            Ok(dt) => dt,
            Err(e) => {
                csv.flush()?;
                return Err(e);
            }
        };
        let last = sim.finished(t_end);
        if sim.step.is_multiple_of(out.diagnostics_every) || last {
            csv.row(sim.step, &sim.diagnostics(), &sim.initial, dt)?;
        }
        if (out.snapshot_every > 0 && sim.step.is_multiple_of(out.snapshot_every)) || last {
            write_snapshot(&sim)?;
        }
    }
    csv.flush()?;
    Ok(RunSummary {
        steps: sim.step,
        t: sim.t,
        drifts: sim.drifts(),
        wall: start.elapsed(),
        out_dir: out_dir.to_path_buf(),
    })
}
