//! Named experiment suites: convergence studies, conservation runs, variant
//! comparisons and randomized rate probes.

use std::fmt::Write as _;
use std::path::Path;

use trsw_core::diagnostics::{convergence_slope, rate_probe};
use trsw_core::fluxes::{BetaRule, FluxConfig};
use trsw_core::testcases::{
    galewsky_init, random_state, steady_state_error, williamson2_init, Galewsky, PlanetParams,
};
use trsw_core::{
    Coriolis, Mesh, MeshKind, ReferenceBasis, SchemeConfig, Solver, State, StepController, Variant,
};

use crate::error::{CliError, Result};
use crate::run::Simulation;

pub const NAMES: [&str; 6] = [
    "spatial_w2",
    "temporal_conservation",
    "conservation",
    "compatibility",
    "variants",
    "probes",
];

fn sphere(n: usize, p: usize, params: &PlanetParams) -> Result<Mesh> {
    Ok(Mesh::cubed_sphere(
        n,
        params.radius,
        ReferenceBasis::new(p)?,
    )?)
}

fn flux_name(f: &FluxConfig) -> &'static str {
    match f.mode {
        trsw_core::FluxMode::Conservative => "conservative",
        trsw_core::FluxMode::Dissipative => "dissipative",
        trsw_core::FluxMode::Custom => "custom",
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Run `sim` to `t_end`, calling `each` after every step with the step size.
fn drive<F>(sim: &mut Simulation, t_end: f64, mut each: F) -> Result<()>
where
    F: FnMut(&Simulation, f64) -> Result<()>,
{
    while !sim.finished(t_end) {
        let dt = sim.step(t_end)?;
        each(sim, dt)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialRow {
    pub n: usize,
    pub flux: &'static str,
    /// Mean nodal spacing along the equator, m.
    pub spacing: f64,
    pub err_h: f64,
    pub err_u: f64,
    pub err_hb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialReport {
    pub rows: Vec<SpatialRow>,
    pub slope_conservative: f64,
    pub slope_dissipative: f64,
}

impl SpatialReport {
    pub fn error(&self, n: usize, flux: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.flux == flux)
            .map(|r| r.err_h)
    }
}

/// Steady zonal flow at several resolutions; normalised L2 errors at `days`.
pub fn spatial_w2(ns: &[usize], p: usize, days: f64, out: Option<&Path>) -> Result<SpatialReport> {
    let params = PlanetParams::default();
    let mut rows = Vec::new();
    for &n in ns {
        let mesh = sphere(n, p, &params)?;
        for flux in [FluxConfig::conservative(), FluxConfig::dissipative()] {
            let scheme = SchemeConfig::new(Variant::Full, flux, params.coriolis(), params.g);
            let ctl = StepController::new(&mesh, 0.8, None);
            let mut sim = Simulation::new(&mesh, scheme, ctl, williamson2_init(&mesh, &params));
            drive(&mut sim, days * 86400.0, |_, _| Ok(()))?;
            let e = steady_state_error(&sim.state, &mesh, &params);
            rows.push(SpatialRow {
                n,
                flux: flux_name(&flux),
                spacing: std::f64::consts::TAU * params.radius / (4 * n * p) as f64,
                err_h: e.rel_h(),
                err_u: e.rel_u(),
                err_hb: e.rel_hb(),
            });
        }
    }
    let slope = |name: &str| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.flux == name)
            .map(|r| (r.spacing, r.err_h))
            .collect();
        convergence_slope(&pts)
    };
    let report = SpatialReport {
        slope_conservative: slope("conservative"),
        slope_dissipative: slope("dissipative"),
        rows,
    };
    if let Some(dir) = out {
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.flux.to_string(),
                    format!("{:e}", r.spacing),
                    format!("{:e}", r.err_h),
                    format!("{:e}", r.err_u),
                    format!("{:e}", r.err_hb),
                ]
            })
            .collect();
        write_csv(
            &dir.join("spatial_w2.csv"),
            &[
                "n",
                "flux",
                "spacing_m",
                "rel_l2_h",
                "rel_l2_u",
                "rel_l2_hb",
            ],
            &rows,
        )?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalReport {
    /// `(dt, |relE|, |relZ|)` at the horizon.
    pub rows: Vec<(f64, f64, f64)>,
    pub slope_energy: f64,
    pub slope_entropy: f64,
}

/// Energy and entropy drift of the conservative scheme at a fixed horizon for
/// successively halved fixed steps.
pub fn temporal_conservation(
    n: usize,
    hours: f64,
    dt0: f64,
    levels: usize,
    out: Option<&Path>,
) -> Result<TemporalReport> {
    let params = PlanetParams::default();
    let mesh = sphere(n, 3, &params)?;
    let init = galewsky_init(&mesh, &params, &Galewsky::default())?;
    let scheme = SchemeConfig::new(
        Variant::Full,
        FluxConfig::conservative(),
        params.coriolis(),
        params.g,
    );
    let mut rows = Vec::new();
    for k in 0..levels {
        let dt = dt0 / (1u64 << k) as f64;
        let ctl = StepController::new(&mesh, 0.8, Some(dt));
        let mut sim = Simulation::new(&mesh, scheme, ctl, init.clone());
        drive(&mut sim, hours * 3600.0, |_, _| Ok(()))?;
        let d = sim.drifts();
        rows.push((dt, d.energy.abs(), d.entropy.abs()));
    }
    let e: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let z: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.2)).collect();
    let report = TemporalReport {
        slope_energy: convergence_slope(&e),
        slope_entropy: convergence_slope(&z),
        rows,
    };
    if let Some(dir) = out {
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{}", r.0),
                    format!("{:e}", r.1),
                    format!("{:e}", r.2),
                ]
            })
            .collect();
        write_csv(
            &dir.join("temporal_conservation.csv"),
            &["dt", "abs_relE", "abs_relZ"],
            &rows,
        )?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationRow {
    pub flux: &'static str,
    pub steps: usize,
    pub max_rel_mass: f64,
    pub max_rel_buoyancy: f64,
    pub max_rel_vorticity: f64,
    pub final_rel_energy: f64,
    pub final_rel_entropy: f64,
}

/// The jet with the buoyancy perturbation, both flux modes, checking the
/// invariants after every step.
pub fn conservation(n: usize, hours: f64, out: Option<&Path>) -> Result<Vec<ConservationRow>> {
    let params = PlanetParams::default();
    let mesh = sphere(n, 3, &params)?;
    let init = galewsky_init(&mesh, &params, &Galewsky::default())?;
    let mut rows = Vec::new();
    for flux in [FluxConfig::conservative(), FluxConfig::dissipative()] {
        let scheme = SchemeConfig::new(Variant::Full, flux, params.coriolis(), params.g);
        let ctl = StepController::new(&mesh, 0.8, None);
        let mut sim = Simulation::new(&mesh, scheme, ctl, init.clone());
        let (mut m, mut s, mut w) = (0.0f64, 0.0f64, 0.0f64);
        drive(&mut sim, hours * 3600.0, |sim, _| {
            let d = sim.drifts();
            m = m.max(d.mass.abs());
            s = s.max(d.buoyancy.abs());
            w = w.max(d.vorticity.abs());
            Ok(())
        })?;
        let d = sim.drifts();
        rows.push(ConservationRow {
            flux: flux_name(&flux),
            steps: sim.step,
            max_rel_mass: m,
            max_rel_buoyancy: s,
            max_rel_vorticity: w,
            final_rel_energy: d.energy,
            final_rel_entropy: d.entropy,
        });
    }
    if let Some(dir) = out {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.flux.to_string(),
                    r.steps.to_string(),
                    format!("{:e}", r.max_rel_mass),
                    format!("{:e}", r.max_rel_buoyancy),
                    format!("{:e}", r.max_rel_vorticity),
                    format!("{:e}", r.final_rel_energy),
                    format!("{:e}", r.final_rel_entropy),
                ]
            })
            .collect();
        write_csv(
            &dir.join("conservation.csv"),
            &[
                "flux", "steps", "max_relM", "max_relS", "max_relW", "relE", "relZ",
            ],
            &table,
        )?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub steps: usize,
    /// `max |b - g| / g` over all nodes and steps of the `b = g` run.
    pub max_b_deviation: f64,
    /// Whether `hb == h` held bitwise after every step of the `b = 1` run.
    pub unit_b_bitwise: bool,
}

/// Constant-buoyancy runs of the jet: `b = g` and `b = 1`.
pub fn compatibility(n: usize, hours: f64) -> Result<CompatibilityReport> {
    let params = PlanetParams::default();
    let mesh = sphere(n, 3, &params)?;
    let jet = galewsky_init(&mesh, &params, &Galewsky::default())?;
    let scheme = SchemeConfig::new(
        Variant::Full,
        FluxConfig::dissipative(),
        params.coriolis(),
        params.g,
    );
    let ctl = StepController::new(&mesh, 0.8, None);

    let with_b = |b: f64| State {
        hb: jet.h.iter().map(|h| b * h).collect(),
        ..jet.clone()
    };
    let mut sim = Simulation::new(&mesh, scheme, ctl, with_b(params.g));
    let mut dev = 0.0f64;
    drive(&mut sim, hours * 3600.0, |sim, _| {
        for (h, hb) in sim.state.h.iter().zip(&sim.state.hb) {
            dev = dev.max((hb / h - params.g).abs() / params.g);
        }
        Ok(())
    })?;
    let steps = sim.step;

    // The penalty scales with the reference buoyancy, so it follows b here.
    let unit = SchemeConfig { g: 1.0, ..scheme };
    let mut sim = Simulation::new(&mesh, unit, ctl, with_b(1.0));
    let mut bitwise = sim.state.h == sim.state.hb;
    drive(&mut sim, hours * 3600.0, |sim, _| {
        bitwise &= sim.state.h == sim.state.hb;
        Ok(())
    })?;
    Ok(CompatibilityReport {
        steps,
        max_b_deviation: dev,
        unit_b_bitwise: bitwise,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantRun {
    pub variant: Variant,
    pub steps: usize,
    pub completed: bool,
    pub blow_up: Option<String>,
    /// Largest `dZ/dt / scale` over the per-step probes.
    pub max_entropy_probe: f64,
    /// Largest `dE/dt / scale` over the per-step probes.
    pub max_energy_probe: f64,
    /// `(t, relZ)` after every step.
    pub entropy: Vec<(f64, f64)>,
}

impl VariantRun {
    pub fn entropy_monotone_increasing(&self) -> bool {
        self.entropy.windows(2).all(|w| w[1].1 > w[0].1) && !self.entropy.is_empty()
    }

    pub fn max_rel_entropy(&self) -> f64 {
        self.entropy
            .iter()
            .map(|e| e.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Entropy-only and energy-only schemes on the jet, probing the semi-discrete
/// rates at the start of every step.
pub fn variants(
    n: usize,
    days: f64,
    flux: FluxConfig,
    out: Option<&Path>,
) -> Result<Vec<VariantRun>> {
    let params = PlanetParams::default();
    let mesh = sphere(n, 3, &params)?;
    let init = galewsky_init(&mesh, &params, &Galewsky::default())?;
    let mut runs = Vec::new();
    for variant in [Variant::EntropyOnly, Variant::EnergyOnly] {
        let scheme = SchemeConfig::new(variant, flux, params.coriolis(), params.g);
        let ctl = StepController::new(&mesh, 0.8, None);
        let mut sim = Simulation::new(&mesh, scheme, ctl, init.clone());
        let (mut zmax, mut emax) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut entropy = Vec::new();
        let t_end = days * 86400.0;
        let mut blow_up = None;
        while !sim.finished(t_end) {
            let fp = sim.solver.flux_params(&sim.state)?;
            let r = rate_probe(&mesh, &sim.state, &sim.solver.rhs(&sim.state, &fp));
            zmax = zmax.max(r.entropy_rate / r.entropy_scale);
            emax = emax.max(r.energy_rate / r.energy_scale);
            match sim.step(t_end) {
                Ok(_) => entropy.push((sim.t, sim.drifts().entropy)),
                Err(e) => {
                    blow_up = Some(e.to_string());
                    break;
                }
            }
        }
        runs.push(VariantRun {
            variant,
            steps: sim.step,
            completed: blow_up.is_none(),
            blow_up,
            max_entropy_probe: zmax,
            max_energy_probe: emax,
            entropy,
        });
    }
    if let Some(dir) = out {
        let mut rows = Vec::new();
        for r in &runs {
            for (t, z) in &r.entropy {
                rows.push(vec![
                    format!("{:?}", r.variant),
                    format!("{t}"),
                    format!("{z:e}"),
                ]);
            }
        }
        write_csv(
            &dir.join(format!("variants_{}.csv", flux_name(&flux))),
            &["variant", "t_seconds", "relZ"],
            &rows,
        )?;
    }
    Ok(runs)
}

/// Largest normalised rates over random states, per flux choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    pub states: usize,
    /// `max dZ/dt / scale` with upwind buoyancy.
    pub entropy_upwind: f64,
    /// `max |dZ/dt| / scale` with averaged buoyancy.
    pub entropy_central: f64,
    /// `max dE/dt / scale` with `alpha > 0`.
    pub energy_penalty: f64,
    /// `max |dE/dt| / scale` with `alpha = 0`.
    pub energy_central: f64,
}

/// Semi-discrete rates from single right-hand-side evaluations on `count`
/// random states, alternating between sphere and plane meshes.
pub fn probes(count: usize, seed: u64) -> Result<ProbeReport> {
    let g = PlanetParams::default().g;
    let sphere_mesh = Mesh::cubed_sphere(2, 6.37122e6, ReferenceBasis::new(3)?)?;
    let plane = Mesh::periodic_plane(3, 2, 3.0e6, 2.0e6, ReferenceBasis::new(3)?)?;
    let mut rep = ProbeReport {
        states: count,
        entropy_upwind: f64::NEG_INFINITY,
        entropy_central: 0.0,
        energy_penalty: f64::NEG_INFINITY,
        energy_central: 0.0,
    };
    let upwind = FluxConfig::dissipative();
    let central = FluxConfig::conservative();
    for k in 0..count {
        let mesh = if k % 2 == 0 { &sphere_mesh } else { &plane };
        let cor = match mesh.kind {
            MeshKind::CubedSphere { .. } => Coriolis::EARTH,
            MeshKind::PeriodicPlane { .. } => Coriolis::Constant { f0: 1e-4 },
        };
        let s = random_state(mesh, seed.wrapping_add(k as u64), 1e4, g, 20.0);
        let probe = |flux: FluxConfig| {
            let solver = Solver::new(mesh, SchemeConfig::new(Variant::Full, flux, cor, g));
            let p = solver.flux_params(&s)?;
            Ok::<_, CliError>(rate_probe(mesh, &s, &solver.rhs(&s, &p)))
        };
        let u = probe(upwind)?;
        let c = probe(central)?;
        let a = probe(FluxConfig::custom(0.05, BetaRule::Zero)?)?;
        rep.entropy_upwind = rep.entropy_upwind.max(u.entropy_rate / u.entropy_scale);
        rep.energy_penalty = rep
            .energy_penalty
            .max(u.energy_rate / u.energy_scale)
            .max(a.energy_rate / a.energy_scale);
        rep.entropy_central = rep
            .entropy_central
            .max((c.entropy_rate / c.entropy_scale).abs());
        rep.energy_central = rep
            .energy_central
            .max((c.energy_rate / c.energy_scale).abs());
    }
    Ok(rep)
}

/// Run a named experiment with its default sizes, writing tables into `out`.
/// Returns a human-readable summary.
pub fn run_named(name: &str, out: &Path, seed: u64) -> Result<String> {
    std::fs::create_dir_all(out)?;
    let mut s = String::new();
    match name {
        "spatial_w2" => {
            let r = spatial_w2(&[4, 8, 16], 3, 5.0, Some(out))?;
            for row in &r.rows {
                writeln!(
                    s,
                    "n={:<3} {:<13} rel L2(h) {:.3e}  rel L2(u) {:.3e}",
                    row.n, row.flux, row.err_h, row.err_u
                )
                .unwrap();
            }
            writeln!(
                s,
                "slope conservative {:.2}, dissipative {:.2}",
                r.slope_conservative, r.slope_dissipative
            )
            .unwrap();
        }
        "temporal_conservation" => {
            let r = temporal_conservation(5, 2.0, 225.0, 3, Some(out))?;
            for (dt, e, z) in &r.rows {
                writeln!(s, "dt {dt:>7.3} s  |relE| {e:.3e}  |relZ| {z:.3e}").unwrap();
            }
            writeln!(s, "slope E {:.2}, Z {:.2}", r.slope_energy, r.slope_entropy).unwrap();
        }
        "conservation" => {
            for r in conservation(8, 6.0, Some(out))? {
                writeln!(
                    s,
                    "{:<13} steps {}  max|relM| {:.1e}  max|relS| {:.1e}  max|relW| {:.1e}  relE {:.3e}  relZ {:.3e}",
                    r.flux, r.steps, r.max_rel_mass, r.max_rel_buoyancy, r.max_rel_vorticity, r.final_rel_energy, r.final_rel_entropy
                )
                .unwrap();
            }
        }
        "compatibility" => {
            let r = compatibility(8, 3.0)?;
            writeln!(
                s,
                "steps {}  max|b-g|/g {:.2e}  hb == h bitwise (b = 1): {}",
                r.steps, r.max_b_deviation, r.unit_b_bitwise
            )
            .unwrap();
        }
        "variants" => {
            for flux in [FluxConfig::conservative(), FluxConfig::dissipative()] {
                for r in variants(8, 1.0, flux, Some(out))? {
                    writeln!(
                        s,
                        "{} {:?}: steps {} completed {} max dZ/dt {:.2e} max dE/dt {:.2e} max relZ {:.3e} Z increasing {}",
                        flux_name(&flux),
                        r.variant,
                        r.steps,
                        r.completed,
                        r.max_entropy_probe,
                        r.max_energy_probe,
                        r.max_rel_entropy(),
                        r.entropy_monotone_increasing()
                    )
                    .unwrap();
                }
            }
        }
        "probes" => {
            let r = probes(50, seed)?;
            writeln!(s, "{r:#?}").unwrap();
        }
        other => return Err(CliError::UnknownExperiment(other.to_string())),
    }
    std::fs::write(out.join(format!("{name}.txt")), &s)?;
    Ok(s)
}
