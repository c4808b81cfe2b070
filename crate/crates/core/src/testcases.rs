//! Initial conditions: steady zonal flow, the barotropically unstable jet with
//! a buoyancy perturbation, constant-buoyancy fixtures and random states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{l2_error, FieldErrors};
use crate::error::{Error, Result};
use crate::mesh::{lat_lon, Mesh, Vec3};
use crate::solver::Coriolis;
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanetParams {
    /// Radius, m.
    pub radius: f64,
    /// Gravity, m/s^2.
    pub g: f64,
    /// Rotation rate, 1/s; `f = 2 omega sin(lat)`.
    pub omega: f64,
}

impl Default for PlanetParams {
    fn default() -> Self {
        Self {
            radius: 6.37122e6,
            g: 9.80616,
            omega: 7.292e-5,
        }
    }
}

impl PlanetParams {
    pub fn coriolis(&self) -> Coriolis {
        Coriolis::Rotating { omega: self.omega }
    }

    pub fn f(&self, lat: f64) -> f64 {
        2.0 * self.omega * lat.sin()
    }
}

/// Unit eastward vector at a point on a sphere centred at the origin.
pub fn east(x: &Vec3) -> Vec3 {
    let (_, lon) = lat_lon(x);
    Vec3::new(-lon.sin(), lon.cos(), 0.0)
}

pub const W2_U0: f64 = 38.61068;
pub const W2_GH0: f64 = 2.94e4;
pub const W2_C: f64 = 0.05;

/// Point values `(u, h, b)` of the steady zonal flow.
pub fn williamson2_point(params: &PlanetParams, x: &Vec3) -> (Vec3, f64, f64) {
    let g = params.g;
    let big_h = W2_GH0 / g;
    let (lat, _) = lat_lon(x);
    let u = east(x) * (W2_U0 * lat.cos());
    let k = params.radius * params.omega * W2_U0 + 0.5 * W2_U0 * W2_U0;
    let s = lat.sin();
    let h = big_h - k * s * s / g;
    let b = g * (1.0 + W2_C * big_h / (h * h));
    (u, h, b)
}

pub fn williamson2_init(mesh: &Mesh, params: &PlanetParams) -> State {
    let (mut u, mut h, mut hb) = (Vec::new(), Vec::new(), Vec::new());
    for m in mesh.nodes() {
        let (uu, hh, bb) = williamson2_point(params, &m.x);
        u.push(uu);
        h.push(hh);
        hb.push(hh * bb);
    }
    State::from_cartesian(mesh, &u, h, hb)
}

/// L2 errors of `state` against the analytic steady fields.
pub fn steady_state_error(state: &State, mesh: &Mesh, params: &PlanetParams) -> FieldErrors {
    l2_error(mesh, state, |x| {
        let (u, h, b) = williamson2_point(params, x);
        (u, h, h * b)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationForm {
    /// `exp(-gamma3^2 (lat - lat2))` as printed. Overflows away from the jet.
    PaperLiteral,
    /// `exp(-gamma3^2 (lat - lat2)^2)`.
    #[default]
    ClassicSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Galewsky {
    pub u0: f64,
    pub depth: f64,
    pub lat0: f64,
    pub lat1: f64,
    pub lat2: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub amplitude: f64,
    pub form: PerturbationForm,
}

impl Default for Galewsky {
    fn default() -> Self {
        let lat0 = PI / 7.0;
        Self {
            u0: 80.0,
            depth: 1e4,
            lat0,
            lat1: FRAC_PI_2 - lat0,
            lat2: FRAC_PI_4,
            gamma2: 3.0,
            gamma3: 15.0,
            amplitude: 120.0,
            form: PerturbationForm::ClassicSquared,
        }
    }
}

impl Galewsky {
    pub fn gamma1(&self) -> f64 {
        let d = self.lat1 - self.lat0;
        (-4.0 / (d * d)).exp()
    }

    /// Zonal jet speed, m/s.
    pub fn jet(&self, lat: f64) -> f64 {
        if lat <= self.lat0 || lat >= self.lat1 {
            return 0.0;
        }
        self.u0 / self.gamma1() * (1.0 / ((lat - self.lat0) * (lat - self.lat1))).exp()
    }

    /// Perturbation `p(lon, lat)`, with `lon` in `(-pi, pi]`.
    pub fn perturbation(&self, lon: f64, lat: f64) -> f64 {
        let d = lat - self.lat2;
        let decay = match self.form {
            PerturbationForm::PaperLiteral => -self.gamma3 * self.gamma3 * d,
            PerturbationForm::ClassicSquared => -self.gamma3 * self.gamma3 * d * d,
        };
        self.amplitude * lat.cos() * (-(self.gamma2 * lon).powi(2)).exp() * decay.exp()
    }

    /// Balance integrand `a u (f + tan(lat) u / a)`.
    pub fn balance_integrand(&self, params: &PlanetParams, lat: f64) -> f64 {
        let u = self.jet(lat);
        params.radius * u * (params.f(lat) + lat.tan() * u / params.radius)
    }
}

/// Depth drop `(1/g) int_{-pi/2}^{lat} a u (f + tan u / a)` for each latitude
/// in `lats`, by adaptive Gauss-Kronrod on consecutive sorted intervals.
pub fn galewsky_balance(
    case: &Galewsky,
    params: &PlanetParams,
    lats: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let clip = |t: f64| t.clamp(case.lat0, case.lat1);
    let mut order: Vec<usize> = (0..lats.len()).collect();
    order.sort_by(|&a, &b| lats[a].total_cmp(&lats[b]));
    let f = |t: f64| case.balance_integrand(params, t);
    // Scale for the absolute tolerance: the whole jet contribution.
    let total = adaptive_gk(&f, case.lat0, case.lat1, tol, 0.0)?.abs();
    let abs_tol = tol * total.max(f64::MIN_POSITIVE);
    let mut out = vec![0.0; lats.len()];
    let (mut prev, mut acc) = (case.lat0, 0.0);
    for &i in &order {
        let t = clip(lats[i]);
        if t > prev {
            acc += adaptive_gk(
                &f,
                prev,
                t,
                tol,
                abs_tol * (t - prev) / (case.lat1 - case.lat0),
            )?;
            prev = t;
        }
        out[i] = acc / params.g;
    }
    Ok(out)
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WK[7] * fc;
    let mut gauss = GK_WG[3] * fc;
    for j in 0..7 {
        let x = h * GK_NODES[j];
        let s = f(c - x) + f(c + x);
        kronrod += GK_WK[j] * s;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive bisection with a 7/15-point Gauss-Kronrod pair. Converged when the
/// error estimate is below `max(abs_tol, rel_tol |I|)` on each piece.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        rel: f64,
        abs: f64,
        depth: u32,
    ) -> Result<f64> {
        let (val, err) = gk15(f, a, b);
        if err <= abs.max(rel * val.abs()) || err == 0.0 {
            return Ok(val);
        }
        if depth == 0 {
            return Err(Error::Init(format!(
                "quadrature did not converge on [{a}, {b}] (error {err:e})"
            )));
        }
        let m = 0.5 * (a + b);
        Ok(rec(f, a, m, rel, 0.5 * abs, depth - 1)? + rec(f, m, b, rel, 0.5 * abs, depth - 1)?)
    }
    rec(f, a, b, rel_tol, abs_tol, 40)
}

pub fn galewsky_init(mesh: &Mesh, params: &PlanetParams, case: &Galewsky) -> Result<State> {
    let lat_lons: Vec<(f64, f64)> = mesh.nodes().iter().map(|m| lat_lon(&m.x)).collect();
    let lats: Vec<f64> = lat_lons.iter().map(|&(lat, _)| lat).collect();
    let drop = galewsky_balance(case, params, &lats, 1e-12)?;
    let mut u = Vec::with_capacity(lats.len());
    let mut h = Vec::with_capacity(lats.len());
    let mut hb = Vec::with_capacity(lats.len());
    for (i, m) in mesh.nodes().iter().enumerate() {
        let (lat, lon) = lat_lons[i];
        let p = case.perturbation(lon, lat);
        let depth = case.depth + p - drop[i];
        let b = params.g + p / 120.0;
        if !(depth > 0.0 && depth.is_finite() && b.is_finite()) {
            return Err(Error::Init(format!(
                "invalid jet state at node {i}: h = {depth}, b = {b} (lat {lat}, lon {lon})"
            )));
        }
        u.push(east(&m.x) * case.jet(lat));
        h.push(depth);
        hb.push(depth * b);
    }
    Ok(State::from_cartesian(mesh, &u, h, hb))
}

/// Replace the buoyancy of `state` by the constant `b`, keeping `h` and `u`.
pub fn constant_b_init(state: &State, b: f64) -> State {
    State {
        hb: state.h.iter().map(|h| b * h).collect(),
        ..state.clone()
    }
}

/// Random valid state: `h` within 10% of `depth`, `b` within 10% of `g`,
/// tangent velocity with Cartesian components up to `speed`.
pub fn random_state(mesh: &Mesh, seed: u64, depth: f64, g: f64, speed: f64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.n_nodes();
    let mut u = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut hb = Vec::with_capacity(n);
    for m in mesh.nodes() {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ) * speed;
        u.push(v - m.k * v.dot(&m.k));
        let hh = depth * (1.0 + 0.1 * rng.random_range(-1.0..1.0));
        let bb = g * (1.0 + 0.1 * rng.random_range(-1.0..1.0));
        h.push(hh);
        hb.push(hh * bb);
    }
    State::from_cartesian(mesh, &u, h, hb)
}

/// Uniform depth and buoyancy at rest.
pub fn rest_state(mesh: &Mesh, depth: f64, b: f64) -> State {
    let n = mesh.n_nodes();
    State {
        u1: vec![0.0; n],
        u2: vec![0.0; n],
        h: vec![depth; n],
        hb: vec![depth * b; n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ReferenceBasis;

    fn earth_mesh(n: usize) -> Mesh {
        Mesh::cubed_sphere(
            n,
            PlanetParams::default().radius,
            ReferenceBasis::new(3).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn williamson2_equator_and_poles() {
        let p = PlanetParams::default();
        let a = p.radius;
        let big_h = W2_GH0 / p.g;
        let (u, h, b) = williamson2_point(&p, &Vec3::new(a, 0.0, 0.0));
        assert!((u - Vec3::new(0.0, W2_U0, 0.0)).norm() < 1e-12);
        assert!((h - big_h).abs() < 1e-9);
        assert!((b - p.g * (1.0 + 0.05 / big_h)).abs() < 1e-14);
        for z in [a, -a] {
            let (u, _, _) = williamson2_point(&p, &Vec3::new(0.0, 0.0, z));
            assert!(u.norm() < 1e-9);
        }
        assert!((big_h - 2998.1155).abs() < 1e-3);
    }

    #[test]
    fn williamson2_hemispheric_symmetry() {
        let p = PlanetParams::default();
        let x = Vec3::new(0.3, -0.5, 0.7).normalize() * p.radius;
        let y = Vec3::new(x.x, x.y, -x.z);
        let (_, h1, b1) = williamson2_point(&p, &x);
        let (_, h2, b2) = williamson2_point(&p, &y);
        assert!((h1 - h2).abs() < 1e-9 && (b1 - b2).abs() < 1e-12);
    }

    #[test]
    fn jet_profile() {
        let c = Galewsky::default();
        let mid = 0.5 * (c.lat0 + c.lat1);
        assert!((c.jet(mid) - 80.0).abs() < 1e-12);
        assert_eq!(c.jet(c.lat0), 0.0);
        assert_eq!(c.jet(c.lat1), 0.0);
        assert_eq!(c.jet(0.1), 0.0);
        assert_eq!(c.jet(1.5), 0.0);
        let bound = 120.0 * (-(3.0 * PI).powi(2)).exp();
        assert!(c.perturbation(PI, FRAC_PI_4) < bound);
        assert!(bound / 120.0 / 9.80616 < 1e-35);
    }

    #[test]
    fn literal_perturbation_explodes_south_of_the_jet() {
        let case = Galewsky {
            form: PerturbationForm::PaperLiteral,
            ..Galewsky::default()
        };
        assert!(case.perturbation(0.0, -1.2) > 1e150);
        assert!(case.perturbation(0.0, FRAC_PI_4) == 120.0 * FRAC_PI_4.cos());
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn balance_matches_simpson() {
        let case = Galewsky::default();
        let p = PlanetParams::default();
        let lats = [-1.0, 0.5, 0.7, 0.9, 1.2, 1.5];
        let got = galewsky_balance(&case, &p, &lats, 1e-12).unwrap();
        for (&lat, &g) in lats.iter().zip(&got) {
            let hi = lat.clamp(case.lat0, case.lat1);
            let want = if hi > case.lat0 {
                simpson(|t| case.balance_integrand(&p, t), case.lat0, hi, 20000) / p.g
            } else {
                0.0
            };
            assert!(
                (g - want).abs() <= 1e-10 * want.abs().max(1.0),
                "{lat}: {g} vs {want}"
            );
        }
        assert_eq!(got[0], 0.0);
    }

    #[test]
    fn galewsky_state_is_valid() {
        let mesh = earth_mesh(3);
        let s = galewsky_init(&mesh, &PlanetParams::default(), &Galewsky::default()).unwrap();
        assert!(s.is_finite());
        assert!(s.min_depth() > 8000.0);
        let b = s.buoyancy();
        assert!(b.iter().all(|&v| (9.80616..9.80616 + 1.0).contains(&v)));
    }

    #[test]
    fn constant_b_fixture() {
        let mesh = earth_mesh(2);
        let p = PlanetParams::default();
        let s = constant_b_init(&williamson2_init(&mesh, &p), p.g);
        assert!(s.buoyancy().iter().all(|&b| (b - p.g).abs() <= 1e-15 * p.g));
    }

    #[test]
    fn random_state_is_reproducible_and_tangent() {
        let mesh = earth_mesh(1);
        let a = random_state(&mesh, 7, 1000.0, 10.0, 5.0);
        let b = random_state(&mesh, 7, 1000.0, 10.0, 5.0);
        assert_eq!(a, b);
        assert_ne!(a, random_state(&mesh, 8, 1000.0, 10.0, 5.0));
        assert!(a.min_depth() >= 900.0);
    }
}
