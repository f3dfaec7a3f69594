//! Quantitative Hopf lemma on the annulus `ϱ <= |z| < 1`.
//!
//! For `u` subharmonic on the annulus, negative inside and zero on the unit
//! circle, the comparison function `v = u + ε h` with the barrier
//! `h(z) = e^{-A|z|²} - e^{-A}`, `A = ϱ^{-2}`, stays non-positive, which
//! bounds `∂u/∂r` on the circle below by
//! `c(u, ϱ) = 2M / (ϱ²(1 - e^{1/ϱ² - 1}))`, `M = max_{|z|=ϱ} u`.
//!
//! The Laplacian of the barrier is `4A e^{-A|z|²}(A|z|² - 1)`, which is
//! non-negative on the annulus exactly when `A >= ϱ^{-2}`.

use crate::boundary::node;
use crate::error::{Error, Result};
use crate::fd;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Boundary nodes used for the inner-rim maximum and the radial check.
pub const DEFAULT_BOUNDARY_NODES: usize = 1024;

/// Slack on `Δu >= 0`, absorbing stencil error.
pub const LAPLACIAN_TOLERANCE: f64 = 1e-8;

/// Slack on the radial-derivative and barrier conclusions.
pub const CONCLUSION_TOLERANCE: f64 = 1e-8;

/// Allowed `|u|` on the unit circle.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

/// `h(z) = e^{-A|z|²} - e^{-A}`.
pub fn barrier_h(a: f64, z: Complex64) -> f64 {
    (-a * z.norm_sqr()).exp() - (-a).exp()
}

/// `Δh(z) = 4A e^{-A|z|²}(A|z|² - 1)`.
pub fn barrier_laplacian(a: f64, z: Complex64) -> f64 {
    let s = a * z.norm_sqr();
    4.0 * a * (-s).exp() * (s - 1.0)
}

/// `∂h/∂r = -2A r e^{-A r²}`.
pub fn barrier_radial_derivative(a: f64, r: f64) -> f64 {
    -2.0 * a * r * (-a * r * r).exp()
}

/// `c = 2M / (ϱ²(1 - e^{1/ϱ² - 1}))` for `M < 0`.
pub fn hopf_constant(m: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(m < 0.0) {
        return Err(Error::Argument(format!("M(u, ϱ) must be negative, got {m}")));
    }
    let x = 1.0 / (rho * rho) - 1.0;
    Ok(2.0 * m / (rho * rho * -x.exp_m1()))
}

/// `ln c` from `ln(-M)`; stays finite where `c` itself over- or underflows.
pub fn ln_hopf_constant(ln_neg_m: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let x = 1.0 / (rho * rho) - 1.0;
    // ln(e^x - 1) = x + ln(1 - e^{-x})
    let ln_denominator = x + (-(-x).exp_m1()).ln();
    Ok(std::f64::consts::LN_2 + ln_neg_m - 2.0 * rho.ln() - ln_denominator)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("ϱ must lie in (0, 1), got {rho}")))
    }
}

type Field = Box<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// A real function on the closed annulus, optionally with its Laplacian.
pub struct AnnulusFunction {
    pub name: String,
    value: Field,
    laplacian: Option<Field>,
}

impl std::fmt::Debug for AnnulusFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnnulusFunction")
            .field("name", &self.name)
            .field("analytic_laplacian", &self.laplacian.is_some())
            .finish()
    }
}

impl AnnulusFunction {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        AnnulusFunction {
            name: name.into(),
            value: Box::new(value),
            laplacian: None,
        }
    }

    pub fn with_laplacian<F>(mut self, laplacian: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        self.laplacian = Some(Box::new(laplacian));
        self
    }

    /// `|z|² - 1`.
    pub fn quadratic() -> Self {
        Self::new("quadratic", |z| z.norm_sqr() - 1.0).with_laplacian(|_| 4.0)
    }

    /// `log|z|`.
    pub fn log() -> Self {
        Self::new("log", |z| z.norm().ln()).with_laplacian(|_| 0.0)
    }

    /// `|z| - 1`.
    pub fn radial() -> Self {
        Self::new("radial", |z| z.norm() - 1.0).with_laplacian(|z| 1.0 / z.norm())
    }

    /// Looks up one of the built-in test functions by name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "quadratic" => Some(Self::quadratic()),
            "log" => Some(Self::log()),
            "radial" => Some(Self::radial()),
            _ => None,
        }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        (self.value)(z)
    }

    /// Analytic Laplacian when supplied, Richardson-extrapolated stencil otherwise.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        match &self.laplacian {
            Some(f) => f(z),
            None => fd::five_point_richardson(|p| self.value(p), z, 1e-3),
        }
    }

    /// `∂u/∂r` at `t` by one-sided differences with Richardson extrapolation.
    pub fn radial_derivative(&self, t: Complex64) -> f64 {
        fd::inward_radial_richardson(|p| self.value(p), t, 1e-4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierParams {
    pub rho: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl BarrierParams {
    pub fn hopf_constant(&self) -> f64 {
        hopf_constant(self.m, self.rho).expect("BarrierParams holds M < 0 and 0 < ϱ < 1")
    }
}

fn circle(r: f64, nodes: usize) -> impl Iterator<Item = Complex64> {
    (0..nodes).map(move |j| Complex64::from_polar(r, node(j, nodes)))
}

/// `A = ϱ^{-2}`, `M = max_{|z|=ϱ} u` on `nodes` points, and
/// `ε = M/(e^{-A} - e^{-Aϱ²})`.
pub fn choose_params(u: &AnnulusFunction, rho: f64, nodes: usize) -> Result<BarrierParams> {
    check_rho(rho)?;
    if nodes < DEFAULT_BOUNDARY_NODES {
        return Err(Error::Argument(format!(
            "inner-rim maximum needs at least {DEFAULT_BOUNDARY_NODES} nodes, got {nodes}"
        )));
    }
    let a = 1.0 / (rho * rho);
    let m = circle(rho, nodes).map(|z| u.value(z)).fold(f64::NEG_INFINITY, f64::max);
    if !(m < 0.0) {
        return Err(Error::Hypothesis(vec![format!(
            "u < 0 fails on the inner rim |z| = {rho}: max u = {m}"
        )]));
    }
    let epsilon = m / ((-a).exp() - (-a * rho * rho).exp());
    Ok(BarrierParams { rho, a, epsilon, m })
}

/// Grid sizes used by [`verify_hopf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub boundary_nodes: usize,
}

impl Default for AnnulusGrid {
    fn default() -> Self {
        AnnulusGrid {
            n_r: 32,
            n_theta: 128,
            boundary_nodes: DEFAULT_BOUNDARY_NODES,
        }
    }
}

impl AnnulusGrid {
    /// Radii equispaced on `[ϱ, 1]`, both ends included.
    pub fn radii(&self, rho: f64) -> Vec<f64> {
        let last = (self.n_r - 1) as f64;
        (0..self.n_r).map(|i| rho + (1.0 - rho) * i as f64 / last).collect()
    }

    pub fn points(&self, rho: f64) -> Vec<Complex64> {
        self.radii(rho)
            .into_iter()
            .flat_map(|r| circle(r, self.n_theta))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisChecks {
    pub min_laplacian: f64,
    pub subharmonic: bool,
    pub max_interior_value: f64,
    pub negative_inside: bool,
    pub max_boundary_abs: f64,
    pub vanishes_on_circle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfCertificate {
    pub function: String,
    pub params: BarrierParams,
    pub grid: AnnulusGrid,
    pub hypotheses: HypothesisChecks,
    pub c_value: f64,
    pub min_radial_derivative: f64,
    /// `max (u + ε h)` over the annulus grid.
    pub barrier_max: f64,
    pub pass: bool,
}

/// Checks the hypotheses of the annulus Hopf lemma for `u` and, when they
/// hold, certifies `∂u/∂r >= c(u, ϱ)` on the boundary nodes together with
/// the comparison `u + ε h <= 0` on the annulus grid.
pub fn verify_hopf(u: &AnnulusFunction, rho: f64, grid: &AnnulusGrid) -> Result<HopfCertificate> {
    check_rho(rho)?;
    if grid.n_r < 2 || grid.n_theta == 0 {
        return Err(Error::Argument("annulus grid needs n_r >= 2 and n_theta >= 1".into()));
    }
    let interior: Vec<Complex64> = grid
        .radii(rho)
        .into_iter()
        .filter(|&r| r < 1.0)
        .flat_map(|r| circle(r, grid.n_theta))
        .collect();
    let boundary: Vec<Complex64> = circle(1.0, grid.boundary_nodes).collect();

    let laplacians: Vec<f64> = interior.par_iter().map(|&z| u.laplacian(z)).collect();
    let min_laplacian = laplacians.into_iter().fold(f64::INFINITY, f64::min);
    let max_interior_value = interior.iter().map(|&z| u.value(z)).fold(f64::NEG_INFINITY, f64::max);
    let max_boundary_abs = boundary.iter().map(|&t| u.value(t).abs()).fold(0.0, f64::max);
    let hypotheses = HypothesisChecks {
        min_laplacian,
        subharmonic: min_laplacian >= -LAPLACIAN_TOLERANCE,
        max_interior_value,
        negative_inside: max_interior_value < 0.0,
        max_boundary_abs,
        vanishes_on_circle: max_boundary_abs <= BOUNDARY_TOLERANCE,
    };

    let mut failures = Vec::new();
    if !hypotheses.subharmonic {
        failures.push(format!("Δu >= 0 fails: min Δu = {min_laplacian:e}"));
    }
    if !hypotheses.negative_inside {
        failures.push(format!("u < 0 fails inside the annulus: max u = {max_interior_value:e}"));
    }
    if !hypotheses.vanishes_on_circle {
        failures.push(format!("u = 0 fails on the unit circle: max |u| = {max_boundary_abs:e}"));
    }
    if !failures.is_empty() {
        return Err(Error::Hypothesis(failures));
    }

    let params = choose_params(u, rho, grid.boundary_nodes)?;
    let c_value = params.hopf_constant();
    let min_radial_derivative = boundary
        .par_iter()
        .map(|&t| u.radial_derivative(t))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let barrier_max = grid
        .points(rho)
        .iter()
        .map(|&z| u.value(z) + params.epsilon * barrier_h(params.a, z))
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = min_radial_derivative >= c_value - CONCLUSION_TOLERANCE && barrier_max <= CONCLUSION_TOLERANCE;
    Ok(HopfCertificate {
        function: u.name.clone(),
        params,
        grid: *grid,
        hypotheses,
        c_value,
        min_radial_derivative,
        barrier_max,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // High-precision reference values (40-digit evaluation of the closed forms).
    const C_QUADRATIC_HALF: f64 = 0.314_374_178_947_535_7;
    const C_UNIT_QUARTER: f64 = 9.788_877_250_498_69e-6;
    const C_LOG_HALF: f64 = 0.290_543_434_371_109_46;
    const EPS_QUADRATIC_HALF: f64 = 2.145_531_073_590_511;

    #[test]
    fn barrier_values() {
        assert_eq!(barrier_h(1.0, c(1.0, 0.0)), 0.0);
        assert_eq!(barrier_h(1.0, c(0.0, -1.0)), 0.0);
        assert!((barrier_h(4.0, c(0.5, 0.0)) - 0.349_563_802_282_708_1).abs() < 1e-15);
        assert_eq!(barrier_h(16.0, c(0.0, 0.0)), 1.0 - (-16.0f64).exp());
        assert_eq!(barrier_laplacian(4.0, c(0.5, 0.0)), 0.0);
        assert!((barrier_laplacian(4.0, c(1.0, 0.0)) - 0.879_150_666_659_240_6).abs() < 1e-14);
        assert_eq!(barrier_laplacian(16.0, c(0.0, 0.25)), 0.0);
    }

    #[test]
    fn constants() {
        assert!((hopf_constant(-0.75, 0.5).unwrap() - C_QUADRATIC_HALF).abs() < 1e-14);
        assert!((hopf_constant(-1.0, 0.25).unwrap() / C_UNIT_QUARTER - 1.0).abs() < 1e-13);
        let tiny = hopf_constant(-1e-300, 0.5).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-299);
        assert!(hopf_constant(0.0, 0.5).is_err());
        assert!(hopf_constant(-1.0, 1.0).is_err());
        let ln = ln_hopf_constant(0.75f64.ln(), 0.5).unwrap();
        assert!((ln.exp() - C_QUADRATIC_HALF).abs() < 1e-14);
    }

    #[test]
    fn params() {
        let p = choose_params(&AnnulusFunction::quadratic(), 0.5, 1024).unwrap();
        assert_eq!(p.a, 4.0);
        assert!((p.m + 0.75).abs() < 1e-15);
        assert!((p.epsilon - EPS_QUADRATIC_HALF).abs() < 1e-13);
        let p = choose_params(&AnnulusFunction::log(), 0.5, 1024).unwrap();
        assert!((p.m - 0.5f64.ln()).abs() < 1e-15);
        let zero = AnnulusFunction::new("zero", |_| 0.0);
        assert!(matches!(choose_params(&zero, 0.5, 1024), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn certificates() {
        let grid = AnnulusGrid::default();
        let q = verify_hopf(&AnnulusFunction::quadratic(), 0.5, &grid).unwrap();
        assert!(q.pass);
        assert!((q.c_value - C_QUADRATIC_HALF).abs() < 1e-14);
        assert!((q.min_radial_derivative - 2.0).abs() < 1e-7);

        let l = verify_hopf(&AnnulusFunction::log(), 0.5, &grid).unwrap();
        assert!(l.pass && (l.c_value - C_LOG_HALF).abs() < 1e-14);
        assert!((l.min_radial_derivative - 1.0).abs() < 1e-7);

        let r = verify_hopf(&AnnulusFunction::radial(), 0.5, &grid).unwrap();
        assert!(r.pass && (r.min_radial_derivative - 1.0).abs() < 1e-7);
    }

    #[test]
    fn stencil_fallback_matches_closed_form() {
        let u = AnnulusFunction::new("quadratic-stencil", |z| z.norm_sqr() - 1.0);
        let cert = verify_hopf(&u, 0.5, &AnnulusGrid::default()).unwrap();
        assert!(cert.pass);
        assert!((cert.hypotheses.min_laplacian - 4.0).abs() < 1e-6);
    }

    #[test]
    fn hypothesis_failures_are_itemized() {
        // superharmonic and positive inside
        let u = AnnulusFunction::new("bad", |z| 1.0 - z.norm_sqr()).with_laplacian(|_| -4.0);
        match verify_hopf(&u, 0.5, &AnnulusGrid::default()) {
            Err(Error::Hypothesis(items)) => assert_eq!(items.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
