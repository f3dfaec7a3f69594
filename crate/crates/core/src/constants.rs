//! Explicit lower bound for the boundary radial derivative of a
//! `K`-quasiconformal harmonic map of the disk onto a smooth Jordan domain,
//! and the resulting co-Lipschitz constant.
//!
//! The chain, for dilatation `K` and target `Ω = ω(U)` with `g = ω^{-1}`:
//!
//! ```text
//! ϱ     = 4^{-K}
//! A     = ϱ^{-2}
//! ρ_min = 4^{1-K²-K}                         lower bound of |g∘w| on ϱ <= |z| <= 1
//! B     = max{ ½ sup_Ω |1 - (1-1/K²)|g''|/|g'|²| · K² 4^{K²+K-1}, 1 }
//! M     = (e^{4^{-2/K} B} - e^B) / B        bound for max_{|z|=ϱ} φ
//! c_φ   = 2M / (ϱ²(1 - e^{1/ϱ²-1}))
//! C     = e^{-B} c_φ / |g'|_∞
//! C / K                                      co-Lipschitz constant
//! ```
//!
//! `M` and `c_φ` overflow `f64` already at `K = 2` and `C` underflows at
//! `K = 3`, so every stage also carries its natural logarithm and the
//! invariants are checked in log space.

use crate::boundary::node;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::fd;
use crate::harmonic::{GradientSample, HarmonicMap};
use crate::hopf;
use crate::qc::PolarGrid;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Boundary nodes for the supremum inside `B`.
pub const B_BOUNDARY_NODES: usize = 4096;

/// Boundary nodes for `|g'|_∞`.
pub const G_BOUND_NODES: usize = 4096;

fn check_k(k: f64) -> Result<()> {
    if k >= 1.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("K must be finite and >= 1, got {k}")))
    }
}

/// `ϱ = 4^{-K}`.
pub fn rho_of_k(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(4f64.powf(-k))
}

/// `4^{1-K²-K}`.
pub fn modulus_lower_bound(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(4f64.powf(1.0 - k * k - k))
}

/// `(B, sup_term)` with the supremum taken over a dense boundary grid and
/// the default interior grid, evaluated at `ω`-preimages.
pub fn compute_b(k: f64, d: &DomainSpec) -> Result<(f64, f64)> {
    check_k(k)?;
    d.validate()?;
    let weight = 1.0 - 1.0 / (k * k);
    let term = |z: Complex64| (1.0 - weight * d.distortion_ratio(z)).abs();
    let boundary = (0..B_BOUNDARY_NODES)
        .map(|j| term(Complex64::from_polar(1.0, node(j, B_BOUNDARY_NODES))))
        .fold(0.0, f64::max);
    let interior = PolarGrid::default()
        .points()
        .into_iter()
        .map(term)
        .fold(0.0, f64::max);
    let sup_term = boundary.max(interior);
    let b = (0.5 * sup_term * k * k * 4f64.powf(k * k + k - 1.0)).max(1.0);
    Ok((b, sup_term))
}

/// `(e^{4^{-2/K} B} - e^B)/B`; `-∞` once `e^B` overflows.
pub fn phi_max_bound(b: f64, k: f64) -> f64 {
    if b.exp().is_finite() {
        let q = 4f64.powf(-2.0 / k);
        ((q * b).exp() - b.exp()) / b
    } else {
        -ln_neg_phi_max_bound(b, k).exp()
    }
}

/// `ln(-(e^{4^{-2/K} B} - e^B)/B)`.
pub fn ln_neg_phi_max_bound(b: f64, k: f64) -> f64 {
    let q = 4f64.powf(-2.0 / k);
    b - b.ln() + (-(-(1.0 - q) * b).exp_m1()).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: &'static str,
    pub formula: &'static str,
    pub value: f64,
    /// Natural log of `|value|` where `value` itself may leave `f64` range.
    pub ln_abs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantReport {
    #[serde(rename = "K")]
    pub dilatation: f64,
    pub domain: DomainSpec,
    /// `a = ω(0)`, the point mapped to 0 by `g`.
    pub base_point: Complex64,
    pub rho: f64,
    #[serde(rename = "A")]
    pub barrier_exponent: f64,
    pub rho_w1_lower: f64,
    pub sup_term: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub phi_max: f64,
    pub ln_neg_phi_max: f64,
    pub c_phi: f64,
    pub ln_c_phi: f64,
    pub g1_sup: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub ln_c: f64,
    pub colip: f64,
    pub ln_colip: f64,
    pub trace: Vec<Stage>,
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

impl ConstantReport {
    /// Lists every violated invariant; empty when the report is consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let k = self.dilatation;
        if !close(self.rho, 4f64.powf(-k), 1e-14) {
            out.push(format!("rho = {} differs from 4^-K", self.rho));
        }
        if !close(self.barrier_exponent * self.rho * self.rho, 1.0, 1e-12) {
            out.push("A·rho² != 1".into());
        }
        if !(self.b >= 1.0) {
            out.push(format!("B = {} < 1", self.b));
        }
        if !(self.phi_max < 0.0) || !self.ln_neg_phi_max.is_finite() {
            out.push(format!("phi_max = {} is not negative", self.phi_max));
        }
        if !self.ln_c_phi.is_finite() || self.c_phi < 0.0 {
            out.push(format!("c_phi = {} is not positive", self.c_phi));
        }
        if !self.ln_c.is_finite() || self.c < 0.0 {
            out.push(format!("C = {} is not positive", self.c));
        }
        if !close(self.ln_colip, self.ln_c - k.ln(), 1e-12) || !close(self.colip, self.c / k, 1e-12) {
            out.push("colip != C/K".into());
        }
        // C = 2 e^{-B} M / (ϱ² (1 - e^{1/ϱ²-1}) |g'|_∞), in log form
        let x = 1.0 / (self.rho * self.rho) - 1.0;
        let ln_formula = std::f64::consts::LN_2 - self.b + self.ln_neg_phi_max
            - 2.0 * self.rho.ln()
            - (x + (-(-x).exp_m1()).ln())
            - self.g1_sup.ln();
        // both sides carry ±B before cancelling, so the slack scales with B
        if (self.ln_c - ln_formula).abs() > 1e-12 * (self.b + ln_formula.abs()) {
            out.push(format!("ln C = {} differs from the closed formula {ln_formula}", self.ln_c));
        }
        if self.phi_max.is_finite() && self.c.is_normal() {
            let direct = 2.0 * (-self.b).exp() * self.phi_max / (self.rho * self.rho * -x.exp_m1() * self.g1_sup);
            if !close(self.c / direct, 1.0, 1e-10) {
                out.push(format!("C = {} differs from direct evaluation {direct}", self.c));
            }
        }
        out
    }
}

/// Assembles the full constant chain for dilatation `K` and target `d`.
pub fn colipschitz_constant(k: f64, d: &DomainSpec) -> Result<ConstantReport> {
    let rho = rho_of_k(k)?;
    let barrier_exponent = 1.0 / (rho * rho);
    let rho_w1_lower = modulus_lower_bound(k)?;
    let (b, sup_term) = compute_b(k, d)?;
    let phi_max = phi_max_bound(b, k);
    let ln_neg_phi_max = ln_neg_phi_max_bound(b, k);
    let ln_c_phi = hopf::ln_hopf_constant(ln_neg_phi_max, rho)?;
    let c_phi = if phi_max.is_finite() {
        hopf::hopf_constant(phi_max, rho)?
    } else {
        ln_c_phi.exp()
    };
    let g1_sup = d.g_derivative_bounds(G_BOUND_NODES)?.g1_sup;
    let ln_c = -b + ln_c_phi - g1_sup.ln();
    let c = if c_phi.is_finite() {
        (-b).exp() * c_phi / g1_sup
    } else {
        ln_c.exp()
    };
    let ln_colip = ln_c - k.ln();
    let colip = c / k;
    let trace = vec![
        Stage { name: "rho", formula: "4^-K", value: rho, ln_abs: None },
        Stage { name: "A", formula: "rho^-2", value: barrier_exponent, ln_abs: None },
        Stage { name: "rho_w1_lower", formula: "4^(1-K^2-K)", value: rho_w1_lower, ln_abs: None },
        Stage { name: "sup_term", formula: "sup |1-(1-1/K^2)|g''|/|g'|^2|", value: sup_term, ln_abs: None },
        Stage { name: "B", formula: "max(sup_term*K^2*4^(K^2+K-1)/2, 1)", value: b, ln_abs: None },
        Stage { name: "phi_max", formula: "(exp(4^(-2/K)*B) - exp(B))/B", value: phi_max, ln_abs: Some(ln_neg_phi_max) },
        Stage { name: "c_phi", formula: "2*phi_max/(rho^2*(1-exp(1/rho^2-1)))", value: c_phi, ln_abs: Some(ln_c_phi) },
        Stage { name: "g1_sup", formula: "1/min|omega'| on the unit circle", value: g1_sup, ln_abs: None },
        Stage { name: "C", formula: "exp(-B)*c_phi/g1_sup", value: c, ln_abs: Some(ln_c) },
        Stage { name: "colip", formula: "C/K", value: colip, ln_abs: Some(ln_colip) },
    ];
    let report = ConstantReport {
        dilatation: k,
        domain: *d,
        base_point: d.base_point(),
        rho,
        barrier_exponent,
        rho_w1_lower,
        sup_term,
        b,
        phi_max,
        ln_neg_phi_max,
        c_phi,
        ln_c_phi,
        g1_sup,
        c,
        ln_c,
        colip,
        ln_colip,
        trace,
    };
    let violations = report.invariant_violations();
    if !violations.is_empty() {
        return Err(Error::Argument(format!("constant chain inconsistent: {}", violations.join("; "))));
    }
    Ok(report)
}

/// `max_z |w_z̄/w_z| + (C/K)/|w_z|` over the grid.
pub fn s_function_max(w: &HarmonicMap, c: f64, k: f64, grid: &PolarGrid) -> Result<f64> {
    check_k(k)?;
    let points = grid.points();
    let values: Vec<std::result::Result<f64, Complex64>> = points
        .par_iter()
        .map(|&z| {
            let (wz, wzb) = w.wirtinger_unchecked(z);
            let a = wz.norm();
            if a == 0.0 {
                Err(z)
            } else {
                Ok(wzb.norm() / a + (c / k) / a)
            }
        })
        .collect();
    let mut max = f64::NEG_INFINITY;
    for v in values {
        match v {
            Ok(s) => max = max.max(s),
            Err(z) => return Err(Error::Degeneracy { z }),
        }
    }
    Ok(max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCheck {
    pub nodes: usize,
    pub min_radial_derivative: f64,
    pub argmin_angle: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `min |∂w/∂r| >= C - 1e-8`.
    pub satisfied: bool,
    pub max_boundary_deviation: f64,
    pub warnings: Vec<String>,
}

/// Minimum of `|∂w/∂r|` over `m` boundary nodes, compared with `C`.
pub fn boundary_radial_check(w: &HarmonicMap, d: &DomainSpec, report: &ConstantReport, m: usize) -> Result<RadialCheck> {
    if m == 0 {
        return Err(Error::Argument("need at least one boundary node".into()));
    }
    let nodes: Vec<Complex64> = (0..m).map(|j| Complex64::from_polar(1.0, node(j, m))).collect();
    let deviations: Vec<f64> = nodes
        .par_iter()
        .map(|&t| d.boundary_deviation(w.eval_unchecked(t)))
        .collect();
    let max_boundary_deviation = deviations.into_iter().fold(0.0, f64::max);
    if !(max_boundary_deviation <= 1e-8) {
        return Err(Error::DomainMismatch {
            deviation: max_boundary_deviation,
        });
    }
    let mut min = f64::INFINITY;
    let mut argmin_angle = 0.0;
    let mut warnings = Vec::new();
    for (j, &t) in nodes.iter().enumerate() {
        let r = w.radial_derivative_boundary(t)?;
        if let Some(msg) = r.warning {
            if warnings.len() < 8 {
                warnings.push(format!("node {j}: {msg}"));
            }
        }
        let v = r.value.norm();
        if v < min {
            min = v;
            argmin_angle = node(j, m);
        }
    }
    Ok(RadialCheck {
        nodes: m,
        min_radial_derivative: min,
        argmin_angle,
        c: report.c,
        satisfied: min >= report.c - 1e-8,
        max_boundary_deviation,
        warnings,
    })
}

/// `w₁ = g∘w` for a harmonic map `w` into `Ω`, evaluated by composition.
#[derive(Debug, Clone)]
pub struct ConjugatedMap {
    pub base: HarmonicMap,
    pub domain: DomainSpec,
}

impl ConjugatedMap {
    pub fn new(base: HarmonicMap, domain: DomainSpec) -> Self {
        ConjugatedMap { base, domain }
    }

    pub fn w1(&self, z: Complex64) -> Result<Complex64> {
        self.domain.invert_omega(self.base.eval(z)?)
    }

    /// `ρ = |w₁|`.
    pub fn modulus(&self, z: Complex64) -> Result<f64> {
        Ok(self.w1(z)?.norm())
    }

    /// `φ = (e^{B|w₁|²} - e^B)/B`.
    pub fn phi(&self, z: Complex64, b: f64) -> Result<f64> {
        let h = self.w1(z)?.norm_sqr();
        Ok(((b * h).exp() - b.exp()) / b)
    }

    /// Operator norm `|∇w₁| = |g'(w)|·|∇w|`.
    pub fn grad_norm(&self, z: Complex64) -> Result<f64> {
        let inv = self.domain.invert(self.base.eval(z)?)?;
        Ok(inv.g1.norm() * self.base.gradient_sample(z)?.grad_norm)
    }

    /// Dilatation of `w₁` at `z` (equal to that of `w`).
    pub fn pointwise_dilatation(&self, z: Complex64) -> Result<f64> {
        Ok(self.base.gradient_sample(z)?.dilatation())
    }

    /// `4 g''(w) w_z w_z̄`.
    pub fn predicted_laplacian(&self, z: Complex64) -> Result<Complex64> {
        let inv = self.domain.invert(self.base.eval(z)?)?;
        let (wz, wzb) = self.base.wirtinger(z)?;
        Ok(inv.g2 * wz * wzb * 4.0)
    }

    /// Richardson-extrapolated five-point Laplacian of `w₁`.
    pub fn stencil_laplacian(&self, z: Complex64, h: f64) -> Result<Complex64> {
        let w1 = |p: Complex64| self.w1(p);
        // surface the first evaluation error, if any
        for p in [z, z + 2.0 * h, z - 2.0 * h, z + Complex64::new(0.0, 2.0 * h), z - Complex64::new(0.0, 2.0 * h)] {
            w1(p)?;
        }
        Ok(fd::five_point_richardson(
            |p| w1(p).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
            z,
            h,
        ))
    }

    /// `|∇ρ|` by central differences.
    pub fn modulus_gradient(&self, z: Complex64, h: f64) -> Result<f64> {
        for p in [z + h, z - h, z + Complex64::new(0.0, h), z - Complex64::new(0.0, h)] {
            self.w1(p)?;
        }
        let (dx, dy) = fd::central_gradient(|p| self.modulus(p).unwrap_or(f64::NAN), z, h);
        Ok(dx.hypot(dy))
    }

    /// Largest violation of `K^{-1}|∇w₁| <= |∇ρ|` over `points`.
    pub fn quas_violation(&self, k: f64, points: &[Complex64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &z in points {
            let lhs = self.grad_norm(z)? / k;
            let rhs = self.modulus_gradient(z, 1e-5)?;
            worst = worst.max(lhs - rhs);
        }
        Ok(worst)
    }

    /// Largest relative gap between the stencil Laplacian of `w₁` and
    /// `4 g''(w) w_z w_z̄` over `points`.
    pub fn laplacian_relative_error(&self, points: &[Complex64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &z in points {
            let predicted = self.predicted_laplacian(z)?;
            let stencil = self.stencil_laplacian(z, 3e-3)?;
            worst = worst.max((stencil - predicted).norm() / predicted.norm());
        }
        Ok(worst)
    }
}

/// Evidence that the harmonic extension of `e^{i(x + sin x)}` is not
/// quasiconformal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    /// `|1 + cos π|`.
    pub phase_derivative_at_pi: f64,
    pub phase_derivative_at_zero: f64,
    /// `(δ, l(∇w)((1-δ)e^{iπ}))`.
    pub min_stretch: Vec<(f64, f64)>,
    pub min_stretch_decreasing: bool,
    /// `(δ, K)` over the band `1-δ <= |z| <= 1-δ/2`, `|arg z - π| <= 0.1`.
    pub band_dilatation: Vec<(f64, f64)>,
    pub band_dilatation_increasing: bool,
    pub jacobian_near_minus_one: f64,
    /// `|∂w/∂r|` at `-1`; the radial derivative stays away from zero,
    /// only the tangential one vanishes.
    pub radial_derivative_at_minus_one: f64,
    /// Grid supremum of the dilatation on the default polar grid; finite on
    /// any grid, it only grows under refinement toward `-1`.
    pub grid_k_measured: f64,
}

pub const COUNTEREXAMPLE_DELTAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Band of points near `-1` used for the dilatation sequence.
pub fn band_points(delta: f64) -> Vec<Complex64> {
    let mut pts = Vec::new();
    for i in 0..8 {
        let r = 1.0 - delta + 0.5 * delta * i as f64 / 7.0;
        for j in 0..=64 {
            let theta = std::f64::consts::PI - 0.1 + 0.2 * j as f64 / 64.0;
            pts.push(Complex64::from_polar(r, theta));
        }
    }
    pts
}

pub fn counterexample_report(order: usize) -> Result<CounterexampleReport> {
    use crate::boundary::{make_boundary_map, BoundaryKind};
    let kind = BoundaryKind::degenerate_example();
    let w = crate::harmonic::poisson_extend(&make_boundary_map(&kind, order)?);
    let phase = |x: f64| kind.phase(x).map(|(_, d)| d.abs()).unwrap_or(f64::NAN);

    let min_stretch: Vec<(f64, f64)> = COUNTEREXAMPLE_DELTAS
        .iter()
        .map(|&d| Ok((d, w.gradient_sample(Complex64::from_polar(1.0 - d, std::f64::consts::PI))?.l)))
        .collect::<Result<_>>()?;
    let band_dilatation: Vec<(f64, f64)> = COUNTEREXAMPLE_DELTAS
        .iter()
        .map(|&d| Ok((d, crate::qc::dilatation_on(&w, &band_points(d))?)))
        .collect::<Result<_>>()?;
    let minus_one = Complex64::new(-1.0, 0.0);
    let at_minus_one: GradientSample = w.gradient_sample(minus_one)?;
    let global = crate::qc::measure_dilatation(&w, &PolarGrid::default())?;
    Ok(CounterexampleReport {
        phase_derivative_at_pi: phase(std::f64::consts::PI),
        phase_derivative_at_zero: phase(0.0),
        min_stretch_decreasing: min_stretch.windows(2).all(|p| p[1].1 < p[0].1),
        min_stretch,
        band_dilatation_increasing: band_dilatation.windows(2).all(|p| p[1].1 > p[0].1),
        band_dilatation,
        jacobian_near_minus_one: at_minus_one.jacobian,
        radial_derivative_at_minus_one: w.radial_derivative_boundary(minus_one)?.value.norm(),
        grid_k_measured: global.big_k,
    })
}
