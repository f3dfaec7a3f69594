//! Harmonic extension of circle data as a truncated series
//! `w(z) = Σ_{n>=0} c_n z^n + Σ_{n>=1} d_n z̄^n`, with exact Wirtinger
//! derivatives of the truncated series.

use crate::boundary::{CircleFunction, DECAY_THRESHOLD};
use crate::error::{Error, Result};
use crate::fd;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Points with `|z| <= 1 + DISK_SLACK` are accepted as lying in the closed disk.
pub const DISK_SLACK: f64 = 1e-12;

/// Default step of the Laplacian stencil.
pub const LAPLACIAN_STEP: f64 = 1e-3;

/// Default step of first-derivative finite differences.
pub const DERIVATIVE_STEP: f64 = 1e-5;

/// Step of the one-sided radial cross-check at the boundary.
pub const RADIAL_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct HarmonicMap {
    analytic: Vec<Complex64>,
    anti: Vec<Complex64>,
    tail: f64,
    decay_ok: bool,
}

/// First-order distortion data at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientSample {
    pub wz: Complex64,
    pub wzb: Complex64,
    /// `|∇w| = |w_z| + |w_z̄|`.
    pub grad_norm: f64,
    /// Frobenius norm `sqrt(2(|w_z|^2 + |w_z̄|^2))`.
    pub grad_norm2: f64,
    /// `l(∇w) = ||w_z| - |w_z̄||`.
    pub l: f64,
    pub jacobian: f64,
    /// `|w_z̄|/|w_z|`, `+∞` where `w_z = 0`.
    pub k_point: f64,
}

impl GradientSample {
    pub fn from_wirtinger(wz: Complex64, wzb: Complex64) -> Self {
        let a = wz.norm();
        let b = wzb.norm();
        GradientSample {
            wz,
            wzb,
            grad_norm: a + b,
            grad_norm2: (2.0 * (a * a + b * b)).sqrt(),
            l: (a - b).abs(),
            jacobian: a * a - b * b,
            k_point: if a == 0.0 { f64::INFINITY } else { b / a },
        }
    }

    /// Pointwise dilatation `(1 + k)/(1 - k)`; `+∞` when `k >= 1`.
    pub fn dilatation(&self) -> f64 {
        if self.k_point >= 1.0 {
            f64::INFINITY
        } else {
            (1.0 + self.k_point) / (1.0 - self.k_point)
        }
    }
}

/// `∂w/∂r` on the circle together with its finite-difference cross-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialDerivative {
    pub value: Complex64,
    pub cross_check: Complex64,
    pub warning: Option<String>,
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut iter = coeffs.iter().rev();
    let mut value = *iter.next().unwrap_or(&ZERO);
    let mut deriv = ZERO;
    for &c in iter {
        deriv = deriv * z + value;
        value = value * z + c;
    }
    (value, deriv)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

fn check_disk(z: Complex64) -> Result<()> {
    if z.norm() > 1.0 + DISK_SLACK || !z.re.is_finite() || !z.im.is_finite() {
        Err(Error::Domain { z })
    } else {
        Ok(())
    }
}

/// Harmonic extension `P[b]`: `c_n = a_n`, `d_n = a_{-n}`.
pub fn poisson_extend(b: &CircleFunction) -> HarmonicMap {
    let order = b.order() as i64;
    let analytic = (0..=order).map(|n| b.coeff(n)).collect();
    let anti = (0..=order).map(|n| if n == 0 { ZERO } else { b.coeff(-n) }).collect();
    HarmonicMap {
        analytic,
        anti,
        tail: b.tail_magnitude(),
        decay_ok: b.decay_ok(),
    }
}

impl HarmonicMap {
    /// Builds a map from explicit coefficients; `anti[0]` is ignored.
    pub fn from_coefficients(analytic: Vec<Complex64>, mut anti: Vec<Complex64>) -> Self {
        if anti.is_empty() {
            anti.push(ZERO);
        }
        anti[0] = ZERO;
        let order = analytic.len().max(anti.len()).saturating_sub(1);
        let mut analytic = analytic;
        analytic.resize(order + 1, ZERO);
        anti.resize(order + 1, ZERO);
        let peak = analytic.iter().chain(&anti).map(|c| c.norm()).fold(0.0, f64::max);
        let cut = order.saturating_sub(crate::boundary::TAIL_BAND);
        let tail = analytic
            .iter()
            .chain(&anti)
            .enumerate()
            .filter(|(i, _)| i % (order + 1) > cut)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        HarmonicMap {
            analytic,
            anti,
            tail,
            decay_ok: order <= crate::boundary::TAIL_BAND || tail <= DECAY_THRESHOLD * peak,
        }
    }

    /// `w(z) = z`.
    pub fn identity() -> Self {
        Self::from_coefficients(vec![ZERO, Complex64::new(1.0, 0.0)], vec![])
    }

    pub fn order(&self) -> usize {
        self.analytic.len() - 1
    }

    pub fn analytic_coeffs(&self) -> &[Complex64] {
        &self.analytic
    }

    pub fn antianalytic_coeffs(&self) -> &[Complex64] {
        &self.anti
    }

    /// Spectral tail magnitude of the source data.
    pub fn tail_magnitude(&self) -> f64 {
        self.tail
    }

    pub fn decay_ok(&self) -> bool {
        self.decay_ok
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        horner(&self.analytic, z) + horner(&self.anti, z.conj())
    }

    /// `(w_z, w_z̄)` of the truncated series.
    pub fn wirtinger(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        check_disk(z)?;
        Ok(self.wirtinger_unchecked(z))
    }

    pub(crate) fn wirtinger_unchecked(&self, z: Complex64) -> (Complex64, Complex64) {
        let (_, wz) = horner_with_derivative(&self.analytic, z);
        let (_, wzb) = horner_with_derivative(&self.anti, z.conj());
        (wz, wzb)
    }

    pub fn gradient_sample(&self, z: Complex64) -> Result<GradientSample> {
        let (wz, wzb) = self.wirtinger(z)?;
        Ok(GradientSample::from_wirtinger(wz, wzb))
    }

    /// `∂w/∂r` at `|t| = 1`, i.e. `t w_z(t) + t̄ w_z̄(t)`.
    pub fn radial_derivative_boundary(&self, t: Complex64) -> Result<RadialDerivative> {
        if (t.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("radial derivative needs |t| = 1, got {}", t.norm())));
        }
        let (wz, wzb) = self.wirtinger_unchecked(t);
        let value = t * wz + t.conj() * wzb;
        let cross_check = fd::inward_radial_richardson(|z| self.eval_unchecked(z), t, RADIAL_STEP);
        let mut warning = None;
        if !self.decay_ok {
            warning = Some(format!("under-resolved series, tail magnitude {:e}", self.tail));
        } else if (value - cross_check).norm() > 1e-5 * value.norm().max(1.0) {
            warning = Some(format!(
                "termwise and one-sided radial derivatives differ by {:e}",
                (value - cross_check).norm()
            ));
        }
        Ok(RadialDerivative {
            value,
            cross_check,
            warning,
        })
    }

    /// Magnitude of the five-point Laplacian at `z`, Richardson-combined
    /// over steps `h` and `2h`.
    pub fn laplacian_residual(&self, z: Complex64, h: f64) -> Result<f64> {
        if h <= 0.0 || z.norm() + 2.0 * h >= 1.0 {
            return Err(Error::Domain { z });
        }
        Ok(fd::five_point_richardson(|p| self.eval_unchecked(p), z, h).norm())
    }

    /// Writes `re z, im z, re w, im w, |∇w|, l, J, k_point` rows.
    pub fn write_grid_csv<W: Write>(&self, points: &[Complex64], out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["re_z", "im_z", "re_w", "im_w", "grad_norm", "l", "jacobian", "k_point"])?;
        for &z in points {
            let w = self.eval(z)?;
            let g = self.gradient_sample(z)?;
            let row = [z.re, z.im, w.re, w.im, g.grad_norm, g.l, g.jacobian, g.k_point];
            writer.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{fourier_analyze, make_boundary_map, node, BoundaryKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn example() -> HarmonicMap {
        poisson_extend(&make_boundary_map(&BoundaryKind::degenerate_example(), 512).unwrap())
    }

    #[test]
    fn identity_and_constant() {
        let w = poisson_extend(&make_boundary_map(&BoundaryKind::Identity, 64).unwrap());
        assert!((w.analytic_coeffs()[1] - c(1.0, 0.0)).norm() < 1e-15);
        let z = c(0.3, 0.4);
        assert!((w.eval(z).unwrap() - z).norm() < 1e-15);

        let one = poisson_extend(&fourier_analyze(vec![c(1.0, 0.0); 16]).unwrap());
        assert!((one.eval(c(-0.2, 0.7)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(w.eval(c(0.9, 0.9)).is_err());
    }

    #[test]
    fn matches_poisson_integral_quadrature() {
        let w = example();
        // Poisson kernel quadrature at 8192 nodes
        let fine = 8192;
        let z = c(0.5, 0.0);
        let (r, phi) = z.to_polar();
        let integral: Complex64 = (0..fine)
            .map(|j| {
                let x = node(j, fine);
                let kernel = (1.0 - r * r) / (1.0 - 2.0 * r * (x - phi).cos() + r * r);
                Complex64::from_polar(1.0, x + x.sin()) * kernel
            })
            .sum::<Complex64>()
            / fine as f64;
        assert!((w.eval(z).unwrap() - integral).norm() < 1e-9);
    }

    #[test]
    fn mean_value() {
        let b = make_boundary_map(&BoundaryKind::degenerate_example(), 512).unwrap();
        let w = poisson_extend(&b);
        let mean = b.samples().iter().sum::<Complex64>() / b.len() as f64;
        assert!((w.eval(c(0.0, 0.0)).unwrap() - mean).norm() < 1e-15);
        assert_eq!(w.eval(c(0.0, 0.0)).unwrap(), b.coeff(0));
    }

    #[test]
    fn wirtinger_closed_forms() {
        let w = HarmonicMap::identity();
        assert_eq!(w.wirtinger(c(0.1, -0.6)).unwrap(), (c(1.0, 0.0), c(0.0, 0.0)));

        let w = HarmonicMap::from_coefficients(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        );
        let (wz, wzb) = w.wirtinger(c(0.5, 0.0)).unwrap();
        assert!((wz - c(1.0, 0.0)).norm() < 1e-15 && (wzb - c(0.5, 0.0)).norm() < 1e-15);

        let g = w.gradient_sample(c(0.5, 0.0)).unwrap();
        assert!((g.grad_norm - 1.5).abs() < 1e-15);
        assert!((g.l - 0.5).abs() < 1e-15);
        assert!((g.jacobian - 0.75).abs() < 1e-15);
        assert!((g.k_point - 0.5).abs() < 1e-15);
        assert!((g.grad_norm2 - (2.5f64).sqrt()).abs() < 1e-15);

        let affine = HarmonicMap::from_coefficients(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.25, 0.0)],
        );
        let g = affine.gradient_sample(c(-0.3, 0.2)).unwrap();
        assert_eq!(g.k_point, 0.25);
        assert!((g.dilatation() - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn wirtinger_matches_finite_differences() {
        let w = example();
        let z = Complex64::from_polar(0.5, std::f64::consts::FRAC_PI_4);
        let (wz, wzb) = w.wirtinger(z).unwrap();
        let (wx, wy) = fd::central_gradient(|p| w.eval_unchecked(p), z, DERIVATIVE_STEP);
        let i = c(0.0, 1.0);
        assert!((wz - (wx - i * wy) * 0.5).norm() < 1e-6);
        assert!((wzb - (wx + i * wy) * 0.5).norm() < 1e-6);
    }

    #[test]
    fn degenerate_point_sentinel() {
        let w = HarmonicMap::from_coefficients(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![]);
        assert_eq!(w.gradient_sample(c(0.0, 0.0)).unwrap().k_point, f64::INFINITY);
    }

    #[test]
    fn radial_derivative() {
        let id = HarmonicMap::identity();
        assert_eq!(id.radial_derivative_boundary(c(1.0, 0.0)).unwrap().value, c(1.0, 0.0));
        let sq = HarmonicMap::from_coefficients(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![]);
        let d = sq.radial_derivative_boundary(c(0.0, 1.0)).unwrap();
        assert!((d.value - c(-2.0, 0.0)).norm() < 1e-15);

        let w = example();
        let d = w.radial_derivative_boundary(c(0.0, 1.0)).unwrap();
        assert!(d.warning.is_none(), "{:?}", d.warning);
        assert!((d.value - d.cross_check).norm() < 1e-5);
        assert!(w.radial_derivative_boundary(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn laplacian() {
        let id = HarmonicMap::identity();
        assert!(id.laplacian_residual(c(0.2, 0.3), 1e-3).unwrap() < 1e-10);
        let w = poisson_extend(
            &make_boundary_map(&BoundaryKind::SinePerturbed { lambda: 0.3, k: 1 }, 512).unwrap(),
        );
        assert!(w.laplacian_residual(c(0.5, 0.0), 1e-3).unwrap() <= 1e-6);
        assert!(w.laplacian_residual(c(0.9995, 0.0), 1e-3).is_err());
    }

    #[test]
    fn grid_csv() {
        let mut buf = Vec::new();
        HarmonicMap::identity().write_grid_csv(&[c(0.5, 0.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("5.0000000000000000e-1,0.0000000000000000e0"));
        assert_eq!(row.split(',').count(), 8);
    }
}
