//! Boundary data on the unit circle.
//!
//! A [`CircleFunction`] holds `M = 2N` equispaced samples at `x_j = 2πj/M`
//! together with the Fourier coefficients `a_n`, `-N <= n <= N`, normalized
//! so that `a_0` is the sample mean. The Nyquist bin is split evenly between
//! `a_N` and `a_{-N}`.

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::{Read, Write};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 512;

/// Width of the coefficient band reported by [`CircleFunction::tail_magnitude`].
pub const TAIL_BAND: usize = 8;

/// Relative tail size above which the data counts as under-resolved.
pub const DECAY_THRESHOLD: f64 = 1e-10;

/// Node `x_j = 2πj/M`.
pub fn node(j: usize, m: usize) -> f64 {
    TAU * j as f64 / m as f64
}

#[derive(Debug, Clone)]
pub struct CircleFunction {
    samples: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    warnings: Vec<String>,
}

impl CircleFunction {
    /// Number of samples `M`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Truncation order `N = M/2`.
    pub fn order(&self) -> usize {
        self.samples.len() / 2
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Coefficient `a_n`; zero outside `[-N, N]`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let order = self.order() as i64;
        if n.abs() > order {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + order) as usize]
    }

    /// All coefficients, index `n + N` holds `a_n`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `max_{|n| > N - 8} |a_n|`.
    pub fn tail_magnitude(&self) -> f64 {
        let order = self.order() as i64;
        let cut = order - TAIL_BAND as i64;
        (-order..=order)
            .filter(|n| n.abs() > cut)
            .map(|n| self.coeff(n).norm())
            .fold(0.0, f64::max)
    }

    /// True when the tail is below [`DECAY_THRESHOLD`] relative to the
    /// largest coefficient.
    pub fn decay_ok(&self) -> bool {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.tail_magnitude() <= DECAY_THRESHOLD * peak.max(f64::MIN_POSITIVE)
    }

    /// Inverse transform of the stored coefficients back onto the nodes.
    pub fn synthesize(&self) -> Vec<Complex64> {
        let m = self.len();
        let order = self.order();
        let mut bins = vec![Complex64::new(0.0, 0.0); m];
        for (n, bin) in bins.iter_mut().enumerate().take(order) {
            *bin = self.coeffs[n + order];
        }
        for n in 1..order {
            bins[m - n] = self.coeffs[order - n];
        }
        bins[order] = self.coeffs[0] + self.coeffs[2 * order];
        FftPlanner::new().plan_fft_inverse(m).process(&mut bins);
        bins
    }

    /// Trigonometric interpolant `Σ a_n e^{inx}` at an arbitrary angle.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let order = self.order() as i64;
        (-order..=order)
            .map(|n| self.coeff(n) * Complex64::from_polar(1.0, n as f64 * x))
            .sum()
    }

    /// Writes `x,re,im` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["x", "re", "im"])?;
        let m = self.len();
        for (j, s) in self.samples.iter().enumerate() {
            writer.write_record([
                format!("{:.16e}", node(j, m)),
                format!("{:.16e}", s.re),
                format!("{:.16e}", s.im),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Reads `x,re,im` rows (header optional). The `x` column must match the
    /// node grid `2πj/M` to within `1e-12`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::Format(format!(
                    "expected 3 fields (x, re, im), found {}",
                    record.len()
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => rows.push((v[0], Complex64::new(v[1], v[2]))),
                Err(_) if rows.is_empty() => continue, // header line
                Err(e) => return Err(Error::Format(e.to_string())),
            }
        }
        let m = rows.len();
        for (j, (x, _)) in rows.iter().enumerate() {
            if (x - node(j, m)).abs() > 1e-12 {
                return Err(Error::Format(format!(
                    "row {j}: x = {x} is not the grid node 2π·{j}/{m}"
                )));
            }
        }
        fourier_analyze(rows.into_iter().map(|(_, v)| v).collect())
    }
}

/// Discrete Fourier analysis of `M` equispaced samples.
pub fn fourier_analyze(samples: Vec<Complex64>) -> Result<CircleFunction> {
    let m = samples.len();
    if m < 8 || !m.is_power_of_two() {
        return Err(Error::Size(m));
    }
    let order = m / 2;
    let mut bins = samples.clone();
    FftPlanner::new().plan_fft_forward(m).process(&mut bins);
    let scale = 1.0 / m as f64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
    for n in 0..order {
        coeffs[order + n] = bins[n] * scale;
    }
    for n in 1..order {
        coeffs[order - n] = bins[m - n] * scale;
    }
    let nyquist = bins[order] * (0.5 * scale);
    coeffs[0] = nyquist;
    coeffs[2 * order] = nyquist;
    Ok(CircleFunction {
        samples,
        coeffs,
        warnings: Vec::new(),
    })
}

/// Generator for boundary maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `e^{ix}`.
    Identity,
    /// `e^{i(x + λ sin(kx))}`.
    SinePerturbed { lambda: f64, k: u32 },
    /// `ω(inner(e^{ix}))` for a target domain.
    OmegaComposed {
        domain: DomainSpec,
        inner: Box<BoundaryKind>,
    },
}

impl BoundaryKind {
    /// The map used for the non-quasiconformal example, `e^{i(x + sin x)}`.
    pub fn degenerate_example() -> Self {
        BoundaryKind::SinePerturbed { lambda: 1.0, k: 1 }
    }

    fn eval(&self, x: f64) -> Complex64 {
        match self {
            BoundaryKind::Identity => Complex64::from_polar(1.0, x),
            BoundaryKind::SinePerturbed { lambda, k } => {
                Complex64::from_polar(1.0, x + lambda * (*k as f64 * x).sin())
            }
            BoundaryKind::OmegaComposed { domain, inner } => {
                let t = inner.eval(x);
                domain.omega_unchecked(t / t.norm())
            }
        }
    }

    /// Phase `x + λ sin(kx)` and its derivative, for the circle-valued kinds.
    pub fn phase(&self, x: f64) -> Option<(f64, f64)> {
        match self {
            BoundaryKind::Identity => Some((x, 1.0)),
            BoundaryKind::SinePerturbed { lambda, k } => {
                let kf = *k as f64;
                Some((x + lambda * (kf * x).sin(), 1.0 + lambda * kf * (kf * x).cos()))
            }
            BoundaryKind::OmegaComposed { .. } => None,
        }
    }
}

/// Samples a boundary map on `M = 2N` nodes and analyzes it.
pub fn make_boundary_map(kind: &BoundaryKind, order: usize) -> Result<CircleFunction> {
    let mut warnings = Vec::new();
    check_kind(kind, &mut warnings)?;
    let m = 2 * order;
    let samples: Vec<Complex64> = (0..m).map(|j| kind.eval(node(j, m))).collect();

    if kind.phase(0.0).is_some() {
        let phases: Vec<f64> = (0..m).map(|j| kind.phase(node(j, m)).unwrap().0).collect();
        let increasing = phases.windows(2).all(|p| p[1] > p[0]) && phases[m - 1] < phases[0] + TAU;
        if !increasing {
            return Err(Error::Argument(
                "boundary phase is not strictly increasing at the nodes".into(),
            ));
        }
    }

    let mut f = fourier_analyze(samples)?;
    if !f.decay_ok() {
        warnings.push(format!(
            "under-resolved boundary data: tail magnitude {:e}",
            f.tail_magnitude()
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    f.warnings = warnings;
    Ok(f)
}

fn check_kind(kind: &BoundaryKind, warnings: &mut Vec<String>) -> Result<()> {
    match kind {
        BoundaryKind::Identity => Ok(()),
        BoundaryKind::SinePerturbed { lambda, k } => {
            if *k == 0 {
                return Err(Error::Argument("sine_perturbed needs k >= 1".into()));
            }
            let product = lambda.abs() * *k as f64;
            if product > 1.0 {
                Err(Error::NonHomeomorphism {
                    lambda: *lambda,
                    k: *k,
                    product,
                })
            } else {
                if product == 1.0 {
                    warnings.push(format!(
                        "|lambda|k = 1: phase derivative 1 + {lambda}·{k}·cos({k}x) vanishes; \
                         the extension is not quasiconformal"
                    ));
                }
                Ok(())
            }
        }
        BoundaryKind::OmegaComposed { domain, inner } => {
            domain.validate()?;
            check_kind(inner, warnings)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_mode() {
        let s = (0..16).map(|j| Complex64::from_polar(1.0, node(j, 16))).collect();
        let f = fourier_analyze(s).unwrap();
        for n in -8..=8 {
            let expected = if n == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert!((f.coeff(n) - expected).norm() < 1e-12, "a_{n} = {}", f.coeff(n));
        }
    }

    #[test]
    fn constant_is_dc() {
        let f = fourier_analyze(vec![c(1.0, 0.0); 32]).unwrap();
        assert!((f.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(f.coeffs().iter().enumerate().all(|(i, a)| i == 16 || a.norm() < 1e-15));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(fourier_analyze(vec![c(0.0, 0.0); 12]), Err(Error::Size(12))));
        assert!(matches!(fourier_analyze(vec![c(0.0, 0.0); 4]), Err(Error::Size(4))));
    }

    #[test]
    fn bessel_coefficients_match_quadrature() {
        let f = make_boundary_map(&BoundaryKind::degenerate_example(), 512).unwrap();
        // trapezoidal quadrature oracle on a finer grid
        let fine = 8192;
        for n in -12i64..=12 {
            let q: Complex64 = (0..fine)
                .map(|j| {
                    let x = node(j, fine);
                    Complex64::from_polar(1.0, x + x.sin() - n as f64 * x)
                })
                .sum::<Complex64>()
                / fine as f64;
            assert!((f.coeff(n) - q).norm() < 1e-13, "n={n}");
        }
        // a_1 = J_0(1)
        assert!((f.coeff(1).re - 0.765_197_686_557_966_6).abs() < 1e-14);
    }

    #[test]
    fn generators() {
        let id = make_boundary_map(&BoundaryKind::Identity, 64).unwrap();
        for (j, s) in id.samples().iter().enumerate() {
            assert!((s - Complex64::from_polar(1.0, node(j, 128))).norm() < 1e-15);
        }
        let ex = make_boundary_map(&BoundaryKind::degenerate_example(), 64).unwrap();
        assert_eq!(ex.warnings().len(), 1);
        for s in ex.samples() {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
        let mild = BoundaryKind::SinePerturbed { lambda: 0.3, k: 1 };
        let f = make_boundary_map(&mild, 64).unwrap();
        assert!(f.warnings().is_empty());
        for j in 0..128 {
            assert!(mild.phase(node(j, 128)).unwrap().1 >= 0.7 - 1e-15);
        }
    }

    #[test]
    fn rejects_non_homeomorphism() {
        let kind = BoundaryKind::SinePerturbed { lambda: 0.6, k: 2 };
        assert!(matches!(
            make_boundary_map(&kind, 64),
            Err(Error::NonHomeomorphism { .. })
        ));
    }

    #[test]
    fn csv_round_trip_and_grid_check() {
        let f = make_boundary_map(&BoundaryKind::SinePerturbed { lambda: 0.3, k: 2 }, 32).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = CircleFunction::read_csv(buf.as_slice()).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert_eq!(a, b);
        }
        let bad = "0.0,1,0\n0.5,1,0\n1.0,1,0\n1.5,1,0\n2.0,1,0\n2.5,1,0\n3.0,1,0\n3.5,1,0\n";
        assert!(matches!(CircleFunction::read_csv(bad.as_bytes()), Err(Error::Format(_))));
    }
}
