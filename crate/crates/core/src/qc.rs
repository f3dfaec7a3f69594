//! Quasiconformality measurements on polar grids.
//!
//! Every quantity here is a supremum or infimum over a finite grid, so the
//! measured `K` under-estimates the essential supremum of the dilatation.
//! Grid loops run in parallel and are reduced in grid order, which keeps the
//! reported extrema bit-for-bit reproducible.

use crate::error::{Error, Result};
use crate::harmonic::{GradientSample, HarmonicMap};
use crate::boundary::{fourier_analyze, node};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance on `|w(0)|` for maps treated as normalized at the origin.
pub const ORIGIN_TOLERANCE: f64 = 1e-8;

/// Heinz lower bound `1/π²` for harmonic self-diffeomorphisms fixing 0.
pub const HEINZ_BOUND: f64 = 1.0 / (PI * PI);

/// Polar grid: `n_r` Chebyshev–Lobatto radii on `[0, r_max]` times `n_theta`
/// equispaced angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_max: f64,
}

impl Default for PolarGrid {
    fn default() -> Self {
        PolarGrid {
            n_r: 64,
            n_theta: 256,
            r_max: 0.999,
        }
    }
}

impl PolarGrid {
    pub fn new(n_r: usize, n_theta: usize, r_max: f64) -> Self {
        PolarGrid { n_r, n_theta, r_max }
    }

    /// Nested refinement: every node of `self` is a node of the result.
    pub fn refine(&self) -> Self {
        PolarGrid {
            n_r: 2 * self.n_r - 1,
            n_theta: 2 * self.n_theta,
            r_max: self.r_max,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        if self.n_r == 1 {
            return vec![self.r_max];
        }
        let last = (self.n_r - 1) as f64;
        (0..self.n_r)
            .map(|i| 0.5 * self.r_max * (1.0 - (PI * i as f64 / last).cos()))
            .collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        let radii = self.radii();
        let mut pts = Vec::with_capacity(self.n_r * self.n_theta);
        for &r in &radii {
            for j in 0..self.n_theta {
                pts.push(Complex64::from_polar(r, node(j, self.n_theta)));
            }
        }
        pts
    }

    fn validate(&self) -> Result<()> {
        if self.n_r == 0 || self.n_theta == 0 {
            return Err(Error::Argument("empty measurement grid".into()));
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::Argument(format!("r_max must lie in (0, 1), got {}", self.r_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QcReport {
    #[serde(rename = "K_measured")]
    pub big_k: f64,
    #[serde(rename = "k_measured")]
    pub small_k: f64,
    pub grid: PolarGrid,
    pub min_l: f64,
    pub max_grad: f64,
    pub heinz_min: f64,
    /// `None` when the map is not normalized at the origin or not q.c.
    pub mori_max_violation: Option<f64>,
    pub defqc1_max_violation: f64,
    pub quasiconformal: bool,
    pub note: &'static str,
}

fn samples_on(w: &HarmonicMap, points: &[Complex64]) -> Vec<GradientSample> {
    points
        .par_iter()
        .map(|&z| {
            let (wz, wzb) = w.wirtinger_unchecked(z);
            GradientSample::from_wirtinger(wz, wzb)
        })
        .collect()
}

fn dilatation_from_k(k: f64) -> f64 {
    if k >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + k) / (1.0 - k)
    }
}

/// Sup of the pointwise dilatation over an arbitrary point set.
pub fn dilatation_on(w: &HarmonicMap, points: &[Complex64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Argument("empty point set".into()));
    }
    for &z in points {
        if z.norm() > 1.0 {
            return Err(Error::Domain { z });
        }
    }
    let k = samples_on(w, points).iter().map(|s| s.k_point).fold(0.0, f64::max);
    Ok(dilatation_from_k(k))
}

pub fn measure_dilatation(w: &HarmonicMap, grid: &PolarGrid) -> Result<QcReport> {
    grid.validate()?;
    let points = grid.points();
    let samples = samples_on(w, &points);
    let mut small_k = 0.0f64;
    let mut min_l = f64::INFINITY;
    let mut max_grad = 0.0f64;
    let mut heinz_min = f64::INFINITY;
    for s in &samples {
        small_k = small_k.max(s.k_point);
        min_l = min_l.min(s.l);
        max_grad = max_grad.max(s.grad_norm);
        heinz_min = heinz_min.min(s.wz.norm_sqr() + s.wzb.norm_sqr());
    }
    let big_k = dilatation_from_k(small_k);
    let quasiconformal = big_k.is_finite();
    let defqc1_max_violation = sandwich_violation(&samples, big_k);
    let mori_max_violation = if quasiconformal && w.eval_unchecked(Complex64::new(0.0, 0.0)).norm() <= ORIGIN_TOLERANCE {
        Some(mori_violation(w, big_k, &points))
    } else {
        None
    };
    Ok(QcReport {
        big_k,
        small_k,
        grid: *grid,
        min_l,
        max_grad,
        heinz_min,
        mori_max_violation,
        defqc1_max_violation,
        quasiconformal,
        note: "K_measured is a grid supremum and under-estimates the essential supremum",
    })
}

fn sandwich_violation(samples: &[GradientSample], k: f64) -> f64 {
    samples
        .iter()
        .map(|s| {
            let lower = s.grad_norm * s.grad_norm / k - s.jacobian;
            let upper = if k.is_finite() { s.jacobian - k * s.l * s.l } else { 0.0 };
            lower.max(upper).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Largest violation of `|∇w|²/K <= J_w <= K l(∇w)²` on the grid.
pub fn check_distortion_sandwich(w: &HarmonicMap, k: f64, grid: &PolarGrid) -> Result<f64> {
    grid.validate()?;
    if !(k >= 1.0) {
        return Err(Error::Argument(format!("K must be >= 1, got {k}")));
    }
    Ok(sandwich_violation(&samples_on(w, &grid.points()), k))
}

/// Mori bounds `(|z|/4^{1-1/K})^K` and `4^{1-1/K}|z|^{1/K}`.
pub fn mori_bounds(k: f64, r: f64) -> (f64, f64) {
    let factor = 4f64.powf(1.0 - 1.0 / k);
    ((r / factor).powf(k), factor * r.powf(1.0 / k))
}

fn mori_violation(w: &HarmonicMap, k: f64, points: &[Complex64]) -> f64 {
    let violations: Vec<f64> = points
        .par_iter()
        .map(|&z| {
            let (lower, upper) = mori_bounds(k, z.norm());
            let modulus = w.eval_unchecked(z).norm();
            (lower - modulus).max(modulus - upper).max(0.0)
        })
        .collect();
    violations.into_iter().fold(0.0, f64::max)
}

fn require_normalized(w: &HarmonicMap) -> Result<()> {
    let at_origin = w.eval_unchecked(Complex64::new(0.0, 0.0));
    if at_origin.norm() > ORIGIN_TOLERANCE {
        Err(Error::Normalization(format!(
            "|w(0)| = {:e} exceeds {ORIGIN_TOLERANCE:e}; normalize the map at the origin first",
            at_origin.norm()
        )))
    } else {
        Ok(())
    }
}

/// Largest violation of the two-sided Mori inequality.
pub fn check_mori(w: &HarmonicMap, k: f64, grid: &PolarGrid) -> Result<f64> {
    grid.validate()?;
    require_normalized(w)?;
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::Argument(format!("K must be finite and >= 1, got {k}")));
    }
    Ok(mori_violation(w, k, &grid.points()))
}

/// Minimum of `|w_z|² + |w_z̄|²` on the grid.
pub fn check_heinz(w: &HarmonicMap, grid: &PolarGrid) -> Result<f64> {
    grid.validate()?;
    require_normalized(w)?;
    Ok(samples_on(w, &grid.points())
        .iter()
        .map(|s| s.wz.norm_sqr() + s.wzb.norm_sqr())
        .fold(f64::INFINITY, f64::min))
}

/// Solves `w(a) = 0` by Newton's method on the real 2x2 system.
fn find_zero(w: &HarmonicMap) -> Result<Complex64> {
    let mut a = Complex64::new(0.0, 0.0);
    let mut value = w.eval_unchecked(a);
    for _ in 0..50 {
        if value.norm() <= 1e-14 {
            return Ok(a);
        }
        let (wz, wzb) = w.wirtinger_unchecked(a);
        let det = wz.norm_sqr() - wzb.norm_sqr();
        if det == 0.0 {
            return Err(Error::Normalization(format!("singular Jacobian at {a}")));
        }
        // wz·δ + wzb·conj(δ) = -value
        let step = (-(wz.conj() * value) + wzb * value.conj()) / det;
        let mut damping = 1.0;
        loop {
            let candidate = a + step * damping;
            if candidate.norm() < 1.0 {
                let v = w.eval_unchecked(candidate);
                if v.norm() < value.norm() || damping < 1e-6 {
                    a = candidate;
                    value = v;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-12 {
                return Err(Error::Normalization("Newton step left the disk".into()));
            }
        }
    }
    if value.norm() <= 1e-12 {
        Ok(a)
    } else {
        Err(Error::Normalization(format!(
            "no zero found within 50 Newton iterations (|w(a)| = {:e})",
            value.norm()
        )))
    }
}

/// Precomposes `w` with the disk automorphism `m(z) = (z + a)/(1 + ā z)`
/// where `w(a) = 0`, by resampling `w∘m` on the circle and re-extending.
pub fn normalize_at_origin(w: &HarmonicMap) -> Result<HarmonicMap> {
    let a = find_zero(w)?;
    if a.norm() == 0.0 {
        return Ok(w.clone());
    }
    let m = 2 * w.order().max(4).next_power_of_two();
    let one = Complex64::new(1.0, 0.0);
    let samples = (0..m)
        .map(|j| {
            let t = Complex64::from_polar(1.0, node(j, m));
            let s = (t + a) / (one + a.conj() * t);
            w.eval_unchecked(s / s.norm())
        })
        .collect();
    let resampled = fourier_analyze(samples)?;
    Ok(crate::harmonic::poisson_extend(&resampled))
}

/// Extreme difference quotients over point pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiLipschitzEstimate {
    pub c_lo: f64,
    pub c_hi: f64,
    pub pairs_used: usize,
    pub skipped: usize,
}

/// Minimum number of pairs accepted by [`empirical_bilipschitz`].
pub const MIN_PAIRS: usize = 1000;

pub fn empirical_bilipschitz(w: &HarmonicMap, pairs: &[(Complex64, Complex64)]) -> Result<BiLipschitzEstimate> {
    if pairs.len() < MIN_PAIRS {
        return Err(Error::Argument(format!(
            "need at least {MIN_PAIRS} pairs, got {}",
            pairs.len()
        )));
    }
    let mut c_lo = f64::INFINITY;
    let mut c_hi = 0.0f64;
    let mut skipped = 0;
    for &(z1, z2) in pairs {
        let dz = (z1 - z2).norm();
        if dz == 0.0 {
            skipped += 1;
            continue;
        }
        let ratio = (w.eval(z1)? - w.eval(z2)?).norm() / dz;
        c_lo = c_lo.min(ratio);
        c_hi = c_hi.max(ratio);
    }
    Ok(BiLipschitzEstimate {
        c_lo,
        c_hi,
        pairs_used: pairs.len() - skipped,
        skipped,
    })
}

/// Seeded pairs drawn uniformly from the closed disk intersected with the
/// disk of radius `radius` around `center`.
pub fn random_pairs(seed: u64, count: usize, center: Complex64, radius: f64) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let p = center + Complex64::new(rng.gen_range(-radius..=radius), rng.gen_range(-radius..=radius));
        if (p - center).norm() <= radius && p.norm() <= 1.0 {
            return p;
        }
    };
    (0..count).map(|_| (draw(), draw())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{make_boundary_map, BoundaryKind};
    use crate::harmonic::poisson_extend;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn affine() -> HarmonicMap {
        HarmonicMap::from_coefficients(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.25, 0.0)])
    }

    fn sine(lambda: f64) -> HarmonicMap {
        poisson_extend(&make_boundary_map(&BoundaryKind::SinePerturbed { lambda, k: 1 }, 512).unwrap())
    }

    fn mobius_map(a: Complex64) -> HarmonicMap {
        let m = 256;
        let one = c(1.0, 0.0);
        let samples = (0..m)
            .map(|j| {
                let t = Complex64::from_polar(1.0, node(j, m));
                (t + a) / (one + a.conj() * t)
            })
            .collect();
        poisson_extend(&fourier_analyze(samples).unwrap())
    }

    #[test]
    fn grid_shape() {
        let g = PolarGrid::default();
        let r = g.radii();
        assert_eq!(r.len(), 64);
        assert_eq!(r[0], 0.0);
        assert!((r[63] - 0.999).abs() < 1e-15);
        assert_eq!(g.points().len(), 64 * 256);
        let fine = g.refine().radii();
        for (i, x) in r.iter().enumerate() {
            assert!((fine[2 * i] - x).abs() < 1e-15);
        }
        assert!(measure_dilatation(&HarmonicMap::identity(), &PolarGrid::new(0, 4, 0.5)).is_err());
    }

    #[test]
    fn conformal_and_affine() {
        let q = measure_dilatation(&HarmonicMap::identity(), &PolarGrid::default()).unwrap();
        assert_eq!((q.big_k, q.small_k), (1.0, 0.0));
        assert_eq!(q.mori_max_violation, Some(0.0));
        assert_eq!(q.heinz_min, 1.0);

        let q = measure_dilatation(&affine(), &PolarGrid::default()).unwrap();
        assert_eq!(q.small_k, 0.25);
        assert!((q.big_k - 5.0 / 3.0).abs() < 1e-15);
        assert!(((1.0 + q.small_k) / (1.0 - q.small_k) - q.big_k).abs() < 1e-10);
        let v = check_distortion_sandwich(&affine(), 5.0 / 3.0, &PolarGrid::default()).unwrap();
        assert!(v < 1e-15);
        let v = check_distortion_sandwich(&HarmonicMap::identity(), 1.0, &PolarGrid::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn refinement_is_stable_and_monotone() {
        let w = sine(0.3);
        let coarse = measure_dilatation(&w, &PolarGrid::new(64, 256, 0.999)).unwrap().big_k;
        let fine = measure_dilatation(&w, &PolarGrid::new(128, 512, 0.999)).unwrap().big_k;
        assert!(coarse.is_finite());
        assert!((fine - coarse).abs() <= 0.01 * coarse);
        let nested = measure_dilatation(&w, &PolarGrid::new(64, 256, 0.999).refine()).unwrap().big_k;
        assert!(nested >= coarse);
    }

    #[test]
    fn sandwich_on_sine_map() {
        let w = sine(0.3);
        let g = PolarGrid::default();
        let k = measure_dilatation(&w, &g).unwrap().big_k;
        assert!(check_distortion_sandwich(&w, k, &g).unwrap() <= 1e-9);
    }

    #[test]
    fn normalization() {
        let id = HarmonicMap::identity();
        let n = normalize_at_origin(&id).unwrap();
        assert_eq!(n.eval(c(0.3, 0.1)).unwrap(), c(0.3, 0.1));

        let mob = mobius_map(c(0.5, 0.0));
        let n = normalize_at_origin(&mob).unwrap();
        assert!(n.eval(c(0.0, 0.0)).unwrap().norm() <= 1e-8);
        assert!((n.eval(c(0.4, -0.2)).unwrap() - c(0.4, -0.2)).norm() < 1e-10);
        let g = PolarGrid::default();
        assert!(check_mori(&n, 1.0, &g).unwrap() < 1e-9);

        let ex = normalize_at_origin(&sine(1.0)).unwrap();
        assert!(ex.eval(c(0.0, 0.0)).unwrap().norm() <= 1e-8);
        assert!(matches!(check_mori(&sine(0.6), 2.0, &g), Err(Error::Normalization(_))));
    }

    #[test]
    fn mori_and_heinz_on_normalized_map() {
        let w = normalize_at_origin(&sine(0.6)).unwrap();
        let g = PolarGrid::default();
        let q = measure_dilatation(&w, &g).unwrap();
        assert!(check_mori(&w, q.big_k, &g).unwrap() <= 1e-9);
        let heinz = check_heinz(&w, &g).unwrap();
        assert!(heinz >= HEINZ_BOUND - 1e-9);
        let fine = check_heinz(&w, &PolarGrid::new(128, 512, 0.999)).unwrap();
        assert!((fine - heinz).abs() <= 0.01 * heinz);
        assert_eq!(check_heinz(&HarmonicMap::identity(), &g).unwrap(), 1.0);
    }

    #[test]
    fn bilipschitz() {
        let pairs = random_pairs(7, 1000, c(0.0, 0.0), 1.0);
        let e = empirical_bilipschitz(&HarmonicMap::identity(), &pairs).unwrap();
        assert_eq!((e.c_lo, e.c_hi), (1.0, 1.0));
        let double = HarmonicMap::from_coefficients(vec![c(0.0, 0.0), c(2.0, 0.0)], vec![]);
        let e = empirical_bilipschitz(&double, &pairs).unwrap();
        assert_eq!((e.c_lo, e.c_hi), (2.0, 2.0));

        let mut with_dup = pairs.clone();
        with_dup[0] = (c(0.1, 0.1), c(0.1, 0.1));
        assert_eq!(empirical_bilipschitz(&double, &with_dup).unwrap().skipped, 1);
        assert!(empirical_bilipschitz(&double, &pairs[..10]).is_err());
        assert_eq!(random_pairs(7, 1000, c(0.0, 0.0), 1.0), pairs);
    }

    #[test]
    fn degenerate_example_clusters() {
        let w = sine(1.0);
        let lows: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&r| empirical_bilipschitz(&w, &random_pairs(11, 2000, c(-1.0, 0.0), r)).unwrap().c_lo)
            .collect();
        assert!(lows[0] > lows[1] && lows[1] > lows[2], "{lows:?}");
    }
}
