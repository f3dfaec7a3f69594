//! Catalog of smooth Jordan domains `Ω = ω(U)` with closed-form `ω`, `ω'`,
//! `ω''`. The inverse `g = ω^{-1}` is obtained by Newton iteration, and its
//! derivatives follow from `g' = 1/ω'(z)`, `g'' = -ω''(z)/ω'(z)^3`.

use crate::boundary::node;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Points with `|z| <= 1 + DISK_SLACK` count as lying in the closed disk.
pub const DISK_SLACK: f64 = 1e-12;

/// Slack on `|g(w)| <= 1` before `w` is declared outside the closed domain.
const MEMBERSHIP_SLACK: f64 = 1e-9;

/// Boundary nodes used by the winding-number membership test.
const WINDING_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `ω(z) = z`.
    Disk,
    /// `ω(z) = e^{iφ}(z - a)/(1 - ā z)`.
    Mobius { a: Complex64, phi: f64 },
    /// `ω(z) = z + c z^n`, univalent when `n|c| < 1`.
    Polynomial { c: Complex64, n: u32 },
}

/// `g(w)` together with `g'(w)` and `g''(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse {
    pub z: Complex64,
    pub g1: Complex64,
    pub g2: Complex64,
}

/// Boundary extremes of the derivative data of `ω` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBounds {
    /// `sup_Ω |g''|/|g'|^2 = max_{|z|=1} |ω''/ω'|`.
    pub sup_g2_over_g1sq: f64,
    /// `|g'|_∞ = 1 / min_{|z|=1} |ω'|`.
    pub g1_sup: f64,
    pub omega1_inf: f64,
    pub omega1_sup: f64,
}

impl DomainSpec {
    /// The polynomial domain used to showcase a non-convex target.
    pub fn non_convex_showcase() -> Self {
        DomainSpec::Polynomial {
            c: Complex64::new(0.3, 0.0),
            n: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainSpec::Disk => Ok(()),
            DomainSpec::Mobius { a, phi } => {
                if a.norm() >= 1.0 || !phi.is_finite() {
                    Err(Error::Argument(format!("mobius needs |a| < 1, got |a| = {}", a.norm())))
                } else {
                    Ok(())
                }
            }
            DomainSpec::Polynomial { c, n } => {
                if n < 2 {
                    Err(Error::Argument(format!("polynomial needs n >= 2, got {n}")))
                } else if n as f64 * c.norm() >= 1.0 {
                    Err(Error::Argument(format!(
                        "polynomial needs n|c| < 1 for univalence, got {}",
                        n as f64 * c.norm()
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Base point `a = ω(0)` (the point sent to 0 by `g`).
    pub fn base_point(&self) -> Complex64 {
        self.omega_unchecked(Complex64::new(0.0, 0.0))
    }

    fn check_disk(z: Complex64) -> Result<()> {
        if z.norm() > 1.0 + DISK_SLACK {
            Err(Error::Domain { z })
        } else {
            Ok(())
        }
    }

    pub fn omega(&self, z: Complex64) -> Result<Complex64> {
        Self::check_disk(z)?;
        Ok(self.omega_unchecked(z))
    }

    pub fn omega_prime(&self, z: Complex64) -> Result<Complex64> {
        Self::check_disk(z)?;
        Ok(self.omega_prime_unchecked(z))
    }

    pub fn omega_second(&self, z: Complex64) -> Result<Complex64> {
        Self::check_disk(z)?;
        Ok(self.omega_second_unchecked(z))
    }

    pub(crate) fn omega_unchecked(&self, z: Complex64) -> Complex64 {
        match *self {
            DomainSpec::Disk => z,
            DomainSpec::Mobius { a, phi } => {
                Complex64::from_polar(1.0, phi) * (z - a) / (ONE - a.conj() * z)
            }
            DomainSpec::Polynomial { c, n } => z + c * z.powu(n),
        }
    }

    pub(crate) fn omega_prime_unchecked(&self, z: Complex64) -> Complex64 {
        match *self {
            DomainSpec::Disk => ONE,
            DomainSpec::Mobius { a, phi } => {
                let q = ONE - a.conj() * z;
                Complex64::from_polar(1.0 - a.norm_sqr(), phi) / (q * q)
            }
            DomainSpec::Polynomial { c, n } => ONE + c * n as f64 * z.powu(n - 1),
        }
    }

    pub(crate) fn omega_second_unchecked(&self, z: Complex64) -> Complex64 {
        match *self {
            DomainSpec::Disk => Complex64::new(0.0, 0.0),
            DomainSpec::Mobius { a, phi } => {
                let q = ONE - a.conj() * z;
                Complex64::from_polar(1.0 - a.norm_sqr(), phi) * a.conj() * 2.0 / (q * q * q)
            }
            DomainSpec::Polynomial { c, n } => c * (n * (n - 1)) as f64 * z.powu(n - 2),
        }
    }

    /// `|ω''/ω'|` at a disk point, i.e. `|g''|/|g'|^2` at `ω(z)`.
    pub fn distortion_ratio(&self, z: Complex64) -> f64 {
        (self.omega_second_unchecked(z) / self.omega_prime_unchecked(z)).norm()
    }

    /// Radius inside which `ω` stays univalent with non-vanishing derivative.
    fn univalence_radius(&self) -> f64 {
        match *self {
            DomainSpec::Disk => f64::INFINITY,
            DomainSpec::Mobius { a, .. } => 1.0 / a.norm().max(f64::MIN_POSITIVE),
            DomainSpec::Polynomial { c, n } => (1.0 / (n as f64 * c.norm())).powf(1.0 / (n - 1) as f64),
        }
    }

    /// Winding number of the boundary curve `ω(S^1)` around `w`.
    pub fn winding_number(&self, w: Complex64) -> i64 {
        let mut total = 0.0;
        let mut prev = self.omega_unchecked(ONE) - w;
        for j in 1..=WINDING_NODES {
            let cur = self.omega_unchecked(Complex64::from_polar(1.0, node(j, WINDING_NODES))) - w;
            total += (cur / prev).arg();
            prev = cur;
        }
        (total / TAU).round() as i64
    }

    /// `g(w) = ω^{-1}(w)` with `g'(w)` and `g''(w)`.
    pub fn invert(&self, w: Complex64) -> Result<Inverse> {
        self.validate()?;
        let z = match *self {
            DomainSpec::Disk => {
                Self::check_membership(w, w)?;
                w
            }
            DomainSpec::Mobius { a, phi } => {
                let u = Complex64::from_polar(1.0, -phi) * w;
                let z = (u + a) / (ONE + a.conj() * u);
                Self::check_membership(w, z)?;
                z
            }
            DomainSpec::Polynomial { .. } => match self.newton(w) {
                Some(z) => {
                    Self::check_membership(w, z)?;
                    z
                }
                None => {
                    return Err(if self.winding_number(w) == 0 {
                        Error::Membership { w }
                    } else {
                        Error::Inversion { w }
                    });
                }
            },
        };
        let d1 = self.omega_prime_unchecked(z);
        let d2 = self.omega_second_unchecked(z);
        Ok(Inverse {
            z,
            g1: d1.inv(),
            g2: -d2 / (d1 * d1 * d1),
        })
    }

    /// `g(w)`; shorthand for `invert(w)?.z`.
    pub fn invert_omega(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.invert(w)?.z)
    }

    fn check_membership(w: Complex64, z: Complex64) -> Result<()> {
        if z.norm() > 1.0 + MEMBERSHIP_SLACK {
            Err(Error::Membership { w })
        } else {
            Ok(())
        }
    }

    /// Damped Newton for `ω(z) = w` starting from `w` pulled into the disk,
    /// with a continuation along `t·w` as fallback.
    fn newton(&self, w: Complex64) -> Option<Complex64> {
        let start = if w.norm() < 1.0 { w } else { w / w.norm() * 0.99 };
        if let Some(z) = self.newton_from(w, start) {
            return Some(z);
        }
        let steps = 32;
        let mut z = Complex64::new(0.0, 0.0);
        for s in 1..=steps {
            let target = w * (s as f64 / steps as f64);
            z = self.newton_from(target, z)?;
        }
        Some(z)
    }

    fn newton_from(&self, w: Complex64, start: Complex64) -> Option<Complex64> {
        let limit = self.univalence_radius().min(1.5) * 0.999;
        let scale = w.norm().max(1.0);
        let mut z = start;
        let mut residual = self.omega_unchecked(z) - w;
        for _ in 0..100 {
            if residual.norm() <= 1e-14 * scale {
                // one polishing step
                let polished = z - residual / self.omega_prime_unchecked(z);
                if (self.omega_unchecked(polished) - w).norm() <= residual.norm() {
                    return Some(polished);
                }
                return Some(z);
            }
            let step = residual / self.omega_prime_unchecked(z);
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let candidate = z - step * damping;
                if candidate.norm() < limit {
                    let r = self.omega_unchecked(candidate) - w;
                    if r.norm() < residual.norm() || r.norm() <= 1e-14 * scale {
                        z = candidate;
                        residual = r;
                        accepted = true;
                        break;
                    }
                }
                damping *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (residual.norm() <= 1e-12).then_some(z)
    }

    /// `| |g(w)| - 1 |`, the distance of `w` from `∂Ω` measured through `g`;
    /// `+∞` when the inversion fails.
    pub fn boundary_deviation(&self, w: Complex64) -> f64 {
        let z = match *self {
            DomainSpec::Disk => Some(w),
            DomainSpec::Mobius { a, phi } => {
                let u = Complex64::from_polar(1.0, -phi) * w;
                Some((u + a) / (ONE + a.conj() * u))
            }
            DomainSpec::Polynomial { .. } => self.newton(w),
        };
        z.map_or(f64::INFINITY, |z| (z.norm() - 1.0).abs())
    }

    /// Boundary extremes of `|ω'|` and `|ω''/ω'|` on `m` nodes.
    pub fn g_derivative_bounds(&self, m: usize) -> Result<DerivativeBounds> {
        self.validate()?;
        if m < 256 {
            return Err(Error::Argument(format!("boundary grid needs m >= 256, got {m}")));
        }
        let mut sup_ratio = 0.0f64;
        let mut inf1 = f64::INFINITY;
        let mut sup1 = 0.0f64;
        for j in 0..m {
            let z = Complex64::from_polar(1.0, node(j, m));
            let d1 = self.omega_prime_unchecked(z).norm();
            inf1 = inf1.min(d1);
            sup1 = sup1.max(d1);
            sup_ratio = sup_ratio.max(self.distortion_ratio(z));
        }
        Ok(DerivativeBounds {
            sup_g2_over_g1sq: sup_ratio,
            g1_sup: 1.0 / inf1,
            omega1_inf: inf1,
            omega1_sup: sup1,
        })
    }

    /// Boundary min/max of `|ω'|`; errors if the minimum is not bounded
    /// away from zero.
    pub fn kellogg_check(&self, m: usize) -> Result<(f64, f64)> {
        let b = self.g_derivative_bounds(m)?;
        if b.omega1_inf <= 1e-12 {
            return Err(Error::DegenerateDomain { lower: b.omega1_inf });
        }
        Ok((b.omega1_inf, b.omega1_sup))
    }

    /// Minimum over the boundary nodes of `Re(1 + z ω''(z)/ω'(z))`, the sign
    /// of the boundary curvature; convex when all values are non-negative.
    pub fn convexity_check(&self, m: usize) -> Result<(bool, f64)> {
        self.validate()?;
        if m < 256 {
            return Err(Error::Argument(format!("boundary grid needs m >= 256, got {m}")));
        }
        let proxy = (0..m)
            .map(|j| {
                let z = Complex64::from_polar(1.0, node(j, m));
                (ONE + z * self.omega_second_unchecked(z) / self.omega_prime_unchecked(z)).re
            })
            .fold(f64::INFINITY, f64::min);
        Ok((proxy >= -1e-12, proxy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_forms() {
        let p = DomainSpec::non_convex_showcase();
        let one = c(1.0, 0.0);
        assert!((p.omega(one).unwrap() - c(1.3, 0.0)).norm() < 1e-15);
        assert!((p.omega_prime(one).unwrap() - c(1.9, 0.0)).norm() < 1e-15);
        assert!((p.omega_second(one).unwrap() - c(1.8, 0.0)).norm() < 1e-15);

        let z = c(0.3, -0.2);
        assert_eq!(DomainSpec::Disk.omega(z).unwrap(), z);
        assert_eq!(DomainSpec::Disk.omega_prime(z).unwrap(), one);
        assert_eq!(DomainSpec::Disk.omega_second(z).unwrap(), c(0.0, 0.0));

        let m = DomainSpec::Mobius { a: c(0.5, 0.0), phi: 0.0 };
        let zero = c(0.0, 0.0);
        assert!((m.omega(zero).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((m.omega_prime(zero).unwrap() - c(0.75, 0.0)).norm() < 1e-15);
        assert!(matches!(p.omega(c(1.0, 0.1)), Err(Error::Domain { .. })));
    }

    #[test]
    fn mobius_derivatives_match_differences() {
        let m = DomainSpec::Mobius { a: c(0.3, -0.4), phi: 0.7 };
        let z = c(0.2, 0.5);
        let h = 1e-6;
        let d1 = (m.omega_unchecked(z + h) - m.omega_unchecked(z - h)) / (2.0 * h);
        assert!((d1 - m.omega_prime_unchecked(z)).norm() < 1e-8);
        let d2 = (m.omega_prime_unchecked(z + h) - m.omega_prime_unchecked(z - h)) / (2.0 * h);
        assert!((d2 - m.omega_second_unchecked(z)).norm() < 1e-7);
    }

    #[test]
    fn inversion() {
        let w = c(0.3, 0.4);
        assert_eq!(DomainSpec::Disk.invert_omega(w).unwrap(), w);
        let p = DomainSpec::non_convex_showcase();
        let z = p.invert_omega(p.omega_unchecked(c(0.5, 0.0))).unwrap();
        assert!((z - c(0.5, 0.0)).norm() < 1e-12);
        let z = p.invert_omega(c(1.29, 0.0)).unwrap();
        assert!((p.omega_unchecked(z) - c(1.29, 0.0)).norm() <= 1e-12);
        assert!(z.norm() < 1.0);
        assert!(matches!(p.invert_omega(c(1.4, 0.0)), Err(Error::Membership { .. })));
        assert!(matches!(DomainSpec::Disk.invert_omega(c(1.1, 0.0)), Err(Error::Membership { .. })));
    }

    #[test]
    fn winding() {
        let p = DomainSpec::non_convex_showcase();
        assert_eq!(p.winding_number(c(0.0, 0.0)), 1);
        assert_eq!(p.winding_number(c(1.29, 0.0)), 1);
        assert_eq!(p.winding_number(c(0.0, 0.9)), 0);
    }

    #[test]
    fn derivative_bounds() {
        let b = DomainSpec::Disk.g_derivative_bounds(256).unwrap();
        assert_eq!((b.sup_g2_over_g1sq, b.g1_sup, b.omega1_inf, b.omega1_sup), (0.0, 1.0, 1.0, 1.0));

        let b = DomainSpec::non_convex_showcase().g_derivative_bounds(4096).unwrap();
        assert!((b.sup_g2_over_g1sq - 18.0).abs() < 1e-10, "{}", b.sup_g2_over_g1sq);
        assert!((b.g1_sup * b.omega1_inf - 1.0).abs() < 1e-10);

        let (lo, hi) = DomainSpec::Mobius { a: c(0.5, 0.0), phi: 0.0 }.kellogg_check(256).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
        assert!(DomainSpec::Disk.g_derivative_bounds(128).is_err());
    }

    #[test]
    fn convexity() {
        assert_eq!(DomainSpec::Disk.convexity_check(256).unwrap(), (true, 1.0));
        let (convex, proxy) = DomainSpec::non_convex_showcase().convexity_check(256).unwrap();
        assert!(!convex);
        assert!((proxy + 17.0).abs() < 1e-10);
        let mild = DomainSpec::Polynomial { c: c(0.05, 0.0), n: 3 };
        let (convex, proxy) = mild.convexity_check(1024).unwrap();
        assert!(convex && proxy >= 1.0 - 0.3 / 0.85 - 1e-12);
    }

    #[test]
    fn validation() {
        assert!(DomainSpec::Polynomial { c: c(0.5, 0.0), n: 2 }.validate().is_err());
        assert!(DomainSpec::Polynomial { c: c(0.3, 0.0), n: 1 }.validate().is_err());
        assert!(DomainSpec::Mobius { a: c(1.0, 0.0), phi: 0.0 }.validate().is_err());
    }
}
