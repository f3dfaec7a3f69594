//! Finite-difference helpers shared by the harmonicity, barrier and
//! composition checks. All of them work on plain closures so they can be
//! pointed at series evaluations and closed forms alike.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Five-point Laplacian `(f(z+h) + f(z-h) + f(z+ih) + f(z-ih) - 4 f(z)) / h^2`.
pub fn five_point<T, F>(f: F, z: Complex64, h: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(Complex64) -> T,
{
    let ih = Complex64::new(0.0, h);
    let center = f(z);
    (f(z + h) + f(z - h) + f(z + ih) + f(z - ih) - center * 4.0) * (1.0 / (h * h))
}

/// Five-point Laplacian with one Richardson step: `(4 L(h) - L(2h)) / 3`.
pub fn five_point_richardson<T, F>(f: F, z: Complex64, h: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(Complex64) -> T,
{
    let fine = five_point(&f, z, h);
    let coarse = five_point(&f, z, 2.0 * h);
    (fine * 4.0 - coarse) * (1.0 / 3.0)
}

/// Inward one-sided difference `(f(t) - f((1-delta) t)) / delta`, extrapolated
/// once: `2 D(delta/2) - D(delta)`.
pub fn inward_radial_richardson<T, F>(f: F, t: Complex64, delta: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(Complex64) -> T,
{
    let at_t = f(t);
    let one_sided = |d: f64| (at_t - f(t * (1.0 - d))) * (1.0 / d);
    one_sided(0.5 * delta) * 2.0 - one_sided(delta)
}

/// Central radial difference at `t` with one Richardson step (fourth order).
/// Needs `f` defined slightly outside the disk.
pub fn central_radial_richardson<F>(f: F, t: Complex64, delta: f64) -> f64
where
    F: Fn(Complex64) -> f64,
{
    let dir = t / t.norm();
    let central = |d: f64| (f(t + dir * d) - f(t - dir * d)) / (2.0 * d);
    (4.0 * central(0.5 * delta) - central(delta)) / 3.0
}

/// Central differences for `(f_x, f_y)`.
pub fn central_gradient<T, F>(f: F, z: Complex64, h: f64) -> (T, T)
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(Complex64) -> T,
{
    let ih = Complex64::new(0.0, h);
    let scale = 1.0 / (2.0 * h);
    ((f(z + h) - f(z - h)) * scale, (f(z + ih) - f(z - ih)) * scale)
}
