//! Numerical laboratory for harmonic mappings of the unit disk.
//!
//! Boundary data on the circle is extended harmonically through its Fourier
//! series, giving a map `w = g + conj(h)` whose Wirtinger derivatives are
//! available in closed form. On top of that the crate measures
//! quasiconformal distortion, certifies the annulus Hopf lemma with an
//! explicit barrier, and evaluates the explicit chain of constants that
//! bounds the boundary radial derivative and the co-Lipschitz constant of a
//! `K`-quasiconformal harmonic map onto a smooth Jordan domain.
//!
//! Module map:
//!
//! - [`boundary`]: circle functions, FFT analysis, test boundary maps.
//! - [`harmonic`]: the truncated harmonic series and its derivatives.
//! - [`qc`]: dilatation, distortion inequalities, empirical bi-Lipschitz bounds.
//! - [`domain`]: catalog of target domains given by univalent maps of the disk.
//! - [`hopf`]: barrier function and the quantitative annulus Hopf lemma.
//! - [`constants`]: the co-Lipschitz constant chain and its numerical validation.
//! - [`validation`]: the full acceptance battery used by the CLI.

// comparisons are written to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod constants;
pub mod domain;
pub mod error;
pub mod fd;
pub mod harmonic;
pub mod hopf;
pub mod qc;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex64;
