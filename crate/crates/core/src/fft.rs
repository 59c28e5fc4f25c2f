//! Coefficient extraction by discrete Cauchy integrals.
//!
//! The function is sampled at `grid` equally spaced points on the circle of
//! radius `r` and an inverse FFT recovers its Taylor coefficients. Aliasing
//! error is the tail mass beyond `grid`, so oversampling keeps it negligible
//! for the geometric tails of stable queues.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{diagnostic, invalid, Result};
use crate::pgf::PgfHandle;
use crate::pmf::Pmf;

/// Largest tolerated imaginary residue of an extracted coefficient.
pub const IMAG_TOL: f64 = 1e-8;
/// Most negative tolerated coefficient of a proper PGF.
pub const NEGATIVE_TOL: f64 = 1e-8;

/// Sampling parameters for [`extract_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Number of sample points; rounded up to a power of two.
    pub grid: usize,
    /// Radius of the sampling circle, in `(0, 1]`.
    pub radius: f64,
}

impl ExtractOptions {
    /// Unit radius with four-fold oversampling of `n_max`.
    pub fn for_n_max(n_max: usize) -> Self {
        Self {
            grid: (4 * (n_max + 1)).max(256).next_power_of_two(),
            radius: 1.0,
        }
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }
}

/// Real coefficients plus the numerical residue left by the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub coefficients: Vec<f64>,
    pub max_imaginary: f64,
}

/// In-place radix-2 FFT. `inverse` uses the `+i` kernel and does not scale.
pub fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let angle = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // Twiddles computed directly per index to avoid drift from repeated products.
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, angle * k as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * twiddles[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Taylor coefficients `c_0..=c_{n_max}` of an analytic function.
pub fn extract_series<F>(f: F, n_max: usize, opts: ExtractOptions) -> Result<Extraction>
where
    F: Fn(Complex64) -> Complex64,
{
    let grid = opts.grid.max(2 * n_max).max(2).next_power_of_two();
    if !(opts.radius > 0.0 && opts.radius <= 1.0) {
        return Err(invalid!("extraction radius {} outside (0, 1]", opts.radius));
    }
    let r = opts.radius;
    let mut samples: Vec<Complex64> = (0..grid)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / grid as f64;
            f(Complex64::from_polar(r, theta))
        })
        .collect();
    if let Some(bad) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(diagnostic!("function is not finite at sample {bad} of {grid}"));
    }
    // c_j = r^-j / N * sum_k f(r w^k) w^(-jk), the forward kernel.
    fft_in_place(&mut samples, false);
    let mut scale = 1.0 / grid as f64;
    let mut coefficients = Vec::with_capacity(n_max + 1);
    let mut max_imaginary: f64 = 0.0;
    for s in samples.iter().take(n_max + 1) {
        let c = *s * scale;
        max_imaginary = max_imaginary.max(c.im.abs());
        coefficients.push(c.re);
        scale /= r;
    }
    Ok(Extraction {
        coefficients,
        max_imaginary,
    })
}

/// Coefficients of a proper PGF as a (possibly truncated) [`Pmf`] on `0..=n_max`.
///
/// Fails when the imaginary residue exceeds [`IMAG_TOL`] or a coefficient is
/// below `-NEGATIVE_TOL`; tiny negative round-off is clamped to zero.
pub fn extract_coefficients(g: &PgfHandle, n_max: usize, grid: usize) -> Result<Pmf> {
    let opts = ExtractOptions::for_n_max(n_max).with_grid(grid);
    let ex = extract_series(|z| g.eval(z), n_max, opts)?;
    pmf_from_extraction(ex)
}

pub(crate) fn pmf_from_extraction(ex: Extraction) -> Result<Pmf> {
    if ex.max_imaginary > IMAG_TOL {
        return Err(diagnostic!(
            "imaginary residue {} exceeds {IMAG_TOL}",
            ex.max_imaginary
        ));
    }
    if let Some((j, c)) = ex
        .coefficients
        .iter()
        .enumerate()
        .find(|(_, c)| **c < -NEGATIVE_TOL)
    {
        return Err(diagnostic!("coefficient {j} is negative: {c}"));
    }
    let weights: Vec<f64> = ex.coefficients.iter().map(|c| c.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    if total > 1.0 + NEGATIVE_TOL {
        return Err(diagnostic!("extracted mass {total} exceeds one"));
    }
    let weights = if total > 1.0 {
        weights.into_iter().map(|w| w / total).collect()
    } else {
        weights
    };
    let tail = (1.0 - weights.iter().sum::<f64>()).max(0.0);
    Pmf::with_truncation(0, weights, tail)
}
