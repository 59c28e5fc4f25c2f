//! Adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{diagnostic, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, f64)
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let points: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &s in points {
            f(center + s * half * x, buf);
            for d in 0..dim {
                kronrod[d] += wk * buf[d];
                if i % 2 == 1 {
                    gauss[d] += WG[i / 2] * buf[d];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        kronrod[d] *= half;
        gauss[d] *= half;
        err = err.max((kronrod[d] - gauss[d]).abs());
    }
    (kronrod, err)
}

/// Integrates `f` over `[a, b]` componentwise until the estimated max-norm
/// error is below `abs_tol`.
///
/// `f(t, out)` writes the `dim` integrand values at `t` into `out`.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, abs_tol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    const MAX_PANELS: usize = 20_000;
    let mut buf = vec![0.0; dim];
    let (value, error) = gk15(&mut f, a, b, dim, &mut buf);
    let mut done: Vec<Panel> = Vec::new();
    let mut todo = vec![Panel { a, b, value, error }];
    let mut panels = 1;
    while let Some(p) = todo.pop() {
        let local_tol = abs_tol * (p.b - p.a) / (b - a);
        if p.error <= local_tol.max(f64::EPSILON * 64.0) || (p.b - p.a) < 1e-12 * (b - a) {
            done.push(p);
            continue;
        }
        panels += 1;
        if panels > MAX_PANELS {
            return Err(diagnostic!("quadrature exceeded {MAX_PANELS} panels"));
        }
        let mid = 0.5 * (p.a + p.b);
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (value, error) = gk15(&mut f, lo, hi, dim, &mut buf);
            todo.push(Panel { a: lo, b: hi, value, error });
        }
    }
    done.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut total = vec![0.0; dim];
    for p in &done {
        for d in 0..dim {
            total[d] += p.value[d];
        }
    }
    Ok(total)
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|t, out| out[0] = f(t), a, b, 1, abs_tol).map(|v| v[0])
}
