//! Adaptive Gauss–Kronrod (7, 15) quadrature for complex-valued integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

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
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<const N: usize, F: FnMut(f64) -> [Complex64; N]>(f: &mut F, a: f64, b: f64) -> ([Complex64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc.map(|v| v * WGK[7]);
    let mut gauss = fc.map(|v| v * WG[3]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let (lo, hi) = (f(c - dx), f(c + dx));
        for i in 0..N {
            let s = lo[i] + hi[i];
            kron[i] += s * WGK[j];
            if j % 2 == 1 {
                gauss[i] += s * WG[j / 2];
            }
        }
    }
    let err = (0..N).map(|i| ((kron[i] - gauss[i]) * h).norm()).fold(0.0, f64::max);
    (kron.map(|v| v * h), err)
}

/// Integral of the vector-valued `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the summed
/// estimate (max over components) is below `abs_tol` or `rel_tol` times the
/// largest component magnitude, whichever is looser.
pub(crate) fn integrate_vec<const N: usize, F: FnMut(f64) -> [Complex64; N]>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<[Complex64; N]> {
    const MAX_INTERVALS: usize = 2000;
    if a == b {
        return Ok([Complex64::new(0.0, 0.0); N]);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let mut total = [Complex64::new(0.0, 0.0); N];
        for p in &pieces {
            for i in 0..N {
                total[i] += p.2[i];
            }
        }
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if err <= abs_tol.max(rel_tol * scale) {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureError { estimate: err });
        }
        let (idx, _) = pieces.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
/// Scalar form of [`integrate_vec`].
pub(crate) fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Complex64> {
    integrate_vec(|x| [f(x)], a, b, abs_tol, rel_tol).map(|v| v[0])
}
