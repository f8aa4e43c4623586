//! Matrix exponential by scaling and squaring with the degree-13 Pade approximant.

use faer::complex_native::c64;
use faer::prelude::SpSolver;
use faer::Mat;

use super::dense::{identity, norm_one, CMat};
use crate::error::{Error, Result};

const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// Largest |A|_1 t accepted before reporting OverflowRisk.
pub const NORM_CAP: f64 = 1e7;

fn lin(terms: &[(f64, &CMat)], n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        let mut acc = c64::new(0.0, 0.0);
        for (c, m) in terms {
            acc += m.read(i, j) * *c;
        }
        acc
    })
}

/// exp(A t).
pub fn expm(a: &CMat, t: f64) -> Result<CMat> {
    let n = a.nrows();
    let norm = norm_one(a) * t.abs();
    if !(norm <= NORM_CAP) {
        return Err(Error::OverflowRisk(norm));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = t / 2f64.powi(s);
    let a1 = Mat::from_fn(n, n, |i, j| a.read(i, j) * scale);
    let id = identity(n);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = lin(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let u_poly = &a6 * &inner_u + lin(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)], n);
    let u = &a1 * &u_poly;
    let inner_v = lin(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let v = &a6 * &inner_v + lin(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)], n);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
