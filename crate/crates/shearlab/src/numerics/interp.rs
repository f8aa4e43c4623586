//! Four-point Lagrange interpolation on uniform grids with zero ghosts.

use num_complex::Complex64 as C64;

/// Interpolates samples `f[j]` at `lo + j h` (zero outside the range) at `x`.
pub fn lagrange4(f: &[C64], lo: f64, h: f64, x: f64) -> C64 {
    let n = f.len() as isize;
    let s = (x - lo) / h;
    let j = s.floor() as isize;
    let t = s - j as f64;
    if j < -2 || j > n {
        return C64::new(0.0, 0.0);
    }
    let at = |i: isize| if i >= 0 && i < n { f[i as usize] } else { C64::new(0.0, 0.0) };
    if t == 0.0 {
        return at(j);
    }
    // nodes at offsets -1, 0, 1, 2 relative to j
    let w_m1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w_0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w_1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w_2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    at(j - 1) * w_m1 + at(j) * w_0 + at(j + 1) * w_1 + at(j + 2) * w_2
}
