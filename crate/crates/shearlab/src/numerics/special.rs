//! Sine and cosine integrals.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// (Ci(x), Si(x)) for x > 0. Series below 2, Lentz continued fraction above.
pub fn cisi(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "cisi needs x > 0");
    const MAXIT: usize = 200;
    let eps = f64::EPSILON;
    if x > 2.0 {
        let mut b = C64::new(1.0, x);
        let mut c = C64::new(1.0 / 1e-300, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 2..MAXIT {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < eps {
                break;
            }
        }
        let h = C64::new(x.cos(), -x.sin()) * h;
        (-h.re, FRAC_PI_2 + h.im)
    } else {
        let (mut sum, mut sums, mut sumc) = (0.0, 0.0, 0.0);
        let mut sign = 1.0;
        let mut fact = 1.0;
        let mut odd = true;
        for k in 1..MAXIT {
            fact *= x / k as f64;
            let term = fact / k as f64;
            sum += sign * term;
            let err = term / sum.abs();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < eps {
                break;
            }
            odd = !odd;
        }
        (sumc + x.ln() + EULER_GAMMA, sums)
    }
}

/// Cin(x) = integral of (1 - cos t)/t over [0, x] = gamma + ln x - Ci(x).
pub fn cin(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x < 1.0 {
        // alternating series, terms shrink fast
        let mut term = 1.0;
        let mut sum = 0.0;
        let x2 = x * x;
        for k in 1..40 {
            let kk = 2 * k;
            term *= x2 / ((kk - 1) * kk) as f64;
            let t = term / kk as f64;
            sum += if k % 2 == 1 { t } else { -t };
            if t < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        EULER_GAMMA + x.ln() - cisi(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 5.1
        let (ci, si) = cisi(1.0);
        assert!((si - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((ci - 0.337_403_922_900_968_1).abs() < 1e-14);
        let (ci, si) = cisi(10.0);
        assert!((si - 1.658_347_594_218_874).abs() < 1e-13);
        assert!((ci + 0.045_456_433_004_455_37).abs() < 1e-13);
    }

    #[test]
    fn cin_branches_meet() {
        for &x in &[0.3, 0.999, 1.0, 1.5, 2.0, 2.5] {
            let direct = EULER_GAMMA + f64::ln(x) - cisi(x).0;
            assert!((cin(x) - direct).abs() < 1e-13, "x={x}");
        }
    }
}
