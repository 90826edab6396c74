//! Integer-order Bessel functions of real argument.
//!
//! `J_n` and the exponentially scaled `I_n` come from Miller's backward recurrence
//! with the generating-function normalisations `J_0 + 2 Σ J_{2k} = 1` and
//! `I_0 + 2 Σ I_k = e^x`. `K_0` and `K_1` use the power series below `x = 2`
//! and Steed's continued fraction above it; higher orders follow by forward
//! recurrence, which is stable for `K`.

use crate::error::{invalid, Result};
use crate::roots::refine_bracket;
use serde::{Deserialize, Serialize};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE: f64 = 1e250;

/// Which Bessel family to evaluate in [`bessel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselKind {
    /// First kind, `J_n`.
    J,
    /// Modified first kind, `I_n`.
    I,
    /// Modified second kind, `K_n`.
    K,
}

/// Unscaled `J_n(x)`, `I_n(x)` or `K_n(x)` for any integer order.
///
/// `K` requires `x > 0`. Values that overflow `f64` come back as `+inf`
/// rather than as an error, since callers that need them should use the
/// scaled variants.
pub fn bessel(kind: BesselKind, order: i32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid("x", "argument must be finite"));
    }
    let n = order.unsigned_abs() as usize;
    match kind {
        BesselKind::J => Ok(bessel_j(order, x)),
        BesselKind::I => {
            let scaled = bessel_i_scaled(n, x);
            Ok(scaled * x.abs().exp())
        }
        BesselKind::K => {
            if x <= 0.0 {
                return Err(invalid("x", "K_n needs a positive argument"));
            }
            let scaled = bessel_k_scaled(n, x);
            Ok(if scaled.is_infinite() { f64::INFINITY } else { scaled * (-x).exp() })
        }
    }
}

fn even_start(index: f64) -> usize {
    let n = index.ceil() as usize;
    n + (n & 1)
}

/// `J_0(x), …, J_nmax(x)`.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = even_start((nmax as f64).max(ax) + 20.0 + 15.0 * ax.cbrt());
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = 0.0;
    let mut k = top;
    loop {
        if k <= nmax {
            out[k] = current;
        }
        if k.is_multiple_of(2) {
            norm += if k == 0 { current } else { 2.0 * current };
        }
        if k == 0 {
            break;
        }
        let below = (2.0 * k as f64 / ax) * current - above;
        above = current;
        current = below;
        k -= 1;
        if current.abs() > RESCALE {
            current /= RESCALE;
            above /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut().skip(k + 1) {
                *v /= RESCALE;
            }
        }
    }
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let value = bessel_j_sequence(n, x)[n];
    if order < 0 && n % 2 == 1 {
        -value
    } else {
        value
    }
}

/// `e^{-|x|} I_0(x), …, e^{-|x|} I_nmax(x)`.
pub fn bessel_i_scaled_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = even_start(nmax as f64 + 30.0 + 10.0 * ax.sqrt());
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = 0.0;
    let mut k = top;
    loop {
        if k <= nmax {
            out[k] = current;
        }
        norm += if k == 0 { current } else { 2.0 * current };
        if k == 0 {
            break;
        }
        let below = (2.0 * k as f64 / ax) * current + above;
        above = current;
        current = below;
        k -= 1;
        if current > RESCALE {
            current /= RESCALE;
            above /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut().skip(k + 1) {
                *v /= RESCALE;
            }
        }
    }
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `e^{-|x|} I_n(x)`.
pub fn bessel_i_scaled(order: usize, x: f64) -> f64 {
    bessel_i_scaled_sequence(order, x)[order]
}

/// `(e^x K_0(x), e^x K_1(x))` for `x > 0`.
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut i0 = 1.0;
        let mut i1 = 1.0;
        let mut i1_term = 1.0;
        let mut harmonic = 0.0;
        let mut k0_tail = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            i0 += term;
            k0_tail += term * harmonic;
            i1_term *= q / (kf * (kf + 1.0));
            i1 += i1_term;
            if term < 1e-18 * i0 {
                break;
            }
        }
        let i1 = 0.5 * x * i1;
        let k0 = -((0.5 * x).ln() + EULER_GAMMA) * i0 + k0_tail;
        let k1 = (1.0 / x - i1 * k0) / i0;
        let scale = x.exp();
        (k0 * scale, k1 * scale)
    } else {
        // Steed's continued fraction for K_0 with the companion sum giving K_1.
        let a1 = 0.25;
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..100_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-16 {
                break;
            }
        }
        h *= a1;
        let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
        let k1 = k0 * (x + 0.5 - h) / x;
        (k0, k1)
    }
}

/// `e^x K_0(x), …, e^x K_nmax(x)` for `x > 0`. Large orders at tiny arguments
/// overflow to `+inf`; use [`bessel_k_ratio`] when only ratios are needed.
pub fn bessel_k_scaled_sequence(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "K_n needs a positive argument");
    let (k0, k1) = k01_scaled(x);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(k0);
    if nmax >= 1 {
        out.push(k1);
    }
    for k in 1..nmax {
        let next = out[k - 1] + (2.0 * k as f64 / x) * out[k];
        out.push(next);
    }
    out
}

/// `e^x K_n(x)` for `x > 0`.
pub fn bessel_k_scaled(order: usize, x: f64) -> f64 {
    bessel_k_scaled_sequence(order, x)[order]
}

/// `K_{n+1}(x) / K_n(x)` for `x > 0`, computed without overflow.
pub fn bessel_k_ratio(order: usize, x: f64) -> f64 {
    let (k0, k1) = k01_scaled(x);
    let mut ratio = k1 / k0;
    for k in 1..=order {
        ratio = 1.0 / ratio + 2.0 * k as f64 / x;
    }
    ratio
}

/// Positive zeros of `J_n` below `upto`, in increasing order.
pub fn bessel_j_zeros(order: usize, upto: f64) -> Result<Vec<f64>> {
    if !(upto.is_finite() && upto > 0.0) {
        return Err(invalid("upto", "search limit must be positive and finite"));
    }
    let f = |x: f64| bessel_j_sequence(order, x)[order];
    // Zeros of J_n are spaced by more than 2.9 and the first exceeds max(n, 2.4).
    let step = 0.25;
    let mut zeros = Vec::new();
    let mut a = (order as f64).max(0.5);
    let mut fa = f(a);
    while a < upto {
        let b = (a + step).min(upto);
        let fb = f(b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            zeros.push(refine_bracket(f, a, b));
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j_series(n: usize, x: f64) -> f64 {
        let mut term = (0.5 * x).powi(n as i32);
        for k in 1..=n {
            term /= k as f64;
        }
        let mut sum = term;
        for k in 1..200 {
            term *= -(0.25 * x * x) / (k as f64 * (k + n) as f64);
            sum += term;
            if term.abs() < 1e-20 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn j_matches_power_series() {
        for &x in &[0.1, 1.0, 2.5, 7.3] {
            for n in 0..8 {
                let exact = j_series(n, x);
                let got = bessel_j(n as i32, x);
                assert!((got - exact).abs() < 1e-12 * exact.abs().max(1e-3), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn j_reference_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 10.0) - 0.043_472_746_168_861_6).abs() < 1e-14);
        assert!((bessel_j(0, 12.0) - 0.047_689_310_796_833_49).abs() < 1e-14);
        assert!((bessel_j(3, 30.0) - 0.129_211_228_759_725).abs() < 1e-14);
        assert!((bessel_j(5, 50.0) - (-0.081_400_247_696_569_64)).abs() < 1e-13);
    }

    #[test]
    fn j_parity_rules() {
        let x = 3.7;
        assert!((bessel_j(-3, x) + bessel_j(3, x)).abs() < 1e-15);
        assert!((bessel_j(2, -x) - bessel_j(2, x)).abs() < 1e-15);
        assert!((bessel_j(3, -x) + bessel_j(3, x)).abs() < 1e-15);
    }

    #[test]
    fn first_zero_of_j0() {
        let z = bessel_j_zeros(0, 3.0).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0] - 2.404_825_557_695_773).abs() < 1e-12);
    }

    #[test]
    fn k_reference_values() {
        let k = |n, x| bessel(BesselKind::K, n, x).unwrap();
        assert!((k(0, 1.0) - 0.421_024_438_240_708_34).abs() < 1e-14);
        assert!((k(1, 1.0) - 0.601_907_230_197_234_6).abs() < 1e-14);
        assert!((k(0, 2.0) - 0.113_893_872_749_533_44).abs() < 1e-15);
        assert!((k(1, 2.0) - 0.139_865_881_816_522_43).abs() < 1e-15);
    }

    #[test]
    fn scaled_values_at_extreme_arguments() {
        assert!((bessel_k_scaled(0, 640.0) / 0.049_531_923_618_608_99 - 1.0).abs() < 1e-12);
        assert!((bessel_k_scaled(3, 0.05) / 67_260.331_305_552_07 - 1.0).abs() < 1e-12);
        assert!((bessel_i_scaled(4, 300.0) / 0.022_435_218_946_705_353 - 1.0).abs() < 1e-12);
        assert!((bessel_i_scaled(2, 0.5) / 0.019_352_057_709_663_28 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_ratio_matches_sequence() {
        for &x in &[0.3, 2.0, 9.0, 400.0] {
            let seq = bessel_k_scaled_sequence(6, x);
            for n in 0..6 {
                let r = bessel_k_ratio(n, x);
                assert!((r - seq[n + 1] / seq[n]).abs() < 1e-12 * r);
            }
        }
    }

    #[test]
    fn k_needs_positive_argument() {
        assert!(bessel(BesselKind::K, 0, 0.0).is_err());
    }
}
