//! Scalar root refinement shared by the Bessel zero finder and the secular equations.

/// Refines a sign-changing bracket `[a, b]` of `f`.
///
/// Bisection shrinks the bracket to a relative width of `1e-12`, then one secant
/// step is taken and kept only if it stays inside the final bracket.
pub(crate) fn refine_bracket<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    let secant = b - fb * (b - a) / (fb - fa);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if secant.is_finite() && secant >= lo && secant <= hi {
        secant
    } else {
        0.5 * (a + b)
    }
}
