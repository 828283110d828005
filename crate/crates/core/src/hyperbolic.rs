//! Overflow-free ratios of hyperbolic functions.
//!
//! Every mode of the Dirichlet and Neumann maps carries a quotient of two
//! exponentially large hyperbolic values. They are evaluated here as products
//! of decaying exponentials so the mode index can grow without bound.

/// Arguments above this switch to the shifted exponential form.
pub const SHIFT_THRESHOLD: f64 = 30.0;

/// `cosh(k (y + 1)) / cosh(k)` for `y` in `[-1, 0]` and `k >= 0`.
///
/// Equals 1 exactly at `y = 0`.
pub fn cosh_depth_ratio(k: f64, y: f64) -> f64 {
    let t = y + 1.0;
    if k <= SHIFT_THRESHOLD {
        (k * t).cosh() / k.cosh()
    } else {
        (k * y).exp() * (1.0 + (-2.0 * k * t).exp()) / (1.0 + (-2.0 * k).exp())
    }
}

/// `cosh(a (x - pi)) / sinh(a pi)` for `x` in `[0, pi]` and `a > 0`.
pub fn cosh_over_sinh(a: f64, x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if a * pi <= SHIFT_THRESHOLD {
        (a * (x - pi)).cosh() / (a * pi).sinh()
    } else {
        (-a * x).exp() * (1.0 + (-2.0 * a * (pi - x)).exp()) / (1.0 - (-2.0 * a * pi).exp())
    }
}

/// `sinh(a (x - pi)) / sinh(a pi)` for `x` in `[0, pi]` and `a > 0`.
pub fn sinh_over_sinh(a: f64, x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if a * pi <= SHIFT_THRESHOLD {
        (a * (x - pi)).sinh() / (a * pi).sinh()
    } else {
        -(-a * x).exp() * (1.0 - (-2.0 * a * (pi - x)).exp()) / (1.0 - (-2.0 * a * pi).exp())
    }
}
