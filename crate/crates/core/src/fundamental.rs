//! Fundamental solutions of `u'' = -μ u` normalized at `x = 0`:
//! `c(0) = 1, c'(0) = 0` and `s(0) = 0, s'(0) = 1`.
//!
//! Near `μ x² = 0` both are taken from their power series so that the
//! trigonometric, linear and hyperbolic regimes join without a singularity.

const SERIES_CUTOFF: f64 = 1e-4;

/// `(c(x), s(x))` for spectral shift `μ = λ - q`.
pub fn cs(x: f64, mu: f64) -> (f64, f64) {
    let z = mu * x * x;
    if z.abs() < SERIES_CUTOFF {
        let c = 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
        let s = x * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0);
        (c, s)
    } else if mu > 0.0 {
        let k = mu.sqrt();
        let (sn, cn) = (k * x).sin_cos();
        (cn, sn / k)
    } else {
        let k = (-mu).sqrt();
        ((k * x).cosh(), (k * x).sinh() / k)
    }
}

/// `(c, s, c', s')` at `x`.
pub fn cs_with_derivatives(x: f64, mu: f64) -> (f64, f64, f64, f64) {
    let (c, s) = cs(x, mu);
    (c, s, -mu * s, c)
}

/// Edge Gram integrals `(∫c², ∫cs, ∫s²)` over `[0, ℓ]`.
pub fn gram(length: f64, mu: f64) -> (f64, f64, f64) {
    let (c, s) = cs(length, mu);
    let cc = 0.5 * (length + c * s);
    let cs_int = 0.5 * s * s;
    let ss = if (mu * length * length).abs() < 1.0 {
        ss_series(length, mu)
    } else {
        (length - c * s) / (2.0 * mu)
    };
    (cc, cs_int, ss)
}

// ∫₀^ℓ s² = Σ_n (−μ)^n 2^{2n+1} ℓ^{2n+3} / ((2n+3)(2n+2)!)
fn ss_series(length: f64, mu: f64) -> f64 {
    let l2 = length * length;
    // term_n without the 1/(2n+3) factor: (−μ)^n 2^{2n+1} ℓ^{2n+3} / (2n+2)!
    let mut term = length * l2;
    let mut sum = term / 3.0;
    for n in 1..40 {
        let m = 2 * n as u32;
        term *= -4.0 * mu * l2 / (f64::from(m + 1) * f64::from(m + 2));
        let add = term / f64::from(m + 3);
        sum += add;
        if add.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}
