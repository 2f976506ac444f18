use crate::error::{Error, Result};
use crate::fundamental::{cs, cs_with_derivatives, gram};

/// `f(x) = a c(x; μ) + b s(x; μ)` on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCoefficients {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub length: f64,
}

impl EdgeCoefficients {
    pub fn value(&self, x: f64) -> f64 {
        let (c, s) = cs(x, self.mu);
        self.a * c + self.b * s
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (_, _, dc, ds) = cs_with_derivatives(x, self.mu);
        self.a * dc + self.b * ds
    }

    /// `∫ f g` for two functions sharing `μ` and length.
    pub fn inner(&self, other: &EdgeCoefficients) -> f64 {
        let (cc, csi, ss) = gram(self.length, self.mu);
        self.a * other.a * cc + (self.a * other.b + self.b * other.a) * csi + self.b * other.b * ss
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).max(0.0)
    }

    /// Exact `max |f|` over the edge, from endpoints and critical points.
    pub fn sup(&self) -> f64 {
        let mut best = self.value(0.0).abs().max(self.value(self.length).abs());
        let (a, b, mu, l) = (self.a, self.b, self.mu, self.length);
        if mu * l * l > 1e-4 {
            // f = R cos(kx − φ); the peak |f| = R is attained where kx ≡ φ mod π
            let k = mu.sqrt();
            let phi = (b / k).atan2(a);
            let r = a.hypot(b / k);
            let pi = std::f64::consts::PI;
            let first_peak = phi + (-phi / pi).ceil() * pi;
            if first_peak <= k * l {
                best = best.max(r);
            }
        } else if mu * l * l < -1e-4 {
            // f' = 0 ⇔ tanh(κx) = −aκ/b for κ = √−μ
            let k = (-mu).sqrt();
            if b != 0.0 {
                let t = -a * k / b;
                if t.abs() < 1.0 {
                    let x = t.atanh() / k;
                    if x > 0.0 && x < l {
                        best = best.max(self.value(x).abs());
                    }
                }
            }
        }
        best
    }
}

/// Per-edge coefficient pairs of an eigenfunction at `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgewiseSolution {
    pub lambda: f64,
    pub edges: Vec<EdgeCoefficients>,
}

impl EdgewiseSolution {
    pub fn value(&self, edge: usize, x: f64) -> Result<f64> {
        let e = &self.edges[edge];
        if !(0.0..=e.length).contains(&x) {
            return Err(Error::OutOfRange { x, length: e.length });
        }
        Ok(e.value(x))
    }

    pub fn inner(&self, other: &EdgewiseSolution) -> f64 {
        self.edges.iter().zip(&other.edges).map(|(f, g)| f.inner(g)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.edges.iter().map(EdgeCoefficients::norm_sq).sum::<f64>().sqrt()
    }

    pub fn sup(&self) -> f64 {
        self.edges.iter().map(EdgeCoefficients::sup).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        for e in &mut self.edges {
            e.a *= factor;
            e.b *= factor;
        }
    }

    /// `self + t · other`, coefficientwise.
    pub fn axpy(&mut self, t: f64, other: &EdgewiseSolution) {
        for (e, o) in self.edges.iter_mut().zip(&other.edges) {
            e.a += t * o.a;
            e.b += t * o.b;
        }
    }

    /// Linear combination `Σ_i w_i f_i` of solutions sharing one eigenvalue.
    pub fn combine(basis: &[EdgewiseSolution], weights: &[f64]) -> EdgewiseSolution {
        let mut out = basis[0].clone();
        out.scale(weights[0]);
        for (f, &w) in basis.iter().zip(weights).skip(1) {
            out.axpy(w, f);
        }
        out
    }
}

/// Modified Gram–Schmidt in L², applied twice. Vectors whose norm collapses
/// below `drop_tol` times their original norm are discarded.
pub fn orthonormalize(family: &mut Vec<EdgewiseSolution>, drop_tol: f64) {
    let mut out: Vec<EdgewiseSolution> = Vec::with_capacity(family.len());
    for mut f in family.drain(..) {
        let original = f.norm();
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for g in &out {
                let t = f.inner(g);
                f.axpy(-t, g);
            }
        }
        let n = f.norm();
        if n > drop_tol * original {
            f.scale(1.0 / n);
            out.push(f);
        }
    }
    *family = out;
}
