//! Weight-tail constant `κ(w, N) = (Σ_{n>N} w(n)^{-2})^{1/2}`.

use super::HedgeError;
use crate::tensor::{Weight, WeightKind};

const BERNOULLI: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];

/// `Σ_{m >= a} m^{-s}` for `s > 1`, by direct summation plus an Euler–Maclaurin tail.
fn hurwitz_tail(s: f64, a: f64) -> f64 {
    const DIRECT: usize = 64;
    let mut sum = 0.0;
    for k in 0..DIRECT {
        sum += (a + k as f64).powf(-s);
    }
    let b = a + DIRECT as f64;
    let mut tail = b.powf(1.0 - s) / (s - 1.0) + 0.5 * b.powf(-s);
    // rising factorial s(s+1)…(s+2k-2) and (2k)!
    let mut rising = s;
    let mut fact = 2.0;
    for (k, bk) in BERNOULLI.iter().enumerate() {
        let k1 = k as f64 + 1.0;
        tail += bk / fact * rising * b.powf(-s - 2.0 * k1 + 1.0);
        rising *= (s + 2.0 * k1 - 1.0) * (s + 2.0 * k1);
        fact *= (2.0 * k1 + 1.0) * (2.0 * k1 + 2.0);
    }
    sum + tail
}

pub fn kappa_tail(w: &Weight, n: usize) -> Result<f64, HedgeError> {
    match &w.kind {
        WeightKind::Geometric(r) if *r > 1.0 => Ok(r.powi(-(n as i32 + 1)) / (1.0 - r.powi(-2)).sqrt()),
        WeightKind::Polynomial(a) if *a > 0.5 => Ok(hurwitz_tail(2.0 * a, n as f64 + 2.0).sqrt()),
        WeightKind::Custom(_) => {
            let mut sum = 0.0;
            for m in n + 1..n + 10_000_000 {
                let t = w.eval(m).powi(-2);
                sum += t;
                if t <= 1e-17 * sum {
                    return Ok(sum.sqrt());
                }
            }
            Err(HedgeError::NotSummable(w.name()))
        }
        _ => Err(HedgeError::NotSummable(w.name())),
    }
}
