//! Grading weights `w(n)` and their admissibility diagnostics.

use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub enum WeightKind {
    /// `w(n) = r^n`.
    Geometric(f64),
    /// `w(n) = (1 + n)^α`.
    Polynomial(f64),
    /// `w(n) = 1`.
    Constant,
    /// Arbitrary evaluator, used for diagnostics.
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct Weight {
    pub kind: WeightKind,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Geometric(r) => write!(f, "Weight::Geometric({r})"),
            WeightKind::Polynomial(a) => write!(f, "Weight::Polynomial({a})"),
            WeightKind::Constant => write!(f, "Weight::Constant"),
            WeightKind::Custom(_) => write!(f, "Weight::Custom"),
        }
    }
}

impl Default for Weight {
    fn default() -> Self {
        Weight::geometric(2.0)
    }
}

impl Weight {
    pub fn geometric(r: f64) -> Self {
        Weight { kind: WeightKind::Geometric(r) }
    }

    pub fn polynomial(alpha: f64) -> Self {
        Weight { kind: WeightKind::Polynomial(alpha) }
    }

    pub fn constant() -> Self {
        Weight { kind: WeightKind::Constant }
    }

    pub fn custom(f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Weight { kind: WeightKind::Custom(Arc::new(f)) }
    }

    pub fn eval(&self, n: usize) -> f64 {
        match &self.kind {
            WeightKind::Geometric(r) => r.powi(n as i32),
            WeightKind::Polynomial(a) => (1.0 + n as f64).powf(*a),
            WeightKind::Constant => 1.0,
            WeightKind::Custom(f) => f(n),
        }
    }

    /// Nominal submultiplicativity constant `C_w`, when known in closed form.
    pub fn c_w(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::Geometric(_) | WeightKind::Constant => Some(1.0),
            WeightKind::Polynomial(a) if *a >= 0.0 => Some(1.0),
            _ => None,
        }
    }

    /// Nominal growth bound `r` with `w(n) <= r^n`.
    pub fn growth_r(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::Geometric(r) => Some(*r),
            WeightKind::Polynomial(a) => Some(2f64.powf(a.max(0.0))),
            WeightKind::Constant => Some(1.0),
            WeightKind::Custom(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            WeightKind::Geometric(r) => format!("geometric({r})"),
            WeightKind::Polynomial(a) => format!("polynomial({a})"),
            WeightKind::Constant => "constant".into(),
            WeightKind::Custom(_) => "custom".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    pub w0_is_one: bool,
    pub monotone: bool,
    pub c_w_estimate: f64,
    pub growth_r: f64,
    pub violations: Vec<String>,
}

impl WeightReport {
    pub fn admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `w` on `[0, n_max]`. A failing `w(0) = 1` is a violation, not an error.
pub fn weight_check(w: &Weight, n_max: usize) -> WeightReport {
    let n_max = n_max.max(2);
    let vals: Vec<f64> = (0..=2 * n_max).map(|n| w.eval(n)).collect();
    let mut violations = Vec::new();

    let w0_is_one = vals[0] == 1.0;
    if !w0_is_one {
        violations.push(format!("w(0) = {} != 1", vals[0]));
    }
    if let Some(n) = vals.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        violations.push(format!("w({n}) = {} is not a positive real", vals[n]));
    }
    let monotone = vals[..=n_max].windows(2).all(|p| p[1] >= p[0]);
    if !monotone {
        violations.push("w is not non-decreasing on the sampled range".into());
    }

    let mut c_w: f64 = 0.0;
    for m in 0..=n_max {
        for n in 0..=n_max {
            c_w = c_w.max(vals[m + n] / (vals[m] * vals[n]));
        }
    }
    let mut growth: f64 = 1.0;
    for (n, v) in vals.iter().enumerate().take(n_max + 1).skip(1) {
        growth = growth.max(v.powf(1.0 / n as f64));
    }
    WeightReport { w0_is_one, monotone, c_w_estimate: c_w, growth_r: growth, violations }
}
