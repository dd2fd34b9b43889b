//! Small Monte Carlo statistics helpers.

use nalgebra::{DMatrix, DVector};

/// Count, sum and sum of squares; merged associatively.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn merge(self, other: Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sumsq: self.sumsq + other.sumsq,
        }
    }

    pub fn from_slice(xs: &[f64]) -> Moments {
        let mut m = Moments::default();
        for &x in xs {
            m.push(x);
        }
        m
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Mean and standard error computed with a two-pass variance.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug)]
pub struct OlsFit {
    pub beta: Vec<f64>,
    /// Heteroscedasticity-robust (HC0) standard errors.
    pub se: Vec<f64>,
}

/// Least squares of several responses on a shared row-major design with `p` columns.
pub fn ols_multi(x: &[f64], p: usize, ys: &[&[f64]]) -> Option<Vec<OlsFit>> {
    let n = x.len() / p;
    let mut xtx = DMatrix::<f64>::zeros(p, p);
    for row in x.chunks_exact(p) {
        for a in 0..p {
            for b in a..p {
                xtx[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[(a, b)] = xtx[(b, a)];
        }
    }
    let inv = xtx.cholesky()?.inverse();
    // z_i = (X'X)^{-1} x_i, shared by every response.
    let mut z = vec![0.0; n * p];
    for (i, row) in x.chunks_exact(p).enumerate() {
        let xi = DVector::from_column_slice(row);
        let zi = &inv * xi;
        z[i * p..(i + 1) * p].copy_from_slice(zi.as_slice());
    }
    let mut out = Vec::with_capacity(ys.len());
    for y in ys {
        let mut beta = vec![0.0; p];
        for (i, zi) in z.chunks_exact(p).enumerate() {
            for a in 0..p {
                beta[a] += zi[a] * y[i];
            }
        }
        let mut var = vec![0.0; p];
        for i in 0..n {
            let row = &x[i * p..(i + 1) * p];
            let fit: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let e2 = (y[i] - fit) * (y[i] - fit);
            for a in 0..p {
                let za = z[i * p + a];
                var[a] += e2 * za * za;
            }
        }
        out.push(OlsFit { beta, se: var.into_iter().map(f64::sqrt).collect() });
    }
    Some(out)
}
