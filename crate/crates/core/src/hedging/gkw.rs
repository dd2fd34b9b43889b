//! Four-step finite GKW projection on sample inner products `⟨a,b⟩ = n⁻¹Σ aᵢbᵢ`.

use nalgebra::{DMatrix, DVector};

use super::design::{Design, HedgeBasis};
use super::kappa::kappa_tail;
use super::HedgeError;
use crate::tensor::Word;

#[derive(Clone, Debug)]
pub struct GKWResult {
    pub n_paths: usize,
    /// `E_Q[X]`: cash plus the static instruments at their sample means.
    pub price: f64,
    /// Coefficient of the constant column.
    pub cash: f64,
    pub dynamic_coeffs: Vec<(Word, f64)>,
    pub static_coeffs: Vec<(String, f64)>,
    /// `c_I` on the residual columns orthogonalized against the hedge span.
    pub residual_coeffs: Vec<(Word, f64)>,
    /// `‖R_T‖`: RMS of the final remainder.
    pub residual_norm: f64,
    pub residual_se: f64,
    /// `‖ε_T‖`: RMS after the hedge regression only.
    pub eps_norm: f64,
    pub eps_se: f64,
    /// `‖X‖` (sample L² norm, uncentered).
    pub payoff_norm: f64,
    pub kappa_bound: f64,
    /// Smallest eigenvalue of the standardized Gram blocks that were solved (no ridge).
    pub gram_min_eigenvalue: f64,
    pub ridge: f64,
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
}

impl GKWResult {
    /// `κ(w, N_low)·‖X‖`, reported beside `residual_norm` and never asserted against it.
    pub fn kappa_times_norm(&self) -> f64 {
        self.kappa_bound * self.payoff_norm
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

fn rms(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

/// Removes the components along an orthonormal family (twice, for stability).
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

/// RMS and delta-method SE of `sqrt(mean(r²))`.
fn norm_with_se(r: &[f64]) -> (f64, f64) {
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    let (m, se) = crate::stats::mean_se(&sq);
    let norm = m.sqrt();
    (norm, if norm > 0.0 { se / (2.0 * norm) } else { 0.0 })
}

fn gram(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let k = cols.len();
    let mut g = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = dot(&cols[a], &cols[b]);
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 0 {
        return f64::INFINITY;
    }
    g.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn solve_ridge(g: &DMatrix<f64>, rhs: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let k = g.nrows();
    let m = g + DMatrix::identity(k, k) * lambda;
    m.cholesky().map(|c| c.solve(rhs))
}

pub fn gkw_project(x: &[f64], design: &Design, basis: &HedgeBasis) -> Result<GKWResult, HedgeError> {
    gkw_project_with_remainder(x, design, basis).map(|(r, _)| r)
}

/// As [`gkw_project`], also returning the per-path final remainder `R_T`.
pub fn gkw_project_with_remainder(
    x: &[f64],
    design: &Design,
    basis: &HedgeBasis,
) -> Result<(GKWResult, Vec<f64>), HedgeError> {
    basis.validate()?;
    let n = design.n;
    if n == 0 {
        return Err(HedgeError::EmptyDataset);
    }
    if x.len() != n {
        return Err(HedgeError::InvalidBasis(format!("{} payoff samples for {n} design rows", x.len())));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(HedgeError::NonFinite(format!("payoff sample {i}")));
    }
    let mut warnings = Vec::new();
    if n < 10 * design.n_columns() {
        warnings.push(format!("{n} samples for {} columns (fewer than 10 per column)", design.n_columns()));
    }
    let mut dropped = Vec::new();
    let tol = basis.drop_tol;

    // (1) hedge regression on standardized, centered columns.
    let labels: Vec<String> = design
        .dynamic_words
        .iter()
        .map(Word::to_text)
        .chain(design.static_labels.iter().cloned())
        .collect();
    let raw: Vec<&Vec<f64>> = design.dynamic.iter().chain(&design.static_cols).collect();
    let mut kept = Vec::new();
    let mut z_cols: Vec<Vec<f64>> = Vec::new();
    let mut scales = Vec::new();
    let mut means = Vec::new();
    for (j, col) in raw.iter().enumerate() {
        let mu = mean(col);
        let c: Vec<f64> = col.iter().map(|v| v - mu).collect();
        let s = rms(&c);
        if s == 0.0 || s < tol * rms(col) {
            dropped.push(labels[j].clone());
            continue;
        }
        kept.push(j);
        means.push(mu);
        scales.push(s);
        z_cols.push(c.into_iter().map(|v| v / s).collect());
    }
    let x_mean = mean(x);
    let xc: Vec<f64> = x.iter().map(|v| v - x_mean).collect();

    // Orthonormal basis of span{1, kept columns}; dependent directions are flagged.
    let mut q: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let mut dependent = Vec::new();
    let mut independent = Vec::new();
    for (a, z) in z_cols.iter().enumerate() {
        let mut v = z.clone();
        orthogonalize(&mut v, &q);
        let r = rms(&v);
        if r < tol {
            dependent.push(a);
        } else {
            v.iter_mut().for_each(|t| *t /= r);
            q.push(v);
            independent.push(a);
        }
    }
    let dependent_words: Vec<String> = dependent.iter().map(|&a| labels[kept[a]].clone()).collect();
    if basis.ridge == Some(0.0) && !dependent.is_empty() {
        return Err(HedgeError::Degenerate { words: dependent_words });
    }
    dropped.extend(dependent_words);
    let kept: Vec<usize> = independent.iter().map(|&a| kept[a]).collect();
    let scales: Vec<f64> = independent.iter().map(|&a| scales[a]).collect();
    let means: Vec<f64> = independent.iter().map(|&a| means[a]).collect();
    let z_cols: Vec<Vec<f64>> = independent.iter().map(|&a| std::mem::take(&mut z_cols[a])).collect();
    let g1 = gram(&z_cols);
    let k1 = z_cols.len();
    let lambda = basis.ridge.unwrap_or(if k1 > 0 { 1e-8 * g1.trace() / k1 as f64 } else { 0.0 });
    let rhs1 = DVector::from_iterator(k1, z_cols.iter().map(|z| dot(z, &xc)));
    let gamma = solve_ridge(&g1, &rhs1, lambda)
        .ok_or_else(|| HedgeError::Degenerate { words: kept.iter().map(|&j| labels[j].clone()).collect() })?;
    let n_dyn = design.dynamic.len();
    let mut beta = vec![0.0; raw.len()];
    let mut cash = x_mean;
    let mut price = x_mean;
    let mut eps = xc.clone();
    for (a, &j) in kept.iter().enumerate() {
        beta[j] = gamma[a] / scales[a];
        cash -= beta[j] * means[a];
        if j < n_dyn {
            price -= beta[j] * means[a];
        }
        for (e, z) in eps.iter_mut().zip(&z_cols[a]) {
            *e -= gamma[a] * z;
        }
    }
    let mut min_eig = min_eigenvalue(&g1);

    // (2) residual columns modulo the hedge span.
    let mut y_tilde = Vec::new();
    let mut y_kept = Vec::new();
    for (i, col) in design.residual.iter().enumerate() {
        let raw_norm = rms(col);
        let mut v = col.clone();
        orthogonalize(&mut v, &q);
        let qn = rms(&v);
        // (3a) null quotient classes.
        if raw_norm == 0.0 || qn < tol * raw_norm {
            dropped.push(design.residual_words[i].to_text());
            continue;
        }
        y_tilde.push((v, qn, raw_norm));
        y_kept.push(i);
    }
    // (3b) directions already spanned by earlier quotient classes.
    let mut q2: Vec<Vec<f64>> = Vec::new();
    let mut quotient = Vec::new();
    let mut quotient_idx = Vec::new();
    for ((v, qn, raw_norm), i) in y_tilde.into_iter().zip(y_kept) {
        let mut u = v.clone();
        orthogonalize(&mut u, &q2);
        let r = rms(&u);
        if r < tol * raw_norm {
            dropped.push(design.residual_words[i].to_text());
            continue;
        }
        u.iter_mut().for_each(|t| *t /= r);
        q2.push(u);
        quotient.push((v, qn));
        quotient_idx.push(i);
    }
    let k2 = quotient.len();
    let std_cols: Vec<Vec<f64>> = quotient.iter().map(|(v, qn)| v.iter().map(|t| t / qn).collect()).collect();
    let g2 = gram(&std_cols);
    let lambda2 = basis.ridge.unwrap_or(if k2 > 0 { 1e-8 * g2.trace() / k2 as f64 } else { 0.0 });
    let rhs2 = DVector::from_iterator(k2, std_cols.iter().map(|c| dot(c, &eps)));
    let c2 = solve_ridge(&g2, &rhs2, lambda2).ok_or_else(|| HedgeError::Degenerate {
        words: quotient_idx.iter().map(|&i| design.residual_words[i].to_text()).collect(),
    })?;
    min_eig = min_eig.min(min_eigenvalue(&g2));

    // (4) final remainder.
    let mut remainder = eps.clone();
    let mut residual_coeffs = Vec::with_capacity(k2);
    for (a, &i) in quotient_idx.iter().enumerate() {
        for (r, c) in remainder.iter_mut().zip(&std_cols[a]) {
            *r -= c2[a] * c;
        }
        residual_coeffs.push((design.residual_words[i].clone(), c2[a] / quotient[a].1));
    }
    let (residual_norm, residual_se) = norm_with_se(&remainder);
    let (eps_norm, eps_se) = norm_with_se(&eps);

    let n_low = basis.residual_window.map(|w| w.0).unwrap_or(basis.integrand_depth);
    let kappa_bound = kappa_tail(&basis.weight, n_low).unwrap_or(f64::NAN);
    let result = GKWResult {
        n_paths: n,
        price,
        cash,
        dynamic_coeffs: design.dynamic_words.iter().cloned().zip(beta[..n_dyn].iter().copied()).collect(),
        static_coeffs: design.static_labels.iter().cloned().zip(beta[n_dyn..].iter().copied()).collect(),
        residual_coeffs,
        residual_norm,
        residual_se,
        eps_norm,
        eps_se,
        payoff_norm: rms(x),
        kappa_bound,
        gram_min_eigenvalue: min_eig,
        ridge: lambda,
        dropped,
        warnings,
    };
    Ok((result, remainder))
}
