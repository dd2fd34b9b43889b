//! Named parameter presets and kernel expansions into finitely supported `ℓ`.

use std::fmt;

use crate::sde::{SdeError, SigVolParams};
use crate::tensor::{DualElement, GradedTensor, TensorError, Weight, Word};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model preset: {0}")]
    UnknownPreset(String),
    #[error("preset {0} is metadata-only: no signature parameter is available")]
    MetadataOnly(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Sde(#[from] SdeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Finite(usize),
    Infinite,
    KernelDependent,
    Unspecified,
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(n) => write!(f, "{n}"),
            Depth::Infinite => f.write_str("+inf"),
            Depth::KernelDependent => f.write_str("kernel dependent"),
            Depth::Unspecified => f.write_str("unspecified"),
        }
    }
}

pub const PRESET_NAMES: [&str; 6] = [
    "black_scholes",
    "first_order",
    "heston_meta",
    "rough_bergomi_approx",
    "quintic_ou_approx",
    "guyon_lekeufack_approx",
];

#[derive(Clone, Debug)]
pub struct ModelPreset {
    pub name: &'static str,
    /// Row label of the depth table.
    pub table_name: &'static str,
    /// `None` for metadata-only presets.
    pub ell: Option<DualElement>,
    pub eta: Vec<f64>,
    pub weight: Weight,
    /// `(N_S^∗, K)`.
    pub depth_meta: (Depth, Depth),
    pub riccati_structure: &'static str,
    pub notes: &'static str,
    pub warning: Option<&'static str>,
}

impl ModelPreset {
    pub fn is_metadata_only(&self) -> bool {
        self.ell.is_none()
    }

    pub fn d(&self) -> usize {
        self.eta.len()
    }

    pub fn params(&self, s0: f64, horizon: f64, steps: usize) -> Result<SigVolParams, ModelError> {
        let ell = self.ell.clone().ok_or_else(|| ModelError::MetadataOnly(self.name.into()))?;
        Ok(SigVolParams::new(ell, self.weight.clone(), s0, self.eta.clone(), horizon, steps)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// `e^{−κu}`
    Exponential { kappa: f64 },
    /// `u^{H−1/2}`, Taylor-expanded around `u = 1`.
    Power { hurst: f64 },
}

impl Kernel {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Kernel::Exponential { kappa } => (-kappa * u).exp(),
            Kernel::Power { hurst } => u.powf(hurst - 0.5),
        }
    }

    /// Monomial coefficients `a_0..=a_degree` of the polynomial approximation.
    pub fn taylor(&self, degree: usize) -> Vec<f64> {
        match *self {
            Kernel::Exponential { kappa } => {
                let mut a = Vec::with_capacity(degree + 1);
                let mut c = 1.0;
                for k in 0..=degree {
                    a.push(c);
                    c *= -kappa / (k + 1) as f64;
                }
                a
            }
            Kernel::Power { hurst } => {
                // Σ_m binom(α,m)(u−1)^m, re-expanded into powers of u.
                let alpha = hurst - 0.5;
                let mut a = vec![0.0; degree + 1];
                let mut binom_alpha = 1.0;
                for m in 0..=degree {
                    let mut binom_m = 1.0;
                    for (i, slot) in a.iter_mut().enumerate().take(m + 1) {
                        let sign = if (m - i) % 2 == 0 { 1.0 } else { -1.0 };
                        *slot += binom_alpha * binom_m * sign;
                        binom_m *= (m - i) as f64 / (i + 1) as f64;
                    }
                    binom_alpha *= (alpha - m as f64) / (m + 1) as f64;
                }
                a
            }
        }
    }

    pub fn approx(&self, degree: usize, u: f64) -> f64 {
        self.taylor(degree).iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// Grid estimate of `sup_{0<u<=T} |K(u) − K_degree(u)|`.
    pub fn sup_error(&self, degree: usize, horizon: f64, grid: usize) -> f64 {
        (1..=grid)
            .map(|i| {
                let u = horizon * i as f64 / grid as f64;
                (self.eval(u) - self.approx(degree, u)).abs()
            })
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Kernel::Exponential { kappa } if !kappa.is_finite() => {
                Err(ModelError::InvalidKernel(format!("κ = {kappa}")))
            }
            Kernel::Power { hurst } if !(hurst > 0.0 && hurst < 1.0) => {
                Err(ModelError::InvalidKernel(format!("H = {hurst} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

/// `c·Σ_k a_k k!·e_{j 0^k}`: since `∫₀ᵗ(t−s)^k dW^j_s = k!⟨e_{j0^k},Ŵ_t⟩`, pairing with `Ŵ_t`
/// gives `c∫₀ᵗ K_degree(t−s) dW^j_s`.
pub fn kernel_expansion(
    kernel: Kernel,
    degree: usize,
    letter: u8,
    scale: f64,
    d: usize,
) -> Result<DualElement, ModelError> {
    kernel.validate()?;
    let mut fact = 1.0;
    let mut terms = Vec::with_capacity(degree + 1);
    for (k, a) in kernel.taylor(degree).into_iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        let mut letters = vec![letter];
        letters.extend(std::iter::repeat_n(0u8, k));
        terms.push((Word::new(letters), scale * a * fact));
    }
    Ok(GradedTensor::from_terms(d, degree + 1, terms)?)
}

/// `x^{⧢k}` truncated at `n`.
fn shuffle_power(x: &GradedTensor, k: usize, n: usize) -> Result<GradedTensor, TensorError> {
    let mut p = GradedTensor::unit(x.dim(), n);
    for _ in 0..k {
        p = p.shuffle(x, n)?;
    }
    Ok(p)
}

/// Polynomial `Σ_k g_k ⟨x,Ŵ⟩^k` as a single linear functional.
pub fn polynomial_functional(x: &GradedTensor, coeffs: &[f64], n: usize) -> Result<DualElement, ModelError> {
    let x = x.with_trunc(n)?;
    let mut out = GradedTensor::zero(x.dim(), n);
    for (k, g) in coeffs.iter().enumerate() {
        if *g != 0.0 {
            out = out.add(&shuffle_power(&x, k, n)?.scale(*g))?;
        }
    }
    Ok(out)
}

fn basis_combo(d: usize, trunc: usize, terms: &[(&[u8], f64)]) -> DualElement {
    GradedTensor::from_terms(d, trunc, terms.iter().map(|(w, c)| (Word::new(w.to_vec()), *c)))
        .expect("preset words are valid")
}

pub fn preset(name: &str) -> Result<ModelPreset, ModelError> {
    let geometric = Weight::geometric(2.0);
    let p = match name {
        "black_scholes" => ModelPreset {
            name: "black_scholes",
            table_name: "Black--Scholes",
            ell: Some(basis_combo(1, 0, &[(&[], 0.2)])),
            eta: vec![1.0],
            weight: geometric,
            depth_meta: (Depth::Finite(0), Depth::Finite(1)),
            riccati_structure: "scalar, constant coefficient",
            notes: "ℓ = σe_∅ with σ = 0.2; d = 1",
            warning: None,
        },
        "first_order" => ModelPreset {
            name: "first_order",
            table_name: "First-order Brownian-driven volatility",
            ell: Some(basis_combo(2, 1, &[(&[], 0.2), (&[2], 0.1)])),
            eta: vec![1.0, 0.0],
            weight: geometric,
            depth_meta: (Depth::Finite(1), Depth::Finite(2)),
            riccati_structure: "finite level-one subsystem",
            notes: "ℓ = σ₀e_∅ + σ₁e_2 with (σ₀, σ₁) = (0.2, 0.1); price driven by W¹ (η = e_1); values are configuration",
            warning: None,
        },
        "heston_meta" => ModelPreset {
            name: "heston_meta",
            table_name: "Heston",
            ell: None,
            eta: vec![1.0, 0.0],
            weight: geometric,
            depth_meta: (Depth::Finite(2), Depth::Finite(4)),
            riccati_structure: "classical two-factor affine Riccati",
            notes: "metadata only: no explicit embedding coefficients are available",
            warning: Some("metadata-only preset; cannot be simulated"),
        },
        "rough_bergomi_approx" => ModelPreset {
            name: "rough_bergomi_approx",
            table_name: "Rough Bergomi",
            ell: Some(
                kernel_expansion(Kernel::Power { hurst: 0.1 }, 4, 2, 0.1, 2)?
                    .add(&basis_combo(2, 5, &[(&[], 0.2)]))?,
            ),
            eta: vec![1.0, 0.0],
            weight: geometric,
            depth_meta: (Depth::Infinite, Depth::Infinite),
            riccati_structure: "infinite Volterra/signature system",
            notes: "ℓ = σ₀e_∅ + ν·(power kernel u^{H−1/2}, H = 0.1, Taylor degree 4 around u = 1); linearized volatility",
            warning: Some("power-kernel expansion is a poor approximation near u = 0; demonstrates infinite effective depth only"),
        },
        "quintic_ou_approx" => {
            let factor = basis_combo(2, 1, &[(&[2], 0.5)]);
            let g = [0.01, 1.0, 0.0, 0.214, 0.0, 0.227];
            let poly = polynomial_functional(&factor, &g, 5)?;
            ModelPreset {
                name: "quintic_ou_approx",
                table_name: "Quintic OU",
                ell: Some(poly.scale(0.2)),
                eta: vec![1.0, 0.0],
                weight: geometric,
                depth_meta: (Depth::Finite(5), Depth::Unspecified),
                riccati_structure: "finite polynomial subsystem",
                notes: "ξ = 0.2·p(X), p(x) = 0.01 + x + 0.214x³ + 0.227x⁵, X = 0.5·W²; degree-0 kernel keeps support at depth five",
                warning: None,
            }
        }
        "guyon_lekeufack_approx" => ModelPreset {
            name: "guyon_lekeufack_approx",
            table_name: "Guyon--Lekeufack PDV",
            ell: Some(
                kernel_expansion(Kernel::Exponential { kappa: 2.0 }, 4, 1, -0.1, 1)?
                    .add(&basis_combo(1, 5, &[(&[], 0.2)]))?,
            ),
            eta: vec![1.0],
            weight: geometric,
            depth_meta: (Depth::KernelDependent, Depth::KernelDependent),
            riccati_structure: "finite or infinite kernel expansion",
            notes: "ξ = σ₀ − β∫e^{−κ(t−s)}dW_s with (σ₀, β, κ) = (0.2, 0.1, 2), kernel Taylor degree 4; one factor",
            warning: None,
        },
        other => return Err(ModelError::UnknownPreset(other.into())),
    };
    Ok(p)
}
