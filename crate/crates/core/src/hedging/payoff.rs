use super::HedgeError;
use crate::sde::PricePath;

#[derive(Clone, Debug, PartialEq)]
pub enum Payoff {
    /// `1{S_T >= K}`
    Digital { strike: f64 },
    /// `∫ξ² ds` (left-point sum)
    VarianceSwap,
    /// `(T^{-1}∫S dt − K)^+`, trapezoid average
    Asian { strike: f64 },
    /// `(S_T − K)^+`
    Call { strike: f64 },
    /// `S_T`
    Forward,
}

impl Payoff {
    /// Parses `call:K=1`, `digital:K=1.1`, `asian:K=1`, `variance_swap`, `forward`.
    pub fn parse(spec: &str) -> Result<Payoff, HedgeError> {
        let spec = spec.trim();
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let strike = || -> Result<f64, HedgeError> {
            let v = rest
                .strip_prefix("K=")
                .ok_or_else(|| HedgeError::UnknownPayoff(format!("{spec}: expected {kind}:K=<strike>")))?;
            v.parse::<f64>().map_err(|_| HedgeError::UnknownPayoff(format!("{spec}: bad strike")))
        };
        match kind {
            "digital" => Ok(Payoff::Digital { strike: strike()? }),
            "asian" => Ok(Payoff::Asian { strike: strike()? }),
            "call" => Ok(Payoff::Call { strike: strike()? }),
            "variance_swap" if rest.is_empty() => Ok(Payoff::VarianceSwap),
            "forward" if rest.is_empty() => Ok(Payoff::Forward),
            _ => Err(HedgeError::UnknownPayoff(spec.to_string())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Payoff::Digital { strike } => format!("digital:K={strike}"),
            Payoff::VarianceSwap => "variance_swap".into(),
            Payoff::Asian { strike } => format!("asian:K={strike}"),
            Payoff::Call { strike } => format!("call:K={strike}"),
            Payoff::Forward => "forward".into(),
        }
    }

    pub fn value(&self, p: &PricePath) -> f64 {
        let st = p.terminal();
        match self {
            Payoff::Digital { strike } => f64::from(u8::from(st >= *strike)),
            Payoff::VarianceSwap => *p.qv.last().expect("non-empty path"),
            Payoff::Asian { strike } => {
                let t = &p.times;
                let span = t[t.len() - 1] - t[0];
                let integral: f64 = (0..t.len() - 1).map(|k| 0.5 * (p.s[k] + p.s[k + 1]) * (t[k + 1] - t[k])).sum();
                (integral / span - strike).max(0.0)
            }
            Payoff::Call { strike } => (st - strike).max(0.0),
            Payoff::Forward => st,
        }
    }
}
