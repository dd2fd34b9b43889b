//! Signature volatility models end to end: weighted tensor algebra, Brownian path
//! signatures, the signature SDE as a stochastic exponential, truncated Riccati
//! transform flows and Monte Carlo GKW hedging.

pub mod fmt;
pub mod hedging;
pub mod models;
pub mod riccati;
pub mod sde;
pub mod signature;
pub mod stats;
pub mod tensor;
