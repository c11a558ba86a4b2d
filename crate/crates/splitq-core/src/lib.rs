//! Extreme quantile estimation of a latent strength from binary exceedance
//! data: GPD and Weibull tail models on the inverted scale, the splitting
//! ladder with its enhanced estimator, three baseline procedures, a seeded
//! Monte Carlo harness and misspecification bounds.

pub mod baselines;
pub mod distributions;
pub mod estimators;
pub mod robustness;
pub mod simulation;
pub mod splitting;
