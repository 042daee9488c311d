//! Forecasting toolkit for hourly arrival counts.
//!
//! The crate covers the full workflow for short-horizon demand forecasting
//! on a fixed hourly grid: series containers and differencing, stationarity
//! and residual diagnostics, classical seasonal decomposition, seasonal
//! ARIMA with exact Kalman likelihood and AIC/BIC order selection,
//! Holt-Winters and neural-autoregression comparators, accuracy metrics
//! with rolling-origin backtesting, and a seeded synthetic arrival
//! generator for end-to-end validation.

pub mod datagen;
pub mod decompose;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod holtwinters;
pub mod nnar;
pub mod numerics;
pub mod sarima;
pub mod series;

pub use error::{Error, Result};
pub use series::{GapPolicy, Series, SplitSpec};
