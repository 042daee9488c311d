//! Seeded synthetic hourly arrival generator.
//!
//! A non-homogeneous Poisson process whose rate combines a base level,
//! a compounding yearly trend, hour-of-day and day-of-week multiplier
//! profiles (each mean 1), and a sinusoidal annual cycle:
//!
//! ```text
//! lambda(t) = base * (1 + trend/100)^years(t) * diurnal[hour(t)]
//!             * dow[weekday(t)] * (1 + amplitude * sin(2 pi doy(t) / 365.25))
//! ```
//!
//! Counts are Poisson draws from a ChaCha stream, so every series is
//! reproducible from its config and seed. The shipped default config
//! (`configs/ed_default.toml`) mirrors [`ArrivalGenConfig::default`].

use chrono::{Datelike, NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Series, TIMESTAMP_FORMAT};

/// Innovation model for the generator (counts are Poisson draws).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Poisson,
}

/// Parameters of the synthetic arrival process.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalGenConfig {
    pub start: NaiveDateTime,
    pub n_hours: usize,
    /// Average arrivals per hour before multipliers.
    pub base_rate: f64,
    /// Yearly growth in percent (5.0 means +5%/year, compounded).
    pub trend_pct_per_year: f64,
    /// 24 hour-of-day multipliers, mean 1.
    pub diurnal: Vec<f64>,
    /// 7 day-of-week multipliers (Monday first), mean 1.
    pub day_of_week: Vec<f64>,
    /// Amplitude of the sinusoidal annual cycle, in [0, 1).
    pub annual_amplitude: f64,
    pub noise: NoiseKind,
    pub seed: u64,
}

impl Default for ArrivalGenConfig {
    fn default() -> Self {
        Self {
            start: NaiveDateTime::parse_from_str("2014-01-01T00:00:00", TIMESTAMP_FORMAT)
                .expect("valid default start"),
            n_hours: 1440,
            base_rate: 6.0,
            trend_pct_per_year: 5.0,
            diurnal: vec![
                0.32, 0.25, 0.20, 0.18, 0.17, 0.18, 0.28, 0.50, 0.90, 1.30, 1.60, 1.75, 1.88,
                1.70, 1.72, 1.65, 1.58, 1.50, 1.45, 1.38, 1.25, 1.05, 0.75, 0.46,
            ],
            day_of_week: vec![1.10, 1.05, 1.00, 0.98, 0.97, 0.95, 0.95],
            annual_amplitude: 0.10,
            noise: NoiseKind::Poisson,
            seed: 42,
        }
    }
}

impl ArrivalGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_hours < 1 {
            return Err(Error::InvalidConfig("n_hours must be >= 1".into()));
        }
        if !(self.base_rate > 0.0) {
            return Err(Error::InvalidConfig("base_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.annual_amplitude) {
            return Err(Error::InvalidConfig(
                "annual_amplitude must be in [0, 1)".into(),
            ));
        }
        check_multipliers("diurnal", &self.diurnal, 24)?;
        check_multipliers("day_of_week", &self.day_of_week, 7)?;
        Ok(())
    }

    /// The deterministic rate at hour index `i`.
    pub fn rate_at(&self, i: usize) -> f64 {
        let ts = self.start + chrono::Duration::hours(i as i64);
        let years = i as f64 / (24.0 * 365.25);
        let trend = (1.0 + self.trend_pct_per_year / 100.0).powf(years);
        let diurnal = self.diurnal[ts.hour() as usize];
        let dow = self.day_of_week[ts.weekday().num_days_from_monday() as usize];
        let annual = 1.0
            + self.annual_amplitude
                * (std::f64::consts::TAU * ts.ordinal() as f64 / 365.25).sin();
        self.base_rate * trend * diurnal * dow * annual
    }
}

fn check_multipliers(name: &str, values: &[f64], expect_len: usize) -> Result<()> {
    if values.len() != expect_len {
        return Err(Error::InvalidConfig(format!(
            "{name} needs {expect_len} entries, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "{name} multipliers must be positive"
        )));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if (mean - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "{name} multipliers must have mean 1 (got {mean})"
        )));
    }
    Ok(())
}

/// Draws the synthetic arrival series. Deterministic per seed.
pub fn generate_arrivals(config: &ArrivalGenConfig) -> Result<Series> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut values = Vec::with_capacity(config.n_hours);
    for i in 0..config.n_hours {
        let lambda = config.rate_at(i);
        let NoiseKind::Poisson = config.noise;
        let draw: f64 = Poisson::new(lambda)
            .map_err(|e| Error::InvalidConfig(format!("bad rate {lambda}: {e}")))?
            .sample(&mut rng);
        values.push(draw);
    }
    Series::hourly(config.start, values, "synthetic_arrivals")
}

/// On-disk form: flat keys mirroring the config fields; missing keys
/// fall back to the defaults.
#[derive(Debug, Serialize, Deserialize)]
struct RawConfig {
    #[serde(default = "default_start_string")]
    start: String,
    #[serde(default = "default_n_hours")]
    n_hours: usize,
    #[serde(default = "default_base_rate")]
    base_rate: f64,
    #[serde(default = "default_trend")]
    trend_pct_per_year: f64,
    #[serde(default = "default_diurnal")]
    diurnal: Vec<f64>,
    #[serde(default = "default_day_of_week")]
    day_of_week: Vec<f64>,
    #[serde(default = "default_annual_amplitude")]
    annual_amplitude: f64,
    #[serde(default = "default_noise")]
    noise: NoiseKind,
    #[serde(default = "default_seed")]
    seed: u64,
}

fn default_start_string() -> String {
    ArrivalGenConfig::default()
        .start
        .format(TIMESTAMP_FORMAT)
        .to_string()
}
fn default_n_hours() -> usize {
    ArrivalGenConfig::default().n_hours
}
fn default_base_rate() -> f64 {
    ArrivalGenConfig::default().base_rate
}
fn default_trend() -> f64 {
    ArrivalGenConfig::default().trend_pct_per_year
}
fn default_diurnal() -> Vec<f64> {
    ArrivalGenConfig::default().diurnal
}
fn default_day_of_week() -> Vec<f64> {
    ArrivalGenConfig::default().day_of_week
}
fn default_annual_amplitude() -> f64 {
    ArrivalGenConfig::default().annual_amplitude
}
fn default_noise() -> NoiseKind {
    NoiseKind::Poisson
}
fn default_seed() -> u64 {
    ArrivalGenConfig::default().seed
}

/// Parses the flat key/value config format.
pub fn parse_config(text: &str) -> Result<ArrivalGenConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config parse: {e}")))?;
    let start = NaiveDateTime::parse_from_str(&raw.start, TIMESTAMP_FORMAT)
        .map_err(|e| Error::InvalidConfig(format!("bad start timestamp `{}`: {e}", raw.start)))?;
    let config = ArrivalGenConfig {
        start,
        n_hours: raw.n_hours,
        base_rate: raw.base_rate,
        trend_pct_per_year: raw.trend_pct_per_year,
        diurnal: raw.diurnal,
        day_of_week: raw.day_of_week,
        annual_amplitude: raw.annual_amplitude,
        noise: raw.noise,
        seed: raw.seed,
    };
    config.validate()?;
    Ok(config)
}

/// Serializes a config in the on-disk format.
pub fn format_config(config: &ArrivalGenConfig) -> String {
    let raw = RawConfig {
        start: config.start.format(TIMESTAMP_FORMAT).to_string(),
        n_hours: config.n_hours,
        base_rate: config.base_rate,
        trend_pct_per_year: config.trend_pct_per_year,
        diurnal: config.diurnal.clone(),
        day_of_week: config.day_of_week.clone(),
        annual_amplitude: config.annual_amplitude,
        noise: config.noise,
        seed: config.seed,
    };
    toml::to_string(&raw).expect("config serializes")
}
