//! Command-line surface.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "edcast",
    version,
    about = "Hourly arrival-count forecasting: generate, diagnose, fit, forecast, evaluate"
)]
pub struct Cli {
    /// Seed for every random choice (generation, restarts, bootstrap).
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a synthetic hourly arrival series from a config file.
    Generate(GenerateArgs),
    /// Classical additive decomposition and periodic mean profiles.
    Decompose(DecomposeArgs),
    /// Stationarity, autocorrelation, and normality test battery.
    Diagnose(DiagnoseArgs),
    /// Fit a seasonal ARIMA of a fixed order.
    Fit(FitArgs),
    /// Search (p,d,q)(P,D,Q) orders by AIC/BIC and fit the best.
    Select(SelectArgs),
    /// Forecast from a persisted model with prediction intervals.
    Forecast(ForecastArgs),
    /// Score one model specification on a train/test split.
    Evaluate(EvaluateArgs),
    /// Score several model families side by side.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Generator config (flat key/value file; see configs/ed_default.toml).
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV (`timestamp,value`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GapPolicyArg {
    Error,
    ZeroFill,
    Interpolate,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Input series CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Seasonal period in steps (24 for hourly data with a daily cycle).
    #[arg(long, default_value_t = 24)]
    pub period: usize,
    /// Component CSV: `timestamp,observed,trend,seasonal,remainder`.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional four-panel SVG chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Emit the mean 24-hour profile (one average day) as CSV.
    #[arg(long = "daily-profile")]
    pub daily_profile: Option<PathBuf>,
    /// Emit the mean 30-day profile of daily sums (one average month) as CSV.
    #[arg(long = "monthly-profile")]
    pub monthly_profile: Option<PathBuf>,
    /// How to resolve gaps when reading the input.
    #[arg(long, value_enum, default_value_t = GapPolicyArg::Error)]
    pub gaps: GapPolicyArg,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Regular differencing applied for the `differenced` section.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Seasonal period; sets the Ljung-Box default lag to 2s.
    #[arg(long)]
    pub period: Option<usize>,
    /// Output report JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GapPolicyArg::Error)]
    pub gaps: GapPolicyArg,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Order as `p,d,q,P,D,Q,s` (for example `3,0,0,2,1,0,24`).
    #[arg(long)]
    pub order: String,
    /// Mean handling: include iff d+D=0 (`auto`), always, or never.
    #[arg(long, default_value = "auto")]
    pub mean: String,
    /// Output model JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GapPolicyArg::Error)]
    pub gaps: GapPolicyArg,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Seasonal period (0 = non-seasonal).
    #[arg(long, default_value_t = 24)]
    pub s: usize,
    #[arg(long, default_value = "aic")]
    pub criterion: String,
    /// `stepwise` or `full-grid`.
    #[arg(long, default_value = "stepwise")]
    pub strategy: String,
    #[arg(long = "max-p", default_value_t = 5)]
    pub max_p: usize,
    #[arg(long = "max-q", default_value_t = 5)]
    pub max_q: usize,
    #[arg(long = "max-P", default_value_t = 2)]
    pub max_cap_p: usize,
    #[arg(long = "max-Q", default_value_t = 2)]
    pub max_cap_q: usize,
    #[arg(long = "max-d", default_value_t = 2)]
    pub max_d: usize,
    #[arg(long = "max-D", default_value_t = 1)]
    pub max_cap_d: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GapPolicyArg::Error)]
    pub gaps: GapPolicyArg,
}

#[derive(Args, Debug)]
pub struct ForecastArgs {
    /// Persisted model JSON (from `fit` or `select`).
    #[arg(long)]
    pub model: PathBuf,
    /// Forecast horizon in steps.
    #[arg(long = "h")]
    pub horizon: usize,
    /// Confidence levels in percent, comma separated (e.g. `10,20,80,95,99`).
    #[arg(long, default_value = "80,95")]
    pub levels: String,
    /// Output CSV: `timestamp,point,lo<level>,hi<level>,..`.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional SVG chart with nested interval bands.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Train/test boundary timestamp (test starts here).
    #[arg(long)]
    pub split: String,
    /// Model to score, e.g. `sarima:3,0,0,2,1,0,24`, `sarima:auto,s=24`,
    /// `hw:24,additive`, or `nnar:p=2,P=1,s=24`.
    #[arg(long = "model-spec")]
    pub model_spec: String,
    /// `holdout` (one multi-step forecast), `rolling` (refit each origin),
    /// or `both`.
    #[arg(long, default_value = "both")]
    pub mode: String,
    /// Rolling horizon.
    #[arg(long = "h", default_value_t = 1)]
    pub horizon: usize,
    /// Rolling origin step.
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GapPolicyArg::Error)]
    pub gaps: GapPolicyArg,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub split: String,
    /// Comma list of families: `sarima,hw,nnar`.
    #[arg(long, default_value = "sarima,hw,nnar")]
    pub models: String,
    /// Seasonal period shared by the families.
    #[arg(long, default_value_t = 24)]
    pub s: usize,
    #[arg(long, default_value = "aic")]
    pub criterion: String,
    #[arg(long, default_value = "both")]
    pub mode: String,
    #[arg(long = "h", default_value_t = 1)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    /// Non-seasonal and seasonal NNAR lags.
    #[arg(long = "nnar-p", default_value_t = 2)]
    pub nnar_p: usize,
    #[arg(long = "nnar-P", default_value_t = 1)]
    pub nnar_cap_p: usize,
    /// NNAR training restarts averaged into the ensemble.
    #[arg(long = "nnar-restarts", default_value_t = 20)]
    pub nnar_restarts: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GapPolicyArg::Error)]
    pub gaps: GapPolicyArg,
}
