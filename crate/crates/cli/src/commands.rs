//! Subcommand implementations and the exit-code contract:
//! 0 success, 1 domain error (module error text on stderr), 2 usage/IO.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDateTime};

use edcast_core::datagen;
use edcast_core::decompose::{classical_decompose, mean_profile};
use edcast_core::diagnostics::{
    adf_test, anderson_darling, default_ljung_box_lag, jarque_bera, kpss_test, ljung_box, pacf,
    AdfTrend,
};
use edcast_core::evaluation::{
    interval_coverage, mean_error, rmse, rolling_origin_backtest, EvalReport, ForecastModel,
    HwSpec, NnarSpec, SarimaSpec,
};
use edcast_core::holtwinters::HwVariant;
use edcast_core::sarima::{
    auto_select, fit as sarima_fit, forecast as sarima_forecast, model_from_json, model_to_json,
    Criterion, MeanPolicy, SarimaOrder, SearchStrategy, SelectBounds,
};
use edcast_core::series::{
    format_series_csv, from_records, parse_series_csv, Series, SplitSpec, TIMESTAMP_FORMAT,
};
use edcast_core::{diagnostics, Error as CoreError, GapPolicy};

use crate::args::{
    Cli, Command, CompareArgs, DecomposeArgs, DiagnoseArgs, EvaluateArgs, FitArgs, ForecastArgs,
    GapPolicyArg, GenerateArgs, SelectArgs,
};
use crate::report::{DiagnosticReport, Section, SeriesMeta};
use crate::svg;

#[derive(Debug)]
pub enum CliError {
    /// Library-level failure: bad data, unattainable fit, bad model.
    Domain(CoreError),
    /// File-system failure; the message names the path.
    Io { path: PathBuf, message: String },
    /// Malformed command-line values outside clap's own parsing.
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Io { .. } | CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Decompose(args) => decompose(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Fit(args) => fit_command(args),
        Command::Select(args) => select_command(args),
        Command::Forecast(args) => forecast_command(args),
        Command::Evaluate(args) => evaluate_command(args, cli.seed),
        Command::Compare(args) => compare_command(args, cli.seed),
    }
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    fs::write(path, content).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn gap_policy(arg: GapPolicyArg) -> GapPolicy {
    match arg {
        GapPolicyArg::Error => GapPolicy::Error,
        GapPolicyArg::ZeroFill => GapPolicy::ZeroFill,
        GapPolicyArg::Interpolate => GapPolicy::LinearInterpolate,
    }
}

/// Reads a series CSV, inferring the grid step from the smallest
/// timestamp delta (hourly files and the daily-sum profile outputs both
/// round-trip through this).
fn read_series(path: &Path, gaps: GapPolicyArg) -> CliResult<Series> {
    let text = read_file(path)?;
    let step = infer_step(&text).unwrap_or_else(|| Duration::hours(1));
    let series = parse_series_csv(&text, step, gap_policy(gaps))?;
    Ok(series.with_label(
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into()),
    ))
}

fn infer_step(text: &str) -> Option<Duration> {
    let mut stamps: Vec<NaiveDateTime> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .filter_map(|l| {
            NaiveDateTime::parse_from_str(l.split(',').next()?, TIMESTAMP_FORMAT).ok()
        })
        .collect();
    stamps.sort();
    let min_delta = stamps
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > Duration::zero())
        .min()?;
    Some(min_delta)
}

fn parse_timestamp(text: &str) -> CliResult<NaiveDateTime> {
    NaiveDateTime::parse_from_str(text, TIMESTAMP_FORMAT)
        .map_err(|e| CliError::Usage(format!("bad timestamp `{text}`: {e}")))
}

fn fmt_ts(ts: NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn generate(args: GenerateArgs) -> CliResult<()> {
    let text = read_file(&args.config)?;
    let config = datagen::parse_config(&text)?;
    let series = datagen::generate_arrivals(&config)?;
    write_file(&args.out, &format_series_csv(&series))?;
    println!(
        "wrote {} ({} hourly values, seed {})",
        args.out.display(),
        series.len(),
        config.seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

fn decompose(args: DecomposeArgs) -> CliResult<()> {
    let series = read_series(&args.input, args.gaps)?;
    let d = classical_decompose(&series, args.period)?;

    let mut out = String::from("timestamp,observed,trend,seasonal,remainder\n");
    for i in 0..series.len() {
        let trend = d.trend[i].map(|v| v.to_string()).unwrap_or_default();
        let rem = d.remainder[i].map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_ts(series.timestamp(i)),
            d.observed[i],
            trend,
            d.seasonal[i],
            rem
        ));
    }
    write_file(&args.out, &out)?;

    if let Some(path) = &args.daily_profile {
        let profile = mean_profile(&series, 24)?;
        write_profile(path, &series, &profile)?;
    }
    if let Some(path) = &args.monthly_profile {
        let daily = daily_sums(&series)?;
        let profile = mean_profile(&daily, 30)?;
        write_profile(path, &daily, &profile)?;
    }
    if let Some(path) = &args.svg {
        write_file(path, &svg::decomposition_svg(&d))?;
    }
    println!(
        "wrote {} (period {}, seasonal strength {:.3})",
        args.out.display(),
        args.period,
        d.seasonal_strength()
    );
    Ok(())
}

/// Profile CSV: one cycle anchored at the series start, re-ingestible
/// as a plain series.
fn write_profile(path: &Path, series: &Series, profile: &[f64]) -> CliResult<()> {
    let mut out = String::from("timestamp,value\n");
    for (j, v) in profile.iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt_ts(series.timestamp(j)), v));
    }
    write_file(path, &out)
}

/// Aggregates an hourly series into sums over complete calendar days.
fn daily_sums(series: &Series) -> CliResult<Series> {
    if series.step() != Duration::hours(1) {
        return Err(CliError::Usage(
            "monthly profile needs an hourly input series".into(),
        ));
    }
    let mut records: Vec<(NaiveDateTime, f64)> = Vec::new();
    let mut current_day = None;
    let mut sum = 0.0;
    let mut count = 0;
    for i in 0..series.len() {
        let ts = series.timestamp(i);
        let day = ts.date();
        if current_day != Some(day) {
            if let Some(prev) = current_day {
                if count == 24 {
                    records.push((prev.and_hms_opt(0, 0, 0).unwrap(), sum));
                }
            }
            current_day = Some(day);
            sum = 0.0;
            count = 0;
        }
        sum += series.values()[i];
        count += 1;
    }
    if let (Some(day), 24) = (current_day, count) {
        records.push((day.and_hms_opt(0, 0, 0).unwrap(), sum));
    }
    if records.is_empty() {
        return Err(CliError::Domain(CoreError::SeriesTooShort {
            needed: 24,
            actual: series.len(),
        }));
    }
    let daily = from_records(&records, Duration::days(1), GapPolicy::Error)?;
    Ok(daily.with_label(format!("{}_daily", series.label())))
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

fn diagnose(args: DiagnoseArgs) -> CliResult<()> {
    let series = read_series(&args.input, args.gaps)?;
    let raw = diagnostic_section(&series, 0, args.period)?;
    let differenced_series = series.difference(1, args.d)?;
    let differenced = diagnostic_section(&differenced_series, args.d, args.period)?;

    let report = DiagnosticReport {
        report_version: 1,
        series: SeriesMeta {
            label: series.label().to_string(),
            start: fmt_ts(series.start()),
            step_seconds: series.step().num_seconds(),
            n: series.len(),
        },
        alpha: 0.05,
        raw,
        differenced,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&args.out, &json)?;
    println!("wrote {} (5 tests on raw and d={} series)", args.out.display(), args.d);
    Ok(())
}

fn diagnostic_section(
    series: &Series,
    d: usize,
    period: Option<usize>,
) -> CliResult<Section> {
    let n = series.len();
    let lb_lag = default_ljung_box_lag(n, period).min(n.saturating_sub(2)).max(1);
    let tests = vec![
        kpss_test(series, None)?,
        adf_test(series, None, AdfTrend::ConstantAndTrend)?,
        ljung_box(series, lb_lag, 0)?,
        jarque_bera(series)?,
        anderson_darling(series)?,
    ];
    let max_lag = 48.min(n.saturating_sub(2)).max(1);
    Ok(Section {
        d,
        tests,
        acf: diagnostics::acf(series, max_lag)?,
        pacf: pacf(series, max_lag)?,
    })
}

// ---------------------------------------------------------------------------
// fit / select
// ---------------------------------------------------------------------------

fn parse_order(text: &str) -> CliResult<SarimaOrder> {
    let parts: Result<Vec<usize>, _> = text.split(',').map(|p| p.trim().parse()).collect();
    let parts = parts.map_err(|_| {
        CliError::Usage(format!(
            "bad order `{text}`: expected integers `p,d,q,P,D,Q,s` or `p,d,q`"
        ))
    })?;
    let order = match parts.as_slice() {
        [p, d, q] => SarimaOrder::new(*p, *d, *q),
        [p, d, q, cp, cd, cq, s] => SarimaOrder::seasonal(*p, *d, *q, *cp, *cd, *cq, *s)?,
        _ => {
            return Err(CliError::Usage(format!(
                "bad order `{text}`: expected 3 or 7 comma-separated integers"
            )))
        }
    };
    Ok(order)
}

fn parse_mean(text: &str) -> CliResult<MeanPolicy> {
    match text {
        "auto" => Ok(MeanPolicy::Auto),
        "on" => Ok(MeanPolicy::On),
        "off" => Ok(MeanPolicy::Off),
        other => Err(CliError::Usage(format!(
            "bad mean policy `{other}`: expected auto|on|off"
        ))),
    }
}

fn parse_criterion(text: &str) -> CliResult<Criterion> {
    match text {
        "aic" => Ok(Criterion::Aic),
        "bic" => Ok(Criterion::Bic),
        other => Err(CliError::Usage(format!(
            "bad criterion `{other}`: expected aic|bic"
        ))),
    }
}

fn parse_strategy(text: &str) -> CliResult<SearchStrategy> {
    match text {
        "stepwise" => Ok(SearchStrategy::Stepwise),
        "full-grid" => Ok(SearchStrategy::FullGrid),
        other => Err(CliError::Usage(format!(
            "bad strategy `{other}`: expected stepwise|full-grid"
        ))),
    }
}

fn fit_command(args: FitArgs) -> CliResult<()> {
    let series = read_series(&args.input, args.gaps)?;
    let order = parse_order(&args.order)?;
    let mean = parse_mean(&args.mean)?;
    let fit = sarima_fit(&series, &order, mean)?;
    write_file(&args.out, &model_to_json(&fit))?;
    println!(
        "wrote {} ({}, loglik {:.3}, aic {:.3}, bic {:.3}, converged {})",
        args.out.display(),
        fit.model_label(),
        fit.loglik,
        fit.aic,
        fit.bic,
        fit.converged
    );
    Ok(())
}

fn select_command(args: SelectArgs) -> CliResult<()> {
    let series = read_series(&args.input, args.gaps)?;
    let bounds = SelectBounds {
        max_p: args.max_p,
        max_q: args.max_q,
        max_cap_p: args.max_cap_p,
        max_cap_q: args.max_cap_q,
        max_d: args.max_d,
        max_cap_d: args.max_cap_d,
    };
    let criterion = parse_criterion(&args.criterion)?;
    let strategy = parse_strategy(&args.strategy)?;
    if strategy == SearchStrategy::FullGrid && (args.max_p > 8 || args.max_q > 8) {
        eprintln!(
            "note: full grid up to p={}, q={} fits {} candidates; this can take a while",
            args.max_p,
            args.max_q,
            (args.max_p + 1)
                * (args.max_q + 1)
                * (args.max_cap_p + 1)
                * (args.max_cap_q + 1)
        );
    }
    let best = auto_select(&series, args.s, &bounds, criterion, strategy)?;
    write_file(&args.out, &model_to_json(&best))?;
    println!(
        "wrote {} ({}, aic {:.3}, bic {:.3})",
        args.out.display(),
        best.model_label(),
        best.aic,
        best.bic
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

fn parse_levels(text: &str) -> CliResult<Vec<f64>> {
    let mut levels = Vec::new();
    for part in text.split(',') {
        let pct: f64 = part.trim().parse().map_err(|_| {
            CliError::Usage(format!("bad level `{part}`: expected percentages like 80,95"))
        })?;
        levels.push(pct / 100.0);
    }
    Ok(levels)
}

fn level_label(gamma: f64) -> String {
    let pct = gamma * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}

fn forecast_command(args: ForecastArgs) -> CliResult<()> {
    let model = model_from_json(&read_file(&args.model)?)?;
    let levels = parse_levels(&args.levels)?;
    let fc = sarima_forecast(&model, args.horizon, &levels)?;

    let mut header = String::from("timestamp,point");
    for gamma in &fc.levels {
        let label = level_label(*gamma);
        header.push_str(&format!(",lo{label},hi{label}"));
    }
    let mut out = header;
    out.push('\n');
    for j in 0..fc.horizon {
        out.push_str(&format!("{},{}", fmt_ts(fc.timestamp(j)), fc.points[j]));
        for li in 0..fc.levels.len() {
            out.push_str(&format!(",{},{}", fc.lower[li][j], fc.upper[li][j]));
        }
        out.push('\n');
    }
    write_file(&args.out, &out)?;

    if let Some(path) = &args.svg {
        let history = model.history();
        let tail = history.values().len().saturating_sub(4 * args.horizon.max(42));
        write_file(path, &svg::forecast_svg(&history.values()[tail..], &fc))?;
    }
    println!(
        "wrote {} ({} steps, levels {})",
        args.out.display(),
        fc.horizon,
        fc.levels
            .iter()
            .map(|g| level_label(*g))
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate / compare
// ---------------------------------------------------------------------------

const REPORT_LEVELS: [f64; 2] = [0.80, 0.95];

struct EvalRow {
    model: String,
    me: f64,
    rmse: f64,
    coverage_80: f64,
    coverage_95: f64,
    n: usize,
}

fn eval_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from("model,me,rmse,coverage_80,coverage_95,n\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.model, r.me, r.rmse, r.coverage_80, r.coverage_95, r.n
        ));
    }
    out
}

fn coverage_at(coverage: &[(f64, f64)], level: f64) -> f64 {
    coverage
        .iter()
        .find(|(l, _)| (l - level).abs() < 1e-9)
        .map(|(_, f)| *f)
        .unwrap_or(f64::NAN)
}

fn holdout_row(
    spec: &dyn ForecastModel,
    train: &Series,
    test: &Series,
) -> CliResult<EvalRow> {
    let fc = spec.fit_and_forecast(train, test.len(), &REPORT_LEVELS)?;
    let cov = interval_coverage(test, &fc)?;
    Ok(EvalRow {
        model: format!("{}:holdout", spec.name()),
        me: mean_error(test, &fc.points)?,
        rmse: rmse(test, &fc.points)?,
        coverage_80: coverage_at(&cov, 0.80),
        coverage_95: coverage_at(&cov, 0.95),
        n: test.len(),
    })
}

fn rolling_row(
    spec: &dyn ForecastModel,
    full: &Series,
    first_origin: usize,
    step: usize,
    h: usize,
) -> CliResult<EvalRow> {
    let report: EvalReport =
        rolling_origin_backtest(full, spec, first_origin, step, h, &REPORT_LEVELS)?;
    Ok(EvalRow {
        model: format!("{}:rolling-h{}", spec.name(), h),
        me: report.me,
        rmse: report.rmse,
        coverage_80: coverage_at(&report.coverage, 0.80),
        coverage_95: coverage_at(&report.coverage, 0.95),
        n: report.n_points,
    })
}

enum EvalMode {
    Holdout,
    Rolling,
    Both,
}

fn parse_mode(text: &str) -> CliResult<EvalMode> {
    match text {
        "holdout" => Ok(EvalMode::Holdout),
        "rolling" => Ok(EvalMode::Rolling),
        "both" => Ok(EvalMode::Both),
        other => Err(CliError::Usage(format!(
            "bad mode `{other}`: expected holdout|rolling|both"
        ))),
    }
}

fn spec_rows(
    spec: &dyn ForecastModel,
    mode: &EvalMode,
    series: &Series,
    train: &Series,
    test: &Series,
    split_idx: usize,
    step: usize,
    h: usize,
) -> CliResult<Vec<EvalRow>> {
    let mut rows = Vec::new();
    if matches!(mode, EvalMode::Holdout | EvalMode::Both) {
        rows.push(holdout_row(spec, train, test)?);
    }
    if matches!(mode, EvalMode::Rolling | EvalMode::Both) {
        rows.push(rolling_row(spec, series, split_idx, step, h)?);
    }
    Ok(rows)
}

/// Parses `key=value` options after the model family tag.
fn parse_kv(parts: &[&str]) -> CliResult<Vec<(String, String)>> {
    parts
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("bad model-spec option `{p}`: expected key=value"))
            })?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn parse_usize(v: &str, what: &str) -> CliResult<usize> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("bad {what} `{v}`: expected an integer")))
}

/// Builds a refittable model from a `--model-spec` string. Auto-selected
/// SARIMA orders are chosen once on the training part.
fn build_model_spec(
    text: &str,
    train: &Series,
    seed: u64,
) -> CliResult<Box<dyn ForecastModel>> {
    let (family, rest) = text.split_once(':').unwrap_or((text, ""));
    let parts: Vec<&str> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',').collect()
    };
    match family {
        "sarima" => {
            if parts.first() == Some(&"auto") {
                let mut s = 24;
                let mut criterion = Criterion::Aic;
                let mut strategy = SearchStrategy::Stepwise;
                for (k, v) in parse_kv(&parts[1..])? {
                    match k.as_str() {
                        "s" => s = parse_usize(&v, "seasonal period")?,
                        "criterion" => criterion = parse_criterion(&v)?,
                        "strategy" => strategy = parse_strategy(&v)?,
                        other => {
                            return Err(CliError::Usage(format!(
                                "unknown sarima:auto option `{other}`"
                            )))
                        }
                    }
                }
                let best = auto_select(train, s, &SelectBounds::default(), criterion, strategy)?;
                eprintln!("selected {} on the training window", best.model_label());
                Ok(Box::new(SarimaSpec {
                    order: best.order,
                    mean: MeanPolicy::Auto,
                }))
            } else {
                let order = parse_order(rest)?;
                Ok(Box::new(SarimaSpec {
                    order,
                    mean: MeanPolicy::Auto,
                }))
            }
        }
        "hw" => {
            let period = parse_usize(
                parts.first().ok_or_else(|| {
                    CliError::Usage("hw spec needs a period, e.g. hw:24".into())
                })?,
                "holt-winters period",
            )?;
            let variant = match parts.get(1).copied() {
                None | Some("additive") => HwVariant::Additive,
                Some("multiplicative") => HwVariant::Multiplicative,
                Some(other) => {
                    return Err(CliError::Usage(format!(
                        "bad holt-winters variant `{other}`"
                    )))
                }
            };
            Ok(Box::new(HwSpec {
                period,
                variant,
                params: None,
            }))
        }
        "nnar" => {
            let mut p = 2;
            let mut cap_p = 0;
            let mut s = 0;
            let mut hidden = None;
            let mut restarts = 20;
            let mut paths = 1000;
            for (k, v) in parse_kv(&parts)? {
                match k.as_str() {
                    "p" => p = parse_usize(&v, "nnar p")?,
                    "P" => cap_p = parse_usize(&v, "nnar P")?,
                    "s" => s = parse_usize(&v, "nnar s")?,
                    "hidden" => hidden = Some(parse_usize(&v, "nnar hidden")?),
                    "restarts" => restarts = parse_usize(&v, "nnar restarts")?,
                    "paths" => paths = parse_usize(&v, "nnar paths")?,
                    other => {
                        return Err(CliError::Usage(format!("unknown nnar option `{other}`")))
                    }
                }
            }
            Ok(Box::new(NnarSpec {
                p,
                cap_p,
                s,
                hidden,
                restarts,
                paths,
                seed,
            }))
        }
        other => Err(CliError::Usage(format!(
            "unknown model family `{other}`: expected sarima|hw|nnar"
        ))),
    }
}

fn evaluate_command(args: EvaluateArgs, seed: u64) -> CliResult<()> {
    let series = read_series(&args.input, args.gaps)?;
    let boundary = parse_timestamp(&args.split)?;
    let (train, test) = series.split(&SplitSpec::AtTimestamp(boundary))?;
    let split_idx = train.len();
    let mode = parse_mode(&args.mode)?;

    let spec = build_model_spec(&args.model_spec, &train, seed)?;
    let rows = spec_rows(
        spec.as_ref(),
        &mode,
        &series,
        &train,
        &test,
        split_idx,
        args.step,
        args.horizon,
    )?;
    write_file(&args.out, &eval_csv(&rows))?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    Ok(())
}

fn compare_command(args: CompareArgs, seed: u64) -> CliResult<()> {
    let series = read_series(&args.input, args.gaps)?;
    let boundary = parse_timestamp(&args.split)?;
    let (train, test) = series.split(&SplitSpec::AtTimestamp(boundary))?;
    let split_idx = train.len();
    let mode = parse_mode(&args.mode)?;
    let criterion = parse_criterion(&args.criterion)?;

    let mut specs: Vec<Box<dyn ForecastModel>> = Vec::new();
    for family in args.models.split(',') {
        match family.trim() {
            "sarima" => {
                let best = auto_select(
                    &train,
                    args.s,
                    &SelectBounds::default(),
                    criterion,
                    SearchStrategy::Stepwise,
                )?;
                eprintln!("selected {} on the training window", best.model_label());
                specs.push(Box::new(SarimaSpec {
                    order: best.order,
                    mean: MeanPolicy::Auto,
                }));
            }
            "hw" => {
                specs.push(Box::new(HwSpec {
                    period: args.s,
                    variant: HwVariant::Additive,
                    params: None,
                }));
                if series.values().iter().all(|v| *v > 0.0) {
                    specs.push(Box::new(HwSpec {
                        period: args.s,
                        variant: HwVariant::Multiplicative,
                        params: None,
                    }));
                } else {
                    eprintln!("note: skipping multiplicative holt-winters (non-positive values)");
                }
            }
            "nnar" => {
                let cap_p = if args.s >= 2 { args.nnar_cap_p } else { 0 };
                specs.push(Box::new(NnarSpec {
                    p: args.nnar_p,
                    cap_p,
                    s: args.s,
                    hidden: None,
                    restarts: args.nnar_restarts,
                    paths: 1000,
                    seed,
                }));
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown model family `{other}`: expected sarima|hw|nnar"
                )))
            }
        }
    }

    let mut rows = Vec::new();
    for spec in &specs {
        rows.extend(spec_rows(
            spec.as_ref(),
            &mode,
            &series,
            &train,
            &test,
            split_idx,
            args.step,
            args.horizon,
        )?);
    }
    write_file(&args.out, &eval_csv(&rows))?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    Ok(())
}
