//! Forecast accuracy metrics and rolling-origin backtesting.
//!
//! ME uses the `actual - predicted` sign convention (positive means
//! under-forecasting). Backtests pool errors over every origin-step
//! pair rather than averaging per-origin averages, so each forecast
//! point carries equal weight.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::holtwinters::{hw_fit, hw_forecast, HwVariant};
use crate::nnar::{nnar_fit, nnar_forecast};
use crate::sarima::{self, Forecast, MeanPolicy, SarimaOrder};
use crate::series::Series;

/// Accuracy summary for one model.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub model_name: String,
    /// Mean of (actual - predicted).
    pub me: f64,
    pub rmse: f64,
    /// Fraction of actuals inside the interval, per confidence level
    /// (ascending; empty when no intervals were requested).
    pub coverage: Vec<(f64, f64)>,
    pub n_points: usize,
    pub per_origin: Option<Vec<OriginEval>>,
}

/// Per-origin breakdown of a backtest.
#[derive(Debug, Clone)]
pub struct OriginEval {
    pub origin: usize,
    pub me: f64,
    pub rmse: f64,
    pub n: usize,
}

fn check_equal_lengths(actual: &Series, predicted: &[f64]) -> Result<()> {
    if predicted.is_empty() || actual.is_empty() {
        return Err(Error::EmptyInput("metric inputs".into()));
    }
    if actual.len() != predicted.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} actuals vs {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    Ok(())
}

/// Mean error, `mean(actual - predicted)`.
pub fn mean_error(actual: &Series, predicted: &[f64]) -> Result<f64> {
    check_equal_lengths(actual, predicted)?;
    let n = predicted.len() as f64;
    Ok(actual
        .values()
        .iter()
        .zip(predicted)
        .map(|(a, p)| a - p)
        .sum::<f64>()
        / n)
}

/// Root mean square error.
pub fn rmse(actual: &Series, predicted: &[f64]) -> Result<f64> {
    check_equal_lengths(actual, predicted)?;
    let n = predicted.len() as f64;
    Ok((actual
        .values()
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum::<f64>()
        / n)
        .sqrt())
}

/// Per-level fraction of actuals inside `[lower, upper]` (inclusive).
pub fn interval_coverage(actual: &Series, forecast: &Forecast) -> Result<Vec<(f64, f64)>> {
    if actual.len() != forecast.horizon {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} actuals vs horizon {}",
            actual.len(),
            forecast.horizon
        )));
    }
    let mut out = Vec::with_capacity(forecast.levels.len());
    for (li, level) in forecast.levels.iter().enumerate() {
        let inside = actual
            .values()
            .iter()
            .enumerate()
            .filter(|(j, a)| **a >= forecast.lower[li][*j] && **a <= forecast.upper[li][*j])
            .count();
        out.push((*level, inside as f64 / actual.len() as f64));
    }
    Ok(out)
}

/// A model family that can be refit on a training window and produce an
/// interval forecast; the unit of work for backtesting and comparison.
pub trait ForecastModel: Sync {
    fn name(&self) -> String;
    fn fit_and_forecast(&self, train: &Series, h: usize, levels: &[f64]) -> Result<Forecast>;
}

/// Fixed-order seasonal ARIMA.
pub struct SarimaSpec {
    pub order: SarimaOrder,
    pub mean: MeanPolicy,
}

impl ForecastModel for SarimaSpec {
    fn name(&self) -> String {
        self.order.label()
    }

    fn fit_and_forecast(&self, train: &Series, h: usize, levels: &[f64]) -> Result<Forecast> {
        let fit = sarima::fit(train, &self.order, self.mean)?;
        sarima::forecast(&fit, h, levels)
    }
}

/// Holt-Winters with a fixed variant (weights optimized per refit
/// unless pinned).
pub struct HwSpec {
    pub period: usize,
    pub variant: HwVariant,
    pub params: Option<(f64, f64, f64)>,
}

impl ForecastModel for HwSpec {
    fn name(&self) -> String {
        match self.variant {
            HwVariant::Additive => format!("hw_additive[{}]", self.period),
            HwVariant::Multiplicative => format!("hw_multiplicative[{}]", self.period),
        }
    }

    fn fit_and_forecast(&self, train: &Series, h: usize, levels: &[f64]) -> Result<Forecast> {
        let model = hw_fit(train, self.period, self.variant, self.params)?;
        hw_forecast(&model, h, levels)
    }
}

/// Neural-network autoregression with bootstrap intervals.
pub struct NnarSpec {
    pub p: usize,
    pub cap_p: usize,
    pub s: usize,
    pub hidden: Option<usize>,
    pub restarts: usize,
    pub paths: usize,
    pub seed: u64,
}

impl ForecastModel for NnarSpec {
    fn name(&self) -> String {
        if self.cap_p > 0 {
            format!("nnar({},{})[{}]", self.p, self.cap_p, self.s)
        } else {
            format!("nnar({})", self.p)
        }
    }

    fn fit_and_forecast(&self, train: &Series, h: usize, levels: &[f64]) -> Result<Forecast> {
        let model = nnar_fit(
            train,
            self.p,
            self.cap_p,
            self.s,
            self.hidden,
            self.restarts,
            self.seed,
        )?;
        let level_opt = (!levels.is_empty()).then_some(levels);
        nnar_forecast(&model, h, level_opt, self.paths, self.seed.wrapping_add(1))
    }
}

/// Rolling-origin backtest: for each origin `o = first_origin,
/// first_origin + step, ..` refit on `[0, o)`, forecast `h`, and score
/// against `[o, o + h)`; ME/RMSE are pooled over all origin-step pairs.
pub fn rolling_origin_backtest(
    series: &Series,
    model: &dyn ForecastModel,
    first_origin: usize,
    step: usize,
    h: usize,
    levels: &[f64],
) -> Result<EvalReport> {
    if step < 1 {
        return Err(Error::InvalidArgument("backtest step must be >= 1".into()));
    }
    if h < 1 {
        return Err(Error::InvalidArgument("backtest horizon must be >= 1".into()));
    }
    let n = series.len();
    if first_origin < 1 || first_origin + h > n {
        return Err(Error::InvalidArgument(format!(
            "no valid origin: first_origin {first_origin} with h {h} exceeds length {n}"
        )));
    }
    let origins: Vec<usize> = (first_origin..=n - h).step_by(step).collect();

    struct OriginOutcome {
        origin: usize,
        errors: Vec<f64>,
        inside: Vec<usize>,
    }

    let outcomes: Vec<Result<OriginOutcome>> = origins
        .par_iter()
        .map(|&o| {
            let (train, rest) = series.split(&crate::series::SplitSpec::AtIndex(o))?;
            let fc = model.fit_and_forecast(&train, h, levels)?;
            let actual_values = &rest.values()[..h];
            let errors: Vec<f64> = actual_values
                .iter()
                .zip(&fc.points)
                .map(|(a, p)| a - p)
                .collect();
            let mut inside = vec![0usize; fc.levels.len()];
            for
                (li, count) in inside.iter_mut().enumerate()
            {
                *count = actual_values
                    .iter()
                    .enumerate()
                    .filter(|(j, a)| **a >= fc.lower[li][*j] && **a <= fc.upper[li][*j])
                    .count();
            }
            Ok(OriginOutcome {
                origin: o,
                errors,
                inside,
            })
        })
        .collect();

    let mut per_origin = Vec::with_capacity(origins.len());
    let mut sum_e = 0.0;
    let mut sum_e2 = 0.0;
    let mut total = 0usize;
    let mut inside_total: Vec<usize> = Vec::new();
    for outcome in outcomes {
        let o = outcome?;
        let n_o = o.errors.len();
        let me_o = o.errors.iter().sum::<f64>() / n_o as f64;
        let rmse_o = (o.errors.iter().map(|e| e * e).sum::<f64>() / n_o as f64).sqrt();
        per_origin.push(OriginEval {
            origin: o.origin,
            me: me_o,
            rmse: rmse_o,
            n: n_o,
        });
        sum_e += o.errors.iter().sum::<f64>();
        sum_e2 += o.errors.iter().map(|e| e * e).sum::<f64>();
        total += n_o;
        if inside_total.is_empty() {
            inside_total = o.inside.clone();
        } else {
            for (acc, v) in inside_total.iter_mut().zip(&o.inside) {
                *acc += v;
            }
        }
    }

    let mut sorted_levels = levels.to_vec();
    sorted_levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted_levels.dedup();
    let coverage = sorted_levels
        .iter()
        .zip(&inside_total)
        .map(|(l, c)| (*l, *c as f64 / total as f64))
        .collect();

    Ok(EvalReport {
        model_name: model.name(),
        me: sum_e / total as f64,
        rmse: (sum_e2 / total as f64).sqrt(),
        coverage,
        n_points: total,
        per_origin: Some(per_origin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(values: Vec<f64>) -> Series {
        Series::hourly(
            NaiveDate::from_ymd_opt(2014, 1, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            values,
            "t",
        )
        .unwrap()
    }

    #[test]
    fn mean_error_examples() {
        let a = series(vec![3.0, 5.0]);
        assert_abs_diff_eq!(mean_error(&a, &[3.0, 5.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mean_error(&a, &[2.0, 4.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mean_error(&a, &[4.0, 3.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert!(mean_error(&a, &[1.0]).is_err());
        assert!(mean_error(&a, &[]).is_err());
    }

    #[test]
    fn rmse_examples() {
        let a = series(vec![1.0, 2.0]);
        assert_abs_diff_eq!(rmse(&a, &[1.0, 2.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rmse(&a, &[0.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
        // Errors [3, -4] -> sqrt(25/2).
        assert_abs_diff_eq!(
            rmse(&a, &[-2.0, 6.0]).unwrap(),
            (12.5f64).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn metrics_match_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let n = rng.gen_range(1..40);
            let actual: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let predicted: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let s = series(actual.clone());

            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for i in 0..n {
                let e = actual[i] - predicted[i];
                sum += e;
                sum2 += e * e;
            }
            let me_oracle = sum / n as f64;
            let rmse_oracle = (sum2 / n as f64).sqrt();

            assert_abs_diff_eq!(mean_error(&s, &predicted).unwrap(), me_oracle, epsilon = 1e-12);
            assert_abs_diff_eq!(rmse(&s, &predicted).unwrap(), rmse_oracle, epsilon = 1e-12);
            // Power-mean inequality.
            assert!(rmse_oracle.powi(2) + 1e-12 >= me_oracle.powi(2));
        }
    }

    #[test]
    fn mean_error_shift_linearity() {
        let a = series(vec![4.0, 8.0, 1.0, 3.0]);
        let pred = [3.0, 9.0, 0.5, 2.0];
        let shifted: Vec<f64> = pred.iter().map(|p| p + 2.5).collect();
        let base = mean_error(&a, &pred).unwrap();
        let after = mean_error(&a, &shifted).unwrap();
        assert_abs_diff_eq!(after, base - 2.5, epsilon = 1e-12);
    }

    fn dummy_forecast(points: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Forecast {
        let h = points.len();
        Forecast {
            start: NaiveDate::from_ymd_opt(2014, 1, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            step: chrono::Duration::hours(1),
            horizon: h,
            points,
            levels: vec![0.80, 0.95],
            lower: vec![lower.clone(), lower.iter().map(|v| v - 1.0).collect()],
            upper: vec![upper.clone(), upper.iter().map(|v| v + 1.0).collect()],
            se: vec![],
            approximate_intervals: false,
        }
    }

    #[test]
    fn interval_coverage_cases() {
        let actual = series(vec![5.0, 6.0, 7.0, 8.0]);
        let inside = dummy_forecast(
            vec![5.0, 6.0, 7.0, 8.0],
            vec![4.0, 5.0, 6.0, 7.0],
            vec![6.0, 7.0, 8.0, 9.0],
        );
        let cov = interval_coverage(&actual, &inside).unwrap();
        assert_eq!(cov, vec![(0.80, 1.0), (0.95, 1.0)]);

        let below = dummy_forecast(
            vec![0.0; 4],
            vec![-1.0, -1.0, -1.0, -1.0],
            vec![1.0, 1.0, 1.0, 1.0],
        );
        let cov = interval_coverage(&actual, &below).unwrap();
        assert_eq!(cov[0].1, 0.0);
        assert_eq!(cov[1].1, 0.0);

        // Half inside at the tight level.
        let half = dummy_forecast(
            vec![5.0, 6.0, 0.0, 0.0],
            vec![4.0, 5.0, -1.0, -1.0],
            vec![6.0, 7.0, 1.0, 1.0],
        );
        let cov = interval_coverage(&actual, &half).unwrap();
        assert_abs_diff_eq!(cov[0].1, 0.5, epsilon = 1e-15);

        let wrong_len = series(vec![1.0, 2.0]);
        assert!(interval_coverage(&wrong_len, &half).is_err());
    }

    /// Stub that forecasts the true future values exactly.
    struct PerfectStub {
        full: Vec<f64>,
    }

    impl ForecastModel for PerfectStub {
        fn name(&self) -> String {
            "perfect_stub".into()
        }

        fn fit_and_forecast(&self, train: &Series, h: usize, _levels: &[f64]) -> Result<Forecast> {
            let o = train.len();
            let points = self.full[o..o + h].to_vec();
            Ok(Forecast {
                start: train.timestamp(o),
                step: train.step(),
                horizon: h,
                points,
                levels: vec![],
                lower: vec![],
                upper: vec![],
                se: vec![],
                approximate_intervals: false,
            })
        }
    }

    /// Stub whose one-step error at origin `o` is `errors[index(o)]`.
    struct KnownErrorStub {
        full: Vec<f64>,
        first_origin: usize,
        errors: Vec<f64>,
    }

    impl ForecastModel for KnownErrorStub {
        fn name(&self) -> String {
            "known_error_stub".into()
        }

        fn fit_and_forecast(&self, train: &Series, h: usize, _levels: &[f64]) -> Result<Forecast> {
            let o = train.len();
            let e = self.errors[o - self.first_origin];
            let points = self.full[o..o + h].iter().map(|v| v - e).collect();
            Ok(Forecast {
                start: train.timestamp(o),
                step: train.step(),
                horizon: h,
                points,
                levels: vec![],
                lower: vec![],
                upper: vec![],
                se: vec![],
                approximate_intervals: false,
            })
        }
    }

    #[test]
    fn backtest_perfect_stub_scores_zero() {
        let values: Vec<f64> = (0..30).map(|t| (t as f64 * 0.7).sin() * 4.0).collect();
        let s = series(values.clone());
        let report =
            rolling_origin_backtest(&s, &PerfectStub { full: values }, 20, 2, 3, &[]).unwrap();
        assert_abs_diff_eq!(report.me, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.rmse, 0.0, epsilon = 1e-15);
        assert_eq!(report.n_points, 12);
    }

    #[test]
    fn backtest_known_errors_pool_correctly() {
        let values: Vec<f64> = (0..23).map(|t| t as f64).collect();
        let s = series(values.clone());
        let stub = KnownErrorStub {
            full: values,
            first_origin: 20,
            errors: vec![1.0, -1.0, 2.0],
        };
        let report = rolling_origin_backtest(&s, &stub, 20, 1, 1, &[]).unwrap();
        assert_eq!(report.n_points, 3);
        assert_abs_diff_eq!(report.me, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rmse, 2.0f64.sqrt(), epsilon = 1e-12);
        let origins = report.per_origin.unwrap();
        assert_eq!(origins.len(), 3);
        assert_abs_diff_eq!(origins[2].me, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn backtest_single_origin_reduces_to_holdout() {
        let values: Vec<f64> = (0..25).map(|t| (t as f64).sqrt() * 3.0).collect();
        let s = series(values.clone());
        let stub = KnownErrorStub {
            full: values.clone(),
            first_origin: 20,
            errors: vec![0.5],
        };
        let report = rolling_origin_backtest(&s, &stub, 20, 10, 5, &[]).unwrap();
        assert_eq!(report.n_points, 5);
        // Identical to plain holdout scoring of the same stub forecast.
        let (train, test) = s.split(&crate::series::SplitSpec::AtIndex(20)).unwrap();
        let fc = stub.fit_and_forecast(&train, 5, &[]).unwrap();
        let me_holdout = mean_error(&test, &fc.points).unwrap();
        let rmse_holdout = rmse(&test, &fc.points).unwrap();
        assert_abs_diff_eq!(report.me, me_holdout, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rmse, rmse_holdout, epsilon = 1e-12);
    }

    #[test]
    fn backtest_rejects_bad_geometry() {
        let s = series((0..10).map(f64::from).collect());
        let stub = PerfectStub {
            full: s.values().to_vec(),
        };
        assert!(rolling_origin_backtest(&s, &stub, 8, 1, 3, &[]).is_err());
        assert!(rolling_origin_backtest(&s, &stub, 0, 1, 3, &[]).is_err());
        assert!(rolling_origin_backtest(&s, &stub, 5, 0, 2, &[]).is_err());
    }

    #[test]
    fn backtest_with_sarima_spec_covers() {
        let order = SarimaOrder::new(1, 0, 0);
        let sim = sarima::simulate(&order, &[0.6], &[], &[], &[], 0.0, 1.0, 260, 100, 17).unwrap();
        let spec = SarimaSpec {
            order,
            mean: MeanPolicy::Off,
        };
        let report = rolling_origin_backtest(&sim, &spec, 240, 5, 2, &[0.95]).unwrap();
        assert_eq!(report.coverage.len(), 1);
        assert!(report.coverage[0].1 > 0.5, "coverage {:?}", report.coverage);
        assert!(report.rmse > 0.0);
    }
}
