//! Time-series container on a fixed step grid.
//!
//! A [`Series`] stores only `(start, step)` plus a dense value vector;
//! the timestamp of index `i` is `start + i * step`. All construction
//! paths validate that values are finite and that record timestamps sit
//! exactly on the step grid, so downstream algorithms never see gaps or
//! irregular spacing.

use chrono::{Duration, NaiveDateTime};

use crate::error::{Error, Result};

/// Timestamp format used across CSV and JSON surfaces.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// How [`from_records`] resolves missing grid slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPolicy {
    /// Any gap is an error (default; silent imputation corrupts diagnostics).
    Error,
    /// Fill missing slots with 0.0.
    ZeroFill,
    /// Linear interpolation between the nearest known neighbors.
    LinearInterpolate,
}

/// Fixed-step univariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    start: NaiveDateTime,
    step: Duration,
    values: Vec<f64>,
    label: String,
}

impl Series {
    /// Builds a series, validating the invariants: non-empty, finite
    /// values, positive step. `start` is floored onto the step grid
    /// (whole hours for the default hourly step).
    pub fn new(
        start: NaiveDateTime,
        step: Duration,
        values: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("series values".into()));
        }
        if step <= Duration::zero() {
            return Err(Error::InvalidArgument("step must be positive".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "non-finite series value {bad}"
            )));
        }
        Ok(Self {
            start: floor_to_grid(start, step),
            step,
            values,
            label: label.into(),
        })
    }

    /// Convenience constructor for the common hourly grid.
    pub fn hourly(start: NaiveDateTime, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(start, Duration::hours(1), values, label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn step(&self) -> Duration {
        self.step
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Timestamp of index `i` (may point one past the end for forecasts).
    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + self.step * i as i32
    }

    /// Timestamp of the last observation.
    pub fn end(&self) -> NaiveDateTime {
        self.timestamp(self.len() - 1)
    }

    /// Applies `(1 - B^lag)^times`; the result is shorter by `lag*times`
    /// and starts `lag*times` steps later.
    pub fn difference(&self, lag: usize, times: usize) -> Result<Series> {
        if lag == 0 {
            return Err(Error::InvalidArgument("difference lag must be >= 1".into()));
        }
        if times == 0 {
            return Ok(self.clone());
        }
        let needed = lag * times + 1;
        if self.len() < needed {
            return Err(Error::SeriesTooShort {
                needed,
                actual: self.len(),
            });
        }
        let mut v = self.values.clone();
        for _ in 0..times {
            v = v.windows(lag + 1).map(|w| w[lag] - w[0]).collect();
        }
        // windows(lag+1) steps by 1, so each pass keeps d[t] = v[t+lag] - v[t].
        let shift = (lag * times) as i32;
        Ok(Series {
            start: self.start + self.step * shift,
            step: self.step,
            values: v,
            label: self.label.clone(),
        })
    }

    /// Splits into `(train, test)`; the test part starts at the boundary.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Series, Series)> {
        let idx = spec.resolve_index(self)?;
        let (a, b) = self.values.split_at(idx);
        Ok((
            Series {
                start: self.start,
                step: self.step,
                values: a.to_vec(),
                label: self.label.clone(),
            },
            Series {
                start: self.timestamp(idx),
                step: self.step,
                values: b.to_vec(),
                label: self.label.clone(),
            },
        ))
    }
}

/// Train/test boundary: an index or a timestamp strictly inside the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSpec {
    AtIndex(usize),
    AtTimestamp(NaiveDateTime),
}

impl SplitSpec {
    fn resolve_index(&self, series: &Series) -> Result<usize> {
        let idx = match *self {
            SplitSpec::AtIndex(i) => i,
            SplitSpec::AtTimestamp(ts) => {
                let offset = (ts - series.start).num_seconds();
                let step = series.step.num_seconds();
                if offset < 0 || offset % step != 0 {
                    return Err(Error::BoundaryOutOfRange(format!(
                        "timestamp {} not on the series grid",
                        ts.format(TIMESTAMP_FORMAT)
                    )));
                }
                (offset / step) as usize
            }
        };
        if idx == 0 || idx >= series.len() {
            return Err(Error::BoundaryOutOfRange(format!(
                "index {} outside (0, {})",
                idx,
                series.len()
            )));
        }
        Ok(idx)
    }
}

fn floor_to_grid(ts: NaiveDateTime, step: Duration) -> NaiveDateTime {
    let secs = ts.and_utc().timestamp();
    let step_secs = step.num_seconds();
    let rem = secs.rem_euclid(step_secs);
    ts - Duration::seconds(rem)
}

fn epoch_plus(seconds: i64) -> NaiveDateTime {
    chrono::DateTime::UNIX_EPOCH.naive_utc() + Duration::seconds(seconds)
}

/// Builds a gap-free series from `(timestamp, value)` records.
///
/// Records are sorted by timestamp; every timestamp must sit exactly on
/// the step grid (whole hours for the hourly step). Missing slots are
/// resolved per `gap_policy`; duplicate timestamps are an error.
pub fn from_records(
    records: &[(NaiveDateTime, f64)],
    step: Duration,
    gap_policy: GapPolicy,
) -> Result<Series> {
    if records.is_empty() {
        return Err(Error::EmptyInput("records".into()));
    }
    if step <= Duration::zero() {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let step_secs = step.num_seconds();
    let mut indexed: Vec<(i64, f64)> = Vec::with_capacity(records.len());
    for &(ts, v) in records {
        let secs = ts.and_utc().timestamp();
        if secs.rem_euclid(step_secs) != 0 {
            return Err(Error::NonGridTimestamp(
                ts.format(TIMESTAMP_FORMAT).to_string(),
            ));
        }
        if !v.is_finite() {
            return Err(Error::InvalidValue(format!(
                "non-finite value {v} at {}",
                ts.format(TIMESTAMP_FORMAT)
            )));
        }
        indexed.push((secs / step_secs, v));
    }
    indexed.sort_by_key(|&(slot, _)| slot);

    let first_slot = indexed[0].0;
    let last_slot = indexed[indexed.len() - 1].0;
    let n = (last_slot - first_slot + 1) as usize;
    let mut values: Vec<Option<f64>> = vec![None; n];
    for &(slot, v) in &indexed {
        let i = (slot - first_slot) as usize;
        if values[i].is_some() {
            let ts = epoch_plus(slot * step_secs);
            return Err(Error::DuplicateTimestamp(
                ts.format(TIMESTAMP_FORMAT).to_string(),
            ));
        }
        values[i] = Some(v);
    }

    let filled = fill_gaps(&values, gap_policy, |i| {
        let ts = epoch_plus((first_slot + i as i64) * step_secs);
        ts.format(TIMESTAMP_FORMAT).to_string()
    })?;

    let start = epoch_plus(first_slot * step_secs);
    Series::new(start, step, filled, "series")
}

fn fill_gaps(
    values: &[Option<f64>],
    policy: GapPolicy,
    describe: impl Fn(usize) -> String,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        match v {
            Some(x) => out.push(*x),
            None => match policy {
                GapPolicy::Error => return Err(Error::Gap(describe(i))),
                GapPolicy::ZeroFill => out.push(0.0),
                GapPolicy::LinearInterpolate => {
                    // First and last records always exist, so a gap has
                    // known values on both sides.
                    let prev = values[..i]
                        .iter()
                        .rposition(Option::is_some)
                        .expect("gap has a left neighbor");
                    let next = i + values[i..]
                        .iter()
                        .position(Option::is_some)
                        .expect("gap has a right neighbor");
                    let a = values[prev].unwrap();
                    let b = values[next].unwrap();
                    let t = (i - prev) as f64 / (next - prev) as f64;
                    out.push(a + t * (b - a));
                }
            },
        }
    }
    Ok(out)
}

/// Parses the `timestamp,value` CSV format (ISO-8601 timestamps,
/// UTF-8, comma delimiter, `.` decimal point).
pub fn parse_series_csv(text: &str, step: Duration, gap_policy: GapPolicy) -> Result<Series> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::EmptyInput("csv".into()))?;
    let header = header.trim_end_matches('\r');
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"timestamp") || cols.len() < 2 {
        return Err(Error::CsvParse {
            line: 1,
            message: format!("expected header starting with `timestamp,<value>`, got `{header}`"),
        });
    }
    // Re-ingestion rule: use the `value` column when present, otherwise
    // the second column (covers decomposition/forecast outputs).
    let value_col = cols.iter().position(|c| *c == "value").unwrap_or(1);

    let mut records = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < value_col + 1 {
            return Err(Error::CsvParse {
                line: lineno + 1,
                message: format!("expected at least {} columns", value_col + 1),
            });
        }
        let ts = NaiveDateTime::parse_from_str(fields[0], TIMESTAMP_FORMAT).map_err(|e| {
            Error::CsvParse {
                line: lineno + 1,
                message: format!("bad timestamp `{}`: {e}", fields[0]),
            }
        })?;
        let value: f64 = fields[value_col].parse().map_err(|e| Error::CsvParse {
            line: lineno + 1,
            message: format!("bad value `{}`: {e}", fields[value_col]),
        })?;
        records.push((ts, value));
    }
    from_records(&records, step, gap_policy)
}

/// Formats a series as `timestamp,value` CSV.
pub fn format_series_csv(series: &Series) -> String {
    let mut out = String::from("timestamp,value\n");
    for (i, v) in series.values().iter().enumerate() {
        out.push_str(&format!(
            "{},{}\n",
            series.timestamp(i).format(TIMESTAMP_FORMAT),
            v
        ));
    }
    out
}
