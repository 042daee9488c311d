//! Diagnostic report document (report_version 1).

use edcast_core::diagnostics::{CorrelogramResult, TestResult};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct DiagnosticReport {
    pub report_version: u32,
    pub series: SeriesMeta,
    pub alpha: f64,
    pub raw: Section,
    pub differenced: Section,
}

#[derive(Debug, Serialize)]
pub struct SeriesMeta {
    pub label: String,
    pub start: String,
    pub step_seconds: i64,
    pub n: usize,
}

/// One test battery: the five Table-style rows (KPSS, ADF, Ljung-Box,
/// Jarque-Bera, Anderson-Darling) plus correlograms.
#[derive(Debug, Serialize)]
pub struct Section {
    /// Regular differencing applied before testing (0 for raw).
    pub d: usize,
    pub tests: Vec<TestResult>,
    pub acf: CorrelogramResult,
    pub pacf: CorrelogramResult,
}
