use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::numerics::Limit;

/// How `measured` is compared with `oracle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    /// Sup over probes of `|measured - oracle|`.
    Sup,
    /// Integrated absolute difference.
    L1,
    /// Extrapolated limit against a constant; threshold is relative.
    Ratio,
    /// Largest relative deviation over probes.
    Relative,
    /// Kolmogorov-Smirnov distance.
    Ks,
    /// Count of shape violations (monotonicity, convexity).
    Shape,
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::Sup => "sup",
            Norm::L1 => "l1",
            Norm::Ratio => "ratio",
            Norm::Relative => "relative",
            Norm::Ks => "ks",
            Norm::Shape => "shape",
        })
    }
}

/// One probe: where it was taken and both sides of the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub x: f64,
    pub measured: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub check: String,
    pub norm: Norm,
    pub probes: Vec<Probe>,
    /// Summary statistic: the norm value, or the extrapolated limit for [`Norm::Ratio`].
    pub measured: f64,
    /// Target of the summary statistic (zero for distances).
    pub oracle: f64,
    /// Where `oracle` and the per-probe oracle values come from.
    pub oracle_source: String,
    pub uncertainty: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl ValidationReport {
    /// A distance-type check: passes when `value ≤ threshold + uncertainty`.
    pub fn distance(
        check: impl Into<String>,
        norm: Norm,
        probes: Vec<Probe>,
        value: f64,
        threshold: f64,
        oracle_source: impl Into<String>,
    ) -> Self {
        Self::bounded(check, norm, probes, value, 0.0, threshold, oracle_source)
    }

    pub fn bounded(
        check: impl Into<String>,
        norm: Norm,
        probes: Vec<Probe>,
        value: f64,
        uncertainty: f64,
        threshold: f64,
        oracle_source: impl Into<String>,
    ) -> Self {
        Self {
            check: check.into(),
            norm,
            probes,
            measured: value,
            oracle: 0.0,
            oracle_source: oracle_source.into(),
            uncertainty,
            threshold,
            passed: value <= threshold + uncertainty,
        }
    }

    /// A limit check: passes when `|limit - oracle| ≤ threshold·|oracle| + uncertainty`.
    pub fn limit(
        check: impl Into<String>,
        probes: Vec<Probe>,
        limit: Limit,
        oracle: f64,
        threshold: f64,
        oracle_source: impl Into<String>,
    ) -> Self {
        let passed = (limit.value - oracle).abs() <= threshold * oracle.abs() + limit.uncertainty;
        Self {
            check: check.into(),
            norm: Norm::Ratio,
            probes,
            measured: limit.value,
            oracle,
            oracle_source: oracle_source.into(),
            uncertainty: limit.uncertainty,
            threshold,
            passed,
        }
    }

    /// `|measured - oracle|`, relative to the oracle for ratio checks.
    pub fn deviation(&self) -> f64 {
        match self.norm {
            Norm::Ratio => (self.measured - self.oracle).abs() / self.oracle.abs(),
            _ => self.measured,
        }
    }

    /// `check,x,measured,oracle`, one row per probe.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "check,x,measured,oracle")?;
        for p in &self.probes {
            writeln!(
                out,
                "{},{:.11e},{:.11e},{:.11e}",
                self.check, p.x, p.measured, p.oracle
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn summary_row(&self) -> String {
        format!(
            "{:<28} {:<8} {:>13.6e} {:>13.6e} {:>10.3e} {:>10.3e}  {}",
            self.check,
            self.norm.to_string(),
            self.measured,
            self.oracle,
            self.uncertainty,
            self.threshold,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Fixed-width table of reports, one line each.
pub fn summary_table(reports: &[ValidationReport]) -> String {
    let mut out = format!(
        "{:<28} {:<8} {:>13} {:>13} {:>10} {:>10}  result\n",
        "check", "norm", "measured", "oracle", "uncert", "threshold"
    );
    for r in reports {
        let _ = writeln!(out, "{}", r.summary_row());
    }
    out
}
